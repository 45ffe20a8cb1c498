"""Command-line front end.

Exit codes: 0 success, 2 configuration/usage error, 3 infeasible
correlation, 4 validation failure, 5 I/O error. Errors print one line to
stderr, ``error[CODE]: message``.
"""

import argparse
import sys
import time

import numpy as np

from . import copula, experiments
from .config import RunConfig, load_config
from .errors import ConfigError, Infeasible, MvPoisError, NearSymmetricBounds
from .stats import empirical_correlation, validate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_VALIDATION = 4
EXIT_IO = 5


class Report:
    """Ordered ``key = value`` lines with stable key names."""

    def __init__(self):
        self.lines = []

    def add(self, key, value):
        if isinstance(value, float):
            value = f"{value:.6g}"
        elif isinstance(value, (list, tuple, np.ndarray)):
            value = " ".join(f"{float(v):.6g}" for v in np.ravel(value))
        self.lines.append(f"{key} = {value}")

    def matrix(self, key, m):
        for i, row in enumerate(np.asarray(m)):
            self.add(f"{key}.{i + 1}", row)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def write_csv(path, counts: np.ndarray):
    p = counts.shape[1]
    header = ",".join(f"x{j + 1}" for j in range(p))
    body = "\n".join(",".join(map(str, row)) for row in counts.tolist())
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(header + "\n")
        if body:
            fh.write(body + "\n")


def read_csv(path) -> np.ndarray:
    with open(path, encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        if not all(h == f"x{j + 1}" for j, h in enumerate(header)):
            raise ConfigError(f"{path}: header must be x1,...,xp, got {','.join(header)!r}")
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                vals = [int(v) for v in line.split(",")]
            except ValueError:
                raise ConfigError(f"{path}: line {lineno}: non-integer value") from None
            if len(vals) != len(header):
                raise ConfigError(f"{path}: line {lineno}: expected {len(header)} values, got {len(vals)}")
            rows.append(vals)
    return np.array(rows, dtype=np.int64).reshape(-1, len(header))


def spec_from_config(cfg: RunConfig) -> copula.CopulaSpec:
    return copula.make_spec(cfg.lam, cfg.corr, cfg.apply_correction, cfg.sampler)


def cmd_generate(args) -> int:
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(
        seed=args.seed,
        n=args.n,
        output_path=args.out,
        sampler=args.sampler,
        grid_size=args.grid_size,
        apply_correction=False if args.no_correction else None,
    )
    if not cfg.output_path:
        raise ConfigError("field output_path: no output file (set output_path or pass --out)")
    t0 = time.perf_counter()
    spec = spec_from_config(cfg)
    out = copula.generate(spec, cfg.n, cfg.seed, workers=args.workers, grid_size=cfg.grid_size)
    write_csv(cfg.output_path, out.counts)
    elapsed = time.perf_counter() - t0

    rep = Report()
    rep.add("command", "generate")
    rep.add("output", cfg.output_path)
    rep.add("seed", cfg.seed)
    rep.add("n", cfg.n)
    rep.add("p", cfg.p)
    rep.add("rates", list(cfg.lam))
    rep.add("sampler", spec.sampler.value)
    rep.add("apply_correction", str(spec.apply_correction).lower())
    rep.add("factor_method", out.report.factor_method)
    rep.matrix("target_corr", spec.target_corr.entries)
    rep.matrix("working_corr", out.report.working_corr.entries)
    rep.add("psd_adjustment", out.report.psd_adjustment)
    rep.add("passthrough_pairs", " ".join(f"{i + 1}-{j + 1}" for i, j in out.report.passthrough_pairs) or "none")
    try:
        rep.matrix("empirical_corr", empirical_correlation(out.counts))
    except MvPoisError:
        rep.add("empirical_corr", "undefined")
    rep.add("marginal_means", out.counts.mean(axis=0))
    rep.add("elapsed_seconds", elapsed)
    text = rep.text()
    with open(cfg.output_path + ".report", "w", encoding="utf-8") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_bounds(args) -> int:
    bounds = copula.feasible_bounds(args.lam1, args.lam2, args.grid_size)
    rep = Report()
    rep.add("lambda1", args.lam1)
    rep.add("lambda2", args.lam2)
    rep.add("grid_size", args.grid_size)
    rep.add("min_corr", bounds.min_corr)
    rep.add("max_corr", bounds.max_corr)
    try:
        fit = copula.fit_correction(bounds)
        rep.add("a", fit.a)
        rep.add("b", fit.b)
        rep.add("c", fit.c)
    except NearSymmetricBounds:
        rep.add("fit", "near-symmetric bounds; identity correction")
    sys.stdout.write(rep.text())
    return EXIT_OK


def cmd_correct(args) -> int:
    value = copula.correct_pair(args.lam1, args.lam2, args.r, args.grid_size)
    rep = Report()
    rep.add("lambda1", args.lam1)
    rep.add("lambda2", args.lam2)
    rep.add("target", args.r)
    if args.r != 0.0:
        bounds = copula.feasible_bounds(args.lam1, args.lam2, args.grid_size)
        rep.add("min_corr", bounds.min_corr)
        rep.add("max_corr", bounds.max_corr)
    rep.add("corrected", value)
    sys.stdout.write(rep.text())
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    counts = read_csv(args.csv)
    if counts.shape[1] != cfg.p:
        raise ConfigError(f"CSV has {counts.shape[1]} columns but the config describes p = {cfg.p}")
    if counts.shape[0] < 2:
        raise ConfigError("CSV needs at least two rows")
    res = validate(counts, cfg.lam, cfg.corr)
    rep = Report()
    rep.add("command", "validate")
    rep.add("n", res.n)
    rep.add("p", cfg.p)
    rep.add("rates", res.rates)
    rep.matrix("target_corr", res.target_corr)
    rep.matrix("empirical_corr", res.empirical_corr)
    rep.add("max_corr_error", res.max_corr_error)
    rep.add("marginal_means", res.marginal_means)
    rep.add("marginal_variances", res.marginal_variances)
    for j, g in enumerate(res.gof):
        rep.add(f"gof.x{j + 1}", f"statistic={g.statistic:.6g} df={g.df} p_value={g.p_value:.6g}")
    for j, table in enumerate(res.obs_vs_exp):
        for k, obs, exp_ in table:
            rep.add(f"obs_vs_exp.x{j + 1}.{int(k)}", f"{int(obs)} {exp_:.6g}")
    for name, ok in res.checks.items():
        rep.add(f"check.{name}", "pass" if ok else "FAIL")
    rep.add("result", "pass" if res.passed else "FAIL")
    sys.stdout.write(rep.text())
    return EXIT_OK if res.passed else EXIT_VALIDATION


def _demo_matrix(name, rates, corr, n, seed, grid_size) -> Report:
    rep = Report()
    rep.add("experiment", name)
    rep.add("seed", seed)
    rep.add("n", n)
    rep.add("rates", list(rates))
    rep.matrix("target_corr", corr)
    rep.matrix("target_cov", experiments.covariance(rates, corr))
    worst = 0.0
    for label, flag in (("uncorrected", False), ("corrected", True)):
        spec = copula.make_spec(rates, corr, flag)
        out = copula.generate(spec, n, seed, grid_size=grid_size, keep_normal=True)
        emp = empirical_correlation(out.counts)
        rep.matrix(f"{label}.normal_corr", np.corrcoef(out.normal, rowvar=False))
        rep.matrix(f"{label}.poisson_corr", emp)
        rep.add(f"{label}.max_corr_error", float(np.abs(emp - np.asarray(corr)).max()))
        rep.add(f"{label}.marginal_means", out.counts.mean(axis=0))
        rep.add(f"{label}.marginal_variances", out.counts.var(axis=0, ddof=1))
        if flag == (min(rates) < copula.AUTO_CORRECTION_RATE):
            worst = float(np.abs(emp - np.asarray(corr)).max())
    rep.add("default_mode_max_corr_error", worst)
    return rep


def cmd_demo(args) -> int:
    seed = experiments.DEMO_SEED if args.seed is None else args.seed
    n = experiments.DEMO_N if args.n is None else args.n
    if n < 2:
        raise ConfigError("field n: demo needs at least two rows")
    if args.experiment == "const-rate":
        rep = _demo_matrix("const-rate", experiments.CONST_RATE["rates"], experiments.CONST_RATE["corr"], n, seed, args.grid_size)
    elif args.experiment == "mixed-rate":
        rep = _demo_matrix("mixed-rate", experiments.MIXED_RATE["rates"], experiments.MIXED_RATE["corr"], n, seed, args.grid_size)
    else:
        rep = Report()
        rep.add("experiment", "low-rate-correction")
        rep.add("seed", seed)
        rep.add("n", n)
        rows = experiments.low_rate_sweep(n=n, seed=seed, grid_size=args.grid_size)
        for lam1, lam2 in experiments.LOW_RATE_PAIRS:
            sel = [r for r in rows if (r.lam1, r.lam2) == (lam1, lam2)]
            key = f"pair.{lam1:g}_{lam2:g}"
            for r in sel:
                rep.add(f"{key}.target.{r.target:+.4f}", f"corrected={r.corrected:.4f} uncorrected={r.uncorrected:.4f}")
            rep.add(f"{key}.max_error_corrected", max(r.corrected_error for r in sel))
            rep.add(f"{key}.max_error_uncorrected", max(r.uncorrected_error for r in sel))
        rep.add("max_error_corrected", max(r.corrected_error for r in rows))
        rep.add("max_error_uncorrected", max(r.uncorrected_error for r in rows))
    sys.stdout.write(rep.text())
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"usage: {message}")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mvpois", description="Multivariate Poisson sampling via a Gaussian copula")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="draw samples to CSV")
    g.add_argument("--config", required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--out")
    g.add_argument("--no-correction", action="store_true")
    g.add_argument("--sampler", choices=("exact", "clt"))
    g.add_argument("--grid-size", type=int)
    g.add_argument("--workers", type=int, default=1)
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("bounds", help="feasible correlation bounds for a rate pair")
    b.add_argument("lam1", type=float)
    b.add_argument("lam2", type=float)
    b.add_argument("--grid-size", "-m", type=int, default=copula.DEFAULT_GRID)
    b.set_defaults(func=cmd_bounds)

    c = sub.add_parser("correct", help="Normal-side correlation for a target Poisson correlation")
    c.add_argument("lam1", type=float)
    c.add_argument("lam2", type=float)
    c.add_argument("r", type=float)
    c.add_argument("--grid-size", "-m", type=int, default=copula.DEFAULT_GRID)
    c.set_defaults(func=cmd_correct)

    v = sub.add_parser("validate", help="check a CSV against its config")
    v.add_argument("csv")
    v.add_argument("--config", required=True)
    v.set_defaults(func=cmd_validate)

    d = sub.add_parser("demo", help="rerun a reference experiment")
    d.add_argument("experiment", choices=("const-rate", "mixed-rate", "low-rate-correction"))
    d.add_argument("--seed", type=int)
    d.add_argument("--n", type=int)
    d.add_argument("--grid-size", type=int, default=copula.DEFAULT_GRID)
    d.set_defaults(func=cmd_demo)
    return ap


def _fail(code: str, msg: str, status: int) -> int:
    sys.stderr.write(f"error[{code}]: {' '.join(str(msg).split())}\n")
    return status


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except Infeasible as e:
        return _fail(e.code, e, EXIT_INFEASIBLE)
    except MvPoisError as e:
        return _fail(e.code, e, EXIT_CONFIG)
    except OSError as e:
        return _fail("IO", e, EXIT_IO)


if __name__ == "__main__":
    sys.exit(main())
