"""Run configuration: a flat ``key = value`` text format.

Example::

    # constant rate, equal correlations
    p = 3
    n = 50000
    seed = 12345
    lambda = 2, 2, 2
    corr = 1.0, 0.4, 0.4
           0.4, 1.0, 0.4
           0.4, 0.4, 1.0
    apply_correction = auto
    sampler = exact
    output_path = samples.csv

Indented lines continue the previous key (one matrix row per line). Values
may be separated by commas or whitespace; ``#`` starts a comment.
"""

from dataclasses import dataclass, replace

import numpy as np

from .corrmat import validate_correlation
from .errors import ConfigError, MatrixError

KEYS = ("p", "n", "seed", "lambda", "corr", "apply_correction", "sampler", "output_path", "output_format", "grid_size")
REQUIRED = ("lambda", "corr")


@dataclass(frozen=True)
class RunConfig:
    lam: tuple
    corr: tuple
    n: int = 50_000
    seed: int = 12345
    apply_correction: bool | None = None
    sampler: str = "exact"
    output_path: str | None = None
    output_format: str = "csv"
    grid_size: int = 200_000

    @property
    def p(self) -> int:
        return len(self.lam)

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        cfg = replace(self, **kw)
        cfg.check()
        return cfg

    def check(self):
        if self.n < 1:
            raise ConfigError(f"field n: must be a positive integer, got {self.n}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"field seed: must be a 64-bit unsigned integer, got {self.seed}")
        if self.sampler not in ("exact", "clt"):
            raise ConfigError(f"field sampler: expected 'exact' or 'clt', got {self.sampler!r}")
        if self.output_format != "csv":
            raise ConfigError(f"field output_format: only 'csv' is supported, got {self.output_format!r}")
        if self.grid_size < 1000:
            raise ConfigError(f"field grid_size: must be at least 1000, got {self.grid_size}")
        for i, v in enumerate(self.lam):
            if not (np.isfinite(v) and v > 0):
                raise ConfigError(f"field lambda[{i + 1}]: rate must be finite and > 0, got {v}")
        p = self.p
        if len(self.corr) != p:
            raise ConfigError(f"field corr: expected {p} rows to match lambda, got {len(self.corr)}")
        for i, row in enumerate(self.corr):
            if len(row) != p:
                raise ConfigError(f"field corr[{i + 1}]: expected {p} values, got {len(row)}")
        try:
            validate_correlation(self.corr)
        except MatrixError as e:
            raise ConfigError(f"field corr: {e}") from None


def _numbers(text: str, lineno: int, key: str, cast=float) -> list:
    parts = text.replace(",", " ").split()
    out = []
    for tok in parts:
        try:
            out.append(cast(tok))
        except ValueError:
            raise ConfigError(f"line {lineno}: field {key}: cannot parse {tok!r} as a number") from None
    return out


def _bool(text: str, lineno: int):
    t = text.strip().lower()
    if t in ("auto", ""):
        return None
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"line {lineno}: field apply_correction: expected true/false/auto, got {text.strip()!r}")


def _int(text: str, lineno: int, key: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"line {lineno}: field {key}: expected an integer, got {text.strip()!r}") from None


def parse_config(text: str) -> RunConfig:
    entries: dict[str, list] = {}
    last = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line[0].isspace() and "=" not in line:
            if last is None:
                raise ConfigError(f"line {lineno}: continuation line without a preceding key")
            entries[last][1].append((lineno, line.strip()))
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = (lineno, [(lineno, value)] if value else [])
        last = key
    for key in REQUIRED:
        if key not in entries:
            raise ConfigError(f"field {key}: missing required key")

    def scalar(key):
        lineno, vals = entries[key]
        if len(vals) != 1:
            raise ConfigError(f"line {lineno}: field {key}: expected a single value")
        return vals[0]

    kw = {}
    lineno, vals = entries["lambda"]
    kw["lam"] = tuple(x for ln, v in vals for x in _numbers(v, ln, "lambda"))
    lineno, vals = entries["corr"]
    rows = [_numbers(v, ln, "corr") for ln, v in vals]
    if len(rows) == 1 and len(rows[0]) == len(kw["lam"]) ** 2 and len(kw["lam"]) > 1:
        p = len(kw["lam"])
        rows = [rows[0][i * p:(i + 1) * p] for i in range(p)]
    kw["corr"] = tuple(tuple(r) for r in rows)
    for key in ("n", "seed", "grid_size"):
        if key in entries:
            ln, v = scalar(key)
            kw[key] = _int(v, ln, key)
    if "apply_correction" in entries:
        ln, v = scalar("apply_correction")
        kw["apply_correction"] = _bool(v, ln)
    for key in ("sampler", "output_path", "output_format"):
        if key in entries:
            kw[key] = scalar(key)[1].strip()
    if "p" in entries:
        ln, v = scalar("p")
        p = _int(v, ln, "p")
        if p != len(kw["lam"]):
            raise ConfigError(f"line {entries['lambda'][0]}: field lambda: p = {p} but {len(kw['lam'])} rates given")
    cfg = RunConfig(**kw)
    cfg.check()
    return cfg


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def dump_config(cfg: RunConfig) -> str:
    """Inverse of :func:`parse_config` (round-trips every field)."""
    ac = "auto" if cfg.apply_correction is None else str(cfg.apply_correction).lower()
    lines = [
        f"p = {cfg.p}",
        f"n = {cfg.n}",
        f"seed = {cfg.seed}",
        "lambda = " + ", ".join(repr(float(x)) for x in cfg.lam),
    ]
    rows = [", ".join(repr(float(x)) for x in row) for row in cfg.corr]
    lines.append("corr = " + rows[0])
    lines.extend("       " + r for r in rows[1:])
    lines += [f"apply_correction = {ac}", f"sampler = {cfg.sampler}", f"grid_size = {cfg.grid_size}"]
    if cfg.output_path:
        lines.append(f"output_path = {cfg.output_path}")
    lines.append(f"output_format = {cfg.output_format}")
    return "\n".join(lines) + "\n"
