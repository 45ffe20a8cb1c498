"""Multivariate Poisson sampling through a Gaussian copula."""

from .copula import (
    CopulaSpec,
    CorrectionFit,
    FeasibleBounds,
    SampleMatrix,
    correct_matrix,
    correct_pair,
    correct_target,
    feasible_bounds,
    fit_correction,
    generate,
    make_spec,
)
from .corrmat import CorrelationMatrix, FactorMatrix, Space, factorize, nearest_psd, validate_correlation
from .randsrc import RandomStream, Sampler
from .scalardist import normal_cdf, poisson_cdf, poisson_pmf, poisson_quantile
from .stats import ValidationReport, chisq_gof, empirical_correlation, validate
from .errors import Infeasible, MvPoisError

__version__ = "0.1.0"
