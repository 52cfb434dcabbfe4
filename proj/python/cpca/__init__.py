"""Robust principal component analysis with a Cauchy profile likelihood."""

from ._cpca import (
    CpcaError,
    __version__,
    angle_degrees,
    cauchy_if,
    classical_first_pc,
    classical_if,
    empirical_if,
    fit_cauchy,
    fit_cauchy_pca,
    pp_first_pc,
    prepare,
    run_scenario,
)

__all__ = [
    "CpcaError",
    "__version__",
    "angle_degrees",
    "cauchy_if",
    "classical_first_pc",
    "classical_if",
    "empirical_if",
    "fit_cauchy",
    "fit_cauchy_pca",
    "pp_first_pc",
    "prepare",
    "run_scenario",
]
