"""Matrix-free Stokes multigrid on hierarchically refined tetrahedral meshes."""

from fractions import Fraction

from . import _core
from ._core import (
    BenchmarkProblem,
    Discretization,
    Relaxation,
    SchurScaling,
    SolverParams,
    StokesOperator,
    default_omega_inv,
    default_sweep,
    n_tet,
    parse_discretization,
    parse_params,
    reference_params,
    search_space,
)

__version__ = _core.__version__


def _kind(kind):
    return parse_discretization(kind.lower()) if isinstance(kind, str) else kind


def _params(params):
    return parse_params(params) if isinstance(params, str) else params


def operator_work(kind, level):
    return Fraction(_core.operator_work(_kind(kind), level))


def smoother_work_limit(kind, a_hat, xi):
    return Fraction(_core.smoother_work_limit(_kind(kind), a_hat, xi))


def vcycle_work_bound_limit(kind, params):
    return Fraction(_core.vcycle_work_bound_limit(_kind(kind), _params(params)))


def fmg_work(kind, params, level=None):
    """Predicted FMG work in work units; asymptotic unless a level is given."""
    return Fraction(_core.fmg_work(_kind(kind), _params(params), level))


def cube(kind, max_level):
    return BenchmarkProblem.cube(_kind(kind), max_level)


__all__ = [
    "BenchmarkProblem",
    "Discretization",
    "Relaxation",
    "SchurScaling",
    "SolverParams",
    "StokesOperator",
    "cube",
    "default_omega_inv",
    "default_sweep",
    "fmg_work",
    "n_tet",
    "operator_work",
    "parse_params",
    "reference_params",
    "search_space",
    "smoother_work_limit",
    "vcycle_work_bound_limit",
]
