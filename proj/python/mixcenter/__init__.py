"""Centers of jointly mixable distributions and Cauchy joint-mix sampling.

Distributions are passed as the same JSON-style dicts the command line tool
reads, e.g. ``{"kind": "cauchy"}`` or ``{"kind": "finite", "atoms": [[0, 0.5], [1, 0.5]]}``.
"""

from ._core import (
    DEFAULT_SEED,
    DomainError,
    InvariantViolation,
    NumericError,
    ParseError,
    SizeError,
    avg_quantile,
    cauchy_R,
    cauchy_center_interval,
    cm_bounds,
    dual_bound,
    enumerate_centers,
    eval_A,
    ex01_couplings,
    sum_two_exclusion,
    jm_center_bounds,
    lp_feasible_center,
    ra_flatten,
    run_cli,
    sample_joint_mix,
    solve_h,
    verify_ex01,
    verify_mixer,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
