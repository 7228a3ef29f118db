"""Monte Carlo experiments, membership cross-checks, check suites and the CLI."""

from .cli import cli_main
from .experiments import (
    EmpiricalDistribution,
    ExperimentConfig,
    PoissonCheckReport,
    default_c0,
    gumbel_from_gaps,
    poisson_factorial_check,
    poisson_from_gaps,
    run_gumbel,
    sample_top_gaps,
)
from .membership import sigma_membership_crosscheck

__all__ = [
    "EmpiricalDistribution",
    "ExperimentConfig",
    "PoissonCheckReport",
    "cli_main",
    "default_c0",
    "gumbel_from_gaps",
    "poisson_factorial_check",
    "poisson_from_gaps",
    "run_gumbel",
    "sample_top_gaps",
    "sigma_membership_crosscheck",
]
