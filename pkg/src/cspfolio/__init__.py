"""Algorithm-portfolio selection laboratory for constraint-solver runtime data."""

__version__ = "0.1.0"

from .portfolio import build_portfolio, enumerate_portfolio
from .scenario import (
    Portfolio,
    Scenario,
    ScenarioError,
    ScenarioParseError,
    Status,
    fastest_counts,
    filter_presolved,
    load_scenario,
    marginal_contribution,
    parse_scenario,
    single_best,
    virtual_best,
)

__all__ = [
    "Portfolio",
    "Scenario",
    "ScenarioError",
    "ScenarioParseError",
    "Status",
    "build_portfolio",
    "enumerate_portfolio",
    "fastest_counts",
    "filter_presolved",
    "load_scenario",
    "marginal_contribution",
    "parse_scenario",
    "single_best",
    "virtual_best",
]
