"""Simulation, cross-validation, backup elections and significance statistics."""

from .folds import FoldPlan, make_folds
from .simulate import Decision, Scheduled, SimOutcome, Single, Step, simulate
from .stats import betainc, paired_t_test, pearson
from .voting import condorcet_winner, default_backup, elect_backup, tally

__all__ = [
    "Decision",
    "FoldPlan",
    "Scheduled",
    "SimOutcome",
    "Single",
    "Step",
    "betainc",
    "condorcet_winner",
    "default_backup",
    "elect_backup",
    "make_folds",
    "paired_t_test",
    "pearson",
    "simulate",
    "tally",
]
