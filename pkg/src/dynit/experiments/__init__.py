"""Figure reproduction runs, acceptance suite and command line."""

from .acceptance import AcceptanceContext, AcceptanceReport, CriterionResult, acceptance_report
from .config import ExperimentSpec, SpecError, load_specs
from .figures import GridPointError, run_experiment

__all__ = ["AcceptanceContext", "AcceptanceReport", "CriterionResult", "ExperimentSpec",
           "GridPointError", "SpecError", "acceptance_report", "load_specs", "run_experiment"]
