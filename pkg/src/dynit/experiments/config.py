"""Experiment spec files (YAML) and their defaults."""

from __future__ import annotations

import hashlib
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import yaml

from ..distributions import DEFAULT_TAIL_TOL, Scenario, db_to_linear
from ..montecarlo import SimConfig
from ..analytic import DEFAULT_QUAD_TOL

SEED_ENV = "DYNIT_SEED"
DEFAULT_SEED = 12345
DEFAULT_SAMPLES = 10**6

# Default sweeps per figure; keys outside a figure's entry are rejected.
FIGURES: dict[str, dict[str, list]] = {
    "fig2": {"lambda_p": [0.5, 1.0, 2.0]},
    "fig3": {"lambda_p": [6.0]},
    "fig4_psi": {"lambda_p": [2.0, 4.0, 6.0], "p_db": [10.0]},
    "fig4_outage": {"lambda_p": [2.0], "p_db": [-10.0, 0.0, 10.0]},
    "fig5": {"lambda_p": [2.0, 3.0, 4.0], "p_db": [10.0]},
    "fig6": {"lambda_p": [1.0, 2.0, 3.0, 4.0, 5.0], "p_db": [5.0, 10.0, 15.0]},
    "fig7": {"lambda_p": [2.0, 3.0, 4.0], "p_db": [5.0, 6.0, 7.0, 8.0, 9.0, 10.0]},
    "fig8": {"lambda_p": [2.0, 3.0, 4.0], "p_db": [float(v) for v in range(-10, 11, 2)]},
    "fig9": {"lambda_p": [1.0, 2.0, 3.0, 4.0, 5.0], "p_db": [5.0, 10.0, 15.0]},
    "fig10": {"lambda_p": [1.0, 2.0, 3.0, 4.0, 5.0, 6.0], "p_db": [10.0],
              "psi_fixed_db": [-10.0, -5.0]},
    "fig11": {"lambda_p": [1.0], "p_db": [10.0], "psi_fixed_db": [-10.0, -5.0],
              "n_slots": [30]},
    "fig12": {"lambda_p": [1.0], "p_db": [10.0], "psi_fixed_db": [-10.0, -5.0]},
}

FIGURE_TITLES = {
    "fig2": "Poisson vs zero-truncated Poisson demand PMF",
    "fig3": "PU SINR PMF/CDF",
    "fig4_psi": "interference threshold PDF",
    "fig4_outage": "SU outage vs peak power",
    "fig5": "SU outage vs demand rate",
    "fig6": "mean capacity vs demand rate",
    "fig7": "mean capacity vs peak power",
    "fig8": "high-power mean capacity vs peak power",
    "fig9": "high-power mean capacity vs demand rate",
    "fig10": "mean capacity, dynamic vs fixed threshold",
    "fig11": "instantaneous capacity trace",
    "fig12": "outage, dynamic vs fixed threshold",
}


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    figure_id: str
    scenario: Scenario = field(default_factory=Scenario.standard)
    sweeps: dict = field(default_factory=dict)
    sim: SimConfig = field(default_factory=lambda: SimConfig(DEFAULT_SAMPLES, DEFAULT_SEED, 4))
    output_path: str | None = None
    tail_tol: float = DEFAULT_TAIL_TOL
    quad_tol: float = DEFAULT_QUAD_TOL

    def __post_init__(self):
        if self.figure_id not in FIGURES:
            raise SpecError(f"unknown figure_id {self.figure_id!r}; "
                            f"choose from {sorted(FIGURES)}")
        allowed = FIGURES[self.figure_id]
        merged = {k: list(v) for k, v in allowed.items()}
        for key, values in self.sweeps.items():
            if key not in allowed:
                raise SpecError(f"{self.figure_id} does not sweep {key!r} "
                                f"(allowed: {sorted(allowed)})")
            values = list(values) if isinstance(values, (list, tuple)) else [values]
            if not values:
                raise SpecError(f"sweep {key!r} is empty")
            merged[key] = [float(v) for v in values]
        object.__setattr__(self, "sweeps", merged)

    def with_overrides(self, *, seed=None, n_samples=None, tail_tol=None,
                       quad_tol=None, output_path=None) -> "ExperimentSpec":
        sim = self.sim
        if seed is not None:
            sim = replace(sim, seed=int(seed))
        if n_samples is not None:
            sim = replace(sim, n_samples=int(n_samples))
        return replace(self, sim=sim,
                       tail_tol=self.tail_tol if tail_tol is None else tail_tol,
                       quad_tol=self.quad_tol if quad_tol is None else quad_tol,
                       output_path=self.output_path if output_path is None else output_path)


def scenario_hash(scn: Scenario) -> str:
    text = repr(sorted(asdict(scn).items()))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


_SCENARIO_ALIASES = {"p": "p_peak"}


def scenario_from_mapping(data: dict | None) -> Scenario:
    """Default rates overridden by ``data``; keys ending in ``_db`` are converted
    to linear (``p_db`` → ``p_peak``)."""
    fields = {}
    for key, value in (data or {}).items():
        if key.endswith("_db"):
            key, value = key[:-3], float(db_to_linear(value))
        key = _SCENARIO_ALIASES.get(key, key)
        if key not in Scenario.__dataclass_fields__:
            raise SpecError(f"unknown scenario field {key!r}")
        fields[key] = float(value)
    return Scenario.standard(**fields)


def spec_from_mapping(data: dict, base_dir: Path | None = None) -> ExperimentSpec:
    data = dict(data)
    figure = data.pop("figure", data.pop("figure_id", None))
    if figure is None:
        raise SpecError("experiment entry needs a 'figure'")
    sim_data = dict(data.pop("sim", {}) or {})
    sim = SimConfig(n_samples=int(sim_data.get("n_samples", DEFAULT_SAMPLES)),
                    seed=int(sim_data.get("seed", DEFAULT_SEED)),
                    n_partitions=int(sim_data.get("n_partitions", 4)),
                    workers=int(sim_data.get("workers", 1)))
    output = data.pop("output", None)
    if output is not None and base_dir is not None and not Path(output).is_absolute():
        output = str(base_dir / output)
    spec = ExperimentSpec(
        figure_id=str(figure),
        scenario=scenario_from_mapping(data.pop("scenario", None)),
        sweeps=data.pop("sweeps", {}) or {},
        sim=sim,
        output_path=output,
        tail_tol=float(data.pop("tail_tol", DEFAULT_TAIL_TOL)),
        quad_tol=float(data.pop("quad_tol", DEFAULT_QUAD_TOL)),
    )
    if data:
        raise SpecError(f"unrecognised keys {sorted(data)}")
    return spec


def load_specs(path) -> list[ExperimentSpec]:
    """A file holds one experiment mapping or ``experiments: [...]``."""
    path = Path(path)
    doc = yaml.safe_load(path.read_text()) or {}
    entries = doc.get("experiments", [doc]) if isinstance(doc, dict) else doc
    return [spec_from_mapping(e, path.parent) for e in entries]


def resolve_seed(flag: int | None, configured: int) -> int:
    """Explicit flag, then $DYNIT_SEED, then the configured value."""
    if flag is not None:
        return int(flag)
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    return int(configured)
