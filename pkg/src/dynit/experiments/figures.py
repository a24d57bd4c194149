"""One function per figure: analytic and Monte Carlo series on a shared grid."""

from __future__ import annotations

import functools
import subprocess
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path

import numpy as np

from .. import __version__
from ..analytic import (capacity_fixed_it, mean_capacity, outage_fixed_it,
                        outage_general, outage_high_power)
from ..curves import CurveTable
from ..distributions import (Scenario, build_series, db_to_linear, poisson_pmf,
                             psi_cdf, psi_mixture, zt_poisson_pmf)
from ..errors import ConditioningError, QuadratureError
from ..montecarlo import FIXED_IT, GENERAL, HIGH_POWER, instantaneous_trace, simulate
from .config import FIGURE_TITLES, ExperimentSpec, scenario_hash

SINR_DB_GRID = np.linspace(-20.0, 30.0, 201)
PSI_EDGES = np.linspace(0.0, 20.0, 41)
PMF_K_MAX = 10
SINR_K_MAX = 20


class GridPointError(RuntimeError):
    """A numerical failure at one grid point of a figure."""

    def __init__(self, figure_id, point, cause):
        self.figure_id = figure_id
        self.point = point
        self.cause = cause
        where = ", ".join(f"{k}={v!r}" for k, v in point.items())
        super().__init__(f"{figure_id} failed at {where}: {cause}")


@contextmanager
def _grid_point(figure_id, **point):
    try:
        yield
    except (QuadratureError, ConditioningError) as exc:
        raise GridPointError(figure_id, point, exc) from exc


@functools.lru_cache(maxsize=1)
def provenance() -> str:
    """Package version plus the short commit hash of the source tree."""
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=5)
        rev = out.stdout.strip() if out.returncode == 0 else ""
    except (OSError, subprocess.SubprocessError):
        rev = ""
    return f"dynit {__version__}+{'g' + rev if rev else 'unknown'}"


def _num_label(v: float) -> str:
    return f"{v:g}".replace("-", "m").replace(".", "p")


def lp_label(lam: float) -> str:
    return f"lp{_num_label(lam)}"


def p_label(db: float) -> str:
    return f"p{_num_label(db)}db"


def psi_label(db: float) -> str:
    return f"fixed_{_num_label(db)}db"


def _sim(spec: ExperimentSpec, scn: Scenario, regime=GENERAL, psi_fixed=None):
    cfg = replace(spec.sim, regime=regime, psi_fixed=psi_fixed)
    return simulate(scn, cfg)


def _scenario(spec: ExperimentSpec, lam=None, p_db=None) -> Scenario:
    scn = spec.scenario
    if lam is not None:
        scn = scn.with_(lambda_p=float(lam))
    if p_db is not None:
        scn = scn.with_(p_db=float(p_db))
    return scn


def _series(spec, scn):
    return build_series(scn, tail_tol=spec.tail_tol)


def _demand_pmf(spec):
    ks = np.arange(0, PMF_K_MAX + 1)
    cols = {"k": ks}
    for lam in spec.sweeps["lambda_p"]:
        scn = _scenario(spec, lam)
        c = _sim(spec, scn).draws.c_demand
        lab = lp_label(lam)
        cols[f"pmf_poisson_analytic_{lab}"] = [poisson_pmf(int(k), lam) for k in ks]
        cols[f"pmf_zt_analytic_{lab}"] = [zt_poisson_pmf(int(k), lam) if k else 0.0
                                          for k in ks]
        cols[f"pmf_zt_mc_{lab}"] = np.bincount(c, minlength=ks.size)[:ks.size] / c.size
    return cols


def _sinr_pmf(spec):
    ks = np.arange(1, SINR_K_MAX + 1)
    cols = {"k": ks, "sinr": np.expm1(ks.astype(float))}
    for lam in spec.sweeps["lambda_p"]:
        scn = _scenario(spec, lam)
        c = _sim(spec, scn).draws.c_demand
        pmf = np.array([zt_poisson_pmf(int(k), lam) for k in ks])
        emp = np.bincount(c, minlength=ks.size + 1)[1:ks.size + 1] / c.size
        lab = lp_label(lam)
        cols[f"pmf_analytic_{lab}"] = pmf
        cols[f"pmf_mc_{lab}"] = emp
        cols[f"cdf_analytic_{lab}"] = np.cumsum(pmf)
        cols[f"cdf_mc_{lab}"] = np.searchsorted(np.sort(c), ks, side="right") / c.size
    return cols


def _psi_density(spec):
    edges = PSI_EDGES
    cols = {"psi": 0.5 * (edges[1:] + edges[:-1])}
    for p_db in spec.sweeps["p_db"]:
        for lam in spec.sweeps["lambda_p"]:
            scn = _scenario(spec, lam, p_db)
            mix = psi_mixture(scn, _series(spec, scn))
            lab = f"{lp_label(lam)}_{p_label(p_db)}"
            # Bin-averaged density, comparable with a histogram.
            cols[f"pdf_analytic_{lab}"] = np.diff(psi_cdf(edges, mix)) / np.diff(edges)
            cols[f"pdf_mc_{lab}"] = _sim(spec, scn).psi.histogram_density(edges)
    return cols


def outage_columns(spec, regime=GENERAL):
    x = db_to_linear(SINR_DB_GRID)
    cols = {"sinr_db": SINR_DB_GRID}
    fn = outage_general if regime == GENERAL else outage_high_power
    name = "outage" if regime == GENERAL else "outage_hp"
    for p_db in spec.sweeps["p_db"]:
        for lam in spec.sweeps["lambda_p"]:
            scn = _scenario(spec, lam, p_db)
            lab = f"{lp_label(lam)}_{p_label(p_db)}"
            with _grid_point(spec.figure_id, lambda_p=lam, p_db=p_db):
                cols[f"{name}_analytic_{lab}"] = fn(x, scn, _series(spec, scn))
            cols[f"{name}_mc_{lab}"] = _sim(spec, scn, regime).gamma_s.ecdf(x)
    return cols


def _capacity_point(spec, scn, regime):
    with _grid_point(spec.figure_id, lambda_p=scn.lambda_p, p_db=scn.p_db):
        res = mean_capacity(scn, regime, spec.quad_tol, _series(spec, scn))
    return res.mean_capacity, _sim(spec, scn, regime).mean_capacity


def _capacity_grid(spec, sweep_key, regime):
    """Sweep variable ``sweep_key`` down the rows, the other parameter across
    the columns."""
    other = "p_db" if sweep_key == "lambda_p" else "lambda_p"
    label = p_label if other == "p_db" else lp_label
    rows = spec.sweeps[sweep_key]
    cols = {sweep_key: rows}
    for o in spec.sweeps[other]:
        an, mc = [], []
        for r in rows:
            kw = {sweep_key: r, other: o}
            scn = _scenario(spec, kw["lambda_p"], kw["p_db"])
            a, m = _capacity_point(spec, scn, regime)
            an.append(a)
            mc.append(m)
        name = "capacity" if regime == GENERAL else "capacity_hp"
        cols[f"{name}_analytic_{label(o)}"] = an
        cols[f"{name}_mc_{label(o)}"] = mc
    return cols


def _capacity_vs_fixed(spec):
    lams = spec.sweeps["lambda_p"]
    cols = {"lambda_p": lams}
    for p_db in spec.sweeps["p_db"]:
        suffix = p_label(p_db)
        dyn = [_capacity_point(spec, _scenario(spec, lam, p_db), GENERAL) for lam in lams]
        cols[f"capacity_dynamic_analytic_{suffix}"] = [d[0] for d in dyn]
        cols[f"capacity_dynamic_mc_{suffix}"] = [d[1] for d in dyn]
        for psi_db in spec.sweeps["psi_fixed_db"]:
            psi = float(db_to_linear(psi_db))
            an, mc = [], []
            for lam in lams:
                scn = _scenario(spec, lam, p_db)
                with _grid_point(spec.figure_id, lambda_p=lam, p_db=p_db, psi_db=psi_db):
                    an.append(float(capacity_fixed_it(psi, scn, spec.quad_tol).mean_capacity))
                mc.append(_sim(spec, scn, FIXED_IT, psi).mean_capacity)
            cols[f"capacity_{psi_label(psi_db)}_analytic_{suffix}"] = an
            cols[f"capacity_{psi_label(psi_db)}_mc_{suffix}"] = mc
    return cols


def _trace(spec):
    scn = _scenario(spec, spec.sweeps["lambda_p"][0], spec.sweeps["p_db"][0])
    table = instantaneous_trace(scn, spec.sim, int(spec.sweeps["n_slots"][0]),
                                tuple(spec.sweeps["psi_fixed_db"]))
    return table.columns


def _outage_vs_fixed(spec):
    x = db_to_linear(SINR_DB_GRID)
    cols = {"sinr_db": SINR_DB_GRID}
    for p_db in spec.sweeps["p_db"]:
        for lam in spec.sweeps["lambda_p"]:
            scn = _scenario(spec, lam, p_db)
            lab = f"{lp_label(lam)}_{p_label(p_db)}"
            with _grid_point(spec.figure_id, lambda_p=lam, p_db=p_db):
                cols[f"outage_dynamic_analytic_{lab}"] = outage_general(
                    x, scn, _series(spec, scn))
            cols[f"outage_dynamic_mc_{lab}"] = _sim(spec, scn).gamma_s.ecdf(x)
            for psi_db in spec.sweeps["psi_fixed_db"]:
                psi = float(db_to_linear(psi_db))
                with _grid_point(spec.figure_id, lambda_p=lam, p_db=p_db, psi_db=psi_db):
                    cols[f"outage_{psi_label(psi_db)}_analytic_{lab}"] = outage_fixed_it(
                        x, psi, scn)
                cols[f"outage_{psi_label(psi_db)}_mc_{lab}"] = _sim(
                    spec, scn, FIXED_IT, psi).gamma_s.ecdf(x)
    return cols


_BUILDERS = {
    "fig2": _demand_pmf,
    "fig3": _sinr_pmf,
    "fig4_psi": _psi_density,
    "fig4_outage": outage_columns,
    "fig5": outage_columns,
    "fig6": lambda spec: _capacity_grid(spec, "lambda_p", GENERAL),
    "fig7": lambda spec: _capacity_grid(spec, "p_db", GENERAL),
    "fig8": lambda spec: _capacity_grid(spec, "p_db", HIGH_POWER),
    "fig9": lambda spec: _capacity_grid(spec, "lambda_p", HIGH_POWER),
    "fig10": _capacity_vs_fixed,
    "fig11": _trace,
    "fig12": _outage_vs_fixed,
}


def run_experiment(spec: ExperimentSpec) -> CurveTable:
    cols = _BUILDERS[spec.figure_id](spec)
    meta = {
        "figure": spec.figure_id,
        "title": FIGURE_TITLES[spec.figure_id],
        "scenario_hash": scenario_hash(spec.scenario),
        "provenance": provenance(),
        "seed": str(spec.sim.seed),
        "n_samples": str(spec.sim.n_samples),
        "n_partitions": str(spec.sim.n_partitions),
        "tail_tol": repr(spec.tail_tol),
        "quad_tol": repr(spec.quad_tol),
        "sweeps": "; ".join(f"{k}={v}" for k, v in spec.sweeps.items()),
    }
    return CurveTable(cols, meta)


def gnuplot_stub(table: CurveTable, csv_name: str) -> str:
    """A gnuplot script plotting every column against the first one."""
    x = table.names[0]
    lines = ["set datafile separator ','",
             "set datafile commentschars '#'",
             "set key autotitle columnhead",
             f"set title '{table.metadata.get('title', '')}'",
             f"set xlabel '{x}'"]
    plots = [f"'{csv_name}' using 1:{i + 1} with linespoints"
             for i in range(1, len(table.names))]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def write_table(table: CurveTable, out_dir, stem: str, gnuplot: bool = False,
                timestamp: bool = True) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{stem}.csv"
    table.to_csv(path, timestamp=timestamp)
    if gnuplot:
        (out_dir / f"{stem}.gp").write_text(gnuplot_stub(table, path.name))
    return path
