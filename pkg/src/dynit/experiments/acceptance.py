"""Acceptance suite: each criterion reports a measured value against a tolerance.

Criteria share figure tables through ``AcceptanceContext``, which caches
tables and scalars only (never raw sample arrays).
"""

from __future__ import annotations

import itertools
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from ..analytic import (DERIVED, GENERAL, HIGH_POWER, OutageForm, mean_capacity,
                        outage_general, outage_high_power, outage_raw)
from ..curves import CurveTable, strip_timestamp
from ..distributions import (Scenario, build_series, db_to_linear, psi_mixture, psi_pdf,
                             zt_poisson_pmf)
from ..montecarlo import SimConfig, simulate
from ..quadrature import integrate_semi_infinite
from .config import DEFAULT_SAMPLES, DEFAULT_SEED, FIGURES, ExperimentSpec
from .figures import (SINR_DB_GRID, lp_label, outage_columns, p_label, psi_label,
                      run_experiment, write_table)

# Criterion tolerances.
PMF_POINT = 0.313
PMF_TOL_ANALYTIC = 5e-4
PMF_TOL_EMPIRICAL = 2e-3
NORM_TOL = 1e-9
LOW_TAIL_TOL = 1e-6
HIGH_TAIL_TOL = 1e-3
SINR_SUP_TOL = 5e-3
PSI_LINF_TOL = 1e-2
OUTAGE_SUP_TOL = 1e-2
CAPACITY_REL_TOL = 2e-2
REGIME_GAP_TOL = 1e-3
REGIME_GAP_P_DB = 40.0
TRACE_FRACTION = 0.8
DETERMINISM_SAMPLES = 20_000


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    measured: float
    tolerance: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        text = (f"[{verdict}] {self.number:>2}. {self.name}: measured {self.measured:.6g} "
                f"(tolerance {self.tolerance})")
        return text + (f" -- {self.detail}" if self.detail else "")


class AcceptanceContext:
    """Settings shared by all criteria plus a cache of figure tables."""

    def __init__(self, seed: int = DEFAULT_SEED, n_samples: int = DEFAULT_SAMPLES,
                 tail_tol: float | None = None, quad_tol: float | None = None,
                 n_partitions: int = 4):
        base = ExperimentSpec("fig2")
        self.seed = seed
        self.n_samples = n_samples
        self.tail_tol = base.tail_tol if tail_tol is None else tail_tol
        self.quad_tol = base.quad_tol if quad_tol is None else quad_tol
        self.sim = SimConfig(n_samples, seed, n_partitions)
        self._tables: dict[tuple, CurveTable] = {}

    def spec(self, figure_id: str, **sweeps) -> ExperimentSpec:
        return ExperimentSpec(figure_id, sweeps=sweeps, sim=self.sim,
                              tail_tol=self.tail_tol, quad_tol=self.quad_tol)

    def table(self, figure_id: str) -> CurveTable:
        key = ("figure", figure_id)
        if key not in self._tables:
            self._tables[key] = run_experiment(self.spec(figure_id))
        return self._tables[key]

    def high_power_outage(self, figure_id: str) -> CurveTable:
        """Regime-restricted outage on the grid of an outage figure."""
        key = ("hp", figure_id)
        if key not in self._tables:
            self._tables[key] = CurveTable(outage_columns(self.spec(figure_id), HIGH_POWER))
        return self._tables[key]

    def series(self, scn):
        return build_series(scn, tail_tol=self.tail_tol)

    def write_figures(self, out_dir, gnuplot: bool = False) -> list[Path]:
        """CSV for every figure, reusing tables the criteria already built."""
        return [write_table(self.table(f), out_dir, f, gnuplot) for f in FIGURES]


def _pairs(table: CurveTable, prefix: str):
    """Yield (label, analytic, mc) for columns named ``{prefix}_analytic_{label}``."""
    head = f"{prefix}_analytic_"
    for name in table.names:
        if name.startswith(head):
            label = name[len(head):]
            yield label, table[name], table[f"{prefix}_mc_{label}"]


def _worst(items):
    """(value, label) with the largest value; NaN counts as infinite."""
    items = [(np.inf if not np.isfinite(v) else float(v), lab) for v, lab in items]
    return max(items) if items else (0.0, "")


# ---------------------------------------------------------------- criteria

def c01_pmf_point(ctx: AcceptanceContext) -> CriterionResult:
    analytic = zt_poisson_pmf(2, 2.0)
    c = simulate(Scenario.standard(2.0), ctx.sim).draws.c_demand
    empirical = float(np.mean(c == 2))
    err_a = abs(analytic - PMF_POINT)
    err_e = abs(empirical - PMF_POINT)
    ok = err_a <= PMF_TOL_ANALYTIC and err_e <= PMF_TOL_EMPIRICAL
    return CriterionResult(1, "zero-truncated PMF at k=2, lambda_p=2", analytic,
                           f"|a-0.313|<={PMF_TOL_ANALYTIC}, |mc-0.313|<={PMF_TOL_EMPIRICAL}",
                           ok, f"analytic {analytic:.6f}, empirical {empirical:.6f}")


def c02_psi_normalization(ctx: AcceptanceContext) -> CriterionResult:
    errs = []
    for lam in (2.0, 4.0, 6.0):
        scn = Scenario.standard(lam, 10.0)
        mix = psi_mixture(scn, ctx.series(scn))
        res = integrate_semi_infinite(lambda x: psi_pdf(np.maximum(x, 1e-300), mix),
                                      abs_tol=1e-12)
        errs.append((abs(res.value - 1.0), lp_label(lam)))
    worst, lab = _worst(errs)
    return CriterionResult(2, "threshold PDF integrates to one", worst, f"<= {NORM_TOL:g}",
                           worst <= NORM_TOL, f"worst at {lab}")


def c03_outage_limits(ctx: AcceptanceContext) -> CriterionResult:
    scn = Scenario.standard()
    low = float(outage_general(1e-9, scn, ctx.series(scn)))
    high = float(outage_general(1e6, scn, ctx.series(scn)))
    grid = np.logspace(-6, 6, 200)
    f = outage_general(grid, scn, ctx.series(scn))
    drop = float(max(0.0, -np.min(np.diff(f))))
    ok = low <= LOW_TAIL_TOL and high >= 1 - HIGH_TAIL_TOL and drop == 0.0
    return CriterionResult(3, "outage is a valid CDF", max(low, 1 - high),
                           f"F(1e-9)<={LOW_TAIL_TOL:g}, F(1e6)>=1-{HIGH_TAIL_TOL:g}, monotone",
                           ok, f"F(1e-9)={low:.3g}, 1-F(1e6)={1 - high:.3g}, "
                               f"largest decrease {drop:.3g}")


def c04_sinr_cdf(ctx: AcceptanceContext) -> CriterionResult:
    t = ctx.table("fig3")
    lab = lp_label(6.0)
    d = float(np.max(np.abs(t[f"cdf_analytic_{lab}"] - t[f"cdf_mc_{lab}"])))
    return CriterionResult(4, "PU SINR CDF vs empirical (lambda_p=6)", d,
                           f"< {SINR_SUP_TOL:g}", d < SINR_SUP_TOL)


def c05_psi_density(ctx: AcceptanceContext) -> CriterionResult:
    t = ctx.table("fig4_psi")
    worst, lab = _worst((np.max(np.abs(a - m)), lab) for lab, a, m in _pairs(t, "pdf"))
    return CriterionResult(5, "threshold PDF vs histogram, binned L-inf", worst,
                           f"< {PSI_LINF_TOL:g}", worst < PSI_LINF_TOL, f"worst at {lab}")


def _outage_tables(ctx):
    return ctx.table("fig4_outage"), ctx.table("fig5")


def _ordered(curves, increasing: bool) -> bool:
    """Pointwise ordering of successive curves, with float slack."""
    for lo, hi in zip(curves, curves[1:]):
        diff = (hi - lo) if increasing else (lo - hi)
        if np.any(diff < -1e-12):
            return False
    return True


def c06_outage(ctx: AcceptanceContext) -> CriterionResult:
    t_p, t_l = _outage_tables(ctx)
    worst, lab = _worst((np.max(np.abs(a - m)), lab)
                        for t in (t_p, t_l) for lab, a, m in _pairs(t, "outage"))
    by_p = [t_p[f"outage_analytic_{lp_label(2.0)}_{p_label(p)}"] for p in (-10.0, 0.0, 10.0)]
    by_l = [t_l[f"outage_analytic_{lp_label(l)}_{p_label(10.0)}"] for l in (2.0, 3.0, 4.0)]
    order = _ordered(by_p, increasing=False) and _ordered(by_l, increasing=True)
    return CriterionResult(6, "outage vs empirical SU SINR CDF", worst,
                           f"< {OUTAGE_SUP_TOL:g} and orderings hold",
                           worst < OUTAGE_SUP_TOL and order,
                           f"worst at {lab}; ordering {'holds' if order else 'violated'}")


def _rel_errors(table, prefix):
    return [(np.max(np.abs(a - m) / np.abs(m)), lab) for lab, a, m in _pairs(table, prefix)]


def c07_capacity(ctx: AcceptanceContext) -> CriterionResult:
    t6, t7 = ctx.table("fig6"), ctx.table("fig7")
    worst, lab = _worst(_rel_errors(t6, "capacity") + _rel_errors(t7, "capacity"))
    dec_l = all(np.all(np.diff(a) < 0) for _, a, _ in _pairs(t6, "capacity"))
    inc_p = all(np.all(np.diff(a) > 0) for _, a, _ in _pairs(t7, "capacity"))
    ok = worst <= CAPACITY_REL_TOL and dec_l and inc_p
    return CriterionResult(7, "mean capacity vs empirical mean", worst,
                           f"rel <= {CAPACITY_REL_TOL:g}, decreasing in lambda_p, "
                           "increasing in p", ok,
                           f"worst at {lab}; monotone lambda_p {dec_l}, p {inc_p}")


def regime_gap(p_db: float, ctx: AcceptanceContext | None = None) -> float:
    """sup over a log grid of |general − high-power| outage, default rates, λ_p = 2."""
    scn = Scenario.standard(2.0, p_db)
    s = ctx.series(scn) if ctx else build_series(scn)
    x = np.logspace(-4, 4, 400)
    return float(np.max(np.abs(outage_general(x, scn, s) - outage_high_power(x, scn, s))))


def c08_high_power(ctx: AcceptanceContext) -> CriterionResult:
    out = [(np.max(np.abs(a - m)), lab)
           for f in ("fig4_outage", "fig5")
           for lab, a, m in _pairs(ctx.high_power_outage(f), "outage_hp")]
    out_worst, out_lab = _worst(out)
    cap_worst, cap_lab = _worst(_rel_errors(ctx.table("fig8"), "capacity_hp")
                                + _rel_errors(ctx.table("fig9"), "capacity_hp"))
    gap = regime_gap(REGIME_GAP_P_DB, ctx)
    ok = (out_worst < OUTAGE_SUP_TOL and cap_worst <= CAPACITY_REL_TOL
          and gap < REGIME_GAP_TOL)
    return CriterionResult(
        8, "high-power regime", gap,
        f"outage sup < {OUTAGE_SUP_TOL:g}, capacity rel <= {CAPACITY_REL_TOL:g}, "
        f"gap at {REGIME_GAP_P_DB:g} dB < {REGIME_GAP_TOL:g}", ok,
        f"outage sup {out_worst:.4g} ({out_lab}), capacity rel {cap_worst:.4g} ({cap_lab}), "
        f"general vs high-power gap {gap:.4g}")


def c09_dynamic_vs_fixed(ctx: AcceptanceContext) -> CriterionResult:
    t10, t11, t12 = ctx.table("fig10"), ctx.table("fig11"), ctx.table("fig12")
    suffix = p_label(10.0)
    dyn = t10[f"capacity_dynamic_analytic_{suffix}"]
    losses = []
    margins = []
    for db in (-10.0, -5.0):
        gap = dyn - t10[f"capacity_{psi_label(db)}_analytic_{suffix}"]
        margins.append(float(np.min(gap)))
        losses += [f"lambda_p={lam:g} vs {db:g} dB"
                   for lam, g in zip(t10["lambda_p"], gap) if g <= 0]
    dominates = not losses
    lab = f"{lp_label(1.0)}_{suffix}"
    curves = [t12[f"outage_dynamic_analytic_{lab}"],
              t12[f"outage_{psi_label(-5.0)}_analytic_{lab}"],
              t12[f"outage_{psi_label(-10.0)}_analytic_{lab}"]]
    order = _ordered(curves, increasing=True)
    fractions = [float(np.mean(t11["capacity_dynamic"] >= t11[f"capacity_{psi_label(db)}"]))
                 for db in (-10.0, -5.0)]
    frac = min(fractions)
    ok = dominates and order and frac >= TRACE_FRACTION
    return CriterionResult(
        9, "dynamic vs fixed threshold", min(margins),
        f"capacity margin > 0, outage ordered, trace fraction >= {TRACE_FRACTION:g}", ok,
        f"min capacity margin {min(margins):.4g}"
        f"{' (dynamic not above fixed at ' + ', '.join(losses) + ')' if losses else ''}, "
        f"outage ordering "
        f"{'holds' if order else 'violated'}, trace fractions {fractions}")


def direct_capacity(scn, ctx: AcceptanceContext, regime=GENERAL) -> float:
    """∫ (1 − F_γs(x))/(1 + x) dx straight from the outage expression."""
    s = ctx.series(scn)
    res = integrate_semi_infinite(
        lambda x: (1.0 - outage_raw(np.maximum(x, 1e-300), scn, s, regime)) / (1.0 + x),
        abs_tol=ctx.quad_tol / 10)
    return res.value


def c10_capacity_crosscheck(ctx: AcceptanceContext) -> CriterionResult:
    errs = []
    for lam, p_db in ((2.0, -10.0), (2.0, 0.0), (2.0, 10.0), (3.0, 10.0), (4.0, 10.0)):
        scn = Scenario.standard(lam, p_db)
        closed = mean_capacity(scn, GENERAL, ctx.quad_tol, ctx.series(scn)).mean_capacity
        errs.append((abs(closed - direct_capacity(scn, ctx)), f"{lp_label(lam)}_{p_label(p_db)}"))
    worst, lab = _worst(errs)
    tol = 2 * ctx.quad_tol
    return CriterionResult(10, "capacity decomposition vs direct quadrature", worst,
                           f"<= {tol:g}", worst <= tol, f"worst at {lab}")


def _form_error(ctx, tables, prefix, regime, form) -> float:
    errs = []
    for t in tables:
        for lab, _, mc in _pairs(t, prefix):
            lam_s, p_s = lab.split("_")
            lam = float(lam_s[2:].replace("p", ".").replace("m", "-"))
            p_db = float(p_s[1:-2].replace("p", ".").replace("m", "-"))
            scn = Scenario.standard(lam, p_db)
            x = db_to_linear(SINR_DB_GRID)
            with np.errstate(all="ignore"):
                f = outage_raw(x, scn, ctx.series(scn), regime, form)
            errs.append((np.max(np.abs(f - mc)), lab))
    return _worst(errs)[0]


def _form_name(form: OutageForm) -> str:
    return (f"sign {'+' if form.leading_sign > 0 else '-'}, "
            f"{'x' if form.factor_has_x else 'no-x'}, "
            f"{'normalized' if form.normalized else 'unnormalized'}")


def typo_protocol(ctx: AcceptanceContext) -> dict:
    """Sup-distance to simulation for every reading of the ambiguous terms."""
    gen_tables = _outage_tables(ctx)
    hp_tables = [ctx.high_power_outage(f) for f in ("fig4_outage", "fig5")]
    general = {}
    for sign, has_x in itertools.product((1, -1), (False, True)):
        form = OutageForm(leading_sign=sign, factor_has_x=has_x)
        general[form] = _form_error(ctx, gen_tables, "outage", GENERAL, form)
    high = {}
    for sign, norm in itertools.product((1, -1), (False, True)):
        form = OutageForm(leading_sign=sign, normalized=norm)
        high[form] = _form_error(ctx, hp_tables, "outage_hp", HIGH_POWER, form)
    return {"general": general, "high_power": high}


def c11_typo_protocol(ctx: AcceptanceContext) -> CriterionResult:
    res = typo_protocol(ctx)
    notes, ok = [], True
    for regime, errs in res.items():
        passing = [f for f, e in errs.items() if e < OUTAGE_SUP_TOL]
        ok &= passing == [DERIVED]
        notes.append(f"{regime}: " + "; ".join(
            f"[{_form_name(f)}] {e:.3g}" for f, e in errs.items()))
        notes.append(f"{regime} passing: {[_form_name(f) for f in passing]}")
    n_pass = sum(sum(e < OUTAGE_SUP_TOL for e in errs.values()) for errs in res.values())
    return CriterionResult(11, "typo resolution, one reading per expression passes",
                           n_pass, "exactly 1 per expression (2 total)", ok, " | ".join(notes))


def figure_csvs(ctx: AcceptanceContext, out_dir=None) -> dict[str, str]:
    """CSV text for every figure, timestamp line excluded; optionally written."""
    texts = {}
    for fig in FIGURES:
        table = run_experiment(ctx.spec(fig))
        if out_dir is not None:
            write_table(table, out_dir, fig)
        texts[fig] = strip_timestamp(table.to_csv())
    return texts


def c12_determinism(ctx: AcceptanceContext) -> CriterionResult:
    small = AcceptanceContext(ctx.seed, DETERMINISM_SAMPLES, ctx.tail_tol, ctx.quad_tol)
    with tempfile.TemporaryDirectory() as tmp:
        first = figure_csvs(small, Path(tmp) / "a")
        second = figure_csvs(small, Path(tmp) / "b")
        on_disk = all(
            strip_timestamp((Path(tmp) / "a" / f"{f}.csv").read_text())
            == strip_timestamp((Path(tmp) / "b" / f"{f}.csv").read_text())
            for f in FIGURES)
    differing = [f for f in FIGURES if first[f] != second[f]]
    ok = not differing and on_disk
    return CriterionResult(12, "repeat runs give byte-identical CSVs", len(differing),
                           "0 differing files", ok,
                           f"{len(FIGURES)} figures at {DETERMINISM_SAMPLES} samples")


CRITERIA: list[Callable[[AcceptanceContext], CriterionResult]] = [
    c01_pmf_point, c02_psi_normalization, c03_outage_limits, c04_sinr_cdf,
    c05_psi_density, c06_outage, c07_capacity, c08_high_power,
    c09_dynamic_vs_fixed, c10_capacity_crosscheck, c11_typo_protocol, c12_determinism,
]


@dataclass
class AcceptanceReport:
    results: list[CriterionResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def text(self) -> str:
        lines = [r.line() for r in self.results]
        n_ok = sum(r.passed for r in self.results)
        lines.append(f"{n_ok}/{len(self.results)} criteria passed")
        return "\n".join(lines) + "\n"


def acceptance_report(criteria=None, ctx: AcceptanceContext | None = None,
                      stream=None) -> AcceptanceReport:
    """Run ``criteria`` (default: all), printing one line per criterion as it finishes."""
    criteria = CRITERIA if criteria is None else list(criteria)
    ctx = ctx or AcceptanceContext()
    stream = sys.stdout if stream is None else stream
    results = []
    for fn in criteria:
        r = fn(ctx)
        results.append(r)
        print(r.line(), file=stream, flush=True)
    return AcceptanceReport(results)
