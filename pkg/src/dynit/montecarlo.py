"""Direct simulation of the demand → threshold → SU SINR chain.

Samples are split into ``n_partitions`` blocks; block i draws from
``PCG64(seed).jumped(i)``, so blocks are non-overlapping streams and the merged
output depends only on (seed, n_partitions, n_samples), never on how many
worker threads ran the blocks.
"""

from __future__ import annotations

import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .curves import CurveTable
from .distributions import Scenario, build_series, db_to_linear
from .errors import DomainError

GENERAL = "general"
HIGH_POWER = "high_power"
FIXED_IT = "fixed_it"
REGIMES = (GENERAL, HIGH_POWER, FIXED_IT)


class EmpiricalDist:
    """Sorted sample with ECDF queries."""

    def __init__(self, samples):
        samples = np.sort(np.asarray(samples, dtype=float).ravel())
        if samples.size == 0:
            raise DomainError("EmpiricalDist needs at least one sample")
        self.samples = samples
        self.n = samples.size

    def ecdf(self, x):
        """Fraction of samples <= x."""
        out = np.searchsorted(self.samples, x, side="right") / self.n
        return out[()] if np.ndim(out) == 0 else out

    def mean(self) -> float:
        return float(np.mean(self.samples))

    def quantile(self, q):
        return np.quantile(self.samples, q)

    def sup_distance(self, cdf, grid) -> float:
        """max |ecdf − cdf| over the given grid."""
        grid = np.asarray(grid, dtype=float)
        return float(np.max(np.abs(self.ecdf(grid) - np.asarray(cdf(grid)))))

    def ks_distance(self, cdf) -> float:
        """One-sample Kolmogorov-Smirnov statistic against a continuous cdf."""
        f = np.asarray(cdf(self.samples), dtype=float)
        i = np.arange(1, self.n + 1)
        return float(max(np.max(i / self.n - f), np.max(f - (i - 1) / self.n)))

    def histogram_density(self, edges):
        counts, _ = np.histogram(self.samples, bins=edges)
        return counts / (self.n * np.diff(edges))


@dataclass(frozen=True)
class SimConfig:
    n_samples: int
    seed: int = 0
    n_partitions: int = 1
    regime: str = GENERAL
    psi_fixed: float | None = None  # linear power, used by the fixed_it regime
    workers: int = 1

    def __post_init__(self):
        if self.n_samples < 1 or self.n_partitions < 1:
            raise DomainError("n_samples and n_partitions must be >= 1")
        if self.regime not in REGIMES:
            raise DomainError(f"unknown regime {self.regime!r}")
        if self.regime == FIXED_IT and not (self.psi_fixed and self.psi_fixed > 0):
            raise DomainError("fixed_it regime needs psi_fixed > 0")


def _uniform_open(rng, size):
    # rng.random is [0, 1); 1 − U is (0, 1] so the log below is finite.
    return 1.0 - rng.random(size)


def _exponential(rng, rate, size):
    return -np.log(_uniform_open(rng, size)) / rate


@functools.lru_cache(maxsize=64)
def _cum_table(lambda_p: float) -> np.ndarray:
    return np.cumsum(build_series(lambda_p).weights)


def sample_zt_poisson(rng, lambda_p: float, size=None):
    """Zero-truncated Poisson draws by inverse CDF on the cached cumulative table."""
    cum = _cum_table(float(lambda_p))
    u = rng.random(size)
    k = np.searchsorted(cum, u, side="right") + 1
    return np.minimum(k, cum.size)


@dataclass(frozen=True, eq=False)
class ChannelDraw:
    """One block of raw draws; derived link quantities come from ``link``."""

    c_demand: np.ndarray
    g_pp: np.ndarray
    g_sp: np.ndarray
    g_ss: np.ndarray
    g_ps: np.ndarray

    @property
    def gamma_p(self) -> np.ndarray:
        return np.expm1(self.c_demand.astype(float))

    def link(self, scn: Scenario, regime: str = GENERAL, psi_fixed: float | None = None):
        """Threshold ψ, transmit power, received power and SU SINR."""
        p = scn.p_peak
        if regime == FIXED_IT:
            psi = np.full(self.g_pp.shape, float(psi_fixed))
        else:
            psi = self.g_pp * p / self.gamma_p
        t = psi / self.g_sp
        p_tx = t if regime == HIGH_POWER else np.minimum(t, p)
        p_rx = p_tx * self.g_ss
        gamma_s = p_rx / (p * self.g_ps + scn.sigma2)
        return {"psi": psi, "p_tx": p_tx, "p_rx": p_rx, "gamma_s": gamma_s}


def draw_channels(scn: Scenario, n: int, rng) -> ChannelDraw:
    # Fixed draw order keeps regimes on common random numbers.
    c = sample_zt_poisson(rng, scn.lambda_p, n)
    g_pp = _exponential(rng, scn.lambda_pp, n)
    g_sp = _exponential(rng, scn.lambda_sp, n)
    g_ss = _exponential(rng, scn.lambda_ss, n)
    g_ps = _exponential(rng, scn.lambda_ps, n)
    return ChannelDraw(c, g_pp, g_sp, g_ss, g_ps)


def partition_sizes(n_samples: int, n_partitions: int) -> list[int]:
    base, extra = divmod(n_samples, n_partitions)
    return [base + (i < extra) for i in range(n_partitions)]


def partition_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed).jumped(index))


class SimResult:
    """Merged simulation output; empirical distributions are built on demand."""

    def __init__(self, arrays: dict[str, np.ndarray], draws: ChannelDraw):
        self.arrays = arrays
        self.draws = draws
        self._cache: dict[str, EmpiricalDist] = {}

    def _dist(self, key) -> EmpiricalDist:
        if key not in self._cache:
            self._cache[key] = EmpiricalDist(self.arrays[key])
        return self._cache[key]

    @property
    def gamma_s(self) -> EmpiricalDist:
        return self._dist("gamma_s")

    @property
    def psi(self) -> EmpiricalDist:
        return self._dist("psi")

    @property
    def capacity_samples(self) -> EmpiricalDist:
        return self._dist("capacity")

    @property
    def gamma_p(self) -> EmpiricalDist:
        return self._dist("gamma_p")

    @property
    def p_tx(self) -> EmpiricalDist:
        return self._dist("p_tx")

    @property
    def p_rx(self) -> EmpiricalDist:
        return self._dist("p_rx")

    @property
    def mean_capacity(self) -> float:
        return float(np.mean(self.arrays["capacity"]))


def _run_partition(scn, cfg, index, size):
    rng = partition_rng(cfg.seed, index)
    draw = draw_channels(scn, size, rng)
    return draw, draw.link(scn, cfg.regime, cfg.psi_fixed)


def simulate(scn: Scenario, cfg: SimConfig) -> SimResult:
    sizes = partition_sizes(cfg.n_samples, cfg.n_partitions)
    jobs = [(i, n) for i, n in enumerate(sizes) if n > 0]
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(lambda job: _run_partition(scn, cfg, *job), jobs))
    else:
        parts = [_run_partition(scn, cfg, *job) for job in jobs]
    draws = ChannelDraw(*(np.concatenate([getattr(d, f) for d, _ in parts])
                          for f in ("c_demand", "g_pp", "g_sp", "g_ss", "g_ps")))
    arrays = {key: np.concatenate([lk[key] for _, lk in parts])
              for key in ("psi", "p_tx", "p_rx", "gamma_s")}
    arrays["gamma_p"] = draws.gamma_p
    arrays["capacity"] = np.log1p(arrays["gamma_s"])
    return SimResult(arrays, draws)


def _db_label(db: float) -> str:
    label = f"{db:g}".replace("-", "m").replace(".", "p")
    return f"{label}db"


def instantaneous_trace(scn: Scenario, cfg: SimConfig, n_slots: int,
                        psi_fixed_db=(-10.0, -5.0)) -> CurveTable:
    """Per-slot capacity ln(1 + γ_s) for the dynamic threshold and each fixed
    threshold, all evaluated on the same channel and demand draws."""
    if n_slots < 1:
        raise DomainError("n_slots must be >= 1")
    draw = draw_channels(scn, n_slots, partition_rng(cfg.seed, 0))
    cols = {"slot": np.arange(1, n_slots + 1, dtype=float),
            "capacity_dynamic": np.log1p(draw.link(scn, GENERAL)["gamma_s"])}
    for db in psi_fixed_db:
        link = draw.link(scn, FIXED_IT, float(db_to_linear(db)))
        cols[f"capacity_fixed_{_db_label(db)}"] = np.log1p(link["gamma_s"])
    return CurveTable(cols, {"seed": str(cfg.seed), "n_slots": str(n_slots)})
