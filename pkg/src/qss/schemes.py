"""The six estimation schemes with query-cost accounting.

Monte Carlo, QFT-PEA, QFT-BPEA, QFT-ABPEA, MLAE and QCoin all consume a
ground-truth phase in [0, 1/2] plus a (seed, stream) pair and emit a phase
estimate, the matching fraction estimate, and the numbers of Grover-iteration
queries and measurement shots spent.  QFT-family schemes sample the analytic
counting distribution; MLAE and QCoin draw binomial shot counts from the
amplified Bernoulli model sin^2((2M+1) pi phi).

Batches are the native execution unit: ``run_batch`` fans trials out over
fixed-size chunks (optionally across threads), with trial i always bound to
stream ``stream_start + i`` so any execution order reproduces the same
numbers.  The single-trial ``estimate_*`` functions are batches of one.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .phasedist import (
    DEFAULT_REFINEMENT,
    LOG_FLOOR,
    candidate_grid,
    check_grid_size,
    check_phase,
    fraction_to_phase,
    phase_to_fraction,
    qc_loglik_tables,
    qc_mass_batch,
)
from .rng import RandomStream, uniform_rows

#: Trials per work item; fixed so results never depend on the thread count.
CHUNK = 4096


def _positive(name: str, value: int) -> int:
    value = int(value)
    if value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value}")
    return value


@dataclass(frozen=True)
class McConfig:
    """Classical Monte Carlo: n_shot Bernoulli samples of the fraction."""

    n_shot: int
    name = "mc"

    def __post_init__(self):
        _positive("n_shot", self.n_shot)

    def params(self) -> str:
        return f"n_shot={self.n_shot}"


@dataclass(frozen=True)
class PeaConfig:
    """Single-shot QFT phase estimation on a T = 2^t grid."""

    T: int
    name = "pea"

    def __post_init__(self):
        check_grid_size(self.T)

    def params(self) -> str:
        return f"T={self.T}"


@dataclass(frozen=True)
class BpeaConfig:
    """n_shot repetitions of QFT-PEA combined by Bayesian argmax."""

    T: int
    n_shot: int
    name = "bpea"

    def __post_init__(self):
        check_grid_size(self.T)
        _positive("n_shot", self.n_shot)

    def params(self) -> str:
        return f"T={self.T} n_shot={self.n_shot}"


@dataclass(frozen=True)
class AbpeaConfig:
    """Adaptive BPEA: grow the sample set until a dense window exists."""

    T: int
    alpha: float
    n_min: int
    n_max: int
    name = "abpea"

    def __post_init__(self):
        check_grid_size(self.T)
        _positive("n_min", self.n_min)
        _positive("n_max", self.n_max)
        if self.n_max < self.n_min:
            raise ValueError("n_max must be >= n_min")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")

    def params(self) -> str:
        return f"T={self.T} alpha={self.alpha:g} n_min={self.n_min} n_max={self.n_max}"


@dataclass(frozen=True)
class MlaeConfig:
    """Maximum-likelihood estimation over geometrically amplified shots."""

    t: int
    n_shot: int
    name = "mlae"

    def __post_init__(self):
        _positive("t", self.t)
        _positive("n_shot", self.n_shot)

    def params(self) -> str:
        return f"t={self.t} n_shot={self.n_shot}"


@dataclass(frozen=True)
class QcoinConfig:
    """Stagewise interval refinement over amplified Bernoulli measurements.

    The posterior-in-interval instantiation: after each stage the hypothesis
    interval shrinks to the smallest one holding posterior mass >= ``mass``.
    """

    t: int
    n_shot: int
    mass: float = 0.999
    name = "qcoin"

    def __post_init__(self):
        _positive("t", self.t)
        _positive("n_shot", self.n_shot)
        if not 0.0 < self.mass < 1.0:
            raise ValueError(f"mass must lie in (0, 1), got {self.mass}")

    def params(self) -> str:
        return f"t={self.t} n_shot={self.n_shot} mass={self.mass:g}"


SchemeConfig = (
    McConfig | PeaConfig | BpeaConfig | AbpeaConfig | MlaeConfig | QcoinConfig
)


@dataclass(frozen=True)
class EstimateRecord:
    """One scheme invocation's output."""

    phase_estimate: float
    fraction_estimate: float
    queries: int
    shots: int

    def __post_init__(self):
        check_phase(self.phase_estimate)
        if not 0.0 <= self.fraction_estimate <= 1.0:
            raise ValueError("fraction estimate out of [0, 1]")
        if abs(self.fraction_estimate - phase_to_fraction(self.phase_estimate)) > 1e-12:
            raise ValueError("fraction and phase estimates disagree")
        if self.queries < 0 or self.shots < 0:
            raise ValueError("negative cost counters")


@dataclass(frozen=True)
class BatchResult:
    """Columnar estimate records for a batch of trials."""

    phase: np.ndarray
    fraction: np.ndarray
    queries: np.ndarray
    shots: np.ndarray

    def __len__(self) -> int:
        return self.phase.shape[0]

    def record(self, i: int) -> EstimateRecord:
        return EstimateRecord(
            phase_estimate=float(self.phase[i]),
            fraction_estimate=float(self.fraction[i]),
            queries=int(self.queries[i]),
            shots=int(self.shots[i]),
        )


def mlae_schedule(t: int) -> np.ndarray:
    """Grover iteration counts per MLAE stage: 0, 1, 2, ..., 2^(t-2)."""
    return np.array([0] + [2 ** (k - 1) for k in range(1, t)], dtype=np.int64)


def qcoin_schedule(t: int) -> np.ndarray:
    """QCoin stages: a plain M = 0 stage, then M = 1, 2, ..., 2^(t-1)."""
    return np.array([0] + [2**k for k in range(t)], dtype=np.int64)


def stream_budget(cfg: SchemeConfig) -> int:
    """Uniform draws a single trial may consume (a pure function of cfg)."""
    if isinstance(cfg, McConfig):
        return cfg.n_shot
    if isinstance(cfg, PeaConfig):
        return 1
    if isinstance(cfg, BpeaConfig):
        return cfg.n_shot
    if isinstance(cfg, AbpeaConfig):
        return cfg.n_max
    if isinstance(cfg, MlaeConfig):
        return cfg.t * cfg.n_shot
    if isinstance(cfg, QcoinConfig):
        return (cfg.t + 1) * cfg.n_shot
    raise TypeError(f"unknown scheme config {cfg!r}")


@lru_cache(maxsize=6)
def _amplified_loglik_tables(schedule: tuple, T: int, refinement: int, floor: bool):
    """log sin^2 / log cos^2 of (2M+1) pi phi over the hypothesis grid.

    MLAE keeps exact -inf at analytic zeros (a positive count there rules
    the hypothesis out); QCoin floors them so the posterior stays finite.
    """
    cand = candidate_grid(T, refinement)
    m = np.asarray(schedule, dtype=np.float64)
    ang = ((2.0 * m + 1.0) * np.pi)[:, None] * cand[None, :]
    s2 = np.sin(ang) ** 2
    c2 = np.cos(ang) ** 2
    with np.errstate(divide="ignore"):
        ls = np.log(s2)
        lc = np.log(c2)
    if floor:
        np.maximum(ls, LOG_FLOOR, out=ls)
        np.maximum(lc, LOG_FLOOR, out=lc)
    for arr in (cand, ls, lc):
        arr.flags.writeable = False
    return cand, ls, lc


def _amplified_probs(phis: np.ndarray, schedule: np.ndarray) -> np.ndarray:
    """sin^2((2M+1) pi phi) per (trial, stage)."""
    m = schedule.astype(np.float64)
    s = np.sin(((2.0 * m + 1.0) * np.pi)[None, :] * phis[:, None])
    return s * s


def _qc_cdf_rows(phis: np.ndarray, T: int) -> np.ndarray:
    """Per-trial counting CDFs; a single shared row when all phases agree."""
    if phis.size > 1 and np.all(phis == phis[0]):
        phis = phis[:1]
    mass = qc_mass_batch(phis, T)
    return np.cumsum(mass, axis=1)


def _run_mc(cfg: McConfig, phis, seed, stream_start):
    p = np.sin(np.pi * phis) ** 2
    u = uniform_rows(seed, stream_start, phis.size, cfg.n_shot)
    h = kernels.bernoulli_count_rows(p, u, cfg.n_shot)
    fraction = h / float(cfg.n_shot)
    phase = fraction_to_phase(fraction)
    n = phis.size
    return phase, fraction, np.full(n, cfg.n_shot, np.int64), np.full(n, cfg.n_shot, np.int64)


def _run_pea(cfg: PeaConfig, phis, seed, stream_start):
    cdf = _qc_cdf_rows(phis, cfg.T)
    u = uniform_rows(seed, stream_start, phis.size, 1)[:, 0]
    idx = kernels.sample_rows(cdf, u)
    phase = idx / float(cfg.T)
    n = phis.size
    return (
        phase,
        phase_to_fraction(phase),
        np.full(n, cfg.T - 1, np.int64),
        np.ones(n, np.int64),
    )


def _run_bpea(cfg: BpeaConfig, phis, seed, stream_start):
    cdf = _qc_cdf_rows(phis, cfg.T)
    u = uniform_rows(seed, stream_start, phis.size, cfg.n_shot)
    idx = np.empty((phis.size, cfg.n_shot), dtype=np.int64)
    for k in range(cfg.n_shot):
        idx[:, k] = kernels.sample_rows(cdf, np.ascontiguousarray(u[:, k]))
    cand, loglik, valid = qc_loglik_tables(cfg.T, DEFAULT_REFINEMENT)
    est = kernels.gather_fold_argmax(idx, loglik, valid.view(np.uint8))
    phase = cand[est]
    n = phis.size
    return (
        phase,
        phase_to_fraction(phase),
        np.full(n, cfg.n_shot * (cfg.T - 1), np.int64),
        np.full(n, cfg.n_shot, np.int64),
    )


def _run_abpea(cfg: AbpeaConfig, phis, seed, stream_start):
    cdf = _qc_cdf_rows(phis, cfg.T)
    u = uniform_rows(seed, stream_start, phis.size, cfg.n_max)
    cand, loglik, valid = qc_loglik_tables(cfg.T, DEFAULT_REFINEMENT)
    est, shots = kernels.abpea_rows(
        cdf, u, loglik, valid.view(np.uint8), cfg.alpha, cfg.n_min, cfg.n_max
    )
    phase = cand[est]
    return phase, phase_to_fraction(phase), shots * (cfg.T - 1), shots.copy()


def _run_mlae(cfg: MlaeConfig, phis, seed, stream_start):
    schedule = mlae_schedule(cfg.t)
    probs = _amplified_probs(phis, schedule)
    u = uniform_rows(seed, stream_start, phis.size, cfg.t * cfg.n_shot)
    h = np.empty((phis.size, cfg.t), dtype=np.int64)
    for s in range(cfg.t):
        block = np.ascontiguousarray(u[:, s * cfg.n_shot : (s + 1) * cfg.n_shot])
        h[:, s] = kernels.bernoulli_count_rows(
            np.ascontiguousarray(probs[:, s]), block, cfg.n_shot
        )
    cand, ls, lc = _amplified_loglik_tables(
        tuple(schedule.tolist()), 2**cfg.t, DEFAULT_REFINEMENT, False
    )
    est = kernels.weighted_fold_argmax(h, cfg.n_shot, ls, lc)
    phase = cand[est]
    n = phis.size
    queries = np.full(n, cfg.n_shot * int(schedule.sum()), np.int64)
    return phase, phase_to_fraction(phase), queries, np.full(n, cfg.n_shot * cfg.t, np.int64)


def _shrink_to_mass(weights: np.ndarray, target: float) -> tuple[int, int]:
    """Smallest contiguous window with weight sum >= target; leftmost end wins."""
    n = weights.size
    csum = np.cumsum(weights)
    left = np.searchsorted(csum, csum - target, side="right")
    length = np.arange(n) - left + 1
    # Ends whose whole prefix still misses the target carry no valid window.
    length[(left == 0) & (csum < target)] = n + 1
    j = int(np.argmin(length))
    return int(left[j]), j


def _run_qcoin(cfg: QcoinConfig, phis, seed, stream_start):
    schedule = qcoin_schedule(cfg.t)
    n_stages = schedule.size
    probs = _amplified_probs(phis, schedule)
    u = uniform_rows(seed, stream_start, phis.size, n_stages * cfg.n_shot)
    h = np.empty((phis.size, n_stages), dtype=np.int64)
    for s in range(n_stages):
        block = np.ascontiguousarray(u[:, s * cfg.n_shot : (s + 1) * cfg.n_shot])
        h[:, s] = kernels.bernoulli_count_rows(
            np.ascontiguousarray(probs[:, s]), block, cfg.n_shot
        )
    cand, ls, lc = _amplified_loglik_tables(
        tuple(schedule.tolist()), 2**cfg.t, DEFAULT_REFINEMENT, True
    )
    n_hyp = cand.size
    est = np.empty(phis.size, dtype=np.int64)
    for j in range(phis.size):
        lp = np.zeros(n_hyp)
        lo, hi = 0, n_hyp - 1
        for s in range(n_stages):
            hc = int(h[j, s])
            nh = cfg.n_shot - hc
            seg = slice(lo, hi + 1)
            if hc > 0:
                lp[seg] += float(hc) * ls[s, seg]
            if nh > 0:
                lp[seg] += float(nh) * lc[s, seg]
            weights = np.exp(lp[seg] - lp[seg].max())
            a, b = _shrink_to_mass(weights, cfg.mass * float(weights.sum()))
            lo, hi = lo + a, lo + b
        est[j] = lo + int(np.argmax(lp[lo : hi + 1]))
    phase = cand[est]
    n = phis.size
    queries = np.full(n, cfg.n_shot * int(schedule.sum()), np.int64)
    return (
        phase,
        phase_to_fraction(phase),
        queries,
        np.full(n, cfg.n_shot * n_stages, np.int64),
    )


_RUNNERS = {
    McConfig: _run_mc,
    PeaConfig: _run_pea,
    BpeaConfig: _run_bpea,
    AbpeaConfig: _run_abpea,
    MlaeConfig: _run_mlae,
    QcoinConfig: _run_qcoin,
}


def _prefetch_tables(cfg: SchemeConfig) -> None:
    # Build shared tables before threads fan out.
    if isinstance(cfg, (BpeaConfig, AbpeaConfig)):
        qc_loglik_tables(cfg.T, DEFAULT_REFINEMENT)
    elif isinstance(cfg, MlaeConfig):
        _amplified_loglik_tables(
            tuple(mlae_schedule(cfg.t).tolist()), 2**cfg.t, DEFAULT_REFINEMENT, False
        )
    elif isinstance(cfg, QcoinConfig):
        _amplified_loglik_tables(
            tuple(qcoin_schedule(cfg.t).tolist()), 2**cfg.t, DEFAULT_REFINEMENT, True
        )


def _assert_ledger(cfg: SchemeConfig, queries: np.ndarray, shots: np.ndarray) -> None:
    """Documented cost formulas, asserted on every invocation."""
    if isinstance(cfg, McConfig):
        ok = np.all(queries == cfg.n_shot) and np.all(shots == cfg.n_shot)
    elif isinstance(cfg, PeaConfig):
        ok = np.all(queries == cfg.T - 1) and np.all(shots == 1)
    elif isinstance(cfg, BpeaConfig):
        ok = np.all(queries == cfg.n_shot * (cfg.T - 1)) and np.all(shots == cfg.n_shot)
    elif isinstance(cfg, AbpeaConfig):
        ok = (
            np.all((shots >= cfg.n_min) & (shots <= cfg.n_max))
            and np.all(queries == shots * (cfg.T - 1))
        )
    elif isinstance(cfg, MlaeConfig):
        total = cfg.n_shot * int(mlae_schedule(cfg.t).sum())
        ok = np.all(queries == total) and np.all(shots == cfg.n_shot * cfg.t)
    else:
        total = cfg.n_shot * int(qcoin_schedule(cfg.t).sum())
        ok = np.all(queries == total) and np.all(shots == cfg.n_shot * (cfg.t + 1))
    assert ok, f"query ledger violated for {cfg!r}"


def run_batch(
    phis: np.ndarray,
    cfg: SchemeConfig,
    seed: int,
    stream_start: int = 0,
    threads: int = 1,
) -> BatchResult:
    """Run one scheme over a batch of ground-truth phases.

    Trial i uses stream ``stream_start + i``; the output is a pure function
    of (phis, cfg, seed, stream_start) whatever ``threads`` is.
    """
    phis = np.atleast_1d(np.asarray(phis, dtype=np.float64))
    if np.any(phis < 0.0) or np.any(phis > 0.5):
        raise ValueError("phases must lie in [0, 1/2]")
    runner = _RUNNERS[type(cfg)]
    _prefetch_tables(cfg)
    n = phis.size
    phase = np.empty(n)
    fraction = np.empty(n)
    queries = np.empty(n, dtype=np.int64)
    shots = np.empty(n, dtype=np.int64)

    def work(a: int, b: int) -> None:
        ph, fr, qu, sh = runner(cfg, phis[a:b], seed, stream_start + a)
        phase[a:b] = ph
        fraction[a:b] = fr
        queries[a:b] = qu
        shots[a:b] = sh

    spans = [(a, min(a + CHUNK, n)) for a in range(0, n, CHUNK)]
    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda s: work(*s), spans))
    else:
        for a, b in spans:
            work(a, b)
    _assert_ledger(cfg, queries, shots)
    return BatchResult(phase=phase, fraction=fraction, queries=queries, shots=shots)


def _single(phi: float, cfg: SchemeConfig, rng: RandomStream) -> EstimateRecord:
    res = run_batch(
        np.array([check_phase(phi)]), cfg, seed=rng.seed, stream_start=rng.stream
    )
    return res.record(0)


def estimate_mc(phi: float, cfg: McConfig, rng: RandomStream) -> EstimateRecord:
    """Classical baseline: fraction estimate h/n_shot from Bernoulli draws."""
    return _single(phi, cfg, rng)


def estimate_qft_pea(phi: float, cfg: PeaConfig, rng: RandomStream) -> EstimateRecord:
    """One inverse-CDF draw from the counting distribution; T-1 queries."""
    return _single(phi, cfg, rng)


def estimate_qft_bpea(phi: float, cfg: BpeaConfig, rng: RandomStream) -> EstimateRecord:
    """n_shot PEA draws combined by Bayesian likelihood maximization."""
    return _single(phi, cfg, rng)


def estimate_qft_abpea(phi: float, cfg: AbpeaConfig, rng: RandomStream) -> EstimateRecord:
    """Adaptive BPEA; shots grow until a 2/T-dense sample window appears."""
    return _single(phi, cfg, rng)


def estimate_mlae(phi: float, cfg: MlaeConfig, rng: RandomStream) -> EstimateRecord:
    """Maximum-likelihood estimate over the geometric amplification schedule."""
    return _single(phi, cfg, rng)


def estimate_qcoin(phi: float, cfg: QcoinConfig, rng: RandomStream) -> EstimateRecord:
    """Posterior-in-interval QCoin variant; see :class:`QcoinConfig`."""
    return _single(phi, cfg, rng)
