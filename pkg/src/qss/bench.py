"""Statistical harnesses for the error studies.

``run_sweep`` measures MAE and tail exceedance against query cost over a
ladder of scheme configurations, on a shared set of uniformly random
ground-truth fractions.  ``run_pattern`` sweeps the truth over a fixed grid
and reports bias and MAE per point.  Errors are measured in fraction space
(the image gray scale is the counted fraction); phase-space metrics sit
behind a flag.
"""

from dataclasses import dataclass, field

import numpy as np

from .phasedist import fraction_to_phase
from .rng import RandomStream
from .schemes import SchemeConfig, run_batch

#: Stream reserved for drawing ground truths; far above any trial index.
TRUTH_STREAM = 2**64 - 1

DEFAULT_THRESHOLDS = (0.1, 0.01, 0.001)


@dataclass(frozen=True)
class SweepSpec:
    schemes: tuple[SchemeConfig, ...]
    n_truths: int = 10_000
    seed: int = 42
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    phase_space: bool = False

    def __post_init__(self):
        if not self.schemes:
            raise ValueError("sweep needs at least one scheme configuration")
        if self.n_truths < 1:
            raise ValueError("n_truths must be >= 1")
        thr = self.thresholds
        if not thr or any(not 0.0 < x < 1.0 for x in thr):
            raise ValueError("thresholds must lie in (0, 1)")
        if any(b >= a for a, b in zip(thr, thr[1:])):
            raise ValueError("thresholds must be strictly decreasing")


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    params: str
    mean_queries: float
    mae: float
    pba: tuple[float, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class PatternRow:
    truth: float
    bias: float
    mae: float


def sweep_truths(spec: SweepSpec) -> np.ndarray:
    """The ground-truth fractions shared by every ladder entry of a sweep."""
    return RandomStream(spec.seed, TRUTH_STREAM).uniforms(spec.n_truths)


def run_sweep(spec: SweepSpec, threads: int = 1) -> list[SweepRow]:
    """One row per ladder entry, with exact sample statistics of the errors.

    All entries see the same truths and the same per-trial streams, so the
    comparison is paired and the output is a pure function of ``spec``.
    """
    truths = sweep_truths(spec)
    phis = fraction_to_phase(truths)
    rows = []
    for cfg in spec.schemes:
        res = run_batch(phis, cfg, seed=spec.seed, stream_start=0, threads=threads)
        if spec.phase_space:
            err = np.abs(res.phase - phis)
        else:
            err = np.abs(res.fraction - truths)
        pba = tuple(
            float(np.count_nonzero(err > thr)) / spec.n_truths
            for thr in spec.thresholds
        )
        rows.append(
            SweepRow(
                scheme=cfg.name,
                params=cfg.params(),
                mean_queries=float(res.queries.mean()),
                mae=float(err.mean()),
                pba=pba,
            )
        )
    return rows


def pattern_grid(phi_step: float) -> np.ndarray:
    """The truth grid {0, step, 2*step, ..., 1}; step must divide 1 evenly."""
    steps = 1.0 / phi_step
    if abs(steps - round(steps)) > 1e-9 * steps:
        raise ValueError(f"step {phi_step} does not divide 1 evenly")
    n = int(round(steps))
    return np.arange(n + 1) / n


def run_pattern(
    cfg: SchemeConfig,
    phi_step: float = 0.001,
    n_test: int = 10_000,
    seed: int = 42,
    threads: int = 1,
) -> list[PatternRow]:
    """Bias and MAE of a scheme across the truth grid, n_test trials a point.

    Grid point i uses streams [i * n_test, (i + 1) * n_test); rows come back
    in grid order whatever the thread count.
    """
    if n_test < 1:
        raise ValueError("n_test must be >= 1")
    grid = pattern_grid(phi_step)
    rows = []
    for i, v in enumerate(grid):
        phis = np.full(n_test, fraction_to_phase(float(v)))
        res = run_batch(
            phis, cfg, seed=seed, stream_start=i * n_test, threads=threads
        )
        rows.append(
            PatternRow(
                truth=float(v),
                bias=float(res.fraction.mean() - v),
                mae=float(np.abs(res.fraction - v).mean()),
            )
        )
    return rows


def fit_loglog_slope(points) -> float:
    """Least-squares slope of log(mae) against log(queries)."""
    pts = [(float(q), float(m)) for q, m in points]
    if len(pts) < 3:
        raise ValueError("need at least three points to fit a slope")
    if any(q <= 0.0 or m <= 0.0 for q, m in pts):
        raise ValueError("queries and mae must be positive")
    q = np.log([p[0] for p in pts])
    m = np.log([p[1] for p in pts])
    return float(np.polyfit(q, m, 1)[0])
