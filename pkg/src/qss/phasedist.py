"""Analytic output distributions of QFT phase estimation and quantum counting.

Phases live in [0, 1); counting-context phases in [0, 1/2].  A phase phi and
an ancilla count t (grid size T = 2^t) determine the measurement distribution
of QFT phase estimation over the grid {k/T}.  Running it on the uniform
Grover superposition yields +phi or -phi with equal probability, and folding
the result onto [0, 1/2] gives the two-sided counting distribution that every
QFT-family scheme in :mod:`qss.schemes` samples from.

All tables are built here, in one place, with numpy transcendentals.  The
batch kernels (compiled or fallback) only ever *consume* these tables, which
keeps the two backends bit-identical.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

#: Per-factor floor for log-likelihoods, just below log of the smallest
#: positive double; keeps products of many tiny likelihoods out of -inf/nan
#: territory without ever promoting a zero-likelihood hypothesis.
LOG_FLOOR = -745.0

#: Default densification of the Bayesian candidate grid relative to 1/T.
DEFAULT_REFINEMENT = 64

_BRANCH_TOL = 1e-15


def check_grid_size(T: int) -> int:
    """Validate T = 2^t with t >= 1 and return it as a plain int."""
    T = int(T)
    if T < 2 or (T & (T - 1)) != 0:
        raise ValueError(f"grid size must be a power of two >= 2, got {T}")
    return T


def check_phase(phi: float, upper: float = 0.5) -> float:
    phi = float(phi)
    if not 0.0 <= phi <= upper:
        raise ValueError(f"phase must lie in [0, {upper}], got {phi}")
    return phi


@dataclass(frozen=True)
class DistributionTable:
    """Discrete PMF over a phase grid; the sampling source for QFT schemes."""

    T: int
    support: np.ndarray
    mass: np.ndarray

    def __post_init__(self) -> None:
        check_grid_size(self.T)
        if self.support.shape != self.mass.shape or self.support.ndim != 1:
            raise ValueError("support and mass must be 1-d arrays of equal length")
        if np.any(self.mass < 0.0):
            raise ValueError("negative probability mass")
        if abs(float(self.mass.sum()) - 1.0) > 1e-9:
            raise ValueError(f"mass sums to {self.mass.sum()!r}, not 1")
        if np.any(np.diff(self.support) <= 0.0):
            raise ValueError("support must be strictly increasing")
        self.support.flags.writeable = False
        self.mass.flags.writeable = False


def _kernel(delta: np.ndarray, T: int) -> np.ndarray:
    """(sin(T pi d) / (T sin(pi d)))^2 with its limits forced analytically.

    d integer -> 1 (the 0/0 limit); T*d a nonzero integer -> 0 (zero of the
    numerator).  Naive division would produce nan/garbage at both.
    """
    delta = np.asarray(delta, dtype=np.float64)
    peak = np.abs(delta - np.round(delta)) < _BRANCH_TOL
    Td = T * delta
    zero = (np.abs(Td - np.round(Td)) < _BRANCH_TOL) & ~peak
    safe = np.where(peak | zero, 0.25, delta)
    ratio = np.sin(np.pi * (T * safe)) / (T * np.sin(np.pi * safe))
    return np.where(peak, 1.0, np.where(zero, 0.0, ratio * ratio))


def pea_support(T: int) -> np.ndarray:
    return np.arange(check_grid_size(T)) / T


def qc_support(T: int) -> np.ndarray:
    return np.arange(check_grid_size(T) // 2 + 1) / T


def pea_pmf_point(phi: float, phitilde: float, T: int) -> float:
    """Probability that phase estimation outputs grid point ``phitilde``."""
    T = check_grid_size(T)
    phi = check_phase(phi, upper=1.0)
    phitilde = float(phitilde)
    k = phitilde * T
    if abs(k - round(k)) > 1e-12 or not 0.0 <= phitilde < 1.0:
        raise ValueError(f"phitilde {phitilde} is not on the grid k/{T}")
    return float(_kernel(np.float64(phitilde - phi), T))


def pea_pmf(phi: float, T: int) -> DistributionTable:
    """Measurement distribution of plain phase estimation on an eigenstate."""
    T = check_grid_size(T)
    phi = check_phase(phi, upper=1.0)
    support = pea_support(T)
    mass = _kernel(support - phi, T)
    return DistributionTable(T=T, support=support, mass=mass)


def qc_mass_batch(phis: np.ndarray, T: int) -> np.ndarray:
    """Folded counting masses for many phases at once; row i belongs to phis[i].

    Columns run over the folded support {k/T : k = 0..T/2}.  Interior points
    collect both the delta = phitilde - phi and delta = phitilde + phi kernel
    terms; the endpoints 0 and 1/2 are their own mirror images and carry the
    single difference term.
    """
    T = check_grid_size(T)
    phis = np.atleast_1d(np.asarray(phis, dtype=np.float64))
    support = qc_support(T)
    km = _kernel(support[None, :] - phis[:, None], T)
    kp = _kernel(support[None, :] + phis[:, None], T)
    mass = km + kp
    mass[:, 0] = km[:, 0]
    mass[:, -1] = km[:, -1]
    return mass


def qc_pmf(phi: float, T: int) -> DistributionTable:
    """Two-sided quantum counting distribution, folded onto [0, 1/2]."""
    phi = check_phase(phi)
    T = check_grid_size(T)
    mass = qc_mass_batch(np.float64(phi), T)[0]
    return DistributionTable(T=T, support=qc_support(T), mass=mass)


def fraction_to_phase(v):
    """Counted fraction S/N -> Grover rotation phase, arcsin(sqrt(v))/pi."""
    arr = np.asarray(v, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("fraction must lie in [0, 1]")
    out = np.arcsin(np.sqrt(arr)) / np.pi
    return float(out) if arr.ndim == 0 else out


def phase_to_fraction(phi):
    """Grover rotation phase -> counted fraction, sin^2(pi phi)."""
    arr = np.asarray(phi, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > 0.5):
        raise ValueError("counting phase must lie in [0, 1/2]")
    s = np.sin(np.pi * arr)
    out = s * s
    return float(out) if arr.ndim == 0 else out


def candidate_grid(T: int, refinement: int) -> np.ndarray:
    """Bayesian hypothesis grid {k/(refinement*T) : k = 0..refinement*T/2}."""
    T = check_grid_size(T)
    refinement = int(refinement)
    if refinement < 1:
        raise ValueError("grid refinement must be a positive integer")
    n = refinement * T
    return np.arange(n // 2 + 1) / n


@lru_cache(maxsize=6)
def qc_loglik_tables(T: int, refinement: int):
    """(candidates, loglik, valid) shared by every Bayesian estimator.

    ``loglik[s, h]`` is log P(support[s] | candidates[h]) floored at
    LOG_FLOOR; ``valid[s, h]`` marks analytically nonzero likelihoods.
    Cached: the tables depend only on (T, refinement) and are reused across
    trials, pixels and harness runs.
    """
    cand = candidate_grid(T, refinement)
    mass = np.ascontiguousarray(qc_mass_batch(cand, T).T)  # (support, hypotheses)
    valid = mass > 0.0
    loglik = np.full(mass.shape, LOG_FLOOR)
    np.log(mass, out=loglik, where=valid)
    np.maximum(loglik, LOG_FLOOR, out=loglik)
    for arr in (cand, loglik, valid):
        arr.flags.writeable = False
    return cand, loglik, valid


def bayes_argmax(samples, T: int, grid_refinement: int = DEFAULT_REFINEMENT) -> float:
    """Maximum-likelihood phase over the refined grid, given counting samples.

    Maximizes sum_k log P(theta_k | phitilde) over the candidate grid.
    Hypotheses that assign zero likelihood to any sample are excluded; ties
    break toward the smallest phitilde.  The likelihood is highly multi-modal,
    hence the exhaustive grid search.
    """
    T = check_grid_size(T)
    samples = np.atleast_1d(np.asarray(samples, dtype=np.float64))
    if samples.size == 0:
        raise ValueError("need at least one sample")
    idx = np.round(samples * T).astype(np.int64)
    if (
        np.any(np.abs(samples * T - idx) > 1e-9)
        or np.any(idx < 0)
        or np.any(idx > T // 2)
    ):
        raise ValueError("samples must lie on the counting support grid {k/T}")
    cand, loglik, valid = qc_loglik_tables(T, grid_refinement)
    score = loglik[idx[0]].copy()
    ok = valid[idx[0]].copy()
    for i in idx[1:]:
        score += loglik[i]
        ok &= valid[i]
    assert ok.any(), "all hypotheses carry zero likelihood"
    score[~ok] = -np.inf
    return float(cand[int(np.argmax(score))])
