"""Independent brute-force verification of the analytic machinery.

Two things are checked from first principles here:

* a dense state-vector simulation of QFT phase estimation over the Grover
  rotation, exploiting that the system register stays inside the 2-d plane
  spanned by the unmarked/marked uniform states.  Its folded measurement
  distribution must reproduce :func:`qss.phasedist.qc_pmf`;
* the reduction of averaging a fixed-point table f(j) to Boolean counting
  over (j, k) pairs, including the exact sum identity and the geometric
  rotation-angle relation sin(pi*phi) = sqrt(S/N).

Nothing in this module is used by the estimators; it exists to catch bugs
in the formulas the rest of the package relies on.
"""

from dataclasses import dataclass

import numpy as np

from .phasedist import DistributionTable, check_phase, qc_support

MAX_ANCILLAS = 12


class DegenerateRotationError(ValueError):
    """g is constant, the {alpha, beta} plane collapses; use phi in {0, 1/2}."""


def grover_rotation(phi: float) -> np.ndarray:
    """The Grover iteration restricted to the {alpha, beta} plane.

    A rotation by 2*pi*phi with eigenvalues exp(+-2i*pi*phi).
    """
    phi = check_phase(phi)
    c = np.cos(2.0 * np.pi * phi)
    s = np.sin(2.0 * np.pi * phi)
    return np.array([[c, -s], [s, c]])


def simulate_pea(phi: float, t: int) -> DistributionTable:
    """State-vector QFT phase estimation on the uniform Grover state.

    Builds the (2^t x 2)-dimensional register bank (ancilla x plane),
    applies the controlled powers G^(2^k) as honest repeated matrix
    squarings, inverse-Fourier-transforms the ancilla and folds the
    measurement marginal onto [0, 1/2].
    """
    phi = check_phase(phi)
    t = int(t)
    if not 1 <= t <= MAX_ANCILLAS:
        raise ValueError(f"ancilla count must lie in [1, {MAX_ANCILLAS}], got {t}")
    T = 2**t

    # |u> = cos(pi phi)|alpha> + sin(pi phi)|beta>, ancilla uniform.
    amp = np.empty((T, 2), dtype=np.complex128)
    amp[:, 0] = np.cos(np.pi * phi) / np.sqrt(T)
    amp[:, 1] = np.sin(np.pi * phi) / np.sqrt(T)

    power = grover_rotation(phi)
    for k in range(t):
        if k > 0:
            power = power @ power  # G^(2^k)
        controlled = (np.arange(T) >> k) & 1 == 1
        amp[controlled] = amp[controlled] @ power.T

    # Inverse QFT on the ancilla register: |x> -> T^-1/2 sum_y e^{-2pi i xy/T}|y>.
    amp = np.fft.fft(amp, axis=0) / np.sqrt(T)

    prob = np.abs(amp[:, 0]) ** 2 + np.abs(amp[:, 1]) ** 2
    norm = float(prob.sum())
    if abs(norm - 1.0) > 1e-10:
        raise AssertionError(f"state norm drifted to {norm}")

    folded = prob[: T // 2 + 1].copy()
    folded[1 : T // 2] += prob[T // 2 + 1 :][::-1]
    return DistributionTable(T=T, support=qc_support(T), mass=folded)


@dataclass(frozen=True)
class OracleTable:
    """Explicit ray-energy table f(j) with fixed-point parameters.

    The desk-scale stand-in for the ray-tracing oracle: 2^n energies, each
    representable (after truncation) in b-bit fixed point with b0 integer
    bits, i.e. on the grid {m * 2^(b0-b) : 0 <= m < 2^b}.
    """

    n: int
    b: int
    b0: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.n < 1 or self.b < 1:
            raise ValueError("n and b must be positive")
        if not 0 <= self.b0 <= self.b:
            raise ValueError("need 0 <= b0 <= b")
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (2**self.n,):
            raise ValueError(f"need exactly 2^{self.n} values")
        if np.any(values < 0.0) or np.any(values >= 2.0**self.b0):
            raise ValueError("values must satisfy 0 <= f(j) < 2^b0")
        object.__setattr__(self, "values", values)
        values.flags.writeable = False

    @property
    def resolution(self) -> float:
        return 2.0 ** (self.b0 - self.b)

    def quantized(self) -> np.ndarray:
        """Values truncated toward zero onto the b-bit fixed-point grid."""
        return np.floor(self.values / self.resolution) * self.resolution


def count_g(tbl: OracleTable) -> int:
    """Exhaustive sum of the Boolean reduction g over all (j, k) pairs.

    g(j, k) = 1 iff f_quant(j) > 2^(b0-b) * k with k = 0..2^b-1.  The strict
    comparison makes sum-over-g recover the quantized average exactly.
    """
    q = tbl.quantized()
    thresholds = np.arange(2**tbl.b) * tbl.resolution
    return int(np.count_nonzero(q[:, None] > thresholds[None, :]))


def verify_counting_relation(tbl: OracleTable) -> tuple[float, float]:
    """(S_direct, S_via_g): the averaged table vs the counting route.

    The two are bit-exact for fixed-point inputs; the quantized average
    differs from the raw one by less than one fixed-point step.
    """
    s_direct = float(tbl.quantized().sum()) * 2.0 ** (-tbl.n)
    s_via_g = float(count_g(tbl)) * 2.0 ** (-(tbl.n + tbl.b - tbl.b0))
    return s_direct, s_via_g


def verify_rotation_angle(tbl: OracleTable) -> float:
    """Angle/pi between the uniform state and the unmarked axis.

    Builds the actual 2^(n+b)-dimensional vectors and measures the angle by
    inner products; equals arcsin(sqrt(count_g / 2^(n+b)))/pi.
    """
    q = tbl.quantized()
    thresholds = np.arange(2**tbl.b) * tbl.resolution
    g = (q[:, None] > thresholds[None, :]).ravel()
    dim = g.size
    marked = int(np.count_nonzero(g))
    if marked == 0 or marked == dim:
        raise DegenerateRotationError(
            "g is constant; the rotation plane is undefined (phi is 0 or 1/2)"
        )
    u = np.full(dim, 1.0 / np.sqrt(dim))
    alpha = (~g).astype(np.float64) / np.sqrt(dim - marked)
    beta = g.astype(np.float64) / np.sqrt(marked)
    return float(np.arctan2(beta @ u, alpha @ u) / np.pi)


def random_oracle_table(
    rng: np.random.Generator, n: int, b: int, b0: int
) -> OracleTable:
    """Random table with energies uniform in [0, 2^b0); for the verify suites."""
    values = rng.random(2**n) * 2.0**b0
    return OracleTable(n=n, b=b, b0=b0, values=values)
