"""Visual experiments: gray-disk noise studies and the HDR pipeline.

Scalar images are (h, w) float arrays in [0, 1]; HDR images are (h, w, 3)
arrays of non-negative linear-light values.  The HDR pipeline scales each
channel by 2^-b0 into the unit fraction range, truncates it to b-bit fixed
point, runs the chosen counting scheme on the matching phase, and scales
the estimate back; tone mapping and gamma encoding only happen on the way
out to 8-bit PNG.

Pixel channel (y, x, c) always uses stream 3 * (y * w + x) + c (plain pixel
index for scalar images), so parallel runs reproduce serial ones exactly.
"""

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .phasedist import fraction_to_phase
from .schemes import SchemeConfig, run_batch

#: width * height guard against absurd PFM headers.
MAX_PIXELS = 1 << 26

DIFF_THRESHOLDS = (0.05, 0.1, 0.2)


class PfmError(ValueError):
    """Malformed Portable FloatMap input."""


@dataclass(frozen=True)
class PipelineConfig:
    """Fixed-point and scheme parameters of the HDR noise pipeline."""

    scheme: SchemeConfig
    b: int = 16
    b0: int = 4
    seed: int = 42

    def __post_init__(self):
        if self.b < 1:
            raise ValueError("b must be a positive integer")
        if not 0 <= self.b0 <= self.b:
            raise ValueError("need 0 <= b0 <= b")


def _check_scalar(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("scalar image must be a (h, w) array")
    if np.any(img < 0.0) or np.any(img > 1.0) or not np.all(np.isfinite(img)):
        raise ValueError("scalar image values must lie in [0, 1]")
    return img


def _check_hdr(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("HDR image must be a (h, w, 3) array")
    if not np.all(np.isfinite(img)) or np.any(img < 0.0):
        raise ValueError("HDR components must be finite and non-negative")
    return img


def generate_gray_disk(size: int) -> np.ndarray:
    """Radial ramp: 0 at the center, reaching 1 at radius size/2.

    Pixel (y, x) carries min(r / R, 1) with r the Euclidean distance from
    (size/2, size/2) in pixel units and R = size/2.
    """
    size = int(size)
    if size < 2:
        raise ValueError("disk size must be at least 2")
    c = size / 2.0
    coords = np.arange(size) - c
    r = np.hypot(coords[:, None], coords[None, :])
    return np.minimum(r / c, 1.0)


def simulate_scalar(
    img: np.ndarray, scheme: SchemeConfig, seed: int, threads: int = 1
) -> np.ndarray:
    """Replace every pixel with one scheme estimate of its value."""
    img = _check_scalar(img)
    phis = fraction_to_phase(img.ravel())
    res = run_batch(phis, scheme, seed=seed, stream_start=0, threads=threads)
    return np.clip(res.fraction, 0.0, 1.0).reshape(img.shape)


def quantize_fraction(v: np.ndarray, b: int) -> np.ndarray:
    """Truncate unit fractions onto the b-bit fixed-point grid."""
    return np.floor(v * 2.0**b) * 2.0**-b


def simulate_hdr(img: np.ndarray, cfg: PipelineConfig, threads: int = 1) -> np.ndarray:
    """Per-channel quantum-noise injection in scaled HDR space.

    channel -> clamp(channel * 2^-b0 into [0, 1]) -> b-bit truncation ->
    phase -> scheme estimate -> fraction * 2^b0.
    """
    img = _check_hdr(img)
    v = np.clip(img.ravel() * 2.0**-cfg.b0, 0.0, 1.0)
    vq = quantize_fraction(v, cfg.b)
    phis = fraction_to_phase(vq)
    res = run_batch(phis, cfg.scheme, seed=cfg.seed, stream_start=0, threads=threads)
    return (res.fraction * 2.0**cfg.b0).reshape(img.shape)


def tone_map_aces(x):
    """Single-curve filmic fit, clamped to [0, 1]; monotone on x >= 0."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0.0):
        raise ValueError("tone map input must be non-negative")
    out = np.clip(
        arr * (2.51 * arr + 0.03) / (arr * (2.43 * arr + 0.59) + 0.14), 0.0, 1.0
    )
    return float(out) if arr.ndim == 0 else out


def gamma_encode(x):
    """Display encoding x^(1/2.2) on [0, 1]."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("gamma input must lie in [0, 1]")
    out = arr ** (1.0 / 2.2)
    return float(out) if arr.ndim == 0 else out


def load_pfm(path) -> np.ndarray:
    """Binary PFM reader; returns (h, w) or (h, w, 3) float64, top-down rows."""
    with open(path, "rb") as f:
        ident = _read_header_line(f)
        if ident == "PF":
            channels = 3
        elif ident == "Pf":
            channels = 1
        else:
            raise PfmError(f"not a PFM file (identifier {ident!r})")
        dims = _read_header_line(f).split()
        if len(dims) != 2:
            raise PfmError(f"malformed dimensions line {dims!r}")
        try:
            width, height = int(dims[0]), int(dims[1])
        except ValueError as exc:
            raise PfmError(f"malformed dimensions line {dims!r}") from exc
        if width < 1 or height < 1 or width * height > MAX_PIXELS:
            raise PfmError(f"unreasonable dimensions {width}x{height}")
        try:
            scale = float(_read_header_line(f))
        except ValueError as exc:
            raise PfmError("malformed scale line") from exc
        if scale == 0.0:
            raise PfmError("scale factor must be non-zero")
        dtype = "<f4" if scale < 0.0 else ">f4"
        count = width * height * channels
        raw = f.read(4 * count)
        if len(raw) != 4 * count:
            raise PfmError("truncated pixel data")
    data = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    data = data.reshape(height, width, channels)
    data = data[::-1]  # PFM stores rows bottom-up
    return data[:, :, 0] if channels == 1 else data


def _read_header_line(f) -> str:
    buf = bytearray()
    while True:
        ch = f.read(1)
        if not ch:
            raise PfmError("unexpected end of header")
        if ch == b"\n":
            break
        buf += ch
        if len(buf) > 128:
            raise PfmError("oversized header line")
    return buf.decode("ascii", errors="replace").strip()


def save_pfm(img: np.ndarray, path) -> None:
    """Binary PFM writer (little-endian, scale -1.0, bottom-up rows)."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        ident, data = b"Pf", img[:, :, None]
    elif img.ndim == 3 and img.shape[2] == 3:
        ident, data = b"PF", img
    else:
        raise ValueError("PFM image must be (h, w) or (h, w, 3)")
    height, width = data.shape[:2]
    with open(path, "wb") as f:
        f.write(ident + b"\n")
        f.write(f"{width} {height}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(np.ascontiguousarray(data[::-1], dtype="<f4").tobytes())


def save_png8(img: np.ndarray, path) -> None:
    """8-bit PNG: tone map + gamma for HDR input, gamma only for scalar."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 3:
        sdr = gamma_encode(tone_map_aces(_check_hdr(img)))
        mode = "RGB"
    else:
        sdr = gamma_encode(_check_scalar(img))
        mode = "L"
    levels = np.rint(sdr * 255.0).astype(np.uint8)
    Image.fromarray(levels, mode=mode).save(path, format="PNG")


def diff_exceedance(
    reference: np.ndarray,
    noisy: np.ndarray,
    fraction_scale: float = 1.0,
    thresholds=DIFF_THRESHOLDS,
) -> list[tuple[float, int]]:
    """Per-threshold counts of |noisy - reference| * fraction_scale > thr.

    ``fraction_scale`` maps image units into fraction space (2^-b0 for HDR
    images, 1 for scalar ones).
    """
    err = np.abs(np.asarray(noisy, float) - np.asarray(reference, float))
    err = err * fraction_scale
    return [(float(t), int(np.count_nonzero(err > t))) for t in thresholds]
