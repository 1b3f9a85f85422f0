"""qss: a simulation workbench for quantum-counting-based supersampling.

Exact analytic sampling of quantum counting outputs, six estimator schemes
with query accounting, a state-vector verification oracle, benchmark
harnesses for the error studies, and an imaging pipeline that injects the
simulated quantum noise into grayscale and HDR images.
"""

from .kernels import BACKEND
from .phasedist import (
    DistributionTable,
    bayes_argmax,
    fraction_to_phase,
    pea_pmf,
    pea_pmf_point,
    phase_to_fraction,
    qc_pmf,
)
from .rng import RandomStream
from .schemes import (
    AbpeaConfig,
    BatchResult,
    BpeaConfig,
    EstimateRecord,
    McConfig,
    MlaeConfig,
    PeaConfig,
    QcoinConfig,
    estimate_mc,
    estimate_mlae,
    estimate_qcoin,
    estimate_qft_abpea,
    estimate_qft_bpea,
    estimate_qft_pea,
    run_batch,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DistributionTable",
    "RandomStream",
    "bayes_argmax",
    "fraction_to_phase",
    "pea_pmf",
    "pea_pmf_point",
    "phase_to_fraction",
    "qc_pmf",
    "McConfig",
    "PeaConfig",
    "BpeaConfig",
    "AbpeaConfig",
    "MlaeConfig",
    "QcoinConfig",
    "EstimateRecord",
    "BatchResult",
    "estimate_mc",
    "estimate_qft_pea",
    "estimate_qft_bpea",
    "estimate_qft_abpea",
    "estimate_mlae",
    "estimate_qcoin",
    "run_batch",
    "__version__",
]
