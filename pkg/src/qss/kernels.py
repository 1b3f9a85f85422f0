"""Backend selection for the batch kernels.

The compiled extension is preferred when importable; otherwise the numpy
fallback takes over transparently.  Both produce bit-identical results.
Set QSS_BACKEND=python or QSS_BACKEND=compiled to force a choice (the
latter raises if the extension is missing rather than degrading silently).
"""

import os

_requested = os.environ.get("QSS_BACKEND", "").strip().lower()

if _requested not in ("", "compiled", "python"):
    raise ImportError(f"QSS_BACKEND must be 'compiled' or 'python', got {_requested!r}")

if _requested == "python":
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _kernels_py as _impl  # type: ignore[no-redef]

        BACKEND = "python"

sample_rows = _impl.sample_rows
bernoulli_count_rows = _impl.bernoulli_count_rows
gather_fold_argmax = _impl.gather_fold_argmax
weighted_fold_argmax = _impl.weighted_fold_argmax
abpea_rows = _impl.abpea_rows
