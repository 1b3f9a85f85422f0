"""Pure-numpy batch kernels; the import-time fallback for qss._kernels.

Both backends implement the same contracts on the same inputs:

* distribution tables (CDFs, log-likelihood matrices) are always built by
  :mod:`qss.phasedist` / :mod:`qss.schemes`, never here;
* kernels consume those tables plus per-stream uniforms and perform only
  comparisons, counts, left-fold additions and first-maximum argmax.

Every floating-point operation below has a fixed order, so the compiled
backend reproduces these results bit for bit.  Sample values are handled as
grid indices (support point k/T <-> index k), which turns the ABPEA window
test "spread <= 2/T" into exact integer arithmetic.
"""

import numpy as np


def sample_rows(cdf_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw per trial: smallest index with cdf > u.

    ``cdf_rows`` has one row per trial, or a single row shared by all
    trials.  Equivalent to searchsorted(side="right"), clamped to the last
    index so a CDF that tops out at 1-eps still produces a valid draw.
    """
    n = u.shape[0]
    m = cdf_rows.shape[1]
    if cdf_rows.shape[0] == 1:
        idx = np.searchsorted(cdf_rows[0], u, side="right")
    elif cdf_rows.shape[0] == n:
        idx = np.count_nonzero(cdf_rows <= u[:, None], axis=1)
    else:
        raise ValueError("cdf_rows must have 1 row or one row per trial")
    return np.minimum(idx, m - 1).astype(np.int64)


def bernoulli_count_rows(p: np.ndarray, u_rows: np.ndarray, n_draws: int) -> np.ndarray:
    """Binomial draws by counting: h[i] = #{j < n_draws : u_rows[i, j] < p[i]}."""
    return np.count_nonzero(
        u_rows[:, :n_draws] < p[:, None], axis=1
    ).astype(np.int64)


def gather_fold_argmax(
    idx_rows: np.ndarray, loglik: np.ndarray, valid: np.ndarray
) -> np.ndarray:
    """Per trial: left-fold loglik rows of its samples, argmax over hypotheses.

    Hypotheses invalid for any sample (zero analytic likelihood) are
    excluded; ties break to the smallest hypothesis index.
    """
    n, k = idx_rows.shape
    out = np.empty(n, dtype=np.int64)
    for j in range(n):
        out[j] = _fold_argmax(idx_rows[j], loglik, valid)
    return out


def _fold_argmax(rows, loglik: np.ndarray, valid: np.ndarray) -> int:
    # valid is uint8 (0/1) to match the compiled backend's buffer type.
    acc = loglik[rows[0]].copy()
    ok = valid[rows[0]].copy()
    for i in rows[1:]:
        acc = acc + loglik[i]
        ok = ok & valid[i]
    if not ok.any():
        raise AssertionError("all hypotheses carry zero likelihood")
    acc[ok == 0] = -np.inf
    return int(np.argmax(acc))


def weighted_fold_argmax(
    h_rows: np.ndarray, n_shot: int, logsin2: np.ndarray, logcos2: np.ndarray
) -> np.ndarray:
    """Per trial: argmax of sum_s [h log sin^2 + (n_shot - h) log cos^2].

    Stage terms with a zero count are skipped entirely, so -inf entries in
    the log tables only propagate when the corresponding count is positive.
    """
    n, n_stages = h_rows.shape
    n_hyp = logsin2.shape[1]
    out = np.empty(n, dtype=np.int64)
    for j in range(n):
        acc = np.zeros(n_hyp, dtype=np.float64)
        for s in range(n_stages):
            h = int(h_rows[j, s])
            nh = n_shot - h
            if h > 0:
                acc = acc + float(h) * logsin2[s]
            if nh > 0:
                acc = acc + float(nh) * logcos2[s]
        out[j] = np.argmax(acc)
    return out


def _first_window(samples: list, w: int) -> int:
    """Leftmost start of w consecutive sorted indices spanning <= 2 grid steps."""
    for i in range(len(samples) - w + 1):
        if samples[i + w - 1] - samples[i] <= 2:
            return i
    return -1


def _densest_window(samples: list, w: int) -> int:
    best, best_spread = 0, samples[w - 1] - samples[0]
    for i in range(1, len(samples) - w + 1):
        spread = samples[i + w - 1] - samples[i]
        if spread < best_spread:
            best, best_spread = i, spread
    return best


def _window_len(alpha: float, n: int) -> int:
    # +1e-9 so that alpha values stored just below an exact product (0.7 * 10)
    # still floor to the intended integer.
    return max(1, int(alpha * n + 1e-9))


def abpea_rows(
    cdf_rows: np.ndarray,
    u_rows: np.ndarray,
    loglik: np.ndarray,
    valid: np.ndarray,
    alpha: float,
    n_min: int,
    n_max: int,
):
    """Adaptive Bayesian estimation, one trial per row.

    Grows a sorted sample set from n_min up to n_max, stopping as soon as
    floor(alpha * #S) consecutive sorted samples span at most two support
    grid steps (2/T).  The window test runs while #S < n_max only; if n_max
    is reached without one, the densest window is used instead.  Returns
    (argmax hypothesis index, shots drawn) per trial.
    """
    n = u_rows.shape[0]
    m = cdf_rows.shape[1]
    shared = cdf_rows.shape[0] == 1
    if not shared and cdf_rows.shape[0] != n:
        raise ValueError("cdf_rows must have 1 row or one row per trial")
    est = np.empty(n, dtype=np.int64)
    shots = np.empty(n, dtype=np.int64)
    for j in range(n):
        cdf = cdf_rows[0] if shared else cdf_rows[j]
        samples: list = []
        for k in range(n_min):
            idx = min(int(np.searchsorted(cdf, u_rows[j, k], side="right")), m - 1)
            _insort(samples, idx)
        win = -1
        w = 0
        while len(samples) < n_max:
            w = _window_len(alpha, len(samples))
            win = _first_window(samples, w)
            if win >= 0:
                break
            idx = min(
                int(np.searchsorted(cdf, u_rows[j, len(samples)], side="right")),
                m - 1,
            )
            _insort(samples, idx)
        if win < 0:
            w = _window_len(alpha, len(samples))
            win = _densest_window(samples, w)
        retained = samples[win : win + w]
        shots[j] = len(samples)
        est[j] = _fold_argmax(retained, loglik, valid)
    return est, shots


def _insort(samples: list, idx: int) -> None:
    lo, hi = 0, len(samples)
    while lo < hi:
        mid = (lo + hi) // 2
        if samples[mid] < idx:
            lo = mid + 1
        else:
            hi = mid
    samples.insert(lo, idx)
