"""Counter-based random streams.

Every stochastic task (a trial in a sweep, a pixel channel in an image run)
draws from its own Philox stream keyed by ``(seed, stream)``.  The draw
sequence is a pure function of that pair, so serial and parallel executions
of the same workload produce identical numbers no matter how work is split
across threads.
"""

from dataclasses import dataclass

import numpy as np

_U64 = np.uint64


def _check_u64(name: str, value: int) -> int:
    value = int(value)
    if not 0 <= value < 2**64:
        raise ValueError(f"{name} must fit in an unsigned 64-bit integer, got {value}")
    return value


@dataclass(frozen=True)
class RandomStream:
    """A (seed, stream) pair addressing one independent Philox stream."""

    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "seed", _check_u64("seed", self.seed))
        object.__setattr__(self, "stream", _check_u64("stream", self.stream))

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        key = np.array([self.seed, self.stream], dtype=_U64)
        return np.random.Generator(np.random.Philox(key=key))

    def uniforms(self, n: int) -> np.ndarray:
        """First ``n`` uniform doubles in [0, 1) of this stream."""
        return self.generator().random(n)


def uniform_rows(seed: int, stream_start: int, n_rows: int, budget: int) -> np.ndarray:
    """Uniform draws for ``n_rows`` consecutive streams.

    Row ``i`` holds the first ``budget`` uniforms of stream
    ``stream_start + i``.  Schemes consume a prefix of their row; trailing
    entries are simply never read, which keeps variable-cost schemes (ABPEA)
    on the same stream protocol as fixed-cost ones.
    """
    seed = _check_u64("seed", seed)
    stream_start = _check_u64("stream_start", stream_start)
    out = np.empty((n_rows, budget), dtype=np.float64)
    key = np.array([seed, 0], dtype=_U64)
    for i in range(n_rows):
        key[1] = _U64(stream_start + i)
        out[i] = np.random.Generator(np.random.Philox(key=key)).random(budget)
    return out
