from dataclasses import dataclass, field
from typing import Iterable, List

import numpy as np


@dataclass(frozen=True)
class LatencyTrace:
    """
    Per-target-word emission delays, measured in source units consumed.

    Delays must be non-decreasing and never exceed src_len.
    """

    delays: List[float] = field(default_factory=list)
    src_len: int = 0
    tgt_len: int = 0

    def __post_init__(self):
        object.__setattr__(self, "delays", [float(d) for d in self.delays])
        if self.src_len < 1 or self.tgt_len < 1:
            raise ValueError(f"Lengths must be >= 1, got src_len={self.src_len} tgt_len={self.tgt_len}")
        d = np.asarray(self.delays)
        if d.size and (np.any(np.diff(d) < 0) or d.max() > self.src_len or d.min() < 0):
            raise ValueError(f"Delays must be non-decreasing within [0, {self.src_len}]: {self.delays}")


def average_lagging(trace: LatencyTrace) -> float:
    """
    Average Lagging of a latency trace.

    AL = (1/tau) * sum_{i=1..tau} (d_i - (i - 1) * src_len / tgt_len), where
    tau is the first i whose delay reaches src_len (all of them otherwise).

    Raises:
        ValueError: for an empty trace
    """
    if not trace.delays:
        raise ValueError("Average lagging needs at least one delay")
    delays = np.asarray(trace.delays, dtype=float)
    reached = np.nonzero(delays >= trace.src_len)[0]
    tau = int(reached[0]) + 1 if reached.size else len(delays)
    oracle = np.arange(tau) * trace.src_len / trace.tgt_len
    return float(np.mean(delays[:tau] - oracle))


def combine_lagging(values: Iterable[float], mode: str = "sum") -> float:
    """
    Aggregate the AL of systems run one after the other ("sum") or side by side ("max").

    Raises:
        ValueError: for an unknown mode or no values
    """
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        raise ValueError("No lagging values to combine")
    if mode == "sum":
        return float(values.sum())
    if mode == "max":
        return float(values.max())
    raise ValueError(f"Unknown aggregation mode: {mode}")
