"""Failure series: ordered failure times with cumulative defect counts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class FailureSeries:
    """Ordered failure times over an observation horizon.

    Parameters
    ----------
    times:
        Nondecreasing, strictly positive failure times (fractional days).
    horizon:
        End of the observation period; at least ``max(times)``.
    label:
        Where the series came from (project name, release name, ...).
    counts:
        Cumulative defect count at each failure time.  When omitted the
        i-th failure carries count ``i``, which is the normal case for
        series built from issue timestamps.  Explicit counts exist so that
        synthetic curves sampled on a time grid can be fitted directly.
    """

    times: np.ndarray
    horizon: float
    label: str = "series"
    counts: np.ndarray | None = field(default=None)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("times must be a nonempty 1-D array")
        if not np.all(np.isfinite(t)):
            raise ValueError("times must be finite")
        if np.any(t <= 0.0):
            raise ValueError("times must be strictly positive")
        if np.any(np.diff(t) < 0.0):
            raise ValueError("times must be nondecreasing")
        horizon = float(self.horizon)
        if not np.isfinite(horizon) or horizon < t[-1]:
            raise ValueError("horizon must be finite and cover max(times)")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "horizon", horizon)
        if self.counts is not None:
            c = np.asarray(self.counts, dtype=float)
            if c.shape != t.shape:
                raise ValueError("counts must match times in length")
            if not np.all(np.isfinite(c)):
                raise ValueError("counts must be finite")
            object.__setattr__(self, "counts", c)

    @property
    def n(self) -> int:
        return int(self.times.size)

    @property
    def cumulative(self) -> np.ndarray:
        """Cumulative counts; implicit 1..n when none were supplied."""
        if self.counts is None:
            return np.arange(1, self.n + 1, dtype=float)
        return self.counts
