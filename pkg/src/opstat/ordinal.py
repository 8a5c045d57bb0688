"""Ordinal-pattern symbolization of time series.

Each sliding window of ``D`` consecutive samples is mapped to the
permutation that sorts it ascending; the pattern index is the
lexicographic rank of that permutation, an integer in ``[0, D!)``.
Index 0 is the strictly increasing window, ``D! - 1`` the strictly
decreasing one.

Tied values inside a window are handled by an explicit policy:

* ``reject``  -- raise :class:`~opstat.errors.TieError` (the default;
  the sampling model assumes distinct values),
* ``stable``  -- the earlier sample is treated as the smaller one,
* ``jitter``  -- add deterministic sub-resolution noise keyed by a seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from numpy.random import Generator, Philox

from .errors import ParameterError, TieError

MAX_EMBEDDING = 8  # k = 8! = 40320 keeps histograms in memory
UNDERSAMPLING_FACTOR = 100  # rule of thumb: n >= 100 * k

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class TiePolicy:
    """How :func:`symbolize` treats equal values inside a window."""

    kind: str
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in ("reject", "stable", "jitter"):
            raise ParameterError(f"unknown tie policy {self.kind!r}")
        if self.kind == "jitter" and self.seed is None:
            raise ParameterError("jitter tie policy requires a seed")

    @classmethod
    def reject(cls) -> "TiePolicy":
        return cls("reject")

    @classmethod
    def stable(cls) -> "TiePolicy":
        return cls("stable")

    @classmethod
    def jitter(cls, seed: int) -> "TiePolicy":
        return cls("jitter", seed)

    @classmethod
    def parse(cls, text: str) -> "TiePolicy":
        """Parse ``"reject"``, ``"stable"`` or ``"jitter:SEED"``."""
        if text == "reject":
            return cls.reject()
        if text == "stable":
            return cls.stable()
        if text.startswith("jitter:"):
            try:
                return cls.jitter(int(text.split(":", 1)[1]))
            except ValueError:
                raise ParameterError(f"bad jitter seed in {text!r}") from None
        raise ParameterError(f"unknown tie policy {text!r}")

    def __str__(self) -> str:
        if self.kind == "jitter":
            return f"jitter:{self.seed}"
        return self.kind


@dataclass
class TimeSeries:
    """Ordered real-valued samples with provenance metadata."""

    samples: np.ndarray
    label: str = ""
    source: str | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ParameterError("samples must be one-dimensional")
        if self.samples.size < 2:
            raise ParameterError("a time series needs at least 2 samples")
        if not np.all(np.isfinite(self.samples)):
            bad = int(np.flatnonzero(~np.isfinite(self.samples))[0])
            raise ParameterError(f"non-finite sample at position {bad}")

    def __len__(self) -> int:
        return int(self.samples.size)


@dataclass
class PatternSequence:
    """Pattern indices produced by :func:`symbolize`."""

    indices: np.ndarray
    D: int
    k: int

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= self.k):
            raise ParameterError("pattern index out of range [0, k)")

    def __len__(self) -> int:
        return int(self.indices.size)


@dataclass
class PatternHistogram:
    """Counts of the ``k`` possible ordinal patterns over ``n`` windows.

    ``D`` is kept when the histogram came from an actual symbolization;
    histograms sampled directly from a multinomial model carry the value
    only when ``k`` is a factorial.
    """

    counts: np.ndarray
    n: int
    k: int
    D: int | None = None

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.size != self.k:
            raise ParameterError(f"expected {self.k} bins, got {self.counts.size}")
        if np.any(self.counts < 0):
            raise ParameterError("negative count")
        if int(self.counts.sum()) != self.n:
            raise ParameterError("counts do not sum to n")

    @property
    def proportions(self) -> np.ndarray:
        return self.counts / float(self.n)


def _embedding_for(k: int) -> int | None:
    """Inverse factorial: the D with D! = k, or None."""
    f, d = 1, 1
    while f < k:
        d += 1
        f *= d
    return d if f == k else None


def _deterministic_jitter(x: np.ndarray, seed: int) -> np.ndarray:
    """Add noise small enough never to reorder distinct values."""
    gaps = np.diff(np.unique(x))
    scale = float(gaps.min()) if gaps.size else max(1.0, float(np.abs(x).max()))
    rng = Generator(Philox(key=np.array([seed & _MASK64, 0], dtype=np.uint64)))
    return x + rng.uniform(0.0, scale / 2.0, size=x.size)


def symbolize(series: TimeSeries, D: int, tie_policy: TiePolicy | str = "reject") -> PatternSequence:
    """Map every window of ``D`` consecutive samples to its pattern index.

    Parameters
    ----------
    series : TimeSeries
    D : int
        Embedding dimension, between 2 and 8.
    tie_policy : TiePolicy or str
        ``"reject"`` (default), ``"stable"`` or ``"jitter:SEED"``.

    Returns
    -------
    PatternSequence
        One index per window; length is ``len(series) - D + 1``.
    """
    if isinstance(tie_policy, str):
        tie_policy = TiePolicy.parse(tie_policy)
    if not (2 <= D <= MAX_EMBEDDING):
        raise ParameterError(f"embedding dimension must be in [2, {MAX_EMBEDDING}], got {D}")
    x = series.samples
    if x.size < D:
        raise ParameterError(f"series of length {x.size} is too short for D={D}")

    if tie_policy.kind == "jitter":
        x = _deterministic_jitter(x, tie_policy.seed)

    windows = sliding_window_view(x, D)
    if tie_policy.kind == "reject":
        has_tie = (np.diff(np.sort(windows, axis=1), axis=1) == 0).any(axis=1)
        if has_tie.any():
            pos = int(np.flatnonzero(has_tie)[0])
            raise TieError(
                f"tied values in window starting at position {pos}; "
                "use the stable or jitter tie policy for data with ties",
                window_index=pos,
            )

    # Stable argsort ranks equal values in order of appearance, which is
    # exactly the "earlier sample is smaller" rule.
    perm = np.argsort(windows, axis=1, kind="stable")

    # Lexicographic rank of each permutation via its Lehmer code.
    codes = np.zeros(perm.shape[0], dtype=np.int64)
    for j in range(D - 1):
        col = perm[:, j]
        smaller_before = np.zeros_like(col)
        for i in range(j):
            smaller_before += perm[:, i] < col
        codes += (col - smaller_before) * math.factorial(D - 1 - j)

    return PatternSequence(indices=codes, D=D, k=math.factorial(D))


def histogram(patterns: PatternSequence) -> PatternHistogram:
    """Count occurrences of each possible pattern."""
    if len(patterns) == 0:
        raise ParameterError("cannot build a histogram from an empty pattern sequence")
    counts = np.bincount(patterns.indices, minlength=patterns.k)
    return PatternHistogram(counts=counts, n=len(patterns), k=patterns.k, D=patterns.D)


def sample_size_warning(n: int, k: int) -> str | None:
    """Advisory when the pattern count is below the n >= 100*k rule."""
    if n < 1 or k < 2:
        raise ParameterError("need n >= 1 and k >= 2")
    if n < UNDERSAMPLING_FACTOR * k:
        return (
            f"n={n} is below the recommended n >= {UNDERSAMPLING_FACTOR}*k = "
            f"{UNDERSAMPLING_FACTOR * k} for k={k}; proportions may be unreliable"
        )
    return None
