"""Shannon entropy of a discrete distribution and moments of its plug-in
estimator under multinomial sampling.

All quantities are in nats. Available approximations for the mean and
variance of the estimated entropy:

* first order: bias term ``(k-1)/(2n)``, variance ``[sum p ln^2 p - H^2]/n``
* second/third order: series expansion through ``1/n^2`` resp. ``1/n^3``
  (requires strictly positive bins; the expansion contains ``1/p`` terms)
* asymptotic (delta method): mean ``H(p)``, variance the quadratic form of
  the multinomial CLT covariance, which vanishes at the uniform distribution
* corrected model: Normal law combining the third-order mean with the
  delta-method variance
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, ParameterError

SIMPLEX_TOL = 1e-12  # max |sum(p) - 1| accepted (input is renormalized)
DEGENERATE_SIGMA2 = 1e-15  # below this the Normal model is flagged degenerate


class Method(Enum):
    EXACT = "exact"
    FIRST_ORDER = "first"
    SECOND_ORDER = "second"
    THIRD_ORDER = "third"
    ASYMPTOTIC = "asymptotic"
    CORRECTED = "corrected"


@dataclass(frozen=True)
class ProbabilityVector:
    """A point on the k-simplex."""

    p: np.ndarray
    k: int
    strictly_positive: bool

    @classmethod
    def from_values(cls, values) -> "ProbabilityVector":
        p = np.asarray(values, dtype=np.float64)
        if p.ndim != 1 or p.size < 2:
            raise ParameterError("a probability vector needs k >= 2 entries")
        if np.any(~np.isfinite(p)) or np.any(p < 0):
            raise ParameterError("probabilities must be finite and nonnegative")
        total = float(p.sum())
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ParameterError(f"probabilities sum to {total!r}, not 1")
        p = p / total
        return cls(p=p, k=int(p.size), strictly_positive=bool(p.min() > 0.0))


def as_probability_vector(values) -> ProbabilityVector:
    if isinstance(values, ProbabilityVector):
        return values
    return ProbabilityVector.from_values(values)


@dataclass(frozen=True)
class MomentEstimate:
    """(mean, variance) of the estimated entropy, in nats / nats^2."""

    mean: float
    variance: float
    method: Method
    n: int


@dataclass(frozen=True)
class NormalModel:
    """Normal law for the estimated entropy."""

    mu: float
    sigma2: float
    normalized: bool
    degenerate: bool


def shannon_entropy(p) -> float:
    """``-sum p ln p`` with the convention ``0 ln 0 = 0``, in nats."""
    pv = as_probability_vector(p)
    pos = pv.p[pv.p > 0]
    return float(max(0.0, -np.dot(pos, np.log(pos))))


def max_entropy(k: int) -> float:
    return math.log(k)


def normalize(h: float, k: int) -> float:
    """Entropy divided by its maximum ``ln k``, in [0, 1]."""
    if k < 2:
        raise ParameterError("k must be >= 2")
    top = math.log(k)
    if not (-1e-9 <= h <= top + 1e-9):
        raise ParameterError(f"entropy {h!r} outside [0, ln {k}]")
    return h / top


def basharin_moments(p, n: int) -> MomentEstimate:
    """First-order mean and variance of the estimated entropy.

    Zero bins are allowed; they contribute nothing in the ``p ln p`` limit.
    """
    pv = as_probability_vector(p)
    if n < 1:
        raise ParameterError("n must be >= 1")
    pos = pv.p[pv.p > 0]
    logs = np.log(pos)
    h = -float(np.dot(pos, logs))
    mean = h - (pv.k - 1) / (2.0 * n)
    variance = (float(np.dot(pos, logs**2)) - h * h) / n
    return MomentEstimate(mean=mean, variance=variance, method=Method.FIRST_ORDER, n=n)


def _require_positive(pv: ProbabilityVector, what: str) -> None:
    if not pv.strictly_positive:
        bin_ = int(np.flatnonzero(pv.p == 0.0)[0])
        raise DomainError(f"{what} is undefined with a zero-probability bin (bin {bin_})")


def hutcheson_approx_moments(p, n: int, order: Method | str = Method.THIRD_ORDER) -> MomentEstimate:
    """Series-expansion mean and variance of the estimated entropy.

    ``order`` selects the second-order truncation (terms through ``1/n^2``)
    or the full third-order expansion (through ``1/n^3``). Every bin must
    have positive probability: the expansion contains ``1/p`` and ``1/p^2``.
    """
    if isinstance(order, str):
        order = Method(order)
    if order not in (Method.SECOND_ORDER, Method.THIRD_ORDER):
        raise ParameterError("order must be second or third")
    pv = as_probability_vector(p)
    if n < 1:
        raise ParameterError("n must be >= 1")
    _require_positive(pv, "the series expansion")

    q = pv.p
    logs = np.log(q)
    h = -float(np.dot(q, logs))
    inv = 1.0 / q
    sum_inv = float(inv.sum())
    k = pv.k

    mean = h - (k - 1) / (2.0 * n) + (1.0 - sum_inv) / (12.0 * n**2)
    variance = (float(np.dot(q, logs**2)) - h * h) / n + (k - 1) / (2.0 * n**2)
    if order is Method.THIRD_ORDER:
        mean += float(np.sum(inv - inv**2)) / (12.0 * n**3)
        variance += (sum_inv - float(np.dot(inv, logs)) + sum_inv * float(np.dot(q, logs)) - 1.0) / (6.0 * n**3)
    return MomentEstimate(mean=mean, variance=variance, method=order, n=n)


def asymptotic_variance(p, n: int) -> float:
    """Delta-method variance of the estimated entropy.

    Computed as the weighted second central moment of ``ln p + 1``, which
    is the multinomial-CLT quadratic form and is nonnegative by
    construction; it vanishes exactly at the uniform distribution.
    """
    pv = as_probability_vector(p)
    if n < 1:
        raise ParameterError("n must be >= 1")
    _require_positive(pv, "the delta-method variance")
    c = np.log(pv.p) + 1.0
    m = float(np.dot(pv.p, c))
    return float(np.dot(pv.p, (c - m) ** 2)) / n


def corrected_model(p, n: int, normalized: bool = False) -> NormalModel:
    """Normal model: third-order mean paired with the delta-method variance."""
    pv = as_probability_vector(p)
    mu = hutcheson_approx_moments(pv, n, Method.THIRD_ORDER).mean
    sigma2 = asymptotic_variance(pv, n)
    if normalized:
        top = math.log(pv.k)
        mu /= top
        sigma2 /= top * top
    return NormalModel(
        mu=mu,
        sigma2=sigma2,
        normalized=normalized,
        degenerate=sigma2 <= DEGENERATE_SIGMA2,
    )
