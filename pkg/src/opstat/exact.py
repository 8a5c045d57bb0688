"""Exact finite-n mean and variance of the estimated entropy.

The closed forms reduce the multinomial expectations to binomial and
trinomial sums via the identities

    E[N f(N)]        = n p E[f(M + 1)],        M ~ Binomial(n-1, p)
    E[N(N-1) f(N)]   = n(n-1) p^2 E[f(M + 2)], M ~ Binomial(n-2, p)
    E[Na Nb g(Na,Nb)] = n(n-1) pa pb E[g(Ma+1, Mb+1)],
                        (Ma, Mb) trinomial on n-2 trials,

applied to f = ln, ln^2 and g = ln * ln. Every summand is a product of a
huge integer binomial coefficient and a tiny power, which overflows and
underflows fixed-precision floats; big-float arithmetic with exact integer
coefficients evaluates them without loss. Each call re-evaluates at twice
the significand width and reports a precision failure if the two results
disagree, rather than returning a wrong value.

``enumerate_moments`` is the independent oracle: a direct sum of the
entropy over all multinomial outcomes with exact rational weights.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import CapacityError, ParameterError, PrecisionError
from .moments import as_probability_vector

ENUMERATION_BUDGET = 10_000_000  # max multinomial outcomes the oracle will visit
_ORACLE_BITS = 192


@dataclass(frozen=True)
class PrecisionConfig:
    """Big-float width and size guard for the exact formulas."""

    significand_bits: int = 256
    max_n: int = 2000

    def __post_init__(self):
        if self.significand_bits < 64:
            raise ParameterError("significand_bits must be >= 64")
        if self.max_n < 1:
            raise ParameterError("max_n must be >= 1")


def _context(bits: int) -> mpmath.ctx_mp.MPContext:
    # Fresh context per call; no shared global precision state.
    ctx = mpmath.mp.clone()
    ctx.prec = bits
    return ctx


def _log_table(ctx, top: int):
    """ln(0..top) with a zero placeholder at index 0."""
    return [ctx.zero] + [ctx.ln(i) for i in range(1, top + 1)]


def _grouped(values) -> list[tuple[float, int]]:
    """Distinct positive probabilities with multiplicities."""
    return [(v, m) for v, m in Counter(float(x) for x in values).items() if v > 0.0]


def _powers(ctx, base, top: int):
    out = [ctx.one]
    for _ in range(top):
        out.append(out[-1] * base)
    return out


def _mean_sum(ctx, p_values, n: int):
    """E[H] at one precision; the per-bin sums share the grouped powers."""
    if n == 1:
        return ctx.zero
    logs = _log_table(ctx, n)
    total_mass = ctx.zero
    for value in p_values:
        total_mass += ctx.mpf(value)
    s1 = ctx.zero
    for value, mult in _grouped(p_values):
        p = ctx.mpf(value)
        q = total_mass - p
        ppow = _powers(ctx, p, n)
        qpow = _powers(ctx, q, n)
        coef = 1  # C(n-1, m), updated iteratively
        acc = ctx.zero
        for m in range(1, n):
            coef = coef * (n - m) // m
            acc += coef * logs[m + 1] * ppow[m] * qpow[n - 1 - m]
        s1 += mult * p * acc
    return logs[n] - s1


def _variance_sum(ctx, p_values, n: int):
    """Var[H] at one precision via the binomial/trinomial reductions."""
    logs = _log_table(ctx, n)
    total_mass = ctx.zero
    for value in p_values:
        total_mass += ctx.mpf(value)

    groups = _grouped(p_values)
    s1 = ctx.zero  # E[sum N ln N]
    s2 = ctx.zero  # E[sum (N ln N)^2] marginal part
    for value, mult in groups:
        p = ctx.mpf(value)
        q = total_mass - p
        ppow = _powers(ctx, p, n)
        qpow = _powers(ctx, q, n)

        coef = 1  # C(n-1, m)
        acc_a = ctx.zero  # E[ln(M+1)],   M ~ Bin(n-1, p)
        acc_c = ctx.zero  # E[ln^2(M+1)], M ~ Bin(n-1, p)
        for m in range(1, n):
            coef = coef * (n - m) // m
            w = coef * ppow[m] * qpow[n - 1 - m]
            acc_a += w * logs[m + 1]
            acc_c += w * logs[m + 1] ** 2
        acc_b = ctx.zero  # E[ln^2(M+2)], M ~ Bin(n-2, p)
        if n >= 2:
            coef = 1
            for m in range(0, n - 1):
                if m > 0:
                    coef = coef * (n - 1 - m) // m
                acc_b += coef * ppow[m] * qpow[n - 2 - m] * logs[m + 2] ** 2
        s1 += mult * p * acc_a
        s2 += mult * (p * p * (n - 1) * acc_b + p * acc_c)
    s1 *= n
    s2 *= n

    # Cross expectations over unordered pairs of distinct bins, grouped by
    # the pair of probability values (one trinomial sum per distinct pair).
    pair_groups = Counter()
    for i, (v1, m1) in enumerate(groups):
        pair_groups[(v1, v1)] += m1 * (m1 - 1) // 2
        for v2, m2 in groups[i + 1:]:
            pair_groups[tuple(sorted((v1, v2)))] += m1 * m2
    s3 = ctx.zero
    for (v1, v2), mult in pair_groups.items():
        if mult == 0:
            continue
        pa = ctx.mpf(v1)
        pb = ctx.mpf(v2)
        rest = total_mass - pa - pb
        apow = _powers(ctx, pa, n)
        bpow = _powers(ctx, pb, n)
        rpow = _powers(ctx, rest, n)
        t = ctx.zero
        outer = 1  # C(n-2, a)
        for a in range(0, n - 1):
            if a > 0:
                outer = outer * (n - 1 - a) // a
            la = logs[a + 1]
            if la == 0 and a > 0:
                continue
            inner = 1  # C(n-2-a, b)
            row = ctx.zero
            for b in range(0, n - 1 - a):
                if b > 0:
                    inner = inner * (n - 1 - a - b) // b
                row += inner * logs[b + 1] * bpow[b] * rpow[n - 2 - a - b]
            t += outer * la * apow[a] * row
        s3 += mult * pa * pb * t
    s3 *= 2 * n * (n - 1)

    return (s2 + s3 - s1 * s1) / (n * n)


def _checked_eval(evaluate, p_values, n: int, cfg: PrecisionConfig):
    """Run at the configured and doubled widths; fail if they disagree."""
    bits = cfg.significand_bits
    first = evaluate(_context(bits), p_values, n)
    second = evaluate(_context(2 * bits), p_values, n)
    threshold = mpmath.mpf(2) ** -(bits // 4)
    if abs(first - second) > threshold:
        raise PrecisionError(
            f"big-float evaluation unstable at {bits} bits for n={n}; "
            "raise significand_bits"
        )
    return second


def exact_mean(p, n: int, cfg: PrecisionConfig = PrecisionConfig()) -> float:
    """Exact expected value of the estimated entropy, in nats."""
    pv = as_probability_vector(p)
    if n < 1:
        raise ParameterError("n must be >= 1")
    if n > cfg.max_n:
        raise CapacityError(f"n={n} exceeds the configured guard max_n={cfg.max_n}")
    result = _checked_eval(_mean_sum, pv.p, n, cfg)
    slack = mpmath.mpf(2) ** -(cfg.significand_bits // 2)
    if result < -slack or result > math.log(pv.k) + slack:
        raise PrecisionError(f"exact mean {float(result)!r} escaped [0, ln k]")
    return float(result)


def exact_variance(p, n: int, cfg: PrecisionConfig = PrecisionConfig()) -> float:
    """Exact variance of the estimated entropy, in nats^2."""
    pv = as_probability_vector(p)
    if n < 2:
        raise ParameterError("n must be >= 2")
    if n > cfg.max_n:
        raise CapacityError(f"n={n} exceeds the configured guard max_n={cfg.max_n}")
    result = _checked_eval(_variance_sum, pv.p, n, cfg)
    slack = mpmath.mpf(2) ** -(cfg.significand_bits // 2)
    if result < -slack:
        raise PrecisionError(f"exact variance {float(result)!r} is negative")
    return max(0.0, float(result))


def enumerate_moments(p, n: int) -> tuple[float, float]:
    """Brute-force (mean, variance) of the entropy over every outcome.

    Independent of the closed forms above: walks all compositions of n
    into k bins, weighting each entropy value by the multinomial pmf with
    exact rational arithmetic.
    """
    pv = as_probability_vector(p)
    if n < 1:
        raise ParameterError("n must be >= 1")
    k = pv.k
    outcomes = math.comb(n + k - 1, k - 1)
    if outcomes > ENUMERATION_BUDGET:
        raise CapacityError(
            f"{outcomes} outcomes exceed the enumeration budget {ENUMERATION_BUDGET}"
        )

    ctx = _context(_ORACLE_BITS)
    logs = _log_table(ctx, n)
    fractions = [Fraction(float(x)) for x in pv.p]
    pow_tables = []
    for f in fractions:
        row = [Fraction(1)]
        for _ in range(n):
            row.append(row[-1] * f)
        pow_tables.append(row)

    m1 = ctx.zero
    m2 = ctx.zero
    counts = [0] * k

    def visit(bin_index: int, remaining: int, coef: int, prob: Fraction):
        nonlocal m1, m2
        if bin_index == k - 1:
            counts[bin_index] = remaining
            weight = coef * prob * pow_tables[bin_index][remaining]
            w = ctx.mpf(weight.numerator) / ctx.mpf(weight.denominator)
            acc = ctx.zero
            for c in counts:
                if c > 1:
                    acc += c * logs[c]
            h = logs[n] - acc / n
            m1 += w * h
            m2 += w * h * h
            return
        for c in range(remaining + 1):
            counts[bin_index] = c
            visit(
                bin_index + 1,
                remaining - c,
                coef * math.comb(remaining, c),
                prob * pow_tables[bin_index][c],
            )

    visit(0, n, 1, Fraction(1))
    variance = m2 - m1 * m1
    return float(m1), max(0.0, float(variance))


def feasibility_probe(p, cfg: PrecisionConfig = PrecisionConfig()) -> int:
    """Largest n <= cfg.max_n at which :func:`exact_mean` passes its own
    accuracy check, located by doubling then bisection."""
    pv = as_probability_vector(p)

    def ok(n: int) -> bool:
        try:
            exact_mean(pv, n, cfg)
            return True
        except PrecisionError:
            return False

    if not ok(1):
        return 0
    lo, n = 1, 2
    while n <= cfg.max_n and ok(n):
        lo, n = n, 2 * n
    if n > cfg.max_n:
        if lo == cfg.max_n or ok(cfg.max_n):
            return cfg.max_n
        hi = cfg.max_n
    else:
        hi = n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo
