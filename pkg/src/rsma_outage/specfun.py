"""Special functions for integer-shape Gamma (Erlang) statistics.

Everything here assumes the shape parameter is a positive integer, which
lets the regularized incomplete gamma function be written as a finite
Poisson sum. Both tails are computed directly so that neither loses
relative accuracy to cancellation.
"""

import math
import operator

__all__ = [
    "check_shape",
    "gamma_fn",
    "log_gamma_fn",
    "rising_factorial",
    "lower_inc_gamma_reg",
    "erlang_tail_sum",
    "binom",
    "clamp_probability",
]

# 170! is the largest factorial representable as a double.
_MAX_EXACT_GAMMA_ARG = 171

_LOG_DOMAIN_THRESHOLD = 700.0

_CLAMP_SLACK = 1e-9


def check_shape(m, name="m"):
    """Validate an integer shape parameter and return it as ``int``.

    Floats with an integral value (``3.0``) are accepted; anything else,
    including ``3.5`` and booleans, raises ``ValueError``.
    """
    if isinstance(m, bool):
        raise ValueError(f"{name} must be a positive integer, got {m!r}")
    try:
        value = operator.index(m)
    except TypeError:
        if isinstance(m, float) and m.is_integer():
            value = int(m)
        else:
            raise ValueError(
                f"{name} must be a positive integer (closed forms need an "
                f"integer shape), got {m!r}"
            ) from None
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {m!r}")
    return value


def gamma_fn(n):
    """Gamma function at a positive integer, ``(n - 1)!``.

    Raises ``OverflowError`` when the result does not fit in a double;
    use :func:`log_gamma_fn` there.
    """
    n = check_shape(n, "n")
    if n > _MAX_EXACT_GAMMA_ARG:
        raise OverflowError(f"gamma({n}) overflows a double; use log_gamma_fn")
    return float(math.factorial(n - 1))


def log_gamma_fn(n):
    n = check_shape(n, "n")
    return math.lgamma(n)


def rising_factorial(m, q):
    """Pochhammer symbol ``m (m+1) ... (m+q-1)`` = Gamma(m+q)/Gamma(m)."""
    out = 1.0
    for k in range(q):
        out *= m + k
    return out


def clamp_probability(p, slack=_CLAMP_SLACK):
    """Clip ``p`` to [0, 1]; excursions beyond ``slack`` indicate a bug."""
    assert -slack < p < 1.0 + slack, f"probability {p!r} outside [0, 1]"
    return min(1.0, max(0.0, p))


def _log_poisson_terms(m, x, start, stop):
    logx = math.log(x)
    return [p * logx - x - math.lgamma(p + 1) for p in range(start, stop)]


def _logsumexp(values):
    top = max(values)
    if top == -math.inf:
        return -math.inf
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


def _upper_sum(m, x):
    # e^{-x} sum_{p<m} x^p / p!
    if x == 0.0:
        return 1.0
    if x > _LOG_DOMAIN_THRESHOLD:
        return math.exp(_logsumexp(_log_poisson_terms(m, x, 0, m)))
    term = 1.0
    terms = [term]
    for p in range(1, m):
        term *= x / p
        terms.append(term)
    return math.exp(-x) * math.fsum(terms)


def _lower_series(m, x):
    # e^{-x} sum_{p>=m} x^p / p!, convergent and cancellation-free for x < m + 1
    if x == 0.0:
        return 0.0
    log_first = m * math.log(x) - x - math.lgamma(m + 1)
    term = 1.0
    terms = [term]
    p = m
    while True:
        p += 1
        term *= x / p
        terms.append(term)
        if term < 1e-17 * terms[0]:
            break
    return math.exp(log_first) * math.fsum(terms)


def lower_inc_gamma_reg(m, x):
    """Regularized lower incomplete gamma ``gamma(m, x) / Gamma(m)``.

    This is the CDF of a unit-rate Erlang(m) variable. For ``x`` below
    the mode the Poisson tail series is summed directly, otherwise the
    complement of the finite Erlang sum is used.
    """
    m = check_shape(m)
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x!r}")
    if x < m + 1:
        return clamp_probability(_lower_series(m, x))
    return clamp_probability(1.0 - _upper_sum(m, x))


def erlang_tail_sum(m, x):
    """``exp(-x) * sum_{p=0}^{m-1} x**p / p!``, the Erlang(m) survival function."""
    m = check_shape(m)
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x!r}")
    if x < m + 1:
        return clamp_probability(1.0 - _lower_series(m, x))
    return clamp_probability(_upper_sum(m, x))


def binom(p, q):
    """Exact binomial coefficient C(p, q) for ``0 <= q <= p``."""
    p = operator.index(p)
    q = operator.index(q)
    if p < 0 or q < 0 or q > p:
        raise ValueError(f"binom requires 0 <= q <= p, got p={p}, q={q}")
    q = min(q, p - q)
    out = 1
    for k in range(1, q + 1):
        out = out * (p - q + k) // k
    return out
