"""
Kummer's confluent hypergeometric function M(a, c, x) in log-scaled form.

All evaluations reduce to a series with positive terms: for x >= 0 the
defining series already has positive terms, and for x < 0 the Kummer
transformation M(a, c, x) = exp(x) M(c - a, c, -x) is applied first.  The
series is summed outward from its largest term, with every term stored
relative to that peak, so arguments far beyond the overflow threshold of
double precision (x ~ 1e6 and more) are handled without special casing.

The Kummer ratio g(a, c; x) = M'(a, c, x) / M(a, c, x) is obtained from the
same scaled terms as a weighted average, which avoids forming either
numerator or denominator explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EvalControls",
    "KummerConvergenceError",
    "KummerDomainError",
    "KummerParams",
    "kummer_ratio",
    "kummer_ratio_complement",
    "kummer_ratio_derivative",
    "log_kummer_m",
]


class KummerDomainError(ValueError):
    """Raised for parameters outside the supported domain."""


class KummerConvergenceError(ArithmeticError):
    """The series did not meet its stopping rule within ``max_terms`` terms.

    Attributes
    ----------
    partial_log_sum : float
        Logarithm of the partial sum accumulated before giving up.
    n_terms : int
        Number of terms summed.
    """

    def __init__(self, message, partial_log_sum, n_terms):
        super().__init__(message)
        self.partial_log_sum = partial_log_sum
        self.n_terms = n_terms


@dataclass(frozen=True)
class KummerParams:
    """Parameter pair (a, c) with c > a > 0."""

    a: float
    c: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.c)):
            raise KummerDomainError(f"non-finite parameters a={self.a}, c={self.c}")
        if not self.c > self.a > 0:
            raise KummerDomainError(f"need c > a > 0, got a={self.a}, c={self.c}")


@dataclass(frozen=True)
class EvalControls:
    """Series controls.

    ``max_terms`` caps the number of terms summed in each direction away
    from the largest term.
    """

    rel_tolerance: float = 1e-14
    max_terms: int = 20000

    def __post_init__(self):
        if not 0 < self.rel_tolerance <= 1e-6:
            raise ValueError("rel_tolerance must lie in (0, 1e-6]")
        if self.max_terms < 100:
            raise ValueError("max_terms must be at least 100")


DEFAULT_CONTROLS = EvalControls()

# number of consecutive negligible terms that terminate a sweep
_N_SMALL = 3


def _check_ac(a, c):
    if not (math.isfinite(a) and math.isfinite(c)):
        raise KummerDomainError(f"non-finite parameters a={a}, c={c}")
    if a <= 0 or c <= 0:
        raise KummerDomainError(f"need a > 0 and c > 0, got a={a}, c={c}")


def _check_x(x):
    if not math.isfinite(x):
        raise KummerDomainError(f"argument must be finite, got {x}")


def _peak_index(a, c, x):
    # t_{k+1}/t_k = x(a+k)/((c+k)(k+1)) crosses 1 at the positive root of
    # k^2 + (c + 1 - x) k + (c - a x) = 0
    if x <= 0:
        return 0
    b = c + 1.0 - x
    disc = b * b - 4.0 * (c - a * x)
    if disc < 0:
        return 0
    root = 0.5 * (-b + math.sqrt(disc))
    return max(0, int(math.ceil(root)))


def _stirling_series(x):
    """ln Gamma(x) - [(x - 1/2) ln x - x + ln(2 pi)/2]; truncation error < 1e-15 for x >= 16."""
    x2 = x * x
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * x2)) / x2) / x2) / x


def _log_gamma_ratio(z, m):
    """ln[Gamma(z + m) / Gamma(z)] without forming either log-gamma when both arguments are large."""
    w = z + m
    if min(z, w) < 16.0:
        return math.lgamma(w) - math.lgamma(z)
    return (z - 0.5) * math.log1p(m / z) + m * math.log(w) - m + _stirling_series(w) - _stirling_series(z)


def _deviance(k, y):
    """k ln(k/y) + y - k without cancellation when k is close to y."""
    d = k - y
    if abs(d) >= 0.1 * (k + y):
        return k * math.log(k / y) - d
    v = d / (k + y)
    total = d * v
    term = 2.0 * k * v
    v2 = v * v
    j = 1
    while True:
        term *= v2
        nxt = total + term / (2 * j + 1)
        if nxt == total:
            return total
        total = nxt
        j += 1


def _log_pochhammer_ratio(a, c, k):
    """ln[(a)_k / (c)_k], from whichever gamma-ratio form has smaller parts."""
    if k <= abs(a - c):
        return _log_gamma_ratio(a, k) - _log_gamma_ratio(c, k)
    return _log_gamma_ratio(c + k, a - c) - _log_gamma_ratio(c, a - c)


def _log_poisson(k, y):
    """k ln y - ln k! - y."""
    if k < 16:
        return k * math.log(y) - math.lgamma(k + 1.0) - y
    # ln k! = (k + 1/2) ln k - k + ln(2 pi)/2 + series
    return -_deviance(k, y) - 0.5 * math.log(2.0 * math.pi * k) - _stirling_series(k)


def _log_term_minus_y(a, c, y, k):
    """log((a)_k y^k / ((c)_k k!)) - y, accurate even when both parts are huge."""
    return _log_pochhammer_ratio(a, c, k) + _log_poisson(k, y)


def _log_term(a, c, x, k):
    """log of (a)_k x^k / ((c)_k k!) for x > 0."""
    if k == 0:
        return 0.0
    return _log_term_minus_y(a, c, x, k) + x


def _first_negligible(terms, ratios, total, tol):
    """Index just past the first run of ``_N_SMALL`` negligible terms, or -1.

    A term counts as negligible when it bounds the whole remaining tail:
    with term ratios decreasing away from the peak, the tail after a term t
    with ratio q < 1 is at most t q / (1 - q).
    """
    with np.errstate(divide="ignore"):
        tail = np.where(ratios < 1.0, terms / (1.0 - ratios), np.inf)
    small = tail <= tol * total
    if small.size < _N_SMALL:
        return -1
    run = small[: small.size - _N_SMALL + 1].copy()
    for shift in range(1, _N_SMALL):
        run &= small[shift : shift + run.size]
    hits = np.flatnonzero(run)
    if hits.size == 0:
        return -1
    return int(hits[0]) + _N_SMALL


def _scaled_terms(a, c, x, ctl):
    """Terms of the series for M(a, c, x), x >= 0, scaled by the peak term.

    Returns ``(log_peak, k, w)`` such that the k-th series term equals
    ``exp(log_peak) * w`` and all non-negligible terms are included.
    """
    tol = ctl.rel_tolerance
    k0 = _peak_index(a, c, x)
    log_peak = _log_term(a, c, x, k0) if k0 > 0 else 0.0
    chunk = min(ctl.max_terms, max(128, int(8.0 * math.sqrt(x + 1.0))))

    # upward sweep: t_{k+1} = t_k * x (a + k) / ((c + k)(k + 1))
    up_w = [np.ones(1)]
    total = 1.0
    k = k0
    last = 1.0
    n_up = 0
    while True:
        ks = np.arange(k, k + chunk, dtype=float)
        q = x * (a + ks) / ((c + ks) * (ks + 1.0))
        w = last * np.cumprod(q)
        stop = _first_negligible(w, q, total + w.sum(), tol)
        if stop >= 0 and n_up + stop <= ctl.max_terms:
            up_w.append(w[:stop])
            n_up += stop
            total += w[:stop].sum()
            break
        up_w.append(w)
        n_up += w.size
        total += w.sum()
        if stop >= 0 or n_up >= ctl.max_terms:
            raise KummerConvergenceError(
                f"M({a}, {c}, {x}) did not converge in {n_up} terms",
                log_peak + math.log(total),
                n_up,
            )
        last = w[-1]
        k += chunk

    # downward sweep: t_{k-1} = t_k (c + k - 1) k / (x (a + k - 1))
    down_w = []
    n_down = 0
    k = k0
    last = 1.0
    while k > 0:
        n = min(chunk, k)
        ks = np.arange(k - 1, k - 1 - n, -1, dtype=float)
        q = (c + ks) * (ks + 1.0) / (x * (a + ks))
        w = last * np.cumprod(q)
        # terms below the peak can rise again towards t_0 = exp(-log_peak)
        # relative to the peak; only stop early when that is negligible
        stop = -1
        if log_peak > 50.0:
            stop = _first_negligible(w, q, total + w.sum(), tol)
        if stop >= 0 and n_down + stop <= ctl.max_terms:
            down_w.append(w[:stop])
            n_down += stop
            total += w[:stop].sum()
            break
        down_w.append(w)
        n_down += n
        total += w.sum()
        if stop >= 0 or (n_down >= ctl.max_terms and k - n > 0):
            raise KummerConvergenceError(
                f"M({a}, {c}, {x}) did not converge in {n_down} terms below the peak",
                log_peak + math.log(total),
                n_down,
            )
        last = w[-1]
        k -= n

    up = np.concatenate(up_w)
    ks_up = k0 + np.arange(up.size, dtype=float)
    if down_w:
        down = np.concatenate(down_w)
        ks_down = k0 - 1 - np.arange(down.size, dtype=float)
        return log_peak, np.concatenate([ks_down[::-1], ks_up]), np.concatenate([down[::-1], up])
    return log_peak, ks_up, up


def _fsum(values):
    return math.fsum(values.tolist())


def _log_positive_series(a, c, x, ctl):
    log_peak, _, w = _scaled_terms(a, c, x, ctl)
    return log_peak + math.log(_fsum(w))


def _log_transformed_series(a, c, x, ctl):
    """ln M(a, c, x) for x < 0 and c > a, as x + ln M(c - a, c, -x).

    Both parts are of size |x|, so the peak term is combined with x before
    taking the sum rather than adding two large logarithms.
    """
    b, y = c - a, -x
    _, _, w = _scaled_terms(b, c, y, ctl)
    return _log_term_minus_y(b, c, y, _peak_index(b, c, y)) + math.log(_fsum(w))


def _log_signed_series(a, c, x, ctl):
    """Direct summation for x < 0 and a > c, where terms change sign."""
    terms = [1.0]
    t = 1.0
    k = 0
    small = 0
    while small < _N_SMALL:
        t *= (a + k) * x / ((c + k) * (k + 1.0))
        k += 1
        terms.append(t)
        s = math.fsum(terms)
        if abs(t) <= ctl.rel_tolerance * abs(s):
            small += 1
        else:
            small = 0
        if k >= ctl.max_terms:
            raise KummerConvergenceError(
                f"M({a}, {c}, {x}) did not converge in {k} terms",
                math.log(abs(s)) if s else -math.inf,
                k,
            )
    s = math.fsum(terms)
    peak = max(abs(v) for v in terms)
    if s <= 0:
        raise KummerDomainError(f"M({a}, {c}, {x}) = {s} is not positive")
    if peak / s > 1e4:
        raise KummerDomainError(
            f"M({a}, {c}, {x}) loses more than 4 digits to cancellation"
        )
    return math.log(s)


def log_kummer_m(a, c, x, controls=None):
    """Natural logarithm of Kummer's function M(a, c, x).

    Parameters
    ----------
    a, c : float
        Positive parameters.  ``c > a`` is not required, but for ``x < 0``
        and ``a > c`` the series alternates and is only accepted while it
        stays positive and well conditioned.
    x : float
        Finite real argument.
    controls : EvalControls, optional

    Returns
    -------
    float
        ``ln M(a, c, x)``, finite even where ``M`` itself overflows.

    Raises
    ------
    KummerDomainError
        If ``a <= 0``, ``c <= 0`` or ``x`` is not finite.
    KummerConvergenceError
        If the series needs more than ``controls.max_terms`` terms.
    """
    ctl = controls or DEFAULT_CONTROLS
    a, c, x = float(a), float(c), float(x)
    _check_ac(a, c)
    _check_x(x)
    if x == 0.0:
        return 0.0
    if x > 0:
        return _log_positive_series(a, c, x, ctl)
    if a == c:
        return x
    if c > a:
        return _log_transformed_series(a, c, x, ctl)
    return _log_signed_series(a, c, x, ctl)


def _ratio_parts(a, c, x, ctl, with_slope=False):
    """(g, 1 - g, g - a/c) for c > a > 0, each with full relative accuracy.

    With ``with_slope`` the derivative g' is appended, from the same terms:
    g' = (c - a)/x * E[(k - kbar)^2 / ((c + k)(c + kbar))] under the term
    weights (the covariance of (a + k)/(c + k) and k, divided by x).  Every
    summand is positive, so the result keeps its relative accuracy where
    g - g^2 + (a - c g)/x cancels, i.e. for |x| >> c.
    """
    if x == 0.0:
        parts = (a / c, (c - a) / c, 0.0)
        return parts + (a * (c - a) / (c * c * (1.0 + c)),) if with_slope else parts
    if x > 0:
        _, ks, w = _scaled_terms(a, c, x, ctl)
        s = _fsum(w)
        g = _fsum(w * ((a + ks) / (c + ks))) / s
        h = _fsum(w * ((c - a) / (c + ks))) / s
        d = (c - a) / c * _fsum(w * (ks / (c + ks))) / s
        lead, y = c - a, x
    else:
        _, ks, w = _scaled_terms(c - a, c, -x, ctl)
        s = _fsum(w)
        g = a * _fsum(w / (c + ks)) / s
        h = _fsum(w * ((c - a + ks) / (c + ks))) / s
        d = -a / c * _fsum(w * (ks / (c + ks))) / s
        # g(a, c; x) = 1 - g(c - a, c; -x), so g' is the slope of the transformed ratio
        lead, y = a, -x
    if not with_slope:
        return g, h, d
    kbar = _fsum(w * ks) / s
    dev = kbar - ks
    slope = lead / y * _fsum(w * (dev * dev / ((c + ks) * (c + kbar)))) / s
    return g, h, d, slope


def _ratio_pair(a, c, x, ctl):
    return _ratio_parts(a, c, x, ctl)[:2]


def kummer_ratio(a, c, x, controls=None):
    """Kummer ratio g(a, c; x) = M'(a, c, x) / M(a, c, x).

    Equal to ``(a/c) M(a+1, c+1, x) / M(a, c, x)``; strictly increasing in
    ``x`` with values in (0, 1) when ``c > a > 0``.
    """
    ctl = controls or DEFAULT_CONTROLS
    KummerParams(float(a), float(c))
    _check_x(float(x))
    return _ratio_pair(float(a), float(c), float(x), ctl)[0]


def kummer_ratio_complement(a, c, x, controls=None):
    """``1 - g(a, c; x)`` evaluated without cancellation as g approaches 1."""
    ctl = controls or DEFAULT_CONTROLS
    KummerParams(float(a), float(c))
    _check_x(float(x))
    return _ratio_pair(float(a), float(c), float(x), ctl)[1]


def kummer_ratio_derivative(a, c, x, g_value, controls=None):
    """Derivative of the Kummer ratio with respect to x.

    Uses g' = (1 - c/x) g + a/x - g**2, so only the already computed value
    ``g_value = g(a, c; x)`` is needed.  That expression cancels badly as
    x -> 0, so for ``|x| < 1e-3 c`` the equivalent form
    g' = g (g(a+1, c+1; x) - g) is used, at the price of one short series
    evaluation.  It also loses about log10(|x|/c) digits for large |x|, so
    for ``|x| > 4 c`` (and c > a) g' is instead recomputed from the series
    terms in a cancellation-free form; ``g_value`` is then unused.  At
    x = 0 the limit a (c - a) / (c^2 (1 + c)) is returned.
    """
    a, c, x, g_value = float(a), float(c), float(x), float(g_value)
    if not (math.isfinite(x) and math.isfinite(g_value)):
        raise KummerDomainError("non-finite input to kummer_ratio_derivative")
    if x == 0.0:
        return a * (c - a) / (c * c * (1.0 + c))
    if abs(x) < 1e-3 * c:
        # M''/M = g(a, c) g(a+1, c+1), and g' = M''/M - g^2
        g_next = _ratio_pair(a + 1.0, c + 1.0, x, DEFAULT_CONTROLS)[0]
        return g_value * (g_next - g_value)
    if abs(x) > 4.0 * c and c > a:
        return _ratio_parts(a, c, x, controls or DEFAULT_CONTROLS, with_slope=True)[3]
    return g_value - g_value * g_value + (a - c * g_value) / x
