"""
Inversion of the Kummer ratio: find kappa with g(a, c; kappa) = r.

Closed-form estimates (L, B, U and the older BBG heuristic) bracket or
approximate the root directly; :func:`solve_newton` refines it with a
Newton iteration kept inside the [L(r), U(r)] bracket.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from enum import Enum

from .kummer import DEFAULT_CONTROLS, KummerParams, _ratio_parts

__all__ = [
    "AsymptoticPoint",
    "Method",
    "NewtonControls",
    "NewtonConvergenceError",
    "SolveReport",
    "bbg",
    "bbg_violation_intervals",
    "bound_B",
    "bound_L",
    "bound_U",
    "combined_choice",
    "estimate",
    "estimate_combined",
    "kappa_asymptotic",
    "solve_newton",
]


class Method(str, Enum):
    L = "L"
    B = "B"
    U = "U"
    BBG = "BBG"
    COMBINED = "Combined"
    NEWTON = "Newton"


class AsymptoticPoint(str, Enum):
    ZERO = "Zero"
    A_OVER_C = "AOverC"
    ONE = "One"


class NewtonConvergenceError(ArithmeticError):
    """Newton iteration ran out of iterations.

    Carries the best iterate seen and its residual.
    """

    def __init__(self, message, kappa, residual, iterations):
        super().__init__(message)
        self.kappa = kappa
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class NewtonControls:
    residual_tol: float = 1e-12
    max_iter: int = 50

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True)
class SolveReport:
    kappa: float
    method: Method
    residual: float = math.nan
    iterations: int = 0
    bracket: tuple[float, float] = (math.nan, math.nan)
    iterates: tuple[float, ...] = field(default=(), repr=False)

    def as_dict(self):
        return {
            "kappa": self.kappa,
            "method": self.method.value,
            "residual": self.residual,
            "iterations": self.iterations,
            "bracket": list(self.bracket),
        }


def _params(a, c):
    p = KummerParams(float(a), float(c))
    return p.a, p.c


def _check_r(r):
    r = float(r)
    if not 0.0 < r < 1.0:
        raise ValueError(f"r must lie in (0, 1), got {r} (kappa would be infinite)")
    return r


def _rc_minus_a(a, c, r):
    """r c - a, correctly rounded; plain floating point loses it as r -> a/c.

    The double nearest a/c counts as a/c itself, so every closed form
    vanishes there as it does for the exact ratio.
    """
    if r == a / c:
        return 0.0
    return float(Fraction(r) * Fraction(c) - Fraction(a))


def bound_L(a, c, r):
    """Lower bound on the root: ((rc - a)/(r(1-r))) (1 + (1-r)/(c-a))."""
    a, c = _params(a, c)
    r = _check_r(r)
    return _rc_minus_a(a, c, r) / (r * (1.0 - r)) * (1.0 + (1.0 - r) / (c - a))


def bound_B(a, c, r):
    """Middle bound; lies between the root and U(r) for r > a/c and between
    L(r) and the root for r < a/c."""
    a, c = _params(a, c)
    r = _check_r(r)
    q = 1.0 - r
    root = math.sqrt(1.0 + 4.0 * (c + 1.0) * r * q / (a * (c - a)))
    return _rc_minus_a(a, c, r) / (2.0 * r * q) * (1.0 + root)


def bound_U(a, c, r):
    """Upper bound on the root: ((rc - a)/(r(1-r))) (1 + r/a)."""
    a, c = _params(a, c)
    r = _check_r(r)
    return _rc_minus_a(a, c, r) / (r * (1.0 - r)) * (1.0 + r / a)


def bbg(a, c, r):
    """The older heuristic (cr - a)/(r(1-r)) + r/(2c(1-r)).

    Not a bound, and not zero at r = a/c.
    """
    a, c = _params(a, c)
    r = _check_r(r)
    return _rc_minus_a(a, c, r) / (r * (1.0 - r)) + r / (2.0 * c * (1.0 - r))


def bbg_violation_intervals(a, c, exact=False):
    """Intervals of r on which BBG falls outside [L(r), U(r)].

    Parameters
    ----------
    a, c : float
        Parameters with ``c > a > 0``.
    exact : bool, default False
        The default returns the lower interval between the reference
        quadratic roots ``(2c^2 + a -+ sqrt((2c^2 - a)(2c^2 - a - 8ac))) /
        (2(2c^2 - a + c))``.  Reducing ``L(r) > BBG(r)`` directly gives
        ``(2c^2 + c - a) r^2 - 2c(c + a) r + 2ac < 0`` instead, whose roots
        differ in the linear coefficient (``2c^2 + 2ac`` against
        ``2c^2 + a``).  Pass ``exact=True`` for the interval on which the two
        closed forms actually cross; for a = 1/2, c = 5 it is
        (0.1010, 0.9082) rather than (0.1127, 0.8139).

    Returns
    -------
    lower, upper : tuple of float or None
        ``lower`` is the open interval where BBG(r) < L(r) (``None`` when
        the quadratic has no real roots); ``upper`` is (0, 2ac/(2c^2 - a))
        where BBG(r) > U(r).
    """
    a, c = _params(a, c)
    base = 2.0 * c * c - a
    if exact:
        lead, mid = base + c, 2.0 * c * (c + a)
        disc = mid * mid - 8.0 * a * c * lead
    else:
        lead, mid = base + c, 2.0 * c * c + a
        disc = base * (base - 8.0 * a * c)
    lower = None
    if disc > 0:
        s = math.sqrt(disc)
        # smaller root in the cancellation-free form
        small = 4.0 * a * c / (mid + s) if exact else (mid - s) / (2.0 * lead)
        lower = (small, (mid + s) / (2.0 * lead))
    upper = (0.0, 2.0 * a * c / base)
    return lower, upper


_CLOSED_FORMS = {
    Method.L: bound_L,
    Method.B: bound_B,
    Method.U: bound_U,
    Method.BBG: bbg,
}


def combined_choice(a, c, r):
    """The bound the combined estimator uses at r: U below a/(2c), B below
    2a/sqrt(c), L above."""
    a, c = _params(a, c)
    r = _check_r(r)
    if r < a / (2.0 * c):
        return Method.U
    if r < 2.0 * a / math.sqrt(c):
        return Method.B
    return Method.L


def estimate_combined(a, c, r):
    """Evaluate the bound picked by :func:`combined_choice`."""
    value = _CLOSED_FORMS[combined_choice(a, c, r)](a, c, r)
    return SolveReport(kappa=value, method=Method.COMBINED)


def estimate(a, c, r, method="Combined", controls=None):
    """Dispatch to any estimator by name; returns a :class:`SolveReport`."""
    method = Method(method)
    if method is Method.NEWTON:
        return solve_newton(a, c, r, controls)
    if method is Method.COMBINED:
        return estimate_combined(a, c, r)
    return SolveReport(kappa=_CLOSED_FORMS[method](a, c, r), method=method)


def solve_newton(a, c, r, controls=None, eval_controls=None):
    """Solve g(a, c; kappa) = r by safeguarded Newton-Raphson.

    Starts from B(r) and keeps the iterate inside a bracket that begins as
    [L(r), U(r)] and shrinks with the sign of the residual.  A Newton step
    that leaves the bracket is replaced by the bracket end it crossed, if
    that end has not been evaluated yet, and by the midpoint otherwise.  Each
    iteration sums the Kummer series once; the ratio and its derivative
    both come from that one set of terms.

    Converged when ``|g - r| <= residual_tol * min(1, r, 1 - r, |r - a/c|)``;
    the scaling keeps the relative accuracy of kappa uniform as r approaches
    0, a/c or 1.  The residual is formed from whichever of g, 1 - g and
    g - a/c is smallest near r, since each is evaluated to full relative
    accuracy.

    Raises
    ------
    ValueError
        If r is not strictly inside (0, 1).
    NewtonConvergenceError
        If ``max_iter`` iterations pass without convergence.
    """
    ctl = controls or NewtonControls()
    ectl = eval_controls or DEFAULT_CONTROLS
    a, c = _params(a, c)
    r = _check_r(r)
    if r == a / c:
        return SolveReport(0.0, Method.NEWTON, 0.0, 0, (0.0, 0.0), ())

    lo, hi = bound_L(a, c, r), bound_U(a, c, r)
    q = 1.0 - r
    r0 = a / c
    offset = _rc_minus_a(a, c, r) / c
    tol = ctl.residual_tol * min(1.0, r, q, abs(offset))
    form = min((abs(offset), 2), (q, 1), (r, 0))[1] if 0.5 * r0 <= r <= 2.0 * r0 else (1 if r > 0.5 else 0)

    def residual(kappa):
        g, h, d, slope = _ratio_parts(a, c, kappa, ectl, with_slope=True)
        # all three forms are increasing in kappa
        return (g - r, q - h, d - offset)[form], slope

    # B lies inside [L, U] in exact arithmetic; rounding can put it an ulp outside
    kappa = min(max(bound_B(a, c, r), lo), hi)
    iterates = []
    best = (math.inf, kappa)
    polished = False
    # whether the bracket ends are evaluated iterates or still the raw bounds
    lo_tried = hi_tried = False
    for it in range(1, ctl.max_iter + 1):
        f, slope = residual(kappa)
        iterates.append(kappa)
        if not math.isfinite(f):
            raise ArithmeticError(f"non-finite residual at kappa={kappa}")
        if abs(f) < best[0]:
            best = (abs(f), kappa)
        if polished:
            break
        if f > 0 and kappa <= hi:
            hi, hi_tried = kappa, True
        elif f < 0 and kappa >= lo:
            lo, lo_tried = kappa, True
        step = kappa - f / slope if slope > 0 else math.nan
        if abs(f) <= tol:
            # one extra Newton step: the starting point B(r) is often already
            # within tolerance but not yet accurate to working precision
            polished = True
            if not lo <= step <= hi or step == kappa:
                break
            kappa = step
            continue
        if not lo < step < hi:
            # the bounds are often far tighter than the Newton overshoot, so
            # try an unevaluated bracket end before bisecting
            if step <= lo and not lo_tried:
                step = lo
            elif step >= hi and not hi_tried:
                step = hi
            else:
                step = 0.5 * (lo + hi)
        if step == kappa:
            # bracket collapsed to floating-point resolution
            break
        kappa = step
    # prefer the latest (polished) iterate when it meets the tolerance
    final = (abs(f), kappa) if abs(f) <= tol else best
    if final[0] <= tol:
        return SolveReport(final[1], Method.NEWTON, final[0], len(iterates), (lo, hi), tuple(iterates))
    raise NewtonConvergenceError(
        f"Newton did not converge for a={a}, c={c}, r={r} in {len(iterates)} iterations",
        best[1],
        best[0],
        len(iterates),
    )


def kappa_asymptotic(a, c, r, point):
    """Truncated expansion of the root near r = 0, r = a/c or r = 1.

    Intended for checking the solver near those limits.
    """
    a, c = _params(a, c)
    r = float(r)
    point = AsymptoticPoint(point)
    if point is AsymptoticPoint.ZERO:
        return -a / r + (c - a - 1.0) + (c - a - 1.0) * (1.0 + a) / a * r
    if point is AsymptoticPoint.A_OVER_C:
        d = r - a / c
        first = c * c * (1.0 + c) / (a * (c - a))
        second = c ** 3 * (1.0 + c) ** 2 * (2.0 * a - c) / (a * a * (c - a) ** 2 * (c + 2.0))
        return d * (first + second * d)
    q = 1.0 - r
    return (c - a) / q + 1.0 - a + (a - 1.0) * (a - c - 1.0) / (c - a) * q
