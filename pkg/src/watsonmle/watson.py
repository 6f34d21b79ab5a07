"""
The multivariate Watson distribution on the projective sphere.

Density with respect to the uniform surface measure on S^{p-1}::

    W_p(x | mu, kappa) = c_p(kappa) exp(kappa (mu^T x)^2)
    ln c_p(kappa) = ln Gamma(p/2) - ln(2 pi^{p/2}) - ln M(1/2, p/2, kappa)

Fitting uses the scatter matrix S = X^T X / n: the mean axis is the top
(kappa > 0) or bottom (kappa < 0) eigenvector of S and kappa solves
g(1/2, p/2; kappa) = mu^T S mu.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import betaln

from .kappa import NewtonControls, solve_newton
from .kummer import DEFAULT_CONTROLS, EvalControls, log_kummer_m
from .linalg import scatter, sym_eig, unit_rows

__all__ = [
    "CLAMP_EPS",
    "Branch",
    "FitReport",
    "WatsonParams",
    "fit",
    "fit_scatter",
    "log_likelihood",
    "log_normalizer",
    "log_pdf",
    "sample",
]

CLAMP_EPS = 1e-9
DEGENERATE_GAP = 1e-10

# r within CLAMP_EPS of 1 needs kappa ~ p / CLAMP_EPS, far past the default
# series budget
CLAMP_CONTROLS = EvalControls(max_terms=2_000_000)


class Branch(str, Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"


@dataclass(frozen=True)
class WatsonParams:
    """Mean axis ``mu`` (unit vector, sign irrelevant) and concentration ``kappa``."""

    mu: np.ndarray
    kappa: float

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float)
        if mu.ndim != 1 or mu.size < 2:
            raise ValueError(f"mu must be a vector of length >= 2, got shape {mu.shape}")
        if abs(np.linalg.norm(mu) - 1.0) > 1e-10:
            raise ValueError(f"mu must have unit norm, got {np.linalg.norm(mu)!r}")
        kappa = float(self.kappa)
        if not math.isfinite(kappa):
            raise ValueError(f"kappa must be finite, got {kappa}")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "kappa", kappa)

    @classmethod
    def from_axis(cls, v, kappa):
        """Build from any nonzero vector, normalising it."""
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        if not norm > 0:
            raise ValueError("axis vector must be nonzero")
        return cls(v / norm, kappa)

    @property
    def p(self) -> int:
        return self.mu.size

    def as_dict(self):
        return {"mu": self.mu.tolist(), "kappa": self.kappa}


@dataclass(frozen=True)
class FitReport:
    params: WatsonParams
    log_likelihood: float
    r: float
    branch: Branch
    degenerate_spectrum: bool = False

    def as_dict(self):
        return {
            "mu": self.params.mu.tolist(),
            "kappa": self.params.kappa,
            "log_likelihood": self.log_likelihood,
            "r": self.r,
            "branch": self.branch.value,
            "degenerate_spectrum": self.degenerate_spectrum,
        }


def _log_uniform_density(p):
    """ln Gamma(p/2) - ln(2 pi^{p/2}), the log density of the uniform measure."""
    return math.lgamma(0.5 * p) - math.log(2.0) - 0.5 * p * math.log(math.pi)


def log_normalizer(p, kappa, controls: EvalControls | None = None) -> float:
    """ln c_p(kappa)."""
    if p < 2:
        raise ValueError(f"dimension must be at least 2, got {p}")
    return _log_uniform_density(p) - log_kummer_m(0.5, 0.5 * p, kappa, controls)


def log_pdf(x, params: WatsonParams, controls: EvalControls | None = None):
    """Log density at ``x``.

    Parameters
    ----------
    x : (p,) or (n, p) array of unit vectors
    params : WatsonParams

    Returns
    -------
    float or (n,) ndarray
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = unit_rows(np.atleast_2d(x), atol=1e-10)
    if X.shape[1] != params.p:
        raise ValueError(f"dimension mismatch: x has {X.shape[1]} columns, mu has {params.p}")
    out = log_normalizer(params.p, params.kappa, controls) + params.kappa * (X @ params.mu) ** 2
    return float(out[0]) if single else out


def _ll_from_scatter(S, n, params, controls):
    r = float(params.mu @ S @ params.mu)
    return n * (params.kappa * r + log_normalizer(params.p, params.kappa, controls))


def log_likelihood(X, params: WatsonParams, controls: EvalControls | None = None) -> float:
    """Full-data log-likelihood n (kappa mu^T S mu - ln M(1/2, p/2, kappa) + gamma).

    ``gamma`` is the uniform-measure constant, so the result equals
    ``log_pdf(X, params).sum()``.
    """
    X = unit_rows(X, atol=1e-10)
    if X.shape[0] == 0:
        raise ValueError("log-likelihood of an empty sample")
    if X.shape[1] != params.p:
        raise ValueError(f"dimension mismatch: X has {X.shape[1]} columns, mu has {params.p}")
    return _ll_from_scatter(scatter(X), X.shape[0], params, controls)


def fit_scatter(
    S,
    n: float = 1.0,
    clamp_r: bool | float = False,
    newton_controls: NewtonControls | None = None,
    eval_controls: EvalControls | None = None,
) -> FitReport:
    """Maximum-likelihood fit from a (possibly weighted) scatter matrix.

    Both candidate solutions are formed, (s_1, kappa_+) from the largest
    eigenvalue and (s_p, kappa_-) from the smallest, and the one with the
    higher log-likelihood is returned.  Ties (only at kappa = 0) go to the
    positive branch.

    Parameters
    ----------
    S : (p, p) scatter matrix with unit trace
    n : float
        Sample size or total weight; scales the reported log-likelihood.
    clamp_r : bool or float
        ``False`` lets an eigenvalue on the boundary of (0, 1) raise.
        ``True`` clamps r to ``[CLAMP_EPS, 1 - CLAMP_EPS]``; a float is
        used as the clamping epsilon instead.
    """
    S = np.asarray(S, dtype=float)
    p = S.shape[0]
    if p < 2:
        raise ValueError(f"dimension must be at least 2, got {p}")
    eps = None
    if clamp_r is not False:
        eps = CLAMP_EPS if clamp_r is True else float(clamp_r)
        if eval_controls is None:
            eval_controls = CLAMP_CONTROLS
    ectl = eval_controls or DEFAULT_CONTROLS
    eig = sym_eig(S)
    lam = eig.values
    a, c = 0.5, 0.5 * p

    candidates = []
    for branch, idx, gap in (
        (Branch.POSITIVE, 0, lam[0] - lam[1]),
        (Branch.NEGATIVE, p - 1, lam[p - 2] - lam[p - 1]),
    ):
        r = float(lam[idx])
        if eps is not None:
            r = min(max(r, eps), 1.0 - eps)
        # the top eigenvalue is >= 1/p = a/c and the bottom one <= 1/p, so
        # each branch gives a kappa of the right sign
        kappa = solve_newton(a, c, r, newton_controls, ectl).kappa
        params = WatsonParams(eig.vectors[:, idx], kappa)
        ll = n * (kappa * r + log_normalizer(p, kappa, ectl))
        candidates.append((ll, branch, r, params, bool(gap < DEGENERATE_GAP)))

    ll, branch, r, params, degenerate = max(candidates, key=lambda t: t[0])
    return FitReport(params, ll, r, branch, degenerate)


def fit(
    X,
    clamp_r: bool | float = False,
    newton_controls: NewtonControls | None = None,
    eval_controls: EvalControls | None = None,
) -> FitReport:
    """Maximum-likelihood Watson fit to the rows of ``X``.

    See :func:`fit_scatter` for the branch selection and clamping rules.

    Examples
    --------
    >>> X = sample(WatsonParams(np.eye(4)[0], 20.0), 5000, seed=1)
    >>> rep = fit(X)
    >>> rep.branch.value, round(rep.params.kappa, -1)
    ('Positive', 20.0)
    """
    X = unit_rows(X)
    if X.shape[0] < 1:
        raise ValueError("cannot fit an empty sample")
    return fit_scatter(scatter(X), X.shape[0], clamp_r, newton_controls, eval_controls)


# -- sampling ---------------------------------------------------------------
#
# With x = t mu + sqrt(1 - t^2) xi and xi uniform on the sphere orthogonal
# to mu, u = t^2 has density proportional to
#     u^{-1/2} (1 - u)^{(p-3)/2} exp(kappa u),
# i.e. Beta(1/2, (p-1)/2) tilted by exp(kappa u).  We draw u by rejection from
# Beta(alpha, beta) with alpha <= 1/2 and beta <= (p-1)/2.  The ratio of
# target to proposal is h(u) = u^s (1-u)^m exp(kappa u) with s = 1/2 - alpha,
# m = (p-1)/2 - beta, and its maximum has a closed form.  For kappa >= 0 the
# mass moves towards u = 1 so only beta is freed (s = 0); for kappa < 0 only
# alpha is (m = 0).  The free shape is chosen to maximise the acceptance rate.


def _log_h_max(s, m, kappa):
    if s == 0.0:
        if kappa <= m:
            return 0.0
        return kappa if m == 0.0 else m * math.log(m / kappa) + kappa - m
    # m == 0, kappa < 0: maximum of u^s exp(kappa u) on (0, 1]
    u = s / -kappa
    if u >= 1.0:
        return kappa
    return s * math.log(u) - s


def _log_acceptance(alpha, beta, p, kappa, log_target_norm):
    s, m = 0.5 - alpha, 0.5 * (p - 1) - beta
    return log_target_norm - betaln(alpha, beta) - _log_h_max(s, m, kappa)


@functools.lru_cache(maxsize=256)
def _envelope(p, kappa):
    """(alpha, beta, log h*, acceptance rate) for the Beta proposal."""
    half = 0.5 * (p - 1)
    log_target_norm = betaln(0.5, half) + log_kummer_m(0.5, 0.5 * p, kappa, CLAMP_CONTROLS)
    if kappa >= 0:
        shapes = lambda v: (0.5, v)  # noqa: E731
        upper = half
    else:
        shapes = lambda v: (v, half)  # noqa: E731
        upper = 0.5

    def neg(v):
        return -_log_acceptance(*shapes(v), p, kappa, log_target_norm)

    best_v, best = upper, neg(upper)
    res = minimize_scalar(neg, bounds=(1e-8 * upper, upper), method="bounded",
                          options={"xatol": 1e-6 * upper})
    if res.fun < best:
        best_v, best = float(res.x), float(res.fun)
    alpha, beta = shapes(best_v)
    log_h = _log_h_max(0.5 - alpha, half - beta, kappa)
    return alpha, beta, log_h, math.exp(-best)


def _sample_u(p, kappa, n, rng):
    alpha, beta, log_h, accept = _envelope(p, kappa)
    s, m = 0.5 - alpha, 0.5 * (p - 1) - beta
    out = []
    need = n
    while need > 0:
        batch = int(min(max(1.2 * need / accept + 16, 64), 4_000_000))
        u = rng.beta(alpha, beta, size=batch)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_ratio = kappa * u
            if s > 0:
                log_ratio = log_ratio + s * np.log(u)
            if m > 0:
                log_ratio = log_ratio + m * np.log1p(-u)
        log_v = np.log(rng.random(batch))
        keep = u[np.nan_to_num(log_ratio, nan=-np.inf) - log_h >= log_v]
        out.append(keep[:need])
        need -= out[-1].size
    return np.concatenate(out)


def sample(params: WatsonParams, n: int, seed=None) -> np.ndarray:
    """Draw ``n`` independent rows from W_p(mu, kappa).

    Exact sampler: u = (mu^T x)^2 by Beta-envelope rejection, a random sign
    for mu^T x, and a uniform direction orthogonal to mu.  Each call owns a
    fresh ``numpy.random.Generator`` seeded from ``seed``, so results are
    reproducible and independent calls never share state.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rng = np.random.default_rng(seed)
    mu, p, kappa = params.mu, params.p, params.kappa
    u = _sample_u(p, kappa, n, rng)
    t = np.sqrt(u) * np.where(rng.random(n) < 0.5, -1.0, 1.0)
    Z = rng.standard_normal((n, p))
    Z -= np.outer(Z @ mu, mu)
    Z /= np.linalg.norm(Z, axis=1, keepdims=True)
    X = t[:, None] * mu + np.sqrt(1.0 - u)[:, None] * Z
    return X / np.linalg.norm(X, axis=1, keepdims=True)
