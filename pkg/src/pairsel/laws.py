"""Limiting laws and screening thresholds for maximal pairwise statistics.

Under independent covariates the squared coherence ``W2 = max_{i<j} rho_ij^2``
satisfies ``(W2 - a) / b -> F_n`` as p grows, for every n >= 3, with

    F_n(x) = exp(-0.5 * (1 - 2x/(n-2))**((n-2)/2))   for x <= (n-2)/2
    a      = 1 - p**(-4/(n-2)) * c
    b      = 2/(n-2) * p**(-4/(n-2)) * c
    c      = ((n-2)/2 * B(1/2, (n-2)/2) * sqrt(1 - p**(-4/(n-2))))**(2/(n-2))

Thresholds are on squared statistics. Everything is computed in log space
so that p up to 1e9 and n up to 1e6 stay finite.
"""

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import betaln

from .exceptions import (DegenerateThresholdWarning, DomainError,
                         ThresholdSaturationWarning)

_SQRT_8PI = math.sqrt(8.0 * math.pi)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class NormalizingConstants:
    a: float
    b: float
    c: float
    n: int
    p: int


@dataclass(frozen=True)
class LawThresholds:
    """Screening thresholds for one (alpha, delta, n, p).

    t_star bounds squared Pearson correlation, s_star squared Spearman rho
    and r0 the pairwise R^2. ``s_star`` is None when the Spearman law is
    undefined (p < 3).
    """

    alpha: float
    delta: float
    n: int
    p: int
    t_star: float
    s_star: float
    r0: float

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**{k: data[k] for k in
                      ("alpha", "delta", "n", "p", "t_star", "s_star", "r0")})


def _check_n(n, minimum):
    if n < minimum:
        raise DomainError(f"n must be >= {minimum}, got {n}")


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def _log_p_scale(n, p):
    # log of p**(-4/(n-2))
    return -4.0 * math.log(p) / (n - 2)


def normalizing_constants(n, p):
    """Location a, scale b and constant c of the squared-coherence law."""
    _check_n(n, 3)
    if p < 2:
        raise DomainError(f"p must be >= 2, got {p}")
    half = (n - 2) / 2.0
    log_q = _log_p_scale(n, p)
    log_c = (2.0 / (n - 2)) * (
        math.log(half) + betaln(0.5, half) + 0.5 * math.log(-math.expm1(log_q)))
    qc = math.exp(log_q + log_c)
    return NormalizingConstants(
        a=1.0 - qc, b=qc / half, c=math.exp(log_c), n=int(n), p=int(p))


def limiting_cdf_w2(x, n):
    """Limiting CDF of (W2 - a) / b. Vectorized over ``x``."""
    _check_n(n, 3)
    x = np.asarray(x, dtype=float)
    half = (n - 2) / 2.0
    base = np.clip(1.0 - x / half, 0.0, None)
    with np.errstate(over="ignore"):
        out = np.exp(-0.5 * base**half)
    out = np.where(x >= half, 1.0, out)
    return out if out.ndim else float(out)


def limiting_quantile_w2(prob, n):
    """Inverse of ``limiting_cdf_w2`` for probabilities in (0, 1)."""
    _check_n(n, 3)
    half = (n - 2) / 2.0
    prob = np.asarray(prob, dtype=float)
    if np.any((prob <= 0.0) | (prob >= 1.0)):
        raise DomainError("probability must lie in (0, 1)")
    out = half * (1.0 - (-2.0 * np.log(prob)) ** (1.0 / half))
    return out if out.ndim else float(out)


def w2_threshold(alpha, n, p):
    """Squared-correlation threshold: the (1 - alpha) quantile of W2.

    Equals a + b * F_n^{-1}(1 - alpha)
    = 1 - p**(-4/(n-2)) * c * (-2 log(1 - alpha))**(2/(n-2)).
    """
    _check_alpha(alpha)
    k = normalizing_constants(n, p)
    log_tail = (2.0 / (n - 2)) * math.log(-2.0 * math.log1p(-alpha))
    return 1.0 - math.exp(_log_p_scale(n, p) + math.log(k.c) + log_tail)


def spearman_cdf(x):
    """Limit of P((n-1) S2 - 4 log p + log log p <= x)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        out = np.exp(-np.exp(-x / 2.0) / _SQRT_8PI)
    return out if out.ndim else float(out)


def spearman_statistic(s2, n, p):
    """Normalize a squared maximal Spearman rho: (n-1) S2 - 4 log p + log log p."""
    return (n - 1) * np.asarray(s2) - 4.0 * math.log(p) + math.log(math.log(p))


def spearman_quantile_x(alpha):
    """x_alpha with spearman_cdf(x_alpha) == 1 - alpha."""
    _check_alpha(alpha)
    return -2.0 * math.log(-_SQRT_8PI * math.log1p(-alpha))


def spearman_threshold(alpha, n, p):
    """Threshold on squared Spearman rho from the Gumbel-type law.

    Returns (4 log p - log log p + x_alpha) / (n - 1). A value >= 1 is
    clamped to 1.0 with a ThresholdSaturationWarning: the screen then
    admits no pair short of a perfect monotone relation.
    """
    _check_n(n, 3)
    if p < 3:
        raise DomainError(f"the Spearman law needs p >= 3, got {p}")
    x = spearman_quantile_x(alpha)
    s = (4.0 * math.log(p) - math.log(math.log(p)) + x) / (n - 1)
    if s >= 1.0:
        warnings.warn(
            f"Spearman threshold saturated at n={n}, p={p}, alpha={alpha}",
            ThresholdSaturationWarning, stacklevel=2)
        return 1.0
    return max(s, np.finfo(float).tiny)


def r_squared_threshold(delta, n, p):
    """r0 = 1 - p**(-(4 + delta)/(n - 3))."""
    _check_n(n, 4)
    if delta <= 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if p == 1:
        warnings.warn("r0 is 0 for p = 1", DegenerateThresholdWarning,
                      stacklevel=2)
    return -math.expm1(-(4.0 + delta) * math.log(p) / (n - 3))


def law_thresholds(alpha, delta, n, p):
    """Bundle t_star, s_star and r0 for one configuration."""
    s_star = spearman_threshold(alpha, n, p) if p >= 3 else None
    return LawThresholds(
        alpha=float(alpha), delta=float(delta), n=int(n), p=int(p),
        t_star=w2_threshold(alpha, n, p), s_star=s_star,
        r0=r_squared_threshold(delta, n, p))


REGIMES = ("sub_exponential", "exponential", "super_exponential")


def exponential_k(beta):
    """K(beta) = (beta / (2 pi (1 - 4 exp(-4 beta))))**(1/2)."""
    if not 0.0 < beta < math.inf:
        raise DomainError(f"beta must lie in (0, inf), got {beta}")
    denom = 2.0 * math.pi * (1.0 - 4.0 * math.exp(-4.0 * beta))
    if denom <= 0.0:
        raise DomainError(
            f"K(beta) is undefined for beta={beta} (needs beta > log(4)/4)")
    return math.sqrt(beta / denom)


def phase_transition_statistic(w2, n, p, regime):
    """Normalized log(1 - W2) statistic for one of the three growth regimes.

    sub/exponential: n T + 4 log p - log log p;
    super-exponential: n T + 4n/(n-2) log p - log n, with T = log(1 - W2).
    """
    t = np.log1p(-np.asarray(w2, dtype=float))
    if regime in ("sub_exponential", "exponential"):
        return n * t + 4.0 * math.log(p) - math.log(math.log(p))
    if regime == "super_exponential":
        return n * t + 4.0 * n / (n - 2) * math.log(p) - math.log(n)
    raise ValueError(f"unknown regime {regime!r}")


def phase_transition_cdf(regime, x, n, p, beta=None, as_printed=True):
    """Limiting CDF of ``phase_transition_statistic`` in a growth regime.

    The exponential case is evaluated as 1 - exp(K(beta) e^{(x + 8 beta)/2})
    exactly as published. That expression decreases in x and is negative
    everywhere, so it is not a distribution function; no corrected form
    is offered and ``as_printed`` must stay True.
    """
    _check_n(n, 3)
    if not as_printed:
        raise NotImplementedError(
            "only the published form of the limiting laws is available")
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        if regime == "sub_exponential":
            out = -np.expm1(-np.exp(x / 2.0) / _SQRT_8PI)
        elif regime == "super_exponential":
            out = -np.expm1(-np.exp(x / 2.0) / _SQRT_2PI)
        elif regime == "exponential":
            if beta is None:
                raise DomainError("the exponential regime needs beta")
            k = exponential_k(beta)
            out = -np.expm1(k * np.exp((x + 8.0 * beta) / 2.0))
        else:
            raise ValueError(f"unknown regime {regime!r}")
    return out if out.ndim else float(out)
