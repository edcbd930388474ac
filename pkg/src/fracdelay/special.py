"""Gamma and two-parameter Mittag-Leffler functions.

The Mittag-Leffler routines sum the defining power series directly:

    E_{a,b}(z) = sum_k z^k / Gamma(a k + b)

This is reliable for moderate arguments, roughly ``|z| <= 50`` at double
precision; beyond that the alternating terms grow too large before they
decay and cancellation eats the result.  No asymptotic or integral
representation is attempted.  Every series is accumulated with exactly
rounded summation (:func:`math.fsum`) so the only loss is the unavoidable
cancellation between large terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionError, DomainError
from .linalg import norm_ind1

__all__ = ["MLParams", "gamma_fn", "ml2", "ml2_matrix"]


@dataclass(frozen=True)
class MLParams:
    """Parameters of a truncated two-parameter Mittag-Leffler series."""

    alpha: float
    beta: float
    max_terms: int = 500
    tol: float = 1e-17

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError(f"alpha and beta must be positive, got {self.alpha}, {self.beta}")
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be positive")


def gamma_fn(x):
    """Gamma function for positive real ``x``.

    Backed by :func:`math.gamma`, which is accurate to a few ulps over the
    whole positive axis.
    """
    x = float(x)
    if not x > 0:
        raise DomainError(f"gamma_fn is only defined here for x > 0, got {x}")
    return math.gamma(x)


def _scalar_term(params, k, logz, sign):
    e = k * logz - math.lgamma(params.alpha * k + params.beta)
    return sign**k * math.exp(e) if e > -745 else 0.0


def ml2(params, z):
    """Two-parameter Mittag-Leffler function ``E_{alpha,beta}(z)`` for real z."""
    z = float(z)
    if z == 0.0:
        return 1.0 / gamma_fn(params.beta)
    logz = math.log(abs(z))
    sign = -1.0 if z < 0 else 1.0
    terms = []
    prev = math.inf
    for k in range(params.max_terms):
        term = _scalar_term(params, k, logz, sign)
        terms.append(term)
        mag = abs(term)
        if mag < params.tol and mag <= prev:
            return math.fsum(terms)
        prev = mag
    raise ConvergenceError(
        f"E_{{{params.alpha},{params.beta}}}({z}) did not converge in {params.max_terms} terms",
        partial=math.fsum(terms),
        last_term=abs(terms[-1]),
    )


def ml2_matrix(params, m, t_pow):
    """Matrix Mittag-Leffler series ``sum_k m^k t_pow^k / Gamma(alpha k + beta)``.

    With ``m = -A`` and ``t_pow = t**alpha`` this is ``E_{alpha,beta}(-A t^alpha)``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"ml2_matrix needs a square matrix, got shape {m.shape}")
    d = m.shape[0]
    step = float(t_pow) * m
    power = np.eye(d)
    terms = []
    prev = math.inf
    for k in range(params.max_terms):
        g = math.lgamma(params.alpha * k + params.beta)
        term = power * math.exp(-g)
        terms.append(term)
        mag = float(norm_ind1(term))
        if mag < params.tol and mag <= prev:
            stack = np.stack(terms)
            return np.array(
                [[math.fsum(stack[:, i, j]) for j in range(d)] for i in range(d)]
            )
        prev = mag
        power = power @ step
    raise ConvergenceError(
        f"matrix Mittag-Leffler series did not converge in {params.max_terms} terms",
        partial=np.sum(terms, axis=0),
        last_term=float(norm_ind1(terms[-1])),
    )
