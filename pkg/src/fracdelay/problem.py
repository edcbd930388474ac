"""Problem data: history/forcing functions and the full initial value problem."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError
from .linalg import as_matrix, as_vector

__all__ = ["Term", "FunctionSpec", "ProblemSpec"]

KINDS = ("monomial", "sine", "cosine")


@dataclass(frozen=True)
class Term:
    """One vector-valued term ``coeff * t^p`` or ``coeff * sin/cos(w t + phase)``."""

    kind: str
    coeff: tuple
    exponent_or_frequency: float
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"term kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "monomial" and self.exponent_or_frequency < 0:
            raise DomainError("monomial exponents must be non-negative")
        object.__setattr__(self, "coeff", tuple(float(c) for c in self.coeff))
        if not all(math.isfinite(c) for c in self.coeff):
            raise DomainError("term coefficients must be finite")

    def scalar(self, t):
        p = self.exponent_or_frequency
        if self.kind == "monomial":
            return np.ones_like(t) if p == 0 else np.power(t, p)
        arg = p * t + self.phase
        return np.sin(arg) if self.kind == "sine" else np.cos(arg)

    def laplace(self, s):
        """Transform of the scalar factor over ``[0, inf)``."""
        p = self.exponent_or_frequency
        if self.kind == "monomial":
            return math.gamma(p + 1.0) / s ** (p + 1.0)
        den = s * s + p * p
        if self.kind == "sine":
            return (s * math.sin(self.phase) + p * math.cos(self.phase)) / den
        return (s * math.cos(self.phase) - p * math.sin(self.phase)) / den


@dataclass(frozen=True)
class FunctionSpec:
    """Sum of polynomial and sinusoidal terms with values in ``R^dim``."""

    dim: int
    terms: tuple = ()
    domain: tuple = (-math.inf, math.inf)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        lo, hi = (float(x) for x in self.domain)
        if not lo <= hi:
            raise DomainError(f"empty domain {self.domain}")
        object.__setattr__(self, "domain", (lo, hi))
        for term in self.terms:
            if len(term.coeff) != self.dim:
                raise DimensionError(f"term coefficient has length {len(term.coeff)}, expected {self.dim}")
            p = term.exponent_or_frequency
            if term.kind == "monomial" and lo < 0 and p != int(p):
                raise DomainError(f"non-integer exponent {p} is not defined on negative times")

    @classmethod
    def zero(cls, dim, domain=(-math.inf, math.inf)):
        return cls(dim, (), domain)

    @classmethod
    def constant(cls, vec, domain=(-math.inf, math.inf)):
        vec = as_vector(vec)
        return cls(len(vec), (Term("monomial", tuple(vec), 0.0),), domain)

    @property
    def is_zero(self):
        return all(not any(term.coeff) for term in self.terms)

    def __call__(self, t):
        """Evaluate at a scalar or array of times; result has shape ``t.shape + (dim,)``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (self.dim,))
        for term in self.terms:
            out += term.scalar(t)[..., None] * np.asarray(term.coeff)
        return out

    def __add__(self, other):
        if not isinstance(other, FunctionSpec) or other.dim != self.dim:
            return NotImplemented
        lo = max(self.domain[0], other.domain[0])
        hi = min(self.domain[1], other.domain[1])
        return FunctionSpec(self.dim, self.terms + other.terms, (lo, hi))

    def scaled(self, factor):
        terms = tuple(
            Term(t.kind, tuple(factor * c for c in t.coeff), t.exponent_or_frequency, t.phase)
            for t in self.terms
        )
        return FunctionSpec(self.dim, terms, self.domain)

    def laplace(self, s):
        """Transform over ``[0, inf)`` of the terms continued past the domain."""
        out = np.zeros(self.dim)
        for term in self.terms:
            out += term.laplace(s) * np.asarray(term.coeff)
        return out

    def singular_exponent_at_zero(self):
        """Smallest non-integer monomial exponent, or ``None`` if all are smooth."""
        ps = [t.exponent_or_frequency for t in self.terms
              if t.kind == "monomial" and t.exponent_or_frequency != int(t.exponent_or_frequency)]
        return min(ps) if ps else None


@dataclass(frozen=True)
class ProblemSpec:
    """Initial value problem for ``D^{mu,nu} z + A z + Omega z(t - h) = f``.

    ``c1`` and ``c2`` are the weights of the two homogeneous kernels: the
    values at ``0+`` of the fractional integral of order ``(1-nu)(2-mu)`` of
    ``z`` and of its first derivative.  For ``nu = 1`` or ``mu = 2`` they
    reduce to ``z(0)`` and ``z'(0)``.
    """

    mu: float
    nu: float
    h: float
    a: np.ndarray
    omega: np.ndarray
    phi: FunctionSpec
    f: FunctionSpec
    c1: np.ndarray
    c2: np.ndarray
    T: float
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        a = as_matrix(self.a, "A")
        omega = as_matrix(self.omega, "Omega")
        if a.shape[0] != a.shape[1] or omega.shape != a.shape:
            raise DimensionError(f"A {a.shape} and Omega {omega.shape} must be square of equal size")
        d = a.shape[0]
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "c1", as_vector(self.c1, d, "c1"))
        object.__setattr__(self, "c2", as_vector(self.c2, d, "c2"))
        if not (1.0 < self.mu <= 2.0):
            raise DomainError(f"mu must lie in (1, 2], got {self.mu}")
        if not (0.0 <= self.nu <= 1.0):
            raise DomainError(f"nu must lie in [0, 1], got {self.nu}")
        if not self.h > 0:
            raise DomainError(f"h must be positive, got {self.h}")
        if not self.T > 0:
            raise DomainError(f"T must be positive, got {self.T}")
        for name in ("phi", "f"):
            fs = getattr(self, name)
            if fs.dim != d:
                raise DimensionError(f"{name} has dimension {fs.dim}, expected {d}")

    @property
    def dim(self):
        return self.a.shape[0]

    @property
    def gamma1(self):
        """Kernel order multiplying ``c1``."""
        return (self.mu - 2.0) * (1.0 - self.nu) + 1.0

    @property
    def gamma2(self):
        return self.gamma1 + 1.0

    @property
    def laplace_exponent(self):
        """``2(1 - nu) + mu nu``, the power of ``s`` attached to ``c1`` (minus one)."""
        return 2.0 * (1.0 - self.nu) + self.mu * self.nu

    def replace(self, **changes):
        fields = dict(
            mu=self.mu, nu=self.nu, h=self.h, a=self.a, omega=self.omega, phi=self.phi,
            f=self.f, c1=self.c1, c2=self.c2, T=self.T, meta=dict(self.meta),
        )
        fields.update(changes)
        return ProblemSpec(**fields)
