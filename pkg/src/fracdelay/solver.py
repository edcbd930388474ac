"""Closed-form solution of the delayed Hilfer system and Ulam-Hyers bounds.

For ``D^{mu,nu} z + A z + Omega z(t-h) = f`` with history ``phi`` on
``[-h, 0]`` the solution is

    z(t) = Y_{mu,g1}(t) c1 + Y_{mu,g1+1}(t) c2
           - int_{-h}^{0} Y_{mu,mu}(t - s - h) Omega phi(s) ds
           + int_{0}^{t}  Y_{mu,mu}(t - s) f(s) ds,

with ``g1 = (mu - 2)(1 - nu) + 1``.  Both integrals are computed in the
shifted variable ``tau`` (the kernel argument), split at every multiple of
``h`` and graded towards the fractional-power behaviour just right of each
multiple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .delayed_ml import SeriesParams, build_kernel_for, y_eval_many
from .errors import DomainError
from .linalg import norm_ind1, vec_norm1
from .problem import FunctionSpec, Term
from .quadrature import QuadParams, graded_cuts, integrate_panels

__all__ = [
    "Trajectory",
    "PerturbationReport",
    "solve",
    "history_term",
    "forcing_term",
    "homogeneous_term",
    "uh_constant",
    "perturbation_bound_check",
    "kernel_panels",
]


@dataclass(frozen=True)
class Trajectory:
    grid: np.ndarray
    values: np.ndarray
    breakpoints: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def dim(self):
        return self.values.shape[1]


def kernel_panels(lo, hi, h, mu, gamma, qtol, right_exp=None):
    """Initial panels for ``int_lo^hi Y_{mu,gamma}(tau) g(tau) dtau``.

    Pieces end at every multiple of ``h``; a piece starting at ``m h`` is
    graded towards its left end, where the kernel behaves like
    ``(tau - m h)^(m mu + gamma - 1)``.
    """
    if hi <= lo:
        return []
    snap = 1e-12 * max(h, abs(hi))
    m_lo = math.ceil((lo - snap) / h)
    edges = [lo] + [m * h for m in range(max(m_lo, 0), math.floor(hi / h) + 1) if lo + snap < m * h < hi - snap] + [hi]
    panels = []
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        m_a = a / h
        left = None
        if a >= -snap and abs(m_a - round(m_a)) * h <= snap:
            left = round(m_a) * mu + gamma - 1.0
        right = right_exp if i == len(edges) - 2 else None
        pts = [a] + graded_cuts(a, b, left, right, qtol) + [b]
        panels.extend(zip(pts[:-1], pts[1:]))
    return panels


class _Context:
    """Kernel table and parameters shared by all terms of one problem."""

    def __init__(self, prob, t_max, sp, qp):
        self.prob = prob
        self.sp = sp
        self.qp = qp
        gammas = [prob.mu, prob.gamma1, prob.gamma2]
        self.table = build_kernel_for(prob.a, prob.omega, prob.mu, gammas, prob.h, max(t_max, prob.h), sp)

    def y(self, gamma, tau):
        return y_eval_many(self.table, self.prob.mu, gamma, self.prob.h, tau, self.sp)

    def convolve(self, grid, lo_of, hi_of, source, shift, premul=None, right_exp=None):
        """``int_{lo(t)}^{hi(t)} Y_{mu,mu}(tau) M source(t - shift - tau) dtau`` for each grid t."""
        p = self.prob
        panels, owners = [], []
        for i, t in enumerate(grid):
            ps = kernel_panels(lo_of(t), hi_of(t), p.h, p.mu, p.mu, self.qp.qtol, right_exp)
            panels.extend(ps)
            owners.extend([i] * len(ps))
        d = p.dim
        if not panels:
            return np.zeros((len(grid), d))
        t_arr = np.asarray(grid, dtype=float)

        def integrand(x, own):
            kern = self.y(p.mu, x)
            vals = source(t_arr[own][:, None] - shift - x)
            if premul is not None:
                vals = vals @ premul.T
            return np.einsum("pnij,pnj->pni", kern, vals)

        out, _ = integrate_panels(integrand, panels, owners, len(grid), self.qp, (d,))
        return out

    def history(self, grid):
        p = self.prob
        if p.phi.is_zero or not np.any(p.omega):
            return np.zeros((len(grid), p.dim))
        return -self.convolve(grid, lambda t: max(0.0, t - p.h), lambda t: t, p.phi, p.h, premul=p.omega)

    def forcing(self, grid):
        p = self.prob
        if p.f.is_zero:
            return np.zeros((len(grid), p.dim))
        sing = p.f.singular_exponent_at_zero()
        return self.convolve(grid, lambda t: 0.0, lambda t: t, p.f, 0.0, right_exp=sing)

    def homogeneous(self, grid):
        p = self.prob
        grid = np.asarray(grid, dtype=float)
        out = np.zeros((grid.size, p.dim))
        if np.any(p.c1):
            out += self.y(p.gamma1, grid) @ p.c1
        if np.any(p.c2):
            out += self.y(p.gamma2, grid) @ p.c2
        return out


def _check_grid(prob, grid):
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size and (grid.min() < 0 or grid.max() > prob.T * (1 + 1e-12)):
        raise DomainError(f"grid must lie in (0, T] with T = {prob.T}")
    if prob.gamma1 < 1.0 and np.any(grid == 0.0):
        raise DomainError("t = 0 is excluded for nu < 1: the solution has a power singularity there")
    return grid


def solve(prob, grid, sp=SeriesParams(), qp=QuadParams()):
    """Evaluate the closed-form solution on ``grid`` (a subset of ``(0, T]``).

    ``t = 0`` is accepted only when the first kernel order is 1
    (``nu = 1`` or ``mu = 2``), where ``z(0+) = c1``.
    """
    grid = _check_grid(prob, grid)
    if grid.size == 0:
        return Trajectory(grid, np.zeros((0, prob.dim)), _breaks(prob))
    ctx = _Context(prob, float(grid.max()), sp, qp)
    z = ctx.homogeneous(grid) + ctx.history(grid) + ctx.forcing(grid)
    return Trajectory(grid, z, _breaks(prob))


def _breaks(prob):
    n = int(math.floor(prob.T / prob.h + 1e-12))
    return prob.h * np.arange(1, n + 1)


def _single(prob, t, sp, qp, which):
    if not t > 0:
        raise DomainError("t must be positive")
    ctx = _Context(prob, float(t), sp, qp)
    return getattr(ctx, which)(np.array([float(t)]))[0]


def history_term(prob, t, sp=SeriesParams(), qp=QuadParams()):
    """``-int_{-h}^0 Y_{mu,mu}(t - s - h) Omega phi(s) ds``."""
    return _single(prob, t, sp, qp, "history")


def forcing_term(prob, t, sp=SeriesParams(), qp=QuadParams()):
    """``int_0^t Y_{mu,mu}(t - s) f(s) ds``."""
    return _single(prob, t, sp, qp, "forcing")


def homogeneous_term(prob, t, sp=SeriesParams(), qp=QuadParams()):
    return _single(prob, t, sp, qp, "homogeneous")


def uh_constant(prob, sp=SeriesParams(), qp=QuadParams()):
    """Ulam-Hyers constant ``C = int_0^T ||Y_{mu,mu}(s)||_1 ds``.

    ``qp.qtol`` is used as a relative tolerance.
    """
    ctx = _Context(prob, prob.T, sp, qp)
    panels = kernel_panels(0.0, prob.T, prob.h, prob.mu, prob.mu, qp.qtol)
    owners = np.zeros(len(panels), dtype=int)

    def integrand(x, own):
        return norm_ind1(ctx.y(prob.mu, x))

    rough, _ = integrate_panels(integrand, panels, owners, 1, QuadParams(qtol=1e-3, max_levels=qp.max_levels))
    scale = max(float(rough[0]), 1e-300)
    tight = QuadParams(qtol=qp.qtol * scale, max_levels=qp.max_levels, chunk_nodes=qp.chunk_nodes, threads=qp.threads)
    value, _ = integrate_panels(integrand, panels, owners, 1, tight)
    return float(value[0])


@dataclass(frozen=True)
class PerturbationReport:
    eps: float
    max_difference: float
    constant: float
    bound: float
    passed: bool
    differences: np.ndarray = field(repr=False, default=None)


def perturbation_bound_check(prob, eps, grid, sp=SeriesParams(), qp=QuadParams(),
                             direction=None, rel_slack=1e-8):
    """Solve with ``f`` and with ``f + X`` (constant, ``||X||_1 = eps``) and
    compare the largest deviation with ``C eps``.
    """
    if eps < 0:
        raise DomainError("eps must be non-negative")
    d = prob.dim
    if direction is None:
        direction = np.eye(d)[0]
    direction = np.asarray(direction, dtype=float)
    direction = direction / vec_norm1(direction)
    C = uh_constant(prob, sp, qp)
    if eps == 0:
        return PerturbationReport(0.0, 0.0, C, 0.0, True, np.zeros(len(np.atleast_1d(grid))))
    x = eps * direction
    perturbed = prob.replace(f=prob.f + FunctionSpec(d, (Term("monomial", tuple(x), 0.0),), prob.f.domain))
    z = solve(prob, grid, sp, qp).values
    z_star = solve(perturbed, grid, sp, qp).values
    diffs = vec_norm1(z_star - z)
    worst = float(diffs.max())
    bound = C * eps
    return PerturbationReport(eps, worst, C, bound, worst <= bound * (1.0 + rel_slack), diffs)
