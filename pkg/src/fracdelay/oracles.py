"""Independent checks of the closed-form solution.

* ``laplace_check``: numerical Laplace transform of a computed trajectory
  against the algebraic resolvent expression (any mu, nu).
* ``method_of_steps_oracle``: classical RK4 integration of the second-order
  delay system, valid only for mu = 2.
* ``residual_check_caputo``: Grunwald-Letnikov residual of the equation for
  nu = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .delayed_ml import SeriesParams
from .errors import ApplicabilityError, DomainError
from .fractional import GridFunction, gl_caputo_deriv
from .linalg import norm_ind1, vec_norm1
from .quadrature import QuadParams, gauss_legendre
from .solver import Trajectory, solve

__all__ = [
    "VerifyReport",
    "laplace_margin",
    "laplace_transform_exact",
    "laplace_check",
    "method_of_steps_oracle",
    "residual_check_caputo",
    "compare_with_steps",
]


@dataclass(frozen=True)
class VerifyReport:
    check: str
    points: list
    max_residual: float
    threshold: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "check": self.check,
            "points": [[float(p), float(r)] for p, r in self.points],
            "max_residual": float(self.max_residual),
            "threshold": float(self.threshold),
            "passed": bool(self.passed),
            "details": {k: (float(v) if isinstance(v, (np.floating, float, int)) else v)
                        for k, v in self.details.items()},
        }


def _report(check, points, threshold, **details):
    worst = max((r for _, r in points), default=0.0)
    return VerifyReport(check, list(points), float(worst), float(threshold), bool(worst <= threshold), details)


def laplace_margin(prob):
    """Smallest admissible transform variable ``2 (||A|| + ||Omega||)^(1/mu)``."""
    return 2.0 * (float(norm_ind1(prob.a)) + float(norm_ind1(prob.omega))) ** (1.0 / prob.mu)


def laplace_transform_exact(prob, s):
    """``(s^mu I + A + Omega e^{-hs})^{-1} [s^{p-1} c1 + s^{p-2} c2 - Omega Psi(s) + F(s)]``."""
    d = prob.dim
    p = prob.laplace_exponent
    lo_nodes, lo_w = [], []
    for a, b in zip(np.linspace(0, prob.h, 5)[:-1], np.linspace(0, prob.h, 5)[1:]):
        x, w = gauss_legendre(a, b)
        lo_nodes.append(x)
        lo_w.append(w)
    x = np.concatenate(lo_nodes)
    w = np.concatenate(lo_w)
    psi = (w * np.exp(-s * x)) @ prob.phi(x - prob.h)
    rhs = s ** (p - 1.0) * prob.c1 + s ** (p - 2.0) * prob.c2 - prob.omega @ psi + prob.f.laplace(s)
    m = s**prob.mu * np.eye(d) + prob.a + prob.omega * math.exp(-prob.h * s)
    return np.linalg.solve(m, rhs)


def _lagrange_rows(xs, stencil):
    """Cubic Lagrange basis values at ``xs`` (P, n) for stencils (P, 4)."""
    out = np.ones(xs.shape + (4,))
    for j in range(4):
        for k in range(4):
            if k != j:
                out[..., j] *= (xs - stencil[:, k, None]) / (stencil[:, j, None] - stencil[:, k, None])
    return out


def _laplace_quadrature(prob, traj, s):
    """``int_0^T e^{-st} z(t) dt`` from trajectory samples.

    Near ``t = 0`` the solution behaves like ``c1 t^beta / Gamma(beta + 1)``
    with ``beta = g1 - 1 <= 0``.  Only ``u = t^{-beta} z`` is interpolated
    (cubic Lagrange on four neighbouring samples); the weight
    ``t^beta e^{-st}`` is integrated exactly per panel with a 16-point Gauss
    rule, after the substitution ``t = t1 y^(1/(beta+1))`` on the first panel.
    """
    beta = prob.gamma1 - 1.0
    t = np.asarray(traj.grid, dtype=float)
    z = np.asarray(traj.values, dtype=float)
    if t[0] > 0:
        t = np.concatenate([[0.0], t])
        z = np.vstack([np.zeros(prob.dim), z])
    n = t.size
    u = np.empty_like(z)
    u[0] = prob.c1 / math.gamma(prob.gamma1)
    u[1:] = (t[1:] ** (-beta))[:, None] * z[1:]
    y, wy = gauss_legendre(0.0, 1.0)
    a, b = t[:-1, None], t[1:, None]
    nodes = a + (b - a) * y
    weight = (b - a) * wy * np.exp(-s * nodes)
    weight[1:] *= nodes[1:] ** beta
    # first panel: t = t1 * y^p absorbs the t^beta weight exactly
    p = 1.0 / (beta + 1.0)
    nodes[0] = t[1] * y**p
    weight[0] = (t[1] ** (beta + 1.0) / (beta + 1.0)) * wy * np.exp(-s * nodes[0])
    if n < 4:
        lam = (nodes - a) / (b - a)
        return (weight * (1 - lam)).sum(axis=1) @ u[:-1] + (weight * lam).sum(axis=1) @ u[1:]
    start = np.clip(np.arange(n - 1) - 1, 0, n - 4)
    idx = start[:, None] + np.arange(4)
    basis = _lagrange_rows(nodes, t[idx])
    coef = np.einsum("pn,pnj->pj", weight, basis)
    return np.einsum("pj,pjd->d", coef, u[idx])


def laplace_check(prob, traj, s_values, threshold=1e-4):
    """Relative residual between the trajectory's Laplace integral and the resolvent form."""
    margin = laplace_margin(prob)
    s_values = [float(s) for s in s_values]
    bad = [s for s in s_values if not s > margin]
    if bad:
        raise DomainError(f"s values {bad} do not exceed the invertibility margin {margin:.6g}")
    if len(traj.grid) < 2:
        raise DomainError("trajectory too short for the Laplace integral")
    points = []
    tails = []
    for s in s_values:
        exact = laplace_transform_exact(prob, s)
        approx = _laplace_quadrature(prob, traj, s)
        scale = float(vec_norm1(exact))
        err = float(vec_norm1(approx - exact))
        points.append((s, err / scale if scale > 0 else err))
        tails.append(math.exp(-s * traj.grid[-1]) * float(vec_norm1(traj.values[-1])) / s)
    return _report("laplace", points, threshold, margin=margin, tail_estimate=max(tails))


def _hermite(t, t0, dt, y0, y1, d0, d1):
    th = (t - t0) / dt
    h00 = 2 * th**3 - 3 * th**2 + 1
    h10 = th**3 - 2 * th**2 + th
    h01 = -2 * th**3 + 3 * th**2
    h11 = th**3 - th**2
    return h00 * y0 + h10 * dt * d0 + h01 * y1 + h11 * dt * d1


def method_of_steps_oracle(prob, grid=None, steps_per_delay=2000):
    """RK4 solution of ``z'' = -A z - Omega z(t-h) + f`` with ``z(0)=c1, z'(0)=c2``.

    The interval ``[0, T]`` is swept one delay at a time; delayed values come
    from ``phi`` on the first interval and from cubic Hermite interpolation of
    the already computed samples afterwards.  Returns samples at ``grid``
    (default: every RK node).
    """
    if prob.mu != 2.0:
        raise ApplicabilityError(f"method of steps needs mu = 2, got mu = {prob.mu}")
    if steps_per_delay < 2000:
        raise DomainError("steps_per_delay must be at least 2000")
    h = prob.h
    dt = h / steps_per_delay
    n_total = int(math.ceil(prob.T / dt - 1e-9))
    d = prob.dim
    zs = np.empty((n_total + 1, d))
    vs = np.empty((n_total + 1, d))
    acc = np.empty((n_total + 1, d))
    zs[0] = prob.c1
    vs[0] = prob.c2
    A, W = prob.a, prob.omega

    def delayed(i, frac):
        # z(t_i + frac*dt - h)
        tq = (i + frac) * dt - h
        j = i - steps_per_delay
        if j < 0:
            return prob.phi(np.array(tq))
        if frac == 0.0:
            return zs[j]
        return _hermite(tq, j * dt, dt, zs[j], zs[j + 1], vs[j], vs[j + 1])

    def rhs(t, z, zd):
        return -A @ z - W @ zd + prob.f(np.array(t))

    for i in range(n_total):
        t = i * dt
        z, v = zs[i], vs[i]
        zd0, zdh, zd1 = delayed(i, 0.0), delayed(i, 0.5), delayed(i, 1.0)
        k1z, k1v = v, rhs(t, z, zd0)
        k2z, k2v = v + 0.5 * dt * k1v, rhs(t + 0.5 * dt, z + 0.5 * dt * k1z, zdh)
        k3z, k3v = v + 0.5 * dt * k2v, rhs(t + 0.5 * dt, z + 0.5 * dt * k2z, zdh)
        k4z, k4v = v + dt * k3v, rhs(t + dt, z + dt * k3z, zd1)
        zs[i + 1] = z + dt / 6 * (k1z + 2 * k2z + 2 * k3z + k4z)
        vs[i + 1] = v + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    nodes = dt * np.arange(n_total + 1)
    if grid is None:
        return Trajectory(nodes, zs)
    grid = np.asarray(grid, dtype=float)
    idx = np.clip(np.floor(grid / dt).astype(int), 0, n_total - 1)
    vals = _hermite(grid[:, None], nodes[idx][:, None], dt, zs[idx], zs[idx + 1], vs[idx], vs[idx + 1])
    return Trajectory(grid, vals)


def compare_with_steps(prob, grid, threshold=1e-4, sp=SeriesParams(), qp=QuadParams()):
    """Max-norm distance between :func:`solve` and the RK4 oracle on ``grid``."""
    z = solve(prob, grid, sp, qp).values
    ref = method_of_steps_oracle(prob, grid).values
    diffs = np.abs(z - ref).max(axis=1)
    return _report("steps", list(zip(np.asarray(grid, float), diffs)), threshold)


def _caputo_residual(prob, grid, values):
    dt = grid[1] - grid[0]
    if abs(grid[0] - dt) <= 1e-9 * dt:
        grid = np.concatenate([[0.0], grid])
        values = np.vstack([prob.c1, values])
    gf = GridFunction(grid, values)
    deriv = gl_caputo_deriv(gf, prob.mu, prob.c1, prob.c2).values
    lag = grid - prob.h
    delayed = np.empty_like(values)
    hist = lag <= 0
    delayed[hist] = prob.phi(lag[hist])
    for c in range(prob.dim):
        delayed[~hist, c] = np.interp(lag[~hist], grid, values[:, c])
    r = deriv + values @ prob.a.T + delayed @ prob.omega.T - prob.f(grid)
    sel = grid >= 0.2 * prob.T - 1e-12
    return float(np.abs(r[sel]).max()) if np.any(sel) else 0.0


def residual_check_caputo(prob, traj, dt, traj_fine=None, sp=SeriesParams(), qp=QuadParams(),
                          min_factor=1.5):
    """Grunwald-Letnikov residual at steps ``dt`` and ``dt/2`` (``nu = 1`` only).

    ``traj`` must sit on the uniform grid ``dt, 2 dt, ..., T`` (``t = 0`` may
    be included).  The half-step trajectory is solved here unless
    ``traj_fine`` is given.  Passes when the residual drops by at least
    ``min_factor``.
    """
    if prob.nu != 1.0:
        raise ApplicabilityError(f"Caputo residual needs nu = 1, got nu = {prob.nu}")
    if not (1.0 < prob.mu < 2.0):
        raise ApplicabilityError(f"Caputo residual needs 1 < mu < 2, got mu = {prob.mu}")
    grid = np.asarray(traj.grid, dtype=float)
    steps = np.diff(grid)
    if grid.size < 3 or np.max(np.abs(steps - dt)) > 1e-9 * dt:
        raise DomainError("trajectory grid is not uniform with the stated step")
    if traj_fine is None:
        fine_grid = np.arange(1, int(round(grid[-1] / (0.5 * dt))) + 1) * (0.5 * dt)
        traj_fine = solve(prob, fine_grid, sp, qp)
    coarse = _caputo_residual(prob, grid, np.asarray(traj.values))
    fine = _caputo_residual(prob, np.asarray(traj_fine.grid, float), np.asarray(traj_fine.values))
    factor = coarse / fine if fine > 0 else math.inf
    return VerifyReport(
        "residual",
        [(dt, coarse), (0.5 * dt, fine)],
        fine,
        coarse / min_factor,
        bool(fine <= coarse / min_factor),
        {"decrease_factor": factor if coarse > 0 else math.inf},
    )
