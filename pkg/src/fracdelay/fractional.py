"""Fractional integrals and derivatives on uniform grids starting at 0.

These are verification tools.  They operate on :class:`GridFunction`
samples whose first node is the lower terminal ``t = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError

__all__ = ["GridFunction", "rl_integral", "gl_caputo_deriv", "hilfer_deriv_numeric", "gl_weights"]


@dataclass(frozen=True)
class GridFunction:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).reshape(-1)
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape[0] != grid.size:
            raise DimensionError(f"{vals.shape[0]} values for {grid.size} grid points")
        if grid.size >= 2:
            steps = np.diff(grid)
            if np.any(steps <= 0) or np.max(np.abs(steps - steps[0])) > 1e-12 * max(1.0, abs(grid[-1])) + 1e-12 * steps[0]:
                raise DomainError("grid must be uniform and strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)

    @classmethod
    def sample(cls, fn, T, n):
        """Sample ``fn`` on ``n + 1`` uniform points of ``[0, T]``."""
        grid = np.linspace(0.0, T, n + 1)
        return cls(grid, fn(grid))

    @property
    def dt(self):
        return float(self.grid[1] - self.grid[0])

    def with_values(self, values):
        return GridFunction(self.grid, values)


def _require_origin(g):
    if g.grid.size < 2:
        raise DomainError("need at least two grid points")
    if abs(g.grid[0]) > 1e-14 * max(1.0, g.grid[-1]):
        raise DomainError("grid must start at the lower terminal t = 0")


def _causal_conv(w, x):
    """``out[n] = sum_{j<=n} w[n-j] x[j]`` column-wise."""
    n = x.shape[0]
    return np.stack([np.convolve(w, x[:, c])[:n] for c in range(x.shape[1])], axis=1)


def rl_integral(g, order):
    """Riemann-Liouville integral of the given order by product trapezoid.

    The integrand is replaced by its piecewise linear interpolant and the
    weakly singular kernel ``(t - s)^(order - 1) / Gamma(order)`` is
    integrated exactly against it.
    """
    if not order > 0:
        raise DomainError(f"order must be positive, got {order}")
    _require_origin(g)
    y = g.values
    n = y.shape[0]
    k = np.arange(n, dtype=float)
    p = order + 1.0
    c = np.empty(n)
    c[0] = 1.0
    if n > 1:
        kk = k[1:]
        c[1:] = (kk + 1) ** p - 2 * kk**p + (kk - 1) ** p
    first = np.zeros(n)
    first[1:] = (k[1:] - 1) ** p - (k[1:] - order - 1) * k[1:] ** order
    acc = np.zeros_like(y)
    acc[1:] = _causal_conv(c, y[1:])[: n - 1]
    acc += first[:, None] * y[0]
    scale = g.dt**order / math.gamma(order + 2.0)
    return g.with_values(scale * acc)


def gl_weights(order, n):
    """Grunwald-Letnikov weights ``(-1)^j binom(order, j)``, ``j < n``."""
    w = np.empty(n)
    w[0] = 1.0
    for j in range(1, n):
        w[j] = w[j - 1] * (1.0 - (order + 1.0) / j)
    return w


def gl_caputo_deriv(g, mu, init_val=None, init_slope=None):
    """Caputo derivative of order ``1 < mu < 2`` by Grunwald-Letnikov.

    The Taylor polynomial ``init_val + init_slope t`` is removed first; when
    not supplied it is taken from the first two samples.  First-order
    accurate.
    """
    if not (1.0 < mu < 2.0):
        raise DomainError(f"mu must lie in (1, 2), got {mu}")
    if g.grid.size < 3:
        raise DomainError("need at least three grid points")
    _require_origin(g)
    y = g.values
    dt = g.dt
    v0 = y[0] if init_val is None else np.broadcast_to(np.asarray(init_val, float), y[0].shape)
    v1 = (y[1] - y[0]) / dt if init_slope is None else np.broadcast_to(np.asarray(init_slope, float), y[0].shape)
    shifted = y - v0 - g.grid[:, None] * v1
    return g.with_values(_causal_conv(gl_weights(mu, y.shape[0]), shifted) / dt**mu)


def _rgamma(x):
    if x <= 0 and x == int(x):
        return 0.0
    return 1.0 / math.gamma(x)


def _second_difference(y, dt):
    out = np.empty_like(y)
    out[1:-1] = (y[2:] - 2 * y[1:-1] + y[:-2]) / dt**2
    out[0] = (2 * y[0] - 5 * y[1] + 4 * y[2] - y[3]) / dt**2
    out[-1] = (2 * y[-1] - 5 * y[-2] + 4 * y[-3] - y[-4]) / dt**2
    return out


def hilfer_deriv_numeric(g, mu, nu, init_w0=None, init_w1=None):
    """Hilfer derivative of order ``1 < mu < 2`` and type ``nu``.

    With ``b1 = (1 - nu)(2 - mu)``, ``b2 = nu (2 - mu)`` and ``w = I^{b1} g``
    the derivative ``I^{b2} w''`` is evaluated as

        (I^{b2} I^{b1} g)'' - w(0) t^(b2 - 2) / Gamma(b2 - 1) - w'(0) t^(b2 - 1) / Gamma(b2),

    which avoids differencing at ``t = 0``.  ``init_w0``/``init_w1`` are
    ``w(0+)`` and ``w'(0+)``; by default they are ``g(0)``, ``g'(0)`` when
    ``b1 = 0`` and zero otherwise.  Reliable on ``[0.2 T, T]``; the value at
    ``t = 0`` is NaN.
    """
    if not (1.0 < mu < 2.0):
        raise DomainError(f"mu must lie in (1, 2), got {mu}")
    if not (0.0 <= nu <= 1.0):
        raise DomainError(f"nu must lie in [0, 1], got {nu}")
    if g.grid.size < 32:
        raise DomainError("grid too coarse: need at least 32 points")
    _require_origin(g)
    b1 = (1.0 - nu) * (2.0 - mu)
    b2 = nu * (2.0 - mu)
    dt = g.dt
    y = g.values
    if init_w0 is None:
        init_w0 = y[0] if b1 == 0 else np.zeros_like(y[0])
    if init_w1 is None:
        init_w1 = (-3 * y[0] + 4 * y[1] - y[2]) / (2 * dt) if b1 == 0 else np.zeros_like(y[0])
    v = g
    for order in (b1, b2):
        if order > 0:
            v = rl_integral(v, order)
    out = _second_difference(v.values, dt)
    t = g.grid[1:, None]
    out[1:] -= np.asarray(init_w0) * t ** (b2 - 2.0) * _rgamma(b2 - 1.0)
    out[1:] -= np.asarray(init_w1) * t ** (b2 - 1.0) * _rgamma(b2)
    out[0] = np.nan
    return g.with_values(out)
