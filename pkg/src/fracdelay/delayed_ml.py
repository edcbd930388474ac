"""Delayed Mittag-Leffler type matrix function and pure-delay cosine/sine.

The delayed Mittag-Leffler function of a matrix pair (A, Omega) is

    Y(t) = sum_{m>=0} sum_{k>=m} (-1)^k Q[k, m] (t - m h)_+^(k mu + gamma - 1) / Gamma(k mu + gamma)

where ``Q`` is the kernel table of :mod:`fracdelay.kernel`.  Its Laplace
transform is ``s^(mu - gamma) (s^mu I + A + Omega e^(-h s))^(-1)``.

The outer sum is finite (``m <= t / h``).  The inner sum is truncated per
``m`` once the term bound ``||Q[k, m]|| tau^(k mu + gamma - 1) / Gamma(k mu + gamma)``
has been below ``tol`` and non-increasing for ``k_extra`` consecutive ``k``.
When a batch of times is evaluated together the bound is taken at the
largest shift ``tau`` in the batch, so every point gets at least as many
terms as it would alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, KernelDepthError, SingularityError
from .kernel import kernel_build
from .linalg import as_matrix, norm_ind1

__all__ = [
    "SeriesParams",
    "YQuery",
    "y_eval",
    "y_eval_grid",
    "y_eval_many",
    "depth_for_horizon",
    "build_kernel_for",
    "delayed_cos_frac",
    "delayed_sin_frac",
]


@dataclass(frozen=True)
class SeriesParams:
    """Truncation controls for the inner k-sum."""

    tol: float = 1e-16
    k_extra: int = 3
    k_hard_max: int = 400

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if self.k_extra < 1 or self.k_hard_max < self.k_extra:
            raise DomainError("need k_extra >= 1 and k_hard_max >= k_extra")


@dataclass(frozen=True)
class YQuery:
    mu: float
    gamma: float
    h: float
    t: float

    def __post_init__(self):
        _check_orders(self.mu, self.gamma, self.h)


def _check_orders(mu, gamma, h):
    if not (1.0 < mu <= 2.0):
        raise DomainError(f"mu must lie in (1, 2], got {mu}")
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    if not h > 0:
        raise DomainError(f"delay h must be positive, got {h}")


def _stop_index(log_bounds, m, k_limit, params):
    """First ``k`` at which the stopping rule fires, or ``None``.

    ``log_bounds[i]`` is the log of the bound for ``k = m + i``.
    """
    log_tol = math.log(params.tol)
    run = 0
    prev = math.inf
    for i, lb in enumerate(log_bounds):
        if lb < log_tol and lb <= prev:
            run += 1
            if run >= params.k_extra:
                return m + i
        else:
            run = 0
        prev = lb
        if m + i >= k_limit:
            break
    return None


def _log_term_bounds(norms, m, k_last, mu, gamma, tau):
    ks = np.arange(m, k_last + 1)
    expo = ks * mu + gamma - 1.0
    lg = np.array([math.lgamma(e + 1.0) for e in expo])
    with np.errstate(divide="ignore"):
        return np.log(norms[: k_last - m + 1]) + expo * math.log(tau) - lg


def y_eval_many(table, mu, gamma, h, t, params=SeriesParams()):
    """Evaluate ``Y_{mu,gamma}(t)`` for an array of times.

    Returns an array of shape ``np.shape(t) + (d, d)``.
    """
    _check_orders(mu, gamma, h)
    t = np.asarray(t, dtype=float)
    shape = t.shape
    tf = t.reshape(-1)
    d = table.dim
    out = np.zeros((tf.size, d, d))
    if tf.size == 0:
        return out.reshape(shape + (d, d))
    if gamma < 1.0 and np.any(tf == 0.0):
        raise SingularityError(f"Y_{{mu,{gamma}}} is singular at t = 0 for gamma < 1")
    t_max = tf.max()
    if t_max < 0:
        return out.reshape(shape + (d, d))
    if gamma == 1.0:
        out[tf == 0.0] += np.eye(d)
    m_max = int(math.floor(t_max / h))
    if m_max > table.k_max:
        # shift m only starts at k = m, beyond the last stored row
        raise KernelDepthError(
            f"t = {t_max} needs shifts up to m = {m_max} but the table stops at k_max = {table.k_max}"
        )
    for m in range(m_max + 1):
        tau = tf - m * h
        live = tau > 0
        if not np.any(live):
            continue
        tau_live = tau[live]
        k_stop = _choose_k(table, m, mu, gamma, float(tau_live.max()), params)
        col = table.signed_column(m, k_stop)
        expo = np.arange(m, k_stop + 1) * mu + gamma - 1.0
        lg = np.array([math.lgamma(e + 1.0) for e in expo])
        coef = np.exp(np.outer(expo, np.log(tau_live)) - lg[:, None])
        out[live] += (coef.T @ col.reshape(col.shape[0], d * d)).reshape(-1, d, d)
    return out.reshape(shape + (d, d))


def _choose_k(table, m, mu, gamma, tau, params):
    k_limit = min(table.k_max, params.k_hard_max)
    logb = _log_term_bounds(table.column_norms[m], m, k_limit, mu, gamma, tau)
    k_stop = _stop_index(logb, m, k_limit, params)
    if k_stop is not None:
        return k_stop
    if table.k_max >= params.k_hard_max:
        last = float(np.exp(logb[-1])) if logb.size else math.nan
        raise ConvergenceError(
            f"inner sum for m={m} at tau={tau:.6g} not converged by k_hard_max={params.k_hard_max}",
            last_term=last,
        )
    raise KernelDepthError(
        f"kernel table (k_max={table.k_max}) too shallow for m={m}, tau={tau:.6g}; "
        "rebuild with build_kernel_for or a larger k_max"
    )


def y_eval(table, q, p=SeriesParams()):
    """Single-point evaluation of ``Y_{q.mu, q.gamma}(q.t)``."""
    return y_eval_many(table, q.mu, q.gamma, q.h, np.array([q.t]), p)[0]


def y_eval_grid(table, mu, gamma, h, grid, p=SeriesParams()):
    """Evaluate on a strictly increasing grid, sharing one kernel table."""
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")
    try:
        return list(y_eval_many(table, mu, gamma, h, grid, p))
    except SingularityError as exc:
        exc.point = 0.0
        raise
    except (ConvergenceError, KernelDepthError) as exc:
        exc.point = float(grid.max())
        exc.args = (f"{exc.args[0]} (grid point t={exc.point})",)
        raise


def depth_for_horizon(a, omega, mu, gammas, h, t_max, params=SeriesParams()):
    """A priori kernel depth sufficient for all ``t <= t_max``.

    Uses the majorant ``||Q[k, m]|| <= C(k, m) ||A||^(k-m) ||Omega||^m``, so
    the depth it returns is never smaller than what the stopping rule needs.
    Capped at ``params.k_hard_max``.
    """
    na = float(norm_ind1(as_matrix(a, "A")))
    nw = float(norm_ind1(as_matrix(omega, "Omega")))
    if np.isscalar(gammas):
        gammas = [gammas]
    if t_max <= 0:
        return max(params.k_extra, 1)
    depth = int(math.floor(t_max / h)) + params.k_extra
    cap = params.k_hard_max
    for gamma in gammas:
        for m in range(0, int(math.floor(t_max / h)) + 1):
            tau = t_max - m * h
            if tau <= 0:
                continue
            ks = np.arange(m, cap + 1)
            expo = ks * mu + gamma - 1.0
            lg = np.array([math.lgamma(e + 1.0) for e in expo])
            binom = np.array([math.lgamma(k + 1) - math.lgamma(m + 1) - math.lgamma(k - m + 1) for k in ks])
            with np.errstate(divide="ignore", invalid="ignore"):
                la = np.where(ks > m, (ks - m) * (math.log(na) if na > 0 else -np.inf), 0.0)
                lw = m * math.log(nw) if nw > 0 else (0.0 if m == 0 else -np.inf)
            logb = binom + la + lw + expo * math.log(tau) - lg
            k_stop = _stop_index(logb, m, cap, params)
            depth = max(depth, cap if k_stop is None else k_stop)
    return min(depth, cap)


def build_kernel_for(a, omega, mu, gammas, h, t_max, params=SeriesParams()):
    """Kernel table deep enough to evaluate Y for every ``t <= t_max``."""
    return kernel_build(a, omega, depth_for_horizon(a, omega, mu, gammas, h, t_max, params))


def _check_frac_alpha(alpha):
    if not (0.5 < alpha <= 1.0):
        raise DomainError(f"alpha must lie in (1/2, 1], got {alpha}")


def _piecewise_delayed(omega, h, alpha, t, odd):
    omega = as_matrix(omega, "Omega")
    if omega.shape[0] != omega.shape[1]:
        raise DomainError("Omega must be square")
    _check_frac_alpha(alpha)
    d = omega.shape[0]
    if t < -h:
        return np.zeros((d, d))
    k = int(math.floor(t / h)) + 1
    om2 = omega @ omega
    power = omega.copy() if odd else np.eye(d)
    total = np.zeros((d, d))
    for j in range(k + 1):
        order = (2 * j + 1) * alpha if odd else 2 * j * alpha
        base = t - (j - 1) * h
        val = 1.0 if order == 0 else (base**order if base > 0 else 0.0)
        total += (-1) ** j * power * (val / math.gamma(order + 1.0))
        power = om2 @ power
    return total


def delayed_cos_frac(omega, h, alpha, t):
    """Fractional delayed matrix cosine, a piecewise polynomial in ``t^alpha``.

    ``I`` on ``[-h, 0)``, zero before ``-h``; on ``[(k-1)h, kh)`` it is
    ``sum_{j=0}^{k} (-1)^j Omega^(2j) (t - (j-1)h)^(2 j alpha) / Gamma(2 j alpha + 1)``.
    """
    return _piecewise_delayed(omega, h, alpha, float(t), odd=False)


def delayed_sin_frac(omega, h, alpha, t):
    """Fractional delayed matrix sine; odd powers of Omega, orders ``(2j+1) alpha``."""
    return _piecewise_delayed(omega, h, alpha, float(t), odd=True)
