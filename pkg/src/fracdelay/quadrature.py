"""Composite Gauss-Legendre quadrature for piecewise-smooth integrands.

Integrands here are smooth between known breakpoints and may behave like
``(x - b)^e`` with a fractional ``e`` just to one side of a breakpoint ``b``.
Each such piece is first cut geometrically towards the offending end, then
panels are halved locally until the 16-point rule on a panel and on its two
halves agree.  Many independent integrals ("owners") are processed in one
vectorised pass.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, QuadratureError

__all__ = ["QuadParams", "graded_cuts", "integrate_panels", "gauss_legendre"]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
GRADING_RATIO = 0.15


@dataclass(frozen=True)
class QuadParams:
    qtol: float = 1e-10
    max_levels: int = 40
    chunk_nodes: int = 60000
    threads: int = 0

    def __post_init__(self):
        if not self.qtol > 0:
            raise DomainError("qtol must be positive")

    def thread_count(self):
        n = self.threads or int(os.environ.get("FRACDELAY_THREADS", "0") or 0)
        return n if n > 0 else (os.cpu_count() or 1)


def gauss_legendre(lo, hi):
    """Nodes and weights of the 16-point rule mapped to ``[lo, hi]``."""
    half = 0.5 * (hi - lo)
    return lo + half * (_GL_X + 1.0), half * _GL_W


def graded_cuts(lo, hi, left_exp=None, right_exp=None, qtol=1e-10):
    """Interior cut points grading ``[lo, hi]`` towards singular ends.

    ``left_exp``/``right_exp`` are the exponents ``e`` of the leading
    ``(x - end)^e`` behaviour at that end (``None``: smooth).  Cuts are
    placed geometrically until the innermost panel is so short that its
    whole contribution is below the tolerance.
    """
    width = hi - lo
    if width <= 0:
        return []
    cuts = []
    for exp_, sign in ((left_exp, 1), (right_exp, -1)):
        if exp_ is None or (exp_ == int(exp_) and exp_ >= 0):
            continue
        delta = qtol ** (1.0 / (exp_ + 1.0))
        depth = math.ceil(math.log(min(delta / width, 0.5)) / math.log(GRADING_RATIO))
        base = lo if sign > 0 else hi
        # grade only the nearer half so left and right cuts never cross
        span = 0.5 * width if (left_exp is not None and right_exp is not None) else width
        cuts.extend(base + sign * span * GRADING_RATIO**j for j in range(1, max(depth, 1) + 1))
    return sorted(cuts)


def integrate_panels(integrand, panels, owners, n_owners, params=QuadParams(), value_shape=()):
    """Sum of panel integrals per owner, refined by local panel halving.

    ``integrand(x, owner)`` receives node arrays of shape ``(P, n)`` together
    with the owner index of each panel (shape ``(P,)``) and returns values of
    shape ``(P, n) + value_shape``.  A panel is accepted once its 16-point
    value and the sum over its halves differ by less than its share of
    ``qtol`` (proportional to its length, with an absolute floor of
    ``1e-3 * qtol``).
    """
    panels = np.asarray(panels, dtype=float).reshape(-1, 2)
    owners = np.asarray(owners, dtype=int).reshape(-1)
    result = np.zeros((n_owners,) + tuple(value_shape))
    achieved = np.zeros(n_owners)
    if panels.shape[0] == 0:
        return result, achieved
    lengths = np.zeros(n_owners)
    np.add.at(lengths, owners, panels[:, 1] - panels[:, 0])
    lengths[lengths <= 0] = 1.0
    active_p, active_o = panels, owners
    x_ref = 0.5 * (_GL_X + 1.0)
    # nodes: full panel, left half, right half
    frac = np.concatenate([x_ref, 0.5 * x_ref, 0.5 + 0.5 * x_ref])
    n = _GL_X.size
    for level in range(params.max_levels + 1):
        lo = active_p[:, :1]
        w = active_p[:, 1:] - lo
        x = lo + w * frac
        vals = _evaluate(integrand, x, active_o, params)
        wt = (0.5 * w) * _GL_W
        wt_half = 0.5 * wt
        extra = (slice(None), slice(None)) + (None,) * len(value_shape)
        coarse = np.sum(vals[:, :n] * wt[extra], axis=1)
        fine = np.sum(vals[:, n:2 * n] * wt_half[extra], axis=1) + np.sum(vals[:, 2 * n:] * wt_half[extra], axis=1)
        diff = np.abs(fine - coarse).reshape(fine.shape[0], -1).max(axis=1) if fine.ndim > 1 else np.abs(fine - coarse)
        allow = np.maximum(params.qtol * w[:, 0] / lengths[active_o], 1e-3 * params.qtol)
        ok = diff <= allow
        np.add.at(result, active_o[ok], fine[ok])
        np.add.at(achieved, active_o[ok], diff[ok])
        if np.all(ok):
            return result, achieved
        bad_p = active_p[~ok]
        bad_o = active_o[~ok]
        mid = 0.5 * (bad_p[:, 0] + bad_p[:, 1])
        if np.any(mid <= bad_p[:, 0]) or np.any(mid >= bad_p[:, 1]):
            break
        active_p = np.concatenate([
            np.stack([bad_p[:, 0], mid], axis=1),
            np.stack([mid, bad_p[:, 1]], axis=1),
        ])
        active_o = np.concatenate([bad_o, bad_o])
    np.add.at(achieved, bad_o, diff[~ok])
    raise QuadratureError(
        f"panel refinement stalled after {level} levels; worst remaining difference "
        f"{diff[~ok].max():.3g} exceeds qtol={params.qtol:g}",
        achieved=float(achieved.max()),
    )


def _evaluate(integrand, x, owners, params):
    P = x.shape[0]
    per = max(1, params.chunk_nodes // x.shape[1])
    if P <= per:
        return np.asarray(integrand(x, owners))
    chunks = [(i, min(i + per, P)) for i in range(0, P, per)]
    threads = params.thread_count()
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: np.asarray(integrand(x[c[0]:c[1]], owners[c[0]:c[1]])), chunks))
    else:
        parts = [np.asarray(integrand(x[a:b], owners[a:b])) for a, b in chunks]
    return np.concatenate(parts)
