"""Kernel matrices of the delayed Mittag-Leffler function.

For a pair (A, Omega) of square matrices that need not commute, ``Q[k, m]``
is the sum of all words of length ``k`` in A and Omega containing exactly
``m`` factors Omega.  Equivalently ``(A + x Omega)^k = sum_m Q[k, m] x^m``.
The table is filled row by row with

    Q[k+1, m] = A Q[k, m] + Omega Q[k, m-1],    Q[0, 0] = I,

and ``Q[k, m] = 0`` whenever ``m < 0`` or ``m > k``.  The explicit summation
form (splitting a word at its leftmost Omega) is kept only as an independent
check, see :func:`kernel_check_sum_form`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, KernelDepthError
from .linalg import as_matrix

__all__ = [
    "KernelTable",
    "SumFormReport",
    "kernel_build",
    "kernel_entry",
    "kernel_check_sum_form",
]


@dataclass(frozen=True)
class KernelTable:
    """Immutable triangular table ``Q[k, m]`` for ``0 <= m <= k <= k_max``.

    ``rows[k]`` is an array of shape ``(k + 1, d, d)`` holding ``Q[k, 0..k]``.
    """

    a: np.ndarray
    omega: np.ndarray
    k_max: int
    rows: tuple = field(repr=False)
    columns: tuple = field(repr=False)
    column_norms: tuple = field(repr=False)

    @property
    def dim(self):
        return self.a.shape[0]

    def entry(self, k, m):
        return kernel_entry(self, k, m)

    def signed_column(self, m, k_stop):
        """Stack of ``(-1)^k Q[k, m]`` for ``k = m .. k_stop``."""
        if k_stop > self.k_max:
            raise KernelDepthError(f"kernel table built to k_max={self.k_max}, need {k_stop}")
        return self.columns[m][: k_stop - m + 1]


def kernel_build(a, omega, k_max):
    """Fill the kernel table up to row ``k_max`` with the two-term recursion."""
    a = as_matrix(a, "A")
    omega = as_matrix(omega, "Omega")
    if a.shape[0] != a.shape[1] or omega.shape != a.shape:
        raise DimensionError(f"A {a.shape} and Omega {omega.shape} must be square of equal size")
    k_max = int(k_max)
    if k_max < 0:
        raise DomainError("k_max must be non-negative")
    d = a.shape[0]
    zero = np.zeros((d, d))
    rows = [np.eye(d)[None, :, :].copy()]
    for k in range(k_max):
        prev = rows[k]
        nxt = np.empty((k + 2, d, d))
        for m in range(k + 2):
            q_km = prev[m] if m <= k else zero
            q_km1 = prev[m - 1] if m >= 1 else zero
            nxt[m] = a @ q_km + omega @ q_km1
        rows.append(nxt)
    columns = []
    norms = []
    for m in range(k_max + 1):
        col = np.stack([(-1.0) ** k * rows[k][m] for k in range(m, k_max + 1)])
        columns.append(col)
        norms.append(np.abs(col).sum(axis=1).max(axis=1))
    for arr in (*rows, *columns, *norms):
        arr.flags.writeable = False
    return KernelTable(
        a=a, omega=omega, k_max=k_max, rows=tuple(rows),
        columns=tuple(columns), column_norms=tuple(norms),
    )


def kernel_entry(table, k, m):
    """``Q[k, m]``; the zero matrix outside the triangle ``0 <= m <= k``."""
    if k < 0:
        raise KernelDepthError(f"k must be non-negative, got {k}")
    if k > table.k_max:
        raise KernelDepthError(
            f"kernel table built to k_max={table.k_max}; rebuild it to reach k={k}"
        )
    if m < 0 or m > k:
        return np.zeros((table.dim, table.dim))
    return table.rows[k][m]


@dataclass(frozen=True)
class SumFormReport:
    k_max: int
    max_abs_deviation: float
    max_rel_deviation: float
    exact_arithmetic: bool

    @property
    def passed(self):
        return self.max_abs_deviation == 0.0 if self.exact_arithmetic else self.max_rel_deviation <= 1e-12


def _is_integral(x):
    return bool(np.all(x == np.round(x)))


def kernel_check_sum_form(table):
    """Rebuild every entry from the explicit sum and compare with ``table``.

    The sum form is ``Q[k, m] = sum_{j=m}^{k} A^{k-j} Omega Q[j-1, m-1]``
    for ``m >= 1`` and ``Q[k, 0] = A^k``.  When both matrices are integer
    valued the check runs in exact Python integers.
    """
    exact = _is_integral(table.a) and _is_integral(table.omega)
    if exact:
        a = np.array(table.a.astype(np.int64).tolist(), dtype=object)
        om = np.array(table.omega.astype(np.int64).tolist(), dtype=object)
        eye = np.array(np.eye(table.dim, dtype=np.int64).tolist(), dtype=object)
    else:
        a, om, eye = table.a, table.omega, np.eye(table.dim)
    K = table.k_max
    powers = [eye]
    for _ in range(K):
        powers.append(a.dot(powers[-1]))
    ref = {(k, 0): powers[k] for k in range(K + 1)}
    for m in range(1, K + 1):
        for k in range(m, K + 1):
            acc = None
            for j in range(m, k + 1):
                inner = ref[(j - 1, m - 1)] if j - 1 >= m - 1 else None
                if inner is None:
                    continue
                term = powers[k - j].dot(om.dot(inner))
                acc = term if acc is None else acc + term
            ref[(k, m)] = acc
    max_abs = 0.0
    max_rel = 0.0
    for (k, m), q_ref in ref.items():
        if exact:
            diff = np.array(
                [[abs(int(q_ref[i, j]) - int(table.rows[k][m][i, j])) for j in range(table.dim)]
                 for i in range(table.dim)],
                dtype=float,
            )
            scale = np.array(np.abs(q_ref).tolist(), dtype=float).max()
        else:
            diff = np.abs(q_ref - table.rows[k][m])
            scale = np.abs(q_ref).max()
        dev = float(diff.max())
        max_abs = max(max_abs, dev)
        if scale > 0:
            max_rel = max(max_rel, dev / scale)
        elif dev > 0:
            max_rel = np.inf
    return SumFormReport(K, max_abs, max_rel, exact)
