"""Problem files (JSON) and CSV output."""

from __future__ import annotations

import json
import math
import re

import numpy as np

from .delayed_ml import SeriesParams
from .errors import FracDelayError
from .problem import FunctionSpec, ProblemSpec, Term
from .quadrature import QuadParams

__all__ = [
    "ProblemFileError",
    "LoadedProblem",
    "parse_problem",
    "load_problem",
    "dump_problem",
    "default_grid",
    "format_float",
    "write_csv",
]

REQUIRED = ("mu", "nu", "h", "T", "A", "Omega", "c1", "c2", "phi", "f")


class ProblemFileError(FracDelayError, ValueError):
    """Malformed or invalid problem file; the message names the key and line."""


class LoadedProblem:
    def __init__(self, problem, series, quad, n_points, t_min):
        self.problem = problem
        self.series = series
        self.quad = quad
        self.n_points = n_points
        self.t_min = t_min


def _line_of(text, key):
    if text is None:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _fail(text, key, msg):
    line = _line_of(text, key)
    where = f"line {line}: " if line else ""
    return ProblemFileError(f'{where}key "{key}": {msg}')


def _number(doc, key, text):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise _fail(text, key, f"expected a finite number, got {v!r}")
    return float(v)


def _numbers(v, key, text, length=None):
    if not isinstance(v, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) for x in v
    ):
        raise _fail(text, key, "expected an array of finite numbers")
    if length is not None and len(v) != length:
        raise _fail(text, key, f"expected {length} entries, got {len(v)}")
    return [float(x) for x in v]


def _matrix(doc, key, text):
    v = doc[key]
    if not isinstance(v, dict) or "d" not in v or "data" not in v:
        raise _fail(text, key, 'expected an object {"d": n, "data": [row-major entries]}')
    d = v["d"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise _fail(text, key, f'"d" must be a positive integer, got {d!r}')
    data = _numbers(v["data"], key, text, d * d)
    return np.array(data).reshape(d, d)


def _terms(doc, key, text, dim):
    v = doc[key]
    if not isinstance(v, list):
        raise _fail(text, key, "expected an array of term objects")
    out = []
    for i, item in enumerate(v):
        if not isinstance(item, dict):
            raise _fail(text, key, f"term {i} is not an object")
        missing = [k for k in ("kind", "coeff", "exponent_or_frequency") if k not in item]
        if missing:
            raise _fail(text, key, f'term {i} lacks "{missing[0]}"')
        coeff = _numbers(item["coeff"], key, text, dim)
        p = item["exponent_or_frequency"]
        phase = item.get("phase", 0.0)
        for name, x in (("exponent_or_frequency", p), ("phase", phase)):
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                raise _fail(text, key, f'term {i}: "{name}" must be a finite number')
        try:
            out.append(Term(item["kind"], tuple(coeff), float(p), float(phase)))
        except FracDelayError as exc:
            raise _fail(text, key, f"term {i}: {exc}") from None
    return tuple(out)


def parse_problem(doc, text=None):
    """Build a :class:`LoadedProblem` from a decoded JSON document."""
    if not isinstance(doc, dict):
        raise ProblemFileError("line 1: top level must be a JSON object")
    for key in REQUIRED:
        if key not in doc:
            raise ProblemFileError(f'line 1: missing required key "{key}"')
    mu, nu, h, T = (_number(doc, k, text) for k in ("mu", "nu", "h", "T"))
    # the function domains below depend on h and T
    for key, v in (("h", h), ("T", T)):
        if not v > 0:
            raise _fail(text, key, f"must be positive, got {v}")
    a = _matrix(doc, "A", text)
    omega = _matrix(doc, "Omega", text)
    if omega.shape != a.shape:
        raise _fail(text, "Omega", f"dimension {omega.shape[0]} differs from A ({a.shape[0]})")
    d = a.shape[0]
    c1 = _numbers(doc["c1"], "c1", text, d)
    c2 = _numbers(doc["c2"], "c2", text, d)
    try:
        phi = FunctionSpec(d, _terms(doc, "phi", text, d), (-h, 0.0))
    except FracDelayError as exc:
        raise _fail(text, "phi", str(exc)) from None
    f = FunctionSpec(d, _terms(doc, "f", text, d), (0.0, T))
    try:
        prob = ProblemSpec(mu, nu, h, a, omega, phi, f, c1, c2, T)
    except FracDelayError as exc:
        key = str(exc).split(" ", 1)[0]
        key = key if key in doc else "mu"
        raise _fail(text, key, str(exc)) from None

    series = SeriesParams()
    if "series" in doc:
        s = doc["series"]
        try:
            series = SeriesParams(tol=float(s.get("tol", series.tol)),
                                  k_hard_max=int(s.get("k_hard_max", series.k_hard_max)))
        except (AttributeError, TypeError, ValueError, FracDelayError) as exc:
            raise _fail(text, "series", str(exc)) from None
    quad = QuadParams()
    if "quadrature" in doc:
        try:
            quad = QuadParams(qtol=float(doc["quadrature"].get("qtol", quad.qtol)))
        except (AttributeError, TypeError, ValueError, FracDelayError) as exc:
            raise _fail(text, "quadrature", str(exc)) from None
    n_points, t_min = 101, None
    if "grid" in doc:
        g = doc["grid"]
        try:
            n_points = int(g.get("n_points", n_points))
            t_min = g.get("t_min")
            t_min = None if t_min is None else float(t_min)
        except (AttributeError, TypeError, ValueError, FracDelayError) as exc:
            raise _fail(text, "grid", str(exc)) from None
        if n_points < 2:
            raise _fail(text, "grid", "n_points must be at least 2")
        if t_min is not None and not 0.0 <= t_min < T:
            raise _fail(text, "grid", f"t_min must lie in [0, T), got {t_min}")
    return LoadedProblem(prob, series, quad, n_points, t_min)


def load_problem(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
    return parse_problem(doc, text)


def default_grid(loaded):
    """Uniform grid on ``[t_min, T]``; ``t = 0`` is skipped when the solution is singular there."""
    prob = loaded.problem
    n = loaded.n_points
    if loaded.t_min is not None:
        return np.linspace(loaded.t_min, prob.T, n)
    if prob.gamma1 >= 1.0:
        return np.linspace(0.0, prob.T, n)
    return np.linspace(0.0, prob.T, n + 1)[1:]


def _r17(x):
    return float(f"{float(x):.17g}")


def _terms_doc(fs):
    return [
        {"kind": t.kind, "coeff": [_r17(c) for c in t.coeff],
         "exponent_or_frequency": _r17(t.exponent_or_frequency), "phase": _r17(t.phase)}
        for t in fs.terms
    ]


def dump_problem(loaded):
    """Serialize to JSON text; numbers keep 17 significant digits."""
    prob = loaded.problem
    d = prob.dim
    doc = {
        "mu": _r17(prob.mu), "nu": _r17(prob.nu), "h": _r17(prob.h), "T": _r17(prob.T),
        "A": {"d": d, "data": [_r17(x) for x in prob.a.reshape(-1)]},
        "Omega": {"d": d, "data": [_r17(x) for x in prob.omega.reshape(-1)]},
        "c1": [_r17(x) for x in prob.c1],
        "c2": [_r17(x) for x in prob.c2],
        "phi": _terms_doc(prob.phi),
        "f": _terms_doc(prob.f),
        "series": {"tol": _r17(loaded.series.tol), "k_hard_max": loaded.series.k_hard_max},
        "quadrature": {"qtol": _r17(loaded.quad.qtol)},
        "grid": {"n_points": loaded.n_points},
    }
    if loaded.t_min is not None:
        doc["grid"]["t_min"] = _r17(loaded.t_min)
    return json.dumps(doc, indent=2) + "\n"


def format_float(x):
    s = f"{float(x):.12g}"
    return "0" if s == "-0" else s


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(v if isinstance(v, str) else format_float(v) for v in row) for row in rows]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
