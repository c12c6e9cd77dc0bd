"""Problem data and the residual / Jacobian / energy of the equation.

The unknown is a vertex function u solving

    -Delta u = h+ e^u + h- e^{-u} - c        (sinh-Gordon type)

which we handle through the residual map

    F(u) = -Delta u - h+ e^u - h- e^{-u} + c,

so solutions are exactly the zeros of F.  The Kazdan-Warner equation
-Delta u = h e^u - c is the special case h- == 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFiniteValue, Overflow, ParseError
from .graph import (
    Graph,
    check_vertex_function,
    gradient_form,
    graph_from_dict,
    integrate,
    laplacian_matrix,
)

# beyond this exp() leaves double range; residual evaluation refuses to go there
EXP_LIMIT = 700.0


def _frozen_coeff(g: Graph, values, name: str) -> np.ndarray:
    v = np.array(values, dtype=float)
    if v.shape != (g.vertex_count,):
        raise DimensionMismatch(
            "%s has shape %r, expected (%d,)" % (name, v.shape, g.vertex_count))
    if not np.all(np.isfinite(v)):
        raise NonFiniteValue("%s must be finite" % name)
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class Problem:
    """A sinh-Gordon instance: graph, coefficients h+ and h-, constant c."""

    graph: Graph
    h_plus: np.ndarray
    h_minus: np.ndarray
    c: float

    def __post_init__(self):
        object.__setattr__(self, "h_plus",
                           _frozen_coeff(self.graph, self.h_plus, "h_plus"))
        object.__setattr__(self, "h_minus",
                           _frozen_coeff(self.graph, self.h_minus, "h_minus"))
        c = float(self.c)
        if not np.isfinite(c):
            raise NonFiniteValue("c must be finite")
        object.__setattr__(self, "c", c)


@dataclass(frozen=True)
class KWProblem:
    """A Kazdan-Warner instance: -Delta u = h e^u - c."""

    graph: Graph
    h: np.ndarray
    c: float

    def __post_init__(self):
        object.__setattr__(self, "h", _frozen_coeff(self.graph, self.h, "h"))
        c = float(self.c)
        if not np.isfinite(c):
            raise NonFiniteValue("c must be finite")
        object.__setattr__(self, "c", c)

    def as_problem(self) -> Problem:
        """The same equation with h- == 0, for the shared solver path."""
        return Problem(self.graph, self.h, np.zeros(self.graph.vertex_count),
                       self.c)


def _guard_exp(u: np.ndarray) -> np.ndarray:
    big = np.abs(u) > EXP_LIMIT
    if big.any():
        i = int(np.flatnonzero(big)[0])
        raise Overflow("|u| = %g at vertex index %d exceeds %g"
                       % (abs(u[i]), i, EXP_LIMIT))
    return np.exp(u)


def residual(p: Problem, u) -> np.ndarray:
    """F(u) = -Delta u - h+ e^u - h- e^{-u} + c.  Zero exactly at solutions."""
    g = p.graph
    u = check_vertex_function(g, u)
    eu = _guard_exp(u)
    deg = g.weights.sum(axis=1)
    lap = (g.weights @ u - deg * u) / g.mu
    return -lap - p.h_plus * eu - p.h_minus / eu + p.c


def jacobian(p: Problem, u) -> np.ndarray:
    """Derivative of the residual:

        dF(u) = -Delta - diag(h+ e^u) + diag(h- e^{-u}).

    Self-adjoint in the mu-inner product, i.e. mu_x J_xy == mu_y J_yx.
    """
    u = check_vertex_function(p.graph, u)
    eu = _guard_exp(u)
    j = -laplacian_matrix(p.graph)
    np.fill_diagonal(j, np.diag(j) - p.h_plus * eu + p.h_minus / eu)
    return j


def energy(p: Problem, u) -> float:
    """J(u) = int ( |grad u|^2 / 2 - h+ e^u + h- e^{-u} + c u ) dmu.

    Critical points of J are exactly the zeros of the residual: the
    directional derivative of J at u along xi is integrate(F(u) * xi).
    """
    g = p.graph
    u = check_vertex_function(g, u)
    eu = _guard_exp(u)
    dens = 0.5 * gradient_form(g, u, u) - p.h_plus * eu + p.h_minus / eu + p.c * u
    return integrate(g, dens)


def kw_residual(p: KWProblem, u) -> np.ndarray:
    """K(u) = -Delta u - h e^u + c; agrees with residual() on as_problem()."""
    return residual(p.as_problem(), u)


# ---- sign classification --------------------------------------------------

TAG_ZERO_FUNCTION = "zero_function_present"
TAG_NONPOS_NONNEG = "hplus_nonpos_hminus_nonneg"
TAG_V0_MATCHED = "V0_matched"
TAG_CHANGES_NONNEG = "hplus_changes_hminus_nonneg"
TAG_NONPOS_CHANGES = "hplus_nonpos_hminus_changes"
TAG_MISMATCHED = "mismatched"


@dataclass(frozen=True)
class SignClass:
    """Which row family of the degree table an instance falls under.

    v_plus / v_minus are the index sets {h+ > 0} and {h- < 0}; v0 is
    their common value when they coincide (tag V0_matched), else None.
    """

    tag: str
    v_plus: tuple[int, ...]
    v_minus: tuple[int, ...]
    v0: tuple[int, ...] | None = None


def classify_signs(p: Problem) -> SignClass:
    """Route an instance to its degree-table family.

    Order matters: identically-zero coefficients are split off first,
    then the all-nonpositive/all-nonnegative family, then matched sign
    sets, then the two one-sided families, and whatever remains is the
    genuinely mismatched case.
    """
    hp, hm = p.h_plus, p.h_minus
    v_plus = tuple(int(i) for i in np.flatnonzero(hp > 0))
    v_minus = tuple(int(i) for i in np.flatnonzero(hm < 0))
    hp_zero = not hp.any()
    hm_zero = not hm.any()
    if hp_zero or hm_zero:
        tag = TAG_ZERO_FUNCTION
    elif hp.max() <= 0 and hm.min() >= 0:
        tag = TAG_NONPOS_NONNEG
    elif v_plus == v_minus:
        # both nonempty here: an empty side would have been caught above
        return SignClass(TAG_V0_MATCHED, v_plus, v_minus, v0=v_plus)
    elif hp.max() > 0 and hm.min() >= 0:
        tag = TAG_CHANGES_NONNEG
    elif hp.max() <= 0 and hm.min() < 0:
        tag = TAG_NONPOS_CHANGES
    else:
        tag = TAG_MISMATCHED
    return SignClass(tag, v_plus, v_minus)


# ---- JSON form -----------------------------------------------------------
#
# A problem file is a graph document plus coefficient maps keyed by
# vertex id and the constant c:
#
#   {"vertices": ..., "edges": ...,
#    "h_plus": {"x1": 1.0, "x2": 0.0}, "h_minus": {...}, "c": 1.0}
#
# or, for Kazdan-Warner, a single map "h" instead of h_plus/h_minus.
# Every vertex must appear in every map; there are no implicit zeros.
# An optional "solver" object carries SolverConfig overrides.

def _coeff_from_map(g: Graph, data, name: str) -> np.ndarray:
    if not isinstance(data, dict):
        raise ParseError("%s must be an object mapping vertex id to value" % name)
    unknown = set(data) - set(g.labels)
    if unknown:
        raise ParseError("%s mentions unknown vertex %r" % (name, sorted(unknown)[0]))
    out = np.empty(g.vertex_count)
    for i, label in enumerate(g.labels):
        if label not in data:
            raise ParseError("%s is missing vertex %r" % (name, label))
        try:
            out[i] = float(data[label])
        except (TypeError, ValueError):
            raise ParseError("%s[%r] is not a number" % (name, label)) from None
    return out


def problem_from_dict(data: dict):
    """Build a Problem or KWProblem (plus solver overrides) from JSON data.

    Returns (problem, solver_overrides) where solver_overrides is the raw
    "solver" object (possibly empty).
    """
    g = graph_from_dict(data)
    if "c" not in data:
        raise ParseError("problem document is missing \"c\"")
    try:
        c = float(data["c"])
    except (TypeError, ValueError):
        raise ParseError("\"c\" is not a number") from None
    overrides = data.get("solver", {})
    if not isinstance(overrides, dict):
        raise ParseError("\"solver\" must be an object")
    if "h" in data:
        if "h_plus" in data or "h_minus" in data:
            raise ParseError("give either \"h\" or h_plus/h_minus, not both")
        return KWProblem(g, _coeff_from_map(g, data["h"], "h"), c), overrides
    if "h_plus" not in data or "h_minus" not in data:
        raise ParseError("problem document needs h_plus and h_minus (or h)")
    hp = _coeff_from_map(g, data["h_plus"], "h_plus")
    hm = _coeff_from_map(g, data["h_minus"], "h_minus")
    return Problem(g, hp, hm, c), overrides


def load_problem(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ParseError(
                "%s: invalid JSON at line %d column %d: %s"
                % (path, e.lineno, e.colno, e.msg)) from None
    return problem_from_dict(data)
