"""Built-in instances on the two-vertex unit graph, with closed forms.

The graph has two vertices, unit measure on both, and a single unit
weight edge.  Writing u = (x, y), the system is

    x - y = h+(1) e^x + h-(1) e^{-x} - c
    y - x = h+(2) e^y + h-(2) e^{-y} - c

Four coefficient choices are wired in:

    case1   h+ = (1, 0),  h- = (-1, 0):  unique solution
            (arcsinh c, arcsinh c - c), degree -1
    case2   h+ = (1, 0),  h- = (0, -1):  never solvable, degree 0
    case3   h+ = (1, 1),  h- = (-1, 0):  unsolvable at c = 0, degree 0
    case4   h+ = (1, 1),  h- = (-1, -1): unique solution (s, s) with
            s = arcsinh(c/2), degree +1
"""

from __future__ import annotations

import math

import numpy as np

from .errors import UnknownExample
from .graph import Graph
from .model import KWProblem, Problem


def unit_pair_graph() -> Graph:
    return Graph.from_edges(np.array([1.0, 1.0]), [(0, 1, 1.0)])


_COEFFS = {
    "case1": ((1.0, 0.0), (-1.0, 0.0)),
    "case2": ((1.0, 0.0), (0.0, -1.0)),
    "case3": ((1.0, 1.0), (-1.0, 0.0)),
    "case4": ((1.0, 1.0), (-1.0, -1.0)),
}

CASE_NAMES = tuple(sorted(_COEFFS))


def two_vertex_case(name: str, c: float) -> Problem:
    try:
        hp, hm = _COEFFS[name]
    except KeyError:
        raise UnknownExample("no built-in case %r (have %s)"
                             % (name, ", ".join(CASE_NAMES))) from None
    return Problem(unit_pair_graph(), np.array(hp), np.array(hm), float(c))


def case_solutions(name: str, c: float) -> list[np.ndarray]:
    """All solutions of a built-in case, from the closed forms."""
    if name == "case1":
        x = math.asinh(c)
        return [np.array([x, x - c])]
    if name == "case2":
        return []
    if name == "case3":
        if c == 0:
            return []
        raise UnknownExample("case3 has a closed form only at c = 0")
    if name == "case4":
        s = math.asinh(c / 2.0)
        return [np.array([s, s])]
    raise UnknownExample("no built-in case %r" % (name,))


def case_degree(name: str) -> int:
    return {"case1": -1, "case2": 0, "case3": 0, "case4": 1}[name]


# A Kazdan-Warner instance for each row of the degree table, on the same
# two-vertex graph.  (c, h, expected degree); the last three hit the
# zero rows.
KW_ROW_INSTANCES = [
    ("c>0, max h>0", 1.0, (1.0, -1.0), -1),
    ("c=0, mean h<0<max h", 0.0, (1.0, -3.0), -1),
    ("c<0, h<=0 nonconstant", -1.0, (-1.0, -2.0), 1),
    ("c>0, h<=0", 1.0, (-1.0, -2.0), 0),
    ("c=0, mean h>=0", 0.0, (2.0, -1.0), 0),
    ("c<0, h changes sign", -2.0, (1.0, -3.0), 0),
    ("c<0, h changes sign, mean>0", -1.0, (2.0, -1.0), 0),
]


def kw_row_problem(c: float, h) -> KWProblem:
    return KWProblem(unit_pair_graph(), np.array(h), float(c))
