"""Finite weighted graphs and the mu-Laplacian.

A graph here is a finite vertex set with a positive measure mu on the
vertices and symmetric nonnegative edge weights.  Functions on the
vertices are plain float arrays aligned with the vertex order, and the
Laplacian is

    (Delta u)(x) = (1/mu_x) * sum_y w_xy * (u(y) - u(x)).

All operations are normalization-agnostic: nothing assumes unit weights,
unit measure, or any particular scaling.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AsymmetricWeights,
    DimensionMismatch,
    Disconnected,
    DuplicateEdge,
    NegativeWeight,
    NoEdges,
    NonFiniteValue,
    NonpositiveMeasure,
    ParseError,
    SelfLoop,
)

# A vertex function is just a 1-D float array with one entry per vertex,
# in the graph's vertex order.
VertexFunction = np.ndarray


@dataclass(frozen=True)
class Graph:
    """Vertex measure, dense weight matrix, and optional vertex labels.

    The arrays are frozen after construction; treat instances as
    immutable values.  Structural validity (symmetry, connectivity, ...)
    is checked by :func:`validate_graph`, not by the constructor, so that
    deliberately broken graphs can be built in tests.
    """

    mu: np.ndarray
    weights: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float)
        w = np.array(self.weights, dtype=float)
        if mu.ndim != 1 or mu.size == 0:
            raise DimensionMismatch("mu must be a nonempty 1-D array")
        n = mu.size
        if w.shape != (n, n):
            raise DimensionMismatch(
                "weights must be %d x %d, got %r" % (n, n, w.shape))
        labels = tuple(self.labels) if self.labels else tuple(
            "x%d" % (i + 1) for i in range(n))
        if len(labels) != n:
            raise DimensionMismatch("expected %d labels, got %d" % (n, len(labels)))
        mu.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "labels", labels)

    @property
    def vertex_count(self) -> int:
        return self.mu.size

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ParseError("unknown vertex id %r" % (label,)) from None

    @staticmethod
    def from_edges(mu, edges, labels=None) -> "Graph":
        """Build a graph from (i, j, w) triples with integer endpoints."""
        mu = np.asarray(mu, dtype=float)
        n = mu.size
        w = np.zeros((n, n))
        for i, j, wij in edges:
            w[i, j] = wij
            w[j, i] = wij
        return Graph(mu, w, tuple(labels) if labels else ())


def check_vertex_function(g: Graph, u, name: str = "u") -> np.ndarray:
    """Coerce u to a float array and check it matches g."""
    u = np.asarray(u, dtype=float)
    if u.shape != (g.vertex_count,):
        raise DimensionMismatch(
            "%s has shape %r, expected (%d,)" % (name, u.shape, g.vertex_count))
    if not np.all(np.isfinite(u)):
        bad = int(np.flatnonzero(~np.isfinite(u))[0])
        raise NonFiniteValue("%s is not finite at vertex %s" % (name, g.labels[bad]))
    return u


def validate_graph(g: Graph) -> None:
    """Check symmetry, positivity, absence of self-loops, connectivity.

    Raises a specific error naming the offending vertex or edge; returns
    None when the graph is valid.
    """
    n = g.vertex_count
    if not np.all(np.isfinite(g.mu)) or not np.all(np.isfinite(g.weights)):
        raise NonFiniteValue("graph data contains NaN or infinity")
    bad = np.flatnonzero(g.mu <= 0)
    if bad.size:
        i = int(bad[0])
        raise NonpositiveMeasure(
            "mu(%s) = %g must be positive" % (g.labels[i], g.mu[i]))
    if np.any(g.weights < 0):
        i, j = map(int, np.argwhere(g.weights < 0)[0])
        raise NegativeWeight(
            "w(%s,%s) = %g is negative" % (g.labels[i], g.labels[j], g.weights[i, j]))
    if not np.array_equal(g.weights, g.weights.T):
        i, j = map(int, np.argwhere(g.weights != g.weights.T)[0])
        raise AsymmetricWeights(
            "w(%s,%s) = %g but w(%s,%s) = %g"
            % (g.labels[i], g.labels[j], g.weights[i, j],
               g.labels[j], g.labels[i], g.weights[j, i]))
    diag = np.flatnonzero(np.diag(g.weights) != 0)
    if diag.size:
        i = int(diag[0])
        raise SelfLoop("self-loop at %s" % g.labels[i])
    # connectivity over positive-weight edges
    seen = np.zeros(n, dtype=bool)
    queue = deque([0])
    seen[0] = True
    while queue:
        x = queue.popleft()
        for y in np.flatnonzero(g.weights[x] > 0):
            if not seen[y]:
                seen[y] = True
                queue.append(int(y))
    if not seen.all():
        i = int(np.flatnonzero(~seen)[0])
        raise Disconnected("vertex %s is unreachable from %s"
                           % (g.labels[i], g.labels[0]))


def laplacian(g: Graph, u) -> np.ndarray:
    """Apply the mu-Laplacian to u."""
    u = check_vertex_function(g, u)
    deg = g.weights.sum(axis=1)
    return (g.weights @ u - deg * u) / g.mu


def laplacian_matrix(g: Graph) -> np.ndarray:
    """Dense matrix M with M @ u == laplacian(g, u)."""
    deg = g.weights.sum(axis=1)
    m = g.weights / g.mu[:, None]
    np.fill_diagonal(m, np.diag(m) - deg / g.mu)
    return m


def integrate(g: Graph, f) -> float:
    """Integral of f against mu: sum_x f(x) mu_x."""
    f = check_vertex_function(g, f, "f")
    return float(f @ g.mu)


def gradient_form(g: Graph, u, v) -> np.ndarray:
    """Pointwise carre du champ Gamma(u, v).

    Gamma(u,v)(x) = (1/2mu_x) sum_y w_xy (u(y)-u(x)) (v(y)-v(x)).
    With u == v this is |grad u|^2 / ... the squared gradient density, so
    integrate(g, gradient_form(g, u, u)) is the Dirichlet energy and the
    Green formula reads

        integrate(g, laplacian(g,u) * v) == -integrate(g, gradient_form(g,u,v)).
    """
    u = check_vertex_function(g, u)
    v = check_vertex_function(g, v, "v")
    du = u[None, :] - u[:, None]
    dv = v[None, :] - v[:, None]
    return (g.weights * du * dv).sum(axis=1) / (2.0 * g.mu)


def elliptic_constants(g: Graph) -> tuple[float, float, float]:
    """Constants (A, B, chain_factor) of the oscillation estimate.

    Over ordered adjacent pairs (y, x):

        A = max deg(x) / w_yx      with deg(x) = sum_z w_zx,
        B = max mu_x / w_yx,

    and chain_factor = 1 + A + ... + A^(n-2), accumulated term by term
    (the geometric closed form is singular at A = 1, which unit-weight
    graphs actually hit).  Any function u on the graph then satisfies

        max u - min u <= chain_factor * B * max(Delta u).
    """
    w = g.weights
    ys, xs = np.nonzero(w)
    if ys.size == 0:
        raise NoEdges("elliptic constants need at least one edge")
    deg = w.sum(axis=0)
    ratios_a = deg[xs] / w[ys, xs]
    ratios_b = g.mu[xs] / w[ys, xs]
    a = float(ratios_a.max())
    b = float(ratios_b.max())
    chain = 0.0
    term = 1.0
    for _ in range(g.vertex_count - 1):
        chain += term
        term *= a
    return a, b, chain


def largest_laplacian_eigenvalue(g: Graph) -> float:
    """Largest eigenvalue of -Delta (a real number >= 0).

    -Delta is self-adjoint in the mu-inner product; conjugating by
    diag(sqrt(mu)) turns it into an ordinary symmetric matrix whose
    spectrum we can take with eigvalsh.
    """
    m = laplacian_matrix(g)
    s = np.sqrt(g.mu)
    sym = (m * s[:, None]) / s[None, :]
    sym = -(sym + sym.T) / 2.0
    return float(np.linalg.eigvalsh(sym)[-1])


def shortest_path(g: Graph, a: int, b: int) -> list[int]:
    """Vertices of a shortest (fewest-edge) path from a to b, inclusive."""
    n = g.vertex_count
    if not (0 <= a < n and 0 <= b < n):
        raise DimensionMismatch("vertex index out of range")
    parent = {a: None}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        if x == b:
            path = []
            while x is not None:
                path.append(x)
                x = parent[x]
            return path[::-1]
        for y in np.flatnonzero(g.weights[x] > 0):
            y = int(y)
            if y not in parent:
                parent[y] = x
                queue.append(y)
    raise Disconnected("no path from %s to %s" % (g.labels[a], g.labels[b]))


# ---- JSON form -----------------------------------------------------------
#
# {"vertices": [{"id": "x1", "mu": 1.0}, ...],
#  "edges":    [{"u": "x1", "v": "x2", "w": 1.0}, ...]}
#
# Each unordered pair appears at most once and weights are positive.

def graph_from_dict(data: dict) -> Graph:
    if not isinstance(data, dict):
        raise ParseError("graph document must be a JSON object")
    try:
        vertices = data["vertices"]
        edge_list = data["edges"]
    except KeyError as e:
        raise ParseError("graph document is missing %s" % e) from None
    if not vertices:
        raise ParseError("graph needs at least one vertex")
    labels = []
    mu = []
    for entry in vertices:
        try:
            labels.append(str(entry["id"]))
            mu.append(float(entry["mu"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError("bad vertex entry %r: %s" % (entry, e)) from None
    if len(set(labels)) != len(labels):
        dup = next(l for l in labels if labels.count(l) > 1)
        raise ParseError("duplicate vertex id %r" % dup)
    index = {l: i for i, l in enumerate(labels)}
    n = len(labels)
    w = np.zeros((n, n))
    seen = set()
    for entry in edge_list:
        try:
            ua, va, wa = str(entry["u"]), str(entry["v"]), float(entry["w"])
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError("bad edge entry %r: %s" % (entry, e)) from None
        if ua not in index or va not in index:
            missing = ua if ua not in index else va
            raise ParseError("edge references unknown vertex %r" % missing)
        if ua == va:
            raise SelfLoop("self-loop at %s" % ua)
        key = frozenset((ua, va))
        if key in seen:
            raise DuplicateEdge("edge {%s, %s} listed more than once" % (ua, va))
        seen.add(key)
        if wa <= 0:
            raise ParseError("edge {%s, %s} has nonpositive weight %g" % (ua, va, wa))
        i, j = index[ua], index[va]
        w[i, j] = w[j, i] = wa
    g = Graph(np.array(mu), w, tuple(labels))
    validate_graph(g)
    return g


def load_graph(path) -> Graph:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ParseError(
                "%s: invalid JSON at line %d column %d: %s"
                % (path, e.lineno, e.colno, e.msg)) from None
    return graph_from_dict(data)
