"""Numeric checks of the inequalities the analysis leans on.

Each check takes concrete data (a graph and a function, or a problem and
a solution), evaluates the two sides of an inequality, and reports the
slack.  They exist to catch sign conventions and typos: if one of these
ever fails on valid data, something upstream is wrong.

Margins are the raw slack min(rhs - lhs) before any tolerance; a tight
witness has margin ~ 0, a failure has margin below the check's small
negative slack allowance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingleVertex
from .graph import (
    Graph,
    check_vertex_function,
    elliptic_constants,
    gradient_form,
    integrate,
    laplacian,
)
from .model import Problem

KATO_SLACK = 1e-10
HARNACK_SLACK = 1e-10
ELLIPTIC_SLACK = 1e-9
GREEN_SLACK = 1e-9


@dataclass
class CheckOutcome:
    name: str
    passed: bool
    margin: float
    witness: tuple | None = None

    def to_dict(self) -> dict:
        w = None
        if self.witness is not None:
            vertex, values = self.witness
            w = {"vertex": vertex,
                 "values": {k: float(v) for k, v in values.items()}}
        return {"name": self.name, "passed": self.passed,
                "margin": self.margin, "witness": w}


def check_max_principle(g: Graph, u) -> CheckOutcome:
    """Non-constant u must have a maximum vertex with Delta u < 0.

    Constant functions pass vacuously with infinite margin.
    """
    u = check_vertex_function(g, u)
    if u.max() - u.min() <= 1e-12:
        return CheckOutcome("max_principle", True, float("inf"))
    lap = laplacian(g, u)
    at_max = np.flatnonzero(u == u.max())
    best = float(-lap[at_max].max())  # largest -Delta u among maximizers
    if best > 0:
        return CheckOutcome("max_principle", True, best)
    i = int(at_max[0])
    return CheckOutcome("max_principle", False, best,
                        (g.labels[i], {"u": u[i], "lap_u": lap[i]}))


def check_kato(g: Graph, u) -> CheckOutcome:
    """Kato inequality: Delta u+ >= 1_{u > 0} Delta u pointwise."""
    u = check_vertex_function(g, u)
    lhs = laplacian(g, np.maximum(u, 0.0))
    rhs = np.where(u > 0, laplacian(g, u), 0.0)
    slack = lhs - rhs
    margin = float(slack.min())
    if margin >= -KATO_SLACK:
        return CheckOutcome("kato", True, margin)
    i = int(np.argmin(slack))
    return CheckOutcome("kato", False, margin,
                        (g.labels[i], {"lhs": lhs[i], "rhs": rhs[i]}))


def check_harnack(g: Graph, u) -> CheckOutcome:
    """Edge-wise Harnack bounds on L = max(u) - u.

    For every edge y ~ x:

        L(y) <= (mu_x / w_xy) * ( (deg_x / mu_x) L(x) - Delta u(x) )

    and, when max u + min u >= 0, additionally at every vertex x

        -Delta u(x) <= (deg_x / mu_x) * (2 u(x) + L(x)).
    """
    u = check_vertex_function(g, u)
    lap = laplacian(g, u)
    big_l = u.max() - u
    deg = g.weights.sum(axis=1)
    margin = float("inf")
    witness = None
    ys, xs = np.nonzero(g.weights)
    for y, x in zip(ys, xs):
        w = g.weights[y, x]
        rhs = (g.mu[x] / w) * ((deg[x] / g.mu[x]) * big_l[x] - lap[x])
        slack = rhs - big_l[y]
        if slack < margin:
            margin = float(slack)
            witness = (g.labels[int(y)],
                       {"L_y": big_l[y], "bound": rhs})
    if u.max() + u.min() >= 0:
        for x in range(g.vertex_count):
            rhs = (deg[x] / g.mu[x]) * (2.0 * u[x] + big_l[x])
            slack = rhs - (-lap[x])
            if slack < margin:
                margin = float(slack)
                witness = (g.labels[x],
                           {"neg_lap": -lap[x], "bound": rhs})
    passed = margin >= -HARNACK_SLACK
    return CheckOutcome("harnack", passed, margin,
                        None if passed else witness)


def check_elliptic(g: Graph, u) -> CheckOutcome:
    """Oscillation bound: max u - min u <= chain_factor * B * max(Delta u)."""
    if g.vertex_count < 2:
        raise SingleVertex("oscillation bound needs at least two vertices")
    u = check_vertex_function(g, u)
    _, b, chain = elliptic_constants(g)
    osc = float(u.max() - u.min())
    bound = chain * b * float(laplacian(g, u).max())
    margin = bound - osc
    if margin >= -ELLIPTIC_SLACK:
        return CheckOutcome("elliptic", True, margin)
    return CheckOutcome("elliptic", False, margin,
                        (None, {"osc": osc, "bound": bound}))


def check_green(g: Graph, u, v) -> CheckOutcome:
    """Green formula: int (Delta u) v dmu == -int Gamma(u, v) dmu.

    The margin is the unused part of the relative tolerance, so it is
    positive on pass like every other check.
    """
    u = check_vertex_function(g, u)
    v = check_vertex_function(g, v, "v")
    left = integrate(g, laplacian(g, u) * v)
    right = -integrate(g, gradient_form(g, u, v))
    scale = 1.0 + abs(right)
    margin = float(GREEN_SLACK * scale - abs(left - right))
    passed = margin >= 0
    return CheckOutcome("green", passed, margin,
                        None if passed else (None, {"lhs": left, "rhs": right}))


def check_solution_bound_heuristic(p: Problem, sol_u, k: float) -> CheckOutcome:
    """Screen the hypotheses under which solutions admit a uniform bound.

    (H1)  1/K <= max|h+|, max|h-| <= K and |c| <= K;
    (H2)  h+^2 >= h+/K and h-^2 >= -h-/K entrywise
          (every nonzero coefficient entry has magnitude at least 1/K).

    passed reflects the hypotheses only; the reported margin is the
    normalized solution size ||u||_inf / K of the solution being
    screened, which stays O(1) across instances satisfying (H1)-(H2).
    """
    sol_u = check_vertex_function(p.graph, sol_u, "sol_u")
    hp, hm = p.h_plus, p.h_minus
    inv = 1.0 / k
    witness = None
    ok = True
    for name, arr, bound in (("h_plus", hp, hp * inv), ("h_minus", hm, -hm * inv)):
        bad = np.flatnonzero(arr ** 2 < bound)
        if bad.size:
            i = int(bad[0])
            ok = False
            witness = (p.graph.labels[i],
                       {"coeff": arr[i], "coeff_sq": arr[i] ** 2,
                        "required": bound[i]})
            break
        h1 = inv <= np.abs(arr).max() <= k
        if not h1:
            ok = False
            witness = (name, {"max_abs": np.abs(arr).max(), "K": k})
            break
    if ok and abs(p.c) > k:
        ok = False
        witness = ("c", {"c": p.c, "K": k})
    return CheckOutcome("solution_bound_heuristic", ok,
                        float(np.abs(sol_u).max() / k), witness)


# ---- randomized suite --------------------------------------------------------

def random_connected_graph(rng, n_min=2, n_max=10,
                           scale=(0.1, 10.0)) -> Graph:
    """Random connected graph: a random tree plus extra random edges.

    Measures and weights are uniform in `scale`.  The default spans two
    orders of magnitude, which is what the inequality checks want; for
    enumeration-based suites a narrower scale like (0.5, 2.0) keeps
    every solution well inside the search radii (an edge with mu/omega
    around 100 pushes solution entries past 100, where an empty
    enumeration would look stable without being exhaustive).
    """
    lo, hi = scale
    n = int(rng.integers(n_min, n_max + 1))
    mu = rng.uniform(lo, hi, n)
    edges = []
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.append((i, j, float(rng.uniform(lo, hi))))
    present = {frozenset((i, j)) for i, j, _ in edges}
    for i in range(n):
        for j in range(i + 1, n):
            if frozenset((i, j)) not in present and rng.random() < 0.25:
                edges.append((i, j, float(rng.uniform(lo, hi))))
    return Graph.from_edges(mu, edges)


CHECK_NAMES = ("max_principle", "kato", "harnack", "elliptic", "green")


def run_random_suite(trials: int = 200, seed: int = 0,
                     graph: Graph | None = None) -> list[CheckOutcome]:
    """Run every check `trials` times on random data; aggregate per check.

    With a graph supplied, the random draws are the functions only.
    Each aggregated outcome carries the worst margin seen and, on
    failure, the first violating witness.
    """
    rng = np.random.default_rng(seed)
    worst = {name: CheckOutcome(name, True, float("inf")) for name in CHECK_NAMES}

    def fold(out):
        prev = worst[out.name]
        if not out.passed and prev.passed:
            worst[out.name] = out
        elif out.passed == prev.passed and out.margin < prev.margin:
            out.witness = out.witness if not out.passed else prev.witness
            worst[out.name] = out

    for _ in range(trials):
        g = graph if graph is not None else random_connected_graph(rng)
        u = rng.uniform(-5.0, 5.0, g.vertex_count)
        v = rng.uniform(-5.0, 5.0, g.vertex_count)
        fold(check_max_principle(g, u))
        fold(check_kato(g, u))
        fold(check_harnack(g, u))
        if g.vertex_count >= 2:
            fold(check_elliptic(g, u))
        fold(check_green(g, u, v))
    return [worst[name] for name in CHECK_NAMES]
