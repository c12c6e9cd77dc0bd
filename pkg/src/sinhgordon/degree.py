"""Brouwer degree of the residual map, two ways.

degree_formula evaluates the closed-form case table: the degree of F on
a large ball depends only on the sign patterns of h+ and h-, the
constant c, and (in one family) the parity of #{h+ > 0}.  kw_degree_formula
is the analogous table for the Kazdan-Warner equation.

degree_numeric recomputes the same number as a Morse sum: enumerate all
roots inside a ball whose radius has been validated by doubling, then
add up the signs of the Jacobian determinants.  A report carries both
answers and whether they agree; the whole point is that they must.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BothZero, EmptyV0, SingularSystem, ZeroH
from .graph import Graph, integrate, laplacian_matrix
from .model import KWProblem, Problem, TAG_ZERO_FUNCTION, classify_signs
from .solver import EnumerationResult, SolverConfig, multistart

RADII = (8.0, 16.0, 32.0, 64.0, 128.0)


def degree_formula(p: Problem) -> int:
    """Closed-form degree from the sign-pattern case table.

    Routing (the branches are exhaustive and mutually exclusive):

      h+ <= 0, h- >= 0 (either may vanish identically):
          1 if h+ dips negative and h- rises positive,
          1 if c < 0 and h- == 0, 1 if c > 0 and h+ == 0, else 0.
      h+ somewhere positive, h- >= 0:
          -1 if h- == 0 and (c > 0, or c = 0 with int h+ dmu < 0), else 0.
      h+ <= 0, h- somewhere negative (mirror of the previous family):
          -1 if h+ == 0 and (c < 0, or c = 0 with int h- dmu > 0), else 0.
      both signs present:
          (-1)^#V0 if {h+ > 0} == {h- < 0} = V0, else 0.
    """
    hp, hm = p.h_plus, p.h_minus
    g = p.graph
    if not hp.any() and not hm.any():
        raise BothZero("h+ and h- vanish identically; the degree is undefined")
    hp_zero = not hp.any()
    hm_zero = not hm.any()
    if hp.max() <= 0 and hm.min() >= 0:
        if hp.min() < 0 and hm.max() > 0:
            return 1
        if p.c < 0 and hm_zero:
            return 1
        if p.c > 0 and hp_zero:
            return 1
        return 0
    if hp.max() > 0 and hm.min() >= 0:
        if hm_zero and p.c > 0:
            return -1
        if hm_zero and p.c == 0 and integrate(g, hp) < 0:
            return -1
        return 0
    if hp.max() <= 0 and hm.min() < 0:
        if hp_zero and p.c < 0:
            return -1
        if hp_zero and p.c == 0 and integrate(g, hm) > 0:
            return -1
        return 0
    v_plus = np.flatnonzero(hp > 0)
    v_minus = np.flatnonzero(hm < 0)
    if v_plus.size == v_minus.size and np.array_equal(v_plus, v_minus):
        return -1 if (v_plus.size % 2) else 1
    return 0


def kw_degree_formula(p: KWProblem) -> int:
    """Degree table for -Delta u = h e^u - c (h not identically zero).

        -1  if c > 0 and max h > 0
        -1  if c = 0 and mean(h) < 0 < max h
        +1  if c < 0 and h <= 0 (somewhere strictly; note below)
         0  otherwise

    The mean is int h dmu / int 1 dmu.  The +1 row is stated elsewhere
    as "min h < max h <= 0", which excludes negative constants; but a
    constant h < 0 with c < 0 has the unique nondegenerate solution
    u = ln(-c/|h|)... with Jacobian -Delta - c > 0, hence degree +1, so
    the row here keys on h <= 0 with min h < 0 (for h != 0 that is just
    h <= 0 everywhere).
    """
    h = p.h
    if not h.any():
        raise ZeroH("h vanishes identically; the degree is undefined")
    if p.c > 0:
        return -1 if h.max() > 0 else 0
    if p.c == 0:
        mean = integrate(p.graph, h) / integrate(p.graph, np.ones(h.size))
        return -1 if (mean < 0 and h.max() > 0) else 0
    # c < 0
    if h.min() < 0 and h.max() <= 0:
        return 1
    return 0


# ---- numeric degree ---------------------------------------------------------

@dataclass
class DegreeReport:
    """Both degree computations side by side, plus how they were obtained.

    numeric_degree is None when indeterminate (radius never stabilized,
    or a singular root could not be perturbed away).  agreement is one
    of "match", "mismatch", "formula_only", "numeric_only".
    """

    formula_degree: int | None
    numeric_degree: int | None
    solutions: list
    radius: float
    radius_stable: bool
    agreement: str
    notes: list = field(default_factory=list)
    seed: int = 42
    starts: int = 0
    failures: int = 0

    def to_dict(self, labels=None) -> dict:
        sols = []
        for s in self.solutions:
            u = ({lab: float(v) for lab, v in zip(labels, s.u)}
                 if labels is not None else [float(v) for v in s.u])
            sols.append({
                "u": u,
                "residual_inf_norm": s.residual_inf_norm,
                "det_sign": s.det_sign,
                "iterations": s.iterations,
            })
        return {
            "formula_degree": self.formula_degree,
            "numeric_degree": self.numeric_degree,
            "solutions": sols,
            "radius": self.radius,
            "radius_stable": self.radius_stable,
            "agreement": self.agreement,
            "notes": list(self.notes),
            "solver": {"seed": self.seed, "starts": self.starts,
                       "failures": self.failures},
        }


def _sets_match(a, b, tol: float) -> bool:
    if len(a) != len(b):
        return False
    used = [False] * len(b)
    for s in a:
        hit = False
        for j, t in enumerate(b):
            if not used[j] and np.abs(s.u - t.u).max() <= tol:
                used[j] = True
                hit = True
                break
        if not hit:
            return False
    return True


def _radius_sweep(p: Problem, cfg: SolverConfig, seed: int, n_starts: int):
    """Double the ball until the root set stops changing.

    Returns (radius, stable, EnumerationResult at that radius).  Stable
    means the set found at the returned radius was reproduced at twice
    the radius and every root keeps an interior margin of radius/2.
    """
    prev: EnumerationResult | None = None
    prev_r = 0.0
    for r in RADII:
        res = multistart(p, r, n_starts, cfg, seed)
        if res.degenerate:
            return r, True, res
        if prev is not None:
            margin = all(np.abs(s.u).max() <= prev_r / 2.0 for s in prev.solutions)
            if margin and _sets_match(prev.solutions, res.solutions, cfg.dedup_tol):
                return prev_r, True, prev
        prev, prev_r = res, r
    return RADII[-1], False, prev


def select_radius(p: Problem, cfg: SolverConfig | None = None, seed: int = 42,
                  n_starts: int = 200) -> tuple[float, bool]:
    """Search radius for enumeration, validated by doubling."""
    cfg = cfg or SolverConfig()
    r, stable, _ = _radius_sweep(p, cfg, seed, n_starts)
    return r, stable


def _c_on_table_boundary(p: Problem) -> bool:
    # The case table reads the sign of c only when one of the coefficient
    # functions vanishes identically; there c = 0 sits on a row boundary
    # and nudging c would change the formula's answer.
    return (p.c == 0.0
            and classify_signs(p).tag == TAG_ZERO_FUNCTION)


def degree_numeric(p: Problem | KWProblem, cfg: SolverConfig | None = None,
                   seed: int = 42, n_starts: int = 200) -> DegreeReport:
    """Morse-sum degree with cross-check against the closed form.

    Enumerates roots at a doubling-validated radius and sums the signs
    of det dF.  A root with a numerically singular Jacobian triggers a
    Morse perturbation: c is nudged by the smallest of +-1e-6, +-1e-5,
    +-1e-4 that renders every root nondegenerate, and the sum is taken
    over the perturbed roots (the degree is stable under small c
    shifts as long as c = 0 is not a table boundary, where the report
    declares the sum indeterminate instead).
    """
    cfg = cfg or SolverConfig()
    if isinstance(p, KWProblem):
        formula = kw_degree_formula(p)
        prob = p.as_problem()
    else:
        if not p.h_plus.any() and not p.h_minus.any():
            raise BothZero("h+ and h- vanish identically")
        formula = degree_formula(p)
        prob = p
    notes: list[str] = []
    radius, stable, res = _radius_sweep(prob, cfg, seed, n_starts)
    if res.degenerate:
        notes.append("degenerate family h+ = h- = 0: representative solution only")
    if (prob.h_plus.max() <= 0 and prob.h_minus.min() >= 0
            and (prob.h_plus.any() or prob.h_minus.any())):
        notes.append("V0 = {} here, where the matched-set table overlaps the "
                     "one-sided rows; routed through the one-sided rows")

    if not stable:
        return DegreeReport(formula, None, res.solutions, radius, False,
                            "formula_only",
                            notes + ["radius sweep did not stabilize"],
                            seed, res.attempted, res.failed)

    sols = res.solutions
    if any(s.det_sign == 0 for s in sols) and not res.degenerate:
        if _c_on_table_boundary(prob):
            notes.append("singular root at the c = 0 table boundary; "
                         "numeric degree left indeterminate")
            return DegreeReport(formula, None, sols, radius, True,
                                "formula_only", notes,
                                seed, res.attempted, res.failed)
        fixed = None
        for eps in (1e-6, 1e-5, 1e-4):
            for signed in (eps, -eps):
                pert = replace(prob, c=prob.c + signed)
                res2 = multistart(pert, radius, n_starts, cfg, seed)
                if res2.solutions and all(s.det_sign != 0 for s in res2.solutions):
                    fixed = (signed, res2)
                    break
                if not res2.solutions:
                    fixed = (signed, res2)
                    break
            if fixed:
                break
        if fixed is None:
            notes.append("Morse perturbation failed; numeric degree indeterminate")
            return DegreeReport(formula, None, sols, radius, True,
                                "formula_only", notes,
                                seed, res.attempted, res.failed)
        signed, res = fixed
        sols = res.solutions
        notes.append("Morse perturbation applied: c shifted by %+g" % signed)

    numeric = int(sum(s.det_sign for s in sols))
    agreement = "match" if numeric == formula else "mismatch"
    return DegreeReport(formula, numeric, sols, radius, True, agreement,
                        notes, seed, res.attempted, res.failed)


# ---- boundary reduction ------------------------------------------------------

@dataclass(frozen=True)
class V0Decomposition:
    """A vertex split (v0, rest) with v0 nonempty, both index tuples."""

    v0: tuple[int, ...]
    rest: tuple[int, ...]

    @staticmethod
    def from_subset(g: Graph, v0) -> "V0Decomposition":
        v0 = tuple(int(i) for i in v0)
        if not v0:
            raise EmptyV0("v0 must be nonempty")
        if len(set(v0)) != len(v0):
            raise EmptyV0("v0 has repeated vertices")
        n = g.vertex_count
        for i in v0:
            if not 0 <= i < n:
                raise EmptyV0("vertex index %d out of range" % i)
        rest = tuple(i for i in range(n) if i not in set(v0))
        return V0Decomposition(v0, rest)


def harmonic_extension(g: Graph, v0, phi) -> np.ndarray:
    """The function equal to phi on v0 and mu-harmonic off it.

    Solves Delta u = 0 at every vertex outside v0 with u = phi on v0.
    phi is aligned with the order of v0.
    """
    dec = V0Decomposition.from_subset(g, v0)
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (len(dec.v0),):
        raise EmptyV0("phi has shape %r, expected (%d,)" % (phi.shape, len(dec.v0)))
    n = g.vertex_count
    m = laplacian_matrix(g)
    a = np.zeros((n, n))
    b = np.zeros(n)
    for i in dec.rest:
        a[i] = m[i]
    for i, val in zip(dec.v0, phi):
        a[i, i] = 1.0
        b[i] = val
    try:
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        raise SingularSystem("harmonic extension system is singular") from None


def schur_operator(g: Graph, v0) -> np.ndarray:
    """Matrix of phi -> (Delta P phi) restricted to v0.

    P phi is the harmonic extension; the result is the Schur complement
    of the Laplacian on the complement of v0.  Row sums vanish (constants
    extend to constants, which are harmonic) and -L is positive
    semidefinite in the mu|_{v0} inner product.
    """
    dec = V0Decomposition.from_subset(g, v0)
    m = laplacian_matrix(g)
    bb = m[np.ix_(dec.v0, dec.v0)]
    if not dec.rest:
        return bb
    bi = m[np.ix_(dec.v0, dec.rest)]
    ib = m[np.ix_(dec.rest, dec.v0)]
    ii = m[np.ix_(dec.rest, dec.rest)]
    try:
        return bb - bi @ np.linalg.solve(ii, ib)
    except np.linalg.LinAlgError:
        raise SingularSystem("interior block is singular") from None
