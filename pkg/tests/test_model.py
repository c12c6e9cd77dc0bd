"""Residual map, Jacobian, energy, sign classification, problem JSON."""

import numpy as np
import pytest

from sinhgordon.errors import (
    DimensionMismatch, NonFiniteValue, Overflow, ParseError,
)
from sinhgordon.graph import Graph, integrate, laplacian_matrix
from sinhgordon.model import (
    KWProblem, Problem, TAG_CHANGES_NONNEG, TAG_MISMATCHED,
    TAG_NONPOS_CHANGES, TAG_NONPOS_NONNEG, TAG_V0_MATCHED,
    TAG_ZERO_FUNCTION, classify_signs, energy, jacobian, kw_residual,
    load_problem, problem_from_dict, residual,
)

FD_TOL = 1e-6
FD_STEP = 1e-5
EXACT = 1e-14


def pair(hp, hm, c):
    g = Graph.from_edges(np.ones(2), [(0, 1, 1.0)])
    return Problem(g, np.array(hp, dtype=float), np.array(hm, dtype=float),
                   float(c))


def random_problem(rng, n):
    mu = rng.uniform(0.1, 10.0, n)
    w = np.zeros((n, n))
    order = rng.permutation(n)
    for a, b in zip(order, order[1:]):
        w[a, b] = w[b, a] = rng.uniform(0.1, 10.0)
    g = Graph(mu, w)
    return Problem(g, rng.uniform(-2, 2, n), rng.uniform(-2, 2, n),
                   float(rng.uniform(-3, 3)))


# ---- residual -----------------------------------------------------------------

def test_residual_matched_pair_zero_at_origin():
    p = pair((1, 1), (-1, -1), 0.0)
    assert np.abs(residual(p, np.zeros(2))).max() <= EXACT


def test_residual_single_vertex_pair_zero_at_origin():
    p = pair((1, 0), (-1, 0), 0.0)
    assert np.abs(residual(p, np.zeros(2))).max() <= EXACT


def test_residual_no_coefficients_constant_input():
    p = pair((0, 0), (0, 0), 0.0)
    assert np.abs(residual(p, np.full(2, 3.7))).max() <= EXACT


def test_residual_overflow_guard():
    p = pair((1, 1), (-1, -1), 0.0)
    with pytest.raises(Overflow):
        residual(p, np.array([800.0, 0.0]))


def test_residual_dimension_mismatch():
    p = pair((1, 1), (-1, -1), 0.0)
    with pytest.raises(DimensionMismatch):
        residual(p, np.zeros(3))


def test_problem_rejects_nonfinite_c():
    g = Graph.from_edges(np.ones(2), [(0, 1, 1.0)])
    with pytest.raises(NonFiniteValue):
        Problem(g, np.ones(2), np.ones(2), float("nan"))


# ---- Jacobian -------------------------------------------------------------------

def test_jacobian_constant_coefficients_at_zero():
    p = pair((-1, -1), (1, 1), 0.0)
    expect = -laplacian_matrix(p.graph) + 2.0 * np.eye(2)
    assert np.allclose(jacobian(p, np.zeros(2)), expect, atol=EXACT)
    assert np.allclose(expect, [[3.0, -1.0], [-1.0, 3.0]], atol=EXACT)


def test_jacobian_zero_coefficients_is_negative_laplacian():
    p = pair((0, 0), (0, 0), 1.0)
    u = np.array([0.3, -1.2])
    assert np.allclose(jacobian(p, u), -laplacian_matrix(p.graph), atol=EXACT)


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(10)
    for _ in range(20):
        p = random_problem(rng, int(rng.integers(2, 9)))
        n = p.graph.vertex_count
        u = rng.uniform(-3, 3, n)
        jac = jacobian(p, u)
        fd = np.empty_like(jac)
        for x in range(n):
            e = np.zeros(n)
            e[x] = FD_STEP
            fd[:, x] = (residual(p, u + e) - residual(p, u - e)) / (2 * FD_STEP)
        assert np.abs(jac - fd).max() <= FD_TOL


def test_jacobian_mu_selfadjoint():
    rng = np.random.default_rng(11)
    for _ in range(10):
        p = random_problem(rng, int(rng.integers(2, 9)))
        u = rng.uniform(-3, 3, p.graph.vertex_count)
        weighted = p.graph.mu[:, None] * jacobian(p, u)
        assert np.abs(weighted - weighted.T).max() <= 1e-12


# ---- energy -----------------------------------------------------------------------

def test_energy_zero_function_cancellation():
    p = pair((1, 1), (1, 1), 0.0)
    assert energy(p, np.zeros(2)) == pytest.approx(0.0, abs=EXACT)


def test_energy_zero_function_general():
    rng = np.random.default_rng(12)
    for _ in range(10):
        p = random_problem(rng, int(rng.integers(2, 7)))
        want = integrate(p.graph, -p.h_plus + p.h_minus)
        assert energy(p, np.zeros(p.graph.vertex_count)) == pytest.approx(
            want, abs=1e-12)


def test_energy_gradient_is_residual():
    rng = np.random.default_rng(13)
    for _ in range(20):
        p = random_problem(rng, int(rng.integers(2, 9)))
        n = p.graph.vertex_count
        u = rng.uniform(-3, 3, n)
        xi = rng.uniform(-1, 1, n)
        fd = (energy(p, u + FD_STEP * xi) - energy(p, u - FD_STEP * xi))
        fd /= 2 * FD_STEP
        want = integrate(p.graph, residual(p, u) * xi)
        assert abs(fd - want) <= FD_TOL * (1.0 + abs(want))


def test_energy_gradient_second_order():
    # central differences converge at second order, so shrinking the
    # step by 10 should shrink the error by roughly 100
    rng = np.random.default_rng(14)
    p = random_problem(rng, 5)
    u = rng.uniform(-2, 2, 5)
    xi = rng.uniform(-1, 1, 5)
    want = integrate(p.graph, residual(p, u) * xi)
    errs = []
    for t in (1e-3, 1e-4):
        fd = (energy(p, u + t * xi) - energy(p, u - t * xi)) / (2 * t)
        errs.append(abs(fd - want))
    assert errs[1] <= errs[0] / 10.0 + 1e-12


def test_energy_overflow_guard():
    p = pair((1, 1), (-1, -1), 0.0)
    with pytest.raises(Overflow):
        energy(p, np.array([0.0, 750.0]))


# ---- Kazdan-Warner form -------------------------------------------------------------

def test_kw_residual_log_solutions():
    g = Graph.from_edges(np.ones(2), [(0, 1, 1.0)])
    p = KWProblem(g, np.full(2, -1.0), -2.0)
    assert np.abs(kw_residual(p, np.full(2, np.log(2.0)))).max() <= EXACT
    p = KWProblem(g, np.full(2, 1.0), 0.1)
    assert np.abs(kw_residual(p, np.full(2, np.log(0.1)))).max() <= 1e-12


def test_kw_residual_zero_h_constant_input():
    g = Graph.from_edges(np.ones(2), [(0, 1, 1.0)])
    p = KWProblem(g, np.zeros(2), 0.0)
    assert np.abs(kw_residual(p, np.full(2, 1.3))).max() <= EXACT


def test_kw_matches_general_form_exactly():
    rng = np.random.default_rng(15)
    for _ in range(10):
        base = random_problem(rng, int(rng.integers(2, 7)))
        kwp = KWProblem(base.graph, base.h_plus, base.c)
        gen = Problem(base.graph, base.h_plus,
                      np.zeros(base.graph.vertex_count), base.c)
        u = rng.uniform(-3, 3, base.graph.vertex_count)
        assert np.array_equal(kw_residual(kwp, u), residual(gen, u))


def test_kw_as_problem():
    g = Graph.from_edges(np.ones(2), [(0, 1, 1.0)])
    p = KWProblem(g, np.array([2.0, -1.0]), 0.5).as_problem()
    assert np.array_equal(p.h_plus, [2.0, -1.0])
    assert np.array_equal(p.h_minus, [0.0, 0.0])
    assert p.c == 0.5


# ---- sign classification -------------------------------------------------------------

def test_classify_matched_single_vertex():
    sc = classify_signs(pair((1, 0), (-1, 0), 1.0))
    assert sc.tag == TAG_V0_MATCHED
    assert sc.v0 == (0,)


def test_classify_matched_full_set():
    sc = classify_signs(pair((1, 1), (-1, -1), 0.0))
    assert sc.tag == TAG_V0_MATCHED
    assert sc.v0 == (0, 1)


def test_classify_mismatched_disjoint_supports():
    assert classify_signs(pair((1, 0), (0, -1), 1.0)).tag == TAG_MISMATCHED


def test_classify_mismatched_nested_supports():
    assert classify_signs(pair((1, 1), (-1, 0), 0.0)).tag == TAG_MISMATCHED


def test_classify_nonpos_nonneg():
    assert classify_signs(pair((-1, -1), (1, 1), 2.0)).tag == TAG_NONPOS_NONNEG
    assert classify_signs(pair((-1, 0), (1, 0), -2.0)).tag == TAG_NONPOS_NONNEG


def test_classify_zero_function_sides():
    assert classify_signs(pair((0, 0), (-1, 0), 1.0)).tag == TAG_ZERO_FUNCTION
    assert classify_signs(pair((1, 0), (0, 0), 1.0)).tag == TAG_ZERO_FUNCTION
    assert classify_signs(pair((0, 0), (0, 0), 1.0)).tag == TAG_ZERO_FUNCTION


def test_classify_one_sided_families():
    assert classify_signs(pair((1, -1), (1, 0), 0.0)).tag == TAG_CHANGES_NONNEG
    assert classify_signs(pair((-1, 0), (1, -1), 0.0)).tag == TAG_NONPOS_CHANGES


def test_classify_scale_invariant():
    rng = np.random.default_rng(16)
    for _ in range(25):
        p = random_problem(rng, int(rng.integers(2, 7)))
        base = classify_signs(p)
        lam = float(rng.uniform(0.01, 100.0))
        scaled = Problem(p.graph, lam * p.h_plus, lam * p.h_minus, p.c)
        got = classify_signs(scaled)
        assert got.tag == base.tag
        assert got.v0 == base.v0


# ---- JSON form -----------------------------------------------------------------------

def base_doc(**extra):
    doc = {
        "vertices": [{"id": "x1", "mu": 1.0}, {"id": "x2", "mu": 1.0}],
        "edges": [{"u": "x1", "v": "x2", "w": 1.0}],
        "c": 1.0,
    }
    doc.update(extra)
    return doc


def test_problem_from_dict_general():
    doc = base_doc(h_plus={"x1": 1.0, "x2": 0.0},
                   h_minus={"x1": -1.0, "x2": 0.0})
    prob, overrides = problem_from_dict(doc)
    assert isinstance(prob, Problem)
    assert np.array_equal(prob.h_plus, [1.0, 0.0])
    assert np.array_equal(prob.h_minus, [-1.0, 0.0])
    assert prob.c == 1.0
    assert overrides == {}


def test_problem_from_dict_kw():
    prob, _ = problem_from_dict(base_doc(h={"x1": 2.0, "x2": -1.0}))
    assert isinstance(prob, KWProblem)
    assert np.array_equal(prob.h, [2.0, -1.0])


def test_problem_from_dict_h_is_exclusive():
    doc = base_doc(h={"x1": 1.0, "x2": 1.0},
                   h_plus={"x1": 1.0, "x2": 1.0},
                   h_minus={"x1": 0.0, "x2": 0.0})
    with pytest.raises(ParseError) as exc:
        problem_from_dict(doc)
    assert "not both" in str(exc.value)


def test_problem_from_dict_missing_c():
    doc = base_doc(h={"x1": 1.0, "x2": 1.0})
    del doc["c"]
    with pytest.raises(ParseError) as exc:
        problem_from_dict(doc)
    assert "c" in str(exc.value)


def test_problem_from_dict_missing_coefficients():
    with pytest.raises(ParseError):
        problem_from_dict(base_doc())


def test_problem_from_dict_no_implicit_zeros():
    doc = base_doc(h_plus={"x1": 1.0},
                   h_minus={"x1": 0.0, "x2": 0.0})
    with pytest.raises(ParseError) as exc:
        problem_from_dict(doc)
    assert "x2" in str(exc.value)


def test_problem_from_dict_unknown_vertex_in_map():
    doc = base_doc(h={"x1": 1.0, "x2": 1.0, "zz": 1.0})
    with pytest.raises(ParseError) as exc:
        problem_from_dict(doc)
    assert "zz" in str(exc.value)


def test_problem_from_dict_solver_overrides():
    doc = base_doc(h={"x1": 1.0, "x2": 1.0}, solver={"tol": 1e-9})
    _, overrides = problem_from_dict(doc)
    assert overrides == {"tol": 1e-9}


def test_load_problem_reports_line_and_column(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"vertices": [\n  {"id": }\n]}\n')
    with pytest.raises(ParseError) as exc:
        load_problem(str(path))
    assert "line 2" in str(exc.value)
