"""Sinh-Gordon and Kazdan-Warner equations on finite weighted graphs.

Solvers for -Delta u = h+ e^u + h- e^{-u} - c on connected symmetric
weighted graphs, the Brouwer degree of the residual map (closed-form
case table and numeric Morse sum), and numeric checks of the supporting
inequalities.
"""

__version__ = "0.1.0"

from . import errors
from .graph import (
    Graph,
    VertexFunction,
    elliptic_constants,
    gradient_form,
    integrate,
    laplacian,
    laplacian_matrix,
    largest_laplacian_eigenvalue,
    load_graph,
    shortest_path,
    validate_graph,
)
from .model import (
    KWProblem,
    Problem,
    SignClass,
    classify_signs,
    energy,
    jacobian,
    kw_residual,
    load_problem,
    residual,
)
from .solver import (
    Solution,
    SolverConfig,
    brute_force_2v,
    continuation,
    enumerate_solutions,
    find_constant_subsolution,
    minimize_energy_boxed,
    newton_solve,
)
from .degree import (
    DegreeReport,
    V0Decomposition,
    degree_formula,
    degree_numeric,
    harmonic_extension,
    kw_degree_formula,
    schur_operator,
    select_radius,
)
from .checks import (
    CheckOutcome,
    check_elliptic,
    check_green,
    check_harnack,
    check_kato,
    check_max_principle,
    check_solution_bound_heuristic,
    run_random_suite,
)
from .cases import case_degree, case_solutions, two_vertex_case, unit_pair_graph

__all__ = [name for name in dir() if not name.startswith("_")]
