import numpy as np
import pytest

from qotm import security_sdp as gw
from qotm import solver as sdp
from qotm.linalg import RegisterLayout


def toy_instance():
    lay = RegisterLayout((("A", 2),))
    return sdp.SdpInstance(
        name="toy",
        variables={"X": lay},
        constraints=[
            sdp.Constraint("lb", lay, (sdp.Term("X", 1.0),), -np.diag([1.0, 2.0]), ">=0")
        ],
        objective={"X": np.eye(2)},
    )


def test_toy_instance_solves_to_three():
    sol = sdp.solve(toy_instance(), sdp.SolveOptions(tol=1e-8))
    assert sol.status == "optimal"
    assert abs(sol.objective - 3.0) < 1e-6
    np.testing.assert_allclose(sol.variables["X"], np.diag([1.0, 2.0]), atol=1e-5)


def test_solve_is_deterministic():
    a = sdp.solve(toy_instance(), sdp.SolveOptions(tol=1e-8))
    b = sdp.solve(toy_instance(), sdp.SolveOptions(tol=1e-8))
    assert a.iterations == b.iterations
    assert a.objective == b.objective
    np.testing.assert_array_equal(a.variables["X"], b.variables["X"])


def test_equality_constraint():
    lay = RegisterLayout((("A", 2),))
    inst = sdp.SdpInstance(
        name="eq",
        variables={"X": lay},
        constraints=[
            sdp.Constraint("fix", lay, (sdp.Term("X", 1.0),), -np.diag([1.0, 3.0]), "==0")
        ],
        objective={"X": np.eye(2)},
    )
    sol = sdp.solve(inst, sdp.SolveOptions(tol=1e-9))
    assert abs(sol.objective - 4.0) < 1e-6


def test_max_iters_status():
    sol = sdp.solve(toy_instance(), sdp.SolveOptions(tol=1e-12, max_iters=2))
    assert sol.status == "max-iters"


@pytest.fixture(scope="module")
def primal12():
    return gw.build_primal_instance(1, 2)


@pytest.fixture(scope="module")
def solved12(primal12):
    return sdp.solve(primal12, sdp.SolveOptions(tol=1e-6))


def test_primal_n1_m2_objective(primal12, solved12):
    assert solved12.status == "optimal"
    assert abs(solved12.objective - 0.8535533906) < 1e-3
    cert = sdp.verify_certificate(primal12, solved12, tol=1e-5)
    assert cert.passed


def test_certificate_passes_at_ten_tol(primal12, solved12):
    cert = sdp.verify_certificate(primal12, solved12, tol=1e-5)
    assert cert.passed and cert.worst[1] <= 1e-5


def test_certificate_catches_zeroed_variable(primal12, solved12):
    broken = {k: v.copy() for k, v in solved12.variables.items()}
    broken["P2"] = np.zeros_like(broken["P2"])
    bad = sdp.SdpSolution(broken, 0.0, "optimal", 0, {})
    rep = sdp.verify_certificate(primal12, bad, tol=1e-5)
    assert not rep.passed
    assert rep.worst[0] == "chain_2"  # the constraint P2 supported


def test_trivial_chain_is_feasible_for_the_instance(primal12):
    chain = gw.trivial_feasible(1, 2)
    sol = sdp.SdpSolution(gw.chain_as_assignment(chain), 0.0, "optimal", 0, {})
    rep = sdp.verify_certificate(primal12, sol, tol=1e-9)
    assert rep.passed
    assert abs(rep.objective - 1.0) < 1e-12  # Tr(P1) = 1 for the p = 1 chain


def test_weak_duality_dual_value_below_primal(solved12):
    beta = float(gw.beta_exact(1, 2))
    assert beta <= solved12.objective + 1e-5


def test_monotone_refinement(primal12):
    objs = []
    for tol in (1e-4, 5e-5):
        sol = sdp.solve(primal12, sdp.SolveOptions(tol=tol))
        objs.append(sdp.verify_certificate(primal12, sol, 10 * tol).objective)
    assert objs[1] <= objs[0] + 1e-4


def test_dual_instance_solve_matches_primal(solved12):
    # strong duality: the lowered dual maximum meets the primal minimum
    dual = gw.build_dual_instance(1, 2)
    sol = sdp.solve(dual, sdp.SolveOptions(tol=1e-6))
    assert sol.status == "optimal"
    assert abs(sol.objective - solved12.objective) < 5e-3


def test_json_round_trip_lossless(primal12):
    text = sdp.to_json(primal12)
    inst2 = sdp.from_json(text)
    assert sdp.to_json(inst2) == text
    for c1, c2 in zip(primal12.constraints, inst2.constraints):
        np.testing.assert_array_equal(np.asarray(c1.constant, dtype=float), c2.constant)


def test_export_rejects_unknown_format(primal12):
    with pytest.raises(ValueError):
        sdp.export(primal12, "mps")


def test_sdpa_export_structure():
    txt = sdp.export(toy_instance(), "sdpa-sparse")
    lines = txt.splitlines()
    assert lines[1] == "3 = mDIM"
    assert lines[2] == "1 = nBLOCK"
    assert lines[3] == "(2)"
    entries = [ln.split() for ln in lines[5:]]
    assert all(len(e) == 5 for e in entries)
    # upper triangle only, 1-based indices
    assert all(int(e[2]) <= int(e[3]) for e in entries)


def test_sdpa_export_realifies_complex_blocks():
    lay = RegisterLayout((("A", 2),))
    inst = sdp.SdpInstance(
        name="ctoy",
        variables={"X": lay},
        constraints=[
            sdp.Constraint(
                "lb", lay, (sdp.Term("X", 1.0),),
                -np.array([[1.0, 1j], [-1j, 2.0]]), ">=0",
            )
        ],
        objective={"X": np.eye(2)},
    )
    lines = sdp.export(inst, "sdpa-sparse").splitlines()
    assert lines[3] == "(4)"  # 2x the complex dimension
    assert lines[1] == "4 = mDIM"  # full Hermitian basis of a 2x2 variable


def test_sdpa_export_byte_stable(primal12):
    assert sdp.export(toy_instance(), "sdpa-sparse") == sdp.export(
        toy_instance(), "sdpa-sparse"
    )


def test_sdpa_export_solved_by_external_solver():
    # parse the emitted .dat-s with an independent reader and hand the
    # reconstructed problem to an external conic solver
    cp = pytest.importorskip("cvxpy")
    txt = sdp.export(toy_instance(), "sdpa-sparse")
    lines = [ln for ln in txt.splitlines() if ln and not ln.startswith('"')]
    m = int(lines[0].split()[0])
    nblock = int(lines[1].split()[0])
    sizes = [abs(int(tok)) for tok in lines[2].strip("() \t").replace(",", " ").split()]
    c = [float(tok) for tok in lines[3].split()]
    assert len(c) == m and len(sizes) == nblock
    mats = [[np.zeros((s, s)) for s in sizes] for _ in range(m + 1)]
    for ln in lines[4:]:
        k, b, i, j, v = ln.split()
        k, b, i, j = int(k), int(b) - 1, int(i) - 1, int(j) - 1
        mats[k][b][i, j] = mats[k][b][j, i] = float(v)
    x = cp.Variable(m)
    cons = []
    for b in range(nblock):
        expr = -mats[0][b] + sum(x[k - 1] * mats[k][b] for k in range(1, m + 1))
        cons.append(expr >> 0)
    prob = cp.Problem(cp.Minimize(np.array(c) @ x), cons)
    prob.solve(solver=cp.SCS)
    assert abs(prob.value - 3.0) < 1e-3


def test_complex_hermitian_solve():
    # solved natively in Hermitian form (no realification): the constraint
    # matrix is PSD with eigenvalues {0, 2}, so it is itself the minimiser
    lay = RegisterLayout((("A", 2),))
    target = np.array([[1.0, 1j], [-1j, 1.0]])
    inst = sdp.SdpInstance(
        name="complex-toy",
        variables={"X": lay},
        constraints=[sdp.Constraint("lb", lay, (sdp.Term("X", 1.0),), -target, ">=0")],
        objective={"X": np.eye(2)},
    )
    sol = sdp.solve(inst, sdp.SolveOptions(tol=1e-8))
    assert sol.status == "optimal"
    assert np.iscomplexobj(sol.variables["X"])
    assert abs(sol.objective - 2.0) < 1e-6
    np.testing.assert_allclose(sol.variables["X"], target, atol=1e-5)
    assert sdp.verify_certificate(inst, sol, 1e-7).passed


def test_constraint_dimension_cap():
    lay = RegisterLayout((("A", 8192),))
    inst = sdp.SdpInstance(
        name="big",
        variables={"X": lay},
        constraints=[
            sdp.Constraint(
                "c", lay, (sdp.Term("X", 1.0),), np.zeros((8192, 8192)), ">=0"
            )
        ],
        objective={},
    )
    with pytest.raises(sdp.SizeCapError):
        inst.validate()


def test_mismatched_term_layout_rejected():
    lay2 = RegisterLayout((("A", 2),))
    lay4 = RegisterLayout((("B", 4),))
    inst = sdp.SdpInstance(
        name="bad",
        variables={"X": lay2},
        constraints=[
            sdp.Constraint("c", lay4, (sdp.Term("X", 1.0),), np.zeros((4, 4)), ">=0")
        ],
        objective={},
    )
    with pytest.raises(ValueError):
        inst.validate()
