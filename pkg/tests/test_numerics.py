"""LP backend contracts, eigendecomposition, POVM sub-step solver.

The POVM solver is checked against an independent semidefinite
formulation (cvxpy) on small instances, and against its own dual bound
everywhere else.
"""

import numpy as np
import pytest

from bellcalc import (
    EigenDecomposition,
    LinearProgram,
    ValidationError,
    eigh,
    lp_solve,
    povm_update,
    psd_project,
)
from bellcalc.core import hermitian_part
from bellcalc.numerics import EQ, GE, LE

cvxpy = pytest.importorskip("cvxpy")


def random_feasible_lp(rng: np.random.Generator) -> LinearProgram:
    """A bounded LP with a known interior point, mixed senses and
    finite bounds (so it can never be unbounded)."""
    n = int(rng.integers(1, 9))
    m = int(rng.integers(1, 11))
    a = rng.standard_normal((m, n))
    lower = np.where(rng.random(n) < 0.7, 0.0, -rng.random(n) * 3.0)
    upper = lower + 0.5 + rng.random(n) * 4.0
    x0 = lower + (upper - lower) * rng.random(n)
    senses = rng.choice([LE, GE, EQ], size=m, p=[0.45, 0.45, 0.1])
    slack = rng.random(m) * 2.0
    rhs = a @ x0
    rhs = np.where(senses == LE, rhs + slack, rhs)
    rhs = np.where(senses == GE, rhs - slack, rhs)
    return LinearProgram(
        c=rng.standard_normal(n),
        a=a,
        rhs=rhs,
        senses=list(senses),
        lower=lower,
        upper=upper,
        maximize=bool(rng.random() < 0.5),
    )


def test_lp_simple_upper_bound_and_dual_sign():
    # max x subject to x <= 3: optimum 3, the row's dual is +1
    lp = LinearProgram(
        c=np.array([1.0]), a=np.array([[1.0]]), rhs=np.array([3.0]),
        senses=[LE], lower=np.array([0.0]), upper=np.array([np.inf]),
        maximize=True,
    )
    sol = lp_solve(lp)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(3.0, abs=1e-9)
    assert sol.row_duals[0] == pytest.approx(1.0, abs=1e-9)


def test_lp_minimize_orientation_dual():
    # min -x subject to x <= 3: objective -3; relaxing the row by one
    # unit lowers the optimum by one, so the posed dual is -1
    lp = LinearProgram(
        c=np.array([-1.0]), a=np.array([[1.0]]), rhs=np.array([3.0]),
        senses=[LE], lower=np.array([0.0]), upper=np.array([np.inf]),
        maximize=False,
    )
    sol = lp_solve(lp)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(-3.0, abs=1e-9)
    assert sol.row_duals[0] == pytest.approx(-1.0, abs=1e-9)


def test_lp_equality_dual():
    # min x + y subject to x + y == 1: dual of the row is 1
    lp = LinearProgram(
        c=np.ones(2), a=np.ones((1, 2)), rhs=np.array([1.0]),
        senses=[EQ], lower=np.zeros(2), upper=np.full(2, np.inf),
        maximize=False,
    )
    sol = lp_solve(lp)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(1.0, abs=1e-9)
    assert sol.row_duals[0] == pytest.approx(1.0, abs=1e-9)


def test_lp_infeasible_detected():
    lp = LinearProgram(
        c=np.array([1.0]), a=np.array([[1.0]]), rhs=np.array([-1.0]),
        senses=[LE], lower=np.array([0.0]), upper=np.array([np.inf]),
        maximize=False,
    )
    assert lp_solve(lp).status == "infeasible"


def test_lp_unbounded_detected():
    lp = LinearProgram(
        c=np.array([1.0]), a=np.array([[1.0]]), rhs=np.array([0.0]),
        senses=[GE], lower=np.array([0.0]), upper=np.array([np.inf]),
        maximize=True,
    )
    assert lp_solve(lp).status == "unbounded"


def test_lp_random_sweep_certificates():
    rng = np.random.default_rng(7)
    for _ in range(100):
        lp = random_feasible_lp(rng)
        sol = lp_solve(lp)
        assert sol.status == "optimal"
        assert sol.primal_residual <= 1e-8
        assert sol.dual_residual <= 1e-8
        assert sol.duality_gap <= 1e-7 * (1.0 + abs(sol.objective))


def test_lp_rejects_bad_senses():
    with pytest.raises(ValidationError):
        LinearProgram(
            c=np.array([1.0]), a=np.array([[1.0]]), rhs=np.array([1.0]),
            senses=["<"], lower=np.array([0.0]), upper=np.array([1.0]),
        )


def test_lp_rejects_shape_mismatch():
    with pytest.raises(ValidationError):
        LinearProgram(
            c=np.array([1.0, 2.0]), a=np.array([[1.0]]), rhs=np.array([1.0]),
            senses=[LE], lower=np.zeros(2), upper=np.ones(2),
        )


def test_eigh_contract_on_random_hermitian():
    rng = np.random.default_rng(11)
    for _ in range(25):
        d = int(rng.integers(1, 17))
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = hermitian_part(g)
        dec = eigh(h)
        assert isinstance(dec, EigenDecomposition)
        assert np.all(np.diff(dec.values) >= -1e-14)
        residual = np.max(np.abs(h @ dec.vectors - dec.vectors * dec.values))
        assert residual <= 1e-10 * max(1.0, np.linalg.norm(h))


def test_eigh_rejects_non_hermitian():
    m = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValidationError):
        eigh(m)


def test_psd_project_properties(rng):
    g = hermitian_part(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
    p = psd_project(g)
    w = np.linalg.eigvalsh(p)
    assert w[0] >= -1e-12
    np.testing.assert_allclose(psd_project(p), p, atol=1e-12)
    # already-psd input passes through
    q = p + np.eye(5)
    np.testing.assert_allclose(psd_project(q), q, atol=1e-12)


def _random_reduced(rng, dim, n_out):
    return [
        hermitian_part(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
        for _ in range(n_out)
    ]


def _sdp_reference(reduced, mode):
    dim = reduced[0].shape[0]
    ops = [cvxpy.Variable((dim, dim), hermitian=True) for _ in reduced]
    total = sum(ops)
    constraints = [e >> 0 for e in ops]
    if mode == "complete":
        constraints.append(total == np.eye(dim))
    else:
        constraints.append(np.eye(dim) - total >> 0)
    objective = cvxpy.Maximize(
        sum(cvxpy.real(cvxpy.trace(r @ e)) for r, e in zip(reduced, ops))
    )
    problem = cvxpy.Problem(objective, constraints)
    problem.solve(solver=cvxpy.CLARABEL)
    # the interior-point reference sometimes stops at reduced accuracy;
    # still usable as a cross-check at the tolerance below
    assert problem.status in (cvxpy.OPTIMAL, cvxpy.OPTIMAL_INACCURATE)
    return float(problem.value)


def test_povm_update_single_outcome_is_identity():
    r = np.diag([1.0, -2.0]).astype(complex)
    result = povm_update([r], "complete")
    np.testing.assert_allclose(result.operators[0], np.eye(2), atol=1e-12)
    assert result.objective == pytest.approx(-1.0, abs=1e-12)


def test_povm_update_two_outcome_closed_form():
    # difference diag(1, -1): optimal projectors split the eigenspaces
    r1 = np.diag([1.0, 0.0]).astype(complex)
    r2 = np.diag([0.0, 1.0]).astype(complex)
    result = povm_update([r1, r2], "complete")
    np.testing.assert_allclose(result.operators[0], np.diag([1.0, 0.0]), atol=1e-10)
    np.testing.assert_allclose(result.operators[1], np.diag([0.0, 1.0]), atol=1e-10)
    assert result.objective == pytest.approx(2.0, abs=1e-10)
    assert result.dual_bound - result.objective <= 1e-8


def test_povm_update_equal_operators_any_povm_is_optimal(rng):
    r = hermitian_part(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    reduced = [r, r, r]
    result = povm_update(reduced, "complete")
    assert result.objective == pytest.approx(float(np.trace(r).real), abs=1e-8)


def test_povm_update_matches_sdp_complete():
    rng = np.random.default_rng(23)
    for _ in range(8):
        dim = int(rng.integers(2, 7))
        n_out = int(rng.integers(2, 7))
        reduced = _random_reduced(rng, dim, n_out)
        result = povm_update(reduced, "complete")
        reference = _sdp_reference(reduced, "complete")
        assert abs(result.objective - reference) <= 5e-6
        total = sum(result.operators)
        np.testing.assert_allclose(total, np.eye(dim), atol=1e-8)


def test_povm_update_matches_sdp_incomplete():
    rng = np.random.default_rng(29)
    for _ in range(6):
        dim = int(rng.integers(2, 6))
        n_out = int(rng.integers(2, 6))
        reduced = _random_reduced(rng, dim, n_out)
        result = povm_update(reduced, "incomplete")
        reference = _sdp_reference(reduced, "incomplete")
        assert abs(result.objective - reference) <= 5e-6
        w = np.linalg.eigvalsh(hermitian_part(sum(result.operators)))
        assert w[-1] <= 1.0 + 1e-8


def test_povm_update_incomplete_dominates_complete(rng):
    reduced = _random_reduced(rng, 4, 3)
    complete = povm_update(reduced, "complete")
    incomplete = povm_update(reduced, "incomplete")
    assert incomplete.objective >= complete.objective - 1e-9


def test_povm_update_warm_start_never_worse(rng):
    reduced = _random_reduced(rng, 4, 4)
    first = povm_update(reduced, "complete")
    again = povm_update(reduced, "complete", warm_start=first.operators)
    assert again.objective >= first.objective - 1e-12


def test_povm_update_log_is_monotone(rng):
    reduced = _random_reduced(rng, 5, 5)
    result = povm_update(reduced, "complete")
    log = result.objective_log
    assert all(b >= a - 1e-12 for a, b in zip(log, log[1:]))
    assert result.dual_bound >= result.objective - 1e-9


def test_povm_update_dual_bound_tightness_small():
    rng = np.random.default_rng(31)
    for _ in range(10):
        dim = int(rng.integers(2, 5))
        n_out = int(rng.integers(2, 5))
        reduced = _random_reduced(rng, dim, n_out)
        result = povm_update(reduced, "complete")
        assert result.dual_bound - result.objective <= 1e-5
