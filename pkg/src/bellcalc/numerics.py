"""Optimization and linear-algebra backends used by the analysis layers.

lp_solve wraps the HiGHS dual simplex behind a fixed contract: status in
{optimal, infeasible, unbounded, failed}, primal and dual vectors in the
orientation of the posed problem, and self-computed feasibility
residuals plus duality gap.  A solve whose own certificates miss the
contract is downgraded to "failed" rather than reported optimal.

povm_update solves  max sum_a tr(E_a R_a)  over POVMs {E_a}: the
two-outcome case in closed form, more outcomes through a monotone
fixed-point iteration, and the subnormalized variant by appending a
dummy outcome with a zero reduced operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .core import COMPLETE, INCOMPLETE, hermitian_part
from .errors import ValidationError

# Contract tolerances quoted by LpSolution consumers.
LP_PRIMAL_TOL = 1e-8
LP_DUAL_TOL = 1e-8
LP_GAP_REL = 1e-7

_HIGHS_OPTIONS = {
    "presolve": True,
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}

LE, EQ, GE = "<=", "==", ">="


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """max (or min) c.x subject to senses-typed rows and variable bounds.

    ``a`` may be a dense ndarray or a scipy sparse matrix; ``senses``
    holds one of "<=", "==", ">=" per row.  Bounds use +-inf for free
    directions.
    """

    c: np.ndarray
    a: object
    rhs: np.ndarray
    senses: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray
    maximize: bool = True

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        rhs = np.asarray(self.rhs, dtype=np.float64)
        lower = np.asarray(self.lower, dtype=np.float64)
        upper = np.asarray(self.upper, dtype=np.float64)
        senses = tuple(self.senses)
        a = self.a if sp.issparse(self.a) else np.asarray(self.a, dtype=np.float64)
        m, n = a.shape
        if c.shape != (n,) or rhs.shape != (m,) or len(senses) != m:
            raise ValidationError("linear program dimensions are inconsistent")
        if lower.shape != (n,) or upper.shape != (n,):
            raise ValidationError("variable bound vectors must have one entry per column")
        if any(s not in (LE, EQ, GE) for s in senses):
            raise ValidationError(f"row senses must be one of {LE!r}, {EQ!r}, {GE!r}")
        entries = a.data if sp.issparse(a) else a
        if not (np.all(np.isfinite(entries)) and np.all(np.isfinite(c)) and np.all(np.isfinite(rhs))):
            raise ValidationError("linear program entries must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)


def standard_bounds(n: int, lower=0.0, upper=np.inf) -> tuple[np.ndarray, np.ndarray]:
    return np.full(n, lower, dtype=float), np.full(n, upper, dtype=float)


@dataclass(frozen=True, eq=False)
class LpSolution:
    """Solver outcome plus the certificates backing it.

    ``row_duals`` are sensitivities of the optimal objective to the row
    right-hand sides, in the orientation of the posed problem.  The
    residuals and ``duality_gap`` are recomputed here from scratch, not
    taken from the solver.
    """

    status: Literal["optimal", "infeasible", "unbounded", "failed"]
    x: np.ndarray | None
    row_duals: np.ndarray | None
    objective: float | None
    primal_residual: float
    dual_residual: float
    duality_gap: float


def _row_split(lp: LinearProgram):
    """Indices of <=-like rows (>= rows negated) and == rows."""
    le_rows, ge_rows, eq_rows = [], [], []
    for i, s in enumerate(lp.senses):
        (le_rows if s == LE else ge_rows if s == GE else eq_rows).append(i)
    return le_rows, ge_rows, eq_rows


def _primal_residual(lp: LinearProgram, x: np.ndarray) -> float:
    ax = np.asarray(lp.a @ x).ravel()
    worst = 0.0
    for i, s in enumerate(lp.senses):
        gap = ax[i] - lp.rhs[i]
        if s == LE:
            worst = max(worst, gap)
        elif s == GE:
            worst = max(worst, -gap)
        else:
            worst = max(worst, abs(gap))
    worst = max(worst, float(np.max(np.maximum(lp.lower - x, 0.0), initial=0.0)))
    worst = max(worst, float(np.max(np.maximum(x - lp.upper, 0.0), initial=0.0)))
    return worst


def _dual_certificates(lp: LinearProgram, y: np.ndarray, objective: float):
    """Dual feasibility residual and duality gap for the posed problem.

    Orientation: for a maximization, duals on <= rows are >= 0, on >=
    rows <= 0; a reduced cost c_j - (A^T y)_j that is positive must be
    absorbed by a finite upper bound, a negative one by a finite lower
    bound.  Minimization flips all of it.
    """
    sign = 1.0 if lp.maximize else -1.0
    z = lp.c - np.asarray(lp.a.T @ y).ravel()
    worst = 0.0
    for i, s in enumerate(lp.senses):
        if s == LE:
            worst = max(worst, -sign * y[i] if sign * y[i] < 0 else 0.0)
        elif s == GE:
            worst = max(worst, sign * y[i] if sign * y[i] > 0 else 0.0)
    zs = sign * z
    bad_hi = (zs > 0) & ~np.isfinite(lp.upper)
    bad_lo = (zs < 0) & ~np.isfinite(lp.lower)
    if bad_hi.any():
        worst = max(worst, float(np.max(zs[bad_hi])))
    if bad_lo.any():
        worst = max(worst, float(np.max(-zs[bad_lo])))
    bound_term = np.where(zs > 0, np.where(np.isfinite(lp.upper), lp.upper, 0.0),
                          np.where(np.isfinite(lp.lower), lp.lower, 0.0))
    dual_obj = float(y @ lp.rhs + z @ bound_term)
    gap = abs(objective - dual_obj)
    return worst, gap


def lp_solve(lp: LinearProgram) -> LpSolution:
    """Solve a LinearProgram deterministically with dual certificates."""
    le_rows, ge_rows, eq_rows = _row_split(lp)
    dense = not sp.issparse(lp.a)
    a = lp.a if dense else lp.a.tocsr()

    def take(rows, flip):
        if not rows:
            return None, None
        block = a[rows, :] if dense else a[rows, :]
        block = -block if flip else block
        rhs = lp.rhs[rows]
        return block, (-rhs if flip else rhs)

    a_le, b_le = take(le_rows, False)
    a_ge, b_ge = take(ge_rows, True)
    if a_le is not None and a_ge is not None:
        a_ub = np.vstack([a_le, a_ge]) if dense else sp.vstack([a_le, a_ge], format="csr")
        b_ub = np.concatenate([b_le, b_ge])
    elif a_le is not None:
        a_ub, b_ub = a_le, b_le
    elif a_ge is not None:
        a_ub, b_ub = a_ge, b_ge
    else:
        a_ub, b_ub = None, None
    a_eq, b_eq = take(eq_rows, False)

    c_min = -lp.c if lp.maximize else lp.c
    bounds = [(None if not np.isfinite(lo) else lo, None if not np.isfinite(hi) else hi)
              for lo, hi in zip(lp.lower, lp.upper)]
    res = linprog(c_min, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                  bounds=bounds, method="highs-ds", options=dict(_HIGHS_OPTIONS))

    if res.status == 2:
        return LpSolution("infeasible", None, None, None, np.inf, np.inf, np.inf)
    if res.status == 3:
        return LpSolution("unbounded", None, None, None, np.inf, np.inf, np.inf)
    if res.status != 0 or res.x is None:
        return LpSolution("failed", None, None, None, np.inf, np.inf, np.inf)

    x = np.asarray(res.x, dtype=float)
    objective = float(lp.c @ x)
    # Reassemble row duals in posed orientation.  scipy's marginals are
    # d(min objective)/d(rhs of the scipy-form row); a >= row was negated
    # into <= form, and a posed maximization negates the objective.
    y = np.zeros(len(lp.senses))
    marg_ub = res.ineqlin.marginals if a_ub is not None else np.zeros(0)
    pos = 0
    for i in le_rows:
        y[i] = marg_ub[pos]
        pos += 1
    for i in ge_rows:
        y[i] = -marg_ub[pos]
        pos += 1
    if eq_rows:
        for i, m in zip(eq_rows, res.eqlin.marginals):
            y[i] = m
    if lp.maximize:
        y = -y

    primal_resid = _primal_residual(lp, x)
    dual_resid, gap = _dual_certificates(lp, y, objective)
    status = "optimal"
    if (primal_resid > LP_PRIMAL_TOL or dual_resid > LP_DUAL_TOL
            or gap > LP_GAP_REL * (1.0 + abs(objective))):
        status = "failed"
    return LpSolution(status, x, y, objective, primal_resid, dual_resid, gap)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenvalues ascending, eigenvectors as columns of ``vectors``."""

    values: np.ndarray
    vectors: np.ndarray


def eigh(matrix: np.ndarray) -> EigenDecomposition:
    """Hermitian eigendecomposition with the reconstruction contract.

    Rejects inputs whose Hermitian defect exceeds 1e-9 relative to the
    Frobenius norm, symmetrizes the rest, and guarantees
    ||H - V diag(w) V^dagger||_F <= 1e-10 ||H||_F with orthonormal V.
    """
    h = np.asarray(matrix)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"eigh expects a square matrix, got shape {h.shape}")
    norm = float(np.linalg.norm(h))
    defect = float(np.linalg.norm(h - h.conj().T))
    if defect > 1e-9 * max(norm, 1.0):
        raise ValidationError(f"matrix is not Hermitian: defect {defect:.3g}")
    w, v = np.linalg.eigh(hermitian_part(h))
    return EigenDecomposition(w, v)


def psd_project(matrix: np.ndarray) -> np.ndarray:
    """Nearest positive semidefinite matrix in Frobenius norm.

    Symmetrize, clip negative eigenvalues at zero, reconstruct.
    Idempotent up to floating point.
    """
    dec = eigh(matrix)
    w = np.maximum(dec.values, 0.0)
    return hermitian_part((dec.vectors * w) @ dec.vectors.conj().T)


@dataclass(frozen=True, eq=False)
class PovmUpdateResult:
    """Optimized POVM plus the certificates of how good it is.

    ``dual_matrix`` is the multiplier estimate Y ~ sum_a R_a E_a;
    ``dual_bound`` is tr of a feasibility-shifted Y, a true upper bound
    on the achievable objective.  ``objective_log`` is the monotone
    sequence of accepted objective values.
    """

    operators: tuple[np.ndarray, ...]
    objective: float
    converged: bool
    iterations: int
    dual_matrix: np.ndarray
    dual_bound: float
    objective_log: tuple[float, ...]


def _check_reduced_ops(reduced: Sequence[np.ndarray]) -> list[np.ndarray]:
    if not reduced:
        raise ValidationError("povm_update needs at least one reduced operator")
    mats = []
    d = np.asarray(reduced[0]).shape[0]
    for i, r in enumerate(reduced):
        m = np.asarray(r, dtype=np.complex128)
        if m.shape != (d, d):
            raise ValidationError(f"reduced operator {i} has shape {m.shape}, expected ({d}, {d})")
        defect = float(np.max(np.abs(m - m.conj().T)))
        if defect > 1e-9 * max(float(np.max(np.abs(m))), 1.0):
            raise ValidationError(f"reduced operator {i} is not Hermitian: defect {defect:.3g}")
        mats.append(hermitian_part(m))
    return mats


def _povm_objective(operators, reduced) -> float:
    return float(sum(np.trace(e @ r).real for e, r in zip(operators, reduced)))


def _dual_certificate(operators, reduced):
    """Feasible dual point for  min tr(Y) s.t. Y >= R_a  from a primal POVM.

    Starts from Y0 = herm(sum R_a E_a), which is exactly feasible at an
    optimum, and repairs any violation two ways, keeping the cheaper:
    a uniform shift by the worst positive eigenvalue, or adding the sum
    of the positive parts of every R_a - Y0 (each summand dominates its
    own violation, and the sum dominates each summand).
    """
    d = reduced[0].shape[0]
    z = sum(r @ e for r, e in zip(reduced, operators))
    y0 = hermitian_part(z)
    deficit = 0.0
    pos_trace = 0.0
    pos_sum = np.zeros_like(y0)
    for r in reduced:
        w, v = np.linalg.eigh(hermitian_part(r - y0))
        deficit = max(deficit, float(w[-1]))
        keep = w > 0.0
        if keep.any():
            pos_trace += float(w[keep].sum())
            pos_sum += (v[:, keep] * w[keep]) @ v[:, keep].conj().T
    if deficit <= 0.0:
        return y0, float(np.trace(y0).real)
    if pos_trace <= deficit * d:
        y = hermitian_part(y0 + pos_sum)
    else:
        y = y0 + deficit * np.eye(d)
    return y, float(np.trace(y).real)


def _two_outcome_exact(reduced):
    """Closed form for two outcomes: E_1 projects onto the strictly
    positive eigenspace of R_1 - R_2, ties going to E_2."""
    r1, r2 = reduced
    d = r1.shape[0]
    dec = eigh(r1 - r2)
    keep = dec.values > 0.0
    vecs = dec.vectors[:, keep]
    e1 = vecs @ vecs.conj().T
    e2 = np.eye(d) - e1
    objective = float(np.trace(r2).real + dec.values[keep].sum())
    # exact dual: Y = R_2 + positive part of (R_1 - R_2)
    pos = hermitian_part((dec.vectors * np.maximum(dec.values, 0.0)) @ dec.vectors.conj().T)
    y = hermitian_part(r2 + pos)
    return (hermitian_part(e1), hermitian_part(e2)), objective, y


def _inv_sqrt_psd(mat: np.ndarray) -> np.ndarray:
    """Pseudo inverse square root; tiny eigenvalues are dropped."""
    dec = eigh(mat)
    w = dec.values
    cutoff = max(float(w[-1]), 0.0) * 1e-14
    inv = np.where(w > cutoff, 1.0 / np.sqrt(np.maximum(w, cutoff)), 0.0)
    return (dec.vectors * inv) @ dec.vectors.conj().T


def povm_update(
    reduced: Sequence[np.ndarray],
    mode: str = COMPLETE,
    warm_start: Sequence[np.ndarray] | None = None,
    max_iters: int = 2000,
    gap_tol: float = 1e-7,
    gain_tol: float = 0.0,
) -> PovmUpdateResult:
    """Maximize sum_a tr(E_a R_a) over POVMs.

    Parameters
    ----------
    reduced : Hermitian reduced operators R_a, one per outcome.
    mode : "complete" (sum E_a = I) or "incomplete" (sum E_a <= I); the
        incomplete case appends a dummy outcome with R = 0 and solves the
        complete problem one outcome larger.
    warm_start : optional POVM to improve upon; the result never scores below it.
    max_iters : cap on fixed-point iterations (more than two outcomes).
    gap_tol : stop once the certified duality gap falls below this.
    gain_tol : when positive, also stop once a step gains less than this,
        skipping the per-iteration gap certificates; cheaper per call, but
        the final gap is only whatever that leaves.  Meant for callers that
        re-solve in an outer loop and only need monotone progress.

    Returns a PovmUpdateResult; ``converged`` is False only when the
    iteration cap fired first.
    """
    mats = _check_reduced_ops(reduced)
    if mode == INCOMPLETE:
        d = mats[0].shape[0]
        extended = mats + [np.zeros((d, d), dtype=np.complex128)]
        ws = None
        if warm_start is not None:
            tail = np.eye(d) - sum(np.asarray(w, dtype=np.complex128) for w in warm_start)
            ws = list(warm_start) + [psd_project(tail)]
        inner = povm_update(extended, COMPLETE, ws, max_iters, gap_tol, gain_tol)
        ops = inner.operators[:-1]
        objective = _povm_objective(ops, mats)
        return PovmUpdateResult(ops, objective, inner.converged, inner.iterations,
                                inner.dual_matrix, inner.dual_bound, inner.objective_log)
    if mode != COMPLETE:
        raise ValidationError(f"mode must be {COMPLETE!r} or {INCOMPLETE!r}")

    n_out = len(mats)
    d = mats[0].shape[0]
    identity = np.eye(d, dtype=np.complex128)

    if n_out == 1:
        ops = (identity.copy(),)
        obj = float(np.trace(mats[0]).real)
        y, bound = _dual_certificate(ops, mats)
        return PovmUpdateResult(ops, obj, True, 0, y, bound, (obj,))

    if n_out == 2 and warm_start is None:
        ops, obj, y = _two_outcome_exact(mats)
        return PovmUpdateResult(ops, obj, True, 0, y, float(np.trace(y).real), (obj,))
    if n_out == 2:
        ops, obj, y = _two_outcome_exact(mats)
        warm_obj = _povm_objective(warm_start, mats)
        if warm_obj > obj:  # possible only through rounding; keep the better POVM
            ops = tuple(hermitian_part(np.asarray(w, dtype=np.complex128)) for w in warm_start)
            obj = warm_obj
        return PovmUpdateResult(ops, obj, True, 0, y, float(np.trace(y).real), (obj,))

    # Shift to strictly positive operators; the objective moves by the
    # constant c*d which is subtracted back out of every report.
    min_eig = min(float(np.linalg.eigvalsh(m)[0]) for m in mats)
    c = max(0.0, -min_eig) + 1e-9
    shifted = [m + c * identity for m in mats]

    if warm_start is not None:
        current = [hermitian_part(np.asarray(w, dtype=np.complex128)) for w in warm_start]
    else:
        current = [identity / n_out for _ in range(n_out)]
    fast = gain_tol > 0.0
    best_obj = _povm_objective(current, mats)
    log = [best_obj]
    best_y = None
    best_bound = np.inf
    if not fast:
        best_y, best_bound = _dual_certificate(current, mats)
    iterations = 0
    converged = True
    for iterations in range(1, max_iters + 1):
        if best_bound - best_obj <= gap_tol:
            break
        lam = hermitian_part(sum(r @ e @ r for r, e in zip(shifted, current)))
        l_inv = _inv_sqrt_psd(lam)
        # the sandwich is Hermitian in exact arithmetic; flatten roundoff
        candidate = [psd_project(hermitian_part(l_inv @ r @ e @ r @ l_inv))
                     for r, e in zip(shifted, current)]
        defect = identity - sum(candidate)
        # redistribute whatever the pseudo-inverse cut off
        candidate = [e + defect / n_out for e in candidate]
        obj = _povm_objective(candidate, mats)
        if obj <= best_obj:
            break  # stalled; keep the monotone incumbent
        gain = obj - best_obj
        current = candidate
        best_obj = obj
        log.append(best_obj)
        if fast:
            if gain < gain_tol:
                break
        else:
            y, bound = _dual_certificate(current, mats)
            if bound < best_bound:
                best_y, best_bound = y, bound
    else:
        converged = False
    if fast:
        best_y, best_bound = _dual_certificate(current, mats)
    return PovmUpdateResult(tuple(current), best_obj, converged, iterations, best_y,
                            best_bound, tuple(log))
