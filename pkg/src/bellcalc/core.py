"""Core value types for two-party Bell scenarios.

A scenario fixes the number of measurement settings (inputs) and outcomes
(outputs) per party.  On top of it live real coefficient tensors
(functionals), conditional probability tensors (behaviors), and the two
model classes that generate behaviors: mixtures of deterministic
strategies, and quantum states measured with POVMs.

Tensors are always indexed ``[x][y][a][b]``: Alice input, Bob input,
Alice output, Bob output.  Behaviors and models come in a complete
flavor (each (x,y) block is a probability distribution, POVMs sum to the
identity) and an incomplete one (mass at most one, POVM sums below the
identity).  The incomplete variants are first-class citizens here, not
error states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ScenarioMismatchError, ValidationError

# Numerical slack accepted when validating probabilities, traces, POVM
# sums and weights.  Chosen once; everything downstream quotes it.
EPS_FEAS = 1e-9

# A behavior is treated as no-signaling when the worst marginal
# discrepancy stays below this.
NS_TOL = 1e-8

# Largest imaginary residue tolerated when a quantum expectation is cast
# to a real probability.
IMAG_TOL = 1e-9

COMPLETE = "complete"
INCOMPLETE = "incomplete"


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def hermitian_part(m: np.ndarray) -> np.ndarray:
    """0.5 * (M + M^dagger), broadcast over leading axes."""
    return 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))


@dataclass(frozen=True)
class Scenario:
    """Input/output counts for the two parties.  All counts >= 1."""

    n_inputs_a: int
    n_inputs_b: int
    n_outputs_a: int
    n_outputs_b: int

    def __post_init__(self):
        for name in ("n_inputs_a", "n_inputs_b", "n_outputs_a", "n_outputs_b"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValidationError(f"scenario field {name} must be an integer >= 1, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.n_inputs_a, self.n_inputs_b, self.n_outputs_a, self.n_outputs_b)

    @property
    def n_entries(self) -> int:
        return self.n_inputs_a * self.n_inputs_b * self.n_outputs_a * self.n_outputs_b

    def alice_strategy_count(self) -> int:
        return self.n_outputs_a ** self.n_inputs_a

    def bob_strategy_count(self) -> int:
        return self.n_outputs_b ** self.n_inputs_b


def _coerce_tensor(scenario: Scenario, data, what: str) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.shape != scenario.shape:
        raise ValidationError(
            f"{what} tensor shape {arr.shape} does not match scenario {scenario.shape}"
        )
    return _readonly(arr.copy())


@dataclass(frozen=True, eq=False)
class BellFunctional:
    """Real coefficient tensor T[x][y][a][b] over a scenario."""

    scenario: Scenario
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _coerce_tensor(self.scenario, self.coeffs, "coefficient"))


@dataclass(frozen=True, eq=False)
class Behavior:
    """Conditional probability tensor p(a,b|x,y), possibly subnormalized.

    ``completeness`` records whether each (x,y) block should sum to one
    (``complete``) or merely to at most one (``incomplete``).
    """

    scenario: Scenario
    probs: np.ndarray
    completeness: str = COMPLETE

    def __post_init__(self):
        if self.completeness not in (COMPLETE, INCOMPLETE):
            raise ValidationError(f"completeness must be {COMPLETE!r} or {INCOMPLETE!r}")
        object.__setattr__(self, "probs", _coerce_tensor(self.scenario, self.probs, "probability"))

    @property
    def is_complete(self) -> bool:
        return self.completeness == COMPLETE


def clipped_behavior(scenario: Scenario, probs: np.ndarray, completeness: str) -> Behavior:
    """Build a Behavior, zeroing entries in [-EPS_FEAS, 0).

    Entries below -EPS_FEAS are left alone so that validate() can report
    them; factories that guarantee nonnegativity use this to absorb
    floating-point dust.
    """
    probs = np.asarray(probs, dtype=np.float64).copy()
    tiny = (probs < 0.0) & (probs >= -EPS_FEAS)
    probs[tiny] = 0.0
    return Behavior(scenario, probs, completeness)


@dataclass(frozen=True)
class DeterministicStrategy:
    """A pair of deterministic response functions, one output per input."""

    alice_outputs: tuple[int, ...]
    bob_outputs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "alice_outputs", tuple(int(v) for v in self.alice_outputs))
        object.__setattr__(self, "bob_outputs", tuple(int(v) for v in self.bob_outputs))

    def check_against(self, scenario: Scenario) -> None:
        if len(self.alice_outputs) != scenario.n_inputs_a:
            raise ValidationError(
                f"strategy defines {len(self.alice_outputs)} Alice outputs, "
                f"scenario has {scenario.n_inputs_a} inputs"
            )
        if len(self.bob_outputs) != scenario.n_inputs_b:
            raise ValidationError(
                f"strategy defines {len(self.bob_outputs)} Bob outputs, "
                f"scenario has {scenario.n_inputs_b} inputs"
            )
        if any(a < 0 or a >= scenario.n_outputs_a for a in self.alice_outputs):
            raise ValidationError(f"Alice outputs {self.alice_outputs} out of range")
        if any(b < 0 or b >= scenario.n_outputs_b for b in self.bob_outputs):
            raise ValidationError(f"Bob outputs {self.bob_outputs} out of range")

    def behavior(self, scenario: Scenario) -> Behavior:
        """The deterministic behavior: an indicator tensor."""
        self.check_against(scenario)
        na, nb, _, _ = scenario.shape
        probs = np.zeros(scenario.shape)
        for x in range(na):
            for y in range(nb):
                probs[x, y, self.alice_outputs[x], self.bob_outputs[y]] = 1.0
        return Behavior(scenario, probs, COMPLETE)


@dataclass(frozen=True)
class LocalModel:
    """Convex weights over deterministic strategies.

    Total weight 1 (complete) or below 1 (incomplete); the deficit is
    unexplained mass, not an error.
    """

    weights: tuple[tuple[float, DeterministicStrategy], ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "weights",
            tuple((float(w), s) for w, s in self.weights),
        )

    @property
    def total_weight(self) -> float:
        return float(sum(w for w, _ in self.weights))

    @property
    def completeness(self) -> str:
        return COMPLETE if self.total_weight >= 1.0 - EPS_FEAS else INCOMPLETE


def _coerce_matrix_list(mats, dim: int, what: str):
    out = []
    for m in mats:
        arr = np.asarray(m, dtype=np.complex128)
        if arr.shape != (dim, dim):
            raise ValidationError(f"{what} has shape {arr.shape}, expected ({dim}, {dim})")
        out.append(_readonly(arr.copy()))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class QuantumModel:
    """Shared state plus per-input POVMs for both parties.

    ``state`` is a density matrix on the (dim_a * dim_b)-dimensional
    joint space, basis ordered Alice-major (index i*dim_b + k).
    ``alice_povms[x]`` is the list of POVM elements for input x, one per
    outcome; likewise for Bob.
    """

    dim_a: int
    dim_b: int
    state: np.ndarray
    alice_povms: tuple[tuple[np.ndarray, ...], ...]
    bob_povms: tuple[tuple[np.ndarray, ...], ...]
    completeness: str = COMPLETE

    def __post_init__(self):
        if self.completeness not in (COMPLETE, INCOMPLETE):
            raise ValidationError(f"completeness must be {COMPLETE!r} or {INCOMPLETE!r}")
        da, db = int(self.dim_a), int(self.dim_b)
        if da < 1 or db < 1:
            raise ValidationError("local dimensions must be >= 1")
        object.__setattr__(self, "dim_a", da)
        object.__setattr__(self, "dim_b", db)
        state = np.asarray(self.state, dtype=np.complex128)
        if state.shape != (da * db, da * db):
            raise ValidationError(
                f"state has shape {state.shape}, expected ({da * db}, {da * db})"
            )
        object.__setattr__(self, "state", _readonly(state.copy()))
        alice = tuple(_coerce_matrix_list(povm, da, "Alice POVM element") for povm in self.alice_povms)
        bob = tuple(_coerce_matrix_list(povm, db, "Bob POVM element") for povm in self.bob_povms)
        if not alice or not bob:
            raise ValidationError("each party needs at least one input")
        if len({len(p) for p in alice}) != 1 or len({len(p) for p in bob}) != 1:
            raise ValidationError("every input must carry the same number of outcomes")
        object.__setattr__(self, "alice_povms", alice)
        object.__setattr__(self, "bob_povms", bob)

    @property
    def scenario(self) -> Scenario:
        return Scenario(
            len(self.alice_povms),
            len(self.bob_povms),
            len(self.alice_povms[0]),
            len(self.bob_povms[0]),
        )


@dataclass(frozen=True)
class InvariantViolation:
    """One broken invariant: which constraint, where, and by how much."""

    constraint: str
    location: str
    slack: float

    def __str__(self):
        return f"{self.constraint} at {self.location}: slack {self.slack:.3g}"


@dataclass(frozen=True)
class NoSignalingResult:
    ok: bool
    max_residual: float
    location: str


def pair(functional: BellFunctional, behavior: Behavior) -> float:
    """Bilinear pairing <T, P> = sum_xyab T[x,y,a,b] * p(a,b|x,y)."""
    if functional.scenario != behavior.scenario:
        raise ScenarioMismatchError(
            f"functional scenario {functional.scenario.shape} vs "
            f"behavior scenario {behavior.scenario.shape}"
        )
    return float(np.sum(functional.coeffs * behavior.probs))


def behavior_from_local(model: LocalModel, scenario: Scenario) -> Behavior:
    """Mix the deterministic behaviors of a local model.

    Raises ValidationError for negative weights, total weight above one,
    or strategies that do not fit the scenario.
    """
    total = 0.0
    probs = np.zeros(scenario.shape)
    for i, (w, strat) in enumerate(model.weights):
        if w < -EPS_FEAS:
            raise ValidationError(f"weight {i} is negative: {w}")
        strat.check_against(scenario)
        total += w
        if w <= 0.0:
            continue
        for x in range(scenario.n_inputs_a):
            for y in range(scenario.n_inputs_b):
                probs[x, y, strat.alice_outputs[x], strat.bob_outputs[y]] += w
    if total > 1.0 + EPS_FEAS:
        raise ValidationError(f"total weight {total} exceeds 1")
    completeness = COMPLETE if total >= 1.0 - EPS_FEAS else INCOMPLETE
    return clipped_behavior(scenario, probs, completeness)


def _stacked_povms(povms) -> np.ndarray:
    return np.stack([np.stack(list(per_input)) for per_input in povms])


def behavior_from_quantum(model: QuantumModel) -> Behavior:
    """Evaluate p(a,b|x,y) = tr(rho (E_a^x tensor F_b^y)).

    The model is validated first; imaginary residues above IMAG_TOL are
    rejected rather than silently discarded.
    """
    report = validate(model)
    if report:
        raise ValidationError("quantum model violates invariants", report)
    da, db = model.dim_a, model.dim_b
    rho4 = model.state.reshape(da, db, da, db)
    es = _stacked_povms(model.alice_povms)   # (Na, Ma, da, da)
    fs = _stacked_povms(model.bob_povms)     # (Nb, Mb, db, db)
    # tr(rho (E tensor F)) = sum E[i,j] F[k,l] rho4[j,l,i,k]
    raw = np.einsum("xaij,ybkl,jlik->xyab", es, fs, rho4, optimize=True)
    worst_imag = float(np.max(np.abs(raw.imag))) if raw.size else 0.0
    if worst_imag > IMAG_TOL:
        raise ValidationError(f"imaginary residue {worst_imag:.3g} exceeds {IMAG_TOL}")
    scenario = model.scenario
    return clipped_behavior(scenario, raw.real, model.completeness)


def _check_hermitian_psd(mat: np.ndarray, name: str, out: list) -> None:
    herm = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
    if herm > EPS_FEAS:
        out.append(InvariantViolation("hermitian", name, herm))
        return
    w = np.linalg.eigvalsh(hermitian_part(mat))
    if w.size and w[0] < -EPS_FEAS:
        out.append(InvariantViolation("positive semidefinite", name, float(-w[0])))


def validate(obj) -> tuple[InvariantViolation, ...]:
    """Check the invariants of any core object; empty tuple means clean."""
    out: list[InvariantViolation] = []
    if isinstance(obj, BellFunctional):
        bad = ~np.isfinite(obj.coeffs)
        if bad.any():
            idx = tuple(int(v) for v in np.argwhere(bad)[0])
            out.append(InvariantViolation("finite entries", f"coeffs{list(idx)}", float("inf")))
    elif isinstance(obj, Behavior):
        probs = obj.probs
        bad = ~np.isfinite(probs)
        if bad.any():
            idx = tuple(int(v) for v in np.argwhere(bad)[0])
            out.append(InvariantViolation("finite entries", f"probs{list(idx)}", float("inf")))
            return tuple(out)
        neg = probs < -EPS_FEAS
        for idx in np.argwhere(neg):
            x, y, a, b = (int(v) for v in idx)
            out.append(
                InvariantViolation(
                    "nonnegative probability",
                    f"probs[{x}][{y}][{a}][{b}]",
                    float(-probs[x, y, a, b]),
                )
            )
        sums = probs.sum(axis=(2, 3))
        for x in range(obj.scenario.n_inputs_a):
            for y in range(obj.scenario.n_inputs_b):
                s = float(sums[x, y])
                if obj.is_complete and abs(s - 1.0) > EPS_FEAS:
                    out.append(
                        InvariantViolation("block mass = 1", f"(x={x}, y={y})", abs(s - 1.0))
                    )
                elif not obj.is_complete and s > 1.0 + EPS_FEAS:
                    out.append(
                        InvariantViolation("block mass <= 1", f"(x={x}, y={y})", s - 1.0)
                    )
    elif isinstance(obj, LocalModel):
        for i, (w, _) in enumerate(obj.weights):
            if w < -EPS_FEAS:
                out.append(InvariantViolation("nonnegative weight", f"weights[{i}]", float(-w)))
        total = obj.total_weight
        if total > 1.0 + EPS_FEAS:
            out.append(InvariantViolation("total weight <= 1", "weights", total - 1.0))
    elif isinstance(obj, QuantumModel):
        _check_hermitian_psd(obj.state, "state", out)
        tr = float(np.trace(obj.state).real)
        if abs(tr - 1.0) > EPS_FEAS:
            out.append(InvariantViolation("unit trace", "state", abs(tr - 1.0)))
        for party, povms, dim in (
            ("alice", obj.alice_povms, obj.dim_a),
            ("bob", obj.bob_povms, obj.dim_b),
        ):
            for x, povm in enumerate(povms):
                for a, el in enumerate(povm):
                    _check_hermitian_psd(el, f"{party} POVM[{x}][{a}]", out)
                total = sum(povm)
                if obj.completeness == COMPLETE:
                    dev = float(np.max(np.abs(total - np.eye(dim))))
                    if dev > EPS_FEAS:
                        out.append(
                            InvariantViolation("POVM sums to identity", f"{party} input {x}", dev)
                        )
                else:
                    w = np.linalg.eigvalsh(hermitian_part(total))
                    if w[-1] > 1.0 + EPS_FEAS:
                        out.append(
                            InvariantViolation(
                                "POVM sum below identity", f"{party} input {x}", float(w[-1] - 1.0)
                            )
                        )
    else:
        raise TypeError(f"validate() does not handle {type(obj).__name__}")
    return tuple(out)


def no_signaling_check(behavior: Behavior) -> NoSignalingResult:
    """Worst marginal discrepancy across the two no-signaling conditions.

    Alice's marginal of p must not depend on Bob's input and vice versa.
    Only defined for complete behaviors.
    """
    if not behavior.is_complete:
        raise ValidationError("no-signaling check is undefined for incomplete behaviors")
    probs = behavior.probs
    # marg_a[x, a, y] = sum_b p(ab|xy); spread across y must vanish
    marg_a = probs.sum(axis=3).transpose(0, 2, 1)
    marg_b = probs.sum(axis=2).transpose(1, 2, 0)
    worst = 0.0
    location = ""
    spread_a = marg_a.max(axis=2) - marg_a.min(axis=2)
    if spread_a.size:
        x, a = np.unravel_index(int(np.argmax(spread_a)), spread_a.shape)
        if float(spread_a[x, a]) > worst:
            worst = float(spread_a[x, a])
            location = f"alice marginal (x={int(x)}, a={int(a)})"
    spread_b = marg_b.max(axis=2) - marg_b.min(axis=2)
    if spread_b.size:
        y, b = np.unravel_index(int(np.argmax(spread_b)), spread_b.shape)
        if float(spread_b[y, b]) > worst:
            worst = float(spread_b[y, b])
            location = f"bob marginal (y={int(y)}, b={int(b)})"
    return NoSignalingResult(worst <= NS_TOL, worst, location)
