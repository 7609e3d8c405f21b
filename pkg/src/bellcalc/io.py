"""Canonical JSON documents for functionals, behaviors, models, reports.

One fixed layout so files are diffable and stable across runs:

    {
      "format_version": "1",
      "kind": "functional" | "behavior" | "quantum_model" | "report",
      "scenario": {"na": .., "nb": .., "ma": .., "mb": ..},
      "payload": { ...kind specific... },
      "metadata": {"name": .., "provenance": ..}
    }

Coefficient and probability tensors nest as [x][y][a][b].  Complex
matrix entries serialize as [re, im] pairs.  Numbers are written with
shortest round-trip formatting, so parse(serialize(x)) reproduces x
bit for bit; serializers are pure functions of their inputs (no
timestamps), which is what makes command output byte-reproducible.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .core import (
    Behavior,
    BellFunctional,
    COMPLETE,
    DeterministicStrategy,
    INCOMPLETE,
    LocalModel,
    QuantumModel,
    Scenario,
)
from .errors import DocumentError

FORMAT_VERSION = "1"
KINDS = ("functional", "behavior", "quantum_model", "report")


def _py(value):
    """Recursively convert numpy scalars/arrays to plain Python types."""
    if isinstance(value, np.ndarray):
        return _py(value.tolist())
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, dict):
        return {k: _py(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_py(v) for v in value]
    return value


def _check_finite(value, path):
    if isinstance(value, float) and not math.isfinite(value):
        raise DocumentError(f"non-finite number at {path}")
    if isinstance(value, dict):
        for k, v in value.items():
            _check_finite(v, f"{path}.{k}")
    elif isinstance(value, list):
        for i, v in enumerate(value):
            _check_finite(v, f"{path}[{i}]")


def document(kind: str, scenario: Scenario | None, payload: dict,
             name: str, provenance: str) -> dict:
    if kind not in KINDS:
        raise DocumentError(f"unknown document kind {kind!r}")
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "scenario": None if scenario is None else {
            "na": scenario.n_inputs_a,
            "nb": scenario.n_inputs_b,
            "ma": scenario.n_outputs_a,
            "mb": scenario.n_outputs_b,
        },
        "payload": _py(payload),
        "metadata": {"name": name, "provenance": provenance},
    }
    _check_finite(doc["payload"], "payload")
    return doc


def dump_document(doc: dict) -> str:
    """Serialize with a trailing newline; floats keep full precision."""
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def parse_document(text: str, expect_kind: str | None = None) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(
            f"JSON parse error at byte {e.pos} (line {e.lineno}, column {e.colno}): {e.msg}"
        ) from e
    if not isinstance(doc, dict):
        raise DocumentError("document root must be an object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise DocumentError(
            f"format_version must be {FORMAT_VERSION!r}, got {version!r}"
        )
    kind = doc.get("kind")
    if kind not in KINDS:
        raise DocumentError(f"unknown document kind {kind!r}")
    if expect_kind is not None and kind != expect_kind:
        raise DocumentError(f"expected a {expect_kind} document, got {kind!r}")
    if "payload" not in doc or not isinstance(doc["payload"], dict):
        raise DocumentError("document payload must be an object")
    return doc


def load_document(path: str, expect_kind: str | None = None) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e.strerror}") from e
    return parse_document(text, expect_kind)


def _scenario_from_doc(doc: dict) -> Scenario:
    raw = doc.get("scenario")
    if not isinstance(raw, dict):
        raise DocumentError("document is missing its scenario object")
    try:
        fields = {k: raw[k] for k in ("na", "nb", "ma", "mb")}
    except KeyError as e:
        raise DocumentError(f"scenario is missing key {e.args[0]!r}") from e
    for k, v in fields.items():
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise DocumentError(f"scenario.{k} must be a positive integer")
    return Scenario(fields["na"], fields["nb"], fields["ma"], fields["mb"])


def _tensor_from_payload(payload: dict, key: str, scenario: Scenario) -> np.ndarray:
    if key not in payload:
        raise DocumentError(f"payload is missing {key!r}")
    try:
        arr = np.asarray(payload[key], dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise DocumentError(f"payload.{key} is not a numeric tensor: {e}") from e
    if arr.shape != scenario.shape:
        raise DocumentError(
            f"payload.{key} has shape {arr.shape}, scenario implies {scenario.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise DocumentError(f"payload.{key} contains non-finite entries")
    return arr


def _completeness_from_payload(payload: dict) -> str:
    flag = payload.get("completeness")
    if flag not in (COMPLETE, INCOMPLETE):
        raise DocumentError(
            f"payload.completeness must be {COMPLETE!r} or {INCOMPLETE!r}, got {flag!r}"
        )
    return flag


# -- functionals --------------------------------------------------------

def functional_document(functional: BellFunctional, name: str, provenance: str) -> dict:
    return document(
        "functional", functional.scenario,
        {"coeffs": functional.coeffs}, name, provenance,
    )


def _payload_of(doc) -> dict:
    if not isinstance(doc, dict) or not isinstance(doc.get("payload"), dict):
        raise DocumentError("document payload must be an object")
    return doc["payload"]


def functional_from_document(doc: dict) -> BellFunctional:
    payload = _payload_of(doc)
    scenario = _scenario_from_doc(doc)
    coeffs = _tensor_from_payload(payload, "coeffs", scenario)
    return BellFunctional(scenario, coeffs)


# -- behaviors ----------------------------------------------------------

def behavior_document(behavior: Behavior, name: str, provenance: str) -> dict:
    return document(
        "behavior", behavior.scenario,
        {"completeness": behavior.completeness, "probs": behavior.probs},
        name, provenance,
    )


def behavior_from_document(doc: dict) -> Behavior:
    payload = _payload_of(doc)
    scenario = _scenario_from_doc(doc)
    probs = _tensor_from_payload(payload, "probs", scenario)
    return Behavior(scenario, probs, _completeness_from_payload(payload))


# -- quantum models -----------------------------------------------------

def _matrix_out(matrix: np.ndarray):
    m = np.asarray(matrix, dtype=np.complex128)
    return np.stack([m.real, m.imag], axis=-1)


def _matrix_in(raw, dim: int, path: str) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise DocumentError(f"{path} is not a numeric matrix: {e}") from e
    if arr.shape != (dim, dim, 2):
        raise DocumentError(
            f"{path} has shape {arr.shape}, expected ({dim}, {dim}, 2) [re, im] entries"
        )
    if not np.all(np.isfinite(arr)):
        raise DocumentError(f"{path} contains non-finite entries")
    return arr[..., 0] + 1j * arr[..., 1]


def quantum_model_document(model: QuantumModel, name: str, provenance: str) -> dict:
    payload = {
        "dim_a": model.dim_a,
        "dim_b": model.dim_b,
        "completeness": model.completeness,
        "state": _matrix_out(model.state),
        "alice_povms": [[_matrix_out(el) for el in povm] for povm in model.alice_povms],
        "bob_povms": [[_matrix_out(el) for el in povm] for povm in model.bob_povms],
    }
    return document("quantum_model", model.scenario, payload, name, provenance)


def quantum_model_from_document(doc: dict) -> QuantumModel:
    payload = _payload_of(doc)
    for key in ("dim_a", "dim_b", "state", "alice_povms", "bob_povms"):
        if key not in payload:
            raise DocumentError(f"payload is missing {key!r}")
    da, db = payload["dim_a"], payload["dim_b"]
    for label, v in (("dim_a", da), ("dim_b", db)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise DocumentError(f"payload.{label} must be a positive integer")
    state = _matrix_in(payload["state"], da * db, "payload.state")

    def povms_in(raw, dim, label):
        if not isinstance(raw, list) or not raw:
            raise DocumentError(f"payload.{label} must be a non-empty list")
        out = []
        for x, povm in enumerate(raw):
            if not isinstance(povm, list) or not povm:
                raise DocumentError(f"payload.{label}[{x}] must be a non-empty list")
            out.append(tuple(
                _matrix_in(el, dim, f"payload.{label}[{x}][{a}]")
                for a, el in enumerate(povm)
            ))
        return tuple(out)

    return QuantumModel(
        da, db, state,
        povms_in(payload["alice_povms"], da, "alice_povms"),
        povms_in(payload["bob_povms"], db, "bob_povms"),
        completeness=_completeness_from_payload(payload),
    )


# -- local models (embedded in membership reports) ----------------------

def local_model_payload(model: LocalModel) -> list:
    return [
        {
            "weight": float(w),
            "alice_outputs": list(strategy.alice_outputs),
            "bob_outputs": list(strategy.bob_outputs),
        }
        for w, strategy in model.weights
    ]


def local_model_from_payload(raw, scenario: Scenario) -> LocalModel:
    if not isinstance(raw, list):
        raise DocumentError("local model payload must be a list")
    weights = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise DocumentError(f"local model entry [{i}] must be an object")
        try:
            w = float(entry["weight"])
            strategy = DeterministicStrategy(
                tuple(int(v) for v in entry["alice_outputs"]),
                tuple(int(v) for v in entry["bob_outputs"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DocumentError(f"local model entry [{i}] is malformed: {e}") from e
        strategy.check_against(scenario)
        weights.append((w, strategy))
    return LocalModel(tuple(weights))
