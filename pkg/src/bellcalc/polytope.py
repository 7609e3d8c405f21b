"""Deterministic-strategy enumeration and the local polytope's vertex matrix.

Strategies are ordered lexicographically: Alice assignment index i encodes
her outputs in base n_outputs_a (most significant digit = input 0), Bob
likewise, and vertex v = i * (number of Bob strategies) + j.  Everything
downstream (tie-breaking, certificates, LP columns) relies on this order
being fixed.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp

from .core import DeterministicStrategy, Scenario
from .errors import GuardExceededError

# Hard caps, overridable through BELL_GUARD_LIMIT (documented as unsafe):
# the number of single-party assignments a brute-force enumeration may
# visit, and the number of polytope vertices an LP may carry as columns.
ENUM_GUARD = 10_000_000
VERTEX_GUARD = 100_000

_ENV_GUARD = "BELL_GUARD_LIMIT"


def guard_limit(default: int) -> int:
    """Resolve a guard, honoring the BELL_GUARD_LIMIT override."""
    raw = os.environ.get(_ENV_GUARD)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise GuardExceededError(f"{_ENV_GUARD} must be an integer, got {raw!r}") from exc


def check_enum_guard(count: int, what: str) -> None:
    limit = guard_limit(ENUM_GUARD)
    if count > limit:
        raise GuardExceededError(
            f"{what} needs {count} assignments, above the guard of {limit}; "
            f"set {_ENV_GUARD} to override (unsafe)"
        )


def check_vertex_guard(count: int, what: str) -> None:
    limit = guard_limit(VERTEX_GUARD)
    if count > limit:
        raise GuardExceededError(
            f"{what} needs {count} polytope vertices, above the guard of {limit}; "
            f"set {_ENV_GUARD} to override (unsafe)"
        )


def assignment_table(n_inputs: int, n_outputs: int) -> np.ndarray:
    """All deterministic single-party assignments, shape (S, n_inputs).

    Row i holds the outputs of assignment i in the lexicographic order
    described in the module docstring.
    """
    count = n_outputs ** n_inputs
    ids = np.arange(count)
    cols = []
    for k in range(n_inputs):
        divisor = n_outputs ** (n_inputs - 1 - k)
        cols.append((ids // divisor) % n_outputs)
    return np.stack(cols, axis=1)


_VERTEX_CACHE: dict[Scenario, sp.csr_matrix] = {}


def vertex_matrix(scenario: Scenario) -> sp.csr_matrix:
    """Sparse matrix of deterministic behaviors, one vertex per row.

    Shape (V, E) with V = S_A * S_B and E the flattened tensor size; the
    row for vertex v has a one at every entry (x, y, alpha(x), beta(y)).
    Rows follow the fixed lexicographic vertex order.
    """
    cached = _VERTEX_CACHE.get(scenario)
    if cached is not None:
        return cached
    na, nb, ma, mb = scenario.shape
    sa = scenario.alice_strategy_count()
    sb = scenario.bob_strategy_count()
    check_vertex_guard(sa * sb, "vertex matrix")
    av = assignment_table(na, ma)            # (sa, na)
    bv = assignment_table(nb, mb)            # (sb, nb)
    # entry index for (x, y, a, b) = ((x*nb + y)*ma + a)*mb + b
    x_idx = np.arange(na)[None, :, None]     # broadcast over (i, x, y)
    y_idx = np.arange(nb)[None, None, :]
    a_part = av[:, :, None]                  # (sa, na, 1)
    cols_a = (x_idx * nb + y_idx) * ma + a_part          # (sa, na, nb)
    cols_a = cols_a.reshape(sa, na * nb)
    cols_b = bv[:, None, :] + np.zeros((1, na, 1), dtype=int)  # (sb, na, nb)
    cols_b = cols_b.reshape(sb, na * nb)
    # columns for vertex (i, j): cols_a[i]*mb + cols_b[j]
    cols = (cols_a[:, None, :] * mb + cols_b[None, :, :]).reshape(sa * sb * na * nb)
    rows = np.repeat(np.arange(sa * sb), na * nb)
    data = np.ones(cols.size)
    mat = sp.csr_matrix((data, (rows, cols)), shape=(sa * sb, scenario.n_entries))
    if len(_VERTEX_CACHE) >= 8:
        _VERTEX_CACHE.clear()
    _VERTEX_CACHE[scenario] = mat
    return mat


def strategy_from_vertex(scenario: Scenario, vertex: int) -> DeterministicStrategy:
    """Inverse of the vertex ordering: index -> strategy."""
    sb = scenario.bob_strategy_count()
    i, j = divmod(int(vertex), sb)
    alice = assignment_table(scenario.n_inputs_a, scenario.n_outputs_a)[i]
    bob = assignment_table(scenario.n_inputs_b, scenario.n_outputs_b)[j]
    return DeterministicStrategy(tuple(alice), tuple(bob))
