"""Declarative circuit description and capacitance-network assembly.

Each three-junction qubit has nodes ``0, 1, 2`` with junctions

* ``a``: 0-1, capacitance ``C``, Josephson energy ``E_J``
* ``b``: 0-2, capacitance ``C``, Josephson energy ``E_J``
* ``c``: 1-2, capacitance ``alpha*C`` (plus a ``beta*C`` shunt), energy ``alpha*E_J``

One node per qubit is grounded and removed.  All capacitances are stored in
units of ``C``; matrices are indexed by the non-ground nodes, qubit 1 first,
node labels ascending inside each qubit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import SingularNetwork, ValidationError

NODES = (0, 1, 2)


class CouplerKind(str, Enum):
    capacitor = "capacitor"
    junction = "junction"
    mutual_inductance = "mutual_inductance"


@dataclass(frozen=True)
class QubitParams:
    """Single 3JJ flux qubit.  ``f`` is the external flux in units of the flux quantum."""

    alpha: float = 0.7
    r: float = 50.0
    beta: float = 0.0
    f: float = 0.5
    ground: int = 0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValidationError("alpha", f"must be > 0, got {self.alpha}")
        if not self.r > 0:
            raise ValidationError("r", f"must be > 0, got {self.r}")
        if not self.beta >= 0:
            raise ValidationError("beta", f"must be >= 0, got {self.beta}")
        if self.ground not in NODES:
            raise ValidationError("ground", f"must be one of {NODES}, got {self.ground}")

    @property
    def active_nodes(self):
        return tuple(n for n in NODES if n != self.ground)


@dataclass(frozen=True)
class CouplerSpec:
    """Two-terminal coupling element.

    ``source`` and ``target`` are ``(qubit_index, node)`` pairs.  A capacitor
    with ``target=None`` runs from ``source`` to an external voltage source
    (ground while no bias is applied); it loads the qubit and carries the
    ``delta_V`` drive.
    """

    kind: CouplerKind
    source: tuple
    target: tuple | None = None
    gamma: float = 0.0
    mutual: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", CouplerKind(self.kind))
        object.__setattr__(self, "source", tuple(self.source))
        if self.target is not None:
            object.__setattr__(self, "target", tuple(self.target))
        if self.gamma < 0:
            raise ValidationError("gamma", f"must be >= 0, got {self.gamma}")

    @property
    def to_source(self):
        return self.target is None


@dataclass(frozen=True)
class CircuitSpec:
    qubits: tuple
    couplers: tuple = ()
    r: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "couplers", tuple(self.couplers))
        validate_spec(self)
        object.__setattr__(self, "r", self.qubits[0].r)

    def modes(self):
        """``[(qubit, node), ...]`` in matrix order."""
        return [(q, n) for q, qb in enumerate(self.qubits) for n in qb.active_nodes]

    def mode_index(self):
        return {key: i for i, key in enumerate(self.modes())}

    def qubit_modes(self, q):
        return [i for i, (qq, _) in enumerate(self.modes()) if qq == q]

    def with_qubits(self, **changes):
        return replace(self, qubits=tuple(replace(qb, **changes) for qb in self.qubits))


def validate_spec(spec):
    """Check structural constraints; raise ``ValidationError`` with a path."""
    nq = len(spec.qubits)
    if nq not in (1, 2):
        raise ValidationError("circuit.qubits", f"need 1 or 2 qubits, got {nq}")
    rs = {qb.r for qb in spec.qubits}
    if len(rs) > 1:
        raise ValidationError("circuit.qubits", "all qubits must share r (E_J/E_C is the global unit)")
    n_mutual = 0
    for j, c in enumerate(spec.couplers):
        path = f"circuit.couplers[{j}]"
        ends = [("from", c.source)] + ([] if c.target is None else [("to", c.target)])
        for name, end in ends:
            if len(end) != 2:
                raise ValidationError(f"{path}.{name}", "endpoint must be [qubit, node]")
            q, node = end
            if not (isinstance(q, (int, np.integer)) and 0 <= q < nq):
                raise ValidationError(f"{path}.{name}", f"qubit index {q} out of range")
            if node not in NODES:
                raise ValidationError(f"{path}.{name}", f"node {node} not in {NODES}")
            if node == spec.qubits[q].ground:
                raise ValidationError(f"{path}.{name}", f"node {node} of qubit {q} is grounded")
        if c.target is None:
            if c.kind is not CouplerKind.capacitor:
                raise ValidationError(f"{path}.to", "only capacitors may connect to a voltage source")
        elif c.source[0] == c.target[0]:
            raise ValidationError(f"{path}.to", "coupler endpoints must be on distinct qubits")
        if c.kind is CouplerKind.mutual_inductance:
            n_mutual += 1
            if n_mutual > 1:
                raise ValidationError(path, "at most one mutual_inductance coupler")
            if nq != 2:
                raise ValidationError(path, "mutual inductance needs two qubits")


def qubit_capacitance(qb):
    """3×3 node capacitance matrix (units of C) of an isolated qubit, ground included."""
    small = qb.alpha + qb.beta
    return np.array(
        [
            [2.0, -1.0, -1.0],
            [-1.0, 1.0 + small, -small],
            [-1.0, -small, 1.0 + small],
        ]
    )


@dataclass(frozen=True)
class CapacitanceNetwork:
    full: np.ndarray
    inverse: np.ndarray | None = None
    qubit_blocks: tuple = ()
    mutual_block: np.ndarray | None = None
    det_single: tuple = ()
    qubit_full_blocks: tuple = ()
    modes: tuple = ()


def assemble_capacitance(spec):
    """Full capacitance matrix over the non-ground nodes (units of C)."""
    modes = spec.modes()
    index = spec.mode_index()
    C = np.zeros((len(modes), len(modes)))
    for q, qb in enumerate(spec.qubits):
        Cq = qubit_capacitance(qb)
        for a in qb.active_nodes:
            for b in qb.active_nodes:
                C[index[q, a], index[q, b]] += Cq[a, b]
    for c in spec.couplers:
        if c.kind is not CouplerKind.capacitor or c.gamma == 0:
            continue
        i = index[c.source]
        C[i, i] += c.gamma
        if c.target is not None:
            j = index[c.target]
            C[j, j] += c.gamma
            C[i, j] -= c.gamma
            C[j, i] -= c.gamma
    try:
        np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        raise SingularNetwork("capacitance matrix is not positive definite") from None
    return CapacitanceNetwork(full=C, modes=tuple(modes))


def invert_blocks(network, spec):
    """Fill the inverse and its qubit/mutual partitions.

    ``qubit_blocks[q]`` is the diagonal block of the full inverse (the
    renormalized inverse capacitance of qubit ``q``); ``mutual_block`` is the
    qubit-1 × qubit-2 off-diagonal block.  ``det_single[q]`` is the
    determinant of the qubit's diagonal block of the full matrix.
    """
    C = network.full
    try:
        L = np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        raise SingularNetwork("capacitance matrix is not positive definite") from None
    Linv = np.linalg.solve(L, np.eye(len(C)))
    inv = Linv.T @ Linv
    inv = 0.5 * (inv + inv.T)
    blocks, full_blocks, dets = [], [], []
    for q in range(len(spec.qubits)):
        idx = spec.qubit_modes(q)
        blocks.append(inv[np.ix_(idx, idx)])
        full_blocks.append(C[np.ix_(idx, idx)])
        dets.append(float(np.linalg.det(C[np.ix_(idx, idx)])))
    mutual = None
    if len(spec.qubits) == 2:
        mutual = inv[np.ix_(spec.qubit_modes(0), spec.qubit_modes(1))]
    return replace(
        network,
        inverse=inv,
        qubit_blocks=tuple(blocks),
        mutual_block=mutual,
        det_single=tuple(dets),
        qubit_full_blocks=tuple(full_blocks),
    )


def capacitance_network(spec):
    return invert_blocks(assemble_capacitance(spec), spec)


def loading(spec, q):
    """Total coupling capacitance (units of C) attached to qubit ``q``."""
    total = 0.0
    for c in spec.couplers:
        if c.kind is CouplerKind.capacitor:
            if c.source[0] == q or (c.target is not None and c.target[0] == q):
                total += c.gamma
    return total
