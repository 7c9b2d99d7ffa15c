"""Charge-basis Hamiltonians for single and coupled 3JJ flux qubits.

Each node variable is a mode with Cooper-pair number ``n = -N..N``.  Modes
are combined by Kronecker products with mode 0 most significant, so the
flat index of ``(n_0, n_1, ...)`` is row-major over ``n_m + N``.

In the number basis ``e^{i phi}`` lowers the charge by one,
``e^{i phi} = sum_n |n-1><n|``; cosines of integer combinations of node
phases are products of these shifts.  All energies are in units of ``E_J``
with ``E_C = E_J / r``, so the kinetic term reads ``(4/r) n^T c^{-1} n``
with ``c`` the capacitance matrix in units of ``C``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .circuit import CapacitanceNetwork, CircuitSpec, CouplerKind, capacitance_network
from .errors import CutoffTooSmall, NonIntegerWinding

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ModeSpace:
    modes: int
    cutoff: int

    def __post_init__(self):
        if self.modes < 1:
            raise ValueError(f"need at least one mode, got {self.modes}")
        if self.cutoff < 1:
            raise CutoffTooSmall(f"cutoff N must be >= 1, got {self.cutoff}")

    @property
    def dim_per_mode(self):
        return 2 * self.cutoff + 1

    @property
    def total_dim(self):
        return self.dim_per_mode**self.modes

    @property
    def shape(self):
        return (self.dim_per_mode,) * self.modes

    def charges(self):
        """``(modes, total_dim)`` integer array: the charge of every mode in every basis state."""
        grid = np.indices(self.shape).reshape(self.modes, -1)
        return grid - self.cutoff


@dataclass(frozen=True)
class ChargeBasisOperator:
    """Sparse Hermitian operator on a :class:`ModeSpace`, in units of ``E_J``."""

    space: ModeSpace
    matrix: sp.csr_matrix
    energy_unit: str = "E_J"

    def __post_init__(self):
        n = self.space.total_dim
        if self.matrix.shape != (n, n):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match space dim {n}")
        object.__setattr__(self, "matrix", sp.csr_matrix(self.matrix))

    @property
    def dim(self):
        return self.space.total_dim

    def toarray(self):
        return self.matrix.toarray()

    def _wrap(self, matrix):
        return ChargeBasisOperator(self.space, matrix, self.energy_unit)

    def __add__(self, other):
        return self._wrap(self.matrix + _matrix_of(other))

    def __sub__(self, other):
        return self._wrap(self.matrix - _matrix_of(other))

    def __mul__(self, scalar):
        return self._wrap(self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.matrix)

    def __matmul__(self, other):
        return self.matrix @ _matrix_of(other)


def _matrix_of(x):
    return x.matrix if isinstance(x, ChargeBasisOperator) else x


class ModeOperators(NamedTuple):
    number: ChargeBasisOperator
    lower: sp.csr_matrix


def _single_mode_lower(N):
    d = 2 * N + 1
    return sp.diags(np.ones(d - 1), 1, shape=(d, d), format="csr")


def _single_mode_shift(N, k):
    """Truncated ``e^{i k phi}``: lowers the charge by ``k``."""
    d = 2 * N + 1
    return sp.diags(np.ones(d - abs(k)), k, shape=(d, d), format="csr")


def _embed(space, factors):
    """Kronecker product of per-mode matrices, ``None`` meaning identity."""
    d = space.dim_per_mode
    eye = sp.identity(d, format="csr")
    mats = [eye if f is None else f for f in factors]
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), mats)


def mode_operators(space, mode):
    """Number operator and the lowering (``e^{i phi}``) matrix of one mode."""
    if not 0 <= mode < space.modes:
        raise IndexError(f"mode {mode} out of range for {space.modes} modes")
    number = sp.diags(space.charges()[mode].astype(float), format="csr")
    factors = [None] * space.modes
    factors[mode] = _single_mode_lower(space.cutoff)
    return ModeOperators(ChargeBasisOperator(space, number), _embed(space, factors))


def _integer_weights(space, weights):
    w = np.asarray(weights, dtype=float)
    if w.shape != (space.modes,):
        raise ValueError(f"expected {space.modes} weights, got shape {w.shape}")
    k = np.rint(w)
    if np.any(np.abs(w - k) > 1e-12):
        raise NonIntegerWinding(f"winding weights must be integers, got {list(weights)}")
    k = k.astype(int)
    if np.any(np.abs(k) > 2 * space.cutoff):
        raise CutoffTooSmall(f"weights {k.tolist()} need shifts beyond 2N = {2 * space.cutoff}")
    return k


def _unit_phase(theta):
    """``exp(-i theta)`` with roundoff-level components snapped to zero."""
    c, s = np.cos(theta), -np.sin(theta)
    c = 0.0 if abs(c) < 1e-15 else c
    s = 0.0 if abs(s) < 1e-15 else s
    return complex(c, s)


def _phase_shift(space, weights):
    """``exp(i sum_m k_m phi_m)`` as a sparse matrix."""
    k = _integer_weights(space, weights)
    factors = [None if km == 0 else _single_mode_shift(space.cutoff, km) for km in k]
    return _embed(space, factors)


def branch_cosine(space, weights, theta=0.0):
    """``cos(sum_m k_m phi_m - theta)`` for integer windings ``k``."""
    E = _phase_shift(space, weights) * _unit_phase(theta)
    return ChargeBasisOperator(space, _real_if_possible(0.5 * (E + E.conj().T)))


def branch_sine(space, weights, theta=0.0):
    """``sin(sum_m k_m phi_m - theta)`` for integer windings ``k``."""
    E = _phase_shift(space, weights) * _unit_phase(theta)
    return ChargeBasisOperator(space, _real_if_possible((E - E.conj().T) / 2j))


def charge_combination(space, weights):
    """Diagonal operator ``sum_m w_m n_m`` (real weights allowed)."""
    w = np.asarray(weights, dtype=float)
    return ChargeBasisOperator(space, sp.diags(w @ space.charges(), format="csr"))


def _real_if_possible(M):
    M = sp.csr_matrix(M)
    if M.nnz and np.max(np.abs(M.data.imag)) == 0.0:
        return sp.csr_matrix(M.real)
    M.eliminate_zeros()
    return M


def _quadratic_charge(space, inv, rows, cols, scale):
    """Diagonal of ``scale * sum_{i in rows, j in cols} inv[i, j] n_i n_j``."""
    n = space.charges().astype(float)
    block = inv[np.ix_(rows, cols)]
    diag = scale * np.einsum("it,ij,jt->t", n[rows], block, n[cols])
    return sp.diags(diag, format="csr")


@dataclass(frozen=True)
class HamiltonianPair:
    """Unperturbed and full Hamiltonians on the same space.

    ``H0`` is the sum of the renormalized single-qubit Hamiltonians, each of
    which is also kept on its own two-mode space in ``single_qubit``.
    """

    H0: ChargeBasisOperator
    H: ChargeBasisOperator
    single_qubit: tuple
    spec: CircuitSpec
    network: CapacitanceNetwork

    @property
    def V(self):
        return self.H - self.H0

    @property
    def space(self):
        return self.H.space


def _branch_weights(space, mapping, plus, minus):
    w = np.zeros(space.modes, dtype=int)
    if plus in mapping:
        w[mapping[plus]] += 1
    if minus in mapping:
        w[mapping[minus]] -= 1
    return w


def qubit_potential(space, qb, mapping, f=None):
    """Josephson energy ``-[cos(phi1-phi0) + cos(phi2-phi0) + alpha cos(phi2-phi1-2 pi f)]``."""
    f = qb.f if f is None else f
    big_a = branch_cosine(space, _branch_weights(space, mapping, 1, 0))
    big_b = branch_cosine(space, _branch_weights(space, mapping, 2, 0))
    small = branch_cosine(space, _branch_weights(space, mapping, 2, 1), TWO_PI * f)
    return -(big_a + big_b + qb.alpha * small)


def persistent_current(space, qb, mapping, f=None):
    """Circulating current in units of ``I_c``: ``alpha sin(phi2 - phi1 - 2 pi f)``.

    At ``f = 1/2`` this is ``-alpha sin(phi2 - phi1)``.
    """
    f = qb.f if f is None else f
    return qb.alpha * branch_sine(space, _branch_weights(space, mapping, 2, 1), TWO_PI * f)


def single_qubit_hamiltonian(qb, inv_block, cutoff, f=None):
    """Renormalized single-qubit Hamiltonian on its own two-mode space."""
    space = ModeSpace(2, cutoff)
    mapping = {node: i for i, node in enumerate(qb.active_nodes)}
    kinetic = _quadratic_charge(space, inv_block, [0, 1], [0, 1], 4.0 / qb.r)
    return ChargeBasisOperator(space, kinetic) + qubit_potential(space, qb, mapping, f)


def _embed_operator(space, op, q, nq):
    """Lift a two-mode single-qubit operator into the joint space."""
    if nq == 1:
        return op.matrix
    eye = sp.identity(op.dim, format="csr")
    parts = [op.matrix, eye] if q == 0 else [eye, op.matrix]
    return sp.kron(parts[0], parts[1], format="csr")


def build_hamiltonians(spec, network=None, cutoff=6, delta_f=0.0, delta_v=0.0):
    """Assemble ``H0`` and ``H`` for a circuit.

    Parameters
    ----------
    spec : CircuitSpec
    network : CapacitanceNetwork, optional
        Inverted network; computed from ``spec`` when omitted.
    cutoff : int
        Charge cutoff ``N`` per mode.
    delta_f : float
        Flux perturbation added to every qubit's ``f`` in ``H`` only.
    delta_v : float
        Reduced voltage ``C dV / e`` applied through every capacitor whose
        ``target`` is the external source.

    Returns
    -------
    HamiltonianPair
        ``H - H0`` contains only the capacitive cross term, coupler terms and
        the two perturbations.
    """
    if network is None or network.inverse is None:
        network = capacitance_network(spec)
    nq = len(spec.qubits)
    space = ModeSpace(2 * nq, cutoff)
    index = spec.mode_index()
    r = spec.r

    singles = tuple(
        single_qubit_hamiltonian(qb, network.qubit_blocks[q], cutoff) for q, qb in enumerate(spec.qubits)
    )
    H0 = sp.csr_matrix((space.total_dim, space.total_dim))
    for q, op in enumerate(singles):
        H0 = H0 + _embed_operator(space, op, q, nq)
    H0 = ChargeBasisOperator(space, H0)

    V = sp.csr_matrix((space.total_dim, space.total_dim))
    if nq == 2:
        rows, cols = spec.qubit_modes(0), spec.qubit_modes(1)
        if np.any(network.mutual_block != 0):
            # n^T c^-1 n counts each cross pair twice
            V = V + _quadratic_charge(space, network.inverse, rows, cols, 8.0 / r)

    mappings = [{node: index[q, node] for node in qb.active_nodes} for q, qb in enumerate(spec.qubits)]
    if delta_f != 0.0:
        for q, qb in enumerate(spec.qubits):
            shifted = qubit_potential(space, qb, mappings[q], qb.f + delta_f)
            V = V + (shifted - qubit_potential(space, qb, mappings[q])).matrix

    for c in spec.couplers:
        if c.kind is CouplerKind.junction and c.gamma != 0:
            w = np.zeros(space.modes, dtype=int)
            w[index[c.target]] += 1
            w[index[c.source]] -= 1
            V = V - c.gamma * branch_cosine(space, w).matrix
        elif c.kind is CouplerKind.mutual_inductance and c.mutual != 0:
            (qa, _), (qb_, _) = c.source, c.target
            Ia = persistent_current(space, spec.qubits[qa], mappings[qa])
            Ib = persistent_current(space, spec.qubits[qb_], mappings[qb_])
            V = V + 2.0 * c.mutual * (Ia.matrix @ Ib.matrix)
        elif c.kind is CouplerKind.capacitor and c.target is None and delta_v != 0 and c.gamma != 0:
            a = index[c.source]
            drive = network.inverse[a] @ space.charges().astype(float)
            V = V - (4.0 / r) * c.gamma * delta_v * sp.diags(drive, format="csr")

    H = ChargeBasisOperator(space, H0.matrix + V)
    return HamiltonianPair(H0=H0, H=H, single_qubit=singles, spec=spec, network=network)


def loaded_mass(alpha, r, gamma=0.0):
    """Effective mass of the ``phi_+`` coordinate with a capacitor ``gamma`` on one loop node."""
    return r * (2 * alpha + 1 + gamma * (alpha + 1)) / (2 * gamma + 4)


def build_1d(alpha, r, gamma=0.0, cutoff=8):
    """Reduced model ``n^2/(2m) - [2 cos phi - alpha cos 2 phi]`` along the intra-cell direction."""
    if cutoff < 2:
        raise CutoffTooSmall(f"the 1D model needs cos(2 phi), i.e. N >= 2, got {cutoff}")
    space = ModeSpace(1, cutoff)
    m = loaded_mass(alpha, r, gamma)
    n = space.charges()[0].astype(float)
    kinetic = ChargeBasisOperator(space, sp.diags(n**2 / (2 * m), format="csr"))
    return kinetic - 2.0 * branch_cosine(space, [1]) + alpha * branch_cosine(space, [2])
