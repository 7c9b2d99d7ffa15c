"""Low-energy effective Hamiltonians in the local qubit basis.

The unperturbed qubit subspace is spanned by products of the two lowest
eigenvectors of each renormalized single-qubit Hamiltonian.  Effective
Hamiltonians are obtained either exactly, by rotating the lowest ``d``
eigenvectors of ``H`` onto that subspace through the polar factor of their
overlap matrix, or perturbatively to first or second order in ``V = H - H0``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    DegenerateQubit,
    DegenerateSpectrum,
    DimensionMismatch,
    InsufficientExcitedBasis,
    SubspaceMismatch,
)
from .numerics import (
    DEFAULT_SEED,
    DEGENERACY_RTOL,
    check_hermitian,
    eigh_dense,
    lanczos_lowest,
    rayleigh_quotients,
    refine_ritz,
    svd_small,
)

MIN_SINGULAR = 1e-6
QUBIT_GAP_FLOOR = 1e-12
PAULI = {
    "I": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class Method(str, Enum):
    swt_exact = "swt_exact"
    perturbative_1 = "perturbative_1"
    perturbative_2 = "perturbative_2"


class Verdict(str, Enum):
    stoquastic = "stoquastic"
    non_stoquastic = "non_stoquastic"
    boundary = "boundary"


@dataclass(frozen=True)
class SolverSettings:
    """How to obtain low-lying eigenpairs of the full Hamiltonian."""

    method: str = "auto"  # dense | lanczos | auto
    tol: float = 1e-10
    dense_limit: int = 2000
    seed: int = DEFAULT_SEED
    max_basis: int = 1600

    def __post_init__(self):
        if self.method not in ("dense", "lanczos", "auto"):
            raise ValueError(f"unknown solver method {self.method!r}")

    def use_dense(self, dim):
        return self.method == "dense" or (self.method == "auto" and dim <= self.dense_limit)


def lowest_eigenpairs(H, k, settings=None, mirror=False):
    """Lowest ``k`` eigenpairs of a charge-basis operator or matrix."""
    settings = settings or SolverSettings()
    M = getattr(H, "matrix", H)
    n = M.shape[0]
    if settings.use_dense(n) or k >= n:
        return eigh_dense(M, k=min(k, n), mirror=mirror)
    return lanczos_lowest(
        M,
        k,
        tol=settings.tol,
        seed=settings.seed,
        max_basis=settings.max_basis,
        mirror=mirror,
    )


@dataclass(frozen=True)
class QubitSubspace:
    """Product basis ``|00>, |01>, |10>, |11>`` (or ``|0>, |1>``), qubit-1-major."""

    basis: np.ndarray
    energies0: np.ndarray
    single: tuple = ()  # full dense Spectrum of each single-qubit Hamiltonian

    @property
    def d(self):
        return self.basis.shape[1]

    @property
    def projector(self):
        return self.basis @ self.basis.conj().T

    def gaps(self):
        """Signed single-qubit splittings ``E_1 - E_0``."""
        return tuple(float(s.eigenvalues[1] - s.eigenvalues[0]) for s in self.single)


def qubit_projector(pair):
    """Qubit subspace of ``pair.H0`` from phase-fixed single-qubit eigenvectors.

    Raises
    ------
    DegenerateQubit
        If a single-qubit ground doublet is split by less than ``1e-12 E_J``.
    """
    spectra = []
    for q, op in enumerate(pair.single_qubit):
        spec = eigh_dense(op.matrix, mirror=True)
        low = spec.eigenvectors[:, :2]
        spec.eigenvalues[:2] = rayleigh_quotients(op.matrix, low, float(np.mean(spec.eigenvalues[:2])))
        gap = spec.eigenvalues[1] - spec.eigenvalues[0]
        if gap <= QUBIT_GAP_FLOOR:
            raise DegenerateQubit(f"qubit {q} gap {gap:.3e} E_J is below {QUBIT_GAP_FLOOR}")
        spectra.append(spec)
    vecs = [s.eigenvectors[:, :2] for s in spectra]
    energies = [s.eigenvalues[:2] for s in spectra]
    if len(spectra) == 1:
        basis, e0 = vecs[0], energies[0]
    else:
        basis = np.stack([np.kron(vecs[0][:, i], vecs[1][:, j]) for i in (0, 1) for j in (0, 1)], axis=1)
        e0 = np.array([energies[0][i] + energies[1][j] for i in (0, 1) for j in (0, 1)])
    return QubitSubspace(basis=basis, energies0=np.asarray(e0), single=tuple(spectra))


@dataclass(frozen=True)
class EffectiveHamiltonian:
    matrix: np.ndarray
    method: Method
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        check_hermitian(M, tol=1e-10 * max(1.0, np.max(np.abs(M))))
        object.__setattr__(self, "matrix", 0.5 * (M + M.conj().T))


def swt_effective(H, sub, settings=None, spectrum=None):
    """Exact Schrieffer-Wolff effective Hamiltonian.

    With ``B[i, j] = <basis_i | v_j>`` for the lowest ``d`` eigenvectors
    ``v_j`` of ``H`` and ``B = W S V^H``, the unitary part ``A = W V^H``
    maps the interacting low-energy subspace onto the qubit subspace and
    ``H_eff = A diag(E) A^H``.

    Raises
    ------
    SubspaceMismatch
        If the smallest singular value of ``B`` is at most ``1e-6``.
    DegenerateSpectrum
        If ``E_{d-1}`` and ``E_d`` coincide within ``1e-12 ||H||``.
    """
    d = sub.d
    M = getattr(H, "matrix", H)
    if M.shape[0] != sub.basis.shape[0]:
        raise DimensionMismatch(f"H has dim {M.shape[0]}, subspace lives in {sub.basis.shape[0]}")
    if spectrum is None:
        spectrum = lowest_eigenpairs(M, d + 1, settings)
    E = np.asarray(spectrum.eigenvalues)
    if len(E) > d and E[d] - E[d - 1] < DEGENERACY_RTOL * max(spectrum.norm_estimate, 1e-300):
        raise DegenerateSpectrum(f"eigenvalues {d - 1} and {d} coincide: {E[d - 1]!r}, {E[d]!r}")
    # shifted Ritz step: eigenvalue roundoff drops from eps*||H|| to eps*spread
    w, X, shift = refine_ritz(M, spectrum.eigenvectors[:, :d])
    B = sub.basis.conj().T @ X
    f = svd_small(B)
    if f.singulars[-1] <= MIN_SINGULAR:
        raise SubspaceMismatch(float(f.singulars[-1]))
    A = f.left @ f.right.conj().T
    Heff = (A * w) @ A.conj().T + shift * np.eye(d)
    return EffectiveHamiltonian(
        Heff,
        Method.swt_exact,
        {"singulars": f.singulars, "energies": w + shift, "residuals": spectrum.residual_norms[:d]},
    )


@dataclass(frozen=True)
class PerturbativeExpansion:
    """Excited states of ``H0`` outside the qubit subspace, ascending in energy.

    ``overlaps[a, i] = <a|V|i>`` for excited state ``a`` and qubit state ``i``;
    the excited vectors themselves are never materialized in the full space.
    """

    energies: np.ndarray
    overlaps: np.ndarray
    lam: float = 1.0

    @property
    def size(self):
        return len(self.energies)


def excited_couplings(pair, sub):
    """``<alpha|V|i>`` for every product eigenstate ``alpha`` of ``H0`` outside the subspace."""
    V = pair.V.matrix
    W = V @ sub.basis  # columns V|i>
    spectra = sub.single
    if len(spectra) == 1:
        U = spectra[0].eigenvectors
        coeff = U.conj().T @ W
        energies = spectra[0].eigenvalues
        keep = np.arange(len(energies)) >= 2
        return energies[keep], coeff[keep]
    U1, U2 = spectra[0].eigenvectors, spectra[1].eigenvectors
    E1, E2 = spectra[0].eigenvalues, spectra[1].eigenvalues
    D1, D2 = len(E1), len(E2)
    coeff = np.empty((D1 * D2, sub.d), dtype=complex)
    for i in range(sub.d):
        w = W[:, i].reshape(D1, D2)
        coeff[:, i] = (U1.conj().T @ w @ U2.conj()).ravel()
    energies = (E1[:, None] + E2[None, :]).ravel()
    inside = np.zeros((D1, D2), dtype=bool)
    inside[:2, :2] = True
    keep = ~inside.ravel()
    return energies[keep], coeff[keep]


def perturbative_expansion(pair, sub, size=None):
    """Excited basis sorted by energy, truncated to the lowest ``size`` states (all if ``None``)."""
    energies, coeff = excited_couplings(pair, sub)
    order = np.argsort(energies, kind="stable")
    if size is not None:
        order = order[:size]
    return PerturbativeExpansion(energies[order], coeff[order])


def _second_order(sub, exp, count):
    E0 = sub.energies0
    Ea = exp.energies[:count]
    C = exp.overlaps[:count]  # <a|V|i>
    inv = 1.0 / (E0[None, :] - Ea[:, None])  # (a, i)
    # 1/2 sum_a (1/(E_i-E_a) + 1/(E_j-E_a)) <i|V|a><a|V|j>
    left = (C.conj() * inv).T @ C
    right = C.conj().T @ (C * inv)
    return 0.5 * (left + right)


def perturbative_effective(pair, sub, order, exp=None, start=32, cap=512, rtol=1e-8):
    """First- or second-order perturbative effective Hamiltonian.

    The second-order sum runs over the ``M`` lowest excited product states.
    ``M`` starts at ``start`` and doubles until the correction changes by at
    most ``rtol`` (relative, Frobenius norm), up to ``cap``; ``cap="all"``
    allows the full excited basis.

    Raises
    ------
    InsufficientExcitedBasis
        If the correction is still moving at the cap.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    V = pair.V.matrix
    H1 = np.diag(sub.energies0).astype(complex) + sub.basis.conj().T @ (V @ sub.basis)
    if order == 1:
        return EffectiveHamiltonian(H1, Method.perturbative_1)
    exp = exp or perturbative_expansion(pair, sub)
    total = exp.size
    limit = total if cap == "all" else min(cap, total)
    M = min(start, limit)
    prev = _second_order(sub, exp, M)
    converged = M == total
    while not converged and M < limit:
        nxt_M = min(2 * M, limit)
        nxt = _second_order(sub, exp, nxt_M)
        change = np.linalg.norm(nxt - prev)
        converged = nxt_M == total or change <= rtol * max(np.linalg.norm(nxt), 1e-300)
        M, prev = nxt_M, nxt
    if not converged:
        raise InsufficientExcitedBasis(f"second-order sum not converged with M={M} of {total} states")
    return EffectiveHamiltonian(H1 + prev, Method.perturbative_2, {"excited_states": M})


@dataclass(frozen=True)
class PauliCoefficients:
    """Expansion ``M = sum_P c_P P`` over Pauli strings, labels like ``"xz"``, ``"xI"``, ``"II"``.

    For a single qubit, labels are one character.  ``delta`` holds
    ``2 c_z`` per qubit, so ``diag(1, -1)`` has ``delta = 2``.
    """

    coefficients: dict

    @property
    def n_qubits(self):
        return len(next(iter(self.coefficients)))

    @property
    def offset(self):
        return self.coefficients["I" * self.n_qubits]

    @property
    def delta(self):
        if self.n_qubits == 1:
            return (2.0 * self.coefficients["z"],)
        return (2.0 * self.coefficients["zI"], 2.0 * self.coefficients["Iz"])

    def J(self, label):
        return self.coefficients[label]

    def reconstruct(self):
        d = 2**self.n_qubits
        M = np.zeros((d, d), dtype=complex)
        for label, c in self.coefficients.items():
            M += c * pauli_string(label)
        return M


def pauli_string(label):
    mats = [PAULI[ch] for ch in label]
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def pauli_decompose(eff):
    """Pauli coefficients ``Tr(P M) / d`` of a 2×2 or 4×4 Hermitian matrix."""
    M = np.asarray(getattr(eff, "matrix", eff), dtype=complex)
    d = M.shape[0]
    if M.shape != (d, d) or d not in (2, 4):
        raise DimensionMismatch(f"expected a 2x2 or 4x4 matrix, got {M.shape}")
    check_hermitian(M, tol=1e-10 * max(1.0, np.max(np.abs(M))))
    nq = 1 if d == 2 else 2
    coeffs = {}
    for chars in itertools.product("Ixyz", repeat=nq):
        label = "".join(chars)
        coeffs[label] = float(np.trace(pauli_string(label) @ M).real / d)
    return PauliCoefficients(coeffs)


def effective_observable(obs, sub):
    """First-order effective operator ``P0 O P0`` in Pauli form."""
    M = getattr(obs, "matrix", obs)
    if M.shape[0] != sub.basis.shape[0]:
        raise DimensionMismatch(f"observable has dim {M.shape[0]}, subspace lives in {sub.basis.shape[0]}")
    return pauli_decompose(sub.basis.conj().T @ (M @ sub.basis))


def stoquastic_test(matrix, tol=1e-10):
    """Sign-structure verdict: off-diagonals real and non-positive means stoquastic."""
    M = np.asarray(matrix, dtype=complex)
    check_hermitian(M, tol=max(1e-12, tol))
    off = M[~np.eye(M.shape[0], dtype=bool)]
    if np.all(np.abs(off) <= tol):
        return Verdict.boundary
    if np.all(np.abs(off.imag) <= tol) and np.all(off.real <= tol):
        return Verdict.stoquastic
    return Verdict.non_stoquastic
