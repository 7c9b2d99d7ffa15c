"""Hermitian eigensolvers shared by the rest of the package.

Dense problems go through LAPACK (``scipy.linalg.eigh``); large sparse
problems use a block Lanczos iteration with full reorthogonalization.
Every returned eigenvector is phase-fixed so that downstream Pauli
coefficients are reproducible across solvers and runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import NoConvergence, NonHermitianInput

DEFAULT_SEED = 20210615
HERMITICITY_TOL = 1e-12
DEGENERACY_RTOL = 1e-12
_TIE_RTOL = 1e-8


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with phase-fixed, orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_norms: np.ndarray
    norm_estimate: float
    degenerate: bool = False
    iterations: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.eigenvalues)


@dataclass(frozen=True)
class SvdFactors:
    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray

    def reconstruct(self):
        return (self.left * self.singulars) @ self.right.conj().T


def check_hermitian(H, tol=HERMITICITY_TOL):
    """Raise ``NonHermitianInput`` unless ``H`` equals its conjugate transpose within ``tol``."""
    if H.shape[0] != H.shape[1]:
        raise NonHermitianInput(f"matrix is not square: {H.shape}")
    if sp.issparse(H):
        diff = H - H.conj().T
        worst = abs(diff).max() if diff.nnz else 0.0
    else:
        worst = np.max(np.abs(H - H.conj().T)) if H.size else 0.0
    if worst > tol:
        raise NonHermitianInput(f"matrix deviates from Hermitian by {worst:.3e}")


def fix_phases(vectors, mirror=False):
    """Multiply each column by a unit scalar to make its gauge deterministic.

    Default rule: the largest-magnitude entry (lowest index among ties) is
    made real and positive.

    With ``mirror=True`` the columns are taken to be eigenvectors of an
    operator commuting with ``K∘R`` (complex conjugation composed with index
    reversal).  In a charge basis with symmetric truncation, index reversal
    is ``n -> -n`` on every mode, and ``K∘R`` is time reversal; the phase is
    chosen so that ``v[::-1] == conj(v)``, i.e. the phase-space wavefunction
    is real.  The leftover sign is fixed by making the largest entry have a
    positive real part (positive imaginary part if it is purely imaginary).
    Columns that are not ``K∘R`` eigenvectors fall back to the default rule.
    """
    V = np.array(vectors, dtype=complex, copy=True)
    if V.ndim == 1:
        return fix_phases(V[:, None], mirror=mirror)[:, 0]
    for j in range(V.shape[1]):
        v = V[:, j]
        if mirror:
            s = np.dot(v, v[::-1])
            if abs(s) > 0.5:
                v = v * np.exp(-0.5j * np.angle(s))
                k = _lead_index(v)
                lead = v[k]
                if abs(lead.real) > _TIE_RTOL * abs(lead):
                    sign = np.sign(lead.real)
                else:
                    sign = np.sign(lead.imag)
                V[:, j] = v * sign
                continue
        k = _lead_index(v)
        V[:, j] = v * (abs(v[k]) / v[k])
    return V


def _lead_index(v):
    mags = np.abs(v)
    return int(np.flatnonzero(mags >= mags.max() * (1 - _TIE_RTOL))[0])


def _maybe_real(vectors):
    if np.max(np.abs(vectors.imag), initial=0.0) == 0.0:
        return vectors.real.copy()
    return vectors


def _is_degenerate(eigenvalues, norm):
    if len(eigenvalues) < 2:
        return False
    return bool(np.min(np.diff(eigenvalues)) < DEGENERACY_RTOL * max(norm, 1e-300))


def _residuals(H, values, vectors):
    R = H @ vectors - vectors * values
    return np.linalg.norm(R, axis=0)


def eigh_dense(H, k=None, mirror=False, check=True):
    """Full (or lowest-``k``) eigendecomposition of a dense Hermitian matrix.

    Sparse input is densified.  Residuals are computed explicitly.
    """
    if sp.issparse(H):
        H = H.toarray()
    H = np.asarray(H)
    if check:
        check_hermitian(H)
    n = H.shape[0]
    if k is None or k >= n:
        w, v = sla.eigh(H)
    else:
        w, v = sla.eigh(H, subset_by_index=[0, k - 1])
    norm = float(np.max(np.abs(w))) if k is None or k >= n else _norm_bound(H)
    v = fix_phases(v, mirror=mirror)
    if not np.iscomplexobj(H):
        v = _maybe_real(v) if not mirror else v
    res = _residuals(H, w, v)
    return Spectrum(w, v, res, norm, _is_degenerate(w, norm))


def _norm_bound(H):
    # Gershgorin-style bound; tolerances only need the scale
    if sp.issparse(H):
        return float(abs(H).sum(axis=1).max())
    return float(np.abs(H).sum(axis=1).max())


def lanczos_lowest(
    H,
    k,
    tol=1e-10,
    block_size=None,
    seed=DEFAULT_SEED,
    max_basis=1600,
    check_every=4,
    mirror=False,
):
    """Lowest ``k`` eigenpairs of a sparse Hermitian operator.

    Block Lanczos with full (two-pass) reorthogonalization against every
    stored Krylov vector.  The starting block is drawn from a fixed-seed
    generator, so results are bit-reproducible.  A block size of at least
    ``min(k, 4)`` resolves the near-degenerate doublets that single-vector
    Lanczos only separates after very many steps.

    Convergence requires ``||H v - λ v|| <= tol * ||H||`` for every returned
    pair, with ``||H||`` estimated from the extreme Ritz values.

    Raises
    ------
    NoConvergence
        If the basis reaches ``max_basis`` columns without meeting ``tol``.
    """
    n = H.shape[0]
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < dim, got k={k}, dim={n}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if sp.issparse(H):
        H = H.tocsr()
        check_hermitian(H)
    dtype = np.complex128 if np.iscomplexobj(H.data if sp.issparse(H) else H) else np.float64
    p = block_size or min(max(k, 4), n)
    p = min(p, n)
    max_basis = min(max_basis, n)

    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    if dtype == np.complex128:
        X = X + 1j * rng.standard_normal((n, p))
    Q = np.empty((n, max_basis), dtype=dtype)
    T = np.zeros((max_basis, max_basis), dtype=dtype)
    Q[:, :p], _ = np.linalg.qr(X)
    m, b = 0, p  # start and width of the current block
    steps = 0
    norm_est = 0.0

    while True:
        size = m + b
        cur = Q[:, m:size]
        W = H @ cur
        steps += 1
        A = cur.conj().T @ W
        T[m:size, m:size] = 0.5 * (A + A.conj().T)
        basis = Q[:, :size]
        # full reorthogonalization, twice is enough
        for _ in range(2):
            W -= basis @ (basis.conj().T @ W)
        nb = min(p, max_basis - size)
        # pivoted QR keeps the factorization exact when the remaining space is thinner than the block
        Qn, Rp, perm = sla.qr(W, mode="economic", pivoting=True)
        R = np.empty_like(Rp)
        R[:, perm] = Rp
        Qn, R = Qn[:, :nb], R[:nb, :]
        if nb:
            scale = max(norm_est, float(np.max(np.abs(np.diag(T[:size, :size])))), 1e-300)
            weak = np.abs(np.diag(Rp)[:nb]) < 1e-10 * scale
            if np.any(weak) and size + nb <= n:
                # invariant subspace reached: continue with fresh random directions
                for c in np.flatnonzero(weak):
                    y = rng.standard_normal(n).astype(dtype)
                    prev = np.concatenate([basis, Qn[:, :c]], axis=1)
                    for _ in range(2):
                        y -= prev @ (prev.conj().T @ y)
                    Qn[:, c] = y / np.linalg.norm(y)
                    R[c, :] = 0.0
        if not nb or steps % check_every == 0 or size >= n:
            theta, S = np.linalg.eigh(T[:size, :size])
            norm_est = max(norm_est, float(np.max(np.abs(theta))))
            if size >= n or not nb:
                est = np.zeros(k)
            else:
                est = np.linalg.norm(R @ S[m:size, :k], axis=0)
            if size >= k and np.all(est <= tol * norm_est):
                V, theta_k = _rayleigh_ritz(H, basis @ S[:, :k])
                res = _residuals(H, theta_k, V)
                if np.all(res <= tol * norm_est) or size >= n:
                    V = fix_phases(V, mirror=mirror)
                    if dtype == np.float64 and not mirror:
                        V = _maybe_real(V)
                    res = _residuals(H, theta_k, V)
                    return Spectrum(
                        theta_k,
                        V,
                        res,
                        norm_est,
                        _is_degenerate(theta_k, norm_est),
                        iterations=steps,
                        meta={"basis_size": size, "block_size": p},
                    )
            if not nb:
                raise NoConvergence(steps)
        Q[:, size : size + nb] = Qn
        T[size : size + nb, m:size] = R
        T[m:size, size : size + nb] = R.conj().T
        m, b = size, nb


def _rayleigh_ritz(H, V):
    """Re-orthonormalize ``V`` and rediagonalize ``H`` in its span."""
    V, _ = np.linalg.qr(V)
    G = V.conj().T @ (H @ V)
    w, S = np.linalg.eigh(0.5 * (G + G.conj().T))
    return V @ S, w


def refine_ritz(H, vectors, shift=None):
    """Rayleigh-Ritz refinement of an approximate invariant subspace.

    Working with ``H - shift`` (default: the mean Ritz value) keeps the
    roundoff of the refined eigenvalues at the scale of their spread rather
    than of ``||H||``.  Returns ``(values - shift, vectors, shift)``.
    """
    X, _ = np.linalg.qr(vectors)
    HX = H @ X
    if shift is None:
        shift = float(np.real(np.trace(X.conj().T @ HX))) / X.shape[1]
    G = X.conj().T @ (HX - shift * X)
    w, S = np.linalg.eigh(0.5 * (G + G.conj().T))
    return w, X @ S, shift


def rayleigh_quotients(H, vectors, shift=0.0):
    """``shift + v^H (H - shift) v`` per column, for already-normalized columns."""
    HV = H @ vectors - shift * vectors
    return shift + np.real(np.einsum("ij,ij->j", vectors.conj(), HV))


def svd_small(B):
    """SVD ``B = left @ diag(singulars) @ right^H`` of a small square matrix."""
    B = np.asarray(B, dtype=complex)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {B.shape}")
    if B.shape[0] > 16:
        raise ValueError(f"svd_small is limited to d <= 16, got d={B.shape[0]}")
    U, s, Vh = np.linalg.svd(B)
    return SvdFactors(U, s, Vh.conj().T)
