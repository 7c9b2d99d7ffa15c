"""Harmonic-well analytics for the 3JJ flux qubit at frustration.

Along the intra-cell coordinate the potential ``-2 cos(phi) + alpha cos(2 phi)``
has two minima at ``+-phi*`` with ``cos(phi*) = 1/(2 alpha)``.  Each well is
replaced by its harmonic ground state

    g(phi) = (a/pi)^{1/4} exp(-a (phi -+ phi*)^2 / 2),   a = m omega,

and the qubit states are ``(g_L +- g_R)/sqrt(2)``.  All Gaussian matrix
elements below are exact for this ansatz.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .circuit import CouplerKind
from .effective import PauliCoefficients
from .errors import OutOfRegime
from .hamiltonian import loaded_mass


def _check_regime(alpha, r, gamma):
    if not alpha > 0.5:
        raise OutOfRegime(f"the double-well picture needs alpha > 0.5, got {alpha}")
    if not r > 0:
        raise OutOfRegime(f"r must be positive, got {r}")
    if gamma < 0:
        raise OutOfRegime(f"gamma must be non-negative, got {gamma}")


def loaded_determinant(alpha, gamma):
    """Determinant of the loaded single-qubit capacitance block (units of C^2)."""
    return 2 * alpha + 1 + gamma * (alpha + 1)


@dataclass(frozen=True)
class HarmonicModel1D:
    alpha: float
    r: float
    gamma: float
    m: float
    omega: float
    phi_star: float
    sigma: float
    overlap: float
    gap: float
    epsilon: float
    eta: float
    barrier: float

    @property
    def a(self):
        """Gaussian exponent ``m omega``."""
        return self.m * self.omega

    @property
    def barrier_ratio(self):
        """Barrier height in units of the oscillator quantum; the harmonic picture wants this large."""
        return self.barrier / self.omega

    # Gaussian matrix elements between the two well states

    @property
    def kinetic_cross(self):
        """``<g_L| n^2/(2m) |g_R>``."""
        return self.overlap * (self.omega / 4 - self.m * self.omega**2 * self.phi_star**2 / 2)

    @property
    def cos_cross(self):
        """``<g_L| cos phi |g_R>``."""
        return self.overlap * np.exp(-1 / (4 * self.a))

    @property
    def cos2_cross(self):
        """``<g_L| cos 2phi |g_R>``."""
        return self.overlap * np.exp(-1 / self.a)

    @property
    def sin_dipole(self):
        """``<0| sin phi |1>`` with ``|1> = (g_R - g_L)/sqrt(2)``."""
        return np.sin(self.phi_star) * np.exp(-1 / (4 * self.a))

    @property
    def sin2_dipole(self):
        """``<0| sin 2phi |1>``."""
        return np.sin(2 * self.phi_star) * np.exp(-1 / self.a)

    @property
    def cos_z(self):
        """``(<1|cos phi|1> - <0|cos phi|0>)/2``."""
        return -self.cos_cross

    @property
    def charge_dipole(self):
        """``|<0| n |1>|`` of the conjugate charge."""
        return self.a * self.phi_star * self.overlap


def harmonic_1d(alpha, r, gamma=0.0):
    """Closed-form double-well model with a capacitor ``gamma`` loading one loop node.

    Raises
    ------
    OutOfRegime
        If ``alpha <= 0.5`` (single-well potential).
    """
    _check_regime(alpha, r, gamma)
    m = loaded_mass(alpha, r, gamma)
    omega = np.sqrt((4 * alpha**2 - 1) / (alpha * m))
    phi_star = float(np.arccos(1 / (2 * alpha)))
    a = m * omega
    overlap = float(np.exp(-a * phi_star**2))
    gap = -2 * ((omega / 4 - m * omega**2 * phi_star**2 / 2) + alpha * np.exp(-1 / a) - 2 * np.exp(-1 / (4 * a))) * overlap
    epsilon = np.pi * np.sqrt(4 * alpha**2 - 1) / alpha * np.exp(-1 / a)
    d = loaded_determinant(alpha, gamma)
    eta = 4 * alpha * gamma / (r * d) * a * phi_star * overlap
    barrier = (2 * alpha - 1) ** 2 / (2 * alpha)
    return HarmonicModel1D(
        alpha=alpha,
        r=r,
        gamma=gamma,
        m=float(m),
        omega=float(omega),
        phi_star=phi_star,
        sigma=float(1 / np.sqrt(a)),
        overlap=overlap,
        gap=float(gap),
        epsilon=float(epsilon),
        eta=float(eta),
        barrier=float(barrier),
    )


def _sqrtm_spd(M):
    w, U = np.linalg.eigh(M)
    return (U * np.sqrt(w)) @ U.T


def _potential_pm(x, alpha):
    p, q = x
    return -2 * np.cos(p) * np.cos(q) + alpha * np.cos(2 * p)


@dataclass(frozen=True)
class HarmonicModel2D:
    """Two-dimensional harmonic wells in the ``(phi_+, phi_-)`` plane."""

    T: np.ndarray
    V: np.ndarray
    T1: np.ndarray
    theta: float
    R: np.ndarray
    A: np.ndarray
    phi_star: float
    overlap_intra: float
    overlap_inter: float
    inter_displacement: np.ndarray

    def overlap(self, displacement):
        dphi = np.asarray(displacement, dtype=float)
        return float(np.exp(-0.25 * dphi @ self.A @ dphi))


def harmonic_2d(alpha, r, gamma=0.0):
    """Harmonic ground states of the two-mode loaded qubit and their overlaps.

    The Gaussian exponent ``A`` solves ``A T A = V``.  The intra-cell
    separation is ``(2 phi*, 0)``; the inter-cell one is the displacement
    to the nearest minimum in a neighbouring cell, found by locally
    minimizing the potential around each lattice image.
    """
    _check_regime(alpha, r, gamma)
    d = loaded_determinant(alpha, gamma)
    T = 2 / (r * d) * np.array([[gamma + 2, gamma], [gamma, 4 * alpha + 2 + gamma]])
    V = np.diag([(4 * alpha**2 - 1) / alpha, 1 / alpha])
    Vh = np.sqrt(V)
    T1 = Vh @ T @ Vh
    theta = 0.5 * np.arctan2(T1[0, 1] + T1[1, 0], T1[1, 1] - T1[0, 0])
    # fold into (-pi/4, pi/4] so the uncoupled limit gives theta = 0
    if theta > np.pi / 4:
        theta -= np.pi / 2
    elif theta <= -np.pi / 4:
        theta += np.pi / 2
    c, s = np.cos(theta), np.sin(theta)
    R = np.array([[c, -s], [s, c]])
    A = Vh @ np.linalg.inv(_sqrtm_spd(T1)) @ Vh
    A = 0.5 * (A + A.T)
    phi_star = float(np.arccos(1 / (2 * alpha)))
    intra = float(np.exp(-0.25 * (2 * phi_star) ** 2 * A[0, 0]))

    origin = np.array([phi_star, 0.0])
    best, best_disp = -1.0, None
    for ip in (-1, 0, 1):
        for iq in (-1, 0, 1):
            for sign in (1, -1):
                if ip == iq == 0:
                    continue  # same cell
                guess = np.array([sign * phi_star + np.pi * (ip + iq), np.pi * (ip - iq)])
                found = minimize(_potential_pm, guess, args=(alpha,), method="BFGS", options={"gtol": 1e-12}).x
                disp = found - origin
                ov = float(np.exp(-0.25 * disp @ A @ disp))
                if ov > best:
                    best, best_disp = ov, disp
    return HarmonicModel2D(
        T=T,
        V=V,
        T1=T1,
        theta=float(theta),
        R=R,
        A=A,
        phi_star=phi_star,
        overlap_intra=intra,
        overlap_inter=best,
        inter_displacement=best_disp,
    )


def capacitive_coefficient(alpha, gamma):
    """Charge-charge prefactor of the reference capacitive coupler in the 1D reduction."""
    num = -2 * (2 * alpha**2 + 2 * alpha + 1) * gamma
    den = 4 * alpha**2 * gamma + 4 * alpha**2 + 6 * alpha * gamma + 4 * alpha + 2 * gamma + 1
    return num / den


@dataclass(frozen=True)
class CouplingEstimate:
    kind: CouplerKind
    pauli: PauliCoefficients
    elements: dict


def _pair_coefficients(**values):
    coeffs = {a + b: 0.0 for a in "Ixyz" for b in "Ixyz"}
    coeffs.update(values)
    return PauliCoefficients(coeffs)


def coupling_estimate(kind, alpha, r, strength, gamma_load=None):
    """Leading-order two-qubit couplings predicted by the harmonic model.

    Parameters
    ----------
    kind : CouplerKind or str
    strength : float
        ``gamma`` for capacitor/junction couplers, ``M I_c^2 / E_J`` for
        mutual inductance.
    gamma_load : float, optional
        Capacitive loading of each qubit used for its harmonic model
        (defaults to ``strength`` for capacitors and 0 otherwise).

    Notes
    -----
    Junction couplers give ``|J_xx| = gamma <0|sin|1>^2`` and
    ``|J_zz| = gamma cos_z^2``; the returned magnitudes carry no sign since
    that depends on the coupled nodes.  Capacitors give
    ``J_yy = (A/r) <0|n|1>^2`` with the bare charge dipole.
    """
    kind = CouplerKind(kind)
    if gamma_load is None:
        gamma_load = strength if kind is CouplerKind.capacitor else 0.0
    if kind is CouplerKind.mutual_inductance:
        return CouplingEstimate(kind, _pair_coefficients(xx=2 * strength * alpha**2), {})
    h = harmonic_1d(alpha, r, gamma_load)
    if kind is CouplerKind.junction:
        s, z = h.sin_dipole, h.cos_z
        pauli = _pair_coefficients(xx=strength * s**2, zz=strength * z**2)
        return CouplingEstimate(kind, pauli, {"sin_dipole": s, "cos_z": z})
    A = capacitive_coefficient(alpha, strength)
    n01 = h.charge_dipole
    pauli = _pair_coefficients(yy=A / r * n01**2)
    return CouplingEstimate(kind, pauli, {"A": A, "charge_dipole": n01, "eta": h.eta})
