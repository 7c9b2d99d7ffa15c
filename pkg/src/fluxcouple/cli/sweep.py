"""Point evaluation and sweep execution."""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..circuit import capacitance_network, loading
from ..effective import (
    SolverSettings,
    lowest_eigenpairs,
    pauli_decompose,
    perturbative_effective,
    qubit_projector,
    stoquastic_test,
    swt_effective,
)
from ..errors import (
    ConfigError,
    DegenerateQubit,
    DegenerateSpectrum,
    InsufficientExcitedBasis,
    NoConvergence,
    OutOfRegime,
    PhaseInstability,
    SubspaceMismatch,
)
from ..harmonic import harmonic_1d
from ..hamiltonian import build_hamiltonians, single_qubit_hamiltonian
from ..numerics import eigh_dense
from .config import apply_sweep_value

AUTO_START, AUTO_STEP, AUTO_CAP = 4, 2, 16
AUTO_RTOL = 1e-6
PHASE_FLOOR = 1e-10
PHASE_JUMP = 0.5
POINT_FAILURES = (SubspaceMismatch, NoConvergence, DegenerateSpectrum, DegenerateQubit, InsufficientExcitedBasis)
PAIR_LABELS = tuple(a + b for a in "xyz" for b in "xyz")
LOCAL_LABELS = ("xI", "yI", "zI", "Ix", "Iy", "Iz")


@dataclass(frozen=True)
class SweepRow:
    """One evaluated grid point; numeric fields are ``None`` on flagged rows."""

    sweep_value: float | None
    cutoff: int | None = None
    energies: tuple | None = None
    deltas: tuple | None = None
    pauli: dict | None = None
    offset: float | None = None
    h_gap: float | None = None
    h_overlap: float | None = None
    stoquastic: str | None = None
    flags: tuple = field(default_factory=tuple)

    @property
    def failed(self):
        return any(f != PhaseInstability.__name__ for f in self.flags)


def _single_gap(spec, network, cutoff):
    gaps = []
    for q, qb in enumerate(spec.qubits):
        op = single_qubit_hamiltonian(qb, network.qubit_blocks[q], cutoff)
        w = eigh_dense(op.matrix, k=2, check=False).eigenvalues
        gaps.append(w[1] - w[0])
    return np.array(gaps)


def select_cutoff(spec, network=None):
    """Smallest ``N`` in 4, 6, ... 16 at which every loaded single-qubit gap is stable to 1e-6 relative."""
    network = network or capacitance_network(spec)
    N = AUTO_START
    prev = _single_gap(spec, network, N)
    while N < AUTO_CAP:
        nxt = _single_gap(spec, network, N + AUTO_STEP)
        if np.all(np.abs(nxt - prev) <= AUTO_RTOL * np.abs(nxt)):
            return N
        N, prev = N + AUTO_STEP, nxt
    return N


def _harmonic_columns(spec):
    qb = spec.qubits[0]
    try:
        h = harmonic_1d(qb.alpha, qb.r, loading(spec, 0))
    except OutOfRegime:
        return None, None
    return abs(h.gap), h.overlap


def _pauli_columns(coeffs, nq):
    if nq == 1:
        return {"xI": coeffs.J("x"), "yI": coeffs.J("y"), "zI": coeffs.J("z")}
    return {label: coeffs.J(label) for label in PAIR_LABELS + LOCAL_LABELS}


def evaluate_point(plan, value):
    """Evaluate one grid point in isolation; recoverable failures become flags."""
    spec, delta_f, delta_V = apply_sweep_value(plan, value)
    sweep_value = None if value is None else float(value)
    network = capacitance_network(spec)
    cutoff = select_cutoff(spec, network) if plan.solver.cutoff == "auto" else plan.solver.cutoff
    settings = SolverSettings(method=plan.solver.method, tol=plan.solver.tol, seed=plan.seed)
    nq = len(spec.qubits)
    d = 2**nq
    want = set(plan.outputs)
    try:
        pair = build_hamiltonians(spec, network, cutoff=cutoff, delta_f=delta_f, delta_v=delta_V)
        sub = qubit_projector(pair)
        eff = spectrum = None
        need_full = "spectrum" in want or plan.solver.effective == "swt"
        if need_full:
            spectrum = lowest_eigenpairs(pair.H, max(plan.solver.levels, d + 1), settings)
        if want & {"pauli", "stoquastic"}:
            if plan.solver.effective == "swt":
                eff = swt_effective(pair.H, sub, settings, spectrum=spectrum)
            else:
                order = 1 if plan.solver.effective == "p1" else 2
                eff = perturbative_effective(pair, sub, order, cap=plan.solver.excited_cap)
    except POINT_FAILURES as exc:
        return SweepRow(sweep_value, cutoff=cutoff, flags=(type(exc).__name__,))

    row = {"sweep_value": sweep_value, "cutoff": cutoff}
    if "spectrum" in want:
        row["energies"] = tuple(float(e) for e in spectrum.eigenvalues[: plan.solver.levels])
    if "pauli" in want:
        coeffs = pauli_decompose(eff)
        deltas = coeffs.delta
        row["deltas"] = tuple(float(x) for x in deltas) + (None,) * (2 - len(deltas))
        row["pauli"] = _pauli_columns(coeffs, nq)
        row["offset"] = coeffs.offset
    if "harmonic" in want:
        row["h_gap"], row["h_overlap"] = _harmonic_columns(spec)
    if "stoquastic" in want:
        row["stoquastic"] = stoquastic_test(eff.matrix).value
    return SweepRow(**row)


def mark_phase_instability(rows):
    """Flag rows where a Pauli coefficient flips sign relative to the previous good row."""
    out, prev = [], None
    for row in rows:
        if row.failed or row.pauli is None:
            out.append(row)
            continue
        if prev is not None:
            jumped = []
            for label, c in row.pauli.items():
                p = prev.pauli[label]
                big = min(abs(c), abs(p)) > PHASE_FLOOR
                if big and np.sign(c) != np.sign(p) and abs(c - p) > PHASE_JUMP * max(abs(c), abs(p)):
                    jumped.append(label)
            if jumped:
                warnings.warn(
                    f"sign flip in J_{', J_'.join(jumped)} at sweep value {row.sweep_value!r}",
                    PhaseInstability,
                    stacklevel=2,
                )
                row = replace(row, flags=row.flags + (PhaseInstability.__name__,))
        out.append(row)
        prev = row
    return out


def run_sweep(plan, jobs=1):
    """Evaluate every grid point; rows come back in grid order.

    A plan without a sweep evaluates the template circuit once.
    """
    values = list(plan.grid) if plan.sweep_path is not None else [None]
    if jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {jobs}")
    if jobs == 1 or len(values) == 1:
        rows = [evaluate_point(plan, v) for v in values]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(values))) as pool:
            rows = list(pool.map(evaluate_point, [plan] * len(values), values))
    return mark_phase_instability(rows)
