import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxcouple.circuit import CircuitSpec, CouplerSpec, QubitParams, capacitance_network
from fluxcouple.cli.sweep import select_cutoff
from fluxcouple.effective import qubit_projector
from fluxcouple.errors import CutoffTooSmall, NonIntegerWinding
from fluxcouple.hamiltonian import (
    ChargeBasisOperator,
    ModeSpace,
    branch_cosine,
    branch_sine,
    build_1d,
    build_hamiltonians,
    charge_combination,
    loaded_mass,
    mode_operators,
    single_qubit_hamiltonian,
)
from fluxcouple.numerics import eigh_dense

from oracles import plus_minus_qubit


def qubit_h(alpha=0.7, r=50.0, f=0.5, N=6, gamma=0.0, beta=0.0):
    qb = QubitParams(alpha=alpha, r=r, f=f, beta=beta)
    couplers = [CouplerSpec("capacitor", (0, 2), None, gamma=gamma)] if gamma else []
    spec = CircuitSpec([qb], couplers)
    net = capacitance_network(spec)
    return single_qubit_hamiltonian(qb, net.qubit_blocks[0], N).toarray()


def lowest(H, k=4):
    return np.linalg.eigvalsh(H)[:k]


def test_single_mode_operators_n1():
    space = ModeSpace(1, 1)
    ops = mode_operators(space, 0)
    np.testing.assert_array_equal(ops.number.toarray(), np.diag([-1.0, 0.0, 1.0]))
    lower = ops.lower.toarray()
    assert set(zip(*np.nonzero(lower))) == {(0, 1), (1, 2)}
    cos = 0.5 * (lower + lower.T)
    np.testing.assert_array_equal(cos, 0.5 * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]]))
    np.testing.assert_array_equal(branch_cosine(space, [1]).toarray(), cos)


def test_mode_ordering_mode0_most_significant():
    space = ModeSpace(2, 1)
    n0 = mode_operators(space, 0).number.toarray()
    np.testing.assert_array_equal(n0, np.kron(np.diag([-1.0, 0, 1]), np.eye(3)))


def test_branch_cosine_single_mode_reduction():
    space = ModeSpace(2, 2)
    single = branch_cosine(ModeSpace(1, 2), [1]).toarray()
    np.testing.assert_array_equal(branch_cosine(space, [1, 0]).toarray(), np.kron(single, np.eye(5)))


def test_branch_cosine_shift_by_pi():
    space = ModeSpace(2, 2)
    a = branch_cosine(space, [1, 1]).toarray()
    b = branch_cosine(space, [1, 1], np.pi).toarray()
    np.testing.assert_array_equal(b, -a)
    assert not np.iscomplexobj(b)


def test_branch_cosine_double_winding():
    M = branch_cosine(ModeSpace(1, 2), [2]).toarray()
    rows, cols = np.nonzero(M)
    assert np.all(np.abs(rows - cols) == 2)
    np.testing.assert_array_equal(M, 0.5 * (np.eye(5, k=2) + np.eye(5, k=-2)))


def test_branch_cosine_matches_trig_identity():
    # cos(x - y) = cos x cos y + sin x sin y holds exactly for commuting shifts
    space = ModeSpace(2, 3)
    lhs = branch_cosine(space, [1, -1]).toarray()
    cx, cy = branch_cosine(space, [1, 0]).toarray(), branch_cosine(space, [0, 1]).toarray()
    sx, sy = branch_sine(space, [1, 0]).toarray(), branch_sine(space, [0, 1]).toarray()
    np.testing.assert_allclose(lhs, cx @ cy + sx @ sy, atol=1e-15)


def test_winding_errors():
    space = ModeSpace(2, 1)
    with pytest.raises(NonIntegerWinding):
        branch_cosine(space, [0.5, 0])
    with pytest.raises(CutoffTooSmall):
        branch_cosine(space, [3, 0])
    with pytest.raises(CutoffTooSmall):
        ModeSpace(1, 0)


def test_operator_arithmetic():
    space = ModeSpace(1, 2)
    n = charge_combination(space, [1.0])
    c = branch_cosine(space, [1])
    total = 2 * n - c + (-n)
    np.testing.assert_allclose(total.toarray(), n.toarray() - c.toarray())
    assert isinstance(total, ChargeBasisOperator)
    np.testing.assert_allclose((n @ n).toarray(), np.diag(np.arange(-2, 3) ** 2.0))
    with pytest.raises(ValueError):
        ChargeBasisOperator(space, sp.identity(3))


def test_single_qubit_anharmonic_spectrum():
    H = qubit_h(N=8)
    assert H.shape == (289, 289)
    E = lowest(H)
    assert E[1] - E[0] < 0.25 * (E[2] - E[1])


@pytest.mark.parametrize("gamma,f", [(0.0, 0.5), (0.5, 0.5), (2.0, 0.5), (0.5, 0.47)])
def test_loaded_qubit_matches_plus_minus_oracle(gamma, f):
    N = 5
    ours = lowest(qubit_h(gamma=gamma, f=f, N=N), 8)
    ref = lowest(plus_minus_qubit(0.7, 50.0, gamma, N, f), 8)
    np.testing.assert_allclose(ours, ref, atol=1e-11)


def test_uncoupled_spec_has_no_interaction():
    q = QubitParams()
    for kind in ("capacitor", "junction"):
        spec = CircuitSpec([q, q], [CouplerSpec(kind, (0, 2), (1, 1), gamma=0.0)])
        pair = build_hamiltonians(spec, cutoff=2)
        assert abs(pair.V.matrix).max() == 0.0
    spec = CircuitSpec([q, q], [CouplerSpec("mutual_inductance", (0, 2), (1, 1), mutual=0.0)])
    assert abs(build_hamiltonians(spec, cutoff=2).V.matrix).max() == 0.0


def test_h0_is_tensor_sum_of_single_qubits():
    q = QubitParams()
    spec = CircuitSpec([q, q], [CouplerSpec("capacitor", (0, 2), (1, 1), gamma=0.3)])
    pair = build_hamiltonians(spec, cutoff=2)
    h1, h2 = (op.toarray() for op in pair.single_qubit)
    np.testing.assert_allclose(pair.H0.toarray(), np.kron(h1, np.eye(len(h2))) + np.kron(np.eye(len(h1)), h2))


def test_flux_perturbation_equals_shifted_flux():
    q = QubitParams(f=0.5)
    spec = CircuitSpec([q])
    shifted = build_hamiltonians(spec, cutoff=4, delta_f=1e-3).H.toarray()
    direct = build_hamiltonians(CircuitSpec([QubitParams(f=0.501)]), cutoff=4).H.toarray()
    np.testing.assert_allclose(shifted, direct, atol=1e-14)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.55, 1.0))
def test_flux_periodicity_and_reflection(f, alpha):
    E = lowest(qubit_h(alpha=alpha, f=f, N=4))
    np.testing.assert_allclose(lowest(qubit_h(alpha=alpha, f=f + 1, N=4)), E, atol=1e-11)
    np.testing.assert_allclose(lowest(qubit_h(alpha=alpha, f=1 - f, N=4)), E, atol=1e-11)


def test_pair_flux_symmetry():
    def spectrum(f):
        q = QubitParams(f=f)
        spec = CircuitSpec([q, q], [CouplerSpec("capacitor", (0, 2), (1, 1), gamma=0.2)])
        return lowest(build_hamiltonians(spec, cutoff=2).H.toarray(), 6)

    base = spectrum(0.48)
    np.testing.assert_allclose(spectrum(1.48), base, atol=1e-11)
    np.testing.assert_allclose(spectrum(0.52), base, atol=1e-11)


@pytest.mark.parametrize("weights", [(1, 1), (1, 0), (0, 2), (-1, 1), (2, 1)])
def test_odd_sine_diagonal_vanishes_at_frustration(weights):
    qb = QubitParams(f=0.5)
    spec = CircuitSpec([qb])
    pair = build_hamiltonians(spec, cutoff=6)
    sub = qubit_projector(pair)
    S = branch_sine(pair.space, weights).matrix
    B = sub.basis
    diag = np.real(np.einsum("ij,ij->j", B.conj(), S @ B))
    assert np.max(np.abs(diag)) < 1e-10


def test_one_d_masses():
    assert loaded_mass(0.7, 50.0) == pytest.approx(30.0, abs=1e-12)
    assert loaded_mass(0.7, 50.0, 0.5) == pytest.approx(32.5, abs=1e-12)


def test_one_d_gap_decreases_with_loading():
    gaps = []
    for g in range(0, 11, 2):
        E = eigh_dense(build_1d(0.7, 50.0, g, cutoff=16).matrix, k=2).eigenvalues
        gaps.append(E[1] - E[0])
    assert np.all(np.diff(gaps) < 0)


def test_one_d_cutoff_guard():
    with pytest.raises(CutoffTooSmall):
        build_1d(0.7, 50.0, cutoff=1)


def test_one_d_gap_exceeds_two_mode_gap():
    E1 = eigh_dense(build_1d(0.7, 50.0, cutoff=16).matrix, k=2).eigenvalues
    E2 = lowest(qubit_h(N=10), 2)
    assert E1[1] - E1[0] > E2[1] - E2[0]


def test_auto_cutoff_converges_spectrum():
    qb = QubitParams()
    spec = CircuitSpec([qb])
    net = capacitance_network(spec)
    N = select_cutoff(spec, net)
    assert 4 <= N <= 16
    a = lowest(single_qubit_hamiltonian(qb, net.qubit_blocks[0], N).toarray())
    b = lowest(single_qubit_hamiltonian(qb, net.qubit_blocks[0], N + 2).toarray())
    assert np.max(np.abs(a - b)) < 1e-8
