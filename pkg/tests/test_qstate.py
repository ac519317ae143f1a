import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumpforge.errors import AnnihilationError, ConfigurationError
from jumpforge.qstate import (
    FACTOR_MATRICES,
    OperatorSum,
    PauliTerm,
    StateVector,
    apply,
    basis_state,
    fidelity,
    normalize,
    op_matrix,
    sigma_minus,
    sigma_plus,
    sigma_x,
    sigma_y,
    sigma_z,
)


def random_state(n, rng):
    amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return normalize(StateVector(n, amps))


def test_basis_state_msb_convention():
    # qubit 0 is the most significant bit: |10> has qubit 0 excited.
    s = basis_state(2, "10")
    assert s.amplitudes[0b10] == 1.0
    assert np.count_nonzero(s.amplitudes) == 1


def test_basis_state_validation():
    with pytest.raises(ConfigurationError):
        basis_state(2, "012")
    with pytest.raises(ConfigurationError):
        basis_state(2, "0")


def test_sigma_minus_lowers_excited():
    # SM = |0><1|: annihilates |0>, maps |1> -> |0>.
    s = apply(basis_state(1, "1"), sigma_minus(0))
    assert np.allclose(s.amplitudes, basis_state(1, "0").amplitudes)
    with pytest.raises(AnnihilationError):
        apply(basis_state(1, "0"), sigma_minus(0))


def test_sigma_plus_raises_ground():
    s = apply(basis_state(1, "0"), sigma_plus(0))
    assert np.allclose(s.amplitudes, basis_state(1, "1").amplitudes)


def test_apply_targets_correct_qubit():
    s = apply(basis_state(3, "000"), sigma_x(1))
    assert np.allclose(s.amplitudes, basis_state(3, "010").amplitudes)


def test_pauli_algebra_on_states():
    rng = np.random.default_rng(0)
    s = random_state(2, rng)
    # XZ = -iY on qubit 0
    a = apply(apply(s, sigma_z(0)), sigma_x(0))
    b = apply(s, sigma_y(0))
    assert np.allclose(a.amplitudes, -1j * b.amplitudes)


def test_operator_sum_linearity():
    rng = np.random.default_rng(1)
    s = random_state(2, rng)
    op = OperatorSum(
        (
            PauliTerm(0.5, {0: "X"}),
            PauliTerm(-0.25j, {1: "Z"}),
        )
    )
    direct = apply(s, op)
    parts = 0.5 * apply(s, sigma_x(0)).amplitudes - 0.25j * apply(s, sigma_z(1)).amplitudes
    assert np.allclose(direct.amplitudes, parts)


def test_op_matrix_matches_apply():
    rng = np.random.default_rng(2)
    s = random_state(3, rng)
    op = OperatorSum((PauliTerm(1.0, {0: "X", 2: "Y"}), PauliTerm(0.5, {1: "SM"})))
    m = op_matrix(op, (0, 1, 2))
    assert np.allclose(m @ s.amplitudes, apply(s, op).amplitudes)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["X", "Y", "Z"]))
def test_fidelity_invariant_under_unitaries(seed, letter):
    rng = np.random.default_rng(seed)
    a, b = random_state(2, rng), random_state(2, rng)
    op = OperatorSum((PauliTerm(1.0, {0: letter}),))
    assert fidelity(a, b) == pytest.approx(fidelity(apply(a, op), apply(b, op)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fidelity_bounds_and_self(seed):
    rng = np.random.default_rng(seed)
    a, b = random_state(3, rng), random_state(3, rng)
    f = fidelity(a, b)
    assert -1e-12 <= f <= 1 + 1e-12
    assert fidelity(a, a) == pytest.approx(1.0)


def test_factor_matrices_consistent():
    assert np.allclose(FACTOR_MATRICES["SM"], [[0, 1], [0, 0]])
    assert np.allclose(
        FACTOR_MATRICES["X"] @ FACTOR_MATRICES["X"], np.eye(2)
    )
    assert np.allclose(
        FACTOR_MATRICES["SM"] + FACTOR_MATRICES["SP"], FACTOR_MATRICES["X"]
    )


def test_statevector_dump_roundtrip():
    s = basis_state(2, "01")
    text = s.dump()
    # single line, basis index 0b01 = 1, unit real amplitude
    assert text.splitlines() == ["1 1 0"]
