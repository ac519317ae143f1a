import math

import numpy as np
import pytest

from jumpforge.channels import OpticalLayout, flip_channel, se_channel
from jumpforge.errors import ConfigurationError, IntegrityError
from jumpforge.protocols import ProtocolScript
from jumpforge.qstate import StateVector, basis_state, normalize
from jumpforge.trajectory import Duration, RngStream, Stage
from jumpforge.verify import (
    DensityMatrix,
    coupon_time_stats,
    harmonic,
    lindblad_evolve,
    pure_density,
    trace_distance,
    trajectory_average,
)


def test_pure_density_and_purity():
    s = normalize(StateVector(1, np.array([1.0, 1.0], dtype=complex)))
    rho = pure_density(s)
    assert rho.purity() == pytest.approx(1.0)
    assert np.trace(rho.entries) == pytest.approx(1.0)


def test_lindblad_amplitude_damping_exact():
    # single sigma- at rate g: rho_11(t) = e^{-g t}, coherence decays as e^{-g t/2}
    g = 0.8
    s = normalize(StateVector(1, np.array([1.0, 1.0], dtype=complex)))
    rho = lindblad_evolve(pure_density(s), (se_channel(0, g),), 2.0)
    assert rho.entries[1, 1].real == pytest.approx(0.5 * math.exp(-g * 2.0), abs=1e-7)
    assert abs(rho.entries[0, 1]) == pytest.approx(
        0.5 * math.exp(-g * 1.0), abs=1e-7
    )


def test_lindblad_dephasing_from_flips():
    # balanced sx+sy flips at rate g/2 each: Bloch vector shrinks towards the
    # maximally mixed state; purity -> 1/2
    chans = (
        flip_channel(0, 0.5, "X", "x"),
        flip_channel(0, 0.5, "Y", "y"),
    )
    rho = lindblad_evolve(pure_density(basis_state(1, "0")), chans, 5.0)
    assert rho.purity() == pytest.approx(0.5, abs=1e-4)


def test_lindblad_rejects_coarse_step():
    with pytest.raises(ConfigurationError):
        lindblad_evolve(
            pure_density(basis_state(1, "0")), (se_channel(0, 1.0),), 1.0, dt=0.1
        )


def test_trace_distance_properties():
    a = pure_density(basis_state(1, "0"))
    b = pure_density(basis_state(1, "1"))
    assert trace_distance(a, a) == pytest.approx(0.0, abs=1e-12)
    assert trace_distance(a, b) == pytest.approx(1.0)


def test_trajectory_average_matches_lindblad_single_qubit():
    chans = (flip_channel(0, 1.0, "X", "x"),)
    layout = OpticalLayout(1, chans)
    script = ProtocolScript(
        n_qubits=1,
        stages=(Stage("s", layout, Duration(0.7)),),
        initial_state=basis_state(1, "0"),
        initial_bits="0",
    )
    avg = trajectory_average(script, 4000, 0.7, master_seed=5)
    ref = lindblad_evolve(pure_density(script.initial_state), chans, 0.7)
    assert trace_distance(avg, ref) < 0.03


def test_harmonic_small_and_asymptotic():
    assert harmonic(1) == pytest.approx(1.0)
    assert harmonic(3) == pytest.approx(11.0 / 6.0)
    n = 10**6
    euler = 0.5772156649015329
    assert harmonic(n) == pytest.approx(math.log(n) + euler, abs=1e-6)


def test_coupon_time_stats_serial():
    res = coupon_time_stats(3, 2.0, 30000, RngStream(9))
    assert res.analytic_mean == pytest.approx((11.0 / 6.0) / 2.0)
    assert res.mean == pytest.approx(res.analytic_mean, rel=0.03)
    assert "," in res.to_csv_row(3)


def test_coupon_time_stats_heterogeneous_rates():
    # max of exponentials with distinct rates; mean via inclusion-exclusion
    rates = [1.0, 2.0]
    res = coupon_time_stats(2, 1.0, 60000, RngStream(4), edge_rates=rates)
    exact = 1.0 / 1 + 1.0 / 2 - 1.0 / 3
    assert res.mean == pytest.approx(exact, rel=0.03)


def test_density_matrix_check_rejects_bad_trace():
    rho = DensityMatrix(1, np.eye(2, dtype=complex))
    with pytest.raises(IntegrityError):
        rho.check()
