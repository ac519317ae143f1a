import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumpforge.channels import (
    ChannelKind,
    OpticalLayout,
    bs_combine,
    flip_channel,
    is_channel,
    se_channel,
    total_decay,
)
from jumpforge.errors import ConfigurationError, LogCorruptionError
from jumpforge.protocols import ProtocolScript
from jumpforge.qstate import basis_state, fidelity, normalize, StateVector
from jumpforge.trajectory import (
    Duration,
    FirstClick,
    NoJump,
    RngStream,
    Stage,
    TrajectoryLog,
    no_jump_evolve,
    run,
    sample_waiting_time,
)


def _flip_layout(rate=1.0):
    return OpticalLayout(
        1, (flip_channel(0, rate, "X", "x"), flip_channel(0, rate, "Y", "y"))
    )


def test_rng_stream_reproducible_and_independent():
    a = RngStream(42, 0).generator().random(4)
    b = RngStream(42, 0).generator().random(4)
    c = RngStream(42, 1).generator().random(4)
    assert np.allclose(a, b)
    assert not np.allclose(a, c)


def test_uniform_waiting_time_is_exponential_median():
    # total uniform rate c: at r = 0.5 the draw must be ln(2)/c exactly
    chans = _flip_layout(0.5).channels  # total rate 1.0

    class FakeRng:
        def __init__(self):
            self.calls = 0

        def random(self):
            self.calls += 1
            return 0.5

    state = basis_state(1, "0")
    draw = sample_waiting_time(state, chans, FakeRng())
    assert draw.t == pytest.approx(math.log(2.0))


def test_uniform_waiting_time_statistics():
    chans = _flip_layout(1.0).channels  # total rate 2.0
    rng = RngStream(7).generator()
    state = basis_state(1, "0")
    times = [sample_waiting_time(state, chans, rng).t for _ in range(20000)]
    assert np.mean(times) == pytest.approx(0.5, rel=0.03)


def test_diagonal_waiting_time_matches_closed_form():
    # single SE channel on |psi> = a|0> + b|1>: survival
    # P(T > t) = |a|^2 + |b|^2 e^{-gamma t}, invertible in closed form.
    gamma = 1.3
    a, b = math.sqrt(0.3), math.sqrt(0.7)
    state = normalize(StateVector(1, np.array([a, b], dtype=complex)))
    chans = (se_channel(0, gamma),)
    rng = RngStream(3).generator()
    for _ in range(200):
        r = rng.random()

        class OneShot:
            def __init__(self, r):
                self.r = r

            def random(self):
                return self.r

        draw = sample_waiting_time(state, chans, OneShot(r))
        if r <= a * a:  # below the survival floor: no jump ever
            assert isinstance(draw, NoJump)
        else:
            t_exact = -math.log((r - a * a) / (b * b)) / gamma
            assert draw.t == pytest.approx(t_exact, rel=1e-8)


def test_no_jump_evolve_uniform_is_identity():
    chans = _flip_layout().channels
    rng = np.random.default_rng(0)
    amps = rng.normal(size=2) + 1j * rng.normal(size=2)
    state = normalize(StateVector(1, amps))
    evolved = no_jump_evolve(state, total_decay(chans), 1.7)
    assert np.allclose(evolved.amplitudes, state.amplitudes)


def test_no_jump_evolve_diagonal_decays_excited_component():
    gamma = 2.0
    state = normalize(StateVector(1, np.array([1.0, 1.0], dtype=complex)))
    evolved = no_jump_evolve(state, total_decay((se_channel(0, gamma),)), 0.5)
    # unnormalized: |1> component picks up e^{-gamma t / 2}
    ratio = evolved.amplitudes[1] / evolved.amplitudes[0]
    assert ratio == pytest.approx(math.exp(-gamma * 0.5 / 2))


def test_run_is_deterministic_per_seed():
    layout = _flip_layout()
    script = ProtocolScript(
        n_qubits=1,
        stages=(Stage("s", layout, Duration(5.0)),),
        initial_state=basis_state(1, "0"),
        initial_bits="0",
    )
    log1, s1 = run(script, RngStream(11, 4))
    log2, s2 = run(script, RngStream(11, 4))
    assert log1.to_csv() == log2.to_csv()
    assert np.allclose(s1.amplitudes, s2.amplitudes)
    log3, _ = run(script, RngStream(11, 5))
    assert log1.to_csv() != log3.to_csv()


def test_run_first_click_terminates_on_kind():
    pair = bs_combine(
        flip_channel(0, 1.0, "X", "x0"), flip_channel(1, 1.0, "X", "x1")
    )
    layout = OpticalLayout(2, pair)
    script = ProtocolScript(
        n_qubits=2,
        stages=(Stage("s", layout, FirstClick(frozenset({ChannelKind.ENTANGLE}))),),
        initial_state=basis_state(2, "00"),
        initial_bits="00",
    )
    log, state = run(script, RngStream(1, 0))
    assert len(log.clicks) == 1
    assert log.clicks[0].op_label == "Xjk"
    # state is (|10> + s i |01>)/sqrt(2)
    s = log.clicks[0].sign
    expect = np.zeros(4, dtype=complex)
    expect[0b10] = 1 / math.sqrt(2)
    expect[0b01] = s * 1j / math.sqrt(2)
    assert fidelity(state, StateVector(2, expect)) == pytest.approx(1.0)


def test_backends_agree_click_for_click():
    pair = bs_combine(
        flip_channel(0, 0.5, "X", "x0"), flip_channel(1, 0.5, "X", "x1")
    )
    layout = OpticalLayout(
        2, pair + (flip_channel(0, 0.5, "Y", "y0"), flip_channel(1, 0.5, "Y", "y1"))
    )
    script = ProtocolScript(
        n_qubits=2,
        stages=(Stage("s", layout, Duration(4.0)),),
        initial_state=basis_state(2, "00"),
        initial_bits="00",
    )
    for idx in range(20):
        la, _ = run(script, RngStream(99, idx), backend="statevector")
        lb, _ = run(script, RngStream(99, idx), backend="stabilizer")
        assert la.to_csv() == lb.to_csv()


def test_stabilizer_backend_rejects_diagonal_stage():
    layout = OpticalLayout(1, (se_channel(0, 1.0),))
    script = ProtocolScript(
        n_qubits=1,
        stages=(Stage("s", layout, Duration(1.0)),),
        initial_state=basis_state(1, "1"),
        initial_bits="1",
    )
    with pytest.raises(ConfigurationError):
        run(script, RngStream(0, 0), backend="stabilizer")


def test_log_csv_format():
    layout = _flip_layout()
    script = ProtocolScript(
        n_qubits=1,
        stages=(Stage("s", layout, Duration(2.0)),),
        initial_state=basis_state(1, "0"),
        initial_bits="0",
    )
    log, _ = run(script, RngStream(0, 0))
    lines = log.to_csv().splitlines()
    assert lines[0] == "time,detector,kind,sign,qubits"
    for row in lines[1:]:
        cols = row.split(",")
        assert len(cols) == 5
        float(cols[0])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.1, 3.0))
def test_click_counts_poissonian(seed, t):
    # a single uniform flip channel at rate g clicks Poisson(g t) times
    layout = OpticalLayout(1, (flip_channel(0, 1.0, "X", "x"),))
    script = ProtocolScript(
        n_qubits=1,
        stages=(Stage("s", layout, Duration(t)),),
        initial_state=basis_state(1, "0"),
        initial_bits="0",
    )
    log, _ = run(script, RngStream(seed, 0))
    for c in log.clicks:
        assert 0.0 <= c.time <= t
    times = [c.time for c in log.clicks]
    assert times == sorted(times)
