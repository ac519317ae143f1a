"""Event-driven Monte Carlo wavefunction sampler.

Waiting times are drawn exactly from the no-jump survival law: for a uniform
decay operator (Gamma proportional to identity) the waiting time is a plain
exponential and the channel choice is state-independent; for a diagonal Gamma
the survival ||exp(-Gamma t/2) psi||^2 = r is inverted by bisection.  There is
no small-dt stepping anywhere, so the sampling is bias-free.

Reproducibility: a trajectory is a pure function of (script, master_seed,
trajectory_index).  Streams are split with numpy's SeedSequence spawn keys,
and the draw order per event is fixed (time first, then channel).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    ChannelKind,
    DecayReport,
    Deactivate,
    JumpChannel,
    OpticalLayout,
    RemoveBS,
    StageAdvance,
    total_decay,
)
from .errors import ConfigurationError, SamplerConsistencyError
from .qstate import StateVector, apply, normalize
from .errors import AnnihilationError

BISECT_RTOL = 1e-10


@dataclass(frozen=True)
class ClickRecord:
    time: float
    detector: str
    kind: ChannelKind
    sign: int | None
    qubits: tuple[int, ...]
    op_label: str = ""


@dataclass
class TrajectoryLog:
    clicks: list[ClickRecord] = field(default_factory=list)
    stage_marks: list[tuple[float, str]] = field(default_factory=list)
    measurements: dict[int, int] = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["time,detector,kind,sign,qubits"]
        for c in self.clicks:
            sign = "" if c.sign is None else ("+" if c.sign > 0 else "-")
            qubits = ";".join(str(q) for q in c.qubits)
            lines.append(f"{c.time:.12g},{c.detector},{c.kind},{sign},{qubits}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RngStream:
    """A reproducible stream: a pure function of (master_seed, index)."""

    master_seed: int
    trajectory_index: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(self.master_seed, spawn_key=(self.trajectory_index,))
        )


@dataclass(frozen=True)
class JumpDraw:
    t: float
    channel: JumpChannel


@dataclass(frozen=True)
class NoJump:
    """The trajectory never jumps (survival floor exceeded the draw)."""


# Stage termination conditions ------------------------------------------------


@dataclass(frozen=True)
class Duration:
    t: float


@dataclass(frozen=True)
class FirstClick:
    kinds: frozenset[ChannelKind]


@dataclass(frozen=True)
class MeasureAll:
    qubits: tuple[int, ...]
    cutoff: float


@dataclass(frozen=True)
class EdgesComplete:
    n_edges: int


@dataclass(frozen=True)
class Stage:
    name: str
    layout: OpticalLayout
    termination: Duration | FirstClick | MeasureAll | EdgesComplete


def _population(state: StateVector, qubit: int, bit: int) -> float:
    probs = np.abs(state.amplitudes) ** 2
    idx = np.arange(state.dim)
    mask = ((idx >> (state.n_qubits - 1 - qubit)) & 1) == bit
    return float(probs[mask].sum())


def _channel_weight(ch: JumpChannel, state: StateVector) -> float:
    if ch.kind is ChannelKind.SE:
        return ch.rate * _population(state, ch.qubits[0], 1)
    if ch.kind is ChannelKind.IS:
        return ch.rate * _population(state, ch.qubits[0], 0)
    return ch.rate


def _pick(channels, weights, rng) -> JumpChannel:
    total = float(sum(weights))
    if total <= 0:
        raise SamplerConsistencyError("all channel rates vanish at the jump time")
    r = rng.random() * total
    acc = 0.0
    for ch, w in zip(channels, weights):
        acc += w
        if r < acc:
            return ch
    return channels[-1]


def no_jump_evolve(
    state: StateVector, report: DecayReport, dt: float
) -> StateVector:
    """Conditional evolution between detections (normalized).

    For a UNIFORM report this is exactly the identity: the conditional state
    is protected however long no click arrives.
    """
    if dt < 0:
        raise ConfigurationError("negative evolution time")
    if report.classification == "UNIFORM" or dt == 0.0:
        return state.copy()
    diag = report.gamma_diagonal(state.n_qubits)
    amps = state.amplitudes * np.exp(-0.5 * diag * dt)
    return normalize(StateVector(state.n_qubits, amps))


def sample_waiting_time(
    state: StateVector | None,
    channels,
    rng: np.random.Generator,
    report: DecayReport | None = None,
) -> JumpDraw | NoJump:
    """Draw (waiting time, channel) from the exact survival law.

    ``state`` may be None for UNIFORM channel sets (the draw is then fully
    state-independent, which is what lets the stabilizer backend reuse this
    sampler unchanged).
    """
    channels = [ch for ch in channels if ch.active]
    if not channels:
        return NoJump()
    if report is None:
        report = total_decay(channels)

    if report.classification == "UNIFORM":
        c = report.uniform_rate
        r = rng.random()
        # survival e^{-ct} = 1 - r; log1p keeps t finite for r -> 0
        t = -math.log1p(-r) / c
        ch = _pick(channels, [ch.rate for ch in channels], rng)
        return JumpDraw(t, ch)

    if state is None:
        raise ConfigurationError("diagonal decay sampling needs a statevector")
    probs = np.abs(state.amplitudes) ** 2
    diag = report.gamma_diagonal(state.n_qubits)
    r = rng.random()
    floor = float(probs[diag <= 1e-300].sum())
    if r <= floor:
        return NoJump()

    # two-level diagonal {0, g}: the survival law inverts in closed form
    g_max = float(diag.max())
    if np.all((diag <= 1e-300) | (diag >= g_max * (1.0 - 1e-12))):
        decaying = float(probs[diag > 1e-300].sum())
        t = -math.log((r - floor) / decaying) / g_max
        evolved = no_jump_evolve(state, report, t)
        weights = [_channel_weight(ch, evolved) for ch in channels]
        return JumpDraw(t, _pick(channels, weights, rng))

    def survival(t: float) -> float:
        return float(probs @ np.exp(-diag * t))

    hi = 1.0 / max(report.uniform_rate, diag.max())
    while survival(hi) > r:
        hi *= 2.0
    lo = 0.0
    while hi - lo > BISECT_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if survival(mid) > r:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    evolved = no_jump_evolve(state, report, t)
    weights = [_channel_weight(ch, evolved) for ch in channels]
    ch = _pick(channels, weights, rng)
    return JumpDraw(t, ch)


def apply_jump(
    state: StateVector, channel: JumpChannel, t: float
) -> tuple[StateVector, ClickRecord]:
    """Apply the jump operator, renormalize, and record the click."""
    try:
        new = normalize(apply(state, channel.op))
    except AnnihilationError as e:
        raise SamplerConsistencyError(
            f"channel {channel.id} selected with zero rate"
        ) from e
    record = ClickRecord(
        time=t,
        detector=channel.detector,
        kind=channel.kind,
        sign=channel.sign,
        qubits=channel.qubits,
        op_label=channel.op_label,
    )
    return new, record


# Trajectory execution ---------------------------------------------------------


class _WorkingLayout:
    """Mutable channel set for one stage; fires reconfiguration rules."""

    def __init__(self, layout: OpticalLayout):
        self.channels: dict[str, JumpChannel] = {
            ch.detector: ch for ch in layout.channels if ch.active
        }
        self.rules = list(layout.triggers)
        self.fired: set[int] = set()
        self.edges_completed = 0
        self._cache_key: tuple | None = None
        self._report: DecayReport | None = None

    def active(self) -> list[JumpChannel]:
        return list(self.channels.values())

    def report(self) -> DecayReport:
        key = tuple(sorted(self.channels))
        if key != self._cache_key:
            self._report = total_decay(self.channels.values())
            self._cache_key = key
        return self._report

    def fire(self, detector: str) -> bool:
        """Apply rules watching ``detector``; returns True on STAGE_ADVANCE."""
        advance = False
        for i, rule in enumerate(self.rules):
            if i in self.fired and rule.once:
                continue
            if detector not in rule.watch:
                continue
            self.fired.add(i)
            action = rule.action
            if isinstance(action, RemoveBS):
                for det in action.remove:
                    self.channels.pop(det, None)
                for ch in action.add:
                    self.channels[ch.detector] = ch
                self.edges_completed += 1
            elif isinstance(action, Deactivate):
                for det in action.detectors:
                    self.channels.pop(det, None)
            elif isinstance(action, StageAdvance):
                advance = True
        return advance


class _TableauState:
    """Adapter running UNIFORM-only trajectories on a stabilizer tableau."""

    def __init__(self, tableau):
        self.tableau = tableau

    def apply_channel(self, channel: JumpChannel) -> None:
        from .stabilizer import apply_channel_clifford

        apply_channel_clifford(self.tableau, channel)


def run(script, rng: RngStream, backend: str = "statevector", until: float | None = None):
    """Execute a protocol script; returns (TrajectoryLog, final state).

    Stages run in order; within a stage the loop alternates waiting-time
    sampling and jump application, firing reconfiguration rules synchronously
    at click times.  With ``until`` set, execution stops at that global time
    and the conditional state at that instant is returned.

    ``backend`` is "statevector" or "stabilizer"; the stabilizer backend
    requires every stage to be UNIFORM and all jumps Clifford.
    """
    gen = rng.generator()
    log = TrajectoryLog()
    t = 0.0

    if backend == "statevector":
        if script.initial_state is None:
            raise ConfigurationError(
                "script has no materialized initial state; use the stabilizer backend"
            )
        state = script.initial_state.copy()
        tabstate = None
    elif backend == "stabilizer":
        from .stabilizer import StabilizerTableau

        bits = script.initial_bits
        if bits is None or any(b != "0" for b in bits):
            raise ConfigurationError(
                "stabilizer backend needs an all-|0> initial product state"
            )
        tabstate = _TableauState(StabilizerTableau(script.n_qubits))
        state = None
    else:
        raise ConfigurationError(f"unknown backend {backend!r}")

    for stage in script.stages:
        log.stage_marks.append((t, stage.name))
        working = _WorkingLayout(stage.layout)
        term = stage.termination

        if isinstance(term, (Duration, MeasureAll)):
            stage_end = t + (term.t if isinstance(term, Duration) else term.cutoff)
        elif isinstance(term, (FirstClick, EdgesComplete)):
            stage_end = None
        else:
            raise ConfigurationError(f"stage {stage.name}: unknown termination")

        if isinstance(term, EdgesComplete) and term.n_edges == 0:
            continue

        measured_clicks: set[int] = set()

        while True:
            horizon = None
            if stage_end is not None:
                horizon = stage_end
            if until is not None:
                horizon = until if horizon is None else min(horizon, until)

            report = working.report()
            if tabstate is not None and report.classification != "UNIFORM":
                raise ConfigurationError(
                    "stabilizer backend supports only uniform-decay stages"
                )
            draw = sample_waiting_time(state, working.active(), gen, report)

            if isinstance(draw, NoJump) or (
                horizon is not None and t + draw.t >= horizon
            ):
                if horizon is None:
                    raise ConfigurationError(
                        f"stage {stage.name}: no-jump with no termination horizon"
                    )
                if state is not None:
                    state = no_jump_evolve(state, report, horizon - t)
                t = horizon
                if until is not None and (stage_end is None or until <= stage_end):
                    _finish_measurement(term, measured_clicks, log)
                    return log, (state if tabstate is None else tabstate.tableau)
                break

            t += draw.t
            if state is not None:
                state = no_jump_evolve(state, report, draw.t)
                state, record = apply_jump(state, draw.channel, t)
            else:
                tabstate.apply_channel(draw.channel)
                record = ClickRecord(
                    time=t,
                    detector=draw.channel.detector,
                    kind=draw.channel.kind,
                    sign=draw.channel.sign,
                    qubits=draw.channel.qubits,
                    op_label=draw.channel.op_label,
                )
            log.clicks.append(record)

            if isinstance(term, MeasureAll):
                if record.kind is ChannelKind.SE and record.qubits[0] in term.qubits:
                    measured_clicks.add(record.qubits[0])

            advance = working.fire(record.detector)
            if advance:
                break
            if isinstance(term, FirstClick) and record.kind in term.kinds:
                break
            if isinstance(term, EdgesComplete) and (
                working.edges_completed >= term.n_edges
            ):
                break

        _finish_measurement(term, measured_clicks, log)

    return log, (state if tabstate is None else tabstate.tableau)


def _finish_measurement(term, measured_clicks: set[int], log: TrajectoryLog) -> None:
    if isinstance(term, MeasureAll):
        for q in term.qubits:
            log.measurements[q] = 1 if q in measured_clicks else 0
