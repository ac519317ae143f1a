"""Detection channels and their erasure compositions.

A channel is a monitored decay path: a jump operator (rate absorbed into the
amplitude scale), a detector label, and a kind.  Raw channels come from
spontaneous emission (lowering operator) and inelastic scattering (raising
operator).  A polarizing beam splitter erases which-process information and
turns an SE/IS pair into two unitary-flip channels; a balanced beam splitter
erases which-qubit information and turns two flip channels into an entangling
pair; mixing a flip channel with a matched classical source yields a
Hadamard-like jump.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import (
    ConfigurationError,
    ErasureMismatchError,
    UnsupportedConfigurationError,
)
from .qstate import (
    OperatorSum,
    PauliTerm,
    op_matrix,
    sigma_minus,
    sigma_plus,
)

RATE_EPS = 1e-12


class ChannelKind(Enum):
    SE = "SE"
    IS = "IS"
    FLIP = "FLIP"
    ENTANGLE = "ENTANGLE"
    CLASSICAL_MIX = "CLASSICAL_MIX"

    def __str__(self) -> str:  # CSV-friendly
        return self.value


#: kinds whose op is proportional to a unitary (L†L = rate * I)
UNITARY_KINDS = {ChannelKind.FLIP, ChannelKind.ENTANGLE, ChannelKind.CLASSICAL_MIX}


@dataclass(frozen=True)
class JumpChannel:
    """A detection channel.

    ``op`` carries the rate as an amplitude scale: L†L integrates to ``rate``
    times the identity (unitary kinds) or to ``rate`` times a projector
    (SE/IS).  ``op_label`` is a short tag ("sx", "sy", "sm", ...) recorded in
    click logs so correction bookkeeping can interpret events without the
    layout at hand.  For ENTANGLE channels ``qubits`` is ordered (j, k) as the
    inputs were combined, and ``sign`` is the detector-port sign.
    """

    id: str
    op: OperatorSum
    rate: float
    detector: str
    kind: ChannelKind
    qubits: tuple[int, ...]
    active: bool = True
    sign: int | None = None
    op_label: str = ""

    def __post_init__(self) -> None:
        if self.rate <= 0:
            raise ConfigurationError(f"channel {self.id}: rate must be positive")
        if self.kind in UNITARY_KINDS:
            _check_unitary_proportional(self.op, self.rate, self.id)


def _check_unitary_proportional(op: OperatorSum, rate: float, label: str) -> None:
    support = op.support()
    if len(support) > 3:
        raise ConfigurationError(f"channel {label}: support too large to verify")
    m = op_matrix(op, support)
    gram = m.conj().T @ m
    if not np.allclose(gram, rate * np.eye(gram.shape[0]), atol=1e-10 * max(rate, 1.0)):
        raise ConfigurationError(
            f"channel {label}: operator is not proportional to a unitary"
        )


def se_channel(qubit: int, gamma: float, detector: str | None = None) -> JumpChannel:
    """Spontaneous-emission monitoring: sqrt(gamma) * sigma_minus."""
    if gamma <= 0:
        raise ConfigurationError(f"decay rate must be positive, got {gamma}")
    det = detector or f"se:{qubit}"
    return JumpChannel(
        id=det,
        op=sigma_minus(qubit, math.sqrt(gamma)),
        rate=gamma,
        detector=det,
        kind=ChannelKind.SE,
        qubits=(qubit,),
        op_label="sm",
    )


def is_channel(qubit: int, gamma_p: float, detector: str | None = None) -> JumpChannel:
    """Inelastic-scattering monitoring: sqrt(gamma_p) * sigma_plus."""
    if gamma_p <= 0:
        raise ConfigurationError(f"pump rate must be positive, got {gamma_p}")
    det = detector or f"is:{qubit}"
    return JumpChannel(
        id=det,
        op=sigma_plus(qubit, math.sqrt(gamma_p)),
        rate=gamma_p,
        detector=det,
        kind=ChannelKind.IS,
        qubits=(qubit,),
        op_label="sp",
    )


def _flip_op(qubit: int, amp: float, theta: float) -> OperatorSum:
    # cos(theta) sx + sin(theta) sy; snap exact multiples of pi/2 so that the
    # sx / sy ports are single clean Pauli terms.
    c, s = math.cos(theta), math.sin(theta)
    if abs(c) < 1e-15:
        c = 0.0
    if abs(s) < 1e-15:
        s = 0.0
    terms = []
    if c != 0.0:
        terms.append(PauliTerm(amp * c, {qubit: "X"}))
    if s != 0.0:
        terms.append(PauliTerm(amp * s, {qubit: "Y"}))
    return OperatorSum(tuple(terms))


def _flip_label(theta: float) -> str:
    t = math.fmod(theta, 2 * math.pi)
    for ref, lab in ((0.0, "sx"), (math.pi / 2, "sy"), (math.pi, "-sx"),
                     (3 * math.pi / 2, "-sy"), (-math.pi / 2, "-sy"),
                     (-math.pi, "-sx"), (-3 * math.pi / 2, "sy")):
        if abs(t - ref) < 1e-12:
            return lab
    return f"flip({theta:.6g})"


def pbs_erase(
    se: JumpChannel, isc: JumpChannel, theta: float, prefix: str = ""
) -> tuple[JumpChannel, JumpChannel]:
    """Erase which-process information of an SE/IS pair on one qubit.

    Output ports carry sqrt(gamma/2) (cos t sx + sin t sy) at t = theta and
    t = theta + pi/2.  Phase convention is frozen to these real combinations:
    sm + sp = sx and the -i relating sm - sp to sy is dropped per port as a
    global phase, but relative phases inside each port operator are kept.
    """
    if se.kind is not ChannelKind.SE or isc.kind is not ChannelKind.IS:
        raise ConfigurationError("pbs_erase needs one SE and one IS channel")
    if se.qubits != isc.qubits:
        raise ConfigurationError("pbs_erase channels must share a qubit")
    if abs(se.rate - isc.rate) > RATE_EPS * max(se.rate, isc.rate):
        raise ErasureMismatchError(
            f"distinguishable photons cannot be erased: rates "
            f"{se.rate} != {isc.rate}"
        )
    (qubit,) = se.qubits
    gamma = se.rate
    amp = math.sqrt(gamma / 2.0)
    ports = []
    for i, t in enumerate((theta, theta + math.pi / 2)):
        det = f"{prefix}pbs:{qubit}:{'ab'[i]}"
        ports.append(
            JumpChannel(
                id=det,
                op=_flip_op(qubit, amp, t),
                rate=gamma / 2.0,
                detector=det,
                kind=ChannelKind.FLIP,
                qubits=(qubit,),
                op_label=_flip_label(t),
            )
        )
    return ports[0], ports[1]


def flip_channel(
    qubit: int, rate: float, pauli: str, detector: str
) -> JumpChannel:
    """Local flip channel sqrt(rate) * sigma_pauli; used when a BS is removed
    and an entangling pair reverts to its constituent local flips."""
    if pauli not in ("X", "Y"):
        raise ConfigurationError(f"flip channel must be X or Y, got {pauli!r}")
    return JumpChannel(
        id=detector,
        op=OperatorSum((PauliTerm(math.sqrt(rate), {qubit: pauli}),)),
        rate=rate,
        detector=detector,
        kind=ChannelKind.FLIP,
        qubits=(qubit,),
        op_label="sx" if pauli == "X" else "sy",
    )


def bs_combine(
    a: JumpChannel, b: JumpChannel, prefix: str = ""
) -> tuple[JumpChannel, JumpChannel]:
    """Erase which-qubit information of two flip channels on distinct qubits.

    Ports get (L_a + i L_b)/sqrt(2) with sign +1 and (L_a - i L_b)/sqrt(2)
    with sign -1; qubit order in the records is (a.qubit, b.qubit).
    """
    if a.kind is not ChannelKind.FLIP or b.kind is not ChannelKind.FLIP:
        raise ConfigurationError("bs_combine expects two FLIP channels")
    if a.qubits == b.qubits:
        raise ConfigurationError("cannot combine channels on the same qubit")
    if abs(a.rate - b.rate) > RATE_EPS * max(a.rate, b.rate):
        raise ErasureMismatchError(
            f"distinguishable photons cannot be erased: rates {a.rate} != {b.rate}"
        )
    (qa,), (qb,) = a.qubits, b.qubits
    inv = 1.0 / math.sqrt(2.0)
    ports = []
    for sign, tag in ((+1, "+"), (-1, "-")):
        terms = tuple(
            PauliTerm(inv * t.coefficient, dict(t.factors)) for t in a.op.terms
        ) + tuple(
            PauliTerm(sign * 1j * inv * t.coefficient, dict(t.factors))
            for t in b.op.terms
        )
        det = f"{prefix}bs:{qa}:{qb}:{tag}"
        ports.append(
            JumpChannel(
                id=det,
                op=OperatorSum(terms),
                rate=a.rate,
                detector=det,
                kind=ChannelKind.ENTANGLE,
                qubits=(qa, qb),
                sign=sign,
                op_label="Xjk",
            )
        )
    return ports[0], ports[1]


def classical_mix(ch: JumpChannel, sign: int, prefix: str = "") -> JumpChannel:
    """Mix a sigma_y flip port with a matched classical source.

    The resulting jump is proportional to exp(sign * i pi/4 sigma_y), i.e.
    (I + sign * i sigma_y)/sqrt(2).  The matched source doubles the count
    rate, so the channel rate is twice the input port rate.
    """
    if sign not in (+1, -1):
        raise ConfigurationError("sign must be +1 or -1")
    if ch.kind is not ChannelKind.FLIP or ch.op_label != "sy":
        raise ConfigurationError("classical_mix needs the sigma_y flip port")
    (qubit,) = ch.qubits
    rate = 2.0 * ch.rate
    amp = math.sqrt(rate / 2.0)
    op = OperatorSum(
        (
            PauliTerm(amp, {qubit: "I"}),
            PauliTerm(sign * 1j * amp, {qubit: "Y"}),
        )
    )
    det = f"{prefix}mix:{qubit}:{'+' if sign > 0 else '-'}"
    return JumpChannel(
        id=det,
        op=op,
        rate=rate,
        detector=det,
        kind=ChannelKind.CLASSICAL_MIX,
        qubits=(qubit,),
        sign=sign,
        op_label="Hmix",
    )


@dataclass(frozen=True)
class DecayReport:
    """Classification of Gamma = sum L†L over a channel set.

    UNIFORM: Gamma = uniform_rate * I.  DIAGONAL: Gamma is diagonal in the
    computational basis, decomposed as uniform_rate * I plus, per qubit, extra
    rates (d0, d1) applying to the |0> / |1> components.  Balanced per-qubit
    contributions are folded into the uniform part, so an SE+IS pair at equal
    rates classifies as UNIFORM.
    """

    classification: str
    uniform_rate: float
    qubit_terms: dict[int, tuple[float, float]] = field(default_factory=dict)
    _diag_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def gamma_diagonal(self, n_qubits: int) -> np.ndarray:
        """Dense diagonal of Gamma over all 2^n basis indices (small n only)."""
        cached = self._diag_cache.get(n_qubits)
        if cached is not None:
            return cached
        idx = np.arange(2**n_qubits)
        diag = np.full(idx.shape, self.uniform_rate, dtype=float)
        for q, (d0, d1) in self.qubit_terms.items():
            bit = (idx >> (n_qubits - 1 - q)) & 1
            diag += np.where(bit == 1, d1, d0)
        self._diag_cache[n_qubits] = diag
        return diag


def total_decay(channels) -> DecayReport:
    """Classify the no-jump generator of the active channel subset.

    Every channel set constructible from this module's factories is UNIFORM
    or DIAGONAL; anything else raises, signalling a composition bug.
    """
    uniform = 0.0
    d0: dict[int, float] = {}
    d1: dict[int, float] = {}
    for ch in channels:
        if not ch.active:
            continue
        if ch.kind in UNITARY_KINDS:
            uniform += ch.rate
        elif ch.kind is ChannelKind.SE:
            (q,) = ch.qubits
            d1[q] = d1.get(q, 0.0) + ch.rate
        elif ch.kind is ChannelKind.IS:
            (q,) = ch.qubits
            d0[q] = d0.get(q, 0.0) + ch.rate
        else:
            raise UnsupportedConfigurationError(
                f"channel {ch.id}: decay contribution is not diagonal"
            )
    qubit_terms: dict[int, tuple[float, float]] = {}
    for q in sorted(set(d0) | set(d1)):
        a, b = d0.get(q, 0.0), d1.get(q, 0.0)
        common = min(a, b)
        uniform += common
        a, b = a - common, b - common
        if a > RATE_EPS or b > RATE_EPS:
            qubit_terms[q] = (a, b)
    cls = "UNIFORM" if not qubit_terms else "DIAGONAL"
    return DecayReport(cls, uniform, qubit_terms)


# ---------------------------------------------------------------------------
# Layouts and reconfiguration rules


@dataclass(frozen=True)
class RemoveBS:
    """Replace an entangling port pair by its constituent local channels."""

    remove: frozenset[str]
    add: tuple[JumpChannel, ...]
    edge: tuple[int, int] | None = None


@dataclass(frozen=True)
class Deactivate:
    detectors: frozenset[str]


@dataclass(frozen=True)
class StageAdvance:
    pass


@dataclass(frozen=True)
class ReconfigRule:
    """Fire ``action`` when one of the watched detectors clicks."""

    watch: frozenset[str]
    action: RemoveBS | Deactivate | StageAdvance
    once: bool = True


@dataclass(frozen=True)
class OpticalLayout:
    """An immutable detection network; reconfiguration builds a new layout."""

    n_qubits: int
    channels: tuple[JumpChannel, ...]
    triggers: tuple[ReconfigRule, ...] = ()

    def __post_init__(self) -> None:
        seen = set()
        for ch in self.channels:
            if ch.detector in seen:
                raise ConfigurationError(f"duplicate detector label {ch.detector!r}")
            seen.add(ch.detector)
            for q in ch.qubits:
                if q >= self.n_qubits:
                    raise ConfigurationError(
                        f"channel {ch.id} touches qubit {q} outside the register"
                    )
        for rule in self.triggers:
            missing = rule.watch - seen
            if missing:
                raise ConfigurationError(
                    f"trigger watches unknown detectors: {sorted(missing)}"
                )

    def active_channels(self) -> tuple[JumpChannel, ...]:
        return tuple(ch for ch in self.channels if ch.active)


def _erased_pair(qubit: int, gamma: float, theta: float, prefix: str = ""):
    se = se_channel(qubit, gamma)
    isc = is_channel(qubit, gamma)
    return pbs_erase(se, isc, theta, prefix=prefix)


def parse_layout_file(text: str) -> OpticalLayout:
    """Parse the line-oriented layout description format.

    Directives (one per line, ``#`` comments allowed)::

        n_qubits=<N>
        qubit <idx> gamma=<rate> [theta=<radians>]   # PBS-erased flip ports
        raw <idx> gamma=<rate> kind=<se|is>          # bare monitoring channel
        bs <j> <k>                                   # combine the sx ports
        trigger remove_bs <j> <k>                    # restore local sx on click

    Parse errors report the offending line number.
    """
    n_qubits: int | None = None
    flip_ports: dict[int, tuple[JumpChannel, JumpChannel]] = {}
    raw: list[JumpChannel] = []
    bs_pairs: list[tuple[int, int]] = []
    trigger_edges: list[tuple[int, int]] = []

    def err(lineno: int, msg: str) -> ConfigurationError:
        return ConfigurationError(f"layout line {lineno}: {msg}")

    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        kv = {}
        for tok in tokens[1:]:
            if "=" in tok:
                k, v = tok.split("=", 1)
                kv[k] = v
        try:
            if head.startswith("n_qubits"):
                n_qubits = int(head.split("=", 1)[1]) if "=" in head else int(tokens[1])
            elif head == "qubit":
                q = int(tokens[1])
                gamma = float(kv["gamma"])
                theta = float(kv.get("theta", "0"))
                flip_ports[q] = _erased_pair(q, gamma, theta)
            elif head == "raw":
                q = int(tokens[1])
                gamma = float(kv["gamma"])
                kind = kv.get("kind", "se")
                raw.append(
                    se_channel(q, gamma) if kind == "se" else is_channel(q, gamma)
                )
            elif head == "bs":
                bs_pairs.append((int(tokens[1]), int(tokens[2])))
            elif head == "trigger":
                if tokens[1] != "remove_bs":
                    raise ValueError(f"unknown trigger action {tokens[1]!r}")
                trigger_edges.append((int(tokens[2]), int(tokens[3])))
            else:
                raise ValueError(f"unknown directive {head!r}")
        except ConfigurationError as e:
            raise err(lineno, str(e)) from e
        except (KeyError, ValueError, IndexError) as e:
            raise err(lineno, str(e)) from e

    if n_qubits is None:
        raise ConfigurationError("layout: missing n_qubits")

    channels: list[JumpChannel] = list(raw)
    combined: set[int] = set()
    ports_by_edge: dict[tuple[int, int], tuple[JumpChannel, JumpChannel]] = {}
    for j, k in bs_pairs:
        if j not in flip_ports or k not in flip_ports:
            raise ConfigurationError(f"bs {j} {k}: both qubits need PBS ports")
        pair = bs_combine(flip_ports[j][0], flip_ports[k][0])
        ports_by_edge[(j, k)] = pair
        channels.extend(pair)
        combined.update((j, k))
    for q, (px, py) in flip_ports.items():
        if q not in combined:
            channels.append(px)
        channels.append(py)

    triggers = []
    for j, k in trigger_edges:
        if (j, k) not in ports_by_edge:
            raise ConfigurationError(f"trigger remove_bs {j} {k}: no such bs pair")
        pair = ports_by_edge[(j, k)]
        rate = pair[0].rate
        add = (
            flip_channel(j, rate, "X", f"x:{j}:restored"),
            flip_channel(k, rate, "X", f"x:{k}:restored"),
        )
        triggers.append(
            ReconfigRule(
                watch=frozenset(p.detector for p in pair),
                action=RemoveBS(
                    remove=frozenset(p.detector for p in pair), add=add, edge=(j, k)
                ),
            )
        )
    return OpticalLayout(n_qubits, tuple(channels), tuple(triggers))


def deactivated(layout: OpticalLayout, detectors: frozenset[str]) -> OpticalLayout:
    new = tuple(
        replace(ch, active=False) if ch.detector in detectors else ch
        for ch in layout.channels
    )
    return OpticalLayout(layout.n_qubits, new, layout.triggers)
