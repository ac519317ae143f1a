"""Binary-symplectic stabilizer tableau for Clifford-only verification.

Standard Aaronson-Gottesman layout: rows 0..n-1 are destabilizers, rows
n..2n-1 stabilizers; x[i, q] / z[i, q] are the X/Z bits of generator i on
qubit q and r[i] is the phase as a power of i (kept mod 4 because the
entangling jump introduces i factors through its Clifford decomposition;
global phase is only discarded when comparing states).

Row letters are literal: (x=1, z=1) means sigma_y, not X*Z.
"""

from __future__ import annotations

import numpy as np

from .channels import ChannelKind, JumpChannel
from .errors import ConfigurationError, IntegrityError
from .qstate import StateVector


class StabilizerTableau:
    """Stabilizer state of n qubits, initialized to |0...0>."""

    def __init__(self, n: int):
        if n < 1:
            raise ConfigurationError(f"need at least one qubit, got {n}")
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        for i in range(n):
            self.x[i, i] = 1          # destabilizer X_i
            self.z[n + i, i] = 1      # stabilizer Z_i

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau.__new__(StabilizerTableau)
        t.n = self.n
        t.x = self.x.copy()
        t.z = self.z.copy()
        t.r = self.r.copy()
        return t

    # -- gates (conjugation updates act on all 2n rows at once) --------------

    def h(self, q: int) -> "StabilizerTableau":
        self.r = (self.r + 2 * (self.x[:, q] & self.z[:, q])) % 4
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()
        return self

    def s(self, q: int) -> "StabilizerTableau":
        self.r = (self.r + 2 * (self.x[:, q] & self.z[:, q])) % 4
        self.z[:, q] ^= self.x[:, q]
        return self

    def sdg(self, q: int) -> "StabilizerTableau":
        self.r = (self.r + 2 * (self.x[:, q] & (self.z[:, q] ^ 1))) % 4
        self.z[:, q] ^= self.x[:, q]
        return self

    def xgate(self, q: int) -> "StabilizerTableau":
        self.r = (self.r + 2 * self.z[:, q]) % 4
        return self

    def ygate(self, q: int) -> "StabilizerTableau":
        self.r = (self.r + 2 * (self.x[:, q] ^ self.z[:, q])) % 4
        return self

    def zgate(self, q: int) -> "StabilizerTableau":
        self.r = (self.r + 2 * self.x[:, q]) % 4
        return self

    def cx(self, c: int, t: int) -> "StabilizerTableau":
        self.r = (
            self.r
            + 2 * (self.x[:, c] & self.z[:, t] & (self.x[:, t] ^ self.z[:, c] ^ 1))
        ) % 4
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]
        return self

    def cz(self, a: int, b: int) -> "StabilizerTableau":
        return self.h(b).cx(a, b).h(b)

    def sqrt_x(self, q: int, sign: int) -> "StabilizerTableau":
        # exp(sign * i pi/4 sigma_x) up to global phase
        if sign > 0:
            return self.h(q).sdg(q).h(q)
        return self.h(q).s(q).h(q)

    def rot_y(self, q: int, sign: int) -> "StabilizerTableau":
        # exp(sign * i pi/4 sigma_y) = sigma_z H (sign +) / H sigma_z (sign -)
        if sign > 0:
            return self.h(q).zgate(q)
        return self.zgate(q).h(q)

    def xjk(self, sign: int, j: int, k: int) -> "StabilizerTableau":
        """The entangling jump (sx_j + sign*i*sx_k)/sqrt(2) as its Clifford
        decomposition: cX_(j,k), then sqrt_x(k, sign), then sqrt_x(j, -sign)."""
        # cX = (H_j H_k) CZ (H_j H_k)
        self.h(j).h(k).cz(j, k).h(j).h(k)
        self.sqrt_x(k, sign)
        self.sqrt_x(j, -sign)
        return self


def apply_gate(tab: StabilizerTableau, gate: str, *qubits: int, sign: int = +1):
    """Apply a named gate in place; returns the tableau.

    Gates: H, S, SDG, CX, CZ, X, Y, Z, XJK (XJK takes sign=+1/-1 and (j, k)).
    """
    table = {
        "H": tab.h, "S": tab.s, "SDG": tab.sdg, "CX": tab.cx, "CZ": tab.cz,
        "X": tab.xgate, "Y": tab.ygate, "Z": tab.zgate,
    }
    if gate == "XJK":
        return tab.xjk(sign, *qubits)
    if gate not in table:
        raise ConfigurationError(f"unknown gate {gate!r}")
    return table[gate](*qubits)


def apply_channel_clifford(tab: StabilizerTableau, ch: JumpChannel) -> None:
    """Apply a jump channel's (Clifford) unitary part to the tableau."""
    if ch.kind is ChannelKind.FLIP:
        (q,) = ch.qubits
        if ch.op_label in ("sx", "-sx"):
            tab.xgate(q)
        elif ch.op_label in ("sy", "-sy"):
            tab.ygate(q)
        else:
            raise ConfigurationError(
                f"flip channel {ch.id} is not Clifford (label {ch.op_label!r})"
            )
    elif ch.kind is ChannelKind.ENTANGLE:
        tab.xjk(ch.sign, *ch.qubits)
    elif ch.kind is ChannelKind.CLASSICAL_MIX:
        tab.rot_y(ch.qubits[0], ch.sign)
    else:
        raise ConfigurationError(f"channel kind {ch.kind} has no Clifford action")


def from_graph(graph) -> StabilizerTableau:
    """Tableau of the graph state: H on every vertex, then CZ per edge."""
    tab = StabilizerTableau(graph.n_vertices)
    for v in range(graph.n_vertices):
        tab.h(v)
    for j, k in graph.edges:
        tab.cz(j, k)
    return tab


# -- row algebra ----------------------------------------------------------------


def _g_exponent(x1, z1, x2, z2):
    """Exponent of i picked up when multiplying letter (x1,z1) by (x2,z2)."""
    # Aaronson-Gottesman g function, vectorized, values in {-1, 0, 1}.
    g = np.zeros(np.broadcast(x1, x2).shape, dtype=np.int64)
    both = (x1 == 1) & (z1 == 1)
    g = np.where(both, z2.astype(np.int64) - x2.astype(np.int64), g)
    xonly = (x1 == 1) & (z1 == 0)
    g = np.where(xonly, z2.astype(np.int64) * (2 * x2.astype(np.int64) - 1), g)
    zonly = (x1 == 0) & (z1 == 1)
    g = np.where(zonly, x2.astype(np.int64) * (1 - 2 * z2.astype(np.int64)), g)
    return g


def row_multiply(x1, z1, r1, x2, z2, r2):
    """(x1,z1,r1) * (x2,z2,r2) as Pauli rows; returns (x, z, r mod 4)."""
    phase = (int(r1) + int(r2) + int(_g_exponent(x1, z1, x2, z2).sum())) % 4
    return x1 ^ x2, z1 ^ z2, phase


def _symplectic_product(x1, z1, x2, z2) -> int:
    return int((x1 & z2).sum() + (z1 & x2).sum()) % 2


def validate(tab: StabilizerTableau) -> None:
    """Check the symplectic invariants; raises IntegrityError on violation."""
    n = tab.n
    for i in range(n):
        if tab.r[n + i] % 2 != 0:
            raise IntegrityError(f"stabilizer row {i} has a non-Hermitian phase")
    for i in range(2 * n):
        for j in range(i + 1, 2 * n):
            sp = _symplectic_product(tab.x[i], tab.z[i], tab.x[j], tab.z[j])
            anti = (i < n <= j and j - n == i) or (j < n <= i and i - n == j)
            if sp != (1 if anti else 0):
                raise IntegrityError(
                    f"rows {i},{j} break the symplectic pairing"
                )


def states_equal(a: StabilizerTableau, b: StabilizerTableau) -> bool:
    """True iff the stabilizer groups (with signs) coincide.

    Each generator of b is expressed over a's generators by GF(2) elimination;
    the phase of the reconstructed product must match exactly.  Equality of
    the groups is equality of the states up to global phase.
    """
    if a.n != b.n:
        raise ConfigurationError("tableau sizes differ")
    validate(a)
    validate(b)
    n = a.n
    sx, sz, sr = a.x[n:], a.z[n:], a.r[n:]

    rows = np.concatenate([sx, sz], axis=1).astype(np.uint8)  # n x 2n
    combos = np.eye(n, dtype=np.uint8)
    pivots: list[int] = []
    rank = 0
    for col in range(2 * n):
        hit = np.nonzero(rows[rank:, col])[0]
        if hit.size == 0:
            pivots.append(-1)
            continue
        pr = rank + int(hit[0])
        rows[[rank, pr]] = rows[[pr, rank]]
        combos[[rank, pr]] = combos[[pr, rank]]
        mask = rows[:, col].copy()
        mask[rank] = 0
        rows ^= np.outer(mask, rows[rank])
        combos ^= np.outer(mask, combos[rank])
        pivots.append(rank)
        rank += 1

    for i in range(n):
        vec = np.concatenate([b.x[n + i], b.z[n + i]]).astype(np.uint8)
        combo = np.zeros(n, dtype=np.uint8)
        for col in range(2 * n):
            if vec[col] and pivots[col] >= 0:
                vec ^= rows[pivots[col]]
                combo ^= combos[pivots[col]]
            elif vec[col]:
                return False
        if vec.any():
            return False
        # rebuild the product of a's generators with its phase
        px = np.zeros(n, dtype=np.uint8)
        pz = np.zeros(n, dtype=np.uint8)
        pr = 0
        for g in np.nonzero(combo)[0]:
            px, pz, pr = row_multiply(px, pz, pr, sx[g], sz[g], sr[g])
        if not (np.array_equal(px, b.x[n + i]) and np.array_equal(pz, b.z[n + i])
                and pr == int(b.r[n + i])):
            return False
    return True


def to_statevector(tab: StabilizerTableau) -> StateVector:
    """Reconstruct the (unique) stabilized state; small n only.

    psi is obtained by projecting a basis state with Prod_k (I + S_k)/2.
    """
    n = tab.n
    if n > 14:
        raise ConfigurationError("statevector reconstruction capped at 14 qubits")
    dim = 2**n
    idx = np.arange(dim)

    def row_apply(x, z, r, v):
        xmask = 0
        zmask = 0
        ny = 0
        for q in range(n):
            bitpos = n - 1 - q
            if x[q]:
                xmask |= 1 << bitpos
            if z[q]:
                zmask |= 1 << bitpos
            if x[q] and z[q]:
                ny += 1
        signs = (-1.0) ** _popcount(idx & zmask)
        phase = 1j ** ((int(r) + ny) % 4)
        out = np.zeros(dim, dtype=complex)
        out[idx ^ xmask] = phase * signs * v
        return out

    tol = 0.25 / dim
    for b in range(dim):
        v = np.zeros(dim, dtype=complex)
        v[b] = 1.0
        for k in range(n):
            v = 0.5 * (v + row_apply(tab.x[n + k], tab.z[n + k], tab.r[n + k], v))
        nrm = np.linalg.norm(v)
        if nrm**2 > tol:
            return StateVector(n, v / nrm)
    raise IntegrityError("projector annihilated every basis state")


def _popcount(arr: np.ndarray) -> np.ndarray:
    out = np.zeros(arr.shape, dtype=np.int64)
    a = arr.copy()
    while a.any():
        out += a & 1
        a >>= 1
    return out


def dump_generators(tab: StabilizerTableau) -> str:
    """Stabilizer rows as phase-prefixed Pauli strings."""
    letters = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
    phases = {0: "+", 1: "+i", 2: "-", 3: "-i"}
    lines = []
    for i in range(tab.n, 2 * tab.n):
        s = "".join(letters[(int(x), int(z))] for x, z in zip(tab.x[i], tab.z[i]))
        lines.append(f"{phases[int(tab.r[i])]}{s}")
    return "\n".join(lines)
