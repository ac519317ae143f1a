"""Independent oracles: master-equation integrator and coupon-collector stats.

The Lindblad integrator is the unconditioned (unobserved-reservoir) picture
the trajectory ensemble must average to; the coupon-collector sampler checks
the graph-generation timing claim without touching any quantum state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, ConfigurationError, IntegrityError
from .qstate import op_matrix
from .trajectory import RngStream, run

MAX_ORACLE_QUBITS = 6


@dataclass
class DensityMatrix:
    n: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.shape != (2**self.n, 2**self.n):
            raise ConfigurationError("density matrix shape mismatch")

    def check(self, tol: float = 1e-10) -> None:
        if not np.allclose(self.entries, self.entries.conj().T, atol=tol):
            raise IntegrityError("density matrix is not Hermitian")
        if abs(np.trace(self.entries).real - 1.0) > tol:
            raise IntegrityError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(self.entries).min() < -tol:
            raise IntegrityError("density matrix has a negative eigenvalue")

    def purity(self) -> float:
        return float(np.trace(self.entries @ self.entries).real)

    def dump_csv(self) -> str:
        lines = ["row,col,real,imag"]
        for i, row in enumerate(self.entries):
            for j, v in enumerate(row):
                lines.append(f"{i},{j},{v.real:.12g},{v.imag:.12g}")
        return "\n".join(lines) + "\n"


def pure_density(state) -> DensityMatrix:
    v = state.amplitudes
    return DensityMatrix(state.n_qubits, np.outer(v, v.conj()))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    diff = a.entries - b.entries
    eig = np.linalg.eigvalsh(diff)
    return 0.5 * float(np.abs(eig).sum())


def lindblad_evolve(
    rho0: DensityMatrix, channels, t: float, dt: float = 0.005
) -> DensityMatrix:
    """RK4 integration of rho' = sum_k (L rho L† - {L†L, rho}/2), H = 0."""
    n = rho0.n
    if n > MAX_ORACLE_QUBITS:
        raise ConfigurationError(
            f"dense oracle capped at {MAX_ORACLE_QUBITS} qubits"
        )
    if dt > 0.01:
        raise ConfigurationError("step too coarse for the fixed-step oracle")
    qubits = tuple(range(n))
    mats = [op_matrix(ch.op, qubits) for ch in channels if ch.active]
    gram = sum((m.conj().T @ m for m in mats), np.zeros((2**n, 2**n), complex))

    def rhs(rho):
        out = -0.5 * (gram @ rho + rho @ gram)
        for m in mats:
            out += m @ rho @ m.conj().T
        return out

    rho = rho0.entries.copy()
    steps = max(1, math.ceil(t / dt))
    h = t / steps
    for _ in range(steps):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * h * k1)
        k3 = rhs(rho + 0.5 * h * k2)
        k4 = rhs(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    drift = abs(np.trace(rho).real - np.trace(rho0.entries).real)
    if drift > 1e-6:
        raise AccuracyError(f"trace drifted by {drift:.3g}; reduce dt")
    return DensityMatrix(n, rho)


def trajectory_average(
    script, n_traj: int, t: float, master_seed: int = 0
) -> DensityMatrix:
    """(1/M) sum over trajectories of |psi_i(t)><psi_i(t)|."""
    n = script.n_qubits
    if n > MAX_ORACLE_QUBITS:
        raise ConfigurationError(
            f"dense averaging capped at {MAX_ORACLE_QUBITS} qubits"
        )
    acc = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(n_traj):
        _, state = run(script, RngStream(master_seed, i), until=t)
        v = state.amplitudes
        acc += np.outer(v, v.conj())
    return DensityMatrix(n, acc / n_traj)


@dataclass(frozen=True)
class TimingResult:
    samples: int
    mean: float
    ci95: float
    analytic_mean: float

    def to_csv_row(self, n_edges: int) -> str:
        return (
            f"{n_edges},{self.samples},{self.mean:.12g},"
            f"{self.ci95:.12g},{self.analytic_mean:.12g}"
        )


def harmonic(n: int) -> float:
    if n < 50000:
        return float(sum(1.0 / k for k in range(1, n + 1)))
    # Euler-Maclaurin; exact enough far beyond float precision needs here
    return math.log(n) + 0.5772156649015329 + 1 / (2 * n) - 1 / (12 * n * n)


def coupon_time_stats(
    n_edges: int,
    edge_rate: float,
    n_samples: int,
    rng: np.random.Generator | RngStream,
    edge_rates=None,
) -> TimingResult:
    """Completion time of the last of N independent exponential clocks.

    Equal rates by default (classic coupon collector, mean H_N / rate); pass
    ``edge_rates`` to sample the degree-dependent splitting policy instead.
    The analytic mean always reports the equal-rate H_N / edge_rate reference.
    """
    if n_edges < 1:
        raise ConfigurationError("need at least one edge")
    if n_samples < 1:
        raise ConfigurationError("need at least one sample")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    rates = (
        np.full(n_edges, edge_rate)
        if edge_rates is None
        else np.asarray(edge_rates, dtype=float)
    )
    if rates.shape != (n_edges,) or (rates <= 0).any():
        raise ConfigurationError("edge_rates must be positive and match n_edges")
    waits = gen.exponential(1.0, size=(n_samples, n_edges)) / rates
    times = waits.max(axis=1)
    mean = float(times.mean())
    ci95 = 1.96 * float(times.std(ddof=1)) / math.sqrt(n_samples) if n_samples > 1 else 0.0
    return TimingResult(
        samples=n_samples,
        mean=mean,
        ci95=ci95,
        analytic_mean=harmonic(n_edges) / edge_rate,
    )


def graph_edge_rates(graph, gamma: float = 1.0) -> np.ndarray:
    """Per-edge click rates under the pairwise rate-splitting wiring."""
    deg = graph.degrees()
    rates = []
    for j, k in graph.edges:
        share = min(gamma / (2.0 * deg[j]), gamma / (2.0 * deg[k]))
        rates.append(2.0 * share)  # both ports of the pair count
    return np.asarray(rates)
