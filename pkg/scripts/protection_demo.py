#!/usr/bin/env python3
"""Monitoring protects the state: conditional no-click evolution is the identity.

Under a balanced sx/sy flip configuration the decay operator is proportional
to the identity, so between clicks the conditional state does not move at all
— while the unconditional (unobserved) density matrix scrambles to the
maximally mixed state.  This prints both side by side.
"""

import argparse

import numpy as np

from jumpforge.channels import flip_channel, total_decay
from jumpforge.qstate import StateVector, fidelity, normalize
from jumpforge.trajectory import no_jump_evolve
from jumpforge.verify import lindblad_evolve, pure_density


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gamma", type=float, default=1.0)
    args = ap.parse_args()

    g = args.gamma
    chans = (
        flip_channel(0, g / 2, "X", "x"),
        flip_channel(0, g / 2, "Y", "y"),
    )
    report = total_decay(chans)
    print(f"decay classification: {report.classification} (rate {report.uniform_rate})")

    rng = np.random.default_rng(1)
    state = normalize(StateVector(1, rng.normal(size=2) + 1j * rng.normal(size=2)))
    rho0 = pure_density(state)

    print(f"\n{'t':>6} {'no-click fidelity':>18} {'unobserved purity':>18}")
    for t in (0.0, 0.5, 1.0, 2.0, 3.0, 5.0):
        conditional = normalize(no_jump_evolve(state, report, t))
        rho = lindblad_evolve(rho0, chans, t) if t > 0 else rho0
        print(f"{t:>6.1f} {fidelity(state, conditional):>18.12f} {rho.purity():>18.6f}")


if __name__ == "__main__":
    main()
