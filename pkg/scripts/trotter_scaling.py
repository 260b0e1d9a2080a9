#!/usr/bin/env python
"""Product-formula error against step size for an open Ising chain.

Prints single-step error / delta^2 (which should level off at the norm of
the leading commutator term) and the full-evolution error at fixed time.
"""
from __future__ import annotations

import argparse

from qdesk.hamsim import (
    TrotterPlan,
    commutator_bound,
    ising_chain,
    leading_error_norm,
    operator_error,
    single_step_error,
)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--coupling", type=float, default=1.0)
    p.add_argument("--field", type=float, default=1.0)
    p.add_argument("--time", type=float, default=1.0)
    p.add_argument("--halvings", type=int, default=5)
    args = p.parse_args()

    ham = ising_chain(args.n, args.coupling, args.field)
    print(f"leading term norm {leading_error_norm(ham):.4f}, pairwise bound {commutator_bound(ham):.4f}")
    print("delta,steps,single_step_over_delta2,full_error,full_error_over_delta")
    steps = 5
    for _ in range(args.halvings):
        plan = TrotterPlan.for_time(args.time, steps)
        one = single_step_error(ham, plan.delta) / plan.delta**2
        full = operator_error(ham, plan)
        print(f"{plan.delta:.6g},{steps},{one:.6f},{full:.6e},{full / plan.delta:.6f}")
        steps *= 2


if __name__ == "__main__":
    main()
