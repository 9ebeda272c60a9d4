"""Compare the compiled simulation core against the pure-Python fallback.

Runs the same chain workload on both backends inside one process (the pure
implementation is loaded from source regardless of which backend the
package selected) and checks that the results agree exactly.

Usage: python benchmarks/bench_backends.py [--routers N] [--attempts K]
"""

import argparse
import time

from repeaterlab import engine
from repeaterlab.experiments import PROFILES
from repeaterlab.kernel import seconds_to_ps
from repeaterlab.network import build_chain, plan_swap_order, TopologySpec


def run_workload(impl, *, routers: int, total_km: float, attempts: int, seed: int):
    topo = TopologySpec.homogeneous(routers, profile=PROFILES["swap-limited"],
                                    total_km=total_km)
    params = build_chain(topo)
    timeline = impl.Timeline(seconds_to_ps(float(attempts)))

    def plan_fn(index):
        return plan_swap_order(routers, index)

    rt = impl.ChainRuntime(params, plan_fn, timeline, seed, retry_budget=20,
                           f_threshold=0.5, attempt_deadline=seconds_to_ps(1.0))
    t0 = time.perf_counter()
    records = rt.run_attempts(attempts)
    elapsed = time.perf_counter() - t0
    successes = sum(1 for r in records if r[0] == "success")
    return elapsed, successes, timeline.dispatched, rt.counters()


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--routers", type=int, default=14)
    parser.add_argument("--total-km", type=float, default=1000.0)
    parser.add_argument("--attempts", type=int, default=200)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    compiled = engine._impl
    pure = engine.load_pure_impl()
    if compiled.__file__ == pure.__file__:
        print("note: no compiled extension found; comparing pure against itself")

    rows = []
    for name, impl in (("compiled" if engine.BACKEND == "compiled" else "pure(default)",
                        compiled), ("pure", pure)):
        elapsed, successes, events, counters = run_workload(
            impl, routers=args.routers, total_km=args.total_km,
            attempts=args.attempts, seed=args.seed)
        rows.append((name, elapsed, successes, events, counters))
        print(f"{name:>15}: {elapsed:8.3f} s  {events:>9} events  "
              f"{successes} successes  ({events / elapsed:,.0f} events/s)")

    (_, t_a, s_a, e_a, c_a), (_, t_b, s_b, e_b, c_b) = rows
    assert (s_a, e_a, c_a) == (s_b, e_b, c_b), "backends disagree!"
    print(f"results identical across backends; speedup {t_b / t_a:.2f}x")


if __name__ == "__main__":
    main()
