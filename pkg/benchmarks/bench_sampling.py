"""Benchmark the session-sampling kernel: numba JIT vs pure-Python fallback.

The backend is chosen at import time, so each backend runs in its own
subprocess. Usage:

    python benchmarks/bench_sampling.py [n_samples]
"""
import json
import os
import subprocess
import sys
import time

WORKER = """
import json, sys, time
import numpy as np
from exnet import star_instance, backbone_graph, ExchangeGraph, sample_sessions
from exnet._kernels import KERNEL_BACKEND

n = int(sys.argv[1])
base = backbone_graph("default")
full = ExchangeGraph(
    buyers=base.buyers,
    sellers=base.sellers,
    links=frozenset((b, s) for b in range(4) for s in range(3)),
)
cases = {
    "hub_8_buyers": star_instance(8, 1, 1),
    "complete_4x3": full,
}
results = {"backend": KERNEL_BACKEND, "n": n, "cases": {}}
for name, g in cases.items():
    sample_sessions(g, 10, seed=1)  # warm-up (includes JIT compile)
    t0 = time.perf_counter()
    summary = sample_sessions(g, n, seed=1)
    dt = time.perf_counter() - t0
    results["cases"][name] = {
        "seconds": dt,
        "sessions_per_sec": n / dt,
        "infeasible_fraction": str(summary.infeasible_fraction),
    }
print(json.dumps(results))
"""


def run(no_numba: bool, n: int) -> dict:
    env = dict(os.environ)
    if no_numba:
        env["EXNET_NO_NUMBA"] = "1"
    else:
        env.pop("EXNET_NO_NUMBA", None)
    proc = subprocess.run(
        [sys.executable, "-c", WORKER, str(n)],
        capture_output=True, text=True, env=env, check=True,
    )
    return json.loads(proc.stdout)


def main() -> None:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
    jit = run(no_numba=False, n=n)
    plain = run(no_numba=True, n=n)
    print(f"{n} sampled sessions per case")
    print(f"{'case':<16} {'numba s':>10} {'python s':>10} {'speedup':>8}")
    for name in jit["cases"]:
        a = jit["cases"][name]["seconds"]
        b = plain["cases"][name]["seconds"]
        frac_a = jit["cases"][name]["infeasible_fraction"]
        frac_b = plain["cases"][name]["infeasible_fraction"]
        assert frac_a == frac_b, "backends disagree"
        print(f"{name:<16} {a:>10.3f} {b:>10.3f} {b / a:>7.1f}x")
    if jit["backend"] != "numba":
        print("warning: numba unavailable, both runs used the python backend")


if __name__ == "__main__":
    main()
