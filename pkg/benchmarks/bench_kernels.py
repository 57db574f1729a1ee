"""Times the compiled state-vector kernels against the pure-numpy fallbacks.

Run:  python3 benchmarks/bench_kernels.py [--qubits 8 12 16] [--repeats 200]

Both backends must agree to 1e-12 on every kernel before timings are reported.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from qaoa_warmstart import _kernels as k


def _random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return amps / np.linalg.norm(amps)


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_qubits(n: int, repeats: int) -> list[tuple[str, float, float]]:
    rng = np.random.default_rng(n)
    costs = rng.uniform(0.0, n, size=1 << n)
    gamma, beta = 0.7, 0.3
    base = _random_state(n, rng)

    a = base.copy()
    b = base.copy()
    k.numpy_phase_inplace(a, costs, gamma)
    k.numba_phase_inplace(b, costs, gamma)
    assert np.allclose(a, b, atol=1e-12)
    k.numpy_mixer_inplace(a, n, beta)
    k.numba_mixer_inplace(b, n, beta)
    assert np.allclose(a, b, atol=1e-12)
    ea = k.numpy_expectation(a, costs)
    eb = k.numba_expectation(b, costs)
    assert abs(ea - eb) < 1e-12

    rows = []
    work = base.copy()
    rows.append((
        "phase",
        _time(lambda: k.numpy_phase_inplace(work, costs, gamma), repeats),
        _time(lambda: k.numba_phase_inplace(work, costs, gamma), repeats),
    ))
    rows.append((
        "mixer",
        _time(lambda: k.numpy_mixer_inplace(work, n, beta), repeats),
        _time(lambda: k.numba_mixer_inplace(work, n, beta), repeats),
    ))
    rows.append((
        "expectation",
        _time(lambda: k.numpy_expectation(work, costs), repeats),
        _time(lambda: k.numba_expectation(work, costs), repeats),
    ))
    return rows


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", type=int, nargs="+", default=[8, 12, 16])
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    if not k.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1

    print(f"active backend: {k.backend()}")
    print(f"{'qubits':>6} {'kernel':<12} {'numpy':>12} {'numba':>12} {'speedup':>8}")
    for n in args.qubits:
        for name, t_np, t_nb in bench_qubits(n, args.repeats):
            print(f"{n:>6} {name:<12} {t_np * 1e6:>10.1f}us {t_nb * 1e6:>10.1f}us {t_np / t_nb:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
