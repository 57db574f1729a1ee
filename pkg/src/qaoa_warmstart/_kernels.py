"""Statevector hot loops: phase layer, mixer layer, expectation.

Two interchangeable implementations live here. The numba-compiled one is the
default; setting QAOA_WARMSTART_NUMBA=0 (or running without numba installed)
selects the pure-numpy path. Both mutate the amplitude array in place and must
agree to float precision; benchmarks/bench_kernels.py times them against each
other and checks agreement.

Bit convention: qubit/vertex q holds bit n-1-q of the basis-state index, so
vertex 0 is the most significant bit.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on numba-free installs
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("QAOA_WARMSTART_NUMBA", "1") != "0"


def numpy_phase_inplace(amps: np.ndarray, costs: np.ndarray, gamma: float) -> None:
    amps *= np.exp(-1j * gamma * costs)


def numpy_mixer_inplace(amps: np.ndarray, n: int, beta: float) -> None:
    c = np.cos(beta)
    s = np.sin(beta)
    for q in range(n):
        # axis layout (2**q, 2, 2**(n-1-q)): middle axis is qubit q
        view = amps.reshape(1 << q, 2, -1)
        a0 = view[:, 0, :].copy()
        a1 = view[:, 1, :]
        view[:, 0, :] = c * a0 - 1j * s * a1
        view[:, 1, :] = c * a1 - 1j * s * a0


def numpy_expectation(amps: np.ndarray, costs: np.ndarray) -> float:
    return float(np.sum((amps.real ** 2 + amps.imag ** 2) * costs))


if HAVE_NUMBA:

    @njit(cache=True)
    def numba_phase_inplace(amps, costs, gamma):  # pragma: no cover - compiled
        for i in range(amps.shape[0]):
            c = costs[i] * gamma
            amps[i] = amps[i] * complex(np.cos(c), -np.sin(c))

    @njit(cache=True)
    def numba_mixer_inplace(amps, n, beta):  # pragma: no cover - compiled
        c = np.cos(beta)
        s = np.sin(beta)
        size = amps.shape[0]
        for q in range(n):
            stride = 1 << (n - 1 - q)
            step = stride << 1
            for base in range(0, size, step):
                for i in range(base, base + stride):
                    j = i + stride
                    a0 = amps[i]
                    a1 = amps[j]
                    amps[i] = c * a0 - 1j * s * a1
                    amps[j] = c * a1 - 1j * s * a0

    @njit(cache=True)
    def numba_expectation(amps, costs):  # pragma: no cover - compiled
        acc = 0.0
        for i in range(amps.shape[0]):
            a = amps[i]
            acc += (a.real * a.real + a.imag * a.imag) * costs[i]
        return acc

else:  # pragma: no cover
    numba_phase_inplace = None
    numba_mixer_inplace = None
    numba_expectation = None


if USE_NUMBA:
    phase_inplace = numba_phase_inplace
    mixer_inplace = numba_mixer_inplace
    expectation_value = numba_expectation
else:
    phase_inplace = numpy_phase_inplace
    mixer_inplace = numpy_mixer_inplace
    expectation_value = numpy_expectation


def backend() -> str:
    """Name of the active implementation, 'numba' or 'numpy'."""
    return "numba" if USE_NUMBA else "numpy"
