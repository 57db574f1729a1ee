"""Reference implementations the fast code is tested against.

Everything here is deliberately naive: full 2^n x 2^n matrices, explicit loops,
and grid scans. Kept free of any import from the package's simulator so the two
code paths cannot share a bug.
"""
from __future__ import annotations

import numpy as np


def bits_of(z: int, n: int) -> list[int]:
    """Vertex i reads bit n-1-i, so vertex 0 is the most significant bit."""
    return [(z >> (n - 1 - i)) & 1 for i in range(n)]


def ref_cut_value(edges, bits) -> float:
    return sum(w for u, v, w in edges if bits[u] != bits[v])


def ref_cost_vector(n: int, edges) -> np.ndarray:
    return np.array([ref_cut_value(edges, bits_of(z, n)) for z in range(1 << n)])


def dense_qaoa_state(n: int, edges, gammas, betas) -> np.ndarray:
    """Materialize the full phase and mixer unitaries and multiply them out."""
    dim = 1 << n
    costs = ref_cost_vector(n, edges)
    state = np.full(dim, dim ** -0.5, dtype=np.complex128)
    for gamma, beta in zip(gammas, betas):
        state = np.diag(np.exp(-1j * gamma * costs)) @ state
        rot = np.array(
            [[np.cos(beta), -1j * np.sin(beta)], [-1j * np.sin(beta), np.cos(beta)]]
        )
        mixer = np.array([[1.0]])
        for _ in range(n):
            mixer = np.kron(mixer, rot)
        state = mixer @ state
    return state


def dense_expectation(n: int, edges, gammas, betas) -> float:
    state = dense_qaoa_state(n, edges, gammas, betas)
    return float(np.sum(np.abs(state) ** 2 * ref_cost_vector(n, edges)))


def grid_max_expectation(n: int, edges, gamma_steps=181, beta_steps=91) -> tuple[float, float, float]:
    """Coarse p=1 scan; returns (best value, gamma, beta)."""
    best = (-np.inf, 0.0, 0.0)
    for gamma in np.linspace(-np.pi, np.pi, gamma_steps):
        for beta in np.linspace(-np.pi / 2, np.pi / 2, beta_steps):
            val = dense_expectation(n, edges, [gamma], [beta])
            if val > best[0]:
                best = (val, float(gamma), float(beta))
    return best


def fd_gradient(f, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function, one coordinate at a time."""
    grad = np.zeros_like(x, dtype=np.float64)
    flat = x.ravel()
    out = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        up = f()
        flat[i] = orig - step
        down = f()
        flat[i] = orig
        out[i] = (up - down) / (2.0 * step)
    return grad


def rel_err(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-6)
    return float(np.max(np.abs(a - b) / denom))


PETERSEN_EDGES = tuple(
    (u, v, 1.0)
    for u, v in [
        (0, 1), (1, 2), (2, 3), (3, 4), (0, 4),
        (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
        (5, 7), (7, 9), (6, 9), (6, 8), (5, 8),
    ]
)
