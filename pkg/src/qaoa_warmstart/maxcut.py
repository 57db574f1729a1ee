"""Exact Max-Cut by exhaustive search; ground truth for approximation ratios."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph

DEFAULT_CAP = 20


@dataclass(frozen=True)
class CutSolution:
    value: float
    assignment: tuple[int, ...]


def cut_value(g: Graph, assignment) -> float:
    """Total weight of edges whose endpoints land on different sides."""
    if len(assignment) != g.n:
        raise ValueError(f"assignment length {len(assignment)} != n {g.n}")
    total = 0.0
    for u, v, w in g.edges:
        if assignment[u] != assignment[v]:
            total += w
    return total


def _all_cut_values(g: Graph, num_assignments: int) -> np.ndarray:
    """Cut value for assignments z in [0, num_assignments).

    Vertex i occupies bit n-1-i of z, so vertex 0 is the most significant bit
    and z < 2**(n-1) pins vertex 0 to side 0.
    """
    zs = np.arange(num_assignments, dtype=np.int64)
    vals = np.zeros(num_assignments, dtype=np.float64)
    for u, v, w in g.edges:
        bu = (zs >> (g.n - 1 - u)) & 1
        bv = (zs >> (g.n - 1 - v)) & 1
        vals += w * (bu != bv)
    return vals


def assignment_bits(z: int, n: int) -> tuple[int, ...]:
    return tuple((z >> (n - 1 - i)) & 1 for i in range(n))


def brute_force_maxcut(g: Graph, cap: int = DEFAULT_CAP) -> CutSolution:
    """Enumerate the 2^(n-1) bipartitions with vertex 0 on side 0.

    Ties break toward the assignment with the smallest value as a binary
    integer, which np.argmax's first-occurrence rule delivers directly.
    """
    if g.n > cap:
        raise ValueError(f"instance too large: n={g.n} exceeds cap {cap}")
    vals = _all_cut_values(g, 1 << (g.n - 1)) if g.n > 1 else np.zeros(1)
    best = int(np.argmax(vals))
    return CutSolution(value=float(vals[best]), assignment=assignment_bits(best, g.n))
