"""Undirected weighted simple graphs: regular-graph generation, text format, statistics."""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

Edge = tuple[int, int, float]


class GraphParseError(ValueError):
    """Base class for text-format parse failures. Carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MalformedHeaderError(GraphParseError):
    pass


class MalformedEdgeError(GraphParseError):
    pass


class VertexRangeError(GraphParseError):
    pass


class SelfLoopError(GraphParseError):
    pass


class DuplicateEdgeError(GraphParseError):
    pass


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with real edge weights.

    Edges are stored canonically: u < v per edge, list sorted lexicographically.
    Any edge order passed to the constructor is canonicalized. ``id`` is a label
    for bookkeeping and does not participate in equality.
    """

    n: int
    edges: tuple[Edge, ...]
    id: str = field(default="", compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"vertex count must be >= 1, got {self.n}")
        canon = []
        for u, v, w in self.edges:
            if u > v:
                u, v = v, u
            if u == v:
                raise ValueError(f"self-loop ({u},{v}) not allowed")
            if not (0 <= u < v < self.n):
                raise ValueError(f"edge ({u},{v}) out of range for n={self.n}")
            w = float(w)
            if not math.isfinite(w):
                raise ValueError(f"edge ({u},{v}) has non-finite weight {w}")
            canon.append((int(u), int(v), w))
        canon.sort(key=lambda e: (e[0], e[1]))
        for a, b in zip(canon, canon[1:]):
            if a[0] == b[0] and a[1] == b[1]:
                raise ValueError(f"duplicate edge ({a[0]},{a[1]})")
        object.__setattr__(self, "edges", tuple(canon))

    @property
    def m(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v, _ in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def relabeled(self, perm: list[int], new_id: str = "") -> "Graph":
        """Return the graph with vertex i renamed to perm[i]."""
        edges = [(perm[u], perm[v], w) for u, v, w in self.edges]
        return Graph(self.n, tuple((min(u, v), max(u, v), w) for u, v, w in edges), new_id)


def _pairing_round(n: int, d: int, rng: np.random.Generator) -> set[tuple[int, int]] | None:
    """One attempt of the configuration model with within-round repair.

    Pairs up degree stubs uniformly at random; stubs whose pairing would create
    a self-loop or multi-edge are thrown back and re-paired, as long as at least
    one admissible pair remains among them. Returns None on a dead end.
    """
    edges: set[tuple[int, int]] = set()
    stubs = list(range(n)) * d
    while stubs:
        leftover: dict[int, int] = defaultdict(int)
        arr = np.array(stubs, dtype=np.int64)
        rng.shuffle(arr)
        it = iter(arr.tolist())
        for s1, s2 in zip(it, it):
            if s1 > s2:
                s1, s2 = s2, s1
            if s1 != s2 and (s1, s2) not in edges:
                edges.add((s1, s2))
            else:
                leftover[s1] += 1
                leftover[s2] += 1
        if not leftover:
            return edges
        nodes = list(leftover)
        admissible = any(
            (min(a, b), max(a, b)) not in edges
            for i, a in enumerate(nodes)
            for b in nodes[i + 1 :]
            if a != b
        )
        if not admissible:
            return None
        stubs = [node for node, count in leftover.items() for _ in range(count)]
    return edges


def generate_regular_graph(n: int, d: int, seed: int, max_retries: int = 1000) -> Graph:
    """Sample a simple d-regular graph on n vertices via stub pairing.

    Deterministic for fixed (n, d, seed). Raises ValueError when no d-regular
    graph on n vertices exists, RuntimeError if sampling dead-ends max_retries
    times in a row (astronomically unlikely for feasible inputs).
    """
    if d < 0 or d >= n:
        raise ValueError(f"infeasible: degree {d} requires 0 <= d < n={n}")
    if (n * d) % 2 != 0:
        raise ValueError(f"infeasible: n*d = {n * d} is odd")
    gid = f"reg_n{n}_d{d}_s{seed}"
    if d == 0:
        return Graph(n, (), gid)
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        edges = _pairing_round(n, d, rng)
        if edges is not None:
            return Graph(n, tuple((u, v, 1.0) for u, v in sorted(edges)), gid)
    raise RuntimeError(f"regular graph generation failed after {max_retries} attempts (n={n}, d={d})")


def feasible_degrees(n: int) -> list[int]:
    """Degrees d with 1 <= d < n and n*d even."""
    return [d for d in range(1, n) if (n * d) % 2 == 0]


def derive_seed(master_seed: int, index: int) -> int:
    """Stable 64-bit child seed for item `index` of a run seeded by master_seed."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1, np.uint64)[0])


def generate_corpus(count: int, n_min: int, n_max: int, seed: int) -> list[Graph]:
    """Generate `count` regular graphs spread over all feasible (n, d) pairs.

    Pairs are enumerated in (n, d) order for n in [n_min, n_max]; each pair
    gets count // #pairs graphs and the first count % #pairs pairs get one
    extra. Per-graph seeds derive from (seed, graph index) so regeneration is
    order-independent and fully reproducible.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    if n_min < 2 or n_max < n_min:
        raise ValueError(f"need 2 <= n_min <= n_max, got [{n_min}, {n_max}]")
    pairs = [(n, d) for n in range(n_min, n_max + 1) for d in feasible_degrees(n)]
    if not pairs:
        raise ValueError(f"no feasible (n, d) pairs in [{n_min}, {n_max}]")
    base, extra = divmod(count, len(pairs))
    graphs: list[Graph] = []
    index = 0
    width = len(str(max(count - 1, 1)))
    for k, (n, d) in enumerate(pairs):
        quota = base + (1 if k < extra else 0)
        for _ in range(quota):
            g = generate_regular_graph(n, d, derive_seed(seed, index))
            graphs.append(Graph(g.n, g.edges, f"g{index:0{width}d}_n{n}_d{d}"))
            index += 1
    return graphs


def parse_graph_text(text: str) -> Graph:
    """Parse the two-section text format: header "n m", then m lines "u v w"."""
    lines = text.splitlines()
    if not lines:
        raise MalformedHeaderError(1, "empty input, expected header 'n m'")
    head = lines[0].split()
    if len(head) != 2:
        raise MalformedHeaderError(1, f"expected 'n m', got {lines[0]!r}")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise MalformedHeaderError(1, f"expected two integers, got {lines[0]!r}") from None
    if n < 1 or m < 0:
        raise MalformedHeaderError(1, f"invalid counts n={n}, m={m}")
    body = [(i, ln) for i, ln in enumerate(lines[1:], start=2) if ln.strip()]
    if len(body) != m:
        raise MalformedHeaderError(1, f"header promises {m} edges, file has {len(body)} edge lines")
    seen: set[tuple[int, int]] = set()
    edges: list[Edge] = []
    for lineno, ln in body:
        parts = ln.split()
        if len(parts) != 3:
            raise MalformedEdgeError(lineno, f"expected 'u v w', got {ln!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2])
        except ValueError:
            raise MalformedEdgeError(lineno, f"could not parse 'u v w' from {ln!r}") from None
        if not math.isfinite(w):
            raise MalformedEdgeError(lineno, f"non-finite weight {parts[2]}")
        if u == v:
            raise SelfLoopError(lineno, f"self-loop on vertex {u}")
        if u > v:
            u, v = v, u
        if not (0 <= u and v < n):
            raise VertexRangeError(lineno, f"edge ({u},{v}) out of range for n={n}")
        if (u, v) in seen:
            raise DuplicateEdgeError(lineno, f"duplicate edge ({u},{v})")
        seen.add((u, v))
        edges.append((u, v, w))
    return Graph(n, tuple(edges))


def serialize_graph(g: Graph) -> str:
    """Inverse of parse_graph_text; emits no trailing newline."""
    out = [f"{g.n} {g.m}"]
    for u, v, w in g.edges:
        out.append(f"{u} {v} {w!r}")
    return "\n".join(out)


def write_graph_file(g: Graph, path: str | Path) -> None:
    Path(path).write_text(serialize_graph(g) + "\n", encoding="ascii")


def read_graph_file(path: str | Path) -> Graph:
    """Parse a graph file; the file stem becomes the graph id."""
    p = Path(path)
    g = parse_graph_text(p.read_text(encoding="ascii"))
    return Graph(g.n, g.edges, p.stem)


def degree_histogram(graphs: list[Graph]) -> dict[int, int]:
    """Counts over all vertices of all graphs."""
    counter: Counter[int] = Counter()
    for g in graphs:
        counter.update(int(x) for x in g.degrees())
    return dict(sorted(counter.items()))


def size_histogram(graphs: list[Graph]) -> dict[int, int]:
    counter = Counter(g.n for g in graphs)
    return dict(sorted(counter.items()))
