"""Labeled dataset pipeline: build records, node features, pruning, persistence, splits."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graphs import Graph, derive_seed
from .maxcut import brute_force_maxcut
from .simulator import (
    QaoaParams,
    approximation_ratio,
    fold_params,
    optimize_params,
    random_init,
)

FEATURE_DIM = 15
SOURCES = ("optimized", "fixed_angle")
AR_SLACK = 1e-9


@dataclass(frozen=True)
class DatasetRecord:
    """One training unit: a graph, its label angles, and solution-quality metadata.

    best_cut_value and best_assignment describe the exhaustive-search optimum
    the approximation ratio is measured against, not the circuit's sampled cut.
    """

    graph: Graph
    p: int
    gamma: tuple[float, ...]
    beta: tuple[float, ...]
    ar: float
    best_cut_value: float
    best_assignment: tuple[int, ...]
    source: str = "optimized"

    def params(self) -> QaoaParams:
        return QaoaParams(self.gamma, self.beta)


def build_record(g: Graph, seed: int, budget: int, p: int = 1) -> DatasetRecord:
    """Optimize from a seeded random init and package the outcome.

    Stored angles are folded to the canonical representative of their
    symmetry class, so labels for similar graphs form one cluster; the stored
    ratio is recomputed at the folded angles (identical up to roundoff).
    """
    rng = np.random.default_rng(seed)
    params, _ = optimize_params(g, random_init(p, rng), budget)
    folded = fold_params(g, params)
    best = brute_force_maxcut(g)
    return DatasetRecord(
        graph=g,
        p=p,
        gamma=folded.gamma,
        beta=folded.beta,
        ar=approximation_ratio(g, folded),
        best_cut_value=best.value,
        best_assignment=best.assignment,
        source="optimized",
    )


def record_from_params(g: Graph, params: QaoaParams, source: str = "fixed_angle") -> DatasetRecord:
    """Record for externally supplied angles (no optimization run)."""
    if source not in SOURCES:
        raise ValueError(f"source must be one of {SOURCES}, got {source!r}")
    canonical = fold_params(g, params)
    best = brute_force_maxcut(g)
    return DatasetRecord(
        graph=g,
        p=params.p,
        gamma=canonical.gamma,
        beta=canonical.beta,
        ar=approximation_ratio(g, canonical),
        best_cut_value=best.value,
        best_assignment=best.assignment,
        source=source,
    )


def build_dataset(graphs: list[Graph], budget: int, p: int, seed: int) -> list[DatasetRecord]:
    """One record per graph; per-graph seeds derive from (seed, position)."""
    return [build_record(g, derive_seed(seed, i), budget, p) for i, g in enumerate(graphs)]


def node_features(g: Graph) -> np.ndarray:
    """One-hot degree per vertex, clamped to the last bucket: row v has 1 at min(deg(v), 14)."""
    feats = np.zeros((g.n, FEATURE_DIM))
    for v, d in enumerate(g.degrees()):
        feats[v, min(int(d), FEATURE_DIM - 1)] = 1.0
    return feats


def prune(records: list[DatasetRecord], threshold: float, selective_rate: float, seed: int) -> list[DatasetRecord]:
    """Keep every record at or above the ratio threshold plus a seeded sample below it.

    Exactly round(selective_rate * count_below) of the below-threshold records
    survive, drawn uniformly without replacement; survivor order matches the
    input order. Records are never modified.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    if not 0.0 <= selective_rate <= 1.0:
        raise ValueError(f"selective rate must be in [0, 1], got {selective_rate}")
    below = [i for i, r in enumerate(records) if r.ar < threshold]
    keep_count = round(selective_rate * len(below))
    rng = np.random.default_rng(seed)
    chosen = set(rng.choice(len(below), size=keep_count, replace=False).tolist()) if below else set()
    kept_below = {below[j] for j in chosen}
    return [r for i, r in enumerate(records) if r.ar >= threshold or i in kept_below]


def load_fixed_angle_table(path: str | Path) -> dict[tuple[int, int], QaoaParams]:
    """JSON map "degree,p" -> {"gamma": [...], "beta": [...]}."""
    try:
        raw = json.loads(Path(path).read_text(encoding="ascii"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"fixed-angle table is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ValueError("fixed-angle table must be a JSON object")
    table: dict[tuple[int, int], QaoaParams] = {}
    for key, entry in raw.items():
        parts = key.split(",")
        if len(parts) != 2:
            raise ValueError(f"fixed-angle key {key!r} must look like 'degree,p'")
        try:
            degree, p = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"fixed-angle key {key!r} must hold two integers") from None
        if not isinstance(entry, dict) or set(entry) != {"gamma", "beta"}:
            raise ValueError(f"fixed-angle entry for {key!r} must map gamma and beta lists")
        try:
            params = QaoaParams(tuple(entry["gamma"]), tuple(entry["beta"]))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"fixed-angle entry for {key!r} is malformed: {exc}") from None
        if params.p != p:
            raise ValueError(f"fixed-angle entry for {key!r} has {params.p} layers, key says {p}")
        table[(degree, p)] = params
    return table


def fixed_angle_lookup(table: dict[tuple[int, int], QaoaParams], degree: int, p: int) -> QaoaParams | None:
    return table.get((degree, p))


def record_to_json(r: DatasetRecord) -> dict:
    return {
        "id": r.graph.id,
        "n": r.graph.n,
        "edges": [[u, v, w] for u, v, w in r.graph.edges],
        "p": r.p,
        "gamma": list(r.gamma),
        "beta": list(r.beta),
        "ar": r.ar,
        "best_cut_value": r.best_cut_value,
        "best_assignment": "".join(str(b) for b in r.best_assignment),
        "source": r.source,
    }


def _record_from_json(obj: dict, lineno: int) -> DatasetRecord:
    def fail(msg: str):
        raise ValueError(f"line {lineno}: {msg}")

    required = ["id", "n", "edges", "p", "gamma", "beta", "ar", "best_cut_value", "best_assignment", "source"]
    missing = [k for k in required if k not in obj]
    if missing:
        fail(f"missing fields {missing}")
    try:
        graph = Graph(int(obj["n"]), tuple((int(u), int(v), float(w)) for u, v, w in obj["edges"]), str(obj["id"]))
    except (TypeError, ValueError) as exc:
        fail(f"bad graph: {exc}")
    p = obj["p"]
    gamma = obj["gamma"]
    beta = obj["beta"]
    if not isinstance(p, int) or p < 1 or len(gamma) != p or len(beta) != p:
        fail(f"angle vectors must each hold p={p!r} entries")
    ar = obj["ar"]
    if not isinstance(ar, (int, float)) or not (0.0 <= float(ar) <= 1.0 + AR_SLACK):
        fail(f"ar {ar!r} outside [0, 1]")
    source = obj["source"]
    if source not in SOURCES:
        fail(f"source {source!r} not one of {SOURCES}")
    best_value = obj["best_cut_value"]
    if not isinstance(best_value, (int, float)):
        fail(f"best_cut_value {best_value!r} must be a number")
    assignment_text = obj["best_assignment"]
    if (
        not isinstance(assignment_text, str)
        or len(assignment_text) != graph.n
        or any(c not in "01" for c in assignment_text)
    ):
        fail(f"best_assignment {assignment_text!r} must be a {graph.n}-character bitstring")
    got = QaoaParams(tuple(gamma), tuple(beta))
    if any(not -math.pi <= x < math.pi for x in got.gamma) or any(
        not -math.pi / 2 <= x < math.pi / 2 for x in got.beta
    ):
        fail("angles are not in canonical ranges")
    return DatasetRecord(
        graph=graph,
        p=p,
        gamma=got.gamma,
        beta=got.beta,
        ar=float(ar),
        best_cut_value=float(best_value),
        best_assignment=tuple(int(c) for c in assignment_text),
        source=source,
    )


def write_records(records: list[DatasetRecord], path: str | Path) -> None:
    """One JSON object per line, stable field order."""
    lines = [json.dumps(record_to_json(r)) for r in records]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="ascii")


def read_records(path: str | Path) -> list[DatasetRecord]:
    records = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: invalid JSON: {exc}") from None
            records.append(_record_from_json(obj, lineno))
    return records


def validate_ar(r: DatasetRecord, tolerance: float = 1e-6) -> bool:
    """Does the stored ratio match a fresh simulation of the stored angles?"""
    return abs(approximation_ratio(r.graph, r.params()) - r.ar) <= tolerance


def split(
    records: list[DatasetRecord],
    fractions: tuple[float, float, float],
    seed: int,
    test_count: int | None = 100,
) -> tuple[list[DatasetRecord], list[DatasetRecord], list[DatasetRecord]]:
    """Seeded shuffle, then contiguous train/val/test cut.

    test_count pins the test partition to an exact size (default 100); the
    remainder goes to train and val in proportion to their fractions. Pass
    test_count=None to size the test partition by its fraction instead.
    """
    f_train, f_val, f_test = fractions
    if min(fractions) < 0.0 or abs(f_train + f_val + f_test - 1.0) > 1e-9:
        raise ValueError(f"fractions must be nonnegative and sum to 1, got {fractions}")
    total = len(records)
    n_test = int(test_count) if test_count is not None else round(f_test * total)
    if n_test < 0 or n_test > total:
        raise ValueError(f"test count {n_test} out of range for {total} records")
    rng = np.random.default_rng(seed)
    order = rng.permutation(total)
    shuffled = [records[i] for i in order]
    remaining = total - n_test
    denom = f_train + f_val
    n_train = round(f_train / denom * remaining) if denom > 0.0 else 0
    train = shuffled[:n_train]
    val = shuffled[n_train:remaining]
    test = shuffled[remaining:]
    return train, val, test
