"""Linkable synthetic dataset pairs without pooling the private inputs.

Each provider computes locality-sensitive signatures of its own tuples
(sorted, truncated n-gram sets of the concatenated cell texts).  Exchanging
only those signatures, the providers estimate how many tuples are left-only,
right-only and linked; coordinated id columns then make two independently
generated synthetic tables join with exactly the linked cardinality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .describer import DatasetDescription
from .generator import GenerationRequest, generate
from .ingest import Column, Table
from .rng import STREAM_LINKER, derive_seed, substream

DEFAULT_NGRAM = 3
DEFAULT_MAX_GRAMS = 20
DEFAULT_SEPARATOR = "|"
DEFAULT_MATCH_THRESHOLD = 0.5


@dataclass(frozen=True)
class Signature:
    """Sorted, de-duplicated n-grams of one tuple, truncated to the first k."""

    grams: tuple[str, ...]

    def jaccard(self, other: "Signature") -> float:
        a, b = set(self.grams), set(other.grams)
        if not a and not b:
            return 1.0
        return len(a & b) / len(a | b)


@dataclass(frozen=True)
class JoinEstimate:
    left_only: int
    right_only: int
    linked: int

    def __post_init__(self) -> None:
        if min(self.left_only, self.right_only, self.linked) < 0:
            raise ValueError("join estimate counts must be non-negative")

    def to_json(self) -> dict:
        return {"left_only": self.left_only, "right_only": self.right_only, "linked": self.linked}

    @staticmethod
    def from_json(doc: dict) -> "JoinEstimate":
        return JoinEstimate(int(doc["left_only"]), int(doc["right_only"]), int(doc["linked"]))


def lsh_signature(
    row: Sequence[str | None],
    n: int = DEFAULT_NGRAM,
    k: int = DEFAULT_MAX_GRAMS,
    *,
    separator: str = DEFAULT_SEPARATOR,
) -> Signature:
    """Signature of one tuple: join cells, slide an n-char window, sort,
    de-duplicate, keep the first k grams.

    Missing cells contribute empty text; a concatenation shorter than ``n``
    yields itself as the single gram.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    if not row:
        raise ValueError("cannot sign an empty row")
    text = separator.join("" if c is None else c for c in row)
    if len(text) <= n:
        grams = {text}
    else:
        grams = {text[i : i + n] for i in range(len(text) - n + 1)}
    return Signature(tuple(sorted(grams))[:k])


def signatures_for_table(
    table: Table, n: int = DEFAULT_NGRAM, k: int = DEFAULT_MAX_GRAMS
) -> list[Signature]:
    return [lsh_signature(row, n, k) for row in table.rows()]


def estimate_join(
    sigs_left: Sequence[Signature],
    sigs_right: Sequence[Signature],
    match_threshold: float = DEFAULT_MATCH_THRESHOLD,
) -> JoinEstimate:
    """Estimate left-only / right-only / linked counts by greedy matching.

    A pair matches when the Jaccard overlap of the two truncated gram sets
    reaches the threshold; candidate pairs are taken in descending
    similarity and each tuple links at most once.
    """
    if not 0.0 < match_threshold <= 1.0:
        raise ValueError("match threshold must be in (0, 1]")

    # Inverted index over grams keeps the candidate set near-linear.
    by_gram: dict[str, list[int]] = {}
    for j, sig in enumerate(sigs_right):
        for gram in sig.grams:
            by_gram.setdefault(gram, []).append(j)

    scored: list[tuple[float, int, int]] = []
    for i, sig in enumerate(sigs_left):
        seen: set[int] = set()
        for gram in sig.grams:
            seen.update(by_gram.get(gram, ()))
        for j in seen:
            sim = sig.jaccard(sigs_right[j])
            if sim >= match_threshold:
                scored.append((sim, i, j))

    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    used_left: set[int] = set()
    used_right: set[int] = set()
    linked = 0
    for _, i, j in scored:
        if i in used_left or j in used_right:
            continue
        used_left.add(i)
        used_right.add(j)
        linked += 1
    return JoinEstimate(
        left_only=len(sigs_left) - linked,
        right_only=len(sigs_right) - linked,
        linked=linked,
    )


# --------------------------------------------------------------------------
# Signature exchange format: one JSON array of grams per line.
# --------------------------------------------------------------------------


def write_signatures(sigs: Iterable[Signature], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sig in sigs:
            fh.write(json.dumps(list(sig.grams)) + "\n")


def read_signatures(path: str | Path) -> list[Signature]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(Signature(tuple(json.loads(line))))
    return out


# --------------------------------------------------------------------------
# Coordinated generation
# --------------------------------------------------------------------------


def _permutation(seed: int, stream: int, size: int) -> np.ndarray:
    g = substream(seed, STREAM_LINKER, stream)
    return np.argsort(g.random(size), kind="stable")


def _id_column(name: str, shared: int, solo: int, prefix: str, seed: int, stream: int) -> Column:
    ids = [f"s{i:08d}" for i in range(shared)] + [f"{prefix}{i:08d}" for i in range(solo)]
    order = _permutation(seed, stream, len(ids))
    cells: list[str | None] = [ids[i] for i in order]
    return Column(name=name, cells=cells, categorical=False, distinct_count=len(ids))


def generate_linked(
    desc_left: DatasetDescription,
    desc_right: DatasetDescription,
    estimate: JoinEstimate,
    seed: int,
    *,
    id_column: str = "link_id",
) -> tuple[Table, Table]:
    """Generate two synthetic tables whose id join has exactly ``linked`` pairs.

    Attribute values are sampled independently per side; only the appended
    id column is coordinated (linked rows share ids, the rest are disjoint).
    """
    left_rows = estimate.left_only + estimate.linked
    right_rows = estimate.right_only + estimate.linked
    if left_rows < 1 or right_rows < 1:
        raise ValueError("each side needs at least one row to generate")
    for desc in (desc_left, desc_right):
        if id_column in desc.attribute_names:
            raise ValueError(f"id column {id_column!r} collides with an attribute")

    left = generate(GenerationRequest(desc_left, size=left_rows, seed=derive_seed(seed, STREAM_LINKER, 0)))
    right = generate(GenerationRequest(desc_right, size=right_rows, seed=derive_seed(seed, STREAM_LINKER, 1)))
    left.columns.append(_id_column(id_column, estimate.linked, estimate.left_only, "l", seed, 2))
    right.columns.append(_id_column(id_column, estimate.linked, estimate.right_only, "r", seed, 3))
    return left, right
