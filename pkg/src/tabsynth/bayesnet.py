"""Differentially private Bayesian network over table attributes.

Structure is learned greedily: starting from a randomly chosen root, each
step adds the unvisited attribute (with a parent set drawn from the visited
ones, at most ``k`` parents) whose mutual information with its parents is
maximal.  Under a positive privacy budget the per-candidate scores are
Laplace-perturbed; conditional probability tables then receive Laplace noise
at scale 4(d-k)/(n*eps).

Budget split: half of epsilon protects structure scores, half the
conditional tables.  This is an explicit, documented approximation; the
split and both noise scales are recorded in the emitted description so the
end-to-end claim stays auditable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .distributions import Distribution, build_frequency, build_histogram, noisy_probabilities
from .ingest import Column, DataType, Table
from .rng import STREAM_CPT, STREAM_STRUCTURE, laplace, substream, uniform_int

DEFAULT_MAX_PARENTS = 4

#: Hard cap on the parent-bin cross product of a single conditional table.
MAX_CONDITION_CELLS = 10**6


class NetworkSizeError(ValueError):
    """A conditional table's parent-bin cross product exceeds the cap."""


# --------------------------------------------------------------------------
# Discretization (shared with the inspector)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscretizedColumn:
    """Integer bin codes for one attribute; -1 marks missing cells."""

    name: str
    codes: np.ndarray
    size: int
    bin_descriptors: tuple[str, ...]
    distribution_template: Distribution | None = None


def discretize_column(
    column: Column, histogram_size: int, *, strings_as_labels: bool = False
) -> DiscretizedColumn | None:
    """Map a column onto integer bins.

    Categorical columns use their lexicographically sorted labels; numeric
    and datetime columns their unconditioned equi-width histogram bins.
    Non-categorical strings have no bin structure and return None unless
    ``strings_as_labels`` asks for distinct-value codes (used for pairwise
    dependence scans, not for networks).
    """
    observed = column.non_missing()
    if not observed:
        return None
    if column.categorical:
        labels = sorted(set(observed))
        index = {v: i for i, v in enumerate(labels)}
        codes = np.array([-1 if c is None else index[c] for c in column.cells], dtype=np.int64)
        template = build_frequency(column)
        return DiscretizedColumn(column.name, codes, len(labels), tuple(labels), template)
    if column.inferred_type is DataType.STRING:
        if not strings_as_labels:
            return None
        labels = sorted(set(observed))
        index = {v: i for i, v in enumerate(labels)}
        codes = np.array([-1 if c is None else index[c] for c in column.cells], dtype=np.int64)
        return DiscretizedColumn(column.name, codes, len(labels), tuple(labels), None)
    template = build_histogram(column, histogram_size)
    edges = np.asarray(template.edges, dtype=float)
    codes = np.full(len(column.cells), -1, dtype=np.int64)
    present = ~column.missing_mask()
    values = column.numeric_values()
    idx = np.searchsorted(edges, values, side="right") - 1
    codes[present] = np.clip(idx, 0, len(edges) - 2)
    descriptors = tuple(
        f"[{edges[i]:g}, {edges[i + 1]:g})" for i in range(len(edges) - 1)
    )
    return DiscretizedColumn(column.name, codes, len(edges) - 1, descriptors, template)


def discretize_table(
    table: Table, histogram_size: int, *, strings_as_labels: bool = False
) -> dict[str, DiscretizedColumn]:
    out: dict[str, DiscretizedColumn] = {}
    for col in table.columns:
        disc = discretize_column(col, histogram_size, strings_as_labels=strings_as_labels)
        if disc is not None:
            out[col.name] = disc
    return out


# --------------------------------------------------------------------------
# Mutual information
# --------------------------------------------------------------------------


def _combine_codes(columns: Sequence[np.ndarray]) -> np.ndarray:
    """Collapse several code vectors into one joint code, compacting as it
    goes so values never overflow."""
    joint = columns[0].copy()
    for col in columns[1:]:
        _, joint = np.unique(joint, return_inverse=True)
        joint = joint * (col.max() + 1) + col
    _, joint = np.unique(joint, return_inverse=True)
    return joint


def mutual_information(x: np.ndarray, parents: Sequence[np.ndarray]) -> float:
    """I(X; parents) in bits from the empirical joint distribution.

    The parent columns are treated as a single joint variable.  Rows with a
    missing code (-1) in any involved column are dropped.
    """
    if not len(parents):
        return 0.0
    arrays = [np.asarray(x, dtype=np.int64)] + [np.asarray(p, dtype=np.int64) for p in parents]
    length = arrays[0].shape[0]
    for a in arrays[1:]:
        if a.shape[0] != length:
            raise ValueError("column length mismatch")
    keep = np.ones(length, dtype=bool)
    for a in arrays:
        keep &= a >= 0
    if not keep.any():
        return 0.0
    xs = arrays[0][keep]
    ps = _combine_codes([a[keep] for a in arrays[1:]])
    _, xs = np.unique(xs, return_inverse=True)
    nx = int(xs.max()) + 1
    npi = int(ps.max()) + 1
    joint = np.bincount(xs * npi + ps, minlength=nx * npi).reshape(nx, npi).astype(float)
    total = joint.sum()
    pxy = joint / total
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    mask = pxy > 0
    ratio = pxy[mask] / (px @ py)[mask]
    return float(np.sum(pxy[mask] * np.log2(ratio)))


def entropy_bits(codes: np.ndarray) -> float:
    """Shannon entropy of the non-missing empirical distribution, in bits."""
    vals = codes[codes >= 0]
    if vals.size == 0:
        return 0.0
    counts = np.bincount(vals)
    p = counts[counts > 0] / vals.size
    return float(-np.sum(p * np.log2(p)))


def mi_sensitivity(n: int) -> float:
    """Bound on how much one changed row can move an empirical MI score."""
    if n < 2:
        return 1.0
    return 2.0 * math.log2(n) / n + (n - 1) / n * math.log2(n / (n - 1))


def split_epsilon(epsilon: float) -> tuple[float, float]:
    """(structure, conditional-table) budget halves."""
    return epsilon / 2.0, epsilon / 2.0


def structure_noise_scale(d: int, n: int, epsilon_structure: float) -> float:
    """Laplace scale applied to each candidate MI score during greedy search."""
    if epsilon_structure <= 0:
        return 0.0
    return (d - 1) * mi_sensitivity(n) / epsilon_structure


def cpt_noise_scale(d: int, k: int, n: int, epsilon_cpt: float) -> float:
    """Laplace scale 4(d-k)/(n*eps) applied per conditional probability."""
    if epsilon_cpt <= 0:
        return 0.0
    return 4.0 * (d - k) / (n * epsilon_cpt)


# --------------------------------------------------------------------------
# Network structure
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NetworkNode:
    child: str
    parents: tuple[str, ...]


@dataclass(frozen=True)
class BayesianNetwork:
    nodes: tuple[NetworkNode, ...]
    k: int
    d: int

    def __post_init__(self) -> None:
        if not self.nodes:
            raise ValueError("network has no nodes")
        if self.nodes[0].parents:
            raise ValueError("root node must have an empty parent set")
        seen: set[str] = set()
        for i, node in enumerate(self.nodes):
            if len(node.parents) > min(self.k, i):
                raise ValueError(f"node {node.child!r} exceeds the parent bound")
            for parent in node.parents:
                if parent not in seen:
                    raise ValueError(f"parent {parent!r} of {node.child!r} breaks topological order")
            seen.add(node.child)

    def edges(self) -> list[tuple[str, str]]:
        return [(p, node.child) for node in self.nodes for p in node.parents]

    def sampling_order(self) -> list[str]:
        return [node.child for node in self.nodes]

    def parent_map(self) -> dict[str, tuple[str, ...]]:
        return {node.child: node.parents for node in self.nodes}


def greedy_bayes(
    table: Table,
    k: int,
    epsilon: float,
    seed: int,
    *,
    histogram_size: int = 20,
) -> BayesianNetwork:
    """Learn the network structure greedily by (noisy) mutual information.

    Only discretizable attributes participate: categorical attributes and
    non-categorical numeric/datetime attributes.  ``epsilon`` here is the
    structure share of the budget (see :func:`split_epsilon`).
    """
    disc = discretize_table(table, histogram_size)
    names = sorted(disc.keys())
    d = len(names)
    if d < 2:
        raise ValueError("a network needs at least two discretizable attributes")
    if k < 1:
        raise ValueError("k must be >= 1")

    scale = structure_noise_scale(d, table.row_count, epsilon) if epsilon > 0 else 0.0

    root_rng = substream(seed, STREAM_STRUCTURE, 0)
    root = names[int(uniform_int(root_rng, 0, d - 1, 1)[0])]

    visited = [root]
    nodes = [NetworkNode(root, ())]
    unvisited = [n for n in names if n != root]

    for step in range(1, d):
        p = min(k, len(visited))
        candidates = [
            (child, parents)
            for child in sorted(unvisited)
            for parents in combinations(sorted(visited), p)
        ]
        step_rng = substream(seed, STREAM_STRUCTURE, step)
        best: tuple[str, tuple[str, ...]] | None = None
        best_score = -math.inf
        for child, parents in candidates:
            score = mutual_information(disc[child].codes, [disc[q].codes for q in parents])
            if scale > 0:
                score += float(laplace(step_rng, scale, 1)[0])
            if score > best_score:
                best_score = score
                best = (child, parents)
        assert best is not None
        nodes.append(NetworkNode(best[0], best[1]))
        visited.append(best[0])
        unvisited.remove(best[0])

    return BayesianNetwork(tuple(nodes), k=k, d=d)


# --------------------------------------------------------------------------
# Conditional probability tables
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionalTable:
    """Per-parent-condition distributions of a child's bins.

    Rows are stored row-major over the mixed-radix condition index: the
    first parent varies slowest.  ``parent_bins`` holds one descriptor list
    per parent (category labels or interval strings) so every condition
    tuple of the cross product can be reconstructed.
    """

    child: str
    parents: tuple[str, ...]
    parent_dims: tuple[int, ...]
    parent_bins: tuple[tuple[str, ...], ...]
    rows: tuple[tuple[float, ...], ...]
    noise_scale: float

    @property
    def condition_count(self) -> int:
        return len(self.rows)

    def condition_tuple(self, index: int) -> tuple[str, ...]:
        out = []
        for dim, bins in zip(reversed(self.parent_dims), reversed(self.parent_bins)):
            out.append(bins[index % dim])
            index //= dim
        return tuple(reversed(out))

    def table_array(self) -> np.ndarray:
        return np.asarray(self.rows, dtype=float)


def condition_index(parent_codes: Sequence[np.ndarray], dims: Sequence[int]) -> np.ndarray:
    """Mixed-radix condition index; first parent most significant."""
    idx = np.zeros_like(parent_codes[0])
    for codes, dim in zip(parent_codes, dims):
        idx = idx * dim + codes
    return idx


def conditional_distributions(
    table: Table,
    network: BayesianNetwork,
    epsilon: float,
    seed: int,
    *,
    histogram_size: int = 20,
    fallbacks: Mapping[str, Distribution] | None = None,
) -> list[ConditionalTable]:
    """Noisy conditional distributions for every parented node.

    ``epsilon`` is the conditional-table budget share.  Conditions with no
    supporting rows fall back to the child's unconditioned noisy
    distribution (``fallbacks`` when provided, else computed here from the
    node's noise stream).
    """
    disc = discretize_table(table, histogram_size)
    n = table.row_count
    k_eff = min(network.k, network.d - 1)
    scale = cpt_noise_scale(network.d, k_eff, n, epsilon) if epsilon > 0 else 0.0

    out: list[ConditionalTable] = []
    for node_idx, node in enumerate(network.nodes):
        if not node.parents:
            continue
        child = disc[node.child]
        parents = [disc[q] for q in node.parents]
        dims = tuple(p.size for p in parents)
        conditions = 1
        for dim in dims:
            conditions *= dim
            if conditions > MAX_CONDITION_CELLS:
                raise NetworkSizeError(
                    f"node {node.child!r}: parent-bin cross product exceeds "
                    f"{MAX_CONDITION_CELLS}; reduce k or the histogram size"
                )
        rng = substream(seed, STREAM_CPT, node_idx)

        if fallbacks is not None and node.child in fallbacks:
            fallback = np.asarray(fallbacks[node.child].probabilities, dtype=float)
        else:
            base = child.distribution_template
            assert base is not None
            fallback = base.probs()
            if scale > 0:
                fallback = noisy_probabilities(fallback, scale, rng)

        keep = child.codes >= 0
        for p in parents:
            keep &= p.codes >= 0
        cond = condition_index([p.codes[keep] for p in parents], dims)
        counts = (
            np.bincount(cond * child.size + child.codes[keep], minlength=conditions * child.size)
            .reshape(conditions, child.size)
            .astype(float)
        )

        rows: list[tuple[float, ...]] = []
        for c in range(conditions):
            total = counts[c].sum()
            if total == 0:
                rows.append(tuple(float(v) for v in fallback))
                continue
            probs = counts[c] / total
            if scale > 0:
                probs = noisy_probabilities(probs, scale, rng)
            rows.append(tuple(float(v) for v in probs))

        out.append(
            ConditionalTable(
                child=node.child,
                parents=node.parents,
                parent_dims=dims,
                parent_bins=tuple(p.bin_descriptors for p in parents),
                rows=tuple(rows),
                noise_scale=scale,
            )
        )
    return out
