"""Attribute distributions: bar charts, equi-width histograms, Laplace noise.

Categorical attributes are summarised by a bar chart over their observed
labels; numeric and datetime attributes by an equi-width histogram whose top
edge is closed so the observed maximum lands in the last bin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import Column
from .rng import laplace

BAR_CHART = "bar_chart"
HISTOGRAM = "histogram"

#: Tolerance on "probabilities sum to one".
PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Distribution:
    """A normalized bar chart (labels) or equi-width histogram (edges)."""

    kind: str
    probabilities: tuple[float, ...]
    labels: tuple[str, ...] | None = None
    edges: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind == BAR_CHART:
            if self.labels is None or self.edges is not None:
                raise ValueError("bar chart needs labels and no edges")
            if len(self.labels) != len(self.probabilities):
                raise ValueError("labels / probabilities length mismatch")
        elif self.kind == HISTOGRAM:
            if self.edges is None or self.labels is not None:
                raise ValueError("histogram needs edges and no labels")
            if len(self.edges) != len(self.probabilities) + 1:
                raise ValueError("edges must be one longer than probabilities")
            diffs = np.diff(self.edges)
            if np.any(diffs <= 0):
                raise ValueError("histogram edges must be strictly increasing")
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        p = np.asarray(self.probabilities, dtype=float)
        if np.any(p < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(float(p.sum()) - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum()}, not 1")

    @property
    def bin_count(self) -> int:
        return len(self.probabilities)

    def probs(self) -> np.ndarray:
        return np.asarray(self.probabilities, dtype=float)

    def same_bins(self, other: "Distribution") -> bool:
        return (
            self.kind == other.kind
            and self.labels == other.labels
            and self.edges == other.edges
        )

    def to_json(self) -> dict:
        doc: dict = {"kind": self.kind, "probabilities": list(self.probabilities)}
        if self.labels is not None:
            doc["labels"] = list(self.labels)
        if self.edges is not None:
            doc["bin_edges"] = list(self.edges)
        return doc

    @staticmethod
    def from_json(doc: dict) -> "Distribution":
        return Distribution(
            kind=doc["kind"],
            probabilities=tuple(float(p) for p in doc["probabilities"]),
            labels=tuple(doc["labels"]) if "labels" in doc else None,
            edges=tuple(float(e) for e in doc["bin_edges"]) if "bin_edges" in doc else None,
        )


def normalized(counts: np.ndarray) -> np.ndarray:
    total = float(counts.sum())
    if total <= 0:
        return np.full(len(counts), 1.0 / len(counts))
    return counts / total


def build_frequency(column: Column) -> Distribution:
    """Bar chart over the observed distinct values of a categorical column.

    Labels are sorted lexicographically so the output is order-insensitive.
    """
    if not column.categorical:
        raise ValueError(f"column {column.name!r} is not categorical")
    observed = column.non_missing()
    if not observed:
        raise ValueError(f"column {column.name!r} has no observed values")
    labels = sorted(set(observed))
    index = {v: i for i, v in enumerate(labels)}
    counts = np.zeros(len(labels), dtype=float)
    for v in observed:
        counts[index[v]] += 1
    return Distribution(BAR_CHART, tuple(normalized(counts)), labels=tuple(labels))


def histogram_edges(lo: float, hi: float, bins: int) -> np.ndarray:
    """Equi-width edges over [lo, hi]; a zero-width domain widens to [lo, lo+1)."""
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, bins + 1)


def bin_values(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Bin indices for ``values``; the top edge is closed, out-of-range
    values clamp to the nearest edge bin."""
    idx = np.searchsorted(edges, values, side="right") - 1
    return np.clip(idx, 0, len(edges) - 2)


def build_histogram(column: Column, bins: int) -> Distribution:
    """Equi-width histogram of a numeric/datetime column's observed values."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    values = column.numeric_values()
    if values.size == 0:
        raise ValueError(f"column {column.name!r} has no observed values")
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        edges = histogram_edges(lo, hi, 1)
    else:
        edges = histogram_edges(lo, hi, bins)
    counts = np.bincount(bin_values(values, edges), minlength=len(edges) - 1).astype(float)
    return Distribution(HISTOGRAM, tuple(normalized(counts)), edges=tuple(float(e) for e in edges))


def noisy_probabilities(probs: np.ndarray, scale: float, rng: np.random.Generator) -> np.ndarray:
    """Add Laplace(0, scale) per probability, clip negatives, renormalize.

    Falls back to uniform when every noisy value clips to zero.
    """
    noisy = probs + laplace(rng, scale, probs.shape)
    noisy = np.maximum(noisy, 0.0)
    total = float(noisy.sum())
    if total <= 0.0:
        return np.full(len(probs), 1.0 / len(probs))
    return noisy / total


def add_laplace_noise(
    dist: Distribution, epsilon: float, n: int, rng: np.random.Generator
) -> Distribution:
    """Laplace-perturb a distribution at scale 1/(n*epsilon).

    epsilon = 0 disables noise and returns ``dist`` unchanged.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    if epsilon == 0.0:
        return dist
    probs = noisy_probabilities(dist.probs(), 1.0 / (n * epsilon), rng)
    return Distribution(dist.kind, tuple(float(p) for p in probs), labels=dist.labels, edges=dist.edges)
