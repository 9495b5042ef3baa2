"""Before/after comparison of a private table and its synthetic counterpart.

The report bundles raw head/tail samples, per-attribute distribution
comparisons (KL divergence in bits, plus a probability-vector correlation),
pairwise normalized mutual-information matrices for both tables, and
optional network edge lists fitted to each side.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import bayesnet
from .bayesnet import DiscretizedColumn, discretize_column, entropy_bits, mutual_information
from .describer import DatasetDescription, Mode
from .distributions import BAR_CHART, HISTOGRAM, Distribution, bin_values, build_frequency, build_histogram, normalized
from .ingest import Column, DataType, Table

#: Weight of the uniform mixture folded into both sides of a KL computation.
KL_SMOOTHING = 1e-6


class SchemaMismatchError(ValueError):
    """The two tables do not share column names."""


# --------------------------------------------------------------------------
# Raw tuple comparison
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class HeadTailSample:
    columns: tuple[str, ...]
    a_head: tuple[tuple[str | None, ...], ...]
    a_tail: tuple[tuple[str | None, ...], ...]
    b_head: tuple[tuple[str | None, ...], ...]
    b_tail: tuple[tuple[str | None, ...], ...]


def head_tail(a: Table, b: Table, count: int = 5) -> HeadTailSample:
    """First and last ``count`` rows of each table, aligned on a's columns."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if set(a.column_names) != set(b.column_names):
        raise SchemaMismatchError(
            f"column mismatch: {sorted(a.column_names)} vs {sorted(b.column_names)}"
        )
    order = a.column_names

    def rows_of(t: Table) -> list[tuple[str | None, ...]]:
        cols = [t.column(name).cells for name in order]
        return [tuple(c[i] for c in cols) for i in range(t.row_count)]

    ra, rb = rows_of(a), rows_of(b)
    return HeadTailSample(
        columns=tuple(order),
        a_head=tuple(ra[:count]),
        a_tail=tuple(ra[-count:]),
        b_head=tuple(rb[:count]),
        b_tail=tuple(rb[-count:]),
    )


# --------------------------------------------------------------------------
# Divergence and correlation measures
# --------------------------------------------------------------------------


def kl_divergence(p: Distribution, q: Distribution) -> float:
    """KL(p || q) in bits after mixing both with uniform at ``KL_SMOOTHING``.

    The smoothing keeps the sum finite when q has empty bins; it perturbs
    well-separated distributions by well under 1e-4 bits.
    """
    if not p.same_bins(q):
        raise ValueError("distributions must share an identical bin structure")
    b = p.bin_count
    pv = (1.0 - KL_SMOOTHING) * p.probs() + KL_SMOOTHING / b
    qv = (1.0 - KL_SMOOTHING) * q.probs() + KL_SMOOTHING / b
    return float(np.sum(pv * np.log2(pv / qv)))


@dataclass(frozen=True)
class CorrelationResult:
    kind: str  # "pearson" | "cramers_v" | "correlation_ratio"
    value: float
    degenerate: bool = False


def _is_numeric_column(col: Column) -> bool:
    return col.inferred_type is not DataType.STRING and not col.categorical


def _pearson(x: np.ndarray, y: np.ndarray) -> CorrelationResult:
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return CorrelationResult("pearson", 0.0, degenerate=True)
    r = float(np.corrcoef(x, y)[0, 1])
    return CorrelationResult("pearson", r)


def _cramers_v(x: Sequence[str], y: Sequence[str]) -> CorrelationResult:
    xs = sorted(set(x))
    ys = sorted(set(y))
    if len(xs) < 2 or len(ys) < 2:
        return CorrelationResult("cramers_v", 0.0, degenerate=True)
    xi = {v: i for i, v in enumerate(xs)}
    yi = {v: i for i, v in enumerate(ys)}
    table = np.zeros((len(xs), len(ys)))
    for a, b in zip(x, y):
        table[xi[a], yi[b]] += 1
    n = table.sum()
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / n
    chi2 = float(np.sum((table - expected) ** 2 / expected, where=expected > 0))
    v = np.sqrt(chi2 / (n * (min(len(xs), len(ys)) - 1)))
    return CorrelationResult("cramers_v", float(v))


def _correlation_ratio(groups: Sequence[str], values: np.ndarray) -> CorrelationResult:
    total_mean = values.mean()
    ss_total = float(np.sum((values - total_mean) ** 2))
    if ss_total == 0:
        return CorrelationResult("correlation_ratio", 0.0, degenerate=True)
    ss_between = 0.0
    by_group: dict[str, list[float]] = {}
    for g, v in zip(groups, values):
        by_group.setdefault(g, []).append(float(v))
    for vals in by_group.values():
        ss_between += len(vals) * (np.mean(vals) - total_mean) ** 2
    return CorrelationResult("correlation_ratio", float(np.sqrt(ss_between / ss_total)))


def correlation_coefficient(x: Column, y: Column) -> CorrelationResult:
    """Pearson r, Cramer's V or the correlation ratio, by column kinds.

    Rows missing in either column are dropped; constant columns yield 0
    with the degenerate flag set.
    """
    if len(x.cells) != len(y.cells):
        raise ValueError("columns must have equal length")
    pairs = [(a, b) for a, b in zip(x.cells, y.cells) if a is not None and b is not None]
    if not pairs:
        return CorrelationResult("pearson", 0.0, degenerate=True)
    xs = [a for a, _ in pairs]
    ys = [b for _, b in pairs]
    x_num, y_num = _is_numeric_column(x), _is_numeric_column(y)

    def as_floats(col: Column, cells: list[str]) -> np.ndarray:
        parser = col.inferred_type
        if parser is DataType.DATETIME:
            from .ingest import parse_datetime

            return np.array([parse_datetime(c) for c in cells], dtype=float)
        return np.array([float(c) for c in cells], dtype=float)

    if x_num and y_num:
        return _pearson(as_floats(x, xs), as_floats(y, ys))
    if not x_num and not y_num:
        return _cramers_v(xs, ys)
    if x_num:
        return _correlation_ratio(ys, as_floats(x, xs))
    return _correlation_ratio(xs, as_floats(y, ys))


# --------------------------------------------------------------------------
# Pairwise mutual-information matrix
# --------------------------------------------------------------------------


def _matrix_discretize(
    table: Table,
    histogram_size: int,
    numeric_edges: Mapping[str, Sequence[float]] | None = None,
) -> list[DiscretizedColumn]:
    """Codes for every column; non-categorical strings code by distinct value.

    ``numeric_edges`` pins histogram edges per attribute (used to re-bin a
    synthetic table on the input's bins); out-of-range values clamp to the
    edge bins.
    """
    out: list[DiscretizedColumn] = []
    for col in table.columns:
        edges = (numeric_edges or {}).get(col.name)
        if edges is not None and _is_numeric_column(col):
            arr = np.asarray(edges, dtype=float)
            codes = np.full(len(col.cells), -1, dtype=np.int64)
            present = ~col.missing_mask()
            codes[present] = bin_values(col.numeric_values(), arr)
            descriptors = tuple(f"[{arr[i]:g}, {arr[i+1]:g})" for i in range(len(arr) - 1))
            out.append(DiscretizedColumn(col.name, codes, len(arr) - 1, descriptors, None))
            continue
        disc = discretize_column(col, histogram_size, strings_as_labels=True)
        if disc is None:
            # All cells missing: a constant, flagged-out column.
            codes = np.full(len(col.cells), -1, dtype=np.int64)
            out.append(DiscretizedColumn(col.name, codes, 1, ("<missing>",), None))
        else:
            out.append(disc)
    return out


def mi_matrix(
    table: Table,
    histogram_size: int = 20,
    *,
    numeric_edges: Mapping[str, Sequence[float]] | None = None,
) -> np.ndarray:
    """d x d normalized mutual information over the table's attributes.

    Entry (i, j) is I(Xi; Xj) divided by min(H(Xi), H(Xj)) on the rows where
    both are observed, clamped to [0, 1]; constant attributes produce a zero
    row and column, diagonal included.
    """
    if len(table.columns) < 2:
        raise ValueError("mutual-information matrix needs at least 2 attributes")
    disc = _matrix_discretize(table, histogram_size, numeric_edges)
    d = len(disc)
    matrix = np.zeros((d, d))
    entropies = [entropy_bits(c.codes) for c in disc]
    for i in range(d):
        matrix[i, i] = 1.0 if entropies[i] > 1e-12 else 0.0
        for j in range(i + 1, d):
            keep = (disc[i].codes >= 0) & (disc[j].codes >= 0)
            if not keep.any():
                continue
            xi = disc[i].codes[keep]
            xj = disc[j].codes[keep]
            h = min(entropy_bits(xi), entropy_bits(xj))
            if h <= 1e-12:
                continue
            value = mutual_information(xi, [xj]) / h
            matrix[i, j] = matrix[j, i] = float(min(max(value, 0.0), 1.0))
    return matrix


# --------------------------------------------------------------------------
# Full report
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AttributeComparison:
    name: str
    data_type: str
    input_distribution: Distribution | None
    synthetic_distribution: Distribution | None
    kl_divergence_bits: float | None
    distribution_correlation: float | None


@dataclass(frozen=True)
class ComparisonReport:
    columns: tuple[str, ...]
    samples: HeadTailSample
    attributes: tuple[AttributeComparison, ...]
    mi_input: np.ndarray
    mi_synthetic: np.ndarray
    input_network_edges: tuple[tuple[str, str], ...] | None = None
    synthetic_network_edges: tuple[tuple[str, str], ...] | None = None

    def to_json(self) -> dict:
        return {
            "format_version": 1,
            "columns": list(self.columns),
            "samples": {
                "input_head": [list(r) for r in self.samples.a_head],
                "input_tail": [list(r) for r in self.samples.a_tail],
                "synthetic_head": [list(r) for r in self.samples.b_head],
                "synthetic_tail": [list(r) for r in self.samples.b_tail],
            },
            "attributes": [
                {
                    "name": a.name,
                    "data_type": a.data_type,
                    "input_distribution": a.input_distribution.to_json() if a.input_distribution else None,
                    "synthetic_distribution": a.synthetic_distribution.to_json() if a.synthetic_distribution else None,
                    "kl_divergence_bits": a.kl_divergence_bits,
                    "distribution_correlation": a.distribution_correlation,
                }
                for a in self.attributes
            ],
            "mutual_information": {
                "attributes": list(self.columns),
                "input": self.mi_input.tolist(),
                "synthetic": self.mi_synthetic.tolist(),
            },
            "networks": None
            if self.input_network_edges is None
            else {
                "input_edges": [list(e) for e in self.input_network_edges],
                "synthetic_edges": [list(e) for e in self.synthetic_network_edges or ()],
            },
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")


def _rebin_synthetic(input_dist: Distribution, synthetic: Column) -> Distribution:
    """Synthetic column re-counted over the input's exact bin structure.

    Unknown labels map to the lexicographically nearest input label and
    out-of-range numerics clamp to the edge bins, so the re-binned counts
    always sum to the synthetic non-missing count.
    """
    observed = synthetic.non_missing()
    if input_dist.kind == BAR_CHART:
        labels = list(input_dist.labels or ())
        counts = np.zeros(len(labels), dtype=float)
        index = {v: i for i, v in enumerate(labels)}
        for v in observed:
            if v in index:
                counts[index[v]] += 1
            else:
                pos = bisect.bisect_left(labels, v)
                counts[min(pos, len(labels) - 1)] += 1
        return Distribution(BAR_CHART, tuple(normalized(counts)), labels=input_dist.labels)
    edges = np.asarray(input_dist.edges, dtype=float)
    values = synthetic.numeric_values()
    counts = np.bincount(bin_values(values, edges), minlength=len(edges) - 1).astype(float)
    return Distribution(HISTOGRAM, tuple(normalized(counts)), edges=input_dist.edges)


def _input_distribution(col: Column, histogram_size: int) -> Distribution | None:
    if not col.non_missing():
        return None
    if col.categorical:
        return build_frequency(col)
    if col.inferred_type is DataType.STRING:
        return None
    return build_histogram(col, histogram_size)


def compare(
    input_table: Table,
    synthetic: Table,
    description: DatasetDescription,
    *,
    fit_networks: bool | None = None,
) -> ComparisonReport:
    """Assemble the full before/after report.

    Synthetic attributes are re-binned on the input's bins for both the
    per-attribute histograms and the synthetic MI matrix; neither table is
    mutated.  Networks are fitted (noise-free) to both tables when the
    description is in correlated mode, or on request.
    """
    if set(input_table.column_names) != set(synthetic.column_names):
        raise SchemaMismatchError("input and synthetic tables have different columns")
    histogram_size = description.privacy.histogram_size
    samples = head_tail(input_table, synthetic, 5)

    attributes: list[AttributeComparison] = []
    numeric_edges: dict[str, Sequence[float]] = {}
    for col in input_table.columns:
        syn_col = synthetic.column(col.name)
        input_dist = _input_distribution(col, histogram_size)
        syn_dist = None
        kl = None
        corr = None
        if input_dist is not None and syn_col.non_missing():
            if input_dist.kind == HISTOGRAM:
                numeric_edges[col.name] = input_dist.edges or ()
            syn_dist = _rebin_synthetic(input_dist, syn_col)
            kl = kl_divergence(input_dist, syn_dist)
            p, q = input_dist.probs(), syn_dist.probs()
            if np.ptp(p) > 0 and np.ptp(q) > 0:
                corr = float(np.corrcoef(p, q)[0, 1])
            else:
                corr = 0.0
        attributes.append(
            AttributeComparison(
                name=col.name,
                data_type=col.inferred_type.value,
                input_distribution=input_dist,
                synthetic_distribution=syn_dist,
                kl_divergence_bits=kl,
                distribution_correlation=corr,
            )
        )

    mi_in = mi_matrix(input_table, histogram_size)
    mi_syn = mi_matrix(synthetic, histogram_size, numeric_edges=numeric_edges)

    input_edges = None
    synthetic_edges = None
    if fit_networks is None:
        fit_networks = description.mode is Mode.CORRELATED
    if fit_networks:
        k = description.network.k if description.network else 4
        input_edges = tuple(_fit_edges(input_table, k, histogram_size))
        synthetic_edges = tuple(_fit_edges(synthetic, k, histogram_size))

    return ComparisonReport(
        columns=tuple(input_table.column_names),
        samples=samples,
        attributes=tuple(attributes),
        mi_input=mi_in,
        mi_synthetic=mi_syn,
        input_network_edges=input_edges,
        synthetic_network_edges=synthetic_edges,
    )


def _fit_edges(table: Table, k: int, histogram_size: int) -> list[tuple[str, str]]:
    try:
        network = bayesnet.greedy_bayes(table, k, 0.0, 0, histogram_size=histogram_size)
    except ValueError:
        return []
    return network.edges()
