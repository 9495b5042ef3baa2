"""Synthetic table generation from a dataset description.

Output is a pure function of (description, size, seed, uniform attributes):
rows are produced in fixed-size blocks and every (attribute, block) pair
owns its own named random substream, so single-threaded and multi-threaded
runs emit byte-identical tables.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bayesnet import condition_index
from .describer import AttributeDescription, DatasetDescription, Mode
from .distributions import BAR_CHART, Distribution
from .ingest import Column, DataType, Table, format_datetime, format_float
from .rng import (
    STREAM_CORRELATED,
    STREAM_GENERATE,
    STREAM_MISSING,
    block_bounds,
    block_count,
    choice_index,
    substream,
    uniform_int,
)

RANDOM_STRING_ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789"


class RequestError(ValueError):
    """The generation request contradicts its description."""


@dataclass(frozen=True)
class GenerationRequest:
    description: DatasetDescription
    size: int | None = None
    seed: int = 0
    uniform_attributes: frozenset[str] = field(default_factory=frozenset)
    mode_override: Mode | None = None
    inject_missing: bool = True

    def __post_init__(self) -> None:
        if self.size is not None and self.size < 1:
            raise RequestError("output size must be >= 1")
        known = set(self.description.attribute_names)
        unknown = set(self.uniform_attributes) - known
        if unknown:
            raise RequestError(f"uniform attributes not in description: {sorted(unknown)}")
        if self.mode_override is not None:
            if self.mode_override.fidelity > self.description.mode.fidelity:
                raise RequestError(
                    f"a {self.description.mode.value} description cannot serve "
                    f"a {self.mode_override.value} request"
                )

    @property
    def resolved_size(self) -> int:
        return self.size if self.size is not None else self.description.row_count

    @property
    def resolved_mode(self) -> Mode:
        return self.mode_override if self.mode_override is not None else self.description.mode


# --------------------------------------------------------------------------
# Value decoding
# --------------------------------------------------------------------------


def _integer_bounds(lo: float, hi: float, closed_top: bool) -> tuple[int, int]:
    """Integers eligible inside [lo, hi) — or [lo, hi] for the closed top bin."""
    low = math.ceil(lo)
    high = math.floor(hi) if closed_top else math.ceil(hi) - 1
    return low, high


def _decode_numeric_bins(
    attr: AttributeDescription, bins: np.ndarray, rng: np.random.Generator
) -> list[str]:
    """Draw a value uniformly inside each row's histogram bin and format it."""
    dist = attr.distribution
    assert dist is not None and dist.edges is not None
    edges = np.asarray(dist.edges, dtype=float)
    lo = edges[bins]
    hi = edges[bins + 1]
    u = rng.random(len(bins))
    if attr.data_type is DataType.FLOAT:
        return [format_float(v) for v in lo + u * (hi - lo)]

    last = len(edges) - 2
    out: list[str] = []
    for i in range(len(bins)):
        low, high = _integer_bounds(lo[i], hi[i], closed_top=bins[i] == last)
        if high < low:
            # Bin narrower than one integer: emit its rounded midpoint.
            value = round((lo[i] + hi[i]) / 2.0)
        else:
            span = high - low + 1
            value = low + min(int(u[i] * span), span - 1)
        out.append(format_datetime(value) if attr.data_type is DataType.DATETIME else str(int(value)))
    return out


def _decode_bins(
    attr: AttributeDescription, bins: np.ndarray, rng: np.random.Generator
) -> list[str]:
    dist = attr.distribution
    assert dist is not None
    if dist.kind == BAR_CHART:
        labels = dist.labels
        assert labels is not None
        return [labels[i] for i in bins]
    return _decode_numeric_bins(attr, bins, rng)


def _random_strings(
    length_range: tuple[int, int], rng: np.random.Generator, count: int
) -> list[str]:
    lo, hi = length_range
    lengths = uniform_int(rng, lo, hi, count)
    total = int(lengths.sum())
    chars = uniform_int(rng, 0, len(RANDOM_STRING_ALPHABET) - 1, total) if total else np.array([], dtype=int)
    out = []
    pos = 0
    for n in lengths:
        out.append("".join(RANDOM_STRING_ALPHABET[c] for c in chars[pos : pos + n]))
        pos += int(n)
    return out


def _random_mode_cells(
    attr: AttributeDescription, rng: np.random.Generator, count: int
) -> list[str | None]:
    """Type-consistent uniform values over the recorded domain/length range."""
    if attr.data_type is DataType.STRING:
        if attr.string_length_range is None:
            return [None] * count
        return list(_random_strings(attr.string_length_range, rng, count))
    if attr.numeric_domain is None:
        return [None] * count
    lo, hi = attr.numeric_domain
    if attr.data_type is DataType.FLOAT:
        return [format_float(v) for v in lo + rng.random(count) * (hi - lo)]
    values = uniform_int(rng, math.ceil(lo), max(math.floor(hi), math.ceil(lo)), count)
    if attr.data_type is DataType.DATETIME:
        return [format_datetime(v) for v in values]
    return [str(int(v)) for v in values]


def sample_value(
    dist: Distribution, rng: np.random.Generator, data_type: DataType = DataType.FLOAT
) -> str:
    """Draw one value from a distribution.

    Bar charts return the drawn label; histograms pick a bin by probability
    and then a point uniformly inside it, rounded to an integer (or epoch
    second for datetimes) when the column type asks for it.
    """
    attr = AttributeDescription(
        name="value",
        data_type=data_type,
        categorical=dist.kind == BAR_CHART,
        missing_rate=0.0,
        distribution=dist,
    )
    bins = choice_index(rng, dist.probs(), 1)
    return _decode_bins(attr, bins, rng)[0]


# --------------------------------------------------------------------------
# Block generation
# --------------------------------------------------------------------------


def _uniform_probs(dist: Distribution) -> np.ndarray:
    return np.full(dist.bin_count, 1.0 / dist.bin_count)


def _independent_cells(
    attr: AttributeDescription,
    rng: np.random.Generator,
    count: int,
    uniform: bool,
) -> list[str | None]:
    dist = attr.distribution
    if dist is not None:
        probs = _uniform_probs(dist) if uniform else dist.probs()
        bins = choice_index(rng, probs, count)
        return list(_decode_bins(attr, bins, rng))
    if attr.data_type is DataType.STRING and attr.string_length_range is not None:
        return list(_random_strings(attr.string_length_range, rng, count))
    return [None] * count


def _correlated_bins(
    desc: DatasetDescription,
    block: int,
    count: int,
    seed: int,
    uniform: frozenset[str],
) -> dict[str, np.ndarray]:
    """Sample bin indices for every networked attribute, in network order."""
    network = desc.network
    assert network is not None
    bins: dict[str, np.ndarray] = {}
    for node_idx, node in enumerate(network.nodes):
        rng = substream(seed, STREAM_CORRELATED, node_idx, block)
        attr = desc.attribute(node.child)
        dist = attr.distribution
        assert dist is not None, f"networked attribute {node.child!r} lacks a distribution"
        if node.child in uniform:
            bins[node.child] = choice_index(rng, _uniform_probs(dist), count)
            continue
        if not node.parents:
            bins[node.child] = choice_index(rng, dist.probs(), count)
            continue
        ct = desc.conditional_table(node.child)
        assert ct is not None, f"missing conditional table for {node.child!r}"
        cond = condition_index([bins[p] for p in ct.parents], ct.parent_dims)
        cdf = np.cumsum(ct.table_array(), axis=1)
        cdf[:, -1] = 1.0
        u = rng.random(count)
        bins[node.child] = np.argmax(u[:, None] < cdf[cond], axis=1)
    return bins


def _generate_block(
    desc: DatasetDescription,
    mode: Mode,
    block: int,
    rows: int,
    seed: int,
    uniform: frozenset[str],
    inject_missing: bool,
) -> list[list[str | None]]:
    start, stop = block_bounds(block, rows)
    count = stop - start
    networked_bins: dict[str, np.ndarray] = {}
    if mode is Mode.CORRELATED:
        networked_bins = _correlated_bins(desc, block, count, seed, uniform)

    columns: list[list[str | None]] = []
    for attr_idx, attr in enumerate(desc.attributes):
        rng = substream(seed, STREAM_GENERATE, attr_idx, block)
        if mode is Mode.RANDOM:
            cells = _random_mode_cells(attr, rng, count)
        elif mode is Mode.CORRELATED and attr.name in networked_bins:
            cells = list(_decode_bins(attr, networked_bins[attr.name], rng))
        else:
            cells = _independent_cells(attr, rng, count, attr.name in uniform)

        if inject_missing and attr.missing_rate > 0.0:
            miss_rng = substream(seed, STREAM_MISSING, attr_idx, block)
            mask = miss_rng.random(count) < attr.missing_rate
            cells = [None if mask[i] else cells[i] for i in range(count)]
        columns.append(cells)
    return columns


def generate(request: GenerationRequest, *, threads: int = 1) -> Table:
    """Materialize a synthetic table for ``request``.

    ``threads`` only changes the execution schedule, never the output.
    """
    desc = request.description
    mode = request.resolved_mode
    rows = request.resolved_size
    seed = request.seed
    uniform = frozenset(request.uniform_attributes)
    blocks = block_count(rows)

    def run(block: int) -> list[list[str | None]]:
        return _generate_block(desc, mode, block, rows, seed, uniform, request.inject_missing)

    if threads > 1 and blocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(blocks)))
    else:
        parts = [run(b) for b in range(blocks)]

    columns = []
    for attr_idx, attr in enumerate(desc.attributes):
        cells: list[str | None] = []
        for part in parts:
            cells.extend(part[attr_idx])
        columns.append(
            Column(
                name=attr.name,
                cells=cells,
                inferred_type=attr.data_type,
                categorical=attr.categorical,
                distinct_count=len({c for c in cells if c is not None}),
            )
        )
    return Table(columns)
