"""Adversarial probe datasets: edited distributions, pathological cells,
and fairness clusters.

Three ways to stress a downstream consumer:

* replace a learned attribute distribution with an edited one (including a
  small library of named pathological presets),
* inject pathological cell values (missing, type-inconsistent, extreme)
  into an existing table at a chosen rate,
* emit clusters of near-identical rows whose protected attribute follows a
  declared mix, for disparate-treatment probes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .describer import (
    AttributeDescription,
    DatasetDescription,
    Mode,
    WARN_CORRELATED_DOWNGRADED,
    WARN_DISTRIBUTION_OVERRIDDEN,
)
from .distributions import BAR_CHART, HISTOGRAM, Distribution
from .ingest import Column, DataType, Table, format_datetime, format_float
from .rng import STREAM_PROBE, substream, uniform_int

RULE_MISSING = "missing"
RULE_TYPE_INCONSISTENT = "type_inconsistent"
RULE_EXTREME = "extreme"
RULE_KINDS = (RULE_MISSING, RULE_TYPE_INCONSISTENT, RULE_EXTREME)

#: Token used for type-inconsistent injection; a classic real-world hazard.
INCONSISTENT_TOKEN = "N/A"


@dataclass(frozen=True)
class PathologyRule:
    attribute: str
    kind: str
    rate: float

    def __post_init__(self) -> None:
        if self.kind not in RULE_KINDS:
            raise ValueError(f"unknown pathology kind {self.kind!r}")
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError("rate must be in [0, 1]")


@dataclass(frozen=True)
class ClusterSpec:
    center: Mapping[str, str]
    radius: float | Mapping[str, float]
    size: int
    protected_attribute: str
    protected_mix: Mapping[str, float]

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError("cluster size must be >= 1")
        if self.protected_attribute in self.center:
            raise ValueError("protected attribute cannot also be a cluster center attribute")
        total = sum(self.protected_mix.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"protected mix sums to {total}, not 1")

    def radius_for(self, attribute: str) -> float:
        if isinstance(self.radius, Mapping):
            return float(self.radius.get(attribute, 0.0))
        return float(self.radius)


@dataclass(frozen=True)
class ProbeSpec:
    distribution_overrides: Mapping[str, Distribution] = field(default_factory=dict)
    pathology_rules: tuple[PathologyRule, ...] = ()
    cluster_specs: tuple[ClusterSpec, ...] = ()

    def to_json(self) -> dict:
        return {
            "distribution_overrides": {k: v.to_json() for k, v in self.distribution_overrides.items()},
            "pathology_rules": [
                {"attribute": r.attribute, "kind": r.kind, "rate": r.rate} for r in self.pathology_rules
            ],
            "cluster_specs": [
                {
                    "center": dict(c.center),
                    "radius": dict(c.radius) if isinstance(c.radius, Mapping) else c.radius,
                    "size": c.size,
                    "protected_attribute": c.protected_attribute,
                    "protected_mix": dict(c.protected_mix),
                }
                for c in self.cluster_specs
            ],
        }

    @staticmethod
    def from_json(doc: dict) -> "ProbeSpec":
        return ProbeSpec(
            distribution_overrides={
                k: Distribution.from_json(v) for k, v in doc.get("distribution_overrides", {}).items()
            },
            pathology_rules=tuple(
                PathologyRule(r["attribute"], r["kind"], float(r["rate"]))
                for r in doc.get("pathology_rules", ())
            ),
            cluster_specs=tuple(
                ClusterSpec(
                    center=dict(c["center"]),
                    radius=c["radius"] if not isinstance(c["radius"], dict) else dict(c["radius"]),
                    size=int(c["size"]),
                    protected_attribute=c["protected_attribute"],
                    protected_mix=dict(c["protected_mix"]),
                )
                for c in doc.get("cluster_specs", ())
            ),
        )

    @staticmethod
    def load(path: str | Path) -> "ProbeSpec":
        return ProbeSpec.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


# --------------------------------------------------------------------------
# Distribution editing
# --------------------------------------------------------------------------


def _compatible_kind(attr: AttributeDescription, dist: Distribution) -> bool:
    if attr.categorical:
        return dist.kind == BAR_CHART
    if attr.data_type in (DataType.INTEGER, DataType.FLOAT, DataType.DATETIME):
        return dist.kind == HISTOGRAM
    return False


def override_distribution(
    desc: DatasetDescription, attribute: str, dist: Distribution
) -> DatasetDescription:
    """Replace one attribute's distribution, leaving every other untouched.

    In correlated mode the network survives only when the attribute has no
    incident edges as a parent; a parented child keeps the network and has
    its conditional rows replaced by the new distribution, while a parent
    override downgrades the description to independent mode with a warning.
    """
    attr = desc.attribute(attribute)  # KeyError on unknown attribute
    if not _compatible_kind(attr, dist):
        raise ValueError(
            f"distribution kind {dist.kind!r} is incompatible with attribute {attribute!r}"
        )

    new_domain = attr.numeric_domain
    if dist.kind == HISTOGRAM and dist.edges:
        new_domain = (dist.edges[0], dist.edges[-1])
    new_attr = replace(attr, distribution=dist, numeric_domain=new_domain)
    attributes = tuple(new_attr if a.name == attribute else a for a in desc.attributes)
    warnings = desc.warnings
    if WARN_DISTRIBUTION_OVERRIDDEN not in warnings:
        warnings = warnings + (WARN_DISTRIBUTION_OVERRIDDEN,)

    if desc.mode is not Mode.CORRELATED or desc.network is None:
        return replace(desc, attributes=attributes, warnings=warnings)

    is_parent = any(attribute in node.parents for node in desc.network.nodes)
    if is_parent:
        return replace(
            desc,
            attributes=attributes,
            mode=Mode.INDEPENDENT,
            network=None,
            conditional_tables=(),
            structure_noise_scale=None,
            cpt_noise_scale=None,
            warnings=warnings + (WARN_CORRELATED_DOWNGRADED,),
        )

    # A parented child keeps its structure: every condition now emits the
    # override, so the forced marginal really is what gets generated.
    tables = tuple(
        replace(ct, rows=tuple(tuple(dist.probabilities) for _ in ct.rows))
        if ct.child == attribute
        else ct
        for ct in desc.conditional_tables
    )
    return replace(desc, attributes=attributes, conditional_tables=tables, warnings=warnings)


def apply_probe_spec(desc: DatasetDescription, spec: ProbeSpec) -> DatasetDescription:
    for name in sorted(spec.distribution_overrides):
        desc = override_distribution(desc, name, spec.distribution_overrides[name])
    return desc


# --------------------------------------------------------------------------
# Pathological cell injection
# --------------------------------------------------------------------------


def _extreme_value(column: Column) -> str:
    """A value well outside the observed domain (below its minimum)."""
    values = column.numeric_values()
    if values.size == 0:
        raise ValueError(f"column {column.name!r} has no observed values to anchor an extreme")
    lo, hi = float(values.min()), float(values.max())
    width = max(hi - lo, 1.0)
    value = lo - 2.0 * width
    if column.inferred_type is DataType.DATETIME:
        return format_datetime(value)
    if column.inferred_type is DataType.INTEGER:
        return str(round(value))
    return format_float(value)


def inject_pathology(table: Table, rules: Sequence[PathologyRule], seed: int) -> Table:
    """Independently replace cells at each rule's rate; deterministic in seed.

    Row count and column order are preserved; columns no rule touches are
    carried over unchanged.
    """
    names = set(table.column_names)
    for rule in rules:
        if rule.attribute not in names:
            raise ValueError(f"pathology rule names unknown attribute {rule.attribute!r}")
        col = table.column(rule.attribute)
        if rule.kind == RULE_EXTREME and col.inferred_type is DataType.STRING:
            raise ValueError(f"extreme rule on string attribute {rule.attribute!r}")

    columns = {c.name: c for c in table.columns}
    for rule_idx, rule in enumerate(rules):
        col = columns[rule.attribute]
        cells = list(col.cells)
        if rule.rate > 0.0:
            rng = substream(seed, STREAM_PROBE, rule_idx)
            mask = rng.random(len(cells)) < rule.rate
            if rule.kind == RULE_MISSING:
                replacement: str | None = None
            elif rule.kind == RULE_TYPE_INCONSISTENT:
                replacement = INCONSISTENT_TOKEN
            else:
                replacement = _extreme_value(col)
            for i in np.flatnonzero(mask):
                cells[i] = replacement
        columns[rule.attribute] = Column(
            name=col.name,
            cells=cells,
            inferred_type=col.inferred_type,
            categorical=col.categorical,
            distinct_count=len({c for c in cells if c is not None}),
        )
    return Table([columns[name] for name in table.column_names])


# --------------------------------------------------------------------------
# Fairness clusters
# --------------------------------------------------------------------------


def largest_remainder_counts(size: int, mix: Mapping[str, float]) -> dict[str, int]:
    """Integer label counts matching ``mix`` as closely as possible.

    Floors first, then hands remaining units to the largest fractional
    remainders (ties broken lexicographically), so small clusters honor the
    declared composition exactly.
    """
    labels = sorted(mix)
    floors = {lab: int(math.floor(size * mix[lab])) for lab in labels}
    leftover = size - sum(floors.values())
    remainders = sorted(labels, key=lambda lab: (-(size * mix[lab] - floors[lab]), lab))
    for lab in remainders[:leftover]:
        floors[lab] += 1
    return floors


def generate_fairness_cluster(
    spec: ClusterSpec, seed: int, *, cluster_id: int = 0, id_column: str = "cluster_id"
) -> Table:
    """Rows near a common center with a controlled protected-value mix.

    Numeric center attributes jitter uniformly within +/- radius; text
    center attributes repeat verbatim.  The protected column materializes
    the mix by largest-remainder rounding and is shuffled into the rows.
    """
    counts = largest_remainder_counts(spec.size, spec.protected_mix)
    protected = [lab for lab in sorted(counts) for _ in range(counts[lab])]
    rng = substream(seed, STREAM_PROBE, 10_000 + cluster_id)
    order = np.argsort(rng.random(spec.size), kind="stable")
    protected = [protected[i] for i in order]

    columns: list[Column] = [
        Column(name=id_column, cells=[str(cluster_id)] * spec.size, categorical=True, distinct_count=1)
    ]
    for attr_idx, (name, center_text) in enumerate(spec.center.items()):
        radius = spec.radius_for(name)
        numeric_center: float | None
        try:
            numeric_center = float(center_text)
        except (TypeError, ValueError):
            numeric_center = None
        if numeric_center is None or radius == 0.0:
            cells: list[str | None] = [center_text] * spec.size
            dtype = DataType.FLOAT if numeric_center is not None else DataType.STRING
        else:
            jitter_rng = substream(seed, STREAM_PROBE, 20_000 + cluster_id, attr_idx)
            offsets = (jitter_rng.random(spec.size) * 2.0 - 1.0) * radius
            cells = [format_float(numeric_center + o) for o in offsets]
            dtype = DataType.FLOAT
        columns.append(
            Column(
                name=name,
                cells=cells,
                inferred_type=dtype,
                categorical=False,
                distinct_count=len(set(cells)),
            )
        )
    columns.append(
        Column(
            name=spec.protected_attribute,
            cells=list(protected),
            inferred_type=DataType.STRING,
            categorical=True,
            distinct_count=len(set(protected)),
        )
    )
    return Table(columns)


def generate_fairness_clusters(
    specs: Sequence[ClusterSpec], seed: int, *, id_column: str = "cluster_id"
) -> Table:
    """Concatenate several clusters; all specs must share the same schema."""
    if not specs:
        raise ValueError("no cluster specs given")
    tables = [
        generate_fairness_cluster(s, seed, cluster_id=i, id_column=id_column)
        for i, s in enumerate(specs)
    ]
    first = tables[0]
    for t in tables[1:]:
        if t.column_names != first.column_names:
            raise ValueError("cluster specs disagree on attributes")
    merged = []
    for idx, col in enumerate(first.columns):
        cells: list[str | None] = []
        for t in tables:
            cells.extend(t.columns[idx].cells)
        merged.append(
            Column(
                name=col.name,
                cells=cells,
                inferred_type=col.inferred_type,
                categorical=col.categorical,
                distinct_count=len({c for c in cells if c is not None}),
            )
        )
    return Table(merged)


# --------------------------------------------------------------------------
# Preset pathological distributions
# --------------------------------------------------------------------------


def _extended_edges(domain: tuple[float, float], bins: int, stretch: float) -> tuple[float, ...]:
    lo, hi = domain
    width = max(hi - lo, 1.0)
    return tuple(np.linspace(lo - stretch * width, hi + stretch * width, bins + 1))


def preset_heavy_tail(attr: AttributeDescription) -> Distribution:
    """Slowly decaying mass stretching far beyond the observed maximum."""
    if attr.categorical or attr.numeric_domain is None:
        raise ValueError("heavy-tail preset needs a non-categorical numeric attribute")
    lo, hi = attr.numeric_domain
    width = max(hi - lo, 1.0)
    bins = 20
    edges = tuple(np.linspace(lo, hi + 5.0 * width, bins + 1))
    weights = 1.0 / (1.0 + np.arange(bins))
    probs = weights / weights.sum()
    return Distribution(HISTOGRAM, tuple(float(p) for p in probs), edges=edges)


def preset_point_mass(attr: AttributeDescription) -> Distribution:
    """All mass on a single extreme point (or the rarest label)."""
    if attr.categorical:
        dist = attr.distribution
        if dist is None or not dist.labels:
            raise ValueError("point-mass preset needs a stored bar chart")
        rarest = min(zip(dist.probabilities, dist.labels))[1]
        probs = tuple(1.0 if lab == rarest else 0.0 for lab in dist.labels)
        return Distribution(BAR_CHART, probs, labels=dist.labels)
    if attr.numeric_domain is None:
        raise ValueError("point-mass preset needs a numeric domain")
    lo, hi = attr.numeric_domain
    point = hi + 2.0 * max(hi - lo, 1.0)
    return Distribution(HISTOGRAM, (1.0,), edges=(point, point + 1.0))


def preset_bimodal_extremes(attr: AttributeDescription) -> Distribution:
    """Half the mass on each extreme end of a widened domain."""
    if attr.categorical:
        dist = attr.distribution
        if dist is None or not dist.labels or len(dist.labels) < 2:
            raise ValueError("bimodal preset needs at least two labels")
        probs = [0.0] * len(dist.labels)
        probs[0] = probs[-1] = 0.5
        return Distribution(BAR_CHART, tuple(probs), labels=dist.labels)
    if attr.numeric_domain is None:
        raise ValueError("bimodal preset needs a numeric domain")
    bins = 10
    edges = _extended_edges(attr.numeric_domain, bins, 1.0)
    probs = [0.0] * bins
    probs[0] = probs[-1] = 0.5
    return Distribution(HISTOGRAM, tuple(probs), edges=edges)


PRESETS = {
    "heavy-tail": preset_heavy_tail,
    "point-mass": preset_point_mass,
    "bimodal-extremes": preset_bimodal_extremes,
}


def preset_override(desc: DatasetDescription, attribute: str, preset: str) -> DatasetDescription:
    """Apply a named pathological preset to one attribute's distribution."""
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    return override_distribution(desc, attribute, PRESETS[preset](desc.attribute(attribute)))
