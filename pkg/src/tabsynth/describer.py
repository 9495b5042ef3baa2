"""Dataset descriptions: the portable model synthetic data is sampled from.

Three fidelity modes:

* random            — types, string length ranges, numeric domains only.
* independent       — adds a Laplace-noised distribution and missing rate
                      per attribute (scale 1/(n*eps)).
* correlated        — adds a Bayesian network; stored distributions and
                      conditional tables are noised at the network's scale,
                      with the budget split half structure / half tables.

A description serializes to a single UTF-8 JSON document; field names are
part of the stable format (``FORMAT_VERSION``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from . import bayesnet
from .bayesnet import BayesianNetwork, ConditionalTable, NetworkNode
from .distributions import (
    Distribution,
    add_laplace_noise,
    build_frequency,
    build_histogram,
    noisy_probabilities,
)
from .ingest import Column, DataType, Table, missing_rate
from .rng import STREAM_DESCRIBE, laplace, substream

FORMAT_VERSION = 1

WARN_CORRELATED_DOWNGRADED = "correlated_mode_downgraded_to_independent"
WARN_DISTRIBUTION_OVERRIDDEN = "distribution_overridden"


class Mode(Enum):
    RANDOM = "random"
    INDEPENDENT = "independent_attribute"
    CORRELATED = "correlated_attribute"

    @staticmethod
    def parse(text: str) -> "Mode":
        aliases = {
            "random": Mode.RANDOM,
            "independent": Mode.INDEPENDENT,
            "independent_attribute": Mode.INDEPENDENT,
            "correlated": Mode.CORRELATED,
            "correlated_attribute": Mode.CORRELATED,
        }
        try:
            return aliases[text.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown mode {text!r}") from None

    @property
    def fidelity(self) -> int:
        return {Mode.RANDOM: 0, Mode.INDEPENDENT: 1, Mode.CORRELATED: 2}[self]


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float = 0.1
    histogram_size: int = 20
    categorical_threshold: int = 10

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0 (0 disables noise)")
        if self.histogram_size < 1:
            raise ValueError("histogram size must be >= 1")
        if self.categorical_threshold < 1:
            raise ValueError("categorical threshold must be >= 1")


@dataclass(frozen=True)
class AttributeDescription:
    name: str
    data_type: DataType
    categorical: bool
    missing_rate: float
    distribution: Distribution | None = None
    string_length_range: tuple[int, int] | None = None
    numeric_domain: tuple[float, float] | None = None

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "data_type": self.data_type.value,
            "categorical": self.categorical,
            "missing_rate": self.missing_rate,
            "distribution": self.distribution.to_json() if self.distribution else None,
            "string_length_range": list(self.string_length_range) if self.string_length_range else None,
            "numeric_domain": list(self.numeric_domain) if self.numeric_domain else None,
        }

    @staticmethod
    def from_json(doc: dict) -> "AttributeDescription":
        return AttributeDescription(
            name=doc["name"],
            data_type=DataType(doc["data_type"]),
            categorical=bool(doc["categorical"]),
            missing_rate=float(doc["missing_rate"]),
            distribution=Distribution.from_json(doc["distribution"]) if doc.get("distribution") else None,
            string_length_range=tuple(doc["string_length_range"]) if doc.get("string_length_range") else None,
            numeric_domain=tuple(doc["numeric_domain"]) if doc.get("numeric_domain") else None,
        )


@dataclass(frozen=True)
class DatasetDescription:
    mode: Mode
    row_count: int
    privacy: PrivacyParams
    attributes: tuple[AttributeDescription, ...]
    network: BayesianNetwork | None = None
    conditional_tables: tuple[ConditionalTable, ...] = ()
    structure_noise_scale: float | None = None
    cpt_noise_scale: float | None = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ValueError("attribute names must be unique")
        if (self.network is not None) != (self.mode is Mode.CORRELATED):
            raise ValueError("network present iff mode is correlated")

    def attribute(self, name: str) -> AttributeDescription:
        for a in self.attributes:
            if a.name == name:
                return a
        raise KeyError(name)

    @property
    def attribute_names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def conditional_table(self, child: str) -> ConditionalTable | None:
        for ct in self.conditional_tables:
            if ct.child == child:
                return ct
        return None

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        network = None
        if self.network is not None:
            network = {
                "max_parents": self.network.k,
                "attribute_count": self.network.d,
                "nodes": [{"child": n.child, "parents": list(n.parents)} for n in self.network.nodes],
                "structure_noise_scale": self.structure_noise_scale,
                "cpt_noise_scale": self.cpt_noise_scale,
                "conditional_tables": [
                    {
                        "child": ct.child,
                        "parents": list(ct.parents),
                        "parent_dims": list(ct.parent_dims),
                        "parent_bins": [list(b) for b in ct.parent_bins],
                        "rows": [list(r) for r in ct.rows],
                        "noise_scale": ct.noise_scale,
                    }
                    for ct in self.conditional_tables
                ],
            }
        return {
            "format_version": FORMAT_VERSION,
            "mode": self.mode.value,
            "row_count": self.row_count,
            "privacy": {
                "epsilon": self.privacy.epsilon,
                "histogram_size": self.privacy.histogram_size,
                "categorical_threshold": self.privacy.categorical_threshold,
            },
            "attributes": [a.to_json() for a in self.attributes],
            "network": network,
            "warnings": list(self.warnings),
        }

    @staticmethod
    def from_json(doc: dict) -> "DatasetDescription":
        if doc.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported format_version {doc.get('format_version')!r}")
        network = None
        tables: tuple[ConditionalTable, ...] = ()
        structure_scale = None
        cpt_scale = None
        net_doc = doc.get("network")
        if net_doc is not None:
            network = BayesianNetwork(
                nodes=tuple(
                    NetworkNode(n["child"], tuple(n["parents"])) for n in net_doc["nodes"]
                ),
                k=int(net_doc["max_parents"]),
                d=int(net_doc["attribute_count"]),
            )
            structure_scale = net_doc.get("structure_noise_scale")
            cpt_scale = net_doc.get("cpt_noise_scale")
            tables = tuple(
                ConditionalTable(
                    child=t["child"],
                    parents=tuple(t["parents"]),
                    parent_dims=tuple(int(x) for x in t["parent_dims"]),
                    parent_bins=tuple(tuple(b) for b in t["parent_bins"]),
                    rows=tuple(tuple(float(v) for v in r) for r in t["rows"]),
                    noise_scale=float(t["noise_scale"]),
                )
                for t in net_doc["conditional_tables"]
            )
        privacy = doc["privacy"]
        return DatasetDescription(
            mode=Mode(doc["mode"]),
            row_count=int(doc["row_count"]),
            privacy=PrivacyParams(
                epsilon=float(privacy["epsilon"]),
                histogram_size=int(privacy["histogram_size"]),
                categorical_threshold=int(privacy["categorical_threshold"]),
            ),
            attributes=tuple(AttributeDescription.from_json(a) for a in doc["attributes"]),
            network=network,
            conditional_tables=tables,
            structure_noise_scale=structure_scale,
            cpt_noise_scale=cpt_scale,
            warnings=tuple(doc.get("warnings", ())),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")

    @staticmethod
    def load(path: str | Path) -> "DatasetDescription":
        return DatasetDescription.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


# --------------------------------------------------------------------------
# Noise primitives
# --------------------------------------------------------------------------


def noisy_missing_rate(rate: float, epsilon: float, n: int, rng: np.random.Generator) -> float:
    """Missing rate plus Laplace(0, 1/(n*eps)), clamped to [0, 1]."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must be in [0, 1]")
    if epsilon == 0.0:
        return rate
    noisy = rate + float(laplace(rng, 1.0 / (n * epsilon), 1)[0])
    return min(max(noisy, 0.0), 1.0)


# --------------------------------------------------------------------------
# Description building
# --------------------------------------------------------------------------


def _string_length_range(column: Column) -> tuple[int, int] | None:
    lengths = [len(c) for c in column.non_missing()]
    if not lengths:
        return None
    return min(lengths), max(lengths)


def _numeric_domain(column: Column) -> tuple[float, float] | None:
    values = column.numeric_values()
    if values.size == 0:
        return None
    return float(values.min()), float(values.max())


def _base_attribute(column: Column, mode: Mode) -> AttributeDescription:
    """Type, domain and length facts shared by every mode (pre-noise)."""
    length_range = None
    domain = None
    if column.inferred_type is DataType.STRING:
        if not column.categorical or mode is Mode.RANDOM:
            length_range = _string_length_range(column)
    else:
        domain = _numeric_domain(column)
    return AttributeDescription(
        name=column.name,
        data_type=column.inferred_type,
        categorical=column.categorical,
        missing_rate=missing_rate(column.cells),
        string_length_range=length_range,
        numeric_domain=domain,
    )


def _empirical_distribution(column: Column, histogram_size: int) -> Distribution | None:
    """Bar chart or histogram, exact; None where no distribution applies."""
    if not column.non_missing():
        return None
    if column.categorical:
        return build_frequency(column)
    if column.inferred_type is DataType.STRING:
        return None
    return build_histogram(column, histogram_size)


def describe(
    table: Table,
    mode: Mode,
    privacy: PrivacyParams,
    seed: int,
    *,
    max_parents: int = bayesnet.DEFAULT_MAX_PARENTS,
) -> DatasetDescription:
    """Build the dataset description for ``table`` under ``mode``.

    Each attribute draws from its own seeded stream (index-derived), so
    descriptions are identical whether attributes are processed in sequence
    or in parallel.  Correlated mode falls back to independent mode, with a
    warning recorded, when fewer than two attributes are discretizable.
    """
    if table.row_count == 0 or not table.columns:
        raise ValueError("cannot describe an empty table")
    n = table.row_count
    eps = privacy.epsilon
    warnings: list[str] = []

    if mode is Mode.CORRELATED:
        discretizable = sum(
            1 for c in table.columns
            if bayesnet.discretize_column(c, privacy.histogram_size) is not None
        )
        if discretizable < 2:
            warnings.append(WARN_CORRELATED_DOWNGRADED)
            mode = Mode.INDEPENDENT

    network = None
    tables: tuple[ConditionalTable, ...] = ()
    structure_scale = None
    cpt_scale = None
    dist_scale = None  # Laplace scale for stored per-attribute distributions

    if mode is Mode.CORRELATED:
        eps_structure, eps_cpt = bayesnet.split_epsilon(eps)
        network = bayesnet.greedy_bayes(
            table, max_parents, eps_structure, seed, histogram_size=privacy.histogram_size
        )
        k_eff = min(network.k, network.d - 1)
        structure_scale = bayesnet.structure_noise_scale(network.d, n, eps_structure)
        cpt_scale = bayesnet.cpt_noise_scale(network.d, k_eff, n, eps_cpt)
        dist_scale = cpt_scale
    elif mode is Mode.INDEPENDENT and eps > 0:
        dist_scale = 1.0 / (n * eps)

    attributes: list[AttributeDescription] = []
    for index, column in enumerate(table.columns):
        rng = substream(seed, STREAM_DESCRIBE, index)
        attr = _base_attribute(column, mode)
        if mode is not Mode.RANDOM:
            dist = _empirical_distribution(column, privacy.histogram_size)
            if dist is not None and dist_scale:
                probs = noisy_probabilities(dist.probs(), dist_scale, rng)
                dist = Distribution(
                    dist.kind,
                    tuple(float(p) for p in probs),
                    labels=dist.labels,
                    edges=dist.edges,
                )
            attr = replace(attr, distribution=dist)
        attr = replace(attr, missing_rate=noisy_missing_rate(attr.missing_rate, eps, n, rng))
        attributes.append(attr)

    description = DatasetDescription(
        mode=mode,
        row_count=n,
        privacy=privacy,
        attributes=tuple(attributes),
        network=network,
        structure_noise_scale=structure_scale,
        cpt_noise_scale=cpt_scale,
        warnings=tuple(warnings),
    )

    if network is not None:
        eps_structure, eps_cpt = bayesnet.split_epsilon(eps)
        fallbacks = {
            a.name: a.distribution for a in attributes if a.distribution is not None
        }
        tables = tuple(
            bayesnet.conditional_distributions(
                table,
                network,
                eps_cpt,
                seed,
                histogram_size=privacy.histogram_size,
                fallbacks=fallbacks,
            )
        )
        description = replace(description, conditional_tables=tables)

    return description
