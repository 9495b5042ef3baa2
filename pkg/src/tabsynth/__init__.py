"""tabsynth: privacy-preserving synthetic tabular data.

Pipeline: load a CSV (:mod:`tabsynth.ingest`), build a dataset description
in one of three fidelity modes (:mod:`tabsynth.describer`, with
:mod:`tabsynth.bayesnet` supplying the correlated-mode network), sample
synthetic tables from it (:mod:`tabsynth.generator`), and quantify the
before/after similarity (:mod:`tabsynth.inspector`).  Side quests:
linkable table pairs (:mod:`tabsynth.linker`) and adversarial probes
(:mod:`tabsynth.probegen`).
"""

from .bayesnet import (
    BayesianNetwork,
    ConditionalTable,
    conditional_distributions,
    cpt_noise_scale,
    greedy_bayes,
    mi_sensitivity,
    mutual_information,
    split_epsilon,
)
from .describer import (
    AttributeDescription,
    DatasetDescription,
    Mode,
    PrivacyParams,
    describe,
    noisy_missing_rate,
)
from .distributions import Distribution, add_laplace_noise, build_frequency, build_histogram
from .generator import GenerationRequest, generate, sample_value
from .ingest import (
    AttributeOverride,
    Column,
    DataType,
    Table,
    detect_categorical,
    infer_type,
    load_csv,
    missing_rate,
)
from .inspector import (
    ComparisonReport,
    compare,
    correlation_coefficient,
    head_tail,
    kl_divergence,
    mi_matrix,
)
from .linker import JoinEstimate, Signature, estimate_join, generate_linked, lsh_signature
from .probegen import (
    ClusterSpec,
    PathologyRule,
    ProbeSpec,
    generate_fairness_cluster,
    inject_pathology,
    override_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeDescription",
    "AttributeOverride",
    "BayesianNetwork",
    "ClusterSpec",
    "Column",
    "ComparisonReport",
    "ConditionalTable",
    "DataType",
    "DatasetDescription",
    "Distribution",
    "GenerationRequest",
    "JoinEstimate",
    "Mode",
    "PathologyRule",
    "PrivacyParams",
    "ProbeSpec",
    "Signature",
    "Table",
    "add_laplace_noise",
    "build_frequency",
    "build_histogram",
    "compare",
    "conditional_distributions",
    "correlation_coefficient",
    "cpt_noise_scale",
    "describe",
    "detect_categorical",
    "estimate_join",
    "generate",
    "generate_fairness_cluster",
    "generate_linked",
    "greedy_bayes",
    "head_tail",
    "infer_type",
    "inject_pathology",
    "kl_divergence",
    "load_csv",
    "lsh_signature",
    "mi_matrix",
    "mi_sensitivity",
    "missing_rate",
    "mutual_information",
    "noisy_missing_rate",
    "override_distribution",
    "sample_value",
    "split_epsilon",
]
