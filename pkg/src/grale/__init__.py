"""Granular association rules over user/item data, for cold-start
recommendation and its evaluation."""

from .model import (
    AttributeSchema,
    BinaryRelation,
    DiscretizationSpec,
    GraleError,
    InformationSystem,
    IngestionError,
    MMER,
    ReferentialIntegrityError,
    SchemaMismatchError,
    discretize,
    scale_multivalued,
)
from .granules import (
    Descriptor,
    Granule,
    GranuleSet,
    enumerate_granules,
    extent,
    extent_mask,
    support,
)
from .rules import (
    GranularRule,
    MiningParams,
    Provenance,
    RuleMeasures,
    RuleSet,
    load_rules,
    mine,
    save_rules,
    scov,
    sconf,
    tcov,
)
from .recommend import (
    AccuracyReport,
    RecommendationSet,
    random_recommend,
    recommend,
    recommendations_csv,
    score,
)
from .evaluate import (
    ExperimentConfig,
    ExperimentReport,
    Scenario,
    SplitSpec,
    report_csv,
    run_experiment,
    split_both,
    split_items,
    split_users,
    sweep,
    sweep_csv,
)
from .loaders import dump_generic, load_data, load_generic, load_movielens
from .seeds import derive_seed

__version__ = "0.1.0"

__all__ = [
    "AttributeSchema",
    "BinaryRelation",
    "DiscretizationSpec",
    "GraleError",
    "InformationSystem",
    "IngestionError",
    "MMER",
    "ReferentialIntegrityError",
    "SchemaMismatchError",
    "discretize",
    "scale_multivalued",
    "Descriptor",
    "Granule",
    "GranuleSet",
    "enumerate_granules",
    "extent",
    "extent_mask",
    "support",
    "GranularRule",
    "MiningParams",
    "Provenance",
    "RuleMeasures",
    "RuleSet",
    "load_rules",
    "mine",
    "save_rules",
    "scov",
    "sconf",
    "tcov",
    "AccuracyReport",
    "RecommendationSet",
    "random_recommend",
    "recommend",
    "recommendations_csv",
    "score",
    "ExperimentConfig",
    "ExperimentReport",
    "Scenario",
    "SplitSpec",
    "report_csv",
    "run_experiment",
    "split_both",
    "split_items",
    "split_users",
    "sweep",
    "sweep_csv",
    "dump_generic",
    "load_data",
    "load_generic",
    "load_movielens",
    "derive_seed",
    "__version__",
]
