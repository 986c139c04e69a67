"""matesim: deterministic agent-based simulator of mating-market institutions.

Compares a capped-polyamory institution (one spouse plus up to two
companions) against a strict-monogamy baseline over multi-decade
horizons, tracking tiered welfare, fertility, wealth dispersion,
stability, fairness, and network structure, with a genetic-algorithm
search over the institution's policy levers.
"""

from .config import ScenarioConfig, default_config, load_config, save_config
from .engine import ComparisonReport, RunRecord, compare, run
from .errors import (
    ComparabilityError,
    ConfigError,
    EvaluationError,
    IntegrityError,
    InvariantError,
    MatesimError,
)
from .institutions import InstitutionRules, preset_rules
from .metrics import FairnessReport, MetricsFrame, fairness_audit, gini, stability_proxy
from .network import MatingGraph, snapshot
from .optimizer import FitnessWeights, OptimizeResult, PolicyGenome, optimize
from .population import Agent, Gender, Population, Tier, init_population
from .strategy import StrategyParams, discounted_reward

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Agent",
    "ComparabilityError",
    "ComparisonReport",
    "ConfigError",
    "EvaluationError",
    "FairnessReport",
    "FitnessWeights",
    "Gender",
    "InstitutionRules",
    "IntegrityError",
    "InvariantError",
    "MatesimError",
    "MatingGraph",
    "MetricsFrame",
    "OptimizeResult",
    "PolicyGenome",
    "Population",
    "RunRecord",
    "ScenarioConfig",
    "StrategyParams",
    "Tier",
    "compare",
    "default_config",
    "discounted_reward",
    "fairness_audit",
    "gini",
    "init_population",
    "load_config",
    "optimize",
    "preset_rules",
    "run",
    "save_config",
    "snapshot",
    "stability_proxy",
]
