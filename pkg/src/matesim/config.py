"""Scenario configuration: defaults, YAML round-trip, validation.

The scenario file is a nested key-value tree. Every key is optional
(defaults reproduce the headline comparison setup: 10,000 agents, 50:50
gender split, 15:60:25 tier shares, a 100-step horizon, discount 0.95),
but unknown keys are rejected loudly at load time so typos cannot
silently fall back to defaults. A couple of key names associated with
features that are deliberately out of scope (multi-agent RL training,
LLM-driven agents) are recognised and rejected with a pointed
"unsupported" message rather than a generic one.

A run seed is mandatory: it may live in the file under simulation.seed
or arrive via the CLI, but a run with no seed at all is a config error,
never a silent wall-clock fallback.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Mapping

import yaml

from .errors import ConfigError
from .institutions import InstitutionRules, preset_rules

__all__ = [
    "AttributeParams",
    "PopulationConfig",
    "PreferenceWeights",
    "CompositeWeights",
    "MatchingConfig",
    "StrategyConfig",
    "RewardConfig",
    "LifecycleConfig",
    "SimulationConfig",
    "OptimizerConfig",
    "OutputConfig",
    "ScenarioConfig",
    "default_config",
    "scenario_from_dict",
    "load_config",
    "save_config",
    "config_hash",
    "config_base_hash",
]

# Config keys tied to out-of-scope features. Rejected wherever they appear.
_UNSUPPORTED_KEYS = {
    "marl_algorithm": "multi-agent RL training is not part of this simulator",
    "llm_agent_fraction": "LLM-driven agents are not part of this simulator",
}


class _Section:
    """Consume keys from one mapping level, rejecting leftovers."""

    def __init__(self, mapping: Mapping[str, Any] | None, path: str):
        if mapping is None:
            mapping = {}
        if not isinstance(mapping, Mapping):
            raise ConfigError(f"{path} must be a mapping, got {type(mapping).__name__}")
        self._m = dict(mapping)
        self._path = path
        for key, why in _UNSUPPORTED_KEYS.items():
            if key in self._m:
                raise ConfigError(f"config key {self._qual(key)!r} is unsupported: {why}")

    def _qual(self, key: str) -> str:
        return f"{self._path}.{key}" if self._path else key

    def take(self, key: str, default: Any) -> Any:
        return self._m.pop(key, default)

    def subsection(self, key: str) -> "_Section":
        return _Section(self._m.pop(key, {}), self._qual(key))

    def done(self) -> None:
        if self._m:
            extra = ", ".join(repr(self._qual(k)) for k in sorted(self._m))
            raise ConfigError(f"unknown config key(s): {extra}")


def _as_int(value: Any, path: str, lo: int | None = None, hi: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path} must be an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(f"{path} must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(f"{path} must be <= {hi}, got {value}")
    return value


def _as_float(value: Any, path: str, lo: float | None = None, hi: float | None = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path} must be a number, got {value!r}")
    value = float(value)
    if lo is not None and value < lo:
        raise ConfigError(f"{path} must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(f"{path} must be <= {hi}, got {value}")
    return value


def _as_bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{path} must be true or false, got {value!r}")
    return value


def _as_pair(value: Any, path: str) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{path} must be a pair, got {value!r}")
    return tuple(value)


# --- Section dataclasses -------------------------------------------------


@dataclass(frozen=True)
class AttributeParams:
    """Sampling parameters for initial agent attributes."""

    trait_beta: tuple[float, float] = (2.0, 2.0)
    wealth_mu: float = 0.0
    wealth_sigma: float = 0.8


@dataclass(frozen=True)
class PopulationConfig:
    size: int = 10_000
    gender_ratio: tuple[int, int] = (50, 50)
    tier_shares: tuple[int, int, int] = (15, 60, 25)
    initial_age_range: tuple[int, int] = (18, 60)
    attributes: AttributeParams = field(default_factory=AttributeParams)


@dataclass(frozen=True)
class PreferenceWeights:
    """Weights one observer gender places on a candidate's attributes.

    Weights are non-negative; the four attribute weights plus the
    novelty bonus are used as-is (they are not renormalised), so the
    defaults sum to 1 by construction.
    """

    mate_value: float
    resources: float
    fertility: float
    social_capital: float
    novelty: float = 0.0

    def __post_init__(self) -> None:
        for name in ("mate_value", "resources", "fertility", "social_capital", "novelty"):
            if getattr(self, name) < 0:
                raise ConfigError(f"preference weight {name} must be non-negative")


@dataclass(frozen=True)
class CompositeWeights:
    """Weights for the tiering composite score."""

    mate_value: float = 0.35
    resources: float = 0.25
    fertility: float = 0.20
    social_capital: float = 0.20


DEFAULT_MALE_PREFS = PreferenceWeights(
    mate_value=0.45, resources=0.10, fertility=0.25, social_capital=0.15, novelty=0.05
)
DEFAULT_FEMALE_PREFS = PreferenceWeights(
    mate_value=0.25, resources=0.35, fertility=0.05, social_capital=0.30, novelty=0.05
)


@dataclass(frozen=True)
class MatchingConfig:
    candidate_k: int = 16
    similarity_scale: float = 0.15
    age_scale: float = 8.0
    same_gender_allowed: bool = True
    same_gender_share: float = 0.15
    male_prefs: PreferenceWeights = field(default_factory=lambda: DEFAULT_MALE_PREFS)
    female_prefs: PreferenceWeights = field(default_factory=lambda: DEFAULT_FEMALE_PREFS)


@dataclass(frozen=True)
class StrategyConfig:
    """Initial strategy parameters, one reservation level per tier."""

    reservation_a: float = 0.55
    reservation_b: float = 0.40
    reservation_c: float = 0.25
    female_choosiness: float = 1.0
    companion_discount: float = 0.6
    proposal_budget: int = 3
    kind_preference: float = 0.6
    fertility_desire: float = 0.85
    dissolution_threshold: float = 0.12


@dataclass(frozen=True)
class RewardConfig:
    alpha: float = 1.0
    beta: float = 0.5
    delta: float = 0.25
    gamma: float = 0.95


@dataclass(frozen=True)
class LifecycleConfig:
    fecundity_peak: float = 0.35
    fecundity_ramp: float = 0.30
    fecundity_end_age: int = 45
    male_fertile_range: tuple[int, int] = (18, 65)
    crowding_rate: float = 0.35
    penalty_deterrence: float = 1.0
    child_attr_noise: float = 0.08
    max_age: int = 80
    elder_hazard: float = 0.005
    elder_hazard_age: int = 60
    tier_growth: tuple[float, float, float] = (1.06, 1.03, 1.01)
    base_income: tuple[float, float, float] = (0.12, 0.08, 0.055)
    consumption: float = 0.02
    consumption_rate: float = 0.045
    gift_rate: float = 0.05
    nest_egg: float = 0.10
    child_cost: float = 0.05
    spouse_cost_split: float = 0.6
    value_decline_rate: float = 0.01
    value_decline_age: int = 30


@dataclass(frozen=True)
class SimulationConfig:
    horizon: int = 100
    seed: int | None = None
    tfr_window: int = 10
    compare_window: int = 10
    check_invariants: bool = True


@dataclass(frozen=True)
class OptimizerConfig:
    population_size: int = 24
    generations: int = 40
    tournament_k: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 0.25
    eval_seeds: int = 3
    fitness_weights: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    figures: bool = True


@dataclass(frozen=True)
class ScenarioConfig:
    population: PopulationConfig = field(default_factory=PopulationConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    institution: InstitutionRules = field(default_factory=lambda: preset_rules("sps"))
    matching: MatchingConfig = field(default_factory=MatchingConfig)
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    lifecycle: LifecycleConfig = field(default_factory=LifecycleConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def male_count(self) -> int:
        return self.population.size * self.population.gender_ratio[0] // 100


def default_config() -> ScenarioConfig:
    return ScenarioConfig()


# --- Parsing --------------------------------------------------------------


def _parse_population(sec: _Section) -> PopulationConfig:
    size = _as_int(sec.take("size", 10_000), "population.size", lo=2)
    ratio = _as_pair(sec.take("gender_ratio", [50, 50]), "population.gender_ratio")
    ratio = tuple(_as_int(v, "population.gender_ratio", lo=0) for v in ratio)
    if sum(ratio) != 100:
        raise ConfigError(f"population.gender_ratio must sum to 100, got {list(ratio)}")
    shares_raw = sec.take("tier_shares", [15, 60, 25])
    if not isinstance(shares_raw, (list, tuple)) or len(shares_raw) != 3:
        raise ConfigError(f"population.tier_shares must be three integers, got {shares_raw!r}")
    shares = tuple(_as_int(v, "population.tier_shares", lo=0) for v in shares_raw)
    if sum(shares) != 100:
        raise ConfigError(f"population.tier_shares must sum to 100, got {list(shares)}")
    ages = _as_pair(sec.take("initial_age_range", [18, 60]), "population.initial_age_range")
    ages = tuple(_as_int(v, "population.initial_age_range", lo=0) for v in ages)
    if ages[0] > ages[1]:
        raise ConfigError("population.initial_age_range must be (low, high) with low <= high")
    attrs_sec = sec.subsection("attributes")
    beta = _as_pair(attrs_sec.take("trait_beta", [2.0, 2.0]), "population.attributes.trait_beta")
    beta = tuple(
        _as_float(v, "population.attributes.trait_beta", lo=1e-9) for v in beta
    )
    mu = _as_float(attrs_sec.take("wealth_mu", 0.0), "population.attributes.wealth_mu")
    sigma = _as_float(
        attrs_sec.take("wealth_sigma", 0.8), "population.attributes.wealth_sigma", lo=0.0
    )
    attrs_sec.done()
    sec.done()
    return PopulationConfig(
        size=size,
        gender_ratio=ratio,
        tier_shares=shares,
        initial_age_range=ages,
        attributes=AttributeParams(trait_beta=beta, wealth_mu=mu, wealth_sigma=sigma),
    )


def _parse_prefs(sec: _Section, path: str, default: PreferenceWeights) -> PreferenceWeights:
    return PreferenceWeights(
        mate_value=_as_float(sec.take("mate_value", default.mate_value), f"{path}.mate_value", lo=0.0),
        resources=_as_float(sec.take("resources", default.resources), f"{path}.resources", lo=0.0),
        fertility=_as_float(sec.take("fertility", default.fertility), f"{path}.fertility", lo=0.0),
        social_capital=_as_float(
            sec.take("social_capital", default.social_capital), f"{path}.social_capital", lo=0.0
        ),
        novelty=_as_float(sec.take("novelty", default.novelty), f"{path}.novelty", lo=0.0),
    )


def _parse_matching(sec: _Section) -> MatchingConfig:
    k = _as_int(sec.take("candidate_k", 16), "matching.candidate_k", lo=1)
    scale = _as_float(sec.take("similarity_scale", 0.15), "matching.similarity_scale", lo=1e-9)
    age_scale = _as_float(sec.take("age_scale", 8.0), "matching.age_scale", lo=1e-9)
    same_gender = _as_bool(sec.take("same_gender_allowed", True), "matching.same_gender_allowed")
    share = _as_float(
        sec.take("same_gender_share", 0.15), "matching.same_gender_share", lo=0.0, hi=1.0
    )
    prefs_sec = sec.subsection("preferences")
    male_sec = prefs_sec.subsection("male")
    male = _parse_prefs(male_sec, "matching.preferences.male", DEFAULT_MALE_PREFS)
    male_sec.done()
    female_sec = prefs_sec.subsection("female")
    female = _parse_prefs(female_sec, "matching.preferences.female", DEFAULT_FEMALE_PREFS)
    female_sec.done()
    prefs_sec.done()
    sec.done()
    return MatchingConfig(
        candidate_k=k,
        similarity_scale=scale,
        age_scale=age_scale,
        same_gender_allowed=same_gender,
        same_gender_share=share,
        male_prefs=male,
        female_prefs=female,
    )


def _parse_strategy(sec: _Section) -> StrategyConfig:
    res_sec = sec.subsection("reservations")
    res_a = _as_float(res_sec.take("A", 0.55), "strategy.reservations.A", lo=0.0, hi=1.0)
    res_b = _as_float(res_sec.take("B", 0.40), "strategy.reservations.B", lo=0.0, hi=1.0)
    res_c = _as_float(res_sec.take("C", 0.25), "strategy.reservations.C", lo=0.0, hi=1.0)
    res_sec.done()
    cfg = StrategyConfig(
        reservation_a=res_a,
        reservation_b=res_b,
        reservation_c=res_c,
        female_choosiness=_as_float(
            sec.take("female_choosiness", 1.0), "strategy.female_choosiness", lo=0.0, hi=2.0
        ),
        companion_discount=_as_float(
            sec.take("companion_discount", 0.6), "strategy.companion_discount", lo=0.0, hi=1.0
        ),
        proposal_budget=_as_int(sec.take("proposal_budget", 3), "strategy.proposal_budget", lo=0, hi=5),
        kind_preference=_as_float(
            sec.take("kind_preference", 0.6), "strategy.kind_preference", lo=0.0, hi=1.0
        ),
        fertility_desire=_as_float(
            sec.take("fertility_desire", 0.85), "strategy.fertility_desire", lo=0.0, hi=1.0
        ),
        dissolution_threshold=_as_float(
            sec.take("dissolution_threshold", 0.12), "strategy.dissolution_threshold", lo=0.0, hi=1.0
        ),
    )
    sec.done()
    return cfg


def _parse_reward(sec: _Section) -> RewardConfig:
    cfg = RewardConfig(
        alpha=_as_float(sec.take("alpha", 1.0), "reward.alpha"),
        beta=_as_float(sec.take("beta", 0.5), "reward.beta"),
        delta=_as_float(sec.take("delta", 0.25), "reward.delta"),
        gamma=_as_float(sec.take("gamma", 0.95), "reward.gamma", lo=0.0, hi=1.0),
    )
    sec.done()
    return cfg


def _parse_lifecycle(sec: _Section) -> LifecycleConfig:
    growth_sec = sec.subsection("tier_growth")
    growth = (
        _as_float(growth_sec.take("A", 1.06), "lifecycle.tier_growth.A", lo=0.0),
        _as_float(growth_sec.take("B", 1.03), "lifecycle.tier_growth.B", lo=0.0),
        _as_float(growth_sec.take("C", 1.01), "lifecycle.tier_growth.C", lo=0.0),
    )
    growth_sec.done()
    income_sec = sec.subsection("base_income")
    base_income = (
        _as_float(income_sec.take("A", 0.12), "lifecycle.base_income.A", lo=0.0),
        _as_float(income_sec.take("B", 0.08), "lifecycle.base_income.B", lo=0.0),
        _as_float(income_sec.take("C", 0.055), "lifecycle.base_income.C", lo=0.0),
    )
    income_sec.done()
    male_range = _as_pair(sec.take("male_fertile_range", [18, 65]), "lifecycle.male_fertile_range")
    male_range = tuple(_as_int(v, "lifecycle.male_fertile_range", lo=0) for v in male_range)
    cfg = LifecycleConfig(
        fecundity_peak=_as_float(sec.take("fecundity_peak", 0.35), "lifecycle.fecundity_peak", lo=0.0, hi=1.0),
        fecundity_ramp=_as_float(sec.take("fecundity_ramp", 0.30), "lifecycle.fecundity_ramp", lo=0.0, hi=1.0),
        fecundity_end_age=_as_int(sec.take("fecundity_end_age", 45), "lifecycle.fecundity_end_age", lo=18),
        male_fertile_range=male_range,
        crowding_rate=_as_float(sec.take("crowding_rate", 0.35), "lifecycle.crowding_rate", lo=0.0, hi=1.0),
        penalty_deterrence=_as_float(
            sec.take("penalty_deterrence", 1.0), "lifecycle.penalty_deterrence", lo=0.0
        ),
        child_attr_noise=_as_float(sec.take("child_attr_noise", 0.08), "lifecycle.child_attr_noise", lo=0.0),
        max_age=_as_int(sec.take("max_age", 80), "lifecycle.max_age", lo=1),
        elder_hazard=_as_float(sec.take("elder_hazard", 0.005), "lifecycle.elder_hazard", lo=0.0, hi=1.0),
        elder_hazard_age=_as_int(sec.take("elder_hazard_age", 60), "lifecycle.elder_hazard_age", lo=0),
        tier_growth=growth,
        base_income=base_income,
        consumption=_as_float(sec.take("consumption", 0.02), "lifecycle.consumption", lo=0.0),
        consumption_rate=_as_float(
            sec.take("consumption_rate", 0.045), "lifecycle.consumption_rate", lo=0.0, hi=1.0
        ),
        gift_rate=_as_float(sec.take("gift_rate", 0.05), "lifecycle.gift_rate", lo=0.0, hi=1.0),
        nest_egg=_as_float(sec.take("nest_egg", 0.10), "lifecycle.nest_egg", lo=0.0, hi=1.0),
        child_cost=_as_float(sec.take("child_cost", 0.05), "lifecycle.child_cost", lo=0.0),
        spouse_cost_split=_as_float(
            sec.take("spouse_cost_split", 0.6), "lifecycle.spouse_cost_split", lo=0.0, hi=1.0
        ),
        value_decline_rate=_as_float(
            sec.take("value_decline_rate", 0.01), "lifecycle.value_decline_rate", lo=0.0, hi=1.0
        ),
        value_decline_age=_as_int(sec.take("value_decline_age", 30), "lifecycle.value_decline_age", lo=0),
    )
    sec.done()
    return cfg


def _parse_simulation(sec: _Section) -> SimulationConfig:
    seed = sec.take("seed", None)
    if seed is not None:
        seed = _as_int(seed, "simulation.seed", lo=0)
    cfg = SimulationConfig(
        horizon=_as_int(sec.take("horizon", 100), "simulation.horizon", lo=1),
        seed=seed,
        tfr_window=_as_int(sec.take("tfr_window", 10), "simulation.tfr_window", lo=1),
        compare_window=_as_int(sec.take("compare_window", 10), "simulation.compare_window", lo=1),
        check_invariants=_as_bool(sec.take("check_invariants", True), "simulation.check_invariants"),
    )
    sec.done()
    return cfg


def _parse_institution(sec: _Section) -> InstitutionRules:
    preset = sec.take("preset", "sps")
    if not isinstance(preset, str):
        raise ConfigError(f"institution.preset must be a string, got {preset!r}")
    base = preset_rules(preset)
    overrides = {}
    for key, caster in (
        ("spouse_cap", lambda v: _as_int(v, "institution.spouse_cap", lo=0)),
        ("companion_cap", lambda v: _as_int(v, "institution.companion_cap", lo=0)),
        ("total_cap", lambda v: _as_int(v, "institution.total_cap", lo=1)),
        ("rearing_subsidy", lambda v: _as_float(v, "institution.rearing_subsidy", lo=0.0, hi=1.0)),
        (
            "motherhood_penalty_rate",
            lambda v: _as_float(v, "institution.motherhood_penalty_rate", lo=0.0, hi=1.0),
        ),
        ("divorce_hazard", lambda v: _as_float(v, "institution.divorce_hazard", lo=0.0, hi=1.0)),
        ("companion_inheritance", lambda v: _as_bool(v, "institution.companion_inheritance")),
        ("gender_symmetric", lambda v: _as_bool(v, "institution.gender_symmetric")),
    ):
        sentinel = object()
        value = sec.take(key, sentinel)
        if value is not sentinel:
            overrides[key] = caster(value)
    sec.done()
    if overrides:
        candidate = base.with_overrides(**overrides)
        if candidate == base:
            return base
        return candidate.with_overrides(name="custom")
    return base


def _parse_optimizer(sec: _Section) -> OptimizerConfig:
    weights_sec = sec.subsection("fitness_weights")
    weights = (
        _as_float(weights_sec.take("tfr", 1.0), "optimizer.fitness_weights.tfr", lo=0.0),
        _as_float(weights_sec.take("welfare", 1.0), "optimizer.fitness_weights.welfare", lo=0.0),
        _as_float(weights_sec.take("stability", 1.0), "optimizer.fitness_weights.stability", lo=0.0),
        _as_float(weights_sec.take("gini", 1.0), "optimizer.fitness_weights.gini", lo=0.0),
    )
    weights_sec.done()
    cfg = OptimizerConfig(
        population_size=_as_int(sec.take("population_size", 24), "optimizer.population_size", lo=2),
        generations=_as_int(sec.take("generations", 40), "optimizer.generations", lo=1),
        tournament_k=_as_int(sec.take("tournament_k", 3), "optimizer.tournament_k", lo=1),
        crossover_rate=_as_float(sec.take("crossover_rate", 0.9), "optimizer.crossover_rate", lo=0.0, hi=1.0),
        mutation_rate=_as_float(sec.take("mutation_rate", 0.25), "optimizer.mutation_rate", lo=0.0, hi=1.0),
        eval_seeds=_as_int(sec.take("eval_seeds", 3), "optimizer.eval_seeds", lo=1),
        fitness_weights=weights,
    )
    sec.done()
    return cfg


def _parse_output(sec: _Section) -> OutputConfig:
    cfg = OutputConfig(
        directory=str(sec.take("directory", "out")),
        figures=_as_bool(sec.take("figures", True), "output.figures"),
    )
    sec.done()
    return cfg


def scenario_from_dict(raw: Mapping[str, Any] | None) -> ScenarioConfig:
    top = _Section(raw, "")
    cfg = ScenarioConfig(
        population=_parse_population(top.subsection("population")),
        simulation=_parse_simulation(top.subsection("simulation")),
        institution=_parse_institution(top.subsection("institution")),
        matching=_parse_matching(top.subsection("matching")),
        strategy=_parse_strategy(top.subsection("strategy")),
        reward=_parse_reward(top.subsection("reward")),
        lifecycle=_parse_lifecycle(top.subsection("lifecycle")),
        optimizer=_parse_optimizer(top.subsection("optimizer")),
        output=_parse_output(top.subsection("output")),
    )
    top.done()
    return cfg


def load_config(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if raw is None:
        raw = {}
    if not isinstance(raw, Mapping):
        raise ConfigError(f"config root must be a mapping, got {type(raw).__name__}")
    return scenario_from_dict(raw)


# --- Serialisation --------------------------------------------------------


def _prefs_dict(p: PreferenceWeights) -> dict:
    return {
        "mate_value": p.mate_value,
        "resources": p.resources,
        "fertility": p.fertility,
        "social_capital": p.social_capital,
        "novelty": p.novelty,
    }


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    """Full explicit tree, suitable for re-loading and for hashing."""
    pop, sim, inst = cfg.population, cfg.simulation, cfg.institution
    mat, strat, rew, life, opt, out = (
        cfg.matching,
        cfg.strategy,
        cfg.reward,
        cfg.lifecycle,
        cfg.optimizer,
        cfg.output,
    )
    return {
        "population": {
            "size": pop.size,
            "gender_ratio": list(pop.gender_ratio),
            "tier_shares": list(pop.tier_shares),
            "initial_age_range": list(pop.initial_age_range),
            "attributes": {
                "trait_beta": list(pop.attributes.trait_beta),
                "wealth_mu": pop.attributes.wealth_mu,
                "wealth_sigma": pop.attributes.wealth_sigma,
            },
        },
        "simulation": {
            "horizon": sim.horizon,
            "seed": sim.seed,
            "tfr_window": sim.tfr_window,
            "compare_window": sim.compare_window,
            "check_invariants": sim.check_invariants,
        },
        "institution": {
            "preset": inst.name if inst.name in ("sps", "monogamy") else "sps",
            "spouse_cap": inst.spouse_cap,
            "companion_cap": inst.companion_cap,
            "total_cap": inst.total_cap,
            "rearing_subsidy": inst.rearing_subsidy,
            "motherhood_penalty_rate": inst.motherhood_penalty_rate,
            "divorce_hazard": inst.divorce_hazard,
            "companion_inheritance": inst.companion_inheritance,
            "gender_symmetric": inst.gender_symmetric,
        },
        "matching": {
            "candidate_k": mat.candidate_k,
            "similarity_scale": mat.similarity_scale,
            "age_scale": mat.age_scale,
            "same_gender_allowed": mat.same_gender_allowed,
            "same_gender_share": mat.same_gender_share,
            "preferences": {
                "male": _prefs_dict(mat.male_prefs),
                "female": _prefs_dict(mat.female_prefs),
            },
        },
        "strategy": {
            "reservations": {
                "A": strat.reservation_a,
                "B": strat.reservation_b,
                "C": strat.reservation_c,
            },
            "female_choosiness": strat.female_choosiness,
            "companion_discount": strat.companion_discount,
            "proposal_budget": strat.proposal_budget,
            "kind_preference": strat.kind_preference,
            "fertility_desire": strat.fertility_desire,
            "dissolution_threshold": strat.dissolution_threshold,
        },
        "reward": {"alpha": rew.alpha, "beta": rew.beta, "delta": rew.delta, "gamma": rew.gamma},
        "lifecycle": {
            "fecundity_peak": life.fecundity_peak,
            "fecundity_ramp": life.fecundity_ramp,
            "fecundity_end_age": life.fecundity_end_age,
            "male_fertile_range": list(life.male_fertile_range),
            "crowding_rate": life.crowding_rate,
            "penalty_deterrence": life.penalty_deterrence,
            "child_attr_noise": life.child_attr_noise,
            "max_age": life.max_age,
            "elder_hazard": life.elder_hazard,
            "elder_hazard_age": life.elder_hazard_age,
            "tier_growth": {
                "A": life.tier_growth[0],
                "B": life.tier_growth[1],
                "C": life.tier_growth[2],
            },
            "base_income": {
                "A": life.base_income[0],
                "B": life.base_income[1],
                "C": life.base_income[2],
            },
            "consumption": life.consumption,
            "consumption_rate": life.consumption_rate,
            "gift_rate": life.gift_rate,
            "nest_egg": life.nest_egg,
            "child_cost": life.child_cost,
            "spouse_cost_split": life.spouse_cost_split,
            "value_decline_rate": life.value_decline_rate,
            "value_decline_age": life.value_decline_age,
        },
        "optimizer": {
            "population_size": opt.population_size,
            "generations": opt.generations,
            "tournament_k": opt.tournament_k,
            "crossover_rate": opt.crossover_rate,
            "mutation_rate": opt.mutation_rate,
            "eval_seeds": opt.eval_seeds,
            "fitness_weights": {
                "tfr": opt.fitness_weights[0],
                "welfare": opt.fitness_weights[1],
                "stability": opt.fitness_weights[2],
                "gini": opt.fitness_weights[3],
            },
        },
        "output": {"directory": out.directory, "figures": out.figures},
    }


def save_config(cfg: ScenarioConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(scenario_to_dict(cfg), fh, sort_keys=True)


def config_hash(cfg: ScenarioConfig) -> str:
    """Stable hash of everything that affects simulated results.

    The output section (target directory, figure toggle) is excluded:
    two runs that differ only in where files land stay comparable.
    """
    tree = scenario_to_dict(cfg)
    tree.pop("output", None)
    blob = json.dumps(tree, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def config_base_hash(cfg: ScenarioConfig) -> str:
    """Hash of the scenario with the institution (and output) excluded.

    Paired runs of different institutions over the same seed share this
    value; the fairness audit uses it to reject mismatched pairings.
    """
    tree = scenario_to_dict(cfg)
    tree.pop("output", None)
    tree.pop("institution", None)
    blob = json.dumps(tree, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
