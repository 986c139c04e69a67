"""Agents, attributes, relationships, and the population container.

Each agent carries a compact attribute vector: mate value, resources
(the wealth store), current fertility, social capital, gender, and a
life stage derived from age. Continuous attributes live in [0, 1]
except resources, which is an unbounded non-negative stock. Fertility
has an innate component fixed at birth; the effective value is the
innate level scaled by an age factor, so it decays toward zero over the
reproductive window rather than drifting randomly.

Tier membership (A/B/C) is relative: agents are ranked by a composite
score each step and the top/middle/bottom percentile bands get the
tiers, so nobody holds a tier by right. Ties on the composite break
toward the lower agent id to keep runs reproducible.

Ordering convention used throughout the simulator: any iteration over
agents that consumes randomness walks ids in ascending order, which is
what makes seeded runs byte-for-byte reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

import numpy as np

from .config import CompositeWeights, ScenarioConfig
from .errors import ConfigError

__all__ = [
    "Gender",
    "LifeStage",
    "Tier",
    "RelationshipKind",
    "AttributeVector",
    "Relationship",
    "Agent",
    "Population",
    "clamp01",
    "life_stage_for",
    "wealth_percentiles",
    "composite_score",
    "assign_tiers",
    "reassign_tiers",
    "init_population",
]


class Gender(str, Enum):
    MALE = "M"
    FEMALE = "F"


class Tier(str, Enum):
    A = "A"
    B = "B"
    C = "C"


class LifeStage(str, Enum):
    YOUTH = "youth"      # under 18: outside the market entirely
    ADULT = "adult"      # 18-39
    MATURE = "mature"    # 40-64
    ELDER = "elder"      # 65 and up


class RelationshipKind(str, Enum):
    SPOUSE = "spouse"
    COMPANION = "companion"


def clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def life_stage_for(age: int) -> LifeStage:
    if age < 18:
        return LifeStage.YOUTH
    if age < 40:
        return LifeStage.ADULT
    if age < 65:
        return LifeStage.MATURE
    return LifeStage.ELDER


@dataclass
class AttributeVector:
    """Continuous attributes of one agent.

    mate_value, fertility, and social_capital are clamped to [0, 1];
    resources is a non-negative stock (wealth) with no upper bound.
    """

    mate_value: float
    resources: float
    fertility: float
    social_capital: float

    def clamp(self) -> None:
        self.mate_value = clamp01(self.mate_value)
        self.fertility = clamp01(self.fertility)
        self.social_capital = clamp01(self.social_capital)
        if self.resources < 0.0:
            self.resources = 0.0


@dataclass(eq=False)
class Relationship:
    """One edge of the mating graph, shared by both endpoint agents.

    The same object instance is stored in both agents' partner lists,
    which makes the symmetry invariant cheap to maintain: dissolving an
    edge removes one object from two lists. partner_a is the proposer
    at formation time; use other()/utility_for() rather than relying on
    slot order.
    """

    kind: RelationshipKind
    partner_a: int
    partner_b: int
    start_step: int
    utility_a: float
    utility_b: float

    def other(self, agent_id: int) -> int:
        if agent_id == self.partner_a:
            return self.partner_b
        if agent_id == self.partner_b:
            return self.partner_a
        raise KeyError(f"agent {agent_id} is not part of this relationship")

    def utility_for(self, agent_id: int) -> float:
        if agent_id == self.partner_a:
            return self.utility_a
        if agent_id == self.partner_b:
            return self.utility_b
        raise KeyError(f"agent {agent_id} is not part of this relationship")


@dataclass(eq=False)
class Agent:
    id: int
    age: int
    gender: Gender
    attrs: AttributeVector
    innate_fertility: float
    tier: Tier = Tier.C
    spouses: list[Relationship] = field(default_factory=list)
    companions: list[Relationship] = field(default_factory=list)
    children: list[int] = field(default_factory=list)
    parents: tuple[int, int] | None = None
    born_via: RelationshipKind | None = None
    past_partners: set[int] = field(default_factory=set)
    welfare_history: list[float] = field(default_factory=list)
    alive: bool = True

    @property
    def wealth(self) -> float:
        return self.attrs.resources

    @wealth.setter
    def wealth(self, value: float) -> None:
        self.attrs.resources = max(0.0, value)

    @property
    def life_stage(self) -> LifeStage:
        return life_stage_for(self.age)

    @property
    def is_adult(self) -> bool:
        return self.age >= 18

    @property
    def spouse(self) -> Relationship | None:
        return self.spouses[0] if self.spouses else None

    @property
    def partner_count(self) -> int:
        return len(self.spouses) + len(self.companions)

    @property
    def partner_ids(self) -> list[int]:
        return [rel.other(self.id) for rel in self.spouses + self.companions]

    def relationships(self) -> list[Relationship]:
        return self.spouses + self.companions


class Population:
    """Ordered collection of agents plus the run's random generator.

    Agents are kept forever (the dead stay, flagged alive=False) so
    that ids remain stable for inheritance bookkeeping and audits.
    Iteration yields living and dead alike in ascending id order; the
    living()/living_adults() helpers filter.
    """

    def __init__(self, rng: np.random.Generator):
        self.agents: dict[int, Agent] = {}
        self.rng = rng
        self.step = 0
        self._next_id = 0

    def new_id(self) -> int:
        nid = self._next_id
        self._next_id += 1
        return nid

    def add(self, agent: Agent) -> None:
        if agent.id in self.agents:
            raise ValueError(f"duplicate agent id {agent.id}")
        self.agents[agent.id] = agent
        if agent.id >= self._next_id:
            self._next_id = agent.id + 1

    def agent(self, agent_id: int) -> Agent:
        return self.agents[agent_id]

    def __len__(self) -> int:
        return len(self.agents)

    def __iter__(self) -> Iterator[Agent]:
        return iter(self.agents.values())

    def living(self) -> list[Agent]:
        return [a for a in self.agents.values() if a.alive]

    def living_adults(self) -> list[Agent]:
        return [a for a in self.agents.values() if a.alive and a.is_adult]

    def relationships(self) -> list[Relationship]:
        """Every current edge exactly once, ordered by (min id, max id, kind)."""
        seen: list[Relationship] = []
        for agent in self.agents.values():
            if not agent.alive:
                continue
            for rel in agent.relationships():
                if agent.id == min(rel.partner_a, rel.partner_b):
                    seen.append(rel)
        seen.sort(key=lambda r: (min(r.partner_a, r.partner_b),
                                 max(r.partner_a, r.partner_b),
                                 r.kind.value))
        return seen


# --- Scores, percentiles, tiers -------------------------------------------


def wealth_percentiles(agents: list[Agent]) -> dict[int, float]:
    """Percentile of each agent's wealth among the given agents, in [0, 1].

    Ties share the average rank of their group, so equal wealth always
    means equal percentile regardless of id. A single agent sits at 0.5.
    """
    n = len(agents)
    if n == 0:
        return {}
    if n == 1:
        return {agents[0].id: 0.5}
    values = np.array([a.wealth for a in agents], dtype=np.float64)
    uniq, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    group_start = np.cumsum(counts) - counts
    mean_rank = group_start + (counts - 1) / 2.0
    pct = mean_rank[inverse] / (n - 1)
    return {a.id: float(p) for a, p in zip(agents, pct)}


def cohort_wealth_percentiles(
    agents: list[Agent], band_width: int = 10, adult_age: int = 18
) -> dict[int, float]:
    """Wealth percentile of each agent within their own age band.

    Mate-choice comparisons judge a candidate's resources against age
    peers (a young adult's standing among other young adults), so the
    market does not rank every young agent below every older one.
    Bands are band_width years wide starting at adult_age.
    """
    groups: dict[int, list[Agent]] = {}
    for a in agents:
        band = max(a.age - adult_age, 0) // band_width
        groups.setdefault(band, []).append(a)
    pct: dict[int, float] = {}
    for members in groups.values():
        pct.update(wealth_percentiles(members))
    return pct


def composite_score(
    attrs: AttributeVector, wealth_pct: float, weights: CompositeWeights | None = None
) -> float:
    """Tiering score: weighted sum of mate value, wealth percentile,
    fertility, and social capital. Wealth enters as a percentile so the
    unbounded resource stock cannot swamp the bounded traits."""
    w = weights or CompositeWeights()
    return (
        w.mate_value * attrs.mate_value
        + w.resources * wealth_pct
        + w.fertility * attrs.fertility
        + w.social_capital * attrs.social_capital
    )


def assign_tiers(
    pop: Population,
    shares: tuple[int, int, int] = (15, 60, 25),
    weights: CompositeWeights | None = None,
) -> Population:
    """Rank living agents by composite score and hand out tier bands.

    Share counts: A gets floor(share_a * n / 100), C gets the analogous
    floor, B absorbs the remainder. Ties on the score go to the lower
    id. Dead agents keep whatever tier they died with.
    """
    living = pop.living()
    n = len(living)
    if n == 0:
        return pop
    pcts = wealth_percentiles(living)
    scores = np.array(
        [composite_score(a.attrs, pcts[a.id], weights) for a in living], dtype=np.float64
    )
    ids = np.array([a.id for a in living], dtype=np.int64)
    order = np.lexsort((ids, -scores))  # descending score, lower id first on ties
    n_a = shares[0] * n // 100
    n_c = shares[2] * n // 100
    n_b = n - n_a - n_c
    for pos, idx in enumerate(order):
        agent = living[idx]
        if pos < n_a:
            agent.tier = Tier.A
        elif pos < n_a + n_b:
            agent.tier = Tier.B
        else:
            agent.tier = Tier.C
    return pop


def reassign_tiers(pop: Population, config: ScenarioConfig) -> Population:
    return assign_tiers(pop, config.population.tier_shares, CompositeWeights())


# --- Initialisation --------------------------------------------------------


def female_age_factor(age: int, cfg: ScenarioConfig) -> float:
    """Age multiplier applied to a woman's innate fertility.

    Flat ramp below 20, a plateau through the twenties, then a linear
    slide to zero at the end of the fecund window. Normalised so the
    plateau maps innate fertility through unchanged.
    """
    life = cfg.lifecycle
    if age < 18 or age >= life.fecundity_end_age:
        return 0.0
    if age < 20:
        return life.fecundity_ramp / life.fecundity_peak
    if age < 30:
        return 1.0
    return (life.fecundity_end_age - age) / (life.fecundity_end_age - 30)


def male_age_factor(age: int, cfg: ScenarioConfig) -> float:
    lo, hi = cfg.lifecycle.male_fertile_range
    return 1.0 if lo <= age <= hi else 0.0


def effective_fertility(agent: Agent, cfg: ScenarioConfig) -> float:
    factor = (
        female_age_factor(agent.age, cfg)
        if agent.gender is Gender.FEMALE
        else male_age_factor(agent.age, cfg)
    )
    return clamp01(agent.innate_fertility * factor)


def init_population(config: ScenarioConfig, seed: int) -> Population:
    """Build the step-0 population from the scenario config.

    Bounded traits are Beta-distributed, wealth is lognormal, ages are
    uniform over the configured adult range. The first size*male_share
    ids are male, the rest female; all draws are consumed in id order
    from a generator seeded only by `seed`.
    """
    if config.population.size < 2:
        raise ConfigError(f"population size must be >= 2, got {config.population.size}")
    rng = np.random.default_rng(seed)
    pop = Population(rng)
    n = config.population.size
    n_male = config.male_count
    a, b = config.population.attributes.trait_beta
    mu = config.population.attributes.wealth_mu
    sigma = config.population.attributes.wealth_sigma
    lo, hi = config.population.initial_age_range

    mate_value = rng.beta(a, b, size=n)
    fertility = rng.beta(a, b, size=n)
    social = rng.beta(a, b, size=n)
    wealth = rng.lognormal(mu, sigma, size=n)
    ages = rng.integers(lo, hi + 1, size=n)

    for i in range(n):
        agent = Agent(
            id=pop.new_id(),
            age=int(ages[i]),
            gender=Gender.MALE if i < n_male else Gender.FEMALE,
            attrs=AttributeVector(
                mate_value=float(mate_value[i]),
                resources=float(wealth[i]),
                fertility=0.0,
                social_capital=float(social[i]),
            ),
            innate_fertility=float(fertility[i]),
        )
        agent.attrs.fertility = effective_fertility(agent, config)
        pop.add(agent)
    assign_tiers(pop, config.population.tier_shares)
    return pop


def scan_invariants(pop: Population, rules) -> None:
    """Raise InvariantError naming the first broken structural guarantee.

    Checks: attribute ranges, relationship symmetry (both ends hold the
    same object), capacity caps, no self-partnership, and no dead agent
    holding a live edge.
    """
    from .errors import InvariantError

    for agent in pop:
        at = agent.attrs
        if not (0.0 <= at.mate_value <= 1.0 and 0.0 <= at.fertility <= 1.0
                and 0.0 <= at.social_capital <= 1.0):
            raise InvariantError("attribute_range", f"agent {agent.id}")
        if at.resources < 0.0 or not math.isfinite(at.resources):
            raise InvariantError("attribute_range", f"agent {agent.id} wealth {at.resources}")
        if not agent.alive:
            if agent.spouses or agent.companions:
                raise InvariantError("dead_with_partners", f"agent {agent.id}")
            continue
        if len(agent.spouses) > rules.spouse_cap:
            raise InvariantError("capacity", f"agent {agent.id} spouse count")
        if len(agent.companions) > rules.companion_cap:
            raise InvariantError("capacity", f"agent {agent.id} companion count")
        if agent.partner_count > rules.total_cap:
            raise InvariantError("capacity", f"agent {agent.id} total partners")
        for rel in agent.relationships():
            other_id = rel.other(agent.id)
            if other_id == agent.id:
                raise InvariantError("self_partnership", f"agent {agent.id}")
            other = pop.agent(other_id)
            bucket = other.spouses if rel.kind is RelationshipKind.SPOUSE else other.companions
            if rel not in bucket:
                raise InvariantError(
                    "symmetry", f"edge {rel.partner_a}-{rel.partner_b} one-sided"
                )
