"""Reproduction, aging, economy, mortality, and inheritance.

Births are drawn per fertile woman per step. Each male partner edge
(spouse first, then companions by partner id) contributes one Bernoulli
trial with probability

    base_fecundity(mother age)
    * mother innate fertility
    * cell fertility desire
    * max(0, 1 - crowding_rate * living children)
    * (1 - penalty_deterrence * penalty rate * (1 - rearing subsidy))

capped at one birth per woman per step. Age enters exactly once, via
the fecundity schedule; innate fertility is the draw fixed at birth,
not the age-scaled attribute, to avoid discounting age twice. The last
factor is the behavioural response to the institution: a steep, poorly
subsidised motherhood penalty deters births as well as taxing them.

Mothers pay the motherhood penalty (rate attenuated by the subsidy) as
a proportional hit to wealth at each birth. Estates settle at death:
equal split among living biological children, falling back to spouses,
then (only where the institution says so) companions, then a uniform
redistribution over all living adults. Every wealth movement lands in a
WealthLedger so conservation is checkable per step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig
from .institutions import InstitutionRules, dissolve
from .population import (
    Agent,
    AttributeVector,
    Gender,
    Population,
    RelationshipKind,
    clamp01,
    effective_fertility,
)
from .strategy import StrategyParams

__all__ = [
    "BirthEvent",
    "EstateSettlement",
    "WealthLedger",
    "UpdateResult",
    "base_fecundity",
    "birth_probability",
    "reproduce_phase",
    "update_phase",
    "settle_estate",
    "total_wealth",
]


@dataclass(frozen=True)
class BirthEvent:
    step: int
    mother: int
    father: int
    child: int
    mother_age: int
    via: RelationshipKind


@dataclass(frozen=True)
class EstateSettlement:
    """How one decedent's wealth was passed on."""

    step: int
    decedent: int
    total: float
    mode: str  # children | spouses | companions | redistribution | unclaimed
    heirs: tuple[tuple[int, float], ...]  # (agent id, amount) pairs


@dataclass
class WealthLedger:
    """Cumulative wealth flows; transfers tracked separately from sinks."""

    income: float = 0.0
    consumption: float = 0.0
    child_costs: float = 0.0
    motherhood_losses: float = 0.0
    gifts: float = 0.0
    estates_settled: float = 0.0
    redistributed: float = 0.0
    unclaimed: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return {
            "income": self.income,
            "consumption": self.consumption,
            "child_costs": self.child_costs,
            "motherhood_losses": self.motherhood_losses,
            "gifts": self.gifts,
            "estates_settled": self.estates_settled,
            "redistributed": self.redistributed,
            "unclaimed": self.unclaimed,
        }


@dataclass
class UpdateResult:
    deaths: list[int] = field(default_factory=list)
    settlements: list[EstateSettlement] = field(default_factory=list)


def total_wealth(pop: Population) -> float:
    return sum(a.wealth for a in pop if a.alive)


def base_fecundity(age: int, config: ScenarioConfig) -> float:
    """Annual fecundability by age: ramp under 20, plateau through the
    twenties, linear decline to zero at the end of the fecund window."""
    life = config.lifecycle
    if age < 18 or age >= life.fecundity_end_age:
        return 0.0
    if age < 20:
        return life.fecundity_ramp
    if age < 30:
        return life.fecundity_peak
    return life.fecundity_peak * (life.fecundity_end_age - age) / (life.fecundity_end_age - 30)


def birth_probability(
    mother: Agent,
    living_children: int,
    desire: float,
    rules: InstitutionRules,
    config: ScenarioConfig,
) -> float:
    life = config.lifecycle
    crowding = max(0.0, 1.0 - life.crowding_rate * living_children)
    deterrence = 1.0 - life.penalty_deterrence * rules.motherhood_penalty_rate * (
        1.0 - rules.rearing_subsidy
    )
    p = (
        base_fecundity(mother.age, config)
        * mother.innate_fertility
        * desire
        * crowding
        * max(0.0, deterrence)
    )
    return clamp01(p)


def _male_fertile(agent: Agent, config: ScenarioConfig) -> bool:
    lo, hi = config.lifecycle.male_fertile_range
    return agent.gender is Gender.MALE and lo <= agent.age <= hi


def _make_child(
    pop: Population,
    mother: Agent,
    father: Agent,
    via: RelationshipKind,
    config: ScenarioConfig,
    rng: np.random.Generator,
) -> Agent:
    noise = config.lifecycle.child_attr_noise
    mate_value = clamp01(
        (mother.attrs.mate_value + father.attrs.mate_value) / 2.0 + rng.normal(0.0, noise)
    )
    social = clamp01(
        (mother.attrs.social_capital + father.attrs.social_capital) / 2.0
        + rng.normal(0.0, noise)
    )
    innate = clamp01(
        (mother.innate_fertility + father.innate_fertility) / 2.0 + rng.normal(0.0, noise)
    )
    gender = Gender.MALE if rng.random() < 0.5 else Gender.FEMALE
    child = Agent(
        id=pop.new_id(),
        age=0,
        gender=gender,
        attrs=AttributeVector(mate_value=mate_value, resources=0.0, fertility=0.0,
                              social_capital=social),
        innate_fertility=innate,
        parents=(mother.id, father.id),
        born_via=via,
    )
    pop.add(child)
    mother.children.append(child.id)
    father.children.append(child.id)
    return child


def reproduce_phase(
    pop: Population,
    rules: InstitutionRules,
    strategy: StrategyParams,
    config: ScenarioConfig,
    rng: np.random.Generator,
    ledger: WealthLedger | None = None,
) -> list[BirthEvent]:
    """Draw at most one birth per fecund woman, walking women in
    ascending id order and each woman's male edges spouse-first.

    The mother takes the motherhood penalty (attenuated by the rearing
    subsidy) as a proportional wealth loss at the moment of birth.
    """
    events: list[BirthEvent] = []
    step = pop.step
    for mother in pop.living_adults():
        if mother.gender is not Gender.FEMALE:
            continue
        if base_fecundity(mother.age, config) <= 0.0:
            continue
        edges = [
            (0 if rel.kind is RelationshipKind.SPOUSE else 1, rel.other(mother.id), rel.kind)
            for rel in mother.relationships()
        ]
        edges.sort()
        desire = strategy.cell(mother.tier, mother.gender).fertility_desire
        living_children = sum(1 for c in mother.children if pop.agent(c).alive)
        for _, partner_id, kind in edges:
            father = pop.agent(partner_id)
            if not _male_fertile(father, config):
                continue
            p = birth_probability(mother, living_children, desire, rules, config)
            if p <= 0.0:
                break
            if rng.random() < p:
                child = _make_child(pop, mother, father, kind, config, rng)
                loss = mother.wealth * rules.motherhood_penalty_rate * (
                    1.0 - rules.rearing_subsidy
                )
                mother.wealth = mother.wealth - loss
                if ledger is not None:
                    ledger.motherhood_losses += loss
                events.append(
                    BirthEvent(
                        step=step,
                        mother=mother.id,
                        father=father.id,
                        child=child.id,
                        mother_age=mother.age,
                        via=kind,
                    )
                )
                break  # one birth per woman per step
    return events


def settle_estate(
    pop: Population,
    decedent: Agent,
    rules: InstitutionRules,
    heirs_children: list[int],
    heirs_spouses: list[int],
    heirs_companions: list[int],
    ledger: WealthLedger | None = None,
) -> EstateSettlement:
    """Distribute a decedent's wealth by the fallback chain.

    Heir lists are snapshots taken at the moment of death (living ids
    only); the caller dissolves the decedent's edges first. Equal split
    among whichever class inherits; with no heirs at all the estate is
    spread uniformly over living adults, and only vanishes (flagged
    unclaimed) if nobody living remains.
    """
    total = decedent.wealth
    step = pop.step
    if heirs_children:
        mode, recipients = "children", heirs_children
    elif heirs_spouses:
        mode, recipients = "spouses", heirs_spouses
    elif rules.companion_inheritance and heirs_companions:
        mode, recipients = "companions", heirs_companions
    else:
        adults = [a.id for a in pop.living_adults() if a.id != decedent.id]
        if adults:
            mode, recipients = "redistribution", adults
        else:
            mode, recipients = "unclaimed", []
    heirs: tuple[tuple[int, float], ...] = ()
    if recipients:
        share = total / len(recipients)
        for rid in recipients:
            pop.agent(rid).wealth = pop.agent(rid).wealth + share
        heirs = tuple((rid, share) for rid in recipients)
        if ledger is not None:
            if mode == "redistribution":
                ledger.redistributed += total
            else:
                ledger.estates_settled += total
    elif ledger is not None:
        ledger.unclaimed += total
    decedent.wealth = 0.0
    return EstateSettlement(step=step, decedent=decedent.id, total=total, mode=mode, heirs=heirs)


def update_phase(
    pop: Population,
    rules: InstitutionRules,
    config: ScenarioConfig,
    rng: np.random.Generator,
    ledger: WealthLedger | None = None,
) -> UpdateResult:
    """Advance one year: age, income and consumption, child costs,
    attribute drift, then deaths and estate settlement.

    Mortality is deterministic at max_age and a flat hazard above the
    elder threshold. Deaths settle in ascending id order; an agent who
    dies later in the same sweep still counts as living for an earlier
    settlement (they were alive when the first estate was divided).
    """
    life = config.lifecycle
    growth = {"A": life.tier_growth[0], "B": life.tier_growth[1], "C": life.tier_growth[2]}
    wage = {"A": life.base_income[0], "B": life.base_income[1], "C": life.base_income[2]}
    living = pop.living()
    for agent in living:
        agent.age += 1
    for agent in living:
        if not agent.is_adult:
            continue
        # wage floor keeps newly adult agents off zero; returns encode r > g
        gain = wage[agent.tier.value] + agent.wealth * (growth[agent.tier.value] - 1.0)
        agent.wealth = agent.wealth + gain
        spend = min(life.consumption + life.consumption_rate * agent.wealth, agent.wealth)
        agent.wealth = agent.wealth - spend
        if ledger is not None:
            ledger.income += gain
            ledger.consumption += spend
    # Inter-vivos gifts: parents pass a wealth share to living adult
    # children, split equally. Zero-sum, so the conservation identity
    # over income/consumption/child costs is unaffected.
    if life.gift_rate > 0.0:
        for agent in living:
            if not agent.is_adult or agent.wealth <= 0.0:
                continue
            heirs = [
                pop.agent(c)
                for c in agent.children
                if pop.agent(c).alive and pop.agent(c).is_adult
            ]
            if not heirs:
                continue
            gift = agent.wealth * life.gift_rate
            agent.wealth = agent.wealth - gift
            share = gift / len(heirs)
            for child in heirs:
                child.wealth = child.wealth + share
            if ledger is not None:
                ledger.gifts += gift
    # One-time coming-of-age transfer: each living parent passes a
    # wealth share to a child the year it reaches adulthood. Also
    # zero-sum; folded into the gifts ledger line.
    if life.nest_egg > 0.0:
        for agent in living:
            if agent.age != 18 or agent.parents is None:
                continue
            for parent_id in agent.parents:
                parent = pop.agent(parent_id)
                if not parent.alive or parent.wealth <= 0.0:
                    continue
                grant = parent.wealth * life.nest_egg
                parent.wealth = parent.wealth - grant
                agent.wealth = agent.wealth + grant
                if ledger is not None:
                    ledger.gifts += grant
    # Rearing costs for minors, split across living parents.
    net_cost = life.child_cost * (1.0 - rules.rearing_subsidy)
    if net_cost > 0.0:
        for agent in living:
            if agent.age >= 18 or agent.parents is None:
                continue
            mother_share = (
                1.0 - life.spouse_cost_split
                if agent.born_via is RelationshipKind.SPOUSE
                else 0.5
            )
            for parent_id, share in zip(agent.parents, (mother_share, 1.0 - mother_share)):
                parent = pop.agent(parent_id)
                if not parent.alive:
                    continue
                paid = min(net_cost * share, parent.wealth)
                parent.wealth = parent.wealth - paid
                if ledger is not None:
                    ledger.child_costs += paid
    for agent in living:
        if agent.age > life.value_decline_age:
            agent.attrs.mate_value = clamp01(
                agent.attrs.mate_value * (1.0 - life.value_decline_rate)
            )
        agent.attrs.fertility = effective_fertility(agent, config)
    result = UpdateResult()
    for agent in living:
        dies = agent.age >= life.max_age
        if not dies and agent.age > life.elder_hazard_age and life.elder_hazard > 0.0:
            dies = rng.random() < life.elder_hazard
        if not dies:
            continue
        heirs_children = [c for c in agent.children if pop.agent(c).alive]
        heirs_spouses = [r.other(agent.id) for r in agent.spouses]
        heirs_companions = [r.other(agent.id) for r in agent.companions]
        for rel in agent.relationships():
            dissolve(rel, pop)
        agent.alive = False
        result.deaths.append(agent.id)
        result.settlements.append(
            settle_estate(
                pop, agent, rules, heirs_children, heirs_spouses, heirs_companions, ledger
            )
        )
    return result
