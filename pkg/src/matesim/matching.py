"""Search, proposals, and constrained greedy matching.

The market clears in three moves each step. First, relationship upkeep:
spouses face a small exogenous divorce hazard and companions re-check
each other against dissolution thresholds. Second, every adult with a
free slot samples a candidate set, weighted toward similar social
capital, scores candidates with a gender-specific linear utility, and
proposes to its best options above reservation. Third, proposals are
accepted greedily in descending order of mutual utility, subject to
capacity caps and the target's own reservation.

Determinism rules: agents are processed in ascending id order, each
agent's random draws are consumed in a fixed order, and all sorting
uses explicit id tie-breakers. The greedy acceptance pass is single
sweep and exact, because accepting a proposal can only remove capacity,
never make a previously infeasible proposal feasible.

Utility itself is memoryless: the novelty bonus for never-partnered
candidates affects only the proposal ranking, never the utility value
that is checked against reservations or stored on the relationship.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import MatchingConfig, PreferenceWeights
from .institutions import InstitutionRules, dissolve, may_form
from .population import (
    Agent,
    Gender,
    Population,
    Relationship,
    RelationshipKind,
    cohort_wealth_percentiles,
)
from .strategy import StrategyParams

__all__ = [
    "Proposal",
    "FormationRecord",
    "utility",
    "candidate_set",
    "propose_phase",
    "match_phase",
    "maintenance_phase",
]


@dataclass(frozen=True)
class Proposal:
    proposer: int
    target: int
    kind: RelationshipKind
    utility_to_proposer: float


@dataclass(frozen=True)
class FormationRecord:
    """Audit row for one accepted proposal, kept for fairness checks."""

    step: int
    proposer: int
    target: int
    kind: RelationshipKind
    utility_proposer: float
    utility_target: float
    reservation_proposer: float
    reservation_target: float


def prefs_for(gender: Gender, matching: MatchingConfig) -> PreferenceWeights:
    return matching.male_prefs if gender is Gender.MALE else matching.female_prefs


def utility(
    observer: Agent,
    candidate: Agent,
    weights: PreferenceWeights,
    candidate_wealth_pct: float,
) -> float:
    """Directed utility of `candidate` in the eyes of `observer`.

    Linear in the candidate's mate value, wealth percentile, fertility,
    and social capital. Deliberately excludes novelty: utility depends
    only on who the candidate is, not on the observer's history.
    """
    a = candidate.attrs
    return (
        weights.mate_value * a.mate_value
        + weights.resources * candidate_wealth_pct
        + weights.fertility * a.fertility
        + weights.social_capital * a.social_capital
    )


class PoolArrays:
    """Per-step cache of pool attributes used by the candidate sampler."""

    __slots__ = ("social", "ages", "is_male", "index_of")

    def __init__(self, pool: list[Agent]) -> None:
        self.social = np.array([a.attrs.social_capital for a in pool], dtype=np.float64)
        self.ages = np.array([a.age for a in pool], dtype=np.float64)
        self.is_male = np.array([a.gender is Gender.MALE for a in pool], dtype=bool)
        self.index_of = {a.id: i for i, a in enumerate(pool)}


def _sampling_weights(
    agent: Agent,
    arrays: PoolArrays,
    matching: MatchingConfig,
) -> np.ndarray:
    """Unnormalised sampling weight per pool member for one searcher.

    Similar social capital and similar age raise visibility (social
    circles overlap and are age-stratified); same-gender candidates are
    down-weighted to the configured minority share, or excluded
    entirely when the scenario forbids them. Self, current partners,
    and parent/child kin get weight zero.
    """
    w = np.exp(
        -np.abs(arrays.social - agent.attrs.social_capital) / matching.similarity_scale
        - np.abs(arrays.ages - agent.age) / matching.age_scale
    )
    same = arrays.is_male == (agent.gender is Gender.MALE)
    if not matching.same_gender_allowed or matching.same_gender_share <= 0.0:
        w[same] = 0.0
    elif matching.same_gender_share < 1.0:
        share = matching.same_gender_share
        w[same] *= share / (1.0 - share)
    blocked = set(agent.partner_ids)
    blocked.add(agent.id)
    blocked.update(agent.children)
    if agent.parents:
        blocked.update(agent.parents)
    index_of = arrays.index_of
    for bid in blocked:
        i = index_of.get(bid)
        if i is not None:
            w[i] = 0.0
    return w


def candidate_set(
    agent: Agent,
    pop: Population,
    k: int,
    rng: np.random.Generator,
    matching: MatchingConfig,
    pool: list[Agent] | None = None,
    pool_arrays: PoolArrays | None = None,
) -> list[Agent]:
    """Sample up to k distinct candidates for one searching agent.

    Weighted sampling without replacement via Gumbel top-k on the log
    weights: one vector of Gumbel noise per call, so randomness usage
    is independent of k and reproducible. Pool defaults to all living
    adults; pass pool (and its precomputed arrays) when calling
    repeatedly within one step. Only the top k keys are ordered, so the
    cost per call stays near-linear in the pool size.
    """
    if pool is None:
        pool = pop.living_adults()
    if not pool:
        return []
    arrays = pool_arrays if pool_arrays is not None else PoolArrays(pool)
    w = _sampling_weights(agent, arrays, matching)
    gumbel = rng.gumbel(size=len(pool))
    with np.errstate(divide="ignore"):
        keys = np.where(w > 0.0, np.log(w) + gumbel, -np.inf)
    kk = min(max(k, 0), len(pool))
    if kk == 0:
        return []
    if kk < len(pool):
        top = np.argpartition(-keys, kk - 1)[:kk]
    else:
        top = np.arange(len(pool))
    top = top[np.argsort(-keys[top], kind="stable")]
    picked: list[Agent] = []
    for idx in top:
        if keys[idx] == -np.inf:
            break
        picked.append(pool[idx])
    return picked


def _open_kinds(agent: Agent, rules: InstitutionRules) -> list[RelationshipKind]:
    if agent.partner_count >= rules.total_cap:
        return []
    kinds = []
    if len(agent.spouses) < rules.spouse_cap:
        kinds.append(RelationshipKind.SPOUSE)
    if len(agent.companions) < rules.companion_cap:
        kinds.append(RelationshipKind.COMPANION)
    return kinds


def propose_phase(
    pop: Population,
    rules: InstitutionRules,
    strategy: StrategyParams,
    matching: MatchingConfig,
    rng: np.random.Generator,
    wealth_pcts: dict[int, float] | None = None,
) -> list[Proposal]:
    """Collect every proposal for this step, sorted by (proposer, target).

    Each agent with free capacity samples candidates, keeps those whose
    utility clears the kind-specific reservation, ranks them by utility
    plus a novelty bonus for never-before partners, and proposes to the
    top proposal_budget of them. The utility recorded on the proposal is
    the pure utility, so every emitted proposal satisfies individual
    rationality on the proposer side by construction.
    """
    adults = pop.living_adults()
    if wealth_pcts is None:
        wealth_pcts = cohort_wealth_percentiles(pop.living_adults())
    arrays = PoolArrays(adults) if adults else None
    proposals: list[Proposal] = []
    for agent in adults:  # ascending id: pop iteration order
        kinds = _open_kinds(agent, rules)
        if not kinds:
            continue
        cell = strategy.cell(agent.tier, agent.gender)
        budget = cell.proposal_budget
        if budget <= 0:
            continue
        prefs = prefs_for(agent.gender, matching)
        candidates = candidate_set(
            agent, pop, matching.candidate_k, rng, matching, pool=adults, pool_arrays=arrays
        )
        if not candidates:
            continue
        thresholds = {
            kind: strategy.reservation(agent.tier, agent.gender, kind) for kind in kinds
        }
        floor = min(thresholds.values())
        scored: list[tuple[float, int, Agent, float]] = []
        for cand in candidates:
            u = utility(agent, cand, prefs, wealth_pcts[cand.id])
            if u < floor:
                continue
            bonus = prefs.novelty if cand.id not in agent.past_partners else 0.0
            scored.append((u + bonus, cand.id, cand, u))
        scored.sort(key=lambda t: (-t[0], t[1]))
        chosen = scored[:budget]
        chosen.sort(key=lambda t: t[1])  # emit in target-id order
        for _, _, cand, u in chosen:
            eligible = [kind for kind in kinds if u >= thresholds[kind]]
            if not eligible:
                continue
            if len(eligible) == 2:
                kind = (
                    RelationshipKind.SPOUSE
                    if rng.random() < cell.kind_preference
                    else RelationshipKind.COMPANION
                )
            else:
                kind = eligible[0]
            proposals.append(Proposal(agent.id, cand.id, kind, u))
    return proposals


def match_phase(
    pop: Population,
    proposals: list[Proposal],
    rules: InstitutionRules,
    strategy: StrategyParams,
    matching: MatchingConfig,
    step: int,
    wealth_pcts: dict[int, float] | None = None,
    formation_log: list[FormationRecord] | None = None,
) -> list[Relationship]:
    """Greedy acceptance by descending mutual utility.

    Mutual utility is the min of the two directed utilities. A proposal
    is accepted iff the pairing is still legal under the institution and
    the target's utility for the proposer clears the target's own
    reservation for that relationship kind. Accepted pairs become live
    relationships immediately, shrinking capacity for later proposals.
    One sweep is exact: acceptance never unlocks a skipped proposal.
    """
    if wealth_pcts is None:
        wealth_pcts = cohort_wealth_percentiles(pop.living_adults())
    annotated = []
    for prop in proposals:
        proposer = pop.agent(prop.proposer)
        target = pop.agent(prop.target)
        u_back = utility(
            target, proposer, prefs_for(target.gender, matching), wealth_pcts[proposer.id]
        )
        mutual = min(prop.utility_to_proposer, u_back)
        annotated.append((mutual, prop, u_back))
    annotated.sort(key=lambda t: (-t[0], t[1].proposer, t[1].target))
    formed: list[Relationship] = []
    for _, prop, u_back in annotated:
        proposer = pop.agent(prop.proposer)
        target = pop.agent(prop.target)
        if not may_form(proposer, target, prop.kind, rules):
            continue
        res_target = strategy.reservation(target.tier, target.gender, prop.kind)
        if u_back < res_target:
            continue
        rel = Relationship(
            kind=prop.kind,
            partner_a=proposer.id,
            partner_b=target.id,
            start_step=step,
            utility_a=prop.utility_to_proposer,
            utility_b=u_back,
        )
        bucket = "spouses" if prop.kind is RelationshipKind.SPOUSE else "companions"
        getattr(proposer, bucket).append(rel)
        getattr(target, bucket).append(rel)
        formed.append(rel)
        if formation_log is not None:
            formation_log.append(
                FormationRecord(
                    step=step,
                    proposer=proposer.id,
                    target=target.id,
                    kind=prop.kind,
                    utility_proposer=prop.utility_to_proposer,
                    utility_target=u_back,
                    reservation_proposer=strategy.reservation(
                        proposer.tier, proposer.gender, prop.kind
                    ),
                    reservation_target=res_target,
                )
            )
    return formed


def maintenance_phase(
    pop: Population,
    rules: InstitutionRules,
    strategy: StrategyParams,
    matching: MatchingConfig,
    rng: np.random.Generator,
    wealth_pcts: dict[int, float] | None = None,
) -> int:
    """Dissolve failing relationships; returns the number dissolved.

    Spouse edges face the institution's flat divorce hazard. Companion
    edges are re-valued with current attributes: if either side's
    utility has slipped below that side's dissolution threshold, the
    edge ends. Each edge is examined once, owned by its lower id, in
    ascending order.
    """
    if wealth_pcts is None:
        wealth_pcts = cohort_wealth_percentiles(pop.living_adults())
    dissolved = 0
    for rel in pop.relationships():
        a = pop.agent(min(rel.partner_a, rel.partner_b))
        b = pop.agent(max(rel.partner_a, rel.partner_b))
        if rel.kind is RelationshipKind.SPOUSE:
            if rules.divorce_hazard > 0.0 and rng.random() < rules.divorce_hazard:
                dissolve(rel, pop)
                dissolved += 1
        else:
            u_a = utility(a, b, prefs_for(a.gender, matching), wealth_pcts[b.id])
            u_b = utility(b, a, prefs_for(b.gender, matching), wealth_pcts[a.id])
            thr_a = strategy.cell(a.tier, a.gender).dissolution_threshold
            thr_b = strategy.cell(b.tier, b.gender).dissolution_threshold
            if u_a < thr_a or u_b < thr_b:
                dissolve(rel, pop)
                dissolved += 1
    return dissolved
