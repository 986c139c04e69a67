"""Population aggregates: welfare, Gini, TFR, stability, fairness audit.

Welfare is a 0-10 composite per living adult:

    10 * (0.4 * partnership_satisfaction
          + 0.3 * economic_security
          + 0.3 * belonging)

where partnership satisfaction is the capacity-weighted mean over
current relationships of the pair's mutual surplus (spouse weight 1.0,
companion 0.5, zero when unpartnered; the surplus averages the two
directed utilities, each taken under its holder's preferences),
economic security is the wealth percentile among living adults, and
belonging is half for having any partner plus half scaled by children
capped at two.

TFR is the standard period construction: age-specific birth rates over
5-year bins spanning 15-49, summed and scaled by bin width, computed
over a trailing window of steps. The stability proxy is the fraction of
adult males with zero partners, flagged above 0.20 with no epsilon.

The fairness audit compares a capped-polyamory run against its paired
monogamy baseline (same seed, same initial population): edge-level
individual rationality, relaxed envy-freeness, the tier-level welfare
Gini delta, and the gender welfare gap with a Welch t statistic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .config import MatchingConfig
from .errors import ComparabilityError
from .population import (
    Agent,
    Gender,
    Population,
    RelationshipKind,
    Tier,
    wealth_percentiles,
)

if TYPE_CHECKING:
    from .engine import RunRecord

__all__ = [
    "CELL_ORDER_COLUMNS",
    "MetricsFrame",
    "TfrResult",
    "StabilityResult",
    "FairnessReport",
    "AGE_BINS",
    "age_bin",
    "welfare",
    "welfare_all",
    "gini",
    "tfr",
    "stability_proxy",
    "fairness_audit",
    "partner_set_values",
    "build_frame",
]

# Column order for per-cell welfare, matching the CSV schema.
CELL_ORDER_COLUMNS: list[tuple[Tier, Gender]] = [
    (Tier.A, Gender.MALE),
    (Tier.A, Gender.FEMALE),
    (Tier.B, Gender.MALE),
    (Tier.B, Gender.FEMALE),
    (Tier.C, Gender.MALE),
    (Tier.C, Gender.FEMALE),
]

# 5-year maternal age bins over the reproductive window.
AGE_BINS: list[tuple[int, int]] = [(a, a + 4) for a in range(15, 50, 5)]
BIN_WIDTH = 5


def age_bin(age: int) -> int | None:
    """Index of the 15-49 age bin containing `age`, or None outside it."""
    if age < 15 or age > 49:
        return None
    return (age - 15) // 5


@dataclass
class MetricsFrame:
    step: int
    welfare_cells: dict[tuple[Tier, Gender], float]
    tfr: float
    gini_wealth: float
    gini_welfare: float
    unpartnered_male_frac: float
    births: int
    deaths: int
    mean_welfare: float = 0.0
    stability_flag: bool = False
    tfr_zero_exposure_bins: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        for name in ("gini_wealth", "gini_welfare", "unpartnered_male_frac"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} out of [0,1]: {value}")


@dataclass(frozen=True)
class TfrResult:
    value: float
    zero_exposure_bins: tuple[int, ...]

    @property
    def flagged(self) -> bool:
        return bool(self.zero_exposure_bins)


@dataclass(frozen=True)
class StabilityResult:
    fraction: float
    flagged: bool


@dataclass
class FairnessReport:
    individual_rationality_violations: int
    envy_count: int
    tier_gini_delta: float | None
    gender_welfare_gap: float
    gender_welfare_t_stat: float
    envy_margin: float = 0.15

    def __post_init__(self) -> None:
        if self.individual_rationality_violations < 0 or self.envy_count < 0:
            raise ValueError("fairness counts must be non-negative")


# --- Welfare ----------------------------------------------------------------

# Composite weights for the 0-10 welfare scale.
_W_SATISFACTION = 0.4
_W_SECURITY = 0.3
_W_BELONGING = 0.3


def welfare(
    agent: Agent,
    pop: Population,
    matching: MatchingConfig,
    wealth_pcts: dict[int, float] | None = None,
) -> float:
    """Welfare of one living adult on the 0-10 scale."""
    from .matching import prefs_for, utility

    if wealth_pcts is None:
        wealth_pcts = wealth_percentiles(pop.living_adults())
    own_prefs = prefs_for(agent.gender, matching)
    weight_sum = 0.0
    util_sum = 0.0
    for rel in agent.relationships():
        w = 1.0 if rel.kind is RelationshipKind.SPOUSE else 0.5
        other = pop.agent(rel.other(agent.id))
        # mutual match quality: both directed utilities, each in its
        # holder's behavioural currency; a relationship is as good as
        # the pair's shared surplus, not one side's view of it
        surplus = 0.5 * (
            utility(agent, other, own_prefs, wealth_pcts[other.id])
            + utility(
                other, agent, prefs_for(other.gender, matching), wealth_pcts[agent.id]
            )
        )
        util_sum += w * surplus
        weight_sum += w
    satisfaction = util_sum / weight_sum if weight_sum > 0.0 else 0.0
    security = wealth_pcts[agent.id]
    belonging = 0.5 * (1.0 if agent.partner_count > 0 else 0.0)
    belonging += 0.5 * min(len(agent.children), 2) / 2.0
    return 10.0 * (
        _W_SATISFACTION * satisfaction + _W_SECURITY * security + _W_BELONGING * belonging
    )


def welfare_all(pop: Population, matching: MatchingConfig) -> dict[int, float]:
    """Welfare for every living adult, sharing one percentile pass."""
    adults = pop.living_adults()
    pcts = wealth_percentiles(adults)
    return {a.id: welfare(a, pop, matching, pcts) for a in adults}


# --- Inequality -------------------------------------------------------------


def gini(values) -> float:
    """Gini coefficient of a non-negative sample.

    Computed with the sorted-rank formula, which is algebraically equal
    to the pairwise mean-absolute-difference form
    sum_ij |x_i - x_j| / (2 n^2 mean). All-zero input returns 0.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise ValueError("gini of empty sequence")
    if np.any(x < 0.0):
        raise ValueError("gini requires non-negative values")
    total = x.sum()
    if total == 0.0:
        return 0.0
    xs = np.sort(x)
    n = xs.size
    ranks = np.arange(1, n + 1, dtype=np.float64)
    return float((2.0 * np.dot(ranks, xs) - (n + 1) * total) / (n * total))


# --- Fertility --------------------------------------------------------------


def tfr(
    births_by_bin: np.ndarray,
    exposure_by_bin: np.ndarray,
    window: int,
) -> TfrResult:
    """Period TFR over the trailing `window` steps.

    Inputs are (steps, bins) arrays of birth counts and woman-years.
    Each bin contributes rate * bin width; a bin with zero exposure in
    the window contributes 0 and is flagged.
    """
    if window < 1:
        raise ValueError(f"tfr window must be >= 1, got {window}")
    births = np.asarray(births_by_bin, dtype=np.float64)
    exposure = np.asarray(exposure_by_bin, dtype=np.float64)
    if births.shape != exposure.shape or births.ndim != 2:
        raise ValueError("births and exposure must be matching (steps, bins) arrays")
    take = min(window, births.shape[0])
    b = births[-take:].sum(axis=0)
    e = exposure[-take:].sum(axis=0)
    flagged = []
    total = 0.0
    for i in range(b.size):
        if e[i] <= 0.0:
            flagged.append(i)
            continue
        total += b[i] / e[i]
    return TfrResult(value=BIN_WIDTH * total, zero_exposure_bins=tuple(flagged))


# --- Stability --------------------------------------------------------------


def stability_proxy(pop: Population) -> StabilityResult:
    """Fraction of living adult males with zero partners; flag iff > 0.20."""
    males = [a for a in pop.living_adults() if a.gender is Gender.MALE]
    if not males:
        return StabilityResult(fraction=0.0, flagged=False)
    unpartnered = sum(1 for a in males if a.partner_count == 0)
    frac = unpartnered / len(males)
    return StabilityResult(fraction=frac, flagged=frac > 0.20)


# --- Fairness ---------------------------------------------------------------


def partner_set_values(pop: Population, matching: MatchingConfig) -> dict[int, float]:
    """Capacity-weighted partner-set value of every living adult, as seen
    through each observer gender's own preference weights.

    Because utilities are linear in the partner's attributes with
    gender-level weights, the value one agent places on another agent's
    partner set depends only on the observer's gender, so a male
    observer values set V through the same function as every other male.
    Returns {agent id: value through that agent's own gender's prefs};
    envy comparisons read both sides from this table.
    """
    from .matching import prefs_for, utility

    adults = pop.living_adults()
    pcts = wealth_percentiles(adults)
    values: dict[int, float] = {}
    for gender in (Gender.MALE, Gender.FEMALE):
        prefs = prefs_for(gender, matching)
        for agent in adults:
            if agent.gender is not gender:
                continue
            weight_sum = 0.0
            util_sum = 0.0
            for rel in agent.relationships():
                w = 1.0 if rel.kind is RelationshipKind.SPOUSE else 0.5
                other = pop.agent(rel.other(agent.id))
                util_sum += w * utility(agent, other, prefs, pcts[other.id])
                weight_sum += w
            values[agent.id] = util_sum / weight_sum if weight_sum > 0.0 else 0.0
    return values


def _envy_count(pop: Population, matching: MatchingConfig, margin: float) -> int:
    """Agents preferring some same-gender agent's partner set by > margin.

    Gender-level preference weights make the comparison one-dimensional
    per gender: an agent envies iff the best same-gender partner-set
    value (held by someone else) beats its own by more than the margin.
    """
    values = partner_set_values(pop, matching)
    count = 0
    for gender in (Gender.MALE, Gender.FEMALE):
        members = [a for a in pop.living_adults() if a.gender is gender]
        if len(members) < 2:
            continue
        vals = np.array([values[a.id] for a in members])
        order = np.argsort(-vals)
        best, second = vals[order[0]], vals[order[1]]
        for i in range(len(members)):
            rival_best = second if i == order[0] else best
            if rival_best > vals[i] + margin:
                count += 1
    return count


def _welch_t(x: np.ndarray, y: np.ndarray) -> float:
    if x.size < 2 or y.size < 2:
        return 0.0
    vx = x.var(ddof=1) / x.size
    vy = y.var(ddof=1) / y.size
    denom = np.sqrt(vx + vy)
    if denom == 0.0:
        return 0.0
    return float((x.mean() - y.mean()) / denom)


def _tier_mean_welfare(pop: Population, matching: MatchingConfig) -> list[float]:
    welf = welfare_all(pop, matching)
    means = []
    for tier in (Tier.A, Tier.B, Tier.C):
        vals = [welf[a.id] for a in pop.living_adults() if a.tier is tier]
        means.append(float(np.mean(vals)) if vals else 0.0)
    return means


def fairness_audit(
    run_a: "RunRecord",
    run_b: "RunRecord",
    matching: MatchingConfig,
    envy_margin: float = 0.15,
) -> FairnessReport:
    """Fairness audit of run_a against its paired baseline run_b.

    Requires both runs to share a seed and an initial population (same
    base scenario, institutions aside). IR violations are counted over
    the formation logs of both runs; envy, the gender gap, and the tier
    welfare means are evaluated on each run's final population, with
    tier_gini_delta = gini(tier means of a) - gini(tier means of b).
    """
    if run_a.seed != run_b.seed:
        raise ComparabilityError(
            f"paired runs must share a seed, got {run_a.seed} vs {run_b.seed}"
        )
    if run_a.base_hash != run_b.base_hash:
        raise ComparabilityError("paired runs must share the base scenario config")
    violations = 0
    for record in (run_a, run_b):
        for f in record.formations:
            if (
                f.utility_proposer < f.reservation_proposer
                or f.utility_target < f.reservation_target
            ):
                violations += 1
    pop_a = run_a.final_population
    envy = _envy_count(pop_a, matching, envy_margin)
    delta = gini(_tier_mean_welfare(pop_a, matching)) - gini(
        _tier_mean_welfare(run_b.final_population, matching)
    )
    welf = welfare_all(pop_a, matching)
    males = np.array(
        [welf[a.id] for a in pop_a.living_adults() if a.gender is Gender.MALE]
    )
    females = np.array(
        [welf[a.id] for a in pop_a.living_adults() if a.gender is Gender.FEMALE]
    )
    gap = float(abs(males.mean() - females.mean())) if males.size and females.size else 0.0
    return FairnessReport(
        individual_rationality_violations=violations,
        envy_count=envy,
        tier_gini_delta=delta,
        gender_welfare_gap=gap,
        gender_welfare_t_stat=_welch_t(males, females),
        envy_margin=envy_margin,
    )


def build_frame(
    pop: Population,
    step: int,
    matching: MatchingConfig,
    tfr_result: TfrResult,
    births: int,
    deaths: int,
    welf: dict[int, float] | None = None,
) -> MetricsFrame:
    """Assemble one step's MetricsFrame from current population state."""
    adults = pop.living_adults()
    if welf is None:
        welf = welfare_all(pop, matching)
    cells: dict[tuple[Tier, Gender], float] = {}
    for tier, gender in CELL_ORDER_COLUMNS:
        vals = [welf[a.id] for a in adults if a.tier is tier and a.gender is gender]
        cells[(tier, gender)] = float(np.mean(vals)) if vals else 0.0
    wealth_values = [a.wealth for a in adults]
    welfare_values = list(welf.values())
    stability = stability_proxy(pop)
    return MetricsFrame(
        step=step,
        welfare_cells=cells,
        tfr=tfr_result.value,
        gini_wealth=gini(wealth_values) if wealth_values else 0.0,
        gini_welfare=gini(welfare_values) if welfare_values else 0.0,
        unpartnered_male_frac=stability.fraction,
        births=births,
        deaths=deaths,
        mean_welfare=float(np.mean(welfare_values)) if welfare_values else 0.0,
        stability_flag=stability.flagged,
        tfr_zero_exposure_bins=tfr_result.zero_exposure_bins,
    )
