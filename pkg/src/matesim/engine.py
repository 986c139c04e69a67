"""Run orchestration: the per-step phase cycle, run records, comparisons.

One step advances the population through maintenance (divorce hazard
and companion dissolution), proposal, matching, reproduction, and
update (aging, economy, mortality, inheritance), then re-derives tiers
and emits a MetricsFrame. With invariant checking enabled (the
default), a full structural scan runs after every step and aborts the
run with the violated invariant's name rather than continuing from a
corrupt state.

Determinism contract: a run is a pure function of (config, seed). All
stochastic phases consume the run's single generator in ascending
agent-id order, records carry no wall-clock or host information in any
serialized form, and paired runs (same seed, different institutions)
start from deep copies of one initial population and one generator
state.
"""

from __future__ import annotations

import copy
import time
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig, config_base_hash, config_hash
from .errors import ConfigError, InvariantError
from .institutions import InstitutionRules, preset_rules
from .lifecycle import (
    BirthEvent,
    EstateSettlement,
    WealthLedger,
    reproduce_phase,
    total_wealth,
    update_phase,
)
from .matching import (
    FormationRecord,
    maintenance_phase,
    match_phase,
    propose_phase,
)
from .metrics import (
    AGE_BINS,
    FairnessReport,
    MetricsFrame,
    age_bin,
    build_frame,
    fairness_audit,
    tfr,
    welfare_all,
)
from .network import avg_path_length, clustering_coefficient, cross_tier_stats, snapshot
from .population import (
    Gender,
    Population,
    Tier,
    init_population,
    reassign_tiers,
    scan_invariants,
    cohort_wealth_percentiles,
)
from .strategy import CELL_ORDER, StrategyParams, discounted_reward

__all__ = [
    "RunRecord",
    "PairedResult",
    "ComparisonReport",
    "run",
    "compare",
    "cell_rewards",
    "make_cell_reward_evaluator",
]


@dataclass
class RunRecord:
    """Everything one run produced.

    final_population and wall_time stay in memory only: serialized
    output must not depend on machine speed, and the population is
    re-derivable from (config, seed).
    """

    config_hash: str
    base_hash: str
    seed: int
    institution: str
    frames: list[MetricsFrame]
    formations: list[FormationRecord]
    settlements: list[EstateSettlement]
    birth_events: list[BirthEvent]
    ledger: WealthLedger
    initial_wealth: float
    graph_summary: dict
    fairness: FairnessReport
    final_population: Population
    births_by_bin: np.ndarray
    exposure_by_bin: np.ndarray
    wall_time: float
    cell_traces: dict | None = None

    @property
    def final_frame(self) -> MetricsFrame:
        return self.frames[-1]

    def window_mean_welfare(self, window: int) -> float:
        take = self.frames[-min(window, len(self.frames)):]
        return float(np.mean([f.mean_welfare for f in take]))

    def window_cell_welfare(self, window: int) -> dict[tuple[Tier, Gender], float]:
        take = self.frames[-min(window, len(self.frames)):]
        return {
            cell: float(np.mean([f.welfare_cells[cell] for f in take]))
            for cell in take[0].welfare_cells
        }


def _graph_summary(pop: Population) -> dict:
    g = snapshot(pop)
    path = avg_path_length(g)
    stats = cross_tier_stats(g)
    degrees = {}
    for a, b, _ in g.edges:
        degrees[a] = degrees.get(a, 0) + 1
        degrees[b] = degrees.get(b, 0) + 1
    return {
        "nodes": len(g.nodes),
        "edges": len(g.edges),
        "max_degree": max(degrees.values()) if degrees else 0,
        "clustering": clustering_coefficient(g),
        "avg_path_length": path.value,
        "path_singleton": path.singleton,
        "b_bridging_share": stats.b_bridging_share,
        "ac_two_paths": stats.ac_two_paths,
        "cross_tier_edges": {
            f"{lo}-{hi}:{kind}": count
            for (lo, hi, kind), count in sorted(stats.edge_counts.items())
        },
    }


def _single_run_fairness(
    record_formations: list[FormationRecord],
    pop: Population,
    config: ScenarioConfig,
) -> FairnessReport:
    from .metrics import _envy_count, _welch_t  # shared internals

    violations = sum(
        1
        for f in record_formations
        if f.utility_proposer < f.reservation_proposer
        or f.utility_target < f.reservation_target
    )
    envy = _envy_count(pop, config.matching, 0.15)
    welf = welfare_all(pop, config.matching)
    males = np.array([welf[a.id] for a in pop.living_adults() if a.gender is Gender.MALE])
    females = np.array([welf[a.id] for a in pop.living_adults() if a.gender is Gender.FEMALE])
    gap = float(abs(males.mean() - females.mean())) if males.size and females.size else 0.0
    return FairnessReport(
        individual_rationality_violations=violations,
        envy_count=envy,
        tier_gini_delta=None,
        gender_welfare_gap=gap,
        gender_welfare_t_stat=_welch_t(males, females),
    )


def run(
    config: ScenarioConfig,
    seed: int | None = None,
    rules: InstitutionRules | None = None,
    strategy: StrategyParams | None = None,
    initial_pop: Population | None = None,
    record_traces: bool = False,
    collect_formations: bool = True,
) -> RunRecord:
    """Execute one full simulation and return its RunRecord.

    The seed argument overrides config.simulation.seed; one of the two
    must be present. Passing initial_pop (with its generator state, as
    produced by init_population with the same seed) makes paired runs
    share their starting point exactly.
    """
    if seed is None:
        seed = config.simulation.seed
    if seed is None:
        raise ConfigError("a run seed is required (simulation.seed or --seed)")
    rules = rules if rules is not None else config.institution
    strategy = strategy if strategy is not None else StrategyParams.from_config(config)
    started = time.perf_counter()
    if initial_pop is not None:
        pop = copy.deepcopy(initial_pop)
    else:
        pop = init_population(config, seed)
    rng = pop.rng
    horizon = config.simulation.horizon
    n_bins = len(AGE_BINS)
    births_by_bin = np.zeros((horizon, n_bins), dtype=np.float64)
    exposure_by_bin = np.zeros((horizon, n_bins), dtype=np.float64)
    frames: list[MetricsFrame] = []
    formations: list[FormationRecord] = [] if collect_formations else None
    all_settlements: list[EstateSettlement] = []
    all_births: list[BirthEvent] = []
    ledger = WealthLedger()
    initial_wealth = total_wealth(pop)
    traces = (
        {cell: {"welfare": [], "fertility": [], "stability": []} for cell in CELL_ORDER}
        if record_traces
        else None
    )

    for t in range(1, horizon + 1):
        pop.step = t
        # Mate choice ranks resources against age peers; welfare uses the
        # population-wide percentile computed inside welfare_all below.
        pcts = cohort_wealth_percentiles(pop.living_adults())
        maintenance_phase(pop, rules, strategy, config.matching, rng, pcts)
        proposals = propose_phase(pop, rules, strategy, config.matching, rng, pcts)
        match_phase(
            pop, proposals, rules, strategy, config.matching, t, pcts,
            formation_log=formations,
        )
        # Exposure counted before births: woman-years lived in each bin.
        row = t - 1
        for agent in pop:
            if agent.alive and agent.gender is Gender.FEMALE:
                b = age_bin(agent.age)
                if b is not None:
                    exposure_by_bin[row, b] += 1.0
        events = reproduce_phase(pop, rules, strategy, config, rng, ledger)
        for ev in events:
            b = age_bin(ev.mother_age)
            if b is not None:
                births_by_bin[row, b] += 1.0
        all_births.extend(events)
        result = update_phase(pop, rules, config, rng, ledger)
        all_settlements.extend(result.settlements)
        reassign_tiers(pop, config)
        if config.simulation.check_invariants:
            scan_invariants(pop, rules)
        tfr_result = tfr(
            births_by_bin[: t], exposure_by_bin[: t], config.simulation.tfr_window
        )
        welf = welfare_all(pop, config.matching)
        for agent in pop.living_adults():
            agent.welfare_history.append(welf[agent.id])
        try:
            frame = build_frame(
                pop, t, config.matching, tfr_result,
                births=len(events), deaths=len(result.deaths), welf=welf,
            )
        except ValueError as exc:
            raise InvariantError("metrics_range", str(exc))
        frames.append(frame)
        if traces is not None:
            stability_signal = 1.0 - frame.unpartnered_male_frac
            birth_credit: dict[int, int] = {}
            for ev in events:
                birth_credit[ev.mother] = birth_credit.get(ev.mother, 0) + 1
                birth_credit[ev.father] = birth_credit.get(ev.father, 0) + 1
            members: dict[tuple[Tier, Gender], list] = {cell: [] for cell in CELL_ORDER}
            for agent in pop.living_adults():
                members[(agent.tier, agent.gender)].append(agent)
            for cell in CELL_ORDER:
                group = members[cell]
                if group:
                    w_mean = float(np.mean([welf[a.id] for a in group]))
                    f_mean = float(
                        np.mean([birth_credit.get(a.id, 0) for a in group])
                    )
                else:
                    w_mean = 0.0
                    f_mean = 0.0
                traces[cell]["welfare"].append(w_mean)
                traces[cell]["fertility"].append(f_mean)
                traces[cell]["stability"].append(stability_signal)

    record = RunRecord(
        config_hash=config_hash(config),
        base_hash=config_base_hash(config),
        seed=seed,
        institution=rules.name,
        frames=frames,
        formations=formations if formations is not None else [],
        settlements=all_settlements,
        birth_events=all_births,
        ledger=ledger,
        initial_wealth=initial_wealth,
        graph_summary=_graph_summary(pop),
        fairness=_single_run_fairness(
            formations if formations is not None else [], pop, config
        ),
        final_population=pop,
        births_by_bin=births_by_bin,
        exposure_by_bin=exposure_by_bin,
        wall_time=time.perf_counter() - started,
    )
    record.cell_traces = traces
    return record


# --- Paired comparison ------------------------------------------------------


# Years per generation for the wealth-dispersion marks reported by compare.
GENERATION_YEARS = 25


@dataclass
class PairedResult:
    """One seed's paired runs and the derived deltas (a minus b)."""

    seed: int
    record_a: RunRecord
    record_b: RunRecord
    welfare_delta: float
    cell_welfare_a: dict[tuple[Tier, Gender], float]
    cell_welfare_b: dict[tuple[Tier, Gender], float]
    cell_gain: dict[tuple[Tier, Gender], float]
    tfr_a: float
    tfr_b: float
    gini_wealth_a: float
    gini_wealth_b: float
    gini_marks_a: list[float]
    gini_marks_b: list[float]
    unpartnered_male_a: float
    unpartnered_male_b: float
    stability_flag_a: bool
    stability_flag_b: bool
    fairness: FairnessReport


@dataclass
class ComparisonReport:
    institution_a: str
    institution_b: str
    seeds: list[int]
    window: int
    pairs: list[PairedResult] = field(default_factory=list)

    def count(self, predicate) -> int:
        return sum(1 for p in self.pairs if predicate(p))


def compare(
    config: ScenarioConfig,
    seeds: list[int],
    institution_a: InstitutionRules | None = None,
    institution_b: InstitutionRules | None = None,
) -> ComparisonReport:
    """Run paired simulations per seed and summarize the deltas.

    Both institutions start each seed from an identical initial
    population and generator state. Defaults compare the capped
    polyamory preset (a) against the monogamy baseline (b).
    """
    if len(seeds) < 2:
        raise ConfigError(f"compare requires at least 2 seeds, got {len(seeds)}")
    rules_a = institution_a if institution_a is not None else preset_rules("sps")
    rules_b = institution_b if institution_b is not None else preset_rules("monogamy")
    window = config.simulation.compare_window
    report = ComparisonReport(
        institution_a=rules_a.name,
        institution_b=rules_b.name,
        seeds=list(seeds),
        window=window,
    )
    marks = list(range(GENERATION_YEARS, config.simulation.horizon + 1, GENERATION_YEARS))
    for seed in seeds:
        base_pop = init_population(config, seed)
        rec_a = run(config, seed, rules=rules_a, initial_pop=base_pop)
        rec_b = run(config, seed, rules=rules_b, initial_pop=base_pop)
        cells_a = rec_a.window_cell_welfare(window)
        cells_b = rec_b.window_cell_welfare(window)
        # Gain of each cell relative to its paired baseline cell.
        cell_gain = {cell: cells_a[cell] - cells_b[cell] for cell in cells_a}
        report.pairs.append(
            PairedResult(
                seed=seed,
                record_a=rec_a,
                record_b=rec_b,
                welfare_delta=rec_a.window_mean_welfare(window)
                - rec_b.window_mean_welfare(window),
                cell_welfare_a=cells_a,
                cell_welfare_b=cells_b,
                cell_gain=cell_gain,
                tfr_a=rec_a.final_frame.tfr,
                tfr_b=rec_b.final_frame.tfr,
                gini_wealth_a=rec_a.final_frame.gini_wealth,
                gini_wealth_b=rec_b.final_frame.gini_wealth,
                gini_marks_a=[rec_a.frames[m - 1].gini_wealth for m in marks],
                gini_marks_b=[rec_b.frames[m - 1].gini_wealth for m in marks],
                unpartnered_male_a=rec_a.final_frame.unpartnered_male_frac,
                unpartnered_male_b=rec_b.final_frame.unpartnered_male_frac,
                stability_flag_a=rec_a.final_frame.stability_flag,
                stability_flag_b=rec_b.final_frame.stability_flag,
                fairness=fairness_audit(rec_a, rec_b, config.matching),
            )
        )
    return report


# --- Strategy-adaptation plumbing -------------------------------------------


def cell_rewards(record: RunRecord, config: ScenarioConfig) -> dict:
    """Mean discounted reward per cell from a traced run."""
    if record.cell_traces is None:
        raise ValueError("run was not executed with record_traces=True")
    out = {}
    for cell, trace in record.cell_traces.items():
        out[cell] = discounted_reward(
            trace["welfare"], trace["fertility"], trace["stability"], config.reward
        )
    return out


def make_cell_reward_evaluator(
    config: ScenarioConfig,
    seed: int,
    rules: InstitutionRules | None = None,
):
    """Evaluator for adapt_strategies: one traced run per candidate."""

    def evaluate(params: StrategyParams) -> dict:
        record = run(
            config,
            seed,
            rules=rules,
            strategy=params,
            record_traces=True,
            collect_formations=False,
        )
        return cell_rewards(record, config)

    return evaluate
