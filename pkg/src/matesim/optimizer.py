"""Genetic algorithm over institution parameters.

The genome is the policy vector (spouse cap, companion cap, rearing
subsidy, motherhood penalty rate, divorce hazard). Fitness scalarizes
four objectives over a run's final window:

    w1 * TFR + w2 * mean welfare / 10 + w3 * (1 - unpartnered male
    fraction) - w4 * wealth Gini

with welfare rescaled to O(1) so the weights are comparable. The GA is
a plain generational scheme: elitism of one, tournament selection,
uniform crossover, Gaussian mutation on real genes (sigma 10% of the
gene range) and +/-1 steps on integer genes, all clamped to bounds.
Evaluations reuse a fixed list of seeds across the whole optimization,
so fitness comparisons across generations are like-for-like and the
elitist best-so-far fitness is exactly nondecreasing.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import OptimizerConfig, ScenarioConfig
from .engine import RunRecord, run
from .errors import ConfigError, EvaluationError
from .institutions import InstitutionRules

__all__ = [
    "GENE_SPECS",
    "PolicyGenome",
    "FitnessWeights",
    "OptimizeResult",
    "fitness_from_record",
    "evaluate",
    "ga_step",
    "random_genome",
    "optimize",
    "monogamy_genome",
    "sps_genome",
]

# (name, low, high, is_integer) for every gene, in genome order.
GENE_SPECS: list[tuple[str, float, float, bool]] = [
    ("spouse_cap", 0, 2, True),
    ("companion_cap", 0, 4, True),
    ("rearing_subsidy", 0.0, 1.0, False),
    ("motherhood_penalty_rate", 0.0, 0.2, False),
    ("divorce_hazard", 0.0, 0.1, False),
]


@dataclass
class PolicyGenome:
    spouse_cap: int
    companion_cap: int
    rearing_subsidy: float
    motherhood_penalty_rate: float
    divorce_hazard: float
    fitness: float | None = None

    def clamp(self) -> None:
        for name, lo, hi, is_int in GENE_SPECS:
            value = getattr(self, name)
            value = min(hi, max(lo, value))
            if is_int:
                value = int(round(value))
            setattr(self, name, value)
        # A zero-capacity institution is unconstructible (total cap >= 1);
        # repair to the minimal viable design instead.
        if self.spouse_cap + self.companion_cap == 0:
            self.spouse_cap = 1

    def genes(self) -> tuple:
        return tuple(getattr(self, name) for name, *_ in GENE_SPECS)

    def as_rules(self, base: InstitutionRules) -> InstitutionRules:
        return base.with_overrides(
            name="genome",
            spouse_cap=self.spouse_cap,
            companion_cap=self.companion_cap,
            total_cap=self.spouse_cap + self.companion_cap,
            rearing_subsidy=self.rearing_subsidy,
            motherhood_penalty_rate=self.motherhood_penalty_rate,
            divorce_hazard=self.divorce_hazard,
        )

    def copy(self) -> "PolicyGenome":
        return replace(self)


def monogamy_genome() -> PolicyGenome:
    return PolicyGenome(1, 0, 0.2, 0.07, 0.02)


def sps_genome() -> PolicyGenome:
    return PolicyGenome(1, 2, 0.8, 0.02, 0.02)


@dataclass(frozen=True)
class FitnessWeights:
    tfr: float = 1.0
    welfare: float = 1.0
    stability: float = 1.0
    gini: float = 1.0

    def __post_init__(self) -> None:
        values = (self.tfr, self.welfare, self.stability, self.gini)
        if any(w < 0 for w in values):
            raise ConfigError("fitness weights must be non-negative")
        if all(w == 0 for w in values):
            raise ConfigError("fitness weights must not all be zero")

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> "FitnessWeights":
        w = config.optimizer.fitness_weights
        return cls(tfr=w[0], welfare=w[1], stability=w[2], gini=w[3])


def fitness_from_record(record: RunRecord, weights: FitnessWeights, window: int = 10) -> float:
    """Scalarized fitness of one run over its trailing window."""
    take = record.frames[-min(window, len(record.frames)):]
    tfr_term = float(np.mean([f.tfr for f in take]))
    welfare_term = float(np.mean([f.mean_welfare for f in take])) / 10.0
    stability_term = 1.0 - float(np.mean([f.unpartnered_male_frac for f in take]))
    gini_term = float(np.mean([f.gini_wealth for f in take]))
    return (
        weights.tfr * tfr_term
        + weights.welfare * welfare_term
        + weights.stability * stability_term
        - weights.gini * gini_term
    )


def evaluate(
    genome: PolicyGenome,
    weights: FitnessWeights,
    seeds: list[int],
    config: ScenarioConfig,
) -> float:
    """Mean fitness of a genome over the evaluation seeds.

    Each seed triggers one full simulation with the genome's rules
    applied over the scenario's institution base. A failed simulation
    surfaces as an EvaluationError carrying the offending seed.
    """
    if not seeds:
        raise ConfigError("evaluate requires at least one seed")
    rules = genome.as_rules(config.institution)
    window = config.simulation.compare_window
    total = 0.0
    for seed in seeds:
        try:
            record = run(config, seed, rules=rules, collect_formations=False)
        except Exception as exc:  # noqa: BLE001 - rewrapped with seed context
            raise EvaluationError(seed, str(exc)) from exc
        total += fitness_from_record(record, weights, window)
    return total / len(seeds)


def _tournament(
    genomes: list[PolicyGenome], k: int, rng: np.random.Generator
) -> PolicyGenome:
    k = min(k, len(genomes))
    idx = rng.choice(len(genomes), size=k, replace=False)
    best = min(idx, key=lambda i: (-genomes[i].fitness, i))
    return genomes[best]


def ga_step(
    genomes: list[PolicyGenome],
    rng: np.random.Generator,
    params: OptimizerConfig,
) -> list[PolicyGenome]:
    """Produce the next generation: elitism, tournaments, crossover, mutation.

    All parents must carry a fitness. The elite keeps its fitness (it
    is unchanged); every other child is returned unevaluated.
    """
    if len(genomes) < 2:
        raise ConfigError("ga_step needs a population of at least 2 genomes")
    if any(g.fitness is None for g in genomes):
        raise ValueError("all genomes must be evaluated before ga_step")
    elite = max(range(len(genomes)), key=lambda i: (genomes[i].fitness, -i))
    next_gen: list[PolicyGenome] = [genomes[elite].copy()]
    while len(next_gen) < params.population_size:
        p1 = _tournament(genomes, params.tournament_k, rng)
        p2 = _tournament(genomes, params.tournament_k, rng)
        child = p1.copy()
        child.fitness = None
        if rng.random() < params.crossover_rate:
            for name, *_ in GENE_SPECS:
                if rng.random() < 0.5:
                    setattr(child, name, getattr(p2, name))
        for name, lo, hi, is_int in GENE_SPECS:
            if rng.random() < params.mutation_rate:
                if is_int:
                    step = 1 if rng.random() < 0.5 else -1
                    setattr(child, name, getattr(child, name) + step)
                else:
                    sigma = 0.1 * (hi - lo)
                    setattr(child, name, getattr(child, name) + rng.normal(0.0, sigma))
        child.clamp()
        next_gen.append(child)
    return next_gen


def random_genome(rng: np.random.Generator) -> PolicyGenome:
    values = {}
    for name, lo, hi, is_int in GENE_SPECS:
        if is_int:
            values[name] = int(rng.integers(int(lo), int(hi) + 1))
        else:
            values[name] = float(rng.uniform(lo, hi))
    genome = PolicyGenome(**values)
    genome.clamp()
    return genome


@dataclass
class OptimizeResult:
    best: PolicyGenome
    history: list[dict]
    eval_seeds: list[int]
    weights: FitnessWeights


def optimize(
    config: ScenarioConfig,
    seed: int,
    weights: FitnessWeights | None = None,
    params: OptimizerConfig | None = None,
) -> OptimizeResult:
    """Run the GA and return the best genome plus a per-generation log.

    The initial population seeds both preset designs alongside random
    genomes; evaluation seeds are derived deterministically from the
    optimizer seed and shared by every evaluation in the optimization.
    """
    params = params or config.optimizer
    weights = weights or FitnessWeights.from_config(config)
    rng = np.random.default_rng(seed)
    eval_seeds = [seed * 1000 + i for i in range(params.eval_seeds)]
    population = [sps_genome(), monogamy_genome()]
    while len(population) < params.population_size:
        population.append(random_genome(rng))
    population = population[: params.population_size]
    history: list[dict] = []
    for generation in range(params.generations):
        for genome in population:
            if genome.fitness is None:
                genome.fitness = evaluate(genome, weights, eval_seeds, config)
        best = max(population, key=lambda g: g.fitness)
        history.append(
            {
                "generation": generation,
                "best_fitness": best.fitness,
                "mean_fitness": float(np.mean([g.fitness for g in population])),
                **{name: getattr(best, name) for name, *_ in GENE_SPECS},
            }
        )
        if generation < params.generations - 1:
            population = ga_step(population, rng, params)
    best = max(population, key=lambda g: g.fitness)
    return OptimizeResult(
        best=best.copy(), history=history, eval_seeds=eval_seeds, weights=weights
    )
