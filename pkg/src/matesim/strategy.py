"""Per-cell agent strategies, discounted reward, and hill-climbing adaptation.

Strategies are shared within each (tier, gender) cell: six cells, each
holding a reservation utility, a proposal budget, a spouse-vs-companion
preference, a fertility desire, and a dissolution threshold. Companion
proposals are judged against a discounted reservation (reservation times
companion_discount), reflecting that a companion slot demands less than
a marriage.

Adaptation replaces policy-gradient training with something far more
tractable and fully deterministic given a seed: a coordinate-wise
hill-climbing pass that perturbs one parameter of one cell at a time,
re-evaluates that cell's mean discounted reward, and keeps the change
only on strict improvement. Every proposed move lands in an audit trail
whether accepted or not.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import RewardConfig, ScenarioConfig
from .errors import ConfigError
from .population import Gender, RelationshipKind, Tier

__all__ = [
    "CellStrategy",
    "StrategyParams",
    "AdaptationMove",
    "PARAM_BOUNDS",
    "CELL_ORDER",
    "discounted_reward",
    "adapt_strategies",
]

# Legal ranges for each adaptable parameter. proposal_budget is integer.
PARAM_BOUNDS: dict[str, tuple[float, float]] = {
    "reservation_utility": (0.0, 1.0),
    "proposal_budget": (0, 5),
    "kind_preference": (0.0, 1.0),
    "fertility_desire": (0.0, 1.0),
    "dissolution_threshold": (0.0, 1.0),
}

CELL_ORDER: list[tuple[Tier, Gender]] = [
    (tier, gender) for tier in (Tier.A, Tier.B, Tier.C) for gender in (Gender.MALE, Gender.FEMALE)
]


@dataclass
class CellStrategy:
    reservation_utility: float
    proposal_budget: int
    kind_preference: float
    fertility_desire: float
    dissolution_threshold: float

    def clamp(self) -> None:
        for name, (lo, hi) in PARAM_BOUNDS.items():
            value = getattr(self, name)
            value = min(hi, max(lo, value))
            if name == "proposal_budget":
                value = int(round(value))
            setattr(self, name, value)


@dataclass
class StrategyParams:
    """Strategy table for all six (tier, gender) cells."""

    cells: dict[tuple[Tier, Gender], CellStrategy]
    companion_discount: float = 0.6

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> "StrategyParams":
        s = config.strategy
        reservations = {Tier.A: s.reservation_a, Tier.B: s.reservation_b, Tier.C: s.reservation_c}
        cells = {
            (tier, gender): CellStrategy(
                # female cells hold a higher spousal bar, same calibration
                # basis as the gendered preference weights
                reservation_utility=min(
                    reservations[tier]
                    * (s.female_choosiness if gender is Gender.FEMALE else 1.0),
                    1.0,
                ),
                proposal_budget=s.proposal_budget,
                kind_preference=s.kind_preference,
                fertility_desire=s.fertility_desire,
                dissolution_threshold=s.dissolution_threshold,
            )
            for tier, gender in CELL_ORDER
        }
        return cls(cells=cells, companion_discount=s.companion_discount)

    def cell(self, tier: Tier, gender: Gender) -> CellStrategy:
        return self.cells[(tier, gender)]

    def reservation(self, tier: Tier, gender: Gender, kind: RelationshipKind) -> float:
        base = self.cells[(tier, gender)].reservation_utility
        if kind is RelationshipKind.COMPANION:
            return base * self.companion_discount
        return base

    def copy(self) -> "StrategyParams":
        return StrategyParams(
            cells={key: copy.copy(cell) for key, cell in self.cells.items()},
            companion_discount=self.companion_discount,
        )


def discounted_reward(
    welfare: Sequence[float],
    fertility: Sequence[float],
    stability: Sequence[float],
    reward: RewardConfig,
) -> float:
    """Discounted sum over a trace: sum_t gamma^t (alpha*W + beta*F + delta*S).

    The three traces must share a length; step 0 is undiscounted.
    """
    w = np.asarray(welfare, dtype=np.float64)
    f = np.asarray(fertility, dtype=np.float64)
    s = np.asarray(stability, dtype=np.float64)
    if not (w.shape == f.shape == s.shape) or w.ndim != 1:
        raise ValueError("welfare, fertility, and stability traces must be 1-d and equal length")
    if w.size == 0:
        return 0.0
    per_step = reward.alpha * w + reward.beta * f + reward.delta * s
    discounts = reward.gamma ** np.arange(w.size, dtype=np.float64)
    return float(np.dot(discounts, per_step))


@dataclass(frozen=True)
class AdaptationMove:
    """One proposed perturbation in the hill-climbing audit trail."""

    round: int
    tier: Tier
    gender: Gender
    parameter: str
    old_value: float
    new_value: float
    reward_before: float
    reward_after: float
    accepted: bool


# Evaluator contract: params in, one mean discounted reward per cell out.
CellRewardFn = Callable[[StrategyParams], dict[tuple[Tier, Gender], float]]

_PARAM_ORDER = [
    "reservation_utility",
    "proposal_budget",
    "kind_preference",
    "fertility_desire",
    "dissolution_threshold",
]


def adapt_strategies(
    params: StrategyParams,
    evaluate: CellRewardFn,
    rng: np.random.Generator,
    rounds: int = 1,
    step_size: float = 0.05,
    step_decay: float = 0.7,
) -> tuple[StrategyParams, list[AdaptationMove]]:
    """Coordinate hill-climbing over all cells and parameters.

    Each round walks cells in a fixed order (A/B/C by male/female) and
    parameters in a fixed order; for every coordinate it proposes one
    perturbation with a random sign, accepts only a strict improvement
    of the perturbed cell's own reward, and logs the move either way.
    The perturbation magnitude anneals by step_decay each round. With
    rounds=0 the input is returned unchanged with an empty audit trail.
    """
    if rounds < 0:
        raise ConfigError(f"adaptation rounds must be >= 0, got {rounds}")
    current = params.copy()
    audit: list[AdaptationMove] = []
    if rounds == 0:
        return current, audit
    rewards = evaluate(current)
    for rnd in range(rounds):
        magnitude = step_size * (step_decay ** rnd)
        for tier, gender in CELL_ORDER:
            for name in _PARAM_ORDER:
                cell = current.cell(tier, gender)
                old = getattr(cell, name)
                sign = 1.0 if rng.random() < 0.5 else -1.0
                delta = 1.0 if name == "proposal_budget" else magnitude
                candidate = current.copy()
                cand_cell = candidate.cell(tier, gender)
                setattr(cand_cell, name, old + sign * delta)
                cand_cell.clamp()
                new = getattr(cand_cell, name)
                if new == old:
                    # Clamped back to where it started: nothing to test.
                    continue
                cand_rewards = evaluate(candidate)
                before = rewards[(tier, gender)]
                after = cand_rewards[(tier, gender)]
                accepted = after > before
                audit.append(
                    AdaptationMove(
                        round=rnd,
                        tier=tier,
                        gender=gender,
                        parameter=name,
                        old_value=float(old),
                        new_value=float(new),
                        reward_before=before,
                        reward_after=after,
                        accepted=accepted,
                    )
                )
                if accepted:
                    current = candidate
                    rewards = cand_rewards
    return current, audit
