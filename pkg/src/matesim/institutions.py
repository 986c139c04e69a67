"""Institution rule sets governing partnership formation.

An institution is a small bundle of caps and policy levers that the
matcher consults before admitting any new relationship. Two presets are
shipped: "sps" (one spouse plus up to two companions, generous rearing
subsidy, mild motherhood penalty) and "monogamy" (single spouse, no
companions, steeper penalty, thin subsidy). All fields are expressible
in the scenario config so intermediate designs can be explored, and the
policy optimizer mutates a subset of them directly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

from .errors import ConfigError

if TYPE_CHECKING:
    from .population import Agent, Relationship

__all__ = [
    "InstitutionRules",
    "PRESETS",
    "preset_rules",
    "may_form",
    "dissolve",
]


@dataclass(frozen=True)
class InstitutionRules:
    """Caps and policy levers for one institutional design.

    Invariants enforced at construction: caps are non-negative and the
    total cap is at least 1 but never exceeds spouse_cap + companion_cap,
    and the rate-like levers live in [0, 1].
    """

    name: str
    spouse_cap: int
    companion_cap: int
    total_cap: int
    rearing_subsidy: float
    motherhood_penalty_rate: float
    divorce_hazard: float
    companion_inheritance: bool = False
    gender_symmetric: bool = True

    def __post_init__(self) -> None:
        if self.spouse_cap < 0 or self.companion_cap < 0:
            raise ConfigError("partner caps must be non-negative")
        if self.total_cap < 1:
            raise ConfigError("total partner cap must be at least 1")
        if self.total_cap > self.spouse_cap + self.companion_cap:
            raise ConfigError(
                "total partner cap cannot exceed spouse cap plus companion cap"
            )
        for field in ("rearing_subsidy", "motherhood_penalty_rate", "divorce_hazard"):
            value = getattr(self, field)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{field} must lie in [0, 1], got {value}")

    def with_overrides(self, **kwargs) -> "InstitutionRules":
        return replace(self, **kwargs)


def _sps() -> InstitutionRules:
    return InstitutionRules(
        name="sps",
        spouse_cap=1,
        companion_cap=2,
        total_cap=3,
        rearing_subsidy=0.8,
        motherhood_penalty_rate=0.02,
        divorce_hazard=0.02,
        companion_inheritance=False,
        gender_symmetric=True,
    )


def _monogamy() -> InstitutionRules:
    return InstitutionRules(
        name="monogamy",
        spouse_cap=1,
        companion_cap=0,
        total_cap=1,
        rearing_subsidy=0.2,
        motherhood_penalty_rate=0.07,
        divorce_hazard=0.02,
        companion_inheritance=False,
        gender_symmetric=True,
    )


PRESETS = {"sps": _sps, "monogamy": _monogamy}


def preset_rules(name: str) -> InstitutionRules:
    try:
        return PRESETS[name]()
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ConfigError(f"unknown institution preset {name!r} (known: {known})")


def may_form(a: "Agent", b: "Agent", kind, rules: InstitutionRules) -> bool:
    """Check whether a new relationship of `kind` between a and b is legal.

    The check is symmetric in its arguments and conservative: both ends
    must be living adults, distinct, not already partnered to each other,
    not parent/child kin, and both must have a free slot of the right
    kind as well as a free slot under the total cap.
    """
    from .population import RelationshipKind

    if a.id == b.id:
        return False
    for agent in (a, b):
        if not agent.alive or not agent.is_adult:
            return False
    if b.id in a.partner_ids:
        return False
    # No parent/child pairings, in either direction.
    if a.parents and b.id in a.parents:
        return False
    if b.parents and a.id in b.parents:
        return False
    for agent in (a, b):
        if agent.partner_count >= rules.total_cap:
            return False
        if kind is RelationshipKind.SPOUSE:
            if len(agent.spouses) >= rules.spouse_cap:
                return False
        else:
            if len(agent.companions) >= rules.companion_cap:
                return False
    return True


def dissolve(rel: "Relationship", pop) -> None:
    """Remove a relationship from both endpoint agents.

    Both agents record the other as a past partner so that novelty
    scoring does not treat a re-proposal as a fresh face. Dissolving a
    relationship that is no longer held by both ends is an integrity
    error rather than a silent no-op.
    """
    from .errors import IntegrityError
    from .population import RelationshipKind

    a = pop.agent(rel.partner_a)
    b = pop.agent(rel.partner_b)
    bucket = "spouses" if rel.kind is RelationshipKind.SPOUSE else "companions"
    list_a = getattr(a, bucket)
    list_b = getattr(b, bucket)
    if rel not in list_a or rel not in list_b:
        raise IntegrityError(
            f"relationship {rel.partner_a}-{rel.partner_b} not held by both ends"
        )
    list_a.remove(rel)
    list_b.remove(rel)
    a.past_partners.add(b.id)
    b.past_partners.add(a.id)
