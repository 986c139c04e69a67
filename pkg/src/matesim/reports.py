"""Serialization of run outputs: frame CSVs, record JSON, edge lists.

Files are deterministic: float fields use repr (shortest round-trip
form), keys are sorted, and nothing derived from wall-clock time or
host identity is written. Writes go through a temp file and an atomic
rename so partially written outputs never appear under the final name.
"""

from __future__ import annotations

import dataclasses
import json
import os
from typing import TYPE_CHECKING

from .metrics import CELL_ORDER_COLUMNS
from .population import Gender, Tier

if TYPE_CHECKING:
    from .engine import ComparisonReport, RunRecord

__all__ = [
    "CSV_HEADER",
    "frames_to_csv",
    "write_run_json",
    "write_comparison_csv",
    "write_comparison_json",
    "write_optimizer_csv",
]

CSV_HEADER = (
    "step,institution,seed,welfare_AM,welfare_AF,welfare_BM,welfare_BF,"
    "welfare_CM,welfare_CF,tfr,gini_wealth,gini_welfare,"
    "unpartnered_male_frac,births,deaths"
)


def _fmt(value: float) -> str:
    return repr(float(value))


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def frames_to_csv(record: "RunRecord", path: str) -> None:
    """One CSV row per step, fixed column order per the schema header."""
    lines = [CSV_HEADER]
    for frame in record.frames:
        cells = [_fmt(frame.welfare_cells[cell]) for cell in CELL_ORDER_COLUMNS]
        lines.append(
            ",".join(
                [
                    str(frame.step),
                    record.institution,
                    str(record.seed),
                    *cells,
                    _fmt(frame.tfr),
                    _fmt(frame.gini_wealth),
                    _fmt(frame.gini_welfare),
                    _fmt(frame.unpartnered_male_frac),
                    str(frame.births),
                    str(frame.deaths),
                ]
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def _fairness_dict(report) -> dict:
    return dataclasses.asdict(report)


def run_record_dict(record: "RunRecord") -> dict:
    """JSON-ready summary of a run. Excludes wall time by design: output
    must be identical across machines for the same (config, seed)."""
    final = record.final_frame
    return {
        "config_hash": record.config_hash,
        "base_hash": record.base_hash,
        "seed": record.seed,
        "institution": record.institution,
        "steps": len(record.frames),
        "initial_wealth": record.initial_wealth,
        "ledger": record.ledger.as_dict(),
        "totals": {
            "births": sum(f.births for f in record.frames),
            "deaths": sum(f.deaths for f in record.frames),
            "relationships_formed": len(record.formations),
            "estates_settled": len(record.settlements),
        },
        "final": {
            "step": final.step,
            "tfr": final.tfr,
            "mean_welfare": final.mean_welfare,
            "gini_wealth": final.gini_wealth,
            "gini_welfare": final.gini_welfare,
            "unpartnered_male_frac": final.unpartnered_male_frac,
            "stability_flag": final.stability_flag,
        },
        "graph": record.graph_summary,
        "fairness": _fairness_dict(record.fairness),
    }


def write_run_json(record: "RunRecord", path: str) -> None:
    _atomic_write(path, json.dumps(run_record_dict(record), sort_keys=True, indent=2) + "\n")


COMPARISON_CSV_HEADER = (
    "seed,welfare_delta,tfr_a,tfr_b,gini_wealth_a,gini_wealth_b,"
    "gini_marks_a,gini_marks_b,"
    "unpartnered_male_a,unpartnered_male_b,stability_flag_a,stability_flag_b,"
    "largest_gain_cell,c_male_gain,tier_gini_delta,"
    "ir_violations,envy_count,gender_welfare_gap"
)


def _cell_name(cell) -> str:
    tier, gender = cell
    return f"{tier.value}{gender.value}"


def write_comparison_csv(report: "ComparisonReport", path: str) -> None:
    lines = [COMPARISON_CSV_HEADER]
    for pair in report.pairs:
        largest = max(pair.cell_gain, key=lambda c: pair.cell_gain[c])
        lines.append(
            ",".join(
                [
                    str(pair.seed),
                    _fmt(pair.welfare_delta),
                    _fmt(pair.tfr_a),
                    _fmt(pair.tfr_b),
                    _fmt(pair.gini_wealth_a),
                    _fmt(pair.gini_wealth_b),
                    ";".join(_fmt(v) for v in pair.gini_marks_a),
                    ";".join(_fmt(v) for v in pair.gini_marks_b),
                    _fmt(pair.unpartnered_male_a),
                    _fmt(pair.unpartnered_male_b),
                    str(pair.stability_flag_a).lower(),
                    str(pair.stability_flag_b).lower(),
                    _cell_name(largest),
                    _fmt(pair.cell_gain[(Tier.C, Gender.MALE)]),
                    _fmt(pair.fairness.tier_gini_delta),
                    str(pair.fairness.individual_rationality_violations),
                    str(pair.fairness.envy_count),
                    _fmt(pair.fairness.gender_welfare_gap),
                ]
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def comparison_dict(report: "ComparisonReport") -> dict:
    pairs = []
    for pair in report.pairs:
        pairs.append(
            {
                "seed": pair.seed,
                "welfare_delta": pair.welfare_delta,
                "cell_welfare_a": {
                    _cell_name(c): v for c, v in sorted(pair.cell_welfare_a.items())
                },
                "cell_welfare_b": {
                    _cell_name(c): v for c, v in sorted(pair.cell_welfare_b.items())
                },
                "cell_gain": {
                    _cell_name(c): v for c, v in sorted(pair.cell_gain.items())
                },
                "tfr_a": pair.tfr_a,
                "tfr_b": pair.tfr_b,
                "gini_wealth_a": pair.gini_wealth_a,
                "gini_wealth_b": pair.gini_wealth_b,
                "gini_marks_a": pair.gini_marks_a,
                "gini_marks_b": pair.gini_marks_b,
                "unpartnered_male_a": pair.unpartnered_male_a,
                "unpartnered_male_b": pair.unpartnered_male_b,
                "stability_flag_a": pair.stability_flag_a,
                "stability_flag_b": pair.stability_flag_b,
                "fairness": _fairness_dict(pair.fairness),
            }
        )
    n = len(report.pairs)
    return {
        "institution_a": report.institution_a,
        "institution_b": report.institution_b,
        "seeds": report.seeds,
        "window": report.window,
        "aggregate": {
            "welfare_delta_positive": report.count(lambda p: p.welfare_delta > 0),
            "c_male_largest_gain": report.count(
                lambda p: max(p.cell_gain, key=lambda c: p.cell_gain[c])
                == (Tier.C, Gender.MALE)
            ),
            "tfr_a_higher": report.count(lambda p: p.tfr_a > p.tfr_b),
            "gini_wealth_a_lower": report.count(lambda p: p.gini_wealth_a < p.gini_wealth_b),
            "unpartnered_a_not_higher": report.count(
                lambda p: p.unpartnered_male_a <= p.unpartnered_male_b
            ),
            "tier_gini_delta_negative": report.count(
                lambda p: p.fairness.tier_gini_delta < 0
            ),
            "pairs": n,
        },
        "pairs": pairs,
    }


def write_comparison_json(report: "ComparisonReport", path: str) -> None:
    _atomic_write(path, json.dumps(comparison_dict(report), sort_keys=True, indent=2) + "\n")


def write_optimizer_csv(history: list[dict], path: str) -> None:
    from .optimizer import GENE_SPECS

    gene_names = [name for name, *_ in GENE_SPECS]
    header = ",".join(["generation", "best_fitness", "mean_fitness", *gene_names])
    lines = [header]
    for row in history:
        lines.append(
            ",".join(
                [
                    str(row["generation"]),
                    _fmt(row["best_fitness"]),
                    _fmt(row["mean_fitness"]),
                    *[
                        str(row[g]) if isinstance(row[g], int) else _fmt(row[g])
                        for g in gene_names
                    ],
                ]
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")
