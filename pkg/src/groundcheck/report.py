"""Result artifacts: pairwise win counts, summary means, per-record series.

All machine outputs carry full precision; rounding to the customary three
decimals (scores) or one decimal (percent reduction) is a display concern
left to callers. Emission is byte-stable for identical inputs: fixed key
order, fixed float repr, RFC-4180 CSV quoting, no timestamps.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import AbstractSet, Mapping, Sequence

from groundcheck.ensemble import EnsembleDecision, Policy, VariantScoreTriple
from groundcheck.errors import EmptyRunError, InvalidArgumentError
from groundcheck.imaging.variants import Variant
from groundcheck.taxonomy import QuestionCategory

# Columns of the per-category breakdown, in emission order.
_CATEGORY_ORDER = (
    QuestionCategory.OBJECT_IDENTIFICATION,
    QuestionCategory.QUANTITY,
    QuestionCategory.COLOR,
    QuestionCategory.OTHER,
)

# Pairwise comparison predicates: (label, lhs variant, rhs variant).
_PAIRWISE = (
    ("ee_lt_org", Variant.EE, Variant.ORG),
    ("nr_lt_org", Variant.NR, Variant.ORG),
    ("nr_lt_ee", Variant.NR, Variant.EE),
)


@dataclass(frozen=True)
class CountRow:
    overall: int
    per_category: dict[QuestionCategory, int]


@dataclass(frozen=True)
class CaseCounts:
    records: int
    category_sizes: CountRow
    strict_wins: dict[Variant, CountRow]
    shared_min: CountRow
    pairwise: dict[str, CountRow]
    pairwise_ties: dict[str, CountRow]


@dataclass(frozen=True)
class SummaryStats:
    mean_org: float
    mean_ee: float
    mean_nr: float
    mean_ensemble: float
    reduction_pct: float | None

    @property
    def reduction_pct_display(self) -> float | None:
        return None if self.reduction_pct is None else round(self.reduction_pct, 1)


@dataclass(frozen=True)
class ScoredRun:
    """Immutable snapshot of one completed run, ready for emission."""

    triples: tuple[VariantScoreTriple, ...]
    categories: Mapping[str, AbstractSet[QuestionCategory]]
    decisions: Mapping[Policy, tuple[EnsembleDecision, ...]]
    routing_tables: Mapping[Policy, Mapping[QuestionCategory, Variant]] = field(
        default_factory=dict
    )
    config: Mapping[str, object] = field(default_factory=dict)
    quarantined: tuple[Mapping[str, str], ...] = ()


def _count_row(
    record_ids: Sequence[str],
    categories: Mapping[str, AbstractSet[QuestionCategory]],
) -> CountRow:
    per_category = {category: 0 for category in QuestionCategory}
    for record_id in record_ids:
        for category in categories[record_id]:
            per_category[category] += 1
    return CountRow(overall=len(record_ids), per_category=per_category)


def case_counts(
    triples: Sequence[VariantScoreTriple],
    categories: Mapping[str, AbstractSet[QuestionCategory]],
) -> CaseCounts:
    """Evaluate the six comparison predicates overall and per category.

    Strict inequality only; records whose minimum is shared by two or more
    variants are tallied separately as shared-min cases, so the three strict
    winner counts plus the shared-min count always sum to the record count.
    Overlapping categories count a record in every category it belongs to.
    """
    winners: dict[Variant, list[str]] = {v: [] for v in Variant}
    shared: list[str] = []
    pair_hits: dict[str, list[str]] = {label: [] for label, _, _ in _PAIRWISE}
    pair_ties: dict[str, list[str]] = {label: [] for label, _, _ in _PAIRWISE}

    for t in triples:
        scores = {v: t.score(v) for v in Variant}
        lowest = min(scores.values())
        lowest_holders = [v for v in Variant if scores[v] == lowest]
        if len(lowest_holders) == 1:
            winners[lowest_holders[0]].append(t.record_id)
        else:
            shared.append(t.record_id)
        for label, lhs, rhs in _PAIRWISE:
            if scores[lhs] < scores[rhs]:
                pair_hits[label].append(t.record_id)
            elif scores[lhs] == scores[rhs]:
                pair_ties[label].append(t.record_id)

    all_ids = [t.record_id for t in triples]
    return CaseCounts(
        records=len(triples),
        category_sizes=_count_row(all_ids, categories),
        strict_wins={v: _count_row(winners[v], categories) for v in Variant},
        shared_min=_count_row(shared, categories),
        pairwise={label: _count_row(ids, categories) for label, ids in pair_hits.items()},
        pairwise_ties={
            label: _count_row(ids, categories) for label, ids in pair_ties.items()
        },
    )


def summarize(
    triples: Sequence[VariantScoreTriple],
    decisions: Sequence[EnsembleDecision],
) -> SummaryStats:
    """Arithmetic means per variant and for the ensemble decisions.

    reduction_pct = (mean_org - mean_ensemble) / mean_org * 100, defined only
    when mean_org > 0. Full precision; display rounding is the caller's job.
    """
    if not triples or not decisions:
        raise EmptyRunError("cannot summarize an empty run")
    if len(decisions) != len(triples):
        raise InvalidArgumentError(
            f"decision count {len(decisions)} != triple count {len(triples)}"
        )
    n = len(triples)
    mean_org = sum(t.nli_org for t in triples) / n
    mean_ee = sum(t.nli_ee for t in triples) / n
    mean_nr = sum(t.nli_nr for t in triples) / n
    mean_ensemble = sum(d.chosen_score for d in decisions) / n
    reduction = (
        (mean_org - mean_ensemble) / mean_org * 100.0 if mean_org > 0 else None
    )
    return SummaryStats(
        mean_org=mean_org,
        mean_ee=mean_ee,
        mean_nr=mean_nr,
        mean_ensemble=mean_ensemble,
        reduction_pct=reduction,
    )


def _row_cells(row: CountRow) -> list[str]:
    return [str(row.overall)] + [str(row.per_category[c]) for c in _CATEGORY_ORDER]


def render_case_counts_csv(counts: CaseCounts) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["case", "all", *(c.value for c in _CATEGORY_ORDER)])
    writer.writerow(["records", *_row_cells(counts.category_sizes)])
    for variant, label in (
        (Variant.EE, "ee_lowest_strict"),
        (Variant.NR, "nr_lowest_strict"),
        (Variant.ORG, "org_lowest_strict"),
    ):
        writer.writerow([label, *_row_cells(counts.strict_wins[variant])])
    writer.writerow(["shared_min", *_row_cells(counts.shared_min)])
    for label, _, _ in _PAIRWISE:
        writer.writerow([label, *_row_cells(counts.pairwise[label])])
        writer.writerow([f"{label}_tie", *_row_cells(counts.pairwise_ties[label])])
    return out.getvalue()


def render_per_record_csv(
    triples: Sequence[VariantScoreTriple],
    decisions: Sequence[EnsembleDecision],
) -> str:
    """Long-format series: one row per (record, variant), with a chosen flag."""
    chosen = {d.record_id: d.chosen_variant for d in decisions}
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["record_id", "variant", "score", "chosen"])
    for t in triples:
        for variant in (Variant.ORG, Variant.EE, Variant.NR):
            writer.writerow(
                [
                    t.record_id,
                    variant.value,
                    repr(t.score(variant)),
                    1 if chosen.get(t.record_id) == variant else 0,
                ]
            )
    return out.getvalue()


def _summary_payload(run: ScoredRun) -> dict:
    payload: dict = {
        "records_scored": len(run.triples),
        "records_quarantined": len(run.quarantined),
        "config": dict(run.config),
        "policies": {},
    }
    for policy, decisions in run.decisions.items():
        stats = summarize(run.triples, decisions)
        block = {
            "mean_org": stats.mean_org,
            "mean_ee": stats.mean_ee,
            "mean_nr": stats.mean_nr,
            "mean_ensemble": stats.mean_ensemble,
            "reduction_pct": stats.reduction_pct,
        }
        if policy in run.routing_tables:
            block["routing_table"] = {
                category.value: variant.value
                for category, variant in sorted(
                    run.routing_tables[policy].items(), key=lambda kv: kv[0].value
                )
            }
        payload["policies"][policy.value] = block
    return payload


def emit(run: ScoredRun, out_dir: str | Path) -> list[Path]:
    """Write case-count CSV, summary JSON and per-policy record series.

    Byte-stable for identical inputs. Raises EmptyRunError when the run has
    no scored records or no decisions.
    """
    if not run.triples or not run.decisions:
        raise EmptyRunError("refusing to emit artifacts for an empty run")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    written: list[Path] = []

    counts_path = out_dir / "case_counts.csv"
    counts_path.write_text(
        render_case_counts_csv(case_counts(run.triples, run.categories)),
        encoding="utf-8",
        newline="",
    )
    written.append(counts_path)

    summary_path = out_dir / "summary.json"
    summary_path.write_text(
        json.dumps(_summary_payload(run), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    written.append(summary_path)

    for policy, decisions in run.decisions.items():
        series_path = out_dir / f"per_record_scores_{policy.value}.csv"
        series_path.write_text(
            render_per_record_csv(run.triples, decisions),
            encoding="utf-8",
            newline="",
        )
        written.append(series_path)

    quarantine_path = out_dir / "quarantine.json"
    quarantine_path.write_text(
        json.dumps(list(run.quarantined), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    written.append(quarantine_path)
    return written
