"""Per-record variant selection from the three contradiction scores.

Two policies: ORACLE_MIN picks each record's lowest-scoring variant (needs
all three scores at decision time), CATEGORY_ROUTE fits one best variant per
question category on aggregate means and then routes records by their primary
category. Ties always resolve ORG before NR before EE: when filtering shows
no measured benefit, keep the least-processed image.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import AbstractSet, Mapping, Sequence

from groundcheck.errors import IncompleteRecordError, InvalidArgumentError
from groundcheck.imaging.variants import Variant
from groundcheck.taxonomy import QuestionCategory

# Tie-break preference: least processing first.
_VARIANT_PREFERENCE = (Variant.ORG, Variant.NR, Variant.EE)

# Routing precedence: most specific lexical trigger first.
PRIMARY_CATEGORY_ORDER = (
    QuestionCategory.QUANTITY,
    QuestionCategory.COLOR,
    QuestionCategory.OBJECT_IDENTIFICATION,
    QuestionCategory.OTHER,
)


class Policy(str, enum.Enum):
    ORACLE_MIN = "oracle_min"
    CATEGORY_ROUTE = "category_route"


@dataclass(frozen=True)
class VariantScoreTriple:
    record_id: str
    nli_org: float
    nli_ee: float
    nli_nr: float

    def __post_init__(self):
        for name in ("nli_org", "nli_ee", "nli_nr"):
            value = getattr(self, name)
            if value is None:
                raise IncompleteRecordError(
                    f"record {self.record_id!r} is missing {name}"
                )
            if not math.isfinite(value) or not 0.0 <= value <= 1.0:
                raise InvalidArgumentError(
                    f"record {self.record_id!r}: {name} must be in [0, 1], got {value!r}"
                )

    def score(self, variant: Variant) -> float:
        return {
            Variant.ORG: self.nli_org,
            Variant.EE: self.nli_ee,
            Variant.NR: self.nli_nr,
        }[variant]


@dataclass(frozen=True)
class EnsembleDecision:
    record_id: str
    chosen_variant: Variant
    chosen_score: float
    policy: Policy


def _argmin_variant(score_of) -> Variant:
    best = _VARIANT_PREFERENCE[0]
    best_score = score_of(best)
    for candidate in _VARIANT_PREFERENCE[1:]:
        candidate_score = score_of(candidate)
        if candidate_score < best_score:
            best, best_score = candidate, candidate_score
    return best


def oracle_min(t: VariantScoreTriple) -> EnsembleDecision:
    """Choose the variant with the lowest score; ties prefer ORG, then NR."""
    chosen = _argmin_variant(t.score)
    return EnsembleDecision(
        record_id=t.record_id,
        chosen_variant=chosen,
        chosen_score=t.score(chosen),
        policy=Policy.ORACLE_MIN,
    )


def primary_category(categories: AbstractSet[QuestionCategory]) -> QuestionCategory:
    for category in PRIMARY_CATEGORY_ORDER:
        if category in categories:
            return category
    return QuestionCategory.OTHER


def fit_routing(
    triples: Sequence[VariantScoreTriple],
    categories: Mapping[str, AbstractSet[QuestionCategory]],
) -> dict[QuestionCategory, Variant]:
    """Pick, per category, the variant with the lowest mean score.

    Records count toward every category they belong to. A category with no
    records falls back to the variant that is globally best on the fit set.
    """
    if not triples:
        raise InvalidArgumentError("cannot fit a routing table on zero records")
    sums: dict[QuestionCategory, dict[Variant, float]] = {
        category: {v: 0.0 for v in Variant} for category in QuestionCategory
    }
    counts: dict[QuestionCategory, int] = {category: 0 for category in QuestionCategory}
    totals = {v: 0.0 for v in Variant}
    for triple in triples:
        for variant in Variant:
            totals[variant] += triple.score(variant)
        for category in categories[triple.record_id]:
            counts[category] += 1
            for variant in Variant:
                sums[category][variant] += triple.score(variant)

    global_best = _argmin_variant(lambda v: totals[v] / len(triples))
    table: dict[QuestionCategory, Variant] = {}
    for category in QuestionCategory:
        if counts[category] == 0:
            table[category] = global_best
        else:
            table[category] = _argmin_variant(
                lambda v, c=category: sums[c][v] / counts[c]
            )
    return table


def apply_routing(
    triples: Sequence[VariantScoreTriple],
    categories: Mapping[str, AbstractSet[QuestionCategory]],
    table: Mapping[QuestionCategory, Variant],
) -> list[EnsembleDecision]:
    decisions = []
    for triple in triples:
        variant = table[primary_category(categories[triple.record_id])]
        decisions.append(
            EnsembleDecision(
                record_id=triple.record_id,
                chosen_variant=variant,
                chosen_score=triple.score(variant),
                policy=Policy.CATEGORY_ROUTE,
            )
        )
    return decisions


def category_route(
    triples: Sequence[VariantScoreTriple],
    categories: Mapping[str, AbstractSet[QuestionCategory]],
    fit_triples: Sequence[VariantScoreTriple] | None = None,
    fit_categories: Mapping[str, AbstractSet[QuestionCategory]] | None = None,
) -> tuple[dict[QuestionCategory, Variant], list[EnsembleDecision]]:
    """Fit a routing table and route ``triples`` through it.

    By default fits and applies on the same records; pass ``fit_triples`` and
    ``fit_categories`` for held-out evaluation.
    """
    table = fit_routing(
        fit_triples if fit_triples is not None else triples,
        fit_categories if fit_categories is not None else categories,
    )
    return table, apply_routing(triples, categories, table)
