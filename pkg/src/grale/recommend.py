"""Recommendation from a rule set and accuracy scoring.

Every rule whose source side matches a user fires; the user receives the
union of the fired rules' target extents. Accuracy is micro-averaged over
recommended (user, item) pairs: successes / recommended.

Rule descriptors are resolved by attribute name and value label against
whatever systems are supplied, so a rule set mined on training data can be
re-instantiated over a disjoint item universe (the cold-start mechanism).
"""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass

import numpy as np

from .granules import Descriptor, extent_mask
from .model import BinaryRelation, InformationSystem, SchemaMismatchError
from .rules import RuleSet


def resolve_descriptor(d: Descriptor, schema_attrs, system: InformationSystem) -> Descriptor:
    """Re-express a descriptor given over `schema_attrs` against `system`,
    matching by attribute name and value label."""
    pairs = []
    for a, v in d.pairs:
        attr = schema_attrs[a]
        label = attr.domain[v]
        j = system.attribute_index(attr.name)
        pairs.append((j, system.attributes[j].code_of(label)))
    return Descriptor(tuple(pairs))


def matches(row, d: Descriptor) -> bool:
    """True iff every pair of the descriptor agrees with the value row."""
    return all(int(row[a]) == v for a, v in d.pairs)


@dataclass(frozen=True)
class RecommendationSet:
    """Items per user plus which rules fired for the user, and the resolved
    target extent of every fired rule (by rule index)."""

    per_user: dict
    fired_rules: dict
    rule_targets: dict
    n_items: int

    @property
    def total_pairs(self) -> int:
        return sum(len(items) for items in self.per_user.values())


@dataclass(frozen=True)
class CountSummary:
    minimum: int
    maximum: int
    mean: float
    median: float
    users_without: int


@dataclass(frozen=True)
class AccuracyReport:
    """M recommended pairs, N of them present in the truth relation.

    accuracy is None (absent) when nothing was recommended, never 0.
    """

    recommended: int
    successes: int
    accuracy: float | None
    per_user_counts: CountSummary


def recommend(ruleset: RuleSet, users: InformationSystem,
              items: InformationSystem) -> RecommendationSet:
    """Fire all matching rules per user; recommended items are the union of
    fired rules' target extents, evaluated against the supplied systems."""
    n, k = users.n, items.n
    provenance = ruleset.provenance
    acc = np.zeros((n, k), dtype=bool)
    fired = {u: [] for u in range(n)}
    rule_targets = {}
    for index, (rule, _measures) in enumerate(ruleset):
        try:
            src = resolve_descriptor(rule.source, provenance.user_attributes, users)
            tgt = resolve_descriptor(rule.target, provenance.item_attributes, items)
        except SchemaMismatchError as exc:
            raise SchemaMismatchError(f"rule {index}: {exc}") from None
        src_mask = extent_mask(users, src)
        tgt_mask = extent_mask(items, tgt)
        matched = np.nonzero(src_mask)[0]
        if matched.size:
            acc[matched] |= tgt_mask
            rule_targets[index] = frozenset(np.nonzero(tgt_mask)[0].tolist())
            for u in matched.tolist():
                fired[u].append(index)
    per_user = {
        u: frozenset(np.nonzero(acc[u])[0].tolist()) for u in range(n)
    }
    return RecommendationSet(
        per_user=per_user,
        fired_rules={u: tuple(v) for u, v in fired.items()},
        rule_targets=rule_targets,
        n_items=k,
    )


def random_recommend(users: InformationSystem, items: InformationSystem,
                     seed: int) -> RecommendationSet:
    """Baseline: each user gets exactly one uniformly random item."""
    if items.n < 1:
        raise ValueError("cannot recommend from an empty item universe")
    rng = random.Random(seed)
    per_user = {u: frozenset((rng.randrange(items.n),)) for u in range(users.n)}
    return RecommendationSet(
        per_user=per_user,
        fired_rules={u: () for u in range(users.n)},
        rule_targets={},
        n_items=items.n,
    )


def score(recs: RecommendationSet, truth: BinaryRelation) -> AccuracyReport:
    """Micro-averaged accuracy of a recommendation set against a relation."""
    matrix = truth.matrix
    if recs.per_user and max(recs.per_user) >= truth.n:
        raise ValueError(
            f"recommendations address user {max(recs.per_user)} but the truth "
            f"relation has {truth.n} rows"
        )
    if recs.n_items != truth.k:
        raise ValueError(
            f"recommendations cover {recs.n_items} items but the truth "
            f"relation has {truth.k} columns"
        )
    recommended = 0
    successes = 0
    counts = []
    for u, items in recs.per_user.items():
        counts.append(len(items))
        recommended += len(items)
        if items:
            successes += int(matrix[u, list(items)].sum())
    if not counts:
        counts = [0]
    summary = CountSummary(
        minimum=min(counts),
        maximum=max(counts),
        mean=sum(counts) / len(counts),
        median=float(statistics.median(counts)),
        users_without=sum(1 for c in counts if c == 0),
    )
    accuracy = successes / recommended if recommended else None
    return AccuracyReport(recommended, successes, accuracy, summary)


def recommendations_csv(recs: RecommendationSet, users: InformationSystem,
                        items: InformationSystem) -> str:
    """CSV dump `userId,itemId,ruleIndices` (indices `;`-separated)."""
    lines = ["userId,itemId,ruleIndices"]
    for u in range(users.n):
        for item in sorted(recs.per_user.get(u, ())):
            via = [
                str(r) for r in recs.fired_rules.get(u, ())
                if item in recs.rule_targets.get(r, ())
            ]
            lines.append(
                f"{users.object_ids[u]},{items.object_ids[item]},{';'.join(via)}"
            )
    return "\n".join(lines) + "\n"


def accuracy_report_text(report: AccuracyReport) -> str:
    """Flat key=value block."""
    c = report.per_user_counts
    acc = "absent" if report.accuracy is None else f"{report.accuracy:.6f}"
    return (
        f"recommended={report.recommended}\n"
        f"successes={report.successes}\n"
        f"accuracy={acc}\n"
        f"per_user_min={c.minimum}\n"
        f"per_user_max={c.maximum}\n"
        f"per_user_mean={c.mean:.6f}\n"
        f"per_user_median={c.median:.6f}\n"
        f"users_without_recommendations={c.users_without}\n"
    )


def accuracy_report_csv(report: AccuracyReport) -> str:
    """Machine-readable one-row CSV (with header)."""
    acc = "" if report.accuracy is None else f"{report.accuracy:.6f}"
    return (
        "M,N,accuracy\n"
        f"{report.recommended},{report.successes},{acc}\n"
    )
