"""Aggregate statement verdicts into a media-level accuracy score.

The model is a weighted sum s_acc = sum(s_i * w_i) over a fixed metric
vocabulary, constrained so the veracity metric always carries at least
half the weight. Only veracity is computed here; the other metrics are
slots callers may fill with externally assessed values, because nobody
has a defensible way to compute "clearness" or "objectivity" from
content yet, and pretending otherwise would be worse than leaving the
hook visible.

How one number summarizes many statements is a policy choice, named in
every report: MeanScore averages verdict scores as they are,
ExactOnlyMean zeroes path indications first.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Optional

from .alignment import AlignedStatement, ReviewStatus
from .errors import ScoringError
from .veracity import VeracityVerdict, VerdictKind

METRICS = frozenset(
    {
        "veracity",
        "temporal_relevance",
        "confidence",
        "clearness",
        "transparency",
        "information_depth",
        "objectivity",
        "rationality",
    }
)

_SUM_TOLERANCE = 1e-9


class AggregationPolicy(Enum):
    MEAN_SCORE = "MeanScore"
    EXACT_ONLY_MEAN = "ExactOnlyMean"


def _default_weights():
    return MappingProxyType({"veracity": 1.0})


@dataclass(frozen=True)
class ScoringConfig:
    """Validated metric weights. Invalid weights cannot be constructed."""

    weights: object = field(default_factory=_default_weights)

    def __post_init__(self):
        weights = dict(self.weights)
        unknown = set(weights) - METRICS
        if unknown:
            raise ScoringError(f"unknown metrics: {sorted(unknown)}")
        for name, w in weights.items():
            if not isinstance(w, (int, float)):
                raise ScoringError(f"weight for {name} is not a number")
            if w < 0:
                raise ScoringError(f"negative weight for {name}: {w}")
        total = sum(weights.values())
        if abs(total - 1.0) > _SUM_TOLERANCE:
            raise ScoringError(f"weights must sum to 1, got {total}")
        if weights.get("veracity", 0.0) < 0.5:
            raise ScoringError(
                "veracity weight must be at least 0.5, got "
                f"{weights.get('veracity', 0.0)}"
            )
        object.__setattr__(self, "weights", MappingProxyType(weights))

    def to_dict(self) -> dict:
        return {"weights": dict(self.weights)}

    @classmethod
    def from_dict(cls, data: dict) -> "ScoringConfig":
        return cls(weights=data.get("weights", {"veracity": 1.0}))


def media_veracity(
    verdicts: list, policy: AggregationPolicy = AggregationPolicy.MEAN_SCORE
) -> float:
    """One veracity number for a whole medium, under the named policy."""
    if not verdicts:
        raise ScoringError("media with no checked statements is unscoreable")
    if policy is AggregationPolicy.EXACT_ONLY_MEAN:
        scores = [
            v.score if v.kind is VerdictKind.EXACT_MATCH else 0.0 for v in verdicts
        ]
    else:
        scores = [v.score for v in verdicts]
    return statistics.fmean(scores)


def accuracy_score(per_metric: dict, cfg: ScoringConfig) -> float:
    """Weighted sum of metric values under a validated config."""
    total = 0.0
    for name, w in cfg.weights.items():
        if w == 0.0:
            continue
        if name not in per_metric:
            raise ScoringError(f"metric {name} has weight {w} but no value")
        value = per_metric[name]
        if not 0.0 <= value <= 1.0:
            raise ScoringError(f"metric {name} value {value} outside [0, 1]")
        total += value * w
    # float dust from the weight sum can push the result a hair past 1
    return min(max(total, 0.0), 1.0)


@dataclass
class AccuracyReport:
    media_id: str
    s_acc: float
    per_metric: dict
    per_statement: list  # (AlignedStatement, VeracityVerdict) pairs
    counts: dict  # {"exact": n, "path": n, "none": n}
    policy: AggregationPolicy

    def to_dict(self) -> dict:
        return {
            "media_id": self.media_id,
            "s_acc": self.s_acc,
            "policy": self.policy.value,
            "per_metric": dict(self.per_metric),
            "counts": dict(self.counts),
            "statements": [stmt.to_dict() for stmt, _ in self.per_statement],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AccuracyReport":
        statements = [
            AlignedStatement.from_dict(s, verdict_loader=VeracityVerdict.from_dict)
            for s in data.get("statements", ())
        ]
        return cls(
            media_id=data["media_id"],
            s_acc=data["s_acc"],
            per_metric=dict(data.get("per_metric", {})),
            per_statement=[(s, s.veracity) for s in statements],
            counts=dict(data.get("counts", {})),
            policy=AggregationPolicy(data.get("policy", "MeanScore")),
        )


_KIND_BUCKET = {
    VerdictKind.EXACT_MATCH: "exact",
    VerdictKind.PATH_INDICATION: "path",
    VerdictKind.NO_EVIDENCE: "none",
}


def build_report(
    media_id: str,
    checked: list,
    cfg: Optional[ScoringConfig] = None,
    policy: AggregationPolicy = AggregationPolicy.MEAN_SCORE,
    extra_metrics: Optional[dict] = None,
) -> AccuracyReport:
    """Assemble the report for one medium from checked statements.

    `checked` holds (AlignedStatement, VeracityVerdict) pairs. Rejected
    statements are excluded from both the counts and the aggregate;
    extra_metrics supplies externally assessed values for any
    non-veracity metric the config weights.
    """
    cfg = cfg or ScoringConfig()
    active = [
        (stmt, verdict)
        for stmt, verdict in checked
        if stmt.review_status is not ReviewStatus.REJECTED
    ]
    verdicts = [verdict for _, verdict in active]
    per_metric = dict(extra_metrics or {})
    per_metric["veracity"] = media_veracity(verdicts, policy)
    counts = {"exact": 0, "path": 0, "none": 0}
    for verdict in verdicts:
        counts[_KIND_BUCKET[verdict.kind]] += 1
    return AccuracyReport(
        media_id=media_id,
        s_acc=accuracy_score(per_metric, cfg),
        per_metric=per_metric,
        per_statement=active,
        counts=counts,
        policy=policy,
    )
