"""Check aligned statements against the ground-truth graph.

An exact (s, p, o) hit settles a statement. Otherwise the graph can
still indicate plausibility: over the undirected projection, find the
simple path between subject and object that minimizes the summed
log-degree of its intermediate nodes, and score it 1 / (1 + cost). Paths
through obscure, specific nodes score high; paths through generic hub
nodes score low. The result is deliberately labelled an indication, not
a proof, and the predicate plays no role in it.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from .alignment import AlignedStatement
from .errors import FactGraphError
from .kgstore import DegreeMode, GroundTruthGraph, Term, Triple


class VerdictKind(Enum):
    EXACT_MATCH = "ExactMatch"
    PATH_INDICATION = "PathIndication"
    NO_EVIDENCE = "NoEvidence"


@dataclass(frozen=True)
class PathCheckConfig:
    max_path_len: int = 4  # hops, i.e. edges
    degree_mode: DegreeMode = DegreeMode.TOTAL

    def __post_init__(self):
        if self.max_path_len < 1:
            raise FactGraphError("max_path_len must be at least 1")


@dataclass(frozen=True)
class VeracityVerdict:
    kind: VerdictKind
    score: float
    ground_truth_refs: tuple = ()
    path: Optional[tuple] = None
    flags: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "ground_truth_refs", tuple(self.ground_truth_refs))
        object.__setattr__(
            self, "path", tuple(self.path) if self.path is not None else None
        )
        object.__setattr__(self, "flags", frozenset(self.flags))
        if not 0.0 <= self.score <= 1.0:
            raise FactGraphError(f"verdict score {self.score} outside [0, 1]")
        if self.kind is VerdictKind.EXACT_MATCH:
            if self.score != 1.0 or not self.ground_truth_refs:
                raise FactGraphError(
                    "exact match requires score 1.0 and a ground-truth reference"
                )
        elif self.kind is VerdictKind.NO_EVIDENCE:
            if self.score != 0.0 or self.ground_truth_refs:
                raise FactGraphError(
                    "no-evidence verdicts carry score 0.0 and no references"
                )
        else:
            if not 0.0 < self.score <= 1.0:
                raise FactGraphError("path indication requires score in (0, 1]")
            if self.path is None or len(self.path) < 2:
                raise FactGraphError("path indication requires a path of >= 2 nodes")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "score": self.score,
            "path": list(self.path) if self.path is not None else None,
            "refs": [
                {
                    "s": t.subject.text,
                    "p": t.predicate.text,
                    "o": t.object.text,
                    "provenance": sorted(t.provenance),
                }
                for t in self.ground_truth_refs
            ],
            "flags": sorted(self.flags),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VeracityVerdict":
        return cls(
            kind=VerdictKind(data["kind"]),
            score=data["score"],
            ground_truth_refs=tuple(
                Triple.of(r["s"], r["p"], r["o"], r.get("provenance", ()))
                for r in data.get("refs", ())
            ),
            path=tuple(data["path"]) if data.get("path") is not None else None,
            flags=frozenset(data.get("flags", ())),
        )


def _text(term: Union[Term, str]) -> str:
    return term.text if isinstance(term, Term) else Term.entity(term).text


def check_exact(
    graph: GroundTruthGraph, stmt: AlignedStatement
) -> Optional[VeracityVerdict]:
    """ExactMatch verdict iff the statement's triple is in the graph."""
    stored = graph.has_exact(
        stmt.triple.subject, stmt.triple.predicate, stmt.triple.object
    )
    if stored is None:
        return None
    return VeracityVerdict(
        kind=VerdictKind.EXACT_MATCH,
        score=1.0,
        ground_truth_refs=(stored,),
        flags=stmt.flags,
    )


def _step_cost(graph: GroundTruthGraph, node: str, mode: DegreeMode) -> float:
    # in/out-only degree can be 0 on a reachable node; clamp so the cost
    # stays finite (a free hop, consistent with ln 1 = 0 for leaves)
    return math.log(max(1, graph.degree(node, mode)))


def path_score(
    graph: GroundTruthGraph,
    s: Union[Term, str],
    o: Union[Term, str],
    cfg: Optional[PathCheckConfig] = None,
) -> Optional[tuple]:
    """Best degree-weighted simple path from s to o, or None.

    Returns (score, path). Minimizes cost = sum of ln(degree) over the
    path's intermediate nodes; ties fall to fewer hops, then to the
    lexicographically smallest node sequence. The search runs over walks
    with per-(node, hops) dominance: any walk that revisits a node can be
    shortcut to fewer hops at no extra cost, so the first time the target
    pops it carries a minimal simple path.
    """
    cfg = cfg or PathCheckConfig()
    source, target = _text(s), _text(o)
    if source == target:
        return None
    mode = cfg.degree_mode
    # best known (cost, path) per (node, hops); heap orders by the full
    # tie-break key so the winning path pops first
    best = {(source, 0): (0.0, (source,))}
    heap = [(0.0, 0, (source,))]
    while heap:
        cost, hops, path = heapq.heappop(heap)
        node = path[-1]
        if best.get((node, hops)) != (cost, path):
            continue  # superseded entry
        if node == target:
            return 1.0 / (1.0 + cost), path
        if hops == cfg.max_path_len:
            continue
        # extending through `node` makes it an intermediate; accumulate
        # its cost left to right so equal-cost comparisons are stable
        extend_cost = cost if node == source else cost + _step_cost(graph, node, mode)
        for neighbor in graph.neighbors(node):
            if neighbor == node:
                continue
            candidate = (extend_cost, path + (neighbor,))
            known = best.get((neighbor, hops + 1))
            if known is None or candidate < known:
                best[(neighbor, hops + 1)] = candidate
                heapq.heappush(heap, (extend_cost, hops + 1, candidate[1]))
    return None


def check_statement(
    graph: GroundTruthGraph,
    stmt: AlignedStatement,
    cfg: Optional[PathCheckConfig] = None,
) -> VeracityVerdict:
    """Full check: exact match, else path indication, else no evidence.

    Path-indication verdicts carry every stored triple along the found
    path as ground-truth references.
    """
    cfg = cfg or PathCheckConfig()
    exact = check_exact(graph, stmt)
    if exact is not None:
        return exact
    source = stmt.triple.subject.text
    target = stmt.triple.object.text
    if source != target:
        found = path_score(graph, source, target, cfg)
        if found is not None:
            score, path = found
            refs = []
            for a, b in zip(path, path[1:]):
                refs.extend(graph.triples_between(a, b))
            return VeracityVerdict(
                kind=VerdictKind.PATH_INDICATION,
                score=score,
                ground_truth_refs=tuple(refs),
                path=path,
                flags=stmt.flags,
            )
    return VeracityVerdict(
        kind=VerdictKind.NO_EVIDENCE, score=0.0, flags=stmt.flags
    )
