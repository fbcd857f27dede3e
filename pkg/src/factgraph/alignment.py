"""Canonicalize candidate statements and merge duplicates.

The lexicon is a plain JSON data file mapping surface forms onto
canonical terms: predicate inflections onto base forms, entity synonyms
onto one preferred name, and optionally canonical terms onto external
concept ids. Keeping it in a reviewable file (instead of asking a model
at check time) makes veracity results reproducible; extractors may
propose new entries, but those land in a pending file for a curator, the
live lexicon never changes behind anyone's back.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Union

from .errors import LexiconError, ReviewError
from .kgstore import Term, Triple, normalize_text
from .statements import _AUXILIARIES, CandidateStatement, Extractor

FLAG_OUT_OF_LEXICON = "out-of-lexicon"
FLAG_UNGROUNDED = "ungrounded"
FLAG_NON_REPRODUCIBLE = "non-reproducible"


def _normalized_map(raw: dict, where: str) -> dict:
    out = {}
    for key, value in raw.items():
        if not isinstance(key, str) or not isinstance(value, str):
            raise LexiconError(f"{where}: entries must be strings")
        k, v = normalize_text(key), normalize_text(value)
        if not k or not v:
            raise LexiconError(f"{where}: empty term in entry {key!r} -> {value!r}")
        if k in out and out[k] != v:
            raise LexiconError(
                f"{where}: {k!r} maps to both {out[k]!r} and {v!r}"
            )
        out[k] = v
    return out


@dataclass(frozen=True)
class Lexicon:
    """Immutable surface-form maps. Values are fixed points: a canonical
    that reappears as a key must map to itself, so lookup is single-hop."""

    predicate_map: dict = field(default_factory=dict)
    synonym_map: dict = field(default_factory=dict)
    ontology_map: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, mapping in (
            ("predicates", self.predicate_map),
            ("synonyms", self.synonym_map),
        ):
            for key, value in mapping.items():
                if value in mapping and mapping[value] != value:
                    raise LexiconError(
                        f"{name}: canonical {value!r} (from {key!r}) is not a "
                        f"fixed point, it maps on to {mapping[value]!r}"
                    )
        for key in self.ontology_map:
            for name, mapping in (
                ("predicates", self.predicate_map),
                ("synonyms", self.synonym_map),
            ):
                if mapping.get(key, key) != key:
                    raise LexiconError(
                        f"ontology: {key!r} is not canonical, {name} maps it "
                        f"to {mapping[key]!r}"
                    )

    @classmethod
    def from_dict(cls, data: dict) -> "Lexicon":
        if not isinstance(data, dict):
            raise LexiconError("lexicon must be a JSON object")
        unknown = set(data) - {"predicates", "synonyms", "ontology"}
        if unknown:
            raise LexiconError(f"unknown lexicon sections: {sorted(unknown)}")
        return cls(
            predicate_map=_normalized_map(data.get("predicates", {}), "predicates"),
            synonym_map=_normalized_map(data.get("synonyms", {}), "synonyms"),
            ontology_map=_normalized_map(data.get("ontology", {}), "ontology"),
        )

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Lexicon":
        try:
            data = json.loads(Path(path).read_text("utf-8"))
        except OSError as exc:
            raise LexiconError(f"cannot read lexicon: {exc}") from exc
        except ValueError as exc:
            raise LexiconError(f"lexicon is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def default(cls) -> "Lexicon":
        from importlib import resources

        text = resources.files("factgraph.data").joinpath("lexicon.json").read_text("utf-8")
        return cls.from_dict(json.loads(text))

    def ontology_id(self, canonical: str) -> Optional[str]:
        return self.ontology_map.get(normalize_text(canonical))


def normalize_predicate(surface: str, lexicon: Lexicon) -> tuple:
    """Map a predicate surface form to its canonical. Returns (term, flag).

    Leading auxiliaries come off first ("is rising" -> "rising"), but
    never down to an empty predicate. The flag is True when the stripped
    form is neither a key nor a canonical of the predicate map.
    """
    words = normalize_text(surface).split()
    while len(words) > 1 and words[0] in _AUXILIARIES:
        words.pop(0)
    stripped = " ".join(words)
    canonical = lexicon.predicate_map.get(stripped, stripped)
    known = stripped in lexicon.predicate_map or (
        stripped in lexicon.predicate_map.values()
    )
    return Term.predicate(canonical), not known


def canonicalize_entity(surface: str, lexicon: Lexicon) -> tuple:
    """Map an entity surface form to its canonical. Returns (term, flag).

    Single-hop synonym lookup after term normalization; the flag is True
    for forms the synonym map does not know at all. Entities outside the
    map are the normal case, so callers usually ignore this flag.
    """
    normalized = normalize_text(surface)
    canonical = lexicon.synonym_map.get(normalized, normalized)
    known = normalized in lexicon.synonym_map or (
        normalized in lexicon.synonym_map.values()
    )
    return Term.entity(canonical), not known


class ReviewStatus(Enum):
    PENDING = "Pending"
    APPROVED = "Approved"
    REJECTED = "Rejected"
    EDITED = "Edited"


# Approved and Rejected are terminal; Edited statements still need a
# final approve/reject decision.
_TRANSITIONS = {
    ReviewStatus.PENDING: {
        ReviewStatus.APPROVED,
        ReviewStatus.REJECTED,
        ReviewStatus.EDITED,
    },
    ReviewStatus.EDITED: {ReviewStatus.APPROVED, ReviewStatus.REJECTED},
    ReviewStatus.APPROVED: set(),
    ReviewStatus.REJECTED: set(),
}


@dataclass
class AlignedStatement:
    """A canonical triple plus the raw candidates it came from.

    Provenance on the triple is the union of the candidates' media ids.
    Flags carry extraction warnings forward so verdicts and the review
    queue can show them.
    """

    triple: Triple
    candidates: list
    review_status: ReviewStatus = ReviewStatus.PENDING
    veracity: Optional[object] = None
    flags: frozenset = frozenset()

    def transition(self, to: ReviewStatus) -> None:
        if to not in _TRANSITIONS[self.review_status]:
            raise ReviewError(
                f"cannot move a statement from {self.review_status.value} "
                f"to {to.value}"
            )
        self.review_status = to

    def to_dict(self) -> dict:
        verdict = self.veracity
        return {
            "subject": self.triple.subject.text,
            "predicate": self.triple.predicate.text,
            "object": self.triple.object.text,
            "provenance": sorted(self.triple.provenance),
            "candidates": [c.to_dict() for c in self.candidates],
            "review_status": self.review_status.value,
            "veracity": verdict.to_dict() if verdict is not None else None,
            "flags": sorted(self.flags),
        }

    @classmethod
    def from_dict(cls, data: dict, verdict_loader=None) -> "AlignedStatement":
        verdict = data.get("veracity")
        if verdict is not None and verdict_loader is not None:
            verdict = verdict_loader(verdict)
        return cls(
            triple=Triple.of(
                data["subject"],
                data["predicate"],
                data["object"],
                data.get("provenance", ()),
            ),
            candidates=[
                CandidateStatement.from_dict(c) for c in data.get("candidates", [])
            ],
            review_status=ReviewStatus(data.get("review_status", "Pending")),
            veracity=verdict,
            flags=frozenset(data.get("flags", ())),
        )


def _candidate_flags(candidate: CandidateStatement, predicate_unknown: bool) -> set:
    flags = set()
    if predicate_unknown:
        flags.add(FLAG_OUT_OF_LEXICON)
    if not candidate.grounded:
        flags.add(FLAG_UNGROUNDED)
    if candidate.reproducible is False:
        flags.add(FLAG_NON_REPRODUCIBLE)
    return flags


def align(candidates: list, lexicon: Lexicon) -> list:
    """Canonicalize candidates and merge identical (s, p, o) keys.

    Output is sorted by the canonical key, so any permutation of the
    input produces the same list. Merged statements keep every original
    candidate, union their media ids, and union their warning flags.
    """
    merged: dict = {}
    for candidate in candidates:
        subject, _ = canonicalize_entity(candidate.raw_subject, lexicon)
        predicate, predicate_unknown = normalize_predicate(
            candidate.raw_predicate, lexicon
        )
        obj, _ = canonicalize_entity(candidate.raw_object, lexicon)
        key = (subject.text, predicate.text, obj.text)
        flags = _candidate_flags(candidate, predicate_unknown)
        if key in merged:
            existing = merged[key]
            existing.candidates.append(candidate)
            existing.flags = existing.flags | flags
            existing.triple = existing.triple.with_provenance(
                existing.triple.provenance | {candidate.media_id}
            )
        else:
            merged[key] = AlignedStatement(
                triple=Triple(
                    subject, predicate, obj, frozenset({candidate.media_id})
                ),
                candidates=[candidate],
                flags=frozenset(flags),
            )
    # deterministic candidate order inside each statement as well
    for statement in merged.values():
        statement.candidates.sort(
            key=lambda c: (c.media_id, c.sentence_index, c.key())
        )
    return [merged[key] for key in sorted(merged)]


def align_triple(
    subject: str, predicate: str, obj: str, lexicon: Lexicon, provenance=()
) -> Triple:
    """Canonicalize one raw (s, p, o), e.g. a trusted row at ingest time."""
    s, _ = canonicalize_entity(subject, lexicon)
    p, _ = normalize_predicate(predicate, lexicon)
    o, _ = canonicalize_entity(obj, lexicon)
    return Triple(s, p, o, frozenset(provenance))


def propose_lexicon_entries(
    candidates: list, lexicon: Lexicon, path: Union[str, Path]
) -> int:
    """Append unknown predicate surface forms to a pending-entries file.

    Only statements from the remote extractor propose entries (the rule
    extractor only ever emits lexicon verbs), only predicates are
    proposed (novel entities are expected, not suspicious), and the file
    is JSON-lines so a curator can triage it. Returns how many new
    proposals were written; duplicates already in the file are skipped.
    """
    path = Path(path)
    seen = set()
    if path.exists():
        for line in path.read_text("utf-8").splitlines():
            if line.strip():
                seen.add(json.loads(line).get("surface"))
    proposals: dict = {}
    for candidate in candidates:
        if candidate.extractor is not Extractor.LLM:
            continue
        term, unknown = normalize_predicate(candidate.raw_predicate, lexicon)
        if not unknown or term.text in seen:
            continue
        proposals.setdefault(term.text, set()).add(candidate.media_id)
    if proposals:
        with open(path, "a", encoding="utf-8") as fh:
            for surface in sorted(proposals):
                record = {
                    "kind": "predicate",
                    "surface": surface,
                    "media_ids": sorted(proposals[surface]),
                }
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    return len(proposals)
