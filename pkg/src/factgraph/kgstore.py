"""Ground-truth triple store with provenance tracking.

The store keeps canonical (subject, predicate, object) statements together
with the set of media IDs they were derived from, and maintains adjacency
and degree indices so that exact lookup and path queries stay cheap.

Two ingest formats are supported:

* an N-Triples subset (``<iri> <iri> (<iri>|"literal") .`` per line,
  ``#`` comment lines, UTF-8) — IRIs are reduced to their final path
  segment and percent-decoded, so ``<http://ex.org/co2>`` becomes the
  term ``co2``;
* a normalized statement CSV with header ``subject,predicate,object``
  and an optional ``source`` column overriding the default provenance.

Snapshots are written as a directory: ``graph.nt`` (sorted, serialized
with a ``fact:/`` base so terms round-trip), ``provenance.json`` keyed by
``s|p|o`` (with ``%`` and ``|`` percent-escaped inside key parts), and a
``META`` file carrying the format version.

Concurrency: many readers, one writer. All mutation funnels through an
internal lock; ``snapshot_to`` takes the same lock so it sees a consistent
view. Term/Triple values are immutable and safe to share across threads.
"""

from __future__ import annotations

import csv
import io
import json
import threading
import unicodedata
import urllib.parse
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Union

from .errors import CsvFormatError, ParseError, SnapshotError, TermError

SNAPSHOT_FORMAT = "factgraph-snapshot 1"
_SERIAL_BASE = "fact:/"


# ---------------------------------------------------------------------------
# Terms and triples
# ---------------------------------------------------------------------------

def normalize_text(text: str) -> str:
    """Canonical term text: NFC, lowercase, whitespace collapsed, trimmed.

    Idempotent: normalize_text(normalize_text(x)) == normalize_text(x).
    """
    text = unicodedata.normalize("NFC", text)
    text = text.lower()
    # lowercasing can produce combining sequences; re-normalize
    text = unicodedata.normalize("NFC", text)
    return " ".join(text.split())


class TermKind(Enum):
    ENTITY = "entity"
    PREDICATE = "predicate"


@dataclass(frozen=True)
class Term:
    """A normalized graph node (entity) or edge label (predicate)."""

    text: str
    kind: TermKind

    def __post_init__(self):
        normalized = normalize_text(self.text)
        if not normalized:
            raise TermError(f"{self.kind.value} term is empty after normalization")
        object.__setattr__(self, "text", normalized)

    @classmethod
    def entity(cls, text: str) -> "Term":
        return cls(text, TermKind.ENTITY)

    @classmethod
    def predicate(cls, text: str) -> "Term":
        return cls(text, TermKind.PREDICATE)

    def __str__(self) -> str:
        return self.text


# Media IDs are opaque non-empty strings; a set of them is the provenance
# of a triple ("which media contributed this statement").
MediaId = str


@dataclass(frozen=True)
class Triple:
    """Canonical statement. Identity is (subject, predicate, object) only;
    provenance never affects equality or hashing."""

    subject: Term
    predicate: Term
    object: Term
    provenance: frozenset = field(default_factory=frozenset, compare=False)

    def __post_init__(self):
        if self.subject.kind is not TermKind.ENTITY:
            raise TermError("subject must be an entity term")
        if self.predicate.kind is not TermKind.PREDICATE:
            raise TermError("predicate must be a predicate term")
        if self.object.kind is not TermKind.ENTITY:
            raise TermError("object must be an entity term")
        object.__setattr__(self, "provenance", frozenset(self.provenance))

    @classmethod
    def of(cls, subject: str, predicate: str, obj: str,
           provenance: Iterable[MediaId] = ()) -> "Triple":
        """Build a triple from raw strings, normalizing each term.

        Raises TermError naming the offending position when a term is
        empty after normalization.
        """
        try:
            s = Term.entity(subject)
        except TermError as e:
            raise TermError(f"subject: {e}") from None
        try:
            p = Term.predicate(predicate)
        except TermError as e:
            raise TermError(f"predicate: {e}") from None
        try:
            o = Term.entity(obj)
        except TermError as e:
            raise TermError(f"object: {e}") from None
        return cls(s, p, o, frozenset(provenance))

    @property
    def key(self) -> tuple:
        return (self.subject.text, self.predicate.text, self.object.text)

    def with_provenance(self, media_ids: Iterable[MediaId]) -> "Triple":
        return Triple(self.subject, self.predicate, self.object,
                      self.provenance | frozenset(media_ids))

    def to_dict(self) -> dict:
        return {
            "s": self.subject.text,
            "p": self.predicate.text,
            "o": self.object.text,
            "provenance": sorted(self.provenance),
        }


class DegreeMode(Enum):
    TOTAL = "total"
    IN = "in"
    OUT = "out"


# ---------------------------------------------------------------------------
# Graph store
# ---------------------------------------------------------------------------

class GroundTruthGraph:
    """Indexed in-memory triple store over trusted statements.

    Maintains, consistently with the triple set:
      * exact lookup by (s, p, o)
      * per-entity out-edges (predicate, object) and in-edges (predicate, subject)
      * in/out degree counts (distinct triples)
    """

    def __init__(self):
        self._triples: dict[tuple, Triple] = {}
        self._out: dict[str, set] = {}   # entity -> {(predicate, object)}
        self._in: dict[str, set] = {}    # entity -> {(predicate, subject)}
        self._lock = threading.RLock()

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self):
        return iter(self._triples.values())

    # -- mutation ----------------------------------------------------------

    def add_triple(self, triple: Triple) -> bool:
        """Insert a triple, unioning provenance if (s, p, o) already stored.

        Returns True when the key was new, False when it merged into an
        existing statement.
        """
        with self._lock:
            existing = self._triples.get(triple.key)
            if existing is not None:
                self._triples[triple.key] = existing.with_provenance(triple.provenance)
                return False
            self._triples[triple.key] = triple
            s, _, o = triple.key
            self._out.setdefault(s, set()).add((triple.predicate.text, o))
            self._in.setdefault(o, set()).add((triple.predicate.text, s))
            return True

    def add_all(self, triples: Iterable[Triple]) -> tuple[int, int]:
        """Insert many triples; returns (added, merged) counts."""
        added = merged = 0
        with self._lock:
            for t in triples:
                if self.add_triple(t):
                    added += 1
                else:
                    merged += 1
        return added, merged

    # -- queries -----------------------------------------------------------

    @staticmethod
    def _text(term: Union[Term, str]) -> str:
        return term.text if isinstance(term, Term) else normalize_text(term)

    def has_exact(self, subject: Union[Term, str], predicate: Union[Term, str],
                  obj: Union[Term, str]) -> Optional[Triple]:
        """Return the stored triple (with provenance) iff (s, p, o) is present."""
        key = (self._text(subject), self._text(predicate), self._text(obj))
        return self._triples.get(key)

    def degree(self, entity: Union[Term, str], mode: DegreeMode = DegreeMode.TOTAL) -> int:
        """Number of distinct triples touching the entity; absent node -> 0."""
        text = self._text(entity)
        n_out = len(self._out.get(text, ()))
        n_in = len(self._in.get(text, ()))
        if mode is DegreeMode.OUT:
            return n_out
        if mode is DegreeMode.IN:
            return n_in
        return n_in + n_out

    def neighbors(self, entity: Union[Term, str]) -> set:
        """Adjacent entity texts over the undirected projection."""
        text = self._text(entity)
        out = {o for _, o in self._out.get(text, ())}
        inc = {s for _, s in self._in.get(text, ())}
        return out | inc

    def triples_between(self, a: Union[Term, str], b: Union[Term, str]) -> list:
        """All stored triples connecting two entities, either direction,
        sorted by (s, p, o)."""
        ta, tb = self._text(a), self._text(b)
        found = []
        for p, o in self._out.get(ta, ()):
            if o == tb:
                found.append(self._triples[(ta, p, o)])
        for p, o in self._out.get(tb, ()):
            if o == ta:
                found.append(self._triples[(tb, p, o)])
        return sorted(found, key=lambda t: t.key)

    def entities(self) -> set:
        return set(self._out) | set(self._in)

    def predicates(self) -> set:
        return {t.predicate.text for t in self._triples.values()}

    def stats(self, top_n: int = 10) -> dict:
        """Summary counts plus the highest-degree entities."""
        nodes = self.entities()
        top = sorted(nodes, key=lambda v: (-self.degree(v), v))[:top_n]
        return {
            "triples": len(self._triples),
            "entities": len(nodes),
            "predicates": len(self.predicates()),
            "top_degree": [{"term": v, "degree": self.degree(v)} for v in top],
        }

    # -- persistence -------------------------------------------------------

    def snapshot_to(self, directory: Union[str, Path]) -> None:
        """Write the snapshot directory (graph.nt, provenance.json, META).

        Output is deterministic: sorted triples, sorted provenance lists,
        sorted JSON keys — re-snapshotting an unchanged graph is byte-exact.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with self._lock:
            triples = sorted(self._triples.values(), key=lambda t: t.key)
        lines = [serialize_triple(t) for t in triples]
        (directory / "graph.nt").write_text("".join(lines), encoding="utf-8")
        provenance = {
            _provenance_key(t): sorted(t.provenance)
            for t in triples if t.provenance
        }
        (directory / "provenance.json").write_text(
            json.dumps(provenance, ensure_ascii=False, indent=0, sort_keys=True) + "\n",
            encoding="utf-8")
        (directory / "META").write_text(SNAPSHOT_FORMAT + "\n", encoding="utf-8")

    @classmethod
    def load_from(cls, directory: Union[str, Path]) -> "GroundTruthGraph":
        """Rebuild a graph from a snapshot directory.

        Raises SnapshotError carrying the expected format version when the
        directory is missing pieces or declares an unknown version.
        """
        directory = Path(directory)
        meta_path = directory / "META"
        if not meta_path.exists():
            raise SnapshotError(
                f"not a snapshot (missing META; expected '{SNAPSHOT_FORMAT}')")
        version = meta_path.read_text(encoding="utf-8").strip()
        if version != SNAPSHOT_FORMAT:
            raise SnapshotError(
                f"unsupported snapshot format {version!r} (expected '{SNAPSHOT_FORMAT}')")
        try:
            triples = parse_ntriples((directory / "graph.nt").read_bytes())
            provenance = json.loads((directory / "provenance.json").read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise SnapshotError(f"corrupt snapshot ({e}; format '{SNAPSHOT_FORMAT}')") from e
        graph = cls()
        for t in triples:
            graph.add_triple(t)
        for key, media_ids in provenance.items():
            parts = key.split("|")
            if len(parts) != 3:
                raise SnapshotError(f"corrupt provenance key {key!r}")
            s, p, o = (_key_unquote(part) for part in parts)
            stored = graph.has_exact(s, p, o)
            if stored is None:
                raise SnapshotError(f"provenance for unknown triple {key!r}")
            graph._triples[stored.key] = stored.with_provenance(media_ids)
        return graph


# ---------------------------------------------------------------------------
# N-Triples subset
# ---------------------------------------------------------------------------

def _iri_local(iri: str) -> str:
    """Final path segment of an IRI (after the last '/' or '#'), percent-decoded."""
    cut = max(iri.rfind("/"), iri.rfind("#"))
    segment = iri[cut + 1:] if cut >= 0 else iri
    return urllib.parse.unquote(segment)


_LITERAL_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", '"': '"', "\\": "\\"}


def _read_iri(line: str, pos: int, line_no: int) -> tuple[str, int]:
    if pos >= len(line) or line[pos] != "<":
        raise ParseError(line_no, f"expected '<' at column {pos + 1}")
    end = line.find(">", pos + 1)
    if end < 0:
        raise ParseError(line_no, "unterminated IRI")
    return line[pos + 1:end], end + 1


def _read_literal(line: str, pos: int, line_no: int) -> tuple[str, int]:
    out = []
    i = pos + 1
    while i < len(line):
        ch = line[i]
        if ch == "\\":
            if i + 1 >= len(line):
                raise ParseError(line_no, "dangling escape in literal")
            esc = line[i + 1]
            if esc not in _LITERAL_ESCAPES:
                raise ParseError(line_no, f"unsupported escape '\\{esc}' in literal")
            out.append(_LITERAL_ESCAPES[esc])
            i += 2
        elif ch == '"':
            return "".join(out), i + 1
        else:
            out.append(ch)
            i += 1
    raise ParseError(line_no, "unterminated literal")


def _skip_ws(line: str, pos: int) -> int:
    while pos < len(line) and line[pos] in " \t":
        pos += 1
    return pos


def parse_ntriples(data: Union[bytes, str]) -> list:
    """Parse the N-Triples subset into a list of triples.

    All-or-nothing: the first malformed line raises ParseError with its
    line number and nothing is returned. Blank lines and lines whose first
    non-blank character is '#' are skipped. Duplicate statements merge
    their (empty) provenance, i.e. the result list is unique by (s, p, o).
    """
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    else:
        text = data
    result: dict[tuple, Triple] = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        pos = 0
        subject_iri, pos = _read_iri(line, pos, line_no)
        pos = _skip_ws(line, pos)
        predicate_iri, pos = _read_iri(line, pos, line_no)
        pos = _skip_ws(line, pos)
        if pos < len(line) and line[pos] == '"':
            obj_text, pos = _read_literal(line, pos, line_no)
        else:
            obj_iri, pos = _read_iri(line, pos, line_no)
            obj_text = _iri_local(obj_iri)
        pos = _skip_ws(line, pos)
        if pos >= len(line) or line[pos] != ".":
            raise ParseError(line_no, "expected terminating '.'")
        if _skip_ws(line, pos + 1) != len(line):
            raise ParseError(line_no, "trailing content after '.'")
        try:
            triple = Triple.of(_iri_local(subject_iri), _iri_local(predicate_iri), obj_text)
        except TermError as e:
            raise ParseError(line_no, str(e)) from None
        if triple.key in result:
            result[triple.key] = result[triple.key].with_provenance(triple.provenance)
        else:
            result[triple.key] = triple
    return list(result.values())


def _term_quote(text: str) -> str:
    # unreserved chars kept readable; '/', '#', '%', '|' and spaces are escaped
    return urllib.parse.quote(text, safe="")


def serialize_triple(triple: Triple) -> str:
    """One N-Triples line for the statement under the ``fact:/`` base."""
    return "<{base}{s}> <{base}{p}> <{base}{o}> .\n".format(
        base=_SERIAL_BASE,
        s=_term_quote(triple.subject.text),
        p=_term_quote(triple.predicate.text),
        o=_term_quote(triple.object.text),
    )


def serialize_ntriples(triples: Iterable[Triple]) -> str:
    return "".join(serialize_triple(t) for t in sorted(triples, key=lambda t: t.key))


def _key_quote(text: str) -> str:
    return text.replace("%", "%25").replace("|", "%7C")


def _key_unquote(text: str) -> str:
    return text.replace("%7C", "|").replace("%25", "%")


def _provenance_key(triple: Triple) -> str:
    return "|".join(_key_quote(part) for part in triple.key)


# ---------------------------------------------------------------------------
# Statement CSV
# ---------------------------------------------------------------------------

@dataclass
class CsvIngestReport:
    """Outcome of a CSV ingest: deduplicated triples plus row diagnostics."""

    triples: list
    rows_total: int = 0
    rows_ok: int = 0
    row_errors: list = field(default_factory=list)  # (row_number, message)


def ingest_csv(data: Union[bytes, str], default_provenance: MediaId) -> CsvIngestReport:
    """Read statements from a ground-truth CSV.

    Header must name subject, predicate and object (any column order);
    a ``source`` column, when present and non-empty, overrides the default
    provenance per row. Rows with an empty required cell are reported in
    ``row_errors`` and skipped; the rest are still ingested. Duplicate
    (s, p, o) rows merge their provenance.
    """
    if isinstance(data, bytes):
        text = data.decode("utf-8-sig")
    else:
        text = data.lstrip("﻿")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("empty file: missing header row") from None
    columns = {name.strip().lower(): idx for idx, name in enumerate(header)}
    for required in ("subject", "predicate", "object"):
        if required not in columns:
            raise CsvFormatError(f"missing required column '{required}'")
    source_idx = columns.get("source")

    report = CsvIngestReport(triples=[])
    merged: dict[tuple, Triple] = {}
    for row_no, row in enumerate(reader, start=2):
        if not any(cell.strip() for cell in row):
            continue
        report.rows_total += 1
        try:
            cells = {}
            for name in ("subject", "predicate", "object"):
                idx = columns[name]
                if idx >= len(row):
                    raise TermError(f"{name}: cell missing")
                cells[name] = row[idx]
            provenance = default_provenance
            if source_idx is not None and source_idx < len(row) and row[source_idx].strip():
                provenance = row[source_idx].strip()
            triple = Triple.of(cells["subject"], cells["predicate"], cells["object"],
                               {provenance})
        except TermError as e:
            report.row_errors.append((row_no, str(e)))
            continue
        report.rows_ok += 1
        if triple.key in merged:
            merged[triple.key] = merged[triple.key].with_provenance(triple.provenance)
        else:
            merged[triple.key] = triple
    report.triples = list(merged.values())
    return report
