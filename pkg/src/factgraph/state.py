"""Mutable application state: stores, journals, snapshot, pipeline jobs.

Three stores persist across restarts, each through its own append-only
journal in the data directory: the ground-truth graph, the media
registry, and the statement store. Startup loads the latest snapshot (if
one was taken) and replays the journals on top; every acknowledged write
hits a journal before the caller gets its answer.

Pipeline jobs run on a single background worker thread, one medium at a
time. Jobs are deliberately ephemeral: a restart forgets queued work but
never loses acknowledged data.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .alignment import (
    AlignedStatement,
    ReviewStatus,
    _candidate_flags,
    align_triple,
    normalize_predicate,
)
from .config import AppConfig
from .errors import FactGraphError, ReviewError, ScoringError
from .journal import Journal, replay
from .kgstore import (
    GroundTruthGraph,
    Triple,
    ingest_csv,
    parse_ntriples,
)
from .pipeline import check_and_score, extract_candidates
from .registry import MediaItem, MediaRegistry
from .scoring import AccuracyReport, build_report
from .statements import ExtractorConfig
from .veracity import VeracityVerdict, check_statement

_JOB_STAGE_ORDER = ["Extracting", "Aligning", "Checking", "Done", "Failed"]


@dataclass
class JobRecord:
    job_id: str
    media_id: str
    stage: str = "Extracting"
    progress: dict = field(default_factory=dict)
    error: Optional[str] = None

    def advance(self, stage: str) -> None:
        # forward-only; Done and Failed are terminal
        if self.stage in ("Done", "Failed"):
            raise FactGraphError(f"job {self.job_id} already finished")
        if _JOB_STAGE_ORDER.index(stage) < _JOB_STAGE_ORDER.index(self.stage):
            raise FactGraphError(
                f"job stage cannot move back from {self.stage} to {stage}"
            )
        self.stage = stage

    def fail(self, message: str) -> None:
        self.stage = "Failed"
        self.error = message

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "media_id": self.media_id,
            "stage": self.stage,
            "progress": dict(self.progress),
            "error": self.error,
        }


@dataclass
class StatementRecord:
    id: str
    media_id: str
    trusted: bool
    statement: AlignedStatement

    def to_dict(self) -> dict:
        data = self.statement.to_dict()
        data["id"] = self.id
        data["media_id"] = self.media_id
        data["trusted"] = self.trusted
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "StatementRecord":
        body = {
            k: v for k, v in data.items() if k not in ("id", "media_id", "trusted")
        }
        return cls(
            id=data["id"],
            media_id=data["media_id"],
            trusted=bool(data.get("trusted", False)),
            statement=AlignedStatement.from_dict(
                body, verdict_loader=VeracityVerdict.from_dict
            ),
        )


class AppState:
    """Owns the stores and serializes every write through journals."""

    def __init__(self, config: Optional[AppConfig] = None, start_worker: bool = True):
        self.config = config or AppConfig()
        self.data_dir = Path(self.config.data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.lexicon = self.config.lexicon()
        self.path_cfg = self.config.path_check_config()
        self.scoring_cfg = self.config.scoring_config()
        self.policy = self.config.policy()

        self.graph = GroundTruthGraph()
        self.registry = MediaRegistry()
        self.statements: dict = {}
        self.jobs: dict = {}
        self._statement_seq = 0
        self._job_seq = 0
        self._lock = threading.RLock()

        self._load_snapshot()
        self._replay_journals()
        self._graph_journal = Journal(self.data_dir / "graph.jsonl")
        self._registry_journal = Journal(self.data_dir / "registry.jsonl")
        self._statements_journal = Journal(self.data_dir / "statements.jsonl")

        self._queue: queue.Queue = queue.Queue()
        self._worker: Optional[threading.Thread] = None
        if start_worker:
            self.start_worker()

    # -- persistence ---------------------------------------------------------

    @property
    def _snapshot_dir(self) -> Path:
        return self.data_dir / "snapshot"

    def _load_snapshot(self) -> None:
        snap = self._snapshot_dir
        if (snap / "graph" / "META").exists():
            self.graph = GroundTruthGraph.load_from(snap / "graph")
        registry_file = snap / "registry.json"
        if registry_file.exists():
            self.registry.import_json(registry_file.read_text("utf-8"))
        statements_file = snap / "statements.json"
        if statements_file.exists():
            for raw in json.loads(statements_file.read_text("utf-8")):
                record = StatementRecord.from_dict(raw)
                self.statements[record.id] = record

    def _replay_journals(self) -> None:
        for record in replay(self.data_dir / "graph.jsonl"):
            for t in record.get("triples", ()):
                self.graph.add_triple(
                    Triple.of(t["s"], t["p"], t["o"], t.get("provenance", ()))
                )
        for record in replay(self.data_dir / "registry.jsonl"):
            self.registry.register(MediaItem.from_dict(record["item"]))
        for record in replay(self.data_dir / "statements.jsonl"):
            rec = StatementRecord.from_dict(record["record"])
            self.statements[rec.id] = rec
        self._statement_seq = max(
            (int(sid.split("-")[1]) for sid in self.statements), default=0
        )

    def snapshot(self) -> None:
        """Freeze current state into the snapshot dir, truncate journals."""
        with self._lock:
            snap = self._snapshot_dir
            snap.mkdir(parents=True, exist_ok=True)
            self.graph.snapshot_to(snap / "graph")
            (snap / "registry.json").write_text(
                self.registry.export_json(), "utf-8"
            )
            (snap / "statements.json").write_text(
                json.dumps(
                    [r.to_dict() for _, r in sorted(self.statements.items())],
                    ensure_ascii=False,
                ),
                "utf-8",
            )
            self._graph_journal.truncate()
            self._registry_journal.truncate()
            self._statements_journal.truncate()

    def close(self) -> None:
        self.stop_worker()
        self._graph_journal.close()
        self._registry_journal.close()
        self._statements_journal.close()

    # -- ground truth ----------------------------------------------------------

    def ingest_triples(self, triples: list) -> dict:
        """Add already-aligned triples; journals before acknowledging."""
        with self._lock:
            added, merged = self.graph.add_all(triples)
            self._graph_journal.append(
                {
                    "op": "ingest",
                    "triples": [
                        {
                            "s": t.subject.text,
                            "p": t.predicate.text,
                            "o": t.object.text,
                            "provenance": sorted(t.provenance),
                        }
                        for t in triples
                    ],
                }
            )
            return {"added": added, "merged": merged}

    def ingest_ground_truth(
        self, data: str, fmt: str, source: Optional[str] = None,
        dry_run: bool = False,
    ) -> dict:
        """Parse, canonicalize through the lexicon, and ingest trusted rows.

        Raises ParseError (N-Triples) or CsvFormatError; CSV row-level
        problems are returned under rejected_rows instead of failing the
        batch. With dry_run the store stays untouched and only the counts
        are computed.
        """
        provenance = (source,) if source else ("ground-truth",)
        rejected = []
        if fmt == "nt":
            raw = parse_ntriples(data)
        elif fmt == "csv":
            report = ingest_csv(data, default_provenance=provenance[0])
            raw = report.triples
            rejected = [
                {"row": row, "error": message} for row, message in report.row_errors
            ]
        else:
            raise FactGraphError(f"unknown ground-truth format {fmt!r}")
        aligned = [
            align_triple(
                t.subject.text,
                t.predicate.text,
                t.object.text,
                self.lexicon,
                provenance=t.provenance or provenance,
            )
            for t in raw
        ]
        if dry_run:
            added = merged = 0
            seen = set()
            for t in aligned:
                if t.key in seen or self.graph.has_exact(*t.key) is not None:
                    merged += 1
                else:
                    seen.add(t.key)
                    added += 1
            return {
                "added": added,
                "merged": merged,
                "rejected_rows": rejected,
                "dry_run": True,
            }
        summary = self.ingest_triples(aligned)
        summary["rejected_rows"] = rejected
        return summary

    # -- media -----------------------------------------------------------------

    def register_media(self, item: MediaItem) -> bool:
        """Register or update; returns True when an existing id was replaced."""
        with self._lock:
            updated = self.registry.register(item)
            self._registry_journal.append({"op": "register", "item": item.to_dict()})
            return updated

    # -- statements --------------------------------------------------------------

    def add_statements(self, media_id: str, trusted: bool, aligned: list) -> list:
        with self._lock:
            records = []
            for stmt in aligned:
                self._statement_seq += 1
                record = StatementRecord(
                    id=f"st-{self._statement_seq}",
                    media_id=media_id,
                    trusted=trusted,
                    statement=stmt,
                )
                self.statements[record.id] = record
                self._statements_journal.append(
                    {"op": "put", "record": record.to_dict()}
                )
                records.append(record)
            return records

    def statements_page(
        self,
        media_id: Optional[str] = None,
        status: Optional[str] = None,
        page: int = 1,
        page_size: Optional[int] = None,
    ) -> dict:
        page_size = page_size or self.config.page_size
        if status is not None:
            try:
                status_value = ReviewStatus(status)
            except ValueError:
                raise FactGraphError(
                    f"unknown review status {status!r}"
                ) from None
        with self._lock:
            records = sorted(
                self.statements.values(), key=lambda r: int(r.id.split("-")[1])
            )
        if media_id is not None:
            records = [r for r in records if r.media_id == media_id]
        if status is not None:
            records = [
                r for r in records if r.statement.review_status is status_value
            ]
        total = len(records)
        start = (page - 1) * page_size
        items = records[start : start + page_size]
        return {
            "items": [r.to_dict() for r in items],
            "page": page,
            "page_size": page_size,
            "total": total,
        }

    def review(
        self,
        statement_id: str,
        action: str,
        reviewer: str = "",
        new_terms: Optional[dict] = None,
    ) -> StatementRecord:
        """Apply one review action; exactly one journal entry per change.

        Approve on a trusted-source statement also extends the ground
        truth (its own journal entry). Raises LookupError for unknown
        ids, ReviewError for illegal transitions.
        """
        with self._lock:
            record = self.statements.get(statement_id)
            if record is None:
                raise LookupError(f"no statement {statement_id}")
            stmt = record.statement
            if action == "Approve":
                stmt.transition(ReviewStatus.APPROVED)
                if record.trusted:
                    self.graph.add_triple(stmt.triple)
                    self._graph_journal.append(
                        {
                            "op": "ingest",
                            "triples": [
                                {
                                    "s": stmt.triple.subject.text,
                                    "p": stmt.triple.predicate.text,
                                    "o": stmt.triple.object.text,
                                    "provenance": sorted(stmt.triple.provenance),
                                }
                            ],
                            "reason": f"approved {statement_id}",
                        }
                    )
            elif action == "Reject":
                stmt.transition(ReviewStatus.REJECTED)
            elif action == "Edit":
                terms = new_terms or {}
                missing = [
                    k
                    for k in ("subject", "predicate", "object")
                    if not str(terms.get(k, "")).strip()
                ]
                if missing:
                    raise FactGraphError(
                        f"edit must supply subject, predicate and object; "
                        f"missing {', '.join(missing)}"
                    )
                stmt.transition(ReviewStatus.EDITED)
                stmt.triple = align_triple(
                    terms["subject"],
                    terms["predicate"],
                    terms["object"],
                    self.lexicon,
                    provenance=stmt.triple.provenance,
                )
                _, predicate_unknown = normalize_predicate(
                    terms["predicate"], self.lexicon
                )
                flags = set()
                for candidate in stmt.candidates:
                    flags |= _candidate_flags(candidate, predicate_unknown)
                if not stmt.candidates and predicate_unknown:
                    flags.add("out-of-lexicon")
                stmt.flags = frozenset(flags)
                stmt.veracity = check_statement(self.graph, stmt, self.path_cfg)
            else:
                raise ReviewError(f"unknown review action {action!r}")
            self._statements_journal.append(
                {
                    "op": "review",
                    "id": statement_id,
                    "action": action,
                    "reviewer": reviewer,
                    "record": record.to_dict(),
                }
            )
            return record

    def report_for(self, media_id: str) -> AccuracyReport:
        """Rebuild the report from the statement store's current state."""
        with self._lock:
            records = [r for r in self.statements.values() if r.media_id == media_id]
        if not records:
            raise LookupError(f"no checked statements for media {media_id}")
        records.sort(key=lambda r: int(r.id.split("-")[1]))
        checked = [(r.statement, r.statement.veracity) for r in records]
        return build_report(
            media_id, checked, self.scoring_cfg, self.policy
        )

    # -- jobs --------------------------------------------------------------------

    def start_worker(self) -> None:
        if self._worker is None or not self._worker.is_alive():
            self._worker = threading.Thread(target=self._work, daemon=True)
            self._worker.start()

    def stop_worker(self) -> None:
        if self._worker is not None and self._worker.is_alive():
            self._queue.put(None)
            self._worker.join(timeout=10)
        self._worker = None

    def submit_job(
        self,
        media_id: str,
        doc,
        trusted: bool = False,
        extractor: str = "rule",
        extractor_config: Optional[ExtractorConfig] = None,
        reproducibility_runs: int = 0,
    ) -> JobRecord:
        with self._lock:
            self._job_seq += 1
            job = JobRecord(job_id=f"job-{self._job_seq}", media_id=media_id)
            job.progress = {"sentences": len(doc.segments)}
            self.jobs[job.job_id] = job
        self._queue.put(
            (job, doc, trusted, extractor, extractor_config, reproducibility_runs)
        )
        return job

    def _work(self) -> None:
        while True:
            task = self._queue.get()
            if task is None:
                return
            job, doc, trusted, extractor, extractor_config, runs = task
            try:
                candidates = extract_candidates(
                    doc,
                    extractor=extractor,
                    config=extractor_config,
                    audit_log=self.data_dir / "llm-audit.jsonl"
                    if extractor == "llm"
                    else None,
                    reproducibility_runs=runs,
                    parallelism=self.config.llm_parallelism,
                )
                job.progress["statements"] = len(candidates)
                job.advance("Aligning")
                job.advance("Checking")
                aligned, report = check_and_score(
                    job.media_id,
                    candidates,
                    self.graph,
                    self.lexicon,
                    self.path_cfg,
                    self.scoring_cfg,
                    self.policy,
                    pending_lexicon=self.config.pending_lexicon_file()
                    if extractor == "llm"
                    else None,
                )
                job.progress["aligned"] = len(aligned)
                job.progress["checked"] = len(aligned)
                self.add_statements(job.media_id, trusted, aligned)
                job.progress["s_acc"] = report.s_acc
                job.advance("Done")
            except ScoringError as exc:
                job.fail(f"unscoreable: {exc}")
            except Exception as exc:  # noqa: BLE001 - job boundary
                job.fail(str(exc))
            finally:
                self._queue.task_done()
