"""Pipeline stages shared by the service worker and the CLI.

Content goes through four steps: extract sentences, extract candidate
statements (rule-based or via the remote extractor), align them onto
canonical triples, then check each against the ground truth and fold the
verdicts into a report. Each step is a plain function so the two
frontends cannot drift apart.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Union

from .alignment import Lexicon, align, propose_lexicon_entries
from .errors import FactGraphError
from .kgstore import GroundTruthGraph, MediaId
from .scoring import AggregationPolicy, ScoringConfig, build_report
from .statements import (
    ExtractorConfig,
    LlmClient,
    check_reproducibility,
    extract_llm,
    extract_rule,
)
from .textextract import (
    SourceFormat,
    TextDocument,
    extract_html,
    extract_plain,
    parse_transcript,
)
from .veracity import PathCheckConfig, check_statement

CONTENT_KINDS = ("plain", "html", "vtt", "srt")


def extract_document(
    media_id: MediaId,
    data: Union[str, bytes],
    kind: str,
    noise_filter: bool = True,
) -> TextDocument:
    """Turn raw content into sentences according to its kind."""
    if kind == "plain":
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        return extract_plain(media_id, text)
    if kind == "html":
        return extract_html(media_id, data, noise_filter=noise_filter)
    if kind == "vtt":
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        return parse_transcript(media_id, text, SourceFormat.TRANSCRIPT_VTT)
    if kind == "srt":
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        return parse_transcript(media_id, text, SourceFormat.TRANSCRIPT_SRT)
    raise FactGraphError(
        f"unknown content kind {kind!r}, expected one of {', '.join(CONTENT_KINDS)}"
    )


def extract_candidates(
    doc: TextDocument,
    extractor: str = "rule",
    config: Optional[ExtractorConfig] = None,
    client: Optional[LlmClient] = None,
    audit_log=None,
    reproducibility_runs: int = 0,
    parallelism: int = 4,
) -> list:
    """Candidate statements for every sentence, in sentence order.

    The remote extractor runs sentences concurrently up to `parallelism`,
    but output order stays tied to sentence order. reproducibility_runs
    >= 2 re-queries each sentence and flags unstable statements.
    """
    if extractor == "rule":
        out = []
        for sentence in doc.segments:
            out.extend(extract_rule(doc.media_id, sentence))
        return out
    if extractor != "llm":
        raise FactGraphError(f"unknown extractor {extractor!r}")
    if config is None:
        raise FactGraphError("the llm extractor needs an endpoint configuration")
    shared = client or LlmClient(config)

    def one(sentence):
        if reproducibility_runs >= 2:
            return check_reproducibility(
                doc.media_id,
                sentence,
                config,
                runs=reproducibility_runs,
                client=shared,
                audit_log=audit_log,
            )
        return extract_llm(doc.media_id, sentence, config, shared, audit_log)

    out = []
    if doc.segments:
        with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
            for batch in pool.map(one, doc.segments):
                out.extend(batch)
    return out


def check_and_score(
    media_id: MediaId,
    candidates: list,
    graph: GroundTruthGraph,
    lexicon: Lexicon,
    path_cfg: Optional[PathCheckConfig] = None,
    scoring_cfg: Optional[ScoringConfig] = None,
    policy: AggregationPolicy = AggregationPolicy.MEAN_SCORE,
    pending_lexicon=None,
) -> tuple:
    """Align, check, and score. Returns (aligned statements, report).

    Each aligned statement leaves with its verdict attached; unknown
    predicate surfaces from remote extraction are proposed to the
    pending-lexicon file when a path is given.
    """
    aligned = align(candidates, lexicon)
    if pending_lexicon is not None:
        propose_lexicon_entries(candidates, lexicon, pending_lexicon)
    checked = []
    for stmt in aligned:
        verdict = check_statement(graph, stmt, path_cfg)
        stmt.veracity = verdict
        checked.append((stmt, verdict))
    report = build_report(media_id, checked, scoring_cfg, policy)
    return aligned, report
