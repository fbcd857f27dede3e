"""Command-line interface: every pipeline stage as a batch command.

Commands print machine-readable JSON on stdout (add --pretty for
humans). Exit codes are a stable contract: 0 success, 1 domain error
(bad data, constraint violations), 2 usage or IO error. Each command is
a thin wrapper over the same module operations the service uses, so the
two cannot drift.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .config import AppConfig, load_config
from .errors import ConfigError, FactGraphError
from .pipeline import CONTENT_KINDS, check_and_score, extract_candidates, extract_document
from .registry import MediaFilter, MediaKind
from .scoring import AggregationPolicy, ScoringConfig, build_report
from .state import AppState, StatementRecord
from .statements import ExtractorConfig


def _read_media_arg(ref: str) -> bytes:
    """Fetch content from '-', an http(s) URL, or a local path."""
    if ref == "-":
        return sys.stdin.buffer.read()
    if ref.startswith("http://") or ref.startswith("https://"):
        import requests

        resp = requests.get(ref, timeout=30)
        resp.raise_for_status()
        return resp.content
    return Path(ref).read_bytes()


def _open_state(args) -> AppState:
    config = load_config(args.config) if args.config else AppConfig()
    return AppState(config, start_worker=False)


def _parse_metric_values(pairs) -> dict:
    values = {}
    for pair in pairs or ():
        name, sep, raw = pair.partition("=")
        if not sep:
            raise FactGraphError(f"--metric expects name=value, got {pair!r}")
        try:
            values[name.strip()] = float(raw)
        except ValueError:
            raise FactGraphError(f"--metric {name}: {raw!r} is not a number") from None
    return values


# -- commands -------------------------------------------------------------


def cmd_ingest(args) -> dict:
    data = Path(args.trusted).read_text("utf-8")
    state = _open_state(args)
    try:
        return state.ingest_ground_truth(
            data, args.format, source=args.source, dry_run=args.dry_run
        )
    finally:
        state.close()


def cmd_check(args) -> dict:
    data = _read_media_arg(args.media)
    if args.media_id:
        media_id = args.media_id
    elif args.media == "-":
        media_id = "stdin"
    else:
        media_id = Path(args.media).stem
    state = _open_state(args)
    try:
        doc = extract_document(
            media_id, data, args.kind, noise_filter=state.config.noise_filter
        )
        extractor_cfg = None
        if args.extractor == "llm":
            try:
                extractor_cfg = ExtractorConfig(**state.config.extractor)
            except TypeError as exc:
                raise FactGraphError(f"llm extractor not configured: {exc}") from exc
        candidates = extract_candidates(
            doc,
            extractor=args.extractor,
            config=extractor_cfg,
            parallelism=state.config.llm_parallelism,
        )
        _, report = check_and_score(
            media_id,
            candidates,
            state.graph,
            state.lexicon,
            state.path_cfg,
            state.scoring_cfg,
            state.policy,
        )
        return report.to_dict()
    finally:
        state.close()


def cmd_score(args) -> dict:
    raw = json.loads(Path(args.statements).read_text("utf-8"))
    if isinstance(raw, dict):
        media_id = raw.get("media_id")
        rows = raw.get("statements", [])
    else:
        media_id = None
        rows = raw
    statements = []
    for row in rows:
        padded = {"id": row.get("id", "st-0"), "media_id": row.get("media_id", ""), **row}
        statements.append(StatementRecord.from_dict(padded).statement)
    media_id = args.media_id or media_id
    if media_id is None:
        for row in rows:
            found = row.get("media_id") or next(
                (c["media_id"] for c in row.get("candidates", ())), None
            )
            if found:
                media_id = found
                break
    if media_id is None:
        raise FactGraphError("cannot infer media id; pass --media-id")

    cfg = ScoringConfig(json.loads(args.weights)) if args.weights else None
    policy = AggregationPolicy(args.policy)
    checked = [(stmt, stmt.veracity) for stmt in statements]
    report = build_report(
        media_id,
        checked,
        cfg,
        policy,
        extra_metrics=_parse_metric_values(args.metric) or None,
    )
    return report.to_dict()


def cmd_stats(args) -> dict:
    state = _open_state(args)
    try:
        return state.graph.stats()
    finally:
        state.close()


def cmd_search(args) -> dict:
    import datetime

    def _date(value):
        return datetime.date.fromisoformat(value) if value else None

    media_filter = MediaFilter(
        title_contains=args.title,
        topic=args.topic,
        publisher=args.publisher,
        published_after=_date(args.published_after),
        published_before=_date(args.published_before),
        min_duration_seconds=args.min_duration,
        max_duration_seconds=args.max_duration,
        language=args.language,
        media_kind=MediaKind.parse(args.kind) if args.kind else None,
    )
    state = _open_state(args)
    try:
        hits = state.registry.filter(media_filter)
        return {"items": [item.to_dict() for item in hits], "total": len(hits)}
    finally:
        state.close()


def cmd_serve(args) -> Optional[dict]:
    from .service import create_app

    config = load_config(args.config) if args.config else load_config()
    app = create_app(config)
    import uvicorn

    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return None


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to the shared JSON config file")
    common.add_argument(
        "--pretty", action="store_true", help="indent JSON output for humans"
    )

    parser = argparse.ArgumentParser(
        prog="factgraph", description="fact-checking pipeline and media registry"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="extend the ground truth")
    p.add_argument("--format", choices=("nt", "csv"), required=True)
    p.add_argument("--trusted", required=True, metavar="FILE",
                   help="file of trusted statements to ingest")
    p.add_argument("--source", help="provenance label for rows without one")
    p.add_argument("--dry-run", action="store_true",
                   help="report counts without touching the store")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("check", parents=[common],
                       help="run the full pipeline on one medium")
    p.add_argument("--media", required=True, help="file path, URL, or - for stdin")
    p.add_argument("--kind", choices=CONTENT_KINDS, default="plain")
    p.add_argument("--extractor", choices=("rule", "llm"), default="rule")
    p.add_argument("--media-id", help="identifier for the medium (default: filename)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("score", parents=[common],
                       help="re-score stored statements under a new config")
    p.add_argument("--statements", required=True, metavar="FILE",
                   help="report JSON or a JSON array of checked statements")
    p.add_argument("--weights", help='scoring weights as JSON, e.g. {"veracity": 1.0}')
    p.add_argument("--metric", action="append", metavar="NAME=VALUE",
                   help="supply an extra per-media metric value (repeatable)")
    p.add_argument("--policy", choices=[p.value for p in AggregationPolicy],
                   default=AggregationPolicy.MEAN_SCORE.value)
    p.add_argument("--media-id")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("stats", parents=[common], help="ground-truth graph statistics")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("search", parents=[common], help="search the media registry")
    p.add_argument("--title")
    p.add_argument("--topic")
    p.add_argument("--publisher")
    p.add_argument("--published-after", metavar="YYYY-MM-DD")
    p.add_argument("--published-before", metavar="YYYY-MM-DD")
    p.add_argument("--min-duration", type=int, metavar="SECONDS")
    p.add_argument("--max-duration", type=int, metavar="SECONDS")
    p.add_argument("--language")
    p.add_argument("--kind", help="video, podcast, article or document")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload = args.func(args)
    except ConfigError as exc:
        # config problems are operator errors, like bad flags
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FactGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LookupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if payload is not None:
        indent = 2 if args.pretty else None
        print(json.dumps(payload, indent=indent, ensure_ascii=False))
    return 0


if __name__ == "__main__":
    sys.exit(main())
