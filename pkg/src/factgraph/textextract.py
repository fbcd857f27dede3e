"""Turn heterogeneous media content into clean sentence segments.

Four extractors share one sentence segmenter:

* plain text — paragraph-aware splitting on ``.`` ``!`` ``?`` followed by
  whitespace or end of input, with a fixed abbreviation list (shipped as
  ``data/abbreviations.txt``) protecting tokens like "e.g." and "Dr.";
* HTML — lenient tag-soup parse; script/style/nav/header/footer content
  is dropped, block elements become paragraph breaks, and an optional
  noise filter removes fragments shorter than three tokens that contain
  no verb from the predicate lexicon (menu labels, bylines);
* SRT / WebVTT transcripts — cue texts are concatenated, re-segmented,
  and each sentence carries the time range spanning its source cues;
* an external tool hook for formats delegated to third-party programs
  (PDF mining, audio transcription): the configured command's stdout is
  treated as UTF-8 plain text.

All extractors are deterministic. Only the external hook spawns
subprocesses; those are bounded by a configurable semaphore (default 2).
"""

from __future__ import annotations

import html.parser
import re
import shlex
import subprocess
import threading
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Iterable, Optional

from .errors import ExternalToolError, TranscriptError
from .kgstore import MediaId

_TERMINATORS = ".!?"
_CLOSERS = "\"')]"


def _load_wordlist(name: str) -> frozenset:
    text = resources.files("factgraph.data").joinpath(name).read_text(encoding="utf-8")
    return frozenset(
        line.strip().lower() for line in text.splitlines()
        if line.strip() and not line.startswith("#"))


ABBREVIATIONS = _load_wordlist("abbreviations.txt")
VERB_LEXICON = _load_wordlist("verbs.txt")
# single-word forms, for the noise filter
_VERB_WORDS = frozenset(v for v in VERB_LEXICON if " " not in v)


class SourceFormat(Enum):
    PLAIN = "plain"
    HTML = "html"
    TRANSCRIPT_VTT = "vtt"
    TRANSCRIPT_SRT = "srt"
    EXTERNAL = "external"


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str
    time_range: Optional[tuple] = None  # (start_ms, end_ms)


@dataclass
class TextDocument:
    media_id: MediaId
    segments: list
    source_format: SourceFormat

    def text(self) -> str:
        return " ".join(s.text for s in self.segments)


# ---------------------------------------------------------------------------
# Sentence segmentation
# ---------------------------------------------------------------------------

def _word_ending_at(text: str, pos: int) -> str:
    start = pos
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start:pos + 1].lstrip("\"'([")


def segment_spans(text: str) -> list:
    """Character spans of sentences in ``text``.

    A split happens after ``. ! ?`` (plus any run of those and closing
    quotes/brackets) when the next character is whitespace or the end,
    unless the token ending at a period is a protected abbreviation.
    """
    spans = []
    n = len(text)
    start = 0
    i = 0
    while i < n:
        ch = text[i]
        if ch in _TERMINATORS:
            j = i + 1
            while j < n and text[j] in _TERMINATORS:
                j += 1
            while j < n and text[j] in _CLOSERS:
                j += 1
            if j >= n or text[j].isspace():
                if ch == "." and _word_ending_at(text, i).lower() in ABBREVIATIONS:
                    i += 1
                    continue
                if text[start:j].strip():
                    spans.append((start, j))
                while j < n and text[j].isspace():
                    j += 1
                start = j
                i = j
                continue
            i = j
            continue
        i += 1
    if start < n and text[start:].strip():
        spans.append((start, n))
    return spans


def split_sentences(text: str) -> list:
    """Whitespace-normalized sentence strings."""
    return [" ".join(text[a:b].split()) for a, b in segment_spans(text)]


def _paragraphs(text: str) -> list:
    return [p for p in re.split(r"\n\s*\n", text) if p.strip()]


def extract_plain(media_id: MediaId, text: str,
                  source_format: SourceFormat = SourceFormat.PLAIN) -> TextDocument:
    """Segment plain UTF-8 text. Empty input yields an empty document."""
    sentences = []
    for paragraph in _paragraphs(text):
        sentences.extend(split_sentences(paragraph))
    segments = [Sentence(i, s) for i, s in enumerate(sentences)]
    return TextDocument(media_id, segments, source_format)


# ---------------------------------------------------------------------------
# HTML
# ---------------------------------------------------------------------------

_SKIP_TAGS = {"script", "style", "nav", "header", "footer", "title"}
_BLOCK_TAGS = {
    "p", "div", "section", "article", "main", "aside", "blockquote", "pre",
    "h1", "h2", "h3", "h4", "h5", "h6", "ul", "ol", "li", "table", "tr",
    "td", "th", "figure", "figcaption", "br", "hr",
}


class _SoupParser(html.parser.HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self._skip_depth += 1
        elif tag in _BLOCK_TAGS:
            self.parts.append("\n\n")

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            if self._skip_depth > 0:
                self._skip_depth -= 1
        elif tag in _BLOCK_TAGS:
            self.parts.append("\n\n")

    def handle_data(self, data):
        if self._skip_depth == 0:
            self.parts.append(data)

    def text(self) -> str:
        return "".join(self.parts)


def _is_noise(sentence: str) -> bool:
    tokens = sentence.split()
    if len(tokens) >= 3:
        return False
    words = {t.strip(".,;:!?()[]\"'").lower() for t in tokens}
    return not (words & _VERB_WORDS)


def extract_html(media_id: MediaId, data, noise_filter: bool = True) -> TextDocument:
    """Extract sentence segments from tag soup.

    Markup characters never survive into segments; entity references are
    decoded first, then any remaining angle brackets are blanked.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    parser = _SoupParser()
    parser.feed(data)
    parser.close()
    text = parser.text().replace("<", " ").replace(">", " ")
    sentences = []
    for paragraph in _paragraphs(text):
        sentences.extend(split_sentences(paragraph))
    if noise_filter:
        sentences = [s for s in sentences if not _is_noise(s)]
    segments = [Sentence(i, s) for i, s in enumerate(sentences)]
    return TextDocument(media_id, segments, SourceFormat.HTML)


# ---------------------------------------------------------------------------
# Transcripts (SRT / WebVTT)
# ---------------------------------------------------------------------------

_SRT_TIME = re.compile(r"^(\d+):(\d{2}):(\d{2})[,.](\d{3})$")
_VTT_TIME = re.compile(r"^(?:(\d+):)?(\d{2}):(\d{2})\.(\d{3})$")
_TAG = re.compile(r"<[^>]*>")


def _parse_timestamp(token: str, pattern, cue_index: int) -> int:
    m = pattern.match(token.strip())
    if not m:
        raise TranscriptError(cue_index, f"bad timestamp {token.strip()!r}")
    hours = int(m.group(1) or 0)
    minutes, seconds, millis = int(m.group(2)), int(m.group(3)), int(m.group(4))
    if minutes > 59 or seconds > 59:
        raise TranscriptError(cue_index, f"bad timestamp {token.strip()!r}")
    return ((hours * 60 + minutes) * 60 + seconds) * 1000 + millis


def _parse_cue_timing(line: str, pattern, cue_index: int) -> tuple:
    if "-->" not in line:
        raise TranscriptError(cue_index, f"expected cue timing, got {line!r}")
    left, _, right = line.partition("-->")
    right = right.strip().split(" ")[0]  # drop VTT cue settings
    start = _parse_timestamp(left, pattern, cue_index)
    end = _parse_timestamp(right, pattern, cue_index)
    if end < start:
        raise TranscriptError(cue_index, "cue ends before it starts")
    return start, end


def _blocks(lines: list) -> list:
    blocks, current = [], []
    for line in lines:
        if line.strip():
            current.append(line)
        elif current:
            blocks.append(current)
            current = []
    if current:
        blocks.append(current)
    return blocks


def _parse_srt_cues(text: str) -> list:
    cues = []
    for index, block in enumerate(_blocks(text.splitlines())):
        lines = list(block)
        if lines and lines[0].strip().isdigit():
            lines = lines[1:]
        if not lines:
            raise TranscriptError(index, "cue has no timing line")
        start, end = _parse_cue_timing(lines[0], _SRT_TIME, index)
        cues.append((start, end, " ".join(lines[1:])))
    return cues


def _parse_vtt_cues(text: str) -> list:
    lines = text.splitlines()
    if not lines or not lines[0].lstrip("﻿").startswith("WEBVTT"):
        raise TranscriptError(0, "missing WEBVTT header")
    cues = []
    index = 0
    for block in _blocks(lines[1:]):
        first = block[0].strip()
        if first.startswith(("NOTE", "STYLE", "REGION")):
            continue
        lines_in_block = list(block)
        if "-->" not in lines_in_block[0]:
            lines_in_block = lines_in_block[1:]  # cue identifier line
        if not lines_in_block:
            raise TranscriptError(index, "cue has no timing line")
        start, end = _parse_cue_timing(lines_in_block[0], _VTT_TIME, index)
        cues.append((start, end, " ".join(lines_in_block[1:])))
        index += 1
    return cues


def parse_transcript(media_id: MediaId, data, source_format: SourceFormat) -> TextDocument:
    """Parse an SRT or WebVTT transcript into timed sentences.

    Cue texts are concatenated and re-segmented; a sentence's time range
    spans every cue it overlaps (monotone non-decreasing in order).
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    if source_format is SourceFormat.TRANSCRIPT_SRT:
        cues = _parse_srt_cues(data)
    elif source_format is SourceFormat.TRANSCRIPT_VTT:
        cues = _parse_vtt_cues(data)
    else:
        raise ValueError(f"not a transcript format: {source_format}")

    # joined text with per-cue character spans
    pieces, cue_spans = [], []
    offset = 0
    for start, end, raw in cues:
        clean = " ".join(_TAG.sub(" ", raw).split())
        if not clean:
            continue
        if pieces:
            offset += 1  # joining space
        cue_spans.append((offset, offset + len(clean), start, end))
        pieces.append(clean)
        offset += len(clean)
    joined = " ".join(pieces)

    segments = []
    for i, (a, b) in enumerate(segment_spans(joined)):
        touching = [(s, e) for lo, hi, s, e in cue_spans if lo < b and hi > a]
        time_range = (min(s for s, _ in touching), max(e for _, e in touching)) if touching else None
        segments.append(Sentence(i, " ".join(joined[a:b].split()), time_range))
    return TextDocument(media_id, segments, source_format)


# ---------------------------------------------------------------------------
# External tool hook
# ---------------------------------------------------------------------------

_subprocess_gate = threading.BoundedSemaphore(2)


def set_subprocess_limit(limit: int) -> None:
    """Replace the subprocess concurrency bound (default 2)."""
    global _subprocess_gate
    if limit < 1:
        raise ValueError("limit must be >= 1")
    _subprocess_gate = threading.BoundedSemaphore(limit)


def run_external_extractor(media_id: MediaId, path: str, tool_command_template: str,
                           timeout_s: Optional[float] = None) -> TextDocument:
    """Run a configured external tool and segment its stdout.

    The template must contain ``{input}``, which is replaced with the
    input path; stdout must be UTF-8 and the exit code 0. Failures raise
    ExternalToolError carrying a stderr excerpt.
    """
    if "{input}" not in tool_command_template:
        raise ExternalToolError("command template must contain '{input}'")
    argv = [part.replace("{input}", str(path)) for part in shlex.split(tool_command_template)]
    with _subprocess_gate:
        try:
            proc = subprocess.run(argv, capture_output=True, timeout=timeout_s)
        except FileNotFoundError as e:
            raise ExternalToolError(f"tool not found: {e}") from None
        except subprocess.TimeoutExpired:
            raise ExternalToolError(f"tool timed out after {timeout_s}s") from None
    stderr_excerpt = proc.stderr.decode("utf-8", errors="replace")[:500]
    if proc.returncode != 0:
        raise ExternalToolError(
            f"tool exited {proc.returncode}: {stderr_excerpt}")
    try:
        stdout = proc.stdout.decode("utf-8")
    except UnicodeDecodeError:
        raise ExternalToolError(
            f"tool produced non-UTF-8 output; stderr: {stderr_excerpt}") from None
    doc = extract_plain(media_id, stdout, SourceFormat.EXTERNAL)
    return doc
