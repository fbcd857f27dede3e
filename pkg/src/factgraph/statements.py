"""Turn sentences into candidate (subject, predicate, object) statements.

Two extractors share one output type: a deterministic rule-based splitter
that needs no network, and a client for an HTTP completion endpoint.
Extracted statements are guarded rather than trusted: a groundedness
check verifies the subject and object actually occur in the source
sentence, and a reproducibility check re-runs the remote extractor and
flags statements that do not come back every time.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Union

import requests

from .errors import ExtractorError, UnparseableResponseError
from .kgstore import MediaId, normalize_text
from .textextract import VERB_LEXICON, Sentence, _load_wordlist

_ARTICLES = {"a", "an", "the"}
_AUXILIARIES = frozenset(_load_wordlist("auxiliaries.txt"))
_TOKEN_PUNCT = ".,!?;:\"'()[]"

# longest phrase first so "leads to" wins over a hypothetical bare "leads"
_PHRASES = sorted(
    (tuple(p.split()) for p in VERB_LEXICON), key=lambda p: (-len(p), p)
)


class Extractor(Enum):
    RULE = "rule"
    LLM = "llm"


@dataclass(frozen=True)
class CandidateStatement:
    media_id: MediaId
    sentence_index: int
    raw_subject: str
    raw_predicate: str
    raw_object: str
    extractor: Extractor
    grounded: bool = True
    reproducible: Optional[bool] = None

    def key(self) -> tuple:
        """Identity used for dedup and reproducibility comparison."""
        return (
            normalize_text(self.raw_subject),
            normalize_text(self.raw_predicate),
            normalize_text(self.raw_object),
        )

    def to_dict(self) -> dict:
        return {
            "media_id": self.media_id,
            "sentence_index": self.sentence_index,
            "raw_subject": self.raw_subject,
            "raw_predicate": self.raw_predicate,
            "raw_object": self.raw_object,
            "extractor": self.extractor.value,
            "grounded": self.grounded,
            "reproducible": self.reproducible,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CandidateStatement":
        return cls(
            media_id=data["media_id"],
            sentence_index=data["sentence_index"],
            raw_subject=data["raw_subject"],
            raw_predicate=data["raw_predicate"],
            raw_object=data["raw_object"],
            extractor=Extractor(data["extractor"]),
            grounded=data["grounded"],
            reproducible=data.get("reproducible"),
        )


def _default_prompt() -> str:
    from importlib import resources

    return (
        resources.files("factgraph.data").joinpath("prompt.txt").read_text("utf-8")
    )


@dataclass
class ExtractorConfig:
    endpoint_url: str
    model_name: str = "default"
    prompt_template: str = field(default_factory=_default_prompt)
    timeout_ms: int = 30_000
    max_retries: int = 2
    temperature: float = 0.0
    api_key: Optional[str] = None

    def __post_init__(self):
        if "{sentence}" not in self.prompt_template:
            raise ExtractorError(
                "prompt_template must contain the {sentence} placeholder"
            )
        if self.timeout_ms <= 0:
            raise ExtractorError("timeout_ms must be positive")
        if self.max_retries < 0:
            raise ExtractorError("max_retries must be >= 0")


def check_groundedness(
    raw_subject: str, raw_object: str, sentence_text: str
) -> bool:
    """True iff subject and object both occur in the sentence.

    Case-insensitive substring test after whitespace normalization. The
    predicate is exempt on purpose: extractors may return base forms
    ("cause" for "causes") and that is not a hallucination.
    """
    haystack = normalize_text(sentence_text)
    return (
        normalize_text(raw_subject) in haystack
        and normalize_text(raw_object) in haystack
    )


# --- rule-based extraction ---


def _clean(token: str) -> str:
    return token.strip(_TOKEN_PUNCT).lower()


def _match_phrase_at(tokens: list, i: int) -> int:
    """Length in tokens of the longest lexicon phrase starting at i, or 0."""
    for phrase in _PHRASES:
        if i + len(phrase) > len(tokens):
            continue
        if all(_clean(tokens[i + k]) == phrase[k] for k in range(len(phrase))):
            return len(phrase)
    return 0


def extract_rule(
    media_id: MediaId, sentence: Union[Sentence, str]
) -> list:
    """Split a declarative sentence at its first lexicon verb phrase.

    Subject is everything before the verb minus leading articles, object
    everything after minus trailing punctuation. Sentences without a
    lexicon verb, or with nothing on either side of it, yield no
    statements. Deterministic and offline.
    """
    if isinstance(sentence, str):
        sentence = Sentence(index=0, text=sentence)
    tokens = sentence.text.split()
    verb_at = verb_len = 0
    for i in range(len(tokens)):
        n = _match_phrase_at(tokens, i)
        if n:
            verb_at, verb_len = i, n
            break
    else:
        return []

    # a bare auxiliary like "is" extends over a following participle or
    # lexicon verb, so "is rising" stays one predicate
    end = verb_at + verb_len
    if verb_len == 1 and _clean(tokens[verb_at]) in _AUXILIARIES and end < len(tokens):
        nxt = _clean(tokens[end])
        if nxt.endswith(("ing", "ed")) or nxt in VERB_LEXICON:
            end += 1

    subject_tokens = tokens[:verb_at]
    while subject_tokens and subject_tokens[0].lower() in _ARTICLES:
        subject_tokens = subject_tokens[1:]
    object_tokens = list(tokens[end:])
    if object_tokens:
        last = object_tokens[-1].rstrip(_TOKEN_PUNCT)
        if last:
            object_tokens[-1] = last
        else:
            object_tokens.pop()
    if not subject_tokens or not object_tokens:
        return []

    subject = " ".join(subject_tokens)
    predicate = " ".join(tokens[verb_at:end])
    obj = " ".join(object_tokens)
    return [
        CandidateStatement(
            media_id=media_id,
            sentence_index=sentence.index,
            raw_subject=subject,
            raw_predicate=predicate,
            raw_object=obj,
            extractor=Extractor.RULE,
            grounded=check_groundedness(subject, obj, sentence.text),
        )
    ]


# --- LLM-backed extraction ---


class LlmClient:
    """Thin wrapper for a completion endpoint speaking JSON over POST."""

    def __init__(self, config: ExtractorConfig, session=None):
        self.config = config
        self._session = session or requests.Session()

    def complete(self, prompt: str) -> str:
        """Send one prompt, return the raw response body.

        Transport failures and non-2xx statuses are retried up to
        max_retries times, then surface as ExtractorError.
        """
        cfg = self.config
        headers = {}
        if cfg.api_key:
            headers["Authorization"] = f"Bearer {cfg.api_key}"
        payload = {
            "model": cfg.model_name,
            "prompt": prompt,
            "temperature": cfg.temperature,
        }
        last_error = None
        for _ in range(cfg.max_retries + 1):
            try:
                response = self._session.post(
                    cfg.endpoint_url,
                    json=payload,
                    headers=headers,
                    timeout=cfg.timeout_ms / 1000.0,
                )
                response.raise_for_status()
                return response.text
            except requests.RequestException as exc:
                last_error = exc
        raise ExtractorError(
            f"extractor endpoint failed after {cfg.max_retries + 1} attempts: "
            f"{last_error}"
        ) from last_error


def _find_json_array(text: str) -> list:
    """Pull the first JSON array out of a completion body."""
    try:
        data = json.loads(text)
    except ValueError:
        data = None
    if isinstance(data, list):
        return data
    if isinstance(data, dict):
        # completion APIs commonly nest the generated text
        for key in ("completion", "text", "content", "response"):
            inner = data.get(key)
            if isinstance(inner, str):
                return _find_json_array(inner)
            if isinstance(inner, list):
                return inner
    decoder = json.JSONDecoder()
    idx = text.find("[")
    while idx != -1:
        try:
            value, _ = decoder.raw_decode(text, idx)
        except ValueError:
            pass
        else:
            if isinstance(value, list):
                return value
        idx = text.find("[", idx + 1)
    raise UnparseableResponseError(
        "no JSON array of statements in response", raw_response=text
    )


def _audit(
    audit_log: Optional[Union[str, Path]],
    media_id: MediaId,
    sentence_index: int,
    prompt: str,
    raw_response: str,
) -> None:
    if audit_log is None:
        return
    record = {
        "media_id": media_id,
        "sentence_index": sentence_index,
        "prompt_hash": hashlib.sha256(prompt.encode("utf-8")).hexdigest(),
        "raw_response": raw_response,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    with open(audit_log, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        fh.flush()


def extract_llm(
    media_id: MediaId,
    sentence: Sentence,
    config: ExtractorConfig,
    client: Optional[LlmClient] = None,
    audit_log: Optional[Union[str, Path]] = None,
) -> list:
    """Extract statements from one sentence via the configured endpoint.

    The response must contain a JSON array of {subject, predicate,
    object} objects; anything else raises UnparseableResponseError with
    the verbatim body attached. Every statement is groundedness-checked
    against the sentence before it leaves this function.
    """
    client = client or LlmClient(config)
    prompt = config.prompt_template.replace("{sentence}", sentence.text)
    raw = client.complete(prompt)
    _audit(audit_log, media_id, sentence.index, prompt, raw)
    items = _find_json_array(raw)
    statements = []
    for item in items:
        if not isinstance(item, dict):
            raise UnparseableResponseError(
                "statement entries must be objects", raw_response=raw
            )
        try:
            subject = item["subject"]
            predicate = item["predicate"]
            obj = item["object"]
        except KeyError as exc:
            raise UnparseableResponseError(
                f"statement entry missing key {exc}", raw_response=raw
            ) from exc
        if not all(
            isinstance(v, str) and v.strip() for v in (subject, predicate, obj)
        ):
            raise UnparseableResponseError(
                "statement fields must be non-empty strings", raw_response=raw
            )
        statements.append(
            CandidateStatement(
                media_id=media_id,
                sentence_index=sentence.index,
                raw_subject=subject.strip(),
                raw_predicate=predicate.strip(),
                raw_object=obj.strip(),
                extractor=Extractor.LLM,
                grounded=check_groundedness(subject, obj, sentence.text),
            )
        )
    return statements


def check_reproducibility(
    media_id: MediaId,
    sentence: Sentence,
    config: ExtractorConfig,
    runs: int = 2,
    client: Optional[LlmClient] = None,
    audit_log: Optional[Union[str, Path]] = None,
) -> list:
    """Run the remote extractor several times and flag unstable output.

    A statement counts as reproducible iff its normalized (s, p, o) key
    shows up in every run. Statements seen in only some runs are kept,
    flagged reproducible=False, so reviewers see them rather than losing
    them silently. Returns the union in first-seen order.
    """
    if runs < 2:
        raise ExtractorError("reproducibility needs at least 2 runs")
    if config.temperature != 0:
        raise ExtractorError(
            "reproducibility runs require temperature 0, got "
            f"{config.temperature}"
        )
    per_run_keys = []
    union: dict = {}
    for _ in range(runs):
        batch = extract_llm(media_id, sentence, config, client, audit_log)
        keys = set()
        for stmt in batch:
            keys.add(stmt.key())
            union.setdefault(stmt.key(), stmt)
        per_run_keys.append(keys)
    stable = set.intersection(*per_run_keys)
    return [
        dataclasses.replace(stmt, reproducible=key in stable)
        for key, stmt in union.items()
    ]
