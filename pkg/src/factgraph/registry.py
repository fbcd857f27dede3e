"""FAIR metadata registry for videos, podcasts and documents.

Holds one record per media item (title, language, duration, publication
date, publisher, topics, license, source URL, transcript reference) and
answers faceted filter queries: title substring, exact normalized topic,
publisher, inclusive date and duration ranges, language and kind. The
schema stays small on purpose; anything beyond it goes into the untyped
``extra`` map, which filters ignore.

Results are deterministic: publication date descending (undated items
last), then title, then id. Registration is last-write-wins per id.

Same reader/writer contract as the triple store: mutation goes through an
internal lock, records are treated as immutable once stored.
"""

from __future__ import annotations

import datetime
import json
import threading
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Optional

from .errors import FilterError, MediaError
from .kgstore import MediaId, normalize_text


class MediaKind(Enum):
    VIDEO = "video"
    PODCAST = "podcast"
    ARTICLE = "article"
    DOCUMENT = "document"

    @classmethod
    def parse(cls, value: str) -> "MediaKind":
        try:
            return cls(value.strip().lower())
        except (ValueError, AttributeError):
            raise MediaError(f"unknown media_kind {value!r}") from None


def _parse_date(value: str, field_name: str) -> datetime.date:
    try:
        return datetime.date.fromisoformat(value)
    except (ValueError, TypeError):
        raise MediaError(f"{field_name}: expected YYYY-MM-DD, got {value!r}") from None


@dataclass
class MediaItem:
    id: MediaId
    title: str
    media_kind: MediaKind
    language: Optional[str] = None        # BCP-47-style tag, e.g. "en", "de-DE"
    duration_seconds: int = 0             # 0 = unknown for articles/documents
    publication_date: Optional[datetime.date] = None
    publisher: Optional[str] = None
    topics: set = field(default_factory=set)
    license: Optional[str] = None
    source_url: Optional[str] = None
    transcript_ref: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not str(self.id).strip():
            raise MediaError("id must be non-empty")
        if not self.title or not self.title.strip():
            raise MediaError("title must be non-empty")
        if self.duration_seconds < 0:
            raise MediaError("duration_seconds must be >= 0")
        self.topics = {normalize_text(t) for t in self.topics if normalize_text(t)}

    @classmethod
    def from_dict(cls, obj: dict) -> "MediaItem":
        """Build from the import-JSON shape (dates as YYYY-MM-DD strings)."""
        if not isinstance(obj, dict):
            raise MediaError("media item must be a JSON object")
        known = {"id", "title", "media_kind", "language", "duration_seconds",
                 "publication_date", "publisher", "topics", "license",
                 "source_url", "transcript_ref", "extra"}
        unknown = set(obj) - known
        if unknown:
            raise MediaError(f"unknown media fields: {sorted(unknown)}")
        for required in ("id", "title", "media_kind"):
            if required not in obj:
                raise MediaError(f"missing required field '{required}'")
        date = obj.get("publication_date")
        duration = obj.get("duration_seconds", 0)
        if not isinstance(duration, int) or isinstance(duration, bool):
            raise MediaError("duration_seconds must be an integer")
        return cls(
            id=str(obj["id"]),
            title=str(obj["title"]),
            media_kind=MediaKind.parse(obj["media_kind"]),
            language=obj.get("language"),
            duration_seconds=duration,
            publication_date=_parse_date(date, "publication_date") if date else None,
            publisher=obj.get("publisher"),
            topics=set(obj.get("topics", ())),
            license=obj.get("license"),
            source_url=obj.get("source_url"),
            transcript_ref=obj.get("transcript_ref"),
            extra=dict(obj.get("extra", {})),
        )

    def to_dict(self) -> dict:
        out = asdict(self)
        out["media_kind"] = self.media_kind.value
        out["topics"] = sorted(self.topics)
        out["publication_date"] = (self.publication_date.isoformat()
                                   if self.publication_date else None)
        return out


@dataclass
class MediaFilter:
    """Conjunction of optional predicates; at least one must be set."""

    title_contains: Optional[str] = None
    topic: Optional[str] = None
    publisher: Optional[str] = None
    published_after: Optional[datetime.date] = None
    published_before: Optional[datetime.date] = None
    min_duration_seconds: Optional[int] = None
    max_duration_seconds: Optional[int] = None
    language: Optional[str] = None
    media_kind: Optional[MediaKind] = None

    def validate(self) -> "MediaFilter":
        if all(getattr(self, f) is None for f in self.__dataclass_fields__):
            raise FilterError("filter must set at least one field")
        if (self.published_after and self.published_before
                and self.published_after > self.published_before):
            raise FilterError("inverted date range")
        if (self.min_duration_seconds is not None
                and self.max_duration_seconds is not None
                and self.min_duration_seconds > self.max_duration_seconds):
            raise FilterError("inverted duration range")
        return self

    def matches(self, item: MediaItem) -> bool:
        if self.title_contains is not None:
            if self.title_contains.lower() not in item.title.lower():
                return False
        if self.topic is not None:
            if normalize_text(self.topic) not in item.topics:
                return False
        if self.publisher is not None:
            if item.publisher is None or item.publisher.lower() != self.publisher.lower():
                return False
        if self.published_after is not None:
            if item.publication_date is None or item.publication_date < self.published_after:
                return False
        if self.published_before is not None:
            if item.publication_date is None or item.publication_date > self.published_before:
                return False
        if self.min_duration_seconds is not None:
            # duration 0 means unknown and never satisfies a minimum
            if item.duration_seconds == 0 or item.duration_seconds < self.min_duration_seconds:
                return False
        if self.max_duration_seconds is not None:
            if item.duration_seconds > self.max_duration_seconds:
                return False
        if self.language is not None:
            if item.language is None or item.language.lower() != self.language.lower():
                return False
        if self.media_kind is not None:
            if item.media_kind is not self.media_kind:
                return False
        return True


def _result_order(item: MediaItem):
    has_date = item.publication_date is not None
    ordinal = item.publication_date.toordinal() if has_date else 0
    return (0 if has_date else 1, -ordinal, item.title, item.id)


class MediaRegistry:
    def __init__(self):
        self._items: dict[MediaId, MediaItem] = {}
        self._lock = threading.RLock()

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(list(self._items.values()))

    def register(self, item: MediaItem) -> bool:
        """Store an item; returns True when this replaced an existing id."""
        with self._lock:
            updated = item.id in self._items
            self._items[item.id] = item
            return updated

    def get(self, media_id: MediaId) -> Optional[MediaItem]:
        return self._items.get(media_id)

    def filter(self, media_filter: MediaFilter) -> list:
        """All items satisfying every set predicate, in result order."""
        media_filter.validate()
        hits = [item for item in self._items.values() if media_filter.matches(item)]
        return sorted(hits, key=_result_order)

    def export_json(self) -> str:
        """Serialize all items as a JSON array, ordered by id."""
        with self._lock:
            items = [self._items[k].to_dict() for k in sorted(self._items)]
        return json.dumps(items, ensure_ascii=False)

    def import_json(self, data) -> int:
        """Load an array-of-objects import file; returns item count."""
        if isinstance(data, (bytes, str)):
            data = json.loads(data)
        if not isinstance(data, list):
            raise MediaError("import file must be a JSON array of media items")
        items = [MediaItem.from_dict(obj) for obj in data]
        with self._lock:
            for item in items:
                self.register(item)
        return len(items)
