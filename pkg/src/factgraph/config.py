"""Application configuration for the service and CLI.

One JSON file covers both; every key has a default so an empty config is
valid. A few operational settings can be overridden by environment
variables (useful in containers): FACTGRAPH_HOST, FACTGRAPH_PORT,
FACTGRAPH_DATA_DIR, FACTGRAPH_API_TOKEN, FACTGRAPH_LLM_ENDPOINT,
FACTGRAPH_LLM_API_KEY.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .alignment import Lexicon
from .errors import ConfigError
from .kgstore import DegreeMode
from .scoring import AggregationPolicy, ScoringConfig
from .veracity import PathCheckConfig

_KNOWN_KEYS = {
    "data_dir",
    "host",
    "port",
    "api_token",
    "lexicon_path",
    "pending_lexicon_path",
    "extractor",
    "max_path_len",
    "degree_mode",
    "scoring_weights",
    "aggregation_policy",
    "llm_parallelism",
    "subprocess_limit",
    "page_size",
    "noise_filter",
}


@dataclass
class AppConfig:
    data_dir: str = "factgraph-data"
    host: str = "127.0.0.1"
    port: int = 8757
    api_token: Optional[str] = None
    lexicon_path: Optional[str] = None  # packaged default when unset
    pending_lexicon_path: Optional[str] = None  # <data_dir>/pending-lexicon.jsonl
    extractor: dict = field(default_factory=dict)  # ExtractorConfig kwargs
    max_path_len: int = 4
    degree_mode: str = "total"
    scoring_weights: dict = field(default_factory=lambda: {"veracity": 1.0})
    aggregation_policy: str = "MeanScore"
    llm_parallelism: int = 4
    subprocess_limit: int = 2
    page_size: int = 50
    noise_filter: bool = True

    def __post_init__(self):
        if not isinstance(self.port, int) or not 0 < self.port < 65536:
            raise ConfigError(f"port must be in 1..65535, got {self.port!r}")
        if self.llm_parallelism < 1:
            raise ConfigError("llm_parallelism must be at least 1")
        if self.subprocess_limit < 1:
            raise ConfigError("subprocess_limit must be at least 1")
        if self.page_size < 1:
            raise ConfigError("page_size must be at least 1")
        # fail fast on settings that would only explode mid-request
        self.path_check_config()
        self.scoring_config()
        self.policy()

    # -- derived objects -----------------------------------------------------

    def lexicon(self) -> Lexicon:
        if self.lexicon_path:
            return Lexicon.load(self.lexicon_path)
        return Lexicon.default()

    def pending_lexicon_file(self) -> Path:
        if self.pending_lexicon_path:
            return Path(self.pending_lexicon_path)
        return Path(self.data_dir) / "pending-lexicon.jsonl"

    def path_check_config(self) -> PathCheckConfig:
        try:
            mode = DegreeMode(self.degree_mode)
        except ValueError:
            raise ConfigError(
                f"degree_mode must be one of total/in/out, got {self.degree_mode!r}"
            ) from None
        if not isinstance(self.max_path_len, int) or self.max_path_len < 1:
            raise ConfigError("max_path_len must be a positive integer")
        return PathCheckConfig(max_path_len=self.max_path_len, degree_mode=mode)

    def scoring_config(self) -> ScoringConfig:
        try:
            return ScoringConfig(self.scoring_weights)
        except Exception as exc:
            raise ConfigError(f"scoring_weights: {exc}") from exc

    def policy(self) -> AggregationPolicy:
        try:
            return AggregationPolicy(self.aggregation_policy)
        except ValueError:
            raise ConfigError(
                "aggregation_policy must be MeanScore or ExactOnlyMean, got "
                f"{self.aggregation_policy!r}"
            ) from None


def load_config(path: Optional[Union[str, Path]] = None, env=os.environ) -> AppConfig:
    """Build an AppConfig from an optional JSON file plus env overrides."""
    data: dict = {}
    if path is not None:
        try:
            raw = Path(path).read_text("utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        try:
            data = json.loads(raw)
        except ValueError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = set(data) - _KNOWN_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    if "FACTGRAPH_HOST" in env:
        data["host"] = env["FACTGRAPH_HOST"]
    if "FACTGRAPH_PORT" in env:
        try:
            data["port"] = int(env["FACTGRAPH_PORT"])
        except ValueError:
            raise ConfigError(
                f"FACTGRAPH_PORT must be an integer, got {env['FACTGRAPH_PORT']!r}"
            ) from None
    if "FACTGRAPH_DATA_DIR" in env:
        data["data_dir"] = env["FACTGRAPH_DATA_DIR"]
    if "FACTGRAPH_API_TOKEN" in env:
        data["api_token"] = env["FACTGRAPH_API_TOKEN"]
    extractor = dict(data.get("extractor") or {})
    if "FACTGRAPH_LLM_ENDPOINT" in env:
        extractor["endpoint_url"] = env["FACTGRAPH_LLM_ENDPOINT"]
    if "FACTGRAPH_LLM_API_KEY" in env:
        extractor["api_key"] = env["FACTGRAPH_LLM_API_KEY"]
    if extractor:
        data["extractor"] = extractor

    try:
        return AppConfig(**data)
    except TypeError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
