"""Run configuration shared by the CLI and the HTTP service."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .cache import AudioCache
from .engines import Engine, HttpEngine, MockEngine
from .langid import Lexicons, load_lexicons
from .planner import UserPrefs, VoiceCatalog
from .ssml import SsmlDialect, get_dialect

ENGINES = ("mock", "http")


@dataclass(frozen=True)
class RunConfig:
    prefs: UserPrefs = field(default_factory=UserPrefs)
    catalog_path: str | None = None
    lexicon_paths: tuple[str, ...] = ()
    dialect_name: str = "generic"
    engine_name: str = "mock"
    http_endpoint: str | None = None
    http_headers: Mapping[str, str] = field(default_factory=dict)
    out_path: str | None = None
    cache_dir: str | None = None
    single_request: bool = False

    def __post_init__(self) -> None:
        if self.engine_name not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, got {self.engine_name!r}")
        if self.engine_name == "http" and not self.http_endpoint:
            raise ValueError("the http engine needs http_endpoint")
        get_dialect(self.dialect_name)
        for p in (self.catalog_path, *self.lexicon_paths):
            if p is not None and not Path(p).is_file():
                raise FileNotFoundError(f"configured file does not exist: {p}")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> RunConfig:
        d = dict(d)
        prefs = d.pop("prefs", {})
        d["lexicon_paths"] = tuple(d.get("lexicon_paths", ()))
        return cls(prefs=UserPrefs.from_dict(prefs) if isinstance(prefs, Mapping) else prefs, **d)

    @classmethod
    def from_json(cls, path: str | Path) -> RunConfig:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def with_overrides(self, **changes: Any) -> RunConfig:
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


@dataclass
class Runtime:
    """Loaded, shareable objects for one configuration."""

    config: RunConfig
    catalog: VoiceCatalog
    lexicons: Lexicons
    dialect: SsmlDialect
    engine: Engine
    cache: AudioCache

    @classmethod
    def load(cls, config: RunConfig) -> Runtime:
        catalog = VoiceCatalog.from_json(config.catalog_path) if config.catalog_path else VoiceCatalog.default()
        engine: Engine
        if config.engine_name == "http":
            engine = HttpEngine(config.http_endpoint or "", config.http_headers)
        else:
            engine = MockEngine()
        return cls(
            config=config,
            catalog=catalog,
            lexicons=load_lexicons(config.lexicon_paths),
            dialect=get_dialect(config.dialect_name),
            engine=engine,
            cache=AudioCache(config.cache_dir),
        )
