"""Declarative service configuration, validated at startup."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import urlsplit

import yaml

from ..index import Bm25Params
from ..segmentation import WindowConfig
from ..sources import ExternalSourceConfig

__all__ = ["ConfigError", "EngineSpec", "ServiceConfig", "load_config"]

GRADE_SCALES = {"binary": (0, 1), "graded": (0, 1, 2)}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EngineSpec:
    """A named result-list producer for A/B annotation.

    ``pipeline`` runs the full retrieve→rerank→highlight pipeline;
    ``source_order`` returns one source's results in provider order.
    """

    name: str
    kind: str
    source: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("pipeline", "source_order"):
            raise ConfigError(f"engine {self.name!r}: unknown type {self.kind!r}")
        if self.kind == "source_order" and not self.source:
            raise ConfigError(f"engine {self.name!r}: source_order needs a source name")


@dataclass
class ServiceConfig:
    index_dir: str | None = None
    window: WindowConfig = field(default_factory=WindowConfig)
    bm25: Bm25Params = field(default_factory=Bm25Params)
    local_k: int = 1000
    sources: list[ExternalSourceConfig] = field(default_factory=list)
    scorer: str = "lexical"
    shard_count: int | None = None
    top_n: int = 10
    source_timeout_s: float = 5.0
    scorer_timeout_s: float = 10.0
    judgment_store: str = "judgments.jsonl"
    grade_scale: str = "graded"
    engines: dict[str, EngineSpec] = field(default_factory=dict)
    ui_dir: str | None = None

    def __post_init__(self) -> None:
        if self.index_dir is None and not self.sources:
            raise ConfigError("configure an index_dir, external sources, or both")
        if self.grade_scale not in GRADE_SCALES:
            raise ConfigError(f"grade_scale must be one of {sorted(GRADE_SCALES)}")
        if self.scorer != "lexical":
            if not self.scorer.startswith("remote:"):
                raise ConfigError(f"scorer must be 'lexical' or 'remote:URL', got {self.scorer!r}")
            endpoint = self.scorer.split(":", 1)[1]
            parts = urlsplit(endpoint)
            if parts.scheme not in ("http", "https") or not parts.netloc:
                raise ConfigError(f"invalid remote scorer endpoint {endpoint!r}")
        names = {s.name for s in self.sources}
        if len(names) != len(self.sources):
            raise ConfigError("source names must be unique")
        if "local_index" in names:
            raise ConfigError("'local_index' is reserved for the configured index")
        if not self.engines:
            self.engines = {"pipeline": EngineSpec(name="pipeline", kind="pipeline")}
        for engine in self.engines.values():
            if engine.kind == "source_order":
                known = names | ({"local_index"} if self.index_dir else set())
                if engine.source not in known:
                    raise ConfigError(
                        f"engine {engine.name!r} references unknown source {engine.source!r}"
                    )

    @property
    def grades(self) -> tuple[int, ...]:
        return GRADE_SCALES[self.grade_scale]


def load_config(path: str | Path) -> ServiceConfig:
    """Load and validate a YAML (or JSON) service config file."""
    raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    try:
        window = WindowConfig(**raw.get("window", {}))
        bm25 = Bm25Params(**raw.get("bm25", {}))
        sources = [ExternalSourceConfig(**entry) for entry in raw.get("sources", [])]
        engines = {
            name: EngineSpec(name=name, kind=spec.get("type", "pipeline"), source=spec.get("source"))
            for name, spec in raw.get("engines", {}).items()
        }
        return ServiceConfig(
            index_dir=raw.get("index_dir"),
            window=window,
            bm25=bm25,
            local_k=int(raw.get("local_k", 1000)),
            sources=sources,
            scorer=raw.get("scorer", "lexical"),
            shard_count=raw.get("shard_count"),
            top_n=int(raw.get("top_n", 10)),
            source_timeout_s=float(raw.get("source_timeout_s", 5.0)),
            scorer_timeout_s=float(raw.get("scorer_timeout_s", 10.0)),
            judgment_store=raw.get("judgment_store", "judgments.jsonl"),
            grade_scale=raw.get("grade_scale", "graded"),
            engines=engines,
            ui_dir=raw.get("ui_dir"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
