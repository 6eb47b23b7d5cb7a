from .annotation import AnnotationError, AnnotationSession, SessionManager, SessionNotFound
from .app import create_app
from .config import ConfigError, EngineSpec, ServiceConfig, load_config
from .service import BadQueryError, SearchOutcome, SearchResult, SearchService
from .store import JudgmentStore

__all__ = [
    "AnnotationError",
    "AnnotationSession",
    "BadQueryError",
    "ConfigError",
    "EngineSpec",
    "JudgmentStore",
    "SearchOutcome",
    "SearchResult",
    "SearchService",
    "ServiceConfig",
    "SessionManager",
    "SessionNotFound",
    "create_app",
    "load_config",
]
