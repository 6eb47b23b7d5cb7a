"""In-process HTTP stubs for the wire protocols this package speaks.

One tiny threaded server covers three roles: an external source
(POST /retrieve), a model scoring server (POST /score), and a search target
for load tests (GET /search). Latency injection and raw-response overrides
make timeout and malformed-response paths testable without real providers.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Sequence
from urllib.parse import parse_qs, urlsplit

__all__ = ["StubServer", "length_score"]


class _QuietServer(ThreadingHTTPServer):
    daemon_threads = True

    def handle_error(self, request, client_address):
        # Clients deliberately hang up in timeout tests; don't spam stderr.
        pass


def length_score(query: str, text: str) -> float:
    """Default stub scoring rule: the text's length."""
    return float(len(text))


class StubServer:
    """Configurable stub speaking /retrieve, /score and /search.

    ``results`` feeds /retrieve (list of dicts with id/title/url/snippet).
    ``score_fn(query, text)`` feeds /score one score per text;
    ``score_override(query, texts)`` replaces the whole scores array when a
    broken server is needed. ``delay_s`` sleeps before every response and
    ``raw_body`` short-circuits /retrieve with arbitrary bytes.
    """

    def __init__(
        self,
        results: Sequence[dict] | None = None,
        score_fn: Callable[[str, str], float] = length_score,
        score_override: Callable[[str, list[str]], list] | None = None,
        delay_s: float = 0.0,
        raw_body: bytes | None = None,
    ):
        self.results = list(results or [])
        self.score_fn = score_fn
        self.score_override = score_override
        self.delay_s = delay_s
        self.raw_body = raw_body
        self.request_log: list[tuple[str, dict]] = []
        self._log_lock = threading.Lock()

        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # keep test output clean
                pass

            def _send_json(self, payload: dict, status: int = 200) -> None:
                body = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json; charset=utf-8")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def _read_json(self) -> dict:
                length = int(self.headers.get("Content-Length", "0"))
                return json.loads(self.rfile.read(length).decode("utf-8"))

            def do_POST(self):
                if stub.delay_s:
                    time.sleep(stub.delay_s)
                path = urlsplit(self.path).path
                body = self._read_json()
                with stub._log_lock:
                    stub.request_log.append((path, body))
                if path == "/retrieve":
                    if stub.raw_body is not None:
                        self.send_response(200)
                        self.send_header("Content-Length", str(len(stub.raw_body)))
                        self.end_headers()
                        self.wfile.write(stub.raw_body)
                        return
                    k = int(body.get("k", 10))
                    self._send_json({"results": stub.results[:k]})
                elif path == "/score":
                    query = body["query"]
                    texts = body["texts"]
                    if stub.score_override is not None:
                        scores = stub.score_override(query, texts)
                    else:
                        scores = [stub.score_fn(query, t) for t in texts]
                    self._send_json({"scores": scores})
                else:
                    self._send_json({"error": "not found"}, status=404)

            def do_GET(self):
                if stub.delay_s:
                    time.sleep(stub.delay_s)
                parts = urlsplit(self.path)
                with stub._log_lock:
                    stub.request_log.append((parts.path, dict(parse_qs(parts.query))))
                if parts.path == "/search":
                    q = parse_qs(parts.query).get("q", [""])[0]
                    self._send_json({"query": q, "results": []})
                elif parts.path == "/healthz":
                    self._send_json({"status": "ok"})
                else:
                    self._send_json({"error": "not found"}, status=404)

        self._server = _QuietServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "StubServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "StubServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
