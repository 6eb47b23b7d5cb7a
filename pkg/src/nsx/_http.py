"""Minimal JSON-over-HTTP client for the source and scoring protocols.

Plain urllib keeps per-call overhead in the low milliseconds, which matters
because stage-1 fan-out latency is part of the service contract.
"""

from __future__ import annotations

import json
import socket
import urllib.error
import urllib.request

__all__ = ["HttpTransportError", "HttpTimeout", "post_json"]


class HttpTransportError(RuntimeError):
    pass


class HttpTimeout(HttpTransportError):
    pass


def post_json(url: str, payload: dict, timeout: float) -> object:
    """POST a JSON body and decode the JSON response.

    Raises HttpTimeout on timeouts, HttpTransportError on any other
    transport or HTTP-status failure, and ValueError on undecodable bodies.
    """
    request = urllib.request.Request(
        url,
        data=json.dumps(payload).encode("utf-8"),
        headers={"Content-Type": "application/json; charset=utf-8"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            body = response.read()
    except urllib.error.HTTPError as exc:
        raise HttpTransportError(f"HTTP {exc.code} from {url}") from exc
    except urllib.error.URLError as exc:
        if isinstance(exc.reason, (socket.timeout, TimeoutError)):
            raise HttpTimeout(f"timed out after {timeout}s: {url}") from exc
        raise HttpTransportError(f"{exc.reason}") from exc
    except (socket.timeout, TimeoutError) as exc:
        raise HttpTimeout(f"timed out after {timeout}s: {url}") from exc
    return json.loads(body.decode("utf-8"))
