"""Closed-loop load testing with simulated users.

Each simulated user repeatedly picks a seeded uniform-random query from the
query set, sends it to the target, waits for the response, then thinks for a
seeded uniform-random interval before the next query. Latency percentiles
use the nearest-rank rule. With a deterministic-latency target, a seeded run
reproduces the same query sequences and request counts.
"""

from __future__ import annotations

import random
import threading
import time
from dataclasses import dataclass, field

import httpx

__all__ = ["LoadTestConfig", "LoadTestReport", "LoadTestError", "run_loadtest", "percentile_nearest_rank"]


class LoadTestError(RuntimeError):
    pass


@dataclass(frozen=True)
class LoadTestConfig:
    """Knobs for one load-test run. Think time is uniform [min, max] seconds,
    sampled per request; ``target`` is the URL queried as GET target?q=..."""

    target: str
    users: int
    duration_s: float
    query_set: tuple[str, ...]
    think_min_s: float = 1.0
    think_max_s: float = 15.0
    seed: int = 0
    request_timeout_s: float = 30.0

    def __post_init__(self) -> None:
        if self.users < 0:
            raise ValueError("users must be >= 0")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be positive")
        if not 0 <= self.think_min_s <= self.think_max_s:
            raise ValueError("need 0 <= think_min_s <= think_max_s")
        if self.users > 0 and not self.query_set:
            raise ValueError("query_set must be non-empty when users > 0")


@dataclass(frozen=True)
class LoadTestReport:
    qps: float
    latency_mean_s: float | None
    latency_min_s: float | None
    latency_max_s: float | None
    latency_p90_s: float | None
    request_count: int
    error_count: int
    duration_s: float
    # Per-user query index sequences; lets seeded reruns be compared exactly.
    query_sequences: tuple[tuple[int, ...], ...] = ()
    latencies_s: tuple[float, ...] = ()

    def summary(self) -> str:
        if self.request_count == 0:
            return f"QPS 0.0 over {self.duration_s:.0f}s (no requests)"
        return (
            f"QPS {self.qps:.3g}, 90% {self.latency_p90_s:.3f}, mean {self.latency_mean_s:.3f}, "
            f"min {self.latency_min_s:.3f}, max {self.latency_max_s:.3f} "
            f"({self.request_count} requests, {self.error_count} errors)"
        )


def percentile_nearest_rank(values: list[float], percent: int) -> float:
    """Nearest-rank percentile: the ceil(percent/100 * n)-th smallest value.

    ``percent`` is an integer (e.g. 90) so the rank computes exactly in
    integer arithmetic — float rounding must not shift the rank.
    """
    if not values:
        raise ValueError("no values")
    if not 0 < percent <= 100:
        raise ValueError("percent must be in (0, 100]")
    ordered = sorted(values)
    rank = -(-percent * len(ordered) // 100)  # ceil
    return ordered[rank - 1]


@dataclass
class _UserResult:
    latencies: list[float] = field(default_factory=list)
    query_indices: list[int] = field(default_factory=list)
    errors: int = 0


def _run_user(
    cfg: LoadTestConfig, user_index: int, t0: float, result: _UserResult
) -> None:
    rng = random.Random(cfg.seed * 1_000_003 + user_index)
    deadline = t0 + cfg.duration_s
    with httpx.Client(timeout=cfg.request_timeout_s) as client:
        while time.perf_counter() < deadline:
            q_index = rng.randrange(len(cfg.query_set))
            result.query_indices.append(q_index)
            started = time.perf_counter()
            try:
                response = client.get(cfg.target, params={"q": cfg.query_set[q_index]})
                response.raise_for_status()
            except httpx.HTTPError:
                result.errors += 1
            else:
                result.latencies.append(time.perf_counter() - started)
            think = rng.uniform(cfg.think_min_s, cfg.think_max_s)
            if think > 0:
                time.sleep(think)


def run_loadtest(cfg: LoadTestConfig) -> LoadTestReport:
    """Run the configured users against the target and aggregate the stats.

    The target must be reachable up front (any HTTP response counts);
    individual request failures are counted, not fatal. Requests in flight
    at the deadline are awaited and included.
    """
    if cfg.users > 0:
        try:
            httpx.get(cfg.target, params={"q": cfg.query_set[0]}, timeout=cfg.request_timeout_s)
        except httpx.HTTPError as exc:
            raise LoadTestError(f"target {cfg.target} unreachable: {exc}") from exc

    results = [_UserResult() for _ in range(cfg.users)]
    t0 = time.perf_counter()
    threads = [
        threading.Thread(target=_run_user, args=(cfg, i, t0, results[i]), daemon=True)
        for i in range(cfg.users)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    latencies = [lat for r in results for lat in r.latencies]
    errors = sum(r.errors for r in results)
    count = len(latencies)
    if count:
        report_stats = (
            sum(latencies) / count,
            min(latencies),
            max(latencies),
            percentile_nearest_rank(latencies, 90),
        )
    else:
        report_stats = (None, None, None, None)
    return LoadTestReport(
        qps=count / cfg.duration_s,
        latency_mean_s=report_stats[0],
        latency_min_s=report_stats[1],
        latency_max_s=report_stats[2],
        latency_p90_s=report_stats[3],
        request_count=count,
        error_count=errors,
        duration_s=cfg.duration_s,
        query_sequences=tuple(tuple(r.query_indices) for r in results),
        latencies_s=tuple(latencies),
    )
