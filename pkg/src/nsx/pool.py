"""Eviction-tolerant worker pool for scoring backends, plus a fleet simulator.

The live pool routes shard requests round-robin over ready workers and
re-dispatches to a different worker when one is evicted mid-flight; with a
deterministic scorer the result is identical to a failure-free run. The
simulator is a seeded discrete-event model of a preemptible fleet: ready
workers draw exponential eviction times, evicted workers are immediately
replaced by starting workers whose startup delay is uniform over a
configurable range (replacement machines can take many minutes to begin
serving). It reports the fleet's ready-capacity timeline.
"""

from __future__ import annotations

import heapq
import itertools
import math
import random
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from .reranking import Scorer

__all__ = [
    "WorkerStatus",
    "Worker",
    "ShardRequest",
    "WorkerEvicted",
    "PoolUnavailableError",
    "WorkerPool",
    "pool_submit",
    "FleetSimConfig",
    "FleetSimReport",
    "simulate_fleet",
]


class WorkerStatus(Enum):
    STARTING = "starting"
    READY = "ready"
    EVICTED = "evicted"


@dataclass(frozen=True)
class ShardRequest:
    """One scoring shard. ``scorer`` overrides the worker's own handle when set
    (that is how batch-bound scorers travel with their shard)."""

    query: str
    texts: tuple[str, ...]
    scorer: "Scorer | None" = None
    shard_index: int = 0


class WorkerEvicted(RuntimeError):
    """The executing worker was taken away mid-flight."""


class PoolUnavailableError(RuntimeError):
    """No ready worker and the retry budget is spent.

    ``retry_after_s`` hints how long until a starting worker becomes ready,
    or None when no replacement is underway.
    """

    def __init__(self, message: str, retry_after_s: float | None = None):
        super().__init__(message)
        self.retry_after_s = retry_after_s


class Worker:
    """A scoring backend slot: an endpoint-backed or in-process scorer handle."""

    def __init__(
        self,
        worker_id: str,
        scorer: "Scorer | None" = None,
        status: WorkerStatus = WorkerStatus.READY,
        ready_at: float | None = None,
    ):
        self.id = worker_id
        self.scorer = scorer
        self.status = status
        self.ready_at = ready_at
        self.served = 0

    def execute(self, request: ShardRequest) -> list[float]:
        scorer = request.scorer if request.scorer is not None else self.scorer
        if scorer is None:
            raise ValueError(f"worker {self.id} has no scorer and the request carries none")
        return scorer.score_batch(request.query, list(request.texts))

    def __repr__(self) -> str:
        return f"Worker({self.id!r}, status={self.status.value})"


class WorkerPool:
    """Round-robin pool of workers with eviction retry.

    Thread-safe: routing decisions and status transitions happen under one
    lock; scoring itself runs outside it so submitters proceed concurrently.
    """

    def __init__(
        self,
        workers: Sequence[Worker],
        retry_budget: int = 2,
        clock=time.monotonic,
    ):
        if not workers:
            raise ValueError("pool needs at least one worker")
        if retry_budget < 1:
            raise ValueError("retry_budget must be >= 1")
        self._workers: list[Worker] = list(workers)
        self._lock = threading.Lock()
        self._cursor = 0
        self._replacement_seq = itertools.count(1)
        self.retry_budget = retry_budget
        self.clock = clock

    @property
    def workers(self) -> list[Worker]:
        return list(self._workers)

    def ready_count(self) -> int:
        with self._lock:
            self._promote_started()
            return sum(1 for w in self._workers if w.status is WorkerStatus.READY)

    def add_worker(self, worker: Worker) -> None:
        with self._lock:
            self._workers.append(worker)

    def evict(self, worker_id: str, replacement_delay_s: float | None = None) -> None:
        """Administratively evict a worker, optionally scheduling a replacement."""
        with self._lock:
            for worker in self._workers:
                if worker.id == worker_id and worker.status is not WorkerStatus.EVICTED:
                    self._mark_evicted(worker, replacement_delay_s)
                    return
        raise KeyError(f"no active worker {worker_id!r}")

    def _promote_started(self) -> None:
        now = self.clock()
        for worker in self._workers:
            if worker.status is WorkerStatus.STARTING and worker.ready_at is not None:
                if now >= worker.ready_at:
                    worker.status = WorkerStatus.READY
                    worker.ready_at = None

    def _mark_evicted(self, worker: Worker, replacement_delay_s: float | None) -> None:
        worker.status = WorkerStatus.EVICTED
        if replacement_delay_s is not None:
            self._workers.append(
                Worker(
                    worker_id=f"{worker.id}-r{next(self._replacement_seq)}",
                    scorer=worker.scorer,
                    status=WorkerStatus.STARTING,
                    ready_at=self.clock() + replacement_delay_s,
                )
            )

    def _next_ready(self, exclude: set[str]) -> Worker | None:
        self._promote_started()
        n = len(self._workers)
        for offset in range(n):
            worker = self._workers[(self._cursor + offset) % n]
            if worker.status is WorkerStatus.READY and worker.id not in exclude:
                self._cursor = (self._cursor + offset + 1) % n
                return worker
        return None

    def _wait_hint(self) -> float | None:
        now = self.clock()
        pending = [
            w.ready_at - now
            for w in self._workers
            if w.status is WorkerStatus.STARTING and w.ready_at is not None
        ]
        return max(0.0, min(pending)) if pending else None

    def submit(self, request: ShardRequest) -> list[float]:
        """Route a shard to a ready worker; retry on a different one if evicted.

        Raises PoolUnavailableError (with a wait hint) once no ready worker
        remains or the retry budget is exhausted.
        """
        tried: set[str] = set()
        for attempt in range(self.retry_budget):
            with self._lock:
                worker = self._next_ready(tried)
                if worker is None:
                    raise PoolUnavailableError(
                        f"no ready worker for shard {request.shard_index} "
                        f"(tried {sorted(tried) or 'none'})",
                        retry_after_s=self._wait_hint(),
                    )
            try:
                result = worker.execute(request)
            except WorkerEvicted:
                tried.add(worker.id)
                with self._lock:
                    if worker.status is not WorkerStatus.EVICTED:
                        self._mark_evicted(worker, None)
                continue
            with self._lock:
                worker.served += 1
            return result
        raise PoolUnavailableError(
            f"retry budget ({self.retry_budget}) exhausted for shard {request.shard_index}",
            retry_after_s=self._wait_hint(),
        )


def pool_submit(pool: WorkerPool, request: ShardRequest) -> list[float]:
    """Function form of :meth:`WorkerPool.submit`."""
    return pool.submit(request)


@dataclass(frozen=True)
class FleetSimConfig:
    """Parameters for the preemptible-fleet simulation.

    ``eviction_rate_per_hour`` is the per-worker exponential eviction rate;
    startup delays are uniform over [startup_min_s, startup_max_s]. The
    first ``reliable_workers`` workers never draw eviction times, modelling a
    hybrid reliable+preemptible fleet.
    """

    fleet_size: int
    eviction_rate_per_hour: float
    startup_min_s: float = 300.0
    startup_max_s: float = 1200.0
    horizon_s: float = 86_400.0
    seed: int = 0
    reliable_workers: int = 0

    def __post_init__(self) -> None:
        if self.fleet_size < 1:
            raise ValueError("fleet_size must be >= 1")
        if self.eviction_rate_per_hour < 0:
            raise ValueError("eviction_rate_per_hour must be >= 0")
        if not 0 < self.startup_min_s <= self.startup_max_s:
            raise ValueError("need 0 < startup_min_s <= startup_max_s")
        if self.horizon_s <= 0:
            raise ValueError("horizon_s must be positive")
        if not 0 <= self.reliable_workers <= self.fleet_size:
            raise ValueError("reliable_workers must be within the fleet")


@dataclass(frozen=True)
class FleetSimReport:
    """Capacity timeline of one simulated run.

    ``timeline`` is a step function as (time_s, ready_fraction) breakpoints
    covering [0, horizon]; the fraction at a breakpoint holds until the next.
    """

    config: FleetSimConfig
    timeline: tuple[tuple[float, float], ...]
    eviction_count: int
    mean_availability: float

    def fraction_of_time_below(self, threshold: float) -> float:
        """Fraction of the horizon the ready capacity spent strictly below
        ``threshold`` (a fraction of fleet size)."""
        horizon = self.config.horizon_s
        below = 0.0
        for (t0, frac), (t1, _) in zip(self.timeline, self.timeline[1:] + ((horizon, 0.0),)):
            if frac < threshold:
                below += min(t1, horizon) - t0
        return below / horizon

    def to_dict(self) -> dict:
        return {
            "fleet_size": self.config.fleet_size,
            "eviction_rate_per_hour": self.config.eviction_rate_per_hour,
            "startup_min_s": self.config.startup_min_s,
            "startup_max_s": self.config.startup_max_s,
            "horizon_s": self.config.horizon_s,
            "seed": self.config.seed,
            "reliable_workers": self.config.reliable_workers,
            "eviction_count": self.eviction_count,
            "mean_availability": self.mean_availability,
            "fraction_below_80pct": self.fraction_of_time_below(0.8),
            "timeline": [[t, f] for t, f in self.timeline],
        }


_EVICT = 0
_READY = 1


def simulate_fleet(cfg: FleetSimConfig) -> FleetSimReport:
    """Run the seeded discrete-event fleet simulation.

    All workers start ready at t=0. Each ready evictable worker holds a
    pending exponential eviction event; an eviction immediately schedules the
    replacement's ready event after a uniform startup delay. Identical
    (config, seed) produce an identical report.
    """
    rng = random.Random(cfg.seed)
    rate_per_s = cfg.eviction_rate_per_hour / 3600.0
    seq = itertools.count()
    events: list[tuple[float, int, int]] = []  # (time, tiebreak, kind)

    def schedule_eviction(now: float) -> None:
        if rate_per_s > 0:
            heapq.heappush(events, (now + rng.expovariate(rate_per_s), next(seq), _EVICT))

    evictable = cfg.fleet_size - cfg.reliable_workers
    for _ in range(evictable):
        schedule_eviction(0.0)

    ready = cfg.fleet_size
    timeline: list[tuple[float, float]] = [(0.0, 1.0)]
    eviction_count = 0
    weighted_ready = 0.0
    last_t = 0.0

    def advance(to_t: float) -> None:
        nonlocal weighted_ready, last_t
        weighted_ready += ready * (to_t - last_t)
        last_t = to_t

    while events:
        t, _, kind = heapq.heappop(events)
        if t >= cfg.horizon_s:
            break
        advance(t)
        if kind == _EVICT:
            eviction_count += 1
            ready -= 1
            delay = rng.uniform(cfg.startup_min_s, cfg.startup_max_s)
            heapq.heappush(events, (t + delay, next(seq), _READY))
        else:
            ready += 1
            schedule_eviction(t)
        timeline.append((t, ready / cfg.fleet_size))

    advance(cfg.horizon_s)
    return FleetSimReport(
        config=cfg,
        timeline=tuple(timeline),
        eviction_count=eviction_count,
        mean_availability=weighted_ready / (cfg.fleet_size * cfg.horizon_s),
    )
