"""Epoch-driven replay machinery shared by every maintenance algorithm.

A maintainer owns its graph, MIS state and work meter. Rebuilds are logged
as epoch rows carrying their own work; each update row carries only the
work spent serving that update, so the two kinds of rows partition the
total.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .core import (
    InternalInvariantError,
    MisState,
    WorkMeter,
    assert_valid,
    greedy_mis,
    naive_update,
    verify_mis,
)
from .graph import DynamicGraph
from .stream import UpdateEvent, UpdateStream


@dataclass
class EpochRecord:
    index: int
    start_event: int
    reason: str
    m0: int
    length: Optional[int]
    work: WorkMeter
    high_count: int = 0
    fallback: Optional[str] = None


@dataclass
class UpdateRecord:
    index: int
    event: UpdateEvent
    epoch: int
    work: WorkMeter
    phi: int


class Maintainer:
    """Base class: subclasses implement ``reconstruct`` and ``apply``.

    ``check=True`` turns on the algorithm's internal invariant assertions;
    they never change the algorithm's choices, only add scans.
    """

    name = "base"

    def __init__(self, n: int, check: bool = False) -> None:
        self.graph = DynamicGraph(n)
        self.state = MisState(n)
        self.meter = WorkMeter()
        self.check = check
        self.epochs: list[EpochRecord] = []
        self.fallbacks: Counter[str] = Counter()
        self.stats: Counter[str] = Counter()
        self.events_seen = 0
        self.rebuild("initial")

    # subclass hooks -------------------------------------------------------

    def reconstruct(self) -> dict[str, Any]:
        """Rebuild ``self.state`` from the current graph.

        Returns a dict with keys ``m0``, ``length`` and optionally
        ``high_count`` and ``fallback``.
        """
        raise NotImplementedError

    def apply(self, e: UpdateEvent) -> None:
        raise NotImplementedError

    def epoch_over(self) -> bool:
        return False

    def config(self) -> dict[str, Any]:
        return {}

    # driver ----------------------------------------------------------------

    def rebuild(self, reason: str) -> EpochRecord:
        before = self.meter.snapshot()
        info = self.reconstruct()
        rec = EpochRecord(
            index=len(self.epochs),
            start_event=self.events_seen,
            reason=reason,
            m0=info["m0"],
            length=info.get("length"),
            work=self.meter - before,
            high_count=info.get("high_count", 0),
            fallback=info.get("fallback"),
        )
        if rec.fallback:
            self.fallbacks[rec.fallback] += 1
        self.epochs.append(rec)
        if self.check:
            assert_valid(self.graph, self.state, f"after rebuild {rec.index}")
        return rec

    def update(self, e: UpdateEvent) -> None:
        if self.epoch_over():
            self.rebuild("scheduled")
        self.apply(e)
        self.events_seen += 1


class NaiveMIS(Maintainer):
    """The O(max degree) baseline: counters plus local repair, never rebuilds."""

    name = "naive"

    def reconstruct(self) -> dict[str, Any]:
        self.state = greedy_mis(self.graph, range(self.graph.n), self.meter)
        return {"m0": self.graph.edge_count, "length": None}

    def apply(self, e: UpdateEvent) -> None:
        naive_update(self.graph, self.state, e, self.meter)


@dataclass
class VerifyFailure:
    index: int
    event: UpdateEvent
    verdict: Any


@dataclass
class RunResult:
    algorithm: str
    config: dict[str, Any]
    updates: list[UpdateRecord]
    epochs: list[EpochRecord]
    state: MisState
    graph: DynamicGraph
    fallbacks: Counter
    stats: Counter
    verify_failure: Optional[VerifyFailure] = None

    @property
    def ok(self) -> bool:
        return self.verify_failure is None

    def summary(self) -> dict[str, Any]:
        upd = sum((r.work for r in self.updates), WorkMeter())
        reb = sum((r.work for r in self.epochs), WorkMeter())
        total = upd + reb
        count = len(self.updates)
        return {
            "algorithm": self.algorithm,
            "config": self.config,
            "updates": count,
            "epochs": len(self.epochs),
            "total_work": total.work,
            "update_work": upd.work,
            "rebuild_work": reb.work,
            "adjacency_visits": total.adjacency_visits,
            "counter_mutations": total.counter_mutations,
            "mis_flips": total.mis_flips,
            "amortized_work": total.work / count if count else 0.0,
            "max_update_work": max((r.work.work for r in self.updates), default=0),
            "fallbacks": dict(sorted(self.fallbacks.items())),
            "stats": dict(sorted(self.stats.items())),
            "final_mis_size": len(self.state.members),
            "verified": self.verify_failure is None,
        }


def replay(
    alg: Maintainer,
    stream: UpdateStream,
    verify: bool = False,
    on_update: Optional[Callable[[Maintainer, int], None]] = None,
) -> RunResult:
    """Feed ``stream`` through ``alg``; stop at the first oracle failure when verifying."""
    if stream.n != alg.graph.n:
        raise ValueError(f"stream has n={stream.n}, maintainer has n={alg.graph.n}")
    records: list[UpdateRecord] = []
    failure = None
    if verify:
        verdict = verify_mis(alg.graph, alg.state)
        if not verdict.ok:
            raise InternalInvariantError(f"initial construction invalid: {verdict}")
    for i, e in enumerate(stream.events):
        before = alg.meter.snapshot()
        n_epochs = len(alg.epochs)
        alg.update(e)
        delta = alg.meter - before
        for rec in alg.epochs[n_epochs:]:
            delta = delta - rec.work
        records.append(UpdateRecord(i, e, len(alg.epochs) - 1, delta, alg.state.phi))
        if on_update is not None:
            on_update(alg, i)
        if verify:
            verdict = verify_mis(alg.graph, alg.state)
            if not verdict.ok:
                failure = VerifyFailure(i, e, verdict)
                break
    return RunResult(
        algorithm=alg.name,
        config=alg.config(),
        updates=records,
        epochs=list(alg.epochs),
        state=alg.state,
        graph=alg.graph,
        fallbacks=Counter(alg.fallbacks),
        stats=Counter(alg.stats),
        verify_failure=failure,
    )


def run_naive(stream: UpdateStream, verify: bool = False, check: bool = False) -> RunResult:
    return replay(NaiveMIS(stream.n, check=check), stream, verify=verify)
