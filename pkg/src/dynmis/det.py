"""Deterministic epoch algorithm with good-MIS reconstruction.

Each epoch starts from ``m0`` edges, freezes the high-degree set, builds an
MIS in which every high vertex has at least ``ceil(m0^(1/3)) + 1`` members
among its neighbours, and then serves ``ceil(m0^(1/3))`` updates with plain
counter maintenance. Since each update can take at most one member away
from any vertex, high vertices stay dominated and are never the ones
evicted, which caps the cost of every eviction.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Any, Optional

from .core import (
    InternalInvariantError,
    MisState,
    WorkMeter,
    add_to_mis,
    cascade_add,
    edge_deleted,
    edge_inserted,
    greedy_mis,
    remove_from_mis,
    smaller_degree,
)
from .engine import Maintainer, RunResult, replay
from .graph import DynamicGraph
from .stream import Op, UpdateEvent, UpdateStream


class StuckConstruction(RuntimeError):
    """No pool vertex touches a still-unsatisfied high vertex."""


def log2_clamped(m: int) -> float:
    return max(1.0, math.log2(m)) if m > 0 else 1.0


def icbrt_ceil(m: int) -> int:
    """Exact ``ceil(m ** (1/3))`` for non-negative integers."""
    if m <= 0:
        return 0
    r = int(round(m ** (1.0 / 3.0)))
    while r ** 3 < m:
        r += 1
    while r > 0 and (r - 1) ** 3 >= m:
        r -= 1
    return r


def epoch_len(m: int) -> int:
    return icbrt_ceil(max(1, m))


@dataclass(frozen=True)
class DetConfig:
    c_high: float = 10.0

    def __post_init__(self) -> None:
        if not self.c_high > 0:
            raise ValueError(f"c_high must be positive, got {self.c_high}")


def high_threshold(m: int, cfg: DetConfig = DetConfig()) -> float:
    return cfg.c_high * m ** (2.0 / 3.0) * math.sqrt(log2_clamped(m))


@dataclass
class DetEpoch:
    m0: int
    K: int
    v_high: frozenset
    threshold: float
    mis_target: int
    length: int = 0

    @classmethod
    def start(cls, g: DynamicGraph, cfg: DetConfig) -> "DetEpoch":
        m0 = max(1, g.edge_count)
        k = epoch_len(m0)
        thr = high_threshold(m0, cfg)
        high = frozenset(v for v in range(g.n) if len(g.adj[v]) >= thr)
        return cls(m0=m0, K=k, v_high=high, threshold=thr, mis_target=k + 1, length=k)


class RatioSelector:
    """2-approximate arg-min of ``deg(u) / hits(u)`` over the live pool.

    Vertices are bucketed by ``floor(log2(hits))``; inside a bucket a heap
    keyed on degree gives the bucket minimum. Every value in bucket ``c``
    has a denominator in ``[2^c, 2^(c+1))``, so the best bucket head is
    within a factor two of the true minimum.
    """

    def __init__(self, deg: list[int], hits: list[int], alive: list[bool]) -> None:
        self.deg = deg
        self.hits = hits
        self.alive = alive
        self.cls = [h.bit_length() - 1 for h in hits]
        self.buckets: list[list[tuple[int, int]]] = []
        for u, c in enumerate(self.cls):
            if c >= 0 and alive[u]:
                self._push(u, c)
        for b in self.buckets:
            heapq.heapify(b)

    def _push(self, u: int, c: int) -> None:
        while len(self.buckets) <= c:
            self.buckets.append([])
        self.buckets[c].append((self.deg[u], u))

    def set_hits(self, u: int, h: int) -> None:
        self.hits[u] = h
        c = h.bit_length() - 1
        if c != self.cls[u]:
            self.cls[u] = c
            if c >= 0:
                while len(self.buckets) <= c:
                    self.buckets.append([])
                heapq.heappush(self.buckets[c], (self.deg[u], u))

    def query(self) -> Optional[int]:
        best = None
        for c, heap in enumerate(self.buckets):
            while heap and (not self.alive[heap[0][1]] or self.cls[heap[0][1]] != c):
                heapq.heappop(heap)
            if not heap:
                continue
            d, u = heap[0]
            h = self.hits[u]
            if best is None:
                best = (d, h, u)
                continue
            bd, bh, bu = best
            # compare d/h against bd/bh exactly, ties to smaller id
            lhs, rhs = d * bh, bd * h
            if lhs < rhs or (lhs == rhs and u < bu):
                best = (d, h, u)
        return None if best is None else best[2]


@dataclass
class GoodMisBuilder:
    """Greedy good-MIS construction: cheap pool vertices first, until every high vertex is saturated."""

    g: DynamicGraph
    v_high: frozenset
    target: int
    meter: WorkMeter
    check: bool = False
    debug_cost: bool = False
    cost: dict[int, float] = field(default_factory=dict)
    n_count: dict[int, int] = field(default_factory=dict)
    selections: int = 0

    def run(self) -> MisState:
        g, meter = self.g, self.meter
        n = g.n
        adj = g.adj
        s = MisState(n)
        v_h = set(self.v_high)
        alive = [v not in v_h for v in range(n)]
        deg = [len(a) for a in adj]
        hits = [0] * n
        for v in v_h:
            for u in adj[v]:
                meter.adjacency_visits += 1
                if alive[u]:
                    hits[u] += 1
        self.n_count = {v: 0 for v in v_h}
        if self.debug_cost:
            self.cost = {v: 0.0 for v in v_h}
        selector = RatioSelector(deg, hits, alive)

        while v_h:
            u = selector.query()
            if u is None:
                raise StuckConstruction(
                    f"{len(v_h)} high vertices unsatisfied and no pool vertex touches them"
                )
            if self.check:
                self._check_ratio(u, deg, hits, alive)
            h = hits[u]
            add_to_mis(g, s, u, meter)
            self.selections += 1
            for v in adj[u]:
                meter.adjacency_visits += 1
                if v in v_h:
                    if self.debug_cost:
                        self.cost[v] += deg[u] / h
                    self.n_count[v] += 1
                    meter.counter_mutations += 1
                    if self.n_count[v] == self.target:
                        v_h.discard(v)
                        for w in adj[v]:
                            meter.adjacency_visits += 1
                            if alive[w]:
                                selector.set_hits(w, hits[w] - 1)
                                meter.counter_mutations += 1
            alive[u] = False
            for w in adj[u]:
                alive[w] = False

        for u in range(n):
            if alive[u] and s.counter[u] == 0:
                add_to_mis(g, s, u, meter)
        return s

    @staticmethod
    def _check_ratio(u: int, deg: list[int], hits: list[int], alive: list[bool]) -> None:
        best = None
        for w in range(len(deg)):
            if alive[w] and hits[w] > 0:
                if best is None or deg[w] * best[1] < best[0] * hits[w]:
                    best = (deg[w], hits[w])
        # deg[u]/hits[u] <= 2 * best
        if best is None or deg[u] * best[1] > 2 * best[0] * hits[u]:
            raise InternalInvariantError(
                f"selector picked {u} with ratio {deg[u]}/{hits[u]}, exact minimum {best}"
            )


def build_good_mis(
    g: DynamicGraph, epoch: DetEpoch, meter: WorkMeter, check: bool = False
) -> MisState:
    builder = GoodMisBuilder(g, epoch.v_high, epoch.mis_target, meter, check=check)
    s = builder.run()
    if check:
        for v in epoch.v_high:
            if s.counter[v] < epoch.mis_target:
                raise InternalInvariantError(
                    f"high vertex {v} has {s.counter[v]} MIS neighbours, needs {epoch.mis_target}"
                )
    return s


def det_update(
    g: DynamicGraph,
    s: MisState,
    epoch: DetEpoch,
    e: UpdateEvent,
    meter: WorkMeter,
    check: bool = False,
) -> tuple[Optional[int], bool]:
    """Serve one update inside an epoch.

    Returns ``(removed, slack_exhausted)``: the vertex evicted from the MIS
    (if any) and whether some high vertex lost its last MIS neighbour.
    """
    if epoch.K <= 0:
        raise InternalInvariantError("epoch has no updates left")
    u, v = e.u, e.v
    high = epoch.v_high
    removed = None
    exhausted = False
    if e.kind is Op.INSERT:
        g.insert_edge(u, v)
        edge_inserted(s, u, v, meter)
        if s.in_mis[u] and s.in_mis[v]:
            removed = smaller_degree(g, u, v)
            if check:
                d = len(g.adj[removed])
                limit = epoch.threshold + 2 * epoch.length
                if d >= limit:
                    raise InternalInvariantError(
                        f"evicted vertex {removed} has degree {d} >= {limit:.2f}"
                    )
            remove_from_mis(g, s, removed, meter)
            nb = g.adj[removed]
            if high:
                exhausted = any(s.counter[w] == 0 for w in nb if w in high)
            cascade_add(g, s, nb, meter)
    else:
        g.delete_edge(u, v)
        edge_deleted(s, u, v, meter)
        if s.in_mis[u] != s.in_mis[v]:
            other = v if s.in_mis[u] else u
            if s.counter[other] == 0:
                if other in high:
                    exhausted = True
                cascade_add(g, s, (other,), meter)
    epoch.K -= 1
    return removed, exhausted


class DetMIS(Maintainer):
    name = "det"

    def __init__(self, n: int, cfg: DetConfig = DetConfig(), check: bool = False) -> None:
        self.cfg = cfg
        self.epoch: Optional[DetEpoch] = None
        self._slack_lost = False
        super().__init__(n, check=check)

    def config(self) -> dict[str, Any]:
        return {"c_high": self.cfg.c_high}

    def reconstruct(self) -> dict[str, Any]:
        g = self.graph
        epoch = DetEpoch.start(g, self.cfg)
        fallback = None
        try:
            self.state = build_good_mis(g, epoch, self.meter, check=self.check)
        except StuckConstruction:
            self.state = greedy_mis(g, range(g.n), self.meter)
            epoch = DetEpoch(epoch.m0, 1, frozenset(), epoch.threshold, epoch.mis_target, 1)
            fallback = "stuck_construction"
        self.epoch = epoch
        self._slack_lost = False
        return {
            "m0": epoch.m0,
            "length": epoch.length,
            "high_count": len(epoch.v_high),
            "fallback": fallback,
        }

    def epoch_over(self) -> bool:
        return self.epoch.K <= 0 or self._slack_lost

    def apply(self, e: UpdateEvent) -> None:
        leaves = self.meter.leaves
        removed, exhausted = det_update(
            self.graph, self.state, self.epoch, e, self.meter, check=self.check
        )
        if removed is not None:
            self.stats["evictions"] += 1
        if self.check:
            if self.meter.leaves - leaves > 1:
                raise InternalInvariantError("more than one vertex left the MIS in one update")
            for w in self.epoch.v_high:
                if self.state.counter[w] < 1:
                    raise InternalInvariantError(f"high vertex {w} lost all MIS neighbours")
        if exhausted:
            self.fallbacks["slack_exhausted"] += 1
            self._slack_lost = True


def run_det(
    stream: UpdateStream,
    cfg: DetConfig = DetConfig(),
    verify: bool = False,
    check: bool = False,
    on_update=None,
) -> RunResult:
    return replay(DetMIS(stream.n, cfg, check=check), stream, verify=verify, on_update=on_update)
