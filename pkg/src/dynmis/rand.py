"""Randomized algorithm: random-order greedy MIS, rebuilt every ceil(sqrt(m)) updates.

Permutations come from numpy's PCG64 generator seeded through
``SeedSequence([seed, epoch_index])``, so every epoch draws an independent
order while a fixed ``(stream, seed)`` pair always replays identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from .core import (
    InternalInvariantError,
    MisState,
    WorkMeter,
    cascade_add,
    edge_deleted,
    edge_inserted,
    greedy_mis,
    remove_from_mis,
    smaller_degree,
)
from .det import log2_clamped
from .engine import Maintainer, RunResult, replay
from .graph import DynamicGraph
from .stream import Op, UpdateEvent, UpdateStream

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RandConfig:
    c_high: float = 200.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.c_high > 0:
            raise ValueError(f"c_high must be positive, got {self.c_high}")


@dataclass(frozen=True)
class Permutation:
    """``order[i]`` is the vertex at position ``i``; ``position[v]`` inverts it."""

    order: tuple[int, ...]

    @property
    def position(self) -> list[int]:
        pos = [0] * len(self.order)
        for i, v in enumerate(self.order):
            pos[v] = i
        return pos

    def __len__(self) -> int:
        return len(self.order)


def _rng(seed: int, stream_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & _MASK64, stream_id & _MASK64]))


def random_permutation(seed: int, epoch_index: int, n: int) -> Permutation:
    if n < 0:
        raise ValueError("n must be non-negative")
    return Permutation(tuple(_rng(seed, epoch_index).permutation(n).tolist()))


def build_random_mis(g: DynamicGraph, sigma: Permutation, meter: WorkMeter) -> MisState:
    return greedy_mis(g, sigma.order, meter)


def ceil_sqrt(m: int) -> int:
    r = math.isqrt(m)
    return r if r * r == m else r + 1


def rand_high_threshold(m: int, cfg: RandConfig) -> float:
    return cfg.c_high * math.sqrt(m) * log2_clamped(m) ** 1.5


@dataclass
class RandEpoch:
    index: int
    m0: int
    rounds_left: int
    sigma: Permutation
    v_high: frozenset
    threshold: float


def rand_update(
    g: DynamicGraph, s: MisState, epoch: RandEpoch, e: UpdateEvent, meter: WorkMeter
) -> Optional[int]:
    """Serve one update; returns the evicted vertex, if any."""
    if epoch.rounds_left <= 0:
        raise InternalInvariantError("epoch has no rounds left")
    u, v = e.u, e.v
    removed = None
    if e.kind is Op.INSERT:
        g.insert_edge(u, v)
        edge_inserted(s, u, v, meter)
        if s.in_mis[u] and s.in_mis[v]:
            hu, hv = u in epoch.v_high, v in epoch.v_high
            if hu != hv:
                removed = v if hu else u
            else:
                removed = smaller_degree(g, u, v)
            remove_from_mis(g, s, removed, meter)
            cascade_add(g, s, g.adj[removed], meter)
    else:
        g.delete_edge(u, v)
        edge_deleted(s, u, v, meter)
        if s.in_mis[u] != s.in_mis[v]:
            other = v if s.in_mis[u] else u
            if s.counter[other] == 0:
                cascade_add(g, s, (other,), meter)
    epoch.rounds_left -= 1
    return removed


class RandMIS(Maintainer):
    name = "rand"

    def __init__(self, n: int, cfg: RandConfig = RandConfig(), check: bool = False) -> None:
        self.cfg = cfg
        self.epoch: Optional[RandEpoch] = None
        super().__init__(n, check=check)

    def config(self) -> dict[str, Any]:
        return {"c_high": self.cfg.c_high, "seed": self.cfg.seed}

    def reconstruct(self) -> dict[str, Any]:
        g = self.graph
        idx = len(self.epochs)
        m0 = max(1, g.edge_count)
        sigma = random_permutation(self.cfg.seed, idx, g.n)
        self.state = build_random_mis(g, sigma, self.meter)
        thr = rand_high_threshold(m0, self.cfg)
        high = frozenset(v for v in range(g.n) if len(g.adj[v]) >= thr)
        self.epoch = RandEpoch(idx, m0, ceil_sqrt(m0), sigma, high, thr)
        return {"m0": m0, "length": self.epoch.rounds_left, "high_count": len(high)}

    def epoch_over(self) -> bool:
        return self.epoch.rounds_left <= 0

    def apply(self, e: UpdateEvent) -> None:
        leaves = self.meter.leaves
        removed = rand_update(self.graph, self.state, self.epoch, e, self.meter)
        if removed is not None:
            self.stats["evictions"] += 1
            if removed in self.epoch.v_high:
                self.stats["high_evictions"] += 1
        if self.check and self.meter.leaves - leaves > 1:
            raise InternalInvariantError("more than one vertex left the MIS in one update")


def run_rand(
    stream: UpdateStream,
    cfg: RandConfig = RandConfig(),
    verify: bool = False,
    check: bool = False,
    on_update=None,
) -> RunResult:
    return replay(RandMIS(stream.n, cfg, check=check), stream, verify=verify, on_update=on_update)


# ---- Monte Carlo probes ---------------------------------------------------------


def binomial_std_error(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials) if trials else float("inf")


def estimate_high_degree_mis_probability(
    g: DynamicGraph, w: int, trials: int, seed: int
) -> float:
    """Fraction of fresh random-order constructions in which ``w`` joins the MIS."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    rng = _rng(seed, 0)
    meter = WorkMeter()
    hits = 0
    for _ in range(trials):
        sigma = Permutation(tuple(rng.permutation(g.n).tolist()))
        if build_random_mis(g, sigma, meter).in_mis[w]:
            hits += 1
    return hits / trials


def estimate_prefix_block_probability(
    d: int, c: int, p: int, trials: int, seed: int
) -> float:
    """Monte Carlo estimate of Pr[some C element precedes the p-th A element].

    The uniform order is over ``d`` elements of A (ids ``0..d-1``) and ``c``
    elements of C (ids ``d..d+c-1``).
    """
    if not 1 <= p <= d:
        raise ValueError("need 1 <= p <= d")
    rng = _rng(seed, 1)
    hits = 0
    for _ in range(trials):
        order = rng.permutation(d + c)
        seen_a = 0
        for x in order:
            if x >= d:
                hits += 1
                break
            seen_a += 1
            if seen_a == p:
                break
    return hits / trials
