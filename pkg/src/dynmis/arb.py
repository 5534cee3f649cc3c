"""Deterministic algorithm for graphs of bounded arboricity.

Reconstruction freezes the high-degree set and its outer neighbourhood,
levels the high vertices by how cheap their neighbours are, and assigns
each high vertex a private MIS representative (an injection ``f``) drawn
from its cheap-neighbour candidate list. The running part keeps
``f(x)`` in the MIS for every high ``x``; when an update knocks a
representative out, a replacement with bounded replace-cost is forced in.

Candidate lists are stored once per epoch; a candidate is *feasible* when
it is still adjacent to its owner, is not itself a representative, and has
no representative among its neighbours (``fcount == 0``). Feasibility is
evaluated lazily while scanning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .core import (
    InternalInvariantError,
    MisState,
    WorkMeter,
    add_to_mis,
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

DEFAULT_CONSTANTS = {"c_T": 1.0, "c_high": 20.0, "c_replace": 22.0, "c_feasible": 5.0}


@dataclass(frozen=True)
class ArbConfig:
    lam: int = 1
    c_T: float = 1.0
    c_high: float = 20.0
    c_replace: float = 22.0
    c_feasible: float = 5.0

    def __post_init__(self) -> None:
        if self.lam < 1:
            raise ValueError(f"lambda must be >= 1, got {self.lam}")
        for name in DEFAULT_CONSTANTS:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def default_constants(self) -> bool:
        return all(getattr(self, k) == v for k, v in DEFAULT_CONSTANTS.items())


class LevelingStalled(RuntimeError):
    def __init__(self, iteration: int, remaining: frozenset, trace: list) -> None:
        self.iteration = iteration
        self.remaining = remaining
        self.trace = trace
        super().__init__(f"leveling stalled at iteration {iteration} with {len(remaining)} left")


class InjectionStuck(RuntimeError):
    def __init__(self, vertex: int) -> None:
        self.vertex = vertex
        super().__init__(f"no eligible candidate for high vertex {vertex}")


class ReplacementNotFound(RuntimeError):
    def __init__(self, vertex: int, scanned: int, feasible: int) -> None:
        self.vertex = vertex
        self.scanned = scanned
        self.feasible = feasible
        super().__init__(
            f"no replacement for high vertex {vertex} ({scanned} scanned, {feasible} feasible)"
        )


def compute_T(m: int, lam: int, cfg: ArbConfig = ArbConfig()) -> int:
    return max(1, math.ceil(cfg.c_T * math.sqrt(m * log2_clamped(m) * lam)))


def leveling_rounds(m: int) -> int:
    return max(1, math.ceil(math.log2(m))) if m > 1 else 1


@dataclass(frozen=True)
class StageIteration:
    i: int
    K: frozenset
    unitcost: dict
    p: dict
    L: frozenset
    bound: Fraction


def stage1_levels(
    g: DynamicGraph,
    v_high: frozenset,
    a_star: frozenset,
    m: int,
    T: int,
    meter: Optional[WorkMeter] = None,
) -> tuple[dict[int, int], dict[int, list[int]], list[StageIteration]]:
    """Assign each high vertex a level and a candidate list.

    Per round ``i`` every outer vertex splits its degree evenly over its
    remaining high neighbours (its unit cost); a high vertex settles at
    level ``i`` when the lower median of its neighbours' unit costs is at
    most ``m / (|K_i| * T)``, taking the neighbours at or below that median
    as candidates, sorted by ``(unitcost, id)``.
    """
    meter = meter if meter is not None else WorkMeter()
    adj = g.adj
    K = set(v_high)
    level: dict[int, int] = {}
    candidates: dict[int, list[int]] = {}
    trace: list[StageIteration] = []
    for i in range(1, leveling_rounds(m) + 1):
        if not K:
            break
        hits: dict[int, int] = {}
        for v in K:
            for u in adj[v]:
                meter.adjacency_visits += 1
                if u in a_star:
                    hits[u] = hits.get(u, 0) + 1
        unit = {u: Fraction(len(adj[u]), c) for u, c in hits.items()}
        bound = Fraction(m, len(K) * T)
        p: dict[int, Optional[Fraction]] = {}
        settled = set()
        for v in sorted(K):
            vals = sorted(unit[u] for u in adj[v] if u in a_star)
            meter.adjacency_visits += len(adj[v])
            if not vals:
                p[v] = None
                continue
            p[v] = vals[(len(vals) - 1) // 2]
            if p[v] <= bound:
                settled.add(v)
        for v in settled:
            level[v] = i
            pv = p[v]
            candidates[v] = sorted(
                (u for u in adj[v] if u in a_star and unit[u] <= pv),
                key=lambda u: (unit[u], u),
            )
        trace.append(StageIteration(i, frozenset(K), unit, p, frozenset(settled), bound))
        if not settled:
            raise LevelingStalled(i, frozenset(K), trace)
        K -= settled
    if K:
        raise LevelingStalled(len(trace), frozenset(K), trace)
    return level, candidates, trace


def choose_injection(
    g: DynamicGraph,
    level: dict[int, int],
    candidates: dict[int, list[int]],
    meter: Optional[WorkMeter] = None,
) -> tuple[dict[int, int], list[int]]:
    """Greedy representative choice in ascending ``(level, id)`` order.

    Returns ``(f, fcount)`` where ``fcount[w]`` counts representatives among
    ``w``'s neighbours.
    """
    meter = meter if meter is not None else WorkMeter()
    adj = g.adj
    fcount = [0] * g.n
    f: dict[int, int] = {}
    image: set[int] = set()
    for v in sorted(level, key=lambda x: (level[x], x)):
        for u in candidates[v]:
            meter.adjacency_visits += 1
            if u in image or fcount[u] > 0 or u not in adj[v]:
                continue
            f[v] = u
            image.add(u)
            for w in adj[u]:
                fcount[w] += 1
            meter.counter_mutations += len(adj[u])
            break
        else:
            raise InjectionStuck(v)
    return f, fcount


@dataclass
class ArbEpochState:
    m0: int
    T: int
    threshold: float
    v_high_star: frozenset = frozenset()
    a_star: frozenset = frozenset()
    level: dict = field(default_factory=dict)
    candidates: dict = field(default_factory=dict)
    candidate_sets: dict = field(default_factory=dict)
    f: dict = field(default_factory=dict)
    f_inv: dict = field(default_factory=dict)
    fcount: list = field(default_factory=list)
    in_a: list = field(default_factory=list)
    replace_cost: list = field(default_factory=list)
    rounds_left: int = 1
    trace: list = field(default_factory=list)
    fallback: Optional[str] = None
    image_degree: int = 0


def arb_reconstruct(
    g: DynamicGraph, cfg: ArbConfig, meter: WorkMeter, check: bool = False
) -> tuple[MisState, ArbEpochState]:
    n = g.n
    adj = g.adj
    m0 = max(1, g.edge_count)
    T = compute_T(m0, cfg.lam, cfg)
    thr = cfg.c_high * T
    high = frozenset(v for v in range(n) if len(adj[v]) >= thr)
    outer = set()
    for v in high:
        outer.update(adj[v])
        meter.adjacency_visits += len(adj[v])
    a_star = frozenset(outer - high)
    st = ArbEpochState(m0=m0, T=T, threshold=thr)
    try:
        level, cands, trace = stage1_levels(g, high, a_star, m0, T, meter)
        f, fcount = choose_injection(g, level, cands, meter)
    except (LevelingStalled, InjectionStuck) as exc:
        st.fallback = "leveling_stalled" if isinstance(exc, LevelingStalled) else "injection_stuck"
        st.trace = getattr(exc, "trace", [])
        st.fcount = [0] * n
        st.in_a = [False] * n
        st.replace_cost = [0] * n
        st.rounds_left = 1
        return greedy_mis(g, range(n), meter), st

    st.v_high_star = high
    st.a_star = a_star
    st.level = level
    st.candidates = cands
    st.candidate_sets = {v: set(c) for v, c in cands.items()}
    st.f = f
    st.f_inv = {u: v for v, u in f.items()}
    st.fcount = fcount
    st.trace = trace
    st.rounds_left = T
    st.in_a = [False] * n
    for u in a_star:
        st.in_a[u] = True
    st.image_degree = sum(len(adj[u]) for u in f.values())
    if check and cfg.default_constants and st.image_degree > 4 * T:
        raise InternalInvariantError(
            f"representatives carry total degree {st.image_degree} > 4T = {4 * T}"
        )

    s = MisState(n)
    for u in sorted(st.f_inv):
        add_to_mis(g, s, u, meter)
    for u in range(n):
        if not s.in_mis[u] and s.counter[u] == 0:
            add_to_mis(g, s, u, meter)
    rc = [0] * n
    for u in range(n):
        if s.in_mis[u]:
            d = len(adj[u])
            for w in adj[u]:
                if st.in_a[w]:
                    rc[w] += d
            meter.adjacency_visits += d
    st.replace_cost = rc
    return s, st


# ---- running part --------------------------------------------------------------


def _join(g: DynamicGraph, s: MisState, st: ArbEpochState, v: int, meter: WorkMeter) -> None:
    add_to_mis(g, s, v, meter)
    d = len(g.adj[v])
    in_a, rc = st.in_a, st.replace_cost
    for w in g.adj[v]:
        if in_a[w]:
            rc[w] += d
            meter.counter_mutations += 1


def _leave(g: DynamicGraph, s: MisState, st: ArbEpochState, v: int, meter: WorkMeter) -> None:
    remove_from_mis(g, s, v, meter)
    d = len(g.adj[v])
    in_a, rc = st.in_a, st.replace_cost
    for w in g.adj[v]:
        if in_a[w]:
            rc[w] -= d
            meter.counter_mutations += 1


def _cascade(g, s, st, frontier, meter) -> None:
    for v in sorted(set(frontier)):
        meter.adjacency_visits += 1
        if not s.in_mis[v] and s.counter[v] == 0:
            _join(g, s, st, v, meter)


def _unset_f(g: DynamicGraph, st: ArbEpochState, x: int, meter: WorkMeter) -> int:
    u = st.f.pop(x)
    del st.f_inv[u]
    for w in g.adj[u]:
        st.fcount[w] -= 1
    meter.counter_mutations += len(g.adj[u])
    return u


def _set_f(g: DynamicGraph, st: ArbEpochState, x: int, y: int, meter: WorkMeter) -> None:
    st.f[x] = y
    st.f_inv[y] = x
    for w in g.adj[y]:
        st.fcount[w] += 1
    meter.counter_mutations += len(g.adj[y])


def _feasible(g: DynamicGraph, st: ArbEpochState, x: int, y: int) -> bool:
    return y in g.adj[x] and st.fcount[y] == 0 and y not in st.f_inv


def find_replacement(
    g: DynamicGraph,
    st: ArbEpochState,
    x: int,
    cfg: ArbConfig,
    meter: WorkMeter,
    stats: Optional[dict] = None,
) -> int:
    """First feasible candidate of ``x`` whose replace-cost is within ``c_replace * lam * T``."""
    bound = cfg.c_replace * cfg.lam * st.T
    scanned = feasible = 0
    for y in st.candidates[x]:
        scanned += 1
        meter.adjacency_visits += 1
        if not _feasible(g, st, x, y):
            continue
        feasible += 1
        if st.replace_cost[y] <= bound:
            if stats is not None:
                stats["scanned"] = scanned
                stats["replace_cost"] = st.replace_cost[y]
            return y
    raise ReplacementNotFound(x, scanned, feasible)


def _force_join(
    g: DynamicGraph, s: MisState, st: ArbEpochState, y: int, meter: WorkMeter
) -> list[int]:
    """Put ``y`` in the MIS, evicting its MIS neighbours; returns the evicted vertices."""
    evicted = []
    if s.in_mis[y]:
        return evicted
    for z in sorted(g.adj[y]):
        meter.adjacency_visits += 1
        if s.in_mis[z]:
            if z in st.f_inv:
                raise InternalInvariantError(f"replacement {y} neighbours representative {z}")
            _leave(g, s, st, z, meter)
            evicted.append(z)
    _join(g, s, st, y, meter)
    return evicted


def _edge_bookkeeping(
    g: DynamicGraph, s: MisState, st: ArbEpochState, a: int, b: int, inserted: bool,
    meter: WorkMeter,
) -> None:
    """Refresh replace-cost and fcount around a changed edge (graph already updated)."""
    in_a, rc, adj = st.in_a, st.replace_cost, g.adj
    sign = 1 if inserted else -1
    for x, y in ((a, b), (b, a)):
        if s.in_mis[x]:
            d = len(adj[x])
            for w in adj[x]:
                if in_a[w] and w != y:
                    rc[w] += sign
            meter.adjacency_visits += d
            meter.counter_mutations += d
            if in_a[y]:
                # y gains (or loses) x with x's degree after (or before) the change
                rc[y] += d if inserted else -(d + 1)
        if x in st.f_inv:
            st.fcount[y] += sign
            meter.counter_mutations += 1


def _replace_representative(g, s, st, x, cfg, meter, counters) -> list[int]:
    info: dict = {}
    y = find_replacement(g, st, x, cfg, meter, info)
    counters["replacement_scans"] += 1
    counters["replacement_scanned_entries"] += info["scanned"]
    counters["max_replace_cost"] = max(counters["max_replace_cost"], info["replace_cost"])
    ratio = info["replace_cost"] / (cfg.c_replace * cfg.lam * st.T)
    counters["max_replace_ratio"] = max(counters["max_replace_ratio"], ratio)
    evicted = _force_join(g, s, st, y, meter)
    _set_f(g, st, x, y, meter)
    return evicted


def feasible_count(g: DynamicGraph, st: ArbEpochState, x: int) -> int:
    return sum(1 for y in st.candidates[x] if _feasible(g, st, x, y))


def arb_update(
    g: DynamicGraph,
    s: MisState,
    st: ArbEpochState,
    e: UpdateEvent,
    cfg: ArbConfig,
    meter: WorkMeter,
    counters,
    check: bool = False,
) -> list[int]:
    """Serve one update; returns the vertices that left the MIS.

    Raises ReplacementNotFound when a representative cannot be replaced;
    graph, counters, fcount and replace-cost are exact at that point, but
    ``x`` has no representative and the caller must rebuild.
    """
    if st.rounds_left <= 0:
        raise InternalInvariantError("epoch has no rounds left")
    a, b = e.u, e.v
    left: list[int] = []
    if e.kind is Op.INSERT:
        g.insert_edge(a, b)
        edge_inserted(s, a, b, meter)
        _edge_bookkeeping(g, s, st, a, b, True, meter)
        if s.in_mis[a] and s.in_mis[b]:
            fa, fb = a in st.f_inv, b in st.f_inv
            if not (fa and fb):
                loser = (b if fa else a) if fa != fb else smaller_degree(g, a, b)
                _leave(g, s, st, loser, meter)
                left.append(loser)
                counters["case_2a"] += 1
            else:
                loser = smaller_degree(g, a, b)
                x = st.f_inv[loser]
                _leave(g, s, st, loser, meter)
                _unset_f(g, st, x, meter)
                left.append(loser)
                counters["case_2b"] += 1
                if check:
                    _record_feasible(g, st, x, cfg, counters)
                left += _replace_representative(g, s, st, x, cfg, meter, counters)
            frontier = set()
            for z in left:
                frontier |= g.adj[z]
            _cascade(g, s, st, frontier, meter)
    else:
        g.delete_edge(a, b)
        edge_deleted(s, a, b, meter)
        _edge_bookkeeping(g, s, st, a, b, False, meter)
        frontier = {a, b}
        for x, y in ((a, b), (b, a)):
            if st.f.get(x) == y:
                _unset_f(g, st, x, meter)
                counters["reassignments"] += 1
                if check:
                    _record_feasible(g, st, x, cfg, counters)
                ev = _replace_representative(g, s, st, x, cfg, meter, counters)
                left += ev
                for z in ev:
                    frontier |= g.adj[z]
        _cascade(g, s, st, frontier, meter)
    st.rounds_left -= 1
    return left


def _record_feasible(g, st, x, cfg, counters) -> None:
    k = feasible_count(g, st, x)
    counters["feasible_checks"] += 1
    if k == 0:
        counters["feasible_empty"] += 1
    if k <= cfg.c_feasible * st.T:
        counters["feasible_below_floor"] += 1


def check_arb_invariants(g: DynamicGraph, s: MisState, st: ArbEpochState) -> None:
    """Full scan of the representative invariant and the maintained tallies."""
    adj = g.adj
    if len(set(st.f.values())) != len(st.f):
        raise InternalInvariantError("representative map is not injective")
    if set(st.f) != set(st.v_high_star):
        raise InternalInvariantError("representative map does not cover the high set")
    for x, y in st.f.items():
        if st.f_inv.get(y) != x:
            raise InternalInvariantError(f"inverse map out of sync at {x}->{y}")
        if not s.in_mis[y]:
            raise InternalInvariantError(f"representative {y} of {x} is not in the MIS")
        if y not in adj[x]:
            raise InternalInvariantError(f"representative {y} is not adjacent to {x}")
        if y not in st.candidate_sets[x]:
            raise InternalInvariantError(f"representative {y} is not a candidate of {x}")
    for x in st.v_high_star:
        if s.counter[x] < 1:
            raise InternalInvariantError(f"high vertex {x} has no MIS neighbour")
    image = set(st.f_inv)
    for w in range(g.n):
        k = len(adj[w] & image)
        if st.fcount[w] != k:
            raise InternalInvariantError(f"fcount[{w}] = {st.fcount[w]}, expected {k}")
    for w in st.a_star:
        want = sum(len(adj[u]) for u in adj[w] if s.in_mis[u])
        if st.replace_cost[w] != want:
            raise InternalInvariantError(
                f"replace_cost[{w}] = {st.replace_cost[w]}, expected {want}"
            )


class ArbMIS(Maintainer):
    name = "arb"

    def __init__(self, n: int, cfg: ArbConfig = ArbConfig(), check: bool = False) -> None:
        self.cfg = cfg
        self.epoch: Optional[ArbEpochState] = None
        super().__init__(n, check=check)

    def config(self) -> dict[str, Any]:
        c = self.cfg
        return {"lambda": c.lam, "c_T": c.c_T, "c_high": c.c_high,
                "c_replace": c.c_replace, "c_feasible": c.c_feasible}

    def reconstruct(self) -> dict[str, Any]:
        self.state, self.epoch = arb_reconstruct(self.graph, self.cfg, self.meter, self.check)
        st = self.epoch
        self.stats["leveling_iterations"] += len(st.trace)
        if st.fallback is None:
            self.stats["max_image_degree_over_T"] = max(
                self.stats["max_image_degree_over_T"], st.image_degree / st.T
            )
        return {
            "m0": st.m0,
            "length": st.rounds_left,
            "high_count": len(st.v_high_star),
            "fallback": st.fallback,
        }

    def epoch_over(self) -> bool:
        return self.epoch.rounds_left <= 0

    def apply(self, e: UpdateEvent) -> None:
        g, s, st = self.graph, self.state, self.epoch
        try:
            left = arb_update(g, s, st, e, self.cfg, self.meter, self.stats, check=self.check)
        except ReplacementNotFound:
            self.stats["replacement_not_found"] += 1
            self.rebuild("replacement_not_found")
            self.fallbacks["replacement_not_found"] += 1
            return
        if self.check:
            check_arb_invariants(g, s, st)
            lost = sum(len(g.adj[z]) for z in left)
            cap = self.cfg.c_replace * self.cfg.lam * st.T + max(
                (len(g.adj[v]) for v in range(g.n) if v not in st.v_high_star), default=0
            )
            if lost > cap:
                raise InternalInvariantError(f"update evicted total degree {lost} > {cap:.1f}")


def run_arb(
    stream: UpdateStream,
    cfg: ArbConfig = ArbConfig(),
    verify: bool = False,
    check: bool = False,
    on_update=None,
) -> RunResult:
    return replay(ArbMIS(stream.n, cfg, check=check), stream, verify=verify, on_update=on_update)
