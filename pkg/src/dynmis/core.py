"""MIS state with neighbour counters, the shared mutation primitives, and the oracle."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

from .graph import DynamicGraph
from .stream import Op, UpdateEvent


class InternalInvariantError(AssertionError):
    """An algorithm broke one of its own invariants. Always a bug (or hostile constants)."""


@dataclass
class WorkMeter:
    """Elementary-operation counters.

    One work unit is one adjacency-entry visit or one counter mutation;
    membership flips are tallied on the side.
    """

    adjacency_visits: int = 0
    counter_mutations: int = 0
    mis_flips: int = 0
    joins: int = 0
    leaves: int = 0

    @property
    def work(self) -> int:
        return self.adjacency_visits + self.counter_mutations

    def snapshot(self) -> "WorkMeter":
        return WorkMeter(*(getattr(self, f.name) for f in fields(self)))

    def __sub__(self, other: "WorkMeter") -> "WorkMeter":
        return WorkMeter(*(getattr(self, f.name) - getattr(other, f.name) for f in fields(self)))

    def __add__(self, other: "WorkMeter") -> "WorkMeter":
        return WorkMeter(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    def reset(self) -> None:
        for f in fields(self):
            setattr(self, f.name, 0)


class MisState:
    """Membership flags plus ``counter[v] = |N(v) ∩ M|`` for every vertex."""

    __slots__ = ("in_mis", "counter", "counter_total")

    def __init__(self, n: int) -> None:
        self.in_mis = [False] * n
        self.counter = [0] * n
        self.counter_total = 0

    @property
    def members(self) -> set[int]:
        return set(itertools.compress(range(len(self.in_mis)), self.in_mis))

    @property
    def phi(self) -> int:
        """Potential: minus the sum of all counters."""
        return -self.counter_total

    def copy(self) -> "MisState":
        s = MisState(0)
        s.in_mis = list(self.in_mis)
        s.counter = list(self.counter)
        s.counter_total = self.counter_total
        return s

    def __eq__(self, other) -> bool:
        if not isinstance(other, MisState):
            return NotImplemented
        return self.in_mis == other.in_mis and self.counter == other.counter

    def __repr__(self) -> str:
        return f"MisState(M={sorted(self.members)})"


def recompute_state(g: DynamicGraph, mis: Iterable[int]) -> MisState:
    s = MisState(g.n)
    for v in mis:
        s.in_mis[v] = True
    for v in range(g.n):
        if s.in_mis[v]:
            for w in g.adj[v]:
                s.counter[w] += 1
    s.counter_total = sum(s.counter)
    return s


# ---- verification oracle ------------------------------------------------------


@dataclass(frozen=True)
class Valid:
    ok = True


@dataclass(frozen=True)
class IndependenceViolation:
    edge: tuple[int, int]
    ok = False


@dataclass(frozen=True)
class MaximalityViolation:
    vertex: int
    ok = False


@dataclass(frozen=True)
class CounterMismatch:
    vertex: int
    expected: int
    actual: int
    ok = False


def verify_mis(g: DynamicGraph, s: MisState):
    """Check independence, maximality and counter exactness from scratch.

    Returns ``Valid()`` or the first witness, checking in that order and
    scanning vertices (and edges) in ascending order.
    """
    n = g.n
    members = set(itertools.compress(range(n), s.in_mis))
    adj = g.adj
    first_dup = first_unmax = first_bad = None
    for v in range(n):
        hits = adj[v] & members
        k = len(hits)
        if v in members:
            if k and first_dup is None:
                first_dup = (v, min(hits))
        elif k == 0 and first_unmax is None:
            first_unmax = v
        if s.counter[v] != k and first_bad is None:
            first_bad = CounterMismatch(v, k, s.counter[v])
    if first_dup is not None:
        return IndependenceViolation(first_dup)
    if first_unmax is not None:
        return MaximalityViolation(first_unmax)
    if first_bad is not None:
        return first_bad
    return Valid()


# ---- shared mutation primitives -------------------------------------------------


def add_to_mis(g: DynamicGraph, s: MisState, v: int, meter: WorkMeter) -> None:
    if s.in_mis[v]:
        raise InternalInvariantError(f"vertex {v} is already in the MIS")
    if s.counter[v] != 0:
        raise InternalInvariantError(f"vertex {v} has {s.counter[v]} MIS neighbours")
    s.in_mis[v] = True
    counter = s.counter
    nb = g.adj[v]
    for w in nb:
        counter[w] += 1
    d = len(nb)
    s.counter_total += d
    meter.adjacency_visits += d
    meter.counter_mutations += d
    meter.mis_flips += 1
    meter.joins += 1


def remove_from_mis(g: DynamicGraph, s: MisState, v: int, meter: WorkMeter) -> None:
    if not s.in_mis[v]:
        raise InternalInvariantError(f"vertex {v} is not in the MIS")
    s.in_mis[v] = False
    counter = s.counter
    nb = g.adj[v]
    for w in nb:
        counter[w] -= 1
    d = len(nb)
    s.counter_total -= d
    meter.adjacency_visits += d
    meter.counter_mutations += d
    meter.mis_flips += 1
    meter.leaves += 1


def cascade_add(g: DynamicGraph, s: MisState, frontier: Iterable[int], meter: WorkMeter) -> set[int]:
    """Add every zero-counter non-member of ``frontier``, ascending by id.

    Joining raises the counters of the joiner's neighbours, so they can never
    become eligible afterwards; the scan therefore needs no re-queueing.
    """
    added: set[int] = set()
    for v in sorted(set(frontier)):
        meter.adjacency_visits += 1
        if not s.in_mis[v] and s.counter[v] == 0:
            add_to_mis(g, s, v, meter)
            added.add(v)
    return added


def greedy_mis(g: DynamicGraph, order: Sequence[int], meter: WorkMeter) -> MisState:
    """Sequential greedy MIS: take each vertex of ``order`` that no member dominates."""
    s = MisState(g.n)
    counter = s.counter
    for v in order:
        if counter[v] == 0:
            add_to_mis(g, s, v, meter)
    return s


def edge_inserted(s: MisState, u: int, v: int, meter: WorkMeter) -> None:
    """Counter bookkeeping after the graph gained edge (u, v)."""
    if s.in_mis[u]:
        s.counter[v] += 1
        s.counter_total += 1
        meter.counter_mutations += 1
    if s.in_mis[v]:
        s.counter[u] += 1
        s.counter_total += 1
        meter.counter_mutations += 1


def edge_deleted(s: MisState, u: int, v: int, meter: WorkMeter) -> None:
    """Counter bookkeeping after the graph lost edge (u, v)."""
    if s.in_mis[u]:
        s.counter[v] -= 1
        s.counter_total -= 1
        meter.counter_mutations += 1
    if s.in_mis[v]:
        s.counter[u] -= 1
        s.counter_total -= 1
        meter.counter_mutations += 1


def smaller_degree(g: DynamicGraph, u: int, v: int) -> int:
    """The endpoint with smaller current degree; ties go to the smaller id."""
    return min((len(g.adj[u]), u), (len(g.adj[v]), v))[1]


def naive_update(g: DynamicGraph, s: MisState, e: UpdateEvent, meter: WorkMeter) -> None:
    u, v = e.u, e.v
    if e.kind is Op.INSERT:
        g.insert_edge(u, v)
        edge_inserted(s, u, v, meter)
        if s.in_mis[u] and s.in_mis[v]:
            loser = smaller_degree(g, u, v)
            remove_from_mis(g, s, loser, meter)
            cascade_add(g, s, g.adj[loser], meter)
    else:
        g.delete_edge(u, v)
        edge_deleted(s, u, v, meter)
        if s.in_mis[u] != s.in_mis[v]:
            other = v if s.in_mis[u] else u
            if s.counter[other] == 0:
                cascade_add(g, s, (other,), meter)


def assert_valid(g: DynamicGraph, s: MisState, where: str = "") -> None:
    verdict = verify_mis(g, s)
    if not verdict.ok:
        raise InternalInvariantError(f"invalid MIS {where}: {verdict}")
