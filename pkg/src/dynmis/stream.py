"""Edge-update streams: the event model, the text format, and generators.

Stream files are plain text with LF line endings::

    # optional comment lines
    n 4
    + 0 1
    - 0 1

The header ``n <count>`` fixes the vertex universe; every following line is
an insertion (``+``) or deletion (``-``) of an edge between two 0-based
vertex ids.
"""

from __future__ import annotations

import enum
import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Union

from .graph import DynamicGraph, GraphError


class Op(enum.Enum):
    INSERT = "+"
    DELETE = "-"


@dataclass(frozen=True)
class UpdateEvent:
    kind: Op
    u: int
    v: int

    @property
    def is_insert(self) -> bool:
        return self.kind is Op.INSERT

    def __str__(self) -> str:
        return f"{self.kind.value} {self.u} {self.v}"


def Insert(u: int, v: int) -> UpdateEvent:
    return UpdateEvent(Op.INSERT, u, v)


def Delete(u: int, v: int) -> UpdateEvent:
    return UpdateEvent(Op.DELETE, u, v)


@dataclass
class UpdateStream:
    n: int
    events: list[UpdateEvent] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)


class StreamError(ValueError):
    """Malformed or inconsistent stream; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if line is not None else message)


def apply_event(g: DynamicGraph, e: UpdateEvent) -> None:
    if e.kind is Op.INSERT:
        g.insert_edge(e.u, e.v)
    else:
        g.delete_edge(e.u, e.v)


def replay(stream: UpdateStream) -> DynamicGraph:
    """Replay ``stream`` on an empty graph, raising StreamError on the first bad event.

    Line numbers in errors assume the canonical layout (header on line 1).
    """
    g = DynamicGraph(stream.n)
    for i, e in enumerate(stream.events):
        try:
            apply_event(g, e)
        except GraphError as exc:
            raise StreamError(str(exc), line=i + 2) from None
    return g


_NUM = r"(0|[1-9][0-9]*)"
_HEADER = re.compile(rf"n {_NUM}")
_EVENT = re.compile(rf"([+-]) {_NUM} {_NUM}")


def parse_stream(text: Union[str, bytes]) -> UpdateStream:
    """Parse and validate a stream file body.

    Every event is replayed against a scratch graph while parsing, so a
    returned stream is guaranteed to replay cleanly from the empty graph.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("ascii")
        except UnicodeDecodeError as exc:
            raise StreamError(f"non-ASCII input: {exc}") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    g: DynamicGraph | None = None
    n = 0
    events: list[UpdateEvent] = []
    for lineno, line in enumerate(lines, start=1):
        if line.startswith("#"):
            continue
        if g is None:
            m = _HEADER.fullmatch(line)
            if m is None:
                raise StreamError(f"expected header 'n <count>', got {line!r}", lineno)
            n = int(m.group(1))
            g = DynamicGraph(n)
            continue
        m = _EVENT.fullmatch(line)
        if m is None:
            raise StreamError(f"malformed event {line!r}", lineno)
        e = UpdateEvent(Op(m.group(1)), int(m.group(2)), int(m.group(3)))
        try:
            apply_event(g, e)
        except GraphError as exc:
            raise StreamError(f"{type(exc).__name__}: {exc}", lineno) from None
        events.append(e)
    if g is None:
        raise StreamError("missing header 'n <count>'", len(lines) + 1)
    return UpdateStream(n, events)


def serialize_stream(stream: UpdateStream) -> str:
    out = [f"n {stream.n}"]
    out.extend(str(e) for e in stream.events)
    return "\n".join(out) + "\n"


def read_stream(path) -> UpdateStream:
    with open(path, "rb") as fh:
        return parse_stream(fh.read())


def write_stream(stream: UpdateStream, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(serialize_stream(stream))


class _EdgePool:
    """Present edges in a list with O(1) uniform sampling and removal."""

    def __init__(self) -> None:
        self.items: list[tuple[int, int]] = []
        self.index: dict[tuple[int, int], int] = {}

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, e) -> bool:
        return e in self.index

    def add(self, e: tuple[int, int]) -> None:
        self.index[e] = len(self.items)
        self.items.append(e)

    def remove(self, e: tuple[int, int]) -> None:
        i = self.index.pop(e)
        last = self.items.pop()
        if i < len(self.items):
            self.items[i] = last
            self.index[last] = i

    def sample(self, rng: random.Random) -> tuple[int, int]:
        return self.items[rng.randrange(len(self.items))]


def _random_pair(n: int, rng: random.Random) -> tuple[int, int]:
    u = rng.randrange(n)
    v = rng.randrange(n - 1)
    if v >= u:
        v += 1
    return (u, v) if u < v else (v, u)


def _hub_pair(n: int, hubs: int, rng: random.Random) -> tuple[int, int]:
    h = rng.randrange(hubs)
    o = rng.randrange(n - 1)
    o += o >= h
    return (h, o) if h < o else (o, h)


def gen_random_stream(
    n: int,
    steps: int,
    p_insert: float,
    seed: int,
    hubs: int = 0,
    hub_prob: float = 0.0,
) -> UpdateStream:
    """Uniform random insert/delete stream.

    Each step inserts a uniformly random absent edge with probability
    ``p_insert`` and otherwise deletes a uniformly random present edge; when
    the chosen pool is empty the other kind is emitted.

    With ``hubs > 0`` an insertion is, with probability ``hub_prob``, first
    tried as an edge touching one of the vertices ``0..hubs-1``; if a few
    such tries all hit present edges the uniform rule is used instead.
    """
    if not 0.0 <= p_insert <= 1.0:
        raise ValueError(f"p_insert must lie in [0, 1], got {p_insert}")
    if not 0 <= hubs <= n or not 0.0 <= hub_prob <= 1.0:
        raise ValueError("need 0 <= hubs <= n and 0 <= hub_prob <= 1")
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if steps > 0 and n < 2:
        raise ValueError("need at least 2 vertices to emit edge updates")
    rng = random.Random(seed)
    total = n * (n - 1) // 2
    present = _EdgePool()
    events: list[UpdateEvent] = []
    for _ in range(steps):
        want_insert = rng.random() < p_insert
        if want_insert and len(present) == total:
            want_insert = False
        elif not want_insert and len(present) == 0:
            want_insert = True
        if want_insert:
            e = None
            if hubs and rng.random() < hub_prob:
                for _attempt in range(16):
                    cand = _hub_pair(n, hubs, rng)
                    if cand not in present:
                        e = cand
                        break
            if e is None and len(present) <= total // 2:
                while True:
                    e = _random_pair(n, rng)
                    if e not in present:
                        break
            elif e is None:
                absent = [(u, v) for u in range(n) for v in range(u + 1, n)
                          if (u, v) not in present]
                e = absent[rng.randrange(len(absent))]
            present.add(e)
            events.append(Insert(*e))
        else:
            e = present.sample(rng)
            present.remove(e)
            events.append(Delete(*e))
    return UpdateStream(n, events)


def gen_bipartite_adversary(s: int, rounds: int) -> UpdateStream:
    """Build K_{s,s}, then repeatedly poke an edge inside each side and retract both.

    Left side is ``0..s-1``, right side ``s..2s-1``. Intra-side pairs cycle
    through ``(0,1), (0,2), ..., (1,2), ...`` in lockstep on both sides.
    """
    if s < 2:
        raise ValueError(f"side size must be at least 2, got {s}")
    if rounds < 0:
        raise ValueError("rounds must be non-negative")
    events = [Insert(u, v) for u in range(s) for v in range(s, 2 * s)]
    pairs = [(a, b) for a in range(s) for b in range(a + 1, s)]
    for r in range(rounds):
        a, b = pairs[r % len(pairs)]
        events += [Insert(a, b), Insert(a + s, b + s), Delete(a, b), Delete(a + s, b + s)]
    return UpdateStream(2 * s, events)


class _ForestCover:
    """``lam`` edge-disjoint forests whose union is the current graph."""

    def __init__(self, n: int, lam: int) -> None:
        self.n = n
        self.forests: list[list[set[int]]] = [[set() for _ in range(n)] for _ in range(lam)]
        self.owner: dict[tuple[int, int], int] = {}

    def labels(self, k: int) -> list[int]:
        """Component label per vertex in forest ``k``."""
        adj = self.forests[k]
        comp = [-1] * self.n
        for s in range(self.n):
            if comp[s] >= 0:
                continue
            comp[s] = s
            stack = [s]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if comp[y] < 0:
                        comp[y] = s
                        stack.append(y)
        return comp

    def add(self, e: tuple[int, int], k: int) -> None:
        u, v = e
        self.forests[k][u].add(v)
        self.forests[k][v].add(u)
        self.owner[e] = k

    def remove(self, e: tuple[int, int]) -> None:
        u, v = e
        k = self.owner.pop(e)
        self.forests[k][u].discard(v)
        self.forests[k][v].discard(u)


def gen_bounded_arboricity_stream(
    n: int,
    lam: int,
    steps: int,
    seed: int,
    p_insert: float = 0.7,
    hubs: int = 0,
    hub_prob: float = 0.0,
) -> UpdateStream:
    """Random stream whose graph stays a union of ``lam`` forests at every prefix.

    An inserted edge goes to the first forest in which its endpoints lie in
    different trees; edges fitting no forest are never proposed. When no
    insertable edge exists a deletion is emitted instead (and vice versa).

    With ``hubs > 0``, each proposed insertion is, with probability
    ``hub_prob``, drawn between a random vertex in ``0..hubs-1`` and a random
    other vertex, which skews the degree sequence towards a few hubs.
    """
    if lam < 1:
        raise ValueError(f"arboricity bound must be >= 1, got {lam}")
    if not 0.0 <= p_insert <= 1.0:
        raise ValueError(f"p_insert must lie in [0, 1], got {p_insert}")
    if not 0 <= hubs <= n or not 0.0 <= hub_prob <= 1.0:
        raise ValueError("need 0 <= hubs <= n and 0 <= hub_prob <= 1")
    if steps > 0 and n < 2:
        raise ValueError("need at least 2 vertices to emit edge updates")
    rng = random.Random(seed)
    cover = _ForestCover(n, lam)
    present = _EdgePool()
    events: list[UpdateEvent] = []
    for _ in range(steps):
        want_insert = rng.random() < p_insert or len(present) == 0
        chosen = None
        # lam spanning trees hold lam * (n - 1) edges; nothing more fits
        if want_insert and len(present) < lam * (n - 1):
            labels: dict[int, list[int]] = {}

            def slot(e: tuple[int, int]) -> int:
                for k in range(lam):
                    if k not in labels:
                        labels[k] = cover.labels(k)
                    if labels[k][e[0]] != labels[k][e[1]]:
                        return k
                return -1

            for _attempt in range(64):
                if hubs and rng.random() < hub_prob:
                    e = _hub_pair(n, hubs, rng)
                else:
                    e = _random_pair(n, rng)
                if e not in present and slot(e) >= 0:
                    chosen = e
                    break
            else:
                for k in range(lam):
                    if k not in labels:
                        labels[k] = cover.labels(k)
                # a pair fits some forest iff its label tuples differ
                key = list(zip(*(labels[k] for k in range(lam))))
                candidates = [(u, v) for u in range(n) for v in range(u + 1, n)
                              if key[u] != key[v] and (u, v) not in present]
                if candidates:
                    chosen = candidates[rng.randrange(len(candidates))]
            if chosen is not None:
                cover.add(chosen, slot(chosen))
                present.add(chosen)
                events.append(Insert(*chosen))
                continue
        if len(present) == 0:
            raise ValueError("no edge can be inserted or deleted")
        e = present.sample(rng)
        present.remove(e)
        cover.remove(e)
        events.append(Delete(*e))
    return UpdateStream(n, events)
