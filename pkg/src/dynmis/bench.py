"""Scenario description, metrics serialization and the multi-algorithm comparison.

Metrics CSV layout: a block of ``# key=value`` lines echoing the scenario,
then a header row and one row per rebuild or update in chronological order.
A rebuild row precedes the update during which it happened.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional

from .arb import ArbConfig, ArbMIS
from .core import InternalInvariantError, WorkMeter
from .det import DetConfig, DetMIS
from .engine import Maintainer, NaiveMIS, RunResult, replay
from .rand import RandConfig, RandMIS
from .stream import UpdateStream, serialize_stream

ALGORITHMS = ("naive", "det", "rand", "arb")

METRIC_COLUMNS = (
    "row",
    "index",
    "kind",
    "u",
    "v",
    "epoch",
    "adjacency_visits",
    "counter_mutations",
    "mis_flips",
    "joins",
    "leaves",
    "work",
    "phi",
    "m0",
    "length",
    "high_count",
    "reason",
    "fallback",
)


class ScenarioError(ValueError):
    """A scenario that cannot be run as described."""


@dataclass(frozen=True)
class ScenarioSpec:
    algorithm: str
    seed: Optional[int] = None
    lam: Optional[int] = None
    c_high: Optional[float] = None
    c_T: Optional[float] = None
    c_replace: Optional[float] = None
    c_feasible: Optional[float] = None
    verify: bool = False
    check: bool = False

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ScenarioError(
                f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}"
            )
        if self.algorithm == "arb" and self.lam is None:
            raise ScenarioError("arb needs an arboricity bound (--lambda)")
        if self.algorithm == "rand" and self.seed is None:
            raise ScenarioError("rand needs a seed (--seed)")
        if self.lam is not None and self.lam < 1:
            raise ScenarioError(f"lambda must be >= 1, got {self.lam}")
        for name in ("c_high", "c_T", "c_replace", "c_feasible"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ScenarioError(f"{name} must be positive, got {val}")

    def build(self, n: int) -> Maintainer:
        self.validate()
        if self.algorithm == "naive":
            return NaiveMIS(n, check=self.check)
        if self.algorithm == "det":
            return DetMIS(n, DetConfig(**_given(c_high=self.c_high)), check=self.check)
        if self.algorithm == "rand":
            cfg = RandConfig(**_given(c_high=self.c_high), seed=self.seed)
            return RandMIS(n, cfg, check=self.check)
        cfg = ArbConfig(
            lam=self.lam,
            **_given(c_T=self.c_T, c_high=self.c_high, c_replace=self.c_replace,
                    c_feasible=self.c_feasible),
        )
        return ArbMIS(n, cfg, check=self.check)


def _given(**kw: Any) -> dict[str, Any]:
    return {k: v for k, v in kw.items() if v is not None}


def stream_digest(stream: UpdateStream) -> str:
    return hashlib.sha256(serialize_stream(stream).encode("ascii")).hexdigest()


def run_scenario(spec: ScenarioSpec, stream: UpdateStream) -> RunResult:
    return replay(spec.build(stream.n), stream, verify=spec.verify)


def config_echo(result: RunResult, stream: UpdateStream) -> dict[str, Any]:
    return {
        "algorithm": result.algorithm,
        "config": result.config,
        "stream_n": stream.n,
        "stream_events": len(stream),
        "stream_sha256": stream_digest(stream),
    }


def _meter_cells(w: WorkMeter) -> list[int]:
    return [w.adjacency_visits, w.counter_mutations, w.mis_flips, w.joins, w.leaves, w.work]


def metric_rows(result: RunResult) -> list[list[Any]]:
    rows: list[list[Any]] = []
    epochs = iter(result.epochs)
    pending = next(epochs, None)

    def flush(upto: int) -> None:
        nonlocal pending
        while pending is not None and pending.start_event <= upto:
            e = pending
            rows.append(
                ["epoch", e.index, "", "", "", e.index, *_meter_cells(e.work), "",
                 e.m0, "" if e.length is None else e.length, e.high_count, e.reason,
                 e.fallback or ""]
            )
            pending = next(epochs, None)

    for r in result.updates:
        flush(r.index)
        ev = r.event
        rows.append(
            ["update", r.index, ev.kind.value, ev.u, ev.v, r.epoch, *_meter_cells(r.work),
             r.phi, "", "", "", "", ""]
        )
    flush(float("inf"))
    return rows


def render_metrics_csv(result: RunResult, stream: UpdateStream) -> str:
    buf = io.StringIO()
    echo = config_echo(result, stream)
    for key, val in echo.items():
        text = json.dumps(val, sort_keys=True) if isinstance(val, dict) else val
        buf.write(f"# {key}={text}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRIC_COLUMNS)
    writer.writerows(metric_rows(result))
    return buf.getvalue()


def summary_document(result: RunResult, stream: UpdateStream) -> dict[str, Any]:
    doc = result.summary()
    doc.update(config_echo(result, stream))
    if result.verify_failure is not None:
        f = result.verify_failure
        doc["verify_failure"] = {"index": f.index, "event": str(f.event), "witness": repr(f.verdict)}
    return doc


def render_summary_json(result: RunResult, stream: UpdateStream) -> str:
    return json.dumps(summary_document(result, stream), sort_keys=True, indent=2) + "\n"


# ---- comparison -----------------------------------------------------------------

COMPARE_COLUMNS = (
    "algorithm",
    "status",
    "updates",
    "epochs",
    "total_work",
    "amortized_work",
    "max_update_work",
    "fallbacks",
    "verified",
)


@dataclass
class CompareRow:
    algorithm: str
    status: str
    updates: int = 0
    epochs: int = 0
    total_work: int = 0
    amortized_work: float = 0.0
    max_update_work: int = 0
    fallbacks: int = 0
    verified: bool = False
    detail: str = ""
    summary: dict = field(default_factory=dict)

    def cells(self) -> list[Any]:
        return [self.algorithm, self.status, self.updates, self.epochs, self.total_work,
                f"{self.amortized_work:.4f}", self.max_update_work, self.fallbacks,
                str(self.verified).lower()]


def _compare_one(args: tuple[ScenarioSpec, UpdateStream]) -> CompareRow:
    spec, stream = args
    try:
        result = run_scenario(spec, stream)
    except InternalInvariantError as exc:
        return CompareRow(spec.algorithm, "internal-error", detail=str(exc))
    s = result.summary()
    row = CompareRow(
        algorithm=spec.algorithm,
        status="ok" if result.ok else "verify-failed",
        updates=s["updates"],
        epochs=s["epochs"],
        total_work=s["total_work"],
        amortized_work=s["amortized_work"],
        max_update_work=s["max_update_work"],
        fallbacks=sum(s["fallbacks"].values()),
        verified=spec.verify and result.ok,
        summary=s,
    )
    if not result.ok:
        f = result.verify_failure
        row.detail = f"event {f.index} ({f.event}): {f.verdict!r}"
    return row


def compare(specs: list[ScenarioSpec], stream: UpdateStream, jobs: int = 1) -> list[CompareRow]:
    """Run every scenario on ``stream``; rows come back in scenario order."""
    for spec in specs:
        spec.validate()
    work = [(spec, stream) for spec in specs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_compare_one, work))
    return [_compare_one(w) for w in work]


def render_compare_csv(rows: list[CompareRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COMPARE_COLUMNS)
    writer.writerows(r.cells() for r in rows)
    return buf.getvalue()


def render_compare_table(rows: list[CompareRow]) -> str:
    cells = [list(COMPARE_COLUMNS)] + [[str(c) for c in r.cells()] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(COMPARE_COLUMNS))]
    lines = ["  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(row, widths)))
             for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    for r in rows:
        if r.detail:
            lines.append(f"{r.algorithm}: {r.detail}")
    return "\n".join(lines) + "\n"
