"""Line-oriented update streams: parsing, replay, and oracle verification.

Stream format (whitespace separated, LF terminated)::

    h <n> <ddsg|vwdsg> <epsilon>   header, required first
    w <v> <weight>                 optional, vwdsg only, before any update
    + <u> <v>                      insert edge (directed in ddsg mode)
    - <u> <v>                      delete edge
    ?                              query

Replay is deterministic: identical stream, configuration and seed produce a
byte-identical report (timings are kept out of the serialized form unless
explicitly requested).
"""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import oracle
from .engine import EngineConfig, INF, OrientationEngine, duplication_factor
from .extract import extract
from .reducer import DirectedDensest, GridParams


class StreamFormatError(ValueError):
    """Malformed stream input; carries the offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class StreamRunError(RuntimeError):
    """An engine error while replaying, tagged with the event index."""


@dataclass(frozen=True)
class StreamHeader:
    n: int
    mode: str  # "ddsg" | "vwdsg"
    epsilon: float
    weights: dict[int, float] = field(default_factory=dict)

    def weight_list(self) -> list[float]:
        return [self.weights.get(v, 1.0) for v in range(self.n)]


@dataclass(frozen=True)
class UpdateEvent:
    kind: str  # "insert" | "delete" | "query"
    u: int = -1
    v: int = -1
    line: int = 0


def parse_stream(text: str) -> tuple[StreamHeader, list[UpdateEvent]]:
    """Parse a stream; raises StreamFormatError with a line number."""
    header = None
    weights: dict[int, float] = {}
    events: list[UpdateEvent] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts:
            continue
        tag = parts[0]
        if header is None:
            if tag != "h":
                raise StreamFormatError(lineno, "expected header line 'h <n> <mode> <eps>'")
            if len(parts) != 4:
                raise StreamFormatError(lineno, "header needs exactly 3 fields after 'h'")
            try:
                n = int(parts[1])
                eps = float(parts[3])
            except ValueError:
                raise StreamFormatError(lineno, "header fields must be numeric") from None
            mode = parts[2]
            if mode not in ("ddsg", "vwdsg"):
                raise StreamFormatError(lineno, f"unknown mode {mode!r}")
            if n < 1:
                raise StreamFormatError(lineno, "vertex count must be positive")
            if not 0.0 < eps < 1.0:
                raise StreamFormatError(lineno, "epsilon must be in (0, 1)")
            header = (n, mode, eps)
            continue
        n, mode, eps = header
        if tag == "h":
            raise StreamFormatError(lineno, "duplicate header")
        if tag == "w":
            if mode != "vwdsg":
                raise StreamFormatError(lineno, "weight lines only allowed in vwdsg mode")
            if events:
                raise StreamFormatError(lineno, "weight lines must precede updates")
            if len(parts) != 3:
                raise StreamFormatError(lineno, "weight line needs 'w <v> <weight>'")
            try:
                v = int(parts[1])
                wt = float(parts[2])
            except ValueError:
                raise StreamFormatError(lineno, "weight fields must be numeric") from None
            if not 0 <= v < n:
                raise StreamFormatError(lineno, f"vertex {v} out of range")
            if wt < 1.0:
                raise StreamFormatError(lineno, f"weight {wt} must be >= 1")
            weights[v] = wt
            continue
        if tag == "?":
            if len(parts) != 1:
                raise StreamFormatError(lineno, "query line takes no arguments")
            events.append(UpdateEvent("query", line=lineno))
            continue
        if tag in ("+", "-"):
            if len(parts) != 3:
                raise StreamFormatError(lineno, f"'{tag}' line needs two vertex ids")
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise StreamFormatError(lineno, "vertex ids must be integers") from None
            if not (0 <= u < n and 0 <= v < n):
                raise StreamFormatError(lineno, f"vertex id out of range: {u}, {v}")
            if u == v:
                raise StreamFormatError(lineno, f"self-loop on vertex {u}")
            kind = "insert" if tag == "+" else "delete"
            events.append(UpdateEvent(kind, u, v, lineno))
            continue
        raise StreamFormatError(lineno, f"unknown line tag {tag!r}")
    if header is None:
        raise StreamFormatError(0, "empty stream: missing header")
    n, mode, eps = header
    return StreamHeader(n=n, mode=mode, epsilon=eps, weights=weights), events


@dataclass(frozen=True)
class RunConfig:
    """Replay knobs; mirrors the CLI flags."""

    eps: float | None = None  # overrides the header epsilon
    alpha_c: float = 0.25
    loop_c: int = 4
    dup_c: float = 4.0
    threshold_c: float = 4.0
    saturation_c: float = 1.0
    seed: int = 0
    parallel: bool = False

    def grid_params(self) -> GridParams:
        return GridParams(
            alpha_c=self.alpha_c,
            loop_c=self.loop_c,
            dup_c=self.dup_c,
            threshold_c=self.threshold_c,
            saturation_c=self.saturation_c,
            parallel=self.parallel,
        )


@dataclass
class RunReport:
    mode: str
    queries: list[dict]
    counters: dict[str, int]
    events: int
    timings: dict[str, float]
    config: dict

    def to_jsonl(self, include_timings: bool = False) -> str:
        lines = [json.dumps(q, sort_keys=True) for q in self.queries]
        summary = {
            "type": "summary",
            "mode": self.mode,
            "events": self.events,
            "queries": len(self.queries),
            "counters": self.counters,
            "config": self.config,
        }
        if include_timings:
            summary["timings"] = self.timings
        lines.append(json.dumps(summary, sort_keys=True))
        return "\n".join(lines) + "\n"


def _config_echo(header: StreamHeader, config: RunConfig, eps: float) -> dict:
    return {
        "n": header.n,
        "mode": header.mode,
        "eps": eps,
        "alpha_c": config.alpha_c,
        "loop_c": config.loop_c,
        "dup_c": config.dup_c,
        "threshold_c": config.threshold_c,
        "saturation_c": config.saturation_c,
        "seed": config.seed,
        "parallel": config.parallel,
    }


def run(header: StreamHeader, events: list[UpdateEvent], config: RunConfig = RunConfig()) -> RunReport:
    """Replay events against a fresh structure; collect per-query records."""
    eps = config.eps if config.eps is not None else header.epsilon
    queries: list[dict] = []
    timings = {"build": 0.0, "updates": 0.0, "queries": 0.0}

    start = time.perf_counter()
    if header.mode == "ddsg":
        grid = DirectedDensest(header.n, eps, config.grid_params())
        target = grid
    else:
        weights = header.weight_list()
        dup = duplication_factor(header.n * max(weights), eps, config.dup_c)
        engine = OrientationEngine(
            EngineConfig(
                n=header.n,
                epsilon=eps,
                alpha_c=config.alpha_c,
                loop_c=config.loop_c,
                threshold=INF,
                duplication=dup,
            ),
            weights,
        )
        target = engine
    timings["build"] = time.perf_counter() - start

    for idx, ev in enumerate(events):
        t0 = time.perf_counter()
        try:
            if ev.kind == "insert":
                if header.mode == "ddsg":
                    grid.insert_directed(ev.u, ev.v)
                else:
                    engine.insert(ev.u, ev.v, engine.config.duplication)
            elif ev.kind == "delete":
                if header.mode == "ddsg":
                    grid.delete_directed(ev.u, ev.v)
                else:
                    engine.delete(ev.u, ev.v, engine.config.duplication)
            else:
                if header.mode == "ddsg":
                    res = grid.query()
                    queries.append(
                        {
                            "type": "query",
                            "index": idx,
                            "estimate": res.density_estimate,
                            "sources": sorted(res.sources),
                            "sinks": sorted(res.sinks),
                            "winning_t": res.winning_t,
                            "regime": res.regime,
                        }
                    )
                else:
                    res = extract(engine, eps)
                    queries.append(
                        {
                            "type": "query",
                            "index": idx,
                            "estimate": res.certified_density,
                            "vertices": sorted(res.vertices),
                            "estimate_upper": res.estimate_upper,
                            "prefix_level": res.prefix_level,
                        }
                    )
        except ValueError as exc:
            raise StreamRunError(f"event {idx} (line {ev.line}): {exc}") from exc
        dt = time.perf_counter() - t0
        timings["queries" if ev.kind == "query" else "updates"] += dt

    counters = grid.combined_stats() if header.mode == "ddsg" else dict(engine.stats)
    return RunReport(
        mode=header.mode,
        queries=queries,
        counters=counters,
        events=len(events),
        timings=timings,
        config=_config_echo(header, config, eps),
    )


# ----------------------------------------------------------------------
# oracle-backed verification


@dataclass
class VerifyReport:
    ok: bool
    queries: list[dict]
    worst_ratio: float
    violations: int
    counters: dict[str, int]

    def to_jsonl(self) -> str:
        lines = [json.dumps(q, sort_keys=True) for q in self.queries]
        summary = {
            "type": "verify-summary",
            "ok": self.ok,
            "queries": len(self.queries),
            "worst_ratio": self.worst_ratio,
            "violations": self.violations,
            "counters": self.counters,
        }
        lines.append(json.dumps(summary, sort_keys=True))
        return "\n".join(lines) + "\n"


def _weights_to_fractions(weights: list[float]) -> list[Fraction]:
    return [Fraction(w).limit_denominator(10**6) for w in weights]


def verify(header: StreamHeader, events: list[UpdateEvent], config: RunConfig = RunConfig()) -> VerifyReport:
    """Replay with a brute-force oracle cross-check at every query.

    Requires desk-scale n.  Reports the worst estimate/optimum ratio, flags
    any estimate exceeding the optimum, and runs the band-inequality and
    local-optimality checkers on every instance at every query point.
    """
    eps = config.eps if config.eps is not None else header.epsilon
    cap = oracle.DIRECTED_CAP if header.mode == "ddsg" else oracle.UNDIRECTED_CAP
    if header.n > cap:
        raise ValueError(f"verify needs n <= {cap} in {header.mode} mode, got {header.n}")

    if header.mode == "ddsg":
        grid = DirectedDensest(header.n, eps, config.grid_params())
        engines = lambda: grid.engines()
        mirror = oracle.SmallGraph(n=header.n, directed=True)
    else:
        weights = header.weight_list()
        dup = duplication_factor(header.n * max(weights), eps, config.dup_c)
        engine = OrientationEngine(
            EngineConfig(n=header.n, epsilon=eps, alpha_c=config.alpha_c,
                         loop_c=config.loop_c, duplication=dup),
            weights,
        )
        engines = lambda: [engine]
        mirror = oracle.SmallGraph(
            n=header.n, directed=False, weights=_weights_to_fractions(weights)
        )

    queries: list[dict] = []
    worst_ratio = math.inf
    violations = 0
    for idx, ev in enumerate(events):
        try:
            if ev.kind == "insert":
                mirror.add_edge(ev.u, ev.v)
                if header.mode == "ddsg":
                    grid.insert_directed(ev.u, ev.v)
                else:
                    engine.insert(ev.u, ev.v, engine.config.duplication)
                continue
            if ev.kind == "delete":
                mirror.remove_edge(ev.u, ev.v)
                if header.mode == "ddsg":
                    grid.delete_directed(ev.u, ev.v)
                else:
                    engine.delete(ev.u, ev.v, engine.config.duplication)
                continue
        except ValueError as exc:
            raise StreamRunError(f"event {idx} (line {ev.line}): {exc}") from exc

        # query event: engine answer vs exhaustive optimum
        if header.mode == "ddsg":
            res = grid.query()
            estimate = res.density_estimate
            opt, _, _ = oracle.exact_ddsg(mirror)
        else:
            res = extract(engine, eps)
            estimate = res.certified_density
            opt = float(oracle.exact_vwdsg_density(mirror))
        sound = estimate <= opt + 1e-9
        ratio = 1.0 if opt == 0 and estimate == 0 else (estimate / opt if opt > 0 else 0.0)
        worst_ratio = min(worst_ratio, ratio)

        bad_arcs = 0
        local_ok = True
        for eng in engines():
            bad = eng.verify_local_optimality()
            bad_arcs += len(bad)
            a = eng.alpha
            alpha_eff = (1.0 + a) ** 8 - 1.0
            beta_eff = alpha_eff / a
            loads, arcs = eng.snapshot()
            if not oracle.check_alpha_beta_optimality(loads, arcs, alpha_eff, beta_eff):
                local_ok = False
        if not sound or bad_arcs or not local_ok:
            violations += 1
        queries.append(
            {
                "type": "verify-query",
                "index": idx,
                "estimate": estimate,
                "optimum": opt,
                "ratio": ratio,
                "sound": sound,
                "bad_arcs": bad_arcs,
                "locally_optimal": local_ok,
            }
        )

    counters = grid.combined_stats() if header.mode == "ddsg" else dict(engine.stats)
    if worst_ratio is math.inf:
        worst_ratio = 1.0
    return VerifyReport(
        ok=violations == 0,
        queries=queries,
        worst_ratio=worst_ratio,
        violations=violations,
        counters=counters,
    )


def oracle_replay(header: StreamHeader, events: list[UpdateEvent]) -> list[dict]:
    """Replay only the exact oracle; one record per query event."""
    cap = oracle.DIRECTED_CAP if header.mode == "ddsg" else oracle.UNDIRECTED_CAP
    if header.n > cap:
        raise ValueError(f"oracle replay needs n <= {cap} in {header.mode} mode")
    if header.mode == "ddsg":
        mirror = oracle.SmallGraph(n=header.n, directed=True)
    else:
        mirror = oracle.SmallGraph(
            n=header.n,
            directed=False,
            weights=_weights_to_fractions(header.weight_list()),
        )
    out: list[dict] = []
    for idx, ev in enumerate(events):
        try:
            if ev.kind == "insert":
                mirror.add_edge(ev.u, ev.v)
            elif ev.kind == "delete":
                mirror.remove_edge(ev.u, ev.v)
            else:
                if header.mode == "ddsg":
                    opt, s, t = oracle.exact_ddsg(mirror)
                    out.append(
                        {
                            "type": "oracle-query",
                            "index": idx,
                            "optimum": opt,
                            "sources": sorted(s),
                            "sinks": sorted(t),
                        }
                    )
                else:
                    opt, witness = oracle.exact_vwdsg(mirror)
                    out.append(
                        {
                            "type": "oracle-query",
                            "index": idx,
                            "optimum": opt,
                            "vertices": sorted(witness),
                        }
                    )
        except ValueError as exc:
            raise StreamRunError(f"event {idx} (line {ev.line}): {exc}") from exc
    return out


# ----------------------------------------------------------------------
# random stream generation (bench mode and tests)


def random_stream_text(
    n: int,
    mode: str,
    eps: float,
    events: int,
    seed: int,
    query_every: int = 0,
    pool_target: int | None = None,
) -> str:
    """Seeded random update stream in the line format above.

    Inserts and deletes hover around ``pool_target`` live edges (default
    ~n**1.5), with a query every ``query_every`` updates when requested.
    """
    rng = random.Random(seed)
    if pool_target is None:
        pool_target = max(4, int(n**1.5))
    lines = [f"h {n} {mode} {eps}"]
    live: list[tuple[int, int]] = []
    live_set: set[tuple[int, int]] = set()
    emitted = 0
    while emitted < events:
        do_insert = not live or (len(live) < pool_target and rng.random() < 0.7) or (
            len(live) >= pool_target and rng.random() < 0.3
        )
        if do_insert:
            u = rng.randrange(n)
            v = rng.randrange(n - 1)
            if v >= u:
                v += 1
            if mode == "vwdsg" and u > v:
                u, v = v, u
            key = (u, v)
            if key in live_set:
                continue
            live.append(key)
            live_set.add(key)
            lines.append(f"+ {u} {v}")
        else:
            i = rng.randrange(len(live))
            live[i], live[-1] = live[-1], live[i]
            u, v = live.pop()
            live_set.discard((u, v))
            lines.append(f"- {u} {v}")
        emitted += 1
        if query_every and emitted % query_every == 0:
            lines.append("?")
    lines.append("?")
    return "\n".join(lines) + "\n"
