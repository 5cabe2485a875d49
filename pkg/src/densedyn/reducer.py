"""Directed densest subgraph on top of a grid of weighted instances.

Every directed edge (u, v) is mirrored as the undirected edge {left copy of
u, right copy of v} in one bipartite weighted instance per guess ``t`` of the
optimal side ratio sqrt(|S|/|T|).  Guesses form a geometric (1 + eps) grid
over [1/sqrt(n), sqrt(n)], so some guess is always within (1 +/- eps) of the
truth and the corresponding instance's weighted optimum is within (1 - eps)
of the directed optimum.

Each guess runs two engines: a "low" one with duplicated edges and a load
cap, accurate until it saturates, and an uncapped "high" one without
duplication that takes over beyond the cap.  Query answers are always exact
densities of concrete vertex sets, so they never overshoot the optimum.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .engine import (
    DEFAULT_CAPACITY,
    INF,
    EngineConfig,
    OrientationEngine,
    duplication_factor,
    threshold_value,
)
from .extract import extract


def ratio_grid(n: int, eps: float) -> list[float]:
    """Geometric guess grid spanning [1/sqrt(n), sqrt(n)] inclusively.

    Entries are (1 + eps)^j / sqrt(n) while strictly below sqrt(n); the top
    endpoint is appended exactly.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    root = math.sqrt(n)
    out = []
    j = 0
    # same stopping rule as the exact-rational grid: (1+eps)^(2j) < n^2
    while (1.0 + eps) ** (2 * j) < n * n:
        out.append((1.0 + eps) ** j / root)
        j += 1
    if not out or out[-1] != root:
        out.append(root)
    return out


@dataclass(frozen=True)
class GridParams:
    """Tuning constants shared by all instances of one grid."""

    alpha_c: float = 0.25
    loop_c: int = 4
    dup_c: float = 4.0
    threshold_c: float = 4.0
    saturation_c: float = 1.0
    capacity: int = DEFAULT_CAPACITY
    parallel: bool = False


@dataclass
class GridEntry:
    """Both engines for one side-ratio guess."""

    t: float
    scale: float  # multiply an instance density by this to undo normalization
    low: OrientationEngine
    high: OrientationEngine

    def active(self) -> tuple[OrientationEngine, str]:
        if self.low.saturated():
            return self.high, "high"
        return self.low, "low"


@dataclass(frozen=True)
class DirectedQueryResult:
    """An explicit (sources, sinks) pair with its exact directed density."""

    density_estimate: float
    sources: frozenset[int]
    sinks: frozenset[int]
    winning_t: float
    regime: str


_EMPTY_RESULT = DirectedQueryResult(0.0, frozenset(), frozenset(), 0.0, "low")


def best_t_sanity(sources, sinks) -> float:
    """Lower bound on the directed optimum implied by an optimal pair's
    shape: max(sqrt(|S|/|T|), sqrt(|T|/|S|))."""
    s, t = len(set(sources)), len(set(sinks))
    if s == 0 or t == 0:
        raise ValueError("both sides must be nonempty")
    return max(math.sqrt(s / t), math.sqrt(t / s))


class DirectedDensest:
    """Dynamic (1 - O(eps))-approximate directed densest subgraph."""

    def __init__(self, n: int, epsilon: float, params: GridParams = GridParams()):
        if n < 1:
            raise ValueError("n must be positive")
        if not 0.0 < epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
        self.n = n
        self.epsilon = epsilon
        self.params = params
        self.dup = duplication_factor(n, epsilon, params.dup_c)
        self.cap = threshold_value(n, epsilon, params.threshold_c)
        self.entries: list[GridEntry] = []
        for t in ratio_grid(n, epsilon):
            if t < 1.0:
                w_left, w_right = 1.0 / (t * t), 1.0
            elif t > 1.0:
                w_left, w_right = 1.0, t * t
            else:
                w_left = w_right = 1.0
            weights = [w_left] * n + [w_right] * n
            scale = max(2.0 * t, 2.0 / t)
            low = OrientationEngine(
                EngineConfig(
                    n=2 * n,
                    epsilon=epsilon,
                    alpha_c=params.alpha_c,
                    loop_c=params.loop_c,
                    threshold=self.cap,
                    duplication=self.dup,
                    capacity=params.capacity,
                    saturation_c=params.saturation_c,
                ),
                weights,
            )
            high = OrientationEngine(
                EngineConfig(
                    n=2 * n,
                    epsilon=epsilon,
                    alpha_c=params.alpha_c,
                    loop_c=params.loop_c,
                    threshold=INF,
                    duplication=1,
                    capacity=params.capacity,
                    saturation_c=params.saturation_c,
                ),
                weights,
            )
            self.entries.append(GridEntry(t=t, scale=scale, low=low, high=high))
        self._mirror: dict[tuple[int, int], int] = {}
        self._pool = None
        if params.parallel and len(self.entries) > 1:
            self._pool = ThreadPoolExecutor(max_workers=min(8, len(self.entries)))

    # ------------------------------------------------------------------

    @property
    def edge_count(self) -> int:
        return sum(self._mirror.values())

    def directed_edges(self) -> dict[tuple[int, int], int]:
        return dict(self._mirror)

    def _check_edge(self, u: int, v: int) -> None:
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"vertex out of range: ({u}, {v})")
        if u == v:
            raise ValueError(f"self-loop ({u}, {u}) rejected")

    def _fan_out(self, fn) -> None:
        if self._pool is not None:
            list(self._pool.map(fn, self.entries))
        else:
            for entry in self.entries:
                fn(entry)

    def insert_directed(self, u: int, v: int) -> None:
        """Insert directed edge (u, v) into every instance."""
        self._check_edge(u, v)
        self._mirror[(u, v)] = self._mirror.get((u, v), 0) + 1
        left, right, dup = u, self.n + v, self.dup

        def apply(entry: GridEntry) -> None:
            entry.low.insert(left, right, dup)
            entry.high.insert(left, right, 1)

        self._fan_out(apply)

    def delete_directed(self, u: int, v: int) -> None:
        """Delete directed edge (u, v) from every instance."""
        self._check_edge(u, v)
        count = self._mirror.get((u, v), 0)
        if count == 0:
            raise ValueError(f"directed edge ({u}, {v}) not present")
        if count == 1:
            del self._mirror[(u, v)]
        else:
            self._mirror[(u, v)] = count - 1
        left, right, dup = u, self.n + v, self.dup

        def apply(entry: GridEntry) -> None:
            entry.low.delete(left, right, dup)
            entry.high.delete(left, right, 1)

        self._fan_out(apply)

    # ------------------------------------------------------------------

    def query(self) -> DirectedQueryResult:
        """Best (sources, sinks) pair over the grid, with its exact density.

        Per guess, the low engine is consulted unless saturated.  A candidate
        whose extraction lands entirely on one side carries no directed edge
        and is skipped.  The reported density is recomputed from the true
        directed edge multiset, so it can only undershoot the optimum.
        """
        if not self._mirror:
            return _EMPTY_RESULT
        n = self.n
        best = None  # (denormalized density, entry, regime, sources, sinks)
        for entry in self.entries:
            engine, regime = entry.active()
            res = extract(engine, self.epsilon)
            sources = {v for v in res.vertices if v < n}
            sinks = {v - n for v in res.vertices if v >= n}
            if not sources or not sinks:
                continue
            cand = res.certified_density * entry.scale
            if best is None or cand > best[0]:
                best = (cand, entry, regime, sources, sinks)
        if best is None:
            return _EMPTY_RESULT
        _, entry, regime, sources, sinks = best
        edges = sum(
            mult
            for (u, v), mult in self._mirror.items()
            if u in sources and v in sinks
        )
        density = edges / math.sqrt(len(sources) * len(sinks))
        return DirectedQueryResult(
            density_estimate=density,
            sources=frozenset(sources),
            sinks=frozenset(sinks),
            winning_t=entry.t,
            regime=regime,
        )

    # ------------------------------------------------------------------

    def engines(self):
        for entry in self.entries:
            yield entry.low
            yield entry.high

    def combined_stats(self) -> dict[str, int]:
        total: dict[str, int] = {}
        for eng in self.engines():
            for key, val in eng.stats.items():
                if key.startswith("max_"):
                    total[key] = max(total.get(key, 0), val)
                else:
                    total[key] = total.get(key, 0) + val
        return total

    def reset_stats(self) -> None:
        for eng in self.engines():
            eng.reset_stats()

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None
