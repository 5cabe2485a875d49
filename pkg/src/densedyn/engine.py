"""Fully dynamic vertex-weighted edge orientation with lazy arc labels.

Maintains an integral orientation of an undirected multigraph over a fixed
vertex set so that no arc points at a vertex whose (thresholded) load sits
more than a few bands above its tail's.  Each arc direction carries a label,
a snapshot of the head's load taken the last time the arc was touched;
rebalancing decisions read labels instead of live loads so that one load
change never fans out to every incident arc.

Parallel copies of an edge share one record per direction: a multiplicity
counter plus a single label.  A per-vertex layer index (vertices bucketed by
load band, with per-band weight sums) supports peak-load queries and prefix
extraction.

Instances are single-threaded; distinct instances share nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from sortedcontainers import SortedDict

from .levels import BOUNDARY_TOL, LevelParams, build_level_params

INF = math.inf
DEFAULT_CAPACITY = 2**32


def log_scale(x: float) -> float:
    """log2 clamped below at 1, the size factor used by derived parameters."""
    return math.log2(max(2.0, x))


def duplication_factor(scale: float, eps: float, c: float = 4.0) -> int:
    """How many copies of each edge inflate the optimum enough that the
    additive error of the orientation becomes a relative eps-factor."""
    return max(1, math.ceil(c * log_scale(scale) / (eps * eps)))


def threshold_value(scale: float, eps: float, c: float = 4.0) -> float:
    """Load cap for a low-density instance."""
    return c * log_scale(scale) ** 2 / eps**4


@dataclass(frozen=True)
class EngineConfig:
    """Parameters of one orientation instance.

    ``alpha`` is normally derived as ``alpha_c * eps^2 / log2(n * W)``; the
    explicit override exists for tests and benchmarks that need coarse bands.
    ``duplication`` is bookkeeping only: the engine never multiplies inserts
    itself, but extraction divides densities back by it.
    """

    n: int
    epsilon: float
    alpha: float | None = None
    alpha_c: float = 0.25
    loop_c: int = 4
    threshold: float = INF
    duplication: int = 1
    capacity: int = DEFAULT_CAPACITY
    saturation_c: float = 1.0

    def validate(self, max_weight: float) -> None:
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.alpha is not None and not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha override must be in (0, 1], got {self.alpha}")
        if self.loop_c < 1:
            raise ValueError("loop_c must be a positive integer")
        if self.duplication < 1:
            raise ValueError("duplication must be a positive integer")
        if self.capacity < 1:
            raise ValueError("capacity must be positive")
        if self.threshold != INF:
            floor = log_scale(self.n * max_weight) / self.epsilon**2
            if self.threshold < floor - BOUNDARY_TOL:
                raise ValueError(
                    f"threshold {self.threshold} below minimum {floor:.3f}"
                )


class _Arc:
    """One direction of an undirected edge: multiplicity plus shared label."""

    __slots__ = ("tail", "head", "count", "label", "label_level", "twin", "placed")

    def __init__(self, tail: int, head: int):
        self.tail = tail
        self.head = head
        self.count = 0
        self.label = 0.0
        self.label_level = 0
        self.twin: _Arc = None  # linked right after construction
        self.placed = False


def _fresh_stats() -> dict[str, int]:
    return {
        "arcs_inc": 0,
        "arcs_dec": 0,
        "flips": 0,
        "label_resets": 0,
        "max_chain_inc": 0,
        "max_chain_dec": 0,
        "inserts": 0,
        "deletes": 0,
    }


class OrientationEngine:
    """Dynamic orientation of a vertex-weighted undirected multigraph."""

    def __init__(self, config: EngineConfig, weights=None):
        n = config.n
        if weights is None:
            weights = [1.0] * n
        if len(weights) != n:
            raise ValueError("weights length must match n")
        w = [float(x) for x in weights]
        for v, x in enumerate(w):
            if x < 1.0 - BOUNDARY_TOL:
                raise ValueError(f"weight of vertex {v} is {x}; normalize to >= 1")
        self.config = config
        max_w = max(w)
        config.validate(max_w)
        self.max_weight = max_w

        eps = config.epsilon
        if config.alpha is not None:
            self.alpha = config.alpha
        else:
            self.alpha = config.alpha_c * eps * eps / log_scale(n * max_w)
        self.budget = math.ceil(config.loop_c / self.alpha)
        self.threshold = config.threshold
        max_value = config.capacity if self.threshold == INF else self.threshold
        self.params: LevelParams = build_level_params(self.alpha, max_value)

        self._w = w
        self._ind = [0] * n
        self._lvl = [0] * n
        if self.threshold == INF:
            self._kcap = [None] * n
            self._cap_level = None
        else:
            # in-degree at which the thresholded load pins to the cap
            self._kcap = [math.ceil(self.threshold * x) for x in w]
            self._cap_level = self.params.level_of(self.threshold)
        # bucket values are insertion-ordered dicts keyed by arc record, so
        # replay order (hence every report) is deterministic
        self._in = [SortedDict() for _ in range(n)]   # label value -> arcs
        self._out = [SortedDict() for _ in range(n)]  # label band  -> arcs
        self._pairs: dict[tuple[int, int], _Arc] = {}
        self._nbrs = [set() for _ in range(n)]
        self._layers: dict[int, set[int]] = {0: set(range(n))}
        self._layer_w: dict[int, float] = {0: math.fsum(w)}
        self._top = 0
        self._copies = 0
        self.stats = _fresh_stats()

    # ------------------------------------------------------------------
    # basic accessors

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def total_copies(self) -> int:
        """Live arc copies, counting multiplicities."""
        return self._copies

    @property
    def level_count(self) -> int:
        """Number of load bands of this instance."""
        return self.params.top_level

    def weight(self, v: int) -> float:
        return self._w[v]

    def indeg(self, v: int) -> int:
        return self._ind[v]

    def load(self, v: int) -> float:
        return self._ind[v] / self._w[v]

    def thresholded_load(self, v: int) -> float:
        ind = self._ind[v]
        kcap = self._kcap[v]
        if kcap is not None and ind >= kcap:
            return self.threshold
        return ind / self._w[v]

    def level(self, v: int) -> int:
        return self._lvl[v]

    def neighbors(self, v: int):
        return self._nbrs[v]

    def pair_copies(self, u: int, v: int) -> int:
        """Total copies of the undirected edge {u, v} currently stored."""
        arc = self._pairs.get((u, v) if u < v else (v, u))
        return 0 if arc is None else arc.count + arc.twin.count

    def iter_arcs(self):
        """Yield (tail, head, count, label, label_level) for live directions."""
        for arc in self._pairs.values():
            for a in (arc, arc.twin):
                if a.count > 0:
                    yield a.tail, a.head, a.count, a.label, a.label_level

    def layer_levels_desc(self) -> list[int]:
        return sorted(self._layers, reverse=True)

    def layer_members(self, level: int) -> set[int]:
        return self._layers.get(level, set())

    def layer_weight(self, level: int) -> float:
        return self._layer_w.get(level, 0.0)

    def reset_stats(self) -> None:
        self.stats = _fresh_stats()

    # ------------------------------------------------------------------
    # public updates

    def insert(self, u: int, v: int, multiplicity: int = 1) -> None:
        """Insert ``multiplicity`` copies of the undirected edge {u, v}.

        Each copy is oriented toward the endpoint with smaller thresholded
        load (ties toward the smaller id), labeled with the head's resulting
        load, and followed by a rebalancing pass from the head.
        """
        self._check_pair(u, v)
        if multiplicity < 1:
            raise ValueError("multiplicity must be positive")
        if self._copies + multiplicity > self.config.capacity:
            raise ValueError("edge capacity exceeded")
        for _ in range(multiplicity):
            self._insert_one(u, v)

    def delete(self, u: int, v: int, multiplicity: int = 1) -> None:
        """Delete ``multiplicity`` copies of the undirected edge {u, v}.

        Each removed copy is one currently oriented into the higher-load
        endpoint (ties toward the smaller id); the former head is then
        rebalanced.
        """
        self._check_pair(u, v)
        if multiplicity < 1:
            raise ValueError("multiplicity must be positive")
        if self.pair_copies(u, v) < multiplicity:
            raise ValueError(
                f"cannot delete {multiplicity} copies of ({u}, {v}); "
                f"only {self.pair_copies(u, v)} present"
            )
        for _ in range(multiplicity):
            self._delete_one(u, v)

    def _check_pair(self, u: int, v: int) -> None:
        n = self.config.n
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"vertex out of range: ({u}, {v})")
        if u == v:
            raise ValueError(f"self-loop ({u}, {u}) rejected")

    def _insert_one(self, u: int, v: int) -> None:
        self.stats["inserts"] += 1
        lu = self.thresholded_load(u)
        lv = self.thresholded_load(v)
        if lu < lv or (lu == lv and u < v):
            head, tail = u, v
        else:
            head, tail = v, u
        arc = self._direction(tail, head)
        arc.count += 1
        self._copies += 1
        self._inc_load(head)
        self._relabel(arc, self.thresholded_load(head), self._lvl[head])
        self._check_inc(head)

    def _delete_one(self, u: int, v: int) -> None:
        self.stats["deletes"] += 1
        key = (u, v) if u < v else (v, u)
        pair = self._pairs[key]
        into_u = pair if pair.head == u else pair.twin
        into_v = into_u.twin
        lu = self.thresholded_load(u)
        lv = self.thresholded_load(v)
        prefer_u = lu > lv or (lu == lv and u < v)
        arc = into_u if prefer_u else into_v
        if arc.count == 0:
            arc = arc.twin
        head = arc.head
        self._drop_copy(arc)
        self._dec_load(head)
        if arc.count == 0 and arc.twin.count == 0:
            del self._pairs[key]
            self._nbrs[u].discard(v)
            self._nbrs[v].discard(u)
        self._check_dec(head)

    # ------------------------------------------------------------------
    # queries

    def max_load(self) -> float:
        """Maximum thresholded load, read off the top layer bucket."""
        top = self._top
        if top == 0:
            return 0.0
        return max(self.thresholded_load(v) for v in self._layers[top])

    def saturation_trigger(self) -> float:
        """Peak load at which a thresholded instance stops being trusted."""
        cfg = self.config
        return (1.0 - cfg.epsilon) * self.threshold - cfg.saturation_c * log_scale(
            cfg.n * self.max_weight
        ) / cfg.epsilon

    def saturated(self) -> bool:
        """True when the load cap may be hiding a denser optimum.

        Always False for unthresholded instances.
        """
        if self.threshold == INF:
            return False
        return self.max_load() >= self.saturation_trigger()

    def verify_local_optimality(self) -> list[dict]:
        """Full scan for band-inequality violations; empty means healthy.

        Checks, for every live direction tail->head with label band ``b``:
        head band <= b + 4, b <= head band + 4, b <= tail band + 3, and
        head band <= tail band + 7.
        """
        lvl = self._lvl
        bad = []
        for pair in self._pairs.values():
            for a in (pair, pair.twin):
                if a.count == 0:
                    continue
                lt = lvl[a.tail]
                lh = lvl[a.head]
                lb = a.label_level
                if lh > lb + 4:
                    bad.append(self._violation(a, "head-band above label", lh, lb))
                if lb > lh + 4:
                    bad.append(self._violation(a, "label above head-band", lb, lh))
                if lb > lt + 3:
                    bad.append(self._violation(a, "label above tail-band", lb, lt))
                if lh > lt + 7:
                    bad.append(self._violation(a, "arc band gap", lh, lt))
        return bad

    def _violation(self, arc: _Arc, kind: str, got: int, base: int) -> dict:
        return {
            "kind": kind,
            "tail": arc.tail,
            "head": arc.head,
            "count": arc.count,
            "label": arc.label,
            "label_level": arc.label_level,
            "got": got,
            "base": base,
        }

    def snapshot(self) -> tuple[dict[int, float], list[tuple[int, int, int]]]:
        """Thresholded loads plus live (tail, head, count) directions."""
        loads = {v: self.thresholded_load(v) for v in range(self.config.n)}
        arcs = [(t, h, c) for t, h, c, _, _ in self.iter_arcs()]
        return loads, arcs

    def vertex_record(self, v: int) -> dict:
        return {
            "id": v,
            "weight": self._w[v],
            "indeg": self._ind[v],
            "load": self.load(v),
            "thresholded_load": self.thresholded_load(v),
            "level": self._lvl[v],
        }

    def arc_pair_record(self, u: int, v: int) -> dict:
        key = (u, v) if u < v else (v, u)
        pair = self._pairs.get(key)
        if pair is None:
            return {"endpoints": key, "count_uv": 0, "count_vu": 0}
        uv = pair if pair.tail == key[0] else pair.twin
        vu = uv.twin
        return {
            "endpoints": key,
            "count_uv": uv.count,
            "count_vu": vu.count,
            "label_uv": uv.label if uv.count else None,
            "label_vu": vu.label if vu.count else None,
        }

    # ------------------------------------------------------------------
    # internals

    def _direction(self, tail: int, head: int) -> _Arc:
        key = (tail, head) if tail < head else (head, tail)
        pair = self._pairs.get(key)
        if pair is None:
            fwd = _Arc(key[0], key[1])
            bwd = _Arc(key[1], key[0])
            fwd.twin = bwd
            bwd.twin = fwd
            self._pairs[key] = fwd
            self._nbrs[key[0]].add(key[1])
            self._nbrs[key[1]].add(key[0])
            pair = fwd
        return pair if pair.tail == tail else pair.twin

    def _drop_copy(self, arc: _Arc) -> None:
        arc.count -= 1
        self._copies -= 1
        if arc.count == 0 and arc.placed:
            self._struct_remove(arc)

    def _struct_remove(self, arc: _Arc) -> None:
        in_map = self._in[arc.head]
        bucket = in_map[arc.label]
        bucket.pop(arc, None)
        if not bucket:
            del in_map[arc.label]
        out_map = self._out[arc.tail]
        obucket = out_map[arc.label_level]
        obucket.pop(arc, None)
        if not obucket:
            del out_map[arc.label_level]
        arc.placed = False

    def _relabel(self, arc: _Arc, value: float, lvl: int) -> None:
        """Set the direction's shared label, keeping both lookup maps honest."""
        if arc.placed:
            if value != arc.label:
                in_map = self._in[arc.head]
                bucket = in_map[arc.label]
                bucket.pop(arc, None)
                if not bucket:
                    del in_map[arc.label]
                in_map.setdefault(value, {})[arc] = None
            if lvl != arc.label_level:
                out_map = self._out[arc.tail]
                obucket = out_map[arc.label_level]
                obucket.pop(arc, None)
                if not obucket:
                    del out_map[arc.label_level]
                out_map.setdefault(lvl, {})[arc] = None
        else:
            self._in[arc.head].setdefault(value, {})[arc] = None
            self._out[arc.tail].setdefault(lvl, {})[arc] = None
            arc.placed = True
        arc.label = value
        arc.label_level = lvl

    def _inc_load(self, v: int) -> None:
        ind = self._ind[v] + 1
        self._ind[v] = ind
        lvl = self._lvl[v]
        kcap = self._kcap[v]
        if kcap is not None and ind >= kcap:
            new = self._cap_level
        else:
            w = self._w[v]
            b = self.params.boundaries
            # a single copy moves the load by 1/w <= 1: at most one band up
            new = lvl if ind <= b[lvl] * w + BOUNDARY_TOL * w else lvl + 1
        if new != lvl:
            self._move_layer(v, lvl, new)

    def _dec_load(self, v: int) -> None:
        ind = self._ind[v] - 1
        self._ind[v] = ind
        lvl = self._lvl[v]
        kcap = self._kcap[v]
        if kcap is not None and ind >= kcap:
            return
        if ind == 0:
            new = 0
        elif lvl > 0:
            w = self._w[v]
            b = self.params.boundaries
            new = lvl - 1 if ind <= b[lvl - 1] * w + BOUNDARY_TOL * w else lvl
        else:
            new = 0
        if new != lvl:
            self._move_layer(v, lvl, new)

    def _move_layer(self, v: int, old: int, new: int) -> None:
        w = self._w[v]
        bucket = self._layers[old]
        bucket.discard(v)
        self._layer_w[old] -= w
        if not bucket:
            del self._layers[old]
            del self._layer_w[old]
        if new in self._layers:
            self._layers[new].add(v)
            self._layer_w[new] += w
        else:
            self._layers[new] = {v}
            self._layer_w[new] = w
        self._lvl[v] = new
        if new > self._top:
            self._top = new
        else:
            top = self._top
            layers = self._layers
            while top > 0 and top not in layers:
                top -= 1
            self._top = top

    def _check_inc(self, v: int) -> None:
        """Rebalance after the load of ``v`` went up by one copy.

        Scans stale-low labeled incoming directions (cheapest first).  A
        direction whose tail sits two or more bands below gets one copy
        flipped back toward the tail, restoring ``v`` and moving the problem
        to the tail; otherwise its label is refreshed.  Tail calls are
        flattened into a loop.
        """
        stats = self.stats
        budget = self.budget
        lvl = self._lvl
        depth = 0
        while True:
            depth += 1
            in_map = self._in[v]
            lvl_v = lvl[v]
            load_v = None
            flip_to = -1
            for _ in range(budget):
                if not in_map:
                    break
                _, bucket = in_map.peekitem(0)
                arc = next(iter(bucket))
                stats["arcs_inc"] += 1
                if lvl_v < arc.label_level + 2:
                    break  # freshest possible; the rest are labeled higher
                u = arc.tail
                if lvl[u] + 2 <= lvl_v:
                    stats["flips"] += 1
                    self._drop_copy(arc)
                    self._dec_load(v)
                    twin = arc.twin
                    twin.count += 1
                    self._copies += 1
                    self._inc_load(u)
                    self._relabel(twin, self.thresholded_load(u), lvl[u])
                    flip_to = u
                    break
                stats["label_resets"] += 1
                if load_v is None:
                    load_v = self.thresholded_load(v)
                self._relabel(arc, load_v, lvl_v)
            if flip_to < 0:
                if depth > stats["max_chain_inc"]:
                    stats["max_chain_inc"] = depth
                return
            v = flip_to

    def _check_dec(self, u: int) -> None:
        """Rebalance after the load of ``u`` went down by one copy.

        If some outgoing direction is labeled three or more bands above
        ``u``, one copy is pulled back in, restoring ``u`` and recursing on
        the donor; otherwise stale-high labels on incoming directions are
        refreshed, highest first.
        """
        stats = self.stats
        budget = self.budget
        lvl = self._lvl
        depth = 0
        while True:
            depth += 1
            out_map = self._out[u]
            if out_map:
                top_band, bucket = out_map.peekitem(-1)
                if lvl[u] + 3 <= top_band:
                    arc = next(iter(bucket))  # u -> v; pull one copy home
                    stats["arcs_dec"] += 1
                    stats["flips"] += 1
                    v = arc.head
                    self._drop_copy(arc)
                    self._dec_load(v)
                    twin = arc.twin
                    twin.count += 1
                    self._copies += 1
                    self._inc_load(u)
                    self._relabel(twin, self.thresholded_load(u), lvl[u])
                    u = v
                    continue
            in_map = self._in[u]
            lvl_u = lvl[u]
            load_u = None
            for _ in range(budget):
                if not in_map:
                    break
                _, bucket = in_map.peekitem(-1)
                arc = next(iter(bucket))
                stats["arcs_dec"] += 1
                if arc.label_level < lvl_u + 2:
                    break
                stats["label_resets"] += 1
                if load_u is None:
                    load_u = self.thresholded_load(u)
                self._relabel(arc, load_u, lvl_u)
            if depth > stats["max_chain_dec"]:
                stats["max_chain_dec"] = depth
            return

    # ------------------------------------------------------------------
    # diagnostics

    def force_label(self, tail: int, head: int, value: float) -> None:
        """Overwrite the label of a live direction.  Testing only: this can
        plant states the update rules would never produce."""
        key = (tail, head) if tail < head else (head, tail)
        pair = self._pairs.get(key)
        if pair is None:
            raise ValueError(f"no edge between {tail} and {head}")
        arc = pair if pair.tail == tail else pair.twin
        if arc.count == 0:
            raise ValueError(f"direction {tail}->{head} has no copies")
        self._relabel(arc, value, self.params.level_of(value))

    def debug_audit(self) -> None:
        """Cross-check every redundant structure; raises AssertionError."""
        n = self.config.n
        ind = [0] * n
        copies = 0
        for pair in self._pairs.values():
            assert pair.count > 0 or pair.twin.count > 0, "dead pair retained"
            for a in (pair, pair.twin):
                ind[a.head] += a.count
                copies += a.count
                if a.count > 0:
                    assert a.placed, "live arc missing from structures"
                    assert a in self._in[a.head][a.label]
                    assert a in self._out[a.tail][a.label_level]
                    expect = self.params.level_of(a.label)
                    assert a.label_level == expect, (
                        f"label level drift: {a.label_level} vs {expect}"
                    )
                else:
                    assert not a.placed, "dead arc left in structures"
        assert copies == self._copies, "copy counter drift"
        for v in range(n):
            assert ind[v] == self._ind[v], f"indeg drift at {v}"
            kcap = self._kcap[v]
            if kcap is not None and self._ind[v] >= kcap:
                expect = self._cap_level
            else:
                expect = self.params.level_of_ratio(self._ind[v], self._w[v])
            assert self._lvl[v] == expect, f"cached level drift at {v}"
            assert v in self._layers[self._lvl[v]], f"layer bucket drift at {v}"
        for level, members in self._layers.items():
            assert members, f"empty layer bucket {level} retained"
            wsum = math.fsum(self._w[v] for v in members)
            assert abs(wsum - self._layer_w[level]) < 1e-6, "layer weight drift"
        assert self._top == max(self._layers), "top layer drift"
        for v in range(n):
            for label, bucket in self._in[v].items():
                for a in bucket:
                    assert a.head == v and a.count > 0 and a.label == label
            for band, bucket in self._out[v].items():
                for a in bucket:
                    assert a.tail == v and a.count > 0 and a.label_level == band
