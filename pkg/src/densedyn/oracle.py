"""Brute-force ground truth for small graphs.

Exhaustive maximization of undirected weighted density ``|E(S)| / w(S)`` and
directed density ``|E(S,T)| / sqrt(|S||T|)``, plus the doubled-graph
construction that converts the directed problem into a vertex-weighted
undirected one.  Everything here is deliberately independent of the dynamic
data structures: densities are compared in exact integer/rational arithmetic
so tests never argue with floating point.

Only intended for desk-scale instances (see the caps); used by tests and the
CLI verify/oracle commands.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

UNDIRECTED_CAP = 16
DIRECTED_CAP = 8

# Relative float slack under which two candidate densities are re-compared
# exactly before declaring a maximizer.
_NEAR_TIE = 1e-9


@dataclass
class SmallGraph:
    """Vertex-weighted graph with an edge multiset, undirected or directed.

    Weights default to 1 and are kept as exact rationals.  Directed edges are
    ordered pairs; undirected edges are stored with endpoints sorted.
    """

    n: int
    directed: bool = False
    weights: list[Fraction] | None = None
    edges: Counter = field(default_factory=Counter)

    def __post_init__(self):
        if self.weights is None:
            self.weights = [Fraction(1)] * self.n
        if len(self.weights) != self.n:
            raise ValueError("weights length must match vertex count")

    def _key(self, u: int, v: int) -> tuple[int, int]:
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"vertex out of range: ({u}, {v})")
        if u == v:
            raise ValueError(f"self-loop ({u}, {v}) not allowed")
        if not self.directed and u > v:
            u, v = v, u
        return (u, v)

    def add_edge(self, u: int, v: int, mult: int = 1):
        self.edges[self._key(u, v)] += mult

    def remove_edge(self, u: int, v: int, mult: int = 1):
        key = self._key(u, v)
        if self.edges[key] < mult:
            raise ValueError(f"removing absent edge {key}")
        self.edges[key] -= mult
        if self.edges[key] == 0:
            del self.edges[key]

    def edge_count(self) -> int:
        return sum(self.edges.values())


def _subset_bits(n: int) -> np.ndarray:
    """(n, 2^n) matrix whose column m is the indicator vector of mask m."""
    masks = np.arange(1 << n, dtype=np.int64)
    return ((masks[None, :] >> np.arange(n, dtype=np.int64)[:, None]) & 1).astype(
        np.int64
    )


def _mask_vertices(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if (mask >> i) & 1)


def exact_vwdsg(g: SmallGraph, cap: int = UNDIRECTED_CAP) -> tuple[float, set[int]]:
    """Maximize ``|E(S)| / w(S)`` over all nonempty subsets.

    Returns the optimum density and the lexicographically smallest witness
    (by sorted vertex tuple) among exact maximizers.
    """
    if g.directed:
        raise ValueError("exact_vwdsg expects an undirected graph")
    if g.n > cap:
        raise ValueError(f"vertex count {g.n} exceeds brute-force cap {cap}")
    if g.n == 0:
        return 0.0, set()

    # Scale weights to a common denominator so all comparisons are integral.
    den = math.lcm(*(w.denominator for w in g.weights))
    w_int = np.array([int(w * den) for w in g.weights], dtype=np.int64)

    bits = _subset_bits(g.n)
    wsum = w_int @ bits
    esum = np.zeros(1 << g.n, dtype=np.int64)
    for (u, v), mult in g.edges.items():
        esum += mult * (bits[u] & bits[v])

    # float pass for the bulk, exact integer pass over near-ties
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.where(wsum > 0, esum / np.maximum(wsum, 1), 0.0)
    best = dens.max()
    cand = np.nonzero(dens >= best - _NEAR_TIE * (abs(best) + 1))[0]

    best_e, best_w, best_vs = -1, 1, ()
    for m in cand:
        m = int(m)
        if m == 0:
            continue
        e, w = int(esum[m]), int(wsum[m])
        cmp = e * best_w - best_e * w
        if cmp > 0:
            best_e, best_w, best_vs = e, w, _mask_vertices(m)
        elif cmp == 0:
            vs = _mask_vertices(m)
            if vs < best_vs:
                best_vs = vs
    density = Fraction(best_e * den, best_w) if best_w else Fraction(0)
    return float(density), set(best_vs)


def exact_vwdsg_density(g: SmallGraph, cap: int = UNDIRECTED_CAP) -> Fraction:
    """Exact rational optimum of ``|E(S)| / w(S)``."""
    density, witness = exact_vwdsg(g, cap=cap)
    e = sum(m for (u, v), m in g.edges.items() if u in witness and v in witness)
    w = sum(g.weights[v] for v in witness)
    return Fraction(e, 1) / w if w else Fraction(0)


def exact_ddsg(
    g: SmallGraph, cap: int = DIRECTED_CAP
) -> tuple[float, set[int], set[int]]:
    """Maximize ``|E(S,T)| / sqrt(|S||T|)`` over all nonempty pairs.

    ``S`` and ``T`` may overlap.  The witness is the lexicographically
    smallest ``(sorted(S), sorted(T))`` among exact maximizers.
    """
    e, s_mask, t_mask = _ddsg_profile(g, cap)
    if e == 0:
        return 0.0, set(_mask_vertices(s_mask)), set(_mask_vertices(t_mask))
    s, t = _mask_vertices(s_mask), _mask_vertices(t_mask)
    return e / math.sqrt(len(s) * len(t)), set(s), set(t)


def exact_ddsg_density_squared(g: SmallGraph, cap: int = DIRECTED_CAP) -> Fraction:
    """Exact square of the optimum directed density."""
    e, s_mask, t_mask = _ddsg_profile(g, cap)
    if e == 0:
        return Fraction(0)
    return Fraction(e * e, bin(s_mask).count("1") * bin(t_mask).count("1"))


def _ddsg_profile(g: SmallGraph, cap: int) -> tuple[int, int, int]:
    if not g.directed:
        raise ValueError("exact_ddsg expects a directed graph")
    if g.n > cap:
        raise ValueError(f"vertex count {g.n} exceeds brute-force cap {cap}")
    if g.n == 0 or not g.edges:
        return 0, 1 if g.n else 0, 1 if g.n else 0

    mult = np.zeros((g.n, g.n), dtype=np.int64)
    for (u, v), m in g.edges.items():
        mult[u, v] = m
    bits = _subset_bits(g.n)
    # edge_cnt[s, t] = number of edge copies from mask s into mask t
    into_t = mult @ bits                    # (n, 2^n)
    edge_cnt = bits.T @ into_t              # (2^n, 2^n)
    sizes = bits.sum(axis=0)

    size_s = np.maximum(sizes[:, None], 1)
    size_t = np.maximum(sizes[None, :], 1)
    dens_sq = (edge_cnt.astype(np.float64) ** 2) / (size_s * size_t)
    dens_sq[0, :] = -1.0
    dens_sq[:, 0] = -1.0
    best = dens_sq.max()
    cand_s, cand_t = np.nonzero(dens_sq >= best - _NEAR_TIE * (best + 1))

    best_profile = None
    for sm, tm in zip(cand_s.tolist(), cand_t.tolist()):
        e = int(edge_cnt[sm, tm])
        ssz, tsz = int(sizes[sm]), int(sizes[tm])
        if best_profile is None:
            best_profile = (e, sm, tm)
            continue
        # exact comparison: e^2 / (ssz * tsz) vs current best
        be, bsm, btm = best_profile
        cmp = e * e * bin(bsm).count("1") * bin(btm).count("1") - be * be * ssz * tsz
        if cmp > 0:
            best_profile = (e, sm, tm)
        elif cmp == 0:
            cur = (_mask_vertices(sm), _mask_vertices(tm))
            old = (_mask_vertices(bsm), _mask_vertices(btm))
            if cur < old:
                best_profile = (e, sm, tm)
    return best_profile


def doubled_graph(g: SmallGraph, t: float) -> SmallGraph:
    """Bipartite undirected view of a directed graph for side-ratio guess ``t``.

    Left copies keep the original ids, right copies are offset by ``n``; a
    directed edge (u, v) becomes the undirected edge {u, n + v}.  Left weight
    is 1/(2t), right weight is t/2.
    """
    t = Fraction(t).limit_denominator(10**12) if not isinstance(t, Fraction) else t
    return _doubled(g, left_w=1 / (2 * t), right_w=t / 2)


def _doubled(g: SmallGraph, left_w: Fraction, right_w: Fraction) -> SmallGraph:
    if not g.directed:
        raise ValueError("doubled_graph expects a directed graph")
    out = SmallGraph(
        n=2 * g.n, directed=False, weights=[left_w] * g.n + [right_w] * g.n
    )
    for (u, v), m in g.edges.items():
        out.add_edge(u, g.n + v, m)
    return out


def exact_reduced(g: SmallGraph, t: float, cap: int = UNDIRECTED_CAP) -> float:
    """Optimum weighted density of the doubled graph at guess ``t``."""
    if isinstance(t, Fraction):
        t_squared = t * t
    else:
        t_squared = Fraction(t * t).limit_denominator(10**12)
    e, a_left, a_right = _best_reduced(g, t_squared, cap)
    if e == 0:
        return 0.0
    tf = float(t)
    return e / ((a_left / tf + a_right * tf) / 2.0)


def exact_reduced_density_squared(
    g: SmallGraph, t_squared: Fraction, cap: int = UNDIRECTED_CAP
) -> Fraction:
    """Exact square of the doubled-graph optimum, parameterized by ``t**2``.

    Keeping ``t**2`` rational (grid guesses have rational squares) makes the
    reduction checks exact even though ``t`` itself is irrational.
    """
    e, a_left, a_right = _best_reduced(g, t_squared, cap)
    if e == 0:
        return Fraction(0)
    # density = e / ((a_left / t + a_right * t) / 2)
    # density^2 = 4 e^2 t^2 / (a_left + a_right t^2)^2
    p, q = t_squared.numerator, t_squared.denominator
    return Fraction(4 * e * e * p * q, (a_left * q + a_right * p) ** 2)


def _best_reduced(
    g: SmallGraph, t_squared: Fraction, cap: int
) -> tuple[int, int, int]:
    """Maximizer profile (edges, left-size, right-size) of the doubled graph.

    Density order for fixed ``t``:  E1/w(S1) >= E2/w(S2)  iff
    E1*(aL2*q + aR2*p) >= E2*(aL1*q + aR1*p)  with t^2 = p/q, since
    w(S) = (aL/t + aR*t)/2.  Integer arithmetic throughout.
    """
    if not g.directed:
        raise ValueError("reduction expects a directed graph")
    if 2 * g.n > cap:
        raise ValueError(f"doubled vertex count {2 * g.n} exceeds cap {cap}")
    if not g.edges:
        return (0, 1, 0)
    p, q = t_squared.numerator, t_squared.denominator

    mult = np.zeros((g.n, g.n), dtype=np.int64)
    for (u, v), m in g.edges.items():
        mult[u, v] = m
    bits = _subset_bits(g.n)
    into_t = mult @ bits
    edge_cnt = bits.T @ into_t
    sizes = bits.sum(axis=0)

    # float pre-pass over all (S_left, T_right) pairs; exact pass follows
    pf, qf = float(p), float(q)
    wval = sizes[:, None] * qf + sizes[None, :] * pf
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.where(wval > 0, edge_cnt / np.maximum(wval, 1e-300), -1.0)
    best = dens.max()
    cand_s, cand_t = np.nonzero(dens >= best - _NEAR_TIE * (abs(best) + 1))

    best_profile = (0, 1, 0)
    for sm, tm in zip(cand_s.tolist(), cand_t.tolist()):
        e = int(edge_cnt[sm, tm])
        al, ar = int(sizes[sm]), int(sizes[tm])
        be, bal, bar = best_profile
        cmp = e * (bal * q + bar * p) - be * (al * q + ar * p)
        if cmp > 0 or (cmp == 0 and e > be):
            best_profile = (e, al, ar)
    return best_profile


def reduction_grid_squared(n: int, eps: Fraction) -> list[Fraction]:
    """Squares of the geometric guess grid spanning [1/sqrt(n), sqrt(n)].

    Entries are ``(1+eps)^(2j) / n`` while below ``n``, with ``n`` (the square
    of the clamped top guess) appended exactly.
    """
    if n < 1:
        raise ValueError("n must be positive")
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    step = (1 + eps) ** 2
    out = [Fraction(1, n)]
    while out[-1] * step < n:
        out.append(out[-1] * step)
    if out[-1] != n:
        out.append(Fraction(n))
    return out


def check_alpha_beta_optimality(
    loads: dict[int, float],
    arcs: list[tuple[int, int, int]],
    alpha: float,
    beta: float,
    tol: float = 1e-9,
) -> bool:
    """True iff every live arc (tail, head, count) satisfies
    ``load(head) <= (1 + alpha) * load(tail) + beta``."""
    for tail, head, count in arcs:
        if count <= 0:
            continue
        if loads[head] > (1.0 + alpha) * loads[tail] + beta + tol:
            return False
    return True
