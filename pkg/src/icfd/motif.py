"""Maximum-weight connected colorful subgraph via the 3^k subset dynamic program.

``F[v][S]`` is the best weight of a connected subgraph of ``G[C_S]`` that
contains ``v`` and takes exactly one vertex from each class in ``S``; it is
``None`` (standing for minus infinity) when no such subgraph exists.  Entries
are filled by increasing ``|S|`` and a split ``(S1, u)`` is stored per entry
so the optimal vertex set can be read back.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Optional, Sequence

from .core import InstanceError, _edge_key, is_connected

NEG_INF = None  # sentinel for an infeasible table entry


class GuardExceeded(RuntimeError):
    """An enumeration would exceed its configured size guard."""


@dataclass
class MotifCounters:
    entries: int = 0  # table cells (v, S) with v's class in S
    work: int = 0  # (S1, u) split candidates examined


def _submasks(mask: int):
    sub = mask
    while sub:
        yield sub
        sub = (sub - 1) & mask


def _masks_by_size(k: int) -> list[list[int]]:
    out: list[list[int]] = [[] for _ in range(k + 1)]
    for s in range(1 << k):
        out[bin(s).count("1")].append(s)
    return out


def _fill_table(neighbor_masks, weights, classes, counters):
    class_of: dict[int, int] = {}
    for ci, members in enumerate(classes):
        for v in members:
            class_of[v] = ci
    verts = sorted(class_of)
    nbrs = {v: [u for u in verts if neighbor_masks[v] >> u & 1] for v in verts}
    size = 1 << len(classes)
    table = {v: [NEG_INF] * size for v in verts}
    choice: dict[tuple[int, int], tuple[int, int]] = {}
    entries = 0
    work = 0
    for v in verts:
        table[v][1 << class_of[v]] = weights[v]
        entries += 1
    for layer in _masks_by_size(len(classes))[2:]:
        for s in layer:
            for v in verts:
                vbit = 1 << class_of[v]
                if not s & vbit:
                    continue
                entries += 1
                row_v = table[v]
                best = NEG_INF
                arg = None
                # S1 must avoid v's class, otherwise f(v, S \ S1) is -inf
                for s1 in _submasks(s ^ vbit):
                    fv = row_v[s ^ s1]
                    cands = nbrs[v]
                    work += len(cands)
                    if fv is NEG_INF:
                        continue
                    for u in cands:
                        fu = table[u][s1]
                        if fu is NEG_INF:
                            continue
                        val = fu + fv
                        if best is NEG_INF or val > best:
                            best = val
                            arg = (s1, u)
                row_v[s] = best
                if arg is not None:
                    choice[(v, s)] = arg
    if counters is not None:
        counters.entries += entries
        counters.work += work
    return verts, table, choice


def solve_indexed(
    neighbor_masks: Sequence[int],
    weights: Sequence[int],
    classes: Sequence[Sequence[int]],
    counters: MotifCounters | None = None,
) -> Optional[tuple[list[int], int]]:
    """Run the DP on integer vertex ids.

    ``neighbor_masks[v]`` is the open neighbourhood of ``v`` as a bitmask over
    the same ids; only vertices listed in ``classes`` take part.  Returns the
    chosen ids and their weight, or ``None`` if no colorful connected
    subgraph exists.
    """
    k = len(classes)
    if k == 0:
        return [], 0
    if any(len(c) == 0 for c in classes):
        return None
    verts, table, choice = _fill_table(neighbor_masks, weights, classes, counters)
    full = (1 << k) - 1
    best_v = None
    for v in verts:
        val = table[v][full]
        if val is not NEG_INF and (best_v is None or val > table[best_v][full]):
            best_v = v
    if best_v is None:
        return None

    out: list[int] = []
    stack = [(best_v, full)]
    while stack:
        v, s = stack.pop()
        if s & (s - 1) == 0:
            out.append(v)
            continue
        s1, u = choice[(v, s)]
        stack.append((u, s1))
        stack.append((v, s ^ s1))
    return sorted(out), table[best_v][full]


def feasible_color_sets(
    neighbor_masks: Sequence[int], classes: Sequence[Sequence[int]]
) -> set[int]:
    """Class subsets ``S`` (as bitmasks) admitting a connected subgraph of ``G[C_S]``
    with one vertex per class of ``S``.  Same recurrence as :func:`solve_indexed`
    with booleans in place of weights.
    """
    k = len(classes)
    class_of: dict[int, int] = {}
    for ci, members in enumerate(classes):
        for v in members:
            class_of[v] = ci
    verts = sorted(class_of)
    nbrs = {v: [u for u in verts if neighbor_masks[v] >> u & 1] for v in verts}
    size = 1 << k
    table = {v: [False] * size for v in verts}
    found = {0}
    for v in verts:
        table[v][1 << class_of[v]] = True
        found.add(1 << class_of[v])
    for layer in _masks_by_size(k)[2:]:
        for s in layer:
            for v in verts:
                vbit = 1 << class_of[v]
                if not s & vbit:
                    continue
                row_v = table[v]
                hit = False
                for s1 in _submasks(s ^ vbit):
                    if row_v[s ^ s1] and any(table[u][s1] for u in nbrs[v]):
                        hit = True
                        break
                if hit:
                    row_v[s] = True
                    found.add(s)
    return found


@dataclass(frozen=True)
class ColoredWeightedGraph:
    vertices: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    weight: Mapping[str, int]
    classes: tuple[tuple[str, ...], ...]

    @classmethod
    def build(cls, vertices, edges, weight, classes) -> "ColoredWeightedGraph":
        vertices = tuple(str(v) for v in vertices)
        if len(set(vertices)) != len(vertices):
            raise InstanceError("duplicate vertex ids")
        vset = set(vertices)
        eset = set()
        for e in edges:
            u, v = (str(x) for x in e)
            if u not in vset or v not in vset:
                raise InstanceError(f"edge to unknown vertex: {e!r}")
            if u == v:
                raise InstanceError(f"self-loop on {u!r}")
            eset.add(_edge_key(u, v))
        w = {}
        for v in vertices:
            if v not in weight:
                raise InstanceError(f"missing weight for {v!r}")
            x = int(weight[v])
            if x < 0:
                raise InstanceError(f"negative weight for {v!r}")
            w[v] = x
        seen: set[str] = set()
        parts = []
        for c in classes:
            part = tuple(str(v) for v in c)
            for v in part:
                if v not in vset:
                    raise InstanceError(f"class member {v!r} is not a vertex")
                if v in seen:
                    raise InstanceError(f"vertex {v!r} appears in two classes")
                seen.add(v)
            parts.append(part)
        if seen != vset:
            raise InstanceError(
                f"classes do not cover vertices {sorted(vset - seen)}"
            )
        return cls(vertices, frozenset(eset), MappingProxyType(w), tuple(parts))

    @classmethod
    def from_dict(cls, raw: Mapping) -> "ColoredWeightedGraph":
        try:
            return cls.build(raw["vertices"], raw.get("edges", []), raw["weights"], raw["classes"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InstanceError):
                raise
            raise InstanceError(f"malformed colored graph: {exc}") from None

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [list(e) for e in sorted(self.edges)],
            "weights": {v: str(self.weight[v]) for v in self.vertices},
            "classes": [list(c) for c in self.classes],
        }

    @property
    def adjacency(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj


def max_colorful_connected(
    g: ColoredWeightedGraph, counters: MotifCounters | None = None
) -> Optional[tuple[frozenset[str], int]]:
    """Heaviest connected vertex set with exactly one vertex per class, or ``None``."""
    idx = {v: i for i, v in enumerate(g.vertices)}
    masks = [0] * len(g.vertices)
    for u, v in g.edges:
        masks[idx[u]] |= 1 << idx[v]
        masks[idx[v]] |= 1 << idx[u]
    res = solve_indexed(
        masks,
        [g.weight[v] for v in g.vertices],
        [[idx[v] for v in c] for c in g.classes],
        counters,
    )
    if res is None:
        return None
    chosen, total = res
    return frozenset(g.vertices[i] for i in chosen), total


def brute_force_motif(
    g: ColoredWeightedGraph, guard: int = 10**6
) -> Optional[tuple[frozenset[str], int]]:
    """Enumerate every one-vertex-per-class selection (testing oracle)."""
    combos = 1
    for c in g.classes:
        combos *= len(c)
    if combos > guard:
        raise GuardExceeded(f"{combos} selections exceed guard {guard}")
    if not g.classes:
        return frozenset(), 0
    adj = g.adjacency
    best = None
    for pick in itertools.product(*g.classes):
        if not is_connected(adj, pick):
            continue
        total = sum(g.weight[v] for v in pick)
        if best is None or total > best[1]:
            best = (frozenset(pick), total)
    return best


def motif_table(g: ColoredWeightedGraph) -> dict[tuple[str, frozenset[int]], Optional[int]]:
    """The filled DP table keyed by (vertex, set of 0-based class indices); for inspection."""
    idx = {v: i for i, v in enumerate(g.vertices)}
    masks = [0] * len(g.vertices)
    for u, v in g.edges:
        masks[idx[u]] |= 1 << idx[v]
        masks[idx[v]] |= 1 << idx[u]
    k = len(g.classes)
    verts, table, _ = _fill_table(
        masks, [g.weight[v] for v in g.vertices], [[idx[v] for v in c] for c in g.classes], None
    )
    out = {}
    for v in verts:
        for s in range(1, 1 << k):
            out[(g.vertices[v], frozenset(i for i in range(k) if s >> i & 1))] = table[v][s]
    return out
