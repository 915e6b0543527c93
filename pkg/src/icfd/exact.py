"""Brute-force ground truth: exact EF allocations and Vector-Sum."""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from math import comb
from typing import Iterator, Mapping, Optional, Sequence

from .core import Allocation, Instance, InstanceError
from .motif import GuardExceeded

EXACT_GUARD = int(os.environ.get("ICFD_EXACT_GUARD", 10**8))
VECTOR_SUM_GUARD = int(os.environ.get("ICFD_VECTOR_SUM_GUARD", 10**7))


def _connected_mask(nbr: Sequence[int], mask: int) -> bool:
    if not mask:
        return True
    start = mask & -mask
    seen = start
    frontier = start
    while frontier:
        low = frontier & -frontier
        frontier ^= low
        grow = nbr[low.bit_length() - 1] & mask & ~seen
        seen |= grow
        frontier |= grow
    return seen == mask


def _connected_parts(nbr: Sequence[int], mask: int, limit: int) -> Iterator[list[int]]:
    """Partitions of ``mask`` into at most ``limit`` connected blocks.

    The block holding the lowest remaining vertex is chosen first, so each
    partition appears exactly once.
    """
    if not mask:
        yield []
        return
    if limit == 0:
        return
    low = mask & -mask
    rest = mask ^ low
    # every subset of rest, joined with low, that induces a connected graph
    sub = rest
    while True:
        block = sub | low
        if _connected_mask(nbr, block):
            for tail in _connected_parts(nbr, mask ^ block, limit - 1):
                yield [block] + tail
        if sub == 0:
            break
        sub = (sub - 1) & rest


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _mask_value(row: Sequence[int], mask: int) -> int:
    total = 0
    while mask:
        low = mask & -mask
        total += row[low.bit_length() - 1]
        mask ^= low
    return total


def iter_ef_allocations(inst: Instance, guard: int | None = None) -> Iterator[Allocation]:
    """Every valid, exactly envy-free allocation, deterministic order.

    Vertex subsets of size ``p`` are taken in lexicographic order; each is
    split into connected blocks, and the blocks are handed to distinct agents
    (remaining agents get nothing, which the mandatory setting forbids).
    """
    guard = EXACT_GUARD if guard is None else guard
    n, m, p = inst.n, inst.m, inst.p
    work = comb(m, p) * n**p
    if work > guard:
        raise GuardExceeded(f"C({m},{p})*{n}^{p} = {work} exceeds guard {guard}")
    nbr = inst.neighbor_masks
    rows = inst.rows
    for subset in itertools.combinations(range(m), p):
        mask = 0
        for v in subset:
            mask |= 1 << v
        limit = n
        for parts in _connected_parts(nbr, mask, limit):
            if inst.mandatory and len(parts) != n:
                continue
            if len(parts) > n:
                continue
            # values[i][b] = u_i(part b)
            values = [[_mask_value(row, b) for b in parts] for row in rows]
            for owners in itertools.permutations(range(n), len(parts)):
                own = [0] * n
                for b, i in enumerate(owners):
                    own[i] = values[i][b]
                if all(own[i] >= max(values[i], default=0) for i in range(n)):
                    yield _to_allocation(inst, parts, owners)


def _to_allocation(inst: Instance, parts, owners) -> Allocation:
    vs = inst.vertices
    bundles = {a: [] for a in inst.agents}
    for b, i in zip(parts, owners):
        bundles[inst.agents[i]] = [vs[v] for v in range(inst.m) if b >> v & 1]
    return Allocation.of(bundles)


def solve_exact(inst: Instance, guard: int | None = None) -> Optional[Allocation]:
    """First valid envy-free allocation in enumeration order, or ``None``."""
    return next(iter_ef_allocations(inst, guard), None)


# ---------------------------------------------------------------------------
# Vector-Sum


@dataclass(frozen=True)
class VectorSumInstance:
    """Pick ``k`` of the vectors so that they sum to ``target`` exactly."""

    vectors: tuple[tuple[int, ...], ...]
    target: tuple[int, ...]
    k: int
    M: int | None = None

    @property
    def d(self) -> int:
        return len(self.target)

    @property
    def n(self) -> int:
        return len(self.vectors)

    @classmethod
    def build(cls, vectors, target, k, M=None) -> "VectorSumInstance":
        vecs = tuple(tuple(int(x) for x in v) for v in vectors)
        tgt = tuple(int(x) for x in target)
        if isinstance(k, bool) or not isinstance(k, int) or k < 1:
            raise InstanceError(f"k must be a positive integer, got {k!r}")
        if any(len(v) != len(tgt) for v in vecs):
            raise InstanceError("all vectors must have the target's dimension")
        entries = [x for v in vecs for x in v] + list(tgt)
        if any(x < 0 for x in entries):
            raise InstanceError("Vector-Sum entries must be nonnegative")
        if M is not None and any(x > k * M for x in entries):
            raise InstanceError(f"entries must lie in [0, k*M] = [0, {k * M}]")
        return cls(vecs, tgt, k, M)

    @classmethod
    def from_dict(cls, raw: Mapping) -> "VectorSumInstance":
        try:
            return cls.build(raw["vectors"], raw["target"], raw["k"], raw.get("M"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InstanceError):
                raise
            raise InstanceError(f"malformed Vector-Sum instance: {exc}") from None

    def to_dict(self) -> dict:
        out = {
            "vectors": [[str(x) for x in v] for v in self.vectors],
            "target": [str(x) for x in self.target],
            "k": self.k,
        }
        if self.M is not None:
            out["M"] = self.M
        return out


def solve_vector_sum(
    vs: VectorSumInstance, guard: int | None = None
) -> Optional[tuple[int, ...]]:
    """Lexicographically first 0-based index set of size ``k`` hitting the target."""
    guard = VECTOR_SUM_GUARD if guard is None else guard
    if comb(vs.n, vs.k) > guard:
        raise GuardExceeded(f"C({vs.n},{vs.k}) subsets exceed guard {guard}")
    for pick in itertools.combinations(range(vs.n), vs.k):
        if all(
            sum(vs.vectors[i][l] for i in pick) == vs.target[l] for l in range(vs.d)
        ):
            return pick
    return None
