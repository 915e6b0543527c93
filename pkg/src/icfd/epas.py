"""Approximation scheme for envy-free incomplete connected fair division.

The search runs over bucket profiles ``(coloring, assignment, levels)``:

* a coloring of the vertices with ``p`` colors (from a coloring provider),
* an assignment of each color to the agent that will own that color's vertex,
* levels ``L[i][c]`` in ``[0, t]`` guessing how many powers of ``q`` separate
  agent ``i``'s own bundle value from the vertex of color ``c``.

For each profile a target vector ``mu`` starts at ``ceil_log(q, p*M)`` for
every agent and is lowered agent by agent until the per-profile subroutine
returns an allocation or some target falls to ``-2``.

Colors are 0-based here (``0..p-1``) and agents are referred to by their
index in ``Instance.agents`` inside profiles.
"""

from __future__ import annotations

import itertools
import logging
import math
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional, Sequence, Union

from .core import (
    MANDATORY,
    Allocation,
    Instance,
    InstanceError,
    VerificationReport,
    agent_types,
    validate_instance,
    verify,
)
from .motif import GuardExceeded, feasible_color_sets, solve_indexed
from .numerics import ApproxParams, RationalLike, ceil_log, mu_init, parse_rational

log = logging.getLogger(__name__)

EXHAUSTIVE = "exhaustive"
RANDOMIZED = "randomized"
COLORING_GUARD = int(os.environ.get("ICFD_COLORING_GUARD", 10**7))

NO_EF_STATEMENT = "no valid and envy-free allocation exists"


# ---------------------------------------------------------------------------
# agent-count reduction


@dataclass(frozen=True)
class ReductionBackMap:
    """Reduced agents keep their ids, so the map back to the original is the identity
    on ``kept``; ``dropped`` agents receive empty bundles when lifting."""

    kept: tuple[str, ...]
    dropped: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"kept": {a: a for a in self.kept}, "dropped": list(self.dropped)}


def reduce_agents(inst: Instance) -> tuple[Instance, ReductionBackMap]:
    """Keep at most ``p + 1`` agents of each type (the first ones in agent order)."""
    cap = inst.p + 1
    keep: set[str] = set()
    for group in agent_types(inst):
        keep.update(group[:cap])
    kept = tuple(a for a in inst.agents if a in keep)
    dropped = tuple(a for a in inst.agents if a not in keep)
    if not dropped:
        return inst, ReductionBackMap(kept, ())
    return inst.with_agents(kept), ReductionBackMap(kept, dropped)


def lift_allocation(back: ReductionBackMap, alloc: Allocation) -> Allocation:
    unknown = set(alloc.bundles) - set(back.kept)
    if unknown:
        raise InstanceError(f"allocation references agents outside the reduced instance: {sorted(unknown)}")
    bundles = {a: alloc.bundle(a) for a in back.kept}
    bundles.update({a: frozenset() for a in back.dropped})
    return Allocation.of(bundles)


# ---------------------------------------------------------------------------
# coloring providers


def colorings(
    m: int,
    p: int,
    mode: str = EXHAUSTIVE,
    trials: int = 100,
    seed: int = 0,
    guard: int | None = None,
) -> Iterator[tuple[int, ...]]:
    """Functions from ``m`` vertex positions to ``p`` colors.

    Exhaustive mode yields all ``p**m`` of them in lexicographic order (which
    trivially contains a perfect hash family); randomized mode yields
    ``trials`` uniform colorings drawn from ``random.Random(seed)``.
    """
    if mode == EXHAUSTIVE:
        guard = COLORING_GUARD if guard is None else guard
        if p**m > guard:
            raise GuardExceeded(f"{p}^{m} colorings exceed guard {guard}")
        return itertools.product(range(p), repeat=m)
    if mode == RANDOMIZED:
        if trials < 1:
            raise ValueError("randomized colorings need trials >= 1")
        rng = random.Random(seed)
        return (tuple(rng.randrange(p) for _ in range(m)) for _ in range(trials))
    raise ValueError(f"unknown coloring mode {mode!r}")


def miss_probability(p: int, trials: int) -> float:
    """Chance that ``trials`` random colorings all fail to be injective on a fixed p-set."""
    if p <= 1:
        return 0.0
    return (1 - math.factorial(p) / p**p) ** trials


def _is_canonical(coloring: Sequence[int]) -> bool:
    nxt = 0
    for c in coloring:
        if c > nxt:
            return False
        if c == nxt:
            nxt += 1
    return True


def _canonical_form(coloring: Sequence[int]) -> tuple[int, ...]:
    relabel: dict[int, int] = {}
    return tuple(relabel.setdefault(c, len(relabel)) for c in coloring)


# ---------------------------------------------------------------------------
# bucket profiles


@dataclass(frozen=True)
class BucketProfile:
    coloring: tuple[int, ...]  # vertex index -> color
    assignment: tuple[int, ...]  # color -> agent index
    levels: tuple[tuple[int, ...], ...]  # [agent][color], t wherever the agent owns the color

    def owned(self, agent: int) -> list[int]:
        return [c for c, a in enumerate(self.assignment) if a == agent]

    def to_dict(self, inst: Instance) -> dict:
        return {
            "coloring": {v: self.coloring[i] for i, v in enumerate(inst.vertices)},
            "assignment": [inst.agents[a] for a in self.assignment],
            "levels": {inst.agents[i]: list(row) for i, row in enumerate(self.levels)},
        }


def _block_ok(values: Sequence[int], neg_powers: Sequence[Fraction], q: Fraction, t: int) -> bool:
    return sum(neg_powers[x] for x in values if x != t) <= q


def profile_is_valid(profile: BucketProfile, params: ApproxParams) -> bool:
    """For all distinct ``i, j``: sum of ``q**-L[i][c]`` over ``c`` owned by ``j`` with
    ``L[i][c] != t`` is at most ``q``."""
    neg = params.neg_powers()
    n = len(profile.levels)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            vals = [profile.levels[i][c] for c in profile.owned(j)]
            if not _block_ok(vals, neg, params.q, params.t):
                return False
    return True


@lru_cache(maxsize=None)
def _valid_blocks(size: int, q: Fraction, t: int) -> tuple[tuple[int, ...], ...]:
    neg = ApproxParams(q - 1, q - 1, q, t).neg_powers()
    return tuple(
        vals
        for vals in itertools.product(range(t + 1), repeat=size)
        if _block_ok(vals, neg, q, t)
    )


@lru_cache(maxsize=None)
def _minimal_blocks(size: int, q: Fraction, t: int) -> tuple[tuple[int, ...], ...]:
    """Minimal elements of the valid level vectors for one (agent, owner) block.

    Validity is upward closed, so a vector is minimal iff lowering any single
    coordinate by one breaks it.
    """
    valid = set(_valid_blocks(size, q, t))
    out = []
    for vals in sorted(valid):
        if all(
            vals[k] == 0 or vals[:k] + (vals[k] - 1,) + vals[k + 1 :] not in valid
            for k in range(size)
        ):
            out.append(vals)
    return tuple(out)


def _assignments(n: int, p: int, mandatory: bool) -> Iterator[tuple[int, ...]]:
    for assignment in itertools.product(range(n), repeat=p):
        if mandatory and len(set(assignment)) < n:
            continue
        yield assignment


def _level_tables(
    n: int, assignment: tuple[int, ...], params: ApproxParams, minimal: bool
) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Level tables for one assignment, canonicalized to ``t`` on owned colors."""
    t, q = params.t, params.q
    p = len(assignment)
    owned = [[c for c in range(p) if assignment[c] == j] for j in range(n)]
    blocks = [(i, j) for i in range(n) for j in range(n) if i != j and owned[j]]
    if minimal:
        choices = [_minimal_blocks(len(owned[j]), q, t) for i, j in blocks]
        for combo in itertools.product(*choices):
            levels = [[t] * p for _ in range(n)]
            for (i, j), vals in zip(blocks, combo):
                for c, x in zip(owned[j], vals):
                    levels[i][c] = x
            yield tuple(tuple(r) for r in levels)
        return
    # lexicographic over free (agent, color) positions, then filtered
    free = [(i, c) for i in range(n) for c in range(p) if assignment[c] != i]
    neg = params.neg_powers()
    for vals in itertools.product(range(t + 1), repeat=len(free)):
        levels = [[t] * p for _ in range(n)]
        for (i, c), x in zip(free, vals):
            levels[i][c] = x
        if all(
            _block_ok([levels[i][c] for c in owned[j]], neg, q, t) for i, j in blocks
        ):
            yield tuple(tuple(r) for r in levels)


def enumerate_profiles(
    inst: Instance,
    params: ApproxParams,
    coloring: Sequence[int],
    minimal: bool = False,
) -> Iterator[BucketProfile]:
    """All valid bucket profiles over ``coloring``.

    With ``minimal=True`` only the pointwise-minimal level tables are produced;
    smaller levels make every vertex at least as eligible, so a minimal table
    succeeds whenever any table above it does.
    """
    coloring = tuple(coloring)
    if len(coloring) != inst.m:
        raise ValueError("coloring length must equal the number of vertices")
    for assignment in _assignments(inst.n, inst.p, inst.mandatory):
        for levels in _level_tables(inst.n, assignment, params, minimal):
            yield BucketProfile(coloring, assignment, levels)


# ---------------------------------------------------------------------------
# subroutine


class _Context:
    """Per-solve precomputation over a (reduced) instance."""

    def __init__(self, inst: Instance, params: ApproxParams):
        self.inst = inst
        self.params = params
        self.q = params.q
        self.nbr = inst.neighbor_masks
        self.rows = inst.rows
        self.clog = [[ceil_log(params.q, x) for x in row] for row in inst.rows]
        self.mu0 = mu_init(inst.p, inst.max_value, params.q)
        self._clog_cache: dict[int, int] = {}
        self.motif_cache: dict = {}
        self.motif_solves = 0

    def clog_of(self, x: int) -> int:
        got = self._clog_cache.get(x)
        if got is None:
            got = self._clog_cache[x] = ceil_log(self.q, x)
        return got

    def set_coloring(self, coloring: Sequence[int]):
        p = self.inst.p
        classes: list[list[int]] = [[] for _ in range(p)]
        for v, c in enumerate(coloring):
            classes[c].append(v)
        self.classes = classes
        self.motif_cache = {}

    def eligible_mask(self, profile: BucketProfile, mu: Sequence[int]) -> int:
        n = len(self.rows)
        mask = 0
        for v, c in enumerate(profile.coloring):
            owner = profile.assignment[c]
            ok = True
            for i in range(n):
                if i == owner:
                    continue
                if self.rows[i][v] and self.clog[i][v] > mu[i] - profile.levels[i][c]:
                    ok = False
                    break
            if ok:
                mask |= 1 << v
        return mask

    def best_for(self, agent: int, owned: Sequence[int], elig: int):
        """Max-weight colorful connected subgraph of the agent's eligible graph."""
        if not owned:
            return [], 0
        classes = [[v for v in self.classes[c] if elig >> v & 1] for c in owned]
        key = (agent, tuple(owned), tuple(tuple(c) for c in classes))
        if key in self.motif_cache:
            return self.motif_cache[key]
        self.motif_solves += 1
        res = solve_indexed(self.nbr, self.rows[agent], classes)
        self.motif_cache[key] = res
        return res

    def run(self, profile: BucketProfile, mu: Sequence[int]):
        """Either ``(bundles, None, None)`` or ``(None, failing_agent, its_best_weight)``."""
        elig = self.eligible_mask(profile, mu)
        bundles = []
        for i in range(len(self.rows)):
            res = self.best_for(i, profile.owned(i), elig)
            if res is None:
                return None, i, None
            chosen, weight = res
            if self.clog_of(weight) < mu[i]:
                return None, i, weight
            bundles.append(chosen)
        return bundles, None, None

    def to_allocation(self, bundles) -> Allocation:
        vs = self.inst.vertices
        return Allocation.of(
            {a: [vs[x] for x in b] for a, b in zip(self.inst.agents, bundles)}
        )


def _check_mu(inst: Instance, mu) -> list[int]:
    if isinstance(mu, dict):
        return [mu[a] for a in inst.agents]
    return list(mu)


def eligible(
    v: str, profile: BucketProfile, mu, inst: Instance, params: ApproxParams
) -> bool:
    """Whether ``v`` is cheap enough for every agent not owning its color.

    ``mu`` is a sequence in agent order or a mapping agent -> target.
    """
    mu = _check_mu(inst, mu)
    vi = inst.vertex_index[v]
    c = profile.coloring[vi]
    for i in range(inst.n):
        if profile.assignment[c] == i:
            continue
        u = inst.rows[i][vi]
        if u and ceil_log(params.q, u) > mu[i] - profile.levels[i][c]:
            return False
    return True


def subroutine(
    inst: Instance, params: ApproxParams, profile: BucketProfile, mu
) -> Union[Allocation, str]:
    """One subroutine call: an allocation, or the id of an agent that cannot reach its target."""
    ctx = _Context(inst, params)
    ctx.set_coloring(profile.coloring)
    bundles, agent, _ = ctx.run(profile, _check_mu(inst, mu))
    if bundles is not None:
        return ctx.to_allocation(bundles)
    return inst.agents[agent]


# ---------------------------------------------------------------------------
# main loop


@dataclass
class SearchStats:
    colorings: int = 0  # drawn from the provider
    colorings_searched: int = 0  # after symmetry/empty-class skipping
    assignments: int = 0
    profiles: int = 0
    subroutine_calls: int = 0
    motif_solves: int = 0
    max_calls_per_profile: int = 0
    seconds: float = 0.0

    def merge(self, other: "SearchStats"):
        for name in ("colorings", "colorings_searched", "assignments", "profiles",
                     "subroutine_calls", "motif_solves"):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        self.max_calls_per_profile = max(self.max_calls_per_profile, other.max_calls_per_profile)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SolveOutcome:
    allocation: Optional[Allocation] = None
    report: Optional[VerificationReport] = None
    certificate: Optional[dict] = None
    params: Optional[ApproxParams] = None
    stats: SearchStats = field(default_factory=SearchStats)
    profile: Optional[BucketProfile] = None
    target: Optional[tuple[int, ...]] = None

    @property
    def found(self) -> bool:
        return self.allocation is not None

    def to_dict(self, inst: Instance) -> dict:
        out: dict = {"found": self.found, "stats": self.stats.to_dict()}
        if self.params is not None:
            out["params"] = self.params.to_dict()
        if self.found:
            out["allocation"] = self.allocation.to_dict(inst)["bundles"]
            out["report"] = self.report.to_dict()
        else:
            out["certificate"] = self.certificate
        return out


@dataclass(frozen=True)
class SearchOptions:
    minimal_levels: bool = True
    jump_descent: bool = True
    skip_symmetric: bool = True
    prune_infeasible: bool = True

    @classmethod
    def literal(cls) -> "SearchOptions":
        """Every coloring, every valid level table, unit target decrements."""
        return cls(False, False, False, False)


def _search_coloring(ctx: _Context, coloring, opts: SearchOptions, stats: SearchStats):
    inst = ctx.inst
    n, p = inst.n, inst.p
    ctx.set_coloring(coloring)
    stats.colorings_searched += 1
    feasible = feasible_color_sets(ctx.nbr, ctx.classes) if opts.prune_infeasible else None
    q = ctx.params.q
    for assignment in _assignments(n, p, inst.mandatory):
        # an agent whose color set has no colorful connected subgraph fails at every target
        masks = [0] * n
        for c, a in enumerate(assignment):
            masks[a] |= 1 << c
        if opts.prune_infeasible and any(mk not in feasible for mk in masks):
            continue
        stats.assignments += 1
        for levels in _level_tables(n, assignment, ctx.params, opts.minimal_levels):
            profile = BucketProfile(tuple(coloring), assignment, levels)
            stats.profiles += 1
            mu = [ctx.mu0] * n
            calls = 0
            while True:
                calls += 1
                bundles, agent, weight = ctx.run(profile, mu)
                if bundles is not None:
                    stats.subroutine_calls += calls
                    stats.max_calls_per_profile = max(stats.max_calls_per_profile, calls)
                    return bundles, profile, tuple(mu)
                if not opts.jump_descent:
                    mu[agent] -= 1
                elif weight is None:
                    mu[agent] = -2
                else:
                    mu[agent] = min(mu[agent] - 1, ceil_log(q, weight))
                if mu[agent] <= -2:
                    break
            stats.subroutine_calls += calls
            stats.max_calls_per_profile = max(stats.max_calls_per_profile, calls)
    return None


def _search_stream(ctx: _Context, stream, opts: SearchOptions, mode: str, stats: SearchStats):
    seen: set[tuple[int, ...]] = set()
    p = ctx.inst.p
    for coloring in stream:
        stats.colorings += 1
        if opts.skip_symmetric:
            # a color class left empty makes its owner fail at every target
            if len(set(coloring)) < p:
                continue
            if mode == EXHAUSTIVE:
                if not _is_canonical(coloring):
                    continue
            else:
                coloring = _canonical_form(coloring)
                if coloring in seen:
                    continue
                seen.add(coloring)
        hit = _search_coloring(ctx, coloring, opts, stats)
        if hit is not None:
            return hit
    return None


def _worker(args):
    inst_dict, params, chunk, opts, mode = args
    inst = validate_instance(inst_dict)
    ctx = _Context(inst, params)
    stats = SearchStats()
    hit = _search_stream(ctx, chunk, opts, mode, stats)
    stats.motif_solves = ctx.motif_solves
    return hit, stats


def _chunks(stream, size):
    it = iter(stream)
    while True:
        chunk = list(itertools.islice(it, size))
        if not chunk:
            return
        yield chunk


def _parallel_search(ctx, stream, opts, mode, threads, stats):
    # randomized-mode dedup only spans one chunk here; duplicates are re-searched
    inst_dict = ctx.inst.to_dict()
    with ProcessPoolExecutor(max_workers=threads) as pool:
        pending = []
        chunks = _chunks(stream, 64)
        exhausted = False
        while True:
            while not exhausted and len(pending) < 2 * threads:
                chunk = next(chunks, None)
                if chunk is None:
                    exhausted = True
                    break
                pending.append(
                    pool.submit(_worker, (inst_dict, ctx.params, chunk, opts, mode))
                )
            if not pending:
                return None
            hit, sub = pending.pop(0).result()
            stats.merge(sub)
            if hit is not None:
                for f in pending:
                    f.cancel()
                return hit


def _no_certificate(mode: str, trials: int, seed: int, p: int, reason: str) -> dict:
    cert = {
        "statement": NO_EF_STATEMENT,
        "reason": reason,
        "colorings_mode": mode,
        "probabilistic": mode == RANDOMIZED and reason == "search exhausted",
    }
    if mode == RANDOMIZED:
        cert["trials"] = trials
        cert["seed"] = seed
        cert["miss_probability_bound"] = miss_probability(p, trials)
    return cert


def solve_epas(
    inst: Instance,
    eps: RationalLike,
    *,
    eps_prime: RationalLike | None = None,
    mode: str = EXHAUSTIVE,
    trials: int = 100,
    seed: int = 0,
    threads: int = 1,
    guard: int | None = None,
    options: SearchOptions = SearchOptions(),
) -> SolveOutcome:
    """Return a valid eps-envy-free allocation, or a certificate that no envy-free one exists.

    With exhaustive colorings the certificate is definitive; with randomized
    colorings it may be wrong with probability at most the reported bound
    per candidate vertex set.
    """
    started = time.perf_counter()
    eps = parse_rational(eps)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    stats = SearchStats()

    def done(outcome: SolveOutcome) -> SolveOutcome:
        stats.seconds = time.perf_counter() - started
        outcome.stats = stats
        return outcome

    if inst.p == 0:
        if inst.setting == MANDATORY and inst.n > 0:
            return done(SolveOutcome(certificate=_no_certificate(mode, trials, seed, 0, "p = 0 leaves every agent empty")))
        alloc = Allocation.of({a: () for a in inst.agents})
        return done(SolveOutcome(allocation=alloc, report=verify(inst, alloc, eps)))
    if inst.setting == MANDATORY:
        if inst.n > inst.p:
            return done(SolveOutcome(certificate=_no_certificate(mode, trials, seed, inst.p, "more agents than items to allocate")))
        work, back = inst, ReductionBackMap(inst.agents, ())
    else:
        work, back = reduce_agents(inst)

    params = ApproxParams.build(eps, work.p, eps_prime)
    ctx = _Context(work, params)
    stream = colorings(work.m, work.p, mode, trials, seed, guard)
    log.debug("solve: n=%d p=%d t=%d mu0=%d", work.n, work.p, params.t, ctx.mu0)
    if threads > 1:
        hit = _parallel_search(ctx, stream, options, mode, threads, stats)
    else:
        hit = _search_stream(ctx, stream, options, mode, stats)
        stats.motif_solves = ctx.motif_solves
    if hit is None:
        out = SolveOutcome(
            certificate=_no_certificate(mode, trials, seed, work.p, "search exhausted"),
            params=params,
        )
        return done(out)
    bundles, profile, mu = hit
    alloc = lift_allocation(back, ctx.to_allocation(bundles))
    report = verify(inst, alloc, eps)
    if not (report.valid and report.eps_envy_free):
        raise AssertionError(f"solver produced an allocation failing verification: {report.to_dict()}")
    return done(SolveOutcome(alloc, report, None, params, stats, profile, mu))
