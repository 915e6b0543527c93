"""Acceptance suite: seven oracle and property checks, one PASS/FAIL line each.

The lines appear in plain ``pytest`` output; ``python3 tests/test_acceptance.py`` also works.
"""

from __future__ import annotations

import random
import sys
import time
from collections import Counter
from fractions import Fraction

import pytest

from icfd.core import Allocation, Instance, agent_types, is_eps_envy_free, is_envy_free, is_valid, verify
from icfd.epas import lift_allocation, reduce_agents, solve_epas
from icfd.exact import VectorSumInstance, iter_ef_allocations, solve_exact, solve_vector_sum
from icfd.gen import gen_random, gen_reduction, random_vector_sum
from icfd.motif import ColoredWeightedGraph, MotifCounters, brute_force_motif, max_colorful_connected
from icfd.numerics import ceil_log

pytestmark = pytest.mark.acceptance


def report(number: int, title: str, ok: bool, detail: str, seconds: float) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\n[{status}] criterion {number}: {title} ({detail}; {seconds:.1f}s)", flush=True)


def random_instance(rng: random.Random, *, max_m, max_n, max_p, max_value, setting=None, connected=None):
    m = rng.randint(1, max_m)
    n = rng.randint(1, max_n)
    return gen_random(
        m, n, rng.randint(0, min(max_p, m)), max_value,
        edge_density=rng.choice([0.0, 0.2, 0.4]),
        num_types=rng.randint(1, n),
        seed=rng.randrange(2**32),
        setting=setting or rng.choice(["optional", "mandatory"]),
        connected=rng.random() < 0.5 if connected is None else connected,
    )


# 1 ---------------------------------------------------------------------------

def criterion_oracle_sweep(count=520, seed=1001):
    rng = random.Random(seed)
    failures = []
    tally = Counter()
    for idx in range(count):
        inst = random_instance(rng, max_m=8, max_n=3, max_p=3, max_value=20,
                               setting=("optional", "mandatory")[idx % 2], connected=idx % 4 < 2)
        exact = solve_exact(inst)
        for eps in (Fraction(4), Fraction(10)):
            out = solve_epas(inst, eps)
            assert out.params is None or out.params.eps_prime in (1, 2)
            tally["yes" if out.found else "no"] += 1
            # (a) and (c) are the same implication read in both directions
            if exact is not None and not out.found:
                failures.append((idx, eps, "no-certificate on an envy-free instance"))
            if out.found and not (is_valid(inst, out.allocation) and is_eps_envy_free(inst, out.allocation, eps)):
                failures.append((idx, eps, "returned allocation fails verification"))
    return not failures, f"{count} instances x 2 eps, {tally['yes']} found / {tally['no']} none, {len(failures)} failures", failures


# 2 ---------------------------------------------------------------------------

def heavy_structure_ok(vs: VectorSumInstance, inst: Instance, alloc: Allocation) -> bool:
    for l in range(1, vs.d + 1):
        if f"a{l}" not in alloc.bundle(f"A{l}") or f"b{l}" not in alloc.bundle(f"B{l}"):
            return False
    c = alloc.bundle("C")
    return len(c) == vs.k + 1 and "c" in c


def criterion_reduction_iff(count=60, seed=2002):
    rng = random.Random(seed)
    failures = []
    tally = Counter()
    checked = 0
    for idx in range(count):
        n = rng.randint(2, 4)  # entries up to 5 need n**3 >= 5
        vs = random_vector_sum(rng, n, rng.randint(1, 2), rng.randint(1, min(2, n)), 5)
        inst = gen_reduction(vs)
        want = solve_vector_sum(vs) is not None
        allocs = list(iter_ef_allocations(inst))
        tally["solvable" if want else "unsolvable"] += 1
        if bool(allocs) != want:
            failures.append((idx, vs, "decision mismatch"))
        for alloc in allocs:
            checked += 1
            if not heavy_structure_ok(vs, inst, alloc):
                failures.append((idx, vs, f"structure broken by {alloc.bundles}"))
    detail = (f"{count} Vector-Sum instances ({tally['solvable']} solvable), "
              f"{checked} EF allocations checked, {len(failures)} failures")
    return not failures, detail, failures


# 3 ---------------------------------------------------------------------------

def random_colored_graph(rng: random.Random) -> ColoredWeightedGraph:
    size = rng.randint(1, 10)
    k = rng.randint(1, min(4, size))
    vertices = [f"u{i}" for i in range(size)]
    density = rng.choice([0.15, 0.3, 0.6])
    edges = [(vertices[i], vertices[j]) for i in range(size) for j in range(i + 1, size) if rng.random() < density]
    labels = list(range(k)) + [rng.randrange(k) for _ in range(size - k)]
    rng.shuffle(labels)
    classes = [[v for v, c in zip(vertices, labels) if c == j] for j in range(k)]
    weights = {v: rng.randint(0, 20) for v in vertices}
    return ColoredWeightedGraph.build(vertices, edges, weights, classes)


def criterion_motif(count=1000, seed=3003):
    rng = random.Random(seed)
    failures = []
    feasible = 0
    for idx in range(count):
        g = random_colored_graph(rng)
        counters = MotifCounters()
        got = max_colorful_connected(g, counters)
        want = brute_force_motif(g)
        size, k = len(g.vertices), len(g.classes)
        if (got is None) != (want is None) or (got is not None and got[1] != want[1]):
            failures.append((idx, "optimum differs"))
        if got is not None:
            feasible += 1
            chosen, weight = got
            picked = Counter(next(j for j, cls in enumerate(g.classes) if v in cls) for v in chosen)
            sub = set(chosen)
            adj = g.adjacency
            seen, stack = set(), [next(iter(sub))] if sub else []
            while stack:
                v = stack.pop()
                if v not in seen:
                    seen.add(v)
                    stack.extend(w for w in adj[v] if w in sub)
            if sorted(picked) != list(range(k)) or max(picked.values()) != 1 or seen != sub \
                    or sum(g.weight[v] for v in chosen) != weight:
                failures.append((idx, "recovered set does not re-verify"))
        if counters.entries > size * 2**k or counters.work > 3**k * size**2:
            failures.append((idx, f"counters {counters} over bound"))
    return not failures, f"{count} graphs ({feasible} feasible), {len(failures)} failures", failures


# 4 ---------------------------------------------------------------------------

def multiplication_oracle(q: Fraction, alpha: Fraction) -> int:
    if alpha <= 1:
        k, power = 0, Fraction(1)
        while power / q >= alpha:
            power /= q
            k -= 1
        return k
    k, power = 0, Fraction(1)
    while power < alpha:
        power *= q
        k += 1
    return k


def criterion_ceil_log(count=10_000, seed=4004):
    rng = random.Random(seed)
    bases = [Fraction(3, 2), Fraction(2), Fraction(3), Fraction(5, 4)]
    failures = []
    oracle_checked = 0
    for idx in range(count):
        q = bases[idx % 4]
        bits = rng.randint(1, 128)
        num = rng.randint(1, 2**bits)
        alpha = Fraction(num, rng.choice([1, 1, 1, rng.randint(1, 1000)]))
        k = ceil_log(q, alpha)
        if not (q ** (k - 1) < alpha <= q**k):
            failures.append((q, alpha, k, "sandwich"))
        if alpha <= 2**64:
            oracle_checked += 1
            if multiplication_oracle(q, alpha) != k:
                failures.append((q, alpha, k, "oracle"))
    return not failures, f"{count} pairs, {oracle_checked} against the multiplication oracle, {len(failures)} failures", failures


# 5 ---------------------------------------------------------------------------

def criterion_reduction_rule(count=110, seed=5005):
    rng = random.Random(seed)
    failures = []
    lifted_checked = 0
    done = 0
    while done < count:
        m = rng.randint(1, 6)
        p = rng.randint(0, min(3, m))
        num_types = rng.randint(1, 2)
        n = num_types * (p + 1) + rng.randint(1, 3)
        inst = gen_random(m, n, p, 10, rng.choice([0.0, 0.3, 0.6]), num_types=num_types,
                          seed=rng.randrange(2**32), connected=rng.random() < 0.5)
        if max(len(t) for t in agent_types(inst)) <= p + 1:
            continue
        done += 1
        reduced, back = reduce_agents(inst)
        if any(len(t) > p + 1 for t in agent_types(reduced)):
            failures.append((done, "type not capped"))
        a, b = solve_exact(inst), solve_exact(reduced)
        if (a is None) != (b is None):
            failures.append((done, "decision differs"))
        if b is not None:
            lifted = lift_allocation(back, b)
            lifted_checked += 1
            if not (is_valid(inst, lifted) and is_envy_free(inst, lifted)):
                failures.append((done, "lifted allocation fails"))
    return not failures, f"{count} instances, {lifted_checked} lifted allocations verified, {len(failures)} failures", failures


# 6 ---------------------------------------------------------------------------

def criterion_binary_scale(count=20, seed=6006):
    rng = random.Random(seed)
    failures = []
    found = 0
    biggest = 0
    for idx in range(count):
        m = rng.randint(1, 7)
        inst = gen_random(m, rng.randint(1, 2), rng.randint(0, min(2, m)), 2**64, rng.choice([0.2, 0.5]),
                          seed=rng.randrange(2**32), connected=rng.random() < 0.7)
        biggest = max(biggest, inst.max_value)
        out = solve_epas(inst, 10)
        exact = solve_exact(inst)
        if out.found:
            found += 1
            if not verify(inst, out.allocation, 10).ok:
                failures.append((idx, "output fails verification"))
        if exact is not None and not out.found:
            failures.append((idx, "missed an envy-free instance"))
    return not failures, f"{count} instances, largest value {biggest} ({biggest.bit_length()} bits), {found} found, {len(failures)} failures", failures


# 7 ---------------------------------------------------------------------------

def criterion_degenerate():
    from conftest import make_instance

    checks = {}
    path = (["a", "b", "c"], [("a", "b"), ("b", "c")])
    inst = make_instance(*path, {"A": [1, 2, 3], "B": [3, 2, 1]}, 0)
    out = solve_epas(inst, 4)
    checks["p=0 optional gives all-empty"] = out.found and out.allocation.allocated == frozenset() \
        and all(out.allocation.bundle(a) == frozenset() for a in inst.agents)
    inst = make_instance(*path, {"A": [1, 2, 3]}, 0, "mandatory")
    out = solve_epas(inst, 4)
    checks["p=0 mandatory gives certificate"] = not out.found and out.certificate is not None
    inst = make_instance(*path, {"A": [0, 0, 0], "B": [0, 0, 0]}, 2)
    out = solve_epas(inst, 4)
    checks["M=0 accepted"] = out.found and is_valid(inst, out.allocation) and is_envy_free(inst, out.allocation) \
        and out.stats.subroutine_calls <= 2
    inst = make_instance(*path, {"A": [1, 1, 1], "B": [1, 1, 1], "C": [1, 1, 1]}, 2, "mandatory")
    out = solve_epas(inst, 4)
    checks["mandatory n>p immediate certificate"] = not out.found and out.stats.profiles == 0 \
        and out.certificate["reason"] == "more agents than items to allocate"
    for p in range(4):
        inst = make_instance(*path, {"A": [5, 0, 7]}, p)
        out = solve_epas(inst, "1/2")
        checks[f"single agent p={p}"] = out.found and is_valid(inst, out.allocation) \
            and is_envy_free(inst, out.allocation) and solve_exact(inst) is not None
    bad = [name for name, ok in checks.items() if not ok]
    return not bad, f"{len(checks)} cases, failing: {bad or 'none'}", bad


CRITERIA = [
    (1, "oracle completeness and soundness sweep", criterion_oracle_sweep),
    (2, "hardness-reduction iff and heavy-vertex structure", criterion_reduction_iff),
    (3, "motif DP equals enumeration within counter bounds", criterion_motif),
    (4, "exact ceiling logarithm", criterion_ceil_log),
    (5, "reduction rule round-trip", criterion_reduction_rule),
    (6, "binary-scale values", criterion_binary_scale),
    (7, "degenerate cases", criterion_degenerate),
]


def run_one(number, title, fn):
    started = time.perf_counter()
    ok, detail, failures = fn()
    report(number, title, ok, detail, time.perf_counter() - started)
    return ok, failures


@pytest.mark.parametrize("number,title,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, fn, capsys):
    with capsys.disabled():
        ok, failures = run_one(number, title, fn)
    assert ok, failures[:5]


if __name__ == "__main__":
    sys.path.insert(0, str(__import__("pathlib").Path(__file__).parent))
    results = [run_one(*c)[0] for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
