"""Instance generators: the star-graph hardness reduction, random instances, named shapes."""

from __future__ import annotations

import random

from .core import OPTIONAL, SETTINGS, Instance, InstanceError, validate_instance
from .exact import VectorSumInstance


def gen_reduction(vs: VectorSumInstance, setting: str = OPTIONAL) -> Instance:
    """Star instance that has an envy-free allocation iff ``vs`` is solvable.

    Center ``c``; leaves ``a_l``, ``b_l`` for each dimension and ``v_i`` for
    each vector; agents ``A_l``, ``B_l`` and ``C``; ``p = 2d + k + 1``.  With
    ``N = n**3``: ``A_l`` values ``v_i`` at ``N + w_i[l]``, ``c`` at ``N`` and
    ``a_l`` at ``(k+1)N + t_l``; ``B_l`` mirrors this with minus signs on
    ``b_l``; ``C`` values every vertex at 1.
    """
    n, d, k = vs.n, vs.d, vs.k
    big = n**3
    for i, w in enumerate(vs.vectors):
        for l, x in enumerate(w):
            if x > big:
                raise InstanceError(
                    f"entry w_{i + 1}[{l + 1}] = {x} exceeds n^3 = {big}; B-valuations would be negative"
                )
    for l, x in enumerate(vs.target):
        if x > (k + 1) * big:
            raise InstanceError(f"target entry {x} exceeds (k+1) n^3 = {(k + 1) * big}")
    a = [f"a{l + 1}" for l in range(d)]
    b = [f"b{l + 1}" for l in range(d)]
    v = [f"v{i + 1}" for i in range(n)]
    vertices = ["c"] + a + b + v
    edges = [["c", x] for x in a + b + v]
    vals: dict[str, dict[str, str]] = {}
    for l in range(d):
        row_a = {x: 0 for x in vertices}
        row_b = {x: 0 for x in vertices}
        row_a["c"] = row_b["c"] = big
        for i in range(n):
            row_a[v[i]] = big + vs.vectors[i][l]
            row_b[v[i]] = big - vs.vectors[i][l]
        row_a[a[l]] = (k + 1) * big + vs.target[l]
        row_b[b[l]] = (k + 1) * big - vs.target[l]
        vals[f"A{l + 1}"] = {x: str(y) for x, y in row_a.items()}
        vals[f"B{l + 1}"] = {x: str(y) for x, y in row_b.items()}
    vals["C"] = {x: "1" for x in vertices}
    agents = [f"A{l + 1}" for l in range(d)] + [f"B{l + 1}" for l in range(d)] + ["C"]
    return validate_instance(
        {
            "vertices": vertices,
            "edges": edges,
            "agents": agents,
            "valuations": vals,
            "p": 2 * d + k + 1,
            "setting": setting,
        }
    )


def gen_shape(shape: str, *dims: int) -> tuple[list[str], list[list[str]]]:
    """``star(leaves)``, ``path(length)`` or ``grid(rows, cols)`` as (vertices, edges)."""
    if shape == "star":
        if len(dims) != 1 or dims[0] < 0:
            raise ValueError("star takes one nonnegative leaf count")
        leaves = [f"l{i + 1}" for i in range(dims[0])]
        return ["c"] + leaves, [["c", x] for x in leaves]
    if shape == "path":
        if len(dims) != 1 or dims[0] < 1:
            raise ValueError("path takes one positive length")
        vs = [f"p{i + 1}" for i in range(dims[0])]
        return vs, [[vs[i], vs[i + 1]] for i in range(len(vs) - 1)]
    if shape == "grid":
        if len(dims) != 2 or min(dims) < 1:
            raise ValueError("grid takes two positive dimensions")
        r, c = dims
        name = lambda i, j: f"g{i}_{j}"  # noqa: E731
        vs = [name(i, j) for i in range(r) for j in range(c)]
        es = [[name(i, j), name(i, j + 1)] for i in range(r) for j in range(c - 1)]
        es += [[name(i, j), name(i + 1, j)] for i in range(r - 1) for j in range(c)]
        return vs, es
    raise ValueError(f"unknown shape {shape!r}")


def gen_random(
    m: int,
    n: int,
    p: int,
    max_value: int,
    edge_density: float = 0.3,
    num_types: int | None = None,
    seed: int = 0,
    setting: str = OPTIONAL,
    connected: bool = True,
) -> Instance:
    """Random instance: spanning tree plus extra edges (or pure density when
    ``connected=False``), valuations uniform on ``[0, max_value]``, agents
    grouped into ``num_types`` identical-row classes."""
    if m < 1 or n < 0 or not 0 <= p <= m:
        raise ValueError(f"need m >= 1, n >= 0, 0 <= p <= m (got m={m}, n={n}, p={p})")
    if max_value < 0 or not 0 <= edge_density <= 1:
        raise ValueError("max_value must be >= 0 and edge_density in [0, 1]")
    if setting not in SETTINGS:
        raise ValueError(f"unknown setting {setting!r}")
    num_types = n if num_types is None else num_types
    if n and not 1 <= num_types <= n:
        raise ValueError("num_types must lie in [1, n]")
    rng = random.Random(seed)
    vertices = [f"v{i + 1}" for i in range(m)]
    edges: set[tuple[int, int]] = set()
    if connected:
        for i in range(1, m):
            j = rng.randrange(i)
            edges.add((j, i))
    for i in range(m):
        for j in range(i + 1, m):
            if (i, j) not in edges and rng.random() < edge_density:
                edges.add((i, j))
    type_rows = [[rng.randint(0, max_value) for _ in range(m)] for _ in range(num_types)]
    # every type gets at least one agent
    labels = list(range(num_types)) + [rng.randrange(num_types) for _ in range(n - num_types)] if n else []
    rng.shuffle(labels)
    agents = [f"A{i + 1}" for i in range(n)]
    vals = {
        a: {v: str(x) for v, x in zip(vertices, type_rows[t])} for a, t in zip(agents, labels)
    }
    return validate_instance(
        {
            "vertices": vertices,
            "edges": [[vertices[i], vertices[j]] for i, j in sorted(edges)],
            "agents": agents,
            "valuations": vals,
            "p": p,
            "setting": setting,
        }
    )


def instance_from_shape(
    shape: str, dims, agents_rows: dict[str, list[int]], p: int, setting: str = OPTIONAL
) -> Instance:
    vertices, edges = gen_shape(shape, *dims)
    vals = {a: dict(zip(vertices, (str(x) for x in row))) for a, row in agents_rows.items()}
    return validate_instance(
        {"vertices": vertices, "edges": edges, "agents": list(agents_rows),
         "valuations": vals, "p": p, "setting": setting}
    )


def random_vector_sum(
    rng: random.Random, n: int, d: int, k: int, max_entry: int, plant: bool | None = None
) -> VectorSumInstance:
    """Random Vector-Sum instance; ``plant=True`` forces a solution, ``None`` lets chance decide."""
    vectors = [[rng.randint(0, max_entry) for _ in range(d)] for _ in range(n)]
    if plant is None:
        plant = rng.random() < 0.5
    if plant:
        pick = rng.sample(range(n), k)
        target = [sum(vectors[i][l] for i in pick) for l in range(d)]
    else:
        target = [rng.randint(0, k * max_entry) for _ in range(d)]
    return VectorSumInstance.build(vectors, target, k, M=max_entry)

