import json
import random

import pytest

from icfd.core import InstanceError, agent_types, is_connected
from icfd.exact import VectorSumInstance, solve_exact, solve_vector_sum
from icfd.gen import gen_random, gen_reduction, gen_shape, random_vector_sum


def test_reduction_small_example():
    vs = VectorSumInstance.build([[1], [2]], [2], 1)
    inst = gen_reduction(vs)
    assert inst.m == 5 and inst.n == 3 and inst.p == 4
    assert inst.value("A1", "a1") == 2 * 8 + 2
    assert inst.value("B1", "b1") == 2 * 8 - 2
    assert inst.value("A1", "v2") == 8 + 2 and inst.value("B1", "v2") == 8 - 2
    assert inst.value("A1", "c") == inst.value("B1", "c") == 8
    assert inst.value("A1", "b1") == 0 and inst.value("B1", "a1") == 0
    assert all(inst.value("C", v) == 1 for v in inst.vertices)
    assert inst.setting == "optional"
    assert set(inst.adjacency["c"]) == set(inst.vertices) - {"c"}


def test_reduction_rejects_large_entries():
    with pytest.raises(InstanceError, match="n\\^3"):
        gen_reduction(VectorSumInstance.build([[9]], [9], 1))


def test_reduction_shape_invariants():
    rng = random.Random(1)
    for _ in range(40):
        n, d, k = rng.randint(2, 5), rng.randint(1, 3), rng.randint(1, 2)
        vs = random_vector_sum(rng, n, d, min(k, n), 5)
        inst = gen_reduction(vs)
        assert inst.n == 2 * d + 1 and inst.m == 2 * d + n + 1 and inst.p == 2 * d + vs.k + 1
        assert inst.max_value <= (vs.k + 1) * n**3 + vs.k * 5


def test_reduction_iff_and_mandatory_agreement():
    rng = random.Random(2)
    for _ in range(25):
        n = rng.randint(2, 4)
        vs = random_vector_sum(rng, n, rng.randint(1, 2), rng.randint(1, min(2, n)), 5)
        inst = gen_reduction(vs)
        yes = solve_vector_sum(vs) is not None
        assert (solve_exact(inst) is not None) == yes
        assert (solve_exact(inst.with_setting("mandatory")) is not None) == yes


def test_shapes():
    v, e = gen_shape("star", 3)
    assert len(v) == 4 and len(e) == 3 and all("c" in x for x in e)
    assert gen_shape("path", 1) == (["p1"], [])
    v, e = gen_shape("grid", 2, 2)
    assert len(v) == 4 and len(e) == 4
    deg = {x: sum(x in edge for edge in e) for x in v}
    assert set(deg.values()) == {2}  # a 4-cycle
    with pytest.raises(ValueError):
        gen_shape("grid", 0, 2)
    with pytest.raises(ValueError):
        gen_shape("hex", 2)


def test_random_types_and_determinism():
    inst = gen_random(6, 4, 2, 9, num_types=1, seed=3)
    assert len(agent_types(inst)) == 1
    a = json.dumps(gen_random(6, 3, 2, 9, seed=5).to_dict(), sort_keys=True)
    b = json.dumps(gen_random(6, 3, 2, 9, seed=5).to_dict(), sort_keys=True)
    assert a == b


def test_random_connected_by_default():
    for s in range(20):
        inst = gen_random(7, 1, 1, 3, edge_density=0.0, seed=s)
        assert is_connected(inst.adjacency, inst.vertices)


def test_random_big_values_round_trip():
    inst = gen_random(5, 2, 2, 2**64, seed=1)
    d = inst.to_dict()
    assert any(int(x) >= 2**63 for row in d["valuations"].values() for x in row.values())
    assert all(isinstance(x, str) for row in d["valuations"].values() for x in row.values())
    from icfd.core import validate_instance
    assert validate_instance(json.loads(json.dumps(d))) == inst


def test_random_rejects_bad_params():
    with pytest.raises(ValueError):
        gen_random(3, 2, 4, 5)
    with pytest.raises(ValueError):
        gen_random(3, 2, 1, 5, num_types=3)
