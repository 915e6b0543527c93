import random

import pytest

from icfd.core import validate_instance


def make_instance(vertices, edges, rows, p, setting="optional"):
    """rows: {agent: [values in vertex order]}"""
    return validate_instance({
        "vertices": list(vertices),
        "edges": [list(e) for e in edges],
        "agents": list(rows),
        "valuations": {a: {v: str(x) for v, x in zip(vertices, r)} for a, r in rows.items()},
        "p": p,
        "setting": setting,
    })


@pytest.fixture
def rng():
    return random.Random(12345)
