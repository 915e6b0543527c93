"""Instances, allocations and exact verification of validity and (eps-)envy-freeness."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .numerics import RationalLike, parse_rational

OPTIONAL = "optional"
MANDATORY = "mandatory"
SETTINGS = (OPTIONAL, MANDATORY)


class InstanceError(ValueError):
    """Raised for malformed instance or allocation data."""


def _edge_key(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class Instance:
    """An EF-ICFD instance: item graph, agents, additive valuations, budget ``p``.

    Construct through :func:`validate_instance` or :meth:`from_dict`; the
    plain constructor does no checking.
    """

    vertices: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    agents: tuple[str, ...]
    valuations: Mapping[str, Mapping[str, int]]
    p: int
    setting: str = OPTIONAL

    @property
    def m(self) -> int:
        return len(self.vertices)

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def mandatory(self) -> bool:
        return self.setting == MANDATORY

    @cached_property
    def vertex_index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def adjacency(self) -> dict[str, frozenset[str]]:
        adj: dict[str, set[str]] = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return {v: frozenset(nb) for v, nb in adj.items()}

    @cached_property
    def neighbor_masks(self) -> tuple[int, ...]:
        """Open neighbourhood of each vertex index as a bitmask."""
        idx = self.vertex_index
        masks = [0] * self.m
        for u, v in self.edges:
            masks[idx[u]] |= 1 << idx[v]
            masks[idx[v]] |= 1 << idx[u]
        return tuple(masks)

    @cached_property
    def rows(self) -> tuple[tuple[int, ...], ...]:
        """Valuation matrix indexed ``[agent index][vertex index]``."""
        return tuple(
            tuple(self.valuations[a][v] for v in self.vertices) for a in self.agents
        )

    @cached_property
    def max_value(self) -> int:
        return max((x for row in self.rows for x in row), default=0)

    def value(self, agent: str, vertex: str) -> int:
        return self.valuations[agent][vertex]

    @classmethod
    def from_dict(cls, raw: Mapping) -> "Instance":
        return validate_instance(raw)

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [list(e) for e in sorted(self.edges)],
            "agents": list(self.agents),
            "valuations": {
                a: {v: str(self.valuations[a][v]) for v in self.vertices}
                for a in self.agents
            },
            "p": self.p,
            "setting": self.setting,
        }

    def with_agents(self, agents: Sequence[str]) -> "Instance":
        """Same graph, budget and setting restricted to ``agents``."""
        return Instance(
            vertices=self.vertices,
            edges=self.edges,
            agents=tuple(agents),
            valuations=MappingProxyType({a: self.valuations[a] for a in agents}),
            p=self.p,
            setting=self.setting,
        )

    def with_setting(self, setting: str) -> "Instance":
        if setting not in SETTINGS:
            raise InstanceError(f"unknown setting {setting!r}")
        return Instance(
            self.vertices, self.edges, self.agents, self.valuations, self.p, setting
        )


def _parse_value(raw, agent, vertex) -> int:
    if isinstance(raw, bool):
        raise InstanceError(f"valuation of {agent}/{vertex} is not an integer")
    if isinstance(raw, int):
        value = raw
    elif isinstance(raw, str):
        try:
            value = int(raw.strip())
        except ValueError:
            raise InstanceError(
                f"valuation of {agent}/{vertex} is not an integer: {raw!r}"
            ) from None
    else:
        raise InstanceError(f"valuation of {agent}/{vertex} is not an integer: {raw!r}")
    if value < 0:
        raise InstanceError(f"negative valuation {value} for {agent}/{vertex}")
    return value


def validate_instance(raw: Mapping) -> Instance:
    """Check decoded instance JSON and build an :class:`Instance`."""
    try:
        vertices = [str(v) for v in raw["vertices"]]
        agents = [str(a) for a in raw["agents"]]
        raw_edges = raw.get("edges", [])
        raw_vals = raw["valuations"]
        p = raw["p"]
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"missing or malformed field: {exc}") from None
    setting = raw.get("setting", OPTIONAL)
    if setting not in SETTINGS:
        raise InstanceError(f"setting must be one of {SETTINGS}, got {setting!r}")
    if len(set(vertices)) != len(vertices):
        raise InstanceError("duplicate vertex ids")
    if len(set(agents)) != len(agents):
        raise InstanceError("duplicate agent ids")
    if isinstance(p, bool) or not isinstance(p, int) or p < 0:
        raise InstanceError(f"p must be a nonnegative integer, got {p!r}")
    if p > len(vertices):
        raise InstanceError(f"p exceeds item count ({p} > {len(vertices)})")
    vset = set(vertices)
    edges = set()
    for e in raw_edges:
        if len(e) != 2:
            raise InstanceError(f"edge must have two endpoints: {e!r}")
        u, v = str(e[0]), str(e[1])
        if u not in vset or v not in vset:
            raise InstanceError(f"edge to unknown vertex: {e!r}")
        if u == v:
            raise InstanceError(f"self-loop on {u!r}")
        edges.add(_edge_key(u, v))
    if not isinstance(raw_vals, Mapping):
        raise InstanceError("valuations must be an object keyed by agent")
    unknown = set(raw_vals) - set(agents)
    if unknown:
        raise InstanceError(f"valuations for unknown agents: {sorted(unknown)}")
    valuations = {}
    for a in agents:
        row = raw_vals.get(a)
        if row is None:
            raise InstanceError(f"missing valuations for agent {a!r}")
        extra = set(row) - vset
        if extra:
            raise InstanceError(f"agent {a!r} values unknown vertices {sorted(extra)}")
        parsed = {}
        for v in vertices:
            if v not in row:
                raise InstanceError(f"missing valuation entry for {a}/{v}")
            parsed[v] = _parse_value(row[v], a, v)
        valuations[a] = MappingProxyType(parsed)
    return Instance(
        vertices=tuple(vertices),
        edges=frozenset(edges),
        agents=tuple(agents),
        valuations=MappingProxyType(valuations),
        p=p,
        setting=setting,
    )


@dataclass(frozen=True)
class Allocation:
    """Per-agent bundles; agents missing from ``bundles`` hold nothing."""

    bundles: Mapping[str, frozenset[str]] = field(default_factory=dict)

    @classmethod
    def of(cls, bundles: Mapping[str, Iterable[str]]) -> "Allocation":
        return cls(MappingProxyType({a: frozenset(b) for a, b in bundles.items()}))

    @classmethod
    def empty(cls) -> "Allocation":
        return cls.of({})

    def bundle(self, agent: str) -> frozenset[str]:
        return self.bundles.get(agent, frozenset())

    @property
    def allocated(self) -> frozenset[str]:
        return frozenset().union(*self.bundles.values()) if self.bundles else frozenset()

    @classmethod
    def from_dict(cls, raw: Mapping) -> "Allocation":
        try:
            bundles = raw["bundles"]
            return cls.of({str(a): [str(v) for v in b] for a, b in bundles.items()})
        except (KeyError, TypeError, AttributeError) as exc:
            raise InstanceError(f"malformed allocation: {exc}") from None

    def to_dict(self, inst: Instance | None = None) -> dict:
        agents = inst.agents if inst is not None else sorted(self.bundles)
        order = inst.vertex_index if inst is not None else None
        out = {}
        for a in agents:
            b = self.bundle(a)
            out[a] = sorted(b, key=order.__getitem__) if order else sorted(b)
        return {"bundles": out}


def agent_types(inst: Instance) -> tuple[tuple[str, ...], ...]:
    """Group agents with identical valuation rows, in order of first appearance."""
    groups: dict[tuple[int, ...], list[str]] = {}
    for a, row in zip(inst.agents, inst.rows):
        groups.setdefault(row, []).append(a)
    return tuple(tuple(g) for g in groups.values())


def bundle_value(inst: Instance, agent: str, bundle: Iterable[str]) -> int:
    row = inst.valuations[agent]
    total = 0
    for v in bundle:
        try:
            total += row[v]
        except KeyError:
            raise InstanceError(f"unknown vertex {v!r}") from None
    return total


def is_connected(adjacency: Mapping[str, Iterable[str]], bundle: Iterable[str]) -> bool:
    """Whether ``bundle`` induces a connected subgraph; the empty set counts as connected."""
    nodes = set(bundle)
    if not nodes:
        return True
    start = next(iter(nodes))
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in adjacency[u]:
            if w in nodes and w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == len(nodes)


@dataclass(frozen=True)
class Violation:
    kind: str
    agents: tuple[str, ...]
    detail: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "agents": list(self.agents), "detail": self.detail}


@dataclass(frozen=True)
class VerificationReport:
    valid: bool
    envy_free: bool
    eps_envy_free: bool
    eps: Fraction | None
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        """Valid and envy-free at the requested slack (exact EF when no eps given)."""
        return self.valid and (self.eps_envy_free if self.eps is not None else self.envy_free)

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "envy_free": self.envy_free,
            "eps_envy_free": self.eps_envy_free,
            "eps": None if self.eps is None else str(self.eps),
            "violations": [v.to_dict() for v in self.violations],
        }


def _reference_violations(inst: Instance, alloc: Allocation) -> list[Violation]:
    out = []
    known_agents = set(inst.agents)
    known_vertices = inst.vertex_index
    for a, b in alloc.bundles.items():
        if a not in known_agents:
            out.append(Violation("unknown_agent", (a,), f"agent {a!r} not in instance"))
        bad = sorted(v for v in b if v not in known_vertices)
        if bad:
            out.append(Violation("unknown_vertex", (a,), f"unknown vertices {bad}"))
    return out


def validity_violations(inst: Instance, alloc: Allocation) -> list[Violation]:
    out = _reference_violations(inst, alloc)
    if out:
        return out
    owner: dict[str, str] = {}
    for a in inst.agents:
        for v in alloc.bundle(a):
            if v in owner:
                out.append(
                    Violation("overlap", (owner[v], a), f"vertex {v!r} allocated twice")
                )
            else:
                owner[v] = a
    total = sum(len(alloc.bundle(a)) for a in inst.agents)
    if total != inst.p:
        out.append(Violation("size", (), f"{total} vertices allocated, p = {inst.p}"))
    for a in inst.agents:
        b = alloc.bundle(a)
        if not is_connected(inst.adjacency, b):
            out.append(Violation("connectivity", (a,), f"bundle of {a!r} is disconnected"))
        if inst.mandatory and not b:
            out.append(
                Violation("empty_bundle", (a,), f"{a!r} has an empty bundle (mandatory)")
            )
    return out


def is_valid(inst: Instance, alloc: Allocation) -> bool:
    return not validity_violations(inst, alloc)


def _value_matrix(inst: Instance, alloc: Allocation) -> dict[str, dict[str, int]]:
    """``values[i][j] = u_i(pi_j)``."""
    return {
        i: {j: bundle_value(inst, i, alloc.bundle(j)) for j in inst.agents}
        for i in inst.agents
    }


def envy_violations(
    inst: Instance, alloc: Allocation, eps: RationalLike = 0
) -> list[Violation]:
    """Ordered pairs violating ``(1 + eps) * u_i(pi_i) >= u_i(pi_j)``."""
    eps = parse_rational(eps)
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    num, den = eps.numerator + eps.denominator, eps.denominator
    values = _value_matrix(inst, alloc)
    out = []
    for i in inst.agents:
        own = values[i][i]
        for j in inst.agents:
            if i != j and num * own < den * values[i][j]:
                out.append(
                    Violation(
                        "envy" if eps == 0 else "eps_envy",
                        (i, j),
                        f"u_{i}(own) = {own} < u_{i}(bundle of {j}) = {values[i][j]}"
                        + ("" if eps == 0 else f" at slack 1+{eps}"),
                    )
                )
    return out


def is_envy_free(inst: Instance, alloc: Allocation) -> bool:
    if _reference_violations(inst, alloc):
        return False
    return not envy_violations(inst, alloc, 0)


def is_eps_envy_free(inst: Instance, alloc: Allocation, eps: RationalLike) -> bool:
    eps = parse_rational(eps)
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    if _reference_violations(inst, alloc):
        return False
    return not envy_violations(inst, alloc, eps)


def verify(
    inst: Instance, alloc: Allocation, eps: RationalLike | None = None
) -> VerificationReport:
    """Full report; ``eps_envy_free`` is checked at ``eps`` (or 0 when omitted)."""
    eps_q = None if eps is None else parse_rational(eps)
    if eps_q is not None and eps_q < 0:
        raise ValueError("epsilon must be nonnegative")
    violations = validity_violations(inst, alloc)
    if any(v.kind.startswith("unknown") for v in violations):
        return VerificationReport(False, False, False, eps_q, tuple(violations))
    envy = envy_violations(inst, alloc, 0)
    ef = not envy
    if eps_q is None or eps_q == 0:
        eps_ef = ef
        violations += envy
    else:
        slack = envy_violations(inst, alloc, eps_q)
        eps_ef = not slack
        violations += envy + slack
    valid = not any(v.kind not in ("envy", "eps_envy") for v in violations)
    return VerificationReport(valid, ef, eps_ef, eps_q, tuple(violations))
