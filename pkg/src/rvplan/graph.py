"""Undirected edge-labeled tenant graphs: sharing relationships and their per-variant complement.

Adjacency is stored per variant as one integer bitmask per vertex (bit ``j``
set means an edge to ``vertices[j]`` carrying that variant). Dense conflict
graphs over thousands of tenants stay cheap this way.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from rvplan.variability import VariantRequirementTable


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def pair_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    rvc: str
    vertices: tuple[str, ...]
    variants: tuple[str, ...]
    participants: dict[str, tuple[str, ...]]
    adjacency: dict[str, tuple[int, ...]] = field(repr=False)
    index: dict[str, int] = field(init=False, repr=False)
    participant_masks: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        index = {t: i for i, t in enumerate(self.vertices)}
        object.__setattr__(self, "index", index)
        pmasks = {}
        for v in self.variants:
            m = 0
            for t in self.participants.get(v, ()):
                m |= 1 << index[t]
            pmasks[v] = m
        object.__setattr__(self, "participant_masks", pmasks)

    @classmethod
    def from_edges(
        cls,
        rvc: str,
        vertices: Iterable[str],
        variants: Iterable[str],
        participants: Mapping[str, Iterable[str]],
        edges: Mapping[tuple[str, str], Iterable[str] | None],
    ) -> LabeledGraph:
        """Build from an explicit edge map; an empty or ``None`` label means every shared variant."""
        vertices = tuple(vertices)
        variants = tuple(variants)
        index = {t: i for i, t in enumerate(vertices)}
        parts = {v: tuple(t for t in vertices if t in set(participants.get(v, ()))) for v in variants}
        for v, ts in participants.items():
            if v not in variants:
                raise ValueError(f"participants given for unknown variant {v!r}")
            for t in ts:
                if t not in index:
                    raise ValueError(f"participant {t!r} is not a vertex")
        adj = {v: [0] * len(vertices) for v in variants}
        for (a, b), labels in edges.items():
            if a == b:
                raise ValueError(f"self-loop on {a!r}")
            if a not in index or b not in index:
                raise ValueError(f"edge {a}--{b} references an unknown vertex")
            common = [v for v in variants if a in parts[v] and b in parts[v]]
            labels = list(labels) if labels else common
            for v in labels:
                if v not in variants:
                    raise ValueError(f"edge {a}--{b} has unknown label {v!r}")
                if v not in common:
                    raise ValueError(f"edge {a}--{b} labeled {v!r} but an endpoint does not use it")
                ia, ib = index[a], index[b]
                adj[v][ia] |= 1 << ib
                adj[v][ib] |= 1 << ia
        return cls(rvc, vertices, variants, parts, {v: tuple(m) for v, m in adj.items()})

    def adjacency_mask(self, variant: str, tenant: str) -> int:
        return self.adjacency[variant][self.index[tenant]]

    def adjacent(self, a: str, b: str, variant: str) -> bool:
        return bool(self.adjacency[variant][self.index[a]] >> self.index[b] & 1)

    def labels(self, a: str, b: str) -> frozenset[str]:
        return frozenset(v for v in self.variants if self.adjacent(a, b, v))

    def neighbors(self, tenant: str, variant: str) -> tuple[str, ...]:
        return tuple(self.vertices[j] for j in _bits(self.adjacency_mask(variant, tenant)))

    def degree(self, tenant: str, variant: str) -> int:
        return self.adjacency_mask(variant, tenant).bit_count()

    def shared_variants(self, a: str, b: str) -> frozenset[str]:
        ia, ib = self.index[a], self.index[b]
        return frozenset(
            v for v in self.variants
            if self.participant_masks[v] >> ia & 1 and self.participant_masks[v] >> ib & 1
        )

    def edge_count(self, variant: str | None = None) -> int:
        variants = self.variants if variant is None else (variant,)
        return sum(sum(m.bit_count() for m in self.adjacency[v]) // 2 for v in variants)

    @property
    def edges(self) -> dict[tuple[str, str], frozenset[str]]:
        """Materialized edge map in vertex order; keys have the lexicographically smaller id first."""
        out: dict[tuple[str, str], set[str]] = {}
        n = len(self.vertices)
        for i in range(n):
            upper = ~((1 << (i + 1)) - 1)
            for v in self.variants:
                for j in _bits(self.adjacency[v][i] & upper):
                    out.setdefault(pair_key(self.vertices[i], self.vertices[j]), set()).add(v)
        return {k: frozenset(s) for k, s in out.items()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return (
            self.rvc == other.rvc
            and self.vertices == other.vertices
            and self.variants == other.variants
            and self.participants == other.participants
            and self.adjacency == other.adjacency
        )

    def __hash__(self) -> int:
        return hash((self.rvc, self.vertices, self.variants))


def build_relationship_graph(table: VariantRequirementTable) -> LabeledGraph:
    """Edge ``{A, B}`` carries ``V`` iff both use ``V`` and each one's allowed set contains the other."""
    vertices = table.tenants
    index = {t: i for i, t in enumerate(vertices)}
    n = len(vertices)
    adjacency: dict[str, tuple[int, ...]] = {}

    for variant in table.variants:
        parts = table.participants.get(variant, ())
        pmask = 0
        for t in parts:
            pmask |= 1 << index[t]
        refuses = [0] * n  # A refuses B
        included_by = [0] * n  # explicit lists naming B
        excluded_by = [0] * n  # exclusion lists naming B
        explicit = 0  # participants whose set is an explicit list
        for a in parts:
            ia = index[a]
            cell = table.cells[(a, variant)]
            named = 0
            for m in cell.members:
                j = index.get(m)
                if j is not None:
                    named |= 1 << j
            named &= pmask
            if cell.cofinite:
                refuses[ia] = named
                for j in _bits(named):
                    excluded_by[j] |= 1 << ia
            else:
                refuses[ia] = pmask & ~named
                explicit |= 1 << ia
                for j in _bits(named):
                    included_by[j] |= 1 << ia
        row = [0] * n
        for a in parts:
            ia = index[a]
            self_bit = 1 << ia
            refused_by = (explicit & ~included_by[ia]) | excluded_by[ia]
            row[ia] = pmask & ~(refuses[ia] | refused_by) & ~self_bit
        adjacency[variant] = tuple(row)

    return LabeledGraph(table.rvc, vertices, table.variants, dict(table.participants), adjacency)


def complement(g: LabeledGraph) -> LabeledGraph:
    """Per-variant complement restricted to each variant's participants."""
    adjacency = {}
    for v in g.variants:
        pmask = g.participant_masks[v]
        row = g.adjacency[v]
        adjacency[v] = tuple(
            (pmask & ~row[i] & ~(1 << i)) if pmask >> i & 1 else 0 for i in range(len(g.vertices))
        )
    return LabeledGraph(g.rvc, g.vertices, g.variants, dict(g.participants), adjacency)
