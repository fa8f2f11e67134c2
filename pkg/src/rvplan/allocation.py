"""Coloring conflict graphs into instances.

A color class is one deployed RVC instance; its members are ``(tenant,
variant)`` usages. Two modes:

``shared-pool``
    one pool of classes for all variants of the RVC, so an instance may serve
    different variants to different tenants. The greedy admission test
    follows the plain first-fit loop: ``Ti.Vj`` may join ``Ck`` only if
    ``Ti`` has no ``Vj`` conflict with any tenant already in ``Ck``,
    whichever variant that tenant holds there.
``per-variant``
    classes never mix variants; first-fit runs separately per variant.

Validity in both modes: no two tenants holding the same variant in the same
class may conflict on that variant.
"""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass, field

from rvplan.graph import LabeledGraph, _bits

DEFAULT_EXACT_LIMIT = 12


class Mode(str, enum.Enum):
    SHARED_POOL = "shared-pool"
    PER_VARIANT = "per-variant"


class InstanceTooLarge(ValueError):
    def __init__(self, rvc: str, tenants: int, limit: int):
        super().__init__(
            f"RVC {rvc!r}: {tenants} participating tenants exceeds exact-solver limit {limit}"
        )
        self.rvc = rvc
        self.tenants = tenants
        self.limit = limit


Cell = tuple[str, str]


@dataclass(frozen=True)
class ColorClass:
    index: int
    members: tuple[Cell, ...]
    # set in per-variant mode: the variant this class is reserved for
    variant: str | None = None

    @property
    def tenants(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(t for t, _ in self.members))


@dataclass(frozen=True)
class RvcColoring:
    rvc: str
    mode: Mode
    classes: tuple[ColorClass, ...]
    assignment: dict[Cell, int] = field(compare=True)

    @property
    def d(self) -> int:
        return len(self.classes)

    def class_of(self, tenant: str, variant: str) -> int | None:
        return self.assignment.get((tenant, variant))


@dataclass(frozen=True)
class Violation:
    kind: str
    tenant: str | None = None
    variant: str | None = None
    other: str | None = None
    class_index: int | None = None

    def __str__(self) -> str:
        where = f" in C{self.class_index}" if self.class_index is not None else ""
        if self.kind == "conflict":
            return f"conflict{where}: {self.tenant}.{self.variant} with {self.other}"
        return f"{self.kind}{where}: {self.tenant}.{self.variant}"


def _orders(
    g: LabeledGraph, tenant_order: Sequence[str] | None, variant_order: Sequence[str] | None
) -> tuple[Sequence[str], Sequence[str]]:
    return (tenant_order or g.vertices, variant_order or g.variants)


def participating_cells(
    g: LabeledGraph,
    tenant_order: Sequence[str] | None = None,
    variant_order: Sequence[str] | None = None,
) -> list[Cell]:
    tenants, variants = _orders(g, tenant_order, variant_order)
    out = []
    for t in tenants:
        i = g.index[t]
        for v in variants:
            if g.participant_masks[v] >> i & 1:
                out.append((t, v))
    return out


def participating_tenants(g: LabeledGraph) -> list[str]:
    union = 0
    for m in g.participant_masks.values():
        union |= m
    return [g.vertices[i] for i in _bits(union)]


def _build(
    rvc: str, mode: Mode, members: list[list[Cell]], variants: list[str | None]
) -> RvcColoring:
    classes = []
    assignment: dict[Cell, int] = {}
    for k, (cells, variant) in enumerate(zip(members, variants), start=1):
        classes.append(ColorClass(k, tuple(cells), variant))
        for cell in cells:
            assignment[cell] = k
    return RvcColoring(rvc, mode, tuple(classes), assignment)


def greedy_color(
    conflict: LabeledGraph,
    tenant_order: Sequence[str] | None = None,
    variant_order: Sequence[str] | None = None,
) -> RvcColoring:
    tenants, variants = _orders(conflict, tenant_order, variant_order)
    present: list[int] = []  # tenant bitmask per class, any variant
    members: list[list[Cell]] = []
    for t in tenants:
        i = conflict.index[t]
        bit = 1 << i
        for v in variants:
            if not conflict.participant_masks[v] & bit:
                continue
            adj = conflict.adjacency[v][i]
            for k, mask in enumerate(present):
                if not adj & mask:
                    break
            else:
                k = len(present)
                present.append(0)
                members.append([])
            present[k] |= bit
            members[k].append((t, v))
    return _build(conflict.rvc, Mode.SHARED_POOL, members, [None] * len(members))


def per_variant_color(
    conflict: LabeledGraph,
    tenant_order: Sequence[str] | None = None,
    variant_order: Sequence[str] | None = None,
) -> RvcColoring:
    tenants, variants = _orders(conflict, tenant_order, variant_order)
    members: list[list[Cell]] = []
    tags: list[str | None] = []
    for v in variants:
        pmask = conflict.participant_masks[v]
        present: list[int] = []
        local: list[list[Cell]] = []
        for t in tenants:
            i = conflict.index[t]
            bit = 1 << i
            if not pmask & bit:
                continue
            adj = conflict.adjacency[v][i]
            for k, mask in enumerate(present):
                if not adj & mask:
                    break
            else:
                k = len(present)
                present.append(0)
                local.append([])
            present[k] |= bit
            local[k].append((t, v))
        members.extend(local)
        tags.extend([v] * len(local))
    return _build(conflict.rvc, Mode.PER_VARIANT, members, tags)


def _lexmin_coloring(neighbors: list[list[int]], max_colors: int) -> list[int] | None:
    """Lexicographically smallest proper coloring with colors ``1..max_colors``, or ``None``.

    ``neighbors[p]`` lists earlier positions adjacent to position ``p``. Colors
    are tried in ascending order and a vertex never opens more than one new
    color, which keeps the first solution found lexicographically minimal.
    """
    n = len(neighbors)
    colors = [0] * n

    def search(p: int, used: int) -> bool:
        if p == n:
            return True
        blocked = {colors[q] for q in neighbors[p]}
        for c in range(1, min(used + 1, max_colors) + 1):
            if c in blocked:
                continue
            colors[p] = c
            if search(p + 1, max(used, c)):
                return True
        colors[p] = 0
        return False

    return colors if search(0, 0) else None


def _variant_problem(g: LabeledGraph, v: str, tenants: Sequence[str]) -> tuple[list[str], list[list[int]]]:
    pmask = g.participant_masks[v]
    order = [t for t in tenants if pmask >> g.index[t] & 1]
    pos = {g.index[t]: p for p, t in enumerate(order)}
    neighbors = []
    for p, t in enumerate(order):
        adj = g.adjacency[v][g.index[t]]
        neighbors.append(sorted(pos[j] for j in _bits(adj) if pos[j] < p))
    return order, neighbors


def exact_min_color(
    conflict: LabeledGraph,
    mode: Mode | str = Mode.SHARED_POOL,
    limit: int = DEFAULT_EXACT_LIMIT,
    tenant_order: Sequence[str] | None = None,
    variant_order: Sequence[str] | None = None,
) -> RvcColoring:
    """Minimum-instance coloring by exhaustive backtracking.

    Variants are independent under the validity rule, so the search runs per
    variant: shared-pool needs ``max`` of the per-variant chromatic numbers,
    per-variant needs their sum. Among optimal colorings the one that is
    lexicographically smallest in canonical cell order is returned.

    Raises :class:`InstanceTooLarge` above ``limit`` participating tenants.
    """
    mode = Mode(mode)
    tenants, variants = _orders(conflict, tenant_order, variant_order)
    n_part = len(participating_tenants(conflict))
    if n_part > limit:
        raise InstanceTooLarge(conflict.rvc, n_part, limit)

    problems = {v: _variant_problem(conflict, v, tenants) for v in variants}
    chi: dict[str, int] = {}
    for v, (order, nbrs) in problems.items():
        if not order:
            chi[v] = 0
            continue
        k = 1
        while _lexmin_coloring(nbrs, k) is None:
            k += 1
        chi[v] = k

    colorings: dict[str, dict[str, int]] = {}
    if mode is Mode.SHARED_POOL:
        d = max(chi.values(), default=0)
        for v, (order, nbrs) in problems.items():
            cols = _lexmin_coloring(nbrs, d) if order else []
            colorings[v] = dict(zip(order, cols or []))
        members: list[list[Cell]] = [[] for _ in range(d)]
        for t in tenants:
            for v in variants:
                c = colorings[v].get(t)
                if c:
                    members[c - 1].append((t, v))
        return _build(conflict.rvc, mode, members, [None] * d)

    all_members: list[list[Cell]] = []
    tags: list[str | None] = []
    for v, (order, nbrs) in problems.items():
        if not order:
            continue
        cols = _lexmin_coloring(nbrs, chi[v]) or []
        local: list[list[Cell]] = [[] for _ in range(chi[v])]
        for t, c in zip(order, cols):
            local[c - 1].append((t, v))
        all_members.extend(local)
        tags.extend([v] * chi[v])
    return _build(conflict.rvc, mode, all_members, tags)


def check_validity(coloring: RvcColoring, conflict: LabeledGraph) -> list[Violation]:
    out: list[Violation] = []
    expected = participating_cells(conflict)
    expected_set = set(expected)
    for t, v in expected:
        if (t, v) not in coloring.assignment:
            out.append(Violation("missing", t, v))
    for (t, v), k in coloring.assignment.items():
        if (t, v) not in expected_set:
            out.append(Violation("unexpected", t, v, class_index=k))

    index_of = {c.index: c for c in coloring.classes}
    for cls in coloring.classes:
        if not cls.members:
            out.append(Violation("empty-class", class_index=cls.index))
        for t, v in cls.members:
            if coloring.assignment.get((t, v)) != cls.index:
                out.append(Violation("inconsistent", t, v, class_index=cls.index))
        if coloring.mode is Mode.PER_VARIANT:
            if len({v for _, v in cls.members}) > 1:
                out.append(Violation("mixed-variants", class_index=cls.index))
    for (t, v), k in coloring.assignment.items():
        if k not in index_of:
            out.append(Violation("inconsistent", t, v, class_index=k))

    for cls in coloring.classes:
        by_variant: dict[str, list[str]] = {}
        for t, v in cls.members:
            if (t, v) in expected_set:
                by_variant.setdefault(v, []).append(t)
        for v, holders in by_variant.items():
            seen = 0
            for t in holders:
                i = conflict.index[t]
                clash = conflict.adjacency[v][i] & seen
                for j in _bits(clash):
                    out.append(Violation("conflict", conflict.vertices[j], v, t, cls.index))
                seen |= 1 << i
    return out
