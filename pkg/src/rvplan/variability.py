"""Functionality-level requirements to per-RVC variant tables and per-tenant configurations."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

from rvplan.expressions import AllowedSet, SharingExpression, combine, parse_expression, resolve
from rvplan.model import Bundle, ConfigurationTemplate, Registry


@dataclass(frozen=True)
class FunctionalityRequirementTable:
    app: str
    tenants: tuple[str, ...]
    selections: dict[str, tuple[str, ...]]
    cells: dict[tuple[str, str], tuple[SharingExpression, ...]]


@dataclass(frozen=True)
class VariantRequirementTable:
    rvc: str
    variants: tuple[str, ...]
    tenants: tuple[str, ...]
    cells: dict[tuple[str, str], AllowedSet]
    participants: dict[str, tuple[str, ...]]
    # (tenant, variant) -> [(functionality, expressions)] for audit output
    sources: dict[tuple[str, str], tuple[tuple[str, tuple[SharingExpression, ...]], ...]] = field(
        default_factory=dict, compare=False, repr=False
    )

    def __contains__(self, key: object) -> bool:
        return key in self.cells


@dataclass(frozen=True)
class RichVariantConfiguration:
    tenant: str
    app: str
    functionalities: frozenset[str]
    variants_used: dict[str, frozenset[str]]


def build_functionality_table(bundle: Bundle, app: str) -> FunctionalityRequirementTable:
    """Collect selections and parsed expressions for one application.

    Assumes a validated bundle. Cells on functionalities the tenant did not
    select are dropped.
    """
    order = bundle.registry.order()
    selections: dict[str, tuple[str, ...]] = {}
    for fr in bundle.functional:
        if fr.app == app:
            selections[fr.tenant] = tuple(dict.fromkeys(fr.selected))
    tenants = tuple(sorted(selections, key=order.__getitem__))
    selections = {t: selections[t] for t in tenants}

    cells: dict[tuple[str, str], tuple[SharingExpression, ...]] = {}
    for dep in bundle.deployment:
        if dep.app != app:
            continue
        for cell in dep.cells:
            if cell.functionality in selections.get(cell.tenant, ()) and cell.expressions:
                cells[(cell.tenant, cell.functionality)] = tuple(
                    parse_expression(e) for e in cell.expressions
                )
    return FunctionalityRequirementTable(app, tenants, selections, cells)


def _fold(sets: Sequence[AllowedSet]) -> AllowedSet:
    acc = sets[0]
    for s in sets[1:]:
        acc = combine(acc, s)
    return acc


def translate(
    template: ConfigurationTemplate,
    func_table: FunctionalityRequirementTable,
    registry: Registry,
) -> tuple[list[VariantRequirementTable], list[RichVariantConfiguration]]:
    universe = registry.id_set
    func_order = list(template.realization)
    rank = {f: i for i, f in enumerate(func_order)}

    contributions: dict[str, dict[tuple[str, str], list[AllowedSet]]] = {r.id: {} for r in template.rvcs}
    sources: dict[str, dict[tuple[str, str], list[tuple[str, tuple[SharingExpression, ...]]]]] = {
        r.id: {} for r in template.rvcs
    }
    configs: list[RichVariantConfiguration] = []

    for tenant in func_table.tenants:
        selected = sorted(func_table.selections[tenant], key=lambda f: rank.get(f, len(rank)))
        used: dict[str, set[str]] = {}
        for func in selected:
            exprs = func_table.cells.get((tenant, func), ())
            resolved = [resolve(e, tenant, registry) for e in exprs]
            for rvc_id, variant in template.realization.get(func, ()):
                used.setdefault(rvc_id, set()).add(variant)
                key = (tenant, variant)
                contributions[rvc_id].setdefault(key, []).extend(resolved)
                sources[rvc_id].setdefault(key, []).append((func, exprs))
        configs.append(
            RichVariantConfiguration(
                tenant=tenant,
                app=template.app,
                functionalities=frozenset(func_table.selections[tenant]),
                variants_used={
                    r.id: frozenset(used[r.id]) for r in template.rvcs if r.id in used
                },
            )
        )

    tables = []
    for rvc in template.rvcs:
        contrib = contributions[rvc.id]
        cells: dict[tuple[str, str], AllowedSet] = {}
        participants: dict[str, tuple[str, ...]] = {}
        for variant in rvc.variants:
            members = []
            for tenant in func_table.tenants:
                key = (tenant, variant)
                if key not in contrib:
                    continue
                members.append(tenant)
                sets = contrib[key]
                cells[key] = _fold(sets) if sets else AllowedSet.everyone(tenant, universe)
            participants[variant] = tuple(members)
        tables.append(
            VariantRequirementTable(
                rvc=rvc.id,
                variants=rvc.variants,
                tenants=func_table.tenants,
                cells=cells,
                participants=participants,
                sources={k: tuple(v) for k, v in sources[rvc.id].items()},
            )
        )
    return tables, configs
