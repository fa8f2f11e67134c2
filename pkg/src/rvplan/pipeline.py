"""End-to-end planning for one application of a validated bundle."""

from __future__ import annotations

import os
from dataclasses import dataclass

from rvplan.allocation import (
    DEFAULT_EXACT_LIMIT,
    InstanceTooLarge,
    Mode,
    RvcColoring,
    exact_min_color,
    greedy_color,
    per_variant_color,
)
from rvplan.graph import LabeledGraph, build_relationship_graph, complement
from rvplan.model import Bundle
from rvplan.reporting import CostSummary, Distribution, Optimality, assemble, cost_summary
from rvplan.variability import (
    FunctionalityRequirementTable,
    RichVariantConfiguration,
    VariantRequirementTable,
    build_functionality_table,
    translate,
)

EXACT_LIMIT_ENV = "RV_EXACT_LIMIT"


def default_exact_limit() -> int:
    raw = os.environ.get(EXACT_LIMIT_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_EXACT_LIMIT
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{EXACT_LIMIT_ENV} must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class RvcPlan:
    table: VariantRequirementTable
    relationship: LabeledGraph
    conflict: LabeledGraph
    coloring: RvcColoring
    exact: RvcColoring | None


@dataclass(frozen=True)
class PlanResult:
    app: str
    mode: Mode
    func_table: FunctionalityRequirementTable
    configurations: tuple[RichVariantConfiguration, ...]
    rvcs: dict[str, RvcPlan]
    distribution: Distribution
    summary: CostSummary
    optimality: Optimality


def plan(
    bundle: Bundle,
    app: str | None = None,
    mode: Mode | str = Mode.SHARED_POOL,
    exact_limit: int | None = None,
) -> PlanResult:
    """Run translation, graph building, coloring and assembly for ``app``.

    The bundle must already have passed :func:`rvplan.model.validate_bundle`.
    RVCs with at most ``exact_limit`` participating tenants are also solved
    exactly; pass ``0`` to skip the audit.
    """
    mode = Mode(mode)
    if app is None:
        apps = bundle.apps
        if not apps:
            raise ValueError("bundle has no functional requirements")
        app = apps[0]
    template = bundle.template_for(app)
    if template is None:
        raise ValueError(f"no configuration template for application {app!r}")
    limit = default_exact_limit() if exact_limit is None else exact_limit

    func_table = build_functionality_table(bundle, app)
    tables, configs = translate(template, func_table, bundle.registry)
    colorer = greedy_color if mode is Mode.SHARED_POOL else per_variant_color

    rvcs: dict[str, RvcPlan] = {}
    audited = True
    for table in tables:
        rel = build_relationship_graph(table)
        conf = complement(rel)
        coloring = colorer(conf)
        exact = None
        try:
            exact = exact_min_color(conf, mode, limit)
        except InstanceTooLarge:
            audited = False
        rvcs[table.rvc] = RvcPlan(table, rel, conf, coloring, exact)

    dist = assemble([p.coloring for p in rvcs.values()], template, configs)
    if audited:
        exact_total = sum(p.exact.d for p in rvcs.values() if p.exact is not None)
        optimality = Optimality(True, exact_total, dist.total_instances - exact_total)
    else:
        optimality = Optimality(False, None, None)
    return PlanResult(
        app=app,
        mode=mode,
        func_table=func_table,
        configurations=tuple(configs),
        rvcs=rvcs,
        distribution=dist,
        summary=cost_summary(dist),
        optimality=optimality,
    )
