"""Audit trail from a tenant's input expressions to its assigned instances on one RVC."""

from __future__ import annotations

from rvplan.expressions import explain_fold, render_expression
from rvplan.model import Bundle
from rvplan.pipeline import PlanResult


class UnknownEntity(LookupError):
    pass


def explain(result: PlanResult, bundle: Bundle, tenant: str, rvc: str) -> str:
    if tenant not in bundle.registry:
        raise UnknownEntity(f"unknown tenant {tenant!r}")
    if rvc not in result.rvcs:
        raise UnknownEntity(f"unknown RVC {rvc!r}")
    rp = result.rvcs[rvc]
    table = rp.table
    lines = [f"tenant {tenant} on RVC {rvc} ({result.mode.value})"]
    for variant in table.variants:
        key = (tenant, variant)
        if key not in table.cells:
            lines.append(f"variant {variant}: not used")
            continue
        lines.append(f"variant {variant}:")
        exprs = []
        for func, fexprs in table.sources.get(key, ()):
            if fexprs:
                rendered = ", ".join(render_expression(e) for e in fexprs)
                lines.append(f"  {func}: {rendered}")
                exprs.extend(fexprs)
            else:
                lines.append(f"  {func}: default: SWAny")
        folded, steps = explain_fold(exprs, tenant, bundle.registry)
        for step in steps:
            lines.append(f"  fold: {step}")
        lines.append(f"  allowed: {table.cells[key]}")
        if folded != table.cells[key]:
            raise AssertionError(f"fold mismatch for {tenant}.{variant}: {folded} vs {table.cells[key]}")
        neighbors = rp.conflict.neighbors(tenant, variant)
        lines.append(f"  conflicts: {', '.join(neighbors) if neighbors else 'none'}")
        k = rp.coloring.class_of(tenant, variant)
        lines.append(f"  instance: C{k}")
    return "\n".join(lines) + "\n"
