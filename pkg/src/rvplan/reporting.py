"""Distribution assembly, cost summaries, DOT export and report rendering."""

from __future__ import annotations

import json
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Any

from rvplan.allocation import ColorClass, Mode, RvcColoring
from rvplan.graph import LabeledGraph, _bits
from rvplan.model import ConfigurationTemplate
from rvplan.variability import RichVariantConfiguration


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True)
class Distribution:
    app: str
    mode: Mode
    per_rvc: dict[str, RvcColoring]
    total_instances: int
    per_tenant_view: dict[str, dict[str, frozenset[tuple[str, int]]]]


@dataclass(frozen=True)
class CostSummary:
    instances: int
    single_tenancy_baseline: int
    pure_mt_baseline: int
    savings_ratio: float


@dataclass(frozen=True)
class Optimality:
    audited: bool = False
    exact: int | None = None
    gap: int | None = None


def assemble(
    colorings: Iterable[RvcColoring],
    template: ConfigurationTemplate,
    configurations: Sequence[RichVariantConfiguration] = (),
) -> Distribution:
    by_rvc = {c.rvc: c for c in colorings}
    per_rvc: dict[str, RvcColoring] = {}
    for rvc in template.rvcs:
        if rvc.id not in by_rvc:
            raise AssemblyError(f"no coloring for RVC {rvc.id!r}")
        per_rvc[rvc.id] = by_rvc[rvc.id]
    modes = {c.mode for c in per_rvc.values()}
    if len(modes) > 1:
        raise AssemblyError("colorings mix shared-pool and per-variant modes")
    mode = modes.pop() if modes else Mode.SHARED_POOL

    view: dict[str, dict[str, set[tuple[str, int]]]] = {}
    for cfg in configurations:
        view.setdefault(cfg.tenant, {})
    for rvc_id, coloring in per_rvc.items():
        for (tenant, variant), k in coloring.assignment.items():
            view.setdefault(tenant, {}).setdefault(rvc_id, set()).add((variant, k))

    for cfg in configurations:
        for rvc_id, variants in cfg.variants_used.items():
            coloring = per_rvc.get(rvc_id)
            for v in sorted(variants):
                if coloring is None or (cfg.tenant, v) not in coloring.assignment:
                    raise AssemblyError(
                        f"coverage gap: tenant {cfg.tenant!r} needs {rvc_id}.{v} but has no instance"
                    )

    return Distribution(
        app=template.app,
        mode=mode,
        per_rvc=per_rvc,
        total_instances=sum(c.d for c in per_rvc.values()),
        per_tenant_view={t: {r: frozenset(s) for r, s in m.items()} for t, m in view.items()},
    )


def cost_summary(dist: Distribution) -> CostSummary:
    single = 0
    pure = 0
    for coloring in dist.per_rvc.values():
        tenants = {t for t, _ in coloring.assignment}
        single += len(tenants)
        pure += 1 if tenants else 0
    ratio = max(0.0, 1.0 - dist.total_instances / single) if single else 0.0
    return CostSummary(dist.total_instances, single, pure, ratio)


_DOT_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|-?(\.[0-9]+|[0-9]+(\.[0-9]*)?)")
_DOT_KEYWORDS = {"graph", "digraph", "node", "edge", "subgraph", "strict"}


def _dot_id(value: str) -> str:
    if _DOT_ID.fullmatch(value) and value.lower() not in _DOT_KEYWORDS:
        return value
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(g: LabeledGraph, kind: str = "relationship") -> str:
    if kind not in ("relationship", "conflict"):
        raise ValueError(f"unknown graph kind {kind!r}")
    lines = [f"graph {_dot_id(f'{g.rvc}_{kind}')} {{"]
    for t in g.vertices:
        lines.append(f"  {_dot_id(t)};")
    n = len(g.vertices)
    for i in range(n):
        upper = ~((1 << (i + 1)) - 1)
        partners: set[int] = set()
        for v in g.variants:
            partners.update(_bits(g.adjacency[v][i] & upper))
        for j in sorted(partners):
            a, b = g.vertices[i], g.vertices[j]
            labels = [v for v in g.variants if g.adjacency[v][i] >> j & 1]
            edge = f"  {_dot_id(a)} -- {_dot_id(b)}"
            if set(labels) != g.shared_variants(a, b):
                edge += f' [label="{",".join(labels)}"]'
            lines.append(edge + ";")
    lines.append("}")
    return "\n".join(lines) + "\n"


def report_dict(
    dist: Distribution, summary: CostSummary, optimality: Optimality | None = None
) -> dict[str, Any]:
    optimality = optimality or Optimality()
    return {
        "app": dist.app,
        "mode": dist.mode.value,
        "rvcs": [
            {
                "rvc": rvc_id,
                "instances": [
                    {
                        "index": cls.index,
                        "members": [{"tenant": t, "variant": v} for t, v in cls.members],
                    }
                    for cls in coloring.classes
                ],
            }
            for rvc_id, coloring in dist.per_rvc.items()
        ],
        "totals": {
            "instances": summary.instances,
            "single_tenancy": summary.single_tenancy_baseline,
            "pure_mt": summary.pure_mt_baseline,
            "savings_ratio": round(summary.savings_ratio, 6),
        },
        "optimality": {
            "audited": optimality.audited,
            "exact": optimality.exact,
            "gap": optimality.gap,
        },
    }


def _render_text(doc: dict[str, Any]) -> str:
    out = [f"application: {doc['app']}", f"mode: {doc['mode']}"]
    for entry in doc["rvcs"]:
        out.append(f"rvc {entry['rvc']}: {len(entry['instances'])} instance(s)")
        for inst in entry["instances"]:
            members = " ".join(f"{m['tenant']}.{m['variant']}" for m in inst["members"])
            out.append(f"  C{inst['index']}: {members}")
    tot = doc["totals"]
    out.append(
        f"totals: instances={tot['instances']} single_tenancy={tot['single_tenancy']} "
        f"pure_mt={tot['pure_mt']} savings_ratio={tot['savings_ratio']:.6f}"
    )
    opt = doc["optimality"]
    exact = "unknown" if opt["exact"] is None else opt["exact"]
    gap = "unknown" if opt["gap"] is None else opt["gap"]
    out.append(f"optimality: audited={'yes' if opt['audited'] else 'no'} exact={exact} gap={gap}")
    return "\n".join(out) + "\n"


def render_report(
    dist: Distribution,
    summary: CostSummary,
    format: str = "json",
    optimality: Optimality | None = None,
) -> str:
    doc = report_dict(dist, summary, optimality)
    if format == "json":
        return json.dumps(doc, indent=2) + "\n"
    if format == "text":
        return _render_text(doc)
    raise ValueError(f"unknown report format {format!r}")


def parse_report(text: str, format: str = "json") -> dict[str, Any]:
    """Read a rendered report back into the :func:`report_dict` structure."""
    if format == "json":
        return json.loads(text)
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")

    lines = text.splitlines()
    doc: dict[str, Any] = {"app": lines[0].split(": ", 1)[1], "mode": lines[1].split(": ", 1)[1], "rvcs": []}
    for line in lines[2:]:
        if line.startswith("rvc "):
            doc["rvcs"].append({"rvc": line[4:].rsplit(": ", 1)[0], "instances": []})
        elif line.startswith("  C"):
            head, _, rest = line.strip().partition(": ")
            members = []
            for tok in rest.split():
                tenant, _, variant = tok.rpartition(".")
                members.append({"tenant": tenant, "variant": variant})
            doc["rvcs"][-1]["instances"].append({"index": int(head[1:]), "members": members})
        elif line.startswith("totals: "):
            kv = dict(p.split("=") for p in line[8:].split())
            doc["totals"] = {
                "instances": int(kv["instances"]),
                "single_tenancy": int(kv["single_tenancy"]),
                "pure_mt": int(kv["pure_mt"]),
                "savings_ratio": float(kv["savings_ratio"]),
            }
        elif line.startswith("optimality: "):
            kv = dict(p.split("=") for p in line[12:].split())
            doc["optimality"] = {
                "audited": kv["audited"] == "yes",
                "exact": None if kv["exact"] == "unknown" else int(kv["exact"]),
                "gap": None if kv["gap"] == "unknown" else int(kv["gap"]),
            }
    return doc


def distribution_from_report(doc: dict[str, Any]) -> tuple[Distribution, CostSummary, Optimality]:
    mode = Mode(doc["mode"])
    per_rvc: dict[str, RvcColoring] = {}
    view: dict[str, dict[str, set[tuple[str, int]]]] = {}
    for entry in doc["rvcs"]:
        classes = []
        assignment = {}
        for inst in entry["instances"]:
            cells = tuple((m["tenant"], m["variant"]) for m in inst["members"])
            variant = cells[0][1] if mode is Mode.PER_VARIANT and cells else None
            classes.append(ColorClass(inst["index"], cells, variant))
            for t, v in cells:
                assignment[(t, v)] = inst["index"]
                view.setdefault(t, {}).setdefault(entry["rvc"], set()).add((v, inst["index"]))
        per_rvc[entry["rvc"]] = RvcColoring(entry["rvc"], mode, tuple(classes), assignment)
    tot = doc["totals"]
    opt = doc["optimality"]
    dist = Distribution(
        app=doc["app"],
        mode=mode,
        per_rvc=per_rvc,
        total_instances=sum(c.d for c in per_rvc.values()),
        per_tenant_view={t: {r: frozenset(s) for r, s in m.items()} for t, m in view.items()},
    )
    summary = CostSummary(tot["instances"], tot["single_tenancy"], tot["pure_mt"], tot["savings_ratio"])
    return dist, summary, Optimality(opt["audited"], opt["exact"], opt["gap"])
