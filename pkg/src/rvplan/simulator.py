"""Seeded random tenant populations and planning sweeps over them.

Every draw goes through one ``random.Random(seed)``. Per requirement cell
the same number of draws is consumed whatever the strictness weights are, so
two scenarios that differ only in the DSWAny weight see the same underlying
stream (paired-seed comparisons rely on this).
"""

from __future__ import annotations

import csv
import math
import random
import time
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass, field
from typing import IO, Any

from rvplan.model import (
    Application,
    Bundle,
    Catalog,
    ConfigurationTemplate,
    DeploymentCell,
    DeploymentRequirements,
    FunctionalRequirement,
    Registry,
    Rvc,
    Tenant,
)
from rvplan.pipeline import plan

FORMS = ("SWAny", "SWJ", "DSW", "DSWAny")
APP_ID = "app"
CSV_HEADER = ("seed", "tenants", "rvcs", "variants", "strict_dswany", "d_greedy", "d_exact", "gap", "ms")


@dataclass(frozen=True)
class ScenarioSpec:
    tenants: int = 6
    rvcs: int = 1
    variants_per_rvc: int = 3
    functionality_count: int = 4
    selection_density: float = 0.5
    strictness: dict[str, float] = field(default_factory=lambda: {"SWAny": 1.0})
    partner_density: float = 0.2
    competitor_density: float = 0.2
    seed: int = 0

    def validate(self) -> None:
        for name in ("tenants", "rvcs", "variants_per_rvc", "functionality_count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("selection_density", "partner_density", "competitor_density"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.partner_density + self.competitor_density > 1.0:
            raise ValueError("partner_density + competitor_density must not exceed 1")
        unknown = set(self.strictness) - set(FORMS)
        if unknown:
            raise ValueError(f"unknown strictness forms: {sorted(unknown)}")
        if any(not 0.0 <= w <= 1.0 for w in self.strictness.values()):
            raise ValueError("strictness weights must be in [0, 1]")
        if not math.isclose(sum(self.strictness.values()), 1.0, abs_tol=1e-9):
            raise ValueError("strictness weights must sum to 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> ScenarioSpec:
        known = {f for f in cls.__dataclass_fields__}
        extra = set(raw) - known
        if extra:
            raise ValueError(f"unknown scenario fields: {sorted(extra)}")
        spec = cls(**raw)
        spec.validate()
        return spec


def _sample_others(rng: random.Random, m: int, i: int, k: int) -> list[int]:
    """``k`` distinct indices in ``range(m)`` other than ``i``."""
    picks = rng.sample(range(m - 1), min(k, m - 1))
    return [p + 1 if p >= i else p for p in picks]


def generate(spec: ScenarioSpec) -> Bundle:
    spec.validate()
    rng = random.Random(spec.seed)
    m = spec.tenants
    ids = [f"T{i + 1}" for i in range(m)]

    tenants = []
    for i in range(m):
        n_p = round(spec.partner_density * (m - 1))
        n_c = round(spec.competitor_density * (m - 1))
        picks = _sample_others(rng, m, i, n_p + n_c)
        tenants.append(
            Tenant(
                ids[i],
                frozenset(ids[j] for j in picks[:n_p]),
                frozenset(ids[j] for j in picks[n_p:]),
            )
        )

    rvcs = tuple(
        Rvc(f"R{r + 1}", tuple(f"V{v + 1}" for v in range(spec.variants_per_rvc)))
        for r in range(spec.rvcs)
    )
    pairs = [(r.id, v) for r in rvcs for v in r.variants]
    funcs = [f"F{f + 1}" for f in range(spec.functionality_count)]
    realization = {}
    for f in funcs:
        k = rng.randint(1, 3)
        chosen = sorted(rng.sample(range(len(pairs)), min(k, len(pairs))))
        realization[f] = tuple(pairs[c] for c in chosen)

    w_dswany = spec.strictness.get("DSWAny", 0.0)
    rest = [spec.strictness.get(f, 0.0) for f in ("SWAny", "SWJ", "DSW")]
    rest_total = sum(rest)

    selections = []
    cells = []
    for i in range(m):
        chosen_funcs = [f for f in funcs if rng.random() < spec.selection_density]
        fallback = rng.randrange(len(funcs))
        if not chosen_funcs:
            chosen_funcs = [funcs[fallback]]
        selections.append(FunctionalRequirement(ids[i], APP_ID, tuple(chosen_funcs)))
        for f in chosen_funcs:
            u_strict = rng.random()
            u_form = rng.random()
            n_targets = rng.randint(1, 3)
            targets = []
            for _ in range(n_targets):
                u_ref = rng.random()
                other = _sample_others(rng, m, i, 1) if m > 1 else []
                if u_ref < 0.2:
                    targets.append("P")
                elif u_ref < 0.4:
                    targets.append("Cp")
                elif other:
                    targets.append(ids[other[0]])
                else:
                    targets.append("P")
            if u_strict < w_dswany or rest_total == 0.0:
                form = "DSWAny"
            else:
                acc = 0.0
                form = "DSW"
                for name, w in zip(("SWAny", "SWJ", "DSW"), rest):
                    acc += w / rest_total
                    if u_form < acc:
                        form = name
                        break
            if form == "SWAny":
                continue
            if form == "DSWAny":
                text = "DSWAny"
            else:
                text = f"{form}({','.join(dict.fromkeys(targets))})"
            cells.append(DeploymentCell(ids[i], f, (text,)))

    return Bundle(
        catalog=Catalog((Application(APP_ID, tuple(funcs)),)),
        templates=(ConfigurationTemplate(APP_ID, rvcs, realization),),
        registry=Registry(tuple(tenants)),
        functional=tuple(selections),
        deployment=(DeploymentRequirements(APP_ID, tuple(cells)),),
    )


@dataclass(frozen=True)
class SweepRow:
    seed: int
    tenants: int
    rvcs: int
    variants: int
    strict_dswany: float
    d_greedy: int
    d_exact: int | None
    gap: int | None
    ms: float

    def as_csv(self) -> list[Any]:
        return ["" if v is None else v for v in asdict(self).values()]


def run_scenario(spec: ScenarioSpec, exact_limit: int) -> SweepRow:
    start = time.perf_counter()
    bundle = generate(spec)
    result = plan(bundle, APP_ID, exact_limit=exact_limit)
    ms = (time.perf_counter() - start) * 1000.0
    return SweepRow(
        seed=spec.seed,
        tenants=spec.tenants,
        rvcs=spec.rvcs,
        variants=spec.variants_per_rvc,
        strict_dswany=spec.strictness.get("DSWAny", 0.0),
        d_greedy=result.distribution.total_instances,
        d_exact=result.optimality.exact,
        gap=result.optimality.gap,
        ms=round(ms, 3),
    )


def sweep(specs: Iterable[ScenarioSpec], exact_limit: int = 12) -> list[SweepRow]:
    return [run_scenario(s, exact_limit) for s in specs]


def write_csv(rows: Sequence[SweepRow], fp: IO[str]) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.as_csv())


def specs_from_json(doc: dict[str, Any]) -> list[ScenarioSpec]:
    """Bench file: ``{"rv_schema": 1, "scenarios": [{...}, ...]}``; a ``seeds`` list expands one scenario."""
    if not isinstance(doc, dict) or doc.get("rv_schema") != 1:
        raise ValueError("bench spec must be an object with rv_schema 1")
    scenarios = doc.get("scenarios")
    if not isinstance(scenarios, list) or not scenarios:
        raise ValueError("bench spec needs a non-empty 'scenarios' list")
    out = []
    for raw in scenarios:
        if not isinstance(raw, dict):
            raise ValueError("each scenario must be an object")
        raw = dict(raw)
        seeds = raw.pop("seeds", None)
        if seeds is None:
            out.append(ScenarioSpec.from_dict(raw))
        else:
            for s in seeds:
                out.append(ScenarioSpec.from_dict({**raw, "seed": s}))
    return out
