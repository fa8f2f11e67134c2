"""Domain entities for one planning bundle, plus cross-reference validation.

Objects here are built permissively from input files; :func:`validate_bundle`
is where invariants are checked. Declared order of tenants and variants is
kept everywhere since downstream iteration depends on it.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterator
from dataclasses import dataclass, field

from rvplan.expressions import (
    COMPETITORS_TOKEN,
    PARTNERS_TOKEN,
    TENANT_ID_RE,
    ExpressionSyntaxError,
    parse_expression,
)


@dataclass(frozen=True)
class Tenant:
    id: str
    partners: frozenset[str] = frozenset()
    competitors: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Registry:
    tenants: tuple[Tenant, ...]
    _by_id: dict[str, Tenant] = field(init=False, repr=False, compare=False)
    id_set: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_id: dict[str, Tenant] = {}
        for t in self.tenants:
            by_id.setdefault(t.id, t)
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "id_set", frozenset(by_id))

    def __getitem__(self, tenant: str) -> Tenant:
        return self._by_id[tenant]

    def __contains__(self, tenant: object) -> bool:
        return tenant in self._by_id

    def __iter__(self) -> Iterator[Tenant]:
        return iter(self.tenants)

    def __len__(self) -> int:
        return len(self.tenants)

    @property
    def ids(self) -> list[str]:
        return list(self._by_id)

    def order(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self._by_id)}


@dataclass(frozen=True)
class Rvc:
    id: str
    variants: tuple[str, ...]


@dataclass(frozen=True)
class Application:
    id: str
    functionalities: tuple[str, ...]
    variation_points: dict[str, str] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class Catalog:
    applications: tuple[Application, ...]

    def get(self, app: str) -> Application | None:
        for a in self.applications:
            if a.id == app:
                return a
        return None


@dataclass(frozen=True)
class ConfigurationTemplate:
    app: str
    rvcs: tuple[Rvc, ...]
    realization: dict[str, tuple[tuple[str, str], ...]]

    def rvc(self, rvc_id: str) -> Rvc | None:
        for r in self.rvcs:
            if r.id == rvc_id:
                return r
        return None


@dataclass(frozen=True)
class FunctionalRequirement:
    tenant: str
    app: str
    selected: tuple[str, ...]


@dataclass(frozen=True)
class DeploymentCell:
    tenant: str
    functionality: str
    expressions: tuple[str, ...]


@dataclass(frozen=True)
class DeploymentRequirements:
    app: str
    cells: tuple[DeploymentCell, ...]


@dataclass(frozen=True)
class Bundle:
    catalog: Catalog
    templates: tuple[ConfigurationTemplate, ...]
    registry: Registry
    functional: tuple[FunctionalRequirement, ...]
    deployment: tuple[DeploymentRequirements, ...]

    def template_for(self, app: str) -> ConfigurationTemplate | None:
        for t in self.templates:
            if t.app == app:
                return t
        return None

    @property
    def apps(self) -> list[str]:
        """Applications with functional requirements, in first-mention order."""
        seen: dict[str, None] = {}
        for fr in self.functional:
            seen.setdefault(fr.app)
        return list(seen)


@dataclass(frozen=True)
class Issue:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


@dataclass
class ValidationReport:
    errors: list[Issue] = field(default_factory=list)
    warnings: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, path: str, message: str) -> None:
        self.errors.append(Issue(path, message))

    def warn(self, path: str, message: str) -> None:
        self.warnings.append(Issue(path, message))

    def render(self) -> str:
        lines = [f"error: {e}" for e in self.errors]
        lines += [f"warning: {w}" for w in self.warnings]
        lines.append(f"{len(self.errors)} error(s), {len(self.warnings)} warning(s)")
        return "\n".join(lines)


def _check_id(report: ValidationReport, path: str, value: str, kind: str) -> bool:
    if not value or not value.strip():
        report.error(path, f"empty {kind} id")
        return False
    return True


def _duplicates(values: list[str]) -> set[str]:
    return {v for v, n in Counter(values).items() if n > 1}


def _validate_registry(registry: Registry, report: ValidationReport) -> None:
    ids = [t.id for t in registry.tenants]
    dups = _duplicates(ids)
    reported: set[str] = set()
    for i, t in enumerate(registry.tenants):
        path = f"registry.tenants[{i}]"
        if not _check_id(report, f"{path}.id", t.id, "tenant"):
            continue
        if t.id in (PARTNERS_TOKEN, COMPETITORS_TOKEN):
            report.error(f"{path}.id", f"tenant id {t.id!r} is reserved")
        elif not TENANT_ID_RE.fullmatch(t.id):
            report.error(f"{path}.id", f"tenant id {t.id!r} is not a valid expression token")
        if t.id in dups and t.id not in reported:
            report.error(f"{path}.id", f"duplicate tenant id {t.id!r}")
            reported.add(t.id)
        for rel in ("partners", "competitors"):
            for ref in sorted(getattr(t, rel)):
                if ref == t.id:
                    report.error(f"{path}.{rel}", f"tenant {t.id!r} lists itself")
                elif ref not in registry:
                    report.error(f"{path}.{rel}", f"unknown tenant {ref!r}")


def _validate_catalog(catalog: Catalog, report: ValidationReport) -> None:
    dups = _duplicates([a.id for a in catalog.applications])
    for i, app in enumerate(catalog.applications):
        path = f"catalog.applications[{i}]"
        _check_id(report, f"{path}.id", app.id, "application")
        if app.id in dups:
            report.error(f"{path}.id", f"duplicate application id {app.id!r}")
        for f in _duplicates(list(app.functionalities)):
            report.error(f"{path}.functionalities", f"duplicate functionality id {f!r}")
        for j, f in enumerate(app.functionalities):
            _check_id(report, f"{path}.functionalities[{j}]", f, "functionality")
        for vp in app.variation_points:
            if vp not in app.functionalities:
                report.error(f"{path}.variation_points", f"unknown functionality {vp!r}")


def _validate_template(
    i: int, tpl: ConfigurationTemplate, catalog: Catalog, report: ValidationReport
) -> None:
    path = f"templates[{i}]"
    app = catalog.get(tpl.app)
    if app is None:
        report.error(f"{path}.app", f"unknown application {tpl.app!r}")
    for r in sorted(_duplicates([r.id for r in tpl.rvcs])):
        report.error(f"{path}.rvcs", f"duplicate RVC id {r!r}")
    for j, rvc in enumerate(tpl.rvcs):
        rpath = f"{path}.rvcs[{j}]"
        _check_id(report, f"{rpath}.id", rvc.id, "RVC")
        if not rvc.variants:
            report.error(f"{rpath}.variants", f"RVC {rvc.id!r} declares no variants")
        for v in sorted(_duplicates(list(rvc.variants))):
            report.error(f"{rpath}.variants", f"duplicate variant id {v!r}")
        for k, v in enumerate(rvc.variants):
            _check_id(report, f"{rpath}.variants[{k}]", v, "variant")
    for func, pairs in tpl.realization.items():
        fpath = f"{path}.realization.{func}"
        if app is not None and func not in app.functionalities:
            report.error(fpath, f"unknown functionality {func!r}")
        if not pairs:
            report.error(fpath, f"functionality {func!r} is realized by nothing")
        for k, (rvc_id, variant) in enumerate(pairs):
            rvc = tpl.rvc(rvc_id)
            if rvc is None:
                report.error(f"{fpath}[{k}].rvc", f"unknown RVC {rvc_id!r}")
            elif variant not in rvc.variants:
                report.error(
                    f"{fpath}[{k}].variant", f"unknown variant {variant!r} of RVC {rvc_id!r}"
                )
    if app is not None:
        for func in app.functionalities:
            if func not in tpl.realization:
                report.error(f"{path}.realization", f"functionality {func!r} has no realization")


def _validate_functional(bundle: Bundle, report: ValidationReport) -> dict[tuple[str, str], set[str]]:
    selected: dict[tuple[str, str], set[str]] = {}
    for i, fr in enumerate(bundle.functional):
        path = f"functional.selections[{i}]"
        app = bundle.catalog.get(fr.app)
        if app is None:
            report.error(f"{path}.app", f"unknown application {fr.app!r}")
        elif bundle.template_for(fr.app) is None:
            report.error(f"{path}.app", f"no configuration template for application {fr.app!r}")
        if fr.tenant not in bundle.registry:
            report.error(f"{path}.tenant", f"unknown tenant {fr.tenant!r}")
        key = (fr.tenant, fr.app)
        if key in selected:
            report.error(f"{path}.tenant", f"duplicate selection for tenant {fr.tenant!r}")
        if not fr.selected:
            report.error(f"{path}.functionalities", "empty functionality selection")
        for f in sorted(_duplicates(list(fr.selected))):
            report.error(f"{path}.functionalities", f"duplicate functionality id {f!r}")
        for j, f in enumerate(fr.selected):
            if app is not None and f not in app.functionalities:
                report.error(f"{path}.functionalities[{j}]", f"unknown functionality {f!r}")
        selected.setdefault(key, set()).update(fr.selected)
    return selected


def _validate_deployment(
    bundle: Bundle, selected: dict[tuple[str, str], set[str]], report: ValidationReport
) -> None:
    registry = bundle.registry
    for d, dep in enumerate(bundle.deployment):
        dpath = "deployment" if len(bundle.deployment) == 1 else f"deployment[{d}]"
        app = bundle.catalog.get(dep.app)
        if app is None:
            report.error(f"{dpath}.app", f"unknown application {dep.app!r}")
        seen: set[tuple[str, str]] = set()
        for i, cell in enumerate(dep.cells):
            path = f"{dpath}.cells[{i}]"
            known_tenant = cell.tenant in registry
            if not known_tenant:
                report.error(f"{path}.tenant", f"unknown tenant {cell.tenant!r}")
            if app is not None and cell.functionality not in app.functionalities:
                report.error(f"{path}.functionality", f"unknown functionality {cell.functionality!r}")
            key = (cell.tenant, cell.functionality)
            if key in seen:
                report.error(path, f"duplicate cell for ({cell.tenant}, {cell.functionality})")
            seen.add(key)
            if known_tenant and cell.functionality not in selected.get((cell.tenant, dep.app), ()):
                report.warn(
                    path,
                    f"tenant {cell.tenant!r} does not select {cell.functionality!r}; cell ignored",
                )
            if not cell.expressions:
                report.warn(f"{path}.expressions", "no expression given; defaulted to SWAny")
            for k, text in enumerate(cell.expressions):
                epath = f"{path}.expressions[{k}]"
                try:
                    expr = parse_expression(text)
                except ExpressionSyntaxError as exc:
                    report.error(epath, str(exc))
                    continue
                for ref in sorted(expr.targets):
                    if ref.tenant is None:
                        continue
                    if ref.tenant == cell.tenant:
                        report.warn(epath, f"self-reference stripped: {ref.tenant!r}")
                    elif ref.tenant not in registry:
                        report.error(epath, f"unknown tenant {ref.tenant!r}")


def validate_bundle(bundle: Bundle) -> ValidationReport:
    report = ValidationReport()
    _validate_registry(bundle.registry, report)
    _validate_catalog(bundle.catalog, report)
    apps_with_template = Counter(t.app for t in bundle.templates)
    for i, tpl in enumerate(bundle.templates):
        _validate_template(i, tpl, bundle.catalog, report)
        if apps_with_template[tpl.app] > 1:
            report.error(f"templates[{i}].app", f"duplicate template for application {tpl.app!r}")
    selected = _validate_functional(bundle, report)
    _validate_deployment(bundle, selected, report)
    return report
