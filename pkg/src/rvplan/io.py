"""Reading and writing bundle files (JSON, ``"rv_schema": 1``)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

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

SCHEMA_VERSION = 1

CATALOG_FILE = "catalog.json"
REGISTRY_FILE = "registry.json"
FUNCTIONAL_FILE = "functional.json"
DEPLOYMENT_FILE = "deployment.json"
TEMPLATE_GLOBS = ("template.json", "template_*.json", "templates/*.json")


class BundleFormatError(ValueError):
    """Input could not be read or does not have the expected document shape."""


@dataclass(frozen=True)
class BundlePaths:
    catalog: Path
    templates: tuple[Path, ...]
    registry: Path
    functional: Path
    deployment: Path

    @classmethod
    def from_dir(cls, root: str | Path) -> BundlePaths:
        root = Path(root)
        templates: list[Path] = []
        for pattern in TEMPLATE_GLOBS:
            templates.extend(sorted(root.glob(pattern)))
        return cls(
            catalog=root / CATALOG_FILE,
            templates=tuple(templates),
            registry=root / REGISTRY_FILE,
            functional=root / FUNCTIONAL_FILE,
            deployment=root / DEPLOYMENT_FILE,
        )


def _read(path: Path) -> dict[str, Any]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise BundleFormatError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise BundleFormatError(f"{path}: invalid JSON: {exc}") from exc
    _check_schema(doc, str(path))
    return doc


def _check_schema(doc: Any, where: str) -> None:
    if not isinstance(doc, dict):
        raise BundleFormatError(f"{where}: expected a JSON object")
    version = doc.get("rv_schema")
    if version != SCHEMA_VERSION:
        raise BundleFormatError(f"{where}: unsupported rv_schema {version!r}")


def _str(value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise BundleFormatError(f"{where}: expected a string, got {type(value).__name__}")
    return value


def _list(value: Any, where: str) -> list[Any]:
    if not isinstance(value, list):
        raise BundleFormatError(f"{where}: expected a list")
    return value


def _obj(value: Any, where: str) -> dict[str, Any]:
    if not isinstance(value, dict):
        raise BundleFormatError(f"{where}: expected an object")
    return value


def _strs(value: Any, where: str) -> tuple[str, ...]:
    return tuple(_str(v, f"{where}[{i}]") for i, v in enumerate(_list(value, where)))


def catalog_from_json(doc: dict[str, Any]) -> Catalog:
    _check_schema(doc, "catalog")
    apps = []
    for i, raw in enumerate(_list(doc.get("applications"), "catalog.applications")):
        where = f"catalog.applications[{i}]"
        raw = _obj(raw, where)
        vps = _obj(raw.get("variation_points", {}), f"{where}.variation_points")
        apps.append(
            Application(
                id=_str(raw.get("id"), f"{where}.id"),
                functionalities=_strs(raw.get("functionalities"), f"{where}.functionalities"),
                variation_points={k: str(v) for k, v in vps.items()},
            )
        )
    return Catalog(tuple(apps))


def template_from_json(doc: dict[str, Any], where: str = "template") -> ConfigurationTemplate:
    _check_schema(doc, where)
    rvcs = []
    for i, raw in enumerate(_list(doc.get("rvcs"), f"{where}.rvcs")):
        raw = _obj(raw, f"{where}.rvcs[{i}]")
        rvcs.append(
            Rvc(
                _str(raw.get("id"), f"{where}.rvcs[{i}].id"),
                _strs(raw.get("variants"), f"{where}.rvcs[{i}].variants"),
            )
        )
    realization: dict[str, tuple[tuple[str, str], ...]] = {}
    for func, pairs in _obj(doc.get("realization"), f"{where}.realization").items():
        fwhere = f"{where}.realization.{func}"
        out = []
        for k, p in enumerate(_list(pairs, fwhere)):
            p = _obj(p, f"{fwhere}[{k}]")
            out.append((_str(p.get("rvc"), f"{fwhere}[{k}].rvc"), _str(p.get("variant"), f"{fwhere}[{k}].variant")))
        realization[func] = tuple(out)
    return ConfigurationTemplate(_str(doc.get("app"), f"{where}.app"), tuple(rvcs), realization)


def registry_from_json(doc: dict[str, Any]) -> Registry:
    _check_schema(doc, "registry")
    tenants = []
    for i, raw in enumerate(_list(doc.get("tenants"), "registry.tenants")):
        where = f"registry.tenants[{i}]"
        raw = _obj(raw, where)
        tenants.append(
            Tenant(
                _str(raw.get("id"), f"{where}.id"),
                frozenset(_strs(raw.get("partners", []), f"{where}.partners")),
                frozenset(_strs(raw.get("competitors", []), f"{where}.competitors")),
            )
        )
    return Registry(tuple(tenants))


def functional_from_json(doc: dict[str, Any]) -> tuple[FunctionalRequirement, ...]:
    _check_schema(doc, "functional")
    app = _str(doc.get("app"), "functional.app")
    out = []
    for i, raw in enumerate(_list(doc.get("selections"), "functional.selections")):
        where = f"functional.selections[{i}]"
        raw = _obj(raw, where)
        out.append(
            FunctionalRequirement(
                _str(raw.get("tenant"), f"{where}.tenant"),
                app,
                _strs(raw.get("functionalities"), f"{where}.functionalities"),
            )
        )
    return tuple(out)


def deployment_from_json(doc: dict[str, Any]) -> DeploymentRequirements:
    _check_schema(doc, "deployment")
    cells = []
    for i, raw in enumerate(_list(doc.get("cells", []), "deployment.cells")):
        where = f"deployment.cells[{i}]"
        raw = _obj(raw, where)
        cells.append(
            DeploymentCell(
                _str(raw.get("tenant"), f"{where}.tenant"),
                _str(raw.get("functionality"), f"{where}.functionality"),
                _strs(raw.get("expressions", []), f"{where}.expressions"),
            )
        )
    return DeploymentRequirements(_str(doc.get("app"), "deployment.app"), tuple(cells))


def bundle_from_json(
    catalog: dict[str, Any],
    templates: list[dict[str, Any]],
    registry: dict[str, Any],
    functional: dict[str, Any],
    deployment: dict[str, Any],
) -> Bundle:
    return Bundle(
        catalog=catalog_from_json(catalog),
        templates=tuple(template_from_json(t, f"templates[{i}]") for i, t in enumerate(templates)),
        registry=registry_from_json(registry),
        functional=functional_from_json(functional),
        deployment=(deployment_from_json(deployment),),
    )


def load_bundle(paths: BundlePaths | str | Path) -> Bundle:
    if not isinstance(paths, BundlePaths):
        paths = BundlePaths.from_dir(paths)
    if not paths.templates:
        raise BundleFormatError("no configuration template file found")
    return bundle_from_json(
        _read(paths.catalog),
        [_read(p) for p in paths.templates],
        _read(paths.registry),
        _read(paths.functional),
        _read(paths.deployment),
    )


def bundle_to_json(bundle: Bundle) -> dict[str, Any]:
    """Inverse of :func:`bundle_from_json` for single-application bundles."""
    app = bundle.functional[0].app if bundle.functional else bundle.templates[0].app
    dep = bundle.deployment[0] if bundle.deployment else DeploymentRequirements(app, ())
    return {
        "catalog": {
            "rv_schema": SCHEMA_VERSION,
            "applications": [
                {
                    "id": a.id,
                    "functionalities": list(a.functionalities),
                    **({"variation_points": dict(a.variation_points)} if a.variation_points else {}),
                }
                for a in bundle.catalog.applications
            ],
        },
        "templates": [
            {
                "rv_schema": SCHEMA_VERSION,
                "app": t.app,
                "rvcs": [{"id": r.id, "variants": list(r.variants)} for r in t.rvcs],
                "realization": {
                    f: [{"rvc": r, "variant": v} for r, v in pairs]
                    for f, pairs in t.realization.items()
                },
            }
            for t in bundle.templates
        ],
        "registry": {
            "rv_schema": SCHEMA_VERSION,
            "tenants": [
                {"id": t.id, "partners": sorted(t.partners), "competitors": sorted(t.competitors)}
                for t in bundle.registry
            ],
        },
        "functional": {
            "rv_schema": SCHEMA_VERSION,
            "app": app,
            "selections": [
                {"tenant": fr.tenant, "functionalities": list(fr.selected)} for fr in bundle.functional
            ],
        },
        "deployment": {
            "rv_schema": SCHEMA_VERSION,
            "app": dep.app,
            "cells": [
                {"tenant": c.tenant, "functionality": c.functionality, "expressions": list(c.expressions)}
                for c in dep.cells
            ],
        },
    }


def write_bundle(bundle: Bundle, root: str | Path) -> BundlePaths:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    docs = bundle_to_json(bundle)
    names = {
        "catalog": CATALOG_FILE,
        "registry": REGISTRY_FILE,
        "functional": FUNCTIONAL_FILE,
        "deployment": DEPLOYMENT_FILE,
    }
    for key, name in names.items():
        (root / name).write_text(json.dumps(docs[key], indent=2) + "\n", encoding="utf-8")
    templates = docs["templates"]
    if len(templates) == 1:
        (root / "template.json").write_text(json.dumps(templates[0], indent=2) + "\n", encoding="utf-8")
    else:
        for t in templates:
            (root / f"template_{t['app']}.json").write_text(json.dumps(t, indent=2) + "\n", encoding="utf-8")
    return BundlePaths.from_dir(root)
