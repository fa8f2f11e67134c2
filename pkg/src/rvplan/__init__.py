"""Instance planning for multi-tenant SaaS applications built from rich-variant components.

Tenants pick application functionalities and attach sharing expressions
(``SWAny``, ``SWJ(...)``, ``DSW(...)``, ``DSWAny``) to them. The pipeline
translates those into per-component variant tables, builds edge-labeled
sharing graphs, complements them into conflict graphs and colors the
conflict graphs so that every color class is one deployed instance.
"""

from rvplan.allocation import (
    ColorClass,
    RvcColoring,
    check_validity,
    exact_min_color,
    greedy_color,
    per_variant_color,
)
from rvplan.expressions import (
    AllowedSet,
    Form,
    Ref,
    SharingExpression,
    combine,
    parse_expression,
    render_expression,
    resolve,
)
from rvplan.graph import LabeledGraph, build_relationship_graph, complement
from rvplan.io import load_bundle, write_bundle
from rvplan.model import (
    Bundle,
    Catalog,
    ConfigurationTemplate,
    FunctionalRequirement,
    Registry,
    Rvc,
    Tenant,
    ValidationReport,
    validate_bundle,
)
from rvplan.pipeline import plan
from rvplan.reporting import (
    CostSummary,
    Distribution,
    assemble,
    cost_summary,
    export_dot,
    render_report,
)
from rvplan.variability import (
    RichVariantConfiguration,
    VariantRequirementTable,
    translate,
)

__all__ = [
    "AllowedSet",
    "Bundle",
    "Catalog",
    "ColorClass",
    "ConfigurationTemplate",
    "CostSummary",
    "Distribution",
    "Form",
    "FunctionalRequirement",
    "LabeledGraph",
    "Ref",
    "Registry",
    "RichVariantConfiguration",
    "Rvc",
    "RvcColoring",
    "SharingExpression",
    "Tenant",
    "ValidationReport",
    "VariantRequirementTable",
    "assemble",
    "build_relationship_graph",
    "check_validity",
    "combine",
    "complement",
    "cost_summary",
    "exact_min_color",
    "export_dot",
    "greedy_color",
    "load_bundle",
    "parse_expression",
    "per_variant_color",
    "plan",
    "render_expression",
    "render_report",
    "resolve",
    "translate",
    "validate_bundle",
    "write_bundle",
]
