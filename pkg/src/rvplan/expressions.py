"""Sharing expressions, their resolution to allowed sets, and the combination algebra.

Grammar (keywords are case-sensitive, whitespace around tokens is ignored)::

    expr    := "SWAny" | "DSWAny" | "SWJ" "(" refs ")" | "DSW" "(" refs ")"
    refs    := ref ("," ref)*
    ref     := "P" | "Cp" | tenant-id

Every expression reduces to the set of tenants its declarer is willing to
share with (an :class:`AllowedSet`). Combining two expressions on the same
cell is the intersection of their allowed sets.
"""

from __future__ import annotations

import enum
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Protocol


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, text: str, offset: int):
        super().__init__(f"{message} at offset {offset} in {text!r}")
        self.text = text
        self.offset = offset


class ResolutionError(KeyError):
    """A ``Specific`` reference names a tenant the registry does not know."""

    def __init__(self, tenant: str):
        super().__init__(tenant)
        self.tenant = tenant

    def __str__(self) -> str:
        return f"unknown tenant {self.tenant!r}"


class Form(str, enum.Enum):
    SWANY = "SWAny"
    SWJ = "SWJ"
    DSW = "DSW"
    DSWANY = "DSWAny"


PARTNERS_TOKEN = "P"
COMPETITORS_TOKEN = "Cp"
TENANT_ID_RE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.\-]*")
_KEYWORD_RE = re.compile(r"[A-Za-z]+")
_WS = " \t\r\n"


@dataclass(frozen=True, order=True)
class Ref:
    """One target reference: the declarer's partners, competitors, or a named tenant."""

    # sort key keeps P < Cp < tenants in rendered output
    rank: int = field(repr=False, compare=True)
    tenant: str | None = None

    @classmethod
    def partners(cls) -> Ref:
        return cls(0)

    @classmethod
    def competitors(cls) -> Ref:
        return cls(1)

    @classmethod
    def specific(cls, tenant: str) -> Ref:
        return cls(2, tenant)

    @property
    def is_partners(self) -> bool:
        return self.rank == 0

    @property
    def is_competitors(self) -> bool:
        return self.rank == 1

    def __str__(self) -> str:
        if self.rank == 0:
            return PARTNERS_TOKEN
        if self.rank == 1:
            return COMPETITORS_TOKEN
        return str(self.tenant)

    def __repr__(self) -> str:
        if self.rank == 0:
            return "Partners"
        if self.rank == 1:
            return "Competitors"
        return f"Specific({self.tenant})"


PARTNERS = Ref.partners()
COMPETITORS = Ref.competitors()


@dataclass(frozen=True)
class SharingExpression:
    form: Form
    targets: frozenset[Ref] = frozenset()

    def __post_init__(self) -> None:
        has_targets = self.form in (Form.SWJ, Form.DSW)
        if has_targets and not self.targets:
            raise ValueError(f"{self.form.value} needs at least one target")
        if not has_targets and self.targets:
            raise ValueError(f"{self.form.value} takes no targets")

    def __str__(self) -> str:
        return render_expression(self)


SWANY = SharingExpression(Form.SWANY)
DSWANY = SharingExpression(Form.DSWANY)


def swj(*refs: Ref | str) -> SharingExpression:
    return SharingExpression(Form.SWJ, frozenset(_as_ref(r) for r in refs))


def dsw(*refs: Ref | str) -> SharingExpression:
    return SharingExpression(Form.DSW, frozenset(_as_ref(r) for r in refs))


def _as_ref(value: Ref | str) -> Ref:
    if isinstance(value, Ref):
        return value
    if value == PARTNERS_TOKEN:
        return PARTNERS
    if value == COMPETITORS_TOKEN:
        return COMPETITORS
    return Ref.specific(value)


def render_expression(expr: SharingExpression) -> str:
    if expr.form in (Form.SWANY, Form.DSWANY):
        return expr.form.value
    return f"{expr.form.value}({','.join(str(r) for r in sorted(expr.targets))})"


def parse_expression(text: str) -> SharingExpression:
    pos = _skip_ws(text, 0)
    m = _KEYWORD_RE.match(text, pos)
    if not m:
        raise ExpressionSyntaxError("expected SWAny, DSWAny, SWJ or DSW", text, pos)
    keyword = m.group()
    try:
        form = Form(keyword)
    except ValueError:
        raise ExpressionSyntaxError(f"unknown keyword {keyword!r}", text, pos) from None
    pos = m.end()

    targets: list[Ref] = []
    if form in (Form.SWJ, Form.DSW):
        pos = _skip_ws(text, pos)
        if pos >= len(text) or text[pos] != "(":
            raise ExpressionSyntaxError("expected '('", text, pos)
        pos = _skip_ws(text, pos + 1)
        if pos < len(text) and text[pos] == ")":
            raise ExpressionSyntaxError("empty target list", text, pos)
        while True:
            pos = _skip_ws(text, pos)
            tm = TENANT_ID_RE.match(text, pos)
            if not tm:
                raise ExpressionSyntaxError("expected P, Cp or a tenant id", text, pos)
            targets.append(_as_ref(tm.group()))
            pos = _skip_ws(text, tm.end())
            if pos < len(text) and text[pos] == ",":
                pos += 1
                continue
            if pos < len(text) and text[pos] == ")":
                pos += 1
                break
            raise ExpressionSyntaxError("expected ',' or ')'", text, pos)

    pos = _skip_ws(text, pos)
    if pos != len(text):
        raise ExpressionSyntaxError("unexpected trailing input", text, pos)
    return SharingExpression(form, frozenset(targets))


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos] in _WS:
        pos += 1
    return pos


class _TenantLike(Protocol):
    id: str
    partners: frozenset[str]
    competitors: frozenset[str]


class _RegistryLike(Protocol):
    id_set: frozenset[str]

    def __getitem__(self, tenant: str) -> _TenantLike: ...


@dataclass(frozen=True, eq=False)
class AllowedSet:
    """Tenants a declarer permits to co-reside on a variant.

    Stored either as an explicit member list (``cofinite=False``) or as the
    exclusions from everybody else (``cofinite=True``) so that permissive
    sets over large registries stay small. Equality is on the denoted set.
    """

    declarer: str
    universe: frozenset[str]
    members: frozenset[str] = frozenset()
    cofinite: bool = False

    def __post_init__(self) -> None:
        members = self.members & self.universe
        if self.declarer in members:
            members = members - {self.declarer}
        n_others = len(self.universe) - 1
        cofinite = self.cofinite
        if len(members) == n_others and n_others > 0:
            # whole population listed: flip to the compact form
            members, cofinite = frozenset(), not cofinite
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "cofinite", cofinite)

    @classmethod
    def everyone(cls, declarer: str, universe: frozenset[str]) -> AllowedSet:
        return cls(declarer, universe, frozenset(), True)

    @classmethod
    def nobody(cls, declarer: str, universe: frozenset[str]) -> AllowedSet:
        return cls(declarer, universe, frozenset(), False)

    @property
    def others(self) -> frozenset[str]:
        return self.universe - {self.declarer}

    @property
    def allowed(self) -> frozenset[str]:
        if self.cofinite:
            return self.others - self.members
        return self.members

    def __contains__(self, tenant: object) -> bool:
        if tenant == self.declarer:
            return False
        if self.cofinite:
            return tenant in self.universe and tenant not in self.members
        return tenant in self.members

    def __len__(self) -> int:
        if self.cofinite:
            return len(self.universe) - 1 - len(self.members)
        return len(self.members)

    @property
    def is_all(self) -> bool:
        return len(self) == len(self.universe) - 1

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AllowedSet):
            return NotImplemented
        if self.declarer != other.declarer or self.universe != other.universe:
            return False
        if self.cofinite == other.cofinite:
            return self.members == other.members
        return len(self) == len(other) and self.allowed == other.allowed

    def __hash__(self) -> int:
        return hash((self.declarer, len(self)))

    def to_expression(self) -> SharingExpression:
        """Canonical expression: SWAny / DSWAny for the extremes, otherwise
        whichever of SWJ / DSW lists fewer tenants (SWJ on a tie)."""
        if self.is_all:
            return SWANY
        if self.is_empty:
            return DSWANY
        allowed = self.allowed
        excluded = self.others - allowed
        if len(allowed) <= len(excluded):
            return SharingExpression(Form.SWJ, frozenset(Ref.specific(t) for t in allowed))
        return SharingExpression(Form.DSW, frozenset(Ref.specific(t) for t in excluded))

    def __str__(self) -> str:
        return render_expression(self.to_expression())

    def __repr__(self) -> str:
        return f"AllowedSet({self.declarer}: {self})"


def expand_targets(
    targets: Iterable[Ref], declarer: str, registry: _RegistryLike
) -> frozenset[str]:
    """Concrete tenant ids behind a target list, relative to the declarer, minus the declarer."""
    tenant = registry[declarer]
    out: set[str] = set()
    for ref in targets:
        if ref.is_partners:
            out |= tenant.partners
        elif ref.is_competitors:
            out |= tenant.competitors
        else:
            if ref.tenant not in registry.id_set:
                raise ResolutionError(str(ref.tenant))
            out.add(str(ref.tenant))
    out.discard(declarer)
    return frozenset(out)


def resolve(expr: SharingExpression, declarer: str, registry: _RegistryLike) -> AllowedSet:
    if declarer not in registry.id_set:
        raise ResolutionError(declarer)
    universe = registry.id_set
    if expr.form is Form.SWANY:
        return AllowedSet.everyone(declarer, universe)
    if expr.form is Form.DSWANY:
        return AllowedSet.nobody(declarer, universe)
    targets = expand_targets(expr.targets, declarer, registry)
    return AllowedSet(declarer, universe, targets, cofinite=expr.form is Form.DSW)


def combine(a: AllowedSet, b: AllowedSet) -> AllowedSet:
    if a.declarer != b.declarer:
        raise ValueError(f"cannot combine sets of {a.declarer!r} and {b.declarer!r}")
    if a.universe != b.universe:
        raise ValueError("cannot combine sets resolved against different registries")
    if a.cofinite and b.cofinite:
        return AllowedSet(a.declarer, a.universe, a.members | b.members, True)
    if a.cofinite:
        return AllowedSet(a.declarer, a.universe, b.members - a.members, False)
    if b.cofinite:
        return AllowedSet(a.declarer, a.universe, a.members - b.members, False)
    return AllowedSet(a.declarer, a.universe, a.members & b.members, False)


def combine_all(sets: Sequence[AllowedSet]) -> AllowedSet:
    acc = sets[0]
    for s in sets[1:]:
        acc = combine(acc, s)
    return acc


# Named transition rules. Rows without an "(ext)" marker are the published
# table; the extensions cover partial overlaps with the same intersection rule.
RULE_SWA = "SWA | Z -> Z"
RULE_DSWA = "DSWA | Z -> DSWA"
RULE_DSW_DSW = "DSW(X) | DSW(Y) -> DSW(X,Y)"
RULE_SWJ_SWJ = "SWJ(X) | SWJ(Y) -> DSWA"
RULE_DSW_SWJ = "DSW(X) | SWJ(Y) -> SWJ(Y)"
RULE_DSW_SWJ_SAME = "DSW(X) | SWJ(X) -> DSWA"
RULE_SWJ_EMPTY = "SWJ(0) -> DSWA"
RULE_DSW_EMPTY = "DSW(0) -> SWA"
RULE_SWJ_OVERLAP = "SWJ(X) | SWJ(Y) -> SWJ(X&Y) (ext: overlapping targets)"
RULE_DSW_SWJ_PARTIAL = "DSW(X) | SWJ(Y) -> SWJ(Y-X) (ext: partial overlap)"
RULE_SWJ_ALL = "SWJ(everyone) -> SWA (ext)"
RULE_DSW_ALL = "DSW(everyone) -> DSWA (ext)"


@dataclass(frozen=True)
class Term:
    """An expression whose symbolic targets have been expanded to tenant ids."""

    form: Form
    targets: frozenset[str] = frozenset()

    def __str__(self) -> str:
        if self.form in (Form.SWANY, Form.DSWANY):
            return self.form.value
        return f"{self.form.value}({','.join(sorted(self.targets))})"

    def to_allowed(self, declarer: str, universe: frozenset[str]) -> AllowedSet:
        if self.form is Form.SWANY:
            return AllowedSet.everyone(declarer, universe)
        if self.form is Form.DSWANY:
            return AllowedSet.nobody(declarer, universe)
        return AllowedSet(declarer, universe, self.targets, self.form is Form.DSW)


@dataclass(frozen=True)
class FoldStep:
    left: str
    right: str
    rule: str
    result: str

    def __str__(self) -> str:
        if self.right:
            return f"{self.left} + {self.right} => {self.result}  [{self.rule}]"
        return f"{self.left} => {self.result}  [{self.rule}]"


def normalize_term(term: Term, others: frozenset[str]) -> tuple[Term, str | None]:
    if term.form is Form.SWJ:
        if not term.targets:
            return Term(Form.DSWANY), RULE_SWJ_EMPTY
        if others and term.targets >= others:
            return Term(Form.SWANY), RULE_SWJ_ALL
    if term.form is Form.DSW:
        if not term.targets:
            return Term(Form.SWANY), RULE_DSW_EMPTY
        if others and term.targets >= others:
            return Term(Form.DSWANY), RULE_DSW_ALL
    return term, None


def transition(a: Term, b: Term) -> tuple[str, Term]:
    """Apply the transition rule matching two (normalized) terms; returns the rule name and raw result."""
    if a.form is Form.SWANY:
        return RULE_SWA, b
    if b.form is Form.SWANY:
        return RULE_SWA, a
    if Form.DSWANY in (a.form, b.form):
        return RULE_DSWA, Term(Form.DSWANY)
    if a.form is Form.DSW and b.form is Form.DSW:
        return RULE_DSW_DSW, Term(Form.DSW, a.targets | b.targets)
    if a.form is Form.SWJ and b.form is Form.SWJ:
        common = a.targets & b.targets
        if not common:
            return RULE_SWJ_SWJ, Term(Form.DSWANY)
        return RULE_SWJ_OVERLAP, Term(Form.SWJ, common)
    excl, incl = (a, b) if a.form is Form.DSW else (b, a)
    if not (excl.targets & incl.targets):
        return RULE_DSW_SWJ, incl
    if incl.targets <= excl.targets:
        return RULE_DSW_SWJ_SAME, Term(Form.DSWANY)
    return RULE_DSW_SWJ_PARTIAL, Term(Form.SWJ, incl.targets - excl.targets)


def to_term(expr: SharingExpression, declarer: str, registry: _RegistryLike) -> Term:
    if expr.form in (Form.SWANY, Form.DSWANY):
        return Term(expr.form)
    return Term(expr.form, expand_targets(expr.targets, declarer, registry))


def explain_fold(
    expressions: Sequence[SharingExpression], declarer: str, registry: _RegistryLike
) -> tuple[AllowedSet, list[FoldStep]]:
    """Fold a cell's expressions left to right, recording every rule applied.

    The result agrees with folding :func:`combine` over the resolved sets; the
    step list exists for audit output.
    """
    others = registry.id_set - {declarer}
    steps: list[FoldStep] = []

    def norm(term: Term) -> Term:
        out, rule = normalize_term(term, others)
        if rule:
            steps.append(FoldStep(str(term), "", rule, str(out)))
        return out

    if not expressions:
        return AllowedSet.everyone(declarer, registry.id_set), steps
    acc = norm(to_term(expressions[0], declarer, registry))
    for expr in expressions[1:]:
        nxt = norm(to_term(expr, declarer, registry))
        rule, raw = transition(acc, nxt)
        steps.append(FoldStep(str(acc), str(nxt), rule, str(raw)))
        acc = norm(raw)
    return acc.to_allowed(declarer, registry.id_set), steps

