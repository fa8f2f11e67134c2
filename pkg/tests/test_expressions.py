import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rvplan.expressions import (
    COMPETITORS,
    DSWANY,
    PARTNERS,
    SWANY,
    AllowedSet,
    ExpressionSyntaxError,
    Form,
    Ref,
    ResolutionError,
    SharingExpression,
    combine,
    dsw,
    explain_fold,
    parse_expression,
    render_expression,
    resolve,
    swj,
)
from rvplan.model import Registry, Tenant


def test_parse_swany():
    assert parse_expression("SWAny") == SWANY
    assert parse_expression("  DSWAny\n") == DSWANY


def test_parse_dsw_partners_and_tenant():
    expr = parse_expression("DSW(P,T4)")
    assert expr == SharingExpression(Form.DSW, frozenset({PARTNERS, Ref.specific("T4")}))


def test_parse_dedupes_and_allows_inner_whitespace():
    assert parse_expression("SWJ( Cp , T2,T2 ,Cp)") == swj("Cp", "T2")


@pytest.mark.parametrize(
    "text, offset",
    [
        ("SWJ()", 4),
        ("DSW( )", 5),
        ("swany", 0),
        ("SWAny(T1)", 5),
        ("SWJ(T1", 6),
        ("SWJ(T1,)", 7),
        ("DSW T1", 4),
        ("", 0),
        ("SWJ(T1) x", 8),
    ],
)
def test_syntax_errors_carry_offsets(text, offset):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression(text)
    assert info.value.offset == offset


tenant_ids = st.from_regex(r"[A-Za-z0-9_][A-Za-z0-9_.\-]{0,6}", fullmatch=True).filter(
    lambda s: s not in ("P", "Cp")
)
refs = st.one_of(st.just(PARTNERS), st.just(COMPETITORS), tenant_ids.map(Ref.specific))
expressions = st.one_of(
    st.just(SWANY),
    st.just(DSWANY),
    st.builds(lambda f, ts: SharingExpression(f, frozenset(ts)),
              st.sampled_from([Form.SWJ, Form.DSW]), st.lists(refs, min_size=1, max_size=5)),
)


@given(expressions)
def test_render_parse_round_trip(expr):
    assert parse_expression(render_expression(expr)) == expr


def test_resolve_examples(reg4):
    assert resolve(SWANY, "T1", reg4).allowed == {"T2", "T3", "T4"}
    assert resolve(dsw(COMPETITORS), "T1", reg4).allowed == {"T2", "T4"}
    assert resolve(swj(PARTNERS), "T1", reg4).allowed == {"T2"}
    assert resolve(DSWANY, "T1", reg4).allowed == frozenset()


def test_resolve_is_relative_to_declarer(reg4):
    # T2 declared no partners: P means nobody for T2
    assert resolve(swj(PARTNERS), "T2", reg4).is_empty


def test_resolve_strips_declarer(reg4):
    assert resolve(swj("T1", "T2"), "T1", reg4).allowed == {"T2"}
    assert resolve(dsw("T1"), "T1", reg4).is_all


def test_resolve_unknown_tenant(reg4):
    with pytest.raises(ResolutionError) as info:
        resolve(swj("T9"), "T1", reg4)
    assert "T9" in str(info.value)


def R(reg, text, who="T1"):
    return resolve(parse_expression(text), who, reg)


def test_combine_examples(reg4):
    assert combine(R(reg4, "SWAny"), R(reg4, "DSW(T3)")) == R(reg4, "DSW(T3)")
    assert str(combine(R(reg4, "SWAny"), R(reg4, "DSW(T3)"))) == "DSW(T3)"
    assert combine(R(reg4, "SWJ(T2)"), R(reg4, "SWJ(T3)")) == R(reg4, "DSWAny")
    assert combine(R(reg4, "DSW(T2)"), R(reg4, "SWJ(T2)")) == R(reg4, "DSWAny")
    assert combine(R(reg4, "SWJ(T2,T3)"), R(reg4, "SWJ(T3,T4)")) == R(reg4, "SWJ(T3)")


def test_combine_declarer_mismatch(reg4):
    with pytest.raises(ValueError):
        combine(R(reg4, "SWAny", "T1"), R(reg4, "SWAny", "T2"))


def test_allowed_set_forms_compare_by_content(reg4):
    # {T2,T3} listed explicitly equals "everyone but T4"
    assert R(reg4, "SWJ(T2,T3)") == R(reg4, "DSW(T4)")
    assert hash(R(reg4, "SWJ(T2,T3)")) == hash(R(reg4, "DSW(T4)"))
    assert R(reg4, "SWJ(T2,T3,T4)") == R(reg4, "SWAny")
    assert R(reg4, "DSW(T2,T3,T4)") == R(reg4, "DSWAny")


def test_canonical_rendering(reg4):
    assert str(R(reg4, "SWJ(T2,T3,T4)")) == "SWAny"
    assert str(R(reg4, "DSW(P,Cp,T4)")) == "DSWAny"
    assert str(R(reg4, "DSW(Cp)")) == "DSW(T3)"
    # equal sets render the same whichever form produced them
    assert str(R(reg4, "DSW(T2,T3)")) == str(R(reg4, "SWJ(T4)")) == "SWJ(T4)"
    assert str(R(reg4, "DSW(T4)")) == str(R(reg4, "SWJ(T2,T3)")) == "DSW(T4)"


@given(st.sets(st.integers(2, 7)), st.booleans())
def test_rendering_depends_only_on_content(members, cofinite):
    universe = frozenset(f"T{i}" for i in range(1, 8))
    a = AllowedSet("T1", universe, frozenset(f"T{i}" for i in members), cofinite)
    flipped = AllowedSet("T1", universe, a.others - a.members, not a.cofinite)
    assert a == flipped
    assert str(a) == str(flipped)
    registry = Registry(tuple(Tenant(t) for t in sorted(universe)))
    assert resolve(parse_expression(str(a)), "T1", registry) == a


def _random_allowed(rng, declarer, universe):
    others = sorted(universe - {declarer})
    members = frozenset(t for t in others if rng.random() < 0.5)
    return AllowedSet(declarer, universe, members, rng.random() < 0.5)


def test_combine_matches_set_intersection_oracle():
    rng = random.Random(7)
    universe = frozenset(f"T{i}" for i in range(1, 7))
    for _ in range(2000):
        a = _random_allowed(rng, "T1", universe)
        b = _random_allowed(rng, "T1", universe)
        assert combine(a, b).allowed == a.allowed & b.allowed


allowed_sets = st.builds(
    lambda members, cof: AllowedSet("T1", frozenset(f"T{i}" for i in range(1, 8)),
                                    frozenset(f"T{i}" for i in members), cof),
    st.sets(st.integers(1, 7)),
    st.booleans(),
)


@given(allowed_sets, allowed_sets, allowed_sets)
def test_combine_algebra(a, b, c):
    assert combine(a, b) == combine(b, a)
    assert combine(combine(a, b), c) == combine(a, combine(b, c))
    assert combine(a, a) == a
    assert "T1" not in combine(a, b)


def test_explain_fold_agrees_with_combine():
    registry = Registry(
        tuple(
            Tenant(f"T{i}", frozenset({f"T{(i % 5) + 1}"}), frozenset({f"T{((i + 1) % 5) + 1}"}))
            for i in range(1, 6)
        )
    )
    forms = ["SWAny", "DSWAny", "SWJ(P)", "SWJ(Cp)", "DSW(P)", "DSW(Cp)",
             "SWJ(T2,T3)", "DSW(T3,T4)", "SWJ(T4)", "DSW(T2)", "SWJ(T1)"]
    for combo in itertools.product(forms, repeat=3):
        exprs = [parse_expression(x) for x in combo]
        folded, steps = explain_fold(exprs, "T1", registry)
        acc = resolve(exprs[0], "T1", registry)
        for e in exprs[1:]:
            acc = combine(acc, resolve(e, "T1", registry))
        assert folded == acc, combo
        assert all(step.rule for step in steps)
