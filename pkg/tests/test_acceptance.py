"""One test per acceptance criterion; each records a PASS/FAIL line for the terminal summary."""

import itertools
import json
import random
import time


from conftest import ACCEPTANCE
from rvplan.allocation import Mode, check_validity, exact_min_color, greedy_color, participating_tenants, per_variant_color
from rvplan.cli import main
from rvplan.expressions import AllowedSet, combine, parse_expression, resolve
from rvplan.graph import LabeledGraph, complement
from rvplan.io import bundle_from_json, bundle_to_json, load_bundle
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
    validate_bundle,
)
from rvplan.pipeline import plan
from rvplan.reporting import render_report
from rvplan.simulator import ScenarioSpec, generate


def record(n, name, ok, detail):
    ACCEPTANCE[n] = (name, bool(ok), detail)
    print(f"[{'PASS' if ok else 'FAIL'}] {n}. {name}: {detail}")


def random_labeled_graph(rng, max_tenants, max_variants, participation=0.7):
    n = rng.randint(1, max_tenants)
    k = rng.randint(1, max_variants)
    vertices = [f"T{i}" for i in range(1, n + 1)]
    variants = [f"V{i}" for i in range(1, k + 1)]
    participants = {v: [t for t in vertices if rng.random() < participation] for v in variants}
    p = rng.random()
    edges = {}
    for v in variants:
        for a, b in itertools.combinations(participants[v], 2):
            if rng.random() < p:
                edges.setdefault((a, b), []).append(v)
    return LabeledGraph.from_edges("R", vertices, variants, participants, edges)


# 1

def test_transition_rule_algebra():
    start = time.perf_counter()
    registry = Registry((
        Tenant("T1", frozenset({"T2"}), frozenset({"T3"})),
        Tenant("T2"), Tenant("T3"), Tenant("T4"), Tenant("T5"),
    ))

    def R(text, declarer="T1"):
        return resolve(parse_expression(text), declarer, registry)

    z_forms = ["SWAny", "DSWAny", "SWJ(T2,T4)", "DSW(T3)"]
    rows = {
        "SWA | Z -> Z": all(combine(R("SWAny"), R(z)) == R(z) for z in z_forms),
        "DSWA | Z -> DSWA": all(combine(R("DSWAny"), R(z)) == R("DSWAny") for z in z_forms),
        "DSW(X) | DSW(Y) -> DSW(X,Y)": combine(R("DSW(T2)"), R("DSW(T3,T4)")) == R("DSW(T2,T3,T4)"),
        "SWJ(X) | SWJ(Y) -> DSWA": combine(R("SWJ(T2)"), R("SWJ(T3)")) == R("DSWAny")
        and str(combine(R("SWJ(T2)"), R("SWJ(T3)"))) == "DSWAny",
        "DSW(X) | SWJ(Y) -> SWJ(Y)": combine(R("DSW(T2)"), R("SWJ(T3,T4)")) == R("SWJ(T3,T4)"),
        "DSW(X) | SWJ(X) -> DSWA": combine(R("DSW(T2,T3)"), R("SWJ(T2,T3)")) == R("DSWAny"),
        # T4 has no partners and no competitors, so P and Cp expand to the empty set
        "SWJ(0) -> DSWA": R("SWJ(P)", "T4") == R("DSWAny", "T4") and str(R("SWJ(P)", "T4")) == "DSWAny",
        "DSW(0) -> SWA": R("DSW(Cp)", "T4") == R("SWAny", "T4") and str(R("DSW(Cp)", "T4")) == "SWAny",
    }

    rng = random.Random(1)
    universe = frozenset(f"T{i}" for i in range(1, 9))
    others = sorted(universe - {"T1"})

    def rand_set():
        return AllowedSet("T1", universe, frozenset(t for t in others if rng.random() < 0.5), rng.random() < 0.5)

    triples = 10_000
    algebra_ok = True
    for _ in range(triples):
        a, b, c = rand_set(), rand_set(), rand_set()
        if not (
            combine(a, b) == combine(b, a)
            and combine(combine(a, b), c) == combine(a, combine(b, c))
            and combine(a, a) == a
            and combine(a, b).allowed == a.allowed & b.allowed
        ):
            algebra_ok = False
            break
    elapsed = time.perf_counter() - start
    failed = [name for name, ok in rows.items() if not ok]
    ok = not failed and algebra_ok and elapsed < 1.0
    record(1, "Transition-rule algebra", ok,
           f"{len(rows) - len(failed)}/8 rows, {triples} random triples {'ok' if algebra_ok else 'FAILED'}, {elapsed:.2f}s (<1s)")
    assert not failed, failed
    assert algebra_ok
    assert elapsed < 1.0


# 2

def test_coloring_soundness():
    start = time.perf_counter()
    rng = random.Random(2)
    graphs = 1000
    bad = 0
    largest = 0
    for _ in range(graphs):
        g = random_labeled_graph(rng, 50, 6)
        largest = max(largest, len(g.vertices))
        if check_validity(greedy_color(g), g) or check_validity(per_variant_color(g), g):
            bad += 1
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 30.0
    record(2, "Coloring soundness", ok,
           f"{graphs} graphs (up to {largest} tenants, 6 variants), {bad} invalid, {elapsed:.1f}s (<30s)")
    assert bad == 0
    assert elapsed < 30.0


# 3

def test_optimality_audit(crown_bundle):
    start = time.perf_counter()
    rng = random.Random(3)
    instances = 0
    gaps = {Mode.SHARED_POOL: [], Mode.PER_VARIANT: []}
    violations = 0
    while instances < 500:
        g = random_labeled_graph(rng, 10, 4)
        if len(participating_tenants(g)) > 10:
            continue
        instances += 1
        for mode, colorer in ((Mode.SHARED_POOL, greedy_color), (Mode.PER_VARIANT, per_variant_color)):
            d_greedy = colorer(g).d
            exact = exact_min_color(g, mode, limit=10)
            if d_greedy < exact.d or check_validity(exact, g):
                violations += 1
            gaps[mode].append(d_greedy - exact.d)
    crown = plan(crown_bundle, exact_limit=12)
    crown_gap = crown.optimality.gap
    elapsed = time.perf_counter() - start
    mean_shared = sum(gaps[Mode.SHARED_POOL]) / instances
    mean_strict = sum(gaps[Mode.PER_VARIANT]) / instances
    ok = violations == 0 and crown_gap is not None and crown_gap >= 1 and elapsed < 60.0
    record(3, "Optimality audit", ok,
           f"{instances} instances, d_greedy>=d_exact always={violations == 0}, "
           f"mean gap shared-pool {mean_shared:.3f} / per-variant {mean_strict:.3f}, "
           f"crown fixture greedy {crown.distribution.total_instances} vs exact {crown.optimality.exact} "
           f"(gap {crown_gap}), {elapsed:.1f}s (<60s)")
    assert violations == 0
    assert crown_gap >= 1
    assert elapsed < 60.0


# 4

def uniform_bundle(m, form):
    tenants = tuple(Tenant(f"T{i}") for i in range(1, m + 1))
    realization = {"F1": (("R1", "A"),), "F2": (("R1", "B"), ("R2", "X")), "F3": (("R3", "Y"),)}
    funcs = tuple(realization)
    cells = ()
    if form is not None:
        cells = tuple(DeploymentCell(t.id, f, (form,)) for t in tenants for f in funcs)
    return Bundle(
        catalog=Catalog((Application("app", funcs),)),
        templates=(ConfigurationTemplate("app", (Rvc("R1", ("A", "B")), Rvc("R2", ("X",)), Rvc("R3", ("Y",))), realization),),
        registry=Registry(tenants),
        functional=tuple(FunctionalRequirement(t.id, "app", funcs) for t in tenants),
        deployment=(DeploymentRequirements("app", cells),),
    )


def test_degenerate_bounds():
    results = []
    ok = True
    for m in (1, 2, 5, 20):
        for label, form, expected in (("SWAny", None, 1), ("DSWAny", "DSWAny", m)):
            bundles = [uniform_bundle(m, form)]
            bundles.append(generate(ScenarioSpec(
                tenants=m, rvcs=3, variants_per_rvc=3, functionality_count=5, selection_density=1.0,
                strictness={label: 1.0}, seed=m,
            )))
            for bundle in bundles:
                assert validate_bundle(bundle).ok
                result = plan(bundle, mode=Mode.SHARED_POOL, exact_limit=0)
                counts = [c.d for c in result.distribution.per_rvc.values() if c.assignment]
                if not counts or any(d != expected for d in counts):
                    ok = False
                results.append(f"{label} m={m}: {counts}")
    record(4, "Degenerate bounds", ok, "; ".join(results[::2]))
    assert ok, results


# 5

def test_complement_involution():
    rng = random.Random(5)
    graphs = 1000
    bad = 0
    for _ in range(graphs):
        g = random_labeled_graph(rng, 30, 6)
        c = complement(g)
        if complement(c) != g or complement(c).edges != g.edges:
            bad += 1
    ok = bad == 0
    record(5, "Complement involution", ok, f"{graphs} random labeled graphs, {bad} mismatches")
    assert bad == 0


# 6

def test_six_tenant_fixture_end_to_end(six_bundle, fixtures_dir):
    golden = (fixtures_dir / "six" / "golden_report.json").read_text()
    result = plan(six_bundle, mode=Mode.SHARED_POOL, exact_limit=12)
    rendered = render_report(result.distribution, result.summary, "json", result.optimality)
    rp = result.rvcs["R"]
    valid = check_validity(rp.coloring, rp.conflict) == [] and check_validity(rp.exact, rp.conflict) == []
    ok = rendered == golden and valid and result.optimality.exact is not None
    record(6, "Six-tenant fixture end-to-end", ok,
           f"golden byte-identical={rendered == golden}, greedy d={result.distribution.total_instances}, "
           f"exact d*={result.optimality.exact}, gap={result.optimality.gap}")
    assert rendered == golden
    assert valid
    assert result.optimality.exact == 3


# 7

def test_two_tenant_first_fit_trace():
    g = LabeledGraph.from_edges("R", ["T1", "T2"], ["A", "B"], {"A": ["T1", "T2"], "B": ["T1", "T2"]},
                                {("T1", "T2"): ["A"]})
    c = greedy_color(g)
    got = [set(cls.members) for cls in c.classes]
    expected = [{("T1", "A"), ("T1", "B"), ("T2", "B")}, {("T2", "A")}]
    exact = exact_min_color(g).d
    ok = got == expected and exact == 2
    pretty = ", ".join("C%d={%s}" % (i, ",".join(f"{t}.{v}" for t, v in sorted(m))) for i, m in enumerate(got, 1))
    record(7, "Two-tenant first-fit trace", ok, f"{pretty}; exact d*={exact}")
    assert got == expected
    assert exact == 2


# 8

def test_determinism_and_scale(fixtures_dir, capsys):
    same = True
    for name in ("six", "pair", "crown"):
        for mode in ("shared-pool", "per-variant"):
            outs = []
            for _ in range(2):
                code = main(["plan", str(fixtures_dir / name), "--mode", mode, "--exact-limit", "12"])
                outs.append((code, capsys.readouterr().out))
            same = same and outs[0] == outs[1] and outs[0][0] == 0

    spec = ScenarioSpec(tenants=2000, rvcs=5, variants_per_rvc=10, functionality_count=20,
                        selection_density=0.3, strictness={"SWAny": 0.4, "SWJ": 0.2, "DSW": 0.2, "DSWAny": 0.2},
                        partner_density=0.01, competitor_density=0.01, seed=8)
    bundle = generate(spec)
    start = time.perf_counter()
    result = plan(bundle, exact_limit=0)
    elapsed = time.perf_counter() - start
    ok = same and elapsed < 10.0 and not result.optimality.audited
    record(8, "Determinism & scale", ok,
           f"repeat plans byte-identical={same}; 2000 tenants x 5 RVCs x 10 variants planned in {elapsed:.2f}s (<10s), "
           f"{result.distribution.total_instances} instances")
    assert same
    assert elapsed < 10.0


# 9

def _corruptions(docs):
    """(label, mutate, needle) for every single-field corruption of the bundle documents."""
    out = []

    def slots(d):
        found = []
        for i, t in enumerate(d["registry"]["tenants"]):
            for rel in ("partners", "competitors"):
                for k in range(len(t[rel])):
                    found.append((f"registry.{t['id']}.{rel}[{k}]", lambda d, i=i, rel=rel, k=k: (d["registry"]["tenants"][i][rel], k)))
        for i, s in enumerate(d["functional"]["selections"]):
            found.append((f"selection[{i}].tenant", lambda d, i=i: (d["functional"]["selections"][i], "tenant")))
            for k in range(len(s["functionalities"])):
                found.append((f"selection[{i}].functionalities[{k}]", lambda d, i=i, k=k: (d["functional"]["selections"][i]["functionalities"], k)))
        for i, _ in enumerate(d["deployment"]["cells"]):
            for key in ("tenant", "functionality"):
                found.append((f"cell[{i}].{key}", lambda d, i=i, key=key: (d["deployment"]["cells"][i], key)))
        for ti, tpl in enumerate(d["templates"]):
            for f, pairs in tpl["realization"].items():
                for pi in range(len(pairs)):
                    for key in ("rvc", "variant"):
                        found.append((f"realization.{f}[{pi}].{key}",
                                      lambda d, ti=ti, f=f, pi=pi, key=key: (d["templates"][ti]["realization"][f][pi], key)))
        return found

    for label, path in slots(docs):
        def mutate(d, path=path):
            container, key = path(d)
            container[key] = "zz_dangling"
        out.append((f"dangling {label}", mutate, "zz_dangling"))

    for i, cell in enumerate(docs["deployment"]["cells"]):
        for k in range(len(cell["expressions"])):
            def empty(d, i=i, k=k):
                d["deployment"]["cells"][i]["expressions"][k] = "SWJ()"
            out.append((f"empty SWJ cell[{i}].expressions[{k}]", empty, f"deployment.cells[{i}].expressions[{k}]"))

            def dangling_target(d, i=i, k=k):
                d["deployment"]["cells"][i]["expressions"][k] = "SWJ(zz_dangling)"
            out.append((f"dangling target cell[{i}].expressions[{k}]", dangling_target, "zz_dangling"))

    for i, t in enumerate(docs["registry"]["tenants"]):
        def dup_tenant(d, i=i):
            d["registry"]["tenants"].append(json.loads(json.dumps(d["registry"]["tenants"][i])))
        out.append((f"duplicate tenant {t['id']}", dup_tenant, t["id"]))
    for i, app in enumerate(docs["catalog"]["applications"]):
        def dup_app(d, i=i):
            d["catalog"]["applications"].append(json.loads(json.dumps(d["catalog"]["applications"][i])))
        out.append((f"duplicate application {app['id']}", dup_app, app["id"]))
        for k, f in enumerate(app["functionalities"]):
            def dup_func(d, i=i, f=f):
                d["catalog"]["applications"][i]["functionalities"].append(f)
            out.append((f"duplicate functionality {f}", dup_func, f))
    for ti, tpl in enumerate(docs["templates"]):
        for ri, rvc in enumerate(tpl["rvcs"]):
            def dup_rvc(d, ti=ti, ri=ri):
                d["templates"][ti]["rvcs"].append(json.loads(json.dumps(d["templates"][ti]["rvcs"][ri])))
            out.append((f"duplicate RVC {rvc['id']}", dup_rvc, rvc["id"]))
            for v in rvc["variants"]:
                def dup_variant(d, ti=ti, ri=ri, v=v):
                    d["templates"][ti]["rvcs"][ri]["variants"].append(v)
                out.append((f"duplicate variant {rvc['id']}.{v}", dup_variant, v))
    for i, s in enumerate(docs["functional"]["selections"]):
        def dup_sel(d, i=i):
            d["functional"]["selections"].append(json.loads(json.dumps(d["functional"]["selections"][i])))
        out.append((f"duplicate selection {s['tenant']}", dup_sel, s["tenant"]))
    for i, c in enumerate(docs["deployment"]["cells"]):
        def dup_cell(d, i=i):
            d["deployment"]["cells"].append(json.loads(json.dumps(d["deployment"]["cells"][i])))
        out.append((f"duplicate cell {c['tenant']}/{c['functionality']}", dup_cell, c["tenant"]))
    return out


def test_validator_completeness(fixtures_dir):
    total = 0
    missed = []
    for name in ("pair", "six", "crown"):
        base = bundle_to_json(load_bundle(fixtures_dir / name))
        assert validate_bundle(load_bundle(fixtures_dir / name)).ok
        for label, mutate, needle in _corruptions(base):
            docs = json.loads(json.dumps(base))
            mutate(docs)
            report = validate_bundle(bundle_from_json(
                docs["catalog"], docs["templates"], docs["registry"], docs["functional"], docs["deployment"]))
            total += 1
            if not any(needle in str(e) for e in report.errors):
                missed.append(f"{name}: {label}")
    ok = not missed
    record(9, "Validator completeness", ok, f"{total} single-field corruptions over 3 fixtures, {len(missed)} unreported")
    assert not missed, missed
