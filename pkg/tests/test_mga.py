"""MGA engine tests: group construction, weighting, augmentation, the sweep."""

from dataclasses import replace

import pytest

from nearopt import attributes as attrs
from nearopt import esm, lp, mga

def toy_model(contributions, capacity_mwh=30.0, demand=100.0):
    """One-carrier model whose technologies can each deliver ``capacity_mwh``."""
    cap_mw = capacity_mwh / 8760.0
    techs = tuple(
        esm.Technology(id=t, sector="heat", outputs={"heat": 1.0},
                       existing_mw=cap_mw, vom_cost=10.0, availability=(1.0,))
        for t in contributions
    )
    model = esm.SystemModel(
        carriers=("heat",),
        slices=(esm.TimeSlice("t0", 8760.0),),
        technologies=techs,
        demands={"heat": (demand,)},
    )
    catalog = attrs.AttributeCatalog(
        attributes=(
            attrs.AttributeSpec(
                id="imp", name="Impact", unit="", direction="lower",
                basis="generation", aggregation="sum", decomposable=True,
                uncertainty="normal", objective="env",
            ),
        ),
        coefficients={"imp": dict(contributions)},
        expert_ranges={},
    )
    return model, catalog

def members_of(groups, kind):
    return next(g.members for g in groups if g.kind == kind)

def test_hand_assignment_top2_bottom2():
    model, catalog = toy_model({"a": 0.9, "b": 0.5, "c": 0.1})
    groups = mga.construct_groups(catalog, model, "contribution")
    assert members_of(groups, "driver") == ("a", "b")
    assert members_of(groups, "avoider") == ("c", "b")

def test_hand_assignment_extends_to_threshold():
    # each member can deliver 8% of demand: bottom-2 misses the 20% threshold
    model, catalog = toy_model({"a": 0.9, "b": 0.5, "c": 0.1}, capacity_mwh=8.0)
    groups = mga.construct_groups(catalog, model, "contribution")
    assert members_of(groups, "driver") == ("a", "b", "c")
    assert members_of(groups, "avoider") == ("c", "b", "a")

def test_tied_contributions_enter_collectively():
    model, catalog = toy_model({"a": 1.0, "b": 0.6, "c": 0.5995, "d": 0.1})
    groups = mga.construct_groups(catalog, model, "contribution")
    # b and c differ by <1%: the cluster joins as one
    assert members_of(groups, "driver") == ("a", "b", "c")

def test_avoider_omitted_with_too_few_contributors():
    model, catalog = toy_model({"a": 0.9, "b": 0.5, "c": 0.0, "d": 0.0})
    groups = mga.construct_groups(catalog, model, "contribution")
    kinds = [g.kind for g in groups]
    assert kinds == ["driver"]  # only 2 nonzero contributors: no avoider

def test_missing_contribution_data_errors():
    model, catalog = toy_model({"a": 1.0})
    broken = attrs.AttributeCatalog(
        attributes=catalog.attributes, coefficients={}, expert_ranges={}
    )
    with pytest.raises(attrs.MissingCoefficient):
        mga.construct_groups(broken, model, "contribution")

def test_fixture_group_counts(fixture_model, fixture_catalog, fixture_mga_config):
    for strategy in ("contribution", "domain"):
        groups = mga.construct_groups(
            fixture_catalog, fixture_model, strategy, fixture_mga_config
        )
        assert len(groups) == 19
        assert sum(1 for g in groups if g.kind == "driver") == 10
        assert sum(1 for g in groups if g.kind == "avoider") == 9
        # capacity-based groups only steer investable technologies
        for g in groups:
            if g.dimension == "capacity":
                for member in g.members:
                    assert fixture_model.technology(member).investable
    bench = mga.benchmark_groups(fixture_model)
    assert len(bench) == 13
    assert all(len(g.members) == 1 for g in bench)

def test_weight_vector_counts(fixture_model):
    bench = mga.benchmark_groups(fixture_model)
    vectors = mga.build_weight_vectors(bench, ("extreme",))
    assert len(vectors) == 26  # 13 groups x 2 directions

def test_extreme_vectors_single_group():
    g = mga.MgaGroup(id="g", kind="benchmark", dimension="generation", members=("a",))
    vectors = mga.build_weight_vectors([g], ("extreme",))
    signs = {v.id: dict(v.group_weights()) for v in vectors}
    assert signs == {"g:max": {"g": -1}, "g:min": {"g": 1}}

def test_multi_extreme_sign_pairs():
    d = mga.MgaGroup(id="d", kind="driver", dimension="generation",
                     members=("a",), attribute="imp", strategy="contribution")
    a = mga.MgaGroup(id="a", kind="avoider", dimension="generation",
                     members=("b",), attribute="imp", strategy="contribution")
    vectors = mga.build_weight_vectors([d, a], ("multi-extreme",))
    assert len(vectors) == 2
    weights = sorted(tuple(sorted(v.group_weights().items())) for v in vectors)
    assert weights == [(("a", -1), ("d", 1)), (("a", 1), ("d", -1))]

def test_multi_extreme_requires_both_groups():
    d = mga.MgaGroup(id="d", kind="driver", dimension="generation",
                     members=("a",), attribute="imp", strategy="contribution")
    assert mga.build_weight_vectors([d], ("multi-extreme",)) == []

def test_weight_vector_validation():
    g = mga.MgaGroup(id="g", kind="benchmark", dimension="generation", members=("a",))
    with pytest.raises(mga.MgaError):
        mga.WeightVector(id="bad", scheme="extreme", entries=((g, 2),), direction="max")
    with pytest.raises(mga.MgaError):
        mga.WeightVector(id="bad", scheme="multi-extreme",
                         entries=((g, 1), (g, 1)), direction="x")

# -- augmentation ---------------------------------------------------------------

def toy_program():
    variables = (lp.Variable("x1", 0.0, 1.0), lp.Variable("x2", 0.0, 1.0))
    constraints = (lp.Constraint({"x1": 1.0, "x2": 1.0}, ">=", 1.0),)
    return lp.LinearProgram(variables, constraints, {"x1": 1.0, "x2": 1.0})

def test_augmentation_removes_slack_filling():
    prog = toy_program()
    base = lp.solve(prog)
    assert base.objective == pytest.approx(1.0)
    # maximize x1 within 50% slack: without augmentation any x2 in [0, 0.5]
    # would be MGA-optimal; the augmented program must return (1, 0)
    augmented = mga.augmented_program(
        prog, prog.objective, base.objective, {"x1": -1.0}, slack=0.5, rho=1e-4
    )
    sol = lp.solve(augmented)
    assert sol.values["x1"] == pytest.approx(1.0, abs=1e-9)
    assert sol.values["x2"] == pytest.approx(0.0, abs=1e-9)
    realised = sol.values["x1"] + sol.values["x2"]
    assert realised == pytest.approx(1.0, abs=1e-9)

def test_zero_slack_returns_cost_optimum(fixture_model, fixture_base):
    bench = mga.benchmark_groups(fixture_model)
    vector = mga.build_weight_vectors([bench[0]], ("extreme",))[0]
    alt = mga.mga_solve(fixture_model, fixture_base, vector, slack=0.0)
    assert alt.costs.total == pytest.approx(fixture_base.f_star, rel=1e-9)
    assert alt.slack_used <= 1e-9

def test_slack_cap_respected(fixture_model, fixture_base):
    bench = mga.benchmark_groups(fixture_model)
    vectors = mga.build_weight_vectors(bench[:3], ("extreme",))
    for eps in (0.05, 0.30):
        for vector in vectors:
            alt = mga.mga_solve(fixture_model, fixture_base, vector, slack=eps)
            cap = (1.0 + eps) * fixture_base.f_star
            assert alt.costs.total <= cap * (1.0 + 1e-6)

# -- sweep -----------------------------------------------------------------------

@pytest.fixture(scope="module")
def small_sweep(fixture_model, fixture_catalog, fixture_base, fixture_mga_config):
    config = replace(
        fixture_mga_config,
        strategies=(),
        include_benchmark=True,
        slacks=(0.05, 0.30),
        jobs=1,
    )
    result = mga.generate_all(fixture_model, fixture_catalog, config, base=fixture_base)
    return config, result

def test_small_sweep_counts(small_sweep):
    config, result = small_sweep
    assert result.raw_run_count == 26 * 2
    assert not result.failed
    assert result.deduped_count <= result.raw_run_count + 1
    assert result.alternatives[0].id == "optimum"

def test_sweep_slack_feasibility(small_sweep, fixture_base):
    _, result = small_sweep
    for alt in result.alternatives:
        assert alt.slack_used >= -1e-9
        cap = alt.slack_level if alt.slack_level is not None else 0.0
        assert alt.costs.total <= (1.0 + cap) * fixture_base.f_star * (1.0 + 1e-6)

def test_sweep_nesting_in_slack(small_sweep):
    _, result = small_sweep
    by_run = {}
    for alt in result.alternatives:
        for prov in alt.provenance:
            by_run[prov.run_id] = alt
    for run_id, alt in by_run.items():
        if run_id.endswith("@s5") and ":max@" in run_id:
            wider = by_run.get(run_id.replace("@s5", "@s30"))
            if wider is not None:
                assert wider.costs.total >= alt.costs.total - 1e-6

def test_sweep_determinism(fixture_model, fixture_catalog, fixture_base, fixture_mga_config):
    config = replace(fixture_mga_config, strategies=(), slacks=(0.05,), jobs=1)
    r1 = mga.generate_all(fixture_model, fixture_catalog, config, base=fixture_base)
    r2 = mga.generate_all(fixture_model, fixture_catalog, config, base=fixture_base)
    assert [a.id for a in r1.alternatives] == [a.id for a in r2.alternatives]
    for a, b in zip(r1.alternatives, r2.alternatives):
        assert a.annual_generation == b.annual_generation  # bitwise
        assert a.costs.total == b.costs.total

def test_parallel_matches_serial(fixture_model, fixture_catalog, fixture_base, fixture_mga_config):
    bench_only = replace(fixture_mga_config, strategies=(), slacks=(0.05, 0.30))
    serial = mga.generate_all(
        fixture_model, fixture_catalog, replace(bench_only, jobs=1), base=fixture_base
    )
    parallel = mga.generate_all(
        fixture_model, fixture_catalog, replace(bench_only, jobs=2), base=fixture_base
    )
    assert [a.id for a in serial.alternatives] == [a.id for a in parallel.alternatives]
    for a, b in zip(serial.alternatives, parallel.alternatives):
        assert a.annual_generation == b.annual_generation

def test_duplicate_strategies_merge_provenance(fixture_model, fixture_catalog, fixture_base,
                                               fixture_mga_config):
    # identical group assignments across "two" strategies produce identical
    # alternatives: they must merge, keeping provenance from both
    config = replace(
        fixture_mga_config,
        strategies=("contribution", "contribution2"),
        include_benchmark=False,
        slacks=(0.05,),
        attribute_schemes=("extreme",),
    )
    groups = mga.construct_groups(fixture_catalog, fixture_model, "contribution",
                                  fixture_mga_config)
    clones = [
        mga.MgaGroup(id=g.id + "~2", kind=g.kind, dimension=g.dimension,
                     members=g.members, attribute=g.attribute, strategy="contribution2")
        for g in groups
    ]
    result = mga.generate_all(
        fixture_model, fixture_catalog, config, base=fixture_base,
        groups_by_strategy={"contribution": groups, "contribution2": clones},
    )
    assert result.raw_run_count == 2 * len(groups) * 2 * 1
    merged = [a for a in result.alternatives if len(a.provenance) >= 2]
    assert merged, "identical runs across strategies must deduplicate"
    strategies_seen = {p.strategy for a in merged for p in a.provenance}
    assert {"contribution", "contribution2"} <= strategies_seen
    assert result.deduped_count <= result.raw_run_count / 2 + 1

def test_single_group_single_slack(fixture_model, fixture_catalog, fixture_base,
                                   fixture_mga_config):
    config = replace(fixture_mga_config, strategies=(), include_benchmark=True, slacks=(0.10,))
    bench = mga.benchmark_groups(fixture_model)[:1]
    result = mga.generate_all(
        fixture_model, fixture_catalog,
        replace(config, include_benchmark=False),
        base=fixture_base,
        groups_by_strategy={},
    )
    # no groups at all: only the optimum remains
    assert result.raw_run_count == 0
    assert result.deduped_count == 1

def test_negative_slack_rejected(fixture_model, fixture_base):
    bench = mga.benchmark_groups(fixture_model)
    vector = mga.build_weight_vectors(bench[:1], ("extreme",))[0]
    with pytest.raises(mga.MgaError):
        mga.mga_solve(fixture_model, fixture_base, vector, slack=-0.1)

def test_capacity_artefact_flag(fixture_model, fixture_catalog, fixture_base):
    # maximizing invested capacity buys plant that never runs: flagged
    groups = [
        mga.MgaGroup(id="cap:probe", kind="driver", dimension="capacity",
                     members=("bm_boiler",), attribute="invest_costs",
                     strategy="contribution")
    ]
    vector = [v for v in mga.build_weight_vectors(groups, ("extreme",))
              if v.direction == "max"][0]
    alt = mga.mga_solve(fixture_model, fixture_base, vector, slack=0.30)
    assert alt.capacity_artefact
    assert alt.invested_capacity["bm_boiler"] > 0.0
