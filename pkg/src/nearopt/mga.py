"""Near-optimal alternative generation steered by attribute contributions.

Builds MGA groups from the attribute catalog (driver/avoider sets per
decomposable attribute under two assignment strategies, plus one benchmark
group per technology), derives extreme and attribute-internal multi-extreme
weight vectors, and sweeps slack levels. Every run minimises the weighted
group sum plus a small cost-augmentation term so no returned alternative is
weakly Pareto-dominated (equal diversity at strictly lower cost).
"""

from __future__ import annotations

import json

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping

from . import attributes as attr_mod
from . import esm, lp

DRIVER = "driver"
AVOIDER = "avoider"
BENCHMARK = "benchmark"

EXTREME = "extreme"
MULTI_EXTREME = "multi-extreme"

CONTRIBUTION = "contribution"
DOMAIN = "domain"

class MgaError(Exception):
    pass

@dataclass(frozen=True)
class MgaConfig:
    slacks: tuple[float, ...] = (0.01, 0.05, 0.10, 0.20, 0.30)
    strategies: tuple[str, ...] = (CONTRIBUTION, DOMAIN)
    attribute_schemes: tuple[str, ...] = (EXTREME, MULTI_EXTREME)
    benchmark_schemes: tuple[str, ...] = (EXTREME,)
    include_benchmark: bool = True
    relevance_threshold: float = 0.20  # share of total demand a group must be able to cover
    sector_threshold: float = 0.40  # per-sector share for the domain-balanced strategy
    # sectors where the sectoral threshold is not meaningful (too few options,
    # or one technology would dominate) can override it, typically with 0
    sector_thresholds: Mapping[str, float] | None = None
    tie_tolerance: float = 0.01  # relative contribution difference treated as a tie
    min_avoider_contributors: int = 3  # nonzero contributors required to emit an avoider
    rho: float = 1e-4  # cost-augmentation coefficient, relative to f*
    capacity_artefact_factor: float = 1.5
    jobs: int = 1

    def __post_init__(self) -> None:
        if not self.slacks:
            raise MgaError("slack list must be non-empty")
        if any(e < 0 for e in self.slacks):
            raise MgaError("slack levels must be >= 0")
        if self.rho < 0:
            raise MgaError("augmentation coefficient must be >= 0")

def load_mga_config(source: str | Path | Mapping) -> MgaConfig:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        data = source
    kwargs = {}
    for name in (
        "strategies",
        "attribute_schemes",
        "benchmark_schemes",
        "slacks",
    ):
        if name in data:
            kwargs[name] = tuple(data[name])
    for name in (
        "include_benchmark",
        "relevance_threshold",
        "sector_threshold",
        "sector_thresholds",
        "tie_tolerance",
        "min_avoider_contributors",
        "rho",
        "capacity_artefact_factor",
        "jobs",
    ):
        if name in data:
            kwargs[name] = data[name]
    return MgaConfig(**kwargs)

@dataclass(frozen=True)
class MgaGroup:
    """Set of technologies jointly weighted in the MGA objective."""

    id: str
    kind: str  # driver | avoider | benchmark
    dimension: str  # generation | capacity
    members: tuple[str, ...]
    attribute: str | None = None
    strategy: str | None = None

    def __post_init__(self) -> None:
        if not self.members:
            raise MgaError(f"group {self.id!r} has no members")
        if self.kind not in (DRIVER, AVOIDER, BENCHMARK):
            raise MgaError(f"group {self.id!r}: bad kind {self.kind!r}")
        if self.dimension not in (attr_mod.GENERATION, attr_mod.CAPACITY):
            raise MgaError(f"group {self.id!r}: bad dimension {self.dimension!r}")

@dataclass(frozen=True)
class WeightVector:
    """Signed group weights: one nonzero entry (extreme) or an opposing
    driver/avoider pair of the same attribute (multi-extreme)."""

    id: str
    scheme: str
    entries: tuple[tuple[MgaGroup, int], ...]
    direction: str

    def __post_init__(self) -> None:
        signs = [w for _, w in self.entries]
        if any(w not in (-1, 1) for w in signs):
            raise MgaError(f"vector {self.id!r}: weights must be +-1")
        if self.scheme == EXTREME and len(self.entries) != 1:
            raise MgaError(f"vector {self.id!r}: extreme vectors have exactly one entry")
        if self.scheme == MULTI_EXTREME:
            if len(self.entries) != 2 or signs[0] * signs[1] != -1:
                raise MgaError(
                    f"vector {self.id!r}: multi-extreme vectors pair two opposite signs"
                )

    def group_weights(self) -> dict[str, int]:
        return {g.id: w for g, w in self.entries}

@dataclass(frozen=True)
class Provenance:
    run_id: str
    scheme: str
    strategy: str | None
    groups: tuple[str, ...]
    direction: str
    slack: float

@dataclass(frozen=True)
class Alternative:
    """One near-optimal system configuration."""

    id: str
    provenance: tuple[Provenance, ...]
    annual_generation: Mapping[str, float]
    invested_capacity: Mapping[str, float]
    deployed_capacity: Mapping[str, float]  # existing + invested, MW
    costs: esm.CostBreakdown
    slack_used: float  # realised cost / f* - 1
    slack_level: float | None  # epsilon of the generating run; None for the optimum
    capacity_artefact: bool = False

    def is_optimum(self) -> bool:
        return self.slack_level is None

@dataclass(frozen=True)
class FailedRun:
    run_id: str
    error: str

@dataclass(frozen=True)
class MgaResult:
    alternatives: tuple[Alternative, ...]
    raw_run_count: int
    failed: tuple[FailedRun, ...]

    @property
    def deduped_count(self) -> int:
        return len(self.alternatives)

# -- group construction -----------------------------------------------------------

def _tie_clusters(ranked: list[tuple[str, float]], tie_tol: float) -> list[list[str]]:
    """Group consecutively ranked technologies whose contributions tie."""
    clusters: list[list[str]] = []
    current: list[str] = []
    prev: float | None = None
    for tech, value in ranked:
        if current and prev is not None:
            scale = max(abs(prev), abs(value), 1e-30)
            if abs(prev - value) / scale <= tie_tol:
                current.append(tech)
                continue
        if current:
            clusters.append(current)
        current = [tech]
        prev = value
    if current:
        clusters.append(current)
    return clusters

def _coverage(model: esm.SystemModel, members: Iterable[str]) -> float:
    """Joint deliverable energy: max feasible annual generation of the members."""
    return sum(
        model.technology(t).max_annual_generation(model.slices) for t in members
    )

def _select(
    clusters: list[list[str]],
    minimum: int,
    target: float,
    model: esm.SystemModel,
) -> list[str]:
    """Take tie clusters in rank order until the count minimum and the
    coverage target are both met (or the pool is exhausted)."""
    chosen: list[str] = []
    for cluster in clusters:
        if len(chosen) >= minimum and _coverage(model, chosen) >= target:
            break
        chosen.extend(cluster)
    return chosen

def _pool_for(spec: attr_mod.AttributeSpec, model: esm.SystemModel) -> list[esm.Technology]:
    """Member pool of an attribute: capacity-based groups steer investment
    variables, so only investable technologies qualify there."""
    if spec.basis == attr_mod.CAPACITY:
        return [t for t in model.technologies if t.investable]
    return list(model.technologies)

def construct_groups(
    catalog: attr_mod.AttributeCatalog,
    model: esm.SystemModel,
    strategy: str,
    config: MgaConfig = MgaConfig(),
) -> list[MgaGroup]:
    """Driver and avoider groups for every decomposable attribute.

    Contribution-based: at least the two strongest (driver) or weakest
    (avoider) contributors, extended in rank order until the members could
    jointly cover the relevance threshold of total annual demand.
    Domain-balanced: per sector with suitable options, the best-ranked
    technologies until the sectoral threshold of that sector's demand is
    reachable. Tied contributions enter collectively, and threshold
    extension may re-use a technology already assigned to the sibling
    group. The avoider is omitted when fewer than
    ``min_avoider_contributors`` technologies contribute a nonzero amount,
    where a low-contribution group would not create meaningful structural
    variation.
    """
    if strategy not in (CONTRIBUTION, DOMAIN):
        raise MgaError(f"unknown assignment strategy {strategy!r}")
    groups: list[MgaGroup] = []
    for spec in catalog.decomposable_attributes():
        if spec.id not in catalog.coefficients:
            raise attr_mod.MissingCoefficient(spec.id, "*")
        pool = _pool_for(spec, model)
        contrib = {t.id: catalog.contribution(spec.id, t.id) for t in pool}
        nonzero = sum(1 for v in contrib.values() if v != 0.0)
        for kind in (DRIVER, AVOIDER):
            if kind == AVOIDER and nonzero < config.min_avoider_contributors:
                continue
            members = (
                _assign_contribution(contrib, kind, model, config)
                if strategy == CONTRIBUTION
                else _assign_domain(contrib, kind, pool, model, config)
            )
            if not members:
                continue
            groups.append(
                MgaGroup(
                    id=f"{spec.id}:{kind}:{strategy}",
                    kind=kind,
                    dimension=spec.basis,
                    members=tuple(members),
                    attribute=spec.id,
                    strategy=strategy,
                )
            )
    return groups

def _assign_contribution(
    contrib: Mapping[str, float], kind: str, model: esm.SystemModel, config: MgaConfig
) -> list[str]:
    reverse = kind == DRIVER
    ranked = sorted(contrib.items(), key=lambda kv: (-kv[1] if reverse else kv[1], kv[0]))
    if kind == DRIVER:
        ranked = [kv for kv in ranked if kv[1] != 0.0]
    clusters = _tie_clusters(ranked, config.tie_tolerance)
    target = config.relevance_threshold * model.total_annual_demand()
    return _select(clusters, 2, target, model)

def _assign_domain(
    contrib: Mapping[str, float],
    kind: str,
    pool: list[esm.Technology],
    model: esm.SystemModel,
    config: MgaConfig,
) -> list[str]:
    members: list[str] = []
    sectors = sorted({t.sector for t in pool})
    for sector in sectors:
        local = {t.id: contrib[t.id] for t in pool if t.sector == sector}
        if kind == DRIVER:
            local = {t: v for t, v in local.items() if v != 0.0}
        if not local:
            continue  # no suitable options in this sector
        reverse = kind == DRIVER
        ranked = sorted(local.items(), key=lambda kv: (-kv[1] if reverse else kv[1], kv[0]))
        clusters = _tie_clusters(ranked, config.tie_tolerance)
        threshold = config.sector_threshold
        if config.sector_thresholds and sector in config.sector_thresholds:
            threshold = config.sector_thresholds[sector]
        target = threshold * model.annual_demand(sector)
        members.extend(_select(clusters, 1, target, model))
    return members

def benchmark_groups(model: esm.SystemModel) -> list[MgaGroup]:
    """Conventional comparison grouping: one generation group per technology."""
    return [
        MgaGroup(
            id=f"bench:{t.id}",
            kind=BENCHMARK,
            dimension=attr_mod.GENERATION,
            members=(t.id,),
        )
        for t in model.technologies
    ]

# -- weight vectors -------------------------------------------------------------------

def build_weight_vectors(
    groups: Iterable[MgaGroup],
    schemes: Iterable[str],
) -> list[WeightVector]:
    """Extreme vectors per group and multi-extreme pairs per attribute.

    A weight of +1 minimises the group sum, -1 maximises it; the direction
    label names the effect on the group (or on the driver for pairs).
    """
    groups = list(groups)
    schemes = tuple(schemes)
    vectors: list[WeightVector] = []
    if EXTREME in schemes:
        for g in groups:
            vectors.append(
                WeightVector(id=f"{g.id}:max", scheme=EXTREME, entries=((g, -1),), direction="max")
            )
            vectors.append(
                WeightVector(id=f"{g.id}:min", scheme=EXTREME, entries=((g, 1),), direction="min")
            )
    if MULTI_EXTREME in schemes:
        by_key: dict[tuple[str, str], dict[str, MgaGroup]] = {}
        for g in groups:
            if g.attribute is None:
                continue
            by_key.setdefault((g.attribute, g.strategy or ""), {})[g.kind] = g
        for (attribute, strategy), pair in by_key.items():
            if DRIVER not in pair or AVOIDER not in pair:
                continue
            d, a = pair[DRIVER], pair[AVOIDER]
            prefix = f"{attribute}:{strategy}:me"
            vectors.append(
                WeightVector(
                    id=f"{prefix}:driver-max",
                    scheme=MULTI_EXTREME,
                    entries=((d, -1), (a, 1)),
                    direction="driver-max",
                )
            )
            vectors.append(
                WeightVector(
                    id=f"{prefix}:driver-min",
                    scheme=MULTI_EXTREME,
                    entries=((d, 1), (a, -1)),
                    direction="driver-min",
                )
            )
    return vectors

# -- solving ---------------------------------------------------------------------------

def _vector_objective(
    vector: WeightVector, model: esm.SystemModel
) -> dict[str, float]:
    obj: dict[str, float] = {}
    for group, weight in vector.entries:
        if group.dimension == attr_mod.GENERATION:
            for tech in group.members:
                for sl in model.slices:
                    key = esm.gen_var(tech, sl.id)
                    obj[key] = obj.get(key, 0.0) + weight
        else:
            for tech in group.members:
                if model.technology(tech).investable:
                    key = esm.invest_var(tech)
                    obj[key] = obj.get(key, 0.0) + weight
    return obj

def augmented_program(
    program: lp.LinearProgram,
    cost_coeffs: Mapping[str, float],
    f_star: float,
    objective: Mapping[str, float],
    slack: float,
    rho: float = 1e-4,
) -> lp.LinearProgram:
    """MGA program over an arbitrary base LP.

    Adds the near-optimality constraint ``cost <= (1 + slack) * f_star`` and
    augments the MGA objective with ``rho * cost / f_star`` so that among
    points with equal MGA objective the cheapest one wins.
    """
    capped = lp.add_constraint(
        program,
        lp.Constraint(dict(cost_coeffs), lp.LESS_EQUAL, (1.0 + slack) * f_star, name="cost_cap"),
    )
    denom = max(abs(f_star), 1e-12)
    obj = dict(objective)
    for vid, coef in cost_coeffs.items():
        obj[vid] = obj.get(vid, 0.0) + rho * coef / denom
    return lp.with_objective(capped, obj)

@dataclass(frozen=True)
class PreparedBase:
    """Cost-optimal solve artefacts reused across the sweep."""

    program: lp.LinearProgram
    cost_coeffs: dict[str, float]
    f_star: float
    solution: lp.LpSolution

def prepare_base(model: esm.SystemModel) -> PreparedBase:
    program = esm.compile_model(model)
    sol = lp.solve(program)
    if sol.status != lp.OPTIMAL:
        raise MgaError(f"cost-optimal solve failed: {sol.status}")
    return PreparedBase(program, dict(program.objective), sol.objective, sol)

def _capped_program(base: PreparedBase, slack: float) -> tuple[lp.LinearProgram, object]:
    cap = (1.0 + slack) * base.f_star
    capped = lp.add_constraint(
        base.program, lp.Constraint(base.cost_coeffs, lp.LESS_EQUAL, cap, name="cost_cap")
    )
    warm = None
    if base.solution.state is not None:
        warm = lp.extend_state_for_new_rows(base.solution.state, 1)
    return capped, warm

def _alternative_from_solution(
    model: esm.SystemModel,
    base: PreparedBase,
    sol: lp.LpSolution,
    alt_id: str,
    provenance: tuple[Provenance, ...],
    slack_level: float | None,
    config: MgaConfig,
) -> Alternative:
    summary = esm.decompose(model, sol)
    realised = summary.costs.total
    denom = max(abs(base.f_star), 1e-12)
    slack_used = realised / denom - 1.0 if base.f_star != 0.0 else 0.0
    artefact = False
    for tech in model.technologies:
        if not tech.investable:
            continue
        invested = summary.invested_capacity[tech.id]
        need = esm.required_capacity(model, tech, summary.generation_by_slice[tech.id])
        need_invest = max(0.0, need - tech.existing_mw)
        if invested > config.capacity_artefact_factor * need_invest + 1e-9:
            artefact = True
            break
    deployed = {
        t.id: t.existing_mw + summary.invested_capacity[t.id] for t in model.technologies
    }
    return Alternative(
        id=alt_id,
        provenance=provenance,
        annual_generation=summary.annual_generation,
        invested_capacity=summary.invested_capacity,
        deployed_capacity=deployed,
        costs=summary.costs,
        slack_used=slack_used,
        slack_level=slack_level,
        capacity_artefact=artefact,
    )

def mga_solve(
    model: esm.SystemModel,
    base: PreparedBase,
    vector: WeightVector,
    slack: float,
    config: MgaConfig = MgaConfig(),
    _prepared: tuple[lp.LinearProgram, object] | None = None,
) -> Alternative:
    """Solve one augmented MGA program.

    Minimises the weighted group sums plus ``rho * cost / f*`` subject to
    ``cost <= (1 + slack) * f*``; the augmentation term breaks ties among
    equal-diversity solutions toward lower cost, excluding weakly
    Pareto-optimal points.
    """
    if slack < 0:
        raise MgaError("slack must be >= 0")
    capped, warm = _prepared if _prepared is not None else _capped_program(base, slack)
    obj = _vector_objective(vector, model)
    denom = max(abs(base.f_star), 1e-12)
    for vid, coef in base.cost_coeffs.items():
        obj[vid] = obj.get(vid, 0.0) + config.rho * coef / denom
    sol = lp.solve(lp.with_objective(capped, obj), warm=warm)
    if sol.status != lp.OPTIMAL:
        raise MgaError(f"MGA run {vector.id!r} at slack {slack}: {sol.status}")
    run_id = _run_id(vector, slack)
    prov = Provenance(
        run_id=run_id,
        scheme=vector.scheme,
        strategy=_vector_strategy(vector),
        groups=tuple(g.id for g, _ in vector.entries),
        direction=vector.direction,
        slack=slack,
    )
    return _alternative_from_solution(model, base, sol, run_id, (prov,), slack, config)

def _vector_strategy(vector: WeightVector) -> str | None:
    strategies = {g.strategy for g, _ in vector.entries}
    return next(iter(strategies)) if len(strategies) == 1 else None

def _run_id(vector: WeightVector, slack: float) -> str:
    return f"{vector.id}@{_slack_label(slack)}"

def _slack_label(slack: float) -> str:
    pct = slack * 100.0
    return f"s{pct:g}"

def optimum_alternative(
    model: esm.SystemModel, base: PreparedBase, config: MgaConfig = MgaConfig()
) -> Alternative:
    prov = Provenance(
        run_id="optimum",
        scheme="cost-optimal",
        strategy=None,
        groups=(),
        direction="min-cost",
        slack=0.0,
    )
    return _alternative_from_solution(
        model, base, base.solution, "optimum", (prov,), None, config
    )

# -- sweep ----------------------------------------------------------------------------

def _objective_signature(vector: WeightVector, model: esm.SystemModel) -> tuple:
    obj = _vector_objective(vector, model)
    return tuple(sorted((k, v) for k, v in obj.items() if v != 0.0))

def _quantize(values: Mapping[str, float], quantum: float) -> tuple:
    q = max(quantum, 1e-30)
    return tuple((k, round(values[k] / q)) for k in sorted(values))

def _dedup_key(model: esm.SystemModel, alt: Alternative) -> tuple:
    # 1e-6 of the system's demand scale keeps the key relative to magnitude
    gen_quantum = 1e-6 * max(model.total_annual_demand(), 1.0)
    cap_quantum = 1e-6 * max(sum(t.max_invest_mw for t in model.technologies), 1e-6)
    return (
        _quantize(alt.annual_generation, gen_quantum),
        _quantize(alt.invested_capacity, cap_quantum),
    )

def _solve_slack_batch(
    model: esm.SystemModel,
    base: PreparedBase,
    vectors: list[WeightVector],
    slack: float,
    config: MgaConfig,
) -> tuple[list[Alternative], list[FailedRun]]:
    prepared = _capped_program(base, slack)
    done: list[Alternative] = []
    failed: list[FailedRun] = []
    memo: dict[tuple, Alternative] = {}
    for vector in vectors:
        run_id = _run_id(vector, slack)
        try:
            sig = _objective_signature(vector, model)
            cached = memo.get(sig)
            if cached is not None:
                prov = Provenance(
                    run_id=run_id,
                    scheme=vector.scheme,
                    strategy=_vector_strategy(vector),
                    groups=tuple(g.id for g, _ in vector.entries),
                    direction=vector.direction,
                    slack=slack,
                )
                done.append(replace(cached, id=run_id, provenance=(prov,)))
                continue
            alt = mga_solve(model, base, vector, slack, config, _prepared=prepared)
            memo[sig] = alt
            done.append(alt)
        except (MgaError, lp.LpError) as exc:
            failed.append(FailedRun(run_id=run_id, error=str(exc)))
    return done, failed

def generate_all(
    model: esm.SystemModel,
    catalog: attr_mod.AttributeCatalog,
    config: MgaConfig = MgaConfig(),
    base: PreparedBase | None = None,
    groups_by_strategy: Mapping[str, list[MgaGroup]] | None = None,
) -> MgaResult:
    """Full sweep: every weight vector at every slack, plus the cost optimum.

    Runs are independent; per-run failures are collected, not raised. The
    result is deterministic and duplicates (identical generation and
    capacity vectors up to 1e-6 of the system scale) are merged with
    combined provenance.
    """
    if base is None:
        base = prepare_base(model)
    vectors: list[WeightVector] = []
    if groups_by_strategy is None:
        groups_by_strategy = {
            strategy: construct_groups(catalog, model, strategy, config)
            for strategy in config.strategies
        }
    for strategy in config.strategies:
        vectors.extend(
            build_weight_vectors(groups_by_strategy[strategy], config.attribute_schemes)
        )
    if config.include_benchmark:
        vectors.extend(build_weight_vectors(benchmark_groups(model), config.benchmark_schemes))

    raw_count = len(vectors) * len(config.slacks)
    batches: list[tuple[list[Alternative], list[FailedRun]]] = []
    slacks = list(config.slacks)
    if config.jobs > 1 and len(slacks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=min(config.jobs, len(slacks))) as pool:
            futures = [
                pool.submit(_solve_slack_batch, model, base, vectors, slack, config)
                for slack in slacks
            ]
            batches = [f.result() for f in futures]
    else:
        batches = [
            _solve_slack_batch(model, base, vectors, slack, config) for slack in slacks
        ]

    alternatives: list[Alternative] = [optimum_alternative(model, base, config)]
    failed: list[FailedRun] = []
    for done, bad in batches:  # batches are ordered by slack: merge order is fixed
        alternatives.extend(done)
        failed.extend(bad)

    merged: dict[tuple, Alternative] = {}
    order: list[tuple] = []
    for alt in alternatives:
        key = _dedup_key(model, alt)
        if key in merged:
            kept = merged[key]
            merged[key] = replace(kept, provenance=kept.provenance + alt.provenance)
        else:
            merged[key] = alt
            order.append(key)
    final = tuple(merged[k] for k in order)
    _validate(final, base, config)
    return MgaResult(alternatives=final, raw_run_count=raw_count, failed=tuple(failed))

def _validate(alternatives: tuple[Alternative, ...], base: PreparedBase, config: MgaConfig) -> None:
    scale = max(abs(base.f_star), 1e-12)
    for alt in alternatives:
        if alt.slack_used < -1e-9:
            raise MgaError(f"alternative {alt.id!r}: cost below the optimum")
        cap = alt.slack_level if alt.slack_level is not None else 0.0
        if alt.costs.total > (1.0 + cap) * base.f_star + 1e-6 * scale:
            raise MgaError(f"alternative {alt.id!r}: slack constraint violated")
