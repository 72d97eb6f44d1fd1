"""End-to-end orchestration: optimise, group, generate, evaluate, rank, analyse.

All artifacts are plain JSON/CSV files in a run directory so results stay
auditable and diff-able. Serialisation is deterministic (sorted keys,
shortest round-trip float repr): re-running the pipeline on identical inputs
reproduces identical artifact bytes. The manifest records input digests,
the configuration snapshot, stage timestamps and counts.
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from . import attributes as attr_mod
from . import esm, mavt, mga

FIXTURE_DIR = Path(__file__).parent / "fixtures"


class PipelineError(Exception):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    top_fraction: float = 0.10
    presence_threshold: float = 0.001
    gamma_sweep: tuple[float, ...] = (0.0, 0.2, 1.0)
    weight_delta: float = 0.05
    focus: tuple[str, ...] = ("optimum",)


@dataclass(frozen=True)
class RunInputs:
    system: Path
    catalog: Path
    mga_config: Path
    preferences: Path | None = None

    @classmethod
    def from_config(cls, source: str | Path | Mapping | None) -> "RunInputs":
        """Resolve a run-config file {system, catalog, mga_config, preferences};
        missing entries fall back to the packaged desk fixture."""
        if source is None:
            data: Mapping[str, Any] = {}
            base = FIXTURE_DIR
        elif isinstance(source, Mapping):
            data = source
            base = Path(".")
        else:
            path = Path(source)
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
            base = path.parent
        def resolve(key: str, default: str | None) -> Path | None:
            if key in data and data[key] is not None:
                return (base / data[key]).resolve()
            return FIXTURE_DIR / default if default else None
        prefs = resolve("preferences", None)
        if prefs is None and "preferences" not in data:
            prefs = FIXTURE_DIR / "preferences.json"
        return cls(
            system=resolve("system", "system.json"),
            catalog=resolve("catalog", "catalog.json"),
            mga_config=resolve("mga_config", "mga-config.json"),
            preferences=prefs,
        )


@dataclass
class RunManifest:
    run_id: str
    input_digests: dict[str, str]
    config: dict[str, Any]
    counts: dict[str, int]
    timestamps: dict[str, str]
    artifacts: list[str]

    def write(self, out_dir: Path) -> None:
        _write_json(out_dir / "manifest.json", self.__dict__)


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(payload, sort_keys=True, indent=1)
    path.write_text(text + "\n", encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows: list[list[Any]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


# -- artifact payloads ------------------------------------------------------------


def alternative_to_dict(alt: mga.Alternative) -> dict[str, Any]:
    return {
        "id": alt.id,
        "provenance": [
            {
                "run_id": p.run_id,
                "scheme": p.scheme,
                "strategy": p.strategy,
                "groups": list(p.groups),
                "direction": p.direction,
                "slack": p.slack,
            }
            for p in alt.provenance
        ],
        "annual_generation_mwh": dict(alt.annual_generation),
        "invested_capacity_mw": dict(alt.invested_capacity),
        "deployed_capacity_mw": dict(alt.deployed_capacity),
        "costs_eur_a": alt.costs.as_dict(),
        "slack_level": alt.slack_level,
        "slack_used": alt.slack_used,
        "capacity_artefact": alt.capacity_artefact,
    }


def groups_payload(groups_by_strategy: Mapping[str, list[mga.MgaGroup]],
                   bench: list[mga.MgaGroup]) -> dict[str, Any]:
    def enc(groups: list[mga.MgaGroup]) -> list[dict[str, Any]]:
        return [
            {
                "id": g.id,
                "kind": g.kind,
                "dimension": g.dimension,
                "attribute": g.attribute,
                "strategy": g.strategy,
                "members": list(g.members),
            }
            for g in groups
        ]

    return {strategy: enc(groups) for strategy, groups in groups_by_strategy.items()} | {
        "benchmark": enc(bench)
    }


def profiles_rows(profiles, catalog) -> tuple[list[str], list[list[Any]]]:
    header = ["alternative_id"]
    for spec in catalog.attributes:
        header += [f"{spec.id}_mean", f"{spec.id}_low", f"{spec.id}_high"]
    rows = []
    for p in profiles:
        row: list[Any] = [p.alternative_id]
        for spec in catalog.attributes:
            mean, low, high = p.values[spec.id]
            row += [repr(mean), repr(low), repr(high)]
        rows.append(row)
    return header, rows


# -- pipeline -----------------------------------------------------------------------


@dataclass
class RunState:
    """In-memory results of the stages executed so far."""

    inputs: RunInputs
    model: esm.SystemModel
    catalog: attr_mod.AttributeCatalog
    config: mga.MgaConfig
    analysis: AnalysisConfig
    raw_preferences: list[dict] | None = None
    base: mga.PreparedBase | None = None
    groups_by_strategy: dict[str, list[mga.MgaGroup]] | None = None
    result: mga.MgaResult | None = None
    profiles: list[attr_mod.AttributeProfile] | None = None
    ranges: dict[str, attr_mod.AttributeRange] | None = None
    preferences: list[mavt.StakeholderPreferences] | None = None
    rankings: list[mavt.Ranking] | None = None


STAGES = ("optimize", "groups", "generate", "evaluate", "rank", "analyse")


def load_inputs(inputs: RunInputs) -> RunState:
    model = esm.load_system(inputs.system)
    catalog = attr_mod.load_catalog(inputs.catalog)
    config = mga.load_mga_config(inputs.mga_config)
    with open(inputs.mga_config, encoding="utf-8") as fh:
        raw_cfg = json.load(fh)
    analysis = AnalysisConfig(
        top_fraction=raw_cfg.get("top_fraction", 0.10),
        presence_threshold=raw_cfg.get("presence_threshold", 0.001),
        gamma_sweep=tuple(raw_cfg.get("gamma_sweep", (0.0, 0.2, 1.0))),
        weight_delta=raw_cfg.get("weight_delta", 0.05),
        focus=tuple(raw_cfg.get("focus", ("optimum",))),
    )
    raw_prefs = None
    if inputs.preferences is not None and Path(inputs.preferences).exists():
        with open(inputs.preferences, encoding="utf-8") as fh:
            raw_prefs = json.load(fh)["stakeholders"]
    return RunState(
        inputs=inputs, model=model, catalog=catalog, config=config,
        analysis=analysis, raw_preferences=raw_prefs,
    )


def run_pipeline(
    inputs: RunInputs,
    out_dir: str | Path,
    until: str = "analyse",
    jobs: int | None = None,
) -> RunManifest:
    """Execute stages in order up to ``until`` and persist all artifacts.

    Stages recompute deterministically from the inputs (no hidden state
    between invocations); per-run MGA failures are collected in
    ``alternatives.json`` without aborting the sweep.
    """
    if until not in STAGES:
        raise PipelineError(f"unknown stage {until!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    state = load_inputs(inputs)
    if jobs is not None:
        from dataclasses import replace

        state.config = replace(state.config, jobs=jobs)
    timestamps: dict[str, str] = {}
    artifacts: list[str] = []
    counts: dict[str, int] = {}
    last = STAGES.index(until)

    digests = {
        "system": _digest(inputs.system),
        "catalog": _digest(inputs.catalog),
        "mga_config": _digest(inputs.mga_config),
    }
    if inputs.preferences is not None and Path(inputs.preferences).exists():
        digests["preferences"] = _digest(Path(inputs.preferences))
    run_id = hashlib.sha256(
        json.dumps(digests, sort_keys=True).encode()
    ).hexdigest()[:12]

    # optimize
    state.base = mga.prepare_base(state.model)
    counts["lp_variables"] = len(state.base.program.variables)
    counts["lp_constraints"] = len(state.base.program.constraints)
    timestamps["optimize"] = _now()

    if last >= STAGES.index("groups"):
        state.groups_by_strategy = {
            strategy: mga.construct_groups(state.catalog, state.model, strategy, state.config)
            for strategy in state.config.strategies
        }
        bench = mga.benchmark_groups(state.model) if state.config.include_benchmark else []
        _write_json(out / "groups.json", groups_payload(state.groups_by_strategy, bench))
        artifacts.append("groups.json")
        for strategy, groups in state.groups_by_strategy.items():
            counts[f"groups_{strategy}"] = len(groups)
        counts["groups_benchmark"] = len(bench)
        timestamps["groups"] = _now()

    if last >= STAGES.index("generate"):
        state.result = mga.generate_all(
            state.model, state.catalog, state.config,
            base=state.base, groups_by_strategy=state.groups_by_strategy,
        )
        payload = {
            "f_star": state.base.f_star,
            "raw_run_count": state.result.raw_run_count,
            "deduped_count": state.result.deduped_count,
            "failed_runs": [{"run_id": f.run_id, "error": f.error} for f in state.result.failed],
            "alternatives": [alternative_to_dict(a) for a in state.result.alternatives],
        }
        _write_json(out / "alternatives.json", payload)
        artifacts.append("alternatives.json")
        rows = []
        for alt in state.result.alternatives:
            for component, value in alt.costs.as_dict().items():
                rows.append([alt.id, component, repr(value)])
        _write_csv(out / "costs.csv", ["alternative_id", "component", "eur_per_year"], rows)
        artifacts.append("costs.csv")
        counts["raw_runs"] = state.result.raw_run_count
        counts["alternatives"] = state.result.deduped_count
        counts["failed_runs"] = len(state.result.failed)
        timestamps["generate"] = _now()

    if last >= STAGES.index("evaluate"):
        state.profiles = [
            attr_mod.evaluate(alt, state.catalog) for alt in state.result.alternatives
        ]
        state.ranges = attr_mod.impact_ranges(state.profiles, state.catalog)
        header, rows = profiles_rows(state.profiles, state.catalog)
        _write_csv(out / "profiles.csv", header, rows)
        artifacts.append("profiles.csv")
        _write_json(
            out / "ranges.json",
            {
                attr: {"low": r.low, "high": r.high, "worst": r.worst, "best": r.best}
                for attr, r in state.ranges.items()
            },
        )
        artifacts.append("ranges.json")
        # the API serves sessions and what-if queries from the run directory
        # alone, so the catalog travels with the results
        (out / "catalog.json").write_bytes(Path(inputs.catalog).read_bytes())
        artifacts.append("catalog.json")
        timestamps["evaluate"] = _now()

    has_prefs = bool(state.raw_preferences)
    if last >= STAGES.index("rank") and has_prefs:
        state.preferences = [
            mavt.preferences_from_answers(raw, state.ranges, state.catalog)
            for raw in state.raw_preferences
        ]
        state.rankings = [mavt.rank(state.profiles, p) for p in state.preferences]
        rows = []
        for ranking in state.rankings:
            for e in ranking.entries:
                rows.append([ranking.stakeholder_id, e.alternative_id, repr(e.value), e.rank])
        _write_csv(out / "rankings.csv", ["stakeholder", "alternative_id", "value", "rank"], rows)
        artifacts.append("rankings.csv")
        # self-contained run directory: keep the preference answers next to
        # the rankings they produced (the API serves what-if queries off them)
        _write_json(out / "preferences.json", {"stakeholders": state.raw_preferences})
        artifacts.append("preferences.json")
        counts["stakeholders"] = len(state.preferences)
        timestamps["rank"] = _now()

    if last >= STAGES.index("analyse") and has_prefs:
        classification = mavt.classify_technologies(
            state.result.alternatives, state.rankings, state.model,
            q=state.analysis.top_fraction, threshold=state.analysis.presence_threshold,
        )
        frequency = mavt.occurrence_frequency(
            state.result.alternatives, state.rankings, state.model,
            q=state.analysis.top_fraction, threshold=state.analysis.presence_threshold,
        )
        _write_json(out / "classification.json", classification_payload(classification, frequency))
        artifacts.append("classification.json")
        if len(state.rankings) >= 2:
            dendro = mavt.cluster_stakeholders(state.rankings)
            _write_json(
                out / "dendrogram.json",
                {
                    "labels": list(dendro.labels),
                    "merges": [
                        {"left": m.left, "right": m.right, "height": m.height, "size": m.size}
                        for m in dendro.merges
                    ],
                },
            )
            artifacts.append("dendrogram.json")
        rows = []
        for prefs, ranking in zip(state.preferences, state.rankings):
            report = mavt.sensitivity(
                prefs, state.profiles,
                gamma_sweep=state.analysis.gamma_sweep,
                weight_delta=state.analysis.weight_delta,
                focus_ids=state.analysis.focus,
            )
            for e in report.entries:
                focus = e.focus_ranks.get("optimum", "")
                rows.append([report.stakeholder_id, e.label, repr(e.gamma),
                             repr(e.tau_distance), focus])
        _write_csv(
            out / "sensitivity.csv",
            ["stakeholder", "perturbation", "gamma", "tau_distance", "optimum_rank"],
            rows,
        )
        artifacts.append("sensitivity.csv")
        timestamps["analyse"] = _now()

    manifest = RunManifest(
        run_id=run_id,
        input_digests=digests,
        config={
            "slacks": list(state.config.slacks),
            "strategies": list(state.config.strategies),
            "attribute_schemes": list(state.config.attribute_schemes),
            "benchmark_schemes": list(state.config.benchmark_schemes),
            "relevance_threshold": state.config.relevance_threshold,
            "sector_threshold": state.config.sector_threshold,
            "rho": state.config.rho,
            "top_fraction": state.analysis.top_fraction,
            "presence_threshold": state.analysis.presence_threshold,
            "until": until,
            "seed_independent": True,  # no RNG anywhere in the pipeline
        },
        counts=counts,
        timestamps=timestamps,
        artifacts=sorted(artifacts),
    )
    manifest.write(out)
    return manifest


def classification_payload(cls: mavt.TechnologyClassification,
                           frequency: Mapping[str, Mapping[str, float]]) -> dict[str, Any]:
    def ranges(data: Mapping[str, mavt.RangeNarrowing]) -> dict[str, Any]:
        return {
            tech: {
                "full": list(nr.full),
                "top": list(nr.top) if nr.top is not None else None,
                "reduction": nr.reduction,
            }
            for tech, nr in data.items()
        }

    return {
        "top_fraction": cls.top_fraction,
        "full_set": dict(cls.full_set),
        "value_focused": dict(cls.value_focused),
        "pooled_ranges": ranges(cls.pooled_ranges),
        "per_stakeholder_ranges": {
            sh: ranges(data) for sh, data in cls.per_stakeholder_ranges.items()
        },
        "occurrence_frequency": {sh: dict(freqs) for sh, freqs in frequency.items()},
    }
