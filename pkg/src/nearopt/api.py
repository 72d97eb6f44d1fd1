"""HTTP/JSON interface over a completed run directory.

Serves elicitation sessions (create, question, answer), alternatives and
rankings, the classification and clustering exports, and transient what-if
re-rankings. Endpoints mirror the pipeline artifacts one-to-one; the server
owns all analytics and the companion browser UI only renders responses.
Sessions are single-writer (answers are serialised per session) and persist
to disk after every accepted answer, so a restarted server resumes each
protocol at its pending question.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import attributes as attr_mod
from . import mavt, session as session_mod


class SessionCreate(BaseModel):
    stakeholder_id: str = Field(min_length=1)


class SessionView(BaseModel):
    session_id: str
    stakeholder_id: str
    phase: str
    question: dict[str, Any] | None


class AnswerBody(BaseModel):
    type: str
    order: list[str] | None = None
    rating: float | None = None
    state: float | None = None
    response: str | None = None

    def payload(self) -> dict[str, Any]:
        out: dict[str, Any] = {"type": self.type}
        for key in ("order", "rating", "state", "response"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out


class AlternativeRecord(BaseModel):
    id: str
    provenance: list[dict[str, Any]]
    annual_generation_mwh: dict[str, float]
    invested_capacity_mw: dict[str, float]
    deployed_capacity_mw: dict[str, float]
    costs_eur_a: dict[str, float]
    slack_level: float | None
    slack_used: float
    capacity_artefact: bool


class RankingEntry(BaseModel):
    alternative_id: str
    value: float
    rank: int


class RankingView(BaseModel):
    stakeholder: str
    entries: list[RankingEntry]


class AttributeView(BaseModel):
    id: str
    name: str
    unit: str
    direction: str
    objective: str
    objective_name: str
    worst: float
    best: float
    low: float
    high: float


class WhatIfBody(BaseModel):
    weights: dict[str, float]
    gamma: float = 0.2
    q: float | None = None
    baseline_stakeholder: str | None = None


class WhatIfView(BaseModel):
    entries: list[RankingEntry]
    weights_used: dict[str, float]
    gamma: float
    tau_distance_to_baseline: float | None
    top_ranges: dict[str, dict[str, Any]] | None


class HealthView(BaseModel):
    status: str
    run_id: str


class RunStore:
    """Artifacts of one run directory, loaded once and shared read-only."""

    def __init__(self, run_dir: Path) -> None:
        self.run_dir = run_dir
        self.manifest = self._load_json("manifest.json")
        self.alternatives = self._load_json("alternatives.json")
        self.catalog = attr_mod.load_catalog(self._catalog_path())
        ranges_raw = self._load_json("ranges.json")
        self.ranges = {
            attr: attr_mod.AttributeRange(**vals) for attr, vals in ranges_raw.items()
        }
        self.profiles = self._profiles_from_alternatives()
        self.classification = self._load_json_optional("classification.json")
        self.dendrogram = self._load_json_optional("dendrogram.json")
        prefs_raw = self._load_json_optional("preferences.json")
        self.raw_preferences = (prefs_raw or {}).get("stakeholders", [])
        self.preferences = {
            raw["id"]: mavt.preferences_from_answers(raw, self.ranges, self.catalog)
            for raw in self.raw_preferences
        }
        self.rankings = {
            sid: mavt.rank(self.profiles, prefs) for sid, prefs in self.preferences.items()
        }

    def _catalog_path(self) -> Path:
        # the catalog is copied into the run directory; fall back to the fixture
        from .pipeline import FIXTURE_DIR

        candidate = self.run_dir / "catalog.json"
        return candidate if candidate.exists() else FIXTURE_DIR / "catalog.json"

    def _load_json(self, name: str) -> dict:
        path = self.run_dir / name
        if not path.exists():
            raise FileNotFoundError(
                f"{name} missing from {self.run_dir}: run the pipeline first"
            )
        return json.loads(path.read_text(encoding="utf-8"))

    def _load_json_optional(self, name: str) -> dict | None:
        path = self.run_dir / name
        return json.loads(path.read_text(encoding="utf-8")) if path.exists() else None

    def _profiles_from_alternatives(self) -> list[attr_mod.AttributeProfile]:
        from . import mga  # local import to avoid a cycle at module load
        from .esm import CostBreakdown

        profiles = []
        for rec in self.alternatives["alternatives"]:
            costs = rec["costs_eur_a"]
            alt = mga.Alternative(
                id=rec["id"],
                provenance=(),
                annual_generation=rec["annual_generation_mwh"],
                invested_capacity=rec["invested_capacity_mw"],
                deployed_capacity=rec["deployed_capacity_mw"],
                costs=CostBreakdown(
                    invest=costs["invest"], fom=costs["fixed_om"], vom=costs["variable_om"],
                    fuel=costs["fuel"], aux=costs["auxiliary"], total=costs["total"],
                ),
                slack_used=rec["slack_used"],
                slack_level=rec["slack_level"],
                capacity_artefact=rec["capacity_artefact"],
            )
            profiles.append(attr_mod.evaluate(alt, self.catalog))
        return profiles


class SessionStore:
    """Disk-backed sessions; one lock per session serialises writers."""

    def __init__(self, run_dir: Path) -> None:
        self.dir = run_dir / "sessions"
        self.dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def new_id(self, stakeholder_id: str) -> str:
        existing = len(list(self.dir.glob(f"s-{stakeholder_id}-*.json")))
        return f"s-{stakeholder_id}-{existing + 1:03d}"

    def save(self, sess: session_mod.ElicitationSession) -> None:
        path = self.dir / f"{sess.session_id}.json"
        path.write_text(
            json.dumps(sess.to_dict(), sort_keys=True, indent=1) + "\n", encoding="utf-8"
        )

    def load(self, session_id: str) -> session_mod.ElicitationSession:
        path = self.dir / f"{session_id}.json"
        if not path.exists():
            raise KeyError(session_id)
        return session_mod.ElicitationSession.from_dict(
            json.loads(path.read_text(encoding="utf-8"))
        )

    def save_record(self, sess: session_mod.ElicitationSession) -> Path:
        record = sess.answers_record()
        path = self.dir / f"{sess.stakeholder_id}.preferences.json"
        path.write_text(json.dumps(record, sort_keys=True, indent=1) + "\n", encoding="utf-8")
        return path


def create_app(run_dir: str | Path, frontend_dir: str | Path | None = None) -> FastAPI:
    store = RunStore(Path(run_dir))
    sessions = SessionStore(Path(run_dir))
    app = FastAPI(title="near-optimal alternatives API", version="0.1.0")

    def session_view(sess: session_mod.ElicitationSession) -> SessionView:
        return SessionView(
            session_id=sess.session_id,
            stakeholder_id=sess.stakeholder_id,
            phase=sess.phase,
            question=sess.next_question(),
        )

    @app.get("/healthz", response_model=HealthView)
    def healthz() -> HealthView:
        return HealthView(status="ok", run_id=store.manifest["run_id"])

    @app.get("/attributes", response_model=list[AttributeView])
    def attributes_meta() -> list[AttributeView]:
        out = []
        for spec in store.catalog.attributes:
            rng = store.ranges[spec.id]
            out.append(
                AttributeView(
                    id=spec.id, name=spec.name, unit=spec.unit, direction=spec.direction,
                    objective=spec.objective, objective_name=spec.objective_name,
                    worst=rng.worst, best=rng.best, low=rng.low, high=rng.high,
                )
            )
        return out

    @app.post("/sessions", response_model=SessionView)
    def create_session(body: SessionCreate) -> SessionView:
        sess = session_mod.new_session(
            session_id=sessions.new_id(body.stakeholder_id),
            stakeholder_id=body.stakeholder_id,
            catalog=store.catalog,
            ranges=store.ranges,
        )
        sessions.save(sess)
        return session_view(sess)

    @app.get("/sessions/{session_id}/question", response_model=SessionView)
    def get_question(session_id: str) -> SessionView:
        try:
            sess = sessions.load(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session") from None
        return session_view(sess)

    @app.post("/sessions/{session_id}/answer", response_model=SessionView)
    def submit_answer(session_id: str, body: AnswerBody) -> SessionView:
        lock = sessions.lock(session_id)
        with lock:
            try:
                sess = sessions.load(session_id)
            except KeyError:
                raise HTTPException(status_code=404, detail="unknown session") from None
            try:
                sess.submit_answer(body.payload())
            except session_mod.AnswerRejected as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from None
            except session_mod.SessionError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from None
            sessions.save(sess)
            if sess.phase == session_mod.PHASE_COMPLETE:
                sessions.save_record(sess)
        return session_view(sess)

    @app.get("/alternatives", response_model=list[AlternativeRecord])
    def alternatives(top: float | None = None, stakeholder: str | None = None):
        records = store.alternatives["alternatives"]
        if top is None and stakeholder is None:
            return records
        if stakeholder is None or top is None:
            raise HTTPException(
                status_code=422, detail="top and stakeholder must be given together"
            )
        ranking = store.rankings.get(stakeholder)
        if ranking is None:
            raise HTTPException(status_code=404, detail="unknown stakeholder")
        try:
            keep = set(ranking.top_fraction(top))
        except mavt.MavtError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return [r for r in records if r["id"] in keep]

    @app.get("/rankings/{stakeholder}", response_model=RankingView)
    def rankings(stakeholder: str) -> RankingView:
        ranking = store.rankings.get(stakeholder)
        if ranking is None:
            raise HTTPException(status_code=404, detail="unknown stakeholder")
        return RankingView(
            stakeholder=stakeholder,
            entries=[
                RankingEntry(alternative_id=e.alternative_id, value=e.value, rank=e.rank)
                for e in ranking.entries
            ],
        )

    @app.get("/analysis/classification")
    def classification() -> dict:
        if store.classification is None:
            raise HTTPException(status_code=404, detail="analysis stage did not run")
        return store.classification

    @app.get("/analysis/clustering")
    def clustering() -> dict:
        if store.dendrogram is None:
            raise HTTPException(status_code=404, detail="clustering not available")
        return store.dendrogram

    @app.post("/whatif", response_model=WhatIfView)
    def whatif(body: WhatIfBody) -> WhatIfView:
        total = sum(body.weights.values())
        if total <= 0:
            raise HTTPException(status_code=422, detail="weights must not all be zero")
        weights = {a.id: body.weights.get(a.id, 0.0) / total for a in store.catalog.attributes}
        if body.baseline_stakeholder is not None:
            base_prefs = store.preferences.get(body.baseline_stakeholder)
            if base_prefs is None:
                raise HTTPException(status_code=404, detail="unknown stakeholder")
            vfs = dict(base_prefs.value_functions)
        else:
            vfs = {
                spec.id: mavt.ValueFunction(
                    attribute=spec.id,
                    worst=store.ranges[spec.id].worst,
                    best=store.ranges[spec.id].best,
                )
                for spec in store.catalog.attributes
            }
        try:
            prefs = mavt.StakeholderPreferences(
                stakeholder_id="whatif",
                weights=weights,
                value_functions=vfs,
                gamma=body.gamma,
            )
            ranking = mavt.rank(store.profiles, prefs)
        except mavt.MavtError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        tau = None
        if body.baseline_stakeholder is not None:
            baseline = store.rankings[body.baseline_stakeholder]
            order = sorted(baseline.alternative_ids())
            tau = mavt.kendall_tau_distance(
                baseline.rank_vector(order), ranking.rank_vector(order)
            )
        top_ranges = None
        if body.q is not None:
            try:
                top_ids = set(ranking.top_fraction(body.q))
            except mavt.MavtError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from None
            top_ranges = {}
            records = store.alternatives["alternatives"]
            for tech in records[0]["annual_generation_mwh"]:
                full_vals = [r["annual_generation_mwh"][tech] for r in records]
                top_vals = [
                    r["annual_generation_mwh"][tech] for r in records if r["id"] in top_ids
                ]
                full = (min(full_vals), max(full_vals))
                top_rng = (min(top_vals), max(top_vals))
                span = full[1] - full[0]
                reduction = 1.0 - (top_rng[1] - top_rng[0]) / span if span > 0 else 0.0
                top_ranges[tech] = {
                    "full": list(full), "top": list(top_rng), "reduction": reduction,
                }
        return WhatIfView(
            entries=[
                RankingEntry(alternative_id=e.alternative_id, value=e.value, rank=e.rank)
                for e in ranking.entries
            ],
            weights_used=weights,
            gamma=body.gamma,
            tau_distance_to_baseline=tau,
            top_ranges=top_ranges,
        )

    if frontend_dir is not None and Path(frontend_dir).exists():
        # mounted last so every API route keeps precedence; html=True makes
        # "/" serve the UI entry point
        app.mount("/", StaticFiles(directory=Path(frontend_dir), html=True), name="ui")

    return app
