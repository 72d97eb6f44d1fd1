"""Interactive preference-elicitation protocol as a resumable state machine.

Phases run strictly forward: attribute rank order, SWING ratings (the most
important attribute is pinned to 100, a rating of 0 declines an attribute),
mid-value bisection for the most important attribute of each high-level
objective, then a compensation check that maps indifference responses onto
the aggregation exponent. Every accepted answer advances the machine; an
invalid answer raises without changing state so the question can be retried.
Sessions serialise to plain dicts and resume at the identical pending
question.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

from . import attributes as attr_mod
from . import mavt

PHASE_RANKING = "swing-ranking"
PHASE_RATING = "swing-rating"
PHASE_BISECTION = "savf-bisection"
PHASE_COMPENSATION = "compensation-check"
PHASE_COMPLETE = "complete"

ACCEPT = "accept"
REJECT = "reject"
STRONG_REJECT = "strong-reject"

# value targets asked per attribute, in protocol order (dyadic refinement)
BISECTION_TARGETS = (0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875)


class SessionError(Exception):
    """Protocol violation that ends a request (session unchanged)."""


class AnswerRejected(SessionError):
    """Out-of-range or inconsistent answer; the question can be retried."""


@dataclass(frozen=True)
class AttributeHandle:
    """What the protocol needs to know about one attribute."""

    id: str
    name: str
    unit: str
    direction: str
    objective: str
    worst: float
    best: float

    def state_at(self, z: float) -> float:
        return self.worst + z * (self.best - self.worst)


@dataclass
class ElicitationSession:
    """Single-stakeholder elicitation; one writer at a time."""

    session_id: str
    stakeholder_id: str
    attributes: tuple[AttributeHandle, ...]
    bisection_depth: int = 3
    compensation_probes: int = 2
    phase: str = PHASE_RANKING
    rank_order: list[str] = field(default_factory=list)
    ratings: dict[str, float] = field(default_factory=dict)
    rating_queue: list[str] = field(default_factory=list)
    savf_queue: list[str] = field(default_factory=list)
    midpoints: dict[str, list[tuple[float, float]]] = field(default_factory=dict)
    probe_answers: list[str] = field(default_factory=list)
    gamma: float | None = None

    # -- questions -------------------------------------------------------------

    def handle(self, attr_id: str) -> AttributeHandle:
        for h in self.attributes:
            if h.id == attr_id:
                return h
        raise SessionError(f"unknown attribute {attr_id!r}")

    def next_question(self) -> dict[str, Any] | None:
        if self.phase == PHASE_RANKING:
            return {
                "type": "rank-order",
                "prompt": (
                    "Starting from an alternative that is worst on every attribute, "
                    "order the attributes by how valuable improving each one from its "
                    "worst to its best state would be."
                ),
                "attributes": [self._describe(h) for h in self.attributes],
            }
        if self.phase == PHASE_RATING:
            attr = self.rating_queue[0]
            return {
                "type": "swing-rating",
                "prompt": (
                    f"The swing of {self.handle(self.rank_order[0]).name!r} is worth 100. "
                    f"How much is the worst-to-best swing of {self.handle(attr).name!r} "
                    "worth on the same scale? Answer 0 to decline the attribute."
                ),
                "attribute": attr,
                "reference": self.rank_order[0],
                "max": 100.0,
                "ceiling": self._rating_ceiling(attr),
            }
        if self.phase == PHASE_BISECTION:
            attr = self.savf_queue[0]
            target = BISECTION_TARGETS[len(self.midpoints.get(attr, []))]
            lo, hi = self._bisection_interval(attr, target)
            h = self.handle(attr)
            return {
                "type": "bisection",
                "prompt": (
                    f"For {h.name!r} ({h.unit}), name the state whose value lies exactly "
                    f"at {target:g} between the states worth {lo:g} and {hi:g}."
                ),
                "attribute": attr,
                "target_value": target,
                "interval": [lo, hi],
            }
        if self.phase == PHASE_COMPENSATION:
            probe = len(self.probe_answers)
            a1, a2 = self._top_two_attributes()
            h1, h2 = self.handle(a1), self.handle(a2)
            if probe % 2 == 0:
                alt_b = {a1: h1.best, a2: h2.worst}
            else:
                alt_b = {a1: h1.worst, a2: h2.best}
            return {
                "type": "compensation",
                "prompt": (
                    "Consider two hypothetical alternatives that are identical "
                    "elsewhere. Do you accept that both are equally valuable overall, "
                    "i.e. that strength on one attribute fully offsets weakness on the "
                    "other?"
                ),
                "probe": probe + 1,
                "of_probes": self.compensation_probes,
                "alternative_a": {a1: h1.state_at(0.5), a2: h2.state_at(0.5)},
                "alternative_b": alt_b,
                "responses": [ACCEPT, REJECT, STRONG_REJECT],
            }
        return None

    def _describe(self, h: AttributeHandle) -> dict[str, Any]:
        return {
            "id": h.id,
            "name": h.name,
            "unit": h.unit,
            "direction": h.direction,
            "objective": h.objective,
            "worst": h.worst,
            "best": h.best,
        }

    def _rating_ceiling(self, attr: str) -> float:
        """Largest admissible rating: the nearest higher-ranked attribute
        that was not declined (declines do not cap what follows)."""
        idx = self.rank_order.index(attr)
        for prev in reversed(self.rank_order[:idx]):
            rating = self.ratings.get(prev, 100.0)
            if rating > 0.0:
                return rating
        return 100.0

    def _bisection_interval(self, attr: str, target: float) -> tuple[float, float]:
        h = self.handle(attr)
        points = [(0.0, h.worst), (1.0, h.best)] + [
            (v, s) for s, v in self.midpoints.get(attr, [])
        ]
        lower = max((p for p in points if p[0] < target), key=lambda p: p[0])
        upper = min((p for p in points if p[0] > target), key=lambda p: p[0])
        return lower[1], upper[1]

    def _top_two_attributes(self) -> tuple[str, str]:
        ranked = sorted(
            (a.id for a in self.attributes if self.ratings.get(a.id, 0.0) > 0.0),
            key=lambda x: (-self.ratings[x], self.rank_order.index(x)),
        )
        if len(ranked) < 2:
            ranked = list(ranked) + [a.id for a in self.attributes if a.id not in ranked]
        return ranked[0], ranked[1]

    # -- answers ------------------------------------------------------------------

    def submit_answer(self, answer: Mapping[str, Any]) -> None:
        if self.phase == PHASE_COMPLETE:
            raise SessionError("session already complete")
        kind = answer.get("type")
        expected = self.next_question()["type"]
        if kind != expected:
            raise AnswerRejected(f"expected a {expected!r} answer, got {kind!r}")
        handler = {
            "rank-order": self._answer_ranking,
            "swing-rating": self._answer_rating,
            "bisection": self._answer_bisection,
            "compensation": self._answer_compensation,
        }[expected]
        handler(answer)

    def _answer_ranking(self, answer: Mapping[str, Any]) -> None:
        order = list(answer.get("order", ()))
        if sorted(order) != sorted(a.id for a in self.attributes):
            raise AnswerRejected("rank order must be a permutation of all attributes")
        self.rank_order = order
        self.ratings = {order[0]: 100.0}
        self.rating_queue = order[1:]
        self.phase = PHASE_RATING
        if not self.rating_queue:
            self._finish_ratings()

    def _answer_rating(self, answer: Mapping[str, Any]) -> None:
        attr = self.rating_queue[0]
        try:
            rating = float(answer["rating"])
        except (KeyError, TypeError, ValueError):
            raise AnswerRejected("rating must be a number") from None
        ceiling = self._rating_ceiling(attr)
        if not (0.0 <= rating <= ceiling):
            raise AnswerRejected(
                f"rating must lie in [0, {ceiling:g}] to respect the rank order"
            )
        self.ratings[attr] = rating
        self.rating_queue.pop(0)
        if not self.rating_queue:
            self._finish_ratings()

    def _finish_ratings(self) -> None:
        self.savf_queue = self._designated_attributes()
        self.phase = PHASE_BISECTION if self.savf_queue else PHASE_COMPENSATION

    def _designated_attributes(self) -> list[str]:
        """Most important (highest-rated) attribute of each high-level objective."""
        chosen: dict[str, str] = {}
        for h in self.attributes:  # catalog order breaks ties
            rating = self.ratings.get(h.id, 0.0)
            if rating <= 0.0:
                continue
            cur = chosen.get(h.objective)
            if cur is None or rating > self.ratings[cur]:
                chosen[h.objective] = h.id
        seen: list[str] = []
        for h in self.attributes:
            if chosen.get(h.objective) == h.id and h.id not in seen:
                seen.append(h.id)
        return seen

    def _answer_bisection(self, answer: Mapping[str, Any]) -> None:
        attr = self.savf_queue[0]
        target = BISECTION_TARGETS[len(self.midpoints.get(attr, []))]
        lo, hi = self._bisection_interval(attr, target)
        try:
            state = float(answer["state"])
        except (KeyError, TypeError, ValueError):
            raise AnswerRejected("state must be a number") from None
        z_lo, z_hi = sorted((lo, hi))
        if not (z_lo < state < z_hi):
            raise AnswerRejected(f"state must lie strictly between {lo:g} and {hi:g}")
        self.midpoints.setdefault(attr, []).append((state, target))
        if len(self.midpoints[attr]) >= self.bisection_depth:
            self.savf_queue.pop(0)
            if not self.savf_queue:
                self.phase = PHASE_COMPENSATION

    def _answer_compensation(self, answer: Mapping[str, Any]) -> None:
        response = answer.get("response")
        if response not in (ACCEPT, REJECT, STRONG_REJECT):
            raise AnswerRejected("response must be accept, reject or strong-reject")
        self.probe_answers.append(response)
        if len(self.probe_answers) >= self.compensation_probes:
            self.gamma = _gamma_from_probes(self.probe_answers)
            self.phase = PHASE_COMPLETE

    # -- results ----------------------------------------------------------------------

    def answers_record(self) -> dict[str, Any]:
        """Recorded answers in the preferences-file schema (normalised midpoints)."""
        if self.phase != PHASE_COMPLETE:
            raise SessionError("session not complete")
        midpoints_z: dict[str, list[list[float]]] = {}
        for attr, pts in self.midpoints.items():
            h = self.handle(attr)
            span = h.best - h.worst
            midpoints_z[attr] = [[(s - h.worst) / span, v] for s, v in pts]
        declined = [a for a, r in self.ratings.items() if r == 0.0]
        return {
            "id": self.stakeholder_id,
            "ratings": {a.id: self.ratings.get(a.id, 0.0) for a in self.attributes},
            "gamma": self.gamma,
            "savf_midpoints_z": midpoints_z,
            "notes": f"declined: {', '.join(sorted(declined))}" if declined else "",
        }

    def preferences(self, ranges, catalog) -> mavt.StakeholderPreferences:
        return mavt.preferences_from_answers(self.answers_record(), ranges, catalog)

    # -- persistence --------------------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "session_id": self.session_id,
            "stakeholder_id": self.stakeholder_id,
            "attributes": [self._describe(h) for h in self.attributes],
            "bisection_depth": self.bisection_depth,
            "compensation_probes": self.compensation_probes,
            "phase": self.phase,
            "rank_order": list(self.rank_order),
            "ratings": dict(self.ratings),
            "rating_queue": list(self.rating_queue),
            "savf_queue": list(self.savf_queue),
            "midpoints": {a: [[s, v] for s, v in pts] for a, pts in self.midpoints.items()},
            "probe_answers": list(self.probe_answers),
            "gamma": self.gamma,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ElicitationSession":
        handles = tuple(
            AttributeHandle(
                id=a["id"], name=a["name"], unit=a["unit"], direction=a["direction"],
                objective=a["objective"], worst=a["worst"], best=a["best"],
            )
            for a in data["attributes"]
        )
        return cls(
            session_id=data["session_id"],
            stakeholder_id=data["stakeholder_id"],
            attributes=handles,
            bisection_depth=data["bisection_depth"],
            compensation_probes=data["compensation_probes"],
            phase=data["phase"],
            rank_order=list(data["rank_order"]),
            ratings={k: float(v) for k, v in data["ratings"].items()},
            rating_queue=list(data["rating_queue"]),
            savf_queue=list(data["savf_queue"]),
            midpoints={
                a: [(float(s), float(v)) for s, v in pts]
                for a, pts in data["midpoints"].items()
            },
            probe_answers=list(data["probe_answers"]),
            gamma=data["gamma"],
        )


def _gamma_from_probes(responses: list[str]) -> float:
    """Documented heuristic: full acceptance of compensation means the
    additive model (1.0); any strong rejection means none (0.0); otherwise
    the low-compensation baseline 0.2."""
    if all(r == ACCEPT for r in responses):
        return 1.0
    if any(r == STRONG_REJECT for r in responses):
        return 0.0
    return 0.2


def new_session(
    session_id: str,
    stakeholder_id: str,
    catalog: attr_mod.AttributeCatalog,
    ranges: Mapping[str, attr_mod.AttributeRange],
    bisection_depth: int = 3,
    compensation_probes: int = 2,
) -> ElicitationSession:
    handles = tuple(
        AttributeHandle(
            id=a.id, name=a.name, unit=a.unit, direction=a.direction,
            objective=a.objective, worst=ranges[a.id].worst, best=ranges[a.id].best,
        )
        for a in catalog.attributes
    )
    return ElicitationSession(
        session_id=session_id,
        stakeholder_id=stakeholder_id,
        attributes=handles,
        bisection_depth=bisection_depth,
        compensation_probes=compensation_probes,
    )
