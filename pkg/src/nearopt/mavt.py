"""Multi-attribute value theory: preferences, scoring, and downstream analyses.

Single-attribute value functions map attribute states onto [0, 1] between a
worst and a best reference state (linear, exponential with curvature, or
piecewise from elicited points). Stakeholder weights come from SWING
ratings. The overall score is a weighted power mean with exponent gamma:
additive at gamma = 1, geometric in the limit gamma = 0; low gamma means
little compensation between objectives. On top of the rankings sit the
technology classification (must-have / real-choice / must-avoid), top-range
narrowing, occurrence frequencies, stakeholder clustering and a
perturbation-based stability report.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import optimize

MUST_HAVE = "must-have"
REAL_CHOICE = "real-choice"
MUST_AVOID = "must-avoid"


class MavtError(Exception):
    pass


# -- value functions -----------------------------------------------------------


@dataclass(frozen=True)
class ValueFunction:
    """Maps an attribute state to [0, 1]; v(worst) = 0 and v(best) = 1.

    ``curvature`` c parameterises v(z) = (1 - exp(-c z)) / (1 - exp(-c)) on
    the normalised scale z in [0, 1]; c = 0 is the linear limit. When
    ``points`` is set the function instead interpolates the elicited
    (z, value) pairs piecewise-linearly.
    """

    attribute: str
    worst: float
    best: float
    curvature: float = 0.0
    points: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        if self.worst == self.best:
            raise MavtError(f"attribute {self.attribute!r}: worst and best states coincide")
        if self.points is not None:
            zs = [z for z, _ in self.points]
            vs = [v for _, v in self.points]
            if zs != sorted(zs) or vs != sorted(vs):
                raise MavtError(f"attribute {self.attribute!r}: piecewise points not monotone")

    def normalise(self, state: float) -> float:
        z = (state - self.worst) / (self.best - self.worst)
        return min(1.0, max(0.0, z))

    def value(self, state: float) -> float:
        z = self.normalise(state)
        if self.points is not None:
            return _piecewise(self.points, z)
        return _exponential(self.curvature, z)


def _exponential(c: float, z: float) -> float:
    if z <= 0.0:
        return 0.0
    if z >= 1.0:
        return 1.0
    if abs(c) < 1e-9:
        return z
    return (1.0 - math.exp(-c * z)) / (1.0 - math.exp(-c))


def _piecewise(points: tuple[tuple[float, float], ...], z: float) -> float:
    knots = [(0.0, 0.0), *points, (1.0, 1.0)]
    zs = [p[0] for p in knots]
    i = min(max(bisect_right(zs, z) - 1, 0), len(knots) - 2)
    (z0, v0), (z1, v1) = knots[i], knots[i + 1]
    if z1 == z0:
        return v1
    return v0 + (v1 - v0) * (z - z0) / (z1 - z0)


def fit_savf(
    worst: float,
    best: float,
    midpoints: Sequence[tuple[float, float]],
    attribute: str = "",
) -> ValueFunction:
    """Exponential value function through elicited mid-value points.

    States must lie strictly between worst and best with targets in (0, 1);
    a non-monotone point set is rejected. One midpoint is met exactly by
    root finding; several are fitted by least squares over the curvature.
    Without midpoints the function is linear.
    """
    if not midpoints:
        return ValueFunction(attribute=attribute, worst=worst, best=best, curvature=0.0)
    span = best - worst
    pts = []
    for state, target in midpoints:
        z = (state - worst) / span
        if not (0.0 < z < 1.0):
            raise MavtError(f"midpoint state {state} outside ({worst}, {best})")
        if not (0.0 < target < 1.0):
            raise MavtError(f"midpoint value {target} outside (0, 1)")
        pts.append((z, target))
    pts.sort()
    zs = np.array([z for z, _ in pts])
    ts = np.array([t for _, t in pts])
    if np.any(np.diff(ts) <= 0.0):
        raise MavtError("midpoints are not monotone")

    if len(pts) == 1:
        c = _solve_single_midpoint(*pts[0])
    else:

        def sse(c: float) -> float:
            return float(sum((_exponential(c, z) - t) ** 2 for z, t in pts))

        res = optimize.minimize_scalar(sse, bounds=(-60.0, 60.0), method="bounded",
                                       options={"xatol": 1e-10})
        c = float(res.x)
        if abs(c) < 1e-7:
            c = 0.0
    return ValueFunction(attribute=attribute, worst=worst, best=best, curvature=c)


def _solve_single_midpoint(z0: float, target: float) -> float:
    if abs(target - z0) < 1e-12:
        return 0.0

    def g(c: float) -> float:
        return _exponential(c, z0) - target

    lo, hi = -60.0, 60.0
    if g(lo) * g(hi) > 0:
        raise MavtError(f"midpoint (z={z0}, v={target}) outside the fittable range")
    return float(optimize.brentq(g, lo, hi, xtol=1e-12))


# -- preferences -----------------------------------------------------------------


def swing_weights(ratings: Mapping[str, float]) -> dict[str, float]:
    """Normalised SWING weights: each rating over the ratings total.

    The most important attribute is rated exactly 100; declined attributes
    are rated 0 and end up with weight 0.
    """
    if not ratings:
        raise MavtError("no ratings given")
    values = list(ratings.values())
    if any(r < 0 or r > 100 for r in values):
        raise MavtError("ratings must lie in [0, 100]")
    total = sum(values)
    if total == 0:
        raise MavtError("all attributes declined: cannot derive weights")
    if max(values) != 100:
        raise MavtError("the most important attribute must be rated exactly 100")
    return {a: r / total for a, r in ratings.items()}


@dataclass(frozen=True)
class StakeholderPreferences:
    """Elicited decision model of one (anonymised) stakeholder."""

    stakeholder_id: str
    weights: Mapping[str, float]
    value_functions: Mapping[str, ValueFunction]
    gamma: float = 0.2
    notes: str = ""

    def __post_init__(self) -> None:
        if any(w < 0 for w in self.weights.values()):
            raise MavtError("weights must be non-negative")
        total = sum(self.weights.values())
        if abs(total - 1.0) > 1e-9:
            raise MavtError(f"weights sum to {total!r}, expected 1")
        if not math.isfinite(self.gamma) or self.gamma < 0.0:
            raise MavtError("gamma must be finite and >= 0")
        for attr, w in self.weights.items():
            if w > 0 and attr not in self.value_functions:
                raise MavtError(f"attribute {attr!r} has weight but no value function")


def aggregate(profile, prefs: StakeholderPreferences) -> float:
    """Overall value: weighted power mean of the single-attribute values.

    gamma = 0 is the geometric form (zero stays zero when weighted); the
    score is evaluated on attribute means.
    """
    terms: list[tuple[float, float]] = []
    for attr, weight in prefs.weights.items():
        if weight == 0.0:
            continue
        vf = prefs.value_functions[attr]
        terms.append((weight, vf.value(profile.mean(attr))))
    if not terms:
        raise MavtError("no positively weighted attributes")
    gamma = prefs.gamma
    if gamma == 0.0:
        out = 1.0
        for w, v in terms:
            if v == 0.0:
                return 0.0
            out *= v**w
        # weights may sum to <1 when zero-weight attributes were skipped: they
        # contribute factor 1 exactly, so the product is already complete
        return out
    return float(sum(w * v**gamma for w, v in terms) ** (1.0 / gamma))


# -- ranking ------------------------------------------------------------------------


@dataclass(frozen=True)
class RankedAlternative:
    alternative_id: str
    value: float
    rank: int


@dataclass(frozen=True)
class Ranking:
    stakeholder_id: str
    entries: tuple[RankedAlternative, ...]

    def rank_of(self, alternative_id: str) -> int:
        for e in self.entries:
            if e.alternative_id == alternative_id:
                return e.rank
        raise KeyError(alternative_id)

    def alternative_ids(self) -> tuple[str, ...]:
        return tuple(e.alternative_id for e in self.entries)

    def top_fraction(self, q: float) -> tuple[str, ...]:
        """Ids of the best-ranked ``q`` share of alternatives."""
        count = int(q * len(self.entries))
        if count < 1:
            raise MavtError(f"top fraction {q} selects no alternatives")
        return tuple(e.alternative_id for e in self.entries[:count])

    def rank_vector(self, order: Sequence[str]) -> list[int]:
        by_id = {e.alternative_id: e.rank for e in self.entries}
        return [by_id[a] for a in order]


def rank(profiles: Sequence, prefs: StakeholderPreferences) -> Ranking:
    """Alternatives sorted by overall value; ties share the smallest rank."""
    if not profiles:
        raise MavtError("nothing to rank")
    scored = sorted(
        ((aggregate(p, prefs), p.alternative_id) for p in profiles),
        key=lambda t: (-t[0], t[1]),
    )
    entries: list[RankedAlternative] = []
    current_rank = 1
    for i, (value, alt_id) in enumerate(scored):
        if i > 0 and value != scored[i - 1][0]:
            current_rank = i + 1
        entries.append(RankedAlternative(alternative_id=alt_id, value=value, rank=current_rank))
    return Ranking(stakeholder_id=prefs.stakeholder_id, entries=tuple(entries))


# -- technology analyses ------------------------------------------------------------


def presence(alt, tech_id: str, sector_demand: float, threshold: float) -> bool:
    """A technology counts as present when it generates more than the
    threshold share of its sector's demand."""
    return alt.annual_generation.get(tech_id, 0.0) > threshold * sector_demand


def _presence_map(alternatives, model, threshold: float) -> dict[str, dict[str, bool]]:
    out: dict[str, dict[str, bool]] = {}
    for alt in alternatives:
        out[alt.id] = {
            t.id: presence(alt, t.id, model.annual_demand(t.sector), threshold)
            for t in model.technologies
        }
    return out


def _classify(present_flags: Iterable[bool]) -> str:
    flags = list(present_flags)
    if all(flags):
        return MUST_HAVE
    if not any(flags):
        return MUST_AVOID
    return REAL_CHOICE


@dataclass(frozen=True)
class RangeNarrowing:
    full: tuple[float, float]
    top: tuple[float, float] | None
    reduction: float  # 1 - top span / full span


@dataclass(frozen=True)
class TechnologyClassification:
    full_set: Mapping[str, str]
    value_focused: Mapping[str, str]
    pooled_ranges: Mapping[str, RangeNarrowing]
    per_stakeholder_ranges: Mapping[str, Mapping[str, RangeNarrowing]]
    top_fraction: float


def classify_technologies(
    alternatives: Sequence,
    rankings: Sequence[Ranking],
    model,
    q: float = 0.10,
    threshold: float = 0.001,
) -> TechnologyClassification:
    """Must-have / real-choice / must-avoid over the full set and over the
    stakeholders' best-ranked slices, plus generation-range narrowing."""
    if not 0.0 < q <= 1.0:
        raise MavtError("top fraction must lie in (0, 1]")
    present = _presence_map(alternatives, model, threshold)
    by_id = {a.id: a for a in alternatives}
    tech_ids = [t.id for t in model.technologies]

    full_set = {
        tech: _classify(present[a.id][tech] for a in alternatives) for tech in tech_ids
    }

    top_ids_per_sh: dict[str, tuple[str, ...]] = {
        r.stakeholder_id: r.top_fraction(q) for r in rankings
    }
    union_top: list[str] = []
    seen: set[str] = set()
    for ids in top_ids_per_sh.values():
        for alt_id in ids:
            if alt_id not in seen:
                seen.add(alt_id)
                union_top.append(alt_id)

    value_focused = {}
    for tech in tech_ids:
        flags = [present[alt_id][tech] for ids in top_ids_per_sh.values() for alt_id in ids]
        value_focused[tech] = _classify(flags) if flags else full_set[tech]

    def narrowing(tech: str, subset: Sequence[str]) -> RangeNarrowing:
        full_vals = [a.annual_generation.get(tech, 0.0) for a in alternatives]
        full = (min(full_vals), max(full_vals))
        if not subset:
            return RangeNarrowing(full=full, top=None, reduction=0.0)
        top_vals = [by_id[i].annual_generation.get(tech, 0.0) for i in subset]
        top = (min(top_vals), max(top_vals))
        full_span = full[1] - full[0]
        red = 1.0 - (top[1] - top[0]) / full_span if full_span > 0 else 0.0
        return RangeNarrowing(full=full, top=top, reduction=red)

    pooled = {tech: narrowing(tech, union_top) for tech in tech_ids}
    per_sh = {
        sh: {tech: narrowing(tech, ids) for tech in tech_ids}
        for sh, ids in top_ids_per_sh.items()
    }
    return TechnologyClassification(
        full_set=full_set,
        value_focused=value_focused,
        pooled_ranges=pooled,
        per_stakeholder_ranges=per_sh,
        top_fraction=q,
    )


def occurrence_frequency(
    alternatives: Sequence,
    rankings: Sequence[Ranking],
    model,
    q: float = 0.10,
    threshold: float = 0.001,
) -> dict[str, dict[str, float]]:
    """Share of each stakeholder's top-ranked slice using each technology."""
    present = _presence_map(alternatives, model, threshold)
    out: dict[str, dict[str, float]] = {}
    for ranking in rankings:
        top = ranking.top_fraction(q)
        out[ranking.stakeholder_id] = {
            t.id: sum(1 for a in top if present[a][t.id]) / len(top)
            for t in model.technologies
        }
    return out


# -- stakeholder clustering ------------------------------------------------------------


def _average_ranks(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(len(arr))
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_rho(a: Sequence[float], b: Sequence[float]) -> float:
    """Spearman correlation with average ranks for ties."""
    ra, rb = _average_ranks(a), _average_ranks(b)
    ra -= ra.mean()
    rb -= rb.mean()
    denom = math.sqrt(float(ra @ ra) * float(rb @ rb))
    if denom == 0.0:
        return 1.0
    return float(ra @ rb) / denom


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Agglomerative merge tree; leaves are 0..n-1 in label order and each
    merge k creates cluster n+k."""

    labels: tuple[str, ...]
    merges: tuple[Merge, ...]


def cluster_stakeholders(rankings: Sequence[Ranking]) -> Dendrogram:
    """Average-linkage clustering on d = 1 - Spearman rho of rank vectors.

    Deterministic: equal distances merge at the smallest cluster-index pair.
    """
    if len(rankings) < 2:
        raise MavtError("clustering needs at least two stakeholders")
    order = sorted(rankings[0].alternative_ids())
    for r in rankings[1:]:
        if sorted(r.alternative_ids()) != order:
            raise MavtError("rankings cover different alternative sets")
    labels = tuple(r.stakeholder_id for r in rankings)
    vectors = [np.asarray(r.rank_vector(order), dtype=float) for r in rankings]
    n = len(labels)
    dist: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = 1.0 - spearman_rho(vectors[i], vectors[j])

    active: dict[int, int] = {i: 1 for i in range(n)}  # cluster id -> size
    merges: list[Merge] = []
    next_id = n
    while len(active) > 1:
        best: tuple[float, int, int] | None = None
        ids = sorted(active)
        for ai, i in enumerate(ids):
            for j in ids[ai + 1 :]:
                d = dist[(i, j)]
                if best is None or d < best[0] - 1e-15:
                    best = (d, i, j)
        d, i, j = best
        size = active[i] + active[j]
        merges.append(Merge(left=i, right=j, height=d, size=size))
        for k in ids:
            if k in (i, j):
                continue
            dik = dist[(min(i, k), max(i, k))]
            djk = dist[(min(j, k), max(j, k))]
            dist[(k, next_id)] = (dik * active[i] + djk * active[j]) / size
        del active[i], active[j]
        active[next_id] = size
        next_id += 1
    return Dendrogram(labels=labels, merges=tuple(merges))


# -- sensitivity -------------------------------------------------------------------------


def kendall_tau_distance(ranks_a: Sequence[float], ranks_b: Sequence[float]) -> float:
    """Share of alternative pairs ordered oppositely by the two rankings."""
    a = np.asarray(ranks_a, dtype=float)
    b = np.asarray(ranks_b, dtype=float)
    if len(a) != len(b):
        raise MavtError("rank vectors differ in length")
    n = len(a)
    if n < 2:
        return 0.0
    da = np.sign(a[:, None] - a[None, :])
    db = np.sign(b[:, None] - b[None, :])
    discordant = int(np.sum((da * db) < 0)) // 2
    return discordant / (n * (n - 1) / 2)


@dataclass(frozen=True)
class SensitivityEntry:
    label: str
    gamma: float
    tau_distance: float
    focus_ranks: Mapping[str, int]


@dataclass(frozen=True)
class SensitivityReport:
    stakeholder_id: str
    entries: tuple[SensitivityEntry, ...]


def sensitivity(
    prefs: StakeholderPreferences,
    profiles: Sequence,
    gamma_sweep: Sequence[float] = (),
    weight_delta: float = 0.0,
    focus_ids: Sequence[str] = ("optimum",),
) -> SensitivityReport:
    """Ranking stability under gamma sweeps and weight perturbations.

    Each entry reports the Kendall-tau distance to the baseline ranking and
    the ranks of the designated alternatives.
    """
    baseline = rank(profiles, prefs)
    order = sorted(baseline.alternative_ids())
    base_vec = baseline.rank_vector(order)

    def entry(label: str, perturbed: StakeholderPreferences) -> SensitivityEntry:
        r = rank(profiles, perturbed)
        tau = kendall_tau_distance(base_vec, r.rank_vector(order))
        focus = {fid: r.rank_of(fid) for fid in focus_ids if _has(r, fid)}
        return SensitivityEntry(label=label, gamma=perturbed.gamma,
                                tau_distance=tau, focus_ranks=focus)

    entries = [entry("baseline", prefs)]
    for gamma in gamma_sweep:
        if gamma == prefs.gamma:
            continue
        entries.append(entry(f"gamma={gamma:g}", replace(prefs, gamma=gamma)))
    if weight_delta > 0.0:
        for attr, w in prefs.weights.items():
            if w == 0.0:
                continue
            for sign in (+1.0, -1.0):
                shifted = dict(prefs.weights)
                shifted[attr] = max(0.0, w + sign * weight_delta)
                total = sum(shifted.values())
                if total <= 0.0:
                    continue
                shifted = {a: v / total for a, v in shifted.items()}
                label = f"w[{attr}]{'+' if sign > 0 else '-'}{weight_delta:g}"
                entries.append(entry(label, replace(prefs, weights=shifted)))
    return SensitivityReport(stakeholder_id=prefs.stakeholder_id, entries=tuple(entries))


def _has(ranking: Ranking, alt_id: str) -> bool:
    return any(e.alternative_id == alt_id for e in ranking.entries)


# -- raw elicitation data -> preferences --------------------------------------------------


def preferences_from_answers(
    raw: Mapping,
    ranges: Mapping[str, "object"],
    catalog,
) -> StakeholderPreferences:
    """Build a decision model from recorded answers and the impact ranges.

    ``raw`` holds SWING ratings (0 = declined), gamma, and per-attribute
    mid-value points on the normalised scale (z, value). Attributes without
    midpoints get linear value functions over the impact range.
    """
    ratings = {a.id: float(raw["ratings"].get(a.id, 0.0)) for a in catalog.attributes}
    weights = swing_weights(ratings)
    vfs: dict[str, ValueFunction] = {}
    midpoints_z = raw.get("savf_midpoints_z", {})
    for spec in catalog.attributes:
        rng = ranges[spec.id]
        worst, best = rng.worst, rng.best
        if worst == best:
            # degenerate range: constant attribute, value pinned to 1
            worst, best = worst - 1.0, best
        pts = midpoints_z.get(spec.id, [])
        midpoints = [(worst + z * (best - worst), v) for z, v in pts]
        vfs[spec.id] = fit_savf(worst, best, midpoints, attribute=spec.id)
    return StakeholderPreferences(
        stakeholder_id=raw["id"],
        weights=weights,
        value_functions=vfs,
        gamma=float(raw.get("gamma", 0.2)),
        notes=str(raw.get("notes", "")),
    )
