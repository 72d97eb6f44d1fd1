"""Attribute catalog and per-alternative performance profiles.

The catalog declares the objective hierarchy's attributes (direction, basis,
aggregation rule, uncertainty model) together with technology-level
contribution coefficients: per MWh of annual generation for generation-based
attributes, per MW of deployed capacity for capacity-based ones. Profiles
carry a mean plus an uncertainty envelope per attribute: +-2 sd for normal
attributes (sd = 10% of the mean by default), the mixed expert support for
uniform ones.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

LOWER_BETTER = "lower"
HIGHER_BETTER = "higher"

GENERATION = "generation"
CAPACITY = "capacity"
SYSTEMIC = "systemic"

SUM = "sum"
WEIGHTED_MEAN = "weighted-mean"
SHANNON = "shannon"
MODEL_DIRECT = "model-direct"

NORMAL = "normal"
UNIFORM = "uniform"


class CatalogError(Exception):
    """Inconsistent catalog or missing contribution data."""


class MissingCoefficient(CatalogError):
    def __init__(self, attribute: str, technology: str) -> None:
        super().__init__(f"attribute {attribute!r} lacks a coefficient for {technology!r}")
        self.attribute = attribute
        self.technology = technology


@dataclass(frozen=True)
class AttributeSpec:
    id: str
    name: str
    unit: str
    direction: str
    basis: str
    aggregation: str
    decomposable: bool
    uncertainty: str
    objective: str  # high-level objective this attribute measures
    objective_name: str = ""
    expert_scale: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.direction not in (LOWER_BETTER, HIGHER_BETTER):
            raise CatalogError(f"attribute {self.id!r}: bad direction {self.direction!r}")
        if self.basis not in (GENERATION, CAPACITY, SYSTEMIC):
            raise CatalogError(f"attribute {self.id!r}: bad basis {self.basis!r}")
        if self.aggregation not in (SUM, WEIGHTED_MEAN, SHANNON, MODEL_DIRECT):
            raise CatalogError(f"attribute {self.id!r}: bad aggregation {self.aggregation!r}")
        if self.uncertainty not in (NORMAL, UNIFORM):
            raise CatalogError(f"attribute {self.id!r}: bad uncertainty {self.uncertainty!r}")
        if self.uncertainty == UNIFORM and self.expert_scale is None:
            raise CatalogError(f"attribute {self.id!r}: uniform uncertainty needs an expert scale")


@dataclass(frozen=True)
class AttributeCatalog:
    attributes: tuple[AttributeSpec, ...]
    coefficients: Mapping[str, Mapping[str, float]]  # attribute -> technology -> value
    expert_ranges: Mapping[str, Mapping[str, tuple[float, float]]]
    rel_sd: float = 0.10  # sd as share of the mean for normal attributes

    def __post_init__(self) -> None:
        ids = [a.id for a in self.attributes]
        if len(set(ids)) != len(ids):
            raise CatalogError("duplicate attribute ids")
        for spec in self.attributes:
            if spec.expert_scale is not None:
                lo, hi = spec.expert_scale
                for tech, score in self.coefficients.get(spec.id, {}).items():
                    if not (lo <= score <= hi):
                        raise CatalogError(
                            f"expert score {score} for ({spec.id}, {tech}) outside [{lo}, {hi}]"
                        )
                for tech, (rlo, rhi) in self.expert_ranges.get(spec.id, {}).items():
                    if not (lo <= rlo <= rhi <= hi):
                        raise CatalogError(
                            f"expert range for ({spec.id}, {tech}) outside [{lo}, {hi}]"
                        )

    def attribute(self, attr_id: str) -> AttributeSpec:
        for a in self.attributes:
            if a.id == attr_id:
                return a
        raise CatalogError(f"unknown attribute {attr_id!r}")

    def decomposable_attributes(self) -> tuple[AttributeSpec, ...]:
        return tuple(a for a in self.attributes if a.decomposable)

    def contribution(self, attr_id: str, tech_id: str) -> float:
        return float(self.coefficients.get(attr_id, {}).get(tech_id, 0.0))

    def contributions(self, attr_id: str) -> Mapping[str, float]:
        data = self.coefficients.get(attr_id)
        if data is None:
            raise MissingCoefficient(attr_id, "*")
        return data

    def objectives(self) -> tuple[str, ...]:
        seen: list[str] = []
        for a in self.attributes:
            if a.objective not in seen:
                seen.append(a.objective)
        return tuple(seen)


@dataclass(frozen=True)
class AttributeProfile:
    """Evaluated performance of one alternative: mean and uncertainty band."""

    alternative_id: str
    values: Mapping[str, tuple[float, float, float]]  # attr -> (mean, low, high)

    def mean(self, attr_id: str) -> float:
        return self.values[attr_id][0]

    def band(self, attr_id: str) -> tuple[float, float]:
        _, low, high = self.values[attr_id]
        return low, high


def shannon_index(shares) -> float:
    """Entropy -sum(s ln s) of a share vector summing to one."""
    total = float(sum(shares))
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"shares sum to {total}, expected 1")
    if any(s < 0 for s in shares):
        raise ValueError("shares must be non-negative")
    return float(-sum(s * math.log(s) for s in shares if s > 0.0))


def evaluate(alt, catalog: AttributeCatalog) -> AttributeProfile:
    """Attribute profile of one alternative from its technology quantities.

    ``alt`` provides ``annual_generation`` (MWh/a), ``deployed_capacity``
    (MW, existing plus invested), and ``costs``; cost attributes are copied
    from the cost breakdown rather than recomputed from coefficients.
    """
    gen: Mapping[str, float] = alt.annual_generation
    cap: Mapping[str, float] = alt.deployed_capacity
    out: dict[str, tuple[float, float, float]] = {}
    for spec in catalog.attributes:
        if spec.aggregation == MODEL_DIRECT:
            mean = _model_direct(alt, spec)
        elif spec.aggregation == SHANNON:
            mean = _shannon_of(gen)
        else:
            qty = gen if spec.basis == GENERATION else cap
            coeffs = catalog.coefficients.get(spec.id)
            if coeffs is None:
                raise MissingCoefficient(spec.id, "*")
            for tech in qty:
                if qty[tech] > 0.0 and spec.decomposable and tech not in coeffs:
                    raise MissingCoefficient(spec.id, tech)
            if spec.aggregation == SUM:
                mean = sum(c * qty.get(t, 0.0) for t, c in coeffs.items())
            else:
                mean = _weighted_mean(coeffs, qty)
        if spec.uncertainty == UNIFORM:
            low, high = _expert_band(catalog, spec, cap, mean)
        else:
            sd = catalog.rel_sd * abs(mean)
            low, high = mean - 2.0 * sd, mean + 2.0 * sd
        out[spec.id] = (float(mean), float(low), float(high))
    return AttributeProfile(alternative_id=alt.id, values=out)


def _model_direct(alt, spec: AttributeSpec) -> float:
    costs = alt.costs
    if spec.id == "invest_costs":
        return costs.invest
    # annual operating expenditure: variable + fixed O&M, fuel, auxiliaries
    return costs.vom + costs.fom + costs.fuel + costs.aux


def _shannon_of(gen: Mapping[str, float]) -> float:
    total = sum(v for v in gen.values() if v > 0.0)
    if total <= 0.0:
        return 0.0
    return shannon_index([v / total for v in gen.values() if v > 0.0])


def _weighted_mean(coeffs: Mapping[str, float], qty: Mapping[str, float]) -> float:
    weight = sum(qty.get(t, 0.0) for t in coeffs)
    if weight <= 0.0:
        return 0.0
    return sum(c * qty.get(t, 0.0) for t, c in coeffs.items()) / weight


def _expert_band(
    catalog: AttributeCatalog, spec: AttributeSpec, cap: Mapping[str, float], mean: float
) -> tuple[float, float]:
    ranges = catalog.expert_ranges.get(spec.id, {})
    weight = sum(cap.get(t, 0.0) for t in ranges)
    if weight <= 0.0:
        return mean, mean
    low = sum(r[0] * cap.get(t, 0.0) for t, r in ranges.items()) / weight
    high = sum(r[1] * cap.get(t, 0.0) for t, r in ranges.items()) / weight
    return min(low, mean), max(high, mean)


@dataclass(frozen=True)
class AttributeRange:
    """Envelope of an attribute across all alternatives, oriented by direction."""

    low: float
    high: float
    worst: float
    best: float


def impact_ranges(profiles, catalog: AttributeCatalog) -> dict[str, AttributeRange]:
    """Per attribute: extreme states over all profiles including uncertainty."""
    if not profiles:
        raise ValueError("impact ranges need at least one profile")
    out: dict[str, AttributeRange] = {}
    for spec in catalog.attributes:
        lows = [p.values[spec.id][1] for p in profiles]
        highs = [p.values[spec.id][2] for p in profiles]
        lo, hi = min(lows), max(highs)
        if spec.direction == LOWER_BETTER:
            out[spec.id] = AttributeRange(low=lo, high=hi, worst=hi, best=lo)
        else:
            out[spec.id] = AttributeRange(low=lo, high=hi, worst=lo, best=hi)
    return out


def load_catalog(source: str | Path | Mapping) -> AttributeCatalog:
    """Read an attribute catalog from ``catalog.json`` (or a parsed dict)."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        data = source
    specs = []
    for a in data["attributes"]:
        specs.append(
            AttributeSpec(
                id=a["id"],
                name=a["name"],
                unit=a.get("unit", ""),
                direction=a["direction"],
                basis=a["basis"],
                aggregation=a["aggregation"],
                decomposable=bool(a["decomposable"]),
                uncertainty=a["uncertainty"],
                objective=a["objective"],
                objective_name=a.get("objective_name", ""),
                expert_scale=tuple(a["expert_scale"]) if a.get("expert_scale") else None,
            )
        )
    coeffs = {
        attr: {t: float(v) for t, v in techs.items()}
        for attr, techs in data.get("coefficients", {}).items()
    }
    ranges = {
        attr: {t: (float(r[0]), float(r[1])) for t, r in techs.items()}
        for attr, techs in data.get("expert_ranges", {}).items()
    }
    return AttributeCatalog(
        attributes=tuple(specs),
        coefficients=coeffs,
        expert_ranges=ranges,
        rel_sd=float(data.get("rel_sd", 0.10)),
    )
