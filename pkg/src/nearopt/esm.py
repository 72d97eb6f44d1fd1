"""Multi-carrier energy system model: compile to a cost LP and read back results.

A ``SystemModel`` declares carriers, weighted time slices, demands and a
technology fleet. ``compile_model`` turns it into a bounded-variable LP whose
objective is total annual system cost (variable O&M + fuel + auxiliary per
MWh generated, annualised investment + fixed O&M per MW invested).
``decompose`` maps any solution of that LP (or an MGA variant sharing its
variables) back to cost components and per-technology quantities.

Conventions:
  - generation variables are energy per technology and slice (MWh within the
    hours the slice represents); capacity variables are invested MW
  - technologies may emit to several carriers via output ratios per unit of
    activity; consuming technologies draw input energy as activity / COP
  - fixed O&M is charged on invested capacity; existing capacity is treated
    as sunk and carries no fixed cost in the objective
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from . import lp

YEAR_HOURS = 8760.0


class ModelError(Exception):
    """Invalid system configuration."""


class InfeasibleByConstruction(ModelError):
    """A carrier's maximum supply cannot meet demand in some slice."""


class DimensionMismatch(ModelError):
    """Solution variables do not match the model."""


@dataclass(frozen=True)
class TimeSlice:
    id: str
    hours: float  # hours of the year this slice represents


@dataclass(frozen=True)
class Technology:
    """One conversion, generation or procurement option.

    ``outputs`` maps carriers to energy delivered per MWh of activity;
    ``input_carrier`` (with per-slice ``cop``) draws activity/COP from
    another carrier. Costs are annualised; capacities in MW.
    """

    id: str
    sector: str
    outputs: Mapping[str, float]
    existing_mw: float = 0.0
    max_invest_mw: float = 0.0
    max_annual_mwh: float | None = None
    invest_cost: float = 0.0  # EUR/MW/a, annualised
    fom_cost: float = 0.0  # EUR/MW/a
    vom_cost: float = 0.0  # EUR/MWh
    fuel_cost: float = 0.0  # EUR/MWh, fuel + CO2
    aux_cost: float = 0.0  # EUR/MWh
    emission_factor: float = 0.0  # t CO2 per MWh of activity
    availability: tuple[float, ...] = ()
    input_carrier: str | None = None
    cop: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        for name in ("invest_cost", "fom_cost", "vom_cost", "fuel_cost", "aux_cost"):
            if getattr(self, name) < 0:
                raise ModelError(f"technology {self.id!r}: {name} must be >= 0")
        if self.existing_mw < 0 or self.max_invest_mw < 0:
            raise ModelError(f"technology {self.id!r}: capacities must be >= 0")
        if not math.isfinite(self.max_invest_mw):
            raise ModelError(f"technology {self.id!r}: max investable capacity must be finite")
        if any(a < 0 or a > 1 for a in self.availability):
            raise ModelError(f"technology {self.id!r}: availability must lie in [0, 1]")
        if (self.input_carrier is None) != (self.cop is None):
            raise ModelError(f"technology {self.id!r}: input carrier and COP go together")
        if self.cop is not None and any(c <= 0 for c in self.cop):
            raise ModelError(f"technology {self.id!r}: COP must be positive")

    @property
    def total_capacity_mw(self) -> float:
        return self.existing_mw + self.max_invest_mw

    @property
    def investable(self) -> bool:
        return self.max_invest_mw > 0.0

    def max_annual_generation(self, slices: tuple[TimeSlice, ...]) -> float:
        """Largest feasible annual activity (MWh) at full build-out."""
        cap = sum(a * s.hours for a, s in zip(self.availability, slices)) * self.total_capacity_mw
        if self.max_annual_mwh is not None:
            cap = min(cap, self.max_annual_mwh)
        return cap


@dataclass(frozen=True)
class SystemModel:
    carriers: tuple[str, ...]
    slices: tuple[TimeSlice, ...]
    technologies: tuple[Technology, ...]
    demands: Mapping[str, tuple[float, ...]]  # carrier -> MWh per slice
    emission_cap: float | None = None
    name: str = "system"
    hours_tolerance: float = 1.0

    def __post_init__(self) -> None:
        total_hours = sum(s.hours for s in self.slices)
        if abs(total_hours - YEAR_HOURS) > self.hours_tolerance:
            raise ModelError(
                f"slice weights sum to {total_hours} h, expected {YEAR_HOURS} ± {self.hours_tolerance}"
            )
        known = set(self.carriers)
        for carrier, series in self.demands.items():
            if carrier not in known:
                raise ModelError(f"demand for undeclared carrier {carrier!r}")
            if len(series) != len(self.slices):
                raise ModelError(f"demand series for {carrier!r} does not match slice count")
        seen = set()
        for tech in self.technologies:
            if tech.id in seen:
                raise ModelError(f"duplicate technology id {tech.id!r}")
            seen.add(tech.id)
            for carrier in tech.outputs:
                if carrier not in known:
                    raise ModelError(f"technology {tech.id!r} outputs to undeclared {carrier!r}")
            if tech.input_carrier is not None and tech.input_carrier not in known:
                raise ModelError(f"technology {tech.id!r} consumes undeclared {tech.input_carrier!r}")
            if len(tech.availability) != len(self.slices):
                raise ModelError(f"technology {tech.id!r}: availability length != slice count")
            if tech.cop is not None and len(tech.cop) != len(self.slices):
                raise ModelError(f"technology {tech.id!r}: COP length != slice count")
            if tech.max_annual_mwh is not None:
                ceiling = tech.total_capacity_mw * sum(s.hours for s in self.slices)
                if tech.max_annual_mwh > ceiling + 1e-6:
                    raise ModelError(
                        f"technology {tech.id!r}: annual potential exceeds capacity ceiling"
                    )

    def demand(self, carrier: str, slice_index: int) -> float:
        series = self.demands.get(carrier)
        return series[slice_index] if series is not None else 0.0

    def annual_demand(self, carrier: str) -> float:
        return float(sum(self.demands.get(carrier, ())))

    def total_annual_demand(self) -> float:
        return float(sum(sum(s) for s in self.demands.values()))

    def technology(self, tech_id: str) -> Technology:
        for t in self.technologies:
            if t.id == tech_id:
                return t
        raise ModelError(f"unknown technology {tech_id!r}")


def gen_var(tech_id: str, slice_id: str) -> str:
    return f"gen::{tech_id}::{slice_id}"


def invest_var(tech_id: str) -> str:
    return f"inv::{tech_id}"


def compile_model(model: SystemModel) -> lp.LinearProgram:
    """Build the cost-minimisation LP.

    Rows: carrier balance per (carrier, slice); generation vs capacity per
    investable technology and slice; annual potential where set; emission
    cap when configured. Non-investable technologies get static generation
    bounds instead of capacity rows. Every variable is finitely bounded.
    """
    _check_supply_adequacy(model)
    variables: list[lp.Variable] = []
    objective: dict[str, float] = {}
    for tech in model.technologies:
        if tech.investable:
            variables.append(lp.Variable(invest_var(tech.id), 0.0, tech.max_invest_mw))
            objective[invest_var(tech.id)] = tech.invest_cost + tech.fom_cost
        unit_cost = tech.vom_cost + tech.fuel_cost + tech.aux_cost
        for k, sl in enumerate(model.slices):
            cap = tech.availability[k] * sl.hours * tech.total_capacity_mw
            variables.append(lp.Variable(gen_var(tech.id, sl.id), 0.0, cap))
            if unit_cost != 0.0:
                objective[gen_var(tech.id, sl.id)] = unit_cost

    constraints: list[lp.Constraint] = []
    for carrier in model.carriers:
        for k, sl in enumerate(model.slices):
            coeffs: dict[str, float] = {}
            for tech in model.technologies:
                ratio = tech.outputs.get(carrier, 0.0)
                if tech.input_carrier == carrier:
                    ratio -= 1.0 / tech.cop[k]
                if ratio != 0.0:
                    coeffs[gen_var(tech.id, sl.id)] = ratio
            demand = model.demand(carrier, k)
            if not coeffs and demand == 0.0:
                continue
            constraints.append(
                lp.Constraint(coeffs, lp.EQUAL, demand, name=f"bal::{carrier}::{sl.id}")
            )
    for tech in model.technologies:
        if tech.investable:
            for k, sl in enumerate(model.slices):
                rate = tech.availability[k] * sl.hours
                if rate == 0.0:
                    continue  # static bound already pins generation to zero
                constraints.append(
                    lp.Constraint(
                        {gen_var(tech.id, sl.id): 1.0, invest_var(tech.id): -rate},
                        lp.LESS_EQUAL,
                        rate * tech.existing_mw,
                        name=f"cap::{tech.id}::{sl.id}",
                    )
                )
        if tech.max_annual_mwh is not None:
            constraints.append(
                lp.Constraint(
                    {gen_var(tech.id, sl.id): 1.0 for sl in model.slices},
                    lp.LESS_EQUAL,
                    tech.max_annual_mwh,
                    name=f"potential::{tech.id}",
                )
            )
    if model.emission_cap is not None:
        coeffs = {
            gen_var(tech.id, sl.id): tech.emission_factor
            for tech in model.technologies
            if tech.emission_factor > 0.0
            for sl in model.slices
        }
        if coeffs:
            constraints.append(
                lp.Constraint(coeffs, lp.LESS_EQUAL, model.emission_cap, name="emissions")
            )

    return lp.LinearProgram(tuple(variables), tuple(constraints), objective, model.name)


def _check_supply_adequacy(model: SystemModel) -> None:
    """Necessary feasibility condition: enough gross supply per carrier/slice."""
    for carrier in model.carriers:
        for k, sl in enumerate(model.slices):
            demand = model.demand(carrier, k)
            if demand <= 0.0:
                continue
            supply = 0.0
            for tech in model.technologies:
                ratio = tech.outputs.get(carrier, 0.0)
                if ratio > 0.0:
                    supply += ratio * tech.availability[k] * sl.hours * tech.total_capacity_mw
            if supply < demand - 1e-9:
                raise InfeasibleByConstruction(
                    f"carrier {carrier!r}, slice {sl.id!r}: max supply {supply:.6g} MWh "
                    f"< demand {demand:.6g} MWh"
                )


def cost_expression(model: SystemModel) -> dict[str, float]:
    """Objective coefficients of the cost function, for reuse as a constraint."""
    return dict(compile_model(model).objective)


@dataclass(frozen=True)
class CostBreakdown:
    """Annual system cost split into its components (EUR/a)."""

    invest: float
    fom: float
    vom: float
    fuel: float
    aux: float
    total: float = field(default=math.nan)

    def __post_init__(self) -> None:
        computed = self.invest + self.fom + self.vom + self.fuel + self.aux
        if math.isnan(self.total):
            object.__setattr__(self, "total", computed)
        elif abs(self.total - computed) > 1e-6 * max(1.0, abs(computed)):
            raise ModelError("cost components do not add up to the stated total")

    def as_dict(self) -> dict[str, float]:
        return {
            "invest": self.invest,
            "fixed_om": self.fom,
            "variable_om": self.vom,
            "fuel": self.fuel,
            "auxiliary": self.aux,
            "total": self.total,
        }


@dataclass(frozen=True)
class SolutionSummary:
    """Technology-level view of one LP solution."""

    costs: CostBreakdown
    annual_generation: dict[str, float]  # tech -> MWh/a
    invested_capacity: dict[str, float]  # tech -> MW
    generation_by_slice: dict[str, tuple[float, ...]]


def decompose(model: SystemModel, sol: lp.LpSolution) -> SolutionSummary:
    """Split a solution into cost components and per-technology quantities."""
    if not sol.is_optimal:
        raise DimensionMismatch("solution is not optimal")
    values = sol.values
    invest = fom = vom = fuel = aux = 0.0
    annual: dict[str, float] = {}
    invested: dict[str, float] = {}
    profile: dict[str, tuple[float, ...]] = {}
    for tech in model.technologies:
        series = []
        for sl in model.slices:
            key = gen_var(tech.id, sl.id)
            if key not in values:
                raise DimensionMismatch(f"solution lacks variable {key!r}")
            series.append(values[key])
        gen = float(sum(series))
        annual[tech.id] = gen
        profile[tech.id] = tuple(series)
        inv = values.get(invest_var(tech.id), 0.0) if tech.investable else 0.0
        if tech.investable and invest_var(tech.id) not in values:
            raise DimensionMismatch(f"solution lacks variable {invest_var(tech.id)!r}")
        invested[tech.id] = float(inv)
        invest += tech.invest_cost * inv
        fom += tech.fom_cost * inv
        vom += tech.vom_cost * gen
        fuel += tech.fuel_cost * gen
        aux += tech.aux_cost * gen
    costs = CostBreakdown(invest=invest, fom=fom, vom=vom, fuel=fuel, aux=aux)
    return SolutionSummary(costs, annual, invested, profile)


def required_capacity(model: SystemModel, tech: Technology, series: tuple[float, ...]) -> float:
    """Smallest capacity able to deliver a generation profile."""
    need = 0.0
    for k, sl in enumerate(model.slices):
        rate = tech.availability[k] * sl.hours
        if series[k] > 1e-12 and rate > 0.0:
            need = max(need, series[k] / rate)
    return need


# -- JSON ingestion ------------------------------------------------------------


def load_system(source: str | Path | Mapping) -> SystemModel:
    """Read a system configuration from ``system.json`` (or a parsed dict)."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        data = source
    slices = tuple(TimeSlice(s["id"], float(s["hours"])) for s in data["slices"])
    techs = []
    for t in data["technologies"]:
        techs.append(
            Technology(
                id=t["id"],
                sector=t["sector"],
                outputs={k: float(v) for k, v in t["outputs"].items()},
                existing_mw=float(t.get("existing_mw", 0.0)),
                max_invest_mw=float(t.get("max_invest_mw", 0.0)),
                max_annual_mwh=(
                    float(t["max_annual_mwh"]) if t.get("max_annual_mwh") is not None else None
                ),
                invest_cost=float(t.get("invest_cost_eur_mw_a", 0.0)),
                fom_cost=float(t.get("fom_cost_eur_mw_a", 0.0)),
                vom_cost=float(t.get("vom_cost_eur_mwh", 0.0)),
                fuel_cost=float(t.get("fuel_cost_eur_mwh", 0.0)),
                aux_cost=float(t.get("aux_cost_eur_mwh", 0.0)),
                emission_factor=float(t.get("emission_factor_t_mwh", 0.0)),
                availability=tuple(float(a) for a in t["availability"]),
                input_carrier=t.get("input_carrier"),
                cop=tuple(float(c) for c in t["cop"]) if t.get("cop") is not None else None,
            )
        )
    demands = {c: tuple(float(x) for x in series) for c, series in data["demands"].items()}
    cap = data.get("emission_cap_t")
    return SystemModel(
        carriers=tuple(data["carriers"]),
        slices=slices,
        technologies=tuple(techs),
        demands=demands,
        emission_cap=float(cap) if cap is not None else None,
        name=data.get("name", "system"),
    )
