"""Benchmark scenario definitions: materials, pulse excitation, probes.

The reference configuration is a 5 mm rigid slab, initially in equilibrium
at 293 K, insulated everywhere except for a short heat pulse entering the
front face.  Front and rear temperatures and the mid-plane flux are recorded
for 10 s at a 1 ms step.  Temperatures are usually reported rescaled so the
adiabatic steady state sits at one.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, sqrt

import numpy as np

from .assembly import (
    BoundarySpec,
    Field,
    PrescribedFlux,
    Mesh,
    SemiDiscreteSystem,
    apply_initial_conditions,
    assemble,
    field_integral_weights,
    probe_row,
)
from .materials import MaterialParams, ModelKind
from .timefun import TimeFunction, constant
from .timeint import ThetaScheme, TransientSolution, integrate

# Conduction coefficient suggestion for the rock-like benchmark material.
# It is a configuration choice, not a measured value; every physical result
# in this package is parameterized by the configured conductivity.
SUGGESTED_CONDUCTIVITY = 3.0


@dataclass(frozen=True)
class PulseParams:
    """Two-exponential flux pulse, zero at t = 0, total energy amplitude * t_p."""

    amplitude: float = 10000.0
    c1: float = 1.0 / 0.075
    c2: float = 6.0
    t_p: float = 0.008

    def __post_init__(self) -> None:
        if self.c1 == self.c2:
            raise ValueError("pulse rate constants must differ")
        if self.t_p <= 0.0:
            raise ValueError(f"pulse time scale must be positive, got {self.t_p}")


def flash_pulse(params: PulseParams = PulseParams()) -> TimeFunction:
    """The pulse as a TimeFunction with analytic derivative and running integral.

        q(t) = amplitude * (c1 c2 / (c2 - c1)) * (exp(-c1 t / t_p) - exp(-c2 t / t_p))

    The closed-form running integral is what lets the time integrator consume
    the pulse energy exactly: int_0^inf q dt = amplitude * t_p.
    """
    a, c1, c2, t_p = params.amplitude, params.c1, params.c2, params.t_p
    scale = a * c1 * c2 / (c2 - c1)

    def value(t: float) -> float:
        return scale * (exp(-c1 * t / t_p) - exp(-c2 * t / t_p))

    def derivative(t: float) -> float:
        return scale * (-c1 / t_p * exp(-c1 * t / t_p) + c2 / t_p * exp(-c2 * t / t_p))

    def integral(t: float) -> float:
        return scale * (
            t_p / c1 * (1.0 - exp(-c1 * t / t_p))
            - t_p / c2 * (1.0 - exp(-c2 * t / t_p))
        )

    return TimeFunction(value=value, derivative=derivative, integral=integral)


def pulse_flux(params: PulseParams, t: float) -> float:
    """Pointwise pulse value; see flash_pulse for the full signal object."""
    if t < 0.0:
        raise ValueError(f"pulse is defined for t >= 0, got {t}")
    return flash_pulse(params).value(t)


@dataclass(frozen=True)
class Probe:
    label: str
    x: float
    quantity: Field


@dataclass(frozen=True)
class ProbeSeries:
    """Time history of one field value at a fixed point."""

    label: str
    location: float
    quantity: Field
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have equal length")


@dataclass(frozen=True)
class Scenario:
    """Problem statement independent of any discretization choice."""

    material: MaterialParams
    model: ModelKind
    length: float
    bcs: BoundarySpec
    initial_temperature: float
    dt: float
    n_steps: int
    probes: tuple[Probe, ...]

    def __post_init__(self) -> None:
        # Accept the enum value string too; a typo must not silently select
        # the wrong flux space.
        object.__setattr__(self, "model", ModelKind(self.model))
        if self.length <= 0.0:
            raise ValueError(f"bar length must be positive, got {self.length}")

    @property
    def final_time(self) -> float:
        return self.n_steps * self.dt


def standard_probes(length: float) -> tuple[Probe, ...]:
    return (
        Probe("T_front", 0.0, Field.TEMPERATURE),
        Probe("T_rear", length, Field.TEMPERATURE),
        Probe("q_mid", 0.5 * length, Field.HEAT_FLUX),
    )


def benchmark_material(
    tau: float = 0.0,
    kappa2: float = 0.0,
    conductivity: float = SUGGESTED_CONDUCTIVITY,
) -> MaterialParams:
    """Rock-like benchmark conductor: rho = 2600 kg/m^3, c_v = 800 J/(kg K)."""
    return MaterialParams(
        rho=2600.0, c_v=800.0, conductivity=conductivity, tau=tau, kappa2=kappa2
    )


def benchmark_scenario(
    model: ModelKind,
    tau: float = 0.0,
    kappa2: float = 0.0,
    conductivity: float = SUGGESTED_CONDUCTIVITY,
    pulse: PulseParams = PulseParams(),
    length: float = 0.005,
    initial_temperature: float = 293.0,
    dt: float = 1e-3,
    n_steps: int = 10000,
) -> Scenario:
    """Flash-heated slab: pulse enters at x = 0, the far face stays insulated."""
    material = benchmark_material(tau=tau, kappa2=kappa2, conductivity=conductivity)
    bcs = BoundarySpec(
        left=PrescribedFlux(flash_pulse(pulse)),
        right=PrescribedFlux(constant(0.0)),
    )
    return Scenario(
        material=material,
        model=model,
        length=length,
        bcs=bcs,
        initial_temperature=initial_temperature,
        dt=dt,
        n_steps=n_steps,
        probes=standard_probes(length),
    )


@dataclass
class TransientRun:
    """A scenario solved on one mesh/degree pair."""

    scenario: Scenario
    n_elements: int
    degree: int
    theta: float
    system: SemiDiscreteSystem
    solution: TransientSolution
    series: dict[str, ProbeSeries]


def solve_transient(
    scenario: Scenario,
    n_elements: int,
    degree: int,
    theta: float = 0.5,
    load_mode: str = "average",
    record_states: bool = False,
) -> TransientRun:
    mesh = Mesh.uniform(n_elements, scenario.length)
    sys = assemble(mesh, scenario.material, scenario.model, degree, scenario.bcs)
    alpha0 = apply_initial_conditions(sys, scenario.initial_temperature, 0.0)
    scheme = ThetaScheme(theta=theta, dt=scenario.dt, n_steps=scenario.n_steps)
    solution = integrate(
        sys,
        scheme,
        alpha0,
        probes=[(probe.x, probe.quantity) for probe in scenario.probes],
        record_states=record_states,
        load_mode=load_mode,
    )
    series = {
        probe.label: ProbeSeries(
            label=probe.label,
            location=probe.x,
            quantity=probe.quantity,
            times=solution.times,
            values=solution.probe_values[i],
        )
        for i, probe in enumerate(scenario.probes)
    }
    return TransientRun(
        scenario=scenario,
        n_elements=n_elements,
        degree=degree,
        theta=theta,
        system=sys,
        solution=solution,
        series=series,
    )


def evaluate_field(
    sys: SemiDiscreteSystem,
    alpha: np.ndarray,
    x: float,
    fld: Field,
    t: float = 0.0,
) -> float:
    """Point value of a field from a free coefficient vector."""
    return probe_row(sys.dofmap, x, fld).evaluate(sys, alpha, t)


def net_boundary_energy(scenario: Scenario, t: float) -> float:
    """Energy per unit area entering through the flux boundaries up to time t."""
    total = 0.0
    seen_flux_end = False
    for bc, sign in ((scenario.bcs.left, 1.0), (scenario.bcs.right, -1.0)):
        if isinstance(bc, PrescribedFlux):
            seen_flux_end = True
            total += sign * bc.value.integral(t)
    if not seen_flux_end:
        raise ValueError("no flux boundary: the injected energy is not prescribed")
    return total


def steady_temperature_rise(scenario: Scenario) -> float:
    """Adiabatic equilibration temperature rise of the injected pulse energy."""
    energy = net_boundary_energy(scenario, scenario.final_time)
    if energy == 0.0:
        raise ValueError("zero net energy input: no steady temperature rise to scale by")
    return energy / (scenario.material.volumetric_heat_capacity * scenario.length)


def dimensionless_temperature(series: ProbeSeries, scenario: Scenario) -> ProbeSeries:
    """(T - T0) / rise, so the adiabatic steady state maps to one."""
    if series.quantity is not Field.TEMPERATURE:
        raise ValueError(f"need a temperature probe, got {series.quantity}")
    rise = steady_temperature_rise(scenario)
    return ProbeSeries(
        label=series.label,
        location=series.location,
        quantity=series.quantity,
        times=series.times,
        values=(series.values - scenario.initial_temperature) / rise,
    )


def temperature_integral(sys: SemiDiscreteSystem, alpha: np.ndarray, t: float) -> float:
    """Integral of the temperature field over the domain at one instant."""
    w = field_integral_weights(sys.dofmap, Field.TEMPERATURE)
    return float(w @ sys.full_state(alpha, t))


def wavefront_arrival_estimate(scenario: Scenario) -> float:
    """Characteristic thermal wavefront transit time length * sqrt(rho c_v tau / lam).

    Only meaningful for the relaxational model; the diffusive limit propagates
    at unbounded speed.
    """
    if scenario.model is not ModelKind.MCV or scenario.material.tau <= 0.0:
        raise ValueError("wavefront arrival is defined for the relaxational model only")
    mat = scenario.material
    return scenario.length * sqrt(mat.rho * mat.c_v * mat.tau / mat.conductivity)
