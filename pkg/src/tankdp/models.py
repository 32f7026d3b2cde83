"""Solver-ready adapters for the shipped reservoir models.

Each factory wraps the physics of :mod:`tankdp.reduced` into a
:class:`~tankdp.dp.DpModel`: vectorized dynamics and gains for the backup
sweep, a strict scalar step for simulation (which refuses physically
infeasible moves instead of clamping them), and a production-to-control
inverter used by schedule replay and decline-curve generation.
"""

from __future__ import annotations

import numpy as np

from .dp import DpModel, Scenario
from .errors import InfeasibleError
from .reduced import (
    GasTankParams,
    TwoTankParams,
    WaterInjParams,
    _gas_rate,
    _two_tank_kernel,
    _wi_rates,
    gas_volume_floor,
    psi_one_tank,
    step_one_tank,
    step_two_tanks,
    step_water_injection,
    wi_admissible_interval,
    wi_oil_in_place,
)

__all__ = [
    "gas_one_tank_model",
    "gas_two_tank_model",
    "water_injection_model",
    "stage_gain_gas",
    "stage_gain_wi",
]


def stage_gain_gas(x, u, t: int, scenario: Scenario, params: GasTankParams) -> float:
    """Revenue of one step of the one-tank gas model: price times production."""
    from .reduced import gas_production_1t

    return float(scenario.prices[t]) * gas_production_1t(x, u, params)


def stage_gain_wi(x, u, t: int, scenario: Scenario, params: WaterInjParams) -> float:
    """One step of the water-injection model: oil revenue minus injection cost."""
    from .reduced import wi_productions

    f_o, _, f_wi = wi_productions(x, u, params)
    return float(scenario.prices[t]) * f_o - scenario.cost_at(t) * f_wi


def gas_one_tank_model(params: GasTankParams) -> DpModel:
    """One-tank dry gas reservoir; state ``(v_g,)``, control ``p_bh``."""

    def admissible(states):
        ps = psi_one_tank(states[0], params)
        return np.zeros_like(np.asarray(ps)), ps

    def components(states, u):
        return {"production": _gas_rate(states[0], u, params)}

    def dynamics(states, u):
        return (states[0] - _gas_rate(states[0], u, params),)

    def combine(comps, t, scenario):
        return scenario.prices[t] * comps["production"]

    def production(states, u):
        return _gas_rate(states[0], u, params)

    def step_strict(x, u, stage):
        try:
            return (step_one_tank(float(x[0]), float(u), params),)
        except InfeasibleError as exc:
            raise InfeasibleError(str(exc), stage=stage) from exc

    def invert(x, rate):
        ps = psi_one_tank(float(x[0]), params)
        target = float(rate) * float(params.pvt.b_g(ps))
        return ps - params.ipr_g.inverse_nondecreasing(target)

    def pressures(x):
        return {"pressure": psi_one_tank(float(x[0]), params)}

    floor = gas_volume_floor(params)
    return DpModel(
        name="gas-1t",
        state_names=("v_g",),
        dynamics=dynamics,
        admissible_controls=admissible,
        gain_components=components,
        combine_gain=combine,
        production=production,
        step_strict=step_strict,
        invert_production=invert,
        available=lambda x: max(float(x[0]) - floor, 0.0),
        pressures=pressures,
    )


def gas_two_tank_model(params: TwoTankParams) -> DpModel:
    """Two coupled gas tanks; state ``(v_g1, v_g2)``, the well on tank 1."""

    def admissible(states):
        ps = psi_one_tank(states[0], params.tank1)
        return np.zeros_like(np.asarray(ps)), ps

    def components(states, u):
        return {"production": _gas_rate(states[0], u, params.tank1)}

    def dynamics(states, u):
        v1n, v2n, _, _ = _two_tank_kernel(states[0], states[1], u, params, clamp=True)
        return v1n, v2n

    def combine(comps, t, scenario):
        return scenario.prices[t] * comps["production"]

    def production(states, u):
        return _gas_rate(states[0], u, params.tank1)

    def step_strict(x, u, stage):
        try:
            return step_two_tanks((float(x[0]), float(x[1])), float(u), params)
        except InfeasibleError as exc:
            raise InfeasibleError(str(exc), stage=stage) from exc

    def invert(x, rate):
        ps = psi_one_tank(float(x[0]), params.tank1)
        target = float(rate) * float(params.tank1.pvt.b_g(ps))
        return ps - params.tank1.ipr_g.inverse_nondecreasing(target)

    def pressures(x):
        return {
            "pressure_tank1": psi_one_tank(float(x[0]), params.tank1),
            "pressure_tank2": psi_one_tank(float(x[1]), params.tank2),
        }

    floor1 = gas_volume_floor(params.tank1)
    return DpModel(
        name="gas-2t",
        state_names=("v_g1", "v_g2"),
        dynamics=dynamics,
        admissible_controls=admissible,
        gain_components=components,
        combine_gain=combine,
        production=production,
        step_strict=step_strict,
        invert_production=invert,
        available=lambda x: max(float(x[0]) - floor1, 0.0),
        pressures=pressures,
    )


def water_injection_model(params: WaterInjParams) -> DpModel:
    """Oil under pressure maintenance; state ``(v_w,)``, control ``p_bh``.

    The primary produced volume is oil; the injected water enters the gain
    through the cost series of the scenario.
    """

    def admissible(states):
        return wi_admissible_interval(states[0], params)

    def components(states, u):
        f_o, _, f_wi = _wi_rates(states[0], u, params)
        return {"oil": f_o, "injection": f_wi}

    def dynamics(states, u):
        f_o, f_w, f_wi = _wi_rates(states[0], u, params)
        return (states[0] + (f_wi - f_w),)

    def combine(comps, t, scenario):
        return scenario.prices[t] * comps["oil"] - scenario.cost_at(t) * comps["injection"]

    def production(states, u):
        f_o, _, _ = _wi_rates(states[0], u, params)
        return f_o

    def step_strict(x, u, stage):
        try:
            return (float(step_water_injection(float(x[0]), float(u), params)),)
        except InfeasibleError as exc:
            raise InfeasibleError(str(exc), stage=stage) from exc

    def invert(x, rate):
        s_w = float(x[0]) * params.b_w0 / params.v_p0
        oil_frac = 1.0 - float(params.wct(s_w))
        if oil_frac <= 0:
            if float(rate) > 0:
                raise InfeasibleError("no oil is mobile at this water saturation")
            return params.p_res
        drawdown = float(rate) * params.b_o0 / (params.alpha * oil_frac)
        return params.p_res - drawdown

    def available(x):
        return float(wi_oil_in_place(float(x[0]), params))

    return DpModel(
        name="water-injection",
        state_names=("v_w",),
        dynamics=dynamics,
        admissible_controls=admissible,
        gain_components=components,
        combine_gain=combine,
        production=production,
        step_strict=step_strict,
        invert_production=invert,
        available=available,
        pressures=lambda x: {"pressure": params.p_res},
    )
