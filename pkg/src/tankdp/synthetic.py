"""Ready-made synthetic reservoirs for tests, demos and benchmarks.

Field PVT tables are proprietary, so the library ships plausible synthetic
ones: a dry-gas tank whose gas factor shrinks roughly like ``1/p``, a
saturated-oil table for the five-dimensional dynamics, and an oil/water
instance under pressure maintenance. Magnitudes are picked so a tank
sustains a few hundred monthly steps of production.
"""

from __future__ import annotations

import numpy as np

from .piecewise import PiecewiseLinear
from .pvt import PvtModel
from .reduced import GasTankParams, TwoTankParams, WaterInjParams

__all__ = [
    "gas_pvt",
    "oil_pvt",
    "gas_one_tank_case",
    "two_tank_case",
    "water_injection_case",
    "full_tank_case",
    "price_series",
]

# pressures (Bara) at which the synthetic property tables are tabulated
_PRESSURES = np.array([1.0, 20.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0])


def gas_pvt(c_f: float = 4e-5, v_0: float = 1.6e7) -> PvtModel:
    """Dry-gas PVT: shrinking gas, slightly compressible water, inert oil."""
    b_g = PiecewiseLinear(_PRESSURES, 1.2 / _PRESSURES)
    b_w = PiecewiseLinear(np.array([1.0, 350.0]), np.array([1.03, 1.01]))
    b_o = PiecewiseLinear(np.array([1.0, 350.0]), np.array([1.05, 1.05]))
    r_s = PiecewiseLinear(np.array([1.0, 350.0]), np.array([0.0, 0.0]))
    return PvtModel(b_o=b_o, b_g=b_g, b_w=b_w, r_s=r_s, c_f=c_f, v_0=v_0)


def oil_pvt(c_f: float = 3e-5, v_0: float = 2.0e7) -> PvtModel:
    """Saturated-oil PVT with live oil and dissolving gas."""
    b_g = PiecewiseLinear(_PRESSURES, 1.2 / _PRESSURES)
    b_w = PiecewiseLinear(np.array([1.0, 350.0]), np.array([1.03, 1.01]))
    b_o = PiecewiseLinear(
        np.array([1.0, 100.0, 200.0, 350.0]), np.array([1.05, 1.12, 1.19, 1.30])
    )
    r_s = PiecewiseLinear(
        np.array([1.0, 100.0, 200.0, 350.0]), np.array([0.0, 40.0, 90.0, 160.0])
    )
    return PvtModel(b_o=b_o, b_g=b_g, b_w=b_w, r_s=r_s, c_f=c_f, v_0=v_0)


def gas_ipr() -> PiecewiseLinear:
    """Concave gas deliverability: in-situ m3 per month vs drawdown (Bara)."""
    return PiecewiseLinear(
        np.array([0.0, 50.0, 150.0, 300.0]),
        np.array([0.0, 6.0e4, 1.4e5, 2.2e5]),
    )


def gas_one_tank_case() -> tuple[GasTankParams, float]:
    """One-tank dry-gas instance; returns ``(params, initial gas volume)``.

    Initial pressure is close to 300 Bara at 3e9 Sm3 of gas in place.
    """
    pvt = gas_pvt(c_f=4e-5, v_0=1.686e7)
    params = GasTankParams(pvt=pvt, v_w0=5.0e6, ipr_g=gas_ipr())
    return params, 3.0e9


def two_tank_case(transmissivity: float = 1.5e7) -> tuple[TwoTankParams, tuple]:
    """Two coupled gas tanks; returns ``(params, initial state)``.

    The producing tank is the smaller one, so the second tank acts as the
    slowly responding buffer.
    """
    pvt1 = gas_pvt(c_f=4e-5, v_0=0.75e7)
    pvt2 = gas_pvt(c_f=4e-5, v_0=0.95e7)
    tank1 = GasTankParams(pvt=pvt1, v_w0=2.2e6, ipr_g=gas_ipr())
    tank2 = GasTankParams(pvt=pvt2, v_w0=2.8e6, ipr_g=gas_ipr())
    params = TwoTankParams(tank1=tank1, tank2=tank2, transmissivity=transmissivity)
    return params, (1.35e9, 1.65e9)


def merged_one_tank_case(two_tanks: TwoTankParams) -> GasTankParams:
    """Crude one-tank aggregate of a two-tank reservoir: summed pore volumes
    and water, shared deliverability."""
    p1, p2 = two_tanks.tank1.pvt, two_tanks.tank2.pvt
    pvt = PvtModel(
        b_o=p1.b_o, b_g=p1.b_g, b_w=p1.b_w, r_s=p1.r_s,
        c_f=p1.c_f, v_0=p1.v_0 + p2.v_0,
    )
    return GasTankParams(
        pvt=pvt,
        v_w0=two_tanks.tank1.v_w0 + two_tanks.tank2.v_w0,
        ipr_g=two_tanks.tank1.ipr_g,
    )


def water_injection_case() -> tuple[WaterInjParams, float]:
    """Oil under water injection; returns ``(params, initial water volume)``.

    Starts at 20% water saturation; the water cut climbs to one as water
    fills the pore space, which shuts the instance down gracefully.
    """
    pvt = oil_pvt(c_f=3e-5, v_0=2.0e7)
    p_res = 250.0
    v_p0 = 5.0e7
    wct = PiecewiseLinear(
        np.array([0.0, 0.2, 0.5, 0.8, 1.0]),
        np.array([0.0, 0.0, 0.35, 0.95, 1.0]),
    )
    params = WaterInjParams(
        pvt=pvt,
        p_res=p_res,
        v_p0=v_p0,
        alpha=1.2e3,
        wct=wct,
        f_w_min=-1.0e6,
        f_w_max=0.0,
        f_o_min=0.0,
        f_o_max=1.0e6,
    )
    s_w0 = 0.2
    v_w0 = s_w0 * v_p0 / params.b_w0
    return params, v_w0


def full_tank_case():
    """Volumes and pressure for a generic five-dimensional tank state."""
    pvt = oil_pvt()
    return pvt, dict(v_o=2.0e7, v_g=1.5e9, v_w=4.0e6, p=250.0)


def price_series(horizon: int, kind: str = "cyclic", seed: int = 7) -> np.ndarray:
    """Synthetic monthly price series.

    ``cyclic``: seasonal swing plus mild trend and reproducible noise;
    ``two-regime``: alternating 24-month blocks of high and low prices;
    ``flat``: all ones.
    """
    t = np.arange(horizon, dtype=float)
    if kind == "flat":
        return np.ones(horizon)
    if kind == "two-regime":
        block = (t // 24).astype(int) % 2
        return np.where(block == 0, 400.0, 1.0)
    if kind == "cyclic":
        rng = np.random.default_rng(seed)
        base = 0.22 + 0.08 * np.sin(2 * np.pi * t / 12.0) + 0.0006 * t
        noise = 0.03 * rng.standard_normal(horizon)
        return np.maximum(base + noise, 0.01)
    raise ValueError(f"unknown price series kind: {kind!r}")
