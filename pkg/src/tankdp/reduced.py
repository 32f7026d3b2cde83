"""Reduced-state reservoir models.

Three specializations of the five-dimensional tank whose state collapses to
one or two dimensions:

* one-tank dry gas: state = standard volume of free gas; pressure follows
  from the stored gas through the map ``psi_one_tank``;
* two coupled gas tanks: state = gas volume per tank, production from tank 1
  only, inter-tank flow proportional to the pressure difference;
* oil under water injection at constant pressure: state = standard volume of
  water in place.

The control everywhere is the bottom-hole flowing pressure (Bara).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import lambertw

from .errors import InfeasibleError, NumericError
from .piecewise import PiecewiseLinear
from .pvt import PvtModel

__all__ = [
    "GasTankParams",
    "TwoTankParams",
    "WaterInjParams",
    "psi_one_tank",
    "gas_volume_floor",
    "admissible_controls_1t",
    "gas_production_1t",
    "step_one_tank",
    "step_two_tanks",
    "project_1t_to_2t",
    "wi_productions",
    "wi_admissible_interval",
    "step_water_injection",
    "wi_oil_in_place",
]

_REL = 1e-12  # generic relative slack for admissibility comparisons


@dataclass(frozen=True)
class GasTankParams:
    """One gas tank: PVT + pore-volume law, constant water, gas deliverability.

    ``ipr_g`` maps drawdown (Bara) to in-situ gas offtake (m3 per step); the
    produced standard volume divides it by ``b_g`` at reservoir pressure.
    """

    pvt: PvtModel
    v_w0: float  # constant water in place, Sm3
    ipr_g: PiecewiseLinear  # gas inflow performance vs drawdown

    def __post_init__(self):
        if self.v_w0 < 0:
            raise ValueError("water in place must be nonnegative")
        if abs(self.ipr_g(0.0)) > 0.0:
            raise ValueError("deliverability must vanish at zero drawdown")
        if not self.ipr_g.is_nondecreasing():
            raise ValueError("deliverability must be nondecreasing in drawdown")


@dataclass(frozen=True)
class TwoTankParams:
    """Two gas tanks; the well sits on tank 1, tank 2 feeds it.

    ``transmissivity`` converts an inter-tank pressure difference (Bara) to a
    standard gas volume moved per step (Sm3/Bara/step).
    """

    tank1: GasTankParams
    tank2: GasTankParams
    transmissivity: float

    def __post_init__(self):
        if self.transmissivity < 0:
            raise ValueError("transmissivity must be nonnegative")


@dataclass(frozen=True)
class WaterInjParams:
    """Oil produced under pressure maintenance by water injection.

    The reservoir pressure is pinned at ``p_res``, so the pore volume is the
    constant ``v_p0`` and the state reduces to the water in place. ``alpha``
    is the well productivity (in-situ m3 per Bara of drawdown per step);
    ``wct`` maps water saturation to the produced water fraction. The bounds
    apply to the net water production (produced minus injected, nonpositive
    under injection) and to the oil production, both in Sm3 per step.
    """

    pvt: PvtModel
    p_res: float  # maintained reservoir pressure, Bara
    v_p0: float  # constant pore volume, m3
    alpha: float  # productivity index, m3/Bara/step
    wct: PiecewiseLinear  # water cut vs water saturation
    f_w_min: float
    f_w_max: float
    f_o_min: float
    f_o_max: float

    def __post_init__(self):
        if self.p_res <= 0:
            raise ValueError("reservoir pressure must be positive")
        if self.v_p0 <= 0:
            raise ValueError("pore volume must be positive")
        if self.alpha < 0:
            raise ValueError("productivity index must be nonnegative")
        if np.any(self.wct.y < 0) or np.any(self.wct.y > 1):
            raise ValueError("water cut values must lie in [0, 1]")
        if not self.wct.is_nondecreasing():
            raise ValueError("water cut must be nondecreasing in saturation")
        if self.f_w_min > self.f_w_max or self.f_o_min > self.f_o_max:
            raise ValueError("production bounds must be ordered")

    @property
    def b_w0(self) -> float:
        return float(self.pvt.b_w(self.p_res))

    @property
    def b_o0(self) -> float:
        return float(self.pvt.b_o(self.p_res))


# ---------------------------------------------------------------------------
# Pressure from stored gas: the map psi
# ---------------------------------------------------------------------------

def _psi_array(v_g: np.ndarray, pvt: PvtModel, v_w0: float) -> np.ndarray:
    """Solve ``v_g*b_g(P) + v_w0*b_w(P) = v_0*exp(c_f*P)`` for each entry.

    The left side is nonincreasing and piecewise linear, the right side
    increasing, so the root is unique. On each linear segment the equation
    ``a + b*P = v_0*exp(c_f*P)`` is solved in closed form - through the
    principal branch of the Lambert W function when both the slope and the
    compressibility are active - with bisection as a safety net.
    """
    c = pvt.c_f
    v0 = pvt.v_0
    knots = np.unique(np.concatenate([pvt.b_g.x, pvt.b_w.x]))
    edges = np.concatenate([[0.0], knots[knots > 0.0]])
    n_edges = edges.size

    bg_e = pvt.b_g(edges)
    bw_e = pvt.b_w(edges)
    pore_e = v0 * np.exp(c * edges)
    g_e = v_g[..., None] * bg_e + v_w0 * bw_e - pore_e  # residual at the edges

    # a state sitting exactly on the zero-pressure floor lands at g(0) == 0
    # up to rounding; only a genuinely negative residual means "no root"
    scale = v_g * bg_e[0] + v_w0 * bw_e[0] + v0
    at_floor = g_e[..., 0] < 0
    if np.any(g_e[..., 0] < -1e-9 * scale):
        raise NumericError(
            "psi has no root: gas and water do not fill the pore volume even "
            "at zero pressure (gas volume below this tank's floor)"
        )

    # residual is decreasing along the edges, so the root's segment starts at
    # the last edge with a nonnegative residual
    j = np.maximum(np.sum(g_e >= 0, axis=-1) - 1, 0)

    tail = j == n_edges - 1
    j_hi = np.minimum(j + 1, n_edges - 1)
    e_lo = edges[j]
    e_hi = edges[j_hi]
    width = np.where(tail, 1.0, e_hi - e_lo)

    slope = (
        v_g * (bg_e[j_hi] - bg_e[j]) + v_w0 * (bw_e[j_hi] - bw_e[j])
    ) / width
    slope = np.where(tail, 0.0, slope)
    intercept = v_g * bg_e[j] + v_w0 * bw_e[j] - slope * e_lo

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if c == 0.0:
            root = np.where(
                slope < 0.0, (v0 - intercept) / np.where(slope < 0, slope, -1.0), e_lo
            )
            # flat residual on the segment: if it is not (numerically) zero
            # there is no root at all
            flat = slope == 0.0
            no_root = flat & (np.abs(g_e[..., -1]) > 1e-9 * max(v0, 1.0)) & tail & ~at_floor
            if np.any(no_root):
                raise NumericError("psi has no root: incompressible pore volume "
                                   "never meets the fluid volume")
        else:
            root = np.empty_like(v_g)
            flat = slope == 0.0
            root[flat] = np.log(intercept[flat] / v0) / c
            act = ~flat
            if np.any(act):
                b = slope[act]
                a = intercept[act]
                u = -c * a / b  # >= 0 for b < 0, a > 0
                zeta = -(c * v0 / b) * np.exp(u)
                w = np.real(lambertw(zeta))
                root[act] = -w / c - a / b

    lo_ok = root >= e_lo - 1e-9 * (1.0 + e_lo)
    hi_ok = tail | (root <= e_hi + 1e-9 * (1.0 + e_hi))
    ok = np.isfinite(root) & lo_ok & hi_ok
    if not np.all(ok):
        flat_idx = np.nonzero(~ok.ravel())[0]
        root_flat = root.ravel()
        vg_flat = v_g.ravel()
        lo_flat = e_lo.ravel()
        tail_flat = tail.ravel()
        hi_flat = e_hi.ravel()
        for k in flat_idx:
            root_flat[k] = _psi_bisect(
                float(vg_flat[k]), pvt, v_w0,
                float(lo_flat[k]),
                None if tail_flat[k] else float(hi_flat[k]),
            )
        root = root_flat.reshape(root.shape)

    root = np.maximum(root, e_lo)
    root = np.where(tail, root, np.minimum(root, e_hi))
    root = np.where(at_floor, 0.0, root)
    return np.maximum(root, 0.0)


def _psi_bisect(v_g: float, pvt: PvtModel, v_w0: float, lo: float, hi) -> float:
    """Bisection fallback on one bracketing segment (``hi=None``: open tail)."""

    def g(p):
        return v_g * float(pvt.b_g(p)) + v_w0 * float(pvt.b_w(p)) - pvt.v_0 * np.exp(
            pvt.c_f * p
        )

    if hi is None:
        hi = lo + 1.0
        for _ in range(200):
            if g(hi) <= 0:
                break
            hi = hi * 1.5 + 1.0
        else:
            raise NumericError("psi bisection could not bracket the root")
    a, b = lo, hi
    for _ in range(200):
        if b - a <= 1e-12 * max(1.0, b):
            break
        mid = 0.5 * (a + b)
        if g(mid) >= 0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def psi_one_tank(v_g, params: GasTankParams):
    """Reservoir pressure (Bara) of a gas tank holding ``v_g`` Sm3 of gas.

    Nondecreasing in ``v_g``. Raises :class:`NumericError` when no
    nonnegative root exists for this tank's parameters (gas volume below
    the tank's zero-pressure floor, see :func:`gas_volume_floor`).
    """
    arr = np.asarray(v_g, dtype=float)
    if np.any(arr < 0):
        raise ValueError("gas volume must be nonnegative")
    out = _psi_array(np.atleast_1d(arr), params.pvt, params.v_w0)
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def gas_volume_floor(params: GasTankParams) -> float:
    """Smallest gas volume at which the tank still has nonnegative pressure.

    Below this floor the fluids cannot fill the pore volume even at zero
    pressure and the pressure map has no root. Zero when the water alone
    pressurizes the pores.
    """
    pvt = params.pvt
    short = pvt.v_0 - params.v_w0 * float(pvt.b_w(0.0))
    return max(short / float(pvt.b_g(0.0)), 0.0)


def admissible_controls_1t(v_g, params: GasTankParams):
    """Admissible bottom-hole pressure interval ``[0, psi(v_g)]``."""
    return 0.0, psi_one_tank(v_g, params)


def _gas_rate(v_g, p_bh, params: GasTankParams, psi=None):
    """Produced standard gas volume; clamps negative drawdown to zero.

    Internal vectorized kernel: admissibility is the caller's business.
    """
    ps = psi_one_tank(v_g, params) if psi is None else psi
    drawdown = np.maximum(ps - p_bh, 0.0)
    return params.ipr_g(drawdown) / params.pvt.b_g(ps)


def gas_production_1t(v_g, p_bh, params: GasTankParams):
    """Standard gas volume produced in one step at bottom-hole pressure ``p_bh``.

    Zero exactly at ``p_bh = psi(v_g)``; raises for ``p_bh`` above the
    reservoir pressure (negative production is not admissible).
    """
    ps = psi_one_tank(v_g, params)
    if np.any(np.asarray(p_bh) < 0):
        raise InfeasibleError("bottom-hole pressure must be nonnegative")
    if np.any(np.asarray(p_bh) > np.asarray(ps) * (1 + _REL) + 1e-12):
        raise InfeasibleError("bottom-hole pressure exceeds reservoir pressure")
    out = _gas_rate(v_g, p_bh, params, psi=ps)
    return float(out) if np.asarray(out).ndim == 0 else out


def step_one_tank(v_g: float, p_bh: float, params: GasTankParams) -> float:
    """One production step ``v_g - f``.

    Rejects production that would take the tank below its zero-pressure
    floor (where the pressure map stops having a root).
    """
    f = gas_production_1t(v_g, p_bh, params)
    floor = gas_volume_floor(params)
    nxt = v_g - f
    if nxt < floor:
        if nxt > floor - 1e-12 * max(v_g, 1.0):
            return floor
        raise InfeasibleError(
            "production would take the tank below its zero-pressure gas floor"
        )
    return nxt


def _two_tank_kernel(v1, v2, p_bh, params: TwoTankParams, clamp: bool):
    """Produce from tank 1, then move gas down the pressure difference.

    The transfer is clamped so neither tank leaves the domain of its
    pressure map (volumes stay at or above the zero-pressure floors, hence
    nonnegative). In clamped mode the post-production volume of tank 1 is
    floored as well, which keeps the backup sweep total; the strict wrapper
    rejects such steps instead.
    """
    floor1 = gas_volume_floor(params.tank1)
    floor2 = gas_volume_floor(params.tank2)
    psi1 = psi_one_tank(v1, params.tank1)
    psi2 = psi_one_tank(v2, params.tank2)
    f = _gas_rate(v1, p_bh, params.tank1, psi=psi1)
    v1a = v1 - f
    if clamp:
        v1a = np.maximum(v1a, floor1)
    flow = params.transmissivity * (psi2 - psi1)
    flow = np.minimum(flow, v2 - floor2)  # tank 2 cannot drop below its floor
    flow = np.maximum(flow, -np.maximum(v1a - floor1, 0.0))  # nor can tank 1
    return v1a + flow, v2 - flow, f, psi1


def step_two_tanks(x, p_bh, params: TwoTankParams):
    """One step of the two-tank model: produce from tank 1, then transfer.

    ``x`` is the pair ``(v_g1, v_g2)``. The inter-tank flow is
    ``transmissivity * (psi2(v_g2) - psi1(v_g1))`` evaluated at the incoming
    state and clamped so neither tank leaves the domain of its pressure map;
    production has priority over the transfer. Returns ``(v_g1', v_g2')``.
    """
    v1, v2 = float(x[0]), float(x[1])
    psi1 = psi_one_tank(v1, params.tank1)
    if p_bh < 0 or p_bh > psi1 * (1 + _REL) + 1e-12:
        raise InfeasibleError(
            f"bottom-hole pressure {p_bh} outside the admissible [0, {psi1}]"
        )
    f = _gas_rate(v1, p_bh, params.tank1, psi=psi1)
    if v1 - f < gas_volume_floor(params.tank1) - 1e-12 * max(v1, 1.0):
        raise InfeasibleError(
            "production would take tank 1 below its zero-pressure gas floor"
        )
    v1n, v2n, _, _ = _two_tank_kernel(
        np.float64(v1), np.float64(v2), np.float64(p_bh), params, clamp=True
    )
    return float(v1n), float(v2n)


def project_1t_to_2t(controls, x0, params: TwoTankParams) -> np.ndarray:
    """Project a one-tank control plan onto the two-tank admissible sets.

    Walks the two-tank dynamics forward, replacing each control by
    ``min(u_t, psi1(state))`` so the plan stays admissible; entries already
    admissible along the projected trajectory pass through unchanged.
    Idempotent: projecting the output again returns it.
    """
    controls = np.asarray(controls, dtype=float)
    if np.any(controls < 0):
        raise ValueError("controls must be nonnegative bottom-hole pressures")
    x = (float(x0[0]), float(x0[1]))
    out = np.empty_like(controls)
    for t, u in enumerate(controls):
        psi1 = psi_one_tank(x[0], params.tank1)
        u_adm = min(float(u), psi1)
        out[t] = u_adm
        x = step_two_tanks(x, u_adm, params)
    return out


# ---------------------------------------------------------------------------
# Oil under water injection
# ---------------------------------------------------------------------------

def _wi_rates(v_w, p_bh, params: WaterInjParams):
    """Vectorized (f_o, f_w, f_wi); negative drawdown clamps to zero."""
    b_w0 = params.b_w0
    b_o0 = params.b_o0
    s_w = np.asarray(v_w) * b_w0 / params.v_p0
    wc = params.wct(s_w)
    drawdown = np.maximum(params.p_res - np.asarray(p_bh), 0.0)
    flux = params.alpha * drawdown  # total in-situ offtake, m3
    f_w = flux * wc / b_w0
    f_o = flux * (1.0 - wc) / b_o0
    f_wi = flux / b_w0
    return f_o, f_w, f_wi


def wi_productions(v_w, p_bh, params: WaterInjParams):
    """Oil, water and injected-water standard volumes for one step.

    The injected water replaces the extracted fluids so the reservoir
    pressure holds; the identity ``f_wi = f_w + f_o * b_o/b_w`` is exact.
    """
    if np.any(np.asarray(p_bh) < 0) or np.any(
        np.asarray(p_bh) > params.p_res * (1 + _REL) + 1e-12
    ):
        raise InfeasibleError("bottom-hole pressure outside [0, reservoir pressure]")
    f_o, f_w, f_wi = _wi_rates(v_w, p_bh, params)
    if np.asarray(f_o).ndim == 0:
        return float(f_o), float(f_w), float(f_wi)
    return f_o, f_w, f_wi


def wi_oil_in_place(v_w, params: WaterInjParams):
    """Oil standard volume implied by the water in place (volume equality)."""
    return (params.v_p0 - np.asarray(v_w) * params.b_w0) / params.b_o0


def step_water_injection(v_w, p_bh, params: WaterInjParams):
    """One step of the water-injection model: ``v_w`` never decreases.

    Water replaces produced oil one-to-one in reservoir volume; the implied
    oil in place must stay nonnegative.
    """
    f_o, f_w, f_wi = wi_productions(v_w, p_bh, params)
    nxt = np.asarray(v_w) + (np.asarray(f_wi) - np.asarray(f_w))
    oil = wi_oil_in_place(nxt, params)
    if np.any(oil < -1e-9 * params.v_p0 / params.b_o0):
        raise InfeasibleError("production would drive the oil in place negative")
    return float(nxt) if nxt.ndim == 0 else nxt


def wi_admissible_interval(v_w, params: WaterInjParams):
    """Admissible bottom-hole pressure interval after production bounds.

    Intersects ``p_bh`` in ``[0, p_res]`` with the net-water and oil
    production bounds; both rates are linear in the drawdown at a fixed
    state, so each bound maps to a drawdown interval.
    """
    v = np.asarray(v_w, dtype=float)
    s_w = v * params.b_w0 / params.v_p0
    wc = params.wct(s_w)
    d_lo = np.zeros_like(v, dtype=float)
    d_hi = np.full_like(v, params.p_res, dtype=float)

    # net water production (f_w - f_wi) = cn * drawdown, cn <= 0
    cn = params.alpha * (wc - 1.0) / params.b_w0
    neg = cn < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        d_hi = np.where(neg, np.minimum(d_hi, params.f_w_min / np.where(neg, cn, 1.0)), d_hi)
        d_lo = np.where(neg, np.maximum(d_lo, params.f_w_max / np.where(neg, cn, 1.0)), d_lo)
    flat = ~neg & ((params.f_w_min > 0) | (params.f_w_max < 0))
    d_hi = np.where(flat, -1.0, d_hi)  # empty interval marker

    # oil production = co * drawdown, co >= 0
    co = params.alpha * (1.0 - wc) / params.b_o0
    pos = co > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        d_hi = np.where(pos, np.minimum(d_hi, params.f_o_max / np.where(pos, co, 1.0)), d_hi)
        d_lo = np.where(pos, np.maximum(d_lo, params.f_o_min / np.where(pos, co, 1.0)), d_lo)
    flat = ~pos & ((params.f_o_min > 0) | (params.f_o_max < 0))
    d_hi = np.where(flat, -1.0, d_hi)

    lo = params.p_res - d_hi
    hi = params.p_res - d_lo
    if np.asarray(v_w).ndim == 0:
        return float(lo), float(hi)
    return lo, hi
