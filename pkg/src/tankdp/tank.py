"""Five-dimensional material-balance dynamics of a tank-like reservoir.

State: standard volumes of oil, free gas and water (Sm3), total pore volume
(m3) and reservoir pressure (Bara). One step removes the produced standard
volumes, returns liberated solution gas to the free-gas inventory, and finds
the next pressure from the requirement that the remaining fluids exactly
fill the (pressure-dependent) pore volume.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, NumericError
from .piecewise import PiecewiseLinear
from .pvt import PvtModel, mixture_volume

__all__ = [
    "TankState",
    "Production",
    "IprModel",
    "saturations",
    "well_production",
    "solve_pressure_xi",
    "step_dynamics",
    "volume_residual",
    "volume_tolerance",
]

# Default bracket-width tolerance for the implicit pressure solve (Bara).
DEFAULT_PRESSURE_TOL = 1e-8


@dataclass(frozen=True)
class TankState:
    """Reservoir state: ``(v_o, v_g, v_w)`` in Sm3, ``v_p`` in m3, ``p`` in Bara."""

    v_o: float
    v_g: float
    v_w: float
    v_p: float
    p: float

    def __post_init__(self):
        if min(self.v_o, self.v_g, self.v_w) < 0:
            raise ValueError("fluid volumes must be nonnegative")
        if self.v_p <= 0:
            raise ValueError("pore volume must be positive")
        if self.p < 0:
            raise ValueError("pressure must be nonnegative")

    @classmethod
    def from_volumes(cls, pvt: PvtModel, v_o, v_g, v_w, p) -> "TankState":
        """Build a volume-consistent state: the pore volume is set to the
        in-situ volume of the fluids at pressure ``p``."""
        v_p = float(mixture_volume(pvt, v_o, v_g, v_w, p))
        return cls(v_o=float(v_o), v_g=float(v_g), v_w=float(v_w), v_p=v_p, p=float(p))


@dataclass(frozen=True)
class Production:
    """Standard volumes produced over one step, componentwise nonnegative."""

    f_o: float = 0.0
    f_g: float = 0.0
    f_w: float = 0.0

    def __post_init__(self):
        if min(self.f_o, self.f_g, self.f_w) < 0:
            raise ValueError("produced volumes must be nonnegative")


@dataclass(frozen=True)
class IprModel:
    """Well deliverability versus drawdown.

    Two modes are supported:

    * ``total``: a single curve giving the total in-situ offtake (m3/step)
      versus drawdown; it is split across fluids by their saturations
      (fractional-flow weighting). Single-fluid states reduce to the plain
      curve since the lone saturation is one.
    * per-fluid curves ``oil``/``gas``/``water``: applied directly per fluid
      with no saturation weighting; omitted fluids produce nothing.

    Every curve must satisfy ``curve(0) = 0`` and be nondecreasing.
    """

    total: PiecewiseLinear | None = None
    oil: PiecewiseLinear | None = None
    gas: PiecewiseLinear | None = None
    water: PiecewiseLinear | None = None

    def __post_init__(self):
        per_fluid = [c for c in (self.oil, self.gas, self.water) if c is not None]
        if self.total is not None and per_fluid:
            raise ValueError("give either a total curve or per-fluid curves, not both")
        if self.total is None and not per_fluid:
            raise ValueError("at least one deliverability curve is required")
        for curve in ([self.total] if self.total is not None else per_fluid):
            if abs(curve(0.0)) > 0.0:
                raise ValueError("deliverability must vanish at zero drawdown")
            if not curve.is_nondecreasing():
                raise ValueError("deliverability must be nondecreasing in drawdown")


def volume_tolerance(state: TankState) -> float:
    """Acceptable volume-equality residual for ``state`` (m3)."""
    return max(1e-6 * state.v_p, 1e-3)


def volume_residual(state: TankState, pvt: PvtModel) -> float:
    """Mixture volume at the state's pressure minus the pore volume (m3)."""
    return float(mixture_volume(pvt, state.v_o, state.v_g, state.v_w, state.p) - state.v_p)


def saturations(state: TankState, pvt: PvtModel) -> tuple[float, float, float]:
    """Pore-volume fractions ``(s_o, s_g, s_w)`` of oil, free gas and water."""
    if state.v_p <= 0:
        raise NumericError("degenerate state: pore volume is not positive")
    s_o = state.v_o * float(pvt.b_o(state.p)) / state.v_p
    s_g = state.v_g * float(pvt.b_g(state.p)) / state.v_p
    s_w = state.v_w * float(pvt.b_w(state.p)) / state.v_p
    return s_o, s_g, s_w


def well_production(state: TankState, p_bh: float, ipr: IprModel, pvt: PvtModel) -> Production:
    """Produced standard volumes for one step at bottom-hole pressure ``p_bh``.

    The in-situ offtake of fluid ``i`` is converted to standard volume by
    dividing by ``b_i`` at the current reservoir pressure.
    """
    if p_bh < 0:
        raise InfeasibleError("bottom-hole pressure must be nonnegative")
    if p_bh > state.p * (1 + 1e-12):
        raise InfeasibleError(
            f"bottom-hole pressure {p_bh} exceeds reservoir pressure {state.p}"
        )
    drawdown = max(state.p - p_bh, 0.0)
    b = {
        "oil": float(pvt.b_o(state.p)),
        "gas": float(pvt.b_g(state.p)),
        "water": float(pvt.b_w(state.p)),
    }
    if ipr.total is not None:
        q = float(ipr.total(drawdown))
        s_o, s_g, s_w = saturations(state, pvt)
        return Production(
            f_o=s_o * q / b["oil"], f_g=s_g * q / b["gas"], f_w=s_w * q / b["water"]
        )
    out = {}
    for name, curve in (("oil", ipr.oil), ("gas", ipr.gas), ("water", ipr.water)):
        out[name] = float(curve(drawdown)) / b[name] if curve is not None else 0.0
    return Production(f_o=out["oil"], f_g=out["gas"], f_w=out["water"])


def _post_volumes(state: TankState, prod: Production) -> tuple[float, float]:
    v_o1 = state.v_o - prod.f_o
    v_w1 = state.v_w - prod.f_w
    if v_o1 < 0 or v_w1 < 0:
        raise InfeasibleError("production exceeds the oil or water in place")
    return v_o1, v_w1


def _pressure_residual(p_next, state: TankState, prod: Production, pvt: PvtModel):
    """Fluid volume at ``p_next`` minus pore volume at ``p_next``.

    Decreasing in ``p_next`` for a valid black-oil model: the left side
    shrinks with pressure while the pore volume grows."""
    v_o1 = state.v_o - prod.f_o
    v_w1 = state.v_w - prod.f_w
    free_gas = (
        state.v_g
        - prod.f_g
        + state.v_o * pvt.r_s(state.p)
        - v_o1 * pvt.r_s(p_next)
    )
    lhs = v_o1 * pvt.b_o(p_next) + v_w1 * pvt.b_w(p_next) + free_gas * pvt.b_g(p_next)
    rhs = state.v_p * (1.0 + pvt.c_f * (p_next - state.p))
    return lhs - rhs


def solve_pressure_xi(
    state: TankState,
    prod: Production,
    pvt: PvtModel,
    tol: float = DEFAULT_PRESSURE_TOL,
) -> float:
    """Next-step reservoir pressure implied by the volume balance.

    Solves, for ``p'``: remaining fluids (including liberated solution gas)
    evaluated at ``p'`` fill exactly the linearized pore volume at ``p'``.
    The left side is decreasing and the right side increasing in ``p'``, so
    the root is unique whenever it exists.

    Uses exact segment-wise linear inversion when the residual is piecewise
    linear (``c_f == 0`` and no oil/solution-gas cross term), bracketing
    bisection otherwise. ``tol`` is the final bracket width in Bara.
    """
    _post_volumes(state, prod)

    res0 = _pressure_residual(state.p, state, prod, pvt)
    if res0 == 0.0:
        # zero production leaves a volume-consistent state exactly at rest
        return state.p

    r_s_flat = np.all(pvt.r_s.y == pvt.r_s.y[0])
    linear = pvt.c_f == 0.0 and (state.v_o - prod.f_o == 0.0 or r_s_flat)

    def residual(p):
        return _pressure_residual(p, state, prod, pvt)

    knots = np.unique(
        np.concatenate([c.x for c in (pvt.b_o, pvt.b_g, pvt.b_w, pvt.r_s)])
    )

    if linear:
        # residual is piecewise linear with the PVT breakpoints as knots
        hi = max(state.p, knots[-1]) + 1.0
        grid = np.unique(np.concatenate([[0.0, hi], knots[(knots > 0) & (knots < hi)]]))
        vals = np.array([residual(p) for p in grid])
        if vals[0] < 0:
            raise NumericError(
                "no pressure root: fluids cannot fill the pore volume even at zero pressure"
            )
        sign_changes = np.nonzero((vals[:-1] >= 0) & (vals[1:] < 0))[0]
        if sign_changes.size == 0:
            if vals[-1] == 0.0:
                return float(grid[-1])
            raise NumericError("no sign change: pressure root not bracketed")
        if np.any(np.diff(vals) > 1e-9 * max(1.0, float(np.max(np.abs(vals))))):
            raise NumericError("mixture volume is not decreasing in pressure")
        k = int(sign_changes[0])
        a, b = grid[k], grid[k + 1]
        fa, fb = vals[k], vals[k + 1]
        if fa == 0.0:
            return float(a)
        return float(a + fa * (b - a) / (fa - fb))

    # bracketing bisection on [0, p + margin], expanding upward if needed
    lo = 0.0
    f_lo = residual(lo)
    if f_lo < 0:
        raise NumericError(
            "no pressure root: fluids cannot fill the pore volume even at zero pressure"
        )
    hi = max(state.p, knots[-1]) + max(1.0, 0.05 * state.p)
    f_hi = residual(hi)
    for _ in range(60):
        if f_hi <= 0:
            break
        hi = hi * 1.5 + 1.0
        f_hi = residual(hi)
    else:
        raise NumericError("no sign change: pressure root not bracketed from above")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if residual(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def step_dynamics(
    state: TankState,
    prod: Production,
    pvt: PvtModel,
    tol: float = DEFAULT_PRESSURE_TOL,
) -> TankState:
    """Advance the reservoir by one step under ``prod``.

    Oil and water balances are exact subtractions; the free-gas balance adds
    the solution gas liberated by the pressure move; the pore volume follows
    the linearized compaction law. Productions that would drive any volume
    negative raise :class:`InfeasibleError` - they are never clamped.
    """
    v_o1, v_w1 = _post_volumes(state, prod)
    p1 = solve_pressure_xi(state, prod, pvt, tol=tol)
    v_g1 = (
        state.v_g
        - prod.f_g
        + state.v_o * float(pvt.r_s(state.p))
        - v_o1 * float(pvt.r_s(p1))
    )
    if v_g1 < 0:
        # tolerate pure float noise on an exactly-zero balance
        if v_g1 > -1e-12 * max(state.v_g, 1.0):
            v_g1 = 0.0
        else:
            raise InfeasibleError("production exceeds the free gas in place")
    v_p1 = state.v_p * (1.0 + pvt.c_f * (p1 - state.p))
    if v_p1 <= 0:
        raise NumericError("pore volume collapsed to a nonpositive value")
    return TankState(v_o=v_o1, v_g=v_g1, v_w=v_w1, v_p=v_p1, p=p1)
