"""Decline curves: generation, optimization and the comparison harness.

A decline curve maps cumulative production to the maximal rate still
achievable; it compresses a reservoir model into a one-dimensional proxy.
Curves are generated by replaying a planning schedule through the model
(or by natural depletion at the maximal rate) and recording one point per
step. The proxy optimization problem is solved here by backward dynamic
programming over a cumulative-production grid, which is exact for the
piecewise-linear curve up to discretization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dp import (
    DpModel,
    Grid,
    Policy,
    Scenario,
    ValueFunction,
    evaluate_open_loop,
    interpolate_value,
    simulate_policy,
    solve_dp,
)
from .errors import ConfigError, InfeasibleError

__all__ = [
    "DeclineCurve",
    "generate_deliverability_curve",
    "generate_decline_curve",
    "decline_model",
    "solve_decline_dp",
    "EquivalenceReport",
    "compare_decline_vs_mb",
    "check_equivalence_1d",
]


@dataclass(frozen=True)
class DeclineCurve:
    """Maximal rate versus cumulative production, linear between points.

    ``cum`` is strictly increasing (a single point is allowed and denotes a
    constant curve); evaluation clamps flat outside the stored range.
    ``source_controls`` optionally records the planning schedule the curve
    was generated from.
    """

    cum: np.ndarray
    max_rate: np.ndarray
    source_controls: np.ndarray | None = None

    def __post_init__(self):
        cum = np.asarray(self.cum, dtype=float)
        rate = np.asarray(self.max_rate, dtype=float)
        object.__setattr__(self, "cum", cum)
        object.__setattr__(self, "max_rate", rate)
        if cum.ndim != 1 or cum.size < 1 or cum.shape != rate.shape:
            raise ValueError("curve needs matching 1-D cum and rate arrays")
        if np.any(np.diff(cum) <= 0):
            raise ValueError("cumulative production must be strictly increasing")
        if np.any(rate < 0):
            raise ValueError("maximal rates must be nonnegative")

    def __call__(self, cum):
        return np.interp(cum, self.cum, self.max_rate)

    @classmethod
    def from_replay_points(cls, cums, rates, source_controls=None) -> "DeclineCurve":
        """Deduplicate replay points: equal abscissae (shut-in steps) keep
        the largest recorded rate."""
        cums = np.asarray(cums, dtype=float)
        rates = np.asarray(rates, dtype=float)
        uniq, inverse = np.unique(cums, return_inverse=True)
        best = np.full(uniq.size, -np.inf)
        np.maximum.at(best, inverse, rates)
        return cls(uniq, best, source_controls=source_controls)


def _max_rate(model: DpModel, x) -> tuple[float, float]:
    """Largest one-step production at state ``x`` and the control achieving it.

    The production of every shipped model decreases with bottom-hole
    pressure, so the maximum sits at the lower admissible endpoint; it is
    additionally capped by the volume the state can physically yield.
    """
    xs = tuple(np.float64(c) for c in x)
    lo, hi = model.admissible_controls(xs)
    lo = float(lo)
    rate = float(model.production(xs, np.float64(lo)))
    u = lo
    if model.available is not None:
        cap = float(model.available(x))
        if rate > cap:
            rate = cap
            u = _control_for_rate(model, x, rate, lo, float(hi))
            rate = float(model.production(xs, np.float64(u)))
    return rate, u


def _control_for_rate(model: DpModel, x, rate: float, lo: float, hi: float) -> float:
    """Control producing ``rate`` at ``x``; closed-form inverse when the
    model ships one, monotone bisection otherwise."""
    if model.invert_production is not None:
        u = float(model.invert_production(x, rate))
        return min(max(u, lo), hi)
    xs = tuple(np.float64(c) for c in x)
    a, b = lo, hi  # production decreasing in u: f(a) >= rate >= f(b)
    for _ in range(200):
        if b - a <= 1e-12 * max(1.0, b):
            break
        mid = 0.5 * (a + b)
        if float(model.production(xs, np.float64(mid))) >= rate:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def generate_deliverability_curve(model: DpModel, controls, x0) -> DeclineCurve:
    """Replay a planning schedule and record ``(cumulative, max rate)`` points.

    The first point sits at cumulative zero with the maximal rate of ``x0``;
    each applied control contributes one more point. Inadmissible controls
    raise with their step index.
    """
    controls = np.asarray(controls, dtype=float)
    x = tuple(float(c) for c in x0)
    cums = [0.0]
    rates = [_max_rate(model, x)[0]]
    cum = 0.0
    for t, u in enumerate(controls):
        xs = tuple(np.float64(c) for c in x)
        lo, hi = model.admissible_controls(xs)
        if u < float(lo) - 1e-9 or u > float(hi) * (1 + 1e-12) + 1e-9:
            raise InfeasibleError(
                f"planning control {u} outside admissible [{float(lo)}, {float(hi)}]",
                stage=t,
            )
        cum += float(model.production(xs, np.float64(u)))
        x = _strict(model, x, float(u), t)
        cums.append(cum)
        rates.append(_max_rate(model, x)[0])
    return DeclineCurve.from_replay_points(cums, rates, source_controls=controls)


def generate_decline_curve(model: DpModel, x0, horizon: int) -> DeclineCurve:
    """Natural-depletion decline curve: produce at the maximal rate each step.

    The schedule of controls realizing the depletion is stored on the curve
    (``source_controls``) so the replay is reproducible.
    """
    x = tuple(float(c) for c in x0)
    cums = [0.0]
    rates = [_max_rate(model, x)[0]]
    controls = np.empty(horizon)
    cum = 0.0
    for t in range(horizon):
        _, u = _max_rate(model, x)
        xs = tuple(np.float64(c) for c in x)
        cum += float(model.production(xs, np.float64(u)))
        controls[t] = u
        x = _strict(model, x, u, t)
        cums.append(cum)
        rates.append(_max_rate(model, x)[0])
    return DeclineCurve.from_replay_points(cums, rates, source_controls=controls)


def _strict(model: DpModel, x, u: float, t: int):
    if model.step_strict is not None:
        return tuple(float(c) for c in model.step_strict(x, u, t))
    nxt = model.dynamics(tuple(np.float64(c) for c in x), np.float64(u))
    return tuple(float(c) for c in nxt)


def decline_model(curve: DeclineCurve) -> DpModel:
    """The decline-curve proxy as a solvable model.

    State: cumulative production; control: the production rate itself,
    admissible in ``[0, h(cum)]``.
    """

    def admissible(states):
        c = states[0]
        return np.zeros_like(np.asarray(c, dtype=float)), curve(c)

    def components(states, u):
        return {"production": np.broadcast_to(u, np.broadcast_shapes(np.shape(states[0]), np.shape(u)))}

    def dynamics(states, u):
        return (states[0] + u,)

    def combine(comps, t, scenario):
        return scenario.prices[t] * comps["production"]

    def step_strict(x, u, stage):
        cap = float(curve(float(x[0])))
        if u < -1e-12 or u > cap * (1 + 1e-12) + 1e-12:
            raise InfeasibleError(f"rate {u} exceeds the curve cap {cap}", stage=stage)
        return (float(x[0]) + float(u),)

    return DpModel(
        name="decline",
        state_names=("cum",),
        dynamics=dynamics,
        admissible_controls=admissible,
        gain_components=components,
        combine_gain=combine,
        production=lambda states, u: u,
        step_strict=step_strict,
        invert_production=lambda x, rate: float(rate),
    )


def solve_decline_dp(
    curve: DeclineCurve,
    scenario: Scenario,
    cum_grid: Grid,
    rate_controls=None,
    threads: int = 1,
):
    """Optimize the decline-curve problem by DP over cumulative production.

    ``rate_controls`` is the discretized rate set; by default it spans
    ``[0, max rate]`` with as many points as the scenario's control grid.
    Returns ``(value, schedule)``: the optimal value from cumulative zero
    and a feasible per-step rate schedule realizing it on the grid.
    """
    if rate_controls is None:
        top = float(np.max(curve.max_rate))
        if top <= 0:
            rate_controls = np.array([0.0, 1.0])  # degenerate curve: only rate 0 admissible
        else:
            rate_controls = np.linspace(0.0, top, max(scenario.controls.size, 2))
    dc_scenario = Scenario(
        horizon=scenario.horizon,
        rho=scenario.rho,
        prices=scenario.prices,
        controls=np.asarray(rate_controls, dtype=float),
        injection_costs=scenario.injection_costs,
        terminal_value=None,
        currency=scenario.currency,
    )
    model = decline_model(curve)
    vfs, policy = solve_dp(model, cum_grid, dc_scenario, threads=threads)
    start = (float(cum_grid.axes[0][0]),)
    traj = simulate_policy(model, policy, start, dc_scenario)
    value = interpolate_value(vfs[0], start)
    return value, traj.productions


@dataclass(frozen=True)
class EquivalenceReport:
    """Side-by-side result of the material-balance and decline-curve solves."""

    mb_value: float
    dc_value: float
    gap_abs: float
    gap_rel: float
    mb_schedule: np.ndarray
    dc_schedule: np.ndarray
    dc_value_replayed_in_mb: float | None = None

    def rows(self):
        out = [
            ("material_balance", self.mb_value),
            ("decline_curve", self.dc_value),
            ("gap_abs", self.gap_abs),
            ("gap_rel", self.gap_rel),
        ]
        if self.dc_value_replayed_in_mb is not None:
            out.append(("decline_replayed_in_mb", self.dc_value_replayed_in_mb))
        return out


def replay_rates_in_mb(model: DpModel, rates, x0, scenario: Scenario):
    """Convert a rate schedule to controls along the replayed trajectory.

    Each rate is capped at the model's maximal rate at the replayed state
    (decline schedules are near-admissible but not guaranteed so beyond one
    dimension), then inverted to a bottom-hole pressure.
    """
    x = tuple(float(c) for c in x0)
    controls = np.empty(scenario.horizon)
    for t in range(scenario.horizon):
        xs = tuple(np.float64(c) for c in x)
        lo, hi = model.admissible_controls(xs)
        cap, _ = _max_rate(model, x)
        q = min(float(rates[t]), cap)
        controls[t] = _control_for_rate(model, x, q, float(lo), float(hi))
        x = _strict(model, x, float(controls[t]), t)
    return evaluate_open_loop(model, controls, x0, scenario)


def compare_decline_vs_mb(
    model: DpModel,
    x0,
    scenario: Scenario,
    state_grid: Grid,
    cum_nodes: int | None = None,
    rate_controls=None,
    replay_in_mb: bool = False,
    threads: int = 1,
) -> EquivalenceReport:
    """Solve both formulations on one instance and report the value gap.

    The decline curve is generated by natural depletion from ``x0``; its
    cumulative-production grid spans the curve's range with ``cum_nodes``
    nodes (default: as many as the state grid). With ``replay_in_mb`` the
    decline schedule is replayed through the material-balance model for a
    like-for-like valuation.
    """
    vfs, policy = solve_dp(model, state_grid, scenario, threads=threads)
    mb_value = interpolate_value(vfs[0], tuple(float(c) for c in x0))
    mb_traj = simulate_policy(model, policy, x0, scenario)

    curve = generate_decline_curve(model, x0, scenario.horizon)
    if cum_nodes is None:
        cum_nodes = state_grid.axes[0].size
    top = float(curve.cum[-1])
    if top <= 0:
        cum_grid = Grid((np.array([0.0, 1.0]),))
    else:
        cum_grid = Grid.uniform([(0.0, top)], [cum_nodes])
    dc_value, dc_schedule = solve_decline_dp(
        curve, scenario, cum_grid, rate_controls=rate_controls, threads=threads
    )

    replayed = None
    if replay_in_mb:
        replayed = replay_rates_in_mb(model, dc_schedule, x0, scenario).npv

    gap = abs(dc_value - mb_value)
    rel = gap / abs(mb_value) if mb_value != 0 else (0.0 if gap == 0 else np.inf)
    return EquivalenceReport(
        mb_value=mb_value,
        dc_value=dc_value,
        gap_abs=gap,
        gap_rel=rel,
        mb_schedule=mb_traj.productions,
        dc_schedule=np.asarray(dc_schedule, dtype=float),
        dc_value_replayed_in_mb=replayed,
    )


def check_equivalence_1d(
    model: DpModel,
    x0,
    scenario: Scenario,
    state_grid: Grid,
    cum_nodes: int | None = None,
    rate_controls=None,
    threads: int = 1,
) -> EquivalenceReport:
    """Equivalence harness for one-dimensional models.

    For a one-dimensional state the decline-curve formulation is an exact
    reformulation of the material-balance problem, so the reported gap is
    pure discretization error.
    """
    if model.state_dim != 1:
        raise ConfigError(
            "the equivalence check applies to one-dimensional models; "
            "use compare_decline_vs_mb for multi-tank comparisons"
        )
    return compare_decline_vs_mb(
        model,
        x0,
        scenario,
        state_grid,
        cum_nodes=cum_nodes,
        rate_controls=rate_controls,
        replay_in_mb=False,
        threads=threads,
    )
