"""Finite-horizon backward dynamic programming on rectilinear grids.

The solver enumerates a discretized control set at every grid node, values
off-grid successor states by multilinear interpolation with coordinates
clamped to the grid bounds, and keeps the last maximizer in ascending
control order (so ties resolve deterministically toward the largest
control). Stage gains are discounted to time zero inside the solver.

Models plug in through :class:`DpModel`: vectorized callables that accept
state component arrays of shape ``(N, 1)`` together with control arrays of
shape ``(N, C)`` and broadcast to ``(N, C)`` outputs.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Callable

import numpy as np

from .errors import ConfigError, InfeasibleError, NumericError

__all__ = [
    "Grid",
    "Scenario",
    "DpModel",
    "ValueFunction",
    "Policy",
    "Trajectory",
    "interpolate_value",
    "solve_dp",
    "simulate_policy",
    "evaluate_open_loop",
    "stage_gain",
]


@dataclass(frozen=True)
class Grid:
    """Rectilinear grid: one strictly increasing node array per dimension."""

    axes: tuple

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        object.__setattr__(self, "axes", axes)
        if not axes:
            raise ValueError("grid needs at least one dimension")
        for a in axes:
            if a.ndim != 1 or a.size < 1:
                raise ValueError("each grid axis must be a nonempty 1-D array")
            if np.any(np.diff(a) <= 0):
                raise ValueError("grid nodes must be strictly increasing")

    @classmethod
    def uniform(cls, bounds, counts) -> "Grid":
        """Uniform grid from per-dimension ``(lo, hi)`` bounds and node counts."""
        bounds = list(bounds)
        counts = list(counts)
        if len(bounds) != len(counts):
            raise ValueError("bounds and counts must have the same length")
        axes = []
        for (lo, hi), n in zip(bounds, counts):
            n = int(n)
            if n < 1:
                raise ValueError("node counts must be positive")
            if n == 1:
                if hi != lo:
                    raise ValueError("a single-node axis needs lo == hi")
                axes.append(np.array([float(lo)]))
            else:
                if hi <= lo:
                    raise ValueError("axis bounds must satisfy lo < hi")
                axes.append(np.linspace(float(lo), float(hi), n))
        return cls(tuple(axes))

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(a.size for a in self.axes)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    @property
    def bounds(self) -> tuple:
        return tuple((float(a[0]), float(a[-1])) for a in self.axes)

    def node_arrays(self) -> tuple:
        """Coordinates of every node, flattened in C order, one array per dim."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return tuple(m.ravel() for m in mesh)

    def nearest_index(self, x) -> tuple:
        """Per-dimension nearest node (ties go to the lower node)."""
        idx = []
        for a, xv in zip(self.axes, x):
            xv = float(xv)
            i = int(np.searchsorted(a, xv))
            if i <= 0:
                idx.append(0)
            elif i >= a.size:
                idx.append(a.size - 1)
            else:
                idx.append(i - 1 if xv - a[i - 1] <= a[i] - xv else i)
        return tuple(idx)


@dataclass(frozen=True)
class Scenario:
    """Economic data of one optimization run.

    ``prices`` (and optional ``injection_costs``) are per-step series of
    length at least ``horizon``; ``controls`` is the ascending discretized
    control set shared by every node (the solver adds the state-dependent
    admissible-interval endpoints on top). ``terminal_value`` is an optional
    callable mapping state component arrays to an end-of-horizon valuation,
    zero by default.
    """

    horizon: int
    rho: float
    prices: np.ndarray
    controls: np.ndarray
    injection_costs: np.ndarray | None = None
    terminal_value: Callable | None = None
    currency: str = "EUR"

    def __post_init__(self):
        object.__setattr__(self, "prices", np.asarray(self.prices, dtype=float))
        object.__setattr__(self, "controls", np.asarray(self.controls, dtype=float))
        if self.injection_costs is not None:
            object.__setattr__(
                self, "injection_costs", np.asarray(self.injection_costs, dtype=float)
            )
        if self.horizon < 1:
            raise ConfigError("horizon must be at least one step")
        if not 0 < self.rho <= 1:
            raise ConfigError("discount factor must lie in (0, 1]")
        if self.prices.size < self.horizon:
            raise ConfigError("price series shorter than the horizon")
        if self.injection_costs is not None and self.injection_costs.size < self.horizon:
            raise ConfigError("injection cost series shorter than the horizon")
        if self.controls.ndim != 1 or self.controls.size < 1:
            raise ConfigError("control grid must be a nonempty 1-D array")
        if np.any(np.diff(self.controls) <= 0):
            raise ConfigError("control grid must be strictly increasing")

    def cost_at(self, t: int) -> float:
        return float(self.injection_costs[t]) if self.injection_costs is not None else 0.0


@dataclass(frozen=True)
class DpModel:
    """A controlled dynamical system in the form the solver consumes.

    All callables are vectorized and broadcast: ``states`` is a tuple of
    arrays (one per state dimension), ``u`` an array of controls.

    dynamics(states, u) -> tuple of next-state arrays (used in the backup;
        out-of-grid successors are fine, they are clamped when valued)
    admissible_controls(states) -> (lo, hi) arrays bounding the control
    gain_components(states, u) -> dict of named arrays, time-independent
    combine_gain(components, t, scenario) -> undiscounted stage gain array
    production(states, u) -> primary produced volume (drives trajectories
        and decline curves)
    step_strict(state, u, stage) -> scalar next state tuple; must raise
        InfeasibleError on physically infeasible steps (simulation path)
    invert_production(state, rate) -> control achieving ``rate`` at ``state``
    available(state) -> hard cap on one step's production at ``state``
    pressures(state) -> dict of diagnostic pressures for reporting
    """

    name: str
    state_names: tuple
    dynamics: Callable
    admissible_controls: Callable
    gain_components: Callable
    combine_gain: Callable
    production: Callable
    step_strict: Callable | None = None
    invert_production: Callable | None = None
    available: Callable | None = None
    pressures: Callable | None = None

    @property
    def state_dim(self) -> int:
        return len(self.state_names)


@dataclass(frozen=True)
class ValueFunction:
    """Stage-``t`` value table over the grid (discounted to time zero)."""

    t: int
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.shape != self.grid.shape:
            raise ValueError("value table shape does not match the grid")
        if not np.all(np.isfinite(self.values)):
            raise NumericError(f"non-finite values in the stage-{self.t} table")


@dataclass(frozen=True)
class Policy:
    """Optimal control per stage and grid node: table shape ``(T, *grid)``."""

    grid: Grid
    controls: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "controls", np.asarray(self.controls, dtype=float))
        if self.controls.shape[1:] != self.grid.shape:
            raise ValueError("policy table shape does not match the grid")

    @property
    def horizon(self) -> int:
        return self.controls.shape[0]

    def control_at(self, t: int, x) -> float:
        """Stored control of the node nearest to ``x`` at stage ``t``."""
        return float(self.controls[t][self.grid.nearest_index(x)])


class _InterpPlan:
    """Precomputed clamped multilinear interpolation at fixed query points.

    Stores, for every query point, the flat indices of its cell corners and
    the corner weights; applying the plan to a value table is then a pure
    gather-and-sum, which is what makes the stage loop cheap.
    """

    def __init__(self, grid: Grid, points):
        shape = grid.shape
        strides = np.ones(len(shape), dtype=np.int64)
        for d in range(len(shape) - 2, -1, -1):
            strides[d] = strides[d + 1] * shape[d + 1]
        idx0 = []
        frac = []
        for a, pts in zip(grid.axes, points):
            pts = np.clip(np.asarray(pts, dtype=float).ravel(), a[0], a[-1])
            if a.size == 1:
                idx0.append(np.zeros(pts.size, dtype=np.int64))
                frac.append(np.zeros(pts.size))
                continue
            i = np.clip(np.searchsorted(a, pts, side="right") - 1, 0, a.size - 2)
            idx0.append(i.astype(np.int64))
            frac.append((pts - a[i]) / (a[i + 1] - a[i]))
        corners = []
        for bits in product((0, 1), repeat=len(shape)):
            flat = np.zeros(idx0[0].size, dtype=np.int64)
            w = np.ones(idx0[0].size)
            for d, bit in enumerate(bits):
                j = idx0[d] + bit
                j = np.minimum(j, shape[d] - 1)
                flat += j * strides[d]
                w = w * (frac[d] if bit else (1.0 - frac[d]))
            corners.append((flat, w))
        self._corners = corners

    def __call__(self, table: np.ndarray) -> np.ndarray:
        flat_table = table.ravel()
        idx, w = self._corners[0]
        out = flat_table[idx] * w
        for idx, w in self._corners[1:]:
            out += flat_table[idx] * w
        return out


def interpolate_value(vf: ValueFunction, x):
    """Value at state ``x``: exact on nodes, multilinear between them,
    clamped coordinate-wise outside the grid bounds.

    ``x`` is a tuple of per-dimension coordinates (scalars or broadcastable
    arrays).
    """
    coords = tuple(np.asarray(c, dtype=float) for c in x)
    shape = np.broadcast_shapes(*[c.shape for c in coords])
    coords = tuple(np.broadcast_to(c, shape) for c in coords)
    out = _InterpPlan(vf.grid, coords)(vf.values)
    if shape == ():
        return float(out[0])
    return out.reshape(shape)


def stage_gain(model: DpModel, x, u, t: int, scenario: Scenario):
    """Undiscounted stage gain of ``model`` at state ``x`` and control ``u``."""
    states = tuple(np.asarray(c, dtype=float) for c in x)
    comps = model.gain_components(states, np.asarray(u, dtype=float))
    g = model.combine_gain(comps, t, scenario)
    return float(g) if np.asarray(g).ndim == 0 else g


def _resolve_threads(threads: int) -> int:
    if threads == 0:
        return os.cpu_count() or 1
    return max(int(threads), 1)


def solve_dp(model: DpModel, grid: Grid, scenario: Scenario, threads: int = 1):
    """Backward value recursion over the grid.

    Returns ``(value_functions, policy)`` where ``value_functions`` holds the
    stage tables for ``t = 0 .. T`` (terminal included) and ``policy`` the
    argmax control per stage and node. At every node the candidate controls
    are the scenario's control grid restricted to the admissible interval,
    plus the interval endpoints themselves, enumerated in ascending order;
    on ties the last (largest) maximizer wins.

    ``threads`` splits the node set into blocks evaluated concurrently
    within each stage (0 = one block per CPU); the result is independent of
    the split.
    """
    T = scenario.horizon
    rho = scenario.rho
    nodes = grid.node_arrays()
    n = nodes[0].size
    states_col = tuple(a[:, None] for a in nodes)

    lo, hi = model.admissible_controls(states_col)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (n, 1))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (n, 1))
    if np.any(lo > hi):
        k = int(np.argmax((lo > hi).ravel()))
        state = tuple(float(a[k]) for a in nodes)
        raise ConfigError(f"empty admissible control set at grid node {state}")

    u_grid = scenario.controls
    n_cand = u_grid.size + 2
    cand = np.empty((n, n_cand))
    cand[:, 0] = lo[:, 0]
    cand[:, 1:-1] = u_grid[None, :]
    cand[:, -1] = hi[:, 0]
    valid = (cand >= lo) & (cand <= hi)

    comps = model.gain_components(states_col, cand)
    comps = {k: np.broadcast_to(np.asarray(v, dtype=float), (n, n_cand)) for k, v in comps.items()}
    for name, v in comps.items():
        if not np.all(np.isfinite(v[valid])):
            raise ConfigError(f"non-finite gain component '{name}' on admissible controls")
    nxt = model.dynamics(states_col, cand)
    nxt = tuple(np.broadcast_to(np.asarray(a, dtype=float), (n, n_cand)) for a in nxt)

    n_threads = _resolve_threads(threads)
    n_blocks = min(n_threads, n) if n_threads > 1 else 1
    edges = np.linspace(0, n, n_blocks + 1).astype(int)
    blocks = [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    plans = [
        _InterpPlan(grid, tuple(a[sl].ravel() for a in nxt)) for sl in blocks
    ]

    if scenario.terminal_value is not None:
        v_term = rho**T * np.broadcast_to(
            np.asarray(scenario.terminal_value(nodes), dtype=float), (n,)
        ).astype(float)
        if not np.all(np.isfinite(v_term)):
            raise ConfigError("terminal valuation produced non-finite values")
    else:
        v_term = np.zeros(n)

    values = np.empty((T + 1, n))
    controls = np.empty((T, n))
    values[T] = v_term

    def backup_block(i_block: int, t: int, j_next: np.ndarray):
        sl = blocks[i_block]
        rows = sl.stop - sl.start
        gain = model.combine_gain({k: v[sl] for k, v in comps.items()}, t, scenario)
        total = rho**t * gain + plans[i_block](j_next).reshape(rows, n_cand)
        total = np.where(valid[sl], total, -np.inf)
        best = n_cand - 1 - np.argmax(total[:, ::-1], axis=1)
        r = np.arange(rows)
        values[t, sl] = total[r, best]
        controls[t, sl] = cand[sl][r, best]

    if n_blocks == 1:
        for t in range(T - 1, -1, -1):
            backup_block(0, t, values[t + 1])
    else:
        with ThreadPoolExecutor(max_workers=n_blocks) as pool:
            for t in range(T - 1, -1, -1):
                j_next = values[t + 1]
                list(pool.map(lambda i: backup_block(i, t, j_next), range(len(blocks))))

    vfs = [ValueFunction(t, grid, values[t].reshape(grid.shape)) for t in range(T + 1)]
    policy = Policy(grid, controls.reshape((T,) + grid.shape))
    return vfs, policy


@dataclass(frozen=True)
class Trajectory:
    """Closed- or open-loop rollout: per-step records plus the final state."""

    states: np.ndarray  # (T+1, state_dim)
    controls: np.ndarray  # (T,)
    productions: np.ndarray  # (T,)
    gains: np.ndarray  # discounted stage gains, (T,)
    cumulative: np.ndarray  # running sum of gains, (T,)

    @property
    def npv(self) -> float:
        return float(self.cumulative[-1]) if self.cumulative.size else 0.0


def _scalar_state(x) -> tuple:
    return tuple(float(c) for c in x)


def _strict_step(model: DpModel, x, u: float, t: int):
    if model.step_strict is not None:
        return _scalar_state(model.step_strict(x, u, t))
    states = tuple(np.float64(c) for c in x)
    nxt = model.dynamics(states, np.float64(u))
    return _scalar_state(nxt)


def _rollout(model: DpModel, x0, scenario: Scenario, pick_control) -> Trajectory:
    T = scenario.horizon
    x = _scalar_state(x0)
    dim = len(x)
    states = np.empty((T + 1, dim))
    controls = np.empty(T)
    productions = np.empty(T)
    gains = np.empty(T)
    states[0] = x
    for t in range(T):
        u = pick_control(t, x)
        g = stage_gain(model, x, u, t, scenario)
        f = model.production(tuple(np.float64(c) for c in x), np.float64(u))
        x = _strict_step(model, x, u, t)
        controls[t] = u
        productions[t] = float(f)
        gains[t] = scenario.rho**t * g
        states[t + 1] = x
    return Trajectory(
        states=states,
        controls=controls,
        productions=productions,
        gains=gains,
        cumulative=np.cumsum(gains),
    )


def simulate_policy(
    model: DpModel,
    policy: Policy,
    x0,
    scenario: Scenario,
    value_functions=None,
    reoptimize: bool = False,
) -> Trajectory:
    """Closed-loop rollout of a solved policy from ``x0``.

    Off-node states take the control stored at the nearest grid node,
    clamped into the admissible interval of the actual state (nearest-node
    lookup can otherwise propose a control that is microscopically
    inadmissible). With ``reoptimize=True`` the control is instead
    re-optimized over the scenario's control set using the stage-``t+1``
    value table, which quantifies the nearest-node interpolation loss;
    ``value_functions`` must then be supplied.
    """
    if reoptimize and value_functions is None:
        raise ConfigError("reoptimize=True needs the value_functions argument")

    def pick(t: int, x) -> float:
        lo, hi = model.admissible_controls(tuple(np.float64(c) for c in x))
        lo = float(lo)
        hi = float(hi)
        if not reoptimize:
            return min(max(policy.control_at(t, x), lo), hi)
        cand = np.concatenate([[lo], scenario.controls, [hi]])
        cand = cand[(cand >= lo) & (cand <= hi)]
        states = tuple(np.full(cand.shape, c) for c in x)
        gain = model.combine_gain(model.gain_components(states, cand), t, scenario)
        nxt = model.dynamics(states, cand)
        cont = interpolate_value(value_functions[t + 1], nxt)
        total = scenario.rho**t * gain + cont
        return float(cand[cand.size - 1 - int(np.argmax(total[::-1]))])

    try:
        return _rollout(model, x0, scenario, pick)
    except InfeasibleError:
        raise
    except ValueError as exc:
        raise NumericError(f"policy rollout failed: {exc}") from exc


def evaluate_open_loop(model: DpModel, controls, x0, scenario: Scenario) -> Trajectory:
    """Value a fixed control sequence from ``x0``.

    Controls must be admissible at every replayed state; the first violation
    raises :class:`InfeasibleError` carrying the stage index.
    """
    controls = np.asarray(controls, dtype=float)
    if controls.ndim != 1 or controls.size < scenario.horizon:
        raise ConfigError(
            f"need {scenario.horizon} controls, got {controls.size}"
        )

    def pick(t: int, x) -> float:
        u = float(controls[t])
        lo, hi = model.admissible_controls(tuple(np.float64(c) for c in x))
        lo = float(lo)
        hi = float(hi)
        slack = 1e-9 * max(1.0, abs(hi))
        if u < lo - slack or u > hi + slack:
            raise InfeasibleError(
                f"control {u} outside admissible [{lo}, {hi}]", stage=t
            )
        return min(max(u, lo), hi)

    return _rollout(model, x0, scenario, pick)
