"""Piecewise-linear functions of one variable.

These are the workhorse curves of the whole library: fluid property tables,
inflow performance, water-cut and decline curves are all piecewise linear.
Evaluation interpolates linearly between breakpoints and clamps flat outside
the breakpoint range, so a curve never extrapolates to nonphysical values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["PiecewiseLinear", "eval_piecewise"]

# Relative slack used when checking monotonicity of tabulated values.
_MONO_RTOL = 1e-12


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear interpolant through ``(x, y)`` breakpoints, clamped outside.

    Parameters
    ----------
    x : np.ndarray
        Breakpoint abscissae, strictly increasing, at least two values.
    y : np.ndarray
        Breakpoint ordinates, same length as ``x``.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
            raise ValueError("breakpoints must be two 1-D arrays of equal length")
        if x.size < 2:
            raise ValueError("at least two breakpoints are required")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
            raise ValueError("breakpoints must be finite")
        if np.any(np.diff(x) <= 0):
            raise ValueError("breakpoint abscissae must be strictly increasing")

    @classmethod
    def from_points(cls, points) -> "PiecewiseLinear":
        """Build from an iterable of ``(x, y)`` pairs."""
        pts = np.asarray(list(points), dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("expected an iterable of (x, y) pairs")
        return cls(pts[:, 0], pts[:, 1])

    def __call__(self, x):
        """Evaluate at ``x`` (scalar or array), clamped outside the range."""
        return np.interp(x, self.x, self.y)

    @property
    def n_segments(self) -> int:
        return self.x.size - 1

    def slopes(self) -> np.ndarray:
        """Per-segment slopes."""
        return np.diff(self.y) / np.diff(self.x)

    def is_nondecreasing(self) -> bool:
        scale = max(float(np.max(np.abs(self.y))), 1.0)
        return bool(np.all(np.diff(self.y) >= -_MONO_RTOL * scale))

    def is_nonincreasing(self) -> bool:
        scale = max(float(np.max(np.abs(self.y))), 1.0)
        return bool(np.all(np.diff(self.y) <= _MONO_RTOL * scale))

    def inverse_nondecreasing(self, value):
        """Leftmost preimage of ``value`` for a nondecreasing curve.

        Values outside ``[y[0], y[-1]]`` raise, since clamped evaluation can
        never reach them. Flat runs map to their left edge.
        """
        if not self.is_nondecreasing():
            raise ValueError("inverse requires a nondecreasing curve")
        scalar = np.asarray(value).ndim == 0
        v = np.atleast_1d(np.asarray(value, dtype=float)).copy()
        x, y = self.x, self.y
        span = max(float(y[-1] - y[0]), 1.0)
        if np.any(v < y[0] - 1e-12 * span) or np.any(v > y[-1] + 1e-12 * span):
            raise ValueError("value outside the attainable range of the curve")
        np.clip(v, y[0], y[-1], out=v)
        idx = np.minimum(np.searchsorted(y, v, side="left"), y.size - 1)
        out = np.empty_like(v)
        exact = (y[idx] == v) | (idx == 0)
        out[exact] = x[idx[exact]]
        inner = ~exact
        if np.any(inner):
            i = idx[inner]
            # searchsorted('left') guarantees y[i-1] < v < y[i] here
            frac = (v[inner] - y[i - 1]) / (y[i] - y[i - 1])
            out[inner] = x[i - 1] + frac * (x[i] - x[i - 1])
        return float(out[0]) if scalar else out


def eval_piecewise(f: PiecewiseLinear, x):
    """Evaluate ``f`` at ``x``: exact at breakpoints, linear between them,
    clamped to the boundary ordinate outside the breakpoint range."""
    return f(x)
