"""Black-oil PVT model: fluid property curves and the pore-volume law.

The four property curves convert standard volumes (Sm3) into in-situ
reservoir volumes (m3) at a given pressure:

* ``b_o`` oil formation volume factor (includes dissolved gas),
* ``b_g`` gas formation volume factor,
* ``b_w`` water formation volume factor,
* ``r_s`` solution gas-oil ratio (standard gas volume dissolved per
  standard oil volume).

All curves are piecewise linear in pressure (Bara). Pore volume follows an
exponential compaction law ``v_0 * exp(c_f * p)`` or, inside the full
five-dimensional dynamics, its first-order linearization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .piecewise import PiecewiseLinear

__all__ = [
    "PvtModel",
    "pore_volume_exact",
    "pore_volume_linearized",
    "validate_decreasing_mixture",
    "mixture_volume",
    "load_pvt_table",
    "write_pvt_table",
]


@dataclass(frozen=True)
class PvtModel:
    """Fluid property curves plus the pore-volume parameters of one tank.

    Parameters
    ----------
    b_o, b_g, b_w, r_s : PiecewiseLinear
        Property curves versus pressure (Bara). ``b_g`` and ``b_w`` must be
        nonincreasing (fluids compress), ``b_o``/``r_s`` are unconstrained
        here; decreasingness of a concrete fluid mixture is checked per
        instance with :func:`validate_decreasing_mixture`.
    c_f : float
        Pore compressibility (1/Bara), nonnegative.
    v_0 : float
        Asymptotic pore volume at zero pressure (m3), positive.
    """

    b_o: PiecewiseLinear
    b_g: PiecewiseLinear
    b_w: PiecewiseLinear
    r_s: PiecewiseLinear
    c_f: float
    v_0: float

    def __post_init__(self):
        if self.c_f < 0:
            raise ValueError("pore compressibility c_f must be nonnegative")
        if self.v_0 <= 0:
            raise ValueError("asymptotic pore volume v_0 must be positive")
        for name in ("b_o", "b_g", "b_w"):
            curve = getattr(self, name)
            if np.any(curve.y <= 0):
                raise ValueError(f"{name} must be strictly positive everywhere")
        if np.any(self.r_s.y < 0):
            raise ValueError("r_s must be nonnegative")
        if not self.b_g.is_nonincreasing():
            raise ValueError("b_g must be nonincreasing in pressure")
        if not self.b_w.is_nonincreasing():
            raise ValueError("b_w must be nonincreasing in pressure")

    @property
    def pressure_range(self) -> tuple[float, float]:
        """Hull of the breakpoint pressures of the four curves."""
        lo = min(c.x[0] for c in (self.b_o, self.b_g, self.b_w, self.r_s))
        hi = max(c.x[-1] for c in (self.b_o, self.b_g, self.b_w, self.r_s))
        return float(lo), float(hi)


def pore_volume_exact(pvt: PvtModel, p):
    """Pore volume ``v_0 * exp(c_f * p)`` in m3 at pressure ``p`` (Bara)."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("pressure must be nonnegative")
    out = pvt.v_0 * np.exp(pvt.c_f * p)
    return float(out) if out.ndim == 0 else out


def pore_volume_linearized(v_p: float, p_old: float, p_new: float, c_f: float):
    """First-order pore volume update ``v_p * (1 + c_f * (p_new - p_old))``."""
    if v_p <= 0:
        raise ValueError("pore volume must be positive")
    out = v_p * (1.0 + c_f * (p_new - p_old))
    if np.any(np.asarray(out) <= 0):
        raise NumericError(
            "linearized pore volume collapsed to a nonpositive value; "
            "pressure step too large for the linearized compaction law"
        )
    return out


def mixture_volume(pvt: PvtModel, v_o: float, v_g: float, v_w: float, p):
    """In-situ volume of the fluid mixture at pressure ``p``:
    ``v_o*b_o(p) + v_g*b_g(p) + v_w*b_w(p)`` (m3)."""
    return v_o * pvt.b_o(p) + v_g * pvt.b_g(p) + v_w * pvt.b_w(p)


def validate_decreasing_mixture(
    pvt: PvtModel,
    v_o: float,
    v_g: float,
    v_w: float,
    p_range: tuple[float, float],
    n_samples: int = 64,
) -> bool:
    """Check that the mixture volume is nonincreasing in pressure.

    Samples ``n_samples`` uniform pressures over ``p_range`` plus every curve
    breakpoint inside the range; since all curves are piecewise linear this
    makes the check exact. A nonincreasing mixture guarantees the implicit
    pressure equation of the tank dynamics has at most one root.
    """
    if min(v_o, v_g, v_w) < 0:
        raise ValueError("fluid volumes must be nonnegative")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    lo, hi = float(p_range[0]), float(p_range[1])
    if hi <= lo:
        raise ValueError("empty pressure range")
    ps = np.linspace(lo, hi, n_samples)
    knots = np.concatenate([c.x for c in (pvt.b_o, pvt.b_g, pvt.b_w)])
    knots = knots[(knots > lo) & (knots < hi)]
    ps = np.unique(np.concatenate([ps, knots]))
    vol = mixture_volume(pvt, v_o, v_g, v_w, ps)
    scale = max(float(np.max(np.abs(vol))), 1.0)
    return bool(np.all(np.diff(vol) <= 1e-12 * scale))


def load_pvt_table(path) -> dict[str, PiecewiseLinear]:
    """Read property curves from a columnar text file.

    The file carries a header row followed by comma-separated numeric rows::

        pressure,b_o,b_g,b_w,r_s
        1.0,1.05,1.2,1.03,0.0
        ...

    Returns a dict with keys ``b_o``, ``b_g``, ``b_w``, ``r_s``.
    """
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names or ()
    required = ("pressure", "b_o", "b_g", "b_w", "r_s")
    missing = [c for c in required if c not in names]
    if missing:
        raise ValueError(f"PVT table {path} is missing columns: {missing}")
    p = np.atleast_1d(data["pressure"])
    order = np.argsort(p)
    return {
        name: PiecewiseLinear(p[order], np.atleast_1d(data[name])[order])
        for name in ("b_o", "b_g", "b_w", "r_s")
    }


def write_pvt_table(path, b_o, b_g, b_w, r_s, pressures=None) -> None:
    """Write curves to the columnar format read by :func:`load_pvt_table`.

    Curves are resampled onto the union of their breakpoints (or onto
    ``pressures`` if given), which is lossless for piecewise-linear data.
    """
    if pressures is None:
        pressures = np.unique(np.concatenate([c.x for c in (b_o, b_g, b_w, r_s)]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("pressure,b_o,b_g,b_w,r_s\n")
        for p in pressures:
            row = (p, b_o(p), b_g(p), b_w(p), r_s(p))
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
