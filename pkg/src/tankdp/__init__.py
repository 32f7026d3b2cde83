"""Production scheduling for tank-like reservoirs.

Material-balance reservoir models (full five-dimensional black-oil tank and
its one/two-dimensional reductions) solved as finite-horizon optimal control
problems by backward dynamic programming, plus the classical decline-curve
formulation for comparison.
"""

from .decline import (
    DeclineCurve,
    EquivalenceReport,
    check_equivalence_1d,
    compare_decline_vs_mb,
    generate_decline_curve,
    generate_deliverability_curve,
    solve_decline_dp,
)
from .dp import (
    DpModel,
    Grid,
    Policy,
    Scenario,
    Trajectory,
    ValueFunction,
    evaluate_open_loop,
    interpolate_value,
    simulate_policy,
    solve_dp,
    stage_gain,
)
from .errors import ConfigError, InfeasibleError, NumericError, TankDpError
from .models import (
    gas_one_tank_model,
    gas_two_tank_model,
    stage_gain_gas,
    stage_gain_wi,
    water_injection_model,
)
from .piecewise import PiecewiseLinear, eval_piecewise
from .pvt import (
    PvtModel,
    load_pvt_table,
    mixture_volume,
    pore_volume_exact,
    pore_volume_linearized,
    validate_decreasing_mixture,
    write_pvt_table,
)
from .reduced import (
    GasTankParams,
    TwoTankParams,
    WaterInjParams,
    admissible_controls_1t,
    gas_production_1t,
    gas_volume_floor,
    project_1t_to_2t,
    psi_one_tank,
    step_one_tank,
    step_two_tanks,
    step_water_injection,
    wi_admissible_interval,
    wi_oil_in_place,
    wi_productions,
)
from .tank import (
    IprModel,
    Production,
    TankState,
    saturations,
    solve_pressure_xi,
    step_dynamics,
    volume_residual,
    volume_tolerance,
    well_production,
)

__version__ = "0.1.0"
