"""Battery discharge modelling and lifetime simulation for low-power
wireless sensor nodes."""

from .battery_models import (
    BatterySpec,
    RateCapacityModel,
    RelaxationModel,
    effective_capacity,
    peukert_lifetime,
    rate_factor_from_peukert,
    relaxation_recovery,
    self_discharge_residual,
)
from .energy_model import (
    EnergyLedger,
    PowerBreakdown,
    energy_consumed,
    power_from_energy,
    residual_energy,
    total_power,
)
from .load_power import (
    LoadProfile,
    PowerSeries,
    current_draw,
    instantaneous_power,
    load_sweep,
    power_curve,
)
from .node_sim import (
    DutyCycleProfile,
    ResistiveSource,
    SimConfig,
    SimTrace,
    average_current,
    lifetime,
    simulate,
)
from .polyfit import (
    DischargeCurve,
    DischargeSample,
    evaluate,
    fit,
    preset,
    rmse,
    time_to_voltage,
)

__version__ = "0.1.0"
