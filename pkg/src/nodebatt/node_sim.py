"""Fixed-step simulation of a single node draining a coin cell.

The battery is a charge counter (mAh).  Each step removes the charge drawn
by the source, either a duty cycle of per-state currents or a resistive load
fed by a voltage curve, optionally modified by Peukert scaling, a relaxation
pool and self-discharge.

Within a step the duty-cycle states are visited in order tx, rx, sleep,
idle for their fraction of the step; tx and rx are the *active* states.
With relaxation enabled, active drain also moves ``recoverable_fraction``
times as much charge out of reach into an unavailable pool, and the rest
period of each step returns part of it via :func:`relaxation_recovery`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional, Union

from .battery_models import (
    HOURS_PER_YEAR,
    BatterySpec,
    RelaxationModel,
    relaxation_recovery,
)
from .errors import DomainError
from .load_power import LoadProfile, current_draw
from .polyfit import DischargeCurve, evaluate

STATES = ("tx", "rx", "sleep", "idle")

EXHAUSTED = "exhausted"
CUTOFF_REACHED = "cutoff_reached"
HORIZON = "horizon"

DEFAULT_TIMESTEP = 0.1
DEFAULT_HORIZON = 10000.0

# Residual charge below this fraction of capacity counts as empty; absorbs
# rounding left over from summing many equal drains.
_EMPTY_RTOL = 1e-9


@dataclass(frozen=True)
class DutyCycleProfile:
    """Per-state currents (mA) and the fraction of time spent in each state."""

    tx_current: float
    rx_current: float
    sleep_current: float
    idle_current: float
    fraction_tx: float
    fraction_rx: float
    fraction_sleep: float
    fraction_idle: float

    def __post_init__(self) -> None:
        for s in STATES:
            cur = getattr(self, f"{s}_current")
            frac = getattr(self, f"fraction_{s}")
            if not (math.isfinite(cur) and cur >= 0):
                raise DomainError(f"{s}_current must be >= 0, got {cur!r}")
            if not (math.isfinite(frac) and frac >= 0):
                raise DomainError(f"fraction_{s} must be >= 0, got {frac!r}")
        total = sum(self.fractions)
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"state fractions must sum to 1, got {total!r}")

    @classmethod
    def constant(cls, current_ma: float) -> "DutyCycleProfile":
        """A node that draws `current_ma` continuously (modelled as always tx)."""
        return cls(current_ma, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0)

    @property
    def currents(self) -> tuple[float, float, float, float]:
        return (self.tx_current, self.rx_current, self.sleep_current, self.idle_current)

    @property
    def fractions(self) -> tuple[float, float, float, float]:
        return (self.fraction_tx, self.fraction_rx, self.fraction_sleep, self.fraction_idle)

    @property
    def dominant_state(self) -> str:
        fr = self.fractions
        return STATES[fr.index(max(fr))]


def average_current(profile: DutyCycleProfile) -> float:
    """Time-weighted mean current of a duty cycle, in mA."""
    return sum(f * i for f, i in zip(profile.fractions, profile.currents))


@dataclass(frozen=True)
class ResistiveSource:
    """A fixed resistor across the battery.

    The terminal voltage comes from `curve` evaluated at elapsed time, or is
    held at `voltage`.  Exactly one of the two must be given.
    """

    load: LoadProfile
    curve: Optional[DischargeCurve] = None
    voltage: Optional[float] = None

    def __post_init__(self) -> None:
        if (self.curve is None) == (self.voltage is None):
            raise DomainError("resistive source needs exactly one of curve or voltage")
        if self.voltage is not None and not math.isfinite(self.voltage):
            raise DomainError(f"voltage must be finite, got {self.voltage!r}")

    def voltage_at(self, t: float) -> float:
        if self.curve is not None:
            return evaluate(self.curve, t)
        return self.voltage


Source = Union[DutyCycleProfile, ResistiveSource]


@dataclass(frozen=True)
class SimConfig:
    """Everything :func:`simulate` needs.

    In duty-cycle mode a voltage is reported only when `curve` is attached;
    the curve is then read at ``t * average_current / reference_current``
    (or at ``t`` when no reference current is given).
    """

    battery: BatterySpec
    source: Source
    timestep: float = DEFAULT_TIMESTEP
    horizon: float = DEFAULT_HORIZON
    cutoff_voltage: Optional[float] = None
    peukert_enabled: bool = False
    relaxation_enabled: bool = False
    relaxation: RelaxationModel = field(default_factory=RelaxationModel)
    self_discharge_enabled: bool = False
    curve: Optional[DischargeCurve] = None
    reference_current: Optional[float] = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.timestep) and self.timestep > 0):
            raise DomainError(f"timestep must be > 0, got {self.timestep!r}")
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise DomainError(f"horizon must be > 0, got {self.horizon!r}")
        if self.timestep > self.horizon:
            raise DomainError("timestep must not exceed horizon")
        if self.reference_current is not None and not self.reference_current > 0:
            raise DomainError(
                f"reference_current must be > 0, got {self.reference_current!r}"
            )
        if not isinstance(self.source, (DutyCycleProfile, ResistiveSource)):
            raise DomainError(f"unsupported source {type(self.source).__name__}")


class SimRecord(NamedTuple):
    t: float
    residual_capacity: float
    voltage: Optional[float]
    state: str
    unavailable_charge: float
    drained: float
    self_discharged: float


@dataclass
class SimTrace:
    """Per-step record of one run.

    `drained` is the cumulative charge removed to feed the load (after
    Peukert scaling) and `self_discharged` the cumulative shelf loss, so
    ``drained + residual + unavailable + self_discharged`` stays equal to the
    initial capacity.
    """

    initial_capacity: float
    timestep: float
    horizon: float
    t: list[float] = field(default_factory=list)
    residual_capacity: list[float] = field(default_factory=list)
    voltage: list[Optional[float]] = field(default_factory=list)
    state: list[str] = field(default_factory=list)
    unavailable_charge: list[float] = field(default_factory=list)
    drained: list[float] = field(default_factory=list)
    self_discharged: list[float] = field(default_factory=list)
    termination_reason: str = HORIZON

    def __len__(self) -> int:
        return len(self.t)

    def append(self, rec: SimRecord) -> None:
        self.t.append(rec.t)
        self.residual_capacity.append(rec.residual_capacity)
        self.voltage.append(rec.voltage)
        self.state.append(rec.state)
        self.unavailable_charge.append(rec.unavailable_charge)
        self.drained.append(rec.drained)
        self.self_discharged.append(rec.self_discharged)

    def records(self) -> Iterator[SimRecord]:
        for row in zip(
            self.t,
            self.residual_capacity,
            self.voltage,
            self.state,
            self.unavailable_charge,
            self.drained,
            self.self_discharged,
        ):
            yield SimRecord(*row)

    @property
    def end_time(self) -> float:
        return self.t[-1]


class Lifetime(NamedTuple):
    """Simulated lifetime; when `censored`, `hours` is only a lower bound."""

    hours: float
    censored: bool


def lifetime(trace: SimTrace) -> Lifetime:
    if not len(trace):
        raise DomainError("empty trace")
    return Lifetime(trace.end_time, trace.termination_reason == HORIZON)


def _n_steps(horizon: float, dt: float) -> int:
    return max(1, int(math.floor(horizon / dt + 1e-9)))


def simulate(config: SimConfig) -> SimTrace:
    """Step the battery forward until it is empty, hits the cutoff voltage,
    or reaches the horizon."""
    bat = config.battery
    src = config.source
    dt = config.timestep
    n_exp = bat.peukert_exponent if config.peukert_enabled else 1.0
    relax = config.relaxation if config.relaxation_enabled else None
    keep_per_step = (
        (1.0 - bat.self_discharge_annual) ** (dt / HOURS_PER_YEAR)
        if config.self_discharge_enabled
        else 1.0
    )
    empty_tol = _EMPTY_RTOL * bat.capacity_mah

    def scaled(i_ma: float) -> float:
        # Peukert: charge removed per hour is I**n rather than I.
        if n_exp == 1.0 or i_ma <= 0:
            return i_ma
        return i_ma**n_exp

    if isinstance(src, DutyCycleProfile):
        label = src.dominant_state
        f_tx, f_rx, f_sleep, f_idle = src.fractions
        i_tx, i_rx, i_sleep, i_idle = src.currents
        duty_active = (f_tx * scaled(i_tx) + f_rx * scaled(i_rx)) * dt
        duty_rest = (f_sleep * scaled(i_sleep) + f_idle * scaled(i_idle)) * dt
        rest_time = (f_sleep + f_idle) * dt
        if config.curve is not None:
            ratio = (
                average_current(src) / config.reference_current
                if config.reference_current
                else 1.0
            )
            curve = config.curve

            def voltage_at(t: float) -> Optional[float]:
                return evaluate(curve, t * ratio)

        else:

            def voltage_at(t: float) -> Optional[float]:
                return None

    else:
        label = "load"
        rest_time = 0.0
        duty_rest = 0.0
        voltage_at = src.voltage_at
        resistance = src.load.resistance

    trace = SimTrace(bat.capacity_mah, dt, config.horizon)
    residual = bat.capacity_mah
    pool = 0.0
    drained = 0.0
    shelf_loss = 0.0
    cutoff = config.cutoff_voltage

    v = voltage_at(0.0)
    trace.append(SimRecord(0.0, residual, v, label, pool, drained, shelf_loss))
    if cutoff is not None and v is not None and v <= cutoff:
        trace.termination_reason = CUTOFF_REACHED
        return trace

    for k in range(1, _n_steps(config.horizon, dt) + 1):
        t_end = k * dt
        if isinstance(src, DutyCycleProfile):
            active = duty_active
        else:
            i_load = max(current_draw(voltage_at(t_end - dt), resistance), 0.0)
            active = scaled(i_load) * dt
        demand = active + duty_rest
        divert = relax.recoverable_fraction * active if relax is not None else 0.0

        if residual - demand - divert <= empty_tol:
            used = min(demand, residual)
            drained += used
            pool += residual - used
            residual = 0.0
            trace.append(
                SimRecord(t_end, residual, voltage_at(t_end), label, pool, drained, shelf_loss)
            )
            trace.termination_reason = EXHAUSTED
            return trace

        residual -= demand + divert
        drained += demand
        pool += divert
        if relax is not None and rest_time > 0 and pool > 0:
            back = relaxation_recovery(pool, rest_time, relax)
            pool -= back
            residual += back
        if keep_per_step != 1.0:
            kept = residual * keep_per_step
            shelf_loss += residual - kept
            residual = kept

        v = voltage_at(t_end)
        trace.append(SimRecord(t_end, residual, v, label, pool, drained, shelf_loss))
        if cutoff is not None and v is not None and v <= cutoff:
            trace.termination_reason = CUTOFF_REACHED
            return trace

    trace.termination_reason = HORIZON
    return trace
