"""Analytic battery models for coin cells.

Covers the Peukert lifetime law, the rate-capacity factor ``k``, an
exponential relaxation (recovery) model and compounding self-discharge.

Peukert's law is applied in the literal form ``T = C / I**n`` with ``C`` in
mAh and ``I`` in mA.  For ``n > 1`` this is not dimensionally consistent:
below 1 mA a larger exponent *lengthens* the predicted lifetime.  The usual
rated-time-normalised form, ``T = H * (C / (I * H))**n``, is not used here.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DomainError

HOURS_PER_YEAR = 8760.0

#: Peukert exponents above this are accepted but flagged.
PEUKERT_TYPICAL_MAX = 1.3


class ModelRangeWarning(UserWarning):
    """A parameter was accepted but lies outside the model's usual range."""


@dataclass(frozen=True)
class BatterySpec:
    """Static description of a cell.

    Parameters
    ----------
    capacity_mah : float
        Rated capacity in mAh.
    nominal_voltage : float
        Nominal terminal voltage in volts.
    peukert_exponent : float
        ``n >= 1``; values above 1.3 are accepted with a warning.
    self_discharge_annual : float
        Fraction of capacity lost per year with no load, in ``[0, 1)``.
    """

    capacity_mah: float
    nominal_voltage: float = 3.0
    peukert_exponent: float = 1.0
    self_discharge_annual: float = 0.01

    def __post_init__(self) -> None:
        if not (math.isfinite(self.capacity_mah) and self.capacity_mah > 0):
            raise DomainError(f"capacity_mah must be > 0, got {self.capacity_mah!r}")
        if not (math.isfinite(self.nominal_voltage) and self.nominal_voltage > 0):
            raise DomainError(
                f"nominal_voltage must be > 0, got {self.nominal_voltage!r}"
            )
        if not (math.isfinite(self.peukert_exponent) and self.peukert_exponent >= 1):
            raise DomainError(
                f"peukert_exponent must be >= 1, got {self.peukert_exponent!r}"
            )
        if not 0 <= self.self_discharge_annual < 1:
            raise DomainError(
                "self_discharge_annual must be in [0, 1), "
                f"got {self.self_discharge_annual!r}"
            )
        if self.exponent_out_of_range:
            warnings.warn(
                f"Peukert exponent {self.peukert_exponent} exceeds the typical "
                f"maximum of {PEUKERT_TYPICAL_MAX}",
                ModelRangeWarning,
                stacklevel=3,
            )

    @property
    def exponent_out_of_range(self) -> bool:
        return self.peukert_exponent > PEUKERT_TYPICAL_MAX


@dataclass(frozen=True)
class RateCapacityModel:
    """Ratio of effective to maximum capacity, ``0 < k <= 1``."""

    k: float

    def __post_init__(self) -> None:
        if not 0 < self.k <= 1:
            raise DomainError(f"k must be in (0, 1], got {self.k!r}")


@dataclass(frozen=True)
class RelaxationModel:
    """Exponential recovery of charge made unavailable by high-rate discharge.

    ``recoverable_fraction`` bounds how much of the unavailable pool can come
    back; ``recovery_time_constant`` (hours) sets how fast it does.
    """

    recoverable_fraction: float = 0.1
    recovery_time_constant: float = 10.0

    def __post_init__(self) -> None:
        if not 0 <= self.recoverable_fraction <= 1:
            raise DomainError(
                "recoverable_fraction must be in [0, 1], "
                f"got {self.recoverable_fraction!r}"
            )
        if not self.recovery_time_constant > 0:
            raise DomainError(
                "recovery_time_constant must be > 0, "
                f"got {self.recovery_time_constant!r}"
            )


def _check_load_and_exponent(load_ma: float, n: float) -> None:
    if not (math.isfinite(load_ma) and load_ma > 0):
        raise DomainError(f"load current must be > 0 mA, got {load_ma!r}")
    if not (math.isfinite(n) and n >= 1):
        raise DomainError(f"Peukert exponent must be >= 1, got {n!r}")


def peukert_lifetime(capacity_mah: float, load_ma: float, n: float = 1.0) -> float:
    """Battery lifetime in hours, ``capacity / load**n``.

    >>> round(peukert_lifetime(220, 0.248, 1), 1)
    887.1
    """
    if not (math.isfinite(capacity_mah) and capacity_mah > 0):
        raise DomainError(f"capacity must be > 0 mAh, got {capacity_mah!r}")
    _check_load_and_exponent(load_ma, n)
    if n == 1:
        return capacity_mah / load_ma
    return capacity_mah / load_ma**n


def effective_capacity(capacity_mah: float, model: RateCapacityModel) -> float:
    return model.k * capacity_mah


def peukert_drain_factor(load_ma: float, n: float) -> float:
    """Multiplier on drawn charge that makes a coulomb counter obey Peukert.

    Draining ``load * factor`` mAh per hour from ``C`` empties it after
    ``C / load**n`` hours.  This is ``1/k`` before any clamping.
    """
    _check_load_and_exponent(load_ma, n)
    if n == 1:
        return 1.0
    return load_ma ** (n - 1)


def rate_factor_from_peukert(load_ma: float, n: float) -> RateCapacityModel:
    """Rate-capacity factor ``k = load**(1 - n)`` equivalent to Peukert's law.

    Under the literal mA convention, loads below 1 mA give ``k > 1``; that is
    clamped to 1 with a :class:`ModelRangeWarning` since ``k`` is defined as a
    reduction ratio.
    """
    _check_load_and_exponent(load_ma, n)
    if n == 1:
        return RateCapacityModel(1.0)
    k = load_ma ** (1 - n)
    if k > 1:
        warnings.warn(
            f"rate factor {k:.6g} for {load_ma} mA exceeds 1; clamped to 1",
            ModelRangeWarning,
            stacklevel=2,
        )
        k = 1.0
    return RateCapacityModel(k)


def relaxation_recovery(
    unavailable_mah: float, idle_hours: float, model: RelaxationModel
) -> float:
    """Charge (mAh) recovered from the unavailable pool after a rest period.

    ``fraction * unavailable * (1 - exp(-idle / tau))``.  Zero for no rest,
    approaching ``fraction * unavailable`` as the rest grows.
    """
    if unavailable_mah < 0:
        raise DomainError(f"unavailable charge must be >= 0, got {unavailable_mah!r}")
    if idle_hours < 0:
        raise DomainError(f"idle time must be >= 0, got {idle_hours!r}")
    if idle_hours == 0 or unavailable_mah == 0:
        return 0.0
    settled = -math.expm1(-idle_hours / model.recovery_time_constant)
    return model.recoverable_fraction * unavailable_mah * settled


def self_discharge_residual(
    capacity_mah: float, elapsed_hours: float, annual_fraction: float = 0.01
) -> float:
    """Capacity left after `elapsed_hours` of shelf time.

    Compounds so that exactly one year (8760 h) loses `annual_fraction`.
    """
    if capacity_mah < 0:
        raise DomainError(f"capacity must be >= 0, got {capacity_mah!r}")
    if elapsed_hours < 0:
        raise DomainError(f"elapsed time must be >= 0, got {elapsed_hours!r}")
    if not 0 <= annual_fraction < 1:
        raise DomainError(f"annual_fraction must be in [0, 1), got {annual_fraction!r}")
    if elapsed_hours == 0 or annual_fraction == 0:
        return capacity_mah
    return capacity_mah * (1.0 - annual_fraction) ** (elapsed_hours / HOURS_PER_YEAR)
