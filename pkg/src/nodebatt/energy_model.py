"""Node power and energy bookkeeping.

Units are fixed: milliwatts, milliwatt-hours and hours.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


def _check_nonneg(name: str, value: float) -> None:
    if not math.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class PowerBreakdown:
    """Per-state power draw of one node, in mW."""

    p_tx: float
    p_rx: float
    p_sleep: float
    p_idle: float

    def __post_init__(self) -> None:
        for name in ("p_tx", "p_rx", "p_sleep", "p_idle"):
            _check_nonneg(name, getattr(self, name))


@dataclass(frozen=True)
class EnergyLedger:
    """Initial and consumed energy of a battery, in mWh."""

    e_init: float
    e_consumed: float

    def __post_init__(self) -> None:
        _check_nonneg("e_init", self.e_init)
        _check_nonneg("e_consumed", self.e_consumed)

    @property
    def unclamped_residual(self) -> float:
        return self.e_init - self.e_consumed


def total_power(b: PowerBreakdown) -> float:
    """Total node power: transmit + receive + sleep + idle."""
    return b.p_tx + b.p_rx + b.p_sleep + b.p_idle


def energy_consumed(p: float, t: float) -> float:
    """Energy in mWh drawn at constant power `p` (mW) for `t` hours."""
    _check_nonneg("power", p)
    _check_nonneg("time", t)
    return p * t


def power_from_energy(e: float, t: float) -> float:
    """Average power in mW that delivers energy `e` (mWh) over `t` hours."""
    _check_nonneg("energy", e)
    if not math.isfinite(t) or t <= 0:
        raise DomainError(f"time must be finite and > 0, got {t!r}")
    return e / t


def residual_energy(ledger: EnergyLedger) -> float:
    """Energy left in the battery, clamped at zero."""
    return max(ledger.unclamped_residual, 0.0)
