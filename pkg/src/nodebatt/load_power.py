"""Power dissipated in a resistive load fed by the battery.

Resistances are in ohms here; kilo-ohm inputs are converted at the CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DomainError
from .polyfit import DischargeCurve, evaluate

MW_PER_W = 1000.0
OHMS_PER_KOHM = 1000.0


def _check_r(r: float) -> None:
    if not (math.isfinite(r) and r > 0):
        raise DomainError(f"load resistance must be finite and > 0 ohm, got {r!r}")


@dataclass(frozen=True)
class LoadProfile:
    resistance: float

    def __post_init__(self) -> None:
        _check_r(self.resistance)

    @classmethod
    def from_kohm(cls, kohm: float) -> "LoadProfile":
        return cls(kohm * OHMS_PER_KOHM)


@dataclass(frozen=True)
class PowerSeries:
    """Power (mW) against time (h)."""

    t: tuple[float, ...] = ()
    p: tuple[float, ...] = ()
    label: str = ""

    def __post_init__(self) -> None:
        if len(self.t) != len(self.p):
            raise DomainError("t and p must have the same length")
        if any(b <= a for a, b in zip(self.t, self.t[1:])):
            raise DomainError("series times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.t)

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.t, self.p))


def instantaneous_power(v: float, r: float) -> float:
    """``v**2 / r`` in milliwatts."""
    _check_r(r)
    return v * v / r * MW_PER_W


def current_draw(v: float, r: float) -> float:
    """Ohm's-law current ``v / r`` in milliamperes."""
    _check_r(r)
    return v / r * MW_PER_W


def power_curve(
    curve: DischargeCurve, r: float, t_grid: Sequence[float], label: str = ""
) -> PowerSeries:
    """Power in the load over time as the battery voltage follows `curve`."""
    _check_r(r)
    ts = tuple(float(t) for t in t_grid)
    ps = tuple(instantaneous_power(evaluate(curve, t), r) for t in ts)
    return PowerSeries(ts, ps, label)


def load_sweep(v: float, r_values: Iterable[float]) -> list[tuple[float, float]]:
    """``(r, power)`` pairs at a fixed battery voltage."""
    rs = [float(r) for r in r_values]
    for r in rs:
        _check_r(r)
    return [(r, instantaneous_power(v, r)) for r in rs]
