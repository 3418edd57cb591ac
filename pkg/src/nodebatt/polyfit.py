"""Polynomial discharge curves: least-squares fitting, evaluation and
threshold-crossing search.

A discharge curve models terminal voltage as ``V(t) = sum(a_i * t**i)``
with ``t`` in hours.  Coefficients are always stored in ascending-power
order, ``(a_0, a_1, ..., a_m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import DomainError, InsufficientSamplesError, RankDeficientError

DEFAULT_DEGREE = 4

SCAN_STEP_HOURS = 1.0
BISECTION_TOL_HOURS = 1e-3


class DischargeSample(NamedTuple):
    t: float
    v: float


def make_sample(t: float, v: float) -> DischargeSample:
    """Validated constructor for :class:`DischargeSample`."""
    t, v = float(t), float(v)
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"sample time must be finite and >= 0, got {t!r}")
    if not math.isfinite(v):
        raise DomainError(f"sample voltage must be finite, got {v!r}")
    return DischargeSample(t, v)


@dataclass(frozen=True)
class DischargeCurve:
    """Voltage-versus-time polynomial with the time range it was fitted on.

    ``rmse`` is ``None`` for curves that did not come out of :func:`fit`
    (e.g. the published presets).
    """

    coeffs: tuple[float, ...]
    t_min: float
    t_max: float
    rmse: Optional[float] = None
    name: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs:
            raise DomainError("a discharge curve needs at least one coefficient")
        if self.t_min > self.t_max:
            raise DomainError(f"empty fit domain [{self.t_min}, {self.t_max}]")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def fit_domain(self) -> tuple[float, float]:
        return (self.t_min, self.t_max)

    def in_domain(self, t: float) -> bool:
        return self.t_min <= t <= self.t_max

    def __call__(self, t):
        return evaluate(self, t)

    def to_dict(self) -> dict:
        d = {
            "degree": self.degree,
            "coeffs": list(self.coeffs),
            "t_min": self.t_min,
            "t_max": self.t_max,
        }
        if self.rmse is not None:
            d["rmse"] = self.rmse
        return d

    @classmethod
    def from_dict(cls, d: dict, name: Optional[str] = None) -> "DischargeCurve":
        coeffs = d["coeffs"]
        if "degree" in d and d["degree"] != len(coeffs) - 1:
            raise DomainError(
                f"degree {d['degree']} does not match {len(coeffs)} coefficients"
            )
        return cls(
            coeffs=tuple(coeffs),
            t_min=float(d["t_min"]),
            t_max=float(d["t_max"]),
            rmse=d.get("rmse"),
            name=name,
        )


# Coefficient sets published for two coin-cell datasheets.  The 1 s
# transmission curve and the 7.5 kOhm curve are stored exactly as printed even
# though neither reproduces the decline described alongside them.
_PRESETS: dict[str, tuple[float, ...]] = {
    "freescale_1s": (3.16, 0.00309, 1.125e-5, -1.36e-8, 4.255e-12),
    "farnell_15k": (3.292, -0.0012, -2.464e-6, 8.92e-9, -6.3e-12),
    "farnell_7k5": (3.292, -0.0015, 1.32e-5, 4.63e-9, -4.17e-11),
}
PRESET_DOMAIN = (0.0, 1200.0)
PRESET_NAMES = tuple(_PRESETS)


def preset(name: str) -> DischargeCurve:
    """Return one of the published coefficient sets by name."""
    try:
        coeffs = _PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; valid names: {', '.join(PRESET_NAMES)}"
        ) from None
    return DischargeCurve(coeffs, *PRESET_DOMAIN, name=name)


def _horner(coeffs: Sequence[float], t):
    acc = coeffs[-1] * np.ones_like(t) if isinstance(t, np.ndarray) else coeffs[-1]
    for a in reversed(coeffs[:-1]):
        acc = acc * t + a
    return acc


def evaluate(curve: DischargeCurve, t):
    """Voltage at time `t` (scalar or array), by nested multiplication."""
    if isinstance(t, np.ndarray):
        return _horner(curve.coeffs, t.astype(float))
    return float(_horner(curve.coeffs, float(t)))


class Evaluation(NamedTuple):
    volts: float
    extrapolated: bool


def evaluate_flagged(curve: DischargeCurve, t: float) -> Evaluation:
    """Like :func:`evaluate` but also reports whether `t` is outside the fit domain."""
    if not math.isfinite(t):
        raise DomainError(f"time must be finite, got {t!r}")
    return Evaluation(evaluate(curve, t), not curve.in_domain(t))


def _as_arrays(samples: Iterable) -> tuple[np.ndarray, np.ndarray]:
    pairs = [(float(s[0]), float(s[1])) for s in samples]
    if not pairs:
        return np.empty(0), np.empty(0)
    arr = np.asarray(pairs, dtype=float)
    return arr[:, 0], arr[:, 1]


def _expand_affine(c: np.ndarray, scale: float, shift: float) -> np.ndarray:
    """Coefficients in ``t`` of ``sum(c_j * (scale*t + shift)**j)``."""
    m = len(c)
    out = np.zeros(m)
    for j in range(m):
        for i in range(j + 1):
            out[i] += c[j] * math.comb(j, i) * scale**i * shift ** (j - i)
    return out


def fit(samples: Iterable, degree: int = DEFAULT_DEGREE) -> DischargeCurve:
    """Least-squares polynomial fit of ``(t, v)`` samples.

    Time is mapped affinely onto ``[-1, 1]`` over the sample range, the
    Vandermonde system is solved there by Householder QR, and the solution
    is expanded back to coefficients in hours.  Sample order is irrelevant.

    Raises
    ------
    InsufficientSamplesError
        Fewer than ``degree + 1`` samples.
    RankDeficientError
        Fewer than ``degree + 1`` distinct sample times.
    """
    if degree < 0 or int(degree) != degree:
        raise DomainError(f"degree must be a nonnegative integer, got {degree!r}")
    degree = int(degree)
    t, v = _as_arrays(samples)
    ncoef = degree + 1
    if len(t) < ncoef:
        raise InsufficientSamplesError(
            f"insufficient samples: degree {degree} needs at least {ncoef}, "
            f"got {len(t)}"
        )
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
        raise DomainError("samples must be finite")
    n_distinct = len(np.unique(t))
    if n_distinct < ncoef:
        raise RankDeficientError(
            f"rank deficient: degree {degree} needs {ncoef} distinct sample times, "
            f"got {n_distinct}"
        )

    t_min, t_max = float(t.min()), float(t.max())
    if t_max > t_min:
        scale = 2.0 / (t_max - t_min)
        shift = -(t_max + t_min) / (t_max - t_min)
    else:
        scale, shift = 1.0, -t_min
    x = scale * t + shift

    design = np.vander(x, ncoef, increasing=True)
    q, r = np.linalg.qr(design)
    diag = np.abs(np.diag(r))
    if diag.min() <= max(design.shape) * np.finfo(float).eps * diag.max():
        raise RankDeficientError(
            f"rank deficient: design matrix for degree {degree} is numerically singular"
        )
    c = _back_substitute(r, q.T @ v)
    coeffs = _expand_affine(c, scale, shift)

    curve = DischargeCurve(tuple(coeffs), t_min, t_max)
    resid = v - evaluate(curve, t)
    err = float(np.sqrt(np.mean(resid**2)))
    return DischargeCurve(curve.coeffs, t_min, t_max, rmse=err)


def _back_substitute(r: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = len(b)
    out = np.zeros(n)
    for i in range(n - 1, -1, -1):
        out[i] = (b[i] - r[i, i + 1 :] @ out[i + 1 :]) / r[i, i]
    return out


def rmse(curve: DischargeCurve, samples: Iterable) -> float:
    """Root-mean-square of ``v - curve(t)`` over the samples."""
    t, v = _as_arrays(samples)
    if len(t) == 0:
        raise InsufficientSamplesError("rmse needs at least one sample")
    resid = v - evaluate(curve, t)
    return float(np.sqrt(np.mean(resid**2)))


def time_to_voltage(
    curve: DischargeCurve,
    v_threshold: float,
    search: tuple[float, float],
    *,
    step: float = SCAN_STEP_HOURS,
    tol: float = BISECTION_TOL_HOURS,
) -> Optional[float]:
    """Earliest downward crossing of `v_threshold` within `search`.

    Scans forward in `step`-hour increments for the first point at or below
    the threshold that follows a point above it, then bisects that bracket
    down to `tol`.  The returned time always satisfies
    ``curve(t) <= v_threshold``.  A curve that starts exactly at the
    threshold crosses at ``t_lo``; one that starts below it has not crossed
    until it has first risen above.  Returns ``None`` if there is no crossing.
    """
    if math.isnan(v_threshold):
        raise DomainError("threshold voltage is NaN")
    t_lo, t_hi = float(search[0]), float(search[1])
    if not t_lo < t_hi:
        raise DomainError(f"search range must satisfy t_lo < t_hi, got {search!r}")

    v0 = evaluate(curve, t_lo)
    if v0 == v_threshold:
        return t_lo
    armed = v0 > v_threshold
    n_steps = math.ceil((t_hi - t_lo) / step)
    prev = t_lo
    for i in range(1, n_steps + 1):
        cur = min(t_lo + i * step, t_hi)
        above = evaluate(curve, cur) > v_threshold
        if armed and not above:
            lo, hi = prev, cur
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if evaluate(curve, mid) <= v_threshold:
                    hi = mid
                else:
                    lo = mid
            return hi
        armed = armed or above
        prev = cur
    return None
