"""CSV/JSON reading and writing, and the simulation config schema.

Floats are written with Python's shortest round-trip representation
(``repr``), with a trailing ``.0`` dropped, so that writing and re-reading
any value is bit-exact.
"""

from __future__ import annotations

import io
import json
import math
import os
from pathlib import Path
from typing import IO, Iterable, Optional, Sequence, Union

import jsonschema

from .battery_models import BatterySpec, RelaxationModel
from .errors import DataFormatError, DomainError
from .load_power import LoadProfile, PowerSeries
from .node_sim import (
    DEFAULT_HORIZON,
    DEFAULT_TIMESTEP,
    DutyCycleProfile,
    ResistiveSource,
    SimConfig,
    SimTrace,
)
from .polyfit import DischargeCurve, DischargeSample, make_sample, preset

SECONDS_PER_HOUR = 3600.0
CONFIG_SCHEMA_VERSION = 1

PathOrStream = Union[str, os.PathLike, IO[str]]


def fmt_float(x: float) -> str:
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


# --------------------------------------------------------------------------
# discharge CSV

_TIME_HEADERS = {"t_hours": 1.0, "t_seconds": 1.0 / SECONDS_PER_HOUR}
_VOLT_HEADER = "v_volts"


def _read_text(source: PathOrStream) -> str:
    if hasattr(source, "read"):
        return source.read()
    return Path(source).read_text()


def parse_discharge_csv(source: PathOrStream) -> list[DischargeSample]:
    """Read ``t_hours,v_volts`` (or ``t_seconds,v_volts``) samples.

    Rows keep file order.  Blank lines are ignored.
    """
    lines = _read_text(source).splitlines()
    header_idx = next((i for i, ln in enumerate(lines) if ln.strip()), None)
    if header_idx is None:
        raise DataFormatError("missing header: file is empty")
    header = [h.strip() for h in lines[header_idx].split(",")]
    if len(header) != 2 or header[0] not in _TIME_HEADERS or header[1] != _VOLT_HEADER:
        raise DataFormatError(
            f"unknown header {lines[header_idx].strip()!r}; "
            "expected 't_hours,v_volts' or 't_seconds,v_volts'"
        )
    to_hours = _TIME_HEADERS[header[0]]

    samples = []
    for lineno, line in enumerate(lines[header_idx + 1 :], start=header_idx + 2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise DataFormatError(
                f"line {lineno}: expected 2 fields, got {len(fields)}"
            )
        try:
            t, v = float(fields[0]), float(fields[1])
        except ValueError:
            raise DataFormatError(f"line {lineno}: malformed number") from None
        if to_hours != 1.0:
            t = t * to_hours
        try:
            samples.append(make_sample(t, v))
        except DomainError as exc:
            raise DataFormatError(f"line {lineno}: {exc}") from None
    if not samples:
        raise DataFormatError("no data rows")
    return samples


# --------------------------------------------------------------------------
# series output


def series_csv(points: Iterable[Sequence[float]], header: Sequence[str]) -> str:
    out = [",".join(header)]
    out.extend(",".join(fmt_float(x) for x in row) for row in points)
    return "\n".join(out) + "\n"


def series_json(points: Iterable[Sequence[float]]) -> str:
    rows = ("[" + ",".join(fmt_float(x) for x in row) + "]" for row in points)
    return "[" + ",".join(rows) + "]\n"


def emit_series(
    series: Union[PowerSeries, Iterable[Sequence[float]]],
    fmt: str = "csv",
    destination: Optional[PathOrStream] = None,
    header: Optional[Sequence[str]] = None,
) -> str:
    """Write a series as CSV (with header) or as a JSON array of pairs.

    `destination` may be a path or an open text stream; the rendered text is
    also returned.
    """
    if isinstance(series, PowerSeries):
        points = series.points()
        header = header or ("t_hours", "p_mw")
    else:
        points = [tuple(row) for row in series]
        header = header or ("t_hours", "v_volts")
    if fmt == "csv":
        text = series_csv(points, header)
    elif fmt == "json":
        text = series_json(points)
    else:
        raise ValueError(f"unknown format {fmt!r}; use 'csv' or 'json'")
    _write(text, destination)
    return text


def _write(text: str, destination: Optional[PathOrStream]) -> None:
    if destination is None:
        return
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", newline="") as fh:
            fh.write(text)


# --------------------------------------------------------------------------
# curves and traces

def curve_to_json(curve: DischargeCurve) -> str:
    return json.dumps(curve.to_dict()) + "\n"


def load_curve(source: PathOrStream) -> DischargeCurve:
    try:
        doc = json.loads(_read_text(source))
        return DischargeCurve.from_dict(doc)
    except (json.JSONDecodeError, KeyError, TypeError, DomainError) as exc:
        raise DataFormatError(f"bad curve file: {exc}") from None


TRACE_HEADER = ("t_hours", "residual_mah", "voltage_v", "state")


def trace_csv(trace: SimTrace) -> str:
    buf = io.StringIO()
    buf.write(",".join(TRACE_HEADER) + "\n")
    for t, q, v, s in zip(trace.t, trace.residual_capacity, trace.voltage, trace.state):
        vs = "" if v is None else fmt_float(v)
        buf.write(f"{fmt_float(t)},{fmt_float(q)},{vs},{s}\n")
    return buf.getvalue()


def trace_json(trace: SimTrace) -> str:
    doc = {
        "termination_reason": trace.termination_reason,
        "timestep": trace.timestep,
        "horizon": trace.horizon,
        "initial_capacity_mah": trace.initial_capacity,
        "records": [
            {
                "t_hours": r.t,
                "residual_mah": r.residual_capacity,
                "voltage_v": r.voltage,
                "state": r.state,
                "unavailable_mah": r.unavailable_charge,
            }
            for r in trace.records()
        ],
    }
    return json.dumps(doc) + "\n"


# --------------------------------------------------------------------------
# config

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}

_CURVE_SCHEMA = {
    "type": "object",
    "oneOf": [
        {
            "properties": {"preset": {"type": "string"}},
            "required": ["preset"],
            "additionalProperties": False,
        },
        {
            "properties": {"file": {"type": "string"}},
            "required": ["file"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "degree": {"type": "integer", "minimum": 0},
                "coeffs": {"type": "array", "items": _NUM, "minItems": 1},
                "t_min": _NUM,
                "t_max": _NUM,
                "rmse": {"type": ["number", "null"]},
            },
            "required": ["coeffs", "t_min", "t_max"],
            "additionalProperties": False,
        },
    ],
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "schema": {"const": CONFIG_SCHEMA_VERSION},
        "battery": {
            "type": "object",
            "properties": {
                "capacity_mah": _POS,
                "nominal_voltage": _POS,
                "peukert_exponent": {"type": "number", "minimum": 1},
                "self_discharge_annual": {
                    "type": "number",
                    "minimum": 0,
                    "exclusiveMaximum": 1,
                },
            },
            "required": ["capacity_mah"],
            "additionalProperties": False,
        },
        "duty_cycle": {
            "type": "object",
            "properties": {
                **{f"{s}_current": _NONNEG for s in ("tx", "rx", "sleep", "idle")},
                **{f"fraction_{s}": _NONNEG for s in ("tx", "rx", "sleep", "idle")},
                "reference_current": _POS,
            },
            "additionalProperties": False,
        },
        "load": {
            "type": "object",
            "properties": {"kohm": _POS, "volts": _NUM},
            "required": ["kohm"],
            "additionalProperties": False,
        },
        "curve": _CURVE_SCHEMA,
        "sim": {
            "type": "object",
            "properties": {
                "timestep": _POS,
                "horizon": _POS,
                "cutoff_voltage": {"type": ["number", "null"]},
                "peukert": {"type": "boolean"},
                "relaxation": {"type": "boolean"},
                "self_discharge": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "relaxation": {
            "type": "object",
            "properties": {
                "recoverable_fraction": {"type": "number", "minimum": 0, "maximum": 1},
                "recovery_time_constant": _POS,
            },
            "additionalProperties": False,
        },
    },
    "required": ["schema", "battery"],
    "additionalProperties": False,
}


def _resolve_curve(spec: dict, base: Path) -> DischargeCurve:
    if "preset" in spec:
        return preset(spec["preset"])
    if "file" in spec:
        return load_curve(base / spec["file"])
    return DischargeCurve.from_dict(spec)


def config_from_dict(doc: dict, base_dir: Union[str, os.PathLike] = ".") -> SimConfig:
    """Validate a config document and build a :class:`SimConfig`.

    Exactly one of ``duty_cycle`` and ``load`` must be present.  A ``load``
    needs either ``volts`` (constant voltage) or a top-level ``curve``.
    """
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise DataFormatError(f"config {where}: {exc.message}") from None

    if ("duty_cycle" in doc) == ("load" in doc):
        raise DataFormatError("config needs exactly one of 'duty_cycle' or 'load'")

    try:
        curve = _resolve_curve(doc["curve"], Path(base_dir)) if "curve" in doc else None
    except KeyError as exc:
        raise DataFormatError(f"config curve: {exc.args[0]}") from None

    sim = doc.get("sim", {})
    try:
        battery = BatterySpec(**doc["battery"])
        relaxation = RelaxationModel(**doc.get("relaxation", {}))
        reference_current = None
        if "duty_cycle" in doc:
            dc = dict(doc["duty_cycle"])
            reference_current = dc.pop("reference_current", None)
            fields = {f"{s}_current": 0.0 for s in ("tx", "rx", "sleep", "idle")}
            fields.update({f"fraction_{s}": 0.0 for s in ("tx", "rx", "sleep", "idle")})
            fields.update(dc)
            source = DutyCycleProfile(**fields)
            duty_curve = curve
        else:
            load = doc["load"]
            profile = LoadProfile.from_kohm(load["kohm"])
            if "volts" in load:
                if curve is not None:
                    raise DataFormatError("load: give either 'volts' or a curve, not both")
                source = ResistiveSource(profile, voltage=float(load["volts"]))
            elif curve is not None:
                source = ResistiveSource(profile, curve=curve)
            else:
                raise DataFormatError("load: needs 'volts' or a top-level 'curve'")
            duty_curve = None
        return SimConfig(
            battery=battery,
            source=source,
            timestep=sim.get("timestep", DEFAULT_TIMESTEP),
            horizon=sim.get("horizon", DEFAULT_HORIZON),
            cutoff_voltage=sim.get("cutoff_voltage"),
            peukert_enabled=sim.get("peukert", False),
            relaxation_enabled=sim.get("relaxation", False),
            relaxation=relaxation,
            self_discharge_enabled=sim.get("self_discharge", False),
            curve=duty_curve,
            reference_current=reference_current,
        )
    except DomainError as exc:
        raise DataFormatError(f"config: {exc}") from None


def load_config(path: Union[str, os.PathLike]) -> SimConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"config is not valid JSON: {exc}") from None
    return config_from_dict(doc, base_dir=path.parent)
