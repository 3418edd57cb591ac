"""Exit criteria for the package, one test per criterion.

Tolerances are fixed here; nothing is calibrated after the fact.
"""

import io
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from nodebatt.battery_models import BatterySpec, RelaxationModel, peukert_lifetime
from nodebatt.dataio import emit_series, parse_discharge_csv
from nodebatt.load_power import LoadProfile, instantaneous_power
from nodebatt.node_sim import (
    EXHAUSTED,
    DutyCycleProfile,
    ResistiveSource,
    SimConfig,
    lifetime,
    simulate,
)
from nodebatt.polyfit import evaluate, fit, preset, time_to_voltage

ROOT = Path(__file__).resolve().parent.parent
FARNELL15 = (3.292, -0.0012, -2.464e-6, 8.92e-9, -6.3e-12)


def cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "nodebatt.cli", *args],
        capture_output=True,
        cwd=cwd,
        check=False,
    )


def exact_farnell15(t):
    t = Fraction(t)
    return sum(Fraction(a) * t**i for i, a in enumerate(FARNELL15))


def test_c01_coin_cell_lifetime_analytic(criterion):
    res = cli("lifetime", "--capacity", "220", "--current", "0.248", "--exponent", "1")
    value = float(res.stdout)
    ok = res.returncode == 0 and abs(value - 220 / 0.248) <= 0.05 and round(value) == 887
    criterion(1, "220 mAh at 0.248 mA: analytic lifetime 887.10 h +/- 0.05", ok, f"got {value}")


def test_c02_coin_cell_lifetime_simulated(criterion):
    trace = simulate(SimConfig(BatterySpec(220), DutyCycleProfile.constant(0.248), timestep=0.1))
    life = lifetime(trace).hours
    ok = trace.termination_reason == EXHAUSTED and abs(life - 887.1) <= 0.1

    rng = np.random.default_rng(20240501)
    worst = 0.0
    for _ in range(20):
        cap = rng.uniform(10, 500)
        cur = rng.uniform(cap / 2000, 20)
        dt = 0.1
        tr = simulate(SimConfig(BatterySpec(cap), DutyCycleProfile.constant(cur), timestep=dt))
        err = abs(lifetime(tr).hours - peukert_lifetime(cap, cur, 1))
        worst = max(worst, err)
        ok = ok and tr.termination_reason == EXHAUSTED and err <= dt
    criterion(2, "220 mAh at 0.248 mA simulated 887.1 +/- 0.1 h; 20 random pairs within one step", ok,
              f"220 mAh run {life:.4f} h, worst pair error {worst:.4f} h")


def test_c03_farnell15_anchor(criterion):
    c = preset("farnell_15k")
    v0, v1050 = evaluate(c, 0), evaluate(c, 1050)
    oracle = float(exact_farnell15(1050))
    ok = (
        v0 == 3.292
        and abs(v1050 - 1.9838) <= 1e-3
        and abs(v1050 - oracle) <= 1e-12
        and abs(v0 - 3.3) <= 0.1
        and abs(v1050 - 2.0) <= 0.1
    )
    criterion(3, "farnell_15k: 3.292 V at 0 h, 1.9838 +/- 1e-3 V at 1050 h", ok,
              f"V(1050)={v1050!r}")


def test_c04_threshold(criterion):
    t = time_to_voltage(preset("farnell_15k"), 2.0, (0, 1200))
    # exact rational bisection of the same polynomial
    lo, hi = Fraction(1047), Fraction(1048)
    for _ in range(40):
        mid = (lo + hi) / 2
        lo, hi = (lo, mid) if exact_farnell15(mid) <= 2 else (mid, hi)
    ok = t is not None and 1045 <= t <= 1050 and abs(t - float(hi)) <= 1e-3
    criterion(4, "2.0 V crossing of farnell_15k in [1045, 1050] h", ok, f"t={t}")


def test_c05_fit_round_trip(criterion):
    samples = [(50.0 * i, float(exact_farnell15(50 * i))) for i in range(22)]
    curve = fit(samples, 4)
    rel = [abs(g - w) / abs(w) for g, w in zip(curve.coeffs, FARNELL15)]
    ok = max(rel) <= 1e-6 and curve.rmse < 1e-9
    criterion(5, "farnell_15k round-trip coefficients within 1e-6 relative, rmse < 1e-9", ok,
              f"max rel {max(rel):.2e}, rmse {curve.rmse:.2e}")


def test_c06_power_law(criterion):
    rng = np.random.default_rng(11)
    vs = rng.uniform(-5, 5, 1000)
    rs = 10 ** rng.uniform(0, 6, 1000)
    worst_pr = worst_half = 0.0
    for v, r in zip(vs, rs):
        p = instantaneous_power(v, r)
        worst_pr = max(worst_pr, abs(p * r / 1000 - v * v) / (v * v))
        worst_half = max(worst_half, abs(instantaneous_power(v, r / 2) - 2 * p) / (2 * p))
    ok = worst_pr <= 1e-12 and worst_half <= 1e-12
    criterion(6, "P*R = V^2 and halving R doubles P, 1000 pairs, 1e-12 relative", ok,
              f"{worst_pr:.1e}, {worst_half:.1e}")


def test_c07_resistive_lifetime_scaling(criterion):
    dt = 0.1

    def life(kohm):
        src = ResistiveSource(LoadProfile.from_kohm(kohm), voltage=3.3)
        return lifetime(simulate(SimConfig(BatterySpec(220), src, timestep=dt))).hours

    l75, l15 = life(7.5), life(15)
    ok = abs(l15 - 2 * l75) <= dt
    criterion(7, "15 kOhm lifetime is twice the 7.5 kOhm lifetime within one step", ok,
              f"{l75} h vs {l15} h, ratio {l15 / l75:.5f}")


def test_c08_conservation(criterion):
    profile = DutyCycleProfile(20.0, 18.0, 0.002, 0.01, 0.05, 0.05, 0.8, 0.1)
    cfg = SimConfig(BatterySpec(220), profile, timestep=0.01, horizon=100,
                    relaxation_enabled=True, relaxation=RelaxationModel(0.3, 2.0))
    start = time.perf_counter()
    trace = simulate(cfg)
    elapsed = time.perf_counter() - start
    steps = len(trace) - 1
    err = max(
        abs(q + u + d - 220)
        for q, u, d in zip(trace.residual_capacity, trace.unavailable_charge, trace.drained)
    )
    ok = steps == 10000 and err <= 1e-9 * steps and max(trace.unavailable_charge) > 0
    criterion(8, "relaxation run conserves charge within 1e-9 mAh per step", ok,
              f"{steps} steps, max error {err:.1e} mAh, {elapsed:.2f} s")


def test_c09_self_discharge(criterion):
    cfg = SimConfig(BatterySpec(220, self_discharge_annual=0.01), DutyCycleProfile.constant(0.0),
                    timestep=0.1, horizon=8760, self_discharge_enabled=True)
    trace = simulate(cfg)
    frac = trace.residual_capacity[-1] / 220
    ok = abs(trace.t[-1] - 8760) < 1e-6 and abs(frac - 0.99) <= 1e-4
    criterion(9, "one year at zero load keeps 99.00% +/- 0.01%", ok, f"{frac * 100:.6f}%")


def _cli_runs(tmp: Path):
    data = tmp / "d.csv"
    data.write_text(emit_series([(50.0 * i, float(exact_farnell15(50 * i))) for i in range(22)], "csv"))
    cfg = ROOT / "configs" / "duty_cycle.json"
    return [
        ("fit", "--input", str(data), "--degree", "4", "--out", str(tmp / "c.json")),
        ("eval", "--curve", str(tmp / "c.json"), "--at", "500"),
        ("eval", "--preset", "farnell_7k5", "--grid", "0:1200:7", "--out", str(tmp / "e.csv")),
        ("threshold", "--preset", "farnell_15k", "--voltage", "2.0", "--range", "0:1200", "--json"),
        ("lifetime", "--capacity", "220", "--current", "0.248", "--exponent", "1.3"),
        ("power", "--preset", "farnell_15k", "--load-kohm", "15", "--grid", "0:1200:10",
         "--out", str(tmp / "p.json")),
        ("power", "--volts", "3.3", "--loads-kohm", "1:20:1"),
        ("simulate", "--config", str(cfg), "--out", str(tmp / "trace.csv")),
    ]


def test_c10_determinism_and_io(criterion, tmp_path):
    outputs = []
    for rep in range(2):
        run_dir = tmp_path / "run"
        run_dir.mkdir(exist_ok=True)
        snapshot = []
        for args in _cli_runs(run_dir):
            res = cli(*args)
            files = {p.name: p.read_bytes() for p in sorted(run_dir.iterdir())}
            snapshot.append((res.returncode, res.stdout, res.stderr, files))
        outputs.append(snapshot)
        for p in run_dir.iterdir():
            p.unlink()
    deterministic = outputs[0] == outputs[1] and all(s[0] == 0 for s in outputs[0])

    rng = np.random.default_rng(99)
    exact = True
    for _ in range(1000):
        n = int(rng.integers(1, 30))
        t = np.abs(rng.standard_normal(n)) * 10.0 ** rng.integers(-3, 6, n)
        # arbitrary finite doubles for voltage, drawn from raw bit patterns
        v = rng.integers(0, 2**64, n, dtype=np.uint64).view(np.float64)
        v = np.where(np.isfinite(v), v, 1.0)
        rows = list(zip(t.tolist(), v.tolist()))
        back = parse_discharge_csv(io.StringIO(emit_series(rows, "csv")))
        exact = exact and all(
            a[0] == b.t and np.float64(a[1]).tobytes() == np.float64(b.v).tobytes()
            for a, b in zip(rows, back)
        )
    criterion(10, "CLI byte-identical across runs; CSV round-trip bit-exact on 1000 sets",
              deterministic and exact, f"deterministic={deterministic}, exact={exact}")
