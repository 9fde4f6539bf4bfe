"""Acceptance gate for the shipped guarantees.

Each test checks one advertised behavior end to end and prints a single
pass/fail line (run with -s to see them as they happen). Protocols and
tolerances here are frozen; loosening them is a release decision, not a
test fix.
"""

import math
import time

import numpy as np
import pytest

from spinbath import (
    ErrorModel,
    GaussianRf,
    RunSpec,
    build_model,
    compile_cdd,
    compile_cpmg,
    compile_free,
    compile_hahn,
    compile_pdd,
    compile_udd,
    decay_time,
    default_model,
    fit_order_relation,
    hahn_decay_trace,
    propagate,
    sweep_tau,
    verify_claim,
)
from spinbath.avgham import build_h_free, magnus_defect
from spinbath.cli import main as cli_main
from spinbath.engine import model_tau_b
from spinbath.operators import build_operator_set
from spinbath.pulses import PulseSpec, real_pulse


def _line(name, ok, detail):
    print(f"[{'pass' if ok else 'FAIL'}] {name}: {detail}", flush=True)
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def dephasing6():
    rng = np.random.default_rng(123)
    return build_model(rng.uniform(-0.5, 0.5, 6), np.zeros((6, 6)))


def test_01_fid_product_formula(dephasing6):
    t0 = time.perf_counter()
    m = dephasing6
    n = 50
    tl = compile_free(40.0 / n, n_cycles=n)
    trace = propagate(RunSpec(model=m, timeline=tl))
    expected = np.prod(np.cos(np.outer(trace.times, m.b) / 2.0), axis=1)
    dev = float(np.max(np.abs(trace.s - expected)))
    elapsed = time.perf_counter() - t0
    _line("01 fid-product-formula", dev < 1e-9 and elapsed < 5.0,
          f"max dev {dev:.2e} over {n} points in {elapsed:.2f} s")


def test_02_hahn_exact_refocusing(dephasing6):
    m = dephasing6
    taus = np.random.default_rng(7).uniform(1.0, 200.0, 10)
    worst = 0.0
    for tau in taus:
        trace = propagate(RunSpec(model=m, timeline=compile_hahn(float(tau))))
        worst = max(worst, abs(float(trace.s[-1]) - 1.0))
    _line("02 hahn-exact-refocusing", worst < 1e-9,
          f"max |s(2 tau) - 1| = {worst:.2e} over 10 delays")


def test_03_closed_form_claims():
    t0 = time.perf_counter()
    residuals = {}
    for cid in ("cpmg-flip-angle-zeroth-order",
                "cpmg2-error-sum-vanishes",
                "pdd-cancels-system-bath-coupling"):
        report = verify_claim(cid)
        residuals[cid] = report["residual"]
    elapsed = time.perf_counter() - t0
    worst = max(residuals.values())
    _line("03 closed-form-claims", worst < 1e-10 and elapsed < 1.0,
          f"worst residual {worst:.2e} in {elapsed:.2f} s")


def test_04_magnus_truncation_order():
    ratios = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        b = rng.uniform(-0.05, 0.05, 3)
        iu = np.triu_indices(3, 1)
        d = np.zeros((3, 3))
        d[iu] = rng.uniform(-0.05, 0.05, len(iu[0]))
        d = d + d.T
        tl = compile_pdd(20.0)
        full = build_model(b, d)
        half = build_model(b / 2, d / 2)
        ratios.append(magnus_defect(tl, build_h_free(full), full.ops)
                      / magnus_defect(tl, build_h_free(half), half.ops))
    mean = float(np.mean(ratios))
    _line("04 magnus-truncation-order", 6.0 <= mean <= 10.0,
          f"mean defect ratio {mean:.2f} over 20 seeds (cubic -> 8)")


def test_05_cycle_time_bookkeeping():
    anchors = (
        ("cpmg", compile_cpmg(30.0, 10.4).cycle_time, 80.8),
        ("pdd", compile_pdd(40.0, 10.4).cycle_time, 201.6),
        ("pdd", compile_pdd(70.0, 10.4).cycle_time, 321.6),
        ("cdd2", compile_cdd(2, 30.0, 10.4).cycle_time, 688.0),
        ("cdd3", compile_cdd(3, 10.0, 10.4).cycle_time, 1513.6),
    )
    worst = max(abs(got - want) for _, got, want in anchors)
    n4 = compile_cdd(4, 1.0, 0.0).pulses_per_cycle
    ok = worst <= 0.1 and n4 == 340
    _line("05 cycle-time-bookkeeping", ok,
          f"worst anchor error {worst:.2e} us; fourth-level pulse count {n4}")


def test_06_udd_identities():
    tau = 17.0
    udd1, hahn = compile_udd(1, 2 * tau), compile_hahn(tau)
    ok1 = (abs(udd1.cycle_time - hahn.cycle_time) < 1e-12
           and abs(udd1.events[0].start_time - hahn.events[0].start_time) < 1e-12
           and udd1.events[0].axis == hahn.events[0].axis)
    udd2, cpmg = compile_udd(2, 2 * tau), compile_cpmg(tau)
    ok2 = (abs(udd2.cycle_time - cpmg.cycle_time) < 1e-12 and all(
        abs(a.start_time - b.start_time) < 1e-12 and a.axis == b.axis
        for a, b in zip(udd2.events, cpmg.events)))
    udd4 = compile_udd(4, 100.0)
    fractions = np.array([e.start_time for e in udd4.events]) / udd4.cycle_time
    closed = np.sin(np.pi * np.arange(1, 5) / 10.0) ** 2
    dev = float(np.max(np.abs(fractions - closed)))
    _line("06 udd-identities", ok1 and ok2 and dev < 1e-12,
          f"one-pulse=echo {ok1}, two-pulse=train {ok2}, "
          f"four-pulse fraction dev {dev:.1e}")


def test_07_flip_angle_asymmetry():
    m = build_model(np.zeros(2), np.zeros((2, 2)))
    err = ErrorModel(flip_angle_fraction=0.05)
    tl = compile_cpmg(10.0, 0.0, n_cycles=100)
    tr_y = propagate(RunSpec(model=m, timeline=tl, error_model=err,
                             initial_axis="y"))
    dev_y = float(np.max(np.abs(tr_y.s - 1.0)))
    tr_x = propagate(RunSpec(model=m, timeline=tl, error_model=err,
                             initial_axis="x"))
    min_x = float(np.min(tr_x.s))

    ops = build_operator_set(1)
    h0 = np.zeros((ops.dim, ops.dim))
    u = real_pulse(PulseSpec.delta("-y", math.pi), 1.0, err, h0, ops).matrix @ \
        real_pulse(PulseSpec.delta("y", math.pi), 1.0, err, h0, ops).matrix
    phase = u[0, 0] / abs(u[0, 0])
    dev_id = float(np.max(np.abs(u / phase - np.eye(ops.dim))))

    ok = dev_y < 1e-10 and min_x < 0.5 and dev_id < 1e-10
    _line("07 flip-angle-asymmetry", ok,
          f"protected-axis dev {dev_y:.1e}; transverse falls to {min_x:.3f}; "
          f"alternating pair identity dev {dev_id:.1e}")


def test_08_interior_optimal_delay():
    t0 = time.perf_counter()
    m = default_model()
    tau_b = model_tau_b(m).value
    grid = [5.0, 20.0, 35.0, 50.0, 65.0, 80.0, 95.0, 110.0, 125.0, 140.0]
    err = ErrorModel(rf=GaussianRf(1.0, 0.10), tilt_jitter_sd=0.15)
    noisy = sweep_tau("cpmg", grid, m, err, "y", time_budget=2000.0,
                      n_realizations=16, master_seed=7)
    clean = sweep_tau("cpmg", grid, m, ErrorModel(), "y", time_budget=2000.0)
    elapsed = time.perf_counter() - t0
    interior = noisy.tau_opt not in (grid[0], grid[-1])
    ok = (interior and noisy.tau_opt < tau_b
          and clean.tau_opt == grid[0]
          and elapsed < 600.0)
    _line("08 interior-optimal-delay", ok,
          f"noisy tau_opt {noisy.tau_opt:g} us (interior={interior}) < "
          f"tau_B {tau_b:.1f} us; error-free tau_opt {clean.tau_opt:g} us; "
          f"{elapsed:.0f} s")


def test_09_echo_to_fid_ratio():
    m = default_model()
    fid = decay_time(propagate(RunSpec(model=m,
                                       timeline=compile_free(4.0, n_cycles=100))))
    hahn = decay_time(hahn_decay_trace(m, np.linspace(5.0, 300.0, 60)))
    ratio = hahn.decay_time / fid.decay_time
    ok = fid.reached and hahn.reached and 1.5 <= ratio <= 3.0
    _line("09 echo-to-fid-ratio", ok,
          f"fid {fid.decay_time:.1f} us, echo {hahn.decay_time:.1f} us, "
          f"ratio {ratio:.2f}")


def test_10_order_relation_fit():
    c_true, b_true, tau_b = 0.9, -0.9, 30.0
    points = [(n, tau_b * math.exp((n - c_true) / b_true)) for n in (1, 2, 3, 4)]
    fit = fit_order_relation(points, tau_b)
    exact = abs(fit.c - c_true) < 1e-9 and abs(fit.b - b_true) < 1e-9

    m = default_model(seed=19, n_bath=4, b_scale=0.10, d_scale=0.10)
    est = model_tau_b(m)
    err = ErrorModel(rf=GaussianRf(1.0, 0.10), tilt_jitter_sd=0.15)
    grids = {1: np.linspace(2.0, 24.0, 9),
             2: np.linspace(1.0, 8.0, 8),
             3: np.linspace(0.4, 3.2, 8)}
    sim_points = []
    for order, grid in grids.items():
        res = sweep_tau("cdd", list(grid), m, err, "y", time_budget=400.0,
                        order=order, n_realizations=16, master_seed=11)
        sim_points.append((order, res.tau_opt))
    sim_fit = fit_order_relation(sim_points, est.value)
    ok = exact and sim_fit.b < 0
    _line("10 order-relation-fit", ok,
          f"round-trip exact {exact}; simulated concatenation levels "
          f"{[(o, round(t, 1)) for o, t in sim_points]} give slope "
          f"{sim_fit.b:.2f}")


def test_11_byte_identical_sweeps(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("""\
[bath]
n_bath = 3
coupling_seed = 5

[errors]
rf_distribution = gaussian
rf_sd = 0.1

[sequence]
family = cpmg
tau_grid_us = 10, 20
time_budget_us = 400

[run]
n_realizations = 4
""", encoding="utf-8")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli_main(["sweep", "--config", str(cfg), "--csv", str(a),
                     "--threads", "1"]) == 0
    assert cli_main(["sweep", "--config", str(cfg), "--csv", str(b),
                     "--threads", "1"]) == 0
    identical = a.read_bytes() == b.read_bytes()
    _line("11 byte-identical-sweeps", identical,
          f"{len(a.read_bytes())} bytes, identical={identical}")
