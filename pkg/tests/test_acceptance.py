"""Acceptance criteria A1-A4, C1-C3 and N1-N5, one pass/fail line each."""

import time

import numpy as np
import pytest

from mxil import compatibility as cp
from mxil import suites
from mxil.grid_solver import evolve
from mxil.material_laws import kerr_law
from mxil.scenario_cli import _scaled_grid, build, convergence_study, flow_map_study, load_scenario, run

from oracles import fresnel, kerr_coefficient_derivatives, kerr_s1_s2, smooth_state


@pytest.fixture
def report(capsys):
    def emit(name, ok, detail):
        with capsys.disabled():
            print(f"\n[{name}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"{name}: {detail}"

    return emit


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# --- algebra --------------------------------------------------------------------------


def test_a1_exact_algebra(report):
    rows, dt = _timed(suites.algebra_exact)
    worst = max(r.residual for r in rows)
    report("A1", worst == 0 and len(rows) == 4 and dt < 1.0, f"{len(rows)} identities, max residual {worst}, {dt:.2f}s")


def test_a2_cancellation(report):
    worst, dt = _timed(lambda: suites.cancellation(1000))
    report("A2", worst <= 1e-12 and dt < 10.0, f"1000 trials, max residual {worst:.2e}, {dt:.2f}s")


def test_a3_transform_identities(report):
    (a, b), dt = _timed(lambda: suites.chart_identities(100, tau=0.3))
    report("A3", a <= 1e-12 and b <= 1e-12 and dt < 10.0, f"100 charts, A3 {a:.2e}, B {b:.2e}, {dt:.2f}s")


def test_a4_normal_recovery(report):
    worst, dt = _timed(lambda: suites.normal_recovery(100))
    report("A4", worst <= 1e-10, f"100 SPD A0, max relative error {worst:.2e}, {dt:.2f}s")


# --- compatibility ------------------------------------------------------------------


def test_c1_jets_match_chain_rule(report):
    g = cp.InterfaceGrid.box((1.0, 1.0, 1.0), (12, 12, 12), 0.5)
    worst = 0.0
    for k, (vt, s0, s2) in enumerate([(0.5, 0.0, 0.0), (-0.2, 0.3, 0.4), (1.0, 0.1, 0.7), (0.8, 0.0, 0.2)]):
        u0, f, want = {}, {}, {}
        for j, t in enumerate("+-"):
            r = g.region(t)
            x = r.points()
            seed = 100 * k + 10 * j
            u0[t] = smooth_state(x, seed)
            f[t] = [smooth_state(x, seed + 1, 0.1), smooth_state(x, seed + 2, 0.1)]
            want[t] = kerr_s1_s2(u0[t], f[t][0], f[t][1], r.spacing, vt, s0, s2)
        jet = cp.time_derivatives_nonlinear({t: kerr_law(vt, t, sigma0=s0, sigma2=s2) for t in "+-"}, 0.0, f, u0, g, 2)
        for t in "+-":
            worst = max(worst, *(float(np.max(np.abs(jet[t][p + 1] - want[t][p]))) for p in range(2)))
    report("C1", worst <= 1e-10, f"4 Kerr laws, S1 and S2 vs chain rule, max deviation {worst:.2e}")


def test_c2_linear_nonlinear_consistency(report):
    dev, dt = _timed(lambda: suites.linear_nonlinear_consistency(32, 3))
    # the frozen coefficient derivatives themselves, against the Leibniz oracle
    g = cp.InterfaceGrid.box((1.0, 1.0, 1.0), (8, 8, 8), 0.5)
    law = kerr_law(0.4, "+", sigma0=0.3, sigma2=0.2)
    u0 = {t: smooth_state(g.region(t).points(), 7) for t in "+-"}
    jet = cp.time_derivatives_nonlinear({"+": law, "-": kerr_law(0.2, "-")}, 0.0, None, u0, g, 3)
    chi, sig = cp.coefficient_jets(law, g.plus, jet["+"], 3)
    chi_o, sig_o = kerr_coefficient_derivatives(jet["+"], 0.4, 0.3, 0.2, 3)
    leib = max(float(np.max(np.abs(a - b))) for a, b in zip(chi + sig, chi_o + sig_o))
    ok = dev <= 1e-9 and dt < 60.0 and leib <= 1e-12
    report("C2", ok, f"32^3, m=3, deviation {dev:.2e} in {dt:.1f}s; Leibniz coefficients {leib:.2e}")


def test_c3_initial_data_correction(report):
    worst, dt = _timed(lambda: suites.correction(100, 3))
    report("C3", worst <= 1e-10, f"100 SPD A0, p<=3, max residual {worst:.2e}, {dt:.2f}s")


# --- numerics --------------------------------------------------------------------------


def test_n1_standing_wave_order(report):
    rows, dt = _timed(lambda: convergence_study(load_scenario("builtin:pec_standing_wave"), [40, 80, 160]))
    orders = [r.order for r in rows[1:]]
    ok = all(1.8 <= o <= 2.2 for o in orders) and dt < 300.0
    errs = ", ".join(f"{r.error:.3e}" for r in rows)
    report("N1", ok, f"errors {errs}; orders {', '.join(f'{o:.3f}' for o in orders)}; {dt:.0f}s")


def test_n2_fresnel(report):
    t0 = time.perf_counter()
    b = build(load_scenario("builtin:two_dielectric_planewave"))
    sc = b.scenario
    grid = sc.grid
    eps = [sc.laws[t].chi(None, np.zeros(3), np.zeros(3))[0, 0] for t in "-+"]
    h3 = grid.h[2]
    from mxil.grid_solver import FieldState

    init = FieldState.from_function(grid, sc.u0)
    incident = np.sum(init.interior("-")[0, 0, :, 0]) * h3
    res = evolve(sc)
    r = np.sum(res.state.interior("-")[0, 0, :, 0]) * h3 / incident
    # the transmitted pulse is compressed by n1/n2, so its area scales with that factor
    t_ = np.sum(res.state.interior("+")[0, 0, :, 0]) * h3 / incident * np.sqrt(eps[1] / eps[0])
    r0, t0_ = fresnel(*eps)
    dt = time.perf_counter() - t0
    ok = abs(r - r0) <= 0.02 * abs(r0) and abs(t_ - t0_) <= 0.02 * abs(t0_) and dt < 120.0
    report("N2", ok, f"r {r:.5f} (oracle {r0:.5f}), t {t_:.5f} (oracle {t0_:.5f}), N3=200, {dt:.1f}s")


def test_n3_conservation(report):
    cfg = load_scenario("builtin:interface_conservation")
    cols = ("jumpB", "jumpD_rho", "divB")
    sups = []
    for N in (40, 80):
        s = run(cfg.with_grid(_scaled_grid(cfg, N)))
        sups.append(np.array([np.max(s.series.column(c)) for c in cols]))
    ratio = sups[0] / sups[1]
    ok = bool(np.all((ratio >= 3.2) & (ratio <= 4.8)))
    detail = "; ".join(f"{c} {a:.3e}->{b:.3e} ratio {q:.2f}" for c, a, b, q in zip(cols, sups[0], sups[1], ratio))
    report("N3", ok, detail)


def test_n4_flow_map(report):
    rows, dt = _timed(lambda: flow_map_study(load_scenario("builtin:kerr_pulse"), [1e-2, 1e-3]))
    q = rows[0].distance / rows[1].distance
    report("N4", 8.0 <= q <= 12.0, f"distances {rows[0].distance:.4e}, {rows[1].distance:.4e}; ratio {q:.4f}; {dt:.1f}s")


def test_n5_blowup_monitor(report):
    s = run(load_scenario("builtin:kerr_blowup"))
    dist = s.series.column("dist_U")
    tail = np.diff(dist[-10:])
    finite = s.final_state.is_finite() and all(np.all(np.isfinite(s.series.column(c))) for c in ("l2", "h3", "lip"))
    ok = s.flag == "domain_exit" and finite and len(dist) >= 10 and bool(np.all(tail < 0))
    report("N5", ok, f"flag {s.flag} at t={s.trigger_time:.4f}, {len(dist)} samples, state finite {finite}, "
                     f"last-10 dist_U decreasing {bool(np.all(tail < 0))}")
