import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mxil import diagnostics as dg
from mxil import grid_solver as gs
from mxil import material_laws as ml


def _vac():
    return {t: ml.linear_isotropic(1.0, t) for t in gs.REGIONS}


def _state(grid, fn, t=0.0):
    return gs.FieldState.from_function(grid, fn, t)


def _component(k, f):
    def fn(x, tag):
        out = np.zeros(x.shape[:-1] + (6,))
        out[..., k] = f(x, tag)
        return out

    return fn


def _sample(t, l2=0.0, **kw):
    vals = dict.fromkeys(dg.COLUMNS, 0.0)
    vals.update(t=t, l2=l2, **kw)
    return dg.Sample(**vals)


# --- norms ------------------------------------------------------------------------


def test_constant_field_norms():
    grid = gs.Grid((1, 1, 1), (8, 8, 8), 0.5)
    rep = dg.piecewise_norms(grid, _state(grid, lambda x, tag: np.ones(x.shape[:-1] + (6,))), 3)
    assert rep.combined == pytest.approx((np.sqrt(6),) * 4, rel=1e-14)
    assert rep.per_region["-"][0] == pytest.approx(np.sqrt(3), rel=1e-14)


def test_sine_norm_scaling():
    grid = gs.Grid((1, 1, 1), (160, 4, 8), 0.5)
    rep = dg.piecewise_norms(grid, _state(grid, _component(1, lambda x, tag: np.sin(np.pi * x[..., 0]))), 1)
    assert rep[0] == pytest.approx(1 / np.sqrt(2), rel=1e-3)
    assert np.sqrt(rep[1] ** 2 - rep[0] ** 2) == pytest.approx(np.pi / np.sqrt(2), rel=1e-3)


def test_jump_field_has_finite_piecewise_norm():
    vals = []
    for n in (16, 64):
        grid = gs.Grid((1, 1, 1), (4, 4, n), 0.5)
        st_ = _state(grid, _component(0, lambda x, tag: np.full(x.shape[:-1], 1.0 if tag == "-" else 2.0)))
        rep = dg.piecewise_norms(grid, st_, 2)
        assert rep[1] == rep[0] == rep[2]
        whole = np.concatenate([st_.interior("-"), st_.interior("+")], axis=2)[..., 0]
        naive = np.sqrt(np.sum(np.gradient(whole, grid.h[2], axis=2) ** 2) * grid.cell_volume)
        vals.append(naive)
    assert vals[1] > 1.9 * vals[0]  # differencing across the face grows like h^(-1/2)


def test_norm_order_bounds():
    grid = gs.Grid((1, 1, 1), (8, 8, 8), 0.5)
    with pytest.raises(dg.DiagnosticsError):
        dg.piecewise_norms(grid, gs.FieldState.zeros(grid), 4)


def test_lipschitz_norm_of_linear_field():
    grid = gs.Grid((1, 1, 1), (8, 8, 8), 0.5)
    lip = dg.lipschitz_norm(grid, _state(grid, _component(2, lambda x, tag: 3 * x[..., 0])))
    assert lip == pytest.approx(3.0, rel=1e-12)


# --- weighted sup and a priori bounds ----------------------------------------------------


def _series(ts, vals):
    s = dg.DiagnosticsSeries()
    for t, v in zip(ts, vals):
        s.append(_sample(t, l2=v))
    return s


def test_weighted_sup_examples():
    ts = np.linspace(0, 2, 21)
    s = _series(ts, np.exp(ts))
    assert dg.weighted_sup_norm(s, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert dg.weighted_sup_norm(s, 0.0) == pytest.approx(np.exp(2.0))
    assert dg.weighted_sup_norm(dg.DiagnosticsSeries(), 1.0) == 0.0
    with pytest.raises(dg.DiagnosticsError):
        dg.weighted_sup_norm(s, -1.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=1, max_size=20), st.floats(0, 5), st.floats(0, 5))
def test_weighted_sup_is_monotone_in_gamma(vals, g1, g2):
    s = _series(np.arange(len(vals)) * 0.1, vals)
    lo, hi = sorted((g1, g2))
    assert dg.weighted_sup_norm(s, hi) <= dg.weighted_sup_norm(s, lo)


def test_apriori_examples():
    s = _series([0.0, 0.5, 1.0], [1.0, 1.0, 1.0])
    rep = dg.apriori_bound_check(s, (1.0, 0.0), [0.5, 1.0, 2.0])
    assert rep.constants == (1.0, 1.0, 1.0) and rep.C_hat == 1.0
    assert dg.apriori_bound_check(_series([0.0, 1.0], [0, 0]), (0.0, 0.0), [1.0]).C_hat == 0.0
    with pytest.raises(dg.DiagnosticsError):
        dg.apriori_bound_check(s, (1.0, 0.0), [0.0])


# --- charges and constraints -------------------------------------------------------------


def test_charge_follows_volume_current():
    # J = (x1, 0, 0) enters as f_E = -J, so div J = 1 and rho = rho0 - t
    grid = gs.Grid((1, 1, 1), (8, 8, 8), 0.5)
    src = lambda t, x, tag: np.concatenate([-x[..., :1], np.zeros(x.shape[:-1] + (5,))], -1)  # noqa: E731
    tr = dg.ChargeTracker(grid, src, rho0=lambda x, tag: np.full(x.shape[:-1], 0.25))
    for t in (0.1, 0.3, 0.5):
        tr.advance_to(t)
    for tag in gs.REGIONS:
        assert np.allclose(tr.rho[tag], 0.25 - 0.5, atol=1e-14)
    assert not np.any(tr.rho_sigma)


def test_surface_charge_follows_surface_current():
    grid = gs.Grid((1, 1, 1), (8, 8, 8), 0.5)
    tr = dg.ChargeTracker(grid, surface_current=lambda t, x: np.stack([2 * x[..., 0], 0 * x[..., 0], 0 * x[..., 0]], -1))
    tr.advance_to(0.4)
    assert np.allclose(tr.rho_sigma, -0.8, atol=1e-14)


def test_zero_data_gives_zero_residuals():
    grid = gs.Grid((1, 1, 1), (8, 8, 8), 0.5)
    z = gs.FieldState.zeros(grid)
    rep = dg.divergence_and_charge_report(grid, z, _vac())
    assert rep.divB == 0.0 and rep.divD_rho == 0.0
    assert dg.interface_conservation_check(grid, z, _vac()) == (0.0, 0.0)


def test_divergence_matches_charge():
    grid = gs.Grid((1, 1, 1), (8, 8, 8), 0.5)
    st_ = _state(grid, _component(0, lambda x, tag: x[..., 0]))
    rho = {t: np.ones(grid.shape(t)) for t in gs.REGIONS}
    assert dg.divergence_and_charge_report(grid, st_, _vac(), rho).divD_rho <= 1e-12
    assert dg.divergence_and_charge_report(grid, st_, _vac()).divD_rho == pytest.approx(1.0, rel=1e-12)


def test_interface_jump_and_surface_charge():
    grid = gs.Grid((1, 1, 1), (8, 8, 8), 0.5)
    laws = {"-": ml.linear_isotropic(1.0, "-"), "+": ml.linear_isotropic(2.0, "+")}
    st_ = _state(grid, _component(2, lambda x, tag: np.ones(x.shape[:-1])))
    jb, jd = dg.interface_conservation_check(grid, st_, laws)
    assert jb == 0.0 and jd == pytest.approx(1.0, rel=1e-14)
    _, jd = dg.interface_conservation_check(grid, st_, laws, -np.ones((8, 8)))
    assert jd <= 1e-14


def test_domain_distance():
    grid = gs.Grid((1, 1, 1), (8, 8, 8), 0.5)
    laws = {"-": ml.kerr_law(-1.0, "-"), "+": ml.linear_isotropic(1.0, "+")}
    assert dg.domain_distance(grid, gs.FieldState.zeros(grid), laws) == pytest.approx(0.99 / np.sqrt(3))


# --- blow-up monitor --------------------------------------------------------------------------


TH = dg.Thresholds()


def test_monitor_precedence():
    s0 = dg.BlowupStatus()
    assert dg.blowup_monitor(s0, 1.0, TH, 1e-4, 1e7, 1e9).flag == "domain_exit"
    s = dg.blowup_monitor(s0, 1.0, TH, 1.0, 2e6, 1e9)
    assert (s.flag, s.time, s.value) == ("lipschitz_blowup", 1.0, 2e6)
    assert dg.blowup_monitor(s0, 1.0, TH, 1.0, 1.0, 2e8).flag == "norm_blowup"
    assert dg.blowup_monitor(s0, 1.0, TH, 1.0, 1.0, 1.0) is s0
    assert dg.blowup_monitor(s0, 1.0, TH, 1.0, finite=False).flag == "norm_blowup"


flag_inputs = st.tuples(st.floats(-1, 1), st.floats(0, 2e6), st.floats(0, 2e8), st.booleans())


@settings(max_examples=100, deadline=None)
@given(st.lists(flag_inputs, min_size=1, max_size=10))
def test_terminal_flags_never_revert(steps):
    s = dg.BlowupStatus()
    first = None
    for k, (d, lip, hm, fin) in enumerate(steps):
        s = dg.blowup_monitor(s, float(k), TH, d, lip, hm, fin)
        if s.terminal and first is None:
            first = s
        if first is not None:
            assert s == first


def test_unknown_flag_rejected():
    with pytest.raises(ValueError):
        dg.BlowupStatus("exploded")


# --- series -----------------------------------------------------------------------------------


def test_series_rejects_non_increasing_times():
    s = _series([0.0, 0.1], [1, 1])
    with pytest.raises(dg.DiagnosticsError):
        s.append(_sample(0.1))


def test_csv_layout_and_strictly_increasing_times():
    grid = gs.Grid((1, 1, 1), (8, 4, 8), 0.5, periodic=(False, True))
    u0 = _component(1, lambda x, tag: np.sin(np.pi * x[..., 0]) * np.sin(np.pi * x[..., 2]))
    res = gs.evolve(gs.Scenario(grid, _vac(), u0, 0.3, cadence=2))
    text = res.series.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(dg.COLUMNS)
    t = res.series.column("t")
    assert np.all(np.diff(t) > 0) and t[-1] == pytest.approx(0.3)
    assert len(lines) == len(res.series) + 1
