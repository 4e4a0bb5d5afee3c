import json
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tractforge.errors import DomainError
from tractforge.growth import (LogLogAlpha, loglog_alpha, parse_grid, parse_profile, phi_eval, phi_inverse,
                               phi_shift_threshold, phiapp_bracket, profile_from_json, psi_eval, scaled_theta,
                               table_profile, theta_derivative_check, theta_properties)
from tractforge.tower import Ordering, TowerScalar, tower_cmp, tower_log, tower_normalize

# mpmath, 40 digits
E_TO_E = 15.15426224147926418976
E_TO_2E = 229.6516640835241325099
PHI_1E6 = 192763558.7331488808141
PSI_AT_E2E = 0.6598803584531253707679
RATIO_LOG_1E30 = 0.9900653543557081061091
DTHETA_100 = -9.310522901250318275088e-4
T_STAR = 2.414213562373095048802
INV_1E12 = 1060071830.369138804851

ONE = loglog_alpha(1.0)


def test_phi_at_e_to_e():
    assert float(phi_eval(ONE, E_TO_E)) == pytest.approx(E_TO_2E, rel=1e-13)
    # the quoted 229.64 is a rounding slip; the exact value is e^(2e)
    assert float(phi_eval(ONE, E_TO_E)) == pytest.approx(229.64, abs=0.02)


def test_phi_at_1e6():
    assert float(phi_eval(ONE, 1e6)) == pytest.approx(PHI_1E6, rel=1e-12)
    assert ONE.theta(1e6) == pytest.approx(0.3808374892492403500630, rel=1e-13)


def test_phi_identity_by_construction():
    for t in (20.0, 1e3, 1e30):
        direct = math.exp((1 + ONE.theta(t)) * math.log(t))
        assert float(phi_eval(ONE, t)) == pytest.approx(direct, rel=1e-12)


def test_phi_below_domain():
    with pytest.raises(DomainError):
        phi_eval(ONE, 5.0)


def test_phi_inverse_examples():
    assert float(phi_inverse(ONE, E_TO_2E)) == pytest.approx(E_TO_E, rel=1e-12)
    assert float(phi_inverse(ONE, 1e12)) == pytest.approx(INV_1E12, rel=1e-11)


def test_phiapp_bracket_at_1e12():
    lo, mid, hi = phiapp_bracket(ONE, 1e12, M=2.0)
    with mp.workdps(30):
        w = mp.mpf(10) ** 12
        lll = mp.log(mp.log(w))
        want_lo = float(mp.log(w) * (1 - 2 / lll))
        want_hi = float(mp.log(w) * (1 - 1 / (2 * lll)))
    assert lo == pytest.approx(want_lo, rel=1e-13)
    assert hi == pytest.approx(want_hi, rel=1e-13)
    assert lo <= mid <= hi


def test_phi_inverse_rel_tol_range():
    with pytest.raises(DomainError):
        phi_inverse(ONE, 1e6, rel_tol=1e-2)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=math.log(E_TO_E), max_value=600.0))
def test_phi_inverse_round_trip(log_t):
    t = math.exp(log_t)
    back = phi_inverse(ONE, phi_eval(ONE, t), 1e-12)
    assert float(tower_log(back)) == pytest.approx(log_t, rel=1e-11)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=3.0, max_value=5e7))
def test_phi_inverse_round_trip_tower_scale(log_t):
    t = tower_normalize(1, log_t) if log_t >= 18.5 else TowerScalar.from_float(math.exp(log_t))
    back = phi_inverse(ONE, phi_eval(ONE, t), 1e-12)
    assert float(tower_log(back)) == pytest.approx(log_t, rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1.001, max_value=1e6), st.floats(min_value=1.0, max_value=1e6))
def test_phi_monotone_and_above_identity(log_a, bump):
    a = tower_normalize(1, math.log(E_TO_E) * log_a) if math.log(E_TO_E) * log_a >= 18.5 \
        else TowerScalar.from_float(E_TO_E ** log_a)
    b = a * (1.0 + bump)
    pa, pb = phi_eval(ONE, a), phi_eval(ONE, b)
    assert tower_cmp(pa, a) is Ordering.GT
    assert tower_cmp(pb, pa) is not Ordering.LT
    # phi(t) <= t^(1 + Phi(t_min)) with Phi(t_min) = 1
    assert tower_cmp(pa, a * a) is not Ordering.GT


def test_phi_over_t_grows():
    ratios = [float(tower_log(phi_eval(ONE, t)) - math.log(t)) for t in np.geomspace(20, 1e300, 30)]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))


def test_psi_example():
    big_psi, small_psi = psi_eval(ONE, tower_normalize(1, E_TO_2E))
    assert big_psi == pytest.approx(PSI_AT_E2E, rel=1e-12)
    # psi(t) = t^(1 + Psi(t)) for log t = e^(2e)
    assert tower_log(small_psi).mantissa == pytest.approx(E_TO_2E * (1 + PSI_AT_E2E), rel=1e-12)


def test_psi_over_phi_decays_deep():
    # log(Psi/Phi) compared in log form: Psi itself underflows past log log t ~ 1e4
    logs = []
    for u in np.geomspace(40, 1e6, 12):
        ell = tower_normalize(1, u)
        inv = phi_inverse(ONE, ell)
        logs.append(math.log(10) + float(tower_log(inv) - tower_log(ell)) - float(ONE.log_theta(ell)))
    assert all(b < a for a, b in zip(logs, logs[1:]))
    with mp.workdps(30):
        # s = log phi^-1(e^40) solves s (1 + 1/log s) = 40
        s = mp.findroot(lambda v: v * (1 + 1 / mp.log(v)) - 40, 30)
        want = float(mp.log(10) + s - 40 + mp.log(40))
    assert logs[0] == pytest.approx(want, rel=1e-9)


def test_theta_ratio_log_domain():
    t = TowerScalar.parse("exp^1(1e30)")
    got = ONE.theta(t * t) / ONE.theta(t)
    assert got == pytest.approx(RATIO_LOG_1E30, rel=1e-12)
    assert got == pytest.approx(0.99007, abs=1e-4)


def test_theta_derivative_examples():
    rep = theta_derivative_check(ONE, [100.0])
    assert rep.closed_form[0] == pytest.approx(DTHETA_100, rel=1e-13)
    assert rep.rel_errors[0] < 1e-7
    half = theta_derivative_check(loglog_alpha(0.5), np.geomspace(10, 1e12, 30))
    assert half.max_rel_error <= 1e-6
    assert half.passed and half.to_json()["passed"]


def test_theta_derivative_stencil_order():
    two = loglog_alpha(2.0)
    e1 = theta_derivative_check(two, [1e4], h_rel=1e-2).rel_errors[0]
    e2 = theta_derivative_check(two, [1e4], h_rel=5e-3).rel_errors[0]
    assert e1 / e2 == pytest.approx(4.0, rel=0.05)


def test_theta_derivative_needs_closed_form():
    with pytest.raises(DomainError):
        theta_derivative_check(scaled_theta(ONE, 0.5), [100.0])


def test_theta_properties_first_point_below_t0_fails():
    grid = [10.0] + list(np.geomspace(20, 1e300, 24))
    rep = theta_properties(loglog_alpha(1.0, t_min=2.0), grid)
    b = rep.properties["b_log_increasing"]
    assert not b.passes[0]
    assert all(b.passes[1:])


def test_theta_properties_literal_grid_flags_e():
    rep = theta_properties(ONE, parse_grid("geometric:20:1e2:1e40"))
    assert rep.properties["a_decreasing"].verdict == "pass"
    assert rep.properties["b_log_increasing"].verdict == "pass"
    assert rep.properties["e_beta_divergence"].verdict == "trend-to-zero"


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_theta_properties_tower_grid(alpha):
    grid = parse_grid(f"loglog:30:{math.exp(alpha) * 1.01}:1e8")
    rep = theta_properties(loglog_alpha(alpha), grid)
    assert rep.passed, {k: p.verdict for k, p in rep.properties.items()}


def test_table_profile_sqrt_log_flags_e():
    ts = np.geomspace(3, 1e300, 400)
    prof = table_profile([(t, math.log(t) ** -0.5) for t in ts])
    rep = theta_properties(prof, list(np.geomspace(1e10, 1e299, 30)), beta=0.5)
    assert rep.properties["e_beta_divergence"].verdict == "trend-to-zero"
    assert any("trends to 0" in f for f in rep.flags)


def test_theta_properties_grid_checks():
    with pytest.raises(DomainError):
        theta_properties(ONE, list(np.geomspace(20, 1e5, 10)))
    with pytest.raises(DomainError):
        theta_properties(ONE, list(np.geomspace(20, 1e5, 25))[::-1])


def test_law_report_csv_columns():
    rep = theta_properties(ONE, parse_grid("loglog:20:3:1e4"))
    header = rep.to_csv().splitlines()[0].split(",")
    assert header[0] == "t"
    for name in ("a_decreasing", "b_log_increasing", "c_log_divergence", "d_square_ratio", "e_beta_divergence"):
        assert f"{name}_value" in header and f"{name}_pass" in header


def test_phi_shift_threshold_example():
    res = phi_shift_threshold(ONE, 1.0, 2.0)
    assert res.t_star == pytest.approx(T_STAR, rel=1e-14)
    assert res.extended
    assert res.all_pass
    assert len(res.samples) == 50


def test_phi_shift_threshold_monotone_in_M():
    stars = [phi_shift_threshold(ONE, 1.0, M, n_check=5).t_star for M in (1.5, 2, 10, 1e3, 1e9)]
    assert all(b < a for a, b in zip(stars, stars[1:]))
    assert stars[-1] < 0.1


def test_scaled_theta_extension():
    prof = scaled_theta(ONE, 0.9, t_min=3.0)
    assert prof.theta(100.0) == pytest.approx(0.9 * ONE.theta(100.0), rel=1e-13)
    assert prof.in_extension(TowerScalar.from_float(math.log(5.0)))
    assert prof.theta(5.0) > prof.theta(E_TO_E)
    rep = theta_properties(prof, list(np.geomspace(4.0, 1e6, 20)))
    assert any("extension" in f for f in rep.flags)


def test_profile_json_round_trip():
    for prof in (ONE, scaled_theta(ONE, 0.5), table_profile([(10, 0.5), (100, 0.4), (1000, 0.3)])):
        again = profile_from_json(json.loads(json.dumps(prof.to_json())))
        assert again.to_json() == prof.to_json()
    assert isinstance(parse_profile("loglog:2"), LogLogAlpha)
    assert parse_profile('{"kind": "loglog_alpha", "alpha": 1.0, "t_min": 16.0}').t_min == 16.0


def test_parse_table_profile(tmp_path):
    path = tmp_path / "knots.csv"
    rows = [(float(t), math.log(math.log(t)) ** -1) for t in np.geomspace(20, 1e12, 40)]
    path.write_text("t,phi\n" + "".join(f"{t!r},{v!r}\n" for t, v in rows))
    prof = parse_profile(f"table:{path}")
    assert prof.theta(1e6) == pytest.approx(ONE.theta(1e6), rel=1e-4)
    with pytest.raises(DomainError):
        parse_profile(f"table:{tmp_path / 'missing.csv'}")
