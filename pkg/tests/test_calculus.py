import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P

from sfif import presets
from sfif.attractor import evaluate
from sfif.calculus import (
    check_derivative_condition,
    check_integral_condition,
    derivation_of,
    differentiate_sifs,
    integrate_sifs,
)
from sfif.core import CodeString, InterpolationData, Sifs, solve_maps, validate_sifs
from sfif.errors import (
    ConditionViolated,
    InfeasibleOrder,
    KappaUnsupported,
    SingularDenominator,
)


def cs(text):
    return CodeString.parse(text)


def trapezoid_running(x, y):
    return np.concatenate(([0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))))


# integral condition


def test_condition_scaled_polyline_family():
    rep = check_integral_condition(presets.scaled_polyline_sifs())
    assert rep.passed
    np.testing.assert_allclose(rep.ratios, [0.5, 0.5], atol=1e-15)


def test_condition_single_family_vacuous():
    s = solve_maps(presets.sample_data(), [[0.4, 0.4, 0.4]])
    assert check_integral_condition(s).passed


def test_condition_sample_exact_ratios(sample):
    # exact rational oracle with the tabulated coefficients
    a = [Fraction(3, 10), Fraction(3, 10), Fraction(4, 10)]
    e = [[Fraction(86, 100), Fraction(-24, 100), Fraction(-64, 100)],
         [Fraction(84, 100), Fraction(-26, 100), Fraction(-66, 100)]]
    f = [[0, 90, 70], [0, 90, 70]]
    g = [Fraction(4, 10), Fraction(6, 10)]
    ratios = []
    for k in range(2):
        num = sum(a[n] * (e[k][n] * 5000 + 100 * f[k][n]) for n in range(3))
        ratios.append(num / (1 - g[k] * sum(a)))
    rep = check_integral_condition(sample)
    np.testing.assert_allclose(rep.ratios, [float(r) for r in ratios], rtol=1e-12)
    assert not rep.passed
    assert rep.spread == pytest.approx(float(ratios[1] - ratios[0]), rel=1e-12)


def test_condition_singular_denominator():
    data = InterpolationData((0.0, 0.5, 1.0), (0.0, 1.0, 0.0))
    s = Sifs.from_arrays(data, [[1.0, 1.0]], [[[0.0], [0.0]]])
    with pytest.raises(SingularDenominator):
        check_integral_condition(s)


def test_condition_ratio_one_rejected():
    s = solve_maps(InterpolationData((0.0, 0.5, 1.0), (0.0, 2.0, 0.0)), [[0.0, 0.0]])
    rep = check_integral_condition(s)
    assert rep.ratios[0] == pytest.approx(1.0) and not rep.passed
    with pytest.raises(ConditionViolated):
        integrate_sifs(s)


# integral SIFS


def test_integrate_zero_gamma_exact_antiderivative():
    data = presets.sample_data()
    s = solve_maps(data, [[0.0, 0.0, 0.0]])
    I = integrate_sifs(s, y0hat=2.0)
    a = s.a
    for n, v in enumerate(s.vertical[0]):
        expect = a[n] * P.polyint(v.q, lbnd=0.0)
        expect[0] += I.yhat[n]
        np.testing.assert_allclose(I.sifs.vertical[0][n].q, expect, atol=1e-12)
    # exact antiderivative of the polyline
    x = np.linspace(0, 100, 1001)
    xs, ys = np.array(data.x), np.array(data.y)
    fine = np.union1d(x, xs)
    exact = 2.0 + trapezoid_running(fine, np.interp(fine, xs, ys))
    got = evaluate(I.sifs, cs("(1)"), 3, fine).y
    np.testing.assert_allclose(got, exact, atol=1e-9)


def test_integral_invariants():
    s = presets.scaled_polyline_sifs()
    I = integrate_sifs(s, y0hat=0.0)
    np.testing.assert_allclose(I.gamma_hat, s.a[None, :] * s.gamma, atol=1e-12)
    assert np.all(np.abs(I.gamma_hat) < 1)
    for k in range(s.M):
        for n in range(s.N):
            assert I.sifs.vertical[k][n].degree == s.vertical[k][n].degree + 1
    assert I.node_spread <= 1e-9
    assert I.yhat == pytest.approx((0.0, 0.25, 0.5))
    rep = validate_sifs(I.sifs)
    assert rep["join_up"].residual <= 1e-9


def _trapezoid_total(s, sigma, panels):
    x = np.linspace(0, 1, panels + 1)
    return trapezoid_running(x, evaluate(s, cs(sigma), 30, x).y)[-1]


@pytest.mark.parametrize("sigma", ["(1)", "(12)"])
def test_integral_endpoint_matches_quadrature(sigma):
    s = presets.scaled_polyline_sifs()
    I = integrate_sifs(s)
    assert I.yhat[-1] == pytest.approx(_trapezoid_total(s, sigma, 2**15), abs=1e-5)


def test_integral_endpoint_gamma_equal_to_a():
    # gamma = a = 1/2 puts g in the t log t class: the trapezoid sum carries a
    # self-similar bias of exactly h/2, so compare against the extrapolated rule
    s = presets.scaled_polyline_sifs()
    I = integrate_sifs(s)
    coarse, fine = _trapezoid_total(s, "(2)", 2**15), _trapezoid_total(s, "(2)", 2**16)
    assert I.yhat[-1] - coarse == pytest.approx(2.0**-16, rel=1e-6)
    assert I.yhat[-1] == pytest.approx(2 * fine - coarse, abs=1e-5)


def test_integrate_rejects_family_dependent_nodes():
    # equal ratios, but the first subinterval carries more area in family 2
    base = presets.scaled_polyline_sifs()
    q = [[np.asarray(v.q, dtype=float).copy() for v in row] for row in base.vertical]
    q[1][0][0] += 0.1
    q[1][1][0] -= 0.1
    s = Sifs.from_arrays(base.data, base.gamma, q)
    assert check_integral_condition(s).passed
    with pytest.raises(ConditionViolated):
        integrate_sifs(s)


def test_integrate_rejects_kappa():
    s = solve_maps(presets.sample_data(), presets.SAMPLE_GAMMAS, kappa=0.3)
    with pytest.raises(KappaUnsupported):
        integrate_sifs(s)
    with pytest.raises(KappaUnsupported):
        differentiate_sifs(s, 0)


@pytest.mark.parametrize("c", [0.5, 3.0, -2.0])
def test_integral_linearity(c):
    s = presets.scaled_polyline_sifs()
    scaled = Sifs.from_arrays(
        s.data, s.gamma, [[c * np.asarray(v.q) for v in row] for row in s.vertical]
    )
    I, Ic = integrate_sifs(s, 1.0), integrate_sifs(scaled, 1.0)
    np.testing.assert_allclose(np.subtract(Ic.yhat, 1.0), c * np.subtract(I.yhat, 1.0), atol=1e-12)
    np.testing.assert_allclose(Ic.sifs.qcoef[:, :, 1:], c * I.sifs.qcoef[:, :, 1:], atol=1e-12)


def test_integral_serialization():
    s = presets.scaled_polyline_sifs()
    I = integrate_sifs(s, y0hat=0.25)
    text = I.to_json()
    d = derivation_of(text)
    assert d == {"base": s.content_hash, "operation": "integrate", "order": 1, "y0hat": 0.25}
    assert Sifs.from_json(text) == I.sifs
    assert derivation_of(s.to_json()) is None


# derivative SIFS


def test_derivative_report_sample_infeasible(sample):
    rep = check_derivative_condition(sample, 1)
    assert not rep.feasible
    assert rep.margins[0][0] == pytest.approx(0.3 - 0.4)
    with pytest.raises(InfeasibleOrder):
        differentiate_sifs(sample, 1)


def test_derivative_report_order_zero(sample):
    rep = check_derivative_condition(sample, 0)
    assert rep.feasible and rep.levels == []
    assert differentiate_sifs(sample, 0).sifs is sample


def test_derivative_report_margins():
    s = presets.smooth_cubic_sifs()
    rep = check_derivative_condition(s, 1)
    assert rep.feasible
    np.testing.assert_allclose(rep.margins, [[0.3, 0.3], [0.35, 0.35]], atol=1e-15)
    assert rep.conditions_hold()
    lv = rep.levels[0]
    assert lv.ratios == pytest.approx([0.5, 0.5])
    assert lv.y_start == pytest.approx([1.0, 1.0]) and lv.y_end == pytest.approx([-1.0, -1.0])
    assert json.loads(json.dumps(rep.to_dict()))["conditions_hold"] is True


def test_derivative_recursion_coefficients():
    s = presets.smooth_cubic_sifs()
    D = differentiate_sifs(s, 1)
    for k in range(s.M):
        for i in range(s.N):
            a = s.a[i]
            np.testing.assert_allclose(
                D.sifs.vertical[k][i].q, P.polyder(s.vertical[k][i].q) / a, atol=1e-12
            )
            assert D.sifs.vertical[k][i].gamma == pytest.approx(s.gamma[k, i] / a, abs=1e-15)
    assert D.y_start == pytest.approx(1.0) and D.y_end == pytest.approx(-1.0)
    assert D.sifs.data.y == pytest.approx((1.0, 0.0, -1.0), abs=1e-12)
    assert D.node_spread <= 1e-12 and D.continuity_residual <= 1e-12
    assert validate_sifs(D.sifs).ok


def test_derivative_zero_gamma_exact():
    s = presets.smooth_cubic_sifs(gammas=((0.0, 0.0),))
    D = differentiate_sifs(s, 1)
    x = np.linspace(0, 1, 401)
    n = np.minimum((x * 2).astype(int), 1)
    u = (x - 0.5 * n) * 2
    exact = np.array([P.polyval(ui, P.polyder(s.vertical[0][ni].q)) / 0.5 for ui, ni in zip(u, n)])
    np.testing.assert_allclose(evaluate(D.sifs, cs("(1)"), 2, x).y, exact, atol=1e-12)


def test_derivative_family_dependent_slopes_rejected():
    f1 = presets.smooth_cubic_sifs(slopes=(1.0, 0.0, -1.0), gammas=((0.2, 0.2),))
    f2 = presets.smooth_cubic_sifs(slopes=(2.0, 0.0, -1.0), gammas=((0.15, 0.15),))
    s = Sifs(f1.data, f1.vertical + f2.vertical)
    assert not check_derivative_condition(s, 1).conditions_hold()
    with pytest.raises(ConditionViolated):
        differentiate_sifs(s, 1)


def test_second_order_report():
    s = presets.smooth_cubic_sifs()
    rep = check_derivative_condition(s, 2)
    assert rep.feasible and len(rep.levels) == 2
    assert not check_derivative_condition(s, 3).feasible


def test_differentiate_after_integrate_returns_maps():
    D = differentiate_sifs(presets.smooth_cubic_sifs(), 1)
    back = differentiate_sifs(integrate_sifs(D.sifs, y0hat=0.0).sifs, 1)
    np.testing.assert_allclose(back.sifs.gamma, D.sifs.gamma, atol=1e-9)
    np.testing.assert_allclose(back.sifs.qcoef, D.sifs.qcoef, atol=1e-9)


def test_integrate_after_differentiate_returns_nodes():
    s = presets.smooth_cubic_sifs()
    R = integrate_sifs(differentiate_sifs(s, 1).sifs, y0hat=s.data.y[0])
    np.testing.assert_allclose(R.yhat, s.data.y, atol=1e-6)


def test_derivative_serialization():
    s = presets.smooth_cubic_sifs()
    D = differentiate_sifs(s, 1)
    assert derivation_of(D.to_json()) == {"base": s.content_hash, "operation": "differentiate", "order": 1}


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_feasible_orders_contract(order, seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(2, 5))
    x = np.cumsum(rng.uniform(0.5, 1.5, N + 1))
    s = solve_maps(InterpolationData(x, rng.normal(size=N + 1)), [np.zeros(N)])
    a = s.a
    gam = rng.uniform(-1, 1, (2, N)) * a[None, :] ** order
    gam[1] *= 0.5
    s = solve_maps(s.data, gam)
    rep = check_derivative_condition(s, order)
    assert rep.feasible == bool(np.all(rep.min_margin > 0))
    if rep.feasible:
        for j in range(1, order + 1):
            assert np.all(np.abs(gam / a[None, :] ** j) < 1)
