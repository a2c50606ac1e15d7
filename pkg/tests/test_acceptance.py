"""Acceptance suite: one check per criterion, tolerances and time limits pinned.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import math
import time

import numpy as np
import pytest

from sfif import presets
from sfif.analysis import (
    SmoothnessClass,
    avg_fractal_distance,
    box_dimension,
    moran_dimension,
    smoothness_classify,
)
from sfif.attractor import (
    SampledGraph,
    address_value,
    convergence_profile,
    evaluate,
    forward_attractor,
    sample_uniform,
)
from sfif.calculus import differentiate_sifs, integrate_sifs
from sfif.cli import main
from sfif.core import CodeString, InterpolationData, Sifs, code_metric, solve_maps

# pinned tolerances
NODE_TOL = 1e-9
RATIO_SLACK = 0.02
ORACLE_TOL = 1e-10
LINE_DIM_TOL = 0.05
MORAN_D2 = 1.5326
DIM_TOL = 0.08
DIST_TOL = 0.1
INTEGRAL_REL_TOL = 1e-4
FD_MEDIAN_TOL = 1e-3
ROUND_TRIP_COEF_TOL = 1e-9
ROUND_TRIP_NODE_TOL = 1e-6
C1_TOL = 1e-12
HOLDER_TARGET = 2 - MORAN_D2
HOLDER_TOL = 0.1


def cs(text):
    return CodeString.parse(text)


class Clock:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.2f}s, limit {self.limit}s"


@pytest.mark.criterion(1, "sample-data coefficients reproduced to 2 decimals, < 1 s")
def test_c1_coefficient_table(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        '{"nodes": [[0,0],[30,90],[60,70],[100,10]], "gammas": [[0.4,0.4,0.4],[0.6,0.6,0.6]]}'
    )
    out = tmp_path / "sifs.json"
    with Clock(1.0):
        assert main(["build", "--config", str(cfg), "--out", str(out)]) == 0
        s = Sifs.from_json(out.read_text())
    expected = {
        "a": [0.3, 0.3, 0.4],
        "b": [0.0, 30.0, 60.0],
        "e1": [0.86, -0.24, -0.64],
        "f1": [0.0, 90.0, 70.0],
        "e2": [0.84, -0.26, -0.66],
        "f2": [0.0, 90.0, 70.0],
    }
    got = {
        "a": s.a, "b": s.b,
        "e1": s.qcoef[0, :, 1], "f1": s.qcoef[0, :, 0],
        "e2": s.qcoef[1, :, 1], "f2": s.qcoef[1, :, 0],
    }
    count = 0
    for key, vals in expected.items():
        for v, g in zip(vals, got[key]):
            assert round(float(g), 2) == v, key
            assert abs(g - v) < 1e-12, key
            count += 1
    assert count == 18


@pytest.mark.criterion(2, "interpolation at every node, five code strings, depths 1/5/30, < 1 s")
def test_c2_interpolation(sample):
    xs, ys = np.array(presets.SAMPLE_NODES).T
    with Clock(1.0):
        worst = 0.0
        for sigma in presets.SAMPLE_SIGMAS:
            for depth in (1, 5, 30):
                g = evaluate(sample, cs(sigma), depth, xs)
                worst = max(worst, float(np.abs(g.y - ys).max()))
    assert worst <= NODE_TOL


@pytest.mark.criterion(3, "convergence ratios <= max|gamma| + 0.02 for j = 2..20, < 5 s")
def test_c3_convergence(sample):
    with Clock(5.0):
        for sigma in ("(1)", "(2)", "(12)"):
            prof = convergence_profile(sample, cs(sigma), 21)
            ratios = prof.ratios[1:]  # d_{j+1}/d_j for j = 2..20
            assert ratios.size == 19
            assert np.all(prof.d > 0)
            assert np.all(ratios <= sample.max_gamma + RATIO_SLACK), (sigma, ratios.max())


@pytest.mark.criterion(4, "forward iteration, address oracle and pullback agree to 1e-10, < 10 s")
def test_c4_oracles(sample):
    rng = np.random.default_rng(4)
    with Clock(10.0):
        S = forward_attractor(sample, cs("(12)"), 8)
        g = evaluate(sample, cs("(12)"), 8, S.x)
        assert len(g) == len(S)
        assert np.abs(g.y - S.y).max() <= ORACLE_TOL
        sigmas = [cs(s) for s in presets.SAMPLE_SIGMAS + ("21(12)", "1(2)")]
        worst = 0.0
        for _ in range(1000):
            sigma = sigmas[int(rng.integers(len(sigmas)))]
            k = int(rng.integers(0, 13))
            addr = rng.integers(1, sample.N + 1, size=k).tolist()
            x, y = address_value(sample, sigma, addr, int(rng.integers(0, sample.N + 1)))
            worst = max(worst, abs(evaluate(sample, sigma, k, [x]).y[0] - y))
        assert worst <= ORACLE_TOL


@pytest.mark.criterion(5, "box dimension: line, Moran oracle for (2), ordering of five curves, < 60 s")
def test_c5_dimension(sample):
    with Clock(60.0):
        x = np.linspace(0.0, 1.0, 2**16)
        line = box_dimension((x, x), 3, 9)
        assert abs(line.estimate - 1.0) <= LINE_DIM_TOL

        oracle = moran_dimension(sample, 2)
        assert abs(oracle - MORAN_D2) < 5e-4
        est = {}
        for sigma in presets.SAMPLE_SIGMAS:
            g = sample_uniform(sample, cs(sigma), 30, 2**17)
            est[sigma] = box_dimension(g).estimate
        print(f"\nD(2) box {est['(2)']:.4f}  oracle {oracle:.4f}  reported {presets.REPORTED_DIMENSIONS['(2)']}")
        assert abs(est["(2)"] - MORAN_D2) <= DIM_TOL
        seq = [est[s] for s in presets.SAMPLE_SIGMAS]
        assert all(u < v for u, v in zip(seq, seq[1:])), est


@pytest.mark.criterion(6, "average fractal distance orderings and values within 0.1, < 30 s")
def test_c6_distance(sample):
    with Clock(30.0):
        graphs = {s: sample_uniform(sample, cs(s), 30, 2**15 + 1) for s in presets.SAMPLE_SIGMAS}
        d = {
            pair: avg_fractal_distance(graphs[pair[0]], graphs[pair[1]], normalize=True)
            for pair in presets.REPORTED_DISTANCES
        }
    for pair, reported in presets.REPORTED_DISTANCES.items():
        print(f"d_F{pair}: computed {d[pair]:.4f}  reported {reported}")
        assert abs(d[pair] - reported) <= DIST_TOL, pair
    for near, far in presets.DISTANCE_ORDERINGS:
        assert d[near] < d[far], (near, far)


@pytest.mark.criterion(7, "integral SFIF equals y0hat + running quadrature within 1e-4 of range, < 30 s")
def test_c7_integral():
    s = presets.scaled_polyline_sifs((0.3, 0.5))
    with Clock(30.0):
        I = integrate_sifs(s, y0hat=0.0)
        x = np.linspace(0.0, 1.0, 2**15 + 1)
        probe = x[::32]
        assert probe.size == 1025
        for sigma in ("(1)", "(2)", "(12)"):
            g = evaluate(s, cs(sigma), 30, x).y
            running = np.concatenate(([0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(x))))
            ghat = evaluate(I.sifs, cs(sigma), 30, probe).y
            err = np.abs(ghat - (I.y0hat + running[::32])).max()
            assert err <= INTEGRAL_REL_TOL * np.ptp(g), (sigma, err)


@pytest.mark.criterion(8, "derivative SFIF vs central differences, integrate/differentiate round trip, < 30 s")
def test_c8_derivative():
    s = presets.smooth_cubic_sifs()
    h = 2.0**-14
    with Clock(30.0):
        D = differentiate_sifs(s, 1)
        x = np.linspace(h, 1 - h, 1001)
        for sigma in ("(1)", "(2)", "(12)", "(112)"):
            fd = (evaluate(s, cs(sigma), 30, x + h).y - evaluate(s, cs(sigma), 30, x - h).y) / (2 * h)
            dg = evaluate(D.sifs, cs(sigma), 30, x).y
            rel = np.abs(fd - dg) / np.maximum(np.abs(dg), 1e-12)
            assert np.median(rel) <= FD_MEDIAN_TOL, sigma
        back = integrate_sifs(D.sifs, y0hat=s.data.y[0])
        assert np.abs(back.sifs.gamma - s.gamma).max() <= ROUND_TRIP_COEF_TOL
        width = max(back.sifs.qcoef.shape[2], s.qcoef.shape[2])
        pad = lambda c: np.pad(c, ((0, 0), (0, 0), (0, width - c.shape[2])))
        assert np.abs(pad(back.sifs.qcoef) - pad(s.qcoef)).max() <= ROUND_TRIP_COEF_TOL
        assert np.abs(np.subtract(back.yhat, s.data.y)).max() <= ROUND_TRIP_NODE_TOL


@pytest.mark.criterion(9, "smoothness class (iii), C1 = 2, bound 1, Holder exponent of (2) near 0.467, < 60 s")
def test_c9_smoothness(sample):
    with Clock(60.0):
        rep = smoothness_classify(sample, sigma=cs("(2)"), depth=30)
    assert rep.klass is SmoothnessClass.LIP_LAMBDA_BAR
    assert abs(rep.C1 - 2.0) <= C1_TOL
    assert abs(rep.lambda_bar_bound - 1.0) <= C1_TOL
    print(f"\nempirical exponent {rep.empirical_exponent:.4f} (r2 {rep.empirical_r2:.4f})")
    assert abs(rep.empirical_exponent - HOLDER_TARGET) <= HOLDER_TOL


@pytest.mark.criterion(10, "property suites: pseudometric, code metric, gamma = 0 limits, kappa nodes, < 60 s")
def test_c10_properties(sample):
    rng = np.random.default_rng(10)
    with Clock(60.0):
        # d_F pseudometric on random sampled graphs
        for _ in range(300):
            x = np.unique(np.concatenate(([0.0, 1.0], rng.uniform(0, 1, 40))))
            f, g, k = (SampledGraph(x, rng.normal(size=x.size)) for _ in range(3))
            assert avg_fractal_distance(f, f) == 0.0
            dfg = avg_fractal_distance(f, g)
            assert abs(dfg - avg_fractal_distance(g, f)) <= 1e-12
            assert avg_fractal_distance(f, k) <= dfg + avg_fractal_distance(g, k) + 1e-12

        # code metric axioms
        def rand_code():
            pre = tuple(rng.integers(1, 4, size=int(rng.integers(0, 4))))
            per = tuple(rng.integers(1, 4, size=int(rng.integers(1, 4))))
            return CodeString(pre, per)

        for _ in range(1000):
            a, b, c = rand_code(), rand_code(), rand_code()
            dab = code_metric(a, b, 3)
            assert dab >= 0 and dab == code_metric(b, a, 3)
            assert code_metric(a, c, 3) <= dab + code_metric(b, c, 3) + 1e-15
            assert (dab == 0) == (a.digits(24) == b.digits(24))

        # gamma = 0: polyline, exact antiderivative, exact derivative
        data = presets.sample_data()
        flat = solve_maps(data, [[0.0, 0.0, 0.0]])
        xs, ys = np.array(data.x), np.array(data.y)
        grid = np.union1d(np.linspace(0, 100, 1001), xs)
        poly = np.interp(grid, xs, ys)
        assert np.abs(evaluate(flat, cs("(1)"), 30, grid).y - poly).max() <= 1e-9
        area = np.concatenate(([0.0], np.cumsum(0.5 * (poly[1:] + poly[:-1]) * np.diff(grid))))
        I = integrate_sifs(flat)
        assert np.abs(evaluate(I.sifs, cs("(1)"), 30, grid).y - area).max() <= 1e-9
        cubic = presets.smooth_cubic_sifs(gammas=((0.0, 0.0),))
        D = differentiate_sifs(cubic, 1)
        u = np.linspace(0, 1, 401)
        n = np.minimum((u * 2).astype(int), 1)
        loc = (u - 0.5 * n) * 2
        exact = np.array(
            [np.polynomial.polynomial.polyval(t, np.polynomial.polynomial.polyder(cubic.vertical[0][m].q)) / 0.5
             for t, m in zip(loc, n)]
        )
        assert np.abs(evaluate(D.sifs, cs("(1)"), 30, u).y - exact).max() <= 1e-9

        # kappa-SFIF node values
        for kappa in (0.2, 0.5):
            sk = solve_maps(data, presets.SAMPLE_GAMMAS, kappa)
            target = kappa * xs + (1 - kappa) * ys
            for sigma in presets.SAMPLE_SIGMAS:
                for depth in (0, 1, 5, 30):
                    assert np.abs(evaluate(sk, cs(sigma), depth, xs).y - target).max() <= NODE_TOL
