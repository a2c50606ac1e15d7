"""Ready-made data sets and reference values used by the CLI and the tests."""

from __future__ import annotations

import numpy as np

from .core import CodeString, InterpolationData, Sifs, solve_maps

SAMPLE_NODES = ((0.0, 0.0), (30.0, 90.0), (60.0, 70.0), (100.0, 10.0))
SAMPLE_GAMMAS = ((0.4, 0.4, 0.4), (0.6, 0.6, 0.6))

# the five code strings, listed in increasing order of roughness
SAMPLE_SIGMAS = ("(1)", "(112)", "(12)", "(221)", "(2)")

REPORTED_DIMENSIONS = {
    "(1)": 1.3069,
    "(112)": 1.3632,
    "(12)": 1.4182,
    "(221)": 1.4572,
    "(2)": 1.5199,
}

REPORTED_DISTANCES = {
    ("(1)", "(2)"): 0.297,
    ("(1)", "(112)"): 0.022,
    ("(2)", "(112)"): 0.276,
    ("(1)", "(221)"): 0.228,
    ("(2)", "(221)"): 0.071,
    ("(1)", "(12)"): 0.138,
    ("(2)", "(12)"): 0.162,
}

# pairs (closer, farther) whose order the reported distances establish
DISTANCE_ORDERINGS = (
    (("(1)", "(112)"), ("(2)", "(112)")),
    (("(2)", "(221)"), ("(1)", "(221)")),
    (("(1)", "(12)"), ("(2)", "(12)")),
)


def sample_data() -> InterpolationData:
    return InterpolationData.from_nodes(SAMPLE_NODES)


def sample_sifs() -> Sifs:
    return solve_maps(sample_data(), SAMPLE_GAMMAS)


def sample_sigmas() -> list[CodeString]:
    return [CodeString.parse(s) for s in SAMPLE_SIGMAS]


def scaled_polyline_sifs(gammas=(0.3, 0.5)) -> Sifs:
    """Two-map pool with ``q_{j,k} = (1 - gamma_k)(e_j x + f_j)`` on ``(0,0), (.5,1), (1,0)``.

    ``e_j x + f_j`` is the zero-scaling solution.  These maps satisfy the
    integral condition but not the join-up conditions for the listed nodes,
    so the pool is built directly rather than through :func:`solve_maps`.
    """
    data = InterpolationData((0.0, 0.5, 1.0), (0.0, 1.0, 0.0))
    base = solve_maps(data, [[0.0, 0.0]])
    lines = [np.asarray(v.q) for v in base.vertical[0]]
    qs = [[(1.0 - g) * c for c in lines] for g in gammas]
    return Sifs.from_arrays(data, [[g, g] for g in gammas], qs)


def hermite_cubic(p0: float, p1: float, d0: float, d1: float) -> np.ndarray:
    """Ascending coefficients of the cubic on [0, 1] with given end values and slopes."""
    A = np.array([[1, 0, 0, 0], [1, 1, 1, 1], [0, 1, 0, 0], [0, 1, 2, 3]], dtype=float)
    return np.linalg.solve(A, [p0, p1, d0, d1])


def smooth_cubic_sifs(
    y=(0.0, 1.0, 0.5), slopes=(1.0, 0.0, -1.0), gammas=((0.2, 0.2), (0.15, 0.15))
) -> Sifs:
    """Two-map pool on ``x = 0, .5, 1`` whose attractors are continuously differentiable.

    Each cubic meets the join-up conditions for ``y`` and, after one
    differentiation, the join-up conditions for the node slopes ``slopes``.
    """
    x = (0.0, 0.5, 1.0)
    a = 0.5
    y0, y1, y2 = y
    s0, s1, s2 = slopes
    qs = []
    for g1, g2 in gammas:
        left = hermite_cubic(y0 - g1 * y0, y1 - g1 * y2, (a - g1) * s0, a * s1 - g1 * s2)
        right = hermite_cubic(y1 - g2 * y0, y2 - g2 * y2, a * s1 - g2 * s0, (a - g2) * s2)
        qs.append([left, right])
    return Sifs.from_arrays(InterpolationData(x, y), gammas, qs)
