"""Roughness and distance measures for sampled SFIF graphs.

Box counting works on the unit-square normalization of the graph and
treats the samples as a polyline, i.e. as the graph of a continuous
function; counting only the sample points under-counts rough curves badly
once a column holds few samples.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .attractor import DEFAULT_DEPTH, SampledGraph, sample_uniform
from .core import CodeString, Sifs
from .errors import (
    DomainMismatch,
    GridTooCoarse,
    InsufficientSamples,
    NotApplicable,
    ValidationError,
)

DEFAULT_SCALES = (3, 10)


@dataclass
class DimensionReport:
    estimate: float
    scales: list[float]
    counts: list[int]
    r2: float
    degenerate: bool = False

    @property
    def low_confidence(self) -> bool:
        return self.r2 < 0.98

    @property
    def in_band(self) -> bool:
        return 0.9 <= self.estimate <= 2.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(low_confidence=self.low_confidence, in_band=self.in_band)
        return d


def _as_xy(graph) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(graph, SampledGraph):
        return graph.x, graph.y
    x, y = graph
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def _linfit(u: np.ndarray, v: np.ndarray) -> tuple[float, float, float]:
    """Least-squares slope, intercept and r^2 of ``v`` against ``u``."""
    slope, icept = np.polyfit(u, v, 1)
    resid = v - (slope * u + icept)
    ss_tot = float(((v - v.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(icept), r2


def box_dimension(graph, m1: int = DEFAULT_SCALES[0], m2: int = DEFAULT_SCALES[1]) -> DimensionReport:
    """Box-counting dimension over dyadic box sizes ``2**-m``, ``m = m1..m2``.

    The graph is mapped onto the unit square, the polyline through the
    samples is split at the finest column boundaries, and for each column
    the boxes between the lowest and highest polyline value are counted.
    """
    if not m2 > m1 >= 1:
        raise ValidationError(f"need m2 > m1 >= 1, got {m1}..{m2}")
    x, y = _as_xy(graph)
    if x.size < 2 ** (m2 + 2):
        raise InsufficientSamples(f"{x.size} samples < 2^{m2 + 2} needed for scale 2^-{m2}")
    ms = np.arange(m1, m2 + 1)
    scales = [2.0 ** -int(m) for m in ms]
    ylo, yhi = float(y.min()), float(y.max())
    if yhi - ylo <= 1e-14 * max(1.0, abs(yhi)):
        counts = [2 ** int(m) for m in ms]
        return DimensionReport(1.0, scales, counts, 1.0, degenerate=True)

    xn = (x - x[0]) / (x[-1] - x[0])
    yn = (y - ylo) / (yhi - ylo)
    fine = 2**m2
    cuts = np.arange(1, fine) / fine
    xr = np.union1d(xn, cuts)
    yr = np.interp(xr, xn, yn)
    lo = np.minimum(yr[:-1], yr[1:])
    hi = np.maximum(yr[:-1], yr[1:])
    mid = 0.5 * (xr[:-1] + xr[1:])

    counts = []
    for m in ms:
        n = 2 ** int(m)
        col = np.minimum((mid * n).astype(np.int64), n - 1)
        starts = np.searchsorted(col, np.arange(n))
        clo = np.minimum.reduceat(lo, starts)
        chi = np.maximum.reduceat(hi, starts)
        blo = np.minimum(np.floor(clo * n), n - 1)
        bhi = np.minimum(np.floor(chi * n), n - 1)
        counts.append(int((bhi - blo + 1).sum()))

    slope, _, r2 = _linfit(ms * math.log(2.0), np.log(np.asarray(counts, dtype=float)))
    return DimensionReport(slope, scales, counts, r2)


def moran_dimension(sifs: Sifs, family: int, tol: float = 1e-10) -> float:
    """Root ``D`` of ``sum_n |gamma_{n,k}| a_n^(D-1) = 1`` on ``[1, 2]`` by bisection.

    This is the graph dimension of the single affine FIF of ``family``
    (1-based) when ``sum |gamma| > 1`` and the nodes are not collinear.
    """
    check_moran_applicable(sifs)
    g = np.abs(sifs.gamma[family - 1])
    return _moran_root([g], sifs.a, tol)


def moran_dimension_periodic(sifs: Sifs, sigma: CodeString, tol: float = 1e-10) -> float:
    """Root of ``prod_{k in period} sum_n |gamma_{n,k}| a_n^(D-1) = 1``.

    A periodic code string repeats one composite IFS whose maps are products
    over the period, so its Moran sum factorizes.  The preperiod only acts
    on finitely many levels and does not change the dimension.
    """
    sigma.check_alphabet(sifs.M)
    check_moran_applicable(sifs)
    gs = [np.abs(sifs.gamma[k - 1]) for k in sigma.period]
    return _moran_root(gs, sifs.a, tol)


def _moran_root(gs: list[np.ndarray], a: np.ndarray, tol: float) -> float:
    def f(D):
        return math.prod(float((g * a ** (D - 1)).sum()) for g in gs) - 1.0

    lo, hi = 1.0, 2.0
    if f(lo) <= 0:
        raise NotApplicable("sum |gamma| <= 1: the graph dimension is 1")
    if f(hi) >= 0:
        raise NotApplicable("Moran sum does not drop below 1 on [1, 2]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def nodes_collinear(sifs: Sifs, rtol: float = 1e-12) -> bool:
    x = np.asarray(sifs.data.x)
    y = sifs.seed_y
    line = y[0] + (y[-1] - y[0]) * (x - x[0]) / (x[-1] - x[0])
    return bool(np.abs(y - line).max() <= rtol * max(1.0, np.abs(y).max()))


def check_moran_applicable(sifs: Sifs) -> None:
    if nodes_collinear(sifs):
        raise NotApplicable("collinear nodes: the FIF may be a straight line")


def avg_fractal_distance(f: SampledGraph, g: SampledGraph, normalize: bool = False) -> float:
    """``(1/(b-a)) * sqrt(integral |f-g|^2)`` by the composite trapezoid rule.

    With ``normalize`` both axes are first mapped to ``[0, 1]``: ``x`` by the
    common domain and ``y`` by the joint range of the two graphs.
    """
    (fa, fb), (ga, gb) = f.domain, g.domain
    span = fb - fa
    if abs(fa - ga) > 1e-12 * max(1.0, abs(span)) or abs(fb - gb) > 1e-12 * max(1.0, abs(span)):
        raise DomainMismatch(f"[{fa}, {fb}] vs [{ga}, {gb}]")
    x, fy, gy = _common_grid(f, g)
    diff2 = (fy - gy) ** 2
    integral = float(np.trapezoid(diff2, x))
    if not normalize:
        return math.sqrt(integral) / span
    yrange = max(fy.max(), gy.max()) - min(fy.min(), gy.min())
    if yrange == 0:
        return 0.0
    return math.sqrt(integral / span) / yrange


def _common_grid(f: SampledGraph, g: SampledGraph):
    if f.x.size == g.x.size and np.array_equal(f.x, g.x):
        return f.x, f.y, g.y
    if f.sifs is None or g.sifs is None:
        raise DomainMismatch("graphs on different grids need a generating Sifs to resample")
    x = np.union1d(f.x, g.x)
    fy = f.y if f.x.size == x.size else f.resample(x).y
    gy = g.y if g.x.size == x.size else g.resample(x).y
    return x, fy, gy


@dataclass
class ModulusTable:
    t: np.ndarray
    omega: np.ndarray

    def holder_fit(self) -> tuple[float, float]:
        """Slope and r^2 of ``log omega`` against ``log t``."""
        ok = self.omega > 0
        if ok.sum() < 2:
            return 0.0, 1.0
        slope, _, r2 = _linfit(np.log(self.t[ok]), np.log(self.omega[ok]))
        return slope, r2


def modulus_of_continuity(g: SampledGraph, t_values) -> ModulusTable:
    """``omega(g, t) = max_{|h| <= t} max_x |g(x+h) - g(x)|`` over sample pairs."""
    x, y = g.x, g.y
    t = np.asarray(t_values, dtype=float)
    span = x[-1] - x[0]
    if np.any(t <= 0) or np.any(t > span * (1 + 1e-12)):
        raise ValidationError("t values must lie in (0, domain length]")
    dx = np.diff(x)
    if np.any(t < 4 * dx.max() * (1 - 1e-9)):
        raise GridTooCoarse(f"smallest t = {t.min():.3g} is below 4 grid spacings ({4 * dx.max():.3g})")

    uniform = np.allclose(dx, dx[0], rtol=1e-9, atol=0)
    omega = np.zeros_like(t)
    if uniform:
        smax = int(np.floor(t.max() / dx[0] * (1 + 1e-9)))
        per = np.array([np.abs(y[s:] - y[:-s]).max() for s in range(1, smax + 1)])
        running = np.maximum.accumulate(per)
        idx = np.floor(t / dx[0] * (1 + 1e-9)).astype(int)
        omega = running[idx - 1]
    else:
        s = 1
        while s < x.size:
            h = x[s:] - x[:-s]
            if h.min() > t.max():
                break
            dy = np.abs(y[s:] - y[:-s])
            for i, ti in enumerate(t):
                sel = h <= ti
                if sel.any():
                    omega[i] = max(omega[i], dy[sel].max())
            s += 1
    return ModulusTable(t, omega)


def default_t_values(span: float) -> np.ndarray:
    return 2.0 ** np.arange(-12, -3) * span


class SmoothnessClass(str, enum.Enum):
    LIP_LAMBDA = "LipLambda"
    LAMBDA_LOG = "LambdaLog"
    LIP_LAMBDA_BAR = "LipLambdaBar"


@dataclass
class SmoothnessReport:
    lambda_: float
    lambda_nk: list[list[float]]
    C1: float
    klass: SmoothnessClass
    lambda_bar_bound: float | None = None
    bound_note: str | None = None
    empirical_exponent: float | None = None
    empirical_r2: float | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        d["klass"] = self.klass.value
        return d


def classify(C1: float, tol: float = 1e-12) -> SmoothnessClass:
    if abs(C1 - 1.0) <= tol:
        return SmoothnessClass.LAMBDA_LOG
    return SmoothnessClass.LIP_LAMBDA if C1 < 1.0 else SmoothnessClass.LIP_LAMBDA_BAR


def smoothness_classify(
    sifs: Sifs,
    lambda_nk=None,
    sigma: CodeString | None = None,
    depth: int = DEFAULT_DEPTH,
    points: int = 2**15 + 1,
    t_values=None,
) -> SmoothnessReport:
    """Lipschitz class of ``g_sigma`` from its coefficients, plus a measured exponent.

    Subinterval lengths enter ``C1`` normalized, i.e. as ``a_n``.  The
    exponents ``lambda_nk`` of the ``q`` default to 1 (polynomials are
    Lipschitz on a bounded interval).
    """
    lam = np.ones((sifs.M, sifs.N)) if lambda_nk is None else np.asarray(lambda_nk, dtype=float)
    if lam.shape != (sifs.M, sifs.N):
        raise ValidationError(f"lambda_nk must be {sifs.M} x {sifs.N}")
    if np.any(lam <= 0) or np.any(lam > 1):
        raise ValidationError("lambda_nk must lie in (0, 1]")
    lam_min = float(lam.min())
    g = np.abs(sifs.gamma)
    C1 = float((g / sifs.a[None, :] ** lam_min).max())
    klass = classify(C1)
    rep = SmoothnessReport(lam_min, lam.tolist(), C1, klass)

    if klass is SmoothnessClass.LIP_LAMBDA_BAR:
        if np.any(sifs.gamma <= 0):
            rep.bound_note = "NonPositiveGamma: log gamma undefined, bound skipped"
        else:
            rep.lambda_bar_bound = float(
                (np.log(sifs.gamma) / np.log(sifs.a)[None, :]).max()
            )

    if sigma is not None:
        graph = sample_uniform(sifs, sigma, depth, points)
        t = default_t_values(sifs.data.length) if t_values is None else t_values
        slope, r2 = modulus_of_continuity(graph, t).holder_fit()
        rep.empirical_exponent, rep.empirical_r2 = slope, r2
    return rep
