"""Evaluation of super fractal interpolation functions.

Level pairing: the first code digit acts outermost.  At depth ``k`` the
sampled function is ``T_{s_1} T_{s_2} ... T_{s_k} g_0`` where ``T_m`` is the
Read-Bajraktarevic operator of family ``m`` and ``g_0`` the polyline through
the (kappa-blended) nodes.  With this pairing the depth-``k`` functions form
a Cauchy sequence for every code string, so ``g_sigma`` is their uniform
limit and a depth-``k`` truncation is within ``max|gamma|**k`` (times a
constant) of it.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import CodeString, Sifs
from .errors import (
    AddressDigitOutOfRange,
    PointBudgetExceeded,
    PointOutOfDomain,
    ValidationError,
)

DEFAULT_DEPTH = 30
DEFAULT_POINT_BUDGET = 10**7
MERGE_TOL = 1e-12


@dataclass(frozen=True)
class SampledGraph:
    """Samples ``(x, g(x))`` of one function, with provenance.

    ``sifs`` is kept (not serialized) so a graph can be re-evaluated on a
    different grid instead of being interpolated.
    """

    x: np.ndarray
    y: np.ndarray
    sigma: CodeString | None = None
    depth: int | None = None
    sifs_hash: str | None = None
    grid: str = "explicit"
    sifs: Sifs | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValidationError("x and y must be 1-D arrays of equal length")
        if x.size > 1 and not np.all(np.diff(x) > 0):
            raise ValidationError("sample abscissae must be strictly increasing")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.x.size

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    def resample(self, points) -> SampledGraph:
        """Evaluate the generating Sifs on new abscissae."""
        if self.sifs is None or self.sigma is None or self.depth is None:
            raise ValidationError("graph has no generating Sifs to resample from")
        return evaluate(self.sifs, self.sigma, self.depth, points)

    def to_csv(self, fh=None) -> str | None:
        text = "x,y\n" + "".join(f"{x:.17g},{y:.17g}\n" for x, y in zip(self.x, self.y))
        if fh is None:
            return text
        fh.write(text)
        return None

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.to_csv(fh)

    @classmethod
    def from_csv(cls, source) -> SampledGraph:
        """Read ``x,y`` rows from a path or an open text stream."""
        if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
            with open(source, newline="") as fh:
                return cls.from_csv(fh)
        reader = csv.reader(source)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "y"]:
            raise ValidationError("sample CSV must start with header 'x,y'")
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
        arr = np.array(rows, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    @classmethod
    def from_csv_text(cls, text: str) -> SampledGraph:
        return cls.from_csv(io.StringIO(text))


def _digits0(sifs: Sifs, sigma: CodeString, depth: int) -> list[int]:
    if depth < 0:
        raise ValidationError(f"depth must be >= 0, got {depth}")
    sigma.check_alphabet(sifs.M)
    return [d - 1 for d in sigma.digits(depth)]


def _locate(xs: np.ndarray, u: np.ndarray) -> np.ndarray:
    # half-open [x_{n-1}, x_n), last subinterval closed
    n = np.searchsorted(xs, u, side="right") - 1
    return np.clip(n, 0, xs.size - 2)


def _qeval(coef: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Horner on per-point coefficient rows ``coef[:, d]``."""
    val = coef[:, -1].copy()
    for d in range(coef.shape[1] - 2, -1, -1):
        val *= u
        val += coef[:, d]
    return val


def pullback(sifs: Sifs, digits: Sequence[int], x: np.ndarray) -> np.ndarray:
    """Depth-``len(digits)`` values at ``x``; ``digits`` are 0-based families, outermost first."""
    xs = np.asarray(sifs.data.x)
    x0, xN = xs[0], xs[-1]
    inv_a = sifs.data.length / np.diff(xs)
    qc = sifs.qcoef
    g = sifs.gamma
    u = np.asarray(x, dtype=float).copy()
    acc = np.zeros_like(u)
    mult = np.ones_like(u)
    for fam in digits:
        n = _locate(xs, u)
        # L_n^{-1}(u) written relative to the left node to keep cancellation exact
        u = x0 + (u - xs[n]) * inv_a[n]
        np.clip(u, x0, xN, out=u)
        acc += mult * _qeval(qc[fam, n], u)
        mult *= g[fam, n]
    acc += mult * np.interp(u, xs, sifs.seed_y)
    return acc


def evaluate(sifs: Sifs, sigma: CodeString, depth: int = DEFAULT_DEPTH, points=None) -> SampledGraph:
    """Sample the depth-``depth`` approximant of ``g_sigma`` at ``points``.

    Cost is ``O(depth)`` per point; no grid interpolation is involved except
    for the seed polyline at the innermost level.
    """
    digits = _digits0(sifs, sigma, depth)
    x = np.atleast_1d(np.asarray(sifs.data.x if points is None else points, dtype=float))
    x0, xN = sifs.data.x0, sifs.data.xN
    bad = (x < x0) | (x > xN) | ~np.isfinite(x)
    if bad.any():
        raise PointOutOfDomain(f"{x[bad][0]!r} is outside [{x0}, {xN}]")
    y = pullback(sifs, digits, x)
    if np.any(np.diff(x) <= 0):
        order = np.argsort(x, kind="stable")
        x, y = x[order], y[order]
        keep = np.concatenate(([True], np.diff(x) > 0))
        x, y = x[keep], y[keep]
    return SampledGraph(x, y, sigma, depth, sifs.content_hash, "explicit", sifs)


def uniform_grid(sifs: Sifs, count: int, include_nodes: bool = False) -> np.ndarray:
    x = np.linspace(sifs.data.x0, sifs.data.xN, count)
    if include_nodes:
        x = np.union1d(x, np.asarray(sifs.data.x))
    return x


def sample_uniform(
    sifs: Sifs, sigma: CodeString, depth: int = DEFAULT_DEPTH, count: int = 2**13 + 1,
    include_nodes: bool = False,
) -> SampledGraph:
    g = evaluate(sifs, sigma, depth, uniform_grid(sifs, count, include_nodes))
    grid = f"uniform:{count}" + ("+nodes" if include_nodes else "")
    return SampledGraph(g.x, g.y, sigma, depth, g.sifs_hash, grid, sifs)


def forward_attractor(
    sifs: Sifs, sigma: CodeString, depth: int, budget: int = DEFAULT_POINT_BUDGET
) -> SampledGraph:
    """The finite set ``W_{s_1}(W_{s_2}(... W_{s_k}(S_0)))`` as a point cloud.

    Every map of the level's family is applied to every point; coincident
    images of shared endpoints are merged.
    """
    digits = _digits0(sifs, sigma, depth)
    N = sifs.N
    size = N**depth * (N + 1)
    if size > budget:
        raise PointBudgetExceeded(f"{N}^{depth} * {N + 1} = {size} points exceeds budget {budget}")
    xs = np.asarray(sifs.data.x)
    x0, a = xs[0], sifs.a
    px, py = xs.copy(), sifs.seed_y.copy()
    for fam in reversed(digits):
        qc, g = sifs.qcoef[fam], sifs.gamma[fam]
        nx = np.concatenate([xs[n] + a[n] * (px - x0) for n in range(N)])
        ny = np.concatenate(
            [g[n] * py + _qeval(np.broadcast_to(qc[n], (px.size, qc.shape[1])), px) for n in range(N)]
        )
        px, py = _merge(nx, ny, MERGE_TOL * max(1.0, sifs.data.length))
    return SampledGraph(px, py, sigma, depth, sifs.content_hash, "attractor", sifs)


def _merge(x: np.ndarray, y: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    keep = np.concatenate(([True], np.diff(x) > tol))
    return x[keep], y[keep]


def address_value(
    sifs: Sifs, sigma: CodeString, address: Sequence[int], base: int
) -> tuple[float, float]:
    """Image of node ``base`` under ``w_{i_1, s_1} o ... o w_{i_k, s_k}``.

    ``address`` holds 1-based subinterval indices ``i_1..i_k``; digit ``i_j``
    is paired with code digit ``s_j``, and position 1 is outermost, matching
    :func:`evaluate`.
    """
    if not 0 <= base <= sifs.N:
        raise AddressDigitOutOfRange(f"base node {base} outside 0..{sifs.N}")
    for i in address:
        if not 1 <= i <= sifs.N:
            raise AddressDigitOutOfRange(f"address digit {i} outside 1..{sifs.N}")
    fams = _digits0(sifs, sigma, len(address))
    x, y = sifs.data.x[base], float(sifs.seed_y[base])
    for i, fam in zip(reversed(address), reversed(fams)):
        L = sifs.horizontal[i - 1]
        v = sifs.vertical[fam][i - 1]
        x, y = L(x), v(x, y)
    return float(x), float(y)


@dataclass
class ConvergenceProfile:
    """Sup-differences ``d_j = max |g_j - g_{j-1}|`` over a probe grid, ``j = 1..k``."""

    d: np.ndarray
    bound: float

    @property
    def ratios(self) -> np.ndarray:
        """``d_{j+1} / d_j`` for ``j = 1..k-1`` (nan where ``d_j`` is zero)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.d[:-1] > 0, self.d[1:] / self.d[:-1], np.nan)

    def certified(self, eps: float = 0.02, start: int = 2, floor: float = 0.0) -> bool:
        """True when every ratio from ``d_{start+1}/d_start`` on is within ``bound + eps``.

        Ratios whose denominator is at or below ``floor`` are skipped
        (rounding noise once the profile has collapsed).
        """
        r = self.ratios[start - 1:]
        dj = self.d[start - 1:-1]
        live = dj > floor
        return bool(np.all(r[live] <= self.bound + eps))


def convergence_profile(
    sifs: Sifs, sigma: CodeString, maxdepth: int, probe=None
) -> ConvergenceProfile:
    if maxdepth < 2:
        raise ValidationError("maxdepth must be at least 2")
    x = uniform_grid(sifs, 2049) if probe is None else np.asarray(probe, dtype=float)
    prev = evaluate(sifs, sigma, 0, x).y
    d = np.empty(maxdepth)
    for j in range(1, maxdepth + 1):
        cur = evaluate(sifs, sigma, j, x).y
        d[j - 1] = np.abs(cur - prev).max()
        prev = cur
    return ConvergenceProfile(d, sifs.max_gamma)

