"""Data model for super fractal interpolation.

A :class:`Sifs` is a pool of ``M`` iterated function systems over one set of
interpolation nodes.  All ``M`` systems share the horizontal contractions
``L_n(x) = a_n x + b_n``; each system ``k`` has its own vertical maps
``G_{n,k}(x, y) = gamma_{n,k} y + q_{n,k}(x)``.  Indices are 1-based in
user-facing text (code strings, addresses) and 0-based in arrays.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (
    AlphabetMismatch,
    CodeStringSyntax,
    DegreeTooHigh,
    DigitOutOfRange,
    GammaCollision,
    GammaOutOfRange,
    InvalidSifs,
    KappaOutOfRange,
    NonIncreasingAbscissae,
    ShapeMismatch,
    TooFewNodes,
    ValidationError,
)

MAX_DEGREE = 16
RESIDUAL_TOL = 1e-9
GAMMA_SEPARATION = 1e-12


@dataclass(frozen=True)
class InterpolationData:
    """Nodes ``(x_i, y_i)``, ``i = 0..N``, with strictly increasing abscissae."""

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) != len(self.y):
            raise ShapeMismatch(f"{len(self.x)} abscissae but {len(self.y)} ordinates")
        if len(self.x) < 3:
            raise TooFewNodes(f"need at least 3 nodes, got {len(self.x)}")
        if not all(math.isfinite(v) for v in self.x + self.y):
            raise ValidationError("node coordinates must be finite")
        for i in range(1, len(self.x)):
            if not self.x[i] > self.x[i - 1]:
                raise NonIncreasingAbscissae(
                    f"x[{i}] = {self.x[i]!r} does not exceed x[{i - 1}] = {self.x[i - 1]!r}"
                )

    @classmethod
    def from_nodes(cls, nodes: Iterable[Sequence[float]]) -> InterpolationData:
        nodes = [tuple(p) for p in nodes]
        if any(len(p) != 2 for p in nodes):
            raise ShapeMismatch("each node must be an (x, y) pair")
        return cls(tuple(p[0] for p in nodes), tuple(p[1] for p in nodes))

    @property
    def N(self) -> int:
        return len(self.x) - 1

    @property
    def x0(self) -> float:
        return self.x[0]

    @property
    def xN(self) -> float:
        return self.x[-1]

    @property
    def length(self) -> float:
        return self.x[-1] - self.x[0]

    @property
    def nodes(self) -> list[tuple[float, float]]:
        return list(zip(self.x, self.y))

    def blended(self, kappa: float) -> np.ndarray:
        """Node ordinates ``kappa x_i + (1 - kappa) y_i`` (the plain ``y_i`` at ``kappa = 0``)."""
        x, y = np.asarray(self.x), np.asarray(self.y)
        if kappa == 0:
            return y.copy()
        return kappa * x + (1.0 - kappa) * y


@dataclass(frozen=True)
class HorizontalMap:
    """``L_n(x) = a x + b`` mapping ``[x_0, x_N]`` onto ``[x_{n-1}, x_n]``."""

    a: float
    b: float

    def __call__(self, x):
        return self.a * x + self.b

    def inverse(self, x):
        return (x - self.b) / self.a


def horizontal_maps(data: InterpolationData) -> tuple[HorizontalMap, ...]:
    x, span = data.x, data.length
    return tuple(
        HorizontalMap(
            (x[n] - x[n - 1]) / span,
            (data.xN * x[n - 1] - data.x0 * x[n]) / span,
        )
        for n in range(1, data.N + 1)
    )


@dataclass(frozen=True)
class VerticalMap:
    """``G(x, y) = gamma y + q(x)`` with ``q`` stored as ascending coefficients."""

    gamma: float
    q: tuple[float, ...]

    def __post_init__(self):
        q = tuple(float(c) for c in self.q) or (0.0,)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "q", q)
        if len(q) - 1 > MAX_DEGREE:
            raise DegreeTooHigh(f"degree {len(q) - 1} exceeds {MAX_DEGREE}")

    @property
    def degree(self) -> int:
        return len(self.q) - 1

    def qval(self, x):
        return P.polyval(x, self.q)

    def __call__(self, x, y):
        return self.gamma * y + P.polyval(x, self.q)


@dataclass(frozen=True)
class Sifs:
    """Pool of ``M`` IFS sharing nodes and horizontal maps.

    ``vertical[k][n]`` is the map of family ``k + 1`` on subinterval ``n + 1``.
    Construction only checks structure; :func:`validate_sifs` checks the
    mathematical invariants (contractivity, join-up, distinct gammas).
    """

    data: InterpolationData
    vertical: tuple[tuple[VerticalMap, ...], ...]
    kappa: float = 0.0

    def __post_init__(self):
        vertical = tuple(tuple(row) for row in self.vertical)
        object.__setattr__(self, "vertical", vertical)
        object.__setattr__(self, "kappa", float(self.kappa))
        if not vertical:
            raise ShapeMismatch("a Sifs needs at least one family")
        for k, row in enumerate(vertical):
            if len(row) != self.data.N:
                raise ShapeMismatch(
                    f"family {k + 1} has {len(row)} maps, expected N = {self.data.N}"
                )

    @classmethod
    def from_arrays(cls, data: InterpolationData, gammas, qs, kappa: float = 0.0) -> Sifs:
        """Build from an ``M x N`` gamma matrix and an ``M x N`` nest of coefficient lists."""
        gammas = np.atleast_2d(np.asarray(gammas, dtype=float))
        if len(qs) != gammas.shape[0]:
            raise ShapeMismatch("gammas and q disagree on the number of families")
        vertical = tuple(
            tuple(VerticalMap(g, q) for g, q in zip(grow, qrow))
            for grow, qrow in zip(gammas, qs)
        )
        return cls(data, vertical, kappa)

    @property
    def M(self) -> int:
        return len(self.vertical)

    @property
    def N(self) -> int:
        return self.data.N

    @cached_property
    def horizontal(self) -> tuple[HorizontalMap, ...]:
        return horizontal_maps(self.data)

    @cached_property
    def a(self) -> np.ndarray:
        return np.array([h.a for h in self.horizontal])

    @cached_property
    def b(self) -> np.ndarray:
        return np.array([h.b for h in self.horizontal])

    @cached_property
    def gamma(self) -> np.ndarray:
        """``M x N`` array of vertical scaling factors."""
        return np.array([[v.gamma for v in row] for row in self.vertical])

    @cached_property
    def qcoef(self) -> np.ndarray:
        """``M x N x (D + 1)`` zero-padded coefficient array, ``D`` the max degree."""
        deg = max(v.degree for row in self.vertical for v in row)
        out = np.zeros((self.M, self.N, deg + 1))
        for k, row in enumerate(self.vertical):
            for n, v in enumerate(row):
                out[k, n, : len(v.q)] = v.q
        return out

    @cached_property
    def seed_y(self) -> np.ndarray:
        """Node ordinates the attractor passes through (kappa-blended)."""
        return self.data.blended(self.kappa)

    @property
    def max_gamma(self) -> float:
        return float(np.abs(self.gamma).max())

    def to_dict(self) -> dict:
        return {
            "nodes": [[x, y] for x, y in self.data.nodes],
            "kappa": self.kappa,
            "families": [
                {"gamma": [v.gamma for v in row], "q": [list(v.q) for v in row]}
                for row in self.vertical
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> Sifs:
        try:
            data = InterpolationData.from_nodes(d["nodes"])
            fams = d["families"]
            gammas = [f["gamma"] for f in fams]
            qs = [f["q"] for f in fams]
            kappa = float(d.get("kappa", 0.0))
        except (KeyError, TypeError) as exc:
            raise InvalidSifs(f"malformed Sifs document: {exc!r}") from None
        if any(len(g) != data.N or len(q) != data.N for g, q in zip(gammas, qs)):
            raise ShapeMismatch("every family needs N gammas and N polynomials")
        return cls.from_arrays(data, gammas, qs, kappa)

    def to_json(self, **extra) -> str:
        d = self.to_dict()
        d.update(extra)
        return json.dumps(d, indent=2)

    @classmethod
    def from_json(cls, text: str) -> Sifs:
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidSifs(f"not valid JSON: {exc}") from None
        return cls.from_dict(d)

    @cached_property
    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _check_gammas(gammas: np.ndarray, allow_gamma_collision: bool) -> None:
    bad = np.argwhere(~(np.abs(gammas) < 1))
    if bad.size:
        k, n = bad[0]
        raise GammaOutOfRange(f"|gamma[{n + 1},{k + 1}]| = {abs(gammas[k, n])} is not < 1")
    if gammas.shape[0] < 2:
        return
    for n in range(gammas.shape[1]):
        col = np.sort(gammas[:, n])
        gap = np.diff(col).min()
        if gap <= GAMMA_SEPARATION:
            msg = f"two families share gamma on subinterval {n + 1} (separation {gap:.3g})"
            if not allow_gamma_collision:
                raise GammaCollision(msg)
            warnings.warn(msg, stacklevel=3)


def solve_maps(
    data: InterpolationData,
    gammas,
    kappa: float = 0.0,
    allow_gamma_collision: bool = False,
) -> Sifs:
    """Solve the affine vertical maps from the (kappa-) join-up conditions.

    ``gammas`` is an ``M x N`` matrix; row ``k`` holds family ``k + 1``.  For
    each ``(n, k)`` the two endpoint equations determine ``q(x) = e x + f``
    uniquely, since ``x_0 != x_N``.
    """
    gammas = np.atleast_2d(np.asarray(gammas, dtype=float))
    if gammas.ndim != 2 or gammas.shape[1] != data.N:
        raise ShapeMismatch(f"gammas must be M x {data.N}, got {gammas.shape}")
    if not 0.0 <= kappa < 1.0:
        raise KappaOutOfRange(f"kappa = {kappa} is outside [0, 1)")
    _check_gammas(gammas, allow_gamma_collision)

    t = data.blended(kappa)
    span = data.length
    e = (t[1:] - t[:-1] - gammas * (t[-1] - t[0])) / span
    f = t[:-1] - gammas * t[0] - e * data.x0
    qs = [[(f[k, n], e[k, n]) for n in range(data.N)] for k in range(gammas.shape[0])]
    return Sifs.from_arrays(data, gammas, qs, kappa)


@dataclass
class Check:
    name: str
    passed: bool
    residual: float = 0.0
    detail: str = ""
    error: type = InvalidSifs
    warning_only: bool = False


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed or c.warning_only for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed and not c.warning_only]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def raise_for_failures(self) -> None:
        bad = self.failures()
        if bad:
            c = bad[0]
            raise c.error(f"{c.name}: {c.detail}")

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "residual": c.residual, "detail": c.detail}
                for c in self.checks
            ],
        }


def validate_sifs(
    sifs: Sifs, tol: float = RESIDUAL_TOL, allow_gamma_collision: bool = False
) -> ValidationReport:
    """Re-check every Sifs invariant and report residuals instead of raising."""
    rep = ValidationReport()
    data = sifs.data

    # horizontal maps: slope range and endpoint images
    a, b = sifs.a, sifs.b
    h_res = 0.0
    for n in range(1, data.N + 1):
        L = sifs.horizontal[n - 1]
        h_res = max(h_res, abs(L(data.x0) - data.x[n - 1]), abs(L(data.xN) - data.x[n]))
    slopes_ok = bool(np.all((a > 0) & (a < 1)))
    rep.checks.append(
        Check(
            "horizontal_maps",
            slopes_ok and h_res <= tol * max(1.0, abs(data.xN), abs(data.x0)),
            h_res,
            f"a in ({a.min():.6g}, {a.max():.6g}), endpoint residual {h_res:.3g}; b = {b.tolist()}",
        )
    )

    g = sifs.gamma
    gmax = float(np.abs(g).max())
    rep.checks.append(
        Check("gamma_range", gmax < 1, gmax, f"max |gamma| = {gmax:.6g}", GammaOutOfRange)
    )

    if sifs.M > 1:
        sep = min(float(np.diff(np.sort(g[:, n])).min()) for n in range(sifs.N))
    else:
        sep = math.inf
    rep.checks.append(
        Check(
            "gamma_distinct",
            sep > GAMMA_SEPARATION,
            sep if math.isfinite(sep) else 0.0,
            f"min separation across families {sep:.3g}",
            GammaCollision,
            warning_only=allow_gamma_collision,
        )
    )

    rep.checks.append(
        Check(
            "kappa_range",
            0.0 <= sifs.kappa < 1.0,
            sifs.kappa,
            f"kappa = {sifs.kappa}",
            KappaOutOfRange,
        )
    )

    deg = max(v.degree for row in sifs.vertical for v in row)
    rep.checks.append(
        Check("degree", deg <= MAX_DEGREE, float(deg), f"max degree {deg}", DegreeTooHigh)
    )

    res, where = join_up_residuals(sifs)
    worst = float(res.max())
    k, n, side = where
    scale = max(1.0, float(np.abs(sifs.seed_y).max()))
    rep.checks.append(
        Check(
            "join_up",
            worst <= tol * scale,
            worst,
            f"max residual {worst:.3g} at family {k + 1}, subinterval {n + 1}, "
            f"{'left' if side == 0 else 'right'} end",
        )
    )
    return rep


def join_up_residuals(sifs: Sifs) -> tuple[np.ndarray, tuple[int, int, int]]:
    """``M x N x 2`` array of |G(x_0, t_0) - t_{n-1}| and |G(x_N, t_N) - t_n|."""
    t = sifs.seed_y
    x0, xN = sifs.data.x0, sifs.data.xN
    res = np.empty((sifs.M, sifs.N, 2))
    for k, row in enumerate(sifs.vertical):
        for n, v in enumerate(row):
            res[k, n, 0] = abs(v(x0, t[0]) - t[n])
            res[k, n, 1] = abs(v(xN, t[-1]) - t[n + 1])
    where = np.unravel_index(int(np.argmax(res)), res.shape)
    return res, tuple(int(i) for i in where)


_CODE_RE = re.compile(r"^([1-9]*)\(([1-9]+)\)$")


@dataclass(frozen=True)
class CodeString:
    """Eventually periodic sequence over ``{1..M}``: ``preperiod`` then ``period`` forever."""

    preperiod: tuple[int, ...]
    period: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "preperiod", tuple(int(d) for d in self.preperiod))
        object.__setattr__(self, "period", tuple(int(d) for d in self.period))
        if not self.period:
            raise CodeStringSyntax("period must be nonempty")
        if any(d < 1 for d in self.preperiod + self.period):
            raise DigitOutOfRange("code digits start at 1")

    @classmethod
    def parse(cls, text: str) -> CodeString:
        """Parse ``[preperiod](period)``, e.g. ``(112)`` or ``12(21)``."""
        m = _CODE_RE.match(text.strip())
        if not m:
            raise CodeStringSyntax(f"cannot parse code string {text!r}; expected e.g. '(12)' or '1(2)'")
        return cls(tuple(int(c) for c in m.group(1)), tuple(int(c) for c in m.group(2)))

    @classmethod
    def constant(cls, k: int) -> CodeString:
        return cls((), (k,))

    def __str__(self) -> str:
        return "".join(map(str, self.preperiod)) + "(" + "".join(map(str, self.period)) + ")"

    def digit(self, j: int) -> int:
        """1-based position ``j >= 1``."""
        if j < 1:
            raise IndexError("positions start at 1")
        if j <= len(self.preperiod):
            return self.preperiod[j - 1]
        return self.period[(j - len(self.preperiod) - 1) % len(self.period)]

    def digits(self, count: int) -> list[int]:
        return [self.digit(j) for j in range(1, count + 1)]

    @property
    def max_digit(self) -> int:
        return max(self.preperiod + self.period)

    def check_alphabet(self, M: int) -> None:
        if self.max_digit > M:
            raise DigitOutOfRange(f"code string {self} uses digit {self.max_digit} but M = {M}")


def code_metric(s: CodeString, t: CodeString, M: int) -> float:
    """``sum_j |s_j - t_j| (M + 1)^-j``, summed exactly over one common period."""
    for c in (s, t):
        if c.max_digit > M:
            raise AlphabetMismatch(f"{c} has digits outside 1..{M}")
    r = Fraction(1, M + 1)
    head = max(len(s.preperiod), len(t.preperiod))
    cycle = math.lcm(len(s.period), len(t.period))
    total = sum(
        (abs(s.digit(j) - t.digit(j)) * r**j for j in range(1, head + 1)), Fraction(0)
    )
    tail = sum(
        (abs(s.digit(j) - t.digit(j)) * r**j for j in range(head + 1, head + cycle + 1)),
        Fraction(0),
    )
    total += tail / (1 - r**cycle)
    return float(total)


def load_sifs(path) -> Sifs:
    with open(path) as fh:
        return Sifs.from_json(fh.read())
