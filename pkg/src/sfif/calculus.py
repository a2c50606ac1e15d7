"""Integral and derivative SIFS.

Both constructions are exact coefficient arithmetic on the vertical-map
polynomials; numerical quadrature and finite differences only appear in
the tests that check them.  The kappa-parameterized variants are not
supported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .attractor import evaluate
from .core import MAX_DEGREE, CodeString, InterpolationData, Sifs
from .errors import (
    ConditionViolated,
    DegreeTooHigh,
    InfeasibleOrder,
    KappaUnsupported,
    SingularDenominator,
    ValidationError,
)

TOL = 1e-9


def definite_integral(q, lo: float, hi: float) -> float:
    return float(P.polyval(hi, P.polyint(q, lbnd=lo)))


def _scale(*values) -> float:
    return max([1.0] + [float(np.max(np.abs(v))) for v in values])


@dataclass
class IntegralConditionReport:
    """Per-family ratios ``R_k = sum_j a_j int q_{j,k} / (1 - sum_j a_j gamma_{j,k})``."""

    ratios: list[float]
    denominators: list[float]
    spread: float
    passed: bool
    reason: str = ""

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def check_integral_condition(sifs: Sifs, tol: float = TOL) -> IntegralConditionReport:
    """Test that ``R_k`` is family independent and differs from 1.

    Tolerances are relative to ``max(1, |R|)``.
    """
    a, x0, xN = sifs.a, sifs.data.x0, sifs.data.xN
    ratios, dens = [], []
    for k, row in enumerate(sifs.vertical):
        den = 1.0 - float((a * sifs.gamma[k]).sum())
        if abs(den) <= tol:
            raise SingularDenominator(f"1 - sum a_j gamma_(j,{k + 1}) = {den:.3g}")
        num = sum(a[n] * definite_integral(v.q, x0, xN) for n, v in enumerate(row))
        ratios.append(num / den)
        dens.append(den)
    r = np.asarray(ratios)
    spread = float(r.max() - r.min())
    scale = _scale(r)
    reason = ""
    if spread > tol * scale:
        reason = f"ratios differ across families by {spread:.3g}"
    elif np.any(np.abs(r - 1.0) <= tol * scale):
        reason = "ratio equals 1"
    return IntegralConditionReport(ratios, dens, spread, not reason, reason)


def _derivation(base: Sifs, operation: str, **kw) -> dict:
    return {"base": base.content_hash, "operation": operation, **kw}


@dataclass
class IntegralSifs:
    """SIFS whose attractor is ``y0hat + integral_{x_0}^x g_sigma``.

    ``sifs`` lives on the node data ``(x_i, yhat_i)`` with vertical maps
    ``a_n gamma_{n,k} y + qhat_{n,k}(x)``.
    """

    sifs: Sifs
    y0hat: float
    yhat: tuple[float, ...]
    node_spread: float
    base: Sifs = field(repr=False, compare=False)

    @property
    def gamma_hat(self) -> np.ndarray:
        return self.sifs.gamma

    @property
    def derivation(self) -> dict:
        return _derivation(self.base, "integrate", order=1, y0hat=self.y0hat)

    def to_json(self) -> str:
        return self.sifs.to_json(derivation=self.derivation)


def integral_node_values(sifs: Sifs, y0hat: float, ratios) -> np.ndarray:
    """``M x (N + 1)`` node values ``yhat_{n,k}`` computed family by family."""
    a, x0, xN = sifs.a, sifs.data.x0, sifs.data.xN
    out = np.empty((sifs.M, sifs.N + 1))
    for k, row in enumerate(sifs.vertical):
        steps = [
            a[n] * (v.gamma * ratios[k] + definite_integral(v.q, x0, xN))
            for n, v in enumerate(row)
        ]
        out[k, 0] = y0hat
        out[k, 1:] = y0hat + np.cumsum(steps)
    return out


def integrate_sifs(sifs: Sifs, y0hat: float = 0.0, tol: float = TOL) -> IntegralSifs:
    """Build the integral SIFS.

    Besides the ratio condition, the interior node values must agree across
    families; the ratio condition alone only pins down ``yhat_N``.
    """
    if sifs.kappa != 0:
        raise KappaUnsupported("integration of kappa-SFIFs is not supported")
    rep = check_integral_condition(sifs, tol)
    if not rep.passed:
        raise ConditionViolated(rep.reason)
    yk = integral_node_values(sifs, y0hat, rep.ratios)
    spread = float((yk.max(axis=0) - yk.min(axis=0)).max())
    if spread > tol * _scale(yk):
        raise ConditionViolated(f"interior integral node values differ across families by {spread:.3g}")
    yhat = yk.mean(axis=0)

    a, x0 = sifs.a, sifs.data.x0
    gammas, qs = [], []
    for row in sifs.vertical:
        grow, qrow = [], []
        for n, v in enumerate(row):
            if v.degree + 1 > MAX_DEGREE:
                raise DegreeTooHigh(f"integrated polynomial would have degree {v.degree + 1}")
            qhat = a[n] * P.polyint(v.q, lbnd=x0)
            qhat[0] += yhat[n] - a[n] * v.gamma * y0hat
            grow.append(a[n] * v.gamma)
            qrow.append(qhat)
        gammas.append(grow)
        qs.append(qrow)
    derived = Sifs.from_arrays(InterpolationData(sifs.data.x, tuple(yhat)), gammas, qs)
    return IntegralSifs(derived, float(y0hat), tuple(float(v) for v in yhat), spread, sifs)


def _derived_maps(sifs: Sifs, order: int):
    """Yield ``(j, gamma_j, q_j)`` for ``j = 1..order`` by the one-step recursion."""
    a = sifs.a
    g = sifs.gamma.copy()
    q = [[np.asarray(v.q) for v in row] for row in sifs.vertical]
    for j in range(1, order + 1):
        g = g / a[None, :]
        q = [[P.polyder(c) / a[n] for n, c in enumerate(row)] for row in q]
        yield j, g, q


@dataclass
class DerivativeLevel:
    order: int
    ratios: list[float]
    ratio_spread: float
    y_start: list[float]
    y_end: list[float]
    endpoint_spread: float
    continuity_residual: float


@dataclass
class DerivativeConditionReport:
    order: int
    margins: list[list[float]]
    feasible: bool
    levels: list[DerivativeLevel] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def min_margin(self) -> float:
        return float(np.min(self.margins))

    def conditions_hold(self, tol: float = TOL) -> bool:
        return all(
            lv.ratio_spread <= tol * _scale(lv.ratios)
            and lv.endpoint_spread <= tol * _scale(lv.y_start, lv.y_end)
            and lv.continuity_residual <= tol * _scale(lv.y_start, lv.y_end)
            for lv in self.levels
        )

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "margins": self.margins,
            "feasible": self.feasible,
            "conditions_hold": self.conditions_hold(),
            "levels": [lv.__dict__ for lv in self.levels],
            "notes": self.notes,
        }


def check_derivative_condition(sifs: Sifs, order: int) -> DerivativeConditionReport:
    """Margins ``a_i^n - |gamma_{i,k}|`` plus the per-order consistency residuals."""
    if order < 0:
        raise ValidationError("order must be >= 0")
    a, x0, xN = sifs.a, sifs.data.x0, sifs.data.xN
    margins = a[None, :] ** order - np.abs(sifs.gamma)
    rep = DerivativeConditionReport(order, margins.tolist(), bool(np.all(margins > 0)))
    rep.notes.append("vertical maps are polynomials, hence C^infinity")
    with np.errstate(divide="ignore", invalid="ignore"):
        for j, g, q in _derived_maps(sifs, order):
            den = 1.0 - (a[None, :] * g).sum(axis=1)
            num = np.array(
                [sum(a[n] * definite_integral(c, x0, xN) for n, c in enumerate(row)) for row in q]
            )
            ratios = num / den
            y0 = np.array([P.polyval(x0, row[0]) for row in q]) / (1.0 - g[:, 0])
            yN = np.array([P.polyval(xN, row[-1]) for row in q]) / (1.0 - g[:, -1])
            cont = 0.0
            for k, row in enumerate(q):
                for i in range(sifs.N - 1):
                    left = g[k, i] * yN[k] + P.polyval(xN, row[i])
                    right = g[k, i + 1] * y0[k] + P.polyval(x0, row[i + 1])
                    cont = max(cont, abs(left - right))
            rep.levels.append(
                DerivativeLevel(
                    j,
                    ratios.tolist(),
                    float(np.ptp(ratios)),
                    y0.tolist(),
                    yN.tolist(),
                    float(max(np.ptp(y0), np.ptp(yN))),
                    float(cont),
                )
            )
    return rep


@dataclass
class DerivativeSifs:
    """SIFS whose attractor is the ``order``-th derivative of ``g_sigma``.

    Interior node values come from evaluating the derivative system at the
    nodes; ``node_spread`` records how much they vary with the family.
    """

    sifs: Sifs
    order: int
    y_start: float
    y_end: float
    node_spread: float
    continuity_residual: float
    base: Sifs = field(repr=False, compare=False)

    @property
    def derivation(self) -> dict:
        return _derivation(self.base, "differentiate", order=self.order)

    def to_json(self) -> str:
        return self.sifs.to_json(derivation=self.derivation)


def differentiate_sifs(sifs: Sifs, order: int = 1, tol: float = TOL) -> DerivativeSifs:
    if sifs.kappa != 0:
        raise KappaUnsupported("differentiation of kappa-SFIFs is not supported")
    rep = check_derivative_condition(sifs, order)
    if not rep.feasible:
        raise InfeasibleOrder(
            f"|gamma| < a^{order} fails (min margin {rep.min_margin:.3g})"
        )
    if order == 0:
        return DerivativeSifs(sifs, 0, sifs.seed_y[0], sifs.seed_y[-1], 0.0, 0.0, sifs)

    *_, (j, g, q) = _derived_maps(sifs, order)
    lv = rep.levels[-1]
    if lv.endpoint_spread > tol * _scale(lv.y_start, lv.y_end):
        raise ConditionViolated(
            f"endpoint derivative values differ across families by {lv.endpoint_spread:.3g}"
        )
    y0, yN = float(np.mean(lv.y_start)), float(np.mean(lv.y_end))
    x = np.asarray(sifs.data.x)
    provisional_y = y0 + (yN - y0) * (x - x[0]) / (x[-1] - x[0])
    provisional = Sifs.from_arrays(InterpolationData(sifs.data.x, tuple(provisional_y)), g, q)
    # at depth 1 an interior node pulls back to x_0, where the seed is already exact
    interior = np.array(
        [evaluate(provisional, CodeString.constant(k + 1), 1, x[1:-1]).y for k in range(sifs.M)]
    )
    spread = float(np.ptp(interior, axis=0).max()) if interior.size else 0.0
    ys = np.concatenate(([y0], interior[0], [yN]))
    derived = Sifs.from_arrays(InterpolationData(sifs.data.x, tuple(ys)), g, q)
    return DerivativeSifs(derived, order, y0, yN, spread, lv.continuity_residual, sifs)


def derivation_of(text: str) -> dict | None:
    """The ``derivation`` block of a serialized derived Sifs, if any."""
    return json.loads(text).get("derivation")
