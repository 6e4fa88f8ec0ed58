"""Fixed points of W0, their Jacobian spectra and hyperbolic classification."""

from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass

import numpy as np

from .core import ORIGIN, ModelParams, State2, _w, require_lemma1
from .errors import NotAFixedPoint

NONHYPERBOLIC_TOL = 1e-9
# relative width of the band around t1/t2 that origin_regime calls non-hyperbolic
THRESHOLD_TOL = 1e-12


class Stability(str, enum.Enum):
    ATTRACTING = "Attracting"
    REPELLING = "Repelling"
    SADDLE = "Saddle"
    NON_HYPERBOLIC = "NonHyperbolic"


@dataclass(frozen=True)
class RegimeThresholds:
    t1: float
    t2: float

    def to_dict(self) -> dict:
        return {"t1": self.t1, "t2": self.t2}


def regime_thresholds(p: ModelParams) -> RegimeThresholds:
    """beta-thresholds at which the origin changes type.

    t1 = mu(1 + d0/alpha); t2 = t1 + (4 - 2(alpha + mu + d0))/alpha.
    """
    t1 = p.mu * (1.0 + p.d0 / p.alpha)
    return RegimeThresholds(t1, t1 + (4.0 - 2.0 * (p.alpha + p.mu + p.d0)) / p.alpha)


@dataclass(frozen=True)
class FixedPointReport:
    location: State2
    eigenvalues: tuple[complex, complex]
    stability: Stability
    regime_thresholds: RegimeThresholds
    residual: float = 0.0

    @property
    def moduli(self) -> tuple[float, float]:
        return (abs(self.eigenvalues[0]), abs(self.eigenvalues[1]))

    def to_dict(self) -> dict:
        return {
            "location": self.location.to_dict(),
            "eigenvalues": [[ev.real, ev.imag] for ev in self.eigenvalues],
            "moduli": list(self.moduli),
            "stability": self.stability.value,
            "thresholds": self.regime_thresholds.to_dict(),
            "residual": self.residual,
        }


def w0_residual(p: ModelParams, z: State2) -> float:
    nx, ny = _w(z.x, z.y, p.alpha, p.beta, p.mu, p.d0, 0.0)
    return max(abs(nx - z.x), abs(ny - z.y))


def coexistence_point(p: ModelParams) -> State2:
    """Closed-form second fixed point z2, whether or not it lies in the quadrant."""
    a, b, mu, d0 = p.alpha, p.beta, p.mu, p.d0
    x = a * (b - mu) / (mu * d0) - 1.0
    y = (a * (b - mu) - mu * d0) / (mu * (b - mu))
    return State2(x, y)


def fixed_points_w0(p: ModelParams) -> list[State2]:
    """Fixed points of W0 in the nonnegative quadrant.

    The origin is always fixed. The coexistence point z2 is added only when
    beta > mu(1 + d0/alpha) and it lies strictly inside the quadrant.
    """
    require_lemma1(p)
    pts = [ORIGIN]
    if p.beta > p.origin_threshold:
        z2 = coexistence_point(p)
        if z2.x > 0 and z2.y > 0:
            pts.append(z2)
    return pts


def jacobian_w0(p: ModelParams, z: State2) -> np.ndarray:
    if z.x < 0:
        raise ValueError(f"Jacobian requested at x < 0: {z!r}")
    g = p.alpha / (1.0 + z.x) ** 2
    return np.array([[1.0 - p.d0 - g, p.beta], [g, 1.0 - p.mu]])


def eigenvalues_2x2(m) -> tuple[complex, complex]:
    """Roots of lambda^2 - tr(m) lambda + det(m), by modulus descending then real part."""
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2) or not np.all(np.isfinite(m)):
        raise ValueError("expected a finite 2x2 matrix")
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = tr * tr - 4.0 * det
    if disc >= 0:
        # cancellation-free form of the quadratic formula
        q = 0.5 * (tr + np.copysign(np.sqrt(disc), tr))
        r1 = complex(q)
        r2 = complex(det / q) if q != 0 else complex(0.0)
    else:
        s = cmath.sqrt(disc)
        r1, r2 = (tr + s) / 2, (tr - s) / 2
    return tuple(sorted((r1, r2), key=lambda v: (-abs(v), -v.real, -v.imag)))


def stability_from_moduli(moduli, tol: float = NONHYPERBOLIC_TOL) -> Stability:
    if any(abs(m - 1.0) < tol for m in moduli):
        return Stability.NON_HYPERBOLIC
    if all(m < 1.0 for m in moduli):
        return Stability.ATTRACTING
    if all(m > 1.0 for m in moduli):
        return Stability.REPELLING
    return Stability.SADDLE


def classify_fixed_point(
    p: ModelParams,
    z: State2,
    tol: float = NONHYPERBOLIC_TOL,
    residual_tol: float = 1e-10,
) -> FixedPointReport:
    """Classify a fixed point of W0 from the eigenvalue moduli of its Jacobian.

    Raises NotAFixedPoint if the max-norm residual of W0 at ``z`` exceeds
    ``residual_tol`` scaled by ``max(1, |z|)``.
    """
    res = w0_residual(p, z)
    if res > residual_tol * max(1.0, abs(z.x), abs(z.y)):
        raise NotAFixedPoint(f"{z!r} is not fixed under W0 (residual {res:.3g})")
    ev = eigenvalues_2x2(jacobian_w0(p, z))
    stab = stability_from_moduli([abs(v) for v in ev], tol)
    return FixedPointReport(z, ev, stab, regime_thresholds(p), res)


def origin_regime(p: ModelParams) -> Stability:
    """Type of the origin from comparing beta with t1 and t2 alone."""
    require_lemma1(p)
    th = regime_thresholds(p)
    b = p.beta
    if abs(b - th.t1) <= THRESHOLD_TOL * max(1.0, th.t1):
        return Stability.NON_HYPERBOLIC
    if abs(b - th.t2) <= THRESHOLD_TOL * max(1.0, abs(th.t2)):
        return Stability.NON_HYPERBOLIC
    if b < th.t1:
        return Stability.ATTRACTING
    if b < th.t2:
        return Stability.SADDLE
    return Stability.REPELLING


def shifted_origin_roots(p: ModelParams) -> tuple[float, float]:
    """Roots of L^2 - (d0+alpha+mu) L + mu(d0+alpha) - alpha*beta, where L = 1 - lambda.

    The discriminant equals (mu - d0 - alpha)^2 + 4 alpha beta > 0, so both
    roots are real.
    """
    s = p.d0 + p.alpha + p.mu
    prod = p.mu * (p.d0 + p.alpha) - p.alpha * p.beta
    r = np.sqrt(s * s - 4.0 * prod)
    return ((s + r) / 2.0, (s - r) / 2.0)


def fixed_point_reports(p: ModelParams, tol: float = NONHYPERBOLIC_TOL) -> list[FixedPointReport]:
    return [classify_fixed_point(p, z, tol) for z in fixed_points_w0(p)]
