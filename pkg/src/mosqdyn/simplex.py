"""
The normalized operator U on the simplex and its one-dimensional reduction T.

Dividing W0's output by its coordinate sum gives U, which preserves
S = {(x, y) >= 0 : x + y = 1}. Substituting y = 1 - x yields the rational map

    T(x) = (a x^2 + b x + beta) / (e x^2 + (1 - d0) x + f)

on [0, 1], with a = 1-d0-beta, b = 1-d0-alpha, e = mu-beta-d0, f = beta-mu+1.
The denominator factors as (1 + x)(f + e x).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ModelParams, State2, require_lemma1
from .errors import DegenerateDenominator, InvariantViolation, MaxIterExceeded

CASE_TOL = 1e-12
DERIVATIVE_GRID = 1000


@dataclass(frozen=True)
class TCoefficients:
    a: float
    b: float
    e: float
    f: float
    d: float

    @classmethod
    def from_params(cls, p: ModelParams) -> "TCoefficients":
        a = 1.0 - p.d0 - p.beta
        b = 1.0 - p.d0 - p.alpha
        e = p.mu - p.beta - p.d0
        f = p.beta + (1.0 - p.mu)  # exact when mu = 1
        d = p.alpha * e * e + (f - e) * ((1.0 - p.d0) * (1.0 - p.mu) + p.alpha * e)
        return cls(a, b, e, f, d)


def step_u(s: State2, p: ModelParams) -> State2:
    """Apply the normalized operator U to a point of the simplex."""
    require_lemma1(p)
    if abs(s.x + s.y - 1.0) > 1e-12 or not s.in_quadrant:
        raise ValueError(f"state is not on the simplex: {s!r}")
    x, y = s.x, s.y
    den = (1.0 + x) * ((p.beta + (1.0 - p.mu)) * y + (1.0 - p.d0) * x)
    if not den > 1e-300:
        raise DegenerateDenominator(f"normalizing denominator {den!r} at {s!r}")
    nx = ((p.beta * y + (1.0 - p.d0) * x) * (1.0 + x) - p.alpha * x) / den
    ny = (p.alpha * x + (1.0 + x) * (1.0 - p.mu) * y) / den
    return State2(nx, ny)


def _num_den(x, p: ModelParams):
    c = TCoefficients.from_params(p)
    num = (c.a * x + c.b) * x + p.beta
    den = (c.e * x + (1.0 - p.d0)) * x + c.f
    return num, den


def t_map(x, p: ModelParams):
    """Evaluate T at a scalar or array of points in [0, 1]."""
    require_lemma1(p)
    if np.any((np.asarray(x) < 0.0) | (np.asarray(x) > 1.0)):
        raise ValueError("T is defined on [0, 1]")
    num, den = _num_den(x, p)
    # the exact range is [0, 1]; clipping only removes last-ulp overshoot
    return np.clip(num / den, 0.0, 1.0)


def t_iterate(x, p: ModelParams, k: int):
    """k-fold composition of T, vectorized over ``x``."""
    for _ in range(k):
        x = t_map(x, p)
    return x


def t_derivative(x, p: ModelParams):
    """Analytic T'(x) by the quotient rule."""
    c = TCoefficients.from_params(p)
    num, den = _num_den(x, p)
    dnum = 2.0 * c.a * x + c.b
    dden = 2.0 * c.e * x + (1.0 - p.d0)
    return (dnum * den - num * dden) / (den * den)


# --- fixed point ---------------------------------------------------------


def fixed_point_cubic(p: ModelParams) -> tuple[float, float, float, float]:
    """Coefficients (highest first) of l(x) = e x^3 + beta x^2 + (beta-mu+d0+alpha) x - beta.

    Its roots are the fixed points of T.
    """
    e = p.mu - p.beta - p.d0
    return (e, p.beta, p.beta - p.mu + p.d0 + p.alpha, -p.beta)


def _cubic(coeffs, x):
    c3, c2, c1, c0 = coeffs
    return ((c3 * x + c2) * x + c1) * x + c0


def _dcubic(coeffs, x):
    c3, c2, c1, _ = coeffs
    return (3.0 * c3 * x + 2.0 * c2) * x + c1


def _hybrid_root(coeffs, lo=0.0, hi=1.0, xtol=1e-15, maxiter=200):
    """Newton steps kept inside a shrinking bracket; bisection when Newton leaves it."""
    flo, fhi = _cubic(coeffs, lo), _cubic(coeffs, hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise ValueError("root is not bracketed")
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = _cubic(coeffs, x)
        if fx == 0:
            return x
        if (fx < 0) == (flo < 0):
            lo, flo = x, fx
        else:
            hi = x
        dfx = _dcubic(coeffs, x)
        nx = x - fx / dfx if dfx != 0 else lo - 1.0
        if not lo < nx < hi:
            nx = 0.5 * (lo + hi)
        if abs(nx - x) <= xtol or hi - lo <= xtol:
            return nx
        x = nx
    return x


def closed_form_fixed_point(p: ModelParams) -> float:
    """(sqrt(alpha^2 + 4 beta^2) - alpha) / (2 beta), exact when beta + d0 = mu."""
    a, b = p.alpha, p.beta
    return (math.sqrt(a * a + 4.0 * b * b) - a) / (2.0 * b)


def cardano_fixed_point(p: ModelParams) -> complex:
    """Fixed point of T through the nested-radical (Cardano) expression.

    Intermediates are complex whenever the cubic has three real roots. The
    principal cube root yields the root in [0, 1] when e > 0; for e < 0 it
    is the next branch (times exp(2 pi i / 3)). Accuracy degrades as e -> 0,
    so this serves only as a cross-check on :func:`t_fixed_point`.
    """
    a, b = p.alpha, p.beta
    e = p.mu - p.beta - p.d0
    if e == 0:
        raise ZeroDivisionError("closed form is singular at beta + d0 = mu")
    d0_ = b * b - 3.0 * (a - e) * e
    inner = 9.0 * b * e * (a + 2.0 * e) - 2.0 * b**3
    rad = 4.0 * (-b * b + 3.0 * e * (a - e)) ** 3 + inner**2
    sigma = (2.0 / (inner + cmath.sqrt(rad))) ** (1.0 / 3.0)
    if e < 0:
        sigma *= cmath.exp(2j * math.pi / 3.0)
    return (sigma * d0_ + 1.0 / sigma - b) / (3.0 * e)


def t_fixed_point(p: ModelParams) -> float:
    """The unique fixed point x* of T in [0, 1].

    Uses the closed form when |beta + d0 - mu| < 1e-12, otherwise a
    safeguarded Newton/bisection search on l(x), which changes sign on
    [0, 1] since l(0) = -beta < 0 and l(1) = alpha > 0.
    """
    require_lemma1(p)
    coeffs = fixed_point_cubic(p)
    if abs(coeffs[0]) < CASE_TOL:
        return closed_form_fixed_point(p)
    return _hybrid_root(coeffs)


def sign_variations(values, tol: float = 0.0) -> int:
    """Sign changes in a sequence, zeros (|v| <= tol) skipped."""
    signs = [v > 0 for v in values if abs(v) > tol]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def budan_fourier_variations(coeffs, c: float) -> int:
    """Sign variations of (l(c), l'(c), l''(c), ...) for polynomial ``coeffs`` (highest first)."""
    poly = np.poly1d(np.asarray(coeffs, dtype=float))
    seq = []
    for _ in range(poly.order + 1):
        seq.append(float(poly(c)))
        poly = poly.deriv()
    return sign_variations(seq)


# --- stability of x* -----------------------------------------------------


def closed_form_multiplier(p: ModelParams) -> float:
    """T'(x*) for the beta + d0 = mu case, in closed form."""
    a, b = p.alpha, p.beta
    r = math.sqrt(a * a + 4.0 * b * b)
    return 1.0 - (a * a + 4.0 * b * b + (a - 2.0 * b) * r) / (2.0 * a * (1.0 - p.d0))


def t_fixed_point_stability(p: ModelParams) -> float:
    """Multiplier T'(x*). Always strictly inside (-1, 1) under the invariance conditions."""
    m = float(t_derivative(t_fixed_point(p), p))
    if not -1.0 < m < 1.0:
        raise InvariantViolation(f"|T'(x*)| = {abs(m)!r} is not < 1 for {p!r}")
    return m


# --- monotonicity --------------------------------------------------------


class Shape(str, enum.Enum):
    INCREASING = "IncreasingOnS"
    DECREASING = "DecreasingOnS"
    DECREASING_THEN_INCREASING = "DecreasingThenIncreasing"


class CaseTag(str, enum.Enum):
    E_ZERO = "E_Zero"
    E_EQUALS_F = "E_Equals_F"
    GENERAL = "General"


@dataclass(frozen=True)
class MonotonicityProfile:
    shape: Shape
    x_min: Optional[float]
    case_tag: CaseTag
    boundary: bool = False
    source: str = "closed-form"

    def to_dict(self) -> dict:
        return {
            "shape": self.shape.value,
            "x_min": self.x_min,
            "case_tag": self.case_tag.value,
            "boundary": self.boundary,
            "source": self.source,
        }


def derivative_sign_shape(p: ModelParams, n: int = DERIVATIVE_GRID) -> tuple[Shape, Optional[float]]:
    """Shape of T read off the sign of T' on an n-point grid of [0, 1].

    Returns the shape and, for a decreasing-then-increasing map, the grid
    bracket midpoint of the sign change.
    """
    xs = np.linspace(0.0, 1.0, n)
    s = np.sign(t_derivative(xs, p))
    nz = s != 0
    if not nz.any():
        return Shape.INCREASING, None
    s_nz, xs_nz = s[nz], xs[nz]
    if np.all(s_nz > 0):
        return Shape.INCREASING, None
    if np.all(s_nz < 0):
        return Shape.DECREASING, None
    changes = np.nonzero(np.diff(s_nz))[0]
    if len(changes) == 1 and s_nz[0] < 0:
        i = changes[0]
        return Shape.DECREASING_THEN_INCREASING, 0.5 * (xs_nz[i] + xs_nz[i + 1])
    raise InvariantViolation(f"unexpected derivative sign pattern for {p!r}")


def _closed_form_x_min(p: ModelParams, c: TCoefficients, tag: CaseTag) -> Optional[float]:
    a = p.alpha
    if tag is CaseTag.E_ZERO:
        if p.mu >= 1.0:
            return math.inf
        return math.sqrt(a / (1.0 - p.mu)) - 1.0
    if tag is CaseTag.E_EQUALS_F:
        w = 2.0 * (1.0 - p.mu)
        return (a - w) / (a + w)
    # general case; minimum exists only inside the alpha-windows
    k = (1.0 - p.d0) * (1.0 - p.mu)
    if c.d <= 0:
        return None
    if c.f > c.e:
        inside = k / c.f < a < 4.0 * k / (c.f - c.e)
    else:
        inside = a > k / c.f
    if not inside:
        return None
    sd, sa = math.sqrt(c.d), math.sqrt(a)
    return (sd - c.f * sa) / (c.e * sa - sd)


def t_monotonicity_profile(p: ModelParams) -> MonotonicityProfile:
    """Classify T on [0, 1] as increasing, decreasing, or decreasing-then-increasing.

    The case tag picks the closed-form location of the minimum (e = 0,
    e = f, or the general partial-fraction form). When no interior
    minimum exists, the direction of monotonicity is taken from the sign
    of T' on a grid.
    """
    require_lemma1(p)
    c = TCoefficients.from_params(p)
    if abs(c.e) < CASE_TOL:
        tag = CaseTag.E_ZERO
    elif abs(c.e - c.f) < CASE_TOL:
        tag = CaseTag.E_EQUALS_F
    else:
        tag = CaseTag.GENERAL
    boundary = (abs(c.e) < 1e3 * CASE_TOL and abs(c.e) > 0) or (
        abs(c.e - c.f) < 1e3 * CASE_TOL and c.e != c.f
    )
    xm = _closed_form_x_min(p, c, tag)
    if xm is not None and 0.0 < xm < 1.0:
        return MonotonicityProfile(Shape.DECREASING_THEN_INCREASING, xm, tag, boundary)
    if tag is not CaseTag.GENERAL and xm is not None:
        shape = Shape.INCREASING if xm <= 0.0 else Shape.DECREASING
        return MonotonicityProfile(shape, None, tag, boundary)
    shape, _ = derivative_sign_shape(p)
    if shape is Shape.DECREASING_THEN_INCREASING:
        # closed form refused; report the sign change the grid sees
        _, xm = derivative_sign_shape(p, 100 * DERIVATIVE_GRID)
        return MonotonicityProfile(shape, xm, tag, True, "grid")
    return MonotonicityProfile(shape, None, tag, boundary, "grid")


# --- periodic points -----------------------------------------------------


@dataclass(frozen=True)
class Period2Certificate:
    A: float
    B: float
    C: float
    max_quadratic_on_unit_interval: float
    conclusion: bool

    @property
    def abc_sum(self) -> float:
        return self.A + self.B + self.C

    def to_dict(self) -> dict:
        return {
            "A": self.A,
            "B": self.B,
            "C": self.C,
            "A_plus_B_plus_C": self.abc_sum,
            "max_quadratic_on_unit_interval": self.max_quadratic_on_unit_interval,
            "conclusion": self.conclusion,
        }


def quadratic_max_on_unit_interval(A: float, B: float, C: float) -> float:
    """Exact maximum of A x^2 + B x + C over [0, 1] from endpoints and vertex."""
    cands = [C, A + B + C]
    if A < 0:
        xv = -B / (2.0 * A)
        if 0.0 < xv < 1.0:
            cands.append(C - B * B / (4.0 * A))
    return max(cands)


def period2_certificate(p: ModelParams) -> Period2Certificate:
    """Certify that T has no 2-cycle in [0, 1].

    Off the fixed points, T(T(x)) = x reduces to A x^2 + B x + C = 0; the
    certificate holds when that quadratic is negative on all of [0, 1].
    """
    require_lemma1(p)
    a, b, mu, d0 = p.alpha, p.beta, p.mu, p.d0
    A = (1 - b) * (b - 2) + (b - mu + 1) * (b - mu) + d0 * (5 - 2 * b - mu - 2 * d0)
    B = 2 * (1 - d0) * (a + d0 + mu - 2) - a * b
    C = (b - mu + 1) * (a + d0 + mu - 2) - b * (2 - mu - d0)
    qmax = quadratic_max_on_unit_interval(A, B, C)
    return Period2Certificate(A, B, C, qmax, qmax < 0)


def two_cycle_gap(p: ModelParams, spacing: float = 1e-5, exclude: float = 1e-3) -> float:
    """min |T(T(x)) - x| over a uniform grid of [0, 1], skipping |x - x*| <= exclude."""
    n = int(round(1.0 / spacing)) + 1
    xs = np.linspace(0.0, 1.0, n)
    xs = xs[np.abs(xs - t_fixed_point(p)) > exclude]
    if xs.size == 0:
        return math.inf
    return float(np.min(np.abs(t_iterate(xs, p, 2) - xs)))


def periodic_sign_changes(p: ModelParams, period: int, n: int = 20001) -> int:
    """Sign changes of T^period(x) - x on a grid of [0, 1].

    A map whose only periodic point is x* gives exactly 1 for every period.
    """
    xs = np.linspace(0.0, 1.0, n)
    g = t_iterate(xs, p, period) - xs
    return sign_variations(g.tolist())


# --- omega-limit ---------------------------------------------------------


def t_orbit(x0: float, p: ModelParams, n: int) -> np.ndarray:
    out = np.empty(n + 1)
    out[0] = x = float(x0)
    for k in range(1, n + 1):
        x = float(t_map(x, p))
        out[k] = x
    return out


def omega_limit(x0: float, p: ModelParams, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Limit of the T-orbit of ``x0``.

    Converged means a successive difference below ``tol`` together with a
    distance below ``10 * tol`` from x*, so slow transients are not
    mistaken for the limit.
    """
    if not 0.0 <= x0 <= 1.0:
        raise ValueError(f"x0 must lie in [0, 1], got {x0!r}")
    xstar = t_fixed_point(p)
    c = TCoefficients.from_params(p)
    a, b, beta, e, f1, f = c.a, c.b, p.beta, c.e, 1.0 - p.d0, c.f
    x = float(x0)
    for k in range(max_iter + 1):
        nx = ((a * x + b) * x + beta) / ((e * x + f1) * x + f)
        if abs(nx - x) < tol and abs(nx - xstar) < 10 * tol:
            return nx
        x = nx
    raise MaxIterExceeded(
        f"T-orbit from {x0!r} did not settle within {max_iter} steps", last=x, iterations=max_iter
    )
