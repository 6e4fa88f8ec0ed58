"""
Parameters, states and the two evolution operators of the larvae/adult model.

The general operator W acts on a state (x, y) of larvae and adult densities:

    x' = beta*y - alpha*x/(1+x) - (d0 + d1*x)*x + x
    y' = alpha*x/(1+x) - mu*y + y

W0 is the restriction to d1 = 0 under the quadrant-invariance conditions

    alpha > 0, beta > 0, 0 < mu <= 1, d0 > 0, alpha + d0 <= 1, d1 = 0

which guarantee that W0 maps the nonnegative quadrant to itself.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import (
    InvalidParams,
    LeftQuadrant,
    NonFiniteInput,
    SignConstraintViolated,
)

DEFAULT_TOL = 1e-10


@dataclass(frozen=True, slots=True)
class ModelParams:
    """The five rates of the model.

    Construct through :func:`validate_params` to get the sign checks; the
    dataclass itself stores whatever it is given.
    """

    alpha: float
    beta: float
    mu: float
    d0: float
    d1: float = 0.0

    @property
    def lemma1_violations(self) -> list[str]:
        """Human-readable list of the invariance conditions that fail."""
        out = []
        if not self.alpha > 0:
            out.append("alpha > 0")
        if not self.beta > 0:
            out.append("beta > 0")
        if not 0 < self.mu <= 1:
            out.append("0 < mu <= 1")
        if not self.d0 > 0:
            out.append("d0 > 0")
        if not self.alpha + self.d0 <= 1:
            out.append("alpha + d0 <= 1")
        if self.d1 != 0:
            out.append("d1 = 0")
        return out

    @property
    def lemma1_valid(self) -> bool:
        return not self.lemma1_violations

    @property
    def origin_threshold(self) -> float:
        """beta-threshold mu*(1 + d0/alpha) separating extinction from coexistence."""
        return self.mu * (1.0 + self.d0 / self.alpha)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.alpha, self.beta, self.mu, self.d0, self.d1)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "mu": self.mu,
            "d0": self.d0,
            "d1": self.d1,
            "lemma1_valid": self.lemma1_valid,
        }


@dataclass(frozen=True, slots=True)
class State2:
    """A point (x, y): larvae density x and adult density y.

    Construction does not enforce nonnegativity, so raw outputs of W can be
    represented; check :attr:`in_quadrant` where it matters.
    """

    x: float
    y: float

    @property
    def in_quadrant(self) -> bool:
        return self.x >= 0 and self.y >= 0

    def max_dist(self, other: "State2") -> float:
        return max(abs(self.x - other.x), abs(self.y - other.y))

    def __iter__(self):
        yield self.x
        yield self.y

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y}


ORIGIN = State2(0.0, 0.0)


def validate_params(alpha, beta, mu, d0, d1=0.0) -> ModelParams:
    """Build a :class:`ModelParams`, rejecting values outside the model definition.

    Raises NonFiniteInput for nan/inf and SignConstraintViolated unless
    alpha, beta, mu > 0 and d0, d1 >= 0. Violations of the stricter
    invariance conditions are *not* errors here; they are reported by
    ``lemma1_valid``.
    """
    vals = {"alpha": alpha, "beta": beta, "mu": mu, "d0": d0, "d1": d1}
    for name, v in vals.items():
        try:
            fv = float(v)
        except (TypeError, ValueError) as exc:
            raise NonFiniteInput(f"{name} is not a real number: {v!r}") from exc
        if not math.isfinite(fv):
            raise NonFiniteInput(f"{name} must be finite, got {v!r}")
        vals[name] = fv
    for name in ("alpha", "beta", "mu"):
        if not vals[name] > 0:
            raise SignConstraintViolated(f"{name} must be > 0, got {vals[name]!r}")
    for name in ("d0", "d1"):
        if not vals[name] >= 0:
            raise SignConstraintViolated(f"{name} must be >= 0, got {vals[name]!r}")
    return ModelParams(**vals)


def require_lemma1(p: ModelParams) -> None:
    bad = p.lemma1_violations
    if bad:
        raise InvalidParams(bad)


def _w(x, y, alpha, beta, mu, d0, d1):
    # shared by step_w and step_w0 so both agree bit-for-bit when d1 == 0
    em = alpha * x / (1.0 + x)
    return beta * y - em - (d0 + d1 * x) * x + x, em - mu * y + y


class WStep(NamedTuple):
    """Result of one application of W: the raw state plus a domain-exit flag."""

    state: State2
    left_quadrant: bool


def step_w(s: State2, p: ModelParams, *, strict: bool = False) -> WStep:
    """Apply the general operator W once.

    The result is never clamped. When it has a negative coordinate
    ``left_quadrant`` is set; with ``strict=True`` a :class:`LeftQuadrant`
    is raised instead.
    """
    if s.x == -1.0:
        raise SignConstraintViolated("W is undefined at x = -1")
    out = State2(*_w(s.x, s.y, p.alpha, p.beta, p.mu, p.d0, p.d1))
    left = not out.in_quadrant
    if left and strict:
        raise LeftQuadrant(out)
    return WStep(out, left)


def step_w0(s: State2, p: ModelParams) -> State2:
    """Apply W0 once; requires the invariance conditions and a state in the quadrant."""
    require_lemma1(p)
    if not s.in_quadrant:
        raise SignConstraintViolated(f"state must be nonnegative, got {s!r}")
    return State2(*_w(s.x, s.y, p.alpha, p.beta, p.mu, p.d0, 0.0))


@dataclass(frozen=True)
class Trajectory:
    """An orbit of W0 stored as an (m, 2) array of consecutive states.

    ``start_index`` is the iteration number of ``xy[0]``; it is 0 unless the
    orbit was recorded with a bounded window (``keep_last``).
    """

    xy: np.ndarray
    params: ModelParams
    converged: Optional[State2] = None
    tol: Optional[float] = None
    monotone_tail_start: Optional[int] = None
    start_index: int = 0
    iterations: int = 0
    left_quadrant_at: Optional[int] = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.xy)

    @property
    def points(self) -> list[State2]:
        return [State2(float(a), float(b)) for a, b in self.xy]

    @property
    def final(self) -> State2:
        a, b = self.xy[-1]
        return State2(float(a), float(b))

    @property
    def x(self) -> np.ndarray:
        return self.xy[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.xy[:, 1]


def _iterate(s0, p, n, stop_tol, target, keep_last, d1, check_exit):
    if n < 1:
        raise ValueError("n must be >= 1")
    a, b, mu, d0 = p.alpha, p.beta, p.mu, p.d0
    x, y = float(s0.x), float(s0.y)
    pts = deque([(x, y)], maxlen=keep_last) if keep_last else [(x, y)]
    converged = None
    left_at = None
    k = 0
    for k in range(1, n + 1):
        nx, ny = _w(x, y, a, b, mu, d0, d1)
        pts.append((nx, ny))
        step = max(abs(nx - x), abs(ny - y))
        x, y = nx, ny
        if check_exit and left_at is None and (x < 0 or y < 0):
            left_at = k
            break
        if not (math.isfinite(x) and math.isfinite(y)):
            break
        if stop_tol is not None and step < stop_tol:
            if target is None or max(abs(x - target.x), abs(y - target.y)) < 10 * stop_tol:
                converged = State2(x, y) if target is None else target
                break
    start = k + 1 - len(pts)
    xy = np.array(pts, dtype=float).reshape(-1, 2)
    return Trajectory(
        xy=xy,
        params=p,
        converged=converged,
        tol=stop_tol,
        start_index=start,
        iterations=k,
        left_quadrant_at=left_at,
    )


def iterate_w0(
    s0: State2,
    p: ModelParams,
    n: int,
    stop_tol: Optional[float] = None,
    *,
    target: Optional[State2] = None,
    keep_last: Optional[int] = None,
) -> Trajectory:
    """Iterate W0 up to ``n`` times from ``s0``.

    Stops early once successive states differ by less than ``stop_tol`` in
    the max-norm (and, if ``target`` is given, the state is also within
    ``10 * stop_tol`` of it). ``keep_last`` bounds memory by keeping only the
    most recent states.
    """
    require_lemma1(p)
    if not s0.in_quadrant:
        raise SignConstraintViolated(f"start must be nonnegative, got {s0!r}")
    return _iterate(s0, p, n, stop_tol, target, keep_last, 0.0, False)


def iterate_w(
    s0: State2,
    p: ModelParams,
    n: int,
    stop_tol: Optional[float] = None,
    *,
    keep_last: Optional[int] = None,
) -> Trajectory:
    """Iterate the general operator W, stopping at the first exit from the quadrant.

    Meant for exploring parameters outside the invariance conditions;
    ``left_quadrant_at`` records the step index of the exit.
    """
    return _iterate(s0, p, n, stop_tol, None, keep_last, p.d1, True)
