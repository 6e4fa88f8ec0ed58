"""
Orbit-level checks of extinction for W0 and exploratory sweeps.

For beta < mu(1 + d0/alpha) every orbit of W0 tends to the origin. The
checks here test the intermediate facts that argument relies on, along
stored orbits:

* eventual bounds x < alpha*beta/(mu*d0), y < alpha/mu, which absorb the
  orbit once entered, with explicit geometric decay envelopes before that;
* no step increases both coordinates at once;
* a step that decreases both coordinates is followed by another such step,
  so every orbit ends in a jointly non-increasing tail.

Float comparisons carry a rounding slack of a few ulps relative to the
magnitudes involved; exact-arithmetic strict inequalities are otherwise
checked as stated.
"""

from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import ORIGIN, ModelParams, State2, Trajectory, iterate_w0, validate_params
from .errors import (
    HorizonTooShort,
    InvariantViolation,
    ModelError,
    NoTailFound,
    PreconditionError,
)
from .spectral import coexistence_point, fixed_points_w0, origin_regime

DEFAULT_HORIZON = 100_000
_ULP = 8 * np.finfo(float).eps
# below this level values are subnormal-adjacent and relative rounding bounds fail
_FLOOR = 1e3 * np.finfo(float).tiny


class Verdict(str, enum.Enum):
    CONVERGED_TO_ORIGIN = "ConvergedToOrigin"
    CONVERGED_TO_INTERIOR = "ConvergedToInterior"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class ConvergenceReport:
    params: ModelParams
    start: State2
    verdict: Verdict
    bound_entry_index: Optional[int]
    monotone_tail_index: Optional[int]
    iterations_used: int
    horizon: int
    final: State2
    trajectory: Optional[Trajectory] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "start": self.start.to_dict(),
            "verdict": self.verdict.value,
            "bound_entry_index": self.bound_entry_index,
            "monotone_tail_index": self.monotone_tail_index,
            "iterations_used": self.iterations_used,
            "horizon": self.horizon,
            "final": self.final.to_dict(),
        }


def bounds(p: ModelParams) -> tuple[float, float]:
    """Absorbing bounds (alpha*beta/(mu*d0), alpha/mu) for larvae and adults."""
    return p.alpha * p.beta / (p.mu * p.d0), p.alpha / p.mu


def _step_slack(traj: Trajectory) -> np.ndarray:
    # rounding in one W0 step scales with the larger coordinate of the two states
    m = np.max(np.abs(traj.xy), axis=1)
    return np.maximum(_ULP * np.maximum(m[1:], m[:-1]), _FLOOR)


def _require_extinction_regime(p: ModelParams) -> None:
    if not p.beta < p.origin_threshold:
        raise PreconditionError(
            f"requires beta < mu(1 + d0/alpha) = {p.origin_threshold!r}, got beta = {p.beta!r}"
        )


# --- bounds --------------------------------------------------------------


def envelope_violations(traj: Trajectory, anchored: bool = True) -> list[int]:
    """Indices where an orbit exceeds the geometric decay envelopes.

    Adults obey y(n) <= alpha/mu + (1-mu)^n (y(0) - alpha/mu) from the start.
    The larvae envelope x(n) <= B + (1-d0)^(n-k) (x(k) - B), B = alpha*beta/(mu*d0),
    relies on beta*y < alpha*beta/mu, so it is anchored at the first index k
    with y(k) < alpha/mu (k = 0 whenever y(0) < alpha/mu). ``anchored=False``
    applies it from k = 0 regardless, which fails on some orbits that start
    with y(0) >= alpha/mu.

    Requires the stored orbit to start at iteration 0.
    """
    if traj.start_index != 0:
        raise ValueError("envelopes need the orbit from its start")
    p = traj.params
    bx, by = bounds(p)
    n = np.arange(len(traj))
    x, y = traj.x, traj.y
    env_y = by + (1.0 - p.mu) ** n * (y[0] - by)
    # rounding in the envelope itself is about one ulp of its level
    bad = y > env_y + _ULP * np.maximum(np.abs(env_y), max(by, y[0]))
    below = np.nonzero(y < by)[0]
    k = 0 if not anchored else (int(below[0]) if below.size else len(traj))
    if k < len(traj):
        m = n[k:] - k
        env_x = bx + (1.0 - p.d0) ** m * (x[k] - bx)
        bad[k:] |= x[k:] > env_x + _ULP * np.maximum(np.abs(env_x), max(bx, x[k]))
    return [int(i) for i in np.nonzero(bad)[0]]


def absorption_violations(traj: Trajectory) -> list[int]:
    """Step indices n where a bound, once satisfied at n-1, fails at n.

    y below alpha/mu stays below. x below alpha*beta/(mu*d0) stays below
    provided y was also below its bound at the same step.
    """
    bx, by = bounds(traj.params)
    x, y = traj.x, traj.y
    xin, yin = x < bx, y < by
    bad_y = yin[:-1] & ~yin[1:]
    bad_x = xin[:-1] & yin[:-1] & ~xin[1:]
    return [int(i) + 1 + traj.start_index for i in np.nonzero(bad_x | bad_y)[0]]


def verify_eventual_bounds(traj: Trajectory) -> int:
    """First index after which x < alpha*beta/(mu*d0) and y < alpha/mu for the rest of the orbit.

    Also checks absorption: that index must be the first one at which both
    bounds hold simultaneously. Raises HorizonTooShort if the final state
    is still outside the bounds.
    """
    bx, by = bounds(traj.params)
    inside = (traj.x < bx) & (traj.y < by)
    if not inside[-1]:
        raise HorizonTooShort(
            f"bounds not entered within {traj.start_index + len(traj) - 1} iterations"
        )
    outside = np.nonzero(~inside)[0]
    entry = int(outside[-1]) + 1 if outside.size else 0
    first = int(np.argmax(inside))
    if first != entry:
        raise InvariantViolation(
            f"orbit re-exited the absorbing bounds (first entry {first}, final entry {entry})"
        )
    return entry + traj.start_index


# --- monotonicity --------------------------------------------------------


def both_increase_steps(traj: Trajectory) -> list[int]:
    """Indices n with x(n) < x(n+1) and y(n) < y(n+1), beyond rounding."""
    x, y = traj.x, traj.y
    dx, dy = np.diff(x), np.diff(y)
    sl = _step_slack(traj)
    up = (dx > sl) & (dy > sl)
    return [int(i) + traj.start_index for i in np.nonzero(up)[0]]


def joint_decrease_violations(traj: Trajectory) -> list[int]:
    """Indices m where both coordinates drop into m but not both out of m."""
    x, y = traj.x, traj.y
    dx, dy = np.diff(x), np.diff(y)
    sx = sy = _step_slack(traj)
    down = (dx < -sx) & (dy < -sy)
    # the follow-up step only has to be non-increasing up to rounding
    follow_ok = (dx <= sx) & (dy <= sy)
    bad = down[:-1] & ~follow_ok[1:]
    return [int(i) + 1 + traj.start_index for i in np.nonzero(bad)[0]]


def oscillation_pattern_steps(traj: Trajectory) -> list[int]:
    """Indices m matching either excluded four-inequality oscillation pattern.

    Pattern one: x rises into m and falls out, while y falls into m and rises out.
    Pattern two is its mirror image.
    """
    x, y = traj.x, traj.y
    dx, dy = np.diff(x), np.diff(y)
    sx = sy = _step_slack(traj)
    xu, xd, yu, yd = dx > sx, dx < -sx, dy > sy, dy < -sy
    p1 = xu[:-1] & xd[1:] & yd[:-1] & yu[1:]
    p2 = xd[:-1] & xu[1:] & yu[:-1] & yd[1:]
    return [int(i) + 1 + traj.start_index for i in np.nonzero(p1 | p2)[0]]


def oscillation_persists(traj: Trajectory, window: int = 10) -> bool:
    """True if an oscillation pattern holds at each of the last ``window`` interior indices.

    Isolated occurrences are normal during the transient; in the extinction
    regime the pattern cannot persist indefinitely.
    """
    hits = set(oscillation_pattern_steps(traj))
    last = traj.start_index + len(traj) - 2
    idx = range(last - window + 1, last + 1)
    return len(idx) > 0 and idx[0] > traj.start_index and all(i in hits for i in idx)


def monotone_tail(traj: Trajectory) -> int:
    """First index from which both coordinates are non-increasing to the end of the orbit.

    Only defined in the extinction regime beta < mu(1 + d0/alpha). Raises
    NoTailFound when the last step still increases a coordinate, and
    InvariantViolation if a jointly decreasing step is ever followed by a
    step that increases a coordinate.
    """
    _require_extinction_regime(traj.params)
    if len(traj) == 1:
        return traj.start_index
    bad = joint_decrease_violations(traj)
    if bad:
        raise InvariantViolation(f"joint decrease not propagated at steps {bad[:5]}")
    x, y = traj.x, traj.y
    dx, dy = np.diff(x), np.diff(y)
    sl = _step_slack(traj)
    ok = (dx <= sl) & (dy <= sl)
    if not ok[-1]:
        raise NoTailFound("orbit still increasing at the end of the stored horizon")
    rising = np.nonzero(~ok)[0]
    return (int(rising[-1]) + 1 if rising.size else 0) + traj.start_index


# --- global behaviour ----------------------------------------------------


def converges_to_origin(
    p: ModelParams,
    s0: State2,
    tol: float = 1e-10,
    max_iter: int = DEFAULT_HORIZON,
    *,
    keep_trajectory: bool = False,
) -> ConvergenceReport:
    """Iterate W0 from ``s0`` and certify convergence to the origin along the stored orbit.

    Requires beta < mu(1 + d0/alpha). Convergence means a successive
    max-norm difference below ``tol`` and a max-norm below ``10 * tol``.
    Running out of iterations yields Undetermined, never a disproof.
    """
    _require_extinction_regime(p)
    traj = iterate_w0(s0, p, max_iter, tol, target=ORIGIN)
    ups = both_increase_steps(traj)
    if ups:
        raise InvariantViolation(f"both coordinates increased at steps {ups[:5]}")
    if traj.converged is not None or s0 == ORIGIN:
        verdict = Verdict.CONVERGED_TO_ORIGIN
    else:
        verdict = Verdict.UNDETERMINED
    try:
        entry = verify_eventual_bounds(traj)
    except HorizonTooShort:
        entry = None
    try:
        tail = monotone_tail(traj)
    except NoTailFound:
        tail = None
    if verdict is Verdict.CONVERGED_TO_ORIGIN and (entry is None or tail is None):
        verdict = Verdict.UNDETERMINED
    iters = 0 if s0 == ORIGIN else traj.iterations
    return ConvergenceReport(
        params=p,
        start=s0,
        verdict=verdict,
        bound_entry_index=entry,
        monotone_tail_index=tail,
        iterations_used=iters,
        horizon=max_iter,
        final=traj.final,
        trajectory=traj if keep_trajectory else None,
    )


# --- sweeps --------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Cartesian grid over (alpha, beta, mu, d0); d1 is fixed at 0."""

    alpha: Sequence[float]
    beta: Sequence[float]
    mu: Sequence[float]
    d0: Sequence[float]

    def cells(self) -> list[tuple[float, float, float, float]]:
        return list(itertools.product(self.alpha, self.beta, self.mu, self.d0))


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    beta: float
    mu: float
    d0: float
    regime: Optional[str]
    verdict: str
    iterations: Optional[int]
    observation: Optional[str] = None
    fixed_points: tuple = ()
    error: Optional[str] = None

    @property
    def key(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.mu, self.d0)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "mu": self.mu,
            "d0": self.d0,
            "regime": self.regime,
            "verdict": self.verdict,
            "iterations": self.iterations,
            "observation": self.observation,
            "fixed_points": [list(fp) for fp in self.fixed_points],
            "error": self.error,
        }


EXPLORATORY = "Exploratory"
ERROR = "Error"


def _observe(p: ModelParams, s0: State2, tol: float, max_iter: int) -> tuple[str, int]:
    z2 = coexistence_point(p)
    if z2.x > 0 and z2.y > 0:
        target, verdict = z2, Verdict.CONVERGED_TO_INTERIOR
    else:
        target, verdict = ORIGIN, Verdict.CONVERGED_TO_ORIGIN
    traj = iterate_w0(s0, p, max_iter, tol, target=target)
    if traj.converged is not None:
        return verdict.value, traj.iterations
    return Verdict.UNDETERMINED.value, traj.iterations


def sweep_cell(cell, s0: State2, tol: float = 1e-10, max_iter: int = DEFAULT_HORIZON) -> SweepRow:
    """Analyse one grid cell; errors are captured in the row instead of raised."""
    a, b, mu, d0 = cell
    try:
        p = validate_params(a, b, mu, d0, 0.0)
        regime = origin_regime(p).value
        fps = tuple((z.x, z.y) for z in fixed_points_w0(p))
        if p.beta < p.origin_threshold:
            rep = converges_to_origin(p, s0, tol, max_iter)
            return SweepRow(a, b, mu, d0, regime, rep.verdict.value, rep.iterations_used,
                            rep.verdict.value, fps)
        obs, iters = _observe(p, s0, tol, max_iter)
        return SweepRow(a, b, mu, d0, regime, EXPLORATORY, iters, obs, fps)
    except (ModelError, InvariantViolation) as exc:
        return SweepRow(a, b, mu, d0, None, ERROR, None, None, (), str(exc))


def _sweep_cell_star(args):
    return sweep_cell(*args)


def sweep_regimes(
    grid: GridSpec | Iterable[tuple[float, float, float, float]],
    s0: State2,
    tol: float = 1e-10,
    max_iter: int = DEFAULT_HORIZON,
    workers: Optional[int] = None,
) -> list[SweepRow]:
    """One summary row per grid cell, ordered by grid coordinates.

    Cells with beta >= mu(1 + d0/alpha) lie outside the extinction regime and
    carry verdict "Exploratory" with the observed long-run behaviour in
    ``observation``. With ``workers > 1`` cells run in separate processes.
    """
    cells = grid.cells() if isinstance(grid, GridSpec) else list(grid)
    jobs = [(c, s0, tol, max_iter) for c in cells]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_cell_star, jobs))
    else:
        rows = [sweep_cell(*j) for j in jobs]
    return sorted(rows, key=lambda r: r.key)


def summarize(rows: Sequence[SweepRow]) -> dict[str, int]:
    out: dict[str, int] = {}
    for r in rows:
        k = r.regime if r.regime is not None else ERROR
        out[k] = out.get(k, 0) + 1
    return out
