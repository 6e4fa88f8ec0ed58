"""Independent reference computations used to derive and check expected values.

Nothing here imports the package's numerical routines: maps are re-evaluated
in exact rational arithmetic, roots come from plain bisection and
derivatives from central differences.
"""

from fractions import Fraction as F

import numpy as np


def w_exact(x, y, alpha, beta, mu, d0, d1=0):
    x, y = F(x), F(y)
    a, b, m, d0, d1 = (F(v) for v in (alpha, beta, mu, d0, d1))
    em = a * x / (1 + x)
    return b * y - em - (d0 + d1 * x) * x + x, em + (1 - m) * y


def t_exact(x, alpha, beta, mu, d0):
    x = F(x)
    a, b, m, d0 = (F(v) for v in (alpha, beta, mu, d0))
    num = (1 - d0 - b) * x * x + (1 - d0 - a) * x + b
    den = (m - b - d0) * x * x + (1 - d0) * x + b - m + 1
    return num / den


def u_exact(x, y, alpha, beta, mu, d0):
    nx, ny = w_exact(x, y, alpha, beta, mu, d0)
    s = nx + ny
    return nx / s, ny / s


def bisect(f, lo, hi, tol=1e-14, maxiter=400):
    flo = f(lo)
    assert flo * f(hi) <= 0, "no sign change"
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def cubic_l(p):
    a, b, mu, d0 = p
    e = mu - b - d0
    return lambda x: e * x**3 + b * x**2 + (b - mu + d0 + a) * x - b


def sign_changes(values):
    s = [v > 0 for v in values if v != 0]
    return sum(1 for u, w in zip(s, s[1:]) if u != w)


def central_diff(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)


def fd_jacobian(step, x, y, h=1e-6):
    """Central-difference Jacobian of a map (x, y) -> (x', y')."""
    J = np.empty((2, 2))
    for j, (dx, dy) in enumerate(((h, 0.0), (0.0, h))):
        fp = step(x + dx, y + dy)
        fm = step(x - dx, y - dy)
        J[0, j] = (fp[0] - fm[0]) / (2 * h)
        J[1, j] = (fp[1] - fm[1]) / (2 * h)
    return J


def sample_valid(rng, n, *, alpha=(0.01, 0.99), mu=(0.01, 1.0), beta=(0.01, 3.0), d0_min=0.01):
    """Random (alpha, beta, mu, d0) tuples satisfying the invariance conditions."""
    out = []
    while len(out) < n:
        a = rng.uniform(*alpha)
        if 1 - a <= d0_min:
            continue
        d0 = rng.uniform(d0_min, 1 - a)
        m = rng.uniform(*mu)
        b = rng.uniform(*beta)
        out.append((a, b, m, d0))
    return out
