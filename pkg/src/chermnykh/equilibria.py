"""
Location of the five Lagrangian points.

Collinear points are bracketed around a truncated series seed and then
refined by bisection followed by a safeguarded Newton polish on the axial
force ``Omega_x(x, 0)``. Triangular points use a 2D Newton iteration on the
full gradient, in polar variables, seeded at the classical equilateral
position.
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import SingularityError, SystemParams, grad_omega, hess_omega

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-12
MAX_ITER = 64
BOUNDARY_BUFFER = 1e-9
BISECT_TOL = 1e-8
SEED_HALF_WIDTH = 0.05


class PointIndex(str, enum.Enum):
    L1 = "L1"
    L2 = "L2"
    L3 = "L3"
    L4 = "L4"
    L5 = "L5"

    @property
    def collinear(self) -> bool:
        return self in (PointIndex.L1, PointIndex.L2, PointIndex.L3)


class EquilibriumError(RuntimeError):
    """Base class for solver failures; ``index`` names the point."""

    def __init__(self, index, message):
        self.index = PointIndex(index)
        super().__init__(f"{self.index.value}: {message}")


class NoRootError(EquilibriumError):
    pass


class ConvergenceError(EquilibriumError):
    pass


class WrongBasinError(EquilibriumError):
    pass


class MultipleRootsWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LagrangePoint:
    index: PointIndex
    x: float
    y: float
    residual: float
    iterations: int
    # Number of sign changes seen in the region; > 1 flags extra belt roots.
    multiplicity: int = 1

    def as_dict(self) -> dict:
        return {
            "index": self.index.value,
            "x": self.x,
            "y": self.y,
            "residual": self.residual,
            "iterations": self.iterations,
            "multiplicity": self.multiplicity,
        }


def taylor_seed(index, mu: float) -> float:
    """Classical truncated series for the abscissa of L1, L2 or L3."""
    index = PointIndex(index)
    c = (mu / 3.0) ** (1.0 / 3.0)
    if index is PointIndex.L1:
        return 1.0 - c + c * c / 3.0 - 26.0 * mu / 27.0
    if index is PointIndex.L2:
        return 1.0 + c + c * c / 3.0 - 28.0 * mu / 27.0
    if index is PointIndex.L3:
        return -1.0 - 5.0 * mu / 12.0 + 1127.0 * mu**3 / 20736.0 + 7889.0 * mu**4 / 248832.0
    raise ValueError(f"no series seed for {index.value}")


def region(p: SystemParams, index) -> tuple[float, float]:
    """Open search interval for a collinear point, buffered off the primaries.

    The outer limits of the L2/L3 regions are finite: for ``|x| > 3`` the
    centrifugal term dominates every attraction for admissible parameters.
    """
    index = PointIndex(index)
    lo1 = -p.mu + BOUNDARY_BUFFER
    hi1 = 1.0 - p.mu - BOUNDARY_BUFFER
    if index is PointIndex.L1:
        return lo1, hi1
    if index is PointIndex.L2:
        return 1.0 - p.mu + BOUNDARY_BUFFER, 3.0
    if index is PointIndex.L3:
        return -3.0, -p.mu - BOUNDARY_BUFFER
    raise ValueError(f"{index.value} is not collinear")


def _fx(p, x):
    return grad_omega(p, x, 0.0)[0]


def _bracket(p, index, lo, hi):
    """Expand a window around the seed until it holds a sign change."""
    seed = min(max(taylor_seed(index, p.mu), lo), hi)
    half = SEED_HALF_WIDTH
    while True:
        a = max(seed - half, lo)
        b = min(seed + half, hi)
        fa, fb = _fx(p, a), _fx(p, b)
        if fa == 0.0:
            return a, a
        if fb == 0.0:
            return b, b
        if (fa < 0.0) != (fb < 0.0):
            return a, b
        if a == lo and b == hi:
            raise NoRootError(index, f"no sign change of Omega_x in ({lo}, {hi})")
        half *= 2.0


def _poles(p):
    """Interior singular abscissae: only a zero-width belt has one, at the origin."""
    return (0.0,) if p.mb > 0.0 and p.t_belt == 0.0 else ()


def _straddles_pole(p, a, b):
    return any(a <= c <= b for c in _poles(p))


def _scan_roots(p, lo, hi, step=1e-3):
    """Sign-change intervals of Omega_x on a uniform grid over ``(lo, hi)``."""
    xs = np.linspace(lo, hi, max(int((hi - lo) / step), 2) + 1)
    fs = np.empty_like(xs)
    for i, x in enumerate(xs):
        try:
            fs[i] = _fx(p, x)
        except SingularityError:
            fs[i] = np.nan
    s = np.sign(fs)
    brackets = []
    for i in np.nonzero(s[:-1] * s[1:] <= 0)[0]:
        a, b = float(xs[i]), float(xs[i + 1])
        # A sign flip across the belt centre is a pole, not a root.
        if not _straddles_pole(p, a, b):
            brackets.append((a, b))
    return brackets


def _refine(p, index, a, b):
    fa = _fx(p, a)
    iterations = 0
    while b - a > BISECT_TOL:
        m = 0.5 * (a + b)
        fm = _fx(p, m)
        iterations += 1
        if fm == 0.0:
            a = b = m
            break
        if (fm < 0.0) == (fa < 0.0):
            a, fa = m, fm
        else:
            b = m
    x = 0.5 * (a + b)
    lo, hi = a - BISECT_TOL, b + BISECT_TOL
    for _ in range(MAX_ITER):
        f = _fx(p, x)
        if abs(f) < RESIDUAL_TOL:
            return x, abs(f), iterations
        iterations += 1
        fxx = hess_omega(p, x, 0.0)[0, 0]
        step = f / fxx
        x_new = x - step
        if not lo <= x_new <= hi:
            break
        if x_new == x:
            return x, abs(f), iterations
        x = x_new
    raise ConvergenceError(index, f"Newton polish stalled at x={x!r}, |Omega_x|={abs(_fx(p, x)):.3e}")


def solve_collinear(p: SystemParams, index) -> LagrangePoint:
    """Root of ``Omega_x(x, 0)`` in the region belonging to ``index``."""
    index = PointIndex(index)
    lo, hi = region(p, index)
    a, b = _bracket(p, index, lo, hi)
    brackets = _scan_roots(p, lo, hi)
    if len(brackets) == 1 and _straddles_pole(p, a, b):
        a, b = brackets[0]
    elif len(brackets) > 1:
        # Primary-adjacent boundary: the one nearest m2 for L1/L2, m1 for L3.
        if index is PointIndex.L2:
            a, b = brackets[0]
        else:
            a, b = brackets[-1]
        warnings.warn(
            f"{index.value}: {len(brackets)} roots of Omega_x in region; "
            "returning the one nearest the primary",
            MultipleRootsWarning,
            stacklevel=2,
        )
    x, residual, iterations = _refine(p, index, a, b)
    if not lo < x < hi:
        raise NoRootError(index, f"root x={x!r} escaped region ({lo}, {hi})")
    return LagrangePoint(index, float(x), 0.0, float(residual), iterations, max(len(brackets), 1))


# Triangular iterates stay this far (in polar angle) off the x-axis, so a
# Newton path sliding along the ring of near-equilibria cannot end on L2/L3.
ANGLE_MARGIN = 0.01
ANGLE_STEP = 0.01
RADIAL_STEP = 0.01


def _polar_newton_step(p, r, th):
    """Gradient at ``(r, th)`` and the Newton correction in polar variables."""
    c, s = math.cos(th), math.sin(th)
    x, y = r * c, r * s
    g = np.array(grad_omega(p, x, y))
    jac = hess_omega(p, x, y) @ np.array([[c, -r * s], [s, r * c]])
    return g, np.linalg.solve(jac, g)


def _admissible(p, r, th):
    if not (r > 0.0 and ANGLE_MARGIN < th < math.pi - ANGLE_MARGIN):
        return False
    try:
        return bool(np.all(np.isfinite(grad_omega(p, r * math.cos(th), r * math.sin(th)))))
    except ArithmeticError:
        return False


def _polar_newton(p, index, r, th):
    for it in range(MAX_ITER + 1):
        g, step = _polar_newton_step(p, r, th)
        res = float(np.max(np.abs(g)))
        if res < RESIDUAL_TOL:
            return r, th, res, it
        if it == MAX_ITER:
            raise ConvergenceError(index, f"no convergence after {MAX_ITER} Newton steps, residual {res:.3e}")
        # Full Newton steps; halve only to stay admissible.
        lam = 1.0
        while not _admissible(p, r - lam * step[0], th - lam * step[1]):
            lam *= 0.5
            if lam < 1e-6:
                raise WrongBasinError(index, "Newton step leaves the upper half-plane")
        r, th = r - lam * step[0], th - lam * step[1]


def _polish(p, r, th, res):
    """Extra Newton steps while they keep reducing the residual.

    The residual test alone leaves the position uncertain by up to
    tol / (smallest Hessian eigenvalue), which is large near a ring. Once
    the residual reaches rounding level further steps only chase noise.
    """
    floor = 4.0 * np.finfo(float).eps * p.n2
    for _ in range(8):
        if res <= floor:
            break
        _, step = _polar_newton_step(p, r, th)
        rn, tn = r - step[0], th - step[1]
        if not _admissible(p, rn, tn):
            break
        g = grad_omega(p, rn * math.cos(tn), rn * math.sin(tn))
        gmax = max(abs(g[0]), abs(g[1]))
        if not gmax < res:
            break
        r, th, res = rn, tn, gmax
    return r, th, res


def _radial_root(p, th, r0):
    """Zero of the radial force along the ray at angle ``th``, nearest ``r0``."""
    c, s = math.cos(th), math.sin(th)

    def fr(r):
        gx, gy = grad_omega(p, r * c, r * s)
        return gx * c + gy * s

    rs = np.arange(0.05, 3.0 + RADIAL_STEP / 2, RADIAL_STEP)
    best = None
    prev = None
    for r in rs:
        try:
            v = fr(r)
        except ArithmeticError:
            prev = None
            continue
        if prev is not None and (prev[1] < 0.0) != (v < 0.0):
            mid = 0.5 * (prev[0] + r)
            if best is None or abs(mid - r0) < abs(0.5 * sum(best) - r0):
                best = (prev[0], float(r))
        prev = (float(r), v)
    if best is None:
        return None
    a, b = best
    fa = fr(a)
    while b - a > 1e-13:
        m = 0.5 * (a + b)
        fm = fr(m)
        if (fm < 0.0) == (fa < 0.0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _angular_bracket(p, index, r0, th0):
    """Start point from the tangential-force sign change nearest ``th0``.

    On the curve where the radial force vanishes, the tangential force is a
    function of the angle alone; walking outwards from the classical angle,
    the first sign change that is a genuine root (not a jump of the radial
    branch) is bisected.
    """

    def ft(th):
        r = _radial_root(p, th, r0)
        if r is None:
            return None, None
        gx, gy = grad_omega(p, r * math.cos(th), r * math.sin(th))
        return r, -gx * math.sin(th) + gy * math.cos(th)

    lo_lim, hi_lim = 2 * ANGLE_MARGIN, math.pi - 2 * ANGLE_MARGIN
    cache = {}

    def val(th):
        if th not in cache:
            cache[th] = ft(th)
        return cache[th]

    k_max = int(math.pi / ANGLE_STEP) + 1
    for k in range(k_max):
        for a, b in ((th0 + k * ANGLE_STEP, th0 + (k + 1) * ANGLE_STEP),
                     (th0 - (k + 1) * ANGLE_STEP, th0 - k * ANGLE_STEP)):
            if a < lo_lim or b > hi_lim:
                continue
            (ra, fa), (rb, fb) = val(a), val(b)
            if fa is None or fb is None or (fa < 0.0) == (fb < 0.0):
                continue
            for _ in range(50):
                m = 0.5 * (a + b)
                rm, fm = ft(m)
                if fm is None:
                    break
                if (fm < 0.0) == (fa < 0.0):
                    a, fa = m, fm
                else:
                    b = m
            th = 0.5 * (a + b)
            r = _radial_root(p, th, r0)
            if r is None:
                continue
            g = grad_omega(p, r * math.cos(th), r * math.sin(th))
            if max(abs(g[0]), abs(g[1])) < 1e-8:
                return r, th
    raise NoRootError(index, "no triangular equilibrium off the axis")


def solve_triangular(p: SystemParams, index) -> LagrangePoint:
    """Newton iteration on the gradient from ``(1/2 - mu, +-sqrt(3)/2)``.

    The unknowns are polar coordinates about the barycentre. A belt or a
    strongly radiating first primary makes the potential nearly symmetric
    under rotation, so the Hessian is close to singular along a ring of
    near-equilibria; steps in (r, theta) follow that ring instead of leaving
    it along a tangent line. If the iteration still slides towards the axis
    it is restarted from an angular bracketing of the tangential force.
    """
    index = PointIndex(index)
    if index not in (PointIndex.L4, PointIndex.L5):
        raise ValueError(f"{index.value} is not triangular")
    # L5 is the mirror image of L4; solve once in the upper half-plane.
    x0, y0 = 0.5 - p.mu, math.sqrt(3.0) / 2.0
    r0, th0 = math.hypot(x0, y0), math.atan2(y0, x0)
    try:
        r, th, res, it = _polar_newton(p, index, r0, th0)
    except (ConvergenceError, WrongBasinError) as exc:
        log.debug("%s; restarting from an angular bracket", exc)
        r, th = _angular_bracket(p, index, r0, th0)
        r, th, res, extra = _polar_newton(p, index, r, th)
        it = MAX_ITER + extra
    r, th, res = _polish(p, r, th, res)
    x, y = r * math.cos(th), r * math.sin(th)
    if y <= 0.0:
        raise WrongBasinError(index, f"converged to y={y!r} on the wrong side of the axis")
    return LagrangePoint(index, float(x), float(y if index is PointIndex.L4 else -y), float(res), it)


def solve_point(p: SystemParams, index) -> LagrangePoint:
    index = PointIndex(index)
    if index.collinear:
        return solve_collinear(p, index)
    return solve_triangular(p, index)


def locate_all(p: SystemParams) -> list[LagrangePoint]:
    """All five points in index order."""
    points = []
    for index in PointIndex:
        try:
            points.append(solve_point(p, index))
        except EquilibriumError:
            raise
        except (ArithmeticError, ValueError) as exc:
            raise EquilibriumError(index, str(exc)) from exc
    return points
