"""
Slow, independent reference computations used to cross-check the solvers.

Nothing here calls into :mod:`chermnykh.model`; the potential and its
gradient are re-derived (in extended precision with mpmath where it
matters), and roots are found by brute-force scanning plus plain bisection.
"""

from __future__ import annotations

import math

import mpmath as mp

DPS = 40


def _consts(params):
    mu, q1, a2, mb, tb = (mp.mpf(repr(float(v))) for v in (params.mu, params.q1, params.a2, params.mb, params.t_belt))
    rc = mp.sqrt((1 - mu) * q1 ** (mp.mpf(2) / 3) + mu**2)
    n2 = 1 + 3 * a2 / 2 + 2 * mb * rc / (rc**2 + tb**2) ** mp.mpf(1.5)
    return mu, q1, a2, mb, tb, n2


def mean_motion_squared(params):
    with mp.workdps(max(DPS, mp.mp.dps)):
        return _consts(params)[-1]


def omega_mp(params, x, y):
    with mp.workdps(max(DPS, mp.mp.dps)):
        mu, q1, a2, mb, tb, n2 = _consts(params)
        x, y = mp.mpf(x), mp.mpf(y)
        r1 = mp.sqrt((x + mu) ** 2 + y**2)
        r2 = mp.sqrt((x + mu - 1) ** 2 + y**2)
        return (
            n2 * (x**2 + y**2) / 2
            + (1 - mu) * q1 / r1
            + mu / r2
            + mu * a2 / (2 * r2**3)
            + (mb / mp.sqrt(x**2 + y**2 + tb**2) if mb else 0)
        )


def grad_mp(params, x, y):
    with mp.workdps(max(DPS, mp.mp.dps)):
        mu, q1, a2, mb, tb, n2 = _consts(params)
        x, y = mp.mpf(x), mp.mpf(y)
        r1 = mp.sqrt((x + mu) ** 2 + y**2)
        r2 = mp.sqrt((x + mu - 1) ** 2 + y**2)
        belt = mb / (x**2 + y**2 + tb**2) ** mp.mpf(1.5) if mb else 0
        ox = (
            n2 * x
            - (1 - mu) * q1 * (x + mu) / r1**3
            - mu * (x + mu - 1) / r2**3
            - mp.mpf(3) / 2 * mu * a2 * (x + mu - 1) / r2**5
            - belt * x
        )
        oy = n2 * y - (1 - mu) * q1 * y / r1**3 - mu * y / r2**3 - mp.mpf(3) / 2 * mu * a2 * y / r2**5 - belt * y
        return ox, oy


def _axial_float(params):
    """Plain-float axial force, written out independently for fast scanning."""
    mu, q1, a2, mb, tb = params.mu, params.q1, params.a2, params.mb, params.t_belt
    rc = math.sqrt((1 - mu) * q1 ** (2 / 3) + mu * mu)
    n2 = 1 + 1.5 * a2 + 2 * mb * rc / (rc * rc + tb * tb) ** 1.5

    def fx(x):
        d1, d2 = x + mu, x + mu - 1
        return (
            n2 * x
            - (1 - mu) * q1 * d1 / abs(d1) ** 3
            - mu * d2 / abs(d2) ** 3
            - 1.5 * mu * a2 * d2 / abs(d2) ** 5
            - (mb * x / (x * x + tb * tb) ** 1.5 if mb else 0.0)
        )

    return fx


def collinear_bisection(params, index, step=1e-4, n_bisect=200, outer=2.0):
    """Sign-change scan over the point's region, then ``n_bisect`` bisections.

    Returns the root (as float) nearest the primary bounding the region.
    """
    mu = params.mu
    buf = 1e-9
    lo, hi = {
        "L1": (-mu + buf, 1 - mu - buf),
        "L2": (1 - mu + buf, outer),
        "L3": (-outer, -mu - buf),
    }[index]
    fx = _axial_float(params)
    n = int(math.ceil((hi - lo) / step))
    brackets = []
    xa, fa = lo, fx(lo)
    for k in range(1, n + 1):
        xb = min(lo + k * step, hi)
        fb = fx(xb)
        if (fa < 0) != (fb < 0) and abs(fa) + abs(fb) < 1e6:
            brackets.append((xa, xb))
        xa, fa = xb, fb
    if not brackets:
        raise ValueError(f"no root of the axial force for {index}")
    a, b = brackets[0] if index == "L2" else brackets[-1]
    with mp.workdps(max(DPS, mp.mp.dps)):
        a, b = mp.mpf(a), mp.mpf(b)
        fa = grad_mp(params, a, 0)[0]
        for _ in range(n_bisect):
            m = (a + b) / 2
            fm = grad_mp(params, m, 0)[0]
            if fm == 0:
                a = b = m
                break
            if (fm < 0) == (fa < 0):
                a, fa = m, fm
            else:
                b = m
        return float((a + b) / 2)


def _grad_float(params):
    """Plain-float gradient, written out independently of the model module."""
    mu, q1, a2, mb, tb = params.mu, params.q1, params.a2, params.mb, params.t_belt
    rc = math.sqrt((1 - mu) * q1 ** (2 / 3) + mu * mu)
    n2 = 1 + 1.5 * a2 + 2 * mb * rc / (rc * rc + tb * tb) ** 1.5

    def g(x, y):
        r1 = math.hypot(x + mu, y)
        r2 = math.hypot(x + mu - 1, y)
        belt = mb / (x * x + y * y + tb * tb) ** 1.5 if mb else 0.0
        common = (1 - mu) * q1 / r1**3
        second = mu / r2**3 + 1.5 * mu * a2 / r2**5
        ox = n2 * x - common * (x + mu) - second * (x + mu - 1) - belt * x
        oy = n2 * y - common * y - second * y - belt * y
        return ox, oy

    return n2, g


def _bisect(f, a, b, n=80):
    fa = f(a)
    for _ in range(n):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _sign_changes(f, xs):
    out = []
    prev = None
    for x in xs:
        try:
            v = f(x)
        except (ZeroDivisionError, ValueError):
            prev = None
            continue
        if prev is not None and (prev[1] < 0) != (v < 0):
            out.append((prev[0], x))
        prev = (x, v)
    return out


def triangular_scan(params, d_theta=0.01, d_r=0.01):
    """Upper-half-plane equilibrium located without any Newton iteration.

    Along each ray from the barycentre the radial force is zeroed by
    bisection (root nearest the classical distance); the tangential force on
    that curve is then bisected in the polar angle. Among the angular roots
    the one nearest the classical angle is returned as float ``(x, y)``.
    """
    _, g = _grad_float(params)
    x0, y0 = 0.5 - params.mu, math.sqrt(3) / 2
    r0, th0 = math.hypot(x0, y0), math.atan2(y0, x0)

    def radial(th):
        c, s = math.cos(th), math.sin(th)

        def fr(r):
            ox, oy = g(r * c, r * s)
            return ox * c + oy * s

        rs = [0.05 + k * d_r for k in range(int(2.95 / d_r) + 1)]
        brackets = _sign_changes(fr, rs)
        if not brackets:
            raise ValueError(f"no radial equilibrium at theta={th}")
        a, b = min(brackets, key=lambda ab: abs(0.5 * (ab[0] + ab[1]) - r0))
        return _bisect(fr, a, b)

    def tangential(th):
        r = radial(th)
        ox, oy = g(r * math.cos(th), r * math.sin(th))
        return -ox * math.sin(th) + oy * math.cos(th)

    ths = [0.02 + k * d_theta for k in range(int((math.pi - 0.04) / d_theta) + 1)]
    roots = []
    for a, b in _sign_changes(tangential, ths):
        th = _bisect(tangential, a, b, n=60)
        r = radial(th)
        x, y = r * math.cos(th), r * math.sin(th)
        # Jumps of the selected radial branch also flip the sign; drop them.
        if max(abs(v) for v in g(x, y)) < 1e-8:
            roots.append((abs(th - th0), x, y))
    if not roots:
        raise ValueError("no triangular equilibrium found")
    _, x, y = min(roots)
    return x, y


def triangular_newton(params, seed=None, tol=1e-28, maxsteps=60):
    """Extended-precision equilibrium in the upper half-plane.

    The start comes from :func:`triangular_scan`; the polish is a Newton
    iteration whose Jacobian is mpmath's numerical derivative of the
    extended-precision gradient, not any analytic Hessian.
    """
    if seed is None:
        seed = triangular_scan(params)
    with mp.workdps(max(DPS, mp.mp.dps)):
        x, y = mp.mpf(seed[0]), mp.mpf(seed[1])
        for _ in range(maxsteps):
            g = mp.matrix(grad_mp(params, x, y))
            if max(abs(g[0]), abs(g[1])) < tol:
                return float(x), float(y)
            J = mp.matrix(2, 2)
            for j in range(2):
                J[0, j] = mp.diff(lambda a, b: grad_mp(params, a, b)[0], (x, y), tuple(int(k == j) for k in range(2)))
                J[1, j] = mp.diff(lambda a, b: grad_mp(params, a, b)[1], (x, y), tuple(int(k == j) for k in range(2)))
            dx = mp.lu_solve(J, g)
            x, y = x - dx[0], y - dx[1]
        raise ValueError(f"extended-precision Newton did not converge, residual {max(abs(g[0]), abs(g[1]))}")


def escape_time(params, x0, y0, radius=0.1, t_end=3000.0, rtol=1e-11, atol=1e-13):
    """Escape time from rest at ``(x0, y0)`` using scipy's DOP853 with its own
    event locator; ``None`` when the run stays inside ``radius``."""
    import numpy as np
    from scipy.integrate import solve_ivp

    n2, g = _grad_float(params)
    n = math.sqrt(n2)

    def f(t, s):
        x, y, vx, vy = s
        ox, oy = g(x, y)
        return [vx, vy, ox + 2 * n * vy, oy - 2 * n * vx]

    def leave(t, s):
        return math.hypot(s[0] - x0, s[1] - y0) - radius

    leave.terminal = True
    leave.direction = 1
    sol = solve_ivp(f, (0.0, t_end), np.array([x0, y0, 0.0, 0.0]), method="DOP853",
                    rtol=rtol, atol=atol, events=leave, max_step=0.01)
    hits = sol.t_events[0]
    return float(hits[0]) if len(hits) else None
