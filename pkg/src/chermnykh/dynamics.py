"""
Rotating-frame propagation with an adaptive Dormand-Prince 5(4) pair.

Output is sampled on a uniform grid through the pair's native fourth-order
continuous extension. Integration stops early on three events: the
particle's displacement from its starting point reaches ``escape_radius``,
it comes within ``SINGULARITY_EVENT_RADIUS`` of a primary, or the step size
underflows.
"""

from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .model import State, SystemParams, SingularityError, omega

SINGULARITY_EVENT_RADIUS = 1e-9
MIN_STEP = 1e-14
EVENT_TOL = 1e-9

# Dormand-Prince 5(4) tableau.
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# Difference between the 5th- and 4th-order weights.
E1, E3, E4, E5, E6, E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)
# Continuous extension: row i gives the theta, theta**2, theta**3, theta**4
# coefficients multiplying stage i (stage 2 has none).
DENSE = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)

SAFETY = 0.9
FAC_MIN, FAC_MAX = 0.2, 10.0
PI_BETA = 0.04
PI_ALPHA = 0.2 - 0.75 * PI_BETA


class ConfigError(ValueError):
    pass


class InvalidInitialError(ValueError):
    pass


class Termination(str, enum.Enum):
    COMPLETED = "completed"
    ESCAPED = "escaped"
    SINGULARITY = "singularity"
    STEP_UNDERFLOW = "step_underflow"


@dataclass(frozen=True)
class IntegratorConfig:
    t_end: float
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.01
    escape_radius: float = 0.1
    sample_interval: float | None = None

    def __post_init__(self):
        for name in ("t_end", "rel_tol", "abs_tol", "max_step", "escape_radius"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name}={value!r} must be a positive finite number")
        if self.sample_interval is not None and not (
            math.isfinite(self.sample_interval) and self.sample_interval > 0
        ):
            raise ConfigError(f"sample_interval={self.sample_interval!r} must be positive")
        if self.rel_tol < 100 * sys.float_info.epsilon:
            raise ConfigError(f"rel_tol={self.rel_tol!r} is below 100 machine epsilons")

    @property
    def dt(self) -> float:
        return self.sample_interval if self.sample_interval is not None else self.t_end / 2000.0

    def as_dict(self) -> dict:
        return {
            "t_end": self.t_end,
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "max_step": self.max_step,
            "escape_radius": self.escape_radius,
            "sample_interval": self.dt,
        }


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled run plus the reason it stopped.

    Arrays share one length; ``t`` is strictly increasing and starts at the
    initial time. When the run ends on an event, the last sample sits at the
    located event time.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    energy: np.ndarray
    r_local: np.ndarray
    termination: Termination
    t_event: float | None = None
    stats: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def t_escape(self) -> float | None:
        return self.t_event if self.termination is Termination.ESCAPED else None

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])))

    def state(self, i: int) -> State:
        return State(float(self.t[i]), float(self.x[i]), float(self.y[i]), float(self.vx[i]), float(self.vy[i]))

    def columns(self) -> dict[str, np.ndarray]:
        return {
            "t": self.t,
            "x": self.x,
            "y": self.y,
            "vx": self.vx,
            "vy": self.vy,
            "E": self.energy,
            "r_local": self.r_local,
        }


def make_rhs(p: SystemParams):
    """Vector field as a closure over plain floats (hot path)."""
    mu, q1, a2, mb = p.mu, p.q1, p.a2, p.mb
    n2, two_n, tb2 = p.n2, 2.0 * p.n, p.t_belt**2
    k1c = (1.0 - mu) * q1
    kob = 1.5 * mu * a2
    sqrt = math.sqrt

    def f(x, y, vx, vy):
        dx1 = x + mu
        dx2 = dx1 - 1.0
        yy = y * y
        r1s = dx1 * dx1 + yy
        r2s = dx2 * dx2 + yy
        if r1s < 1e-24 or r2s < 1e-24:
            raise SingularityError(f"state ({x!r}, {y!r}) reached a primary")
        r1 = sqrt(r1s)
        r2 = sqrt(r2s)
        k1 = k1c / (r1s * r1)
        k2 = mu / (r2s * r2) + kob / (r2s * r2s * r2)
        s = x * x + yy + tb2
        if mb and s < 1e-24:
            raise SingularityError(f"state ({x!r}, {y!r}) reached the centre of a zero-width belt")
        kb = mb / (s * sqrt(s)) if mb else 0.0
        ox = n2 * x - k1 * dx1 - k2 * dx2 - kb * x
        oy = (n2 - k1 - k2 - kb) * y
        return vx, vy, ox + two_n * vy, oy - two_n * vx

    return f


def rhs(p: SystemParams, state: State) -> tuple[float, float, float, float]:
    """Time derivative ``(vx, vy, ax, ay)`` of a state."""
    return make_rhs(p)(state.x, state.y, state.vx, state.vy)


def _primary_distance(p, x, y):
    return min(math.hypot(x + p.mu, y), math.hypot(x + p.mu - 1.0, y))


class _Dense:
    __slots__ = ("t0", "h", "y0", "q")

    def __init__(self, t0, h, y0, ks):
        self.t0, self.h, self.y0 = t0, h, y0
        # q[j][c]: polynomial coefficient of theta**(j+1) for component c.
        self.q = [
            [h * sum(DENSE[i][j] * ks[i][c] for i in range(6)) for c in range(4)]
            for j in range(4)
        ]

    def __call__(self, t):
        th = (t - self.t0) / self.h
        q = self.q
        return tuple(
            self.y0[c] + th * (q[0][c] + th * (q[1][c] + th * (q[2][c] + th * q[3][c])))
            for c in range(4)
        )


def _initial_step(f, y0, k0, rtol, atol, max_step):
    sc = [atol + rtol * abs(v) for v in y0]
    d0 = math.sqrt(sum((v / s) ** 2 for v, s in zip(y0, sc)) / 4)
    d1 = math.sqrt(sum((v / s) ** 2 for v, s in zip(k0, sc)) / 4)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, max_step)
    y1 = tuple(v + h0 * k for v, k in zip(y0, k0))
    k1 = f(*y1)
    d2 = math.sqrt(sum(((a - b) / s) ** 2 for a, b, s in zip(k1, k0, sc)) / 4) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step)


def _bisect_event(g, a, b):
    """Earliest-side bracket of a ``g`` sign change on ``[a, b]``; g(a) < 0 <= g(b)."""
    while b - a > EVENT_TOL:
        m = 0.5 * (a + b)
        if g(m) >= 0.0:
            b = m
        else:
            a = m
    return b


def integrate(p: SystemParams, initial: State, config: IntegratorConfig) -> Trajectory:
    """Propagate ``initial`` until ``config.t_end`` or the first event."""
    if not isinstance(config, IntegratorConfig):
        raise ConfigError("config must be an IntegratorConfig")
    if not initial.is_finite():
        raise InvalidInitialError(f"non-finite initial state {initial!r}")
    if _primary_distance(p, initial.x, initial.y) <= SINGULARITY_EVENT_RADIUS:
        raise InvalidInitialError(
            f"initial position ({initial.x!r}, {initial.y!r}) is at a primary (singularity)"
        )

    f = make_rhs(p)
    rtol, atol, max_step = config.rel_tol, config.abs_tol, config.max_step
    radius = config.escape_radius
    t0 = initial.t
    t_end = t0 + config.t_end
    dt = config.dt
    n_grid = int(math.floor(config.t_end / dt + 1e-9))
    x0, y0 = initial.x, initial.y

    def r_loc(s):
        return math.hypot(s[0] - x0, s[1] - y0)

    ts, ys = [t0], [initial.as_tuple()]
    next_k = 1

    def emit_until(dense, t_stop, inclusive):
        nonlocal next_k
        while next_k <= n_grid:
            tg = t0 + next_k * dt
            if tg > t_stop or (not inclusive and tg >= t_stop):
                break
            ts.append(tg)
            ys.append(dense(tg))
            next_k += 1

    t = t0
    y = initial.as_tuple()
    k1 = f(*y)
    h = _initial_step(f, y, k1, rtol, atol, max_step)
    err_prev = 1.0
    rejected = False
    n_steps = n_rej = 0
    n_eval = 2
    termination = Termination.COMPLETED
    t_event = None

    while t < t_end:
        remaining = t_end - t
        h = min(h, max_step, remaining)
        if h < MIN_STEP and remaining > MIN_STEP:
            termination, t_event = Termination.STEP_UNDERFLOW, t
            break
        try:
            k2 = f(*(y[c] + h * A21 * k1[c] for c in range(4)))
            k3 = f(*(y[c] + h * (A31 * k1[c] + A32 * k2[c]) for c in range(4)))
            k4 = f(*(y[c] + h * (A41 * k1[c] + A42 * k2[c] + A43 * k3[c]) for c in range(4)))
            k5 = f(*(y[c] + h * (A51 * k1[c] + A52 * k2[c] + A53 * k3[c] + A54 * k4[c]) for c in range(4)))
            k6 = f(*(
                y[c] + h * (A61 * k1[c] + A62 * k2[c] + A63 * k3[c] + A64 * k4[c] + A65 * k5[c])
                for c in range(4)
            ))
            y_new = tuple(
                y[c] + h * (B1 * k1[c] + B3 * k3[c] + B4 * k4[c] + B5 * k5[c] + B6 * k6[c])
                for c in range(4)
            )
            k7 = f(*y_new)
        except SingularityError:
            n_eval += 6
            n_rej += 1
            rejected = True
            h *= 0.25
            continue
        n_eval += 6

        acc = 0.0
        for c in range(4):
            e = h * (E1 * k1[c] + E3 * k3[c] + E4 * k4[c] + E5 * k5[c] + E6 * k6[c] + E7 * k7[c])
            sc = atol + rtol * max(abs(y[c]), abs(y_new[c]))
            acc += (e / sc) ** 2
        err = math.sqrt(acc / 4.0)

        if not math.isfinite(err) or err > 1.0:
            n_rej += 1
            fac = FAC_MIN if not math.isfinite(err) else max(FAC_MIN, SAFETY * err**-0.2)
            h *= fac
            rejected = True
            continue

        n_steps += 1
        t_new = t + h
        if t_new > t_end or remaining - h < MIN_STEP:
            t_new = t_end
        dense = _Dense(t, h, y, (k1, k3, k4, k5, k6, k7))

        if r_loc(y_new) >= radius:
            t_event = _bisect_event(lambda s: r_loc(dense(s)) - radius, t, t_new)
            termination = Termination.ESCAPED
        elif _primary_distance(p, y_new[0], y_new[1]) <= SINGULARITY_EVENT_RADIUS:
            t_event = _bisect_event(
                lambda s: SINGULARITY_EVENT_RADIUS - _primary_distance(p, *dense(s)[:2]), t, t_new
            )
            termination = Termination.SINGULARITY
        if t_event is not None:
            emit_until(dense, t_event, inclusive=False)
            ts.append(t_event)
            ys.append(dense(t_event))
            break

        emit_until(dense, t_new, inclusive=True)
        t, y, k1 = t_new, y_new, k7

        err = max(err, 1e-10)
        fac = SAFETY * err**-PI_ALPHA * err_prev**PI_BETA
        fac = min(FAC_MAX, max(FAC_MIN, fac))
        if rejected:
            fac = min(1.0, fac)
        h *= fac
        err_prev = err
        rejected = False

    # The last grid point can fall a rounding error past t_end.
    if termination is Termination.COMPLETED and next_k <= n_grid:
        ts.append(t0 + n_grid * dt)
        ys.append(y)
    if termination is Termination.STEP_UNDERFLOW and ts[-1] < t:
        ts.append(t)
        ys.append(y)

    arr = np.array(ys, dtype=float).reshape(-1, 4)
    tarr = np.array(ts, dtype=float)
    energy = np.array(
        [0.5 * (s[2] ** 2 + s[3] ** 2) - omega(p, s[0], s[1]) for s in arr]
    )
    r_local = np.hypot(arr[:, 0] - x0, arr[:, 1] - y0)
    return Trajectory(
        t=tarr,
        x=arr[:, 0].copy(),
        y=arr[:, 1].copy(),
        vx=arr[:, 2].copy(),
        vy=arr[:, 3].copy(),
        energy=energy,
        r_local=r_local,
        termination=termination,
        t_event=t_event,
        stats={"steps": n_steps, "rejected": n_rej, "rhs_evals": n_eval},
    )


def energy_drift_report(traj: Trajectory) -> tuple[float, np.ndarray]:
    """Maximum and per-sample ``|E(t) - E(0)|``."""
    series = np.abs(traj.energy - traj.energy[0])
    return float(series.max()), series
