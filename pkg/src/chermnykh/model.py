"""
Effective potential of the generalized Chermnykh-like restricted problem.

The test particle moves in the rotating frame of two primaries located at
``(-mu, 0)`` and ``(1 - mu, 0)``. The first primary radiates (mass reduction
factor ``q1``), the second is oblate (coefficient ``a2``) and the pair is
surrounded by a flattened belt of mass ``mb`` with profile parameter
``t_belt``. Everything here is a pure function of immutable parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SUN_EARTH_MU = 3.00348e-6
SUN_JUPITER_MU = 9.537e-4

PRESETS = {
    "sun-earth": SUN_EARTH_MU,
    "sun-jupiter": SUN_JUPITER_MU,
}

# Closer than this to a primary and the potential is treated as singular.
SINGULARITY_RADIUS = 1e-12


class DomainError(ValueError):
    """A physical parameter is outside its admissible range."""

    def __init__(self, name: str, value, expected: str):
        self.name = name
        self.value = value
        super().__init__(f"{name}={value!r} is invalid: expected {expected}")


class SingularityError(ArithmeticError):
    """Evaluation point coincides with (or is too close to) a primary."""


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters plus the cached mean motion and belt radius.

    Build through :func:`make_params` so that ranges are validated.
    """

    mu: float
    q1: float = 1.0
    a2: float = 0.0
    mb: float = 0.0
    t_belt: float = 0.01
    n: float = field(init=False)
    rc: float = field(init=False)

    def __post_init__(self):
        rc = math.sqrt((1.0 - self.mu) * self.q1 ** (2.0 / 3.0) + self.mu**2)
        n2 = (
            1.0
            + 1.5 * self.a2
            + 2.0 * self.mb * rc / (rc**2 + self.t_belt**2) ** 1.5
        )
        object.__setattr__(self, "rc", rc)
        object.__setattr__(self, "n", math.sqrt(n2))

    @property
    def n2(self) -> float:
        return self.n * self.n

    def as_dict(self) -> dict:
        return {
            "mu": self.mu,
            "q1": self.q1,
            "a2": self.a2,
            "mb": self.mb,
            "t_belt": self.t_belt,
            "n": self.n,
            "rc": self.rc,
        }


@dataclass(frozen=True)
class State:
    """Rotating-frame phase-space point at time ``t``."""

    t: float
    x: float
    y: float
    vx: float = 0.0
    vy: float = 0.0

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.t, self.x, self.y, self.vx, self.vy))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.vx, self.vy)


def _check_finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(name, value, "a finite number")
    return value


def make_params(mu, q1=1.0, a2=0.0, mb=0.0, t_belt=0.01) -> SystemParams:
    """Validate the physical parameters and return a frozen ``SystemParams``.

    Raises
    ------
    DomainError
        Naming the first offending field.
    """
    mu = _check_finite("mu", mu)
    q1 = _check_finite("q1", q1)
    a2 = _check_finite("a2", a2)
    mb = _check_finite("mb", mb)
    t_belt = _check_finite("t_belt", t_belt)
    if not 0.0 < mu < 0.5:
        raise DomainError("mu", mu, "0 < mu < 0.5")
    if not 0.0 < q1 <= 1.0:
        raise DomainError("q1", q1, "0 < q1 <= 1")
    if a2 < 0.0:
        raise DomainError("a2", a2, "a2 >= 0")
    if mb < 0.0:
        raise DomainError("mb", mb, "mb >= 0")
    if t_belt < 0.0:
        raise DomainError("t_belt", t_belt, "t_belt >= 0")
    return SystemParams(mu=mu, q1=q1, a2=a2, mb=mb, t_belt=t_belt)


def oblateness_from_radii(re, rp, separation=1.0) -> float:
    """Oblateness coefficient ``(re**2 - rp**2) / (5 * separation**2)``."""
    if rp <= 0.0:
        raise DomainError("rp", rp, "rp > 0")
    if separation <= 0.0:
        raise DomainError("separation", separation, "separation > 0")
    if rp > re:
        raise DomainError("rp", rp, f"rp <= re ({re})")
    return (re * re - rp * rp) / (5.0 * separation * separation)


def mass_reduction_from_forces(fp, fg) -> float:
    """Mass reduction factor ``1 - fp/fg`` of the radiating primary."""
    if fg <= 0.0:
        raise DomainError("fg", fg, "fg > 0")
    if fp < 0.0:
        raise DomainError("fp", fp, "fp >= 0")
    if fp >= fg:
        raise DomainError("fp", fp, f"fp < fg ({fg})")
    return 1.0 - fp / fg


def _distances(p: SystemParams, x, y):
    dx1 = x + p.mu
    dx2 = x + p.mu - 1.0
    r1 = math.sqrt(dx1 * dx1 + y * y)
    r2 = math.sqrt(dx2 * dx2 + y * y)
    if r1 < SINGULARITY_RADIUS:
        raise SingularityError(f"point ({x!r}, {y!r}) coincides with the first primary")
    if r2 < SINGULARITY_RADIUS:
        raise SingularityError(f"point ({x!r}, {y!r}) coincides with the second primary")
    if p.t_belt == 0.0 and p.mb > 0.0 and x * x + y * y < SINGULARITY_RADIUS**2:
        raise SingularityError(f"point ({x!r}, {y!r}) is at the centre of a zero-width belt")
    return dx1, dx2, r1, r2


def omega(p: SystemParams, x: float, y: float) -> float:
    """Effective potential at ``(x, y)``."""
    _, _, r1, r2 = _distances(p, x, y)
    rho2 = x * x + y * y
    return (
        0.5 * p.n2 * rho2
        + (1.0 - p.mu) * p.q1 / r1
        + p.mu / r2
        + p.mu * p.a2 / (2.0 * r2**3)
        + (p.mb / math.sqrt(rho2 + p.t_belt**2) if p.mb else 0.0)
    )


def grad_omega(p: SystemParams, x: float, y: float) -> tuple[float, float]:
    """Partial derivatives ``(Omega_x, Omega_y)``."""
    dx1, dx2, r1, r2 = _distances(p, x, y)
    k1 = (1.0 - p.mu) * p.q1 / r1**3
    k2 = p.mu / r2**3 + 1.5 * p.mu * p.a2 / r2**5
    kb = p.mb / (x * x + y * y + p.t_belt**2) ** 1.5 if p.mb else 0.0
    ox = p.n2 * x - k1 * dx1 - k2 * dx2 - kb * x
    oy = p.n2 * y - k1 * y - k2 * y - kb * y
    return ox, oy


def hess_omega(p: SystemParams, x: float, y: float) -> np.ndarray:
    """Analytic 2x2 Hessian of the potential.

    Each attracting term has the form ``c * d / s**k`` (``s`` a distance),
    whose derivative in ``d_j`` is ``c * (delta_ij / s**k - k d_i d_j / s**(k+2))``.
    """
    dx1, dx2, r1, r2 = _distances(p, x, y)
    s2 = x * x + y * y + p.t_belt**2
    terms = (
        ((1.0 - p.mu) * p.q1, dx1, r1 * r1, 3),
        (p.mu, dx2, r2 * r2, 3),
        (1.5 * p.mu * p.a2, dx2, r2 * r2, 5),
        (p.mb, x, s2, 3),
    )
    hxx = hyy = p.n2
    hxy = 0.0
    for c, dx, d2, k in terms:
        if c == 0.0:
            continue
        inv = d2 ** (-0.5 * k)
        inv2 = k * inv / d2
        hxx -= c * (inv - inv2 * dx * dx)
        hyy -= c * (inv - inv2 * y * y)
        hxy += c * inv2 * dx * y
    return np.array([[hxx, hxy], [hxy, hyy]])


def jacobi_energy(p: SystemParams, state: State) -> tuple[float, float]:
    """Jacobi energy ``E`` and the corresponding constant ``C = -2E``."""
    e = 0.5 * (state.vx**2 + state.vy**2) - omega(p, state.x, state.y)
    return e, -2.0 * e
