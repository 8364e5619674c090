"""
Boundedness of perturbed equilibria.

An equilibrium is displaced by ``epsilon`` in direction ``phi`` and released
at rest. A run that never leaves the escape circle around its starting point
before ``t_end`` is *bounded on the interval*; otherwise the verdict carries
the escape (or failure) time. The Jacobi energy is reported alongside but is
not part of the classification.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .dynamics import IntegratorConfig, Termination, Trajectory, integrate
from .equilibria import LagrangePoint, PointIndex, solve_point
from .model import DomainError, State, SystemParams, make_params

TWO_PI = 2.0 * math.pi
DEFAULT_T_END = 3000.0
PHYSICAL_AXES = ("q1", "a2", "mb")
SWEEP_AXES = ("q1", "a2", "mb", "epsilon", "phi")


@dataclass(frozen=True)
class Perturbation:
    epsilon: float = 0.001
    phi: float = math.pi / 4

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and 0.0 <= self.epsilon < 1.0):
            raise DomainError("epsilon", self.epsilon, "0 <= epsilon < 1")
        if not math.isfinite(self.phi):
            raise DomainError("phi", self.phi, "a finite angle")
        object.__setattr__(self, "phi", self.phi % TWO_PI)

    @classmethod
    def from_degrees(cls, epsilon, phi_deg):
        return cls(epsilon, math.radians(phi_deg))


@dataclass(frozen=True)
class StabilityVerdict:
    perturbation: Perturbation
    bounded: bool
    t_escape: float | None
    max_displacement: float
    energy_drift: float
    termination: Termination | None = None
    # Time of a singularity/underflow stop; these also count as unbounded.
    t_failure: float | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def as_dict(self) -> dict:
        return {
            "epsilon": self.perturbation.epsilon,
            "phi": self.perturbation.phi,
            "bounded": self.bounded,
            "t_escape": self.t_escape,
            "max_displacement": self.max_displacement,
            "energy_drift": self.energy_drift,
            "termination": self.termination.value if self.termination else None,
            "t_failure": self.t_failure,
            "error": self.error,
        }


def perturb_ic(point: LagrangePoint, p: Perturbation) -> State:
    """Rest state displaced from ``point`` by ``(eps cos phi, eps sin phi)``."""
    if p.epsilon == 0.0:
        return State(0.0, point.x, point.y)
    return State(
        0.0,
        point.x + p.epsilon * math.cos(p.phi),
        point.y + p.epsilon * math.sin(p.phi),
    )


def verdict_from_trajectory(traj: Trajectory, p: Perturbation) -> StabilityVerdict:
    term = traj.termination
    return StabilityVerdict(
        perturbation=p,
        bounded=term is Termination.COMPLETED,
        t_escape=traj.t_escape,
        max_displacement=float(traj.r_local.max()),
        energy_drift=traj.energy_drift,
        termination=term,
        t_failure=traj.t_event if term in (Termination.SINGULARITY, Termination.STEP_UNDERFLOW) else None,
    )


def run_perturbed(params, point, p, config) -> tuple[Trajectory, StabilityVerdict]:
    traj = integrate(params, perturb_ic(point, p), config)
    return traj, verdict_from_trajectory(traj, p)


def classify(params: SystemParams, point: LagrangePoint, p: Perturbation, config: IntegratorConfig) -> StabilityVerdict:
    """Integrate from the perturbed point and map the termination to a verdict."""
    return run_perturbed(params, point, p, config)[1]


def _failed(p, exc) -> StabilityVerdict:
    return StabilityVerdict(
        perturbation=p,
        bounded=False,
        t_escape=None,
        max_displacement=math.nan,
        energy_drift=math.nan,
        error=f"{type(exc).__name__}: {exc}",
    )


@dataclass(frozen=True)
class _Cell:
    params: dict
    index: str
    point: LagrangePoint | None
    perturbation: tuple[float, float]
    config: IntegratorConfig


def _run_cell(cell: _Cell) -> StabilityVerdict:
    try:
        pert = Perturbation(*cell.perturbation)
    except DomainError as exc:
        return _failed(Perturbation(0.0, 0.0), exc)
    try:
        params = make_params(**cell.params)
        point = cell.point if cell.point is not None else solve_point(params, cell.index)
        return classify(params, point, pert, cell.config)
    except Exception as exc:  # noqa: BLE001 - one bad cell must not abort a sweep
        return _failed(pert, exc)


def resolve_jobs(jobs: int | None) -> int:
    if jobs is None or jobs <= 0:
        return os.cpu_count() or 1
    return jobs


def _run_cells(cells: list[_Cell], jobs: int | None) -> list[StabilityVerdict]:
    jobs = min(resolve_jobs(jobs), len(cells))
    if jobs <= 1:
        return [_run_cell(c) for c in cells]
    # map() yields in submission order, so output is independent of scheduling.
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_cell, cells))


def _param_kwargs(params: SystemParams) -> dict:
    return {"mu": params.mu, "q1": params.q1, "a2": params.a2, "mb": params.mb, "t_belt": params.t_belt}


def sweep_direction(
    params: SystemParams,
    point: LagrangePoint,
    epsilon: float,
    n_phi: int,
    config: IntegratorConfig,
    jobs: int | None = 1,
) -> list[StabilityVerdict]:
    """Verdicts for ``phi = 2*pi*k/n_phi``, ``k = 0 .. n_phi-1``."""
    if n_phi < 1:
        raise ValueError(f"n_phi={n_phi} must be >= 1")
    cells = [
        _Cell(_param_kwargs(params), point.index.value, point, (epsilon, TWO_PI * k / n_phi), config)
        for k in range(n_phi)
    ]
    return _run_cells(cells, jobs)


@dataclass(frozen=True)
class SweepRow:
    coords: dict
    verdict: StabilityVerdict


@dataclass
class SweepTable:
    axes: tuple[str, ...]
    shape: tuple[int, ...]
    rows: list[SweepRow] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def grid(self, attr: str = "t_escape"):
        """Nested lists of one verdict attribute, shaped like the grid."""
        values = [getattr(r.verdict, attr) for r in self.rows]
        if len(self.shape) == 1:
            return values
        n = self.shape[1]
        return [values[i * n : (i + 1) * n] for i in range(self.shape[0])]


def sweep(
    base: SystemParams,
    axes: dict,
    perturbation: Perturbation,
    config: IntegratorConfig,
    index="L1",
    recompute: bool = True,
    point: LagrangePoint | None = None,
    jobs: int | None = 1,
) -> SweepTable:
    """Classify every cell of a rectangular grid over up to all of
    ``q1, a2, mb, epsilon, phi``.

    Axis values are sorted ascending, so rows come out in lexicographic
    order of the grid coordinates (axes in the order given). With
    ``recompute`` the equilibrium is re-solved for each cell's parameters;
    otherwise ``point`` (or the equilibrium of ``base``) is perturbed as is.
    """
    if not axes:
        raise ValueError("sweep needs at least one axis")
    for name, values in axes.items():
        if name not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {name!r}; expected one of {SWEEP_AXES}")
        if len(values) == 0:
            raise ValueError(f"sweep axis {name!r} is empty")
    index = PointIndex(index)
    if not recompute and point is None:
        point = solve_point(base, index)
    names = tuple(axes)
    values = [sorted(float(v) for v in axes[n]) for n in names]
    fixed = {**_param_kwargs(base), "epsilon": perturbation.epsilon, "phi": perturbation.phi}

    cells, coords = [], []
    for combo in itertools.product(*values):
        c = {**fixed, **dict(zip(names, combo))}
        coords.append({k: c[k] for k in SWEEP_AXES})
        cells.append(
            _Cell(
                {k: c[k] for k in ("mu", "q1", "a2", "mb", "t_belt")},
                index.value,
                None if recompute else point,
                (c["epsilon"], c["phi"]),
                config,
            )
        )
    verdicts = _run_cells(cells, jobs)
    table = SweepTable(names, tuple(len(v) for v in values))
    table.rows = [SweepRow(c, v) for c, v in zip(coords, verdicts)]
    return table


def sweep_params(
    base: SystemParams,
    grid: dict,
    perturbation: Perturbation,
    config: IntegratorConfig,
    recompute: bool = True,
    point: LagrangePoint | None = None,
    index="L1",
    jobs: int | None = 1,
) -> SweepTable:
    """Physical-parameter sweep over ``q1``, ``a2`` and ``mb``."""
    bad = set(grid) - set(PHYSICAL_AXES)
    if bad:
        raise ValueError(f"sweep_params only varies {PHYSICAL_AXES}, got {sorted(bad)}")
    return sweep(base, grid, perturbation, config, index=index, recompute=recompute, point=point, jobs=jobs)

