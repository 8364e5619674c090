import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chermnykh.dynamics import IntegratorConfig, Termination
from chermnykh.equilibria import solve_collinear, solve_triangular
from chermnykh.model import DomainError, SUN_EARTH_MU, make_params, omega
from chermnykh.stability import (
    Perturbation,
    StabilityVerdict,
    classify,
    perturb_ic,
    run_perturbed,
    sweep,
    sweep_direction,
    sweep_params,
)


@pytest.fixture(scope="module")
def earth():
    return make_params(SUN_EARTH_MU)


@pytest.fixture(scope="module")
def earth_l1(earth):
    return solve_collinear(earth, "L1")


@pytest.fixture(scope="module")
def scan(earth, earth_l1):
    return sweep_direction(earth, earth_l1, 0.001, 8, IntegratorConfig(t_end=10.0))


def _check_verdict(v, cfg):
    if v.bounded:
        assert v.t_escape is None
        assert v.max_displacement < cfg.escape_radius
    else:
        assert v.t_escape is not None or v.t_failure is not None or v.failed
        if v.t_escape is not None:
            assert v.t_escape <= cfg.t_end
            assert v.max_displacement >= cfg.escape_radius - 1e-6


# --- perturbation ---------------------------------------------------------

@pytest.mark.parametrize("eps", [-1e-3, 1.0, 2.0, math.nan, math.inf])
def test_perturbation_domain(eps):
    with pytest.raises(DomainError):
        Perturbation(eps, 0.0)


def test_perturbation_angle_normalised():
    assert Perturbation(0.001, -math.pi / 2).phi == pytest.approx(1.5 * math.pi)
    assert Perturbation(0.001, 2 * math.pi).phi == 0.0
    with pytest.raises(DomainError):
        Perturbation(0.001, math.inf)


def test_from_degrees():
    assert Perturbation.from_degrees(0.001, 45.0) == Perturbation(0.001, math.pi / 4)


def test_zero_epsilon_is_the_point(earth_l1):
    s = perturb_ic(earth_l1, Perturbation(0.0, 1.234))
    assert (s.t, s.x, s.y, s.vx, s.vy) == (0.0, earth_l1.x, earth_l1.y, 0.0, 0.0)


def test_reference_displacement(earth_l1):
    s = perturb_ic(earth_l1, Perturbation(0.001, math.pi / 4))
    d = 0.001 / math.sqrt(2)
    assert s.x - earth_l1.x == pytest.approx(d, abs=1e-16)
    assert s.y == pytest.approx(d, abs=1e-18)
    assert (s.vx, s.vy) == (0.0, 0.0)


@given(st.floats(0.0, 0.99), st.floats(-10.0, 10.0))
def test_full_turn_gives_same_state(eps, phi):
    pt = solve_triangular(make_params(SUN_EARTH_MU), "L4")
    a = perturb_ic(pt, Perturbation(eps, phi))
    b = perturb_ic(pt, Perturbation(eps, phi + 2 * math.pi))
    assert a.x == pytest.approx(b.x, abs=1e-15) and a.y == pytest.approx(b.y, abs=1e-15)


# --- classify -------------------------------------------------------------

def test_unperturbed_l4_is_bounded(earth):
    l4 = solve_triangular(earth, "L4")
    v = classify(earth, l4, Perturbation(0.0, 0.0), IntegratorConfig(t_end=100.0))
    assert v.bounded and v.t_escape is None
    assert v.max_displacement < 1e-8
    assert v.termination is Termination.COMPLETED


def test_reference_direction_is_trapped_behind_closed_neck(earth, earth_l1):
    # Displaced into Earth's lobe with E(0) < E(L1): the zero-velocity curve
    # seals the lobe, whose size is far below the escape radius.
    pert = Perturbation(0.001, math.pi / 4)
    s = perturb_ic(earth_l1, pert)
    assert omega(earth, s.x, s.y) > omega(earth, earth_l1.x, 0.0)
    cfg = IntegratorConfig(t_end=10.0)
    v = classify(earth, earth_l1, pert, cfg)
    assert v.bounded
    assert 1e-3 < v.max_displacement < 0.05
    _check_verdict(v, cfg)


def test_sunward_displacement_escapes(earth, earth_l1):
    cfg = IntegratorConfig(t_end=10.0)
    v = classify(earth, earth_l1, Perturbation(0.001, math.pi), cfg)
    assert not v.bounded
    assert 0.0 < v.t_escape < 5.0
    _check_verdict(v, cfg)


def test_larger_displacement_escapes_no_later(earth, earth_l1):
    cfg = IntegratorConfig(t_end=10.0)
    small = classify(earth, earth_l1, Perturbation(0.001, math.pi), cfg)
    large = classify(earth, earth_l1, Perturbation(0.01, math.pi), cfg)
    assert large.t_escape <= small.t_escape


def test_unperturbed_l1_does_not_escape_on_unit_horizon(earth, earth_l1):
    v = classify(earth, earth_l1, Perturbation(0.0, 0.0), IntegratorConfig(t_end=1.0))
    assert v.bounded and v.max_displacement < 1e-6


def test_run_perturbed_matches_classify(earth, earth_l1):
    cfg = IntegratorConfig(t_end=5.0)
    pert = Perturbation(0.001, 3.0)
    traj, v = run_perturbed(earth, earth_l1, pert, cfg)
    assert v == classify(earth, earth_l1, pert, cfg)
    assert v.energy_drift == traj.energy_drift


def test_verdict_as_dict_keys():
    v = StabilityVerdict(Perturbation(), True, None, 0.01, 1e-15, Termination.COMPLETED)
    d = v.as_dict()
    assert d["termination"] == "completed" and d["t_escape"] is None and not v.failed


# --- direction sweeps -----------------------------------------------------

def test_single_direction_is_phi_zero(earth, earth_l1):
    (v,) = sweep_direction(earth, earth_l1, 0.001, 1, IntegratorConfig(t_end=2.0))
    assert v.perturbation.phi == 0.0


def test_direction_scan_structure(earth, earth_l1, scan):
    cfg = IntegratorConfig(t_end=10.0)
    assert [v.perturbation.phi for v in scan] == [2 * math.pi * k / 8 for k in range(8)]
    e_l1 = -omega(earth, earth_l1.x, 0.0)
    for v in scan:
        _check_verdict(v, cfg)
        s = perturb_ic(earth_l1, v.perturbation)
        closed = -omega(earth, s.x, s.y) < e_l1
        if math.cos(v.perturbation.phi) < -1e-12:
            # Starts on the Sun side of L1.
            assert not v.bounded
        elif closed:
            # Sealed inside Earth's lobe.
            assert v.bounded
    assert sum(v.bounded for v in scan) == 4


def test_direction_scan_parallel_equals_serial(earth, earth_l1, scan):
    par = sweep_direction(earth, earth_l1, 0.001, 8, IntegratorConfig(t_end=10.0), jobs=3)
    assert par == scan


def test_direction_scan_rejects_zero(earth, earth_l1):
    with pytest.raises(ValueError):
        sweep_direction(earth, earth_l1, 0.001, 0, IntegratorConfig(t_end=1.0))


# --- parameter sweeps -----------------------------------------------------

def test_one_cell_sweep_equals_classify(earth):
    base = make_params(SUN_EARTH_MU, q1=0.75)
    cfg = IntegratorConfig(t_end=5.0)
    pert = Perturbation(0.001, math.pi)
    table = sweep(base, {"mb": [0.1]}, pert, cfg)
    assert len(table) == 1 and table.shape == (1,)
    p = make_params(SUN_EARTH_MU, q1=0.75, mb=0.1)
    assert table.rows[0].verdict == classify(p, solve_collinear(p, "L1"), pert, cfg)
    assert table.rows[0].coords == {"q1": 0.75, "a2": 0.0, "mb": 0.1, "epsilon": 0.001, "phi": math.pi}


def test_two_axis_sweep_is_lexicographic_and_parallel_safe(earth):
    cfg = IntegratorConfig(t_end=2.0)
    axes = {"q1": [1.0, 0.8, 0.9], "epsilon": [0.003, 0.001, 0.002]}
    serial = sweep(earth, axes, Perturbation(), cfg, jobs=1)
    parallel = sweep(earth, axes, Perturbation(), cfg, jobs=4)
    keys = [(r.coords["q1"], r.coords["epsilon"]) for r in serial]
    assert keys == sorted(keys) and len(keys) == 9
    assert serial.shape == (3, 3)
    assert [r.verdict for r in serial] == [r.verdict for r in parallel]
    assert len(serial.grid("max_displacement")) == 3


def test_failed_cells_are_marked_not_raised(earth):
    table = sweep(earth, {"q1": [0.0, 1.0]}, Perturbation(), IntegratorConfig(t_end=1.0))
    bad, good = table.rows
    assert bad.verdict.failed and "q1" in bad.verdict.error and not bad.verdict.bounded
    assert not good.verdict.failed


def test_invalid_epsilon_cell_is_marked(earth):
    table = sweep(earth, {"epsilon": [0.5, 1.5]}, Perturbation(), IntegratorConfig(t_end=0.5))
    assert not table.rows[0].verdict.failed
    assert table.rows[1].verdict.failed


def test_fixed_point_mode_perturbs_supplied_point(earth, earth_l1):
    cfg = IntegratorConfig(t_end=1.0)
    table = sweep(earth, {"mb": [0.0, 0.2]}, Perturbation(0.0, 0.0), cfg, recompute=False, point=earth_l1)
    # L1 of the unperturbed system is not an equilibrium once a belt is added.
    assert table.rows[0].verdict.max_displacement < 1e-6
    assert table.rows[1].verdict.max_displacement > 1e-4


def test_sweep_params_only_physical_axes(earth):
    with pytest.raises(ValueError):
        sweep_params(earth, {"epsilon": [0.001]}, Perturbation(), IntegratorConfig(t_end=1.0))
    with pytest.raises(ValueError):
        sweep(earth, {"mu": [0.1]}, Perturbation(), IntegratorConfig(t_end=1.0))
    with pytest.raises(ValueError):
        sweep(earth, {}, Perturbation(), IntegratorConfig(t_end=1.0))
    with pytest.raises(ValueError):
        sweep(earth, {"q1": []}, Perturbation(), IntegratorConfig(t_end=1.0))
