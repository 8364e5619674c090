import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chermnykh import model, oracles
from chermnykh.model import (
    DomainError,
    SingularityError,
    State,
    grad_omega,
    hess_omega,
    jacobi_energy,
    make_params,
    mass_reduction_from_forces,
    oblateness_from_radii,
    omega,
)

SE = model.SUN_EARTH_MU

# Extended-precision (mpmath, 40 digits) evaluations, computed once offline.
N2_TABLE_EARTH = 2.043957816426171409420829690481948287662
RC_TABLE_EARTH = 0.9085589319986701806871414911996547420028
OMEGA_TABLE2_START = 2.257661963371795310214063154946608589579


def test_make_params_classical_mean_motion_is_one():
    p = make_params(SE, 1, 0, 0, 0.01)
    assert p.n == 1.0
    assert p.rc == pytest.approx(math.sqrt((1 - SE) + SE**2), abs=0)


def test_make_params_oblateness_only():
    p = make_params(SE, 1, 0.05, 0, 0.01)
    assert p.n**2 == pytest.approx(1.075, rel=1e-15)


def test_make_params_full_perturbation_matches_extended_precision():
    p = make_params(SE, 0.75, 0.05, 0.4, 0.01)
    assert p.rc == pytest.approx(RC_TABLE_EARTH, rel=1e-15)
    assert p.n**2 == pytest.approx(N2_TABLE_EARTH, rel=1e-14)


@pytest.mark.parametrize(
    "kwargs, field",
    [
        ({"mu": 0.5}, "mu"),
        ({"mu": 0.0}, "mu"),
        ({"mu": SE, "q1": 0.0}, "q1"),
        ({"mu": SE, "q1": 1.2}, "q1"),
        ({"mu": SE, "a2": -0.1}, "a2"),
        ({"mu": SE, "mb": -1e-3}, "mb"),
        ({"mu": SE, "t_belt": -0.01}, "t_belt"),
        ({"mu": float("nan")}, "mu"),
    ],
)
def test_make_params_rejects_out_of_range(kwargs, field):
    with pytest.raises(DomainError) as exc:
        make_params(**kwargs)
    assert exc.value.name == field
    assert field in str(exc.value)


def test_params_are_immutable():
    p = make_params(SE)
    with pytest.raises(AttributeError):
        p.q1 = 0.5


@pytest.mark.parametrize(
    "re, rp, sep, expected",
    [(1, 1, 1, 0.0), (2, 1, 1, 0.6), (1, 0.5, 2, 0.0375)],
)
def test_oblateness_from_radii(re, rp, sep, expected):
    assert oblateness_from_radii(re, rp, sep) == pytest.approx(expected, abs=1e-16)


def test_oblateness_default_separation():
    assert oblateness_from_radii(2, 1) == pytest.approx(0.6)


def test_oblateness_rejects_prolate():
    with pytest.raises(DomainError):
        oblateness_from_radii(1, 2)


@pytest.mark.parametrize("fp, fg, expected", [(0, 5, 1.0), (1, 4, 0.75), (1, 2, 0.5)])
def test_mass_reduction(fp, fg, expected):
    assert mass_reduction_from_forces(fp, fg) == expected


@pytest.mark.parametrize("fp, fg", [(2, 2), (3, 2), (1, 0)])
def test_mass_reduction_rejects(fp, fg):
    with pytest.raises(DomainError):
        mass_reduction_from_forces(fp, fg)


def test_omega_equilateral_equal_masses():
    p = make_params(0.4999999999999999)
    # r1 = r2 = 1 at (1/2 - mu, sqrt(3)/2); with mu -> 1/2 the point is (0, sqrt 3/2).
    x, y = 0.5 - p.mu, math.sqrt(3) / 2
    expected = 0.5 * (x * x + y * y) + (1 - p.mu) + p.mu
    assert omega(p, x, y) == pytest.approx(expected, rel=1e-15)
    assert omega(p, x, y) == pytest.approx(1.375, abs=1e-15)


def test_omega_table2_start_matches_extended_precision():
    p = make_params(SE, 0.75, 0.25, 0.2, 0.01)
    assert omega(p, 0.990093, 0.0) == pytest.approx(OMEGA_TABLE2_START, rel=1e-13)


def test_zero_width_belt_centre_is_singular():
    p = make_params(0.25, mb=0.1, t_belt=0.0)
    with pytest.raises(SingularityError):
        omega(p, 0.0, 0.0)


def test_singularities_raise():
    p = make_params(SE, a2=0.1)
    with pytest.raises(SingularityError):
        omega(p, -SE, 0.0)
    with pytest.raises(SingularityError):
        grad_omega(p, 1 - SE, 0.0)
    with pytest.raises(SingularityError):
        hess_omega(p, 1 - SE + 1e-13, 0.0)
    with pytest.raises(SingularityError):
        jacobi_energy(p, State(0, -SE, 0, 1, 1))


def test_grad_vanishes_at_classical_l4():
    for mu in (SE, 9.537e-4, 0.01, 0.3):
        p = make_params(mu)
        gx, gy = grad_omega(p, 0.5 - mu, math.sqrt(3) / 2)
        assert abs(gx) < 1e-14 and abs(gy) < 1e-14


def test_grad_y_vanishes_on_axis():
    p = make_params(9.537e-4, 0.75, 0.5, 0.3, 0.05)
    for x in np.linspace(-2, 2, 101):
        if min(abs(x + p.mu), abs(x + p.mu - 1)) > 1e-6:
            assert grad_omega(p, x, 0.0)[1] == 0.0


def test_hessian_offdiagonal_vanishes_on_axis():
    p = make_params(9.537e-4, 0.75, 0.5, 0.3, 0.05)
    for x in (-1.3, -0.4, 0.3, 0.9, 1.4):
        H = hess_omega(p, x, 0.0)
        assert H[0, 1] == 0.0 and H[1, 0] == 0.0


def test_jacobi_energy_definitions():
    p = make_params(SE, 0.9, 0.1, 0.2)
    s = State(0.0, 0.3, 0.4, 0.0, 0.0)
    e, c = jacobi_energy(p, s)
    assert e == -omega(p, 0.3, 0.4)
    assert c == -2 * e
    s = State(0.0, 0.3, 0.4, 0.2, -0.7)
    e, c = jacobi_energy(p, s)
    assert e == pytest.approx(0.5 * (0.04 + 0.49) - omega(p, 0.3, 0.4), rel=1e-15)
    assert c == -2 * e


def test_jacobi_energy_classical_l4_equal_masses():
    mu = 0.4999999999999999
    p = make_params(mu)
    e, _ = jacobi_energy(p, State(0.0, 0.5 - mu, math.sqrt(3) / 2))
    assert e == pytest.approx(-1.375, abs=1e-15)


# --- properties -----------------------------------------------------------

params_st = st.builds(
    make_params,
    mu=st.floats(1e-7, 0.49),
    q1=st.floats(0.3, 1.0),
    a2=st.floats(0.0, 0.75),
    mb=st.floats(0.0, 0.5),
    t_belt=st.floats(0.0, 0.1),
)
point_st = st.tuples(st.floats(-1.6, 1.6), st.floats(-1.6, 1.6))


# Valid evaluation points keep this clearance from every singular centre; at
# smaller distances step-1e-6 central differences are themselves inaccurate
# beyond the absolute tolerances below.
FD_CLEARANCE = 0.2


def _valid(p, x, y, margin=FD_CLEARANCE):
    return (
        math.hypot(x + p.mu, y) > margin
        and math.hypot(x + p.mu - 1, y) > margin
        and (p.mb == 0 or math.sqrt(x * x + y * y + p.t_belt**2) > margin)
    )


def _nearest(p, x, y):
    d = [math.hypot(x + p.mu, y), math.hypot(x + p.mu - 1, y)]
    if p.mb:
        d.append(math.sqrt(x * x + y * y + p.t_belt**2))
    return min(d)


def fd_grad(p, x, y, h=1e-6):
    return (
        (omega(p, x + h, y) - omega(p, x - h, y)) / (2 * h),
        (omega(p, x, y + h) - omega(p, x, y - h)) / (2 * h),
    )


def fd_hess(p, x, y, h=1e-6):
    gxp, gxm = np.array(grad_omega(p, x + h, y)), np.array(grad_omega(p, x - h, y))
    gyp, gym = np.array(grad_omega(p, x, y + h)), np.array(grad_omega(p, x, y - h))
    return np.column_stack([(gxp - gxm) / (2 * h), (gyp - gym) / (2 * h)])


@settings(max_examples=200, deadline=None)
@given(params_st, point_st)
def test_gradient_matches_finite_differences(p, xy):
    x, y = xy
    if not _valid(p, x, y):
        return
    g = grad_omega(p, x, y)
    fd = fd_grad(p, x, y)
    assert abs(g[0] - fd[0]) < 1e-6
    assert abs(g[1] - fd[1]) < 1e-6


@settings(max_examples=60, deadline=None)
@given(params_st, point_st)
def test_gradient_matches_extended_precision(p, xy):
    x, y = xy
    if not _valid(p, x, y):
        return
    ox, oy = oracles.grad_mp(p, x, y)
    gx, gy = grad_omega(p, x, y)
    scale = 1.0 + abs(omega(p, x, y)) / _nearest(p, x, y)
    assert abs(gx - float(ox)) < 1e-13 * scale
    assert abs(gy - float(oy)) < 1e-13 * scale


@settings(max_examples=200, deadline=None)
@given(params_st, point_st)
def test_hessian_matches_finite_differences_and_is_symmetric(p, xy):
    x, y = xy
    if not _valid(p, x, y):
        return
    H = hess_omega(p, x, y)
    assert H[0, 1] == H[1, 0]
    assert np.max(np.abs(H - fd_hess(p, x, y))) < 1e-5


@settings(max_examples=200, deadline=None)
@given(params_st, point_st)
def test_hessian_close_to_primaries_relative(p, xy):
    x, y = xy
    if not _valid(p, x, y, margin=0.02) or _valid(p, x, y):
        return
    H = hess_omega(p, x, y)
    scale = np.abs(H).max()
    assert np.max(np.abs(H - fd_hess(p, x, y, h=1e-7))) < 1e-5 * scale


@settings(max_examples=200, deadline=None)
@given(params_st, point_st)
def test_reflection_symmetry(p, xy):
    x, y = xy
    if not _valid(p, x, y, margin=1e-6):
        return
    assert omega(p, x, y) == omega(p, x, -y)
    gx, gy = grad_omega(p, x, y)
    gx2, gy2 = grad_omega(p, x, -y)
    assert gx == gx2
    assert gy == -gy2


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-7, 0.49), point_st)
def test_classical_reduction(mu, xy):
    x, y = xy
    p = make_params(mu, 1.0, 0.0, 0.0, 0.01)
    if not _valid(p, x, y, margin=1e-6):
        return
    r1 = math.hypot(x + mu, y)
    r2 = math.hypot(x + mu - 1, y)
    classical = (x * x + y * y) / 2 + (1 - mu) / r1 + mu / r2
    assert omega(p, x, y) == pytest.approx(classical, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(params_st, st.floats(0, 0.5), st.floats(0, 0.5))
def test_mean_motion_monotone(p, da2, dmb):
    base = p.n
    assert base >= 1.0
    assert make_params(p.mu, p.q1, p.a2 + da2, p.mb, p.t_belt).n >= base
    assert make_params(p.mu, p.q1, p.a2, p.mb + dmb, p.t_belt).n >= base


def test_pure_functions_are_bit_reproducible():
    p = make_params(9.537e-4, 0.75, 0.05, 0.4)
    a = (omega(p, 0.3, 0.2), grad_omega(p, 0.3, 0.2), hess_omega(p, 0.3, 0.2).tobytes())
    b = (omega(p, 0.3, 0.2), grad_omega(p, 0.3, 0.2), hess_omega(p, 0.3, 0.2).tobytes())
    assert a == b
