import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import special

from _scenes import boundary_target, far_start, random_scene
from conftest import square_polys
from polyscat.errors import DomainError, ParameterError, RoutingError
from polyscat.helmholtz import ScatterConfig, solve
from polyscat.propagation import (DEFAULT_CONSTANTS, BallChain, FleetCalibration, PlaneWaveSum, ball_norms,
                                  build_chain, calibrate_fleet, chain_is_regular, eta, eta1, eta_from_log,
                                  flatness_indicator, flatness_samples, ledger, log_eta_from_log,
                                  propagate_smallness, reflect_field, stability_bound, synthetic_fleet,
                                  three_spheres_check, unit_disk_samples)
from polyscat.scene import HyperplaneLine, Scatterer2D

X_AXIS = HyperplaneLine((0, 0), (0, 1))
SMALL_A = (0.2, 0.5, 0.8, 2.0)


def test_default_clearance_factor_is_eight():
    assert DEFAULT_CONSTANTS[3] == 8


# -- regularity ------------------------------------------------------------------------

def test_single_ball_is_regular(square):
    c = BallChain([[3.0, 0.0]], [0.3])
    assert chain_is_regular(c, square)


def collinear(n=20, rho=1.0):
    return BallChain(np.column_stack([np.arange(n) * rho / 4, np.zeros(n)]), np.full(n, rho), SMALL_A)


def test_collinear_chain_is_regular():
    assert chain_is_regular(collinear(), Scatterer2D([]))


def test_radius_increase_reports_clause_and_index():
    c = collinear()
    c.radii[7] = 1.5
    reg = chain_is_regular(c, Scatterer2D([]))
    assert not reg and reg.clause == "ii" and reg.index == 7


def test_ball_touching_obstacle_fails_clause_i(square):
    c = BallChain([[1.0, 0.0], [1.0, 0.0]], [0.3, 0.3])
    reg = chain_is_regular(c, square)
    assert not reg and reg.clause == "i" and reg.index == 0


def test_bad_constants_rejected():
    with pytest.raises(ParameterError):
        BallChain([[0, 0]], [1.0], (0.5, 0.2, 0.8, 8))


def test_chain_round_trip(tmp_path):
    c = collinear()
    c.dump(tmp_path / "c.json")
    back = BallChain.load(tmp_path / "c.json", SMALL_A)
    assert np.array_equal(back.centers, c.centers) and np.array_equal(back.radii, c.radii)
    assert BallChain.from_list(c.to_list(), SMALL_A).to_list() == c.to_list()


# -- construction ------------------------------------------------------------------------

def test_empty_scene_straight_chain():
    c = build_chain(Scatterer2D([]), (5, 0), (-5, 0), d=1.0)
    assert np.array_equal(c.centers[0], [5, 0]) and np.array_equal(c.centers[-1], [-5, 0])
    assert np.all(c.radii == c.radii[0])
    assert np.allclose(c.centers[:, 1], 0)
    assert chain_is_regular(c, Scatterer2D([]))


def test_chain_around_square():
    s = Scatterer2D(square_polys())
    x0, x1 = np.array([6.0, 0.0]), np.array([-6.0, 0.0])
    rho0 = 0.05
    c = build_chain(s, x0, x1, rho0=rho0)
    assert chain_is_regular(c, s)
    assert np.array_equal(c.centers[0], x0) and np.array_equal(c.centers[-1], x1)
    assert c.radii[-1] == pytest.approx(c.info["s0"] * 5.5)
    # the corridor hugs the obstacle inflated by the clearance a4 rho0
    perimeter = 4.0 + 2 * math.pi * DEFAULT_CONSTANTS[3] * rho0
    bound = 12.0 / (rho0 / 4) + perimeter / (rho0 / 4) + c.info["n_tail"] + c.info["n_shrink"] + 1
    assert len(c) <= bound
    # balls never enter the square
    assert np.all(s.distance_to_set(c.centers) >= DEFAULT_CONSTANTS[3] * c.radii * (1 - 1e-12))


def test_chain_tail_reaches_boundary_point():
    s = Scatterer2D(square_polys())
    x1 = np.array([0.0, 0.5 + 1e-3])
    c = build_chain(s, (5.0, 3.0), x1, d=1e-3)
    assert chain_is_regular(c, s)
    assert np.array_equal(c.centers[-1], x1)
    assert c.radii[-1] == pytest.approx(c.info["s0"] * 1e-3)
    info = c.info
    R = max(s.radius, 1.0)
    assert len(c) - 1 <= info["kappa"] * math.log(2 * math.e * R / 1e-3) + info["kappa_prime"] + 1e-9


def test_chain_length_grows_linearly_in_log_inverse_distance():
    s = Scatterer2D(square_polys())
    ds = np.array([1e-1, 1e-2, 1e-3, 1e-4])
    lengths = [len(build_chain(s, (5.0, 3.0), (0.1, 0.5 + d))) for d in ds]
    x = np.log(1 / ds)
    slopes = np.diff(lengths) / np.diff(x)
    overall = np.polyfit(x, lengths, 1)[0]
    assert overall > 0
    assert np.all(np.abs(slopes - overall) <= 0.2 * overall)


@pytest.mark.parametrize("seed", range(20))
def test_random_scenes_give_regular_chains(seed):
    rng = np.random.default_rng(seed)
    s = random_scene(rng)
    x1, d = boundary_target(s, rng, 10 ** rng.uniform(-4, -1))
    c = build_chain(s, far_start(rng), x1, d=d)
    assert chain_is_regular(c, s)


def test_routing_error_names_pinch_point():
    # a cavity whose mouth is far narrower than even the narrowest allowed corridor
    cup = Scatterer2D([[(-2, -2), (2, -2), (2, 2), (0.001, 2), (0.001, 1.5), (1.5, 1.5), (1.5, -1.5),
                        (-1.5, -1.5), (-1.5, 1.5), (-0.001, 1.5), (-0.001, 2), (-2, 2)]])
    with pytest.raises(RoutingError) as info:
        build_chain(cup, (0.0, 0.0), (2.1, 0.0), rho0=0.05)
    assert info.value.pinch_point is not None


def test_narrow_passage_shrinks_the_corridor():
    # the same cavity with a mouth that fits a quarter of the preferred corridor radius
    cup = Scatterer2D([[(-2, -2), (2, -2), (2, 2), (0.1, 2), (0.1, 1.5), (1.5, 1.5), (1.5, -1.5),
                        (-1.5, -1.5), (-1.5, 1.5), (-0.1, 1.5), (-0.1, 2), (-2, 2)]])
    c = build_chain(cup, (0.0, 0.0), (2.1, 0.0), rho0=0.05)
    assert chain_is_regular(c, cup)
    assert c.info["rho_corridor"] <= 0.1 / 8 and c.radii[0] == 0.05


def test_barrier_is_avoided():
    s = Scatterer2D(square_polys())
    wall = [[(2.0, -3.0), (2.2, -3.0), (2.2, 3.0), (2.0, 3.0)]]
    c = build_chain(s, (6.0, 0.0), (-0.6, 0.0), rho0=0.05, barriers=wall)
    assert chain_is_regular(c, s, barriers=wall)
    assert not chain_is_regular(c, s, barriers=[[(-3, -3), (3, -3), (3, 3), (-3, 3)]])


def test_chain_preconditions(square):
    with pytest.raises(ParameterError):
        build_chain(square, (5.0, 0.0), (0.6, 0.0), d=0.5)
    with pytest.raises(ParameterError):
        build_chain(square, (1.0, 0.0), (-0.6, 0.0), rho0=1.0)
    with pytest.raises(ParameterError):
        build_chain(square, (5.0, 0.0), (0.0, 0.0))
    with pytest.raises(ParameterError):
        build_chain(square, (0.0, 0.0), (3.0, 0.0))
    with pytest.raises(ParameterError):
        build_chain(square, (5.0, 0.0), (0.6, 0.0), rho0=0.0)
    with pytest.raises(ParameterError):
        build_chain(Scatterer2D([]), (5.0, 0.0), (0.6, 0.0), rho0=-1.0)


# -- exponent ledger ----------------------------------------------------------------------------

def brute_ledger(b):
    n = len(b)
    B = [sum(math.prod(b[r:m + 1]) for r in range(m + 1)) for m in range(n)]
    G = [math.prod(b[:m + 1]) for m in range(n)]
    return B, G


def test_ledger_examples():
    L = ledger([0.5, 0.5])
    assert L.gamma[1] == 0.25 and L.B[1] == 0.75
    L = ledger([0.3])
    assert L.gamma[0] == pytest.approx(0.3, abs=1e-16) and L.B[0] == 0.3


def test_ledger_against_double_loop():
    b = list(np.random.default_rng(5).uniform(0.05, 0.95, 20))
    L = ledger(b)
    B, G = brute_ledger(b)
    assert np.allclose(L.B, B, rtol=1e-13, atol=0) and np.allclose(L.gamma, G, rtol=1e-13, atol=0)


@given(st.lists(st.floats(1e-3, 1 - 1e-3), min_size=1, max_size=40))
def test_ledger_recurrences_and_bounds(b):
    L = ledger(b)
    for n in range(1, len(b)):
        assert L.B[n] == pytest.approx(b[n] * (1 + L.B[n - 1]), rel=1e-14)
        assert L.log_gamma[n] == pytest.approx(L.log_gamma[n - 1] + math.log(b[n]), rel=1e-14, abs=1e-14)
    assert np.all(np.diff(L.log_gamma) < 0)
    assert np.all(L.gamma <= np.array(b) * (1 + 1e-14)) and np.all(L.gamma > 0)
    assert np.all(L.B <= np.arange(1, len(b) + 1))


@pytest.mark.parametrize("bad", [[0.0], [1.0], [0.5, 1.2], [float("nan")]])
def test_ledger_rejects_exponents_outside_unit_interval(bad):
    with pytest.raises(ParameterError):
        ledger(bad)


def test_ledger_csv(tmp_path):
    L = ledger([0.5, 0.25])
    L.to_csv(tmp_path / "l.csv")
    lines = (tmp_path / "l.csv").read_text().splitlines()
    assert lines[0] == "i,beta,B,Gamma" and len(lines) == 3


# -- propagation of smallness ----------------------------------------------------------------------

def test_equal_eps_and_bound_collapses():
    b = [0.4, 0.6, 0.5]
    bounds, _ = propagate_smallness(4, 2.0, 2.0, 1.5, b)
    L = ledger(b)
    assert bounds[0] == pytest.approx(2.0)
    assert np.allclose(bounds[1:], 1.5 ** (1 + L.B) * 2.0, rtol=1e-13)
    assert np.all(bounds >= 2.0)


def test_exponents_near_one_keep_eps():
    bounds, _ = propagate_smallness(6, 1e-3, 1.0, 1.0, [1 - 1e-8] * 5)
    assert np.allclose(bounds, 1e-3, rtol=1e-6)


def test_eleven_balls_half_exponents():
    eps, C = 1e-8, 2.0
    bounds, logs = propagate_smallness(11, eps, 1.0, C, [0.5] * 10)
    B9 = sum(0.5 ** m for m in range(1, 11))
    expected = C ** (1 + B9) * eps ** (2.0 ** -10)
    assert bounds[-1] == pytest.approx(expected, rel=1e-12)
    assert logs[-1] == pytest.approx(math.log(expected), rel=1e-12)


def test_chain_argument_and_length_check():
    c = collinear(5)
    assert len(propagate_smallness(c, 0.1, 1.0, 1.0, [0.5] * 4)[0]) == 5
    with pytest.raises(ParameterError):
        propagate_smallness(c, 0.1, 1.0, 1.0, [0.5] * 5)
    with pytest.raises(ParameterError):
        propagate_smallness(c, 2.0, 1.0, 1.0, [0.5] * 4)


@given(st.lists(st.floats(0.01, 0.99), min_size=1, max_size=30), st.floats(1e-12, 0.5),
       st.floats(1.0, 5.0), st.floats(1.0, 10.0))
def test_monotone_in_eps_and_each_exponent(b, eps, E, C):
    n = len(b) + 1
    base, _ = propagate_smallness(n, eps, E, C, b)
    assert base[0] == pytest.approx(eps)
    up, _ = propagate_smallness(n, min(1.01 * eps, E), E, C, b)
    assert np.all(up >= base * (1 - 1e-12))


@given(st.lists(st.floats(0.01, 0.98), min_size=1, max_size=30), st.floats(1e-12, 0.5),
       st.floats(1.0, 5.0), st.data())
def test_monotone_in_each_exponent(b, eps, E, data):
    # with C = 1 a larger exponent pulls every bound toward eps
    i = data.draw(st.integers(0, len(b) - 1))
    n = len(b) + 1
    base, _ = propagate_smallness(n, eps, E, 1.0, b)
    b2 = list(b)
    b2[i] = b[i] * 1.01
    moved, _ = propagate_smallness(n, eps, E, 1.0, b2)
    assert np.all(moved <= base * (1 + 1e-12))
    assert np.all(moved[i + 1:] < base[i + 1:])


@given(st.lists(st.floats(0.01, 0.99), min_size=1, max_size=30), st.floats(1e-12, 1.0))
def test_nondecreasing_along_chain_for_unit_constant(b, eps):
    bounds, _ = propagate_smallness(len(b) + 1, eps, 1.0, 1.0, b)
    assert np.all(np.diff(bounds) >= -1e-15 * bounds[1:])


@given(st.floats(0.01, 0.99), st.integers(1, 40), st.floats(1.0, 10.0))
def test_nondecreasing_along_chain_for_constant_exponent(beta, m, C):
    bounds, _ = propagate_smallness(m + 1, 1e-6, 1.0, C, [beta] * m)
    assert np.all(np.diff(bounds) >= -1e-12 * bounds[1:])


# -- moduli -----------------------------------------------------------------------------------------------

def test_eta_examples():
    assert eta(math.exp(-math.e)) == pytest.approx(math.exp(-1), rel=1e-14)
    assert eta(math.exp(-math.e ** 4)) == pytest.approx(math.exp(-2), rel=1e-14)
    assert eta1(math.exp(-4), 1.0) == pytest.approx(math.exp(-2), rel=1e-14)


def test_eta_far_below_underflow():
    assert eta_from_log(-math.exp(16)) == pytest.approx(math.exp(-4), rel=1e-14)
    assert log_eta_from_log(-math.exp(16)) == pytest.approx(-4.0, rel=1e-14)
    # direct evaluation underflows to s = 0, which must be refused rather than clamped
    with pytest.raises(ParameterError):
        eta(math.exp(-math.exp(16)))


def test_stability_bound():
    eps = 1e-6
    assert stability_bound(eps, 2.0, 3.0) == pytest.approx(2 * math.e * 3 * eta(eps) ** 2, rel=1e-14)
    assert stability_bound(None, 2.0, 3.0, log_eps=math.log(eps)) == pytest.approx(stability_bound(eps, 2.0, 3.0))


@pytest.mark.parametrize("call", [lambda: eta(0.5), lambda: eta(0.0), lambda: eta1(1.0, 1.0),
                                  lambda: eta1(0.5, 0.0), lambda: stability_bound(0.2, 1.0, 1.0),
                                  lambda: stability_bound(0.1, -1.0, 1.0)])
def test_moduli_domain_errors(call):
    with pytest.raises(ParameterError):
        call()


@given(st.floats(1e-300, 0.36), st.floats(1e-300, 0.36))
def test_eta_strictly_increasing(s, t):
    assume(s < t * (1 - 1e-9))
    assert eta(s) < eta(t)


@given(st.floats(1e-300, 0.99), st.floats(1e-300, 0.99), st.floats(0.1, 5))
def test_eta1_strictly_increasing(s, t, C1):
    assume(s < t * (1 - 1e-9))
    assert eta1(s, C1) < eta1(t, C1)


def test_moduli_vanish_at_zero():
    assert eta_from_log(-1e300) < 1e-10
    assert eta1(1e-300, 1.0) < 1e-11


# -- three spheres -------------------------------------------------------------------------------

def test_plane_wave_is_degenerate_and_holds():
    f = PlaneWaveSum(1.0, [[1.0, 0.0]], [1.0])
    res = three_spheres_check(f, (0, 0), 0.5, 1.0, 2.0)
    assert res.M1 == pytest.approx(1) and res.M == pytest.approx(1) and res.M2 == pytest.approx(1)
    assert res.degenerate and math.isnan(res.beta_fit) and res.holds
    fleet = FleetCalibration(1.0, 0.5, 0.4, 0.6, 1.0, 1, 0, 1.0)
    assert three_spheres_check(f, (0, 0), 0.5, 1.0, 2.0, fleet=fleet).holds


class BesselMode:
    k = 1.0

    def __call__(self, x):
        x = np.atleast_2d(x)
        r, th = np.hypot(x[:, 0], x[:, 1]), np.arctan2(x[:, 1], x[:, 0])
        return special.jv(3, r) * np.exp(3j * th)


def test_bessel_mode_against_dense_polar_grid():
    res = three_spheres_check(BesselMode(), (0, 0), 0.5, 1.0, 2.0)
    pitch = 0.5 / 200
    oracle = []
    for rho in (0.5, 1.0, 2.0):
        r = np.arange(0, rho + pitch / 2, pitch)
        oracle.append(np.abs(special.jv(3, r)).max())
    assert [res.M1, res.M, res.M2] == pytest.approx(oracle, rel=1e-12)
    beta = math.log(oracle[1] / oracle[2]) / math.log(oracle[0] / oracle[2])
    assert res.beta_fit == pytest.approx(beta, rel=1e-10)
    assert 0 < res.beta_fit < 1 and not res.degenerate


def test_small_fleet_calibration_holds_on_held_out():
    radii = (0.5, 1.0, 2.0)
    cal = calibrate_fleet(synthetic_fleet(40, seed=0), radii)
    assert 0 < cal.beta < 1 and cal.C >= 1
    for f, center in synthetic_fleet(40, seed=1):
        res = three_spheres_check(f, center, *radii, fleet=cal)
        assert res.holds
        assert res.degenerate or 0 < res.beta_fit < 1


@given(st.integers(0, 10_000))
def test_ball_norms_are_nested(seed):
    f, center = synthetic_fleet(1, seed=seed)[0]
    M = ball_norms(f, center, (0.3, 0.9, 1.7), n=256, n_circle=64)
    assert M[0] <= M[1] <= M[2]


def test_disk_samples_cover_the_disk():
    U = unit_disk_samples()
    assert len(U) >= 10 ** 4 and np.max(np.hypot(U[:, 0], U[:, 1])) <= 1 + 1e-15
    assert np.array_equal(U, unit_disk_samples())


def test_three_spheres_preconditions():
    f = PlaneWaveSum(1.0, [[1.0, 0.0]], [1.0])
    with pytest.raises(ParameterError):
        three_spheres_check(f, (0, 0), 1.0, 0.5, 2.0)
    with pytest.raises(ParameterError):
        three_spheres_check(f, (0, 0), 0.5, 1.0, 3.0)   # beyond the default cap 2/k
    u = solve(Scatterer2D(square_polys()), ScatterConfig(quad_order=128), 0)
    with pytest.raises(DomainError):
        three_spheres_check(u, (2.0, 0.0), 0.5, 1.0, 2.0)


# -- reflection and flatness -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def square_field():
    return solve(Scatterer2D(square_polys()), ScatterConfig(), 0)


def test_reflection_fixed_points_and_involution(square_field):
    u1 = reflect_field(square_field, X_AXIS)
    on_line = np.array([[2.0, 0.0], [-3.0, 0.0]])
    assert np.array_equal(u1(on_line), square_field(on_line))
    line = HyperplaneLine((0.3, 0.1), (1.0, 2.0))
    P = np.random.default_rng(2).uniform(2, 4, (30, 2))
    twice = reflect_field(reflect_field(square_field, line), line)
    assert np.allclose(twice(P), square_field(P), rtol=0, atol=1e-12)


def test_reflected_gradient_matches_finite_differences(square_field):
    line = HyperplaneLine((0.0, 0.0), (1.0, 1.0))
    u1 = reflect_field(square_field, line)
    P = np.array([[2.0, 1.0], [-1.5, 2.5], [0.5, -3.0]])
    h = 1e-5
    fd = np.column_stack([(u1(P + [h, 0]) - u1(P - [h, 0])) / (2 * h),
                          (u1(P + [0, h]) - u1(P - [0, h])) / (2 * h)])
    assert np.allclose(u1.eval_grad(P), fd, rtol=1e-6, atol=1e-8)


def test_symmetric_solution(square_field):
    u1 = reflect_field(square_field, X_AXIS)
    th = 2 * np.pi * np.arange(256) / 256
    P = np.vstack([r * np.column_stack([np.cos(th), np.sin(th)]) for r in (2.0, 2.5, 3.0)])
    tol = square_field.config.tolerances["solver"]
    assert np.max(np.abs(u1(P) - square_field(P))) <= 10 * tol


def test_reflection_into_scatterer_is_a_domain_error():
    u = solve(Scatterer2D(square_polys(center=(2.0, 0.0))), ScatterConfig(quad_order=128), 0)
    with pytest.raises(DomainError):
        reflect_field(u, HyperplaneLine((0, 0), (1, 0)))(np.array([-2.0, 0.0]))


def test_flatness_on_empty_scatterer():
    cfg = ScatterConfig(k=1.3)
    u = solve(Scatterer2D([]), cfg, 0)
    assert flatness_indicator(u, X_AXIS, cfg) <= 1e-12
    assert flatness_indicator(u, HyperplaneLine((0, 0), (1, 0)), cfg) == pytest.approx(1.3, rel=1e-12)


def test_flatness_on_symmetric_square(square_field):
    assert flatness_indicator(square_field, X_AXIS, square_field.config) <= 1e-4 * square_field.k


def test_flatness_argmax_stable_under_refinement(square_field):
    line = X_AXIS.rotated(math.radians(5))
    cfg = square_field.config
    _, p1 = flatness_indicator(square_field, line, cfg, n=256, return_argmax=True)
    _, p2 = flatness_indicator(square_field, line, cfg, n=512, return_argmax=True)
    samples = flatness_samples(line, cfg, 256)
    cell = np.max(np.linalg.norm(np.diff(samples, axis=0), axis=1)[:10])
    assert np.linalg.norm(p1 - p2) <= cell


def test_flatness_line_missing_annulus(square_field):
    far = HyperplaneLine((0.0, 100.0), (0.0, 1.0))
    with pytest.raises(ParameterError):
        flatness_indicator(square_field, far, square_field.config)
    assert len(flatness_samples(X_AXIS, square_field.config)) >= 256
