import numpy as np
import pytest

from conftest import steady_partner
from swewb.core import State, gauss_legendre
from swewb.experiments import get_experiment, l2_error, run_experiment
from swewb.high_order import (
    NOT_STEADY,
    SSPRK_WEIGHTS,
    CellPolynomial,
    blended_interface_states,
    blended_source,
    c_coefficient,
    minmod,
    poly_reconstruct,
    positivity_fix,
    slope_minmod,
    ssprk_step,
    steady_indicator_eps,
    steady_indicator_theta,
)
from swewb.scheme import BoundaryCondition, FieldState, Grid, Topography, dirichlet, neumann
from swewb.solver import SchemeConfig, step

G = 9.81


def test_minmod_examples():
    assert slope_minmod(1.0, 2.0, 3.0, 1.0) == 1.0
    assert slope_minmod(1.0, 2.0, 1.0, 1.0) == 0.0
    assert slope_minmod(1.0, 2.0, 4.0, 1.0) == 1.0
    assert minmod(-3.0, -2.0) == -2.0
    assert minmod(0.0, 5.0) == 0.0


def _averages(f, edges):
    nodes, weights = gauss_legendre(5)
    a, b = edges[:-1], edges[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return sum(w * f(mid + 2 * x * half) for x, w in zip(nodes, weights))


def test_constant_field_has_zero_coefficients():
    for degree in (1, 2):
        p = poly_reconstruct(np.full(8, 3.2), degree, 0.1)
        assert np.all(p.b == 0) and np.all(p.c == 0)


def test_linear_field_degree_one_exact():
    dx = 0.1
    edges = np.arange(11) * dx
    vals = _averages(lambda x: 2 - 3 * x, edges)
    p = poly_reconstruct(vals, 1, dx)
    assert np.allclose(p.b, -3.0, rtol=0, atol=1e-12)


def test_quadratic_field_degree_two_exact():
    dx = 0.05
    edges = 1.0 + np.arange(21) * dx
    f = lambda x: 0.7 * x**2 - 0.3 * x + 1.0  # noqa: E731
    p = poly_reconstruct(_averages(f, edges), 2, dx)
    centers = 0.5 * (edges[:-1] + edges[1:])[1:-1]
    for xi in (-0.5 * dx, -0.2 * dx, 0.0, 0.5 * dx):
        assert np.max(np.abs(p(xi)[0] - f(centers + xi))) <= 1e-12


def _poly_average(p, dx):
    nodes, weights = gauss_legendre(3)
    return sum(w * p(x * dx) for x, w in zip(nodes, weights))


def test_reconstruction_and_positivity_preserve_averages(rng):
    dx = 0.02
    for degree in (1, 2):
        vals = rng.uniform(0.0, 1.0, (3, 50)) * (rng.uniform(size=50) > 0.3)
        p = poly_reconstruct(vals, degree, dx)
        assert np.max(np.abs(_poly_average(p, dx) - vals[:, 1:-1])) <= 1e-13
        fixed = positivity_fix(p, dx)
        assert np.max(np.abs(_poly_average(fixed, dx) - vals[:, 1:-1])) <= 1e-13
        left, right = fixed.traces()
        assert np.min(fixed.mean[0] + left[0]) >= -1e-15
        assert np.min(fixed.mean[0] + right[0]) >= -1e-15


def _linear(mean, slope, dx=1.0):
    m = np.atleast_2d(mean).astype(float)
    return CellPolynomial(m, np.atleast_2d(slope).astype(float), np.zeros_like(m), dx)


def test_positivity_fix_examples():
    p = positivity_fix(_linear([1.0], [1.0]))
    assert p.b[0, 0] == 1.0
    p = positivity_fix(_linear([0.1], [0.4]))  # raw faces -0.1, 0.3
    left, right = p.traces()
    assert p.b[0, 0] == pytest.approx(0.2)
    assert p.mean[0, 0] + left[0, 0] == pytest.approx(0.0, abs=1e-16)
    p = positivity_fix(_linear([0.0], [2.0]))
    assert p.b[0, 0] == 0.0


def test_positivity_fix_leaves_other_variables():
    p = CellPolynomial(np.array([[0.1], [5.0]]), np.array([[0.4], [3.0]]), np.zeros((2, 1)), 1.0)
    assert positivity_fix(p).b[1, 0] == 3.0


def _same_b_state(h_l, q_l, h_r, q_r, z_l):
    b_l = q_l**2 / (2 * h_l**2) + G * (h_l + z_l)
    return (b_l - q_r**2 / (2 * h_r**2)) / G - h_r


def test_eps_examples():
    dz = steady_partner(1.0, 1.3, 0.8)
    assert steady_indicator_eps(State(1.0, 0.8), State(1.3, 0.8), 0.0, dz) == pytest.approx(0.0, abs=1e-12)
    z_r = _same_b_state(1.0, 0.0, 1.2, 3.0, 0.0)
    assert steady_indicator_eps(State(1.0, 0.0), State(1.2, 3.0), 0.0, z_r) == pytest.approx(3.0, abs=1e-12)
    assert steady_indicator_eps(State(0.0, 0.0), State(0.0, 0.0), 0.0, 1.0) == 0.0
    assert steady_indicator_eps(State(1.0, 0.5), State(0.0, 0.0), 0.0, 0.0) == NOT_STEADY
    # still water against an emerged dry bank counts as steady
    assert steady_indicator_eps(State(0.3, 0.0), State(0.0, 0.0), 0.0, 0.5) == 0.0


def test_c_coefficient_examples():
    now = (State(1.0, 0.5), State(2.0, 0.1))
    C = c_coefficient(now, now, 0.1)
    assert C == 0.0
    assert c_coefficient(now, None, None) == 1.0
    prev = (State(1.0 + 1.2, 0.5 + 1.6), State(2.0 + 2.4, 0.1 + 3.2))  # norms 2 and 4
    assert c_coefficient(now, prev, 1.0, 1.0) == pytest.approx(3.0)
    assert c_coefficient(now, prev, 1.0, 0.1) == pytest.approx(0.3)


def test_theta_examples():
    assert steady_indicator_theta(0.0, 0.1, 1.0, 1) == 0.0
    assert steady_indicator_theta(1.0, 0.1, 1.0, 1) == pytest.approx(1 / 1.01, rel=1e-14)
    assert steady_indicator_theta(1.0, 0.1, 1e-15, 2) == 0.0


@pytest.mark.parametrize("d", [1, 2])
def test_theta_tends_to_one(d):
    gaps = [1 - steady_indicator_theta(0.3, dx, 2.0, d) for dx in (0.1, 0.05, 0.025)]
    for a, b in zip(gaps, gaps[1:]):
        assert np.log2(a / b) == pytest.approx(d + 1, abs=0.05)


def test_theta_in_unit_interval_and_zero_on_steady_pairs(rng):
    n = 1000
    h_l = rng.uniform(0.1, 3.0, n)
    h_r = rng.uniform(0.1, 3.0, n)
    q = rng.uniform(-3, 3, n)
    dz = steady_partner(h_l, h_r, q)
    eps = steady_indicator_eps(State(h_l, q), State(h_r, q), np.zeros(n), dz)
    b_scale = q * q / (2 * np.minimum(h_l, h_r) ** 2) + G * (np.maximum(h_l, h_r) + np.abs(dz))
    # steady in floating point means the Bernoulli jump is round-off
    assert np.all(eps <= 1e-14 * b_scale)
    dx, C, d = 0.01, rng.uniform(0, 10, n), 2
    theta = steady_indicator_theta(eps, dx, C, d)
    assert np.all(theta[eps == 0] == 0)
    assert np.count_nonzero(eps == 0) > n // 4
    assert np.all(theta <= eps * (C / dx) ** (d + 1))
    eps_rand = steady_indicator_eps(State(h_l, q), State(h_r, rng.uniform(-3, 3, n)), np.zeros(n), rng.normal(size=n))
    theta = steady_indicator_theta(eps_rand, dx, C, 1)
    assert np.all((theta >= 0) & (theta <= 1))


def test_blended_interface_examples():
    pl = _linear([1.0], [2.0])
    pr = _linear([3.0], [2.0])
    m, p = blended_interface_states(pl, pr, 0.0)
    assert (m[0, 0], p[0, 0]) == (1.0, 3.0)
    m, p = blended_interface_states(pl, pr, 1.0)
    assert (m[0, 0], p[0, 0]) == (2.0, 2.0)
    m, p = blended_interface_states(pl, pr, 0.5)
    assert (m[0, 0], p[0, 0]) == (1.5, 2.5)


def test_blended_source_examples():
    assert blended_source(0.0, 0.0, 1.0, 5.0) == 1.0
    assert blended_source(1.0, 1.0, 1.0, 5.0) == 5.0
    assert blended_source(0.25, 0.75, 1.0, 5.0) == 3.0


@pytest.mark.parametrize("order", [2, 3])
def test_ssprk_zero_rhs_is_identity(order):
    u = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(ssprk_step(order, lambda v: np.zeros_like(v), u, 0.1), u)


@pytest.mark.parametrize("order,poly", [
    (2, lambda z: 1 + z + z * z / 2),
    (3, lambda z: 1 + z + z * z / 2 + z**3 / 6),
])
def test_ssprk_stability_polynomials(order, poly):
    for lam, dt in ((-1.0, 0.3), (2.5, 0.1), (-7.0, 0.05), (0.3, 1.0)):
        got = ssprk_step(order, lambda v: lam * v, np.array([1.0]), dt)[0]
        assert abs(got - poly(lam * dt)) <= 1e-13


def test_ssprk_weights_are_convex():
    for w in SSPRK_WEIGHTS.values():
        assert sum(w) == pytest.approx(1.0, abs=1e-15)


def test_ssprk_rejects_order():
    with pytest.raises(ValueError):
        ssprk_step(4, lambda v: v, np.ones(1), 0.1)


def _steady_problem(q0, h, dx=0.1):
    z = np.zeros_like(h)
    for i in range(h.size - 1):
        z[i + 1] = z[i] + steady_partner(h[i], h[i + 1], q0)
    centers = (np.arange(h.size) + 0.5) * dx
    topo = Topography(lambda x: np.interp(x, centers, z), z)
    grid = Grid(0.0, h.size * dx, h.size)
    bc = BoundaryCondition(dirichlet(h[0], q0), dirichlet(h[-1], q0))
    return grid, topo, bc


@pytest.mark.parametrize("order", [2, 3])
def test_moving_steady_field_is_fixed_point(order):
    q0, h = 0.5, 1.0 + 0.3 * np.sin(np.linspace(0, 2, 30))
    grid, topo, bc = _steady_problem(q0, h)
    f = FieldState(h.copy(), np.full(h.size, q0))
    for _ in range(10):
        f = step(f, grid, topo, bc, SchemeConfig("hdr", order)).after
    assert np.max(np.abs(f.h - h)) <= 1e-12
    assert np.max(np.abs(f.q - q0)) <= 1e-12


@pytest.mark.parametrize("order", [2, 3])
def test_all_dry_field_unchanged(order):
    n = 12
    grid = Grid(0.0, 1.0, n)
    topo = Topography(lambda x: 0.1 * x, 0.1 * grid.centers, lambda x: 0.1 + 0 * x)
    f = FieldState(np.zeros(n), np.zeros(n))
    out = step(f, grid, topo, BoundaryCondition(neumann(), neumann()), SchemeConfig("hdr", order)).after
    assert np.all(out.h == 0) and np.all(out.q == 0)


@pytest.mark.parametrize("order", [2, 3])
def test_random_dam_breaks_stay_nonnegative(order, rng):
    n = 40
    grid = Grid(0.0, 1.0, n)
    bc = BoundaryCondition(neumann(), neumann())
    for _ in range(3):
        slope = rng.uniform(-0.5, 0.5)
        topo = Topography(lambda x, s=slope: s * x, slope * grid.centers, lambda x, s=slope: s + 0 * x)
        split = rng.integers(5, n - 5)
        h = np.where(np.arange(n) < split, rng.uniform(0.5, 1.5), rng.choice([0.0, 0.1]))
        f = FieldState(h, np.zeros(n))
        for _ in range(100):
            f = step(f, grid, topo, bc, SchemeConfig("hdr", order, c_theta=0.1)).after
            assert f.h.min() >= 0.0


def test_order_two_beats_order_one_on_smooth_problem():
    spec = get_experiment("accuracy")
    ref = run_experiment(spec, "hdr3", 1280).final
    errs = {s: l2_error(run_experiment(spec, s, 40).final.h, ref.h, 1 / 40) for s in ("hdr1", "hdr2")}
    assert errs["hdr2"] < errs["hdr1"]
