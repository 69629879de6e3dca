import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aggeq.measures import DiscreteMeasure
from aggeq.transport import quantile_coupling_1d, wasserstein2

from oracles import brute_force_assignment_cost, linprog_transport_cost, quantile_cost_1d


def rand_measure(rng, n, d=2, uniform_mass=False):
    pos = rng.uniform(-1, 1, size=(n, d))
    if uniform_mass:
        mass = np.full(n, 1.0 / n)
    else:
        mass = rng.random(n) + 0.05
        mass /= mass.sum()
    return DiscreteMeasure(pos, mass)


def test_dirac_to_dirac():
    a = DiscreteMeasure(np.array([[0.0, 0.0]]), np.array([1.0]))
    b = DiscreteMeasure(np.array([[3.0, 4.0]]), np.array([1.0]))
    d, plan = wasserstein2(a, b)
    assert d == pytest.approx(5.0, rel=1e-15)
    assert plan.pairs == [(0, 0, 1.0)]


def test_split_mass_hand_value():
    mu = DiscreteMeasure(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([0.5, 0.5]))
    nu = DiscreteMeasure(np.array([[0.5, 0.0]]), np.array([1.0]))
    d, plan = wasserstein2(mu, nu)
    assert d == pytest.approx(0.5, rel=1e-14)
    assert plan.cost == pytest.approx(0.25, rel=1e-14)


def test_identity_and_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(10):
        mu = rand_measure(rng, 5)
        nu = rand_measure(rng, 5)
        assert wasserstein2(mu, mu)[0] == 0.0
        dab = wasserstein2(mu, nu)[0]
        dba = wasserstein2(nu, mu)[0]
        assert dab == pytest.approx(dba, rel=1e-12, abs=1e-15)


def test_plan_marginals_feasible():
    rng = np.random.default_rng(1)
    for _ in range(20):
        mu = rand_measure(rng, rng.integers(1, 30))
        nu = rand_measure(rng, rng.integers(1, 30))
        _, plan = wasserstein2(mu, nu)
        np.testing.assert_allclose(plan.marginal_source(mu.n_atoms), mu.masses, atol=1e-10)
        np.testing.assert_allclose(plan.marginal_target(nu.n_atoms), nu.masses, atol=1e-10)
        # reported cost is the squared-displacement sum of the pairs
        disp = mu.positions[plan.source_idx] - nu.positions[plan.target_idx]
        assert plan.cost == pytest.approx(float(plan.mass @ np.sum(disp**2, 1)), rel=1e-12)


def test_optimal_vs_permutation_enumeration():
    rng = np.random.default_rng(2)
    for _ in range(20):
        n = int(rng.integers(2, 8))
        mu = rand_measure(rng, n, uniform_mass=True)
        nu = rand_measure(rng, n, uniform_mass=True)
        d, _ = wasserstein2(mu, nu)
        ref = brute_force_assignment_cost(mu.positions, nu.positions, n)
        assert d**2 == pytest.approx(ref, rel=1e-9)


def test_optimal_vs_linprog_general_masses():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n, m = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        mu = rand_measure(rng, n)
        nu = rand_measure(rng, m)
        d, _ = wasserstein2(mu, nu)
        C = np.sum((mu.positions[:, None, :] - nu.positions[None, :, :]) ** 2, axis=-1)
        ref = linprog_transport_cost(mu.masses, nu.masses, C)
        assert d**2 == pytest.approx(ref, rel=1e-9, abs=1e-13)


def test_1d_fast_path_matches_cdf_oracle():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n, m = int(rng.integers(1, 40)), int(rng.integers(1, 40))
        mu = rand_measure(rng, n, d=1)
        nu = rand_measure(rng, m, d=1)
        d, plan = wasserstein2(mu, nu)
        ref = quantile_cost_1d(mu.positions[:, 0], mu.masses, nu.positions[:, 0], nu.masses)
        assert d**2 == pytest.approx(ref, rel=1e-12, abs=1e-15)
        np.testing.assert_allclose(plan.marginal_source(n), mu.masses, atol=1e-12)


def test_collinear_2d_matches_quantile_formula():
    # measures supported on a line embedded in the plane
    rng = np.random.default_rng(5)
    for _ in range(10):
        theta = rng.uniform(0, np.pi)
        u = np.array([np.cos(theta), np.sin(theta)])
        base = rng.uniform(-1, 1, size=(2,))
        sa = rng.uniform(-1, 1, size=12)
        sb = rng.uniform(-1, 1, size=9)
        mu = DiscreteMeasure(base + sa[:, None] * u, np.full(12, 1 / 12))
        nu = DiscreteMeasure(base + sb[:, None] * u, np.full(9, 1 / 9))
        d2d, _ = wasserstein2(mu, nu)
        _, _, _, cost1d = quantile_coupling_1d(sa, mu.masses, sb, nu.masses)
        assert d2d == pytest.approx(np.sqrt(cost1d), rel=1e-9)


def test_triangle_inequality():
    rng = np.random.default_rng(6)
    for _ in range(20):
        a = rand_measure(rng, int(rng.integers(2, 12)))
        b = rand_measure(rng, int(rng.integers(2, 12)))
        c = rand_measure(rng, int(rng.integers(2, 12)))
        dab = wasserstein2(a, b)[0]
        dbc = wasserstein2(b, c)[0]
        dac = wasserstein2(a, c)[0]
        assert dac <= dab + dbc + 1e-9


def test_coincident_atoms_deterministic():
    mu = DiscreteMeasure(np.array([[0.0, 0.0], [0.0, 0.0]]), np.array([0.5, 0.5]))
    nu = DiscreteMeasure(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([0.5, 0.5]))
    d1, plan1 = wasserstein2(mu, nu)
    d2, plan2 = wasserstein2(mu, nu)
    assert d1 == d2 == pytest.approx(np.sqrt(0.5 * 1.0), rel=1e-14)
    assert plan1.pairs == plan2.pairs


def test_input_validation():
    good = DiscreteMeasure(np.array([[0.0, 0.0]]), np.array([1.0]))
    bad_mass = DiscreteMeasure(np.array([[0.0, 0.0]]), np.array([0.7]))
    with pytest.raises(ValueError):
        wasserstein2(good, bad_mass)
    one_d = DiscreteMeasure(np.array([0.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        wasserstein2(good, one_d)
    with pytest.raises(ValueError):
        wasserstein2(good, DiscreteMeasure(np.zeros((0, 2)), np.zeros(0)))


@st.composite
def tiny_measures(draw):
    n = draw(st.integers(1, 5))
    pos = [
        [draw(st.floats(-1, 1, allow_nan=False)), draw(st.floats(-1, 1, allow_nan=False))]
        for _ in range(n)
    ]
    return DiscreteMeasure(np.array(pos), np.full(n, 1.0 / n))


@settings(max_examples=25)
@given(tiny_measures(), tiny_measures())
def test_metric_axioms_property(mu, nu):
    d, _ = wasserstein2(mu, nu)
    assert d >= 0.0
    assert wasserstein2(nu, mu)[0] == pytest.approx(d, rel=1e-10, abs=1e-12)
    assert wasserstein2(mu, mu)[0] <= 1e-12
