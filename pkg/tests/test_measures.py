import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aggeq.densities import quantize_density, three_bump
from aggeq.measures import (
    DiscreteMeasure,
    interaction_energy,
    load_measure_csv,
    save_measure_csv,
    velocity_at,
)
from aggeq.potentials import absolute_value, morse

from oracles import density_moments_quadrature, pair_energy_loops


def test_single_atom_moments():
    m = DiscreteMeasure(np.array([[2.0, 3.0]]), np.array([1.0]))
    assert m.total_mass() == 1.0
    np.testing.assert_array_equal(m.center_of_mass(), [2.0, 3.0])
    assert m.second_moment() == 13.0


def test_symmetric_pair_moments():
    m = DiscreteMeasure(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([0.5, 0.5]))
    np.testing.assert_array_equal(m.center_of_mass(), [0.0, 0.0])
    assert m.second_moment() == 1.0


def test_zero_measure_center_errors():
    m = DiscreteMeasure(np.array([[1.0, 2.0]]), np.array([0.0]))
    with pytest.raises(ValueError):
        m.center_of_mass()


def test_validation():
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([[0.0, 0.0]]), np.array([-1.0]))
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([[0.0, 0.0]]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([[np.inf, 0.0]]), np.array([1.0]))


def test_three_bump_com_matches_dense_quadrature():
    f = three_bump(100.0)
    box = ((-0.5, -0.5), (1.5, 1.5))
    _, com_ref, _ = density_moments_quadrature(f, box, n_cells=800)
    m = quantize_density(f, box, 160, 160)
    assert np.linalg.norm(m.center_of_mass() - com_ref) <= 1e-6
    # closed form from the bump weights (equal-width Gaussians)
    np.testing.assert_allclose(com_ref, [1.41 / 2.9, (1.0 / 3.0 + 0.6 + 0.54) / 2.9], atol=2e-7)


class TestVelocity:
    def test_atom_at_evaluation_point_contributes_nothing(self):
        m = DiscreteMeasure(np.array([[1.0, 1.0]]), np.array([1.0]))
        v = velocity_at(m, morse(5.0), np.array([1.0, 1.0]))
        np.testing.assert_array_equal(v, [0.0, 0.0])

    def test_unit_attraction(self):
        m = DiscreteMeasure(np.array([[0.0, 0.0]]), np.array([1.0]))
        v = velocity_at(m, absolute_value(), np.array([2.0, 0.0]))
        np.testing.assert_allclose(v, [-1.0, 0.0], atol=0)

    def test_symmetric_cancellation(self):
        m = DiscreteMeasure(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([0.5, 0.5]))
        v = velocity_at(m, absolute_value(), np.array([0.0, 0.0]))
        np.testing.assert_allclose(v, [0.0, 0.0], atol=1e-16)

    @pytest.mark.parametrize("p", [morse(5.0), absolute_value()], ids=["morse5", "abs"])
    def test_speed_bound(self, p):
        rng = np.random.default_rng(0)
        m = DiscreteMeasure(rng.normal(size=(40, 2)), rng.random(40))
        pts = rng.uniform(-3, 3, size=(500, 2))
        speeds = np.linalg.norm(velocity_at(m, p, pts), axis=1)
        assert np.max(speeds) <= p.w_inf * m.total_mass() * (1 + 1e-14)

    @pytest.mark.parametrize("p", [morse(5.0), absolute_value()], ids=["morse5", "abs"])
    def test_one_sided_lipschitz(self, p):
        # (a(x) - a(y)) . (x - y) <= -lam |rho| |x - y|^2
        rng = np.random.default_rng(1)
        m = DiscreteMeasure(rng.normal(size=(30, 2)), rng.random(30))
        x = rng.uniform(-3, 3, size=(10_000, 2))
        y = rng.uniform(-3, 3, size=(10_000, 2))
        diff = x - y
        lhs = np.sum((velocity_at(m, p, x) - velocity_at(m, p, y)) * diff, axis=1)
        bound = -p.lam * m.total_mass() * np.sum(diff * diff, axis=1)
        assert np.all(lhs <= bound + 1e-12)


class TestEnergy:
    def test_single_dirac_zero(self):
        m = DiscreteMeasure(np.array([[3.0, -1.0]]), np.array([1.0]))
        assert interaction_energy(m, morse(5.0)) == 0.0

    def test_two_atom_hand_value(self):
        m = DiscreteMeasure(np.array([[0.0, 0.0], [2.0, 0.0]]), np.array([0.5, 0.5]))
        assert interaction_energy(m, absolute_value()) == pytest.approx(0.5, abs=1e-15)

    def test_matches_double_loop(self):
        rng = np.random.default_rng(2)
        m = DiscreteMeasure(rng.normal(size=(25, 2)), rng.random(25))
        p = morse(2.0)
        ref = pair_energy_loops(m.positions, m.masses, lambda r: 1.0 - np.exp(-2.0 * r))
        assert interaction_energy(m, p) == pytest.approx(ref, rel=1e-13)

    def test_translation_invariance(self):
        rng = np.random.default_rng(3)
        m = DiscreteMeasure(rng.normal(size=(20, 2)), rng.random(20))
        shifted = DiscreteMeasure(m.positions + np.array([10.0, -4.0]), m.masses)
        p = morse(1.0)
        assert interaction_energy(m, p) == pytest.approx(
            interaction_energy(shifted, p), abs=1e-12
        )


class TestSerialization:
    def test_round_trip_2d(self, tmp_path):
        rng = np.random.default_rng(4)
        m = DiscreteMeasure(rng.normal(size=(17, 2)), rng.random(17))
        path = tmp_path / "atoms.csv"
        save_measure_csv(m, path)
        back = load_measure_csv(path)
        np.testing.assert_array_equal(back.positions, m.positions)
        np.testing.assert_array_equal(back.masses, m.masses)
        assert path.read_text().splitlines()[0] == "x,y,mass"

    def test_round_trip_1d(self, tmp_path):
        m = DiscreteMeasure(np.array([0.25, -1.5]), np.array([0.5, 0.5]))
        path = tmp_path / "atoms.csv"
        save_measure_csv(m, path)
        back = load_measure_csv(path)
        assert back.dim == 1
        np.testing.assert_array_equal(back.positions, m.positions)

    def test_header_required(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0.0,0.0,1.0\n")
        with pytest.raises(ValueError):
            load_measure_csv(path)


def test_normalized_drops_dust():
    m = DiscreteMeasure(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([1.0, 1e-16]))
    n = m.normalized()
    assert n.n_atoms == 1
    assert n.total_mass() == 1.0
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([[0.0, 0.0]]), np.array([0.0])).normalized()


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_com_translation_equivariance(sx, sy):
    rng = np.random.default_rng(5)
    m = DiscreteMeasure(rng.normal(size=(10, 2)), rng.random(10) + 0.1)
    shift = np.array([sx, sy])
    shifted = DiscreteMeasure(m.positions + shift, m.masses)
    np.testing.assert_allclose(
        shifted.center_of_mass(), m.center_of_mass() + shift, atol=1e-9
    )
