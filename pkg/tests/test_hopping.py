"""Tests de campos de salto, gauges y holonomías."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st


@pytest.fixture
def lattice4():
    from stagger.lattice import LatticeSpec

    return LatticeSpec((4, 4, 4))


class TestCanonicalFields:
    def test_scalar_is_hermitian_and_unimodular(self, lattice4):
        from stagger.hopping import check_hermiticity, make_scalar

        k = make_scalar(lattice4)
        assert check_hermiticity(k)
        assert k.is_unimodular()

    def test_staggered_amplitudes(self, lattice4):
        from stagger.hopping import make_staggered
        from stagger.lattice import Direction

        k = make_staggered(lattice4)
        assert k.amp((1, 0, 0), Direction.PY) == -1
        assert k.amp((1, 0, 0), Direction.MY) == -1
        assert k.amp((1, 1, 0), Direction.PZ) == 1
        assert k.amp((0, 1, 3), Direction.MZ) == -1
        assert k.amp((3, 2, 1), Direction.PX) == 1

    def test_staggered_rejects_odd_dims(self):
        from stagger.errors import PreconditionError
        from stagger.hopping import make_staggered
        from stagger.lattice import LatticeSpec

        with pytest.raises(PreconditionError):
            make_staggered(LatticeSpec((3, 4, 4)))

    def test_dirac_gauge_from_staggered(self):
        from stagger.hopping import GaugeTransform, apply_gauge, make_dirac_gauge, make_staggered
        from stagger.lattice import LatticeSpec

        for dims in ((4, 4, 4), (8, 8, 8)):
            lattice = LatticeSpec(dims)
            gauged = apply_gauge(make_staggered(lattice), GaugeTransform.dirac(lattice))
            assert gauged.allclose(make_dirac_gauge(lattice))

    def test_dirac_gauge_needs_multiples_of_four(self):
        from stagger.errors import PreconditionError
        from stagger.hopping import GaugeTransform, make_dirac_gauge
        from stagger.lattice import LatticeSpec

        lattice = LatticeSpec((6, 4, 4))
        with pytest.raises(PreconditionError):
            make_dirac_gauge(lattice)
        with pytest.raises(PreconditionError):
            GaugeTransform.dirac(lattice)

    def test_links_from_positive_is_hermitian(self, lattice4):
        from stagger.hopping import HoppingField, check_hermiticity, links_from_positive

        phase = np.exp(0.5j * np.pi * lattice4.coords[:, 0])
        ones = np.ones(lattice4.n_sites)
        links = links_from_positive(lattice4, [ones, phase, ones])
        np.testing.assert_array_equal(links[:, 3], np.conj(phase))
        field = HoppingField(lattice4, links, np.zeros(lattice4.n_sites), "x-phase")
        assert check_hermiticity(field)


class TestHermiticity:
    def test_broken_link_detected(self, lattice4):
        from stagger.hopping import check_hermiticity, hermiticity_residual, make_scalar

        k = make_scalar(lattice4)
        links = np.array(k.links)
        links[0, 0] = 1j
        broken = k.replace(links=links)
        assert not check_hermiticity(broken)
        assert hermiticity_residual(broken) == pytest.approx(np.sqrt(2))

    def test_complex_onsite_is_not_hermitian(self, lattice4):
        from stagger.hopping import check_hermiticity, make_scalar

        k = make_scalar(lattice4)
        assert not check_hermiticity(k.replace(onsite=np.full(lattice4.n_sites, 0.5j)))

    def test_alternating_mass_stays_hermitian(self, lattice4):
        from stagger.hopping import add_alternating_mass, check_hermiticity, make_dirac_gauge

        k = add_alternating_mass(make_dirac_gauge(lattice4), 0.3)
        assert check_hermiticity(k)
        assert not k.is_unimodular()

    def test_alternating_mass_requires_dirac_gauge(self, lattice4):
        from stagger.errors import PreconditionError
        from stagger.hopping import add_alternating_mass, make_staggered

        with pytest.raises(PreconditionError):
            add_alternating_mass(make_staggered(lattice4), 0.3)

    def test_susskind_mass_onsite(self, lattice4):
        from stagger.hopping import add_susskind_mass, make_staggered

        k = add_susskind_mass(make_staggered(lattice4), 0.5)
        assert k.onsite[lattice4.index((0, 0, 0))] == 0.5
        assert k.onsite[lattice4.index((1, 0, 0))] == -0.5
        assert k.onsite[lattice4.index((1, 1, 1))] == -0.5


class TestGauge:
    def test_non_unimodular_gauge_rejected(self, lattice4):
        from stagger.errors import PreconditionError
        from stagger.hopping import GaugeTransform

        with pytest.raises(PreconditionError):
            GaugeTransform(lattice4, np.full(lattice4.n_sites, 2.0))

    @given(st.integers(0, 10_000))
    @settings(max_examples=20, deadline=None)
    def test_gauge_then_inverse_restores(self, seed):
        from stagger.hopping import GaugeTransform, apply_gauge, make_staggered
        from stagger.lattice import LatticeSpec

        lattice = LatticeSpec((4, 4, 4))
        k = make_staggered(lattice)
        g = GaugeTransform.random(lattice, seed)
        assert apply_gauge(apply_gauge(k, g), g.inverse()).allclose(k)

    @given(st.integers(0, 10_000))
    @settings(max_examples=20, deadline=None)
    def test_gauge_preserves_hermiticity_and_holonomies(self, seed):
        from stagger.hopping import (
            GaugeTransform,
            apply_gauge,
            check_hermiticity,
            holonomy_signature,
            make_staggered,
        )
        from stagger.lattice import LatticeSpec

        lattice = LatticeSpec((4, 4, 4))
        k = make_staggered(lattice)
        gauged = apply_gauge(k, GaugeTransform.random(lattice, seed))
        assert check_hermiticity(gauged)
        np.testing.assert_allclose(holonomy_signature(gauged), holonomy_signature(k), atol=1e-12)

    def test_constant_gauge_is_strict_identity(self, lattice4):
        from stagger.hopping import GaugeTransform, apply_gauge, make_staggered

        k = make_staggered(lattice4)
        assert apply_gauge(k, GaugeTransform.constant(lattice4, np.exp(0.7j))).allclose(k)

    def test_compose_matches_sequential_application(self, lattice4):
        from stagger.hopping import GaugeTransform, apply_gauge, make_scalar

        k = make_scalar(lattice4)
        g1, g2 = GaugeTransform.random(lattice4, 1), GaugeTransform.random(lattice4, 2)
        assert apply_gauge(apply_gauge(k, g1), g2).allclose(apply_gauge(k, g2.compose(g1)))


class TestHolonomies:
    def test_staggered_plaquettes_are_minus_one(self, lattice4):
        from stagger.hopping import make_staggered, plaquette_holonomies

        k = make_staggered(lattice4)
        for plane in ((0, 1), (0, 2), (1, 2)):
            np.testing.assert_allclose(plaquette_holonomies(k, plane), -1.0)

    def test_scalar_plaquettes_are_one(self, lattice4):
        from stagger.hopping import make_scalar, plaquette_holonomies

        np.testing.assert_allclose(plaquette_holonomies(make_scalar(lattice4), (0, 1)), 1.0)

    def test_straight_holonomies_trivial_on_even_lattice(self, lattice4):
        from stagger.hopping import make_staggered, straight_holonomies

        k = make_staggered(lattice4)
        for axis in range(3):
            np.testing.assert_allclose(straight_holonomies(k, axis), 1.0)

    def test_straight_holonomy_counts_rows(self):
        from stagger.hopping import make_scalar, straight_holonomies
        from stagger.lattice import LatticeSpec

        lattice = LatticeSpec((4, 6, 2))
        assert straight_holonomies(make_scalar(lattice), 0).shape == (12,)
        assert straight_holonomies(make_scalar(lattice), 1).shape == (8,)


class TestSerialization:
    def test_save_and_load(self, lattice4, tmp_path):
        from stagger.hopping import add_susskind_mass, load_field, make_staggered, save_field

        k = add_susskind_mass(make_staggered(lattice4), 0.25)
        path = tmp_path / "field.json"
        save_field(k, path)
        loaded = load_field(path)
        assert loaded.allclose(k)
        assert loaded.label == k.label

    def test_json_layout(self, lattice4):
        from stagger.hopping import make_scalar

        data = make_scalar(lattice4).to_json_dict()
        assert data["dims"] == [4, 4, 4]
        assert len(data["links"]) == 6 * lattice4.n_sites
        assert set(data["links"][0]) == {"site", "dir", "re", "im"}
