"""Tests de hamiltonianos, espectros, bandas de Bloch y evolución."""

from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st


@pytest.fixture
def lattice4():
    from stagger.lattice import LatticeSpec

    return LatticeSpec((4, 4, 4))


def _rounded_counts(values, decimals=8):
    return Counter(np.round(values, decimals).tolist())


class TestSpectra:
    def test_scalar_on_2cubed_sums_repeated_links(self):
        from stagger.hopping import make_scalar
        from stagger.lattice import LatticeSpec
        from stagger.spectral import build_hamiltonian, spectrum_dense

        evals = spectrum_dense(build_hamiltonian(make_scalar(LatticeSpec((2, 2, 2)))))
        assert _rounded_counts(evals) == {-6.0: 1, -2.0: 3, 2.0: 3, 6.0: 1}

    def test_staggered_4cubed_multiset(self, lattice4):
        from stagger.hopping import make_staggered
        from stagger.spectral import build_hamiltonian, spectrum_dense

        evals = spectrum_dense(build_hamiltonian(make_staggered(lattice4)))
        expected = (
            [0.0] * 8
            + [2.0, -2.0] * 12
            + [2 * np.sqrt(2), -2 * np.sqrt(2)] * 12
            + [2 * np.sqrt(3), -2 * np.sqrt(3)] * 4
        )
        np.testing.assert_allclose(evals, np.sort(expected), atol=1e-9)

    def test_susskind_mass_opens_gap(self, lattice4):
        from stagger.hopping import add_susskind_mass, make_staggered
        from stagger.spectral import build_hamiltonian, spectrum_dense

        evals = spectrum_dense(build_hamiltonian(add_susskind_mass(make_staggered(lattice4), 1.0)))
        magnitudes = set(np.round(np.abs(evals), 8).tolist())
        expected = {round(v, 8) for v in (1.0, np.sqrt(5), 3.0, np.sqrt(13))}
        assert magnitudes == expected

    @given(st.integers(0, 10_000))
    @settings(max_examples=20, deadline=None)
    def test_spectrum_is_gauge_invariant(self, seed):
        from stagger.hopping import GaugeTransform, apply_gauge, make_staggered
        from stagger.lattice import LatticeSpec
        from stagger.spectral import build_hamiltonian, spectrum_dense

        lattice = LatticeSpec((4, 4, 4))
        k = make_staggered(lattice)
        gauged = apply_gauge(k, GaugeTransform.random(lattice, seed))
        np.testing.assert_allclose(
            spectrum_dense(build_hamiltonian(gauged)), spectrum_dense(build_hamiltonian(k)), atol=1e-9
        )

    def test_chiral_pairing(self, lattice4):
        from stagger.hopping import make_dirac_gauge, make_scalar
        from stagger.spectral import build_hamiltonian, chiral_residual, is_chirally_paired, spectrum_dense

        for builder in (make_scalar, make_dirac_gauge):
            ham = build_hamiltonian(builder(lattice4))
            assert chiral_residual(ham) == 0.0
            assert is_chirally_paired(spectrum_dense(ham))

    def test_non_hermitian_field_rejected(self, lattice4):
        from stagger.errors import PreconditionError
        from stagger.hopping import make_scalar
        from stagger.spectral import build_hamiltonian

        k = make_scalar(lattice4)
        links = np.array(k.links)
        links[5, 2] = 2.0
        with pytest.raises(PreconditionError):
            build_hamiltonian(k.replace(links=links))

    def test_dense_limit(self):
        from stagger.errors import PreconditionError
        from stagger.hopping import make_scalar
        from stagger.lattice import LatticeSpec
        from stagger.spectral import build_hamiltonian, spectrum_dense

        ham = build_hamiltonian(make_scalar(LatticeSpec((24, 24, 16))))
        with pytest.raises(PreconditionError):
            spectrum_dense(ham)

    def test_gershgorin_bound(self, lattice4):
        from stagger.hopping import add_susskind_mass, make_staggered
        from stagger.spectral import build_hamiltonian

        ham = build_hamiltonian(add_susskind_mass(make_staggered(lattice4), 0.5))
        assert ham.gershgorin_bound() == pytest.approx(6.5)


class TestBlochBands:
    @pytest.mark.parametrize("mu", [0.0, 0.5])
    def test_union_matches_dense(self, mu):
        from stagger.hopping import add_susskind_mass, make_staggered
        from stagger.lattice import LatticeSpec
        from stagger.spectral import bloch_bands, build_hamiltonian, spectrum_dense

        k = add_susskind_mass(make_staggered(LatticeSpec((4, 6, 8))), mu)
        bloch = bloch_bands(k)
        assert len(bloch.k_points) == 2 * 3 * 4
        np.testing.assert_allclose(bloch.union(), spectrum_dense(build_hamiltonian(k)), atol=1e-9)

    def test_bands_at_half_pi(self, lattice4):
        from stagger.hopping import make_staggered
        from stagger.spectral import bloch_bands

        bands = bloch_bands(make_staggered(lattice4)).at((np.pi / 2, 0.0, 0.0))
        np.testing.assert_allclose(bands, [-2.0] * 4 + [2.0] * 4, atol=1e-12)

    def test_susskind_gap_at_origin(self, lattice4):
        from stagger.hopping import add_susskind_mass, make_staggered
        from stagger.spectral import bloch_bands

        bloch = bloch_bands(add_susskind_mass(make_staggered(lattice4), 0.5))
        np.testing.assert_allclose(bloch.at((0.0, 0.0, 0.0)), [-0.5] * 4 + [0.5] * 4, atol=1e-12)
        assert bloch.min_abs_energy() == pytest.approx(0.5)

    def test_unknown_k_point(self, lattice4):
        from stagger.errors import PreconditionError
        from stagger.hopping import make_staggered
        from stagger.spectral import bloch_bands

        with pytest.raises(PreconditionError):
            bloch_bands(make_staggered(lattice4)).at((0.1, 0.0, 0.0))

    def test_requires_period_two(self, lattice4):
        from stagger.errors import PreconditionError
        from stagger.hopping import make_staggered
        from stagger.spectral import bloch_bands

        onsite = np.zeros(lattice4.n_sites)
        onsite[0] = 1.0
        with pytest.raises(PreconditionError):
            bloch_bands(make_staggered(lattice4).replace(onsite=onsite))

    def test_rows_layout(self, lattice4):
        from stagger.hopping import make_staggered
        from stagger.spectral import bloch_bands

        rows = list(bloch_bands(make_staggered(lattice4)).rows())
        assert len(rows) == 8 * 8
        assert set(rows[0]) == {"kx", "ky", "kz", "band", "energy"}


class TestEvolution:
    def test_zero_time_returns_input(self, lattice4):
        from stagger.hopping import make_staggered
        from stagger.spectral import WaveFunction, build_hamiltonian, evolve

        psi = WaveFunction.random(lattice4, 1)
        assert evolve(build_hamiltonian(make_staggered(lattice4)), psi, 0.0) is psi

    @pytest.mark.parametrize("method", ["exact", "chebyshev"])
    def test_eigenstate_picks_up_phase(self, lattice4, method):
        from stagger.hopping import make_staggered
        from stagger.spectral import WaveFunction, build_hamiltonian, evolve

        ham = build_hamiltonian(make_staggered(lattice4))
        evals, evecs = ham.eigensystem
        psi = WaveFunction(lattice4, evecs[:, -1])
        out = evolve(ham, psi, 1.3, method)
        np.testing.assert_allclose(out.amplitude, np.exp(-1.3j * evals[-1]) * psi.amplitude, atol=1e-9)

    def test_chebyshev_matches_exact(self, lattice4):
        from stagger.hopping import add_susskind_mass, make_staggered
        from stagger.spectral import WaveFunction, build_hamiltonian, evolve

        ham = build_hamiltonian(add_susskind_mass(make_staggered(lattice4), 0.3))
        psi = WaveFunction.random(lattice4, 7)
        exact = evolve(ham, psi, 10.0, "exact")
        cheb = evolve(ham, psi, 10.0, "chebyshev")
        assert np.linalg.norm(exact.amplitude - cheb.amplitude) < 1e-9

    @pytest.mark.parametrize("method", ["exact", "chebyshev"])
    @given(t=st.floats(0.1, 100.0))
    @settings(max_examples=15, deadline=None)
    def test_norm_and_energy_conserved(self, method, t):
        from stagger.hopping import make_staggered
        from stagger.lattice import LatticeSpec
        from stagger.spectral import WaveFunction, build_hamiltonian, energy_expectation, evolve

        lattice = LatticeSpec((4, 4, 4))
        ham = build_hamiltonian(make_staggered(lattice))
        psi = WaveFunction.random(lattice, 3)
        out = evolve(ham, psi, t, method)
        assert out.norm() == pytest.approx(1.0, abs=1e-10)
        assert energy_expectation(ham, out) == pytest.approx(energy_expectation(ham, psi), abs=1e-10)

    def test_unknown_method(self, lattice4):
        from stagger.errors import PreconditionError
        from stagger.hopping import make_scalar
        from stagger.spectral import WaveFunction, build_hamiltonian, evolve

        with pytest.raises(PreconditionError):
            evolve(build_hamiltonian(make_scalar(lattice4)), WaveFunction.random(lattice4), 1.0, "rk4")

    def test_trajectory_points(self, lattice4):
        from stagger.hopping import make_scalar
        from stagger.spectral import WaveFunction, build_hamiltonian, trajectory

        ham = build_hamiltonian(make_scalar(lattice4))
        points = trajectory(ham, WaveFunction.random(lattice4, 2), [0.0, 0.5, 1.0])
        assert [p.t for p in points] == [0.0, 0.5, 1.0]
        assert all(p.norm == pytest.approx(1.0) for p in points)
        assert points[2].energy == pytest.approx(points[0].energy, abs=1e-9)
        assert set(points[0].to_row()) == {
            "t", "centroid_x", "centroid_y", "centroid_z", "width", "norm", "energy",
        }


class TestPackets:
    @pytest.fixture
    def line(self):
        from stagger.lattice import LatticeSpec

        return LatticeSpec((32, 4, 4))

    def test_packet_is_normalized(self, line):
        from stagger.spectral import gaussian_packet

        psi = gaussian_packet(line, (16, 0, 0), 4.0, (0.3, 0.0, 0.0), axes=(0,))
        assert psi.norm() == pytest.approx(1.0)

    def test_zero_momentum_packet_is_positive(self, line):
        from stagger.spectral import gaussian_packet

        psi = gaussian_packet(line, (16, 0, 0), 4.0, (0.0, 0.0, 0.0), axes=(0,))
        assert np.all(psi.amplitude.real > 0)
        assert np.all(psi.amplitude.imag == 0)

    def test_momentum_peak(self, line):
        from stagger.spectral import gaussian_packet

        psi = gaussian_packet(line, (16, 0, 0), 4.0, (np.pi / 4, 0.0, 0.0), axes=(0,))
        power = np.abs(np.fft.fft(line.to_grid(psi.amplitude), axis=2)) ** 2
        assert int(np.argmax(power.sum(axis=(0, 1)))) == 4

    def test_centroid_and_width(self, line):
        from stagger.spectral import centroid, gaussian_packet, packet_width

        psi = gaussian_packet(line, (16, 0, 0), 4.0, (0.0, 0.0, 0.0), axes=(0,))
        assert centroid(psi)[0] == pytest.approx(16.0, abs=1e-9)
        assert packet_width(psi) > 0

    @pytest.mark.parametrize("width", [1.5, 9.0])
    def test_width_out_of_range(self, line, width):
        from stagger.errors import PreconditionError
        from stagger.spectral import gaussian_packet

        with pytest.raises(PreconditionError):
            gaussian_packet(line, (16, 0, 0), width, (0.0, 0.0, 0.0), axes=(0,))

    def test_displacement_uses_minimal_image(self, line):
        from stagger.spectral import displacement

        np.testing.assert_allclose(displacement([31.0, 0, 0], [1.0, 0, 0], line), [2.0, 0, 0])


class TestStaticity:
    def test_staggered_outruns_scalar_at_small_momentum(self):
        from stagger.lattice import LatticeSpec
        from stagger.spectral import staticity_experiment

        result = staticity_experiment(LatticeSpec((32, 4, 4)), 4.0, np.pi / 16)
        assert result.t == 4.0
        assert result.ratio < 0.35
        assert result.ratio == pytest.approx(np.tan(np.pi / 16), rel=0.25)

    def test_scalar_packet_at_rest_does_not_move(self):
        from stagger.lattice import LatticeSpec
        from stagger.spectral import staticity_experiment

        result = staticity_experiment(LatticeSpec((32, 4, 4)), 4.0, 0.0)
        assert result.scalar_displacement < 1e-6
        assert result.staggered_displacement > 1.0

    def test_ratio_scales_with_momentum(self):
        from stagger.lattice import LatticeSpec
        from stagger.spectral import staticity_ratio

        lattice = LatticeSpec((32, 4, 4))
        coarse = staticity_ratio(lattice, 4.0, np.pi / 16)
        fine = staticity_ratio(lattice, 4.0, np.pi / 32)
        assert fine / coarse == pytest.approx(0.5, rel=0.25)

    def test_result_serializes(self):
        from stagger.lattice import LatticeSpec
        from stagger.spectral import staticity_experiment

        data = staticity_experiment(LatticeSpec((32, 4, 4)), 4.0, np.pi / 16).to_json_dict()
        assert data["dims"] == [32, 4, 4]
        assert data["ratio"] == pytest.approx(data["scalar_displacement"] / data["staggered_displacement"])
