"""Coupling-rate estimator tests: overlaps, scalings, reference magnitude."""

import dataclasses
import math

import numpy as np
import pytest

from tripletdc.exceptions import ConfigurationError, InvalidParameterError
from tripletdc.nonlinearity import (
    REFERENCE_GEOMETRY,
    REFERENCE_SIGMA,
    MaterialGeometry,
    ModeProfileGrid,
    estimate_kappa,
    gaussian_sigma,
    modal_overlap,
)


def gaussian_grid(w, n=201, span=10.0):
    d = span / (n - 1)
    x = np.arange(n) * d - span / 2.0
    X, Y = np.meshgrid(x, x)
    return ModeProfileGrid(np.exp(-(X ** 2 + Y ** 2) / w ** 2).astype(complex), d, d)


class TestGaussianSigma:
    def test_matched_waists_give_inverse_gaussian_area(self):
        for w in (0.5, 1.0, 1.3):
            assert gaussian_sigma(w, w) == pytest.approx(1.0 / (math.pi * w ** 2), rel=1e-14)

    def test_inverse_area_scaling(self):
        base = gaussian_sigma(0.9, 1.2)
        assert gaussian_sigma(2.7, 3.6) == pytest.approx(base / 9.0, rel=1e-12)

    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            gaussian_sigma(0.0, 1.0)
        with pytest.raises(InvalidParameterError):
            gaussian_sigma(1.0, -2.0)


class TestModalOverlap:
    def test_sampled_gaussians_match_closed_form(self):
        for wa, wb in ((1.0, 1.0), (1.0, 1.4), (0.8, 1.2)):
            got = modal_overlap(gaussian_grid(wa), gaussian_grid(wb))
            assert got == pytest.approx(gaussian_sigma(wa, wb), rel=1e-9)

    def test_uniform_patch_gives_inverse_area(self):
        vals = np.ones((21, 31), dtype=complex)
        g = ModeProfileGrid(vals, dx=0.1, dy=0.2)
        area = (31 - 1) * 0.1 * (21 - 1) * 0.2
        assert modal_overlap(g, g) == pytest.approx(1.0 / area, rel=1e-12)

    def test_amplitude_normalization_is_irrelevant(self):
        ga, gb = gaussian_grid(1.0), gaussian_grid(1.3)
        base = modal_overlap(ga, gb)
        ga7 = ModeProfileGrid(7.0 * ga.values, ga.dx, ga.dy)
        gb3 = ModeProfileGrid(-3.0j * gb.values, gb.dx, gb.dy)
        assert modal_overlap(ga7, gb3) == pytest.approx(base, rel=1e-12)

    def test_mismatched_grids_rejected(self):
        ga = gaussian_grid(1.0, n=51)
        gb = gaussian_grid(1.0, n=52)
        with pytest.raises(ConfigurationError):
            modal_overlap(ga, gb)
        gc = ModeProfileGrid(ga.values, ga.dx, 2.0 * ga.dy)
        with pytest.raises(ConfigurationError):
            modal_overlap(ga, gc)

    def test_zero_power_rejected(self):
        z = ModeProfileGrid(np.zeros((5, 5), dtype=complex), 0.1, 0.1)
        with pytest.raises(ConfigurationError):
            modal_overlap(z, z)


class TestEstimate:
    def test_reference_magnitude(self):
        k = estimate_kappa(REFERENCE_GEOMETRY, REFERENCE_SIGMA)
        assert k == pytest.approx(73.74666515580299, rel=1e-12)
        # headline claim: order 100 per second, within a factor of three
        assert 100.0 / 3.0 < k < 100.0 * 3.0

    def test_ratio_to_cavity_linewidth(self):
        gamma_a = 1.5e9
        ratio = estimate_kappa(REFERENCE_GEOMETRY, REFERENCE_SIGMA) / gamma_a
        assert ratio == pytest.approx(4.916444343720199e-08, rel=1e-12)
        assert 1e-8 < ratio < 1e-6

    def test_selection_rule_hard_zero(self):
        geo = dataclasses.replace(REFERENCE_GEOMETRY, m_b=161)
        assert estimate_kappa(geo, REFERENCE_SIGMA) == 0.0

    def test_linear_in_chi3(self):
        base = estimate_kappa(REFERENCE_GEOMETRY, REFERENCE_SIGMA)
        geo = dataclasses.replace(REFERENCE_GEOMETRY, chi3=2.0 * REFERENCE_GEOMETRY.chi3)
        assert estimate_kappa(geo, REFERENCE_SIGMA) == pytest.approx(2.0 * base, rel=1e-12)

    def test_linear_in_sigma(self):
        base = estimate_kappa(REFERENCE_GEOMETRY, REFERENCE_SIGMA)
        assert estimate_kappa(REFERENCE_GEOMETRY, 3.0 * REFERENCE_SIGMA) == \
            pytest.approx(3.0 * base, rel=1e-12)

    def test_inverse_in_length(self):
        base = estimate_kappa(REFERENCE_GEOMETRY, REFERENCE_SIGMA)
        geo = dataclasses.replace(REFERENCE_GEOMETRY, length=2.0 * REFERENCE_GEOMETRY.length)
        assert estimate_kappa(geo, REFERENCE_SIGMA) == pytest.approx(base / 2.0, rel=1e-12)

    def test_quadratic_in_carrier_frequency(self):
        # sqrt(w^3 * 3w) = sqrt(3) w^2
        base = estimate_kappa(REFERENCE_GEOMETRY, REFERENCE_SIGMA)
        geo = dataclasses.replace(REFERENCE_GEOMETRY, omega_a=2.0 * REFERENCE_GEOMETRY.omega_a)
        assert estimate_kappa(geo, REFERENCE_SIGMA) == pytest.approx(4.0 * base, rel=1e-12)

    def test_permittivity_scaling(self):
        base = estimate_kappa(REFERENCE_GEOMETRY, REFERENCE_SIGMA)
        geo = dataclasses.replace(REFERENCE_GEOMETRY, eps_rel_a=4.0 * REFERENCE_GEOMETRY.eps_rel_a)
        assert estimate_kappa(geo, REFERENCE_SIGMA) == pytest.approx(base / 8.0, rel=1e-12)

    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            estimate_kappa(REFERENCE_GEOMETRY, 0.0)
        with pytest.raises(InvalidParameterError):
            MaterialGeometry(chi3=-1e-20, omega_a=1e15, eps_rel_a=4.0,
                             eps_rel_b=4.0, length=1e-4, m_a=1, m_b=3)
        with pytest.raises(InvalidParameterError):
            MaterialGeometry(chi3=1e-20, omega_a=1e15, eps_rel_a=0.5,
                             eps_rel_b=4.0, length=1e-4, m_a=1, m_b=3)


class TestProfileIO:
    def write_profile(self, path, grid):
        ny, nx = grid.values.shape
        with open(path, "w") as f:
            f.write("# transverse profile samples\n")
            f.write(f"{nx} {ny} {grid.dx} {grid.dy}\n")
            for v in grid.values.reshape(-1):
                f.write(f"{v.real} {v.imag}\n")

    def test_round_trip(self, tmp_path):
        g = gaussian_grid(1.1, n=17, span=6.0)
        path = tmp_path / "profile.dat"
        self.write_profile(path, g)
        back = ModeProfileGrid.from_file(path)
        assert back.values.shape == g.values.shape
        assert np.allclose(back.values, g.values, rtol=0, atol=1e-15)
        assert back.dx == g.dx and back.dy == g.dy

    def test_comments_and_blanks_skipped(self, tmp_path):
        path = tmp_path / "p.dat"
        path.write_text("# c\n\n2 2 0.5 0.5\n1 0\n\n2 0\n# mid\n3 0\n4 0\n")
        g = ModeProfileGrid.from_file(path)
        assert g.values[1, 1] == 4.0

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "p.dat"
        path.write_text("2 2 0.5\n1 0\n2 0\n3 0\n4 0\n")
        with pytest.raises(ConfigurationError, match="header"):
            ModeProfileGrid.from_file(path)

    def test_row_count_mismatch(self, tmp_path):
        path = tmp_path / "p.dat"
        path.write_text("2 2 0.5 0.5\n1 0\n2 0\n3 0\n")
        with pytest.raises(ConfigurationError, match="rows"):
            ModeProfileGrid.from_file(path)

    def test_bad_row_shape(self, tmp_path):
        path = tmp_path / "p.dat"
        path.write_text("2 2 0.5 0.5\n1 0 9\n2 0 9\n3 0 9\n4 0 9\n")
        with pytest.raises(ConfigurationError):
            ModeProfileGrid.from_file(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "p.dat"
        path.write_text("# nothing\n")
        with pytest.raises(ConfigurationError, match="empty"):
            ModeProfileGrid.from_file(path)

    def test_constructor_validation(self):
        with pytest.raises(ConfigurationError):
            ModeProfileGrid(np.ones(5, dtype=complex), 0.1, 0.1)
        with pytest.raises(ConfigurationError):
            ModeProfileGrid(np.ones((1, 5), dtype=complex), 0.1, 0.1)
        with pytest.raises(ConfigurationError):
            ModeProfileGrid(np.ones((5, 5), dtype=complex), 0.0, 0.1)
