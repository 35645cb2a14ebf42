"""Potential catalog: sampling, decay fits and admissibility verdicts."""

import math

import numpy as np
import pytest

from solitonlab.errors import ConfigError
from solitonlab.grid import make_grid
from solitonlab.potentials import (
    PotentialSpec,
    check_admissibility,
    decay_fit,
    sample_potential,
)

KAPPA = (math.sqrt(5.0) - 1.0) / 2.0  # depth 1/2 well: E0 = -kappa^2/2


class TestSampling:
    def test_zero(self):
        g = make_grid(-10.0, 10.0, 64)
        pot = sample_potential(PotentialSpec("zero"), g)
        assert np.all(pot.values == 0.0)

    def test_algebraic_values(self):
        spec = PotentialSpec("algebraic", q=1.0, s=3.0)
        assert spec(np.array([0.0]))[0] == pytest.approx(1.0)
        assert spec(np.array([1.0]))[0] == pytest.approx(2.0 ** -1.5)

    def test_sech2_at_center(self):
        spec = PotentialSpec("sech2_scaled", beta=1.0)
        assert spec(np.array([0.0]))[0] == pytest.approx(-1.0)

    def test_poschl_teller_matches_sech2(self):
        # ell = 1 is the depth-1 well
        g = make_grid(-20.0, 20.0, 256)
        a = sample_potential(PotentialSpec("poschl_teller", ell=1.0), g)
        b = sample_potential(PotentialSpec("sech2_scaled", beta=1.0), g)
        assert np.allclose(a.values, b.values, atol=1e-15)

    def test_center_offset(self):
        spec = PotentialSpec("gaussian", q=2.0, sigma=1.0, center=3.0)
        assert spec(np.array([3.0]))[0] == pytest.approx(2.0)

    def test_even_sampling_exactly_mirrored(self):
        g = make_grid(-12.0, 12.0, 256)
        for spec in (
            PotentialSpec("algebraic", q=-0.7, s=2.5),
            PotentialSpec("gaussian", q=1.3, sigma=0.8),
            PotentialSpec("sech2_scaled", beta=0.4),
        ):
            v = sample_potential(spec, g).values
            j = np.arange(1, g.n)
            assert np.array_equal(v[j], v[g.n - j])

    def test_samples_are_real(self):
        g = make_grid(-10.0, 10.0, 64)
        for kind in ("zero", "algebraic", "gaussian", "sech2_scaled", "poschl_teller"):
            assert sample_potential(PotentialSpec(kind), g).values.dtype == np.float64

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError):
            PotentialSpec("delta")

    def test_from_dict_validates(self):
        spec = PotentialSpec.from_dict({"kind": "algebraic", "q": 0.5, "s": 3})
        assert spec.q == 0.5 and spec.s == 3.0
        with pytest.raises(ConfigError):
            PotentialSpec.from_dict({"kind": "gaussian", "width": 1.0})
        with pytest.raises(ConfigError):
            PotentialSpec.from_dict({"q": 1.0})


class TestDecayFit:
    def test_algebraic_exact(self):
        g = make_grid(-80.0, 80.0, 2048)
        est = decay_fit(PotentialSpec("algebraic", q=1.0, s=3.0), g)
        assert 2.9 <= est <= 3.1

    def test_algebraic_negative_amplitude(self):
        g = make_grid(-80.0, 80.0, 2048)
        est = decay_fit(PotentialSpec("algebraic", q=-0.5, s=2.5), g)
        assert 2.4 <= est <= 2.6

    def test_gaussian_super_algebraic(self):
        g = make_grid(-80.0, 80.0, 2048)
        assert math.isinf(decay_fit(PotentialSpec("gaussian", q=1.0, sigma=1.0), g))

    def test_sech2_super_algebraic(self):
        g = make_grid(-80.0, 80.0, 2048)
        assert math.isinf(decay_fit(PotentialSpec("sech2_scaled", beta=0.5), g))

    def test_zero_window_rejected(self):
        g = make_grid(-80.0, 80.0, 2048)
        with pytest.raises(ConfigError):
            decay_fit(PotentialSpec("zero"), g)


@pytest.fixture(scope="module")
def adm_grid():
    return make_grid(-40.0, 40.0, 2048)


class TestAdmissibility:
    def test_zero_potential_resonant(self, adm_grid):
        rep = check_admissibility(PotentialSpec("zero"), adm_grid)
        assert rep.resonance_detected
        assert not rep.admissible
        assert rep.bound_state_count == 0

    def test_depth_one_well_resonant(self, adm_grid):
        rep = check_admissibility(PotentialSpec("sech2_scaled", beta=1.0), adm_grid)
        assert rep.bound_state_count == 1
        assert rep.bound_state_energies[0] == pytest.approx(-0.5, abs=1e-3)
        assert rep.resonance_detected
        assert not rep.admissible

    def test_half_depth_well_admissible(self, adm_grid):
        rep = check_admissibility(PotentialSpec("sech2_scaled", beta=0.5), adm_grid)
        assert rep.bound_state_count == 1
        assert rep.bound_state_energies[0] == pytest.approx(-KAPPA**2 / 2.0, abs=1e-3)
        assert not rep.resonance_detected
        assert rep.admissible
        assert rep.conclusive

    def test_repulsive_algebraic_admissible(self, adm_grid):
        rep = check_admissibility(PotentialSpec("algebraic", q=0.5, s=3.0), adm_grid)
        assert rep.admissible
        assert rep.bound_state_count == 0
        assert 2.9 <= rep.decay_parameter_estimate <= 3.1

    def test_slow_decay_not_admissible(self, adm_grid):
        # s < 2 fails the decay requirement even without bound states
        rep = check_admissibility(PotentialSpec("algebraic", q=0.02, s=1.5), adm_grid)
        assert not rep.admissible
        assert rep.decay_parameter_estimate < 2.0

    def test_edge_tolerance_inconclusive(self):
        # domain too small for the slowly decaying potential
        small = make_grid(-8.0, 8.0, 256)
        rep = check_admissibility(PotentialSpec("algebraic", q=2.0, s=3.0), small)
        assert not rep.conclusive
        assert not rep.admissible

    def test_resonance_flag_monotone_in_threshold(self, adm_grid):
        # a looser resonance threshold can only add resonance verdicts:
        # the admissible verdict never flips inadmissible -> admissible
        spec = PotentialSpec("sech2_scaled", beta=0.5)
        loose = check_admissibility(spec, adm_grid, resonance_eps=1e-2)
        tight = check_admissibility(spec, adm_grid, resonance_eps=1e-6)
        assert loose.resonance_detected or not tight.resonance_detected
        assert (not tight.admissible) or loose.admissible or loose.resonance_detected

    def test_json_round_trip(self, adm_grid):
        rep = check_admissibility(PotentialSpec("gaussian", q=1.0, sigma=1.0), adm_grid)
        d = rep.to_dict()
        assert d["decay_super_algebraic"] is True
        assert d["decay_parameter_estimate"] is None
        assert isinstance(d["admissible"], bool)

    def test_narrow_gaussian_labeled_as_delta_stand_in(self, adm_grid):
        spec = PotentialSpec("gaussian", q=1.0, sigma=0.04)
        assert spec.is_delta_approximation
        rep = check_admissibility(spec, adm_grid)
        assert any("delta" in note for note in rep.notes)


class TestTailIntegral:
    def test_zero(self):
        assert PotentialSpec("zero").tail_integral(10.0) == 0.0

    def test_algebraic_tail_matches_quadrature(self):
        spec = PotentialSpec("algebraic", q=1.0, s=3.0)
        # 2 * integral_X^inf (1+x^2)^{-3/2} dx = 2 (1 - X/sqrt(1+X^2)) ~ X^-2
        x = np.linspace(20.0, 2000.0, 400000)
        quad = 2.0 * np.trapezoid(spec(x), x)
        est = spec.tail_integral(20.0)
        assert quad <= est <= 2.0 * quad
