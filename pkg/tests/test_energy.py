import numpy as np
import pytest

from fracvar import (DomainSpec, EnergyModel, Field, assemble_gradient,
                     build_grid, composition_residual, convexity_gap, energy,
                     energy_gradient, field_from_function, hs_norm,
                     make_coefficient, make_reaction, monotonicity_pairing,
                     quasilinear_part, weighted_form)
from fracvar.energy import EnergyOverflowError


@pytest.fixture(scope="module")
def zero_h(grid_1d_128):
    return Field(grid_1d_128, np.zeros(128))


@pytest.fixture(scope="module")
def quasilinear_model(grad_128, power_coeff, zero_h):
    reaction = make_reaction("cubic_saturating", {"kappa": 3.0})
    return EnergyModel(grad_op=grad_128, coeff=power_coeff, reaction=reaction,
                       forcing=zero_h)


def test_zero_field_zero_energy(quasilinear_model, grid_1d_128):
    z = Field(grid_1d_128, np.zeros(128))
    assert energy(quasilinear_model, z) == 0.0


def test_quadratic_case_matches_laplacian_form(grid_1d_128, grad_128, lap_128, rng):
    # gamma == 1, f == 0: the energy is the gradient-table Dirichlet form,
    # which matches the assembled Laplacian's quadratic form up to the
    # composition residual of the test field
    coeff = make_coefficient("constant", {"c": 1.0})
    h = Field(grid_1d_128, np.abs(rng.standard_normal(128)))
    model = EnergyModel(grad_op=grad_128, coeff=coeff, reaction=None, forcing=h)
    w = grid_1d_128.weight
    for _ in range(5):
        sharp = rng.uniform(20, 60)
        cen = rng.uniform(0.35, 0.65)
        u = field_from_function(grid_1d_128, lambda x: np.exp(-sharp * (x - cen) ** 2))
        e = energy(model, u)
        lap_quad = 0.5 * w * np.dot(u.values, lap_128.table @ u.values) \
            - w * np.dot(h.values, u.values)
        grad_quad = e + w * np.dot(h.values, u.values)
        comp = composition_residual(grad_128, lap_128, u)
        assert abs(e - lap_quad) <= 0.5 * comp * abs(grad_quad) + 1e-12


def test_small_amplitude_scaling_quadratic(quasilinear_model, grid_1d_128):
    # f'(0) = 0 and h = 0, so E(t u) has no linear term: the log-log slope
    # of t -> E(t u) at small t is 2
    u = field_from_function(grid_1d_128, lambda x: np.exp(-30 * (x - 0.5) ** 2))
    ts = np.array([1e-3, 3e-3, 1e-2, 3e-2, 1e-1])
    es = np.array([energy(quasilinear_model, Field(grid_1d_128, t * u.values)) for t in ts])
    slope = np.polyfit(np.log(ts), np.log(np.abs(es)), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.05)


def test_gradient_zero_at_origin(quasilinear_model, grid_1d_128):
    z = Field(grid_1d_128, np.zeros(128))
    g = energy_gradient(quasilinear_model, z)
    assert np.all(g.representer.values == 0.0)


def test_gradient_matches_central_differences(quasilinear_model, grid_1d_128, rng):
    for _ in range(20):
        u = Field(grid_1d_128, rng.standard_normal(128))
        phi = Field(grid_1d_128, rng.standard_normal(128))
        drv = energy_gradient(quasilinear_model, u).pairing(phi)
        eps = 1e-5 * np.linalg.norm(u.values) / np.linalg.norm(phi.values)
        fplus = energy(quasilinear_model, Field(grid_1d_128, u.values + eps * phi.values))
        fminus = energy(quasilinear_model, Field(grid_1d_128, u.values - eps * phi.values))
        fd = (fplus - fminus) / (2 * eps)
        assert abs(drv - fd) <= 1e-5 * max(1.0, abs(fd))


def test_representer_reproduces_directional(quasilinear_model, grid_1d_128, rng):
    u = Field(grid_1d_128, rng.standard_normal(128))
    g = energy_gradient(quasilinear_model, u)
    for _ in range(10):
        phi = Field(grid_1d_128, rng.standard_normal(128))
        assert abs(g.pairing(phi) - g.directional(phi)) <= 1e-12 * (1 + abs(g.pairing(phi)))


def test_convexity_gap_zero_at_equal(quasilinear_model, grid_1d_128, rng):
    u = Field(grid_1d_128, rng.standard_normal(128))
    assert convexity_gap(quasilinear_model, u, u) == 0.0


def test_convexity_gap_nonnegative_100_pairs(quasilinear_model, grid_1d_128, rng):
    worst = np.inf
    for _ in range(100):
        u1 = Field(grid_1d_128, rng.standard_normal(128))
        u2 = Field(grid_1d_128, rng.standard_normal(128))
        worst = min(worst, convexity_gap(quasilinear_model, u1, u2))
    assert worst >= -1e-10


def test_convexity_gap_constant_gamma_closed_form(grid_1d_128, grad_128, zero_h, rng):
    c = 2.0
    coeff = make_coefficient("constant", {"c": c})
    model = EnergyModel(grad_op=grad_128, coeff=coeff, reaction=None, forcing=zero_h)
    u1 = Field(grid_1d_128, rng.standard_normal(128))
    u2 = Field(grid_1d_128, rng.standard_normal(128))
    gap = convexity_gap(model, u1, u2)
    diff = Field(grid_1d_128, u1.values - u2.values)
    expected = 0.5 * c * hs_norm(grad_128, diff) ** 2
    assert gap == pytest.approx(expected, rel=1e-10)
    assert gap >= 0.0


def test_quasilinear_part_constant_gamma(grid_1d_128, grad_128, zero_h, rng):
    coeff = make_coefficient("constant", {"c": 2.0})
    model = EnergyModel(grad_op=grad_128, coeff=coeff, reaction=None, forcing=zero_h)
    u = Field(grid_1d_128, rng.standard_normal(128))
    assert quasilinear_part(model, u) == pytest.approx(hs_norm(grad_128, u) ** 2, rel=1e-12)


class TestWeightedForm:
    def test_constant_gamma_independent_of_scale(self, grid_1d_128, grad_128, zero_h, rng):
        c = 2.0
        coeff = make_coefficient("constant", {"c": c})
        model = EnergyModel(grad_op=grad_128, coeff=coeff, reaction=None, forcing=zero_h)
        v = Field(grid_1d_128, rng.standard_normal(128))
        w_fld = Field(grid_1d_128, rng.standard_normal(128))
        base = weighted_form(model, 1.0, v, w_fld)
        for t in (1.0, 0.25, 1e-3):
            assert weighted_form(model, t, v, w_fld) == base

    def test_converges_to_gamma_inf_pairing(self, grid_1d_128, grad_128, power_coeff, zero_h):
        from fracvar import apply_gradient

        model = EnergyModel(grad_op=grad_128, coeff=power_coeff, reaction=None,
                            forcing=zero_h)
        v = field_from_function(grid_1d_128,
                                lambda x: 20.0 * np.exp(-40 * (x - 0.5) ** 2))
        gv = apply_gradient(grad_128, v).values
        limit = power_coeff.gamma_inf * grid_1d_128.weight * np.sum(gv**2)
        errs = [abs(weighted_form(model, 2.0**-k, v, v) - limit) / abs(limit)
                for k in range(13)]
        assert errs[-1] <= 0.01
        assert all(a >= b - 1e-15 for a, b in zip(errs[2:], errs[3:]))

    def test_orthogonalized_direction_vanishes(self, grid_1d_128, grad_128,
                                               power_coeff, zero_h, rng):
        from fracvar import apply_gradient

        model = EnergyModel(grad_op=grad_128, coeff=power_coeff, reaction=None,
                            forcing=zero_h)
        v = field_from_function(grid_1d_128,
                                lambda x: 20.0 * np.exp(-40 * (x - 0.5) ** 2))
        w_raw = Field(grid_1d_128, rng.standard_normal(128))
        gv = apply_gradient(grad_128, v).values
        gw = apply_gradient(grad_128, w_raw).values
        # orthogonalize against the constant-weight pairing numerically
        alpha = np.sum(gv * gw) / np.sum(gv * gv)
        w_fld = Field(grid_1d_128, w_raw.values - alpha * v.values)
        base = abs(weighted_form(model, 1.0, v, w_fld))
        tail = abs(weighted_form(model, 2.0**-12, v, w_fld))
        scale = power_coeff.gamma_inf * grid_1d_128.weight * np.sum(gv**2)
        assert tail <= 0.02 * scale
        assert tail <= base + 1e-12

    def test_rejects_nonpositive_scale(self, quasilinear_model, grid_1d_128):
        v = Field(grid_1d_128, np.ones(128))
        with pytest.raises(ValueError):
            weighted_form(quasilinear_model, 0.0, v, v)


class TestMonotonicityPairing:
    def test_against_zero_vector(self, power_coeff):
        z1 = np.array([1.0, 2.0])
        val = monotonicity_pairing(power_coeff, z1, np.zeros(2))
        mag2 = float(np.dot(z1, z1))
        assert val == pytest.approx(power_coeff.gamma(mag2 / 2.0) * mag2, rel=1e-12)
        assert val > 0.0

    def test_zero_at_equal(self, power_coeff, rng):
        z = rng.standard_normal(2)
        assert monotonicity_pairing(power_coeff, z, z) == 0.0

    def test_1000_random_pairs(self, power_coeff, rng):
        worst = np.inf
        worst_sep = np.inf
        for _ in range(1000):
            z1 = rng.standard_normal(2) * 10.0 ** rng.uniform(-2, 2)
            z2 = rng.standard_normal(2) * 10.0 ** rng.uniform(-2, 2)
            val = monotonicity_pairing(power_coeff, z1, z2)
            worst = min(worst, val)
            gap2 = float(np.sum((z1 - z2) ** 2))
            if gap2 >= 1e-6:
                worst_sep = min(worst_sep, val / gap2)
        assert worst >= -1e-12
        assert worst_sep >= 1e-12


def test_overflow_reported_not_clamped(quasilinear_model, grid_1d_128):
    huge = Field(grid_1d_128, np.full(128, 1e160))
    with pytest.raises(EnergyOverflowError):
        energy(quasilinear_model, huge)


def test_nonneg_forcing_enforced(grad_128, power_coeff, grid_1d_128):
    h = Field(grid_1d_128, -np.ones(128))
    with pytest.raises(ValueError, match="nonneg"):
        EnergyModel(grad_op=grad_128, coeff=power_coeff, reaction=None, forcing=h)
    model = EnergyModel(grad_op=grad_128, coeff=power_coeff, reaction=None,
                        forcing=h, require_nonneg_forcing=False)
    assert model.forcing is h
