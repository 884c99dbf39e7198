import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from fracvar import (DomainSpec, Field, QuadratureParams, VectorField,
                     apply_divergence, apply_gradient, apply_laplacian,
                     assemble_gradient, assemble_laplacian, build_grid,
                     composition_residual, field_from_function, l2_inner,
                     load_operator, normalizing_constants, save_operator)
from fracvar.fracops import composition_matrix


def gaussian_bump(grid, sharp=40.0):
    center = np.array([0.5 * (a + b) for a, b in grid.spec.bounds])
    r2 = np.sum((grid.nodes - center) ** 2, axis=1)
    return Field(grid, np.exp(-sharp * r2))


class TestNormalizingConstants:
    def test_laplacian_constant_half(self):
        # gamma-function oracle: C_{d,s} = 4^s Gamma(d/2+s) / (pi^{d/2} |Gamma(-s)|)
        _, c = normalizing_constants(1, 0.5)
        oracle = 4**0.5 * gamma_fn(1.0) / (np.pi**0.5 * abs(gamma_fn(-0.5)))
        assert c == pytest.approx(oracle, rel=1e-13)
        assert c == pytest.approx(1.0 / np.pi, rel=1e-13)

    @pytest.mark.parametrize("s", [0.1, 0.5, 0.9])
    @pytest.mark.parametrize("d", [1, 2])
    def test_constants_positive_finite(self, d, s):
        mu, c = normalizing_constants(d, s)
        assert 0.0 < mu < np.inf
        assert 0.0 < c < np.inf

    def test_rejects_bad_order(self):
        with pytest.raises(ValueError):
            normalizing_constants(1, 1.0)
        with pytest.raises(ValueError):
            normalizing_constants(1, 0.0)

    def test_classical_limit_on_smooth_bump(self):
        # as s -> 1- the constant stays finite and the operator approaches -u''
        grid = build_grid(DomainSpec(bounds=((0.0, 1.0),), nodes=(512,)))
        beta = 40.0
        u = field_from_function(grid, lambda x: np.exp(-beta * (x - 0.5) ** 2))
        x = grid.nodes[:, 0]
        upp = (4 * beta**2 * (x - 0.5) ** 2 - 2 * beta) * np.exp(-beta * (x - 0.5) ** 2)
        mid = (x > 0.25) & (x < 0.75)
        errs = {}
        for s in (0.95, 0.99):
            assert np.isfinite(normalizing_constants(1, s)[1])
            lap = assemble_laplacian(grid, s).table @ u.values
            errs[s] = np.linalg.norm(lap[mid] + upp[mid]) / np.linalg.norm(upp[mid])
        assert errs[0.99] < 0.10
        assert errs[0.99] < errs[0.95]


class TestGradient:
    def test_zero_field(self, grid_1d_128, grad_128):
        z = Field(grid_1d_128, np.zeros(128))
        assert np.all(apply_gradient(grad_128, z).values == 0.0)

    def test_linearity_exact(self, grid_1d_128, grad_128, rng):
        u1 = Field(grid_1d_128, rng.standard_normal(128))
        u2 = Field(grid_1d_128, rng.standard_normal(128))
        alpha = 1.7
        comb = Field(grid_1d_128, u1.values + alpha * u2.values)
        lhs = apply_gradient(grad_128, comb).values
        rhs = apply_gradient(grad_128, u1).values + alpha * apply_gradient(grad_128, u2).values
        assert np.allclose(lhs, rhs, rtol=0.0, atol=1e-12 * np.max(np.abs(rhs)))

    def test_even_bump_center_cancellation(self):
        # odd-kernel weights cancel exactly at the symmetry node; what is
        # left is the documented even stabilization stencil
        grid = build_grid(DomainSpec(bounds=((0.0, 1.0),), nodes=(65,)))
        params = QuadratureParams()
        op = assemble_gradient(grid, 0.5, params)
        u = gaussian_bump(grid)
        c = 32  # center node of 65
        got = apply_gradient(op, u).values[c, 0]
        delta = params.nyquist_stabilization * (np.pi / grid.spacing[0]) ** 0.5
        even_part = delta * (2 * u.values[c] - u.values[c - 1] - u.values[c + 1])
        assert abs(got - even_part) <= 1e-10

    def test_fourier_multiplier_oracle(self):
        # independent spectral definition: symbol i xi |xi|^{s-1} on a large
        # periodic box, sampled on the middle half of the domain
        s, n, box, modes = 0.5, 256, 16.0, 2**14
        grid = build_grid(DomainSpec(bounds=((0.0, 1.0),), nodes=(n,)))
        bump = lambda x: np.exp(-40.0 * (x - 0.5) ** 2)
        u = field_from_function(grid, bump)
        gu = apply_gradient(assemble_gradient(grid, s), u).values[:, 0]
        hh = box / modes
        xg = np.arange(modes) * hh
        vals = np.where((xg > 0) & (xg < 1), bump(xg), 0.0)
        xi = 2.0 * np.pi * np.fft.fftfreq(modes, d=hh)
        sym = 1j * xi * np.where(np.abs(xi) == 0, 1.0, np.abs(xi)) ** (s - 1.0)
        sym[0] = 0.0
        oracle = np.fft.ifft(sym * np.fft.fft(vals)).real
        idx = np.rint(grid.nodes[:, 0] / hh).astype(int)
        assert np.allclose(idx * hh, grid.nodes[:, 0], atol=1e-12)
        x = grid.nodes[:, 0]
        mid = (x > 0.25) & (x < 0.75)
        rel = np.linalg.norm(gu[mid] - oracle[idx][mid]) / np.linalg.norm(oracle[idx][mid])
        assert rel <= 0.03

    def test_kind_and_grid_mismatch(self, grid_1d_128, grad_128, lap_128):
        u = Field(grid_1d_128, np.ones(128))
        with pytest.raises(ValueError, match="kind"):
            apply_gradient(lap_128, u)
        other = build_grid(DomainSpec(bounds=((0.0, 2.0),), nodes=(128,)))
        with pytest.raises(ValueError, match="grid"):
            apply_gradient(grad_128, Field(other, np.ones(128)))


class TestDivergence:
    def test_zero(self, grid_1d_128, grad_128):
        phi = VectorField(grid_1d_128, np.zeros((128, 1)))
        assert np.all(apply_divergence(grad_128, phi).values == 0.0)

    def test_adjointness_20_pairs(self, grid_1d_128, grad_128, rng):
        for _ in range(20):
            u = Field(grid_1d_128, rng.standard_normal(128))
            phi = VectorField(grid_1d_128, rng.standard_normal((128, 1)))
            lhs = l2_inner(u, apply_divergence(grad_128, phi))
            rhs = -grid_1d_128.weight * np.sum(
                phi.values * apply_gradient(grad_128, u).values)
            assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(rhs))

    def test_adjointness_2d(self, grid_2d_16, grad_2d_16, rng):
        n = grid_2d_16.n_nodes
        for _ in range(5):
            u = Field(grid_2d_16, rng.standard_normal(n))
            phi = VectorField(grid_2d_16, rng.standard_normal((n, 2)))
            lhs = l2_inner(u, apply_divergence(grad_2d_16, phi))
            rhs = -grid_2d_16.weight * np.sum(
                phi.values * apply_gradient(grad_2d_16, u).values)
            assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(rhs))


class TestLaplacian:
    def test_zero(self, grid_1d_128, lap_128):
        z = Field(grid_1d_128, np.zeros(128))
        assert np.all(apply_laplacian(lap_128, z).values == 0.0)

    def test_symmetric_positive_definite_n64(self):
        grid = build_grid(DomainSpec(bounds=((0.0, 1.0),), nodes=(64,)))
        a = assemble_laplacian(grid, 0.5).table
        assert np.max(np.abs(a - a.T)) <= 1e-12
        evals = np.linalg.eigvalsh(a)  # dense symmetric eigensolve oracle
        assert evals[0] > 0.0

    def test_rayleigh_lower_bound(self, rng):
        grid = build_grid(DomainSpec(bounds=((0.0, 1.0),), nodes=(64,)))
        a = assemble_laplacian(grid, 0.5).table
        evals, vecs = np.linalg.eigh(a)
        lam, phi = evals[0], vecs[:, 0]
        w = grid.weight
        for _ in range(10):
            u = rng.standard_normal(64)
            quad = w * np.dot(u, a @ u)
            assert quad >= lam * w * np.dot(u, u) - 1e-10
        quad_phi = w * np.dot(phi, a @ phi)
        assert quad_phi == pytest.approx(lam * w * np.dot(phi, phi), rel=1e-12)


class TestComposition:
    def test_zero(self, grad_128, lap_128, grid_1d_128):
        z = Field(grid_1d_128, np.zeros(128))
        assert composition_residual(grad_128, lap_128, z) == 0.0

    @pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
    def test_residual_small_and_decreasing(self, s):
        residuals = []
        for n in (64, 128, 256):
            grid = build_grid(DomainSpec(bounds=((-1.0, 1.0),), nodes=(n,)))
            u = field_from_function(grid, lambda x: np.exp(-640.0 * x**2))
            grad_op = assemble_gradient(grid, s)
            lap_op = assemble_laplacian(grid, s)
            residuals.append(composition_residual(grad_op, lap_op, u))
        assert residuals[-1] <= 0.05
        assert residuals[0] > residuals[1] > residuals[2]

    def test_order_mismatch_rejected(self, grid_1d_128, grad_128):
        lap_other = assemble_laplacian(grid_1d_128, 0.3)
        u = Field(grid_1d_128, np.ones(128))
        with pytest.raises(ValueError, match="orders"):
            composition_residual(grad_128, lap_other, u)

    def test_composition_matrix_symmetric_psd(self, comp_matrix_128):
        m = comp_matrix_128
        assert np.max(np.abs(m - m.T)) <= 1e-10
        assert np.linalg.eigvalsh(m)[0] > 0.0


class TestQuadratureParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            QuadratureParams(rho0=0.0)
        with pytest.raises(ValueError):
            QuadratureParams(rho0=0.7)
        with pytest.raises(ValueError):
            QuadratureParams(rho_tail=-1.0)
        with pytest.raises(ValueError):
            QuadratureParams(n_theta=8)

    def test_tail_must_clear_domain(self, grid_1d_128):
        params = QuadratureParams(rho_tail=0.5)
        with pytest.raises(ValueError, match="diameter"):
            assemble_gradient(grid_1d_128, 0.5, params)

    def test_tail_correction_flag_changes_weights(self, grid_1d_128):
        on = assemble_laplacian(grid_1d_128, 0.5, QuadratureParams(tail_correction=True))
        off = assemble_laplacian(grid_1d_128, 0.5, QuadratureParams(tail_correction=False))
        d_on = np.diag(on.table)
        d_off = np.diag(off.table)
        assert np.all(d_on >= d_off)
        assert np.any(d_on > d_off)


class TestOperatorDump:
    def test_round_trip_gradient(self, tmp_path, grid_2d_16, grad_2d_16):
        path = tmp_path / "grad.fvop"
        save_operator(grad_2d_16, path)
        d, s, n, table = load_operator(path, "gradient")
        assert (d, s, n) == (2, 0.5, grid_2d_16.n_nodes)
        assert np.array_equal(table, grad_2d_16.table)

    def test_round_trip_laplacian(self, tmp_path, grid_1d_128, lap_128):
        path = tmp_path / "lap.fvop"
        save_operator(lap_128, path)
        d, s, n, table = load_operator(path, "laplacian")
        assert (d, s, n) == (1, 0.5, 128)
        assert np.array_equal(table, lap_128.table)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.fvop"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(ValueError, match="magic"):
            load_operator(path, "laplacian")
