import csv

import numpy as np
import pytest

from fracvar import (DomainSpec, Field, assemble_laplacian, build_grid,
                     first_eigenpair, rayleigh_quotient)
from fracvar.spectral import eigenpair_to_csv


@pytest.fixture(scope="module")
def lap_sym():
    grid = build_grid(DomainSpec(bounds=((-1.0, 1.0),), nodes=(256,)))
    return assemble_laplacian(grid, 0.5)


@pytest.fixture(scope="module")
def pair_sym(lap_sym):
    return first_eigenpair(lap_sym)


def test_matches_dense_eigensolve(lap_sym, pair_sym):
    oracle = np.linalg.eigvalsh(lap_sym.table)[0]
    assert abs(pair_sym.value - oracle) <= 1e-8
    # cross-check of the oracle against published numerics for the
    # restricted fractional Laplacian on (-1,1) at order 1/2 (~1.157774)
    assert oracle == pytest.approx(1.157774, rel=0.02)


def test_residual_within_tolerance(pair_sym):
    assert pair_sym.residual <= 1e-10


def test_classical_dirichlet_limit():
    grid = build_grid(DomainSpec(bounds=((0.0, 1.0),), nodes=(512,)))
    lap = assemble_laplacian(grid, 0.99)
    pair = first_eigenpair(lap)
    assert pair.value == pytest.approx(np.pi**2, rel=0.05)


def test_eigenfunction_normalized_nonnegative(pair_sym, lap_sym):
    grid = lap_sym.grid
    l2 = np.sqrt(grid.weight * np.dot(pair_sym.function.values, pair_sym.function.values))
    assert l2 == pytest.approx(1.0, rel=1e-12)
    assert np.min(pair_sym.function.values) >= 0.0


def test_rayleigh_of_eigenfunction(lap_sym, pair_sym):
    q = rayleigh_quotient(lap_sym, pair_sym.function)
    assert abs(q - pair_sym.value) <= 1e-10


def test_rayleigh_lower_bound_50_random(lap_sym, pair_sym, rng):
    for _ in range(50):
        u = Field(lap_sym.grid, rng.standard_normal(lap_sym.grid.n_nodes))
        assert rayleigh_quotient(lap_sym, u) >= pair_sym.value - 1e-8


def test_mixed_mode_between_first_two(lap_sym, pair_sym):
    evals, vecs = np.linalg.eigh(lap_sym.table)
    lam2 = evals[1]
    mixed = Field(lap_sym.grid, pair_sym.function.values + 0.1 * vecs[:, 1])
    q = rayleigh_quotient(lap_sym, mixed)
    assert pair_sym.value < q < lam2


def test_domain_monotonicity():
    lam = {}
    for length in (1.0, 2.0):
        grid = build_grid(DomainSpec(bounds=((0.0, length),), nodes=(128,)))
        lam[length] = first_eigenpair(assemble_laplacian(grid, 0.5)).value
    assert lam[1.0] > lam[2.0]


def test_rejects_zero_field(lap_sym):
    with pytest.raises(ValueError):
        rayleigh_quotient(lap_sym, Field(lap_sym.grid, np.zeros(lap_sym.grid.n_nodes)))


def test_rejects_wrong_kind(grad_128, eig_128):
    with pytest.raises(ValueError):
        first_eigenpair(grad_128)
    with pytest.raises(ValueError):
        rayleigh_quotient(grad_128, eig_128.function)


def test_iteration_cap_raises(lap_sym):
    with pytest.raises(RuntimeError, match="did not reach"):
        first_eigenpair(lap_sym, tol=1e-10, max_iter=1)


def test_csv_export(tmp_path, pair_sym):
    path = tmp_path / "pair.csv"
    eigenpair_to_csv(pair_sym, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "phi1"]
    assert len(rows) == 1 + pair_sym.function.grid.n_nodes
    assert float(rows[1][1]) == pair_sym.function.values[0]
