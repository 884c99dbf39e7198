"""Shared fixtures: assembled operators are expensive enough to cache per session."""

import numpy as np
import pytest

from fracvar import (DomainSpec, QuadratureParams, assemble_gradient,
                     assemble_laplacian, build_grid, first_eigenpair,
                     make_coefficient)
from fracvar.fracops import composition_matrix


@pytest.fixture(scope="session")
def grid_1d_128():
    return build_grid(DomainSpec(bounds=((0.0, 1.0),), nodes=(128,)))


@pytest.fixture(scope="session")
def grad_128(grid_1d_128):
    return assemble_gradient(grid_1d_128, 0.5)


@pytest.fixture(scope="session")
def lap_128(grid_1d_128):
    return assemble_laplacian(grid_1d_128, 0.5)


@pytest.fixture(scope="session")
def eig_128(lap_128):
    return first_eigenpair(lap_128)


@pytest.fixture(scope="session")
def comp_matrix_128(grad_128):
    return composition_matrix(grad_128)


@pytest.fixture(scope="session")
def power_coeff():
    return make_coefficient("power", {"A": 1.0, "B": 2.0, "p": 1.5})


@pytest.fixture(scope="session")
def grid_2d_16():
    return build_grid(DomainSpec(bounds=((0.0, 1.0), (0.0, 1.0)), nodes=(16, 16)))


@pytest.fixture(scope="session")
def grad_2d_16(grid_2d_16):
    return assemble_gradient(grid_2d_16, 0.5)


@pytest.fixture(scope="session")
def lap_2d_16(grid_2d_16):
    return assemble_laplacian(grid_2d_16, 0.5)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
