import functools
import time

import pytest
from hypothesis import settings

# derandomized so reruns see identical examples
settings.register_profile("repo", deadline=None, max_examples=40, derandomize=True, print_blob=True)
settings.load_profile("repo")

LATTICE_N, LATTICE_A, LATTICE_M = 4096, 0.05, 0.1
LATTICE_SECONDS = {}  # wall time of the uncached runs


@functools.lru_cache(maxsize=None)
def lattice_run(boundary: str):
    """Continuum-normalized ground covariances of the n = 4096 magic lattice (Lambda = 1)."""
    from cmera.lattice import LatticeModel, ground_covariance, purity_deviation

    t0 = time.perf_counter()
    model = LatticeModel.magic(LATTICE_N, LATTICE_A, 1.0, LATTICE_M, boundary)
    q, p = ground_covariance(model)
    purity = purity_deviation(q, p)
    LATTICE_SECONDS[boundary] = time.perf_counter() - t0
    return model, q / LATTICE_A, p / LATTICE_A, purity


@pytest.fixture(scope="session")
def lattice():
    return lattice_run
