import numpy as np
import pytest

from trigzero import atomic_measure, measure_from_density

MASTER_SEED = 20260810


@pytest.fixture(scope="session")
def measures():
    """The built-in scenario measures, one per density kind plus the atom."""
    return {
        "uniform": measure_from_density("uniform"),
        "box": measure_from_density("box", a=np.pi / 2),
        "annulus": measure_from_density("annulus", b=0.5, a=1.5),
        "poisson": measure_from_density("poisson", r=0.5),
        "constant_corr": measure_from_density("constant_corr", r=0.3),
        "raised_cosine_squared": measure_from_density("raised_cosine_squared"),
        "atomic": atomic_measure(np.sqrt(2.0)),
    }
