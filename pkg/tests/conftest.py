import numpy as np
import pytest

import spincomb as sc


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture(scope="session")
def cycle_064_040():
    """Z2-symmetric cycle at (0.64, 0.40), found on the submanifold."""
    params = sc.ModelParams.two_ensemble(0.64, 0.40)
    cyc = sc.find_limit_cycle(params, np.array([0.3, -0.2, 0.6]))
    assert cyc is not None
    return params, cyc


@pytest.fixture(scope="session")
def cycle_15_05():
    """Z2-symmetric cycle at (1.5, 0.5), found in the full space."""
    params = sc.ModelParams.two_ensemble(1.5, 0.5)
    cyc = sc.find_limit_cycle(params, options=sc.CycleOptions(seed=1))
    assert cyc is not None
    return params, cyc
