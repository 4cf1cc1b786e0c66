import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20250809)


def pytest_configure(config):
    # compile the simulation kernels once so timings in later tests are clean
    config.stash["kernel_warm"] = False


@pytest.fixture(scope="session")
def warm_kernels():
    from resetfpt import BrownianDrift, Interval, ResetSpec, SimConfig, simulate_exit

    cfg = SimConfig(n_paths=64, dt=1e-3, seed=1)
    simulate_exit(BrownianDrift(0.0), 0.5, ResetSpec(1.0, 0.5), Interval(0.0, 1.0), cfg)
    return True
