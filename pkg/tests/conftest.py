import time

import numpy as np
import pytest


@pytest.fixture(scope="session", autouse=True)
def _session_timer():
    t0 = time.time()
    yield
    print(f"\n[suite wall time: {time.time() - t0:.1f} s]")


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
