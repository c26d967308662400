import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fdopt.rng import SplitMix64


def random_symmetric(seed: int, d: int, scale: float = 1.0) -> np.ndarray:
    m = SplitMix64(seed).normal_matrix(d, d) * scale
    return 0.5 * (m + m.T)


def random_psd(seed: int, d: int, extra_rows: int = 2) -> np.ndarray:
    m = SplitMix64(seed).normal_matrix(d + extra_rows, d)
    return m.T @ m / (d + extra_rows)


@pytest.fixture
def criterion(capfd):
    """Context manager printing one pass/fail line per acceptance criterion."""
    from contextlib import contextmanager

    @contextmanager
    def _criterion(name):
        try:
            yield
        except BaseException:
            with capfd.disabled():
                print(f"[acceptance] {name}: FAIL", flush=True)
            raise
        else:
            with capfd.disabled():
                print(f"[acceptance] {name}: PASS", flush=True)

    return _criterion
