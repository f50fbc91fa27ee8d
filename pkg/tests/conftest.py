from pathlib import Path

import pytest

from ctxdiag import evaluate as ev
from ctxdiag import signals

DATA_DIR = Path(__file__).parent / "data"

PINNED_SEED = 7
SEVERITY_CUT = 0.35


@pytest.fixture(scope="session")
def stock_config():
    return signals.default_config(seed=PINNED_SEED)


@pytest.fixture(scope="session")
def stock_dataset(stock_config):
    return signals.generate_dataset(stock_config)


@pytest.fixture(scope="session")
def grid_results(stock_dataset):
    """The full 7 x 3 x 2 factorial grid on the pinned dataset."""
    results, skipped = ev.factorial_experiment(stock_dataset, ev.GridSpec())
    assert not skipped
    return results


@pytest.fixture(scope="session")
def reference_matrices():
    return {
        name: ev.load_matrix(DATA_DIR / f"{name}.csv")
        for name in ("knn_full", "mlr_full", "knn_severe", "mlr_severe")
    }
