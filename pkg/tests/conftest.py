import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from privdesign import DatabasePrior, DecisionProblem, StatePrior  # noqa: E402

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "privdesign" / "fixtures"

# Values from the independent brute-force search in oracles.brute_force_design.
STEEP_OPTIMUM = 1.282297555528317
STEEP_WEIGHTS = (0.3663126732671493, 0.267374653465702, 0.366312673267149)
USHAPE_OPTIMUM = 1.417293587031678
USHAPE_WEIGHTS = (0.42298047378999853, 0.5770195262100021)
USHAPE_GEOMETRIC = 1.2024666152347963


@pytest.fixture
def uniform2():
    return StatePrior.uniform(2)


@pytest.fixture
def steep_bet():
    # rows: risky action, safe action
    return DecisionProblem.from_rows([[3.0, 0.0, -2.5], [1.0, 1.0, 1.0]])


@pytest.fixture
def u_shaped_bet():
    return DecisionProblem.from_rows([[2.5, -2.5, 2.5], [1.0, 1.0, 1.0]])


@pytest.fixture
def two_respondent_prior():
    return DatabasePrior(2, np.array([1 / 3, 1 / 6, 1 / 6, 1 / 3]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
