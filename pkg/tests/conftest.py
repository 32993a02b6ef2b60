import os
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "scripts" / "smx"))
os.environ.setdefault("SMX_NO_COLOR", "1")

from core.mdp import chain_mdp, random_mdp  # noqa: E402


@pytest.fixture
def chain3():
    return chain_mdp(3, 0.0, 0.9)


@pytest.fixture
def small_random_mdp():
    return random_mdp(8, 3, 2, seed=7, gamma=0.9, r_max=1.0)


@pytest.fixture
def chain_file():
    return ROOT / "experiment_configs" / "mdp" / "chain_5.yaml"
