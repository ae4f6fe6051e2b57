import json
from pathlib import Path

import numpy as np
import pytest

from biqlat.binary_codes import LdpcCode, make_nested_pair, peg_construct
from biqlat.ideals_crt import build_crt_context
from biqlat.number_field import build_field
from biqlat.pi_a_lattice import NestedPiAConfig
from biqlat.presets import build_sweep_setup

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURE_DIR = REPO_ROOT / "fixtures"

# master seed frozen for the finite-length acceptance experiment
ACCEPTANCE_SEED = 2


@pytest.fixture(scope="session")
def field():
    return build_field(17, 33)


@pytest.fixture(scope="session")
def ctx(field):
    return build_crt_context(field, 2)


@pytest.fixture(scope="session")
def uncoded_cfg(field, ctx):
    """n = 1, rate-1 levels: the bare 16-point constellation."""
    rate1 = LdpcCode.from_parity_checks(np.zeros((0, 1), dtype=np.uint8))
    levels = tuple(make_nested_pair(rate1, 0, seed=j) for j in range(4))
    return NestedPiAConfig(field=field, ctx=ctx, levels=levels, n=1, gamma=1.0)


@pytest.fixture(scope="session")
def small_cfg(field, ctx):
    """n = 12 coded config used by the algebraic property tests."""
    codes = [peg_construct(12, 3, 6, seed=40 + j) for j in range(4)]
    levels = tuple(make_nested_pair(c, min(2, c.k), seed=70 + j)
                   for j, c in enumerate(codes))
    return NestedPiAConfig(field=field, ctx=ctx, levels=levels, n=12, gamma=1.0)


@pytest.fixture(scope="session")
def sweep_setup():
    """Full-scale experiment configuration shared by the long-running tests."""
    return build_sweep_setup(n=800, seed=ACCEPTANCE_SEED)


@pytest.fixture(scope="session")
def committed_fixture():
    path = FIXTURE_DIR / "biquadratic_17_33.json"
    if not path.exists():
        pytest.skip("committed fixture bundle missing")
    return json.loads(path.read_text())
