import importlib.util
import json
import math
from pathlib import Path

import pytest

from planarpot.verify import CT_STRONG_DENSITY_REFERENCE

DERIVE = Path(__file__).with_name("oracles") / "derive.py"


def _derive():
    spec = importlib.util.spec_from_file_location("oracle_derive", DERIVE)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod.derive()


def test_frozen_oracles_are_reproducible(oracles):
    pytest.importorskip("mpmath")
    assert json.loads(json.dumps(_derive(), sort_keys=True)) == oracles


@pytest.mark.parametrize("n_max", ["16", "24"])
def test_strong_density_reference_matches_oracle(oracles, n_max):
    assert CT_STRONG_DENSITY_REFERENCE == oracles["ct_strong_density_reference"]["estimate"][n_max]


def test_disk_closed_forms(oracles):
    assert oracles["disk_kernel_at_05"] == pytest.approx(1 / (math.pi * 0.75 ** 2), rel=1e-14)
    assert oracles["disk_bergman_distance_0_09"] == pytest.approx(math.sqrt(2) * math.atanh(0.9), rel=1e-14)
    assert oracles["disk_green_w05_z_m05"] == pytest.approx(math.log(0.8), rel=1e-14)
    assert oracles["disk_metric_at_0"] == pytest.approx(math.sqrt(2), rel=1e-14)


def test_concentric_capacities(oracles):
    assert oracles["concentric_dirichlet_capacity"] == pytest.approx(2 * math.pi, rel=1e-14)
    assert oracles["concentric_green_capacity"] == pytest.approx(math.exp(-1), rel=1e-14)


def test_interval_capacity_bounds_are_ordered(oracles):
    for lo, hi in oracles["ct_origin_profile"]["log_cap_bounds"]:
        assert lo <= hi
