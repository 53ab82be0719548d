"""Golden-file regression: pinned CSV artifacts must reproduce byte-for-byte.

Regenerate after an intentional model change with:

    python -m matterhorn.cli scenario --format csv --out tests/fixtures/scenario_table.csv
    python -m matterhorn.cli energy --mode <mode> --format csv \\
        --out tests/fixtures/block_energy_<mode>.csv
"""

from pathlib import Path

import pytest

from matterhorn.cli import dispatch

FIXTURES = Path(__file__).parent / "fixtures"


def generated(argv, tmp_path):
    out = tmp_path / "artifact.csv"
    assert dispatch(argv + ["--out", str(out)]) == 0
    return out.read_bytes()


def test_scenario_table_golden(tmp_path):
    want = (FIXTURES / "scenario_table.csv").read_bytes()
    assert generated(["scenario", "--format", "csv"], tmp_path) == want


@pytest.mark.parametrize("mode", ["baseline", "mttfs", "deadzone", "msu"])
def test_block_energy_golden(mode, tmp_path):
    want = (FIXTURES / f"block_energy_{mode}.csv").read_bytes()
    assert generated(["energy", "--mode", mode, "--format", "csv"], tmp_path) == want
