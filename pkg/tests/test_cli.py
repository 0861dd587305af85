import numpy as np
import pytest
from click.testing import CliRunner

from conftest import (
    HELIX_PHI_PSI,
    PP2_PHI_PSI,
    build_backbone,
    format_pdb,
    residues_to_structure,
    rotation_about,
    transform_residues,
)
from loopgraft.cli import main
from loopgraft.structure import parse_pdb


def synthetic(pdb_id, twist=0.0):
    coil = [PP2_PHI_PSI, (-80.0, 80.0), (60.0, 40.0), PP2_PHI_PSI,
            (-70.0, 150.0), (55.0, 45.0)]
    torsions = ([HELIX_PHI_PSI] * 9 + coil + [HELIX_PHI_PSI] * 9
                + coil + [HELIX_PHI_PSI] * 9)
    residues = build_backbone(torsions)
    if twist:
        residues = transform_residues(
            residues, rotation_about(np.array([0.0, 0.0, 1.0]), twist),
            np.zeros(3))
    return residues_to_structure(residues, pdb_id=pdb_id)


@pytest.fixture
def cache(tmp_path, monkeypatch):
    """Pre-seeded structure cache: the CLI resolves entries from it without
    touching the network."""
    monkeypatch.setenv("LOOPGRAFT_CACHE_DIR", str(tmp_path))
    for pdb_id in ("9aaa", "9bbb"):
        (tmp_path / f"{pdb_id}.pdb").write_text(format_pdb(synthetic(pdb_id)))
    return tmp_path


@pytest.fixture
def runner():
    return CliRunner()


class TestCli:
    def test_fetch_uses_cache(self, runner, cache):
        result = runner.invoke(main, ["fetch", "9AAA"])
        assert result.exit_code == 0, result.output
        assert "1 chains" in result.output

    def test_geometry_table(self, runner, cache):
        result = runner.invoke(main, ["geometry", "9aaa:A"])
        assert result.exit_code == 0, result.output
        assert "D (A)" in result.output
        assert "9AAA_A_" in result.output

    def test_flex_profiles_and_correlation(self, runner, cache):
        result = runner.invoke(main, ["flex", "9aaa:A", "--methods", "GNM,ANM"])
        assert result.exit_code == 0, result.output
        assert "GNM vs ANM: r=" in result.output

    def test_xcorr_table(self, runner, cache):
        result = runner.invoke(main, ["xcorr", "9aaa:A"])
        assert result.exit_code == 0, result.output
        assert "ss->coil" in result.output

    def test_run_requires_auto(self, runner, cache):
        result = runner.invoke(main, ["run", "--scaffold", "9aaa:A",
                                      "--insert", "9bbb:A"])
        assert result.exit_code == 0
        assert "--auto" in result.output

    def test_run_auto_end_to_end(self, runner, cache, tmp_path):
        out = tmp_path / "best.pdb"
        result = runner.invoke(main, [
            "run", "--scaffold", "9aaa:A", "--insert", "9bbb:A",
            "--auto", "--window", "1", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "paired" in result.output
        assert "composite=" in result.output
        assert out.is_file()
        parsed = parse_pdb(out.read_text())
        assert parsed.chains[0].residues

    def test_bad_target_format(self, runner, cache):
        result = runner.invoke(main, ["geometry", "9aaa"])
        assert result.exit_code != 0
