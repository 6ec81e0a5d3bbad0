"""Tests del CLI: subcomandos, artefactos y códigos de salida."""

import csv
import json

import pytest
import yaml


@pytest.fixture
def write_config(tmp_path):
    """Escribe un stagger.yaml sin archivo de log y devuelve su ruta."""

    def _write(**sections):
        config = {"runtime": {"log_dir": ""}}
        config.update(sections)
        path = tmp_path / "stagger.yaml"
        path.write_text(yaml.dump(config), encoding="utf-8")
        return path

    return _write


def _read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    comments = dict(line[2:].split("=", 1) for line in lines if line.startswith("# "))
    rows = list(csv.DictReader(line for line in lines if not line.startswith("#")))
    return comments, rows


class TestExperiments:
    def test_spectrum_csv(self, write_config, tmp_path):
        from stagger.main import run_cli

        out = tmp_path / "spectrum.csv"
        code = run_cli(["spectrum", "--config", str(write_config()), "--out", str(out), "--format", "csv"])
        assert code == 0
        comments, rows = _read_csv(out)
        assert comments["tool"] == "stagger"
        assert comments["experiment"] == "spectrum"
        assert len(comments["config_sha256"]) == 64
        assert len(rows) == 64
        assert float(rows[0]["energy"]) == pytest.approx(-2 * 3**0.5)

    def test_classify_json(self, write_config, tmp_path):
        from stagger.main import run_cli

        out = tmp_path / "classify.json"
        assert run_cli(["classify", "--config", str(write_config()), "--out", str(out), "--threads", "2"]) == 0
        document = json.loads(out.read_text(encoding="utf-8"))
        assert document["summary"]["n_classes"] == 2
        assert [c["equivalent_to"] for c in document["summary"]["classes"]] == ["scalar", "staggered"]
        assert document["config"]["runtime"]["threads"] == 2

    def test_verify_symmetry_scalar_constant_gauge(self, write_config, tmp_path):
        from stagger.main import run_cli

        config = write_config(model={"kind": "scalar"}, experiment={"symmetry": "Rz"})
        out = tmp_path / "verify.json"
        assert run_cli(["verify-symmetry", "--config", str(config), "--out", str(out)]) == 0
        summary = json.loads(out.read_text(encoding="utf-8"))["summary"]
        assert summary["equivalent"] is True
        assert summary["gauge"] == "constant"

    def test_verify_symmetry_susskind_tx_reports_onsite(self, write_config, tmp_path):
        from stagger.main import run_cli

        config = write_config(
            model={"kind": "staggered", "mass": "susskind", "mu": 0.5},
            experiment={"symmetry": "tx"},
        )
        out = tmp_path / "verify.json"
        assert run_cli(["verify-symmetry", "--config", str(config), "--out", str(out)]) == 0
        summary = json.loads(out.read_text(encoding="utf-8"))["summary"]
        assert summary["symmetry"] == "tx"
        assert summary["equivalent"] is False
        assert summary["gauge"] is None
        assert summary["onsite_witness"]["site"] == [0, 0, 0]
        assert summary["onsite_witness"]["onsite_a"] == [0.5, 0.0]
        assert summary["onsite_witness"]["onsite_b"] == [-0.5, 0.0]

    def test_spinor_check_with_susskind_mass(self, write_config, tmp_path):
        from stagger.main import run_cli

        config = write_config(
            model={"kind": "dirac-gauge", "mass": "susskind", "mu": 0.5},
            experiment={"samples": 3},
        )
        out = tmp_path / "spinor.json"
        assert run_cli(["spinor-check", "--config", str(config), "--out", str(out), "--seed", "7"]) == 0
        document = json.loads(out.read_text(encoding="utf-8"))
        assert document["summary"]["sectors"] == 8
        assert document["summary"]["max_residual"] < 1e-10
        assert len(document["rows"]) == 3

    def test_gauge_fix_reports_global_phase(self, write_config, tmp_path):
        from stagger.main import run_cli

        out = tmp_path / "fix.json"
        assert run_cli(["gauge-fix", "--config", str(write_config()), "--out", str(out)]) == 0
        summary = json.loads(out.read_text(encoding="utf-8"))["summary"]
        assert summary["stabilizer"]["description"] == "global phase"
        assert summary["onsite"]["symmetric"] is True

    def test_parity_fails_with_alternating_mass(self, write_config, tmp_path):
        from stagger.main import run_cli

        config = write_config(model={"kind": "dirac-gauge", "mass": "alternating", "mu": 0.3})
        assert run_cli(["parity", "--config", str(config), "--out", str(tmp_path / "p.json")]) == 3


class TestExitCodes:
    def test_unknown_key_is_config_error(self, write_config, tmp_path):
        from stagger.main import run_cli

        config = write_config(lattice={"dims": [4, 4, 4], "spacing": 1.0})
        assert run_cli(["spectrum", "--config", str(config), "--out", str(tmp_path / "x.json")]) == 1

    def test_odd_dims_is_precondition_error(self, write_config, tmp_path):
        from stagger.main import run_cli

        config = write_config(lattice={"dims": [5, 5, 5]})
        out = tmp_path / "x.json"
        assert run_cli(["spectrum", "--config", str(config), "--out", str(out)]) == 2
        assert not out.exists()

    def test_unknown_subcommand(self):
        from stagger.main import run_cli

        with pytest.raises(SystemExit):
            run_cli(["plot"])


class TestReproducibility:
    def test_rerun_is_byte_identical(self, write_config, tmp_path):
        from stagger.main import run_cli

        config = write_config(model={"kind": "staggered", "mass": "susskind", "mu": 0.5})
        out = tmp_path / "bands.csv"
        args = ["bands", "--config", str(config), "--out", str(out), "--format", "csv"]
        assert run_cli(args) == 0
        first = out.read_bytes()
        assert run_cli(args) == 0
        assert out.read_bytes() == first

    def test_hash_matches_config(self, write_config, tmp_path):
        from stagger.config import config_from_dict
        from stagger.main import run_cli

        out = tmp_path / "spectrum.json"
        assert run_cli(["spectrum", "--config", str(write_config()), "--out", str(out)]) == 0
        document = json.loads(out.read_text(encoding="utf-8"))
        assert document["config_sha256"] == config_from_dict(document["config"]).config_hash()
        assert document["version"]
