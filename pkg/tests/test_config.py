"""Tests de configuración."""

import json

import pytest
import yaml


@pytest.fixture
def sample_yaml(tmp_path):
    """Crea un stagger.yaml temporal para testing."""
    config = {
        "lattice": {"dims": [4, 6, 8]},
        "model": {"kind": "staggered", "mass": "susskind", "mu": 0.5},
        "experiment": {"name": "evolve", "t": 2.5, "method": "chebyshev", "k0": [0.1, 0, 0]},
        "output": {"path": "out.csv", "format": "csv"},
        "runtime": {"threads": 2, "log_level": "debug", "log_dir": ""},
    }
    path = tmp_path / "stagger.yaml"
    path.write_text(yaml.dump(config), encoding="utf-8")
    return path


class TestConfigLoad:
    def test_load_valid_config(self, sample_yaml):
        from stagger.config import load_config

        cfg = load_config(sample_yaml)
        assert cfg.lattice.dims == [4, 6, 8]
        assert cfg.model.mass == "susskind"
        assert cfg.model.mu == 0.5
        assert cfg.experiment.method == "chebyshev"
        assert cfg.experiment.k0 == [0.1, 0.0, 0.0]
        assert cfg.output.format == "csv"
        assert cfg.runtime.threads == 2
        assert cfg.runtime.log_level == "DEBUG"

    def test_load_missing_config_uses_defaults(self, tmp_path):
        from stagger.config import load_config

        cfg = load_config(tmp_path / "nonexistent.yaml")
        assert cfg.lattice.dims == [4, 4, 4]
        assert cfg.model.kind == "staggered"
        assert cfg.experiment.generators == ["tx", "ty", "tz", "Rx", "Rz"]

    def test_load_partial_config(self, tmp_path):
        """Config parcial debe rellenar con defaults."""
        path = tmp_path / "partial.yaml"
        path.write_text("model:\n  kind: scalar", encoding="utf-8")

        from stagger.config import load_config

        cfg = load_config(path)
        assert cfg.model.kind == "scalar"
        assert cfg.experiment.name == "spectrum"
        assert cfg.output.resolve("spectrum").as_posix() == "results/spectrum.json"

    def test_json_is_accepted(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"lattice": {"dims": [6, 6, 6]}}), encoding="utf-8")

        from stagger.config import load_config

        assert load_config(path).lattice.dims == [6, 6, 6]

    def test_malformed_yaml(self, tmp_path):
        from stagger.config import load_config
        from stagger.errors import ConfigError

        path = tmp_path / "broken.yaml"
        path.write_text("lattice: [4, 4\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(path)


class TestConfigValidation:
    def test_unknown_section_rejected(self):
        from stagger.config import config_from_dict
        from stagger.errors import ConfigError

        with pytest.raises(ConfigError, match="discord"):
            config_from_dict({"discord": {"enabled": True}})

    def test_unknown_key_rejected(self):
        from stagger.config import config_from_dict
        from stagger.errors import ConfigError

        with pytest.raises(ConfigError, match="spacing"):
            config_from_dict({"lattice": {"dims": [4, 4, 4], "spacing": 0.5}})

    @pytest.mark.parametrize(
        "raw",
        [
            {"model": {"kind": "wilson"}},
            {"model": {"mass": "dynamic"}},
            {"experiment": {"method": "rk4"}},
            {"experiment": {"symmetry": "Ry"}},
            {"experiment": {"sectors": 2}},
            {"output": {"format": "parquet"}},
            {"runtime": {"threads": 0}},
            {"lattice": {"dims": [4, 4]}},
        ],
    )
    def test_invalid_values(self, raw):
        from stagger.config import config_from_dict
        from stagger.errors import ConfigError

        with pytest.raises(ConfigError):
            config_from_dict(raw)

    def test_config_error_exit_code(self):
        from stagger.errors import ConfigError

        assert ConfigError("x").exit_code == 1


class TestConfigHash:
    def test_hash_is_stable(self):
        from stagger.config import RunConfig, config_from_dict

        assert RunConfig().config_hash() == config_from_dict({}).config_hash()
        assert len(RunConfig().config_hash()) == 64

    def test_hash_tracks_changes(self):
        from stagger.config import config_from_dict

        a = config_from_dict({"model": {"mu": 0.5}})
        b = config_from_dict({"model": {"mu": 0.25}})
        assert a.config_hash() != b.config_hash()

    def test_roundtrip_through_dict(self, sample_yaml):
        from stagger.config import config_from_dict, load_config

        cfg = load_config(sample_yaml)
        assert config_from_dict(cfg.to_dict()) == cfg
