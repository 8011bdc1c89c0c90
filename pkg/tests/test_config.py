from __future__ import annotations

import json

import pytest

from repopipe.config import (
    ConfigError,
    config_from_dict,
    config_hash,
    config_to_dict,
    default_config,
    load_config,
    validate_config,
)


class TestRoundTrip:
    def test_default_round_trips_through_dict(self):
        cfg = default_config()
        again = config_from_dict(config_to_dict(cfg))
        assert config_to_dict(again) == config_to_dict(cfg)

    def test_load_from_file(self, tmp_path):
        inputs = tmp_path / "corpus"
        inputs.mkdir()
        path = tmp_path / "cfg.json"
        path.write_text(
            json.dumps(
                {
                    "inputs": [str(inputs)],
                    "output_dir": str(tmp_path / "out"),
                    "seed": 3,
                    "dedup": {"threshold": 0.9},
                }
            )
        )
        cfg = load_config(str(path))
        assert cfg.seed == 3
        assert cfg.dedup.threshold == 0.9
        assert cfg.dedup.num_perm == 128  # untouched defaults survive

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"inputs": [], "no_such_option": 1})

    def test_unknown_section_key_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"dedup": {"nope": 1}})

    def test_bad_json_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(str(path))


class TestValidation:
    def test_all_violations_reported_at_once(self, tmp_path):
        cfg = default_config()
        cfg.inputs = [str(tmp_path / "missing")]
        cfg.workers = 0
        cfg.dedup.threshold = 1.5
        cfg.dedup.bands = 10  # 10*8 != 128
        cfg.build.fim_rate = -0.1
        cfg.build.entry_len = 1
        violations = validate_config(cfg)
        text = "\n".join(violations)
        assert len(violations) >= 6
        assert "missing" in text
        assert "workers" in text
        assert "threshold" in text
        assert "bands" in text
        assert "fim_rate" in text
        assert "entry_len" in text

    def test_valid_default_with_real_input(self, tmp_path):
        corpus = tmp_path / "corpus"
        corpus.mkdir()
        cfg = default_config()
        cfg.inputs = [str(corpus)]
        cfg.output_dir = str(tmp_path / "out")
        assert validate_config(cfg) == []

    def test_empty_inputs_rejected(self):
        cfg = default_config()
        cfg.inputs = []
        assert any("inputs" in v for v in validate_config(cfg))

    def test_duplicate_sentinels_rejected(self, tmp_path):
        corpus = tmp_path / "c"
        corpus.mkdir()
        cfg = default_config()
        cfg.inputs = [str(corpus)]
        cfg.build.sentinels["eos"] = cfg.build.sentinels["fim_start"]
        assert any("sentinels" in v for v in validate_config(cfg))


class TestConfigHash:
    def test_stable_for_equal_configs(self):
        assert config_hash(default_config()) == config_hash(default_config())

    def test_workers_excluded(self):
        a = default_config()
        b = default_config()
        b.workers = 8
        assert config_hash(a) == config_hash(b)

    def test_parameter_changes_change_hash(self):
        a = default_config()
        b = default_config()
        b.dedup.threshold = 0.9
        assert config_hash(a) != config_hash(b)
