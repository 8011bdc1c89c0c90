from __future__ import annotations

import json
from pathlib import Path

from conftest import build_fixture_corpus
from repopipe.cli import EXIT_CONFIG, EXIT_OK, EXIT_STAGE, main
from repopipe.config import config_from_dict


def write_config(tmp_path: Path, corpus: Path, bench: Path, out_name: str = "cli_out") -> Path:
    cfg = {
        "inputs": [str(corpus)],
        "output_dir": str(tmp_path / out_name),
        "seed": 7,
        "decontaminate": {"benchmark_files": [str(bench)]},
        "build": {"entry_len": 64, "entries_per_shard": 8},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


class TestPrintDefaultConfig:
    def test_prints_parseable_default(self, capsys):
        assert main(["--print-default-config"]) == EXIT_OK
        printed = capsys.readouterr().out
        cfg = config_from_dict(json.loads(printed))
        assert cfg.dedup.num_perm == 128
        assert cfg.build.fim_rate == 0.5


class TestExitCodes:
    def test_validation_error_exits_2(self, tmp_path, capsys):
        code = main(["run", "--inputs", str(tmp_path / "nope"), "--output-dir", str(tmp_path / "o")])
        assert code == EXIT_CONFIG
        assert "does not exist" in capsys.readouterr().err

    def test_unreadable_config_exits_2(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG

    def test_stage_without_upstream_exits_3(self, tmp_path, capsys):
        corpus, bench = build_fixture_corpus(tmp_path)
        cfg_path = write_config(tmp_path, corpus, bench)
        code = main(["order", "--config", str(cfg_path)])
        assert code == EXIT_STAGE
        assert "order" in capsys.readouterr().err


class TestFullRun:
    def test_run_writes_stats_and_entries(self, tmp_path, capsys):
        corpus, bench = build_fixture_corpus(tmp_path)
        cfg_path = write_config(tmp_path, corpus, bench)
        assert main(["run", "--config", str(cfg_path)]) == EXIT_OK
        out = tmp_path / "cli_out"
        assert (out / "stats.txt").exists()
        assert sorted((out / "entries").glob("entries-*.jsonl"))
        printed = capsys.readouterr().out
        assert "Python" in printed and "Total" in printed

    def test_stage_by_stage_matches_full_run(self, tmp_path):
        corpus, bench = build_fixture_corpus(tmp_path)
        staged_cfg = write_config(tmp_path, corpus, bench, out_name="staged")
        for stage in ("filter", "order", "dedup", "decontaminate", "build"):
            assert main([stage, "--config", str(staged_cfg)]) == EXIT_OK
        assert main(["stats", "--config", str(staged_cfg)]) == EXIT_OK

        full_cfg = write_config(tmp_path, corpus, bench, out_name="full")
        assert main(["run", "--config", str(full_cfg)]) == EXIT_OK

        staged_entries = sorted((tmp_path / "staged" / "entries").glob("*.jsonl"))
        full_entries = sorted((tmp_path / "full" / "entries").glob("*.jsonl"))
        assert [p.name for p in staged_entries] == [p.name for p in full_entries]
        for a, b in zip(staged_entries, full_entries):
            assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "staged" / "stats.json").read_bytes() == (
            tmp_path / "full" / "stats.json"
        ).read_bytes()

    def test_resume_after_interruption_matches_uninterrupted(self, tmp_path):
        corpus, bench = build_fixture_corpus(tmp_path)
        resumed_cfg = write_config(tmp_path, corpus, bench, out_name="resumed")
        # Simulate an interrupted run: only the first two stages complete.
        assert main(["filter", "--config", str(resumed_cfg)]) == EXIT_OK
        assert main(["order", "--config", str(resumed_cfg)]) == EXIT_OK
        assert main(["run", "--config", str(resumed_cfg)]) == EXIT_OK

        fresh_cfg = write_config(tmp_path, corpus, bench, out_name="fresh")
        assert main(["run", "--config", str(fresh_cfg)]) == EXIT_OK

        for rel in ("work/samples_clean.jsonl", "stats.json", "stats.txt"):
            assert (tmp_path / "resumed" / rel).read_bytes() == (
                tmp_path / "fresh" / rel
            ).read_bytes()
        resumed = sorted((tmp_path / "resumed" / "entries").glob("*"))
        fresh = sorted((tmp_path / "fresh" / "entries").glob("*"))
        assert [p.name for p in resumed] == [p.name for p in fresh]
        for a, b in zip(resumed, fresh):
            assert a.read_bytes() == b.read_bytes()

    def test_binary_output_format(self, tmp_path):
        corpus, bench = build_fixture_corpus(tmp_path)
        cfg_path = write_config(tmp_path, corpus, bench, out_name="bin_out")
        assert main(["run", "--config", str(cfg_path), "--output-format", "bin"]) == EXIT_OK
        out = tmp_path / "bin_out"
        bins = sorted((out / "entries").glob("entries-*.bin"))
        assert bins
        manifest = json.loads((out / "manifests" / "build.json").read_text())
        # uint32 little-endian, entry_len tokens per entry
        first = bins[0].read_bytes()
        n_entries = next(
            e["records"] for e in manifest["outputs"] if e["path"].endswith("00000.bin")
        )
        assert len(first) == n_entries * manifest["entry_len"] * 4
        sidecars = sorted((out / "entries").glob("entries-*.boundaries.jsonl"))
        assert len(sidecars) == len(bins)
