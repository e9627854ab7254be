"""Command-line interface: schemas, determinism, exit codes, config parsing."""

import json
import math

import numpy as np
import pytest

from lossyphase.cli import (
    DATASET_COLUMNS,
    ESTIMATES_COLUMNS,
    REPORT_COLUMNS,
    SEED_ENV_VAR,
    config_from_dict,
    main,
    parse_config,
    read_dataset_csv,
)
from lossyphase.montecarlo import ProbeKind

SMALL_CONFIG = """\
# compact campaign for integration checks
eta_list = 0.361, 0.547
probe = optimal
phases = -0.04, 0.0, 0.04
series = 6
events = 300
seed = 99
poissonize_m = true
include_cc = true
"""


@pytest.fixture
def sim_dir(tmp_path):
    config_path = tmp_path / "campaign.cfg"
    config_path.write_text(SMALL_CONFIG)
    out_dir = tmp_path / "sim"
    assert main(["simulate", "--config", str(config_path), "--out-dir", str(out_dir)]) == 0
    return out_dir


class TestParseConfig:
    def test_full_round_trip(self):
        kwargs, include_cc = parse_config(SMALL_CONFIG)
        assert kwargs["eta_list"] == (0.361, 0.547)
        assert kwargs["probe_kind"] is ProbeKind.OPTIMAL
        assert kwargs["series_count"] == 6
        assert kwargs["master_seed"] == 99
        assert include_cc is True

    def test_unknown_key(self):
        from lossyphase.cli import ConfigError

        with pytest.raises(ConfigError, match="line 1"):
            parse_config("bogus = 3\n")

    def test_bad_value_diagnostic(self):
        from lossyphase.cli import ConfigError

        with pytest.raises(ConfigError, match="line 2"):
            parse_config("series = 5\nevents = many\n")

    def test_env_seed_lowest_precedence(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, "424242")
        kwargs, _ = parse_config("series = 5\n")
        assert kwargs["master_seed"] == 424242
        kwargs, _ = parse_config("seed = 7\n")
        assert kwargs["master_seed"] == 7


class TestBounds:
    def test_lossless_row(self, tmp_path):
        out = tmp_path / "bounds.csv"
        rc = main(["bounds", "--eta-min", "1.0", "--eta-max", "1.0", "--steps", "1", "--out", str(out)])
        assert rc == 0
        header, row = out.read_text().splitlines()
        assert header == "eta,dphi_optimal,dphi_noon,dphi_sil,x0,x1,x2,prep_success_p"
        fields = row.split(",")
        assert float(fields[1]) == pytest.approx(0.5, abs=1e-9)
        assert float(fields[2]) == pytest.approx(0.5, abs=1e-12)
        assert float(fields[3]) == pytest.approx(1 / math.sqrt(2), abs=1e-12)

    def test_default_grid_contains_experimental_etas(self, tmp_path):
        out = tmp_path / "bounds.csv"
        rc = main(["bounds", "--eta-min", "0.15", "--eta-max", "0.6", "--steps", "4", "--out", str(out)])
        assert rc == 0
        etas = {line.split(",")[0] for line in out.read_text().splitlines()[1:]}
        for eta in ("0.2", "0.361", "0.4", "0.547"):
            assert eta in etas

    def test_bad_range_exits_2(self, tmp_path):
        rc = main(["bounds", "--eta-min", "0.0", "--eta-max", "1.0", "--out", str(tmp_path / "x.csv")])
        assert rc == 2

    def test_rerun_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["bounds", "--eta-min", "0.3", "--eta-max", "0.5", "--steps", "3"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestFringes:
    def test_noon_loss_fringes_constant(self, tmp_path):
        out = tmp_path / "fringes.csv"
        rc = main(["fringes", "--eta", "0.361", "--probe", "noon", "--phi-steps", "41", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "phi,setting,AA,AB,BB,AC,BC,CC"
        ac = [float(l.split(",")[5]) for l in lines[1:] if l.split(",")[1] == "half"]
        assert max(ac) - min(ac) < 1e-12

    def test_lossless_has_no_loss_labels(self, tmp_path):
        out = tmp_path / "fringes.csv"
        assert main(["fringes", "--eta", "1.0", "--probe", "noon", "--phi-steps", "11", "--out", str(out)]) == 0
        for line in out.read_text().splitlines()[1:]:
            fields = line.split(",")
            assert float(fields[5]) == 0.0 and float(fields[6]) == 0.0 and float(fields[7]) == 0.0

    def test_bad_eta_exits_2(self, tmp_path):
        assert main(["fringes", "--eta", "1.5", "--out", str(tmp_path / "f.csv")]) == 2

    def test_counts_mode(self, tmp_path):
        out = tmp_path / "fringes.csv"
        rc = main([
            "fringes", "--eta", "0.361", "--probe", "optimal", "--phi-steps", "5",
            "--counts", "1000", "--seed", "4", "--out", str(out),
        ])
        assert rc == 0
        for line in out.read_text().splitlines()[1:]:
            values = [float(v) for v in line.split(",")[2:]]
            assert sum(values) == 1000
            assert all(v == int(v) for v in values)


class TestSimulate:
    def test_dataset_schema(self, sim_dir):
        lines = (sim_dir / "dataset.csv").read_text().splitlines()
        assert lines[0] == ",".join(DATASET_COLUMNS)
        # 2 etas x 3 phases x 6 series x 2 settings
        assert len(lines) == 1 + 2 * 3 * 6 * 2

    def test_manifest_lists_outputs(self, sim_dir):
        manifest = json.loads((sim_dir / "manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert manifest["config"]["seed"] == 99
        assert any(path.endswith("dataset.csv") for path in manifest["outputs"])

    def test_manifest_replay_reproduces(self, sim_dir, tmp_path):
        manifest = json.loads((sim_dir / "manifest.json").read_text())
        config, _ = config_from_dict(manifest["config"])
        from lossyphase.cli import write_dataset_csv
        from lossyphase.montecarlo import run_campaign

        replay = tmp_path / "replay.csv"
        write_dataset_csv(replay, run_campaign(config))
        assert replay.read_bytes() == (sim_dir / "dataset.csv").read_bytes()

    def test_subset_flags(self, tmp_path):
        config_path = tmp_path / "c.cfg"
        config_path.write_text(SMALL_CONFIG)
        out_dir = tmp_path / "noon"
        rc = main([
            "simulate", "--config", str(config_path), "--out-dir", str(out_dir),
            "--probe", "noon", "--eta", "0.361",
        ])
        assert rc == 0
        records = read_dataset_csv(out_dir / "dataset.csv")
        assert {r.probe for r in records} == {ProbeKind.NOON}
        assert {r.eta for r in records} == {0.361}

    def test_parse_error_exits_1(self, tmp_path):
        config_path = tmp_path / "bad.cfg"
        config_path.write_text("series = 5\nnonsense line\n")
        rc = main(["simulate", "--config", str(config_path), "--out-dir", str(tmp_path / "o")])
        assert rc == 1


class TestEstimate:
    def test_outputs_and_schema(self, sim_dir, tmp_path):
        out_dir = tmp_path / "est"
        rc = main([
            "estimate", "--dataset", str(sim_dir / "dataset.csv"), "--out-dir", str(out_dir),
            "--hist-bin", "0.01",
        ])
        assert rc == 0
        est_lines = (out_dir / "estimates.csv").read_text().splitlines()
        assert est_lines[0] == ",".join(ESTIMATES_COLUMNS)
        assert len(est_lines) == 1 + 2 * 3 * 6
        report_lines = (out_dir / "report.csv").read_text().splitlines()
        assert report_lines[0] == ",".join(REPORT_COLUMNS)
        assert len(report_lines) == 1 + 2 * 3
        hist_lines = (out_dir / "histograms.csv").read_text().splitlines()
        assert hist_lines[0] == "eta,probe,phi_true,bin_left,bin_right,count"
        for line in est_lines[1:]:
            phi_hat = float(line.split(",")[4])
            assert -math.pi / 2 <= phi_hat < math.pi / 2

    def test_schema_mismatch_names_column(self, sim_dir, tmp_path, capsys):
        broken = tmp_path / "broken.csv"
        text = (sim_dir / "dataset.csv").read_text().replace("n_AA", "n_XX", 1)
        broken.write_text(text)
        rc = main(["estimate", "--dataset", str(broken), "--manifest", str(sim_dir / "manifest.json"), "--out-dir", str(tmp_path / "o")])
        assert rc == 1
        assert "n_AA" in capsys.readouterr().err

    def test_missing_manifest_exits_1(self, tmp_path):
        data = tmp_path / "dataset.csv"
        data.write_text(",".join(DATASET_COLUMNS) + "\n")
        rc = main(["estimate", "--dataset", str(data), "--out-dir", str(tmp_path / "o")])
        assert rc == 1


class TestDeterminism:
    def test_end_to_end_byte_identical(self, tmp_path):
        config_path = tmp_path / "c.cfg"
        config_path.write_text(SMALL_CONFIG)
        outputs = []
        for name in ("one", "two"):
            sim = tmp_path / name / "sim"
            est = tmp_path / name / "est"
            assert main(["simulate", "--config", str(config_path), "--out-dir", str(sim)]) == 0
            assert main(["estimate", "--dataset", str(sim / "dataset.csv"), "--out-dir", str(est)]) == 0
            outputs.append((sim / "dataset.csv", est / "estimates.csv", est / "report.csv"))
        for first, second in zip(*outputs):
            assert first.read_bytes() == second.read_bytes()
