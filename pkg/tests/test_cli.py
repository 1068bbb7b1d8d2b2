import csv

import pytest

from arnnsci.cli import main, read_config, ConfigError

from conftest import fixture_path


@pytest.fixture()
def h4_config(tmp_path):
    cfg = tmp_path / "h4.cfg"
    cfg.write_text(
        f"""
[system]
fcidump = {fixture_path("h4_sto3g")}

[run]
seed_kind = hf
n_unique_cap = 20
n_network_samples = 2000
max_iterations = 3
epsilon_ha = 1e-5
patience = 1
rng_seed = 3

[train]
epochs = 25
n_train = 2000

[model.1]
n_layers = 2
features_per_bit = 4
dropout_rate = 0.05
"""
    )
    return cfg


class TestReadConfig:
    def test_round_trip(self, h4_config):
        cfg, snapshot = read_config(h4_config)
        assert cfg.seed_kind == "hf"
        assert cfg.n_unique_cap == 20
        assert "fcidump" in snapshot

    def test_unknown_key_rejected(self, h4_config):
        text = h4_config.read_text() + "\nmystery_knob = 3\n"
        h4_config.write_text(text)
        with pytest.raises(ConfigError, match="unknown key"):
            read_config(h4_config)

    def test_unknown_section_rejected(self, h4_config):
        h4_config.write_text(h4_config.read_text() + "\n[surprise]\nx = 1\n")
        with pytest.raises(ConfigError, match="unknown config section"):
            read_config(h4_config)

    def test_override_applies(self, h4_config):
        cfg, snapshot = read_config(h4_config, ("n_unique_cap=16",))
        assert cfg.n_unique_cap == 16
        assert "n_unique_cap = 16" in snapshot

    def test_override_unknown_key(self, h4_config):
        with pytest.raises(ConfigError, match="not present"):
            read_config(h4_config, ("bogus=1",))


class TestCmdRun:
    def test_full_run_and_artifacts(self, h4_config, tmp_path, capsys):
        out = tmp_path / "run1"
        code = main(["run", "--config", str(h4_config), "--out", str(out)])
        assert code == 0
        assert (out / "config.snapshot.cfg").exists()
        rows = list(csv.DictReader(open(out / "records.csv")))
        energies = [float(r["energy_ha"]) for r in rows]
        assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))

    def test_snapshot_replays_identically(self, h4_config, tmp_path):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        assert main(["run", "--config", str(h4_config), "--out", str(out1)]) == 0
        assert main(
            ["run", "--config", str(out1 / "config.snapshot.cfg"), "--out", str(out2)]
        ) == 0
        rows1 = [r[:-1] for r in csv.reader(open(out1 / "records.csv"))]  # drop seconds
        rows2 = [r[:-1] for r in csv.reader(open(out2 / "records.csv"))]
        assert rows1 == rows2

    def test_missing_fcidump_exit_one(self, h4_config, tmp_path, capsys):
        code = main([
            "run",
            "--config",
            str(h4_config),
            "--out",
            str(tmp_path / "x"),
            "--override",
            "fcidump=/nonexistent/file.fcidump",
        ])
        assert code == 1
        assert "/nonexistent/file.fcidump" in capsys.readouterr().err

    def test_max_iterations_exit_two(self, h4_config, tmp_path):
        code = main([
            "run", "--config", str(h4_config), "--out", str(tmp_path / "y"),
            "--override", "max_iterations=1",
            "--override", "epsilon_ha=1e-12",
            "--override", "patience=5",
        ])
        assert code == 2

    def test_override_in_snapshot(self, h4_config, tmp_path):
        out = tmp_path / "ovr"
        main([
            "run", "--config", str(h4_config), "--out", str(out),
            "--override", "n_unique_cap=16",
        ])
        assert "n_unique_cap = 16" in (out / "config.snapshot.cfg").read_text()

    def test_verbose_loss_traces(self, h4_config, tmp_path):
        out = tmp_path / "verbose"
        h4_config.write_text(h4_config.read_text().replace("rng_seed = 3", "rng_seed = 3\nverbose_loss = true"))
        assert main(["run", "--config", str(h4_config), "--out", str(out)]) == 0
        traces = sorted(out.glob("loss_iter*.csv"))
        assert traces
        assert traces[0].read_text().startswith("epoch,minibatch,nll")


class TestCmdFci:
    def test_h2_energy_and_table(self, tmp_path, capsys):
        import json
        import re

        out = tmp_path / "fci"
        code = main([
            "fci", "--fcidump", str(fixture_path("h2_sto3g")), "--out", str(out),
            "--chem-acc", "1.6e-3",
        ])
        assert code == 0
        text = capsys.readouterr().out
        printed = float(re.search(r"FCI energy:\s*(-?\d+\.\d+)", text).group(1))
        ref = json.load(open(fixture_path("h2_sto3g").with_suffix("").parent / "h2_sto3g.ref.json"))
        assert printed == pytest.approx(ref["fci_energy"], abs=1e-8)
        assert "N_CA" in text
        rows = list(csv.DictReader(open(out / "born_table.csv")))
        probs = [float(r["probability"]) for r in rows]
        assert probs == sorted(probs, reverse=True)
        assert abs(sum(probs) - 1.0) < 1e-9

    def test_guard_exit_three(self, capsys, monkeypatch):
        import arnnsci.cli as climod

        monkeypatch.setattr(climod, "FCI_GUARD", 10)
        code = main(["fci", "--fcidump", str(fixture_path("h2o_sto3g"))])
        assert code == 3

    def test_missing_file_exit_one(self):
        assert main(["fci", "--fcidump", "/nope.fcidump"]) == 1


class TestCmdSeedSampleInspectPlot:
    def test_seed_reports_energy(self, h4_config, capsys):
        code = main(["seed", "--config", str(h4_config), "--override", "seed_kind=cisd"])
        assert code == 0
        assert "cisd seed energy" in capsys.readouterr().out

    def test_sample_from_checkpoint(self, h4_config, tmp_path, capsys):
        out = tmp_path / "run-this"
        main(["run", "--config", str(h4_config), "--out", str(out)])
        ckpt = out / "model_stage0.arnn"
        dump = tmp_path / "samples.csv"
        code = main([
            "sample", "--model", str(ckpt), "--n", "5000", "--beta", "0.7",
            "--seed", "4", "--out", str(dump),
        ])
        assert code == 0
        rows = list(csv.DictReader(open(dump)))
        assert sum(int(r["count"]) for r in rows) == 5000

    def test_inspect_lists_records(self, h4_config, tmp_path, capsys):
        out = tmp_path / "run-inspect"
        main(["run", "--config", str(h4_config), "--out", str(out)])
        code = main(["inspect", "--run-dir", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "records" in text
        assert "model_stage0.arnn" in text

    def test_plot_svg(self, h4_config, tmp_path, capsys):
        out = tmp_path / "run-plot"
        main(["run", "--config", str(h4_config), "--out", str(out)])
        born_dir = tmp_path / "fci-out"
        main(["fci", "--fcidump", str(fixture_path("h4_sto3g")), "--out", str(born_dir)])
        svg = tmp_path / "curve.svg"
        code = main([
            "plot", "--run-dir", str(out), "--out", str(svg),
            "--born", str(born_dir / "born_table.csv"), "--bins", "10",
        ])
        assert code == 0
        assert svg.exists() and svg.read_text().startswith("<?xml")
        assert (tmp_path / "curve_filling.svg").exists()

    def test_plot_missing_records_exit_one(self, tmp_path):
        assert main(["plot", "--run-dir", str(tmp_path / "ghost"), "--out", "x.svg"]) == 1
