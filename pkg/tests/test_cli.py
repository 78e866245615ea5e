"""Tests for config handling and the command-line entry point."""

import numpy as np
import pytest

from relex.cli import (DEFAULTS, apply_override, emit_canonical_config,
                       load_config, main, parse_canonical_config)
from relex.errors import ConfigError


class TestLoadConfig:
    def test_defaults(self):
        cfg = load_config()
        assert cfg["dynamics"]["eta"] == "0.01"
        assert cfg["objective"]["kind"] == "gaussian_mixture"

    def test_file_values_override_defaults(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("[dynamics]\neta = 0.005\nsteps = 500\n")
        cfg = load_config(str(path))
        assert cfg["dynamics"]["eta"] == "0.005"
        assert cfg["dynamics"]["steps"] == "500"
        assert cfg["dynamics"]["tau1"] == DEFAULTS["dynamics"]["tau1"]

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[dynamics]\ntemperature = 1\n")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[physics]\neta = 0.01\n")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/no/such/file.cfg")

    def test_seed_flag_wins(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("[dynamics]\nseed = 3\n")
        cfg = load_config(str(path), overrides=["seed=5"], seed=9)
        assert cfg["dynamics"]["seed"] == "9"


class TestOverrides:
    def test_bare_key(self):
        cfg = load_config(overrides=["eta=0.005"])
        assert cfg["dynamics"]["eta"] == "0.005"

    def test_dotted_key(self):
        cfg = load_config(overrides=["objective.kappa=0.3"])
        assert cfg["objective"]["kappa"] == "0.3"

    def test_later_override_wins(self):
        cfg = load_config(overrides=["eta=0.005", "eta=0.002"])
        assert cfg["dynamics"]["eta"] == "0.002"

    def test_bad_overrides(self):
        for item in ["eta", "nosuchkey=1", "physics.eta=1", "dynamics.bogus=1"]:
            with pytest.raises(ConfigError):
                apply_override(load_config(), item)


class TestCanonicalConfig:
    def test_round_trip(self):
        cfg = load_config(overrides=["eta=0.005"])
        line = emit_canonical_config(cfg)
        assert parse_canonical_config(line) == cfg

    def test_key_order_irrelevant(self, tmp_path):
        a = tmp_path / "a.cfg"
        b = tmp_path / "b.cfg"
        a.write_text("[dynamics]\neta = 0.005\nsteps = 500\n")
        b.write_text("[dynamics]\nsteps = 500\neta = 0.005\n")
        assert (emit_canonical_config(load_config(str(a)))
                == emit_canonical_config(load_config(str(b))))

    def test_override_changes_exactly_one_token(self):
        base = emit_canonical_config(load_config()).split()
        changed = emit_canonical_config(load_config(overrides=["eta=0.005"])).split()
        diffs = [(x, y) for x, y in zip(base, changed) if x != y]
        assert diffs == [("dynamics.eta=0.01", "dynamics.eta=0.005")]


def test_shipped_configs_load_and_round_trip():
    import glob
    import os
    here = os.path.dirname(__file__)
    paths = sorted(glob.glob(os.path.join(here, "..", "configs", "*.cfg")))
    assert len(paths) == 4
    for path in paths:
        cfg = load_config(path)
        assert parse_canonical_config(emit_canonical_config(cfg)) == cfg


class TestDispatch:
    def test_unknown_subcommand_exits_2(self, capsys):
        assert main(["annihilate"]) == 2
        assert capsys.readouterr().err != ""

    def test_config_error_exits_2(self, capsys):
        assert main(["compare", "--set", "bogus=1"]) == 2
        assert "config error" in capsys.readouterr().err

    def test_compare_writes_csvs(self, tmp_path, capsys):
        out = tmp_path / "res"
        code = main(["compare", "--set", "steps=200", "--set", "ensemble=3",
                     "--set", "eta=0.005", "--out", str(out)])
        assert code == 0
        best = (out / "bestsofar.csv").read_text().splitlines()
        summ = (out / "summary.csv").read_text().splitlines()
        assert best[0].startswith("# config: ")
        assert "dynamics.eta=0.005" in best[0]
        assert summ[1] == "iteration,algorithm,median,q25,q75"

    def test_sweep_writes_per_kappa_files(self, tmp_path):
        out = tmp_path / "res"
        code = main(["sweep", "--set", "steps=100", "--set", "ensemble=2",
                     "--set", "kappas=0.1,0.2", "--out", str(out)])
        assert code == 0
        names = sorted(p.name for p in out.iterdir())
        assert names == ["bestsofar_kappa0p1.csv", "bestsofar_kappa0p2.csv",
                         "summary_kappa0p1.csv", "summary_kappa0p2.csv"]
        line = (out / "summary_kappa0p2.csv").read_text().splitlines()[0]
        assert "objective.kappa=0.2" in line

    def test_discerr_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "res"
        code = main(["discerr", "--set", "kind=double_well",
                     "--set", "tau1=0.1", "--set", "tau2=1",
                     "--set", "etas=0.02,0.01", "--set", "horizon=0.2",
                     "--set", "ensemble=50", "--out", str(out)])
        assert code == 0
        lines = (out / "discerr.csv").read_text().splitlines()
        assert lines[1] == "eta,mse,stderr"
        assert "slope" in capsys.readouterr().out

    def test_chi2_writes_csv(self, tmp_path):
        out = tmp_path / "res"
        code = main(["chi2", "--set", "kind=double_well",
                     "--set", "tau1=0.1", "--set", "tau2=1",
                     "--set", "eta=0.001", "--set", "ensemble=1000",
                     "--set", "intensity=5",
                     "--set", "sample_times=0.05,0.1,0.15,0.2",
                     "--set", "resolution=12", "--set", "fit_floor=0.2",
                     "--out", str(out)])
        assert code == 0
        lines = (out / "chi2decay.csv").read_text().splitlines()
        assert lines[1] == "time,a,chi2,bootstrap_std"
        assert len(lines) == 2 + 2 * 4   # two intensities x four times

    def test_gradcheck_passes(self, capsys):
        assert main(["gradcheck"]) == 0
        assert "PASS" in capsys.readouterr().out

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")   # clamped swap prob
    def test_divergence_exits_3(self, tmp_path, capsys):
        code = main(["compare", "--set", "kind=quadratic",
                     "--set", "eta=1000000", "--set", "steps=100",
                     "--set", "ensemble=2", "--set", "tau1=0.1",
                     "--out", str(tmp_path)])
        assert code == 3
        assert "divergence" in capsys.readouterr().err

    def test_seed_flag_changes_echo(self, tmp_path):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        for out, seed in ((out1, "1"), (out2, "2")):
            assert main(["compare", "--set", "steps=100",
                         "--set", "ensemble=2", "--seed", seed,
                         "--out", str(out)]) == 0
        l1 = (out1 / "summary.csv").read_text().splitlines()[0]
        l2 = (out2 / "summary.csv").read_text().splitlines()[0]
        assert "dynamics.seed=1" in l1 and "dynamics.seed=2" in l2
