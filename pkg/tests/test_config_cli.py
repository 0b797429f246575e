"""Config resolution, deterministic output files, and CLI behavior."""

import json

import numpy as np
import pytest

from tripletdc import config as cfgmod
from tripletdc.cli import (FLUCT_HEADER, SCAN_HEADER, SIMULATE_HEADER,
                           SPECTRUM_HEADER, main)
from tripletdc.exceptions import ConfigurationError
from tripletdc.mcwf import OBSERVABLES


class TestDefaults:
    def test_defaults_returned_without_file(self):
        cfg = cfgmod.load_config()
        assert cfg["system"]["epsilon_b"] == 200.0
        assert cfg["ensemble"]["n_traj"] == 100_000
        assert cfg["ensemble"]["sample_stride"] == 50
        assert cfg["mcwf"]["jump_rate_factor"] == 2.0
        assert "master_seed" not in cfg["ensemble"]

    def test_result_is_a_private_copy(self):
        cfg = cfgmod.load_config()
        cfg["system"]["epsilon_b"] = -1.0
        assert cfgmod.load_config()["system"]["epsilon_b"] == 200.0


class TestFileMerge:
    def test_partial_file_merges_over_defaults(self, tmp_path):
        p = tmp_path / "run.toml"
        p.write_text("[system]\nepsilon_b = 120.0\n[ensemble]\nn_traj = 64\n")
        cfg = cfgmod.load_config(str(p))
        assert cfg["system"]["epsilon_b"] == 120.0
        assert cfg["system"]["gamma_b"] == 2.0
        assert cfg["ensemble"]["n_traj"] == 64
        assert cfg["ensemble"]["dt"] == 1e-3

    def test_unknown_section_rejected(self, tmp_path):
        p = tmp_path / "run.toml"
        p.write_text("[simulation]\nn = 3\n")
        with pytest.raises(ConfigurationError, match="unknown config section"):
            cfgmod.load_config(str(p))

    def test_broken_toml_rejected(self, tmp_path):
        p = tmp_path / "run.toml"
        p.write_text("[system\nepsilon_b = 120.0\n")
        with pytest.raises(ConfigurationError, match="cannot parse"):
            cfgmod.load_config(str(p))


class TestOverrides:
    def test_literals_parse_with_types(self):
        cfg = cfgmod.apply_overrides(cfgmod.load_config(), [
            "system.epsilon_b=105.5",
            "ensemble.n_traj=250",
            "spectrum.b_lo_flip=false",
            "scan.values=[100.0, 104.0]",
            'ensemble.backend="numpy"',
        ])
        assert cfg["system"]["epsilon_b"] == 105.5
        assert cfg["ensemble"]["n_traj"] == 250
        assert cfg["spectrum"]["b_lo_flip"] is False
        assert cfg["scan"]["values"] == [100.0, 104.0]
        assert cfg["ensemble"]["backend"] == "numpy"

    def test_bare_words_fall_back_to_strings(self):
        cfg = cfgmod.apply_overrides(cfgmod.load_config(), ["ensemble.backend=numpy"])
        assert cfg["ensemble"]["backend"] == "numpy"

    def test_input_config_not_mutated(self):
        base = cfgmod.load_config()
        cfgmod.apply_overrides(base, ["system.epsilon_b=1.0"])
        assert base["system"]["epsilon_b"] == 200.0

    def test_malformed_overrides_rejected(self):
        for bad in ("system.epsilon_b", "epsilon_b=3", "foo.bar=3", "a.b.c=3"):
            with pytest.raises(ConfigurationError):
                cfgmod.apply_overrides(cfgmod.load_config(), [bad])


class TestSeeds:
    def test_explicit_seed_wins(self):
        cfg = cfgmod.apply_overrides(cfgmod.load_config(), ["ensemble.master_seed=99"])
        assert cfgmod.resolve_seed(cfg) == 99

    def test_derived_seed_is_stable_and_config_sensitive(self):
        base = cfgmod.load_config()
        s1 = cfgmod.resolve_seed(base)
        s2 = cfgmod.resolve_seed(cfgmod.load_config())
        assert s1 == s2
        assert 0 <= s1 < 2 ** 64
        other = cfgmod.apply_overrides(base, ["system.epsilon_b=105.0"])
        assert cfgmod.resolve_seed(other) != s1

    def test_canonical_json_ignores_insertion_order(self):
        a = {"x": 1, "y": {"b": 2, "a": 3}}
        b = {"y": {"a": 3, "b": 2}, "x": 1}
        assert cfgmod.canonical_json(a) == cfgmod.canonical_json(b)


class TestBuilders:
    def test_system_params_with_pump_phase(self):
        cfg = cfgmod.apply_overrides(cfgmod.load_config(),
                                     ["system.epsilon_b_im=3.0"])
        p = cfgmod.system_params(cfg)
        assert p.epsilon_b == 200.0 + 3.0j

    def test_drive_schedule_switchoff(self):
        cfg = cfgmod.apply_overrides(cfgmod.load_config(),
                                     ["drive.epsilon_a=5.0", "drive.t_off=15.0"])
        sched = cfgmod.drive_schedule(cfg)
        assert sched.epsilon_a == 5.0
        assert sched.t_off == 15.0
        assert cfgmod.drive_schedule(cfgmod.load_config()).t_off is None

    def test_initial_point_coherent(self):
        cfg = cfgmod.apply_overrides(cfgmod.load_config(),
                                     ["initial.alpha_re=30.0", "initial.beta_im=-2.0"])
        pt = cfgmod.initial_point(cfg)
        assert pt.alpha == 30.0
        assert pt.alpha_plus == 30.0
        assert pt.beta == -2.0j
        assert pt.beta_plus == 2.0j

    def test_ensemble_config_carries_seed_and_backend(self):
        cfg = cfgmod.apply_overrides(cfgmod.load_config(), [
            "ensemble.divergence_bound=500.0", 'ensemble.backend="numpy"'])
        ec = cfgmod.ensemble_config(cfg, seed=7)
        assert ec.master_seed == 7
        assert ec.divergence_bound == 500.0
        assert ec.backend == "numpy"

    def test_scan_values_explicit_and_linspace(self):
        cfg = cfgmod.apply_overrides(cfgmod.load_config(), ["scan.values=[1.0,2.0]"])
        assert cfgmod.scan_values(cfg) == ("epsilon_b", [1.0, 2.0])
        cfg = cfgmod.apply_overrides(cfgmod.load_config(), [
            "scan.start=0.0", "scan.stop=1.0", "scan.num=3"])
        name, vals = cfgmod.scan_values(cfg)
        assert vals == [0.0, 0.5, 1.0]

    def test_scan_validation(self):
        with pytest.raises(ConfigurationError, match="needs either"):
            cfgmod.scan_values(cfgmod.load_config())
        cfg = cfgmod.apply_overrides(cfgmod.load_config(), ['scan.parameter="kappa"'])
        with pytest.raises(ConfigurationError, match="scan parameter"):
            cfgmod.scan_values(cfg)
        cfg = cfgmod.apply_overrides(cfgmod.load_config(), ["scan.values=[]"])
        with pytest.raises(ConfigurationError, match="empty"):
            cfgmod.scan_values(cfg)


class TestFileOutput:
    def test_csv_format_exact(self, tmp_path):
        path = tmp_path / "t.csv"
        cfgmod.write_csv(str(path), ["a", "b", "c", "d"],
                         [[1, 0.5, True, "x"], [2, 1e-3, False, "y"]])
        assert path.read_text() == "a,b,c,d\n1,0.5,true,x\n2,0.001,false,y\n"

    def test_float_repr_round_trips(self, tmp_path):
        path = tmp_path / "t.csv"
        value = 0.9863526959611882
        cfgmod.write_csv(str(path), ["v"], [[value]])
        back = float(path.read_text().splitlines()[1])
        assert back == value

    def test_row_width_mismatch_rejected(self, tmp_path):
        with pytest.raises(ConfigurationError, match="row width"):
            cfgmod.write_csv(str(tmp_path / "t.csv"), ["a", "b"], [[1]])

    def test_no_temp_files_left(self, tmp_path):
        path = tmp_path / "t.csv"
        cfgmod.write_csv(str(path), ["a"], [[1]])
        assert [p.name for p in tmp_path.iterdir()] == ["t.csv"]

    def test_manifest_round_trip(self, tmp_path):
        path = tmp_path / "data.csv"
        cfg = cfgmod.apply_overrides(cfgmod.load_config(), ["system.epsilon_b=105.0"])
        cfgmod.write_csv(str(path), ["a"], [[1.5]])
        mpath = cfgmod.write_manifest(str(path), cfg, seed=42, wall_time_s=0.1,
                                      extra={"n_diverged": 0})
        assert mpath == str(tmp_path / "data.manifest.json")
        manifest = json.loads(open(mpath).read())
        assert manifest["master_seed"] == 42
        assert manifest["n_diverged"] == 0
        assert manifest["outputs"]["data.csv"] == cfgmod.sha256_file(str(path))
        # the stored config re-parses into exactly the run that was done
        assert cfgmod.canonical_json(manifest["config"]) == cfgmod.canonical_json(cfg)
        assert cfgmod.resolve_seed(manifest["config"]) == cfgmod.resolve_seed(cfg)


SMALL_SIM = ["ensemble.n_traj=150", "ensemble.t_final=2.0",
             "ensemble.sample_stride=200", "drive.epsilon_a=5.0"]


def run_cli(argv):
    return main(argv)


class TestCli:
    def test_threshold_reports_value(self, capsys):
        assert run_cli(["threshold"]) == 0
        out = capsys.readouterr().out
        assert "70.91061195926652" in out

    def test_simulate_header_and_determinism(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["simulate", "--seed", "7", "--out"]
        sets = [x for kv in SMALL_SIM for x in ("--set", kv)]
        assert run_cli(args + [str(a)] + sets) == 0
        assert run_cli(args + [str(b)] + sets) == 0
        assert a.read_bytes() == b.read_bytes()
        header = a.read_text().splitlines()[0]
        assert header == ",".join(SIMULATE_HEADER)

    def test_simulate_seed_changes_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        sets = [x for kv in SMALL_SIM for x in ("--set", kv)]
        run_cli(["simulate", "--seed", "7", "--out", str(a)] + sets)
        run_cli(["simulate", "--seed", "8", "--out", str(b)] + sets)
        assert a.read_bytes() != b.read_bytes()

    def test_simulate_manifest_written(self, tmp_path):
        out = tmp_path / "a.csv"
        sets = [x for kv in SMALL_SIM for x in ("--set", kv)]
        run_cli(["simulate", "--seed", "7", "--out", str(out)] + sets)
        manifest = json.loads((tmp_path / "a.manifest.json").read_text())
        assert manifest["master_seed"] == 7
        assert manifest["n_diverged"] == 0
        assert manifest["valid"] is True
        assert "a.csv" in manifest["outputs"]

    def test_semiclassical_trace_matches_linear_filling(self, tmp_path):
        # with the coupling switched off the ensemble is noiseless, so both
        # the sampled means and the mean-field trace must sit on
        # |eps_a / gamma_a|^2 (1 - exp(-gamma_a t))^2
        out = tmp_path / "a.csv"
        sets = [x for kv in [
            "system.kappa=1e-30", "ensemble.n_traj=4", "ensemble.t_final=2.0",
            "ensemble.sample_stride=500", "drive.epsilon_a=5.0",
        ] for x in ("--set", kv)]
        assert run_cli(["simulate", "--seed", "3", "--semiclassical",
                        "--out", str(out)] + sets) == 0
        lines = out.read_text().splitlines()
        assert lines[0].split(",")[-2:] == ["sc_na", "sc_nb"]
        for ln in lines[1:]:
            vals = dict(zip(lines[0].split(","), ln.split(",")))
            t = float(vals["t"])
            want = (5.0 * (1.0 - np.exp(-t))) ** 2
            assert float(vals["na_mean"]) == pytest.approx(want, rel=1e-5, abs=1e-9)
            assert float(vals["sc_na"]) == pytest.approx(want, rel=1e-5, abs=1e-9)

    def test_spectrum_headers(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run_cli(["spectrum", "--out", str(out),
                        "--set", "spectrum.n_linear=40",
                        "--set", "spectrum.n_log=0"]) == 0
        assert out.read_text().splitlines()[0] == ",".join(SPECTRUM_HEADER)

    def test_spectrum_scan_has_leading_pump_column(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run_cli(["spectrum", "--scan", "--out", str(out),
                        "--set", "scan.values=[150.0, 200.0]",
                        "--set", "spectrum.n_linear=10",
                        "--set", "spectrum.n_log=0"]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(["epsilon_b"] + SPECTRUM_HEADER)
        assert len(lines) == 1 + 2 * 10

    def test_steady_scan_rows(self, tmp_path):
        out = tmp_path / "scan.csv"
        assert run_cli(["steady-scan", "--seed", "5", "--out", str(out),
                        "--set", "scan.values=[50.0, 200.0]",
                        "--set", "ensemble.n_traj=40",
                        "--set", "ensemble.t_final=2.0",
                        "--set", "ensemble.sample_stride=500"]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(SCAN_HEADER)
        # one row below threshold (trivial only), three above
        assert len(lines) == 1 + 1 + 3

    def test_fluctuation_check_headers(self, tmp_path):
        out = tmp_path / "f.csv"
        assert run_cli(["fluctuation-check", "--seed", "5", "--out", str(out),
                        "--set", "scan.values=[200.0]",
                        "--set", "initial.alpha_re=30.0",
                        "--set", "ensemble.n_traj=60",
                        "--set", "ensemble.t_final=8.0",
                        "--set", "ensemble.sample_stride=800"]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(FLUCT_HEADER)
        assert lines[1].split(",")[-1] == "false"

    def test_kappa_reports_reference_numbers(self, capsys):
        assert run_cli(["kappa"]) == 0
        out = capsys.readouterr().out
        assert "73.74666515580299" in out
        assert "4.916444343720199e-08" in out

    def test_mcwf_compare_csv_and_fail_exit(self, tmp_path):
        out = tmp_path / "c.csv"
        sets = []
        for kv in ["system.kappa=0.025", "system.gamma_a=0.6",
                   "system.gamma_b=1.5", "system.epsilon_b=1.0",
                   "mcwf.cutoff_a=6", "mcwf.cutoff_b=7", "mcwf.n_traj=3",
                   "mcwf.t_final=0.4", "ensemble.n_traj=400",
                   "ensemble.t_final=0.4", "ensemble.sample_stride=50",
                   "mcwf.z_threshold=0.0"]:
            sets += ["--set", kv]
        code = run_cli(["mcwf-compare", "--seed", "11", "--out", str(out)] + sets)
        assert code == 3  # impossible threshold: the comparison itself ran
        lines = out.read_text().splitlines()
        want = ["t"]
        for name in OBSERVABLES:
            want += [f"mcwf_{name}", f"mcwf_{name}_stderr",
                     f"sde_{name}", f"sde_{name}_stderr", f"z_{name}"]
        assert lines[0] == ",".join(want)

    def test_config_errors_exit_2(self, tmp_path, capsys):
        assert run_cli(["simulate", "--set", "system.gamma_b=-1.0",
                        "--out", str(tmp_path / "x.csv")]) == 2
        assert "error:" in capsys.readouterr().err
        assert run_cli(["steady-scan", "--out", str(tmp_path / "y.csv")]) == 2
        assert run_cli(["simulate", "--set", "foo.bar=1",
                        "--out", str(tmp_path / "z.csv")]) == 2

    def test_config_file_flows_through(self, tmp_path, capsys):
        p = tmp_path / "run.toml"
        p.write_text("[system]\nkappa = 0.008\ngamma_a = 1.0\ngamma_b = 2.0\n")
        assert run_cli(["threshold", "--config", str(p)]) == 0
        out = capsys.readouterr().out
        # threshold scales as 1 / sqrt(kappa)
        assert "25.07068728724262" in out
