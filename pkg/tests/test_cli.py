import csv
import json

import numpy as np
import pytest

from corinfomax import cli
from corinfomax.config import PRESETS, load_config, parse_config, set_dotted
from corinfomax.exceptions import ConfigError, DivergenceError
from corinfomax.experiment import run_experiment, sinr_trace


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


SMALL = {"n": 3, "m": 6, "N": 2000, "domain": {"kind": "antisparse"},
         "source": {"type": "copula_t", "rho": 0.0}, "seed": 5}


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


# -- config -----------------------------------------------------------------------------


@pytest.mark.parametrize("kind", ["antisparse", "nonneg_antisparse", "sparse", "nonneg_sparse", "simplex"])
def test_presets_fill_from_domain(kind):
    cfg = parse_config({"n": 5, "domain": {"kind": kind}})
    assert cfg.preset == kind
    for key, val in PRESETS[kind]["network"].items():
        assert cfg.network[key] == val
    assert cfg.forgetting().eps == pytest.approx(1.0 / PRESETS[kind]["network"]["Be_init"])
    assert cfg.m == 10 and cfg.N == 100000
    st = cfg.initial_state()
    np.testing.assert_array_equal(st.W, np.eye(5, 10))
    np.testing.assert_array_equal(st.By, PRESETS[kind]["network"]["By_init"] * np.eye(5))
    assert st.k == 2750


def test_antisparse_table_row():
    cfg = parse_config({"n": 5, "domain": {"kind": "antisparse"}})
    nw, dy = cfg.network, cfg.dynamics
    assert (nw["By_init"], nw["Be_init"], nw["zeta_y"], nw["zeta_e"], nw["mu_W"]) == (5.0, 5000.0, 0.99, 0.98, 0.03)
    assert (dy["nu_max"], dy["eps_t"], dy["c_y"], dy["floor_y"]) == (500, 1e-6, 0.9, 0.0)


def test_pam4_preset_and_overrides():
    cfg = parse_config({"n": 5, "domain": {"kind": "antisparse"}, "source": {"type": "pam4"},
                        "network": {"mu_W": 0.01}, "dynamics": {"gamma": "recompute"}})
    assert cfg.preset == "pam4" and cfg.network["mu_W"] == 0.01
    assert cfg.dynamics_config().gamma == "recompute"


def test_feature_domain_config():
    doc = {"domain": {"kind": "feature", "n": 5, "signed": [1, 2, 4], "nonneg": [3, 5], "groups": [[1, 2, 5], [2, 3, 4]]}}
    cfg = parse_config(doc)
    assert cfg.domain.n_multipliers == 2 and cfg.preset == "feature"


def test_mu_decay_schedule():
    cfg = parse_config({"n": 2, "domain": {"kind": "antisparse"}, "network": {"mu_W_decay": 0.01}})
    mu = cfg.mu_W()
    k0 = cfg.counter_start()
    assert mu(k0) == pytest.approx(0.03) and mu(k0 + 100) == pytest.approx(0.015)


@pytest.mark.parametrize("doc,path", [
    ({}, "domain"),
    ({"domain": {"kind": "antisparse"}, "n": 3, "bogus": 1}, "bogus"),
    ({"domain": {"kind": "antisparse"}, "n": 3, "m": 2}, "m"),
    ({"domain": {"kind": "antisparse"}, "n": 3, "network": {"zeta_y": 1.0}}, "network.zeta_y"),
    ({"domain": {"kind": "antisparse"}, "n": 3, "network": {"nope": 1}}, "network.nope"),
    ({"domain": {"kind": "antisparse"}, "n": 3, "dynamics": {"nu_max": 0}}, "dynamics.nu_max"),
    ({"domain": {"kind": "antisparse"}, "n": 3, "dynamics": {"gamma": "x"}}, "dynamics.gamma"),
    ({"domain": {"kind": "antisparse"}, "n": 3, "source": {"type": "copula_t", "rho": 0.9}}, "source.rho"),
    ({"domain": {"kind": "sparse"}, "n": 3, "source": {"type": "copula_t"}}, "source.type"),
    ({"domain": {"kind": "antisparse"}, "n": 3, "mixing": "cauchy"}, "mixing"),
    ({"domain": {"kind": "antisparse"}, "n": 3, "preset": "nope"}, "preset"),
    ({"domain": {"kind": "antisparse"}, "n": 3, "N": -1}, "N"),
])
def test_config_errors_name_field(doc, path):
    with pytest.raises(ConfigError) as info:
        parse_config(doc)
    assert info.value.path == path
    assert str(info.value).startswith(path)


def test_load_config_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)


def test_set_dotted():
    d = set_dotted({}, "network.mu_W", 0.1)
    assert d == {"network": {"mu_W": 0.1}}


# -- experiment ----------------------------------------------------------------------------


def test_trace_length_and_values():
    cfg = parse_config(dict(SMALL, N=1050, eval={"window": 100}))
    res = run_experiment(cfg)
    assert res.trace.shape == (11, 2)
    assert res.trace[-1, 0] == 1050
    assert np.all(np.isfinite(res.trace[:, 1]))


def test_default_window_is_hundredth():
    res = run_experiment(parse_config(SMALL))
    assert res.window == 20 and res.trace.shape[0] == 100


def test_sinr_trace_windows():
    rng = np.random.default_rng(0)
    S = rng.uniform(-1, 1, (2, 95))
    tr = sinr_trace(S, S, 10)
    assert tr.shape == (10, 2) and tr[-1, 0] == 95


def test_experiment_deterministic():
    a = run_experiment(parse_config(SMALL), keep_outputs=True)
    b = run_experiment(parse_config(SMALL), keep_outputs=True)
    assert a.outputs.Y.tobytes() == b.outputs.Y.tobytes()
    assert a.final_sinr_db == b.final_sinr_db


def test_pam4_experiment_reports_ser():
    res = run_experiment(parse_config(dict(SMALL, source={"type": "pam4"})))
    assert res.ser is not None and 0.0 <= res.ser <= 1.0


# -- CLI: run -------------------------------------------------------------------------------


def test_run_writes_reproducible_csvs(tmp_path):
    cfg = write(tmp_path, SMALL)
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    for name in ("result.csv", "trace.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = read_csv(tmp_path / "a" / "trace.csv")
    assert rows[0] == ["window", "sinr_db"] and len(rows) == 101
    meta = json.loads((tmp_path / "a" / "meta.json").read_text())
    assert meta["config"]["seed"] == 5 and "wall_s" in meta and "sinr_convention" in meta


def test_csv_number_format(tmp_path):
    cfg = write(tmp_path, SMALL)
    cli.main(["run", "--config", cfg, "--out", str(tmp_path / "o")])
    val = read_csv(tmp_path / "o" / "result.csv")[1][3]
    digits = val.lstrip("-").replace(".", "").split("e")[0].lstrip("0")
    assert "," not in val and len(digits) <= 12


def test_run_seed_overrides(tmp_path, monkeypatch):
    cfg = write(tmp_path, SMALL)
    monkeypatch.setenv("CIMX_SEED", "11")
    cli.main(["run", "--config", cfg, "--out", str(tmp_path / "env")])
    assert read_csv(tmp_path / "env" / "result.csv")[1][0] == "11"
    cli.main(["run", "--config", cfg, "--out", str(tmp_path / "flag"), "--seed", "12"])
    assert read_csv(tmp_path / "flag" / "result.csv")[1][0] == "12"


def test_run_empty_stream(tmp_path, caplog):
    cfg = write(tmp_path, dict(SMALL, N=0))
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert read_csv(tmp_path / "o" / "trace.csv") == [["window", "sinr_db"]]
    assert "N = 0" in caplog.text


def test_run_bad_json_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{oops")
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "<root>" in capsys.readouterr().err


def test_run_schema_error_exit_2(tmp_path, capsys):
    cfg = write(tmp_path, dict(SMALL, network={"mu_W": -1}))
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "network.mu_W" in capsys.readouterr().err


def test_run_divergence_exit_3(tmp_path, monkeypatch, capsys):
    def boom(cfg, keep_outputs=False):
        raise DivergenceError("non-finite output", iteration=3, sample_index=17)

    monkeypatch.setattr(cli, "run_experiment", boom)
    cfg = write(tmp_path, SMALL)
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
    assert "sample 17" in capsys.readouterr().err


def test_real_divergence_exit_3(tmp_path):
    doc = {"n": 2, "m": 2, "N": 50, "domain": {"kind": "hpolytope", "A": [[1, 0], [0, 1], [-1, 0], [0, -1]],
                                                   "b": [1, 1, 1, 1]},
           "source": {"type": "uniform"}, "dynamics": {"c_y": 1e200, "floor_y": 1e200}}
    assert cli.main(["run", "--config", write(tmp_path, doc), "--out", str(tmp_path / "o")]) == 3


# -- CLI: sweep ------------------------------------------------------------------------------


def test_sweep_counts_and_aggregate(tmp_path):
    cfg = write(tmp_path, dict(SMALL, N=600))
    out = tmp_path / "s"
    assert cli.main(["sweep", "--config", cfg, "--axis", "rho", "--values", "0,0.2,0.4,0.6,0.8",
                     "--realizations", "5", "--out", str(out)]) == 0
    rows = read_csv(out / "sweep.csv")
    agg = read_csv(out / "sweep_agg.csv")
    assert rows[0][:4] == ["axis_value", "realization", "seed", "status"]
    assert len(rows) == 26 and len(agg) == 6
    for a in agg[1:]:
        cells = [float(r[5]) for r in rows[1:] if r[0] == a[0]]
        assert float(a[4]) == pytest.approx(np.mean(cells), abs=1e-9)


def test_sweep_parallel_matches_serial(tmp_path):
    cfg = write(tmp_path, dict(SMALL, N=500))
    args = ["sweep", "--config", cfg, "--axis", "param", "--param", "network.mu_W", "--values", "0.01,0.03",
            "--realizations", "3"]
    cli.main(args + ["--out", str(tmp_path / "p1"), "--jobs", "1"])
    cli.main(args + ["--out", str(tmp_path / "p2"), "--jobs", "3"])

    def body(p):  # wall time is the only nondeterministic column
        return sorted(r[:-1] for r in read_csv(p / "sweep.csv")[1:])

    assert body(tmp_path / "p1") == body(tmp_path / "p2")


def test_sweep_cell_seeds_deterministic():
    assert cli.cell_seed(1, 2, 3) == cli.cell_seed(1, 2, 3)
    assert len({cli.cell_seed(1, i, r) for i in range(5) for r in range(5)}) == 25


def test_sweep_mixing_and_snr_axes(tmp_path):
    cfg = write(tmp_path, dict(SMALL, N=300))
    assert cli.main(["sweep", "--config", cfg, "--axis", "mixing_dist", "--values", "std_normal,laplace",
                     "--realizations", "1", "--out", str(tmp_path / "m")]) == 0
    assert [r[0] for r in read_csv(tmp_path / "m" / "sweep.csv")[1:]] == ["std_normal", "laplace"]
    assert cli.main(["sweep", "--config", cfg, "--axis", "snr", "--values", "10,inf",
                     "--realizations", "1", "--out", str(tmp_path / "n")]) == 0


def test_sweep_invalid_axis_value_exit_2(tmp_path):
    cfg = write(tmp_path, SMALL)
    assert cli.main(["sweep", "--config", cfg, "--axis", "rho", "--values", "0,0.95",
                     "--realizations", "1", "--out", str(tmp_path / "x")]) == 2
    assert cli.main(["sweep", "--config", cfg, "--axis", "param", "--values", "1",
                     "--realizations", "1", "--out", str(tmp_path / "x")]) == 2


def test_sweep_records_failed_cells(tmp_path, monkeypatch):
    real = cli.run_experiment

    def flaky(cfg, keep_outputs=False):
        if cfg.network["mu_W"] > 0.05:
            raise DivergenceError("non-finite output", iteration=1, sample_index=0)
        return real(cfg)

    monkeypatch.setattr(cli, "run_experiment", flaky)
    cfg = write(tmp_path, dict(SMALL, N=300))
    assert cli.main(["sweep", "--config", cfg, "--axis", "param", "--param", "network.mu_W",
                     "--values", "0.03,0.1", "--realizations", "2", "--out", str(tmp_path / "f")]) == 0
    rows = read_csv(tmp_path / "f" / "sweep.csv")[1:]
    assert [r[3] for r in rows].count("ok") == 2
    assert all(r[3].startswith("diverged") for r in rows if r[0] == "0.1")


# -- CLI: check ------------------------------------------------------------------------------


@pytest.mark.parametrize("suite", ["ldmi", "dynamics", "domains", "datagen", "metrics"])
def test_check_suites_pass(suite, capsys):
    assert cli.main(["check", suite]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_check_reports_failure(monkeypatch, capsys):
    from corinfomax import checks

    def broken():
        raise AssertionError("deliberate")

    monkeypatch.setitem(checks.CHECKS, "ldmi", [broken])
    assert cli.main(["check", "ldmi"]) == 1
    assert "deliberate" in capsys.readouterr().err
