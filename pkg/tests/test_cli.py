import json
from collections import Counter

import pytest

from desklab import cli
from desklab.config import ConfigError, parse_config
from desklab.emit import emit, round_sig
from desklab.runner import collect, replay, run, summarize
from desklab.seeding import trial_seed


def cfg(experiment, **kw):
    return json.dumps({"schema_version": 1, "experiment": experiment, **kw})


def write(tmp_path, text, name="c.json"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# ----------------------------------------------------------------- config


def test_minimal_config_defaults_echoed():
    c = parse_config(cfg("inverse_epr", trials=1000, master_seed=42))
    d = c.to_dict()
    assert d["trials"] == 1000 and d["master_seed"] == 42
    assert d["output"] == {"path": None, "format": "json"}
    h = parse_config(cfg("hardy_chain")).params
    assert h == {"n_atoms": 3, "measure_until_found": True}


@pytest.mark.parametrize(
    "text, key",
    [
        (cfg("inverse_epr", trials=0), "trials"),
        (cfg("inverse_epr", trails=5), "trails"),
        (cfg("hardy_chain", params={"n_atom": 3}), "params.n_atom"),
        (cfg("hardy_chain", params={"n_atoms": 13}), "params.n_atoms"),
        (cfg("inverse_epr", output={"format": "xml"}), "output.format"),
        (cfg("teleport"), "experiment"),
        (json.dumps({"experiment": "inverse_epr"}), "schema_version"),
        (cfg("inverse_epr", schema_version=2), "schema_version"),
        (cfg("bell_table", params={"axes1": ["x", "w"]}), "params.axes1[1]"),
        (cfg("bell_table", params={"axes1": [[1, 1, 0], "x"]}), "params.axes1[0]"),
        (cfg("inverse_epr", master_seed=-1), "master_seed"),
        (cfg("inverse_epr", trials=True), "trials"),
        ("{not json", "<root>"),
    ],
)
def test_config_errors_name_the_key(text, key):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.path == key
    assert str(err.value).startswith(key)


# ----------------------------------------------------------------- runner


def test_summary_matches_trial_records():
    c = parse_config(cfg("inverse_epr", trials=500, master_seed=3))
    s = run(c)
    tally = Counter(replay(c, i).payload[0] for i in range(c.trials))
    assert [s.counts[k] for k in ("scattered", "disrupted_entangled", "interference_intact")] == [
        tally[0], tally[1], tally[2]
    ]
    assert replay(c, 7).seed == trial_seed(3, 7)


def test_frequencies_sum_to_one():
    for exp in ("inverse_epr", "hardy_chain", "mixed_measurement", "bell_table"):
        s = run(parse_config(cfg(exp, trials=300, master_seed=1)))
        assert abs(sum(s.frequencies.values()) - 1) < 1e-12
        assert sum(s.counts.values()) == 300


@pytest.mark.parametrize("exp", ["inverse_epr", "hardy_chain", "bell_table", "billiard_echo"])
def test_parallel_equals_serial(exp):
    trials = 3 if exp == "billiard_echo" else 400
    c = parse_config(cfg(exp, trials=trials, master_seed=9))
    serial = emit(summarize(c, collect(c, 1)), "json")
    parallel = emit(summarize(c, collect(c, 3)), "json")
    assert serial == parallel


def test_hardy_run_close_to_7_over_32():
    s = run(parse_config(cfg("hardy_chain", trials=20000, master_seed=42)))
    f, se = s.frequencies["dark"], s.stderr["dark"]
    assert abs(f - 7 / 32) < 4 * se
    assert s.derived["dark_with_intersecting_fraction"] == 1.0


# ------------------------------------------------------------------- emit


def test_bell_csv_schema():
    s = run(parse_config(cfg("bell_table", trials=900, master_seed=2)))
    lines = emit(s, "csv").decode().splitlines()
    assert lines[0] == "axis1,axis2,trials,E,stderr"
    assert len(lines) == 10
    assert [tuple(l.split(",")[:2]) for l in lines[1:4]] == [("x", "x"), ("x", "y"), ("x", "z")]


def test_echo_json_fields():
    s = run(parse_config(cfg("billiard_echo", master_seed=0)))
    d = json.loads(emit(s, "json"))
    assert {"K", "echo_error", "perturbed_echo_error"} <= d.keys()
    assert d["K"] == 200
    assert d["perturbed_echo_error"] > 10 * d["echo_error"]


def test_json_round_trip_exact():
    s = run(parse_config(cfg("mixed_measurement", trials=2000, master_seed=4)))
    d = json.loads(emit(s, "json"))
    for k, v in s.frequencies.items():
        assert d["frequencies"][k] == round_sig(v)
        assert d["stderr"][k] == round_sig(s.stderr[k])
    assert d["derived"]["mixed_fraction"] == round_sig(s.derived["mixed_fraction"])


def test_round_sig():
    assert round_sig(1 / 3) == 0.333333333333
    assert round_sig(float("nan")) is None
    assert round_sig(123456789012345.0) == 123456789012000.0


def test_break_csv_columns():
    s = run(parse_config(cfg("billiard_break", trials=2, params={"duration": 100.0})))
    lines = emit(s, "csv").decode().splitlines()
    assert lines[0] == "time,entropy,energy_share_spread"
    assert len(lines) == 1 + 11


# -------------------------------------------------------------------- CLI


def test_cli_run_byte_identical(tmp_path, monkeypatch):
    monkeypatch.delenv(cli.SEED_ENV, raising=False)
    path = write(tmp_path, cfg("inverse_epr", trials=2000, master_seed=42))
    out = str(tmp_path / "o.json")
    assert cli.main(["run", "--config", path, "--out", out]) == 0
    first = open(out, "rb").read()
    assert cli.main(["run", "--config", path, "--out", out]) == 0
    assert open(out, "rb").read() == first


def test_cli_overrides_and_env(tmp_path, monkeypatch, capsys):
    path = write(tmp_path, cfg("inverse_epr", trials=10, master_seed=1))
    monkeypatch.setenv(cli.SEED_ENV, "77")
    assert cli.load(path).master_seed == 77
    assert cli.load(path, seed=5).master_seed == 5
    assert cli.load(path, trials=3, fmt="csv").to_dict()["output"]["format"] == "csv"
    monkeypatch.setenv(cli.SEED_ENV, "abc")
    assert cli.main(["validate", "--config", path]) == 2
    assert cli.SEED_ENV in capsys.readouterr().err


def test_cli_exit_codes(tmp_path, monkeypatch):
    monkeypatch.delenv(cli.SEED_ENV, raising=False)
    good = write(tmp_path, cfg("hardy_chain", trials=10))
    assert cli.main(["validate", "--config", good]) == 0
    assert cli.main(["validate", "--config", str(tmp_path / "missing.json")]) == 2
    bad = write(tmp_path, cfg("hardy_chain", trials=0), "bad.json")
    assert cli.main(["run", "--config", bad]) == 2
    assert cli.main(["run", "--config", good, "--trials", "0"]) == 2
    assert cli.main(["run", "--config", good, "--workers", "0"]) == 2
    assert cli.main(["frobnicate"]) == 2
    boom = write(tmp_path, cfg("billiard_echo", params={"perturbed_ball": 99}), "boom.json")
    assert cli.main(["run", "--config", boom, "--out", str(tmp_path / "x")]) == 3


def test_cli_stdout_csv(tmp_path, monkeypatch, capsysbinary):
    monkeypatch.delenv(cli.SEED_ENV, raising=False)
    path = write(tmp_path, cfg("hardy_chain", trials=100))
    assert cli.main(["run", "--config", path, "--format", "csv"]) == 0
    out = capsysbinary.readouterr().out.decode().splitlines()
    assert out[0] == "classification,count,frequency,stderr"
    assert [l.split(",")[0] for l in out[1:]] == ["scattered", "bright", "dark"]
