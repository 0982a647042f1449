import csv
import json
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specband import cli
from specband.errors import ConfigError


def rows(path):
    return list(csv.reader(open(path)))[1:]


def test_parse_minimal():
    cfg = cli.parse_config('{"command": "spectrum", "model": "shift"}')
    assert cfg.command == "spectrum" and cfg.model == {"id": "shift"}


def test_parse_rejects_decimal_alpha():
    with pytest.raises(ConfigError, match="must be irrational"):
        cli.parse_config('{"command": "spectrum", "model": {"id": "sturmian", "alpha": 0.5}}')


def test_parse_rejects_negative_N():
    with pytest.raises(ConfigError, match="N must be"):
        cli.parse_config('{"command": "spectrum", "model": "shift", "params": {"N": -4}}')


def test_parse_lists_every_violation():
    text = json.dumps({"command": "spectrum", "model": "nope", "params": {"N": 0, "foo": 1}, "bogus": 1})
    with pytest.raises(ConfigError) as info:
        cli.parse_config(text)
    assert len(info.value.violations) == 4


def test_parse_syntax_error():
    with pytest.raises(ConfigError, match="syntax"):
        cli.parse_config("{command: spectrum")


def test_parse_experiment_params():
    cfg = cli.parse_config(json.dumps({"command": "experiment", "experiment": "constancy",
                                       "model": "sturmian-golden", "params": {"N": 64}}))
    assert cfg.experiment == "constancy"
    with pytest.raises(ConfigError):
        cli.parse_config(json.dumps({"command": "experiment", "experiment": "constancy",
                                     "params": {"N": 64, "what": 1}}))


MODELS = st.sampled_from([{"id": "shift"}, {"id": "sturmian", "alpha": "pim3", "lambda": 0.5},
                          {"id": "sturmian", "alpha": {"cf": [0, 2], "period": [1, 3]}},
                          {"id": "almost-mathieu", "lambda": 2.0}, {"id": "periodic", "word": "0110"}])


@given(MODELS, st.integers(1, 500), st.sampled_from(["zero", "periodic"]), st.sampled_from(["csv", "json"]),
       st.text("abc_", min_size=1, max_size=8))
@settings(max_examples=50, deadline=None)
def test_roundtrip(model, N, mode, fmt, out):
    cfg = cli.validate({"command": "spectrum", "model": model, "params": {"N": N, "mode": mode},
                        "format": fmt, "out": out})
    assert cli.parse_config(cli.serialize(cfg)) == cfg


def test_roundtrip_experiment():
    cfg = cli.validate({"command": "experiment", "experiment": "inclusion", "model": "sturmian-golden",
                        "params": {"N": 128, "q_list": [1, 2, 3], "grid": {"step": 0.05}}})
    assert cli.parse_config(cli.serialize(cfg)) == cfg


def test_spectrum_shift(tmp_path):
    assert cli.run(["spectrum", "--model", "shift", "--N", "8", "--out", str(tmp_path)]) == 0
    r = rows(tmp_path / "spectrum.csv")
    assert len(r) == 17 and all(float(a) == 0.0 and float(b) == 0.0 for a, b, _ in r)


def test_floquet_shift(tmp_path):
    assert cli.run(["floquet", "--model", "shift", "--q", "1", "--ntheta", "8", "--out", str(tmp_path)]) == 0
    z = np.array([complex(float(a), float(b)) for a, b, _ in rows(tmp_path / "floquet.csv")])
    assert z.size == 8 and np.allclose(np.abs(z), 1.0)


def test_pseudospec_command(tmp_path):
    code = cli.run(["pseudospec", "--model", "sturmian-golden", "--N", "16", "--step", "0.25",
                    "--out", str(tmp_path)])
    assert code == 0
    assert len(rows(tmp_path / "pseudospec.csv")) == 21 * 21
    assert json.load(open(tmp_path / "pseudospec.json"))["step"] == 0.25


def test_orbit_command(tmp_path):
    assert cli.run(["orbit", "--model", "sturmian-golden", "--a", "1", "--b", "5", "--n", "3", "--L", "1000",
                    "--out", str(tmp_path)]) == 0
    doc = json.load(open(tmp_path / "orbit.json"))
    assert doc["window"] == "10110" and doc["complexity"] == 4 and len(doc["missing"]) == 4


def test_witness_command(tmp_path):
    assert cli.run(["witness", "--model", "periodic", "--h-min", "1", "--H", "10", "--out", str(tmp_path)]) == 0
    doc = json.load(open(tmp_path / "witness.json"))
    assert doc["self_witnesses"] == [-10, -8, -6, -4, -2, 2, 4, 6, 8, 10] and doc["self_similar"]


def test_witness_one_zero(tmp_path):
    assert cli.run(["witness", "--model", "one-zero", "--h-min", "10", "--H", "100", "--out", str(tmp_path)]) == 0
    doc = json.load(open(tmp_path / "witness.json"))
    assert doc["count"] == 0 and doc["self_similar"] is False and doc["limit_windows"] == 1


def test_experiment_exit_codes(tmp_path):
    ok = cli.run(["experiment", "induced-system", "--model", "example-7-2", "--H", "1000", "--h-min", "10",
                  "--out", str(tmp_path)])
    assert ok == 0 and json.load(open(tmp_path / "induced-system.json"))["pass"]
    bad = cli.run(["experiment", "pseudoergodic", "--model", "full-shift", "--N", "64", "--words", "0",
                   "--no-doubling", "--out", str(tmp_path / "pe")])
    assert bad == 1


def test_config_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"command": "spectrum", "model": "shift", "params": {"N": 3}}))
    assert cli.run(["spectrum", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
    assert len(rows(tmp_path / "o" / "spectrum.csv")) == 7


def test_exit_codes_errors(tmp_path, capsys):
    assert cli.run(["spectrum", "--model", "sturmian", "--alpha", "0.5", "--out", str(tmp_path)]) == 2
    assert "must be irrational" in capsys.readouterr().err
    assert cli.run(["spectrum", "--model", "sturmian-golden", "--mode", "periodic", "--out", str(tmp_path)]) == 2
    assert cli.run(["spectrum", "--model", "shift", "--N", "3000", "--out", str(tmp_path)]) == 3
    assert cli.run(["frobnicate"]) == 2


def test_no_writes_outside_out(tmp_path, monkeypatch):
    work = tmp_path / "cwd"
    work.mkdir()
    monkeypatch.chdir(work)
    out = tmp_path / "out"
    cli.run(["spectrum", "--model", "shift", "--N", "4", "--out", str(out)])
    cli.run(["floquet", "--model", "sturmian-golden", "--q", "5", "--ntheta", "8", "--out", str(out)])
    cli.run(["experiment", "induced-system", "--model", "example-7-1", "--N", "8", "--step", "0.5",
             "--out", str(out)])
    assert os.listdir(work) == []
    assert set(os.listdir(tmp_path)) == {"cwd", "out"}


def test_bitwise_reproducible(tmp_path):
    for sub in ("a", "b"):
        cli.run(["floquet", "--model", "sturmian-golden", "--q", "8", "--ntheta", "16", "--out", str(tmp_path / sub)])
    assert open(tmp_path / "a" / "floquet.csv", "rb").read() == open(tmp_path / "b" / "floquet.csv", "rb").read()


def test_json_format(tmp_path):
    assert cli.run(["floquet", "--model", "shift", "--ntheta", "8", "--format", "json", "--out", str(tmp_path)]) == 0
    doc = json.load(open(tmp_path / "floquet.json"))
    assert len(doc["points"]) == 8
