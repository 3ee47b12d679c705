import csv
import json

import numpy as np
import pytest

from cvqss import cli
from cvqss.config import PRESETS, ProtocolConfig, load_preset, parse_config, preset_path, serialize_config
from cvqss.errors import ConfigError


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def write_config(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


@pytest.mark.parametrize("name", PRESETS)
def test_presets_round_trip(name):
    text = preset_path(name).read_text()
    once = serialize_config(parse_config(text))
    assert once == text
    assert serialize_config(parse_config(once)) == once


def test_cc23_pair_has_zero_holevo(tmp_path):
    assert cli.main(["--config", "cc-23", "--command", "rate", "--out", str(tmp_path)]) == 0
    r = rows(tmp_path / "cc-23_2-3_rate.csv")
    assert list(r[0]) == ["sigma", "I_DA", "holevo", "K_cc"]
    assert float(r[0]["sigma"]) == pytest.approx(0.1) and float(r[-1]["sigma"]) == pytest.approx(2.0)
    assert all(float(x["holevo"]) == 0.0 for x in r)


def test_cq35_tau_is_one(tmp_path):
    assert cli.main(["--config", "cq-35", "--command", "rate", "--out", str(tmp_path)]) == 0
    for collab in ("1-2-3", "1-3-4"):
        r = rows(tmp_path / f"cq-35_{collab}_rate.csv")
        assert list(r[0]) == list(cli.CQ_COLUMNS)
        sig = [float(x["sigma"]) for x in r]
        assert sig == sorted(sig)
        assert all(abs(float(x["tau"]) - 1) < 1e-9 for x in r)


def test_negativity_csv(tmp_path):
    assert cli.main(["--config", "qq-23", "--command", "negativity", "--out", str(tmp_path)]) == 0
    r = rows(tmp_path / "qq-23_1-2_negativity.csv")
    assert list(r[0]) == ["sigma", "negativity"]
    assert len(r) == 60


def test_floats_have_17_significant_digits(tmp_path):
    cli.main(["--config", "cc-35", "--command", "rate", "--out", str(tmp_path)])
    first = (tmp_path / "cc-35_1-2-3_rate.csv").read_text().splitlines()[1].split(",")
    assert first[0] == format(0.05, ".17g")


def test_output_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["--config", "cq-23", "--command", "rate", "--out", str(a)])
    cli.main(["--config", "cq-23", "--command", "rate", "--out", str(b), "--workers", "4"])
    for f in sorted(a.iterdir()):
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_validate_is_deterministic(tmp_path):
    args = ["--config", "cq-23", "--command", "validate", "--shots", "20000", "--seed", "5"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "cq-23_validate.json").read_bytes()
    assert a == (tmp_path / "b" / "cq-23_validate.json").read_bytes()
    report = json.loads(a)
    assert report["pass"] is True
    assert set(report["checks"][0]) == {"check", "analytic", "empirical", "stderr", "pass"}


def test_validation_failure_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "SE_MULTIPLE", -1.0)
    code = cli.main(["--config", "qq-35", "--command", "validate", "--shots", "1000", "--out", str(tmp_path)])
    assert code == 4


def test_empty_sweep_is_config_error(tmp_path, capsys):
    data = load_preset("cc-23").to_dict()
    data["sweep"]["steps"] = 0
    code = cli.main(["--config", write_config(tmp_path, data), "--command", "rate", "--out", str(tmp_path)])
    assert code == 2
    assert "sweep.steps" in capsys.readouterr().err


def test_degenerate_extraction_is_numeric_error(tmp_path, capsys):
    data = load_preset("cq-23").to_dict()
    # no dealer edges: nothing to extract
    data["edges"] = [e for e in data["edges"] if 0 not in (e["i"], e["j"])]
    code = cli.main(["--config", write_config(tmp_path, data), "--command", "rate", "--out", str(tmp_path)])
    assert code == 3
    assert "collaboration" in capsys.readouterr().err


def test_unphysical_override_is_config_error(tmp_path):
    code = cli.main(["--config", "cq-23", "--command", "rate", "--sigma-d", "-1", "--out", str(tmp_path)])
    assert code == 2
    code = cli.main(["--config", "cc-23", "--command", "rate", "--sigma-d", "1", "--out", str(tmp_path)])
    assert code == 2


def test_sigma_d_override_changes_rates(tmp_path):
    cli.main(["--config", "cq-23", "--command", "rate", "--out", str(tmp_path / "a")])
    cli.main(["--config", "cq-23", "--command", "rate", "--sigma-d", "0.5", "--out", str(tmp_path / "b")])
    a = rows(tmp_path / "a" / "cq-23_1-2_rate.csv")
    b = rows(tmp_path / "b" / "cq-23_1-2_rate.csv")
    assert a[5]["V"] != b[5]["V"]


def test_wrong_command_for_task(tmp_path):
    assert cli.main(["--config", "qq-23", "--command", "rate", "--out", str(tmp_path)]) == 2
    assert cli.main(["--config", "cc-23", "--command", "negativity", "--out", str(tmp_path)]) == 2


def test_missing_config_file(tmp_path):
    assert cli.main(["--config", str(tmp_path / "nope.json"), "--command", "rate"]) == 2


@pytest.mark.parametrize(
    "mutate,field",
    [
        (lambda d: d.pop("dealer_mode"), "dealer_mode"),
        (lambda d: d["collaborations"][0].pop("output_mode"), "output_mode"),
        (lambda d: d["edges"].append({"i": 1, "j": 1, "weight": 1.0}), "edges"),
        (lambda d: d.update(task="cx"), "task"),
        (lambda d: d["collaborations"][0]["gates"].append({"kind": "cphase", "modes": [0, 1], "weight": 1.0}), "gates"),
    ],
)
def test_config_errors_name_the_field(mutate, field):
    data = load_preset("cq-23").to_dict()
    mutate(data)
    with pytest.raises(ConfigError, match=field):
        ProtocolConfig.from_dict(data)


def test_cc_needs_encodings():
    data = load_preset("cc-23").to_dict()
    data.pop("encodings")
    with pytest.raises(ConfigError, match="encodings"):
        ProtocolConfig.from_dict(data)


def test_per_mode_sigma_without_sweep(tmp_path):
    data = load_preset("cc-23").to_dict()
    data.pop("sweep")
    data["sigma"] = [0.5, 0.5, 0.5]
    assert cli.main(["--config", write_config(tmp_path, data), "--command", "rate", "--out", str(tmp_path)]) == 0
    r = rows(tmp_path / "cc-23_1-2_rate.csv")
    assert len(r) == 1 and r[0]["sigma"] == "nan"
    data["sweep"] = {"sigma_min": 0.1, "sigma_max": 1.0, "steps": 3}
    with pytest.raises(ConfigError, match="sigma"):
        ProtocolConfig.from_dict(data)


def test_log_sweep_grid():
    data = load_preset("cc-23").to_dict()
    data["sweep"] = {"sigma_min": 0.1, "sigma_max": 10.0, "steps": 3, "log_scale": True}
    assert np.allclose(ProtocolConfig.from_dict(data).sigma_grid(), [0.1, 1.0, 10.0])
