import json

import pytest

from cli import build_parser, main
from conftest import load_preset


def test_alpha_bound(capsys):
    assert main(["alpha-bound", "--b-ev", "1e-15"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "alpha_upper_bound_eV=1e-15"
    assert lines[1].startswith("# borne supérieure")


def test_alpha_bound_zero(capsys):
    assert main(["alpha-bound", "--b-ev", "0"]) == 0
    assert "alpha_upper_bound_eV=0" in capsys.readouterr().out


def test_alpha_bound_rejects_negative(capsys):
    assert main(["alpha-bound", "--b-ev=-1"]) == 2
    assert "❌" in capsys.readouterr().err


def test_missing_config_is_a_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main(["evolve"])
    assert excinfo.value.code == 2


def test_unknown_preset(capsys):
    assert main(["dequantize", "--config", "no-such-preset"]) == 2
    assert "introuvable" in capsys.readouterr().err


def test_trace_check_config_is_optional():
    args = build_parser().parse_args(["trace-check", "--seed", "7"])
    assert args.config is None
    assert args.seed == 7


def write_config(tmp_path, name, cfg):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return str(path)


@pytest.mark.usefixtures("prefect_harness")
def test_increasing_alphas_are_a_usage_error(tmp_path, capsys):
    cfg = {**load_preset("quartic-demo"), "alphas": [1e-4, 1e-3, 1e-2]}
    path = write_config(tmp_path, "increasing", cfg)
    assert main(["dequantize", "--config", path, "--out", str(tmp_path / "run")]) == 2
    assert "alphas" in capsys.readouterr().err


@pytest.mark.usefixtures("prefect_harness")
def test_density_without_unit_trace_is_a_usage_error(tmp_path, capsys):
    cfg = {**load_preset("quartic-demo"), "density": {"re": [[0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.1]]}}
    path = write_config(tmp_path, "trace", cfg)
    assert main(["dequantize", "--config", path, "--out", str(tmp_path / "run")]) == 2
    assert "InvalidStateError" in capsys.readouterr().err
