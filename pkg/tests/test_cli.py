import json
import subprocess
import sys

import numpy as np
import pytest

from ionvac import __version__
from ionvac.cli import main
from ionvac.experiments import ConfigError, parse_grid, resolve
from ionvac.report import dumps_csv, dumps_json


def _run(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def _csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    meta = json.loads(lines[0][2:])
    return meta, lines[1].split(","), [line.split(",") for line in lines[2:]]


def test_csv_header_and_precision():
    text = dumps_csv({"n_ions": 2}, ["a", "b", "c"], [(1, 0.1, True)])
    lines = text.splitlines()
    meta = json.loads(lines[0][2:])
    assert meta["version"] == __version__
    assert meta["config"] == {"n_ions": 2}
    assert meta["conventions"]["covariance_ordering"] == "xxpp"
    assert lines[1] == "a,b,c"
    assert lines[2] == "1,0.10000000000000001,1"


def test_json_encodes_numpy_and_complex():
    doc = json.loads(dumps_json({}, {"m": np.eye(2), "z": 1 + 2j, "k": np.int64(3)}))
    assert doc["result"] == {"k": 3, "m": [[1.0, 0.0], [0.0, 1.0]], "z": {"im": 2.0, "re": 1.0}}


def test_modes_two_ions(tmp_path, capsys):
    code, out, _ = _run(["modes", "--n-ions", "2", "--out", str(tmp_path)], capsys)
    assert code == 0
    meta, cols, rows = _csv(tmp_path / "modes_N2.csv")
    assert cols == ["mode", "frequency", "v1", "v2"]
    assert meta["config"]["n_ions"] == 2
    assert float(rows[0][1]) == pytest.approx(1.0, abs=1e-12)
    assert rows[1][1].startswith("1.7320508")
    assert json.loads(out)["frequencies"][1] == pytest.approx(np.sqrt(3))
    _, _, pos = _csv(tmp_path / "positions_N2.csv")
    assert float(pos[1][1]) == pytest.approx(2 ** (-2 / 3), abs=1e-14)


def test_modes_single_ion(tmp_path, capsys):
    code, _, _ = _run(["modes", "--n-ions", "1", "--out", str(tmp_path)], capsys)
    assert code == 0
    _, _, rows = _csv(tmp_path / "modes_N1.csv")
    assert rows == [["1", "1", "1"]]


def test_modes_zero_ions_is_config_error(tmp_path, capsys):
    code, _, err = _run(["modes", "--n-ions", "0", "--out", str(tmp_path)], capsys)
    assert code == 2
    assert json.loads(err) == {
        "error": "config",
        "field": "n_ions",
        "message": "n_ions: must be an integer >= 1, got 0",
    }


@pytest.mark.parametrize(
    "argv, field",
    [
        (["eta", "--probes", "15,6"], "probes"),
        (["eta", "--duration", "-1"], "duration"),
        (["eta", "--detuning-grid", "a:b:c"], "detuning_grid"),
        (["swap-eval", "--sequence", "Q:1"], "sequence"),
        (["swap-opt", "--pairs", "0"], "pairs"),
        (["swap-eval", "--fock-dim", "1"], "fock_dim"),
        (["negativity", "--sizes", "11"], "sizes"),
    ],
)
def test_config_errors_name_field(argv, field, tmp_path, capsys):
    code, _, err = _run(argv + ["--out", str(tmp_path)], capsys)
    assert code == 2
    assert json.loads(err)["field"] == field
    assert not any(tmp_path.iterdir())


def test_usage_errors(capsys):
    code, _, err = _run(["nosuch"], capsys)
    assert code == 2 and json.loads(err)["error"] == "usage"
    code, _, err = _run(["modes", "--n-ions", "two"], capsys)
    assert code == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_ions": 3, "format": "json"}))
    code, _, _ = _run(["modes", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 0
    doc = json.loads((tmp_path / "modes_N3.json").read_text())
    assert doc["header"]["config"]["n_ions"] == 3
    freqs = [r["frequency"] for r in doc["result"]["rows"]]
    assert freqs == pytest.approx([1, np.sqrt(3), np.sqrt(29 / 5)], abs=1e-12)


def test_config_file_unknown_field(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_ion": 3}))
    code, _, err = _run(["modes", "--config", str(cfg)], capsys)
    assert code == 2 and json.loads(err)["field"] == "n_ion"


def test_cli_overrides_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_ions": 3}))
    _run(["modes", "--config", str(cfg), "--n-ions", "4", "--out", str(tmp_path)], capsys)
    assert (tmp_path / "modes_N4.csv").exists()


def test_missing_config_file(capsys):
    code, _, err = _run(["modes", "--config", "/nonexistent/cfg.json"], capsys)
    assert code == 2 and json.loads(err)["field"] == "config"


def test_numerical_failure_exit_code(tmp_path, capsys):
    code, _, err = _run(
        ["swap-eval", "--sequence", "V:3,W:3", "--fock-dim", "4", "--out", str(tmp_path)], capsys
    )
    assert code == 3
    assert json.loads(err)["error"] == "numerical"


def test_two_ion(tmp_path, capsys):
    code, out, _ = _run(["two-ion", "--out", str(tmp_path)], capsys)
    assert code == 0
    res = json.loads(out)
    assert res["lambda"] == pytest.approx(0.5189, abs=5e-4)
    assert res["entropy_ebits"] == pytest.approx(0.136, abs=1e-3)
    assert res["e_beta"] == pytest.approx(0.1366, abs=1e-3)


def test_entropy_vs_n_anchor(tmp_path, capsys):
    _run(["two-ion", "--out", str(tmp_path)], capsys)
    code, _, _ = _run(["entropy-vs-n", "--max-n", "2", "--out", str(tmp_path)], capsys)
    assert code == 0
    _, cols, rows = _csv(tmp_path / "entropy_vs_n.csv")
    ref = json.loads((tmp_path / "two_ion.json").read_text())["result"]["entropy_ebits"]
    assert cols == ["N", "entropy"]
    assert len(rows) == 1
    assert float(rows[0][1]) == pytest.approx(ref, abs=1e-15)


def test_swap_eval(tmp_path, capsys):
    seq = "V:0.31,W:0.38,V:0.50,W:0.39,V:0.53,W:0.16"
    code, _, _ = _run(["swap-eval", "--sequence", seq, "--out", str(tmp_path)], capsys)
    assert code == 0
    res = json.loads((tmp_path / "swap_eval.json").read_text())["result"]
    assert res["ratio_to_ground_entropy"] == pytest.approx(0.97, abs=0.01)
    assert res["purity"] == pytest.approx(0.997, abs=0.003)
    _, cols, rows = _csv(tmp_path / "swap_rho_abs.csv")
    assert cols == ["row", "col", "abs_rho"] and len(rows) == 16


def test_eta_has_entangled_region(tmp_path, capsys):
    code, _, _ = _run(
        ["eta", "--n-ions", "20", "--probes", "6,15", "--duration", "0.8",
         "--detuning-grid", "3:7:41", "--out", str(tmp_path)],
        capsys,
    )
    assert code == 0
    meta, cols, rows = _csv(tmp_path / "eta_N20_6-15_T0.8.csv")
    assert meta["config"]["probes"] == [6, 15]
    eta = np.array([float(r[1]) for r in rows])
    assert eta.max() > 1
    assert {r[3] for r in rows} == {"0", "1"}


def test_commutator_and_propagate(tmp_path, capsys):
    args = ["--n-ions", "9", "--slices", "0,0.4,0.8", "--out", str(tmp_path)]
    assert _run(["commutator", *args], capsys)[0] == 0
    assert _run(["propagate", *args], capsys)[0] == 0
    meta, cols, rows = _csv(tmp_path / "commutator_N9.csv")
    assert meta["config"]["reference_ion"] == 5
    assert cols == ["ion_index", "time", "f"] and len(rows) == 27
    _, _, prop = _csv(tmp_path / "propagation_N9.csv")
    np.testing.assert_allclose(
        [float(r[2]) for r in rows], [float(r[2]) for r in prop], atol=1e-12
    )


def test_negativity(tmp_path, capsys):
    code, _, _ = _run(["negativity", "--n-ions", "8", "--sizes", "1,2", "--out", str(tmp_path)], capsys)
    assert code == 0
    _, _, rows = _csv(tmp_path / "negativity_N8.csv")
    assert len(rows) == 7 + 5


def test_swap_opt_small(tmp_path, capsys):
    code, out, _ = _run(
        ["swap-opt", "--pairs", "1", "--restarts", "2", "--fock-dim", "10", "--out", str(tmp_path)],
        capsys,
    )
    assert code == 0
    assert json.loads(out)["sequence"].startswith("V:")
    assert (tmp_path / "swap_opt_p1.json").exists()


def test_outputs_are_byte_identical(tmp_path, capsys):
    for run in ("a", "b"):
        out = str(tmp_path / run)
        _run(["swap-opt", "--pairs", "1", "--restarts", "2", "--fock-dim", "10", "--out", out], capsys)
        _run(["eta", "--detuning-grid", "-2:2:5", "--out", out], capsys)
        _run(["modes", "--n-ions", "5", "--out", out], capsys)
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_parse_grid():
    assert parse_grid("0:1:3", "g") == [0.0, 0.5, 1.0]
    assert parse_grid("1, 2.5", "g") == [1.0, 2.5]
    with pytest.raises(ConfigError):
        parse_grid("1:2", "g")


def test_resolve_defaults():
    cfg = resolve("eta")
    assert cfg.n_ions == 20 and cfg.probes == (6, 15) and cfg.duration == 0.8
    assert len(cfg.detuning_grid) == 321


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ionvac.cli", "modes", "--n-ions", "0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
    assert json.loads(proc.stderr)["field"] == "n_ions"
