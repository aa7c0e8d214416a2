import json

import numpy as np
import pytest

from stbc.cli import main


def run(capsys, *argv):
    status = main(list(argv))
    return status, capsys.readouterr()


def test_encode_zero(capsys):
    status, out = run(capsys, "encode", "--code", "proposed2x2", "--symbols", "0,0,0,0")
    assert status == 0
    rows = [r.split() for r in out.out.strip().splitlines()]
    assert len(rows) == 2 and all(float(v.split("+")[1]) == 0 for r in rows for v in r)


def test_encode_json(capsys):
    status, out = run(capsys, "encode", "--code", "alamouti", "--symbols", "1,0", "--json")
    d = json.loads(out.out)
    np.testing.assert_array_equal(d["real"], np.eye(2))


def test_encode_wrong_length(capsys):
    status, out = run(capsys, "encode", "--code", "golden", "--symbols", "1,2")
    assert status == 1 and "4 symbols" in out.err


def test_mindet(capsys):
    status, out = run(capsys, "analyze", "mindet", "--code", "proposed2x2", "--qam", "4")
    assert status == 0 and out.out.strip() == "3.200000"


def test_mindet_budget(capsys):
    status, out = run(capsys, "analyze", "mindet", "--code", "proposed4x2", "--qam", "16")
    assert status == 2 and "budget" in out.err


def test_rpattern(capsys):
    status, out = run(capsys, "analyze", "rpattern", "--code", "golden", "--trials", "5")
    assert status == 0 and out.out.splitlines()[0] == "a 0 a 0 a a a a"


def test_orthogonality_command(capsys):
    status, out = run(capsys, "analyze", "theorem1", "--code", "alamouti", "--trials", "5")
    assert status == 0 and json.loads(out.out)["max_h_violation"] < 1e-10


def test_generator(capsys):
    status, out = run(capsys, "analyze", "generator", "--code", "proposed2x2")
    assert status == 0 and "max |G^T G - I|" in out.out


def test_simulate_csv(capsys, tmp_path):
    js = tmp_path / "meta.json"
    status, out = run(capsys, "simulate", "cer", "--code", "proposed4x2", "--decoder", "fast",
                      "--qam", "4", "--snr", "4:2:8", "--trials", "200", "--seed", "7",
                      "--json", str(js))
    assert status == 0
    lines = out.out.splitlines()
    assert lines[0] == "snr_db,trials,errors,cer,ci_low,ci_high,avg_metric_computations"
    assert len(lines) == 4
    meta = json.loads(js.read_text())
    assert "N0" in meta["snr_definition"] and len(meta["points"]) == 3


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["simulate", "cer", "--code", "golden"],
    ["simulate", "cer", "--code", "golden", "--snr", "a:b"],
    ["simulate", "cer", "--code", "golden", "--snr", "10", "--qam", "cross32"],
    ["encode", "--code", "nope", "--symbols", "0"],
    ["verify", "--only", "12"],
])
def test_usage_errors_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == 1


def test_verify_subset(capsys):
    status, out = run(capsys, "verify", "--only", "5")
    assert status == 0 and "[PASS] criterion  5" in out.out
