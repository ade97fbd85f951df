import json

import numpy as np
import pytest

from mpsup.cli import main
from mpsup.exceptions import InvalidInput
from mpsup.gallery import ghz, w_state
from mpsup.io import (
    canonical_form_from_dict,
    canonical_form_to_dict,
    encode_complex,
    load_mps,
    load_msv,
    mps_from_dict,
    mps_to_dict,
    save_mps,
    save_msv,
    schmidt_csv,
)
from mpsup.mps import MPSChain, TIMPS, materialize
from mpsup.permlab import schmidt_spectrum
from mpsup.structure import canonical_form

from conftest import random_tensor


def test_mps_json_round_trip(tmp_path, rng):
    A = random_tensor(rng, 2, 3)
    save_mps(tmp_path / "a.json", TIMPS(A), 5)
    mps, N = load_mps(tmp_path / "a.json")
    assert N == 5 and np.array_equal(mps.A, A)
    sites = [random_tensor(rng, 2, 2), random_tensor(rng, 2, 2, 1), random_tensor(rng, 2, 1, 2)]
    chain = MPSChain(sites, rng.normal(size=(2, 2)))
    obj = json.loads(json.dumps(mps_to_dict(chain)))
    back, N = mps_from_dict(obj)
    assert N == 3
    assert np.allclose(materialize(back).amplitudes, materialize(chain).amplitudes)


def test_mps_json_errors(tmp_path):
    with pytest.raises(InvalidInput):
        mps_from_dict({"kind": "ti"})
    with pytest.raises(InvalidInput):
        mps_from_dict({"kind": "other", "d": 1, "tensors": [encode_complex(np.ones((1, 1, 1)))]})
    bad = {"kind": "chain", "d": 2, "tensors": [encode_complex(np.ones((2, 1, 2))), encode_complex(np.ones((2, 1, 1)))]}
    with pytest.raises(InvalidInput, match="bond mismatch at site 2"):
        mps_from_dict(bad)
    (tmp_path / "x.json").write_text("{not json")
    with pytest.raises(InvalidInput):
        load_mps(tmp_path / "x.json")


def test_msv_round_trip(tmp_path, rng):
    psi = w_state(5, normalized=True)
    save_msv(tmp_path / "w.msv", psi)
    raw = (tmp_path / "w.msv").read_bytes()
    assert raw[:7] == b"MPSUP1\0"
    assert len(raw) == 7 + 8 + 16 * 32
    back = load_msv(tmp_path / "w.msv")
    assert back.d == 2 and back.N == 5 and np.array_equal(back.amplitudes, psi.amplitudes)
    (tmp_path / "bad.msv").write_bytes(raw[:-8])
    with pytest.raises(InvalidInput):
        load_msv(tmp_path / "bad.msv")


def test_canonical_form_json(rng):
    cf = canonical_form(ghz(3, 1)[1].A)
    obj = json.loads(json.dumps(canonical_form_to_dict(cf)))
    assert obj["p"] == 1 and [b["D"] for b in obj["blocks"]] == [1, 1, 1]
    back = canonical_form_from_dict(obj)
    assert np.allclose(back.reassemble(), cf.reassemble())


def test_schmidt_csv():
    rep = schmidt_spectrum(ghz(2, 3)[0], (0,))
    text = schmidt_csv([rep])
    lines = text.strip().splitlines()
    assert lines[0] == "cut,sigma_index,sigma_value"
    assert lines[1].startswith('"{1}",1,') or lines[1].startswith("{1},1,")


# --- CLI ----------------------------------------------------------------------


@pytest.fixture
def files(tmp_path, rng):
    save_mps(tmp_path / "ghz.json", ghz(2, 1)[1], 4)
    save_mps(tmp_path / "rnd.json", TIMPS(random_tensor(rng, 2, 2)))
    save_msv(tmp_path / "w6.msv", w_state(6, normalized=True))
    save_msv(tmp_path / "ghz6.msv", ghz(2, 6, normalized=True)[0])
    bad = {"kind": "chain", "d": 2, "tensors": [encode_complex(np.ones((2, 1, 2))), encode_complex(np.ones((2, 1, 1)))]}
    (tmp_path / "bad.json").write_text(json.dumps(bad))
    return tmp_path


def test_cli_analyze_ghz(files, capsys):
    assert main(["analyze", str(files / "ghz.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["b"] == 2 and [b["D"] for b in out["blocks"]] == [1, 1]
    assert len(out["decomposition"]["terms"]) == 2


def test_cli_analyze_random(files, capsys):
    assert main(["analyze", str(files / "rnd.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["b"] == 1 and out["blocks"][0]["eta"] < 1
    assert out["obstruction"] == ["block 0 D=2"]
    assert out["N"] == 4


def test_cli_analyze_bad_file(files, capsys):
    assert main(["analyze", str(files / "bad.json")]) == 1
    assert "bond mismatch at site 2" in capsys.readouterr().err


def test_cli_analyze_period_mismatch(tmp_path, capsys):
    from mpsup.gallery import neel_tensor

    save_mps(tmp_path / "neel.json", TIMPS(neel_tensor()))
    assert main(["analyze", str(tmp_path / "neel.json"), "--N", "5"]) == 1
    assert main(["analyze", str(tmp_path / "neel.json")]) == 0


def test_cli_certify(files, capsys):
    assert main(["certify", str(files / "w6.msv"), "--D", "2", "--eps", "1e-9"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["eps_star"] <= 1e-10
    assert main(["certify", str(files / "ghz6.msv"), "--D", "1", "--eps", "0.1"]) == 3
    out = json.loads(capsys.readouterr().out)
    assert out["eps_star"] == pytest.approx(1 / np.sqrt(2))


def test_cli_certify_random_ti(files, capsys):
    code = main(["certify", str(files / "rnd.json"), "--N", "10", "--D", "2", "--eps", "0.01", "--perm-samples", "5"])
    assert code == 3
    out = json.loads(capsys.readouterr().out)
    assert len(out["worst_permutation"]) == 10


def test_cli_certify_csv(files, capsys):
    main(["certify", str(files / "w6.msv"), "--D", "2", "--eps", "1e-9", "--format", "csv"])
    assert capsys.readouterr().out.startswith("cut,sigma_index,sigma_value")


def test_cli_reproduce(tmp_path, capsys):
    assert main(["reproduce", "nope"]) == 1
    assert "border-w" in capsys.readouterr().err
    out = tmp_path / "bw.json"
    assert main(["reproduce", "border-w", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert abs(data["summary"]["slope"] - 2) < 0.05
    assert all(r["provenance"] == "[DERIVED]" for r in data["rows"])


def test_cli_reproduce_table2_csv(tmp_path):
    out = tmp_path / "t2.csv"
    assert main(["reproduce", "table2", "--N", "8", "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "state,quantity,value,provenance"
    assert any(line.startswith("W,border_rk_ref,2,[PAPER]") for line in lines)


def test_cli_reproduce_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["reproduce", "rank-counting", "--seed", "3", "--out", str(a)])
    main(["reproduce", "rank-counting", "--seed", "3", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_cli_rejects_bad_config(files):
    assert main(["analyze", str(files / "ghz.json"), "--tol-rank", "0"]) == 1


def test_cli_amp_cap(files):
    assert main(["certify", str(files / "w6.msv"), "--D", "2", "--eps", "1", "--amp-cap", "8"]) == 1
