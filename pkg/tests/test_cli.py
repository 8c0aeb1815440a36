import csv
import io
import json

import numpy as np
import pytest

from lrcc import cli, codes

CONFIG = {
    "version": 1,
    "group": {"type": "cyclic", "n": 5},
    "A": [1, 4, 2, 3],
    "B": [1, 4, 2, 3],
    "codes": {"A": {"H": [[1, 1, 1, 1]]}, "B": {"H": [[1, 1, 1, 1]]}},
    "channel": {"model": "fixed-weight", "w": 1},
}


def write(tmp_path, cfg, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_build_is_deterministic(tmp_path):
    cfg = write(tmp_path, CONFIG)
    for out in ("one", "two"):
        assert cli.main(["build", "--config", cfg, "--out", str(tmp_path / out)]) == 0
    for name in ("manifest.json", "d1.alist", "d2.alist", "hx.alist", "hz.alist", "hx.mtx", "hz.mtx"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()
    man = json.loads((tmp_path / "one" / "manifest.json").read_text())
    assert man["k"] == 6 and man["sizes"]["edge_bits"] == 80
    assert man["ldpc"]["coarse_ok"] and all(man["ldpc"]["fine_ok"].values())


def test_check_passes_then_localizes_injected_fault(tmp_path, capsys):
    cfg = write(tmp_path, CONFIG)
    out = tmp_path / "inst"
    cli.main(["build", "--config", cfg, "--out", str(out)])
    manifest = str(out / "manifest.json")
    assert cli.main(["check", "--config", manifest]) == 0
    d2 = codes.read_alist(out / "d2.alist")
    row = int(np.flatnonzero(d2[:, 7])[0])
    d2[row, 7] ^= 1
    codes.write_alist(d2, out / "d2.alist")
    capsys.readouterr()
    assert cli.main(["check", "--config", manifest]) == 1
    text = capsys.readouterr().out
    assert "FAIL  chain condition" in text and "face 7" in text
    assert "FAIL  stored maps match rebuild" in text


@pytest.mark.parametrize("mutate, needle", [
    (lambda c: c.pop("version"), "version"),
    (lambda c: c["group"].update(type="dihedral"), "group.type"),
    (lambda c: c["codes"].update(A={}), "codes.A"),
    (lambda c: c["codes"]["A"].update(H=[[1, 1, 1]]), "codes.A"),
])
def test_config_errors_name_the_field(tmp_path, capsys, mutate, needle):
    cfg = json.loads(json.dumps(CONFIG))
    mutate(cfg)
    assert cli.main(["build", "--config", write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 2
    assert needle in capsys.readouterr().err


def test_malformed_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert cli.main(["check", "--config", str(p)]) == 2
    assert "not valid JSON" in capsys.readouterr().err
    assert cli.main(["check", "--config", str(tmp_path / "missing.json")]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_generator_closure_error(tmp_path, capsys):
    cfg = dict(CONFIG, A=[1, 4, 1, 4])
    assert cli.main(["check", "--config", write(tmp_path, cfg)]) == 2
    assert "rejected" in capsys.readouterr().err


def test_distance_refuses_large_instance(tmp_path, capsys):
    assert cli.main(["distance", "--config", write(tmp_path, CONFIG)]) == 3
    assert "cap" in capsys.readouterr().err


def test_distance_small_and_vacuous(tmp_path, capsys):
    cfg = dict(CONFIG, A=[1, 4], B=[1, 4], codes={"A": {"H": [[1, 1]]}, "B": {"H": [[1, 1]]}})
    assert cli.main(["distance", "--config", write(tmp_path, cfg)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["k"] == 2 and rep["dz"]["hamming"] == 4 and len(rep["dz"]["hamming_witness"]) == 4
    # identity checks leave no logical qubits
    cfg["codes"] = {"A": {"H": [[1, 0], [0, 1]]}, "B": {"H": [[1, 0], [0, 1]]}}
    assert cli.main(["distance", "--config", write(tmp_path, cfg)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["k"] == 0 and rep["dz"]["hamming"] is None and rep["dx"]["hamming"] is None


def test_simulate_output_is_independent_of_threads(tmp_path, capsys):
    cfg = write(tmp_path, dict(CONFIG, channel={"model": "iid", "p": 0.05}))
    outs = []
    for threads in ("1", "3"):
        out = tmp_path / f"sim{threads}.csv"
        assert cli.main(["simulate", "--config", cfg, "--trials", "25", "--seed", "9",
                         "--threads", threads, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rows = list(csv.DictReader(io.StringIO(outs[0].decode())))
    assert len(rows) == 25 and set(rows[0]) == set(cli.SIM_FIELDS)
    assert all(r["wall_ns"] == "0" for r in rows)
    summary = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert summary["trials"] == 25


def test_simulate_reconstruct_reports_failures(tmp_path):
    out = tmp_path / "rec.csv"
    assert cli.main(["simulate", "--config", write(tmp_path, CONFIG), "--decoder", "reconstruct",
                     "--trials", "10", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert {r["success"] for r in rows} <= {"0", "1"}


def test_robust_search_rows(tmp_path, capsys):
    out = tmp_path / "search.csv"
    assert cli.main(["robust-search", "--delta", "4", "--k", "2", "--samples", "4", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 4
    for r in rows:
        assert r["d2"] == r["d2_check"] and r["d2_dual"] == r["d2_dual_check"]
    assert "best:" in capsys.readouterr().err


def test_expansion_with_overrides(tmp_path, capsys):
    cfg = write(tmp_path, CONFIG)
    assert cli.main(["expansion", "--config", cfg, "--samples", "3", "--lam", "1", "--d1", "20", "--d2", "20"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["samples"] == 3 and rep["applicable"]


def test_linear_fit():
    slope, r2 = cli.linear_fit([1, 2, 3, 4], [3, 5, 7, 9])
    assert slope == pytest.approx(2) and r2 == pytest.approx(1)
    assert cli.linear_fit([2, 2], [1, 5]) == (0.0, 1.0)
