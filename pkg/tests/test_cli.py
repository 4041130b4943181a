import csv
import json

import pytest

from polymer_lab.cli import main


def run(tmp_path, *args, name="out.json"):
    out = tmp_path / name
    rc = main([*args, "--out", str(out), "--threads", "2"])
    return rc, out


def test_enumerate_free_column(tmp_path):
    rc, out = run(tmp_path, "enumerate", "--phi", "free", "--N", "8")
    assert rc == 0
    recs = json.loads(out.read_text())["result"]["records"]
    assert [r["Z"] for r in recs] == [1.0] * 9
    assert (tmp_path / "out.json.meta.json").exists()


def test_enumerate_saw_counts(tmp_path):
    rc, out = run(tmp_path, "enumerate", "--phi", "saw", "--N", "4")
    assert rc == 0
    assert json.loads(out.read_text())["result"]["exact_weights"]["Z"][1:] == [4, 12, 36, 100]


def test_malformed_config_exit_two(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    rc, out = run(tmp_path, "enumerate", "--config", str(bad))
    assert rc == 2 and not out.exists()


def test_invalid_model_exit_three(tmp_path):
    rc, out = run(tmp_path, "enumerate", "--steps", "[[1,0]]")
    assert rc == 3
    rc, out = run(tmp_path, "enumerate", "--phi", "table", "--phi-values", "[0,0,3,4,5]")
    assert rc == 3


def test_budget_exit_four_writes_partial(tmp_path):
    rc, out = run(tmp_path, "enumerate", "--phi", "weak", "--k", "1", "--N", "9", "--budget", "5000")
    assert rc == 4
    assert json.loads(out.read_text())["result"]["partial"] is True


def test_report_reruns_byte_identically(tmp_path):
    rc, first = run(tmp_path, "enumerate", "--phi", "weak", "--k", "0.5", "--N", "7", name="a.json")
    assert rc == 0
    rc = main(["enumerate", "--config", str(first), "--out", str(tmp_path / "b.json"), "--threads", "1"])
    assert rc == 0
    assert first.read_bytes() == (tmp_path / "b.json").read_bytes()


def test_csv_and_json_carry_identical_numbers(tmp_path):
    run(tmp_path, "enumerate", "--phi", "weak", "--k", "1", "--N", "6", name="r.json")
    run(tmp_path, "enumerate", "--phi", "weak", "--k", "1", "--N", "6", "--format", "csv", name="r.csv")
    recs = json.loads((tmp_path / "r.json").read_text())["result"]["records"]
    lines = [l for l in (tmp_path / "r.csv").read_text().splitlines() if not l.startswith("#")]
    rows = list(csv.DictReader(lines))
    for rec, row in zip(recs, rows):
        for k in ("Z", "H", "Zplus", "iB_mass"):
            assert float(row[k]) == rec[k]


def test_csv_report_works_as_config(tmp_path):
    run(tmp_path, "enumerate", "--phi", "saw", "--N", "5", "--format", "csv", name="r.csv")
    rc = main(["enumerate", "--config", str(tmp_path / "r.csv"), "--out", str(tmp_path / "s.csv")])
    assert rc == 0
    assert (tmp_path / "r.csv").read_bytes() == (tmp_path / "s.csv").read_bytes()


def test_verify_prints_zero(tmp_path, capsys):
    rc, out = run(tmp_path, "verify", "--n", "4")
    assert rc == 0
    assert "TV distance 0.0e+00" in capsys.readouterr().err
    assert json.loads(out.read_text())["result"]["results"][0]["tv_distance"] == 0.0


def test_transform_unfold(tmp_path):
    rc, out = run(tmp_path, "transform", "--walk", "EENWNEE", "--op", "unfold", "--sites", "3,5")
    assert rc == 0
    res = json.loads(out.read_text())["result"]
    assert res["output_compass"] == "EENENEE" and res["ok"]


def test_transform_rejects_bad_site(tmp_path):
    rc, _ = run(tmp_path, "transform", "--walk", "EENWNEE", "--op", "unfold", "--sites", "2,4")
    assert rc == 5


def test_decompose_point_list(tmp_path):
    rc, out = run(tmp_path, "decompose", "--walk", "[[0,0],[1,0],[2,0]]")
    assert rc == 0
    res = json.loads(out.read_text())["result"]
    assert res["renewal_times"] == [1] and res["diamond_times"] == [1]


def test_compass_needs_unit_steps(tmp_path):
    rc, _ = run(tmp_path, "decompose", "--walk", "EE",
                "--steps", "[[1,1],[1,-1],[-1,1],[-1,-1]]")
    assert rc == 2


@pytest.mark.parametrize("mode", ["exact", "mcmc"])
def test_sample_twice_identical(tmp_path, mode):
    args = ["sample", "--mode", mode, "--n", "5", "--count", "200", "--seed", "4", "--sweeps", "500",
            "--burn-in", "10"]
    run(tmp_path, *args, name="a.json")
    run(tmp_path, *args, name="b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_ballistic_and_ibprocess(tmp_path):
    rc, out = run(tmp_path, "ballistic", "--phi", "saw", "--schedule", "4,5,6", "--v-grid", "0.5,1")
    assert rc == 0
    pts = json.loads(out.read_text())["result"]["points"]
    assert all(p["tails"][1]["p"] == 0.0 for p in pts)
    rc, out = run(tmp_path, "ibprocess", "--phi", "saw", "--L", "6", "--pieces", "500", "--seed", "1",
                  name="ib.csv", )
    assert rc == 0


def test_env_threads(tmp_path, monkeypatch):
    monkeypatch.setenv("POLYMER_LAB_THREADS", "3")
    rc = main(["enumerate", "--N", "6", "--out", str(tmp_path / "e.json")])
    assert rc == 0
    cfg = json.loads((tmp_path / "e.json").read_text())["config"]
    assert cfg["params"]["prefix_depth"] >= 1
