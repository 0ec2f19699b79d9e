import json

import pytest

from griglab import cli


def run(argv):
    return cli.main(argv)


def test_growth_rows(tmp_path):
    out = tmp_path / "g.csv"
    assert run(["growth", "--max-length", "6", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,gamma"
    assert len(lines) == 8
    assert "1,5" in lines


def test_growth_cache_rerun_bit_identical(tmp_path):
    cache = tmp_path / "cache"
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["growth", "--max-length", "6", "--cache-dir", str(cache)]
    assert run(args + ["--out", str(out1)]) == 0
    assert (cache / "grigorchuk_r6.ballv1").exists()
    assert run(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_growth_thread_invariance(tmp_path):
    out1, out8 = tmp_path / "t1.csv", tmp_path / "t8.csv"
    assert run(["growth", "--max-length", "8", "--threads", "1", "--out", str(out1)]) == 0
    assert run(["growth", "--max-length", "8", "--threads", "8", "--out", str(out8)]) == 0
    assert out1.read_bytes() == out8.read_bytes()


def test_growth_json_format(tmp_path):
    out = tmp_path / "g.json"
    assert run(["growth", "--max-length", "2", "--format", "json", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["rows"] == [[0, 1], [1, 5], [2, 11]]


def test_conjgrowth_rows(tmp_path):
    out = tmp_path / "f.csv"
    wit = tmp_path / "wit.json"
    code = run(
        [
            "conjgrowth",
            "--max-length",
            "4",
            "--radius",
            "6",
            "--out",
            str(out),
            "--witness-out",
            str(wit),
        ]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,lower,upper,exact"
    assert lines[1] == "0,1,1,true"
    assert lines[2] == "1,5,5,true"
    witnesses = json.loads(wit.read_text())
    assert isinstance(witnesses, dict)


def test_width_targets(tmp_path):
    out = tmp_path / "w.csv"
    assert run(["width", "--target", "a", "--mode", "conjugates", "--out", str(out)]) == 0
    assert ",decomposed,1," in out.read_text()
    assert run(["width", "--target", "", "--mode", "conjugates", "--out", str(out)]) == 0
    assert ",decomposed,0," in out.read_text()
    assert run(["width", "--target", "[a,b]", "--mode", "commutators", "--out", str(out)]) == 0
    assert ",decomposed,1," in out.read_text()


def test_width_bad_target_exits_3():
    assert run(["width", "--target", "(ab", "--mode", "conjugates"]) == 3


def test_audit_palindrome_exit_0(tmp_path):
    out = tmp_path / "p.json"
    assert run(["audit", "--lemma", "palindrome", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["status"] == "passed"
    assert report["counts"]["violations"] == 0


def test_audit_unknown_lemma_exit_3():
    assert run(["audit", "--lemma", "no-such-thing"]) == 3


def test_audit_determinism(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["audit", "--lemma", "comm-k", "--seed", "5", "--out", str(a)]) == 0
    assert run(["audit", "--lemma", "comm-k", "--seed", "5", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cache_dir_env_var(tmp_path, monkeypatch):
    cache = tmp_path / "envcache"
    monkeypatch.setenv("GRIGLAB_CACHE", str(cache))
    out = tmp_path / "g.csv"
    assert run(["growth", "--max-length", "4", "--out", str(out)]) == 0
    assert (cache / "grigorchuk_r4.ballv1").exists()


def test_outputs_use_lf(tmp_path):
    out = tmp_path / "g.csv"
    assert run(["growth", "--max-length", "3", "--out", str(out)]) == 0
    assert b"\r" not in out.read_bytes()


def test_bad_flag_value_exits_3():
    assert run(["growth", "--threads", "0"]) == 3
