import json

import pytest

from foclearn.cli import main

from conftest import DATA


def _index(tmp_path):
    ix = tmp_path / "ix.zip"
    assert main(["precompute", "--db", str(DATA / "citations.jsonl"), "--config", str(DATA / "citations_config.json"), "--index", str(ix)]) == 0
    return ix


def test_learn_and_evalh(tmp_path, capsys):
    ix = _index(tmp_path)
    out = tmp_path / "h.json"
    assert main(["learn", "--index", str(ix), "--train", str(DATA / "citations_train.jsonl"), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["library_term"] == "#(z1,z2).(Author(x1,z1) & Citation(z2,z1))"
    capsys.readouterr()
    assert main(["evalh", "--index", str(ix), "--hypothesis", str(out), "--tuple", "a1", "--tuple", "a2"]) == 0
    lines = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    assert [l["value"] for l in lines] == [3, 0]


def test_contradictory_labels(tmp_path, capsys):
    ix = _index(tmp_path)
    train = tmp_path / "bad.jsonl"
    train.write_text('{"tuple": ["a1"], "label": 3}\n{"tuple": ["a1"], "label": 1}\n')
    code = main(["learn", "--index", str(ix), "--train", str(train), "--out", str(tmp_path / "h.json")])
    assert code == 4
    assert "reject: contradictory labels" in capsys.readouterr().out


def test_no_consistent_hypothesis(tmp_path, capsys):
    ix = _index(tmp_path)
    train = tmp_path / "t.jsonl"
    train.write_text('{"tuple": ["a1"], "label": 99}\n')
    assert main(["learn", "--index", str(ix), "--train", str(train), "--out", str(tmp_path / "h.json")]) == 4
    assert capsys.readouterr().out.splitlines()[-1].startswith("reject: no consistent")


def test_eval(capsys):
    assert main(["eval", "--db", str(DATA / "citations.jsonl"), "--term", "#(z1,z2).(Author(x,z1) & Citation(z2,z1))", "--assign", "x=a1"]) == 0
    assert capsys.readouterr().out.strip() == "3"


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["learn", "--index"])
    assert exc.value.code == 2


def test_bad_input(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"signature": [{"name": "R", "arity": 2}]}\n{"rel": "R", "tuple": ["a"]}\n')
    assert main(["eval", "--db", str(bad), "--term", "true"]) == 3
    assert main(["eval", "--db", str(DATA / "citations.jsonl"), "--term", "#(z1"]) == 3


def test_help_mentions_grammar(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "expression syntax" in out and "#(z1,z2)" in out


def test_check_verb(capsys):
    assert main(["check", "--seed", "1", "--instances", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["failures"] == 0
