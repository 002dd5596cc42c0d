import json
import math

import pytest

import eae_transfer as eae


def test_template_round_trip():
    source = "{Attacker} attacked {Target}"
    assert eae.template_slots(source) == ["Attacker", "Target"]
    assert eae.render_unfilled(source) == "Attacker attacked Target"
    filled = eae.render_filled(source, {"Attacker": ["John"], "Target": ["the base", "the town"]})
    assert filled == "John attacked the base and the town"
    parsed = eae.parse_filled(source, filled)
    assert parsed["fills"] == {"Attacker": ["John"], "Target": ["the base", "the town"]}
    assert parsed["multi_arg_roles"] == ["Target"]


def test_errors_carry_codes():
    with pytest.raises(eae.EaeError) as info:
        eae.parse_filled("{Attacker} attacked {Target}", "John met Mary")
    assert info.value.code == "skeleton_mismatch"


def test_decode_and_select():
    text = "John attacked the base"
    offsets = [(0, 0), (0, 4), (5, 13), (14, 17), (18, 22)]
    start = [0.1, 0.6, 0.1, 0.1, 0.1]
    end = [0.1, 0.6, 0.1, 0.1, 0.1]
    decoded = eae.decode_spans(start, end, offsets, text, k=3)
    assert decoded["candidates"][0]["text"] == "John"
    assert math.isclose(decoded["candidates"][0]["confidence"], 0.36)
    assert eae.select_arguments(decoded, t_dev=0.2) == ["John"]


def test_pearson():
    assert eae.pearson_rho([1, 2, 4], [1, 3, 3]) == pytest.approx(24 / math.sqrt(1008), abs=1e-9)
    rho, n = eae.correlate_transfer({"A": 0.1, "B": 0.5, "C": 0.2}, {"A": 0.2, "B": 0.6, "C": 0.3, "D": 1.0})
    assert n == 3
    assert rho == pytest.approx(1.0, abs=1e-12)


def test_gold_cell_end_to_end(tmp_path):
    corpus = tmp_path / "synth.jsonl"
    ontology = tmp_path / "synth.ontology.json"
    args = eae.generate_synthetic(str(corpus), str(ontology), documents=30, seed=3)
    assert args > 0
    stats = eae.corpus_stats(str(corpus))
    assert stats["documents"] == 30
    assert all(f["severity"] != "error" for f in eae.lint_ontology(str(ontology)))
    config = {"method": "TI", "corpus": "synth.jsonl", "ontology": "synth.ontology.json",
              "output_dir": "run"}
    report = eae.run_cell(config, str(tmp_path))
    assert report["f1"] == 1.0
    rescored = eae.argument_f1(str(tmp_path / "run" / "predictions.jsonl"), str(corpus))
    assert rescored["f1"] == 1.0
    saved = json.loads((tmp_path / "run" / "report.json").read_text())
    assert saved["f1"] == 1.0


def test_llm_prompt_and_answer_sheet(tmp_path):
    corpus = tmp_path / "c.jsonl"
    ontology = tmp_path / "o.json"
    eae.generate_synthetic(str(corpus), str(ontology), documents=3, seed=1)
    first = json.loads(corpus.read_text().splitlines()[0])
    event = first["events"][0]
    prompt = eae.build_extraction_prompt(str(corpus), str(ontology), first["doc_id"], event["event_id"], 2)
    assert prompt["user"].endswith("Answers:")
    roles = prompt["question_order"]
    reply = json.dumps({f"q{i + 1}": [] for i in range(len(roles))})
    sheet = eae.parse_answer_sheet(reply, roles, first["text"])
    assert set(sheet["answers"]) == set(roles)


def test_format_matrix():
    table = eae.format_matrix(["A", "B"], [("M", "TI", "A", [0.5, 0.2]), ("M", "TI", "B", [0.3, 0.4])])
    assert "**50.00**" in table["plain"]
    assert "\\underline{30.00}" in table["latex"]
