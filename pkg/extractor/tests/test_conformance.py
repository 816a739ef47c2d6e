"""Acceptance: extractor output feeds the primary toolchain cleanly.

Runs the extractor CLI on the five fixture texts with the tiny checkpoint,
validates the output, and drives the primary `surpmark` CLI (the package's
external interface) end to end with zero warnings.
"""

import json
import os
import shutil
import subprocess
import sys

import pytest

from surpmark_extractor import validate_jsonl
from surpmark_extractor.cli import main as extractor_main
from surpmark_extractor.extract import load_model

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
CKPT = os.path.join(FIXTURES, "tiny-lm")
TEXTS = os.path.join(FIXTURES, "texts.jsonl")

needs_primary = pytest.mark.skipif(shutil.which("surpmark") is None,
                                   reason="primary surpmark CLI not installed")


def extract_fixture(out_path, label):
    code = extractor_main(["extract", "--model", CKPT, "--in", TEXTS,
                           "--out", str(out_path), "--label", label])
    assert code == 0
    return out_path


def test_criterion_9_extractor_conformance(tmp_path, capsys):
    human = extract_fixture(tmp_path / "human.jsonl", "human")

    # validate_jsonl passes on all five records
    report = validate_jsonl(human)
    assert report.ok and report.records == 5

    # each record carries exactly token_count - 1 surprisals
    tokenizer, _ = load_model(CKPT)
    texts = {json.loads(line)["id"]: json.loads(line)["text"]
             for line in open(TEXTS)}
    for line in open(human):
        record = json.loads(line)
        n_tokens = len(tokenizer(texts[record["id"]],
                                 add_special_tokens=False)["input_ids"])
        assert len(record["surprisals"]) == n_tokens - 1

    print("\nACCEPTANCE 9: PASS - extractor output validates; "
          "lengths = token_count - 1")


@needs_primary
def test_primary_cli_consumes_output(tmp_path):
    # a second "machine" corpus: same pipeline over reversed texts
    reversed_texts = tmp_path / "texts_rev.jsonl"
    with open(TEXTS) as fh, open(reversed_texts, "w") as out:
        for line in fh:
            obj = json.loads(line)
            obj["text"] = " ".join(reversed(obj["text"].split()))
            obj["id"] = "rev-" + obj["id"]
            out.write(json.dumps(obj) + "\n")

    human = extract_fixture(tmp_path / "human.jsonl", "human")
    code = extractor_main(["extract", "--model", CKPT, "--in",
                           str(reversed_texts), "--out",
                           str(tmp_path / "machine.jsonl"),
                           "--label", "machine"])
    assert code == 0

    pack = tmp_path / "pack.json"
    build = subprocess.run(
        ["surpmark", "build-ref", "--human", str(human), "--machine",
         str(tmp_path / "machine.jsonl"), "--out", str(pack), "--k", "4"],
        capture_output=True, text=True)
    assert build.returncode == 0, build.stderr
    assert "warn" not in build.stderr.lower()

    score = subprocess.run(
        ["surpmark", "score", "--pack", str(pack), "--in", str(human),
         "--tau", "0"], capture_output=True, text=True)
    assert score.returncode == 0, score.stderr
    assert "warn" not in score.stderr.lower()
    reports = [json.loads(line) for line in score.stdout.splitlines()]
    assert len(reports) == 5
    assert all("delta_gjs" in r for r in reports)

    print("\nACCEPTANCE 9 (end-to-end): PASS - primary CLI consumed "
          "extractor output with zero warnings")
