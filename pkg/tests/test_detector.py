"""Reference-pack build, scoring, serialization, and the JSONL interface."""

import json
import os

import numpy as np
import pytest

from surpmark import (SurprisalRecord, build_references, calibrate_tau,
                      load_pack, read_records, save_pack, score_batch,
                      score_text, write_records)
from surpmark.detector import (ScoreFailure, pack_from_json, pack_to_json,
                               record_from_obj)
from surpmark.errors import (CorruptPack, EmptyCorpus, JsonlError,
                             NonFiniteValue, PackIoError, RecordTooShort,
                             SurpMarkError, VersionMismatch)


def rec(id, values, label=None):
    return SurprisalRecord(id=id, surprisals=np.asarray(values, float), label=label)


def toy_pack(k=2):
    human = [rec("h0", [1.0, 1.2, 0.9, 1.1, 1.0])]
    machine = [rec("m0", [9.0, 8.8, 9.2, 9.1, 9.0])]
    return build_references(human, machine, k)


@pytest.fixture
def corpora():
    rng = np.random.default_rng(0)
    human = [rec(f"h{i}", rng.normal(5.0, 1.0, 60) + rng.normal(0, 0.2, 60),
                 "human") for i in range(20)]
    machine = [rec(f"m{i}", rng.normal(3.0, 1.0, 60), "machine")
               for i in range(20)]
    return human, machine


class TestBuild:
    def test_separable_corpora(self):
        pack = toy_pack()
        assert pack.k == 2
        # human values all map to state 1, machine to state 2
        assert pack.counts_human.counts[0, 0] == 4
        assert pack.counts_human.counts.sum() == 4
        assert pack.counts_machine.counts[1, 1] == 4

    def test_default_k_from_total_transitions(self, corpora):
        human, machine = corpora
        pack = build_references(human, machine)
        # 40 docs x 59 transitions = 2360 -> round(0.75 * 2360^0.2) = 4
        assert pack.k == 4

    def test_short_records_rejected_with_listing(self, corpora):
        human, machine = corpora
        bad = human + [rec("tiny", [1.0])]
        with pytest.raises(RecordTooShort) as exc:
            build_references(bad, machine)
        assert "tiny" in exc.value.ids

    def test_short_records_skippable(self, corpora, caplog):
        human, machine = corpora
        bad = human + [rec("tiny", [1.0])]
        pack = build_references(bad, machine, on_short="skip")
        ref = build_references(human, machine)
        np.testing.assert_array_equal(pack.counts_human.counts,
                                      ref.counts_human.counts)

    def test_empty_corpus(self, corpora):
        human, machine = corpora
        with pytest.raises(EmptyCorpus):
            build_references([], machine)
        with pytest.raises(EmptyCorpus):
            build_references(human, [])

    def test_rebuild_is_byte_identical(self, corpora):
        human, machine = corpora
        one = pack_to_json(build_references(human, machine, 5,
                                            metadata={"proxy": "toy"}))
        two = pack_to_json(build_references(human, machine, 5,
                                            metadata={"proxy": "toy"}))
        assert one == two


class TestScore:
    def test_machine_doc_scores_negative(self, corpora):
        human, machine = corpora
        pack = build_references(human, machine, 4)
        rng = np.random.default_rng(1)
        report = score_text(pack, rec("t", rng.normal(3.0, 1.0, 80)), tau=0.0)
        assert report.gjs_to_machine < report.gjs_to_human
        assert report.delta_gjs < 0
        assert report.verdict == "machine"

    def test_report_invariants(self, corpora):
        human, machine = corpora
        pack = build_references(human, machine, 4)
        rng = np.random.default_rng(2)
        report = score_text(pack, rec("t", rng.normal(4.0, 1.5, 50)))
        assert report.delta_gjs == pytest.approx(
            report.gjs_to_machine - report.gjs_to_human, abs=1e-12)
        assert report.test_transitions == 49
        assert report.verdict is None
        assert report.alpha_machine == pytest.approx(
            pack.n_machine / report.test_transitions)

    def test_minimal_two_value_doc(self):
        pack = toy_pack()
        report = score_text(pack, rec("t", [1.0, 9.0]))
        assert report.test_transitions == 1

    def test_too_short_rejected(self):
        pack = toy_pack()
        with pytest.raises(RecordTooShort):
            score_text(pack, rec("t", [1.0]))

    def test_threshold_monotone_in_tau(self, corpora):
        human, machine = corpora
        pack = build_references(human, machine, 4)
        rng = np.random.default_rng(3)
        docs = [rec(f"t{i}", rng.normal(4.0, 1.5, 60)) for i in range(30)]
        previous = set()
        for tau in (-0.05, -0.01, 0.0, 0.01, 0.05):
            flagged = {d.id for d in docs
                       if score_text(pack, d, tau).verdict == "machine"}
            assert previous <= flagged
            previous = flagged

    def test_swapping_pack_sides_negates_score(self, corpora):
        human, machine = corpora
        pack = build_references(human, machine, 4)
        swapped = build_references(machine, human, 4)
        rng = np.random.default_rng(4)
        doc = rec("t", rng.normal(4.0, 1.5, 60))
        assert score_text(pack, doc).delta_gjs == \
            -score_text(swapped, doc).delta_gjs

    def test_verdicts_match_reimplemented_decision_rule(self, corpora):
        from surpmark import quantize
        from tests import oracles
        human, machine = corpora
        pack = build_references(human, machine, 4)
        rng = np.random.default_rng(5)
        docs = [rec(f"t{i}", rng.normal(rng.uniform(3, 5), 1.2, 70))
                for i in range(40)]
        for doc in docs:
            report = score_text(pack, doc, tau=0.0)
            states = oracles.nearest_centroid_states(pack.quantizer.centroids,
                                                     doc.surprisals)
            counts = oracles.pair_counts_matrix(states, pack.k)
            oracle_score = oracles.delta_gjs_direct(pack.counts_machine.counts,
                                                    pack.counts_human.counts,
                                                    counts)
            oracle_verdict = "machine" if oracle_score <= 0.0 else "human"
            assert report.verdict == oracle_verdict
            assert report.delta_gjs == pytest.approx(oracle_score, abs=1e-10)


class TestBatch:
    def test_empty(self):
        assert score_batch(toy_pack(), []) == []

    def test_equals_map_of_score_text(self, corpora):
        human, machine = corpora
        pack = build_references(human, machine, 4)
        rng = np.random.default_rng(5)
        docs = [rec(f"t{i}", rng.normal(4, 1, 40)) for i in range(10)]
        batch = score_batch(pack, docs, tau=0.0)
        singles = [score_text(pack, d, tau=0.0) for d in docs]
        assert batch == singles

    def test_parallel_equals_serial(self, corpora):
        human, machine = corpora
        pack = build_references(human, machine, 4)
        rng = np.random.default_rng(6)
        docs = [rec(f"t{i}", rng.normal(4, 1, 40)) for i in range(50)]
        assert score_batch(pack, docs, threads=1) == \
            score_batch(pack, docs, threads=8)

    def test_failures_inline(self, corpora):
        human, machine = corpora
        pack = build_references(human, machine, 4)
        docs = [rec("good", [4.0, 5.0, 4.5]), rec("short", [4.0]),
                rec("good2", [3.0, 3.5, 4.0])]
        out = score_batch(pack, docs)
        assert out[0].id == "good" and out[2].id == "good2"
        assert isinstance(out[1], ScoreFailure) and out[1].id == "short"


class TestCalibrateTau:
    def test_separable(self):
        tau = calibrate_tau([1.0, 2.0, 3.0], [-3.0, -2.0, -1.0])
        assert -1.0 < tau < 1.0

    def test_maximizes_balanced_accuracy(self):
        rng = np.random.default_rng(7)
        h = rng.normal(0.5, 1, 200)
        m = rng.normal(-0.5, 1, 200)
        tau = calibrate_tau(h, m)
        acc = 0.5 * ((m <= tau).mean() + (h > tau).mean())
        for probe in np.linspace(-2, 2, 401):
            assert acc >= 0.5 * ((m <= probe).mean() + (h > probe).mean()) - 1e-12


class TestSerialization:
    def test_round_trip(self, tmp_path, corpora):
        human, machine = corpora
        pack = build_references(human, machine, 5, metadata={"proxy": "toy",
                                                             "note": "čest"})
        path = tmp_path / "pack.json"
        save_pack(pack, path)
        loaded = load_pack(path)
        assert loaded.quantizer == pack.quantizer
        np.testing.assert_array_equal(loaded.counts_machine.counts,
                                      pack.counts_machine.counts)
        np.testing.assert_array_equal(loaded.counts_human.counts,
                                      pack.counts_human.counts)
        assert loaded.metadata == pack.metadata
        assert pack_to_json(loaded) == pack_to_json(pack)

    def test_floats_survive_exactly(self, tmp_path, corpora):
        human, machine = corpora
        pack = build_references(human, machine, 5)
        save_pack(pack, tmp_path / "p.json")
        loaded = load_pack(tmp_path / "p.json")
        assert loaded.quantizer.boundaries == pack.quantizer.boundaries
        assert loaded.quantizer.centroids == pack.quantizer.centroids

    def test_version_mismatch(self):
        doc = json.loads(pack_to_json(toy_pack()))
        doc["format_version"] = 2
        with pytest.raises(VersionMismatch) as exc:
            pack_from_json(json.dumps(doc))
        assert exc.value.found == 2

    def test_fuzzed_truncations_raise_corrupt(self):
        text = pack_to_json(toy_pack())
        rng = np.random.default_rng(8)
        for _ in range(60):
            cut = int(rng.integers(0, len(text) - 1))
            with pytest.raises((CorruptPack, VersionMismatch)):
                pack_from_json(text[:cut])

    def test_field_corruption(self):
        doc = json.loads(pack_to_json(toy_pack()))
        broken = dict(doc)
        broken["n_machine"] = doc["n_machine"] + 1
        with pytest.raises(CorruptPack):
            pack_from_json(json.dumps(broken))
        broken = dict(doc)
        del broken["quantizer"]
        with pytest.raises(CorruptPack):
            pack_from_json(json.dumps(broken))

    def test_missing_file(self, tmp_path):
        with pytest.raises(PackIoError):
            load_pack(tmp_path / "absent.json")


class TestJsonl:
    def test_round_trip(self, tmp_path, corpora):
        human, _ = corpora
        path = tmp_path / "docs.jsonl"
        write_records(path, human)
        back = read_records(path)
        assert [r.id for r in back] == [r.id for r in human]
        np.testing.assert_allclose(back[3].surprisals, human[3].surprisals)
        assert back[0].label == "human"

    def test_unknown_fields_ignored(self):
        r = record_from_obj({"id": "x", "surprisals": [1.0, 2.0],
                             "label": None, "extra": {"a": 1}}, 1)
        assert r.id == "x"

    def test_bad_line_reports_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "a", "surprisals": [1.0, 2.0]}\nnot json\n')
        with pytest.raises(JsonlError) as exc:
            read_records(path)
        assert exc.value.line == 2

    def test_nan_rejected_with_line(self, tmp_path):
        path = tmp_path / "nan.jsonl"
        path.write_text('{"id": "a", "surprisals": [1.0, NaN]}\n')
        with pytest.raises(JsonlError) as exc:
            read_records(path)
        assert exc.value.line == 1

    def test_non_finite_record_rejected(self):
        with pytest.raises(NonFiniteValue):
            rec("x", [1.0, np.inf])
