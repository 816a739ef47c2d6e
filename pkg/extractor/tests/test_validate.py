"""Schema validation of surprisal JSONL files."""

import json

from surpmark_extractor import validate_jsonl


def write(path, lines):
    path.write_text("\n".join(lines) + "\n")
    return path


class TestValidateJsonl:
    def test_well_formed_passes(self, tmp_path):
        path = write(tmp_path / "ok.jsonl", [
            json.dumps({"id": "a", "label": "human",
                        "surprisals": [1.0, 2.0]}),
            json.dumps({"id": "b", "label": None,
                        "surprisals": [0.5, 0.25, 4.0], "extra": 1}),
        ])
        report = validate_jsonl(path)
        assert report.ok and report.records == 2

    def test_nan_fails_at_line(self, tmp_path):
        path = write(tmp_path / "nan.jsonl", [
            json.dumps({"id": "a", "surprisals": [1.0, 2.0]}),
            '{"id": "b", "surprisals": [1.0, NaN]}',
        ])
        report = validate_jsonl(path)
        assert not report.ok
        assert report.issues[0].line == 2
        assert "finite" in report.issues[0].message

    def test_short_and_malformed_lines(self, tmp_path):
        path = write(tmp_path / "bad.jsonl", [
            json.dumps({"id": "a", "surprisals": [1.0]}),
            "not json at all",
            json.dumps({"surprisals": [1.0, 2.0]}),
            json.dumps({"id": "d", "label": "robot",
                        "surprisals": [1.0, 2.0]}),
        ])
        report = validate_jsonl(path)
        lines = [issue.line for issue in report.issues]
        assert lines == [1, 2, 3, 4]
