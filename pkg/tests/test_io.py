import json

import numpy as np
import pytest

from cfrsense import io as dio
from cfrsense.errors import DataError, HashMismatchError, ParseError, SchemaError, \
    SchemaVersionError
from cfrsense.estimation import CfrBlock
from cfrsense.labels import Label
from cfrsense.preprocess import Dataset


@pytest.fixture
def block():
    gen = np.random.default_rng(0)
    h = (gen.standard_normal((20, 64)) + 1j * gen.standard_normal((20, 64))) * 10.0 ** \
        gen.uniform(-6, 3, (20, 64))
    return CfrBlock(h, np.arange(5, 25), 3, 7, Label.DEHYDRATED)


@pytest.fixture
def dataset():
    gen = np.random.default_rng(1)
    n = 12
    ints = lambda a: np.asarray(a, dtype=np.int64)  # noqa: E731
    return Dataset(gen.standard_normal((n, 64)) * 100, ints(gen.integers(0, 2, n)),
                   ints(np.arange(n) // 4), ints(np.arange(n) % 3), ints(np.arange(n)))


class TestCfrCsv:
    def test_roundtrip(self, tmp_path, block):
        path = tmp_path / "cfr.csv"
        dio.write_cfr_csv(block, path)
        snaps = dio.read_cfr_csv(path)
        assert len(snaps) == 20
        got = np.stack([s.h for s in snaps])
        rel = np.abs(got - block.h) / np.maximum(np.abs(block.h), 1e-300)
        assert np.max(rel) < 1e-8
        assert [s.frame_index for s in snaps] == list(range(5, 25))
        assert {(s.subject_id, s.session_id, s.label) for s in snaps} == \
            {(3, 7, Label.DEHYDRATED)}

    def test_unit_scale_absolute_error(self, tmp_path):
        h = np.exp(2j * np.pi * np.random.default_rng(4).uniform(size=(30, 64)))
        b = CfrBlock(h, np.arange(30), 0, 0, Label.HYDRATED)
        dio.write_cfr_csv(b, tmp_path / "c.csv")
        got = np.stack([s.h for s in dio.read_cfr_csv(tmp_path / "c.csv")])
        assert np.max(np.abs(got - h)) <= 1e-8

    def test_layout(self, tmp_path, block):
        path = tmp_path / "cfr.csv"
        dio.write_cfr_csv(block, path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode("utf-8").split("\n")
        assert lines[-1] == "" and len(lines) - 1 == 21
        header = lines[0].split(",")
        assert header[:6] == ["subject_id", "session_id", "frame_index", "label", "h00_re",
                              "h00_im"]
        assert header[-1] == "h63_im" and len(header) == 132

    def test_nine_significant_digits_half_even(self, tmp_path):
        h = np.full((1, 64), 1.0 + 0j)
        h[0, 0] = 0.1234567885 + 2.5e-10j  # tie digit -> even, after binary rounding
        dio.write_cfr_csv(CfrBlock(h, np.arange(1), 0, 0, Label.HYDRATED), tmp_path / "r.csv")
        fields = (tmp_path / "r.csv").read_text().split("\n")[1].split(",")
        assert fields[4] == format(0.1234567885, ".9g")
        assert len(fields[4].replace("0.", "", 1)) == 9

    def test_deterministic_bytes(self, tmp_path, block):
        dio.write_cfr_csv(block, tmp_path / "a.csv")
        dio.write_cfr_csv(block, tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_nonfinite_refused(self, tmp_path, block):
        block.h[0, 0] = np.nan
        with pytest.raises(DataError):
            dio.write_cfr_csv(block, tmp_path / "x.csv")

    def test_blocks_regrouped(self, tmp_path, block):
        other = CfrBlock(block.h[:3], np.arange(3), 4, 1, Label.HYDRATED)
        dio.write_cfr_csv(list(block) + list(other), tmp_path / "m.csv")
        blocks = dio.blocks_from_snapshots(dio.read_cfr_csv(tmp_path / "m.csv"))
        assert [len(b) for b in blocks] == [20, 3]


class TestCfrMutations:
    @pytest.fixture
    def text(self, tmp_path, block):
        dio.write_cfr_csv(block, tmp_path / "ok.csv")
        return (tmp_path / "ok.csv").read_text()

    def corrupt(self, tmp_path, text):
        p = tmp_path / "bad.csv"
        p.write_text(text)
        return p

    def test_truncated_row(self, tmp_path, text):
        lines = text.split("\n")
        lines[3] = ",".join(lines[3].split(",")[:50])
        with pytest.raises(ParseError, match="line 4"):
            dio.read_cfr_csv(self.corrupt(tmp_path, "\n".join(lines)))

    def test_truncated_file(self, tmp_path, text):
        with pytest.raises(ParseError):
            dio.read_cfr_csv(self.corrupt(tmp_path, text[:-40]))

    def test_nan(self, tmp_path, text):
        lines = text.split("\n")
        fields = lines[2].split(",")
        fields[10] = "nan"
        lines[2] = ",".join(fields)
        with pytest.raises(DataError, match="line 3"):
            dio.read_cfr_csv(self.corrupt(tmp_path, "\n".join(lines)))

    def test_bad_label(self, tmp_path, text):
        with pytest.raises(ParseError, match="label"):
            dio.read_cfr_csv(self.corrupt(tmp_path, text.replace("dehydrated", "thirsty", 1)))

    def test_header_drift(self, tmp_path, text):
        with pytest.raises(ParseError, match="line 1"):
            dio.read_cfr_csv(self.corrupt(tmp_path, text.replace("h17_re", "h17_real", 1)))

    def test_garbage_number(self, tmp_path, text):
        lines = text.split("\n")
        lines[1] = lines[1].replace(",", ",x", 6)
        with pytest.raises(ParseError, match="line 2"):
            dio.read_cfr_csv(self.corrupt(tmp_path, "\n".join(lines)))


class TestExamplesCsv:
    def test_roundtrip(self, tmp_path, dataset):
        dio.write_examples_csv(dataset, tmp_path / "e.csv")
        back = dio.read_examples_csv(tmp_path / "e.csv")
        assert np.max(np.abs(back.X - dataset.X) / np.abs(dataset.X)) < 1e-8
        for f in ("y", "subject_id", "session_id", "window_index"):
            assert np.array_equal(getattr(back, f), getattr(dataset, f))

    def test_empty_is_header_only(self, tmp_path):
        dio.write_examples_csv(Dataset.empty(), tmp_path / "e.csv")
        assert (tmp_path / "e.csv").read_text() == dio.examples_header() + "\n"
        assert len(dio.read_examples_csv(tmp_path / "e.csv")) == 0

    def test_header(self):
        h = dio.examples_header().split(",")
        assert h[:5] == ["subject_id", "session_id", "window_index", "label", "f00"]
        assert h[-1] == "f63" and len(h) == 68

    def test_unknown_label(self, tmp_path, dataset):
        dio.write_examples_csv(dataset, tmp_path / "e.csv")
        text = (tmp_path / "e.csv").read_text().replace("hydrated", "parched", 1)
        (tmp_path / "e.csv").write_text(text)
        with pytest.raises(ParseError):
            dio.read_examples_csv(tmp_path / "e.csv")

    def test_cfr_file_is_not_examples(self, tmp_path, block):
        dio.write_cfr_csv(block, tmp_path / "c.csv")
        with pytest.raises(ParseError, match="line 1"):
            dio.read_examples_csv(tmp_path / "c.csv")


class TestManifest:
    def make(self, tmp_path):
        data = tmp_path / "data.csv"
        data.write_text("a,b\n1,2\n")
        m = dio.RunManifest("0.1.0", "2026-01-01T00:00:00+00:00", seeds={"master": 5},
                            ofdm={"n_subcarriers": 64}, filter={"savgol_window": 11})
        m.add_file(data, tmp_path)
        dio.write_manifest(m, tmp_path / "manifest.json")
        return m, data

    def test_roundtrip(self, tmp_path):
        m, _ = self.make(tmp_path)
        assert dio.read_manifest(tmp_path / "manifest.json") == m

    def test_sorted_keys_and_sha256(self, tmp_path):
        m, data = self.make(tmp_path)
        doc = json.loads((tmp_path / "manifest.json").read_text())
        assert list(doc) == sorted(doc)
        import hashlib
        assert doc["files"]["data.csv"] == hashlib.sha256(data.read_bytes()).hexdigest()
        assert doc["hash_algorithm"] == "sha256"

    def test_verify(self, tmp_path):
        m, data = self.make(tmp_path)
        m.verify(tmp_path)
        data.write_text("a,b\n1,3\n")
        with pytest.raises(HashMismatchError, match="data.csv"):
            m.verify(tmp_path)

    def test_missing_file(self, tmp_path):
        m, data = self.make(tmp_path)
        data.unlink()
        with pytest.raises(HashMismatchError):
            m.verify(tmp_path)

    @pytest.mark.parametrize("key", dio.MANIFEST_REQUIRED)
    def test_missing_key(self, tmp_path, key):
        self.make(tmp_path)
        doc = json.loads((tmp_path / "manifest.json").read_text())
        del doc[key]
        (tmp_path / "manifest.json").write_text(json.dumps(doc))
        with pytest.raises(SchemaError, match=key) as exc:
            dio.read_manifest(tmp_path / "manifest.json")
        assert exc.value.key == key

    def test_version_mismatch(self, tmp_path):
        self.make(tmp_path)
        doc = json.loads((tmp_path / "manifest.json").read_text())
        doc["schema_version"] = 2
        (tmp_path / "manifest.json").write_text(json.dumps(doc))
        with pytest.raises(SchemaVersionError):
            dio.read_manifest(tmp_path / "manifest.json")

    def test_not_json(self, tmp_path):
        (tmp_path / "manifest.json").write_text("{oops")
        with pytest.raises(ParseError):
            dio.read_manifest(tmp_path / "manifest.json")

    def test_json_safe(self):
        assert dio.json_safe({"snr": float("inf"), "x": [1.0, float("nan")]}) == \
            {"snr": "inf", "x": [1.0, "nan"]}
