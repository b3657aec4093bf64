"""On-disk formats: CFR and example CSVs, and the JSON run manifest.

Both CSV schemas use UTF-8, LF line endings and floats printed with 9
significant digits (Python's shortest-correct rounding of the binary value,
which is round-half-even on the exact decimal expansion).
"""

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, HashMismatchError, ParseError, SchemaError, SchemaVersionError
from .estimation import CfrBlock, CfrSnapshot
from .labels import Label
from .preprocess import Dataset

N_SUBCARRIERS = 64
N_FEATURES = 64
FLOAT_FORMAT = ".9g"

CFR_ID_COLUMNS = ("subject_id", "session_id", "frame_index", "label")
EXAMPLE_ID_COLUMNS = ("subject_id", "session_id", "window_index", "label")

MANIFEST_SCHEMA = "cfrsense-manifest"
MANIFEST_VERSION = 1
MANIFEST_REQUIRED = ("schema", "schema_version", "tool_version", "created", "files")
HASH_ALGORITHM = "sha256"


def cfr_header(n=N_SUBCARRIERS):
    cols = list(CFR_ID_COLUMNS)
    for i in range(n):
        cols += [f"h{i:02d}_re", f"h{i:02d}_im"]
    return ",".join(cols)


def examples_header(n=N_FEATURES):
    return ",".join(list(EXAMPLE_ID_COLUMNS) + [f"f{i:02d}" for i in range(n)])


def _fmt(values):
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise DataError("refusing to write a non-finite value")
    return ",".join(format(v, FLOAT_FORMAT) for v in values.tolist())


def _write_lines(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _read_rows(path, header, n_numeric):
    """Yield (line_number, id_fields, float array) after validating the header."""
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if first.rstrip("\n") != header:
            raise ParseError("header does not match the expected schema", 1)
        width = 4 + n_numeric
        for lineno, line in enumerate(fh, start=2):
            if not line.endswith("\n"):
                raise ParseError("truncated row (no line terminator)", lineno)
            fields = line[:-1].split(",")
            if len(fields) != width:
                raise ParseError(f"expected {width} fields, found {len(fields)}", lineno)
            try:
                ids = [int(f) for f in fields[:3]]
                values = np.array([float(f) for f in fields[4:]])
            except ValueError as exc:
                raise ParseError(f"malformed number ({exc})", lineno) from None
            try:
                label = Label(fields[3])
            except ValueError:
                raise ParseError(f"unknown label {fields[3]!r}", lineno) from None
            if not np.all(np.isfinite(values)):
                raise DataError(f"line {lineno}: non-finite value")
            yield lineno, ids, label, values


def write_cfr_csv(snapshots, path):
    """Write snapshots (or a CfrBlock) one row per frame."""
    def rows():
        for s in snapshots:
            h = np.asarray(s.h, dtype=np.complex128)
            inter = np.column_stack([h.real, h.imag]).reshape(-1)
            yield (f"{int(s.subject_id)},{int(s.session_id)},{int(s.frame_index)},"
                   f"{Label(s.label).value},{_fmt(inter)}")
    _write_lines(path, cfr_header(), rows())


def read_cfr_csv(path):
    """Inverse of write_cfr_csv; returns a list of CfrSnapshot."""
    out = []
    for _, (subject, session, frame), label, v in _read_rows(path, cfr_header(),
                                                             2 * N_SUBCARRIERS):
        out.append(CfrSnapshot(v[0::2] + 1j * v[1::2], frame, session, subject, label))
    return out


def blocks_from_snapshots(snapshots):
    """Group snapshots into per-session CfrBlocks, keeping first-seen order."""
    groups = {}
    for s in snapshots:
        groups.setdefault((s.subject_id, s.session_id, Label(s.label)), []).append(s)
    return [CfrBlock.from_snapshots(g) for g in groups.values()]


def write_examples_csv(examples, path):
    """Write a Dataset (or any iterable of LabeledExample)."""
    def rows():
        for e in examples:
            yield (f"{int(e.subject_id)},{int(e.session_id)},{int(e.window_index)},"
                   f"{Label(e.label).value},{_fmt(e.features)}")
    _write_lines(path, examples_header(), rows())


def read_examples_csv(path):
    subject, session, window, y, X = [], [], [], [], []
    for _, (sub, ses, win), label, v in _read_rows(path, examples_header(), N_FEATURES):
        subject.append(sub)
        session.append(ses)
        window.append(win)
        y.append(label.code)
        X.append(v)
    if not X:
        return Dataset.empty(N_FEATURES)
    ints = lambda a: np.array(a, dtype=np.int64)  # noqa: E731
    return Dataset(np.stack(X), ints(y), ints(subject), ints(session), ints(window))


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Everything needed to reproduce a run, plus hashes of what it wrote.

    ``files`` maps paths relative to the manifest's directory to hex digests.
    """

    tool_version: str
    created: str
    files: dict = field(default_factory=dict)
    ofdm: dict = field(default_factory=dict)
    scenarios: list = field(default_factory=list)
    filter: dict = field(default_factory=dict)
    models: list = field(default_factory=list)
    seeds: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def add_file(self, path, root):
        rel = Path(os.path.relpath(path, root)).as_posix()
        self.files[rel] = file_sha256(path)

    def to_dict(self):
        return {
            "schema": MANIFEST_SCHEMA,
            "schema_version": MANIFEST_VERSION,
            "hash_algorithm": HASH_ALGORITHM,
            "tool_version": self.tool_version,
            "created": self.created,
            "files": dict(self.files),
            "ofdm": self.ofdm,
            "scenarios": self.scenarios,
            "filter": self.filter,
            "models": self.models,
            "seeds": self.seeds,
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise SchemaError("manifest must be a JSON object")
        for key in MANIFEST_REQUIRED:
            if key not in doc:
                raise SchemaError(f"manifest is missing required key {key!r}", key)
        if doc["schema"] != MANIFEST_SCHEMA or doc["schema_version"] != MANIFEST_VERSION:
            raise SchemaVersionError(
                f"unsupported manifest {doc['schema']!r} version {doc['schema_version']!r}; "
                f"expected {MANIFEST_SCHEMA!r} version {MANIFEST_VERSION}", "schema_version")
        if not isinstance(doc["files"], dict):
            raise SchemaError("'files' must map paths to digests", "files")
        return cls(doc["tool_version"], doc["created"], dict(doc["files"]),
                   doc.get("ofdm", {}), doc.get("scenarios", []), doc.get("filter", {}),
                   doc.get("models", []), doc.get("seeds", {}), doc.get("extra", {}))

    def verify(self, root):
        """Raise HashMismatchError for the first listed file whose bytes changed."""
        for rel in sorted(self.files):
            path = Path(root) / rel
            if not path.is_file() or file_sha256(path) != self.files[rel]:
                raise HashMismatchError(str(path))


def write_manifest(manifest, path):
    text = json.dumps(manifest.to_dict(), sort_keys=True, indent=2, allow_nan=False)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text + "\n")


def read_manifest(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"manifest is not valid JSON: {exc.msg}", exc.lineno) from None
    return RunManifest.from_dict(doc)


def json_safe(value):
    """Replace non-finite floats (e.g. a noiseless SNR) with strings for JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value
