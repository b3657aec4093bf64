"""Classifier catalog with a single fit/predict contract.

Every variant is binary.  Labels are class indices into ``TrainedModel.classes``
(by default ``(0, 1)``: hydrated, dehydrated).
"""

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateDataError, InputError, ModelError, SchemaVersionError
from . import ensemble, knn, nn, svm, tree

FAMILIES = ("knn", "svm", "tree", "ensemble", "nn")

CATALOG = {
    "knn-fine": ("knn", {"k": 1}),
    "knn-medium": ("knn", {"k": 10}),
    "knn-coarse": ("knn", {"k": 100}),
    "svm-linear": ("svm", {"kernel": "linear", "c": 1.0}),
    "svm-quadratic": ("svm", {"kernel": "poly2", "c": 1.0}),
    "svm-cubic": ("svm", {"kernel": "poly3", "c": 1.0}),
    "tree-fine": ("tree", {"max_splits": 100}),
    "tree-coarse": ("tree", {"max_splits": 4}),
    "ensemble-boosted-tree": ("ensemble", {"kind": "boosted-tree", "n_learners": 30}),
    "ensemble-bagged-tree": ("ensemble", {"kind": "bagged-tree", "n_learners": 30}),
    "ensemble-subspace-knn": ("ensemble", {"kind": "subspace-knn", "n_learners": 30}),
    "ensemble-subspace-discriminant": (
        "ensemble", {"kind": "subspace-discriminant", "n_learners": 30}),
    "nn-narrow": ("nn", {"hidden": [10]}),
    "nn-medium": ("nn", {"hidden": [25]}),
    "nn-wide": ("nn", {"hidden": [100]}),
    "nn-bilayered": ("nn", {"hidden": [10, 10]}),
    "nn-trilayered": ("nn", {"hidden": [10, 10, 10]}),
}

MODEL_FORMAT = "cfrsense-model"
MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ModelSpec:
    family: str
    variant: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.variant not in CATALOG:
            raise ModelError(f"unknown variant {self.variant!r}; catalog: {', '.join(CATALOG)}")
        if CATALOG[self.variant][0] != self.family:
            raise ModelError(f"variant {self.variant} belongs to family "
                             f"{CATALOG[self.variant][0]}, not {self.family}")

    @classmethod
    def from_variant(cls, variant, seed=0, **overrides):
        if variant not in CATALOG:
            raise ModelError(f"unknown variant {variant!r}; catalog: {', '.join(CATALOG)}")
        family, hp = CATALOG[variant]
        return cls(family, variant, {**hp, **overrides}, seed)

    def to_dict(self):
        return {"family": self.family, "variant": self.variant,
                "hyperparameters": dict(self.hyperparameters), "seed": self.seed}


@dataclass(frozen=True)
class TrainedModel:
    spec: ModelSpec
    state: dict
    feature_dim: int
    classes: tuple = (0, 1)


_PREDICT = {
    "knn": knn.predict,
    "svm": svm.predict,
    "tree": tree.predict,
    "ensemble": ensemble.predict,
    "nn": nn.predict,
}


def fit(spec, X, y):
    """Train ``spec`` on rows of ``X`` with labels ``y`` (two distinct values)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise InputError("X must be 2-D with one row per label")
    classes = tuple(np.unique(y).tolist())
    if len(classes) > 2:
        raise ModelError("only binary classification is supported")
    if len(classes) == 2:
        codes = (y == classes[1]).astype(np.int64)
    else:
        codes = np.zeros(len(y), dtype=np.int64)
        classes = classes + classes if classes else (0, 1)
    hp = spec.hyperparameters
    if spec.family == "knn":
        state = knn.fit(X, codes, hp.get("k", 1))
    elif spec.family == "svm":
        state = svm.fit(X, codes, hp.get("kernel", "linear"), hp.get("c", 1.0),
                        hp.get("tol", 1e-3))
    elif spec.family == "tree":
        if len(X) == 0:
            raise DegenerateDataError("tree needs training data")
        state = tree.fit(X, codes, hp.get("max_splits"))
    elif spec.family == "ensemble":
        state = ensemble.fit(X, codes, hp["kind"], hp.get("n_learners", 30), spec.seed,
                             hp.get("subspace_size"), hp.get("max_splits"))
    elif spec.family == "nn":
        state = nn.fit(X, codes, tuple(hp.get("hidden", (10,))), spec.seed)
    else:
        raise ModelError(f"unknown family {spec.family!r}")
    return TrainedModel(spec, state, X.shape[1], classes)


def predict_batch(model, X):
    """Labels for each row of ``X``, in input order."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != model.feature_dim:
        raise InputError(f"expected {model.feature_dim} features, got {X.shape[1]}")
    codes = _PREDICT[model.spec.family](model.state, X)
    return np.asarray(model.classes)[codes]


def predict(model, features):
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 1 or features.shape[0] != model.feature_dim:
        raise InputError(f"expected a {model.feature_dim}-vector, got shape {features.shape}")
    return predict_batch(model, features[None, :])[0]


def _encode(obj):
    if isinstance(obj, np.ndarray):
        return {"__ndarray__": obj.dtype.str, "shape": list(obj.shape),
                "data": obj.reshape(-1).tolist()}
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            return np.array(obj["data"], dtype=np.dtype(obj["__ndarray__"])).reshape(obj["shape"])
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def dumps(model):
    """JSON text of a trained model; floats keep their exact binary value."""
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "spec": model.spec.to_dict(),
        "feature_dim": model.feature_dim,
        "classes": list(model.classes),
        "state": _encode(model.state),
    }
    return json.dumps(doc, sort_keys=True, allow_nan=False)


def loads(text):
    doc = json.loads(text)
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_FORMAT_VERSION:
        raise SchemaVersionError(
            f"unsupported model format {doc.get('format')!r} v{doc.get('version')!r}")
    spec = ModelSpec(**doc["spec"])
    return TrainedModel(spec, _decode(doc["state"]), doc["feature_dim"], tuple(doc["classes"]))
