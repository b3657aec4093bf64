"""Confusion counts, accuracy, grouped k-fold splitting and cross-validation."""

import hashlib
import logging
from dataclasses import dataclass, field

import numpy as np

from . import classifiers, rng
from .errors import MetricError, SplitError, StratificationError
from .preprocess import standardize_apply, standardize_fit

log = logging.getLogger(__name__)

GROUPINGS = ("by_example", "by_session")


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary counts; the positive class is dehydrated (code 1)."""

    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise MetricError("confusion counts must be non-negative")

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other):
        return ConfusionMatrix(self.tp + other.tp, self.tn + other.tn,
                               self.fp + other.fp, self.fn + other.fn)

    @property
    def tpr(self):
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else float("nan")

    @property
    def fpr(self):
        return self.fp / (self.fp + self.tn) if self.fp + self.tn else float("nan")

    @classmethod
    def from_predictions(cls, y_true, y_pred, positive=1):
        t = np.asarray(y_true) == positive
        p = np.asarray(y_pred) == positive
        return cls(int(np.sum(t & p)), int(np.sum(~t & ~p)), int(np.sum(~t & p)),
                   int(np.sum(t & ~p)))


def accuracy(cm):
    """Percentage of correct predictions, 100 (tn + tp) / total."""
    if cm.total == 0:
        raise MetricError("accuracy is undefined for an empty confusion matrix")
    return 100.0 * (cm.tn + cm.tp) / cm.total


def kfold_split(n, k, seed=0, grouping="by_example", groups=None, labels=None, strata=None):
    """Partition ``range(n)`` into ``k`` folds of whole groups.

    ``by_example`` treats every index as its own group; ``by_session`` keeps
    each value of ``groups`` in one fold.  With ``labels``, groups of each
    class are shuffled and dealt round-robin (classes in ascending order,
    dealing continues across classes), so every fold gets a near-equal share
    of each class and group counts per fold differ by at most one.

    ``strata`` (e.g. subject ids) refines the dealing: groups are dealt per
    (stratum, class) cell, so each fold sees every subject in both classes as
    evenly as the counts allow.  Without this, a fold that happens to take a
    subject's hydrated sessions leaves that subject's dehydrated sessions
    over-represented in training, which biases held-out accuracy below
    chance when the classes carry no signal.
    """
    if grouping not in GROUPINGS:
        raise SplitError(f"grouping must be one of {GROUPINGS}")
    if grouping == "by_example" or groups is None:
        if grouping == "by_session":
            raise SplitError("by_session grouping needs group ids")
        groups = np.arange(n)
    groups = np.asarray(groups)
    if len(groups) != n:
        raise SplitError("groups must have one entry per example")
    uniq, inv = np.unique(groups, return_inverse=True)
    inv = inv.reshape(-1)
    if not 2 <= k <= len(uniq):
        raise SplitError(f"k={k} must lie in [2, {len(uniq)}] (number of groups)")
    if labels is None:
        group_class = np.zeros(len(uniq), dtype=np.int64)
    else:
        _, label_idx = np.unique(np.asarray(labels), return_inverse=True)
        counts = np.zeros((len(uniq), label_idx.max() + 1), dtype=np.int64)
        np.add.at(counts, (inv, label_idx.reshape(-1)), 1)
        # a mixed group follows its majority (lowest class on ties)
        group_class = np.argmax(counts, axis=1)
    if strata is not None:
        strata = np.asarray(strata)
        if len(strata) != n:
            raise SplitError("strata must have one entry per example")
        first = np.zeros(len(uniq), dtype=np.int64)
        first[inv[::-1]] = np.arange(n)[::-1]
        _, stratum_idx = np.unique(strata[first], return_inverse=True)
        group_class = stratum_idx.reshape(-1) * (group_class.max() + 1) + group_class
    stream = rng.Stream(seed, k, n, domain=rng.DOMAIN_SPLIT)
    perm = stream.permutation(len(uniq))
    fold_of_group = np.empty(len(uniq), dtype=np.int64)
    slot = 0
    for c in np.unique(group_class):
        for g in perm[group_class[perm] == c]:
            fold_of_group[g] = slot % k
            slot += 1
    fold_of = fold_of_group[inv]
    return [np.nonzero(fold_of == f)[0] for f in range(k)]


@dataclass
class CvReport:
    variant: str
    fold_accuracies: list
    fold_confusions: list
    pooled: ConfusionMatrix
    seed: int
    dataset_fingerprint: str
    k: int = field(init=False)

    def __post_init__(self):
        self.k = len(self.fold_accuracies)

    @property
    def mean_accuracy(self):
        return float(np.mean(self.fold_accuracies))

    @property
    def pooled_accuracy(self):
        return accuracy(self.pooled)


def dataset_fingerprint(dataset):
    h = hashlib.sha256()
    for arr in (dataset.X, dataset.y, dataset.subject_id, dataset.session_id,
                dataset.window_index):
        a = np.ascontiguousarray(arr)
        h.update(a.dtype.str.encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def cross_validate(dataset, spec, k=5, seed=0, grouping="by_session"):
    """K-fold CV with per-fold standardization; returns a CvReport."""
    if len(dataset) == 0:
        raise SplitError("cross_validate needs a nonempty dataset")
    groups = dataset.groups if grouping == "by_session" else None
    strata = dataset.subject_id if grouping == "by_session" else None
    folds = kfold_split(len(dataset), k, seed, grouping, groups, dataset.y, strata)
    all_idx = np.arange(len(dataset))
    fold_acc, fold_cm = [], []
    for f, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(all_idx, test_idx)
        y_train = dataset.y[train_idx]
        if len(np.unique(y_train)) < 2:
            raise StratificationError(f"training fold {f} has a single class")
        stats = standardize_fit(dataset.X[train_idx])
        fold_spec = classifiers.ModelSpec(spec.family, spec.variant, spec.hyperparameters,
                                          int(rng.derive_stream(rng.DOMAIN_MODEL, spec.seed, f)))
        model = classifiers.fit(fold_spec, standardize_apply(dataset.X[train_idx], stats),
                                y_train)
        pred = classifiers.predict_batch(model, standardize_apply(dataset.X[test_idx], stats))
        cm = ConfusionMatrix.from_predictions(dataset.y[test_idx], pred)
        fold_cm.append(cm)
        fold_acc.append(accuracy(cm))
        log.debug("%s fold %d: %.2f%%", spec.variant, f, fold_acc[-1])
    pooled = sum(fold_cm, ConfusionMatrix())
    return CvReport(spec.variant, fold_acc, fold_cm, pooled, seed,
                    dataset_fingerprint(dataset))


# Accuracy (%) of non-contact RF methods and contact-based baselines for
# dehydration detection, as reported in the comparison table.  Rendering only.
BASELINES = (
    ("Liaqat et al. 2022", "contact", 97.83),
    ("Kulkarni et al. 2021", "contact", 75.96),
    ("Liaqat et al. 2020", "contact", 91.53),
    ("Rizwan et al. 2020", "contact", 85.63),
    ("Carrieri et al. 2020", "contact", 73.91),
    ("CBDM (chest, RF)", "non-contact", 93.8),
    ("HBDM (hand, RF)", "non-contact", 96.15),
)


def baseline_table():
    return [{"method": m, "kind": kind, "accuracy": acc} for m, kind, acc in BASELINES]
