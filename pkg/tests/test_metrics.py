import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfrsense.classifiers import ModelSpec
from cfrsense.errors import MetricError, SplitError, StratificationError
from cfrsense.metrics import (BASELINES, ConfusionMatrix, accuracy, baseline_table,
                              cross_validate, dataset_fingerprint, kfold_split)
from cfrsense.preprocess import Dataset


def toy_dataset(n_sessions=10, per_session=6, gap=10.0, seed=0):
    gen = np.random.default_rng(seed)
    rows, y, subj, sess, win = [], [], [], [], []
    for s in range(n_sessions):
        label = s % 2
        for w in range(per_session):
            rows.append(gen.standard_normal(4) + gap * label)
            y.append(label)
            subj.append(s // 4)
            sess.append(s)
            win.append(w)
    ints = lambda a: np.array(a, dtype=np.int64)  # noqa: E731
    return Dataset(np.array(rows), ints(y), ints(subj), ints(sess), ints(win))


class TestAccuracy:
    def test_examples(self):
        assert accuracy(ConfusionMatrix(tp=45, tn=45, fp=5, fn=5)) == 90.0
        assert accuracy(ConfusionMatrix(tp=3, tn=7)) == 100.0
        assert accuracy(ConfusionMatrix(fp=1, fn=1)) == 0.0

    def test_empty(self):
        with pytest.raises(MetricError):
            accuracy(ConfusionMatrix())

    def test_negative_counts(self):
        with pytest.raises(MetricError):
            ConfusionMatrix(tp=-1)

    @given(st.tuples(*[st.integers(0, 10_000)] * 4).filter(lambda t: sum(t) > 0))
    def test_definition(self, counts):
        tp, tn, fp, fn = counts
        assert accuracy(ConfusionMatrix(tp, tn, fp, fn)) == 100.0 * (tn + tp) / sum(counts)

    def test_from_predictions_positive_is_dehydrated(self):
        cm = ConfusionMatrix.from_predictions([1, 1, 0, 0, 1], [1, 0, 0, 1, 1])
        assert (cm.tp, cm.tn, cm.fp, cm.fn) == (2, 1, 1, 1)
        assert cm.tpr == pytest.approx(2 / 3) and cm.fpr == 0.5

    def test_addition(self):
        assert ConfusionMatrix(1, 2, 3, 4) + ConfusionMatrix(1, 1, 1, 1) == \
            ConfusionMatrix(2, 3, 4, 5)


class TestKfold:
    def test_ten_by_five(self):
        folds = kfold_split(10, 5, seed=1)
        assert [len(f) for f in folds] == [2] * 5
        assert sorted(np.concatenate(folds).tolist()) == list(range(10))

    def test_seven_by_three(self):
        assert sorted(len(f) for f in kfold_split(7, 3)) == [2, 2, 3]

    @settings(max_examples=300, deadline=None)
    @given(st.integers(2, 200), st.integers(2, 10), st.integers(0, 2**32))
    def test_partition_laws(self, n, k, seed):
        if k > n:
            with pytest.raises(SplitError):
                kfold_split(n, k, seed)
            return
        folds = kfold_split(n, k, seed)
        flat = np.concatenate(folds)
        assert len(folds) == k
        assert len(flat) == n and len(np.unique(flat)) == n
        sizes = [len(f) for f in folds]
        assert max(sizes) - min(sizes) <= 1

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 40), st.integers(2, 10), st.integers(0, 2**32), st.data())
    def test_grouped_laws(self, n_groups, k, seed, data):
        k = min(k, n_groups)
        sizes = data.draw(st.lists(st.integers(1, 5), min_size=n_groups, max_size=n_groups))
        groups = np.repeat(np.arange(n_groups), sizes)
        labels = np.repeat(np.arange(n_groups) % 2, sizes)
        folds = kfold_split(len(groups), k, seed, "by_session", groups, labels)
        flat = np.concatenate(folds)
        assert sorted(flat.tolist()) == list(range(len(groups)))
        per_fold = [set(groups[f].tolist()) for f in folds]
        for a in range(k):
            for b in range(a + 1, k):
                assert not per_fold[a] & per_fold[b]
        counts = [len(p) for p in per_fold]
        assert max(counts) - min(counts) <= 1

    def test_default_campaign_layout(self):
        # 5 subjects x 10 sessions x 60 windows, session ids reused across subjects
        subj = np.repeat(np.arange(5), 600)
        sess = np.tile(np.repeat(np.arange(10), 60), 5)
        y = (sess >= 5).astype(int)
        ds = Dataset(np.zeros((3000, 1)), y, subj, sess, np.tile(np.arange(60), 50))
        folds = kfold_split(3000, 5, 0, "by_session", ds.groups, ds.y, ds.subject_id)
        for f in folds:
            keys = set(zip(subj[f].tolist(), sess[f].tolist()))
            assert len(keys) == 10 and len(f) == 600
            # one hydrated and one dehydrated session of every subject
            for s in range(5):
                assert sorted(y[f][subj[f] == s][::60].tolist()) == [0, 1]

    def test_seed_changes_assignment(self):
        assert not all(np.array_equal(a, b) for a, b in
                       zip(kfold_split(50, 5, 0), kfold_split(50, 5, 1)))

    def test_too_many_folds(self):
        with pytest.raises(SplitError):
            kfold_split(4, 5)
        with pytest.raises(SplitError):
            kfold_split(10, 4, grouping="by_session", groups=np.repeat([0, 1, 2], [3, 3, 4]))

    def test_bad_grouping(self):
        with pytest.raises(SplitError):
            kfold_split(10, 2, grouping="by_subject")


class TestCrossValidate:
    def test_separated_knn_fine(self):
        rep = cross_validate(toy_dataset(), ModelSpec.from_variant("knn-fine"), k=5)
        assert rep.pooled_accuracy == 100.0
        assert rep.k == 5 and len(rep.fold_confusions) == 5

    def test_pooled_total_and_sum(self):
        ds = toy_dataset(gap=0.5)
        rep = cross_validate(ds, ModelSpec.from_variant("tree-coarse"), k=5, seed=3)
        assert rep.pooled.total == len(ds)
        assert sum(rep.fold_confusions, ConfusionMatrix()) == rep.pooled

    def test_no_session_in_two_folds(self):
        ds = toy_dataset()
        folds = kfold_split(len(ds), 5, 0, "by_session", ds.groups, ds.y)
        owners = {}
        for f, idx in enumerate(folds):
            for g in np.unique(ds.groups[idx]):
                assert owners.setdefault(int(g), f) == f

    def test_deterministic(self):
        ds = toy_dataset(gap=1.0)
        spec = ModelSpec.from_variant("nn-narrow", seed=2)
        a = cross_validate(ds, spec, 5, 7)
        b = cross_validate(ds, spec, 5, 7)
        assert a.fold_accuracies == b.fold_accuracies and a.pooled == b.pooled

    def test_single_class_training_fold(self):
        ds = toy_dataset(n_sessions=3)
        ds.y[:] = 0
        ds.y[ds.session_id == 1] = 1
        with pytest.raises(StratificationError):
            cross_validate(ds, ModelSpec.from_variant("knn-fine"), k=3)

    def test_empty(self):
        with pytest.raises(SplitError):
            cross_validate(Dataset.empty(), ModelSpec.from_variant("knn-fine"))

    def test_fingerprint_sensitive(self):
        ds = toy_dataset()
        fp = dataset_fingerprint(ds)
        ds.X[0, 0] += 1e-12
        assert dataset_fingerprint(ds) != fp


class TestBaselines:
    def test_values(self):
        table = {row["method"]: row["accuracy"] for row in baseline_table()}
        assert table["CBDM (chest, RF)"] == 93.8
        assert table["HBDM (hand, RF)"] == 96.15
        contact = [r["accuracy"] for r in baseline_table() if r["kind"] == "contact"]
        assert max(contact) == 97.83
        assert len(BASELINES) == 7
