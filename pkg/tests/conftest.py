import numpy as np
import pytest

from cfrsense.classifiers import svm

SVM_AUDIT = pytest.StashKey[list]()
CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion number")
    config.stash[SVM_AUDIT] = []
    config.stash[CRITERIA] = {}


@pytest.fixture(autouse=True)
def audit_svm_fits(request, monkeypatch):
    """Check dual feasibility of every SVM trained anywhere in the suite."""
    real_fit = svm.fit
    audit = request.config.stash[SVM_AUDIT]

    def checked_fit(X, y, kernel="linear", c=1.0, tol=1e-3):
        state = real_fit(X, y, kernel, c, tol)
        alpha = state["alpha"]
        ys = np.where(np.asarray(y) == 1, 1.0, -1.0)
        eq = abs(float(alpha @ ys))
        ok = eq <= 1e-6 and alpha.min() >= 0 and alpha.max() <= c
        audit.append((request.node.nodeid, kernel, float(c), eq, ok))
        assert ok, f"infeasible dual: |sum a y|={eq:.3g}, a in [{alpha.min()}, {alpha.max()}]"
        return state

    monkeypatch.setattr(svm, "fit", checked_fit)


@pytest.fixture
def svm_audit(request):
    return request.config.stash[SVM_AUDIT]


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None and (report.when == "call" or report.failed or report.skipped):
        n, text = mark.args
        outcome = "PASS" if report.passed else "FAIL"
        results = item.config.stash[CRITERIA]
        if report.when == "call" or n not in results:
            results[n] = (outcome, text)
    return report


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash[CRITERIA]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        outcome, text = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {outcome}  {text}")
