from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"

ACCEPTANCE_LINES = []


def two_gaussians(n_per=500, sigma=0.05, sep=1.0, seed=0, labels=("benign", "malicious")):
    rng = np.random.default_rng(seed)
    a = rng.normal((0.0, 0.0), sigma, size=(n_per, 2))
    b = rng.normal((sep, 0.0), sigma, size=(n_per, 2))
    X = np.vstack([a, b])
    y = [labels[0]] * n_per + [labels[1]] * n_per
    return X, y


def palette_histograms(n_per=2000, seed=0):
    """Histogram-like 1024-d vectors with the five palette bins per stripe in use."""
    rng = np.random.default_rng(seed)
    bins = [0, 3, 28, 224, 255]
    conc = {"benign": [1, 8, 1, 4, 1], "malicious": [6, 3, 5, 1, 2]}
    Xs, ys = [], []
    for label, c in conc.items():
        X = np.zeros((n_per, 1024))
        for s in range(4):
            X[:, [s * 256 + b for b in bins]] = rng.dirichlet(c, size=n_per)
        Xs.append(X)
        ys += [label] * n_per
    X = np.vstack(Xs)
    perm = rng.permutation(len(X))
    return X[perm], [ys[i] for i in perm]


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def corpus_dir():
    return FIXTURES / "corpus"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    number, text = marker.args
    details = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    status = "PASS" if rep.passed else "FAIL"
    line = f"[{status}] criterion {number}: {text}" + (f" ({details})" if details else "")
    ACCEPTANCE_LINES.append(line)
    print("\n" + line)
