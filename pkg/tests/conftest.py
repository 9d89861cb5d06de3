import numpy as np
import pytest

_ACCEPTANCE = []


@pytest.fixture
def record():
    """Record one acceptance-criterion outcome for the end-of-run summary."""

    def _record(criterion, passed, detail=""):
        _ACCEPTANCE.append((criterion, bool(passed), detail))
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}  {detail}")


def random_psd_gram(rng, n, d=2):
    """RBF Gram matrix of random points, with a random lengthscale."""
    x = rng.standard_normal((n, d))
    ell = rng.uniform(0.3, 3.0)
    sq = ((x[:, None, :] - x[None, :, :]) ** 2).sum(-1)
    return np.exp(-sq / (2 * ell * ell))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
