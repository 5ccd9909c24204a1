import numpy as np
import pytest

from concrete_mm import data, nsga2, pipeline


@pytest.fixture(scope="session")
def dataset():
    return data.load_default()


@pytest.fixture(scope="session")
def trained(dataset):
    """Full pipeline on the real data, seed 0 (about 20 s)."""
    return pipeline.train_pipeline(dataset, seed=0)


@pytest.fixture(scope="session")
def constraints(dataset):
    return nsga2.ConstraintSet.from_dataset(dataset)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_csv(path, rows, header=data.COLUMNS):
    lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# -- acceptance reporting ----------------------------------------------------

ACCEPTANCE_RESULTS = {}


@pytest.fixture
def record_criterion():
    """Store a one-line verdict for the acceptance summary."""

    def record(key, title, passed, detail=""):
        ACCEPTANCE_RESULTS[key] = (title, passed, detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
        title, passed, detail = ACCEPTANCE_RESULTS[key]
        verdict = passed if isinstance(passed, str) else ("PASS" if passed else "FAIL")
        terminalreporter.write_line(f"criterion {key:<3} {verdict:<6} {title}: {detail}")
