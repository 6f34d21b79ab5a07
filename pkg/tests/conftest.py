import json
import pathlib

import numpy as np
import pytest

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

# filled by test_acceptance.py, reported at the end of the session
ACCEPTANCE_RESULTS = {}


@pytest.fixture(scope="session")
def oracle():
    """High-precision reference values (see tests/oracle/generate_fixtures.py)."""
    return json.loads((FIXTURES / "oracle.json").read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_unit(p, rng):
    v = rng.standard_normal(p)
    return v / np.linalg.norm(v)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


def significant_digits(literal):
    """Number of significant digits in a decimal literal such as "0.00503"."""
    digits = literal.replace(".", "").lstrip("0")
    return len(digits)


def matches_literal(value, literal, max_digits=3):
    """True when ``value`` rounds to ``literal`` at the literal's own precision, capped at ``max_digits``."""
    n = min(significant_digits(literal), max_digits)
    return f"{value:.{n}g}" == f"{float(literal):.{n}g}"


def watson_mixture_data(p, kappas, sizes, seed, mus=None):
    """Stack samples from W_p(mu_j, kappa_j); returns (X, labels, mus).

    Means default to independent uniformly random axes drawn from ``seed``.
    """
    from watsonmle import WatsonParams, sample

    rng = np.random.default_rng(seed)
    if mus is None:
        mus = [random_unit(p, rng) for _ in kappas]
    parts, labels = [], []
    for j, (mu, kappa, n) in enumerate(zip(mus, kappas, sizes)):
        parts.append(sample(WatsonParams(mu, kappa), n, seed=int(rng.integers(2**32))))
        labels.append(np.full(n, j))
    return np.vstack(parts), np.concatenate(labels), np.array(mus)
