import numpy as np
import pytest

from osserman_workbench.gff import build_canonical_gff, random_hermitian_J
from osserman_workbench.models import ModelParams, build_theorem_curvature


def theorem_tensor(n, s, c1=2.0, c2=-1.0, seed=0, J=None):
    S = build_canonical_gff(n, s)
    J = random_hermitian_J(n, seed) if J is None else J
    p = ModelParams(c1, c2, J)
    return S, p, build_theorem_curvature(S, p)


@pytest.fixture
def s22():
    return theorem_tensor(2, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def unit_im_phi(S, rng):
    v = rng.standard_normal(2 * S.n)
    return S.embed_im_phi(v / np.linalg.norm(v))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
