"""
Fixtures compartilhadas da suíte de testes
"""

import numpy as np
import pytest

from distribution_factory import build_distribution


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: simulações com 10^5 ou mais sorteios")


def spec(family: str, **params) -> dict:
    return {"family": family, "params": params}


@pytest.fixture(scope="session")
def gaussian():
    return build_distribution(spec("gaussian", mean=0.0, var=1.0))


@pytest.fixture(scope="session")
def uniform():
    return build_distribution(spec("uniform", a=-1.0, b=1.0))


@pytest.fixture(scope="session")
def laplace():
    return build_distribution(spec("laplace", scale=1.0))


@pytest.fixture(scope="session")
def exponential():
    return build_distribution(spec("exponential", rate=1.0))


@pytest.fixture(scope="session")
def centered_bernoulli_half():
    return build_distribution(spec("centered-bernoulli", p=0.5))


@pytest.fixture(scope="session")
def poisson2():
    return build_distribution(spec("poisson", **{"lambda": 2.0}))


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    """Diretório de trabalho isolado: log, cache e saídas ficam em tmp_path"""
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def random_matrix():
    def make(seed: int, n: int = 20) -> np.ndarray:
        return np.random.default_rng(seed).random((n, n))
    return make
