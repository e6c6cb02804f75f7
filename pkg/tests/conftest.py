import json

import numpy as np
import pytest
from scipy import linalg

from standby_lifetime.dist import WorkingTimeModel, deterministic, erlang, exponential, uniform
from standby_lifetime.model import SystemConfig


def make_system(n: int, mu: float, spec=None, backend=None) -> SystemConfig:
    spec = spec if spec is not None else exponential(1.0)
    return SystemConfig(n=n, mu=mu, working_time=WorkingTimeModel(spec, backend))


def ctmc_generator(n: int, rate: float, mu: float) -> np.ndarray:
    """Transient generator over broken counts 0..n-1 when working times are Exp(rate)"""
    Q = np.zeros((n, n))
    for k in range(n):
        if k + 1 < n:
            Q[k, k + 1] = rate
        if k > 0:
            Q[k, k - 1] = mu
        Q[k, k] = -(rate + (mu if k > 0 else 0.0))
    return Q


def ctmc_transform(n: int, rate: float, mu: float, s: complex) -> np.ndarray:
    """E e^{-s tau_j} for all j from the continuous-time chain"""
    Q = ctmc_generator(n, rate, mu)
    exit_rates = np.zeros(n)
    exit_rates[-1] = rate
    return linalg.solve(s * np.eye(n) - Q, exit_rates.astype(complex))


def ctmc_cdf(n: int, rate: float, mu: float, j: int, t: float) -> float:
    """P(tau_j <= t) from the matrix exponential of the transient generator"""
    Q = ctmc_generator(n, rate, mu)
    survival = linalg.expm(Q * t) @ np.ones(n)
    return float(1.0 - survival[j])


@pytest.fixture
def exp_model():
    return WorkingTimeModel(exponential(1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(
    params=[exponential(1.0), erlang(2, 2.0), uniform(0.0, 2.0), deterministic(1.0)],
    ids=["exponential", "erlang", "uniform", "deterministic"],
)
def standard_spec(request):
    return request.param


@pytest.fixture
def minimal_config_data():
    return {
        "system": {"n": 2, "mu": 1.0, "distribution": {"family": "exponential", "params": {"rate": 1.0}}},
        "seed": 42,
        "samples": 1000,
    }


@pytest.fixture
def write_config(tmp_path):
    def write(data, name="run.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write
