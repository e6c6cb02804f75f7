"""Working-time law G of an element

Families are pydantic models discriminated on ``family`` so that they can be
read straight from the run configuration::

    {"family": "erlang", "params": {"shape": 3, "rate": 2.0}}

``WorkingTimeModel`` wraps a family together with its mean b and the active
transform backend. The module-level functions below are the operations the
transform solver and the simulators consume:

    g(s)      = int e^{-sx} dG(x)                              (lst)
    eps(mu)   = g(mu) = P(repair outlasts a working period)    (epsilon)
    g_j(s)    = int e^{-(s+mu)x} (mu x)^j / j! dG(x)           (weighted_lst)
    gamma_j   = int x e^{-mu x} (mu x)^j / j! dG(x)            (gamma)
"""

import cmath
import logging
import math
from enum import Enum
from functools import lru_cache
from typing import Annotated, Callable, ClassVar, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator
from scipy import optimize, special, stats

from standby_lifetime import quadrature
from standby_lifetime.errors import DomainError

logger = logging.getLogger(__name__)

# Poisson tail mass left out by the weight truncation
TRUNCATION_TAIL = 1e-12
# Quadrature results kept per transform kind
MEMO_SIZE = 4096


class Family(str, Enum):
    EXPONENTIAL = "exponential"
    ERLANG = "erlang"
    DETERMINISTIC = "deterministic"
    UNIFORM = "uniform"
    HYPEREXPONENTIAL = "hyperexponential"
    WEIBULL = "weibull"
    LOGNORMAL = "lognormal"


class TransformBackend(str, Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"


class _Params(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


class ExponentialParams(_Params):
    rate: float = Field(gt=0)


class ErlangParams(_Params):
    shape: int = Field(ge=1)
    rate: float = Field(gt=0)


class DeterministicParams(_Params):
    value: float = Field(gt=0)


class UniformParams(_Params):
    lo: float = Field(ge=0)
    hi: float

    @model_validator(mode="after")
    def _check_order(self):
        if not self.hi > self.lo:
            raise ValueError("hi must be greater than lo")
        return self


class HyperexponentialParams(_Params):
    weights: Tuple[float, ...] = Field(min_length=1)
    rates: Tuple[float, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_mixture(self):
        if len(self.weights) != len(self.rates):
            raise ValueError("weights and rates must have the same length")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        if any(r <= 0 for r in self.rates):
            raise ValueError("rates must be positive")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        return self


class WeibullParams(_Params):
    shape: float = Field(gt=0)
    scale: float = Field(gt=0)


class LognormalParams(_Params):
    log_mean: float
    log_sd: float = Field(gt=0)


def _log_poisson_weight(j: int, z: float) -> float:
    """log of z^j / j! for z > 0"""
    return (j * math.log(z) if j else 0.0) - math.lgamma(j + 1)


class _Law(BaseModel):
    """Behaviour shared by all working-time families"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    closed_form_lst: ClassVar[bool] = True
    closed_form_weighted: ClassVar[bool] = True

    def analytic_mean(self) -> float:
        return float(self.frozen().mean())

    def frozen(self):
        """Frozen scipy distribution, or None for laws scipy does not ship"""
        return None

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def cdf(self, t):
        return self.frozen().cdf(t)

    def quantile(self, p: float) -> float:
        return float(self.frozen().ppf(p))

    def lst(self, s: complex) -> complex:
        raise NotImplementedError(f"{self.family} has no closed-form transform")

    def weighted_lst(self, j: int, s: complex, mu: float) -> complex:
        raise NotImplementedError(f"{self.family} has no closed-form weighted transform")

    def gamma(self, j: int, mu: float) -> float:
        raise NotImplementedError(f"{self.family} has no closed-form gamma")


class ExponentialSpec(_Law):
    family: Literal["exponential"] = "exponential"
    params: ExponentialParams

    def frozen(self):
        return stats.expon(scale=1.0 / self.params.rate)

    def analytic_mean(self) -> float:
        return 1.0 / self.params.rate

    def draw(self, rng, size):
        return rng.exponential(1.0 / self.params.rate, size)

    def lst(self, s):
        lam = self.params.rate
        return lam / (lam + s)

    def weighted_lst(self, j, s, mu):
        lam = self.params.rate
        return cmath.exp(math.log(lam) + (j * math.log(mu) if j else 0.0) - (j + 1) * cmath.log(s + mu + lam))

    def gamma(self, j, mu):
        lam = self.params.rate
        log_mu = j * math.log(mu) if j else 0.0
        return math.exp(math.log(lam) + log_mu + math.log(j + 1) - (j + 2) * math.log(mu + lam))


class ErlangSpec(_Law):
    family: Literal["erlang"] = "erlang"
    params: ErlangParams

    def frozen(self):
        return stats.gamma(a=self.params.shape, scale=1.0 / self.params.rate)

    def analytic_mean(self) -> float:
        return self.params.shape / self.params.rate

    def draw(self, rng, size):
        return rng.gamma(self.params.shape, 1.0 / self.params.rate, size)

    def lst(self, s):
        lam = self.params.rate
        return (lam / (lam + s)) ** self.params.shape

    def _log_coefficient(self, j: int, mu: float) -> float:
        k, lam = self.params.shape, self.params.rate
        return (
            math.lgamma(j + k)
            - math.lgamma(j + 1)
            - math.lgamma(k)
            + (j * math.log(mu) if j else 0.0)
            + k * math.log(lam)
        )

    def weighted_lst(self, j, s, mu):
        k, lam = self.params.shape, self.params.rate
        return cmath.exp(self._log_coefficient(j, mu) - (j + k) * cmath.log(s + mu + lam))

    def gamma(self, j, mu):
        k, lam = self.params.shape, self.params.rate
        return math.exp(self._log_coefficient(j, mu) + math.log(j + k) - (j + k + 1) * math.log(mu + lam))


class DeterministicSpec(_Law):
    """Point mass at ``value``; admitted beyond continuous laws for its exact chain oracle"""

    family: Literal["deterministic"] = "deterministic"
    params: DeterministicParams

    def analytic_mean(self) -> float:
        return self.params.value

    def draw(self, rng, size):
        return np.full(size, self.params.value)

    def cdf(self, t):
        return np.where(np.asarray(t) >= self.params.value, 1.0, 0.0)

    def quantile(self, p):
        return self.params.value

    def lst(self, s):
        return cmath.exp(-s * self.params.value)

    def weighted_lst(self, j, s, mu):
        d = self.params.value
        return cmath.exp(-(s + mu) * d + _log_poisson_weight(j, mu * d))

    def gamma(self, j, mu):
        d = self.params.value
        return d * math.exp(-mu * d + _log_poisson_weight(j, mu * d))


class UniformSpec(_Law):
    family: Literal["uniform"] = "uniform"
    params: UniformParams

    closed_form_weighted: ClassVar[bool] = False

    def frozen(self):
        return stats.uniform(loc=self.params.lo, scale=self.params.hi - self.params.lo)

    def analytic_mean(self) -> float:
        return 0.5 * (self.params.lo + self.params.hi)

    def draw(self, rng, size):
        return rng.uniform(self.params.lo, self.params.hi, size)

    def lst(self, s):
        lo, hi = self.params.lo, self.params.hi
        z = s * (hi - lo)
        if abs(z) < 1e-3:
            ratio = 1 - z / 2 + z**2 / 6 - z**3 / 24 + z**4 / 120
        else:
            ratio = (1 - cmath.exp(-z)) / z
        return cmath.exp(-s * lo) * ratio


class HyperexponentialSpec(_Law):
    family: Literal["hyperexponential"] = "hyperexponential"
    params: HyperexponentialParams

    def components(self) -> List[Tuple[float, ExponentialSpec]]:
        return [
            (w, ExponentialSpec(params=ExponentialParams(rate=r)))
            for w, r in zip(self.params.weights, self.params.rates)
        ]

    def analytic_mean(self) -> float:
        return sum(w / r for w, r in zip(self.params.weights, self.params.rates))

    def draw(self, rng, size):
        rates = np.asarray(self.params.rates)
        branch = rng.choice(len(rates), size=size, p=np.asarray(self.params.weights))
        return rng.exponential(1.0, size) / rates[branch]

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return sum(w * -np.expm1(-r * t) for w, r in zip(self.params.weights, self.params.rates))

    def quantile(self, p):
        upper = max(-math.log1p(-p) / r for r in self.params.rates)
        return float(optimize.brentq(lambda x: float(self.cdf(x)) - p, 0.0, upper, xtol=1e-14))

    def lst(self, s):
        return sum(w * c.lst(s) for w, c in self.components())

    def weighted_lst(self, j, s, mu):
        return sum(w * c.weighted_lst(j, s, mu) for w, c in self.components())

    def gamma(self, j, mu):
        return sum(w * c.gamma(j, mu) for w, c in self.components())


class WeibullSpec(_Law):
    family: Literal["weibull"] = "weibull"
    params: WeibullParams

    closed_form_lst: ClassVar[bool] = False
    closed_form_weighted: ClassVar[bool] = False

    def frozen(self):
        return stats.weibull_min(c=self.params.shape, scale=self.params.scale)

    def analytic_mean(self) -> float:
        return self.params.scale * math.gamma(1.0 + 1.0 / self.params.shape)

    def draw(self, rng, size):
        return self.params.scale * rng.weibull(self.params.shape, size)


class LognormalSpec(_Law):
    family: Literal["lognormal"] = "lognormal"
    params: LognormalParams

    closed_form_lst: ClassVar[bool] = False
    closed_form_weighted: ClassVar[bool] = False

    def frozen(self):
        return stats.lognorm(s=self.params.log_sd, scale=math.exp(self.params.log_mean))

    def analytic_mean(self) -> float:
        return math.exp(self.params.log_mean + 0.5 * self.params.log_sd**2)

    def draw(self, rng, size):
        return rng.lognormal(self.params.log_mean, self.params.log_sd, size)


DistributionSpec = Annotated[
    Union[
        ExponentialSpec,
        ErlangSpec,
        DeterministicSpec,
        UniformSpec,
        HyperexponentialSpec,
        WeibullSpec,
        LognormalSpec,
    ],
    Field(discriminator="family"),
]

_SPEC_ADAPTER = TypeAdapter(DistributionSpec)


def parse_distribution(data: dict) -> DistributionSpec:
    """Validate a ``{"family": ..., "params": {...}}`` mapping"""
    return _SPEC_ADAPTER.validate_python(data)


def exponential(rate: float) -> ExponentialSpec:
    return ExponentialSpec(params=ExponentialParams(rate=rate))


def erlang(shape: int, rate: float) -> ErlangSpec:
    return ErlangSpec(params=ErlangParams(shape=shape, rate=rate))


def deterministic(value: float) -> DeterministicSpec:
    return DeterministicSpec(params=DeterministicParams(value=value))


def uniform(lo: float, hi: float) -> UniformSpec:
    return UniformSpec(params=UniformParams(lo=lo, hi=hi))


def hyperexponential(weights, rates) -> HyperexponentialSpec:
    return HyperexponentialSpec(params=HyperexponentialParams(weights=tuple(weights), rates=tuple(rates)))


def weibull(shape: float, scale: float) -> WeibullSpec:
    return WeibullSpec(params=WeibullParams(shape=shape, scale=scale))


def lognormal(log_mean: float, log_sd: float) -> LognormalSpec:
    return LognormalSpec(params=LognormalParams(log_mean=log_mean, log_sd=log_sd))


class WorkingTimeModel:
    """Working-time law G with its mean b and the active transform backend.

    Immutable after construction and safe for concurrent reads. Quadrature
    results are memoised in bounded module-level LRU caches keyed on the
    model, which hashes by law and backend.
    """

    def __init__(self, spec: DistributionSpec, backend: Optional[TransformBackend] = None):
        if backend is None:
            backend = TransformBackend.CLOSED_FORM if spec.closed_form_lst else TransformBackend.QUADRATURE
        backend = TransformBackend(backend)
        if backend is TransformBackend.CLOSED_FORM and not spec.closed_form_lst:
            raise DomainError(f"{spec.family} has no closed-form transform; use the quadrature backend")

        mean_b = float(spec.analytic_mean())
        if not (math.isfinite(mean_b) and mean_b > 0):
            raise DomainError(f"{spec.family} working time must have a finite positive mean", mean=mean_b)

        self._spec = spec
        self._backend = backend
        self._mean_b = mean_b

    @property
    def spec(self) -> DistributionSpec:
        return self._spec

    @property
    def mean_b(self) -> float:
        return self._mean_b

    @property
    def transform_backend(self) -> TransformBackend:
        return self._backend

    @property
    def family(self) -> Family:
        return Family(self._spec.family)

    def uses_closed_form(self, weighted: bool = False) -> bool:
        if self._backend is not TransformBackend.CLOSED_FORM:
            return False
        return self._spec.closed_form_weighted if weighted else True

    def with_backend(self, backend: TransformBackend) -> "WorkingTimeModel":
        return WorkingTimeModel(self._spec, backend)

    def __eq__(self, other) -> bool:
        return isinstance(other, WorkingTimeModel) and (self._spec, self._backend) == (other._spec, other._backend)

    def __hash__(self) -> int:
        return hash((self._spec, self._backend))

    def __repr__(self) -> str:
        return f"WorkingTimeModel({self._spec!r}, backend={self._backend.value})"


def _check_s(s) -> complex:
    s = complex(s)
    if s.real < 0:
        raise DomainError(f"transform argument must have Re(s) >= 0, got {s}")
    return s


def _check_mu(mu: float) -> float:
    mu = float(mu)
    if not mu > 0:
        raise DomainError(f"repair rate must be positive, got {mu}")
    return mu


def _check_j(j: int) -> int:
    if int(j) != j or j < 0:
        raise DomainError(f"index j must be a nonnegative integer, got {j}")
    return int(j)


def _expect(
    model: WorkingTimeModel,
    amplitude: Callable[[np.ndarray], np.ndarray],
    omega: float,
    label: str,
    peaks: Sequence[float] = (),
    decay: float = 0.0,
) -> complex:
    """E[amplitude(eta) e^{-i omega eta}] for a real ``amplitude`` bounded by e^{-decay x}.

    The body up to the BODY_LEVEL quantile is integrated in probability space
    and the tail in x against the density, up to the TAIL_LEVEL quantile (or
    the end of a bounded support). The tail stops early once e^{-decay x}
    drops below the tolerance.
    """
    spec = model.spec
    if isinstance(spec, DeterministicSpec):
        d = spec.params.value
        return complex(amplitude(np.array([d]))[0] * cmath.exp(-1j * omega * d))
    if isinstance(spec, HyperexponentialSpec):
        parts = [w * _expect(WorkingTimeModel(c), amplitude, omega, label, peaks, decay) for w, c in spec.components()]
        return sum(parts)

    def h(x):
        return amplitude(x) * np.exp(-1j * omega * x)

    frozen = spec.frozen()
    upper = float(frozen.support()[1])
    x_split = float(frozen.ppf(quadrature.BODY_LEVEL))
    x_max = upper if math.isfinite(upper) else float(frozen.ppf(quadrature.TAIL_LEVEL))
    if decay > 0:
        x_max = max(x_split, min(x_max, math.log(4.0 / quadrature.ABS_TOL) / decay))

    levels = [0.0, *quadrature.QUANTILE_LEVELS, quadrature.BODY_LEVEL]
    tail_points = [x_split, x_max]
    tail_points += [x for x in map(float, frozen.ppf(np.asarray(quadrature.TAIL_QUANTILES))) if x_split < x < x_max]
    for x in peaks:
        if x < x_split:
            u = float(frozen.cdf(x))
            if 0.0 < u < quadrature.BODY_LEVEL:
                levels.append(u)
        elif x < x_max:
            tail_points.append(x)

    label = f"{spec.family} {label}"
    tol = 0.5 * quadrature.ABS_TOL
    body = quadrature.integrate(lambda u: h(frozen.ppf(u)), levels, tol=tol, label=f"{label} body")
    tail = quadrature.integrate_oscillatory(
        lambda x: h(x) * frozen.pdf(x), tail_points, omega, tol=tol, label=f"{label} tail"
    )
    return complex(body + tail)


def _poisson_kernel(j: int, sigma: float, mu: float, times_x: bool = False) -> Callable[[np.ndarray], np.ndarray]:
    """Real amplitude e^{-(sigma+mu)x} (mu x)^j / j!, times x for gamma_j"""
    log_norm = -math.lgamma(j + 1)

    def amplitude(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            log_weight = j * np.log(mu * x) + log_norm if j else log_norm
            values = np.exp(-(sigma + mu) * x + log_weight)
        values = np.where(x > 0, values, 1.0 if j == 0 else 0.0)
        return x * values if times_x else values

    return amplitude


def _decay(sigma: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: np.exp(-sigma * x)


def _peaks(j: int, mu: float) -> Tuple[float, float]:
    return (j / mu, (j + 10.0 * math.sqrt(j + 1) + 10.0) / mu)


@lru_cache(maxsize=MEMO_SIZE)
def _numeric_lst(model: WorkingTimeModel, s: complex) -> complex:
    return _expect(model, _decay(s.real), s.imag, f"g({s})", decay=s.real)


@lru_cache(maxsize=MEMO_SIZE)
def _numeric_weighted_lst(model: WorkingTimeModel, j: int, s: complex, mu: float) -> complex:
    kernel = _poisson_kernel(j, s.real, mu)
    return _expect(model, kernel, s.imag, f"g_{j}({s}; mu={mu})", _peaks(j, mu), decay=s.real)


@lru_cache(maxsize=MEMO_SIZE)
def _numeric_gamma(model: WorkingTimeModel, j: int, mu: float) -> float:
    kernel = _poisson_kernel(j, 0.0, mu, times_x=True)
    return _expect(model, kernel, 0.0, f"gamma_{j}(mu={mu})", _peaks(j, mu)).real


@lru_cache(maxsize=MEMO_SIZE)
def _numeric_weighted_sum(model: WorkingTimeModel, J: int, s: complex, mu: float) -> complex:
    def amplitude(x):
        return np.exp(-s.real * x) * special.pdtr(J, mu * x)

    return _expect(model, amplitude, s.imag, f"sum g_j({s}), J={J}", decay=s.real)


def mean(model: WorkingTimeModel) -> float:
    """Mean working time b"""
    return model.mean_b


def sample(model: WorkingTimeModel, rng: np.random.Generator) -> float:
    """One working time drawn from G"""
    return float(model.spec.draw(rng, 1)[0])


def sample_array(model: WorkingTimeModel, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` independent working times, in the generator's stream order"""
    return np.asarray(model.spec.draw(rng, size), dtype=float)


def cdf(model: WorkingTimeModel, t):
    return model.spec.cdf(t)


def survival(model: WorkingTimeModel, t):
    return 1.0 - model.spec.cdf(t)


def quantile(model: WorkingTimeModel, p: float) -> float:
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {p}")
    return model.spec.quantile(p)


def lst(model: WorkingTimeModel, s: complex) -> complex:
    """g(s) = E e^{-s eta}"""
    s = _check_s(s)
    if s == 0:
        return 1.0 + 0j
    if model.uses_closed_form():
        return complex(model.spec.lst(s))
    return _numeric_lst(model, s)


def epsilon(model: WorkingTimeModel, mu: float) -> float:
    """eps(mu) = int e^{-mu t} dG(t), the probability that a repair outlasts a working period"""
    if not mu >= 0:
        raise DomainError(f"repair rate must be nonnegative, got {mu}")
    return lst(model, float(mu)).real


def weighted_lst(model: WorkingTimeModel, j: int, s: complex, mu: float) -> complex:
    """g_j(s) = int e^{-(s+mu)x} (mu x)^j / j! dG(x); g_0 is the transform of the repair-free period"""
    j = _check_j(j)
    s = _check_s(s)
    mu = _check_mu(mu)
    if model.uses_closed_form(weighted=True):
        return complex(model.spec.weighted_lst(j, s, mu))
    return _numeric_weighted_lst(model, j, s, mu)


def gamma(model: WorkingTimeModel, j: int, mu: float) -> float:
    """gamma_j(mu) = int x e^{-mu x} (mu x)^j / j! dG(x) = -d/ds g_j(s) at s = 0"""
    j = _check_j(j)
    mu = _check_mu(mu)
    if model.uses_closed_form(weighted=True):
        return float(model.spec.gamma(j, mu))
    return _numeric_gamma(model, j, mu)


def poisson_truncation(model: WorkingTimeModel, mu: float) -> int:
    """Smallest J whose Poisson(mu * x_max) tail beyond J is below TRUNCATION_TAIL.

    x_max is the 1 - 1e-12 quantile of G, the same cutoff the quadrature uses.
    """
    mu = _check_mu(mu)
    spec = model.spec
    x_max = spec.params.hi if isinstance(spec, UniformSpec) else spec.quantile(quadrature.TAIL_LEVEL)
    lam = mu * x_max
    J = int(stats.poisson.isf(TRUNCATION_TAIL, lam))
    while stats.poisson.sf(J, lam) >= TRUNCATION_TAIL:
        J += 1
    return J


def weighted_lst_sum(model: WorkingTimeModel, s: complex, mu: float, J: Optional[int] = None) -> complex:
    """Partial sum g_0(s) + ... + g_J(s); tends to g(s) as J grows"""
    s = _check_s(s)
    mu = _check_mu(mu)
    if J is None:
        J = poisson_truncation(model, mu)
    if model.uses_closed_form(weighted=True):
        return sum(complex(model.spec.weighted_lst(j, s, mu)) for j in range(J + 1))

    return _numeric_weighted_sum(model, J, s, mu)
