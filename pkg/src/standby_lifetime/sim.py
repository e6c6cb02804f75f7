"""Monte Carlo engines for the system lifetime tau_j

Two independent engines:

- embedded chain: draws eta ~ G and nu ~ Poisson(mu * eta) per working period
  and moves the broken count with ``model.next_broken``;
- event driven: runs the failure clock of the working element against the
  exponential clock of the repair device and stops when all n are broken.

Both advance a whole block of replications per step. Replication ``i`` lives in
block ``i // BLOCK_SIZE``; every block simulates all BLOCK_SIZE replications
from ``SeedSequence([seed, block])`` and the batch keeps the first ``count``.
Replication ``i`` is therefore a fixed function of ``(seed, i)``: a shorter batch
is a prefix of a longer one, and no result depends on how many workers ran it.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel
from scipy import stats

from standby_lifetime.dist import sample_array
from standby_lifetime.errors import DomainError, SimulationOverrun
from standby_lifetime.lst import mean_lifetimes
from standby_lifetime.model import SystemConfig, next_broken, sample_repair_counts

logger = logging.getLogger(__name__)

MAX_PERIODS = 10**9
BLOCK_SIZE = 4096
SUMMARY_QUANTILES = (0.5, 0.9, 0.99)
# Monte Carlo is skipped above this many expected working periods per lifetime
FEASIBLE_PERIODS = 5e4


class Engine(str, Enum):
    EMBEDDED_CHAIN = "embedded_chain"
    EVENT_DRIVEN = "event_driven"


def child_seed(seed: int, index: int) -> int:
    """64-bit seed for stream ``index`` of a run seeded with ``seed``"""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint64)[0])


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, block]))


class BatchSummary(BaseModel):
    """Summary record written next to a batch of lifetimes"""

    count: int
    mean: float
    stderr: float
    stderr_defined: bool
    quantiles: Dict[str, float]
    seed: int
    engine: Engine


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Sorted lifetimes of one batch.

    ``by_replication`` keeps the lifetimes in replication order for export.
    A single-sample batch reports stderr 0 with ``stderr_defined`` False.
    """

    samples: np.ndarray
    count: int
    mean: float
    stderr: float
    seed: int
    engine_tag: Engine
    by_replication: np.ndarray
    stderr_defined: bool = True

    @classmethod
    def from_samples(cls, lifetimes, seed: int, engine: Engine) -> "EmpiricalDistribution":
        raw = np.array(lifetimes, dtype=float)
        if raw.size < 1:
            raise DomainError("an empirical distribution needs at least one sample")
        samples = np.sort(raw)
        raw.flags.writeable = False
        samples.flags.writeable = False
        count = int(samples.size)
        stderr_defined = count > 1
        stderr = float(samples.std(ddof=1) / math.sqrt(count)) if stderr_defined else 0.0
        return cls(
            samples=samples,
            count=count,
            mean=float(samples.mean()),
            stderr=stderr,
            seed=seed,
            engine_tag=Engine(engine),
            by_replication=raw,
            stderr_defined=stderr_defined,
        )

    def scaled(self, factor: float) -> "EmpiricalDistribution":
        return EmpiricalDistribution.from_samples(self.by_replication * factor, self.seed, self.engine_tag)

    def cdf(self, t):
        """Right-continuous ECDF"""
        return np.searchsorted(self.samples, t, side="right") / self.count

    def quantile(self, p: float) -> float:
        return float(np.quantile(self.samples, p, method="inverted_cdf"))

    def transform(self, s: float) -> Tuple[float, float]:
        """Empirical Laplace transform mean(e^{-s tau}) and its standard error"""
        values = np.exp(-s * self.samples)
        stderr = float(values.std(ddof=1) / math.sqrt(self.count)) if self.count > 1 else 0.0
        return float(values.mean()), stderr

    def summary(self) -> BatchSummary:
        return BatchSummary(
            count=self.count,
            mean=self.mean,
            stderr=self.stderr,
            stderr_defined=self.stderr_defined,
            quantiles={str(p): self.quantile(p) for p in SUMMARY_QUANTILES},
            seed=self.seed,
            engine=self.engine_tag,
        )


def _check_start(config: SystemConfig, j0: int) -> None:
    if not 0 <= j0 <= config.n - 1:
        raise DomainError(f"initial state j0 must lie in [0, {config.n - 1}], got {j0}")


def _overrun(config: SystemConfig, j0: int, max_periods: int) -> SimulationOverrun:
    return SimulationOverrun(
        f"lifetime exceeded {max_periods} working periods (n={config.n}, mu={config.mu}, j0={j0})",
        max_periods=max_periods,
    )


def _embedded_block(config: SystemConfig, j0: int, rng: np.random.Generator, size: int, max_periods: int):
    n, mu, model = config.n, config.mu, config.working_time
    broken = np.full(size, j0, dtype=np.int64)
    lifetime = np.zeros(size)
    active = np.arange(size)
    periods = 0
    while active.size:
        if periods >= max_periods:
            raise _overrun(config, j0, max_periods)
        periods += 1
        eta = sample_array(model, rng, active.size)
        # nu is drawn for j0 = 0 too, so every start state consumes the stream alike
        nu = sample_repair_counts(rng, mu, eta)
        lifetime[active] += eta
        nxt = next_broken(broken[active], nu)
        broken[active] = nxt
        active = active[nxt < n]
    return lifetime


def _event_driven_block(config: SystemConfig, j0: int, rng: np.random.Generator, size: int, max_periods: int):
    n, mu, model = config.n, config.mu, config.working_time
    repair_scale = 1.0 / mu

    broken = np.full(size, j0, dtype=np.int64)
    now = np.zeros(size)
    fail_at = sample_array(model, rng, size)
    repair_at = np.full(size, np.inf)
    if j0 > 0:
        repair_at[:] = rng.exponential(repair_scale, size)
    failures = np.zeros(size, dtype=np.int64)
    lifetime = np.zeros(size)

    active = np.arange(size)
    while active.size:
        repair_first = repair_at[active] < fail_at[active]

        repaired = active[repair_first]
        if repaired.size:
            now[repaired] = repair_at[repaired]
            broken[repaired] -= 1
            repair_at[repaired] = np.inf
            busy = repaired[broken[repaired] > 0]
            repair_at[busy] = now[busy] + rng.exponential(repair_scale, busy.size)

        failed = active[~repair_first]
        if failed.size:
            now[failed] = fail_at[failed]
            broken[failed] += 1
            failures[failed] += 1
            dead = broken[failed] == n
            lifetime[failed[dead]] = now[failed[dead]]
            alive = failed[~dead]
            if alive.size and failures[alive].max() >= max_periods:
                raise _overrun(config, j0, max_periods)
            fail_at[alive] = now[alive] + sample_array(model, rng, alive.size)
            # device was idle before this failure
            woken = alive[broken[alive] == 1]
            repair_at[woken] = now[woken] + rng.exponential(repair_scale, woken.size)

        active = active[broken[active] < n]
    return lifetime


_ENGINES: Dict[Engine, Callable] = {
    Engine.EMBEDDED_CHAIN: _embedded_block,
    Engine.EVENT_DRIVEN: _event_driven_block,
}


def simulate_lifetime_embedded(
    config: SystemConfig, j0: int, rng: np.random.Generator, max_periods: int = MAX_PERIODS
) -> float:
    """One lifetime tau_{j0} by the embedded-chain recursion"""
    _check_start(config, j0)
    return float(_embedded_block(config, j0, rng, 1, max_periods)[0])


def simulate_lifetime_event_driven(
    config: SystemConfig, j0: int, rng: np.random.Generator, max_periods: int = MAX_PERIODS
) -> float:
    """One lifetime tau_{j0} from explicit failure and repair clocks"""
    _check_start(config, j0)
    return float(_event_driven_block(config, j0, rng, 1, max_periods)[0])


def expected_periods(config: SystemConfig, j0: int) -> float:
    """Exact expected number of working periods in tau_{j0}, E tau_{j0} / b by Wald's identity"""
    _check_start(config, j0)
    return float(mean_lifetimes(config)[j0] / config.b)


def is_feasible(config: SystemConfig, j0: int, limit: float = FEASIBLE_PERIODS) -> bool:
    """Whether a Monte Carlo batch of tau_{j0} finishes in reasonable time"""
    return expected_periods(config, j0) <= limit


def run_batch(
    config: SystemConfig,
    j0: int,
    count: int,
    seed: int,
    engine: Engine = Engine.EMBEDDED_CHAIN,
    workers: int = 1,
    max_periods: int = MAX_PERIODS,
) -> EmpiricalDistribution:
    """``count`` independent lifetimes tau_{j0}, identical for any ``workers``.

    The last block is simulated in full and truncated, so an overrun in a
    replication beyond ``count`` still raises.
    """
    _check_start(config, j0)
    if count < 1:
        raise DomainError(f"count must be at least 1, got {count}")
    if seed < 0:
        raise DomainError(f"seed must be nonnegative, got {seed}")
    engine = Engine(engine)
    block_fn = _ENGINES[engine]

    blocks_needed = math.ceil(count / BLOCK_SIZE)

    def run_block(block: int) -> np.ndarray:
        return block_fn(config, j0, block_generator(seed, block), BLOCK_SIZE, max_periods)

    logger.info(f"Simulating {count} lifetimes (engine={engine.value}, n={config.n}, mu={config.mu}, j0={j0})")
    started = time.perf_counter()
    if workers > 1 and blocks_needed > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run_block, range(blocks_needed)))
    else:
        blocks = [run_block(block) for block in range(blocks_needed)]
    lifetimes = np.concatenate(blocks)[:count]
    logger.info(f"Simulated {count} lifetimes in {time.perf_counter() - started:.2f}s")
    return EmpiricalDistribution.from_samples(lifetimes, seed=seed, engine=engine)


def ks_critical_value(n: int, m: Optional[int] = None, coefficient: float = 1.63) -> float:
    """Asymptotic KS critical value; 1.63 is the 1% level"""
    if m is None:
        return coefficient / math.sqrt(n)
    return coefficient * math.sqrt((n + m) / (n * m))


def ks_distance(emp: EmpiricalDistribution, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """sup_t |ECDF(t) - cdf(t)|"""

    def evaluate(t):
        return np.broadcast_to(np.asarray(cdf(t), dtype=float), np.shape(t))

    values = evaluate(emp.samples)
    if np.any(values < 0.0) or np.any(values > 1.0) or np.any(np.isnan(values)):
        raise DomainError("cdf returned values outside [0, 1]")
    return float(stats.kstest(emp.samples, evaluate, method="asymp").statistic)


def two_sample_ks(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """sup_t |ECDF_a(t) - ECDF_b(t)|"""
    return float(stats.ks_2samp(a.samples, b.samples, method="asymp").statistic)
