"""Random market generator and Monte-Carlo mechanism comparison.

Reproducibility contract: every replication owns an independent stream of a
Philox counter-based generator keyed by ``(seed, replication_index)``, and
normal variates come from the inverse CDF applied to ``(k + 1/2) / 2**53``
uniforms, so identical configurations give bit-identical statistics on any
platform, regardless of how replications are scheduled.

Within a replication the draw order is fixed: school quality (correlated
model only), preference noise, one priority permutation per school, then the
consent sample (`Generator.choice` without replacement).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from matchlab import analysis, eada, sjbc_plus
from matchlab.da import run_da
from matchlab.envy import build_envy
from matchlab.model import InputError, Matching, Problem, rank_of, violations

MECHANISMS = ("da", "eada_full", "eada_half", "sjbc_plus")
METRICS = ("avg_rank", "beneficiaries", "pe_rate", "justifiable_rate")


@dataclass(frozen=True)
class GenConfig:
    n: int
    model: str
    replications: int
    seed: int
    rho: float | None = None
    consent_fraction: float = 0.5

    def __post_init__(self):
        if self.model not in ("iid", "correlated"):
            raise InputError(f"unknown preference model {self.model!r}")
        if (self.rho is None) == (self.model == "correlated"):
            raise InputError("rho is required exactly when model='correlated'")
        if self.rho is not None and not 0.0 <= self.rho <= 1.0:
            raise InputError("rho must lie in [0, 1]")
        if not 0.0 <= self.consent_fraction <= 1.0:
            raise InputError("consent fraction must lie in [0, 1]")
        if self.n < 1 or self.replications < 1:
            raise InputError("n and replications must be positive")

    @property
    def consent_size(self) -> int:
        return int(self.n * self.consent_fraction)


@dataclass(frozen=True)
class InstanceMetrics:
    replication: int
    values: dict[str, dict[str, float]]  # mechanism -> metric -> value


@dataclass(frozen=True)
class AggregateStats:
    config: GenConfig
    rows: tuple[tuple[str, str, float, float], ...]  # mechanism, metric, mean, stderr


def _stream(seed: int, replication: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, replication], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _standard_normal(rng: np.random.Generator, shape):
    u = (rng.integers(0, 1 << 53, size=shape, dtype=np.int64) + 0.5) * 2.0**-53
    return ndtri(u)


def _draw_problem(rng: np.random.Generator, config: GenConfig) -> Problem:
    n = config.n
    if config.model == "correlated":
        quality = _standard_normal(rng, n)
        noise = _standard_normal(rng, (n, n))
        utility = config.rho * quality + math.sqrt(1.0 - config.rho**2) * noise
        prefs = tuple(
            tuple(int(s) for s in np.argsort(-utility[i], kind="stable"))
            for i in range(n)
        )
    else:
        prefs = tuple(
            tuple(int(s) for s in rng.permutation(n)) for _ in range(n)
        )
    priorities = tuple(
        tuple(int(i) for i in rng.permutation(n)) for _ in range(n)
    )
    return Problem(
        students=tuple(f"i{k + 1}" for k in range(n)),
        schools=tuple(f"s{k + 1}" for k in range(n)),
        quotas=(1,) * n,
        prefs=prefs,
        priorities=priorities,
    )


def gen_instance(config: GenConfig, replication_index: int) -> Problem:
    """The instance of one replication; a pure function of (seed, index)."""
    return _draw_problem(_stream(config.seed, replication_index), config)


def draw_instance_and_consent(config: GenConfig, replication_index: int):
    rng = _stream(config.seed, replication_index)
    problem = _draw_problem(rng, config)
    consent = frozenset(
        int(i) for i in rng.choice(config.n, size=config.consent_size, replace=False)
    )
    return problem, consent


def _mechanism_outcomes(problem: Problem, consent):
    da_matching, trace = run_da(problem)
    digraph = build_envy(problem, da_matching)
    mu_star, b_star = sjbc_plus.run_expansion(problem, da_matching, trace, digraph)
    plus = sjbc_plus.run_refinement(problem, mu_star, b_star, da_matching, digraph)
    outcomes = {
        "da": da_matching,
        "eada_full": eada.run_eada(problem, range(problem.n_students))[0],
        "eada_half": eada.run_eada(problem, consent)[0],
        "sjbc_plus": plus,
    }
    return outcomes, da_matching, digraph


def evaluate_instance(problem: Problem, consent, replication: int) -> InstanceMetrics:
    outcomes, da_matching, digraph = _mechanism_outcomes(problem, consent)
    da_ranks = [rank_of(problem, i, da_matching.assignment[i]) for i in range(problem.n_students)]
    values = {}
    for name, matching in outcomes.items():
        ranks = [rank_of(problem, i, matching.assignment[i]) for i in range(problem.n_students)]
        gainers = {i for i in range(problem.n_students) if ranks[i] < da_ranks[i]}
        justifiable = all(
            v.victim not in digraph.improvable or v.victim in gainers
            for v in violations(problem, matching)
        )
        values[name] = {
            "avg_rank": sum(ranks) / problem.n_students,
            "beneficiaries": float(len(gainers)),
            "pe_rate": 100.0 * analysis.is_pareto_efficient(problem, matching),
            "justifiable_rate": 100.0 * justifiable,
        }
    return InstanceMetrics(replication, values)


def _one_replication(args) -> InstanceMetrics:
    config, rep = args
    problem, consent = draw_instance_and_consent(config, rep)
    return evaluate_instance(problem, consent, rep)


def run_experiment(config: GenConfig, jobs: int = 1, per_instance=None) -> AggregateStats:
    """Evaluate all four mechanisms over the configured replications.

    ``per_instance`` may be a list; it receives the ``InstanceMetrics`` of
    every replication in index order.  Parallel runs aggregate in the same
    order, so the statistics are identical for any job count.
    """
    tasks = [(config, rep) for rep in range(config.replications)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_one_replication, tasks, chunksize=8))
    else:
        results = [_one_replication(t) for t in tasks]
    results.sort(key=lambda r: r.replication)
    if per_instance is not None:
        per_instance.extend(results)

    rows = []
    for mech in MECHANISMS:
        for metric in METRICS:
            series = np.array([r.values[mech][metric] for r in results])
            mean = float(series.mean())
            if len(series) > 1:
                stderr = float(series.std(ddof=1) / math.sqrt(len(series)))
            else:
                stderr = 0.0
            rows.append((mech, metric, mean, stderr))
    return AggregateStats(config, tuple(rows))


def stats_value(stats: AggregateStats, mechanism: str, metric: str) -> tuple[float, float]:
    for mech, met, mean, stderr in stats.rows:
        if mech == mechanism and met == metric:
            return mean, stderr
    raise KeyError((mechanism, metric))
