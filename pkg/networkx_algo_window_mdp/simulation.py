"""
Simulation of strategies and finite-run window statistics.

Window values are defined on infinite runs. On a sampled prefix the
empirical window value is the minimum, over positions past a burn-in, of the
best window mean starting there. On prefixes unrolling a lasso this equals
the lasso value; on other runs it is an estimate only.

Example
-------
>>> from networkx_algo_window_mdp import demodata
>>> from networkx_algo_window_mdp.simulation import FinitePath, empirical_window_value
>>> model = demodata.two_phase_mdp()
>>> cycle = ['v4', 'v5', 'v7', 'v8', 'v7', 'v6'] * 10 + ['v4']
>>> path = FinitePath.from_vertices(model, cycle)
>>> path.horizon
60
>>> empirical_window_value(path, 3, burn_in=0)
Fraction(2, 1)
"""
import logging
import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Optional, Tuple
import numpy as np
import ubelt as ub
from ._types import as_rational
from .model import WindowMdpError, PreconditionError

logger = logging.getLogger(__name__)

__all__ = [
    'FinitePath', 'EstimateReport', 'HorizonTooShortError', 'simulate',
    'empirical_window_value', 'longest_open_window', 'monte_carlo',
    'DEFAULT_CONFIDENCE', 'DEFAULT_BURN_IN_FRACTION',
]

DEFAULT_CONFIDENCE = 0.99

DEFAULT_BURN_IN_FRACTION = Fraction(1, 4)

#: Window lengths tried when a run is scored without a fixed window.
BWMP_WINDOW_GRID = (1, 2, 4, 8, 16, 32)


class HorizonTooShortError(WindowMdpError, ValueError):
    """
    Raised when a path is too short for the requested window and burn-in
    """
    pass


@dataclass(frozen=True)
class FinitePath:
    """
    A finite prefix of a run: ``horizon`` steps through ``vertices`` with the
    payoff of each step.
    """
    vertices: Tuple
    payoffs: Tuple
    seed: Any = None

    def __post_init__(self):
        if len(self.payoffs) != len(self.vertices) - 1:
            raise ValueError('need exactly one payoff per step')

    @property
    def horizon(self):
        return len(self.payoffs)

    def __len__(self):
        return self.horizon

    @classmethod
    def from_vertices(cls, model, vertices, seed=None):
        """
        Path following ``vertices``; every consecutive pair must be an edge.
        """
        vertices = tuple(vertices)
        payoffs = []
        for u, v in zip(vertices, vertices[1:]):
            if not model.has_edge(u, v):
                raise PreconditionError('({}, {}) is not an edge'.format(u, v))
            payoffs.append(model.weight(u, v))
        return cls(vertices, tuple(payoffs), seed)

    def mean_payoff(self):
        if not self.payoffs:
            return Fraction(0)
        return Fraction(sum(self.payoffs), self.horizon)


def _sample(dist, rng):
    if len(dist) == 1:
        return dist[0][0]
    draw = rng.random()
    acc = 0.0
    for succ, prob in dist:
        acc += float(prob)
        if draw < acc:
            return succ
    return dist[-1][0]


def simulate(model, strategy, start, horizon, seed=None, rng=None):
    """
    Sample a path of ``horizon`` steps from ``start``.

    Parameters
    ----------
    model : MdpModel

    strategy : MealyStrategy

    start : vertex

    horizon : int

    seed : int | None
        Seeds a fresh :func:`numpy.random.default_rng` when ``rng`` is not
        given.

    rng : numpy.random.Generator | None

    Returns
    -------
    FinitePath
    """
    if horizon < 1:
        raise PreconditionError('horizon must be at least 1')
    model.check_vertex(start)
    if rng is None:
        rng = np.random.default_rng(seed)
    vertices = [start]
    payoffs = []
    state = strategy.initial
    vertex = start
    for _ in range(horizon):
        nxt_state = strategy.transition(state, vertex)
        if model.is_player(vertex):
            dist = strategy.output(state, vertex)
        else:
            dist = model.distribution(vertex)
        succ = _sample(dist, rng)
        payoffs.append(model.weight(vertex, succ))
        vertices.append(succ)
        state, vertex = nxt_state, succ
    return FinitePath(tuple(vertices), tuple(payoffs), seed)


def _default_burn_in(horizon):
    return int(horizon * DEFAULT_BURN_IN_FRACTION)


def empirical_window_value(path, window, burn_in=None):
    """
    Minimum over start positions ``i`` in ``[burn_in, horizon - window]`` of
    the best mean of the windows of length ``1..window`` starting at ``i``.

    Parameters
    ----------
    path : FinitePath

    window : int

    burn_in : int | None
        Defaults to a quarter of the horizon.

    Returns
    -------
    Fraction

    Raises
    ------
    HorizonTooShortError

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> path = FinitePath.from_vertices(demodata.self_loop_mdp(5),
    >>>                                 ['s', 's_loop'] * 10)
    >>> empirical_window_value(path, 2)
    Fraction(5, 1)
    """
    horizon = path.horizon
    if burn_in is None:
        burn_in = _default_burn_in(horizon)
    if window < 1:
        raise PreconditionError('window must be at least 1')
    if burn_in + window >= horizon:
        raise HorizonTooShortError(
            'horizon {} is too short for burn-in {} and window {}'.format(
                horizon, burn_in, window))
    integral = all(isinstance(w, (int, np.integer)) for w in path.payoffs)
    dtype = np.int64 if integral else object
    sums = np.concatenate([np.zeros(1, dtype=dtype),
                           np.cumsum(np.array(path.payoffs, dtype=dtype))])
    # Compare means exactly by scaling every window length to a common one.
    scale = int(np.lcm.reduce(np.arange(1, window + 1)))
    stop = horizon - window + 1
    best = None
    for j in range(1, window + 1):
        scaled = (sums[burn_in + j:stop + j] - sums[burn_in:stop]) * (scale // j)
        best = scaled if best is None else np.maximum(best, scaled)
    low = best.min()
    if integral:
        return Fraction(int(low), scale)
    return Fraction(low) / scale


def longest_open_window(path, threshold):
    """
    Length of the longest stretch that starts at some position and keeps
    every window mean below ``threshold``.

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> longest_open_window(demodata.growing_loop_path(3), 0)
    7
    """
    threshold = as_rational(threshold)
    payoffs = path.payoffs
    longest = 0
    for i in range(len(payoffs)):
        total = 0
        length = 0
        for w in payoffs[i:]:
            total += w
            if total >= threshold * (length + 1):
                break
            length += 1
        longest = max(longest, length)
    return longest


def _score(path, window, burn_in):
    if window is not None:
        return empirical_window_value(path, window, burn_in)
    grid = [ell for ell in BWMP_WINDOW_GRID if burn_in + ell < path.horizon]
    return max(empirical_window_value(path, ell, burn_in) for ell in grid)


def _run_batch(model, strategy, start, indices, horizon, seed, window,
               burn_in):
    """
    Score the runs ``indices``. Each run draws from its own generator seeded
    by ``(seed, index)``.
    """
    scores = []
    means = []
    for index in indices:
        rng = np.random.default_rng([seed, index])
        path = simulate(model, strategy, start, horizon, rng=rng)
        scores.append(_score(path, window, burn_in))
        means.append(path.mean_payoff())
    return scores, means


@dataclass
class EstimateReport:
    """
    Monte Carlo estimates of the satisfaction probability of
    ``{score >= threshold}`` and of the mean score, with normal approximation
    half widths at ``confidence``.
    """
    runs: int
    horizon: int
    window: Optional[int]
    threshold: Fraction
    burn_in: int
    confidence: float
    probability: Fraction
    probability_halfwidth: float
    mean: Fraction
    mean_halfwidth: float
    values: Tuple = field(default=(), repr=False)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def min_value(self):
        return min(self.values)

    def to_dict(self):
        from ._types import format_rational
        return ub.odict([
            ('runs', self.runs),
            ('horizon', self.horizon),
            ('window', self.window),
            ('threshold', format_rational(self.threshold)),
            ('burn_in', self.burn_in),
            ('confidence', self.confidence),
            ('probability', format_rational(self.probability)),
            ('probability_halfwidth', round(self.probability_halfwidth, 6)),
            ('mean', format_rational(self.mean)),
            ('mean_float', round(float(self.mean), 6)),
            ('mean_halfwidth', round(self.mean_halfwidth, 6)),
            ('min_value', format_rational(self.min_value)),
        ] + list(self.diagnostics.items()))


def _halfwidth(samples, confidence):
    n = len(samples)
    if n < 2:
        return float('inf')
    z = statistics.NormalDist().inv_cdf((1 + confidence) / 2)
    return float(z * np.std(samples, ddof=1) / math.sqrt(n))


def monte_carlo(model, strategy, start, n, horizon, seed=0, threshold=0,
                window=None, burn_in=None, workers=0,
                confidence=DEFAULT_CONFIDENCE, verbose=0):
    """
    Estimate the satisfaction probability and the expected window value of
    ``strategy`` by ``n`` independent simulations.

    Parameters
    ----------
    model : MdpModel

    strategy : MealyStrategy

    start : vertex

    n : int
        Number of runs.

    horizon : int
        Steps per run.

    seed : int
        Run ``i`` uses the generator seeded by ``(seed, i)``, so the result
        does not depend on ``workers``.

    threshold : Fraction
        A run satisfies the objective when its score is at least this.

    window : int | None
        Window length of the score. Without one a run is scored by its best
        window value over :data:`BWMP_WINDOW_GRID` and the mean payoff is
        reported as a diagnostic.

    burn_in : int | None
        Defaults to a quarter of the horizon.

    workers : int
        Process pool size; 0 or 1 runs serially.

    confidence : float

    verbose : int

    Returns
    -------
    EstimateReport

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> from networkx_algo_window_mdp.strategy import MemorylessController, realize
    >>> model = demodata.self_loop_mdp(3)
    >>> strat = realize(MemorylessController({'s': 's_loop'}), model, ['s'])
    >>> report = monte_carlo(model, strat, 's', n=5, horizon=20, window=1)
    >>> report.probability, report.mean
    (Fraction(1, 1), Fraction(3, 1))
    """
    if n < 1:
        raise PreconditionError('need at least one run')
    threshold = as_rational(threshold)
    if burn_in is None:
        burn_in = _default_burn_in(horizon)
    if window is not None and burn_in + window >= horizon:
        raise HorizonTooShortError(
            'horizon {} is too short for burn-in {} and window {}'.format(
                horizon, burn_in, window))
    mode = 'process' if workers > 1 else 'serial'
    num_chunks = max(1, workers * 4) if workers > 1 else 1
    chunks = [list(c) for c in np.array_split(np.arange(n), num_chunks)
              if len(c)]
    logger.debug('simulating %d runs in %d chunks (%s)', n, len(chunks), mode)
    scores = []
    means = []
    with ub.Executor(mode=mode, max_workers=workers) as executor:
        jobs = [executor.submit(_run_batch, model, strategy, start,
                                [int(i) for i in chunk], horizon, seed,
                                window, burn_in)
                for chunk in chunks]
        for job in ub.ProgIter(jobs, desc='simulate', verbose=verbose):
            part_scores, part_means = job.result()
            scores.extend(part_scores)
            means.extend(part_means)

    hits = sum(1 for s in scores if s >= threshold)
    probability = Fraction(hits, n)
    mean = sum(scores, Fraction(0)) / n
    indicator = [1.0 if s >= threshold else 0.0 for s in scores]
    report = EstimateReport(
        runs=n, horizon=horizon, window=window, threshold=threshold,
        burn_in=burn_in, confidence=confidence, probability=probability,
        probability_halfwidth=_halfwidth(indicator, confidence), mean=mean,
        mean_halfwidth=_halfwidth([float(s) for s in scores], confidence),
        values=tuple(scores))
    if window is None:
        report.diagnostics['mean_payoff'] = round(
            float(sum(means, Fraction(0)) / n), 6)
    logger.info('%d runs: probability %s, mean %.4f', n, probability,
                float(mean))
    return report
