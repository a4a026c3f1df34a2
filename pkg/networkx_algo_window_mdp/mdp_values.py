"""
Stochastic values: almost-sure window values of end components, the
expected value of committing to a loop, step bounds for switching strategies
and the consecutive tails recurrence of retry chains.

Example
-------
>>> from networkx_algo_window_mdp import demodata
>>> from networkx_algo_window_mdp.model import ObjectiveSpec
>>> from networkx_algo_window_mdp.mdp_values import mec_value_table
>>> table = mec_value_table(demodata.three_mec_mdp(), ObjectiveSpec.fwmp(2))
>>> table.values
{0: Fraction(1, 1), 1: Fraction(-1, 1), 2: Fraction(9, 1)}
"""
import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Optional
import networkx as nx
from ._types import as_rational, sorted_vertices, vertex_sort_key
from .model import WindowMdpError, PreconditionError
from .graph_analysis import (mec_decomposition, almost_sure_reach_strategy,
                             MecDecomposition)
from .window_games import (GameView, fwmp_sure_region, bwmp_sure_region,
                           sure_controller, value_grid)

logger = logging.getLogger(__name__)

__all__ = [
    'MecValueTable', 'SwitchPlan', 'CommitPolicy', 'NotAnEndComponentError',
    'NoCommitError', 'NotAlmostSureError', 'mec_almost_sure_value',
    'mec_value_table', 'almost_sure_core', 'MecController',
    'commit_policy', 'expected_mp_with_commit', 'switch_step_bound',
    'consecutive_tails_prob', 'least_steps_for_tails', 'WANDER_VALUE',
]

#: Mean payoff of a run that never commits to a loop when every structural
#: edge pays -1.
WANDER_VALUE = Fraction(-1)


class NotAnEndComponentError(WindowMdpError, ValueError):
    """
    Raised when a vertex set is not a maximal end component of the model
    """
    pass


class NoCommitError(WindowMdpError, ValueError):
    """
    Raised when no loop vertex is reachable from the start vertex
    """
    pass


class NotAlmostSureError(WindowMdpError, ValueError):
    """
    Raised when a strategy does not reach its commit set almost surely
    """
    pass


@dataclass
class MecValueTable:
    """
    Almost-sure value ``mu`` of every MEC for one objective.
    """
    objective: Any
    values: Dict[int, Fraction]
    decomposition: MecDecomposition
    cores: Dict[int, frozenset] = field(default_factory=dict)

    def __getitem__(self, k):
        return self.values[k]

    def value_of(self, vertex):
        k = self.decomposition.membership[vertex]
        return None if k is None else self.values[k]


def _sure_region(game, objective, lam):
    if objective.is_fwmp:
        return fwmp_sure_region(game, objective.window, lam)
    return bwmp_sure_region(game, lam)


def almost_sure_core(model, mec, objective, lam):
    """
    A nonempty end component inside ``mec`` from which the player surely
    wins ``{objective >= lam}`` while staying in it, or ``None``.

    Inside an end component every random edge is taken again with
    probability one, so the threshold holds almost surely iff such a core
    exists.
    """
    pending = [frozenset(mec)]
    while pending:
        cand = pending.pop()
        region = _sure_region(GameView(model, cand), objective, lam)
        if region and len(region) == len(cand):
            return cand
        if not region:
            continue
        sub = model.subgraph(region)
        pending.extend(mec_decomposition(sub).mecs)
    return None


def _check_mec(model, mec):
    mec = frozenset(mec)
    dec = mec_decomposition(model)
    if mec not in dec.mecs:
        raise NotAnEndComponentError(
            '{} is not a maximal end component'.format(sorted_vertices(mec)))
    return mec


def _mec_grid(model, mec, objective):
    sub = GameView(model, mec)
    bound = sub.max_abs_weight
    if objective.is_fwmp:
        return value_grid(objective.window, bound)
    return value_grid(len(mec), bound)


def mec_almost_sure_value(model, mec, objective, _checked=False):
    """
    Largest grid value ``lam`` such that the player almost surely satisfies
    ``{objective >= lam}`` inside the MEC ``mec``.

    Parameters
    ----------
    model : MdpModel

    mec : Iterable
        A maximal end component of ``model``.

    objective : ObjectiveSpec

    Returns
    -------
    Fraction

    Raises
    ------
    NotAnEndComponentError

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> from networkx_algo_window_mdp.model import ObjectiveSpec
    >>> model = demodata.three_mec_mdp()
    >>> mec_almost_sure_value(model, {'v6', 'v8'}, ObjectiveSpec.fwmp(2))
    Fraction(9, 1)
    """
    mec = frozenset(mec) if _checked else _check_mec(model, mec)
    grid = _mec_grid(model, mec, objective)
    lo, hi = 0, len(grid) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if almost_sure_core(model, mec, objective, grid[mid]) is not None:
            lo = mid
        else:
            hi = mid - 1
    logger.debug('almost-sure %s value of %s is %s', objective,
                 sorted_vertices(mec), grid[lo])
    return grid[lo]


def mec_value_table(model, objective, decomposition=None):
    """
    :func:`mec_almost_sure_value` of every MEC, with the core witnessing it.

    Returns
    -------
    MecValueTable
    """
    dec = decomposition or mec_decomposition(model)
    values = {}
    cores = {}
    for k, mec in enumerate(dec.mecs):
        values[k] = mec_almost_sure_value(model, mec, objective, _checked=True)
        cores[k] = almost_sure_core(model, mec, objective, values[k])
    return MecValueTable(objective, values, dec, cores)


class MecController:
    """
    Deterministic controller that almost surely reaches the core of a MEC
    and then plays the sure strategy of the core.
    """

    def __init__(self, model, mec, core, objective, lam):
        self.core = frozenset(core)
        self.sure, _ = sure_controller(GameView(model, core), objective, lam)
        _, self.reach_choice, _ = almost_sure_reach_strategy(
            model, core, within=mec)
        self.mec = frozenset(mec)

    def initial(self):
        return None

    def update(self, memory, prev, vertex):
        if vertex not in self.core:
            return None
        if prev not in self.core:
            memory, prev = self.sure.initial(), None
        return self.sure.update(memory, prev, vertex)

    def choose(self, memory, vertex):
        if vertex in self.core:
            return self.sure.choose(memory, vertex)
        return [(self.reach_choice[vertex], Fraction(1))]


@dataclass
class CommitPolicy:
    """
    Optimal values of the commit problem and a memoryless policy realizing
    them: ``commit`` holds the loop vertices where the policy stays forever
    and ``choice`` a successor for every other player vertex.
    """
    values: Dict[Any, Fraction]
    commit: frozenset
    choice: Dict[Any, Any]
    loops: Dict[Any, Fraction]

    def __getitem__(self, vertex):
        return self.values[vertex]


def commit_policy(model, loops):
    """
    Solve the commit problem on ``model``: at a vertex of ``loops`` the
    player may stop forever and collect the loop payoff, and never stopping
    is worth :data:`WANDER_VALUE` where the play can stay in an end
    component.

    Parameters
    ----------
    model : MdpModel
        The structural model; its payoffs do not matter.

    loops : Dict[vertex, Fraction]
        Loop payoff of every designated player vertex.

    Returns
    -------
    CommitPolicy
    """
    from .simplex import LinearProgram, solve_lp
    loops = {v: as_rational(mu) for v, mu in loops.items()}
    graph = model.graph
    wander = {v for mec in mec_decomposition(model).mecs for v in mec}
    floor = min([WANDER_VALUE] + list(loops.values()))
    names = {v: 'x[{}]'.format(v) for v in model.vertices}

    lp = LinearProgram(name='commit')
    for v in model.vertices:
        lp.add_variable(names[v], free=True)
        lp.add_constraint({names[v]: 1}, '>=', floor)
    for v in model.vertices:
        if v in loops:
            lp.add_constraint({names[v]: 1}, '>=', loops[v])
        if v in wander:
            lp.add_constraint({names[v]: 1}, '>=', WANDER_VALUE)
        if model.is_player(v):
            for u in graph.successors(v):
                lp.add_constraint({names[v]: 1, names[u]: -1}, '>=', 0)
        else:
            coeffs = defaultdict(Fraction)
            coeffs[names[v]] += 1
            for u, p in model.distribution(v):
                coeffs[names[u]] -= p
            lp.add_constraint(dict(coeffs), '=', 0)
    lp.minimize({names[v]: 1 for v in model.vertices})
    solution = solve_lp(lp)
    if solution.status != 'optimal':
        raise AssertionError('commit program is {}'.format(solution.status))
    values = {v: solution.values[names[v]] for v in model.vertices}
    logger.debug('commit program over %d vertices', len(values))

    commit = {v for v, mu in loops.items() if values[v] == mu}
    # Rank along value preserving edges towards the commit set so that the
    # policy never cycles among ties.
    rank = {v: 0 for v in commit}
    queue = deque(sorted_vertices(commit))
    while queue:
        u = queue.popleft()
        for v in graph.predecessors(u):
            if v in rank:
                continue
            if model.is_random(v) or values[u] == values[v]:
                rank[v] = rank[u] + 1
                queue.append(v)
    choice = {}
    for v in model.player_vertices:
        if v in commit:
            continue
        succs = sorted_vertices(graph.successors(v))
        if not succs:
            continue
        ranked = [u for u in succs if u in rank and values[u] == values[v]]
        if ranked:
            choice[v] = min(ranked, key=lambda u: (rank[u], vertex_sort_key(u)))
        else:
            # wandering: stay among vertices of equal value
            best = max(values[u] for u in succs)
            choice[v] = next(u for u in succs if values[u] == best)
    return CommitPolicy(values, frozenset(commit), choice, loops)


def expected_mp_with_commit(model, loops, start):
    """
    Optimal expected mean payoff from ``start`` when every structural edge
    pays -1 and the player may commit to the loop of a vertex of ``loops``.

    The value is the best expected loop payoff collected at commitment.

    Raises
    ------
    NoCommitError
        If no loop vertex is reachable from ``start``.

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> model = demodata.coin_mdp()
    >>> expected_mp_with_commit(model, {'T': 4, 'F': 0}, 'start')
    Fraction(2, 1)
    """
    model.check_vertex(start)
    reach = nx.descendants(model.graph, start) | {start}
    if not any(v in reach for v in loops):
        raise NoCommitError(
            'no loop vertex is reachable from {}'.format(start))
    return commit_policy(model, loops).values[start]


@dataclass
class SwitchPlan:
    """
    ``steps`` player steps commit at least ``1 - eps`` of the mass;
    ``margin`` is the per vertex precision the bound was derived from.
    """
    steps: int
    eps: Fraction
    margin: Optional[Fraction] = None
    committed: Fraction = Fraction(1)


def _memoryless_rows(model, strategy):
    if isinstance(strategy, dict):
        return {v: ([(m, Fraction(1))] if not isinstance(m, list) else m)
                for v, m in strategy.items()}
    if not strategy.is_memoryless:
        raise PreconditionError('switch bounds need a memoryless strategy')
    rows = {}
    for (state, v), dist in strategy.outputs.items():
        rows[v] = dist
    return rows


def switch_step_bound(model, strategy, commit, eps, start, margin=None):
    """
    Least number ``N`` of player steps after which the chain induced by the
    memoryless ``strategy`` has entered ``commit`` with probability at least
    ``1 - eps``.

    Parameters
    ----------
    model : MdpModel

    strategy : MealyStrategy | Dict
        Memoryless strategy (or the successor map of one).

    commit : Iterable
        Player vertices where the switch happens.

    eps : Fraction

    start : vertex

    Returns
    -------
    SwitchPlan

    Raises
    ------
    NotAlmostSureError
        If ``commit`` is not reached almost surely.

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> model = demodata.retry_chain(1, '1/2')
    >>> plan = switch_step_bound(model, {'u0': 'v0', 'u1': 'v1'}, {'u1'},
    >>>                          Fraction(1, 1000), 'u0')
    >>> plan.steps
    10
    """
    eps = as_rational(eps)
    commit = set(commit)
    model.check_vertex(start)
    if eps <= 0:
        raise PreconditionError('eps must be positive')
    rows = _memoryless_rows(model, strategy)

    def step(v):
        if v in commit:
            return [(v, Fraction(1))]
        if model.is_player(v):
            return rows[v]
        return model.distribution(v)

    chain = nx.DiGraph()
    pending = [start]
    chain.add_node(start)
    while pending:
        v = pending.pop()
        for u, p in step(v):
            if p and u not in chain:
                chain.add_node(u)
                pending.append(u)
            if p:
                chain.add_edge(v, u)
    targets = commit & set(chain.nodes)
    good = set()
    for t in targets:
        good |= nx.ancestors(chain, t) | {t}
    if set(chain.nodes) - good:
        raise NotAlmostSureError(
            'commit set is not reached almost surely from {}'.format(start))

    if start in commit or eps >= 1:
        return SwitchPlan(0, eps, margin, Fraction(1) if start in commit
                          else Fraction(0))

    dist = {start: Fraction(1)}
    if model.is_random(start):
        dist = defaultdict(Fraction)
        for u, p in model.distribution(start):
            dist[u] += p
    steps = 0
    while True:
        committed = sum((p for v, p in dist.items() if v in commit),
                        Fraction(0))
        if committed >= 1 - eps:
            logger.debug('switch bound %d steps at eps %s', steps, eps)
            return SwitchPlan(steps, eps, margin, committed)
        # one player move followed by one random move
        new = defaultdict(Fraction)
        for v, p in dist.items():
            if v in commit:
                new[v] += p
                continue
            for u, q in rows[v]:
                for x, r in model.distribution(u):
                    new[x] += p * q * r
        dist = new
        steps += 1


def consecutive_tails_prob(p, m, n):
    """
    Probability ``T_n`` that ``n`` tosses of a coin with heads probability
    ``p`` contain no ``m`` consecutive tails.

    Example
    -------
    >>> consecutive_tails_prob(Fraction(1, 2), 1, 3)
    Fraction(1, 8)
    >>> consecutive_tails_prob(Fraction(1, 2), 2, 2)
    Fraction(3, 4)
    """
    p = as_rational(p)
    if not 0 < p < 1:
        raise PreconditionError('p must lie in (0, 1)')
    if m < 1:
        raise PreconditionError('m must be positive')
    table = [Fraction(1)] * m
    q = 1 - p
    for k in range(m, n + 1):
        table.append(sum((q ** (i - 1) * p * table[k - i]
                          for i in range(1, m + 1)), Fraction(0)))
    return table[n]


def least_steps_for_tails(p, m, eps):
    """
    Least ``N`` with :func:`consecutive_tails_prob` ``(p, m, N) <= eps``.

    Example
    -------
    >>> least_steps_for_tails(Fraction(1, 2), 1, Fraction(1, 1000))
    10
    """
    p = as_rational(p)
    eps = as_rational(eps)
    if eps <= 0:
        raise PreconditionError('eps must be positive')
    if not 0 < p < 1:
        raise PreconditionError('p must lie in (0, 1)')
    if eps >= 1:
        return 0
    q = 1 - p
    table = [Fraction(1)] * m
    n = 0
    while True:
        if n >= m:
            table.append(sum((q ** (i - 1) * p * table[n - i]
                              for i in range(1, m + 1)), Fraction(0)))
        if table[n] <= eps:
            return n
        n += 1
