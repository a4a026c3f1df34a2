"""
Maximal end components, closed restrictions, reachability and the MEC
quotient of an MDP.

Example
-------
>>> from networkx_algo_window_mdp import demodata
>>> from networkx_algo_window_mdp.graph_analysis import mec_decomposition
>>> dec = mec_decomposition(demodata.three_mec_mdp())
>>> [sorted(m) for m in dec.mecs]
[['v0', 'v1', 'v2', 'v3'], ['v5', 'v7'], ['v6', 'v8']]
>>> dec.transient
['v4']
"""
import logging
from collections import deque, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional
import networkx as nx
from ._types import PLAYER, RANDOM, sorted_vertices, vertex_sort_key
from .model import MdpModel, WindowMdpError, PreconditionError

logger = logging.getLogger(__name__)

__all__ = [
    'MecDecomposition', 'ReachTable', 'CollapsedMdp', 'ClosureError',
    'mec_decomposition', 'restrict_model', 'attractor',
    'almost_sure_reach_region', 'almost_sure_reach_strategy',
    'optimal_reach_probabilities', 'collapse_mecs', 'end_component_vertices',
]


class ClosureError(WindowMdpError, ValueError):
    """
    Raised when a vertex set is not closed in the MDP
    """

    def __init__(self, message, vertex=None):
        self.vertex = vertex
        super().__init__(message)


@dataclass
class MecDecomposition:
    """
    The maximal end components of a model, ordered by their lowest vertex,
    and the index of each vertex (``None`` for transient vertices).
    """
    mecs: List[frozenset]
    membership: Dict[Any, Optional[int]]

    def __len__(self):
        return len(self.mecs)

    @property
    def transient(self):
        return sorted_vertices(
            v for v, k in self.membership.items() if k is None)

    def mec_of(self, vertex):
        return self.membership[vertex]

    def to_dict(self):
        return {k: sorted_vertices(m) for k, m in enumerate(self.mecs)}


def _trim_to_end_component(model, comp):
    """
    Drop vertices that cannot stay in ``comp``: random vertices with an edge
    leaving it and player vertices with no edge inside it.
    """
    graph = model.graph
    comp = set(comp)
    changed = True
    while changed:
        changed = False
        for v in list(comp):
            inside = sum(1 for u in graph.successors(v) if u in comp)
            if model.is_random(v):
                leaves = inside != graph.out_degree(v)
            else:
                leaves = inside == 0
            if leaves:
                comp.discard(v)
                changed = True
    return comp


def mec_decomposition(model):
    """
    Compute the maximal end components of ``model``.

    An end component is a strongly connected vertex set that contains every
    successor of its random vertices and at least one successor of each of
    its player vertices.

    Parameters
    ----------
    model : MdpModel

    Returns
    -------
    MecDecomposition

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> dec = mec_decomposition(demodata.two_phase_mdp())
    >>> dec.to_dict()
    {0: ['v0', 'v1', 'v2'], 1: ['v4', 'v5', 'v6', 'v7', 'v8']}
    >>> dec.transient
    ['v3']
    """
    graph = model.graph
    pending = [set(graph.nodes)]
    found = []
    while pending:
        candidate = pending.pop()
        sub = graph.subgraph(candidate)
        for comp in nx.strongly_connected_components(sub):
            trimmed = _trim_to_end_component(model, comp)
            if len(trimmed) < 2:
                # bipartite arenas have no self loops
                continue
            if len(trimmed) == len(comp):
                found.append(frozenset(comp))
            else:
                pending.append(trimmed)
    found.sort(key=lambda m: vertex_sort_key(sorted_vertices(m)[0]))
    membership = {v: None for v in graph.nodes}
    for k, mec in enumerate(found):
        for v in mec:
            membership[v] = k
    logger.debug('found %d MECs in %r', len(found), model)
    return MecDecomposition(found, membership)


def end_component_vertices(model):
    """
    Vertices that belong to some end component of ``model``.
    """
    return {v for v, k in mec_decomposition(model).membership.items()
            if k is not None}


def restrict_model(model, keep):
    """
    Restrict ``model`` to a closed vertex set.

    Parameters
    ----------
    model : MdpModel

    keep : Iterable
        Every random vertex of ``keep`` must have all of its successors in
        ``keep`` and every player vertex at least one.

    Returns
    -------
    MdpModel

    Raises
    ------
    ClosureError
        Naming the first vertex breaking closure.

    Example
    -------
    >>> import pytest
    >>> from networkx_algo_window_mdp import demodata
    >>> model = demodata.three_mec_mdp()
    >>> with pytest.raises(ClosureError) as exc:
    ...     restrict_model(model, {'v0', 'v1', 'v2'})
    >>> print(exc.value)
    random v1 has successor v3 outside the kept set
    """
    keep = set(keep)
    for v in keep:
        model.check_vertex(v)
    for v in model.vertices:
        if v not in keep:
            continue
        succs = model.successors(v)
        if model.is_random(v):
            for u in succs:
                if u not in keep:
                    raise ClosureError(
                        'random {} has successor {} outside the kept set'.format(
                            v, u), vertex=v)
        elif not any(u in keep for u in succs):
            raise ClosureError(
                'player {} has no successor in the kept set'.format(v),
                vertex=v)
    return model.subgraph(keep)


def attractor(model, target, owner=PLAYER, within=None):
    """
    Vertices of ``within`` from which the vertices owned by ``owner`` can
    force a visit to ``target`` while the play stays in ``within``.

    Random vertices act as the opponent when ``owner`` is the player and the
    other way around.

    Returns
    -------
    Tuple[Set, Dict]
        The attractor and, for each attracted vertex owned by ``owner``, a
        successor that gets closer to ``target``.

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> model = demodata.two_phase_mdp()
    >>> attr, choice = attractor(model, {'v4'})
    >>> sorted_vertices(attr)
    ['v4', 'v5', 'v6', 'v7', 'v8']
    """
    graph = model.graph
    within = set(graph.nodes) if within is None else set(within)
    attr = {v for v in target if v in within}
    choice = {}
    remaining = {v: sum(1 for u in graph.successors(v) if u in within)
                 for v in within}
    queue = deque(sorted_vertices(attr))
    while queue:
        u = queue.popleft()
        for v in graph.predecessors(u):
            if v not in within or v in attr:
                continue
            if model.owner(v) == owner:
                attr.add(v)
                choice[v] = u
                queue.append(v)
            else:
                remaining[v] -= 1
                if remaining[v] == 0:
                    attr.add(v)
                    queue.append(v)
    return attr, choice


def almost_sure_reach_strategy(model, target, within=None):
    """
    Region from which ``target`` is reached with probability one without
    leaving ``within``, with a memoryless strategy achieving it.

    Returns
    -------
    Tuple[Set, Dict, Dict]
        The region, a successor for each non-target player vertex of the
        region, and the rank (distance to ``target``) of each vertex.
    """
    graph = model.graph
    region = set(graph.nodes) if within is None else set(within)
    target = {t for t in target if t in region}
    while True:
        rank = {t: 0 for t in target}
        choice = {}
        queue = deque(sorted_vertices(target))
        while queue:
            u = queue.popleft()
            for v in graph.predecessors(u):
                if v in rank or v not in region:
                    continue
                if model.is_random(v):
                    if all(s in region for s in graph.successors(v)):
                        rank[v] = rank[u] + 1
                        queue.append(v)
                else:
                    rank[v] = rank[u] + 1
                    choice[v] = u
                    queue.append(v)
        if len(rank) == len(region):
            return region, choice, rank
        region = set(rank)


def almost_sure_reach_region(model, target):
    """
    The vertices that reach ``target`` with probability one under some
    strategy. Purely graph based.

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> region = almost_sure_reach_region(demodata.two_phase_mdp(), {'v4'})
    >>> sorted_vertices(region)
    ['v0', 'v1', 'v2', 'v3', 'v4', 'v5', 'v6', 'v7', 'v8']
    """
    if not target:
        raise nx.NetworkXPointlessConcept('the target set is empty')
    region, _, _ = almost_sure_reach_strategy(model, target)
    return region


@dataclass
class ReachTable:
    """
    Optimal reachability probability of every vertex and a pure memoryless
    strategy attaining them.
    """
    target: frozenset
    values: Dict[Any, Fraction]
    strategy: Dict[Any, Any] = field(default_factory=dict)

    def __getitem__(self, vertex):
        return self.values[vertex]


def _backward_reachable(model, target):
    seen = set(target)
    queue = deque(target)
    while queue:
        u = queue.popleft()
        for v in model.graph.predecessors(u):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def optimal_reach_probabilities(model, target):
    """
    Maximal probability of reaching ``target`` from every vertex.

    Vertices that cannot reach the target get 0, the almost-sure region gets
    1, and the rest is the least solution of the optimality equations found
    with the exact simplex.

    Returns
    -------
    ReachTable

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> table = optimal_reach_probabilities(demodata.coin_mdp(), {'T'})
    >>> table['start'], table['coin'], table['F']
    (Fraction(1, 2), Fraction(1, 2), Fraction(0, 1))
    """
    from .simplex import LinearProgram, solve_lp
    target = set(target)
    if not target:
        raise nx.NetworkXPointlessConcept('the target set is empty')
    for t in target:
        model.check_vertex(t)
    graph = model.graph
    can_reach = _backward_reachable(model, target)
    sure_region, sure_choice, _ = almost_sure_reach_strategy(model, target)

    values = {}
    for v in model.vertices:
        if v in sure_region:
            values[v] = Fraction(1)
        elif v not in can_reach:
            values[v] = Fraction(0)
    unknown = [v for v in model.vertices if v not in values]

    if unknown:
        names = {v: 'x[{}]'.format(v) for v in unknown}
        lp = LinearProgram(name='reach')
        for v in unknown:
            lp.add_variable(names[v])
            lp.add_constraint({names[v]: 1}, '<=', 1)
        for v in unknown:
            if model.is_player(v):
                for u in graph.successors(v):
                    if u in values:
                        lp.add_constraint({names[v]: 1}, '>=', values[u])
                    else:
                        lp.add_constraint({names[v]: 1, names[u]: -1}, '>=', 0)
            else:
                coeffs = defaultdict(Fraction)
                coeffs[names[v]] += 1
                rhs = Fraction(0)
                for u, p in model.distribution(v):
                    if u in values:
                        rhs += p * values[u]
                    else:
                        coeffs[names[u]] -= p
                lp.add_constraint(dict(coeffs), '=', rhs)
        lp.minimize({names[v]: 1 for v in unknown})
        solution = solve_lp(lp)
        if solution.status != 'optimal':
            raise AssertionError(
                'reachability program is {}'.format(solution.status))
        for v in unknown:
            values[v] = solution.values[names[v]]
        logger.debug('reachability LP over %d vertices', len(unknown))

    strategy = {}
    # Rank the vertices along value preserving edges so that ties never
    # cycle away from the target.
    rank = {v: 0 for v in sure_region}
    queue = deque(sorted_vertices(sure_region))
    while queue:
        u = queue.popleft()
        for v in graph.predecessors(u):
            if v in rank or values[v] == 0:
                continue
            if model.is_random(v) or values[u] == values[v]:
                rank[v] = rank[u] + 1
                queue.append(v)
    for v in model.player_vertices:
        succs = sorted_vertices(graph.successors(v))
        if v in sure_choice:
            strategy[v] = sure_choice[v]
        elif v in sure_region:
            strategy[v] = next(
                (u for u in succs if u in sure_region), succs[0])
        elif v in rank:
            strategy[v] = min(
                (u for u in succs if u in rank and values[u] == values[v]),
                key=lambda u: (rank[u], vertex_sort_key(u)))
        else:
            best = max(values[u] for u in succs)
            strategy[v] = next(u for u in succs if values[u] == best)
    return ReachTable(frozenset(target), values, strategy)


@dataclass
class CollapsedMdp:
    """
    The quotient of an MDP where every MEC is a single player vertex with a
    loop through an auxiliary random vertex paying the MEC value.

    Attributes
    ----------
    model : MdpModel
        The quotient, loops included.

    origin : Dict
        For every quotient vertex one of ``('mec', k)``, ``('vertex', v)``,
        ``('loop', k)`` or ``('hop', (src, dst))``.

    loop_payoff : Dict
        Collapsed vertex to the loop payoff.

    mec_vertex : Dict[int, vertex]
        MEC index to its collapsed vertex.

    loop_vertex : Dict
        Collapsed vertex to the auxiliary random vertex of its loop.

    representative : Dict
        Original vertex to the quotient vertex standing for it.

    exits : Dict
        Quotient player edge to the original edge it stands for.
    """
    model: MdpModel
    origin: Dict
    loop_payoff: Dict
    mec_vertex: Dict
    loop_vertex: Dict
    representative: Dict
    exits: Dict
    decomposition: MecDecomposition
    _structural: Any = field(default=None, repr=False, compare=False)

    def structural_model(self):
        """
        The quotient without its loops. Collapsed vertices without exits have
        no out-edge there.
        """
        if self._structural is None:
            loops = set(self.loop_vertex.values())
            self._structural = self.model.subgraph(
                [v for v in self.model.vertices if v not in loops])
        return self._structural


def _fresh(name, taken):
    while name in taken:
        name = name + "'"
    taken.add(name)
    return name


def collapse_mecs(model, mu, decomposition=None):
    """
    Collapse every MEC of ``model`` into one player vertex with a loop
    paying ``mu[k]``.

    Boundary edges of a MEC become edges of its collapsed vertex. Where an
    edge would join two player vertices, an auxiliary random vertex with a
    single sure edge is put in between.

    Parameters
    ----------
    model : MdpModel

    mu : Dict[int, Fraction]
        Loop payoff of each MEC index of ``decomposition``.

    decomposition : MecDecomposition | None
        Computed if not given.

    Returns
    -------
    CollapsedMdp

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> model = demodata.three_mec_mdp()
    >>> collapsed = collapse_mecs(model, {0: 1, 1: -1, 2: 9})
    >>> collapsed.model.vertices
    ['mec0', 'mec0_loop', 'v4', 'mec1', 'mec1_loop', 'mec2', 'mec2_loop', 'mec2>mec1']
    >>> collapsed.model.weight('mec0', 'v4')
    3
    """
    dec = decomposition or mec_decomposition(model)
    missing = [k for k in range(len(dec.mecs)) if k not in mu]
    if missing:
        raise PreconditionError('no loop payoff for MECs {}'.format(missing))

    taken = set(model.vertices)
    graph = nx.DiGraph()
    origin = {}
    rep = {}
    mec_vertex = {}
    loop_vertex = {}
    loop_payoff = {}
    for v in model.vertices:
        k = dec.membership[v]
        if k is None:
            graph.add_node(v, owner=model.owner(v))
            origin[v] = ('vertex', v)
            rep[v] = v
            continue
        if k not in mec_vertex:
            name = _fresh('mec{}'.format(k), taken)
            loop = _fresh('{}_loop'.format(name), taken)
            payoff = Fraction(mu[k])
            graph.add_node(name, owner=PLAYER)
            graph.add_node(loop, owner=RANDOM)
            graph.add_edge(name, loop, weight=payoff)
            graph.add_edge(loop, name, weight=payoff, prob=Fraction(1))
            origin[name] = ('mec', k)
            origin[loop] = ('loop', k)
            mec_vertex[k] = name
            loop_vertex[name] = loop
            loop_payoff[name] = payoff
        rep[v] = mec_vertex[k]

    exits = {}
    rows = defaultdict(Fraction)
    for u, v, weight, prob in model.edges():
        ku, kv = dec.membership[u], dec.membership[v]
        if ku is not None and ku == kv:
            continue
        qu, qv = rep[u], rep[v]
        if model.is_random(u):
            # only transient random vertices have boundary edges
            if not graph.has_edge(qu, qv):
                graph.add_edge(qu, qv, weight=weight)
            rows[(qu, qv)] += prob
            continue
        if kv is None:
            dst = qv
            if not graph.has_edge(qu, dst):
                graph.add_edge(qu, dst, weight=weight)
        else:
            dst = '{}>{}'.format(qu, qv)
            if dst not in graph:
                dst = _fresh(dst, taken)
                graph.add_node(dst, owner=RANDOM)
                origin[dst] = ('hop', (qu, qv))
                graph.add_edge(qu, dst, weight=weight)
                graph.add_edge(dst, qv, weight=0, prob=Fraction(1))
        exits.setdefault((qu, dst), (u, v))
    for (qu, qv), prob in rows.items():
        graph.edges[qu, qv]['prob'] = prob

    quotient = MdpModel(graph, name='{}_collapsed'.format(model.name or 'mdp'))
    logger.debug('collapsed %r into %r', model, quotient)
    return CollapsedMdp(quotient, origin, loop_payoff, mec_vertex,
                        loop_vertex, rep, exits, dec)
