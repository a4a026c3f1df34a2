"""
Exact data model for bipartite weighted MDPs, window objectives, guarantee
queries and ultimately periodic runs.

An :class:`MdpModel` wraps a frozen :class:`networkx.DiGraph`. Every node has
an ``owner`` attribute (``"player"`` or ``"random"``) and every edge a
``weight`` attribute. Edges leaving a random vertex also carry a ``prob``
attribute holding an exact :class:`fractions.Fraction`.

Example
-------
>>> from networkx_algo_window_mdp.model import MdpModel, ObjectiveSpec
>>> from networkx_algo_window_mdp.model import LassoRun, lasso_value
>>> model = MdpModel.from_edges(
>>>     [('a', 'player'), ('b', 'random')],
>>>     [('a', 'b', -1), ('b', 'a', 1, '1/1')])
>>> run = LassoRun(model, prefix=(), cycle=('a', 'b'))
>>> lasso_value(run, ObjectiveSpec.fwmp(2))
Fraction(0, 1)
>>> lasso_value(run, ObjectiveSpec.bwmp())
Fraction(0, 1)
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Tuple
import networkx as nx
from ._types import PLAYER, RANDOM, OWNERS, as_rational, sorted_vertices

logger = logging.getLogger(__name__)

__all__ = [
    'MdpModel', 'ObjectiveSpec', 'GuaranteeQuery', 'LassoRun', 'ValueReport',
    'ValidationReport', 'ThresholdMap', 'validate_mdp', 'normalize_guarantee',
    'lasso_value', 'window_mean', 'WindowMdpError', 'InvalidModelError',
    'UnknownVertexError', 'PreconditionError', 'InvalidLassoError',
]

FWMP = 'FWMP'
BWMP = 'BWMP'


class WindowMdpError(Exception):
    """
    Base class of the errors raised by this package
    """
    pass


class InvalidModelError(WindowMdpError, ValueError):
    """
    Raised when a model violates one of the MDP invariants
    """

    def __init__(self, report):
        self.report = report
        super().__init__('; '.join(report.violations))


class UnknownVertexError(WindowMdpError, KeyError):
    """
    Raised when a vertex id is not part of the model
    """
    pass


class PreconditionError(WindowMdpError, ValueError):
    """
    Raised when an operation is called outside of its precondition
    """
    pass


class InvalidLassoError(WindowMdpError, ValueError):
    """
    Raised when a lasso uses a pair of vertices that is not an edge
    """
    pass


class MdpModel:
    """
    Immutable MDP over a bipartite arena of player and random vertices.

    Parameters
    ----------
    graph : networkx.DiGraph
        Node attribute ``owner`` and edge attributes ``weight`` and ``prob``.
        The graph is copied and frozen.

    name : str | None
        Optional label used in reports.

    Notes
    -----
    Construction does not validate the model; use :func:`validate_mdp` or
    :func:`networkx_algo_window_mdp.wmdp_io.parse_mdp`. Derived models (for
    instance the quotient built by MEC collapse) may carry rational payoffs.
    """

    def __init__(self, graph, name=None):
        if not nx.is_frozen(graph):
            graph = nx.freeze(graph.copy())
        self.graph = graph
        self.name = name

    @classmethod
    def from_edges(cls, vertices, edges, name=None):
        """
        Build a model from ``(id, owner)`` pairs and
        ``(src, dst, weight[, prob])`` tuples.

        Example
        -------
        >>> model = MdpModel.from_edges(
        >>>     [('a', 'player'), ('b', 'random')],
        >>>     [('a', 'b', 0), ('b', 'a', 0, '1/1')])
        >>> model.num_vertices, model.num_edges, model.max_abs_weight
        (2, 2, 0)
        """
        graph = nx.DiGraph()
        for vid, owner in vertices:
            if owner not in OWNERS:
                raise KeyError(owner)
            if vid in graph:
                raise PreconditionError('duplicate vertex id {!r}'.format(vid))
            graph.add_node(vid, owner=owner)
        for edge in edges:
            src, dst, weight, *rest = edge
            for vid in (src, dst):
                if vid not in graph:
                    raise UnknownVertexError(vid)
            data = {'weight': weight}
            if rest and rest[0] is not None:
                data['prob'] = as_rational(rest[0])
            graph.add_edge(src, dst, **data)
        return cls(graph, name=name)

    def __repr__(self):
        return '<MdpModel({}) |V|={} |E|={}>'.format(
            self.name or '', self.num_vertices, self.num_edges)

    def __eq__(self, other):
        if not isinstance(other, MdpModel):
            return NotImplemented
        return (list(self.graph.nodes(data='owner')) ==
                list(other.graph.nodes(data='owner')) and
                sorted(map(repr, self.edges())) ==
                sorted(map(repr, other.edges())))

    __hash__ = None

    def __contains__(self, vertex):
        return vertex in self.graph

    def __len__(self):
        return self.graph.number_of_nodes()

    @property
    def vertices(self):
        return list(self.graph.nodes)

    @property
    def player_vertices(self):
        return [v for v, owner in self.graph.nodes(data='owner')
                if owner == PLAYER]

    @property
    def random_vertices(self):
        return [v for v, owner in self.graph.nodes(data='owner')
                if owner == RANDOM]

    @property
    def num_vertices(self):
        return self.graph.number_of_nodes()

    @property
    def num_edges(self):
        return self.graph.number_of_edges()

    @property
    def max_abs_weight(self):
        """
        The largest absolute edge payoff ``W`` (0 for an edgeless model).
        """
        return max((abs(w) for _, _, w in self.graph.edges(data='weight')),
                   default=0)

    def check_vertex(self, vertex):
        if vertex not in self.graph:
            raise UnknownVertexError(vertex)
        return vertex

    def owner(self, vertex):
        return self.graph.nodes[self.check_vertex(vertex)]['owner']

    def is_player(self, vertex):
        return self.owner(vertex) == PLAYER

    def is_random(self, vertex):
        return self.owner(vertex) == RANDOM

    def successors(self, vertex):
        return list(self.graph.successors(vertex))

    def predecessors(self, vertex):
        return list(self.graph.predecessors(vertex))

    def has_edge(self, src, dst):
        return self.graph.has_edge(src, dst)

    def weight(self, src, dst):
        return self.graph.edges[src, dst]['weight']

    def prob(self, src, dst):
        """
        Transition probability of a random edge (``None`` on player edges)
        """
        return self.graph.edges[src, dst].get('prob', None)

    def distribution(self, vertex):
        """
        The ``(successor, probability)`` row of a random vertex.
        """
        return [(dst, data.get('prob'))
                for _, dst, data in self.graph.out_edges(vertex, data=True)]

    def edges(self):
        """
        Iterate ``(src, dst, weight, prob)`` tuples in insertion order.
        """
        for src, dst, data in self.graph.edges(data=True):
            yield src, dst, data['weight'], data.get('prob', None)

    def with_weights(self, func, name=None):
        """
        Copy of the model with each payoff ``w`` on ``(u, v)`` replaced by
        ``func(u, v, w)``.
        """
        graph = nx.DiGraph(self.graph)
        for src, dst, data in graph.edges(data=True):
            data['weight'] = func(src, dst, data['weight'])
        return MdpModel(graph, name=name or self.name)

    def subgraph(self, keep, name=None):
        """
        Induced sub-model on ``keep``. No closure check is made here, see
        :func:`networkx_algo_window_mdp.graph_analysis.restrict_model`.
        """
        keep = set(keep)
        order = [v for v in self.graph.nodes if v in keep]
        graph = nx.DiGraph()
        graph.add_nodes_from((v, self.graph.nodes[v]) for v in order)
        graph.add_edges_from(
            (u, v, dict(d)) for u, v, d in self.graph.edges(data=True)
            if u in keep and v in keep)
        return MdpModel(graph, name=name or self.name)


@dataclass(frozen=True)
class ObjectiveSpec:
    """
    Which window objective is meant: fixed window ``FWMP`` with length
    ``window`` or bounded window ``BWMP`` (no window length).
    """
    kind: str
    window: Optional[int] = None

    def __post_init__(self):
        if self.kind not in (FWMP, BWMP):
            raise KeyError(self.kind)
        if self.kind == FWMP:
            if not isinstance(self.window, int) or self.window < 1:
                raise PreconditionError(
                    'FWMP needs a window length >= 1, got {!r}'.format(
                        self.window))
        elif self.window is not None:
            raise PreconditionError('BWMP takes no window length')

    @classmethod
    def fwmp(cls, window):
        return cls(FWMP, window)

    @classmethod
    def bwmp(cls):
        return cls(BWMP)

    @classmethod
    def coerce(cls, kind, window=None):
        """
        Build from user strings such as ``('fwmp', 3)`` or ``('bwmp', None)``
        """
        kind = kind.upper()
        if kind == BWMP:
            return cls.bwmp()
        return cls(kind, window)

    @property
    def is_fwmp(self):
        return self.kind == FWMP

    def __str__(self):
        if self.is_fwmp:
            return 'FWMP(l={})'.format(self.window)
        return 'BWMP'


@dataclass(frozen=True)
class GuaranteeQuery:
    """
    A synthesis question: maximize the expectation subject to a sure (BWC),
    almost-sure (BAS) or probability ``prob`` (BP) guarantee ``alpha``.
    """
    mode: str
    objective: ObjectiveSpec
    start: Any
    alpha: Fraction = Fraction(0)
    beta: Fraction = Fraction(0)
    prob: Optional[Fraction] = None

    def __post_init__(self):
        if self.mode not in ('BWC', 'BP', 'BAS'):
            raise KeyError(self.mode)
        object.__setattr__(self, 'alpha', as_rational(self.alpha))
        object.__setattr__(self, 'beta', as_rational(self.beta))
        if self.mode == 'BP':
            if self.prob is None:
                raise PreconditionError('BP queries need a probability')
            prob = as_rational(self.prob)
            if not 0 <= prob <= 1:
                raise PreconditionError(
                    'probability {} is outside [0, 1]'.format(prob))
            object.__setattr__(self, 'prob', prob)
        elif self.prob is not None:
            raise PreconditionError(
                'only BP queries take a probability threshold')


@dataclass
class ValidationReport:
    """
    Every invariant violation found by :func:`validate_mdp`, in the order
    they were found.
    """
    violations: list = field(default_factory=list)

    @property
    def is_valid(self):
        return not self.violations

    def __bool__(self):
        return self.is_valid


@dataclass(frozen=True)
class ValueReport:
    """
    Decision and exact supremum of the expectation under the guarantee.

    ``optimal_value`` is ``None`` when no strategy meets the guarantee.
    """
    decision: bool
    optimal_value: Optional[Fraction]
    beta: Fraction
    witness: Any = None

    @property
    def answer(self):
        return 'yes' if self.decision else 'no'


def validate_mdp(model, require_integral=True):
    """
    Check every MDP invariant and list each violation.

    Parameters
    ----------
    model : MdpModel

    require_integral : bool
        If True, non-integer payoffs are reported.

    Returns
    -------
    ValidationReport

    Example
    -------
    >>> model = MdpModel.from_edges(
    >>>     [('a', 'player'), ('b', 'player'), ('c', 'random')],
    >>>     [('a', 'b', 0), ('c', 'a', 0, '1/1')])
    >>> for line in validate_mdp(model).violations:
    ...     print(line)
    alternation broken: edge a -> b joins two player vertices
    no out-edge: b
    """
    report = ValidationReport()
    violations = report.violations
    graph = model.graph
    for src, dst, data in graph.edges(data=True):
        src_owner = graph.nodes[src].get('owner')
        dst_owner = graph.nodes[dst].get('owner')
        if src_owner == dst_owner:
            violations.append(
                'alternation broken: edge {} -> {} joins two {} vertices'.format(
                    src, dst, src_owner))
        weight = data.get('weight')
        if require_integral and not (
                isinstance(weight, int) or
                (isinstance(weight, Fraction) and weight.denominator == 1)):
            violations.append('non-integer payoff {!r} on edge {} -> {}'.format(
                weight, src, dst))
        prob = data.get('prob', None)
        if src_owner == PLAYER and prob is not None:
            violations.append(
                'probability on player edge {} -> {}'.format(src, dst))
        if src_owner == RANDOM:
            if prob is None:
                violations.append(
                    'missing probability on random edge {} -> {}'.format(
                        src, dst))
            elif prob <= 0:
                violations.append(
                    'non-positive probability {} on edge {} -> {}'.format(
                        prob, src, dst))
    for vertex, owner in graph.nodes(data='owner'):
        if owner not in OWNERS:
            violations.append('unknown owner {!r} of {}'.format(owner, vertex))
    for vertex in graph.nodes:
        if graph.out_degree(vertex) == 0:
            violations.append('no out-edge: {}'.format(vertex))
    for vertex in model.random_vertices:
        probs = [p for _, p in model.distribution(vertex) if p is not None]
        if probs:
            total = sum(probs, Fraction(0))
            if total != 1:
                violations.append(
                    'probabilities of {} sum to {} ≠ 1'.format(
                        vertex, total))
    if violations:
        logger.debug('model %r has %d violations', model, len(violations))
    return report


@dataclass(frozen=True)
class ThresholdMap:
    """
    The affine map ``gamma -> scale * gamma - shift`` that translates a
    threshold into the payoff scale of a normalized model.
    """
    scale: int
    shift: int

    def __call__(self, gamma):
        return self.scale * as_rational(gamma) - self.shift

    def inverse(self, value):
        return (as_rational(value) + self.shift) / self.scale


def normalize_guarantee(model, alpha):
    """
    Shift the guarantee to zero by replacing every payoff ``w`` with
    ``b * w - a`` where ``alpha = a / b``.

    Returns
    -------
    Tuple[MdpModel, ThresholdMap]
        The shifted model and the map translating thresholds into it.

    Example
    -------
    >>> model = MdpModel.from_edges(
    >>>     [('a', 'player'), ('b', 'random')],
    >>>     [('a', 'b', -1), ('b', 'a', 1, '1/1')])
    >>> shifted, tmap = normalize_guarantee(model, Fraction(1, 2))
    >>> [w for _, _, w, _ in shifted.edges()]
    [-3, 1]
    >>> tmap(Fraction(1, 2)), tmap.inverse(0)
    (Fraction(0, 1), Fraction(1, 2))
    """
    alpha = as_rational(alpha)
    a, b = alpha.numerator, alpha.denominator
    tmap = ThresholdMap(scale=b, shift=a)
    if a == 0:
        return model, tmap

    def shift(u, v, w):
        value = b * w - a
        if isinstance(value, Fraction) and value.denominator == 1:
            value = int(value)
        return value
    return model.with_weights(shift), tmap


@dataclass(frozen=True)
class LassoRun:
    """
    An ultimately periodic run: ``prefix`` followed by ``cycle`` forever.
    """
    model: MdpModel
    prefix: Tuple
    cycle: Tuple

    def __post_init__(self):
        object.__setattr__(self, 'prefix', tuple(self.prefix))
        object.__setattr__(self, 'cycle', tuple(self.cycle))
        if not self.cycle:
            raise InvalidLassoError('the cycle of a lasso must be nonempty')
        seq = self.prefix + self.cycle + self.cycle[:1]
        for u, v in zip(seq[:-1], seq[1:]):
            if not self.model.has_edge(u, v):
                raise InvalidLassoError('{} -> {} is not an edge'.format(u, v))

    def cycle_payoffs(self):
        cyc = self.cycle + self.cycle[:1]
        return [self.model.weight(u, v) for u, v in zip(cyc[:-1], cyc[1:])]

    def unroll(self, num_edges):
        """
        The first ``num_edges + 1`` vertices of the run.
        """
        seq = list(self.prefix)
        while len(seq) < num_edges + 1:
            seq.extend(self.cycle)
        return seq[:num_edges + 1]


def window_mean(payoffs, start, window, cyclic=False):
    """
    Best mean payoff ``max_{1 <= j <= window}`` of the infix of ``payoffs``
    of length ``j`` starting at ``start``.

    Example
    -------
    >>> window_mean([0, 0, 6, -4, 0, 10], 3, 3, cyclic=True)
    Fraction(2, 1)
    """
    n = len(payoffs)
    total = 0
    best = None
    for j in range(1, window + 1):
        idx = start + j - 1
        if cyclic:
            idx %= n
        total += payoffs[idx]
        mean = Fraction(total, j)
        if best is None or mean > best:
            best = mean
    return best


def lasso_value(run, objective):
    """
    Exact objective value of a lasso.

    For FWMP this is the minimum over the cycle positions of the best window
    mean of length at most ``l``; for BWMP it is the mean payoff of the cycle.

    Parameters
    ----------
    run : LassoRun
    objective : ObjectiveSpec

    Returns
    -------
    Fraction

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> model = demodata.two_phase_mdp()
    >>> run = LassoRun(model, ['v0', 'v1', 'v2', 'v3'],
    >>>                ['v4', 'v5', 'v7', 'v8', 'v7', 'v6'])
    >>> lasso_value(run, ObjectiveSpec.fwmp(3))
    Fraction(2, 1)
    """
    payoffs = run.cycle_payoffs()
    if not objective.is_fwmp:
        return Fraction(sum(payoffs), len(payoffs))
    return min(window_mean(payoffs, i, objective.window, cyclic=True)
               for i in range(len(payoffs)))


def check_start(model, start):
    """
    Raise :class:`UnknownVertexError` unless ``start`` is in ``model``
    """
    return model.check_vertex(start)


def describe(model):
    """
    Small summary dictionary, used by the command line reports.
    """
    return {
        'name': model.name,
        'vertices': model.num_vertices,
        'edges': model.num_edges,
        'player': sorted_vertices(model.player_vertices),
        'random': sorted_vertices(model.random_vertices),
        'W': model.max_abs_weight,
    }
