"""
Finite memory strategies as Mealy machines.

A :class:`MealyStrategy` reads every vertex of the run. While the token is
on a player vertex ``v`` and the machine is in state ``q`` (the state reached
after reading the prefix before ``v``), the strategy plays the distribution
``output(q, v)``; afterwards the machine moves to ``transition(q, v)``.

The solvers describe strategies as *controllers*: objects with

* ``initial()`` returning the initial memory,
* ``update(memory, prev, vertex)`` returning the memory after reading
  ``vertex`` (``prev`` is the vertex read before, or ``None``),
* ``choose(memory, vertex)`` returning ``[(successor, probability), ...]``.

and optionally ``uses_prev = False`` when ``update`` ignores ``prev``.

:func:`realize` turns a controller into an explicit machine over the vertices
reachable from a set of start vertices, and :meth:`MealyStrategy.minimize`
merges states that behave the same on every input.

Example
-------
>>> from networkx_algo_window_mdp import demodata
>>> from networkx_algo_window_mdp.strategy import MemorylessController, realize
>>> model = demodata.two_cycle_mdp()
>>> strat = realize(MemorylessController({'v1': 'v2', 'v3': 'v2'}), model,
>>>                 starts=['v1'])
>>> strat.memory_size, strat.is_deterministic
(1, True)
>>> strat.output(strat.initial, 'v3')
[('v2', Fraction(1, 1))]
"""
import json
import logging
from collections import deque
from fractions import Fraction
from networkx.utils import open_file
from ._types import as_rational, format_rational, sorted_vertices
from .model import WindowMdpError, LassoRun

logger = logging.getLogger(__name__)

__all__ = [
    'MealyStrategy', 'MemorylessController', 'realize', 'read_strategy',
    'write_strategy', 'strategy_lassos', 'UndefinedMoveError',
]


class UndefinedMoveError(WindowMdpError, KeyError):
    """
    Raised when a strategy has no transition or output for a state and input
    """
    pass


def dirac(vertex):
    return [(vertex, Fraction(1))]


class MealyStrategy:
    """
    Explicit Mealy machine realizing a (possibly randomised) strategy.

    Parameters
    ----------
    states : List[Hashable]
        Machine states; ``states[0]`` is not required to be ``initial``.

    initial : Hashable
        The initial state.

    transitions : Dict[Tuple[state, vertex], state]
        The update function, defined on every vertex the machine may read.

    outputs : Dict[Tuple[state, vertex], List[Tuple[vertex, Fraction]]]
        Distribution over successors, defined on player vertex inputs.
    """

    def __init__(self, states, initial, transitions, outputs, name=None):
        self.states = list(states)
        self.initial = initial
        self.transitions = dict(transitions)
        self.outputs = {key: [(succ, as_rational(prob)) for succ, prob in dist]
                        for key, dist in outputs.items()}
        self.name = name

    def __repr__(self):
        return '<MealyStrategy({}) states={} deterministic={}>'.format(
            self.name or '', len(self.states), self.is_deterministic)

    @property
    def inputs(self):
        return sorted_vertices({v for _, v in self.transitions})

    @property
    def memory_size(self):
        return len(self.states)

    @property
    def is_deterministic(self):
        return all(len(dist) == 1 for dist in self.outputs.values())

    @property
    def is_memoryless(self):
        return self.memory_size == 1

    def output(self, state, vertex):
        try:
            return self.outputs[(state, vertex)]
        except KeyError:
            raise UndefinedMoveError((state, vertex))

    def transition(self, state, vertex):
        try:
            return self.transitions[(state, vertex)]
        except KeyError:
            raise UndefinedMoveError((state, vertex))

    def decisions_at(self, vertex):
        """
        The distinct distributions the strategy ever plays at ``vertex``.
        """
        found = []
        for (_, v), dist in self.outputs.items():
            if v == vertex and dist not in found:
                found.append(dist)
        return found

    def audit(self, model):
        """
        Structural audit: every output is a distribution over out-neighbours
        and every transition target is a state.

        Returns
        -------
        List[str] : the problems found (empty if the strategy is sound).
        """
        problems = []
        states = set(self.states)
        if self.initial not in states:
            problems.append('initial state {!r} is not a state'.format(
                self.initial))
        for (state, vertex), nxt in self.transitions.items():
            if nxt not in states:
                problems.append('transition ({!r}, {}) leaves the states'.format(
                    state, vertex))
            if vertex in model and model.is_player(vertex) and (
                    (state, vertex) not in self.outputs):
                problems.append('no output for ({!r}, {})'.format(state, vertex))
        for (state, vertex), dist in self.outputs.items():
            if vertex not in model:
                problems.append('output for unknown vertex {}'.format(vertex))
                continue
            total = sum((prob for _, prob in dist), Fraction(0))
            if total != 1:
                problems.append('output ({!r}, {}) sums to {}'.format(
                    state, vertex, total))
            for succ, prob in dist:
                if prob < 0:
                    problems.append('negative weight at ({!r}, {})'.format(
                        state, vertex))
                if not model.has_edge(vertex, succ):
                    problems.append('{} -> {} is not an edge'.format(
                        vertex, succ))
        return problems

    def minimize(self):
        """
        Merge states that produce the same outputs and move to equivalent
        states on every input (Moore style partition refinement).

        Returns
        -------
        MealyStrategy : with states relabelled ``0 .. k-1``, initial 0.
        """
        alphabet = self.inputs

        def outsig(state):
            return tuple(
                tuple(self.outputs.get((state, v), ())) for v in alphabet)

        block = {}
        initial_blocks = {}
        for state in self.states:
            sig = outsig(state)
            block[state] = initial_blocks.setdefault(sig, len(initial_blocks))
        num_blocks = len(initial_blocks)
        while True:
            refined = {}
            new_block = {}
            for state in self.states:
                sig = (block[state],) + tuple(
                    block.get(self.transitions.get((state, v)), -1)
                    for v in alphabet)
                new_block[state] = refined.setdefault(sig, len(refined))
            block = new_block
            if len(refined) == num_blocks:
                break
            num_blocks = len(refined)

        # relabel blocks in order of discovery from the initial state
        order = {}
        queue = deque([self.initial])
        rep = {}
        while queue:
            state = queue.popleft()
            b = block[state]
            if b in order:
                continue
            order[b] = len(order)
            rep[b] = state
            for v in alphabet:
                nxt = self.transitions.get((state, v))
                if nxt is not None and block[nxt] not in order:
                    queue.append(nxt)
        transitions = {}
        outputs = {}
        for b, state in rep.items():
            for v in alphabet:
                nxt = self.transitions.get((state, v))
                if nxt is not None:
                    transitions[(order[b], v)] = order[block[nxt]]
                if (state, v) in self.outputs:
                    outputs[(order[b], v)] = self.outputs[(state, v)]
        return MealyStrategy(range(len(order)), 0, transitions, outputs,
                             name=self.name)

    def to_json(self):
        """
        JSON compatible document with rationals written as ``"n/d"``.
        """
        rows = []
        for (state, vertex), nxt in self.transitions.items():
            dist = self.outputs.get((state, vertex), [])
            rows.append({
                'state': state,
                'input': vertex,
                'next': nxt,
                'output': [{'vertex': succ, 'prob': format_rational(prob)}
                           for succ, prob in dist],
            })
        return {
            'name': self.name,
            'states': list(self.states),
            'initial': self.initial,
            'transitions': rows,
        }

    @classmethod
    def from_json(cls, data):
        transitions = {}
        outputs = {}
        for row in data['transitions']:
            key = (row['state'], row['input'])
            transitions[key] = row['next']
            if row.get('output'):
                outputs[key] = [(item['vertex'], as_rational(item['prob']))
                                for item in row['output']]
        return cls(data['states'], data['initial'], transitions, outputs,
                   name=data.get('name'))

    def dumps(self):
        return json.dumps(self.to_json(), indent=2)


class MemorylessController:
    """
    Controller of a memoryless strategy given as a map from player vertices
    to a successor or to a distribution ``[(successor, prob), ...]``.
    """
    uses_prev = False

    def __init__(self, choice):
        self.choice = choice

    def initial(self):
        return None

    def update(self, memory, prev, vertex):
        return None

    def choose(self, memory, vertex):
        move = self.choice[vertex]
        if isinstance(move, list):
            return move
        return dirac(move)


def realize(controller, model, starts, name=None, minimize=True):
    """
    Build the explicit Mealy machine of ``controller`` on ``model``.

    The machine state is the pair of the controller memory and the last
    vertex read. It is explored over the vertices reachable from ``starts``.
    Reading a vertex that cannot follow the previous one restarts the
    controller. Controllers with ``uses_prev = False`` never look at the
    last vertex; their machine states are their memories alone.

    Parameters
    ----------
    controller : object
        Implements ``initial``, ``update`` and ``choose``.

    model : MdpModel

    starts : Iterable[vertex]

    minimize : bool
        Merge equivalent states (the default).

    Returns
    -------
    MealyStrategy
    """
    init_state = (controller.initial(), None)
    uses_prev = getattr(controller, 'uses_prev', True)

    def step(state, vertex):
        memory, prev = state
        if not uses_prev:
            return (controller.update(memory, None, vertex), None)
        if prev is not None and not model.has_edge(prev, vertex):
            memory, prev = init_state
        return (controller.update(memory, prev, vertex), vertex)

    # First collect the vertices that may be read at all.
    alphabet = set()
    pending = deque((init_state, s) for s in starts)
    seen = set()
    transitions = {}
    outputs = {}
    while pending:
        state, vertex = pending.popleft()
        if (state, vertex) in seen:
            continue
        seen.add((state, vertex))
        alphabet.add(vertex)
        nxt = step(state, vertex)
        transitions[(state, vertex)] = nxt
        if model.is_player(vertex):
            dist = controller.choose(nxt[0], vertex)
            outputs[(state, vertex)] = list(dist)
            succs = [succ for succ, prob in dist if prob != 0]
        else:
            succs = model.successors(vertex)
        for succ in succs:
            if (nxt, succ) not in seen:
                pending.append((nxt, succ))

    # Complete the machine on the reachable alphabet so that states can be
    # compared input by input.
    states = {init_state} | set(transitions.values())
    pending = deque(states)
    alphabet = sorted_vertices(alphabet)
    while pending:
        state = pending.popleft()
        for vertex in alphabet:
            if (state, vertex) in transitions:
                continue
            nxt = step(state, vertex)
            transitions[(state, vertex)] = nxt
            if model.is_player(vertex):
                outputs[(state, vertex)] = list(
                    controller.choose(nxt[0], vertex))
            if nxt not in states:
                states.add(nxt)
                pending.append(nxt)

    index = {init_state: 0}
    for state, _ in transitions:
        index.setdefault(state, len(index))
    for state in transitions.values():
        index.setdefault(state, len(index))
    machine = MealyStrategy(
        range(len(index)), 0,
        {(index[s], v): index[n] for (s, v), n in transitions.items()},
        {(index[s], v): d for (s, v), d in outputs.items()},
        name=name)
    logger.debug('realized %d raw states over %d inputs', len(index),
                 len(alphabet))
    if minimize:
        machine = machine.minimize()
    return machine


@open_file(1, 'w')
def write_strategy(strategy, fpath):
    """
    Write the JSON strategy document to ``fpath`` (path or open file object).
    """
    json.dump(strategy.to_json(), fpath, indent=2)


@open_file(0, 'r')
def read_strategy(fpath):
    return MealyStrategy.from_json(json.load(fpath))


def strategy_lassos(model, strategy, start):
    """
    Lassos of every simple cycle of the product of ``model`` with a
    deterministic ``strategy``, each with a prefix from ``start``.

    Every run consistent with the strategy eventually follows one of these
    cycle shapes, so a sure guarantee can be audited with
    :func:`networkx_algo_window_mdp.model.lasso_value`.

    Returns
    -------
    List[LassoRun]
    """
    import networkx as nx
    if not strategy.is_deterministic:
        raise ValueError('lasso extraction needs a deterministic strategy')
    product = nx.DiGraph()
    root = (strategy.initial, start)
    pending = deque([root])
    product.add_node(root)
    while pending:
        state, vertex = pending.popleft()
        nxt = strategy.transition(state, vertex)
        if model.is_player(vertex):
            succs = [succ for succ, _ in strategy.output(state, vertex)]
        else:
            succs = model.successors(vertex)
        for succ in succs:
            node = (nxt, succ)
            if node not in product:
                product.add_node(node)
                pending.append(node)
            product.add_edge((state, vertex), node)
    lassos = []
    for cycle in nx.simple_cycles(product):
        path = nx.shortest_path(product, root, cycle[0])
        prefix = [v for _, v in path[:-1]]
        lassos.append(LassoRun(model, prefix, [v for _, v in cycle]))
    return lassos
