"""
Sure (two player) solving of window and mean-payoff objectives.

The MDP is read as a game: the player owns the player vertices and an
adversary resolves every random vertex. Thresholds are rationals; the
payoffs are shifted by the threshold so that every window test is against 0.

Example
-------
>>> from networkx_algo_window_mdp import demodata
>>> from networkx_algo_window_mdp.window_games import GameView
>>> from networkx_algo_window_mdp.window_games import fwmp_sure_region
>>> game = GameView(demodata.two_phase_mdp())
>>> sorted_vertices(fwmp_sure_region(game, 3, 2))
['v4', 'v5', 'v6', 'v7', 'v8']
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Any, Dict, List
from ._types import PLAYER, RANDOM, as_rational, sorted_vertices, vertex_sort_key
from .model import ObjectiveSpec, PreconditionError
from .graph_analysis import attractor

logger = logging.getLogger(__name__)

_LOST = float('-inf')

__all__ = [
    'GameView', 'SureValueTable', 'fwmp_sure_region', 'fwmp_sure_values',
    'fwmp_structure', 'mp_game_values', 'available_impls_mp_game_values',
    'energy_progress_measure', 'bwmp_sure_region', 'sure_strategy',
    'FwmpController', 'EnergyController', 'value_grid', 'sure_controller',
    'FwmpStructure', 'FwmpLayer', 'SureValueController',
]


class GameView:
    """
    The arena of a model restricted to ``within``, random vertices played by
    an adversary.

    Parameters
    ----------
    model : MdpModel

    within : Iterable | None
        Vertices kept in the sub-arena (all by default). Random vertices of a
        sub-arena lose the edges that leave it.
    """

    def __init__(self, model, within=None):
        self.model = model
        if within is None:
            within = model.vertices
        self.within = frozenset(within)

    def __repr__(self):
        return '<GameView({}) |V|={}>'.format(
            self.model.name or '', len(self.within))

    def __contains__(self, vertex):
        return vertex in self.within

    def __len__(self):
        return len(self.within)

    @property
    def vertices(self):
        return [v for v in self.model.vertices if v in self.within]

    def restrict(self, keep):
        return GameView(self.model, self.within & set(keep))

    def is_player(self, vertex):
        return self.model.is_player(vertex)

    def successors(self, vertex):
        return [u for u in self.model.graph.successors(vertex)
                if u in self.within]

    def weight(self, src, dst):
        return self.model.weight(src, dst)

    @property
    def max_abs_weight(self):
        return max((abs(self.model.weight(u, v)) for u in self.within
                    for v in self.successors(u)), default=0)


@dataclass
class SureValueTable:
    """
    Per vertex sure value of ``objective``.
    """
    objective: ObjectiveSpec
    values: Dict[Any, Fraction]
    grid_size: int = 0

    def __getitem__(self, vertex):
        return self.values[vertex]

    def __contains__(self, vertex):
        return vertex in self.values

    def items(self):
        return self.values.items()


def _opt(game, vertex, scores):
    if not scores:
        # stuck inside the sub-arena
        return _LOST
    if game.is_player(vertex):
        return max(scores)
    return min(scores)


def _shifted(game, lam):
    lam = as_rational(lam)
    return {(u, v): game.weight(u, v) - lam
            for u in game.within for v in game.successors(u)}


def _good_window_table(game, ell, shifted):
    """
    ``table[i][v]`` is the best guaranteed maximum prefix sum over the next
    ``1 .. i`` steps from ``v``, for ``i = 1 .. ell``.
    """
    prev = {v: Fraction(0) for v in game.within}
    table = [prev]
    for _ in range(ell):
        cur = {}
        for v in game.within:
            cur[v] = _opt(game, v, [
                shifted[(v, u)] + max(Fraction(0), prev[u])
                for u in game.successors(v)])
        table.append(cur)
        prev = cur
    return table


def _direct_region(game, ell, shifted):
    """
    Largest sub-arena in which the player closes every window within
    ``ell`` steps, with the good window table of the last iteration.
    """
    current = game
    while True:
        if not current.within:
            return current, None
        table = _good_window_table(current, ell, shifted)
        good = {v for v in current.within if table[ell][v] >= 0}
        if len(good) == len(current):
            return current, table
        bad = current.within - good
        lost, _ = attractor(current.model, bad, owner=RANDOM,
                            within=current.within)
        current = current.restrict(current.within - lost)


@dataclass
class FwmpLayer:
    """
    One layer of the sure FWMP region: the direct region of a sub-arena and
    the player attractor reaching it.
    """
    direct: GameView
    table: List[Dict]
    attractor: frozenset
    attractor_choice: Dict


@dataclass
class FwmpStructure:
    """
    The layers of the sure FWMP region at one threshold.
    """
    ell: int
    lam: Fraction
    shifted: Dict
    layers: List[FwmpLayer] = field(default_factory=list)

    @property
    def region(self):
        out = set()
        for layer in self.layers:
            out |= layer.attractor
        return out

    def zone_of(self, vertex):
        for idx, layer in enumerate(self.layers):
            if vertex in layer.direct:
                return idx, True
            if vertex in layer.attractor:
                return idx, False
        return None, False


def fwmp_structure(game, ell, lam):
    """
    Layered decomposition of the sure FWMP(``ell``, ``lam``) region.

    The region is built as the union of player attractors of direct regions,
    each computed in the sub-arena left by the previous layers.
    """
    if ell < 1:
        raise PreconditionError('window length must be >= 1')
    lam = as_rational(lam)
    shifted = _shifted(game, lam)
    struct = FwmpStructure(ell, lam, shifted)
    remaining = game
    while remaining.within:
        direct, table = _direct_region(remaining, ell, shifted)
        if not direct.within:
            break
        attr, choice = attractor(game.model, direct.within, owner=PLAYER,
                                 within=remaining.within)
        struct.layers.append(
            FwmpLayer(direct, table, frozenset(attr), choice))
        remaining = remaining.restrict(remaining.within - attr)
    logger.debug('FWMP(l=%d, %s) region has %d layers', ell, lam,
                 len(struct.layers))
    return struct


def fwmp_sure_region(game, ell, lam):
    """
    Vertices from which the player surely wins FWMP(``ell``, ``lam``).

    Parameters
    ----------
    game : GameView

    ell : int
        Window length, at least 1.

    lam : Fraction | int | str
        Threshold.

    Returns
    -------
    Set

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> game = GameView(demodata.two_phase_mdp())
    >>> len(fwmp_sure_region(game, 3, 0))
    9
    >>> region = fwmp_sure_region(game, 3, 2)
    >>> 'v4' in region, 'v2' in region
    (True, False)
    """
    return fwmp_structure(game, ell, lam).region


def value_grid(max_den, bound, lower=None):
    """
    Sorted rationals ``a / b`` with ``1 <= b <= max_den`` and
    ``lower * b <= a <= bound * b``.

    Example
    -------
    >>> [str(x) for x in value_grid(2, 1)]
    ['-1', '-1/2', '0', '1/2', '1']
    >>> [str(x) for x in value_grid(2, 1, lower=0)]
    ['0', '1/2', '1']
    """
    if lower is None:
        lower = -bound
    grid = set()
    for b in range(1, max_den + 1):
        for a in range(lower * b, bound * b + 1):
            grid.add(Fraction(a, b))
    return sorted(grid)


def _max_member(grid, member):
    """
    Largest grid value for which ``member`` holds, assuming ``member`` is
    antitone and holds at ``grid[0]``.
    """
    lo, hi = 0, len(grid) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if member(grid[mid]):
            lo = mid
        else:
            hi = mid - 1
    return grid[lo]


def fwmp_sure_values(game, ell):
    """
    Sure FWMP(``ell``) value of every vertex of a game in which every vertex
    surely wins at threshold 0.

    Each value is found by binary search over the window mean grid.

    Returns
    -------
    SureValueTable

    Raises
    ------
    PreconditionError
        If some vertex loses at threshold 0.

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> table = fwmp_sure_values(GameView(demodata.two_phase_mdp()), 3)
    >>> table['v4'], table['v2']
    (Fraction(2, 1), Fraction(0, 1))
    """
    regions = {}

    def region(lam):
        if lam not in regions:
            regions[lam] = fwmp_sure_region(game, ell, lam)
        return regions[lam]

    losers = set(game.within) - region(Fraction(0))
    if losers:
        raise PreconditionError(
            'vertices {} lose FWMP(l={}, 0)'.format(
                sorted_vertices(losers), ell))
    grid = value_grid(ell, game.max_abs_weight, lower=0)
    values = {}
    for v in game.vertices:
        values[v] = _max_member(grid, lambda lam: v in region(lam))
    logger.debug('sure FWMP values over a grid of %d points, %d regions',
                 len(grid), len(regions))
    return SureValueTable(ObjectiveSpec.fwmp(ell), values, len(grid))


def _integer_weights(game, lam=0):
    """
    Integer payoffs ``scale * (w - lam)`` and the scale used.
    """
    shifted = _shifted(game, lam)
    scale = 1
    for w in shifted.values():
        scale = lcm(scale, Fraction(w).denominator)
    return {e: int(w * scale) for e, w in shifted.items()}, scale


def energy_progress_measure(game, weights):
    """
    Least initial credit the player needs at each vertex to keep the energy
    level non-negative forever, ``None`` where no finite credit suffices.

    Parameters
    ----------
    game : GameView

    weights : Dict[Tuple, int]
        Integer payoff of every edge of the game.

    Returns
    -------
    Dict
    """
    top = sum(max(0, -min((weights[(v, u)] for u in game.successors(v)),
                          default=0))
              for v in game.within) + 1
    credit = {v: 0 for v in game.within}
    changed = True
    num_sweeps = 0
    while changed:
        changed = False
        num_sweeps += 1
        for v in game.vertices:
            if credit[v] is None:
                continue
            needs = []
            for u in game.successors(v):
                if credit[u] is None:
                    needs.append(None)
                else:
                    needs.append(max(0, credit[u] - weights[(v, u)]))
            finite = [n for n in needs if n is not None]
            if game.is_player(v):
                new = min(finite) if finite else None
            else:
                new = None if None in needs or not needs else max(needs)
            if new is not None and new >= top:
                new = None
            if new != credit[v] and (new is None or new > credit[v]):
                credit[v] = new
                changed = True
    logger.debug('energy progress measure stable after %d sweeps',
                 num_sweeps)
    return credit


def bwmp_sure_region(game, lam):
    """
    Vertices from which the player surely secures mean payoff at least
    ``lam``, equivalently a bounded window value at least ``lam``.

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> game = GameView(demodata.two_cycle_mdp())
    >>> sorted_vertices(bwmp_sure_region(game, 0))
    ['v1', 'v2', 'v3']
    >>> bwmp_sure_region(game, '1/10')
    set()
    """
    weights, _ = _integer_weights(game, lam)
    credit = energy_progress_measure(game, weights)
    return {v for v, c in credit.items() if c is not None}


def available_impls_mp_game_values():
    """
    Returns all available implementations for :func:`mp_game_values`.

    Returns
    -------
    List[str]
        the string code for each available implementation
    """
    return ['value-iteration', 'energy']


def _mp_values_iterate(game):
    weights, scale = _integer_weights(game)
    n = len(game)
    bound = max((abs(w) for w in weights.values()), default=0)
    if bound == 0:
        return {v: Fraction(0) for v in game.within}
    # Zwick and Paterson: after k >= 4 n^3 W rounds the value is the unique
    # fraction with denominator <= n within 1 / (2 n^2) of the iterate.
    rounds = 4 * n ** 3 * bound
    cur = {v: 0 for v in game.within}
    for _ in range(rounds):
        cur = {v: _opt(game, v, [weights[(v, u)] + cur[u]
                                 for u in game.successors(v)])
               for v in game.within}
    return {v: Fraction(cur[v], rounds).limit_denominator(n) / scale
            for v in game.within}


def _mp_values_energy(game):
    n = len(game)
    bound = game.max_abs_weight
    _, scale = _integer_weights(game)
    grid = value_grid(n, int(bound * scale) + 1)
    grid = [g / scale for g in grid]
    regions = {}

    def region(lam):
        if lam not in regions:
            regions[lam] = bwmp_sure_region(game, lam)
        return regions[lam]

    return {v: _max_member(grid, lambda lam: v in region(lam))
            for v in game.vertices}


def mp_game_values(game, impl='auto'):
    """
    Exact mean-payoff game value of every vertex. Doubles as the sure BWMP
    value table.

    Parameters
    ----------
    game : GameView

    impl : str
        ``"value-iteration"`` (``"auto"``) or ``"energy"``, see
        :func:`available_impls_mp_game_values`.

    Returns
    -------
    Dict[vertex, Fraction]

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> game = GameView(demodata.two_cycle_mdp())
    >>> mp_game_values(game)
    {'v1': Fraction(0, 1), 'v2': Fraction(0, 1), 'v3': Fraction(0, 1)}
    >>> mp_game_values(game, impl='energy') == mp_game_values(game)
    True
    """
    if impl == 'auto':
        impl = 'value-iteration'
    if impl == 'value-iteration':
        values = _mp_values_iterate(game)
    elif impl == 'energy':
        values = _mp_values_energy(game)
    else:
        raise KeyError(impl)
    return {v: values[v] for v in game.vertices}


class FwmpController:
    """
    Deterministic sure FWMP controller with memory ``1 .. ell``.

    The memory ``r`` bounds the number of steps left to close the oldest
    window that may still be open. In every direct region a plan fixes, for
    each memory and vertex, an assumed deficit ``need[r][v]`` at least as
    large as the true one whenever the plan is followed, so the controller
    never reads the payoffs of the run. It starts over with ``r = ell`` as
    soon as the assumed window is closed. Plays only move to earlier layers.

    Parameters
    ----------
    structure : FwmpStructure

    model : MdpModel

    prefer : Dict | None
        Preferred successor of some player vertices, played whenever it
        keeps the open window closable in time.
    """
    uses_prev = False

    def __init__(self, structure, model, prefer=None):
        self.structure = structure
        self.model = model
        self.prefer = dict(prefer or {})
        self._zone = {}
        for idx, layer in enumerate(structure.layers):
            for v in layer.attractor:
                self._zone[v] = (idx, v in layer.direct)
        self._plans = [self._plan(layer) for layer in structure.layers]

    def _pick(self, layer, r, vertex, need):
        shifted = self.structure.shifted
        before = layer.table[r - 1]
        succs = sorted_vertices(layer.direct.successors(vertex))
        scores = {u: shifted[(vertex, u)] + max(Fraction(0), before[u])
                  for u in succs}
        pref = self.prefer.get(vertex)
        if need is not None and pref in scores and scores[pref] >= need:
            return pref
        top = max(scores.values())
        return next(u for u in succs if scores[u] == top)

    def _plan(self, layer):
        ell = self.structure.ell
        shifted = self.structure.shifted
        need = [{} for _ in range(ell + 1)]
        need[ell] = {v: Fraction(0) for v in layer.direct.within}
        moves = {}
        for r in range(ell, 0, -1):
            for v in sorted_vertices(need[r]):
                if self.model.is_player(v):
                    moves[(r, v)] = self._pick(layer, r, v, need[r][v])
                    succs = [moves[(r, v)]]
                else:
                    succs = layer.direct.successors(v)
                if r == 1:
                    continue
                for u in succs:
                    rest = need[r][v] - shifted[(v, u)]
                    if rest > need[r - 1].get(u, 0):
                        need[r - 1][u] = rest
        return need, moves

    def _memory(self, memory):
        ell = self.structure.ell
        if isinstance(memory, int) and 1 <= memory <= ell:
            return memory
        return ell

    def initial(self):
        return self.structure.ell

    def update(self, memory, prev, vertex):
        ell = self.structure.ell
        idx, direct = self._zone.get(vertex, (None, False))
        r = self._memory(memory)
        if not direct or r == 1:
            return ell
        need, _ = self._plans[idx]
        if need[r - 1].get(vertex, 0) > 0:
            return r - 1
        return ell

    def choose(self, memory, vertex):
        succs = sorted_vertices(self.model.graph.successors(vertex))
        idx, direct = self._zone.get(vertex, (None, False))
        if idx is None:
            return [(succs[0], Fraction(1))]
        layer = self.structure.layers[idx]
        if not direct:
            return [(layer.attractor_choice.get(vertex, succs[0]), Fraction(1))]
        r = self._memory(memory)
        _, moves = self._plans[idx]
        if (r, vertex) in moves:
            return [(moves[(r, vertex)], Fraction(1))]
        return [(self._pick(layer, r, vertex, None), Fraction(1))]


class EnergyController:
    """
    Memoryless controller keeping the energy level consistent with a
    progress measure; it secures mean payoff at least the threshold.
    A successor from ``prefer`` is kept when the measure allows it.
    """
    uses_prev = False

    def __init__(self, game, weights, credit, prefer=None):
        prefer = prefer or {}
        self.choice = {}
        for v in game.vertices:
            if not game.is_player(v):
                continue
            succs = sorted_vertices(game.successors(v))
            if credit[v] is None:
                # losing vertices are never reached from the region
                if succs:
                    self.choice[v] = succs[0]
                continue
            finite = [u for u in succs if credit[u] is not None]
            ok = [u for u in finite
                  if max(0, credit[u] - weights[(v, u)]) <= credit[v]]
            if prefer.get(v) in ok:
                self.choice[v] = prefer[v]
                continue
            self.choice[v] = min(
                finite, key=lambda u: (max(0, credit[u] - weights[(v, u)]),
                                       vertex_sort_key(u)))

    def initial(self):
        return None

    def update(self, memory, prev, vertex):
        return None

    def choose(self, memory, vertex):
        return [(self.choice[vertex], Fraction(1))]


def sure_controller(game, objective, lam, prefer=None):
    """
    Controller surely winning ``{objective >= lam}`` from the vertices of its
    winning region, and that region.
    """
    if objective.is_fwmp:
        structure = fwmp_structure(game, objective.window, lam)
        controller = FwmpController(structure, game.model, prefer=prefer)
        return controller, structure.region
    weights, _ = _integer_weights(game, lam)
    credit = energy_progress_measure(game, weights)
    region = {v for v, c in credit.items() if c is not None}
    return EnergyController(game, weights, credit, prefer=prefer), region


class SureValueController:
    """
    Plays at every vertex the sure controller for the sure value of that
    vertex, given in ``values``.

    Sure values never decrease along the plays of this controller, so every
    run eventually stays with one threshold and secures it. The per
    threshold controllers share one memory.

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> from networkx_algo_window_mdp.strategy import realize
    >>> model = demodata.two_phase_mdp()
    >>> game = GameView(model)
    >>> values = fwmp_sure_values(game, 3).values
    >>> controller = SureValueController(game, ObjectiveSpec.fwmp(3), values)
    >>> realize(controller, model, ['v2']).memory_size <= 3
    True
    """
    uses_prev = False

    def __init__(self, game, objective, values, prefer=None):
        self.values = dict(values)
        self.inner = {}
        lams = {x for x in self.values.values() if x is not None}
        for lam in sorted(lams):
            self.inner[lam], _ = sure_controller(game, objective, lam,
                                                 prefer=prefer)
        if not self.inner:
            raise PreconditionError('no sure values given')
        self._lowest = self.inner[min(self.inner)]

    def _at(self, vertex):
        return self.inner.get(self.values.get(vertex), self._lowest)

    def initial(self):
        return self._lowest.initial()

    def update(self, memory, prev, vertex):
        return self._at(vertex).update(memory, prev, vertex)

    def choose(self, memory, vertex):
        return self._at(vertex).choose(memory, vertex)


def sure_strategy(game, objective, lam, starts=None):
    """
    Deterministic strategy surely winning ``{objective >= lam}`` from every
    vertex of ``game``.

    Parameters
    ----------
    game : GameView
        Usually already restricted to the winning region.

    objective : ObjectiveSpec

    lam : Fraction

    starts : Iterable | None
        Vertices the machine is explored from (all by default).

    Returns
    -------
    MealyStrategy
        For FWMP objectives at most ``ell`` memory states; memoryless for
        BWMP.

    Raises
    ------
    PreconditionError
        If some vertex of ``game`` does not win at ``lam``.

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> model = demodata.two_cycle_mdp()
    >>> strat = sure_strategy(GameView(model), ObjectiveSpec.bwmp(), 0)
    >>> strat.memory_size, strat.is_deterministic
    (1, True)
    """
    from .strategy import realize
    controller, region = sure_controller(game, objective, lam)
    losers = set(game.within) - set(region)
    if losers:
        raise PreconditionError('vertices {} do not win {} >= {}'.format(
            sorted_vertices(losers), objective, lam))
    starts = game.vertices if starts is None else list(starts)
    strat = realize(controller, game.model, starts,
                    name='sure_{}'.format(str(objective)))
    logger.debug('sure strategy for %s >= %s has %d states', objective, lam,
                 strat.memory_size)
    return strat

