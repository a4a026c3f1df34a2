"""
Brute force reference solvers for small games, independent of the
constructions in :mod:`networkx_algo_window_mdp.window_games`. The test
suite compares the two on random instances.
"""
import itertools as it
import logging
from fractions import Fraction
from math import lcm
import networkx as nx
from ._types import as_rational, sorted_vertices
from .model import WindowMdpError

logger = logging.getLogger(__name__)

__all__ = ['oracle_fwmp_region', 'brute_force_mp_values',
           'OracleTooLargeError', 'ORACLE_MAX_VERTICES']

ORACLE_MAX_VERTICES = 12


class OracleTooLargeError(WindowMdpError, ValueError):
    """
    Raised when an instance is too large for exhaustive solving
    """
    pass


def _check_size(game):
    if len(game) > ORACLE_MAX_VERTICES:
        raise OracleTooLargeError(
            'oracles handle at most {} vertices, got {}'.format(
                ORACLE_MAX_VERTICES, len(game)))


def _scaled_weights(game, lam):
    lam = as_rational(lam)
    weights = {(u, v): Fraction(game.weight(u, v)) - lam
               for u in game.within for v in game.successors(u)}
    scale = 1
    for w in weights.values():
        scale = lcm(scale, w.denominator)
    return {e: int(w * scale) for e, w in weights.items()}


def _window_product(game, ell, weights):
    """
    Explicit product arena. A state is ``(vertex, deficit, steps, failed)``:
    the payoff sum of the oldest open window, its age, and whether the step
    into the state let a window run out.
    """
    product = nx.DiGraph()
    roots = [(v, 0, 0, False) for v in game.vertices]
    pending = list(roots)
    product.add_nodes_from(roots)
    while pending:
        state = pending.pop()
        v, deficit, steps, _ = state
        for u in game.successors(v):
            total = deficit + weights[(v, u)]
            if total >= 0:
                nxt = (u, 0, 0, False)
            elif steps + 1 >= ell:
                nxt = (u, 0, 0, True)
            else:
                nxt = (u, total, steps + 1, False)
            if nxt not in product:
                product.add_node(nxt)
                pending.append(nxt)
            product.add_edge(state, nxt)
    return product, roots


def _force(product, target, mover, within):
    """
    States of ``within`` from which ``mover`` (a predicate on states) can
    force a visit to ``target``.
    """
    attr = set(target) & within
    changed = True
    while changed:
        changed = False
        for s in within - attr:
            succs = [t for t in product.successors(s) if t in within]
            if not succs:
                continue
            if mover(s):
                hit = any(t in attr for t in succs)
            else:
                hit = all(t in attr for t in succs)
            if hit:
                attr.add(s)
                changed = True
    return attr


def oracle_fwmp_region(game, ell, lam):
    """
    Sure winning region of FWMP(``ell``) at threshold ``lam`` computed on the
    explicit product with window states.

    The player wins when windows run out only finitely often: the adversary
    wins a Büchi game on the failing states.

    Raises
    ------
    OracleTooLargeError

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> from networkx_algo_window_mdp.window_games import GameView
    >>> region = oracle_fwmp_region(GameView(demodata.two_phase_mdp()), 3, 2)
    >>> sorted_vertices(region)
    ['v4', 'v5', 'v6', 'v7', 'v8']
    """
    _check_size(game)
    weights = _scaled_weights(game, lam)
    product, roots = _window_product(game, ell, weights)
    model = game.model

    def is_player(state):
        return model.is_player(state[0])

    def is_adversary(state):
        return not is_player(state)

    # deadlocks lose for the player whoever owns them
    stuck = {s for s in product.nodes if product.out_degree(s) == 0}
    failing = {s for s in product.nodes if s[3]} | stuck
    remaining = set(product.nodes)
    player_wins = set()
    while remaining:
        hit = _force(product, failing & remaining, is_adversary, remaining)
        avoid = remaining - hit
        if not avoid:
            break
        won = _force(product, avoid, is_player, remaining)
        player_wins |= won
        remaining -= won
    region = {s[0] for s in roots if s in player_wins}
    logger.debug('oracle product has %d states', product.number_of_nodes())
    return region


def _cycle_mean(game, move, start):
    seen = {}
    path = []
    v = start
    while v not in seen:
        seen[v] = len(path)
        path.append(v)
        v = move[v]
    cycle = path[seen[v]:] + [v]
    total = sum(game.weight(a, b) for a, b in zip(cycle, cycle[1:]))
    return Fraction(total, len(cycle) - 1)


def brute_force_mp_values(game):
    """
    Mean payoff game values by enumerating the memoryless strategies of both
    sides; the player maximizes, random vertices minimize.

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> from networkx_algo_window_mdp.window_games import GameView
    >>> values = brute_force_mp_values(GameView(demodata.two_cycle_mdp()))
    >>> values['v1'], values['v3']
    (Fraction(0, 1), Fraction(0, 1))
    """
    _check_size(game)
    vertices = game.vertices
    player = [v for v in vertices if game.is_player(v)]
    other = [v for v in vertices if not game.is_player(v)]
    options = {v: sorted_vertices(game.successors(v)) for v in vertices}
    stuck = [v for v in vertices if not options[v]]
    if stuck:
        raise nx.NetworkXPointlessConcept(
            'vertices {} have no move'.format(stuck))
    best = {v: None for v in vertices}
    for pick in it.product(*[options[v] for v in player]):
        sigma = dict(zip(player, pick))
        worst = {v: None for v in vertices}
        for reply in it.product(*[options[v] for v in other]):
            move = dict(sigma)
            move.update(zip(other, reply))
            for v in vertices:
                value = _cycle_mean(game, move, v)
                if worst[v] is None or value < worst[v]:
                    worst[v] = value
        for v in vertices:
            if best[v] is None or worst[v] > best[v]:
                best[v] = worst[v]
    return best
