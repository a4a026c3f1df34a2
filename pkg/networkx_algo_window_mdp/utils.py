import networkx as nx
from fractions import Fraction
from networkx.utils import py_random_state
from ._types import PLAYER, RANDOM
from .model import MdpModel

__all__ = ['random_mdp', 'mdp_str']


def _split(total, parts, rng):
    """
    Random composition of ``total`` into ``parts`` positive integers.
    """
    cuts = sorted(rng.sample(range(1, total), parts - 1))
    bounds = [0] + cuts + [total]
    return [b - a for a, b in zip(bounds, bounds[1:])]


@py_random_state(1)
def random_mdp(n, seed=None, max_weight=2, max_den=4, max_degree=2):
    """
    Random bipartite MDP with about half of its ``n`` vertices owned by the
    player.

    Parameters
    ----------
    n : int
        Number of vertices, at least 2.

    seed : integer, random_state, or None (default)
        Indicator of random number generation state.
        See :ref:`Randomness<randomness>`.

    max_weight : int
        Payoffs are drawn uniformly from ``[-max_weight, max_weight]``.

    max_den : int
        Largest denominator of the edge probabilities.

    max_degree : int
        Largest out-degree.

    Returns
    -------
    MdpModel

    Example
    -------
    >>> from networkx_algo_window_mdp.model import validate_mdp
    >>> model = random_mdp(6, seed=0)
    >>> model.num_vertices
    6
    >>> validate_mdp(model).is_valid
    True
    """
    if n < 2:
        raise nx.NetworkXPointlessConcept('an MDP needs a vertex of each kind')
    num_player = (n + 1) // 2
    player = ['p{}'.format(i) for i in range(num_player)]
    random = ['r{}'.format(i) for i in range(n - num_player)]
    vertices = [(v, PLAYER) for v in player] + [(v, RANDOM) for v in random]
    edges = []

    def weight():
        return seed.randint(-max_weight, max_weight)

    for v in player:
        k = seed.randint(1, min(max_degree, len(random)))
        for u in seed.sample(random, k):
            edges.append((v, u, weight()))
    for v in random:
        den = seed.randint(1, max_den)
        k = seed.randint(1, min(max_degree, len(player), den))
        succs = seed.sample(player, k)
        for u, num in zip(succs, _split(den, k, seed)):
            edges.append((v, u, weight(), Fraction(num, den)))
    return MdpModel.from_edges(vertices, edges, name='random_{}'.format(n))


def mdp_str(model, ascii_only=False):
    """
    Forest rendering of ``model``; every vertex is tagged with its owner.

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> text = mdp_str(demodata.self_loop_mdp(2))
    >>> text.startswith('╙── s [P]')
    True
    >>> 's_loop [R]' in text
    True
    """
    graph = nx.DiGraph()
    for v in model.vertices:
        tag = 'P' if model.is_player(v) else 'R'
        graph.add_node(v, label='{} [{}]'.format(v, tag))
    graph.add_edges_from((u, v) for u, v, _, _ in model.edges())
    lines = nx.generate_network_text(graph, with_labels=True,
                                     ascii_only=ascii_only)
    return '\n'.join(lines)
