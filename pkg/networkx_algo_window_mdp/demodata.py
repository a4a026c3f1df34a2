"""
Small hand-checked models used by the doctests, the tests and the command
line examples.

Example
-------
>>> from networkx_algo_window_mdp import demodata
>>> demodata.two_phase_mdp()
<MdpModel(two_phase) |V|=9 |E|=13>
>>> demodata.three_mec_mdp()
<MdpModel(three_mec) |V|=9 |E|=16>
>>> demodata.retry_chain(2, '1/2')
<MdpModel(retry_chain_2) |V|=7 |E|=10>
"""
from fractions import Fraction
from ._types import as_rational, format_rational
from .wmdp_io import parse_mdp

__all__ = [
    'TWO_PHASE_TEXT', 'TWO_CYCLE_TEXT', 'THREE_MEC_TEXT', 'two_phase_mdp',
    'two_cycle_mdp', 'three_mec_mdp', 'retry_chain', 'retry_chain_text',
    'self_loop_mdp', 'coin_mdp', 'growing_loop_path',
]


#: A transient part where the player can only retry a lottery to move on, and
#: a recurrent part where the player must alternate at ``v7`` to close every
#: window of length 3 at threshold 2.
TWO_PHASE_TEXT = """
# two_phase: retry lottery followed by an alternation gadget
vertex v0 player
vertex v1 random
vertex v2 player
vertex v3 random
vertex v4 player
vertex v5 random
vertex v6 random
vertex v7 player
vertex v8 random
edge v0 v1 weight -1
edge v1 v0 weight 2 prob 3/10
edge v1 v2 weight 1 prob 7/10
edge v2 v1 weight 0
edge v2 v3 weight 0
edge v3 v2 weight -1 prob 4/5
edge v3 v4 weight 4 prob 1/5
edge v4 v5 weight 0
edge v5 v7 weight 0 prob 1/1
edge v7 v6 weight 0
edge v6 v4 weight 10 prob 1/1
edge v7 v8 weight 6
edge v8 v7 weight -4 prob 1/1
"""

#: A single end component whose runs have mean payoff 0 but may keep a
#: 0-window open arbitrarily long.
TWO_CYCLE_TEXT = """
# two_cycle: every bounded window closes below 0, none closes at 0
vertex v1 player
vertex v2 random
vertex v3 player
edge v1 v2 weight -1
edge v2 v1 weight 1 prob 1/2
edge v2 v3 weight 0 prob 1/2
edge v3 v2 weight 0
"""

#: Three end components with window values 1, -1 and 9 (window length 2)
#: joined through the transient lottery ``v4``.
THREE_MEC_TEXT = """
# three_mec: a safe component and a risky lottery between two others
vertex v0 player
vertex v1 random
vertex v2 random
vertex v3 player
vertex v4 random
vertex v5 player
vertex v6 player
vertex v7 random
vertex v8 random
edge v0 v1 weight 1
edge v1 v0 weight 1 prob 3/10
edge v0 v2 weight 1
edge v2 v0 weight 1 prob 1/10
edge v1 v3 weight 1 prob 7/10
edge v3 v1 weight 1
edge v2 v3 weight 1 prob 9/10
edge v3 v2 weight 1
edge v3 v4 weight 3
edge v4 v5 weight 0 prob 3/5
edge v4 v6 weight 0 prob 2/5
edge v5 v7 weight -2
edge v7 v5 weight 0 prob 1/1
edge v6 v8 weight 10
edge v8 v6 weight 8 prob 1/1
edge v6 v7 weight 20
"""


def two_phase_mdp():
    return parse_mdp(TWO_PHASE_TEXT, name='two_phase')


def two_cycle_mdp():
    return parse_mdp(TWO_CYCLE_TEXT, name='two_cycle')


def three_mec_mdp():
    return parse_mdp(THREE_MEC_TEXT, name='three_mec')


def retry_chain_text(m, p):
    """
    Document of the chain with ``m`` lottery stages, each of which resets to
    ``u0`` with probability ``p``.

    ``u0`` may also take the safe loop through ``v-1`` (window value 0);
    reaching ``um`` gives the loop through ``vm`` (window value 1).
    """
    p = as_rational(p)
    if not 0 < p < 1:
        raise ValueError('the reset probability must lie in (0, 1)')
    if m < 1:
        raise ValueError('the chain needs at least one stage')
    lines = ['# retry_chain m={} p={}'.format(m, format_rational(p))]
    lines += ['vertex u{} player'.format(i) for i in range(m + 1)]
    lines += ['vertex v{} random'.format(i) for i in range(-1, m + 1)]
    lines.append('edge u0 v-1 weight -1')
    lines.append('edge v-1 u0 weight 1 prob 1/1')
    for i in range(m + 1):
        lines.append('edge u{0} v{0} weight -1'.format(i))
    for i in range(m):
        lines.append('edge v{} u{} weight -1 prob {}'.format(
            i, i + 1, format_rational(1 - p)))
        lines.append('edge v{} u0 weight -1 prob {}'.format(
            i, format_rational(p)))
    lines.append('edge v{0} u{0} weight 3 prob 1/1'.format(m))
    return '\n'.join(lines)


def retry_chain(m, p):
    """
    The ``m``-stage retry chain as a model, see :func:`retry_chain_text`.
    """
    return parse_mdp(retry_chain_text(m, p), name='retry_chain_{}'.format(m))


def self_loop_mdp(payoff=0):
    """
    One player vertex whose only move is a loop through an auxiliary random
    vertex, both edges paying ``payoff``.
    """
    text = '\n'.join([
        'vertex s player',
        'vertex s_loop random',
        'edge s s_loop weight {}'.format(payoff),
        'edge s_loop s weight {} prob 1/1'.format(payoff),
    ])
    return parse_mdp(text, name='self_loop')


def coin_mdp(left=0, right=4, prob=Fraction(1, 2)):
    """
    A fair-by-default coin from ``start`` to two absorbing loops ``T``
    (payoff ``right``) and ``F`` (payoff ``left``).
    """
    prob = as_rational(prob)
    text = '\n'.join([
        'vertex start player',
        'vertex coin random',
        'vertex T player',
        'vertex T_loop random',
        'vertex F player',
        'vertex F_loop random',
        'edge start coin weight 0',
        'edge coin T weight 0 prob {}'.format(format_rational(prob)),
        'edge coin F weight 0 prob {}'.format(format_rational(1 - prob)),
        'edge T T_loop weight {}'.format(right),
        'edge T_loop T weight {} prob 1/1'.format(right),
        'edge F F_loop weight {}'.format(left),
        'edge F_loop F weight {} prob 1/1'.format(left),
    ])
    return parse_mdp(text, name='coin')


def growing_loop_path(k):
    """
    Prefix of the run of :func:`two_cycle_mdp` that, on its ``i``-th visit
    of ``v2`` from ``v1``, loops ``i`` times through ``v3`` before returning.

    Returns
    -------
    networkx_algo_window_mdp.simulation.FinitePath
    """
    from .simulation import FinitePath
    model = two_cycle_mdp()
    vertices = ['v1']
    for i in range(1, k + 1):
        vertices.append('v2')
        for _ in range(i):
            vertices.extend(['v3', 'v2'])
        vertices.append('v1')
    return FinitePath.from_vertices(model, vertices)
