"""
Vertex owner labels, exact rational coercion and vertex ordering.
"""
import re
from fractions import Fraction

#: Owner label of a vertex controlled by the player (the controller).
PLAYER = 'player'

#: Owner label of a vertex whose successor is drawn from its distribution.
RANDOM = 'random'

OWNERS = (PLAYER, RANDOM)

_DIGITS = re.compile(r'(\d+)')


def as_rational(value):
    """
    Coerce ``value`` into an exact :class:`fractions.Fraction`.

    Floats are rejected because they cannot be represented exactly.

    Example
    -------
    >>> as_rational('3/10'), as_rational(2), as_rational('-1/2')
    (Fraction(3, 10), Fraction(2, 1), Fraction(-1, 2))
    """
    if isinstance(value, bool):
        raise TypeError('booleans are not rationals')
    if isinstance(value, float):
        raise TypeError('floats are not exact, got {!r}'.format(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def format_rational(value):
    """
    Format a rational as ``"n/d"``, always including the denominator.

    Example
    -------
    >>> format_rational(Fraction(4, 2)), format_rational(Fraction(-3, 10))
    ('2/1', '-3/10')
    """
    value = Fraction(value)
    return '{}/{}'.format(value.numerator, value.denominator)


def vertex_sort_key(vertex):
    """
    Natural ordering of vertex ids so that ``v2`` sorts before ``v10``.

    Example
    -------
    >>> sorted(['v10', 'v2', 'mec0', 'v1'], key=vertex_sort_key)
    ['mec0', 'v1', 'v2', 'v10']
    """
    # re.split with a group alternates text and digit runs, so positions of
    # equal parity always hold the same type.
    return [int(tok) if tok.isdigit() else tok
            for tok in _DIGITS.split(str(vertex))]


def sorted_vertices(vertices):
    return sorted(vertices, key=vertex_sort_key)
