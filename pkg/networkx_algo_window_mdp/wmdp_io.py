"""
Reading and writing models in the line oriented ``.wmdp`` text format.

The format has one declaration per line and ``#`` comments::

    vertex <id> player|random
    edge <src> <dst> weight <int> [prob <num>/<den>]

``prob`` is mandatory on edges leaving random vertices and forbidden on
edges leaving player vertices. Vertex ids are kept verbatim.

Example
-------
>>> from networkx_algo_window_mdp.wmdp_io import parse_mdp, format_mdp
>>> text = '''
... # smallest legal model
... vertex a player
... vertex b random
... edge a b weight 0
... edge b a weight 0 prob 1/1
... '''
>>> model = parse_mdp(text)
>>> model.num_vertices, model.num_edges, model.max_abs_weight
(2, 2, 0)
>>> print(format_mdp(model))
vertex a player
vertex b random
edge a b weight 0
edge b a weight 0 prob 1/1
"""
import re
import logging
from fractions import Fraction
import networkx as nx
from networkx.utils import open_file
from ._types import OWNERS, RANDOM, PLAYER, format_rational
from .model import MdpModel, WindowMdpError, InvalidModelError, validate_mdp

logger = logging.getLogger(__name__)

__all__ = ['parse_mdp', 'format_mdp', 'read_mdp', 'write_mdp',
           'ModelSyntaxError']

_INT = re.compile(r'^[+-]?\d+$')
_RATIO = re.compile(r'^(\d+)/(\d+)$')


class ModelSyntaxError(WindowMdpError, ValueError):
    """
    Raised for a malformed ``.wmdp`` document, with 1-based ``lineno`` and
    ``col`` of the offending token.
    """

    def __init__(self, message, lineno=None, col=None):
        self.message = message
        self.lineno = lineno
        self.col = col
        if lineno is not None:
            message = 'line {}, col {}: {}'.format(lineno, col, message)
        super().__init__(message)


def _tokenize(line):
    # (token, 1-based column) pairs
    return [(m.group(0), m.start() + 1) for m in re.finditer(r'\S+', line)]


def parse_mdp(text, name=None, validate=True):
    """
    Parse a ``.wmdp`` document into a validated :class:`MdpModel`.

    Parameters
    ----------
    text : str
        The document.

    name : str | None
        Optional label attached to the model.

    validate : bool
        If True (the default) the model invariants are checked and an
        :class:`InvalidModelError` lists every violation.

    Returns
    -------
    MdpModel

    Raises
    ------
    ModelSyntaxError
        For malformed lines, unknown or duplicate vertices, and probabilities
        missing on random edges or present on player edges.

    InvalidModelError
        For models that parse but break an invariant.

    Example
    -------
    >>> import pytest
    >>> text = 'vertex a player\\nvertex b random\\nedge a b weight 0\\n'
    >>> text += 'edge b a weight 0 prob 1/2\\n'
    >>> with pytest.raises(InvalidModelError) as exc:
    ...     parse_mdp(text)
    >>> print(exc.value)
    probabilities of b sum to 1/2 ≠ 1
    """
    owners = {}
    vertex_order = []
    edge_lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0]
        tokens = _tokenize(line)
        if not tokens:
            continue
        keyword, col = tokens[0]
        if keyword == 'vertex':
            if len(tokens) != 3:
                raise ModelSyntaxError(
                    'expected "vertex <id> player|random"', lineno, col)
            (vid, vcol), (owner, ocol) = tokens[1], tokens[2]
            if owner not in OWNERS:
                raise ModelSyntaxError(
                    'unknown owner {!r}'.format(owner), lineno, ocol)
            if vid in owners:
                raise ModelSyntaxError(
                    'duplicate vertex id {!r}'.format(vid), lineno, vcol)
            owners[vid] = owner
            vertex_order.append(vid)
        elif keyword == 'edge':
            edge_lines.append((lineno, tokens))
        else:
            raise ModelSyntaxError(
                'unknown declaration {!r}'.format(keyword), lineno, col)

    graph = nx.DiGraph()
    for vid in vertex_order:
        graph.add_node(vid, owner=owners[vid])

    for lineno, tokens in edge_lines:
        words = [tok for tok, _ in tokens]
        cols = [col for _, col in tokens]
        if len(words) not in (5, 7) or words[3] != 'weight' or (
                len(words) == 7 and words[5] != 'prob'):
            raise ModelSyntaxError(
                'expected "edge <src> <dst> weight <int> [prob <n>/<d>]"',
                lineno, cols[0])
        src, dst = words[1], words[2]
        for vid, col in ((src, cols[1]), (dst, cols[2])):
            if vid not in owners:
                raise ModelSyntaxError(
                    'unknown vertex {!r} in edge'.format(vid), lineno, col)
        if graph.has_edge(src, dst):
            raise ModelSyntaxError(
                'duplicate edge {} -> {}'.format(src, dst), lineno, cols[0])
        if not _INT.match(words[4]):
            raise ModelSyntaxError(
                'weight {!r} is not an integer'.format(words[4]),
                lineno, cols[4])
        data = {'weight': int(words[4])}
        if len(words) == 7:
            if owners[src] == PLAYER:
                raise ModelSyntaxError(
                    'probability on player edge {} -> {}'.format(src, dst),
                    lineno, cols[5])
            match = _RATIO.match(words[6])
            if match is None or int(match.group(2)) == 0:
                raise ModelSyntaxError(
                    'probability {!r} is not of the form n/d'.format(
                        words[6]), lineno, cols[6])
            data['prob'] = Fraction(int(match.group(1)), int(match.group(2)))
        elif owners[src] == RANDOM:
            raise ModelSyntaxError(
                'missing probability on random edge {} -> {}'.format(
                    src, dst), lineno, cols[0])
        graph.add_edge(src, dst, **data)

    model = MdpModel(graph, name=name)
    if validate:
        report = validate_mdp(model)
        if not report.is_valid:
            raise InvalidModelError(report)
    logger.debug('parsed %r', model)
    return model


def format_mdp(model, header=None):
    """
    Serialize ``model`` in the ``.wmdp`` format.

    Rationals are written as ``n/d``; parsing the result gives back an equal
    model.
    """
    lines = []
    if header:
        lines.extend('# ' + line for line in header.splitlines())
    for vid in model.vertices:
        lines.append('vertex {} {}'.format(vid, model.owner(vid)))
    for src, dst, weight, prob in model.edges():
        line = 'edge {} {} weight {}'.format(src, dst, weight)
        if prob is not None:
            line += ' prob ' + format_rational(prob)
        lines.append(line)
    return '\n'.join(lines)


@open_file(0, 'r')
def read_mdp(path, name=None):
    """
    Read a ``.wmdp`` file (path or open file object).
    """
    return parse_mdp(path.read(), name=name)


@open_file(1, 'w')
def write_mdp(model, path, header=None):
    """
    Write ``model`` to a ``.wmdp`` file (path or open file object).
    """
    path.write(format_mdp(model, header=header) + '\n')
