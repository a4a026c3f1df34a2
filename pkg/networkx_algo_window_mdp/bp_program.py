"""
The flow program deciding the probability-threshold problem on a collapsed
MDP, and the certificates it produces.

Variables:

* ``x[v->u]`` expected number of times the player edge ``(v, u)`` is taken,
* ``yes[v]`` / ``no[v]`` probability of settling in the loop of the collapsed
  vertex ``v`` with a non-negative / non-positive loop payoff.

Example
-------
>>> from networkx_algo_window_mdp import demodata
>>> from networkx_algo_window_mdp.graph_analysis import collapse_mecs
>>> from networkx_algo_window_mdp.bp_program import check_bp
>>> collapsed = collapse_mecs(demodata.three_mec_mdp(), {0: 1, 1: -1, 2: 9})
>>> result = check_bp(collapsed, 'mec0', '1/2', 2)
>>> result.feasible, result.max_probability
(True, Fraction(7, 10))
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Optional
from ._types import as_rational
from .model import UnknownVertexError
from .simplex import LinearProgram, solve_lp

logger = logging.getLogger(__name__)

__all__ = ['BpCertificate', 'BpDecision', 'build_bp_lp', 'check_bp',
           'bp_optimal_value']


def _player_edges(collapsed):
    model = collapsed.structural_model()
    return [(v, u) for v in model.player_vertices
            for u in model.successors(v)]


def _edge_var(edge):
    return 'x[{}->{}]'.format(*edge)


def _inflow_terms(collapsed, start):
    """
    For every player vertex of the structural quotient, the list of
    ``(edge, probability)`` pairs feeding it and the constant inflow.
    """
    model = collapsed.structural_model()
    terms = {v: [] for v in model.player_vertices}
    const = {v: Fraction(0) for v in model.player_vertices}
    if model.is_player(start):
        const[start] += 1
    else:
        for v, p in model.distribution(start):
            const[v] += p
    for r in model.random_vertices:
        feeding = [(v, r) for v in model.predecessors(r)]
        for v, p in model.distribution(r):
            for edge in feeding:
                terms[v].append((edge, p))
    return terms, const


def build_bp_lp(collapsed, start, p, beta, with_prob=True,
                objective='probability'):
    """
    The flow program of the probability-threshold problem.

    Parameters
    ----------
    collapsed : CollapsedMdp

    start : vertex
        A vertex of the quotient.

    p : Fraction
        Required probability of settling in a non-negative loop.

    beta : Fraction | None
        Required expectation (``None`` drops the constraint).

    with_prob : bool
        Include the probability constraint.

    objective : str
        ``"probability"`` maximizes the settling probability,
        ``"expectation"`` the expectation.

    Returns
    -------
    LinearProgram
    """
    if start not in collapsed.model:
        raise UnknownVertexError(start)
    p = as_rational(p)
    model = collapsed.structural_model()
    mu = collapsed.loop_payoff
    lp = LinearProgram(name='bp')
    edges = _player_edges(collapsed)
    for edge in edges:
        lp.add_variable(_edge_var(edge))
    for v in mu:
        lp.add_variable('yes[{}]'.format(v))
        lp.add_variable('no[{}]'.format(v))

    terms, const = _inflow_terms(collapsed, start)
    for v in model.player_vertices:
        coeffs = {}
        for edge, prob in terms[v]:
            name = _edge_var(edge)
            coeffs[name] = coeffs.get(name, Fraction(0)) - prob
        for u in model.successors(v):
            name = _edge_var((v, u))
            coeffs[name] = coeffs.get(name, Fraction(0)) + 1
        if v in mu:
            coeffs['yes[{}]'.format(v)] = Fraction(1)
            coeffs['no[{}]'.format(v)] = Fraction(1)
        lp.add_constraint(coeffs, '=', const[v], label='flow[{}]'.format(v))

    switch = {}
    expect = {}
    for v, m in mu.items():
        for kind in ('yes', 'no'):
            name = '{}[{}]'.format(kind, v)
            switch[name] = 1
            expect[name] = m
    lp.add_constraint(switch, '=', 1, label='switch')
    if beta is not None:
        lp.add_constraint(expect, '>=', beta, label='expect')
    for v, m in mu.items():
        if m < 0:
            lp.add_constraint({'yes[{}]'.format(v): 1}, '=', 0,
                              label='sign_yes[{}]'.format(v))
        if m > 0:
            lp.add_constraint({'no[{}]'.format(v): 1}, '=', 0,
                              label='sign_no[{}]'.format(v))
    prob = {'yes[{}]'.format(v): 1 for v in mu}
    if with_prob:
        lp.add_constraint(prob, '>=', p, label='prob')
    if objective == 'probability':
        lp.maximize(prob)
    elif objective == 'expectation':
        lp.maximize(expect)
    else:
        raise KeyError(objective)
    logger.debug('built %r', lp)
    return lp


@dataclass
class BpCertificate:
    """
    A solution of the flow program: edge flows and loop settling masses,
    with the probability and expectation they achieve.
    """
    flows: Dict[Any, Fraction]
    yes: Dict[Any, Fraction]
    no: Dict[Any, Fraction]
    probability: Fraction = Fraction(0)
    expectation: Fraction = Fraction(0)

    @classmethod
    def from_assignment(cls, collapsed, flows, yes, no):
        """
        Certificate from user chosen flows and settling masses. Missing
        entries are 0.
        """
        mu = collapsed.loop_payoff
        flows = {e: as_rational(f) for e, f in flows.items()}
        yes = {v: as_rational(yes.get(v, 0)) for v in mu}
        no = {v: as_rational(no.get(v, 0)) for v in mu}
        probability = sum(yes.values(), Fraction(0))
        expectation = sum(((yes[v] + no[v]) * mu[v] for v in mu),
                          Fraction(0))
        return cls(flows, yes, no, probability, expectation)

    @classmethod
    def from_solution(cls, collapsed, values):
        flows = {edge: values[_edge_var(edge)]
                 for edge in _player_edges(collapsed)}
        yes = {v: values['yes[{}]'.format(v)] for v in collapsed.loop_payoff}
        no = {v: values['no[{}]'.format(v)] for v in collapsed.loop_payoff}
        return cls.from_assignment(collapsed, flows, yes, no)

    def visits(self, collapsed):
        """
        Expected number of visits of every random vertex of the quotient.
        """
        model = collapsed.structural_model()
        return {r: sum((self.flows.get((v, r), Fraction(0))
                        for v in model.predecessors(r)), Fraction(0))
                for r in model.random_vertices}

    def settle(self, vertex):
        return self.yes.get(vertex, Fraction(0)) + self.no.get(vertex,
                                                                Fraction(0))

    def outflow(self, collapsed, vertex):
        model = collapsed.structural_model()
        return sum((self.flows.get((vertex, u), Fraction(0))
                    for u in model.successors(vertex)), Fraction(0))

    def verify(self, collapsed, start, p=None, beta=None):
        """
        Re-evaluate every constraint of the flow program independently of
        the solver.

        Returns
        -------
        List[str] : the violated conditions.
        """
        lp = build_bp_lp(collapsed, start, p if p is not None else 0, beta,
                         with_prob=p is not None)
        assignment = {_edge_var(e): f for e, f in self.flows.items()}
        for v in collapsed.loop_payoff:
            assignment['yes[{}]'.format(v)] = self.yes.get(v, Fraction(0))
            assignment['no[{}]'.format(v)] = self.no.get(v, Fraction(0))
        return lp.violations(assignment)


@dataclass
class BpDecision:
    feasible: bool
    max_probability: Optional[Fraction] = None
    certificate: Optional[BpCertificate] = None
    program: Any = field(default=None, repr=False)


def check_bp(collapsed, start, p, beta):
    """
    Decide whether settling in non-negative loops with probability ``p``
    and expectation ``beta`` is achievable from ``start``.

    The settling probability is maximized under the other constraints and
    compared to ``p``.

    Returns
    -------
    BpDecision
    """
    p = as_rational(p)
    beta = as_rational(beta)
    lp = build_bp_lp(collapsed, start, p, beta, with_prob=False)
    solution = solve_lp(lp)
    if solution.status != 'optimal':
        logger.debug('flow program is %s', solution.status)
        return BpDecision(False, None, None, lp)
    best = solution.objective
    if best < p:
        return BpDecision(False, best, None, lp)
    cert = BpCertificate.from_solution(collapsed, solution.values)
    return BpDecision(True, best, cert, lp)


def bp_optimal_value(collapsed, start, p):
    """
    Largest expectation achievable while settling in non-negative loops with
    probability at least ``p``, with its certificate; ``(None, None)`` when
    the probability cannot be met.
    """
    lp = build_bp_lp(collapsed, start, p, None, objective='expectation')
    solution = solve_lp(lp)
    if solution.status != 'optimal':
        return None, None
    cert = BpCertificate.from_solution(collapsed, solution.values)
    return solution.objective, cert
