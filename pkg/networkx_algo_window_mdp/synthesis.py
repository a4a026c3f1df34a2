"""
Decision procedures and witness strategies for the three guarantee problems:

* BWC: surely ``objective >= alpha`` while the expectation reaches ``beta``,
* BP: ``objective >= alpha`` with probability at least ``prob``,
* BAS: ``objective >= alpha`` almost surely.

Every decider returns a :class:`SynthesisResult` holding the
:class:`ValueReport`; :func:`synthesize` then builds a finite memory witness.

Example
-------
>>> from networkx_algo_window_mdp import demodata
>>> from networkx_algo_window_mdp.model import ObjectiveSpec
>>> from networkx_algo_window_mdp.synthesis import decide_bwc
>>> model = demodata.two_phase_mdp()
>>> result = decide_bwc(model, 'v2', ObjectiveSpec.fwmp(3), 0, 2)
>>> result.report.answer, result.report.optimal_value
('yes', Fraction(2, 1))
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict
import ubelt as ub
from ._types import as_rational, sorted_vertices
from .model import (WindowMdpError, GuaranteeQuery, ValueReport,
                    normalize_guarantee, check_start)
from .graph_analysis import (collapse_mecs, almost_sure_reach_strategy,
                             restrict_model)
from .window_games import (GameView, SureValueController, fwmp_sure_region,
                           fwmp_sure_values, bwmp_sure_region, mp_game_values)
from .mdp_values import (MecController, mec_value_table, commit_policy,
                         expected_mp_with_commit, switch_step_bound)
from .bp_program import check_bp, bp_optimal_value
from .strategy import dirac, realize

logger = logging.getLogger(__name__)

__all__ = [
    'SynthesisResult', 'NoWitnessError', 'DEFAULT_EPS', 'decide_bwc',
    'decide_bp', 'decide_bas', 'decide_all', 'solve', 'synthesize',
    'BwcController', 'QuotientController',
]

#: Precision of the BWC witness when none is given.
DEFAULT_EPS = Fraction(1, 100)


class NoWitnessError(WindowMdpError, ValueError):
    """
    Raised when a witness is requested for a query answered "no"
    """
    pass


@dataclass
class SynthesisResult:
    """
    Outcome of one of the deciders.

    Attributes
    ----------
    query : GuaranteeQuery

    report : ValueReport
        Thresholds and the optimal value are in the scale of the input
        model.

    strategy : MealyStrategy | None
        Filled in by :func:`synthesize`.

    diagnostics : Dict
        Intermediate results worth reporting (regions, values, flows).
    """
    query: GuaranteeQuery
    report: ValueReport
    strategy: Any = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    context: Dict[str, Any] = field(default_factory=dict, repr=False)

    @property
    def decision(self):
        return self.report.decision

    @property
    def optimal_value(self):
        return self.report.optimal_value


def _report(decision, value, tmap, beta):
    if value is not None:
        value = tmap.inverse(value)
    return ValueReport(bool(decision), value, beta)


def decide_bwc(model, start, objective, alpha=0, beta=0):
    """
    Beyond worst case: can the player surely keep ``objective >= alpha``
    while the expectation is at least ``beta``?

    The model is pruned to the sure winning region at ``alpha``. There every
    player vertex may commit to its sure value and the best expected
    commitment is the optimal expectation.

    Parameters
    ----------
    model : MdpModel

    start : vertex

    objective : ObjectiveSpec

    alpha, beta : Fraction | int | str

    Returns
    -------
    SynthesisResult

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> from networkx_algo_window_mdp.model import ObjectiveSpec
    >>> model = demodata.two_phase_mdp()
    >>> decide_bwc(model, 'v2', ObjectiveSpec.fwmp(3), 0, '21/10').decision
    False
    """
    check_start(model, start)
    query = GuaranteeQuery('BWC', objective, start, alpha, beta)
    shifted, tmap = normalize_guarantee(model, query.alpha)
    target = tmap(query.beta)
    game = GameView(shifted)
    if objective.is_fwmp:
        region = fwmp_sure_region(game, objective.window, 0)
    else:
        region = bwmp_sure_region(game, 0)
    diagnostics = {'sure_region': sorted_vertices(region)}
    if start not in region:
        logger.info('%s is outside the sure region of %s', start, objective)
        return SynthesisResult(query, _report(False, None, tmap, query.beta),
                               diagnostics=diagnostics)

    pruned = restrict_model(shifted, region)
    pruned_game = GameView(pruned)
    if objective.is_fwmp:
        sure = fwmp_sure_values(pruned_game, objective.window)
        sure = dict(sure.values)
    else:
        sure = mp_game_values(pruned_game)
    loops = {v: sure[v] for v in pruned.player_vertices}
    value = expected_mp_with_commit(pruned, loops, start)
    decision = target <= 0 or value >= target
    diagnostics['sure_values'] = {v: tmap.inverse(x) for v, x in sure.items()}
    logger.info('BWC %s from %s: value %s against %s', objective, start,
                value, target)
    context = {'shifted': shifted, 'pruned': pruned, 'loops': loops,
               'sure': sure, 'value': value,
               'objective': objective, 'start': start}
    return SynthesisResult(query, _report(decision, value, tmap, query.beta),
                           diagnostics=diagnostics, context=context)


def _collapsed_context(model, start, objective, alpha):
    shifted, tmap = normalize_guarantee(model, alpha)
    table = mec_value_table(shifted, objective)
    collapsed = collapse_mecs(shifted, table.values, table.decomposition)
    qstart = collapsed.representative[start]
    context = {'shifted': shifted, 'table': table, 'collapsed': collapsed,
               'objective': objective, 'start': start, 'qstart': qstart}
    diagnostics = {
        'mecs': [sorted_vertices(mec) for mec in table.decomposition.mecs],
        'mec_values': {k: tmap.inverse(v) for k, v in table.values.items()},
    }
    return tmap, context, diagnostics


def decide_bp(model, start, objective, prob, alpha=0, beta=0):
    """
    Beyond probability: can the player keep ``objective >= alpha`` with
    probability at least ``prob`` while the expectation is at least
    ``beta``?

    Every MEC is collapsed into a vertex looping on its almost-sure value
    and the flow program of
    :func:`networkx_algo_window_mdp.bp_program.check_bp` decides.

    Returns
    -------
    SynthesisResult

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> from networkx_algo_window_mdp.model import ObjectiveSpec
    >>> model = demodata.three_mec_mdp()
    >>> result = decide_bp(model, 'v3', ObjectiveSpec.fwmp(2), '1/2', 0, 2)
    >>> result.report.answer, result.report.optimal_value
    ('yes', Fraction(8, 3))
    """
    check_start(model, start)
    query = GuaranteeQuery('BP', objective, start, alpha, beta, prob)
    tmap, context, diagnostics = _collapsed_context(
        model, start, objective, query.alpha)
    collapsed, qstart = context['collapsed'], context['qstart']
    target = tmap(query.beta)
    outcome = check_bp(collapsed, qstart, query.prob, target)
    value, _ = bp_optimal_value(collapsed, qstart, query.prob)
    diagnostics['max_probability'] = outcome.max_probability
    if outcome.certificate is not None:
        diagnostics['certificate'] = outcome.certificate
    context['certificate'] = outcome.certificate
    context['program'] = outcome.program
    logger.info('BP %s from %s at p=%s: %s', objective, start, query.prob,
                'feasible' if outcome.feasible else 'infeasible')
    return SynthesisResult(
        query, _report(outcome.feasible, value, tmap, query.beta),
        diagnostics=diagnostics, context=context)


def decide_bas(model, start, objective, alpha=0, beta=0):
    """
    Beyond almost sure: can the player keep ``objective >= alpha`` almost
    surely while the expectation is at least ``beta``?

    Only collapsed vertices with a non-negative loop may be committed to,
    and the commitment must happen almost surely.

    Returns
    -------
    SynthesisResult

    Example
    -------
    >>> from networkx_algo_window_mdp import demodata
    >>> from networkx_algo_window_mdp.model import ObjectiveSpec
    >>> model = demodata.three_mec_mdp()
    >>> decide_bas(model, 'v3', ObjectiveSpec.fwmp(2), 0, 1).report.answer
    'yes'
    >>> decide_bas(model, 'v3', ObjectiveSpec.fwmp(2), 0, '3/2').report.answer
    'no'
    """
    check_start(model, start)
    query = GuaranteeQuery('BAS', objective, start, alpha, beta)
    tmap, context, diagnostics = _collapsed_context(
        model, start, objective, query.alpha)
    collapsed, qstart = context['collapsed'], context['qstart']
    target = tmap(query.beta)
    structural = collapsed.structural_model()
    good = {v: mu for v, mu in collapsed.loop_payoff.items() if mu >= 0}
    region = set()
    if good:
        region, _, _ = almost_sure_reach_strategy(structural, set(good))
    diagnostics['almost_sure_region'] = sorted_vertices(region)
    if qstart not in region:
        logger.info('%s cannot settle in a good loop almost surely', start)
        return SynthesisResult(query, _report(False, None, tmap, query.beta),
                               diagnostics=diagnostics, context=context)
    # good collapsed vertices without exits are dead ends here, so the
    # closure check of restrict_model does not apply
    reduced = structural.subgraph(region)
    loops = {v: mu for v, mu in good.items() if v in region}
    policy = commit_policy(reduced, loops)
    value = policy.values[qstart]
    decision = value >= target
    context['policy'] = policy
    logger.info('BAS %s from %s: value %s against %s', objective, start,
                value, target)
    return SynthesisResult(query, _report(decision, value, tmap, query.beta),
                           diagnostics=diagnostics, context=context)


def solve(model, query):
    """
    Run the decider matching ``query.mode``.

    Returns
    -------
    SynthesisResult
    """
    if query.mode == 'BWC':
        return decide_bwc(model, query.start, query.objective, query.alpha,
                          query.beta)
    elif query.mode == 'BP':
        return decide_bp(model, query.start, query.objective, query.prob,
                         query.alpha, query.beta)
    elif query.mode == 'BAS':
        return decide_bas(model, query.start, query.objective, query.alpha,
                          query.beta)
    else:
        raise KeyError(query.mode)


class BwcController:
    """
    Follows the memoryless commit policy for at most ``steps`` player moves
    and then plays ``sure`` for good. Reaching a commit vertex ends the
    count early.

    Memory is the number of player moves made so far, or ``('sure',
    inner)`` once switched.
    """
    uses_prev = False

    def __init__(self, model, policy, steps, sure):
        self.model = model
        self.policy = policy
        self.steps = steps
        self.sure = sure

    def initial(self):
        return 0

    def _switch(self, vertex):
        return ('sure', self.sure.update(self.sure.initial(), None, vertex))

    def update(self, memory, prev, vertex):
        if isinstance(memory, tuple):
            return ('sure', self.sure.update(memory[1], None, vertex))
        if vertex in self.policy.commit:
            return self._switch(vertex)
        if self.model.is_random(vertex):
            return memory
        if memory >= self.steps:
            return self._switch(vertex)
        return memory + 1

    def choose(self, memory, vertex):
        if isinstance(memory, tuple):
            return self.sure.choose(memory[1], vertex)
        return dirac(self.policy.choice[vertex])


class QuotientController:
    """
    Plays a plan on the MEC quotient in the original model.

    The plan gives, for every player vertex of the quotient, nonnegative
    masses on its quotient edges (``rows``) and on settling in its loop
    (``settle``). Transient vertices randomize in proportion to the masses.
    Inside a MEC the exit vertices are visited in a fixed order; at each the
    controller leaves with the conditional mass of its exits or moves on,
    and once every exit is declined it settles on the MEC controller.

    Memory is ``None`` outside MECs, ``('mec', k, j)`` while heading to the
    ``j``-th exit vertex of MEC ``k`` and ``('commit', k, inner)`` after
    settling.
    """

    def __init__(self, model, collapsed, table, rows, settle):
        self.model = model
        self.membership = collapsed.decomposition.membership
        self.mecs = collapsed.decomposition.mecs
        self.transient = {}
        self.stages = {}
        self.total = {}
        for qv, row in rows.items():
            kind, key = collapsed.origin[qv]
            if kind == 'vertex':
                mass = sum((w for _, w in row), Fraction(0))
                if mass > 0:
                    self.transient[qv] = [
                        (collapsed.exits[(qv, dst)][1], w / mass)
                        for dst, w in row if w > 0]
            elif kind == 'mec':
                grouped = OrderedDict()
                for dst, w in row:
                    if w > 0:
                        u, r = collapsed.exits[(qv, dst)]
                        grouped.setdefault(u, []).append((r, w))
                order = sorted_vertices(grouped)
                self.stages[key] = [(u, grouped[u]) for u in order]
                self.total[key] = settle.get(qv, Fraction(0)) + sum(
                    (w for _, w in row), Fraction(0))
        objective = table.objective
        self.inner = {
            k: MecController(model, mec, table.cores[k], objective,
                             table.values[k])
            for k, mec in enumerate(self.mecs)}
        self._navigate = {}

    def _route(self, k, target):
        if (k, target) not in self._navigate:
            _, choice, _ = almost_sure_reach_strategy(
                self.model, {target}, within=self.mecs[k])
            self._navigate[(k, target)] = choice
        return self._navigate[(k, target)]

    def _settle(self, k, vertex):
        return ('commit', k, self.inner[k].update(None, None, vertex))

    def _enter(self, k, vertex):
        if not self.stages.get(k):
            return self._settle(k, vertex)
        return ('mec', k, 0)

    def initial(self):
        return None

    def update(self, memory, prev, vertex):
        k = self.membership.get(vertex)
        if k is None:
            return None
        if (memory is None or prev is None or memory[1] != k or
                self.membership.get(prev) != k):
            return self._enter(k, vertex)
        if memory[0] == 'commit':
            return ('commit', k, self.inner[k].update(memory[2], prev, vertex))
        j = memory[2]
        stages = self.stages[k]
        if prev == stages[j][0]:
            j += 1
            if j == len(stages):
                return self._settle(k, vertex)
        return ('mec', k, j)

    def _inside(self, k, vertex):
        mec = self.mecs[k]
        return next(u for u in sorted_vertices(self.model.successors(vertex))
                    if u in mec)

    def choose(self, memory, vertex):
        if memory is None:
            if vertex in self.transient:
                return self.transient[vertex]
            return dirac(sorted_vertices(self.model.successors(vertex))[0])
        kind, k, extra = memory
        if kind == 'commit':
            return self.inner[k].choose(extra, vertex)
        stages = self.stages[k]
        u, exits = stages[extra]
        if vertex != u:
            return dirac(self._route(k, u)[vertex])
        inside = self._inside(k, vertex)
        spent = sum((w for _, row in stages[:extra] for _, w in row),
                    Fraction(0))
        remaining = self.total[k] - spent
        if remaining <= 0:
            return dirac(inside)
        stay = remaining - sum((w for _, w in exits), Fraction(0))
        dist = [(r, w / remaining) for r, w in exits]
        if stay > 0:
            dist.append((inside, stay / remaining))
        return dist


def _expectation_floor(model, strategy, start, values, target, reads):
    """
    Largest ``E[values[V_t]]`` over ``t <= reads`` under ``strategy``,
    stopping early once it reaches ``target``.
    """
    dist = {(strategy.initial, start): Fraction(1)}
    floor = values[start]
    for _ in range(reads):
        if floor >= target:
            break
        nxt = {}
        for (state, v), p in dist.items():
            after = strategy.transition(state, v)
            if model.is_player(v):
                moves = strategy.output(state, v)
            else:
                moves = model.distribution(v)
            for u, q in moves:
                if q:
                    nxt[(after, u)] = nxt.get((after, u), Fraction(0)) + p * q
        dist = nxt
        floor = max(floor, sum((p * values[v] for (_, v), p in dist.items()),
                               Fraction(0)))
    return floor


def _bwc_witness(result, eps, model):
    ctx = result.context
    pruned, loops, objective = ctx['pruned'], ctx['loops'], ctx['objective']
    start = ctx['start']
    policy = commit_policy(pruned, loops)
    bound = max(1, pruned.max_abs_weight)
    margin = eps / (pruned.num_vertices * bound)
    plan = switch_step_bound(pruned, policy.choice, policy.commit,
                             margin * max(1, len(policy.commit)), start,
                             margin=margin)
    result.diagnostics['switch_plan'] = plan
    name = 'bwc_{}'.format(objective)
    sure = SureValueController(GameView(pruned), objective, ctx['sure'],
                               prefer=policy.choice)
    preferred = realize(sure, model, [start], name=name)
    reads = 2 * (plan.steps + pruned.num_vertices) * (
        (objective.window or 1) + 1)
    floor = _expectation_floor(pruned, preferred, start, ctx['sure'],
                               ctx['value'] - eps, reads)
    result.diagnostics['expectation_floor'] = floor
    if floor >= ctx['value'] - eps:
        logger.info('BWC witness plays the sure values with %d states',
                    preferred.memory_size)
        return preferred
    logger.info('BWC witness switches after %d player steps', plan.steps)
    controller = BwcController(pruned, policy, plan.steps, sure)
    return realize(controller, model, [start], name=name)


def _quotient_witness(result, model, rows, settle):
    ctx = result.context
    controller = QuotientController(ctx['shifted'], ctx['collapsed'],
                                    ctx['table'], rows, settle)
    return realize(controller, model, [ctx['start']], name='{}_{}'.format(
        result.query.mode.lower(), ctx['objective']))


def _bp_plan(result):
    collapsed = result.context['collapsed']
    cert = result.context['certificate']
    structural = collapsed.structural_model()
    rows = {v: [(u, cert.flows.get((v, u), Fraction(0)))
                for u in structural.successors(v)]
            for v in structural.player_vertices}
    settle = {v: cert.settle(v) for v in collapsed.loop_payoff}
    return rows, settle


def _bas_plan(result):
    collapsed = result.context['collapsed']
    policy = result.context['policy']
    rows = {}
    settle = {}
    for v in collapsed.structural_model().player_vertices:
        if v in policy.commit:
            rows[v] = []
            settle[v] = Fraction(1)
        elif v in policy.choice:
            rows[v] = [(policy.choice[v], Fraction(1))]
    return rows, settle


def synthesize(result, eps=None, model=None):
    """
    Build a witness strategy for a "yes" answer.

    Parameters
    ----------
    result : SynthesisResult

    eps : Fraction | None
        BWC only: the witness expectation is within ``eps`` of the optimal
        value. Defaults to :data:`DEFAULT_EPS`.

    model : MdpModel | None
        Model the machine is realized on, the normalized one by default.
        Normalization keeps the graph so the input model works too.

    Returns
    -------
    MealyStrategy

    Raises
    ------
    NoWitnessError
    """
    if not result.decision:
        raise NoWitnessError('no witness for a "no" answer to {} {}'.format(
            result.query.mode, result.query.objective))
    if model is None:
        model = result.context['shifted']
    mode = result.query.mode
    if mode == 'BWC':
        eps = DEFAULT_EPS if eps is None else as_rational(eps)
        if eps <= 0:
            raise ValueError('eps must be positive')
        strategy = _bwc_witness(result, eps, model)
    elif mode == 'BP':
        strategy = _quotient_witness(result, model, *_bp_plan(result))
    elif mode == 'BAS':
        strategy = _quotient_witness(result, model, *_bas_plan(result))
    else:
        raise KeyError(mode)
    logger.info('witness %r has %d memory states', strategy,
                strategy.memory_size)
    result.strategy = strategy
    return strategy


def decide_all(model, start, objective, prob, alpha=0, beta=0):
    """
    The three answers side by side.

    Returns
    -------
    Dict[str, SynthesisResult]
    """
    return ub.odict([
        ('BWC', decide_bwc(model, start, objective, alpha, beta)),
        ('BAS', decide_bas(model, start, objective, alpha, beta)),
        ('BP', decide_bp(model, start, objective, prob, alpha, beta)),
    ])
