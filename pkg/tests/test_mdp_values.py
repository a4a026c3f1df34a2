import itertools
from fractions import Fraction
import pytest
from networkx_algo_window_mdp import demodata
from networkx_algo_window_mdp.model import (ObjectiveSpec, PreconditionError,
                                            MdpModel)
from networkx_algo_window_mdp.graph_analysis import mec_decomposition
from networkx_algo_window_mdp.strategy import realize
from networkx_algo_window_mdp.wmdp_io import parse_mdp
from networkx_algo_window_mdp.mdp_values import (
    mec_almost_sure_value, mec_value_table, almost_sure_core, MecController,
    commit_policy, expected_mp_with_commit, switch_step_bound,
    consecutive_tails_prob, least_steps_for_tails, NotAnEndComponentError,
    NoCommitError, NotAlmostSureError)


def test_three_mec_values():
    model = demodata.three_mec_mdp()
    table = mec_value_table(model, ObjectiveSpec.fwmp(2))
    assert table.values == {0: 1, 1: -1, 2: 9}
    assert table.value_of('v4') is None
    assert table.value_of('v8') == 9
    assert table.cores[2] == frozenset({'v6', 'v8'})


def test_two_phase_values():
    model = demodata.two_phase_mdp()
    table = mec_value_table(model, ObjectiveSpec.fwmp(3))
    assert table[1] == 2
    # the lottery at v1 may answer every -1 step from v0 with the weak edge
    assert table[0] == 0


def test_two_cycle_bounded_window_value():
    model = demodata.two_cycle_mdp()
    mec = {'v1', 'v2', 'v3'}
    assert mec_almost_sure_value(model, mec, ObjectiveSpec.bwmp()) == 0
    # a window opened at v1 closes only once the lottery returns there
    value = mec_almost_sure_value(model, mec, ObjectiveSpec.fwmp(2))
    assert value == Fraction(-1, 2)


def test_value_needs_a_maximal_end_component():
    model = demodata.three_mec_mdp()
    with pytest.raises(NotAnEndComponentError):
        mec_almost_sure_value(model, {'v6'}, ObjectiveSpec.fwmp(2))
    with pytest.raises(NotAnEndComponentError):
        mec_almost_sure_value(model, {'v5', 'v7', 'v4'}, ObjectiveSpec.fwmp(2))


def test_almost_sure_core_shrinks_to_a_sub_component():
    text = '\n'.join([
        'vertex a player',
        'vertex b random',
        'vertex c random',
        'vertex e player',
        'edge a b weight 1',
        'edge b a weight 1 prob 1/1',
        'edge a c weight 0',
        'edge c a weight 0 prob 1/2',
        'edge c e weight -5 prob 1/2',
        'edge e c weight -5',
    ])
    model = parse_mdp(text)
    mec = mec_decomposition(model).mecs[0]
    assert mec == {'a', 'b', 'c', 'e'}
    obj = ObjectiveSpec.fwmp(1)
    assert almost_sure_core(model, mec, obj, 1) == frozenset({'a', 'b'})
    assert almost_sure_core(model, mec, obj, 2) is None
    assert mec_almost_sure_value(model, mec, obj) == 1


def test_mec_controller_stays_in_core():
    model = demodata.three_mec_mdp()
    table = mec_value_table(model, ObjectiveSpec.fwmp(2))
    mec = table.decomposition.mecs[0]
    controller = MecController(model, mec, table.cores[0],
                               ObjectiveSpec.fwmp(2), table[0])
    strat = realize(controller, model, ['v3'])
    assert strat.audit(model) == []
    for dist in strat.decisions_at('v3'):
        assert all(succ in mec for succ, _ in dist)


def test_commit_policy_on_coin():
    model = demodata.coin_mdp()
    policy = commit_policy(model, {'T': 4, 'F': 0})
    assert policy.commit == {'T', 'F'}
    assert policy['start'] == 2
    assert policy.choice['start'] == 'coin'


def test_commit_prefers_the_best_loop():
    model = demodata.three_mec_mdp()
    loops = {'v0': 1, 'v3': 1}
    policy = commit_policy(model, loops)
    assert policy['v4'] == -1
    assert policy['v3'] == 1
    assert expected_mp_with_commit(model, loops, 'v2') == 1


def test_expected_mp_needs_a_reachable_loop():
    model = demodata.three_mec_mdp()
    with pytest.raises(NoCommitError):
        expected_mp_with_commit(model, {'v0': 1}, 'v6')


def test_switch_bound_matches_consecutive_tails():
    """
    Reaching the end of a retry chain is the event of ``m`` consecutive
    advances, so both computations give the same step count.
    """
    for m, p, eps in [(1, '1/2', '1/1000'), (2, '1/3', '1/100'),
                      (3, '1/2', '1/20')]:
        model = demodata.retry_chain(m, p)
        strategy = {'u{}'.format(i): 'v{}'.format(i) for i in range(m)}
        plan = switch_step_bound(model, strategy, {'u{}'.format(m)}, eps,
                                 'u0')
        assert plan.steps == least_steps_for_tails(p, m, eps)
        assert plan.committed >= 1 - Fraction(eps)


def test_switch_bound_two_phase():
    model = demodata.two_phase_mdp()
    strategy = {'v0': 'v1', 'v2': 'v3', 'v4': 'v5', 'v7': 'v8'}
    plan = switch_step_bound(model, strategy, {'v4', 'v7'},
                             Fraction(1, 4500), 'v2')
    assert plan.steps == 38
    plan = switch_step_bound(model, strategy, {'v4', 'v7'},
                             Fraction(1, 4500), 'v4')
    assert plan.steps == 0


def test_switch_bound_is_the_least_step_count():
    for m, p, eps in [(1, '1/2', '1/1000'), (2, '1/3', '1/100'),
                      (3, '1/2', '1/20'), (2, '3/4', '1/50')]:
        model = demodata.retry_chain(m, p)
        strategy = {'u{}'.format(i): 'v{}'.format(i) for i in range(m)}
        plan = switch_step_bound(model, strategy, {'u{}'.format(m)}, eps,
                                 'u0')
        assert plan.steps > 0
        # one step fewer leaves too much mass outside the commit set
        assert consecutive_tails_prob(p, m, plan.steps - 1) > Fraction(eps)
        assert consecutive_tails_prob(p, m, plan.steps) <= Fraction(eps)


def test_switch_bound_geometric_retry():
    # each round reaches the loop with probability 1/5
    model = MdpModel.from_edges(
        [('try', 'player'), ('coin', 'random'), ('goal', 'player'),
         ('stay', 'random')],
        [('try', 'coin', 0), ('coin', 'try', 0, '4/5'),
         ('coin', 'goal', 0, '1/5'), ('goal', 'stay', 1),
         ('stay', 'goal', 1, '1/1')])
    plan = switch_step_bound(model, {'try': 'coin', 'goal': 'stay'},
                             {'goal'}, Fraction(1, 100), 'try')
    assert plan.steps == 21
    assert plan.committed == 1 - Fraction(4, 5) ** 21
    assert Fraction(4, 5) ** 20 > Fraction(1, 100)
    assert least_steps_for_tails(Fraction(4, 5), 1, Fraction(1, 100)) == 21


def test_switch_bound_needs_almost_sure_commit():
    model = demodata.three_mec_mdp()
    strategy = {'v0': 'v1', 'v3': 'v4', 'v5': 'v7', 'v6': 'v8'}
    with pytest.raises(NotAlmostSureError):
        switch_step_bound(model, strategy, {'v6'}, Fraction(1, 10), 'v3')
    with pytest.raises(PreconditionError):
        switch_step_bound(model, strategy, {'v6'}, 0, 'v3')


def test_consecutive_tails():
    half = Fraction(1, 2)
    # no two consecutive tails in three tosses: 5 of the 8 outcomes
    assert consecutive_tails_prob(half, 2, 3) == Fraction(5, 8)
    assert consecutive_tails_prob(half, 3, 2) == 1
    values = [consecutive_tails_prob(half, 2, n) for n in range(2, 12)]
    assert values == sorted(values, reverse=True)
    assert least_steps_for_tails(half, 2, 1) == 0
    with pytest.raises(PreconditionError):
        consecutive_tails_prob(1, 2, 3)


def _tails_by_enumeration(p, m, n):
    # count the toss sequences without ``m`` consecutive tails by heads count
    counts = [0] * (n + 1)
    for bits in itertools.product([True, False], repeat=n):
        run = longest = 0
        for heads in bits:
            run = 0 if heads else run + 1
            longest = max(longest, run)
        if longest < m:
            counts[sum(bits)] += 1
    q = 1 - p
    return sum((c * p ** h * q ** (n - h) for h, c in enumerate(counts)),
               Fraction(0))


def test_consecutive_tails_matches_enumeration():
    for p in [Fraction(1, 4), Fraction(1, 3), Fraction(1, 2)]:
        for m in range(1, 5):
            for n in range(0, 13):
                assert consecutive_tails_prob(p, m, n) == \
                    _tails_by_enumeration(p, m, n)


def test_switch_steps_grow_logarithmically():
    half = Fraction(1, 2)
    steps = [least_steps_for_tails(half, 2, Fraction(1, 10 ** k))
             for k in range(1, 7)]
    increments = [b - a for a, b in zip(steps, steps[1:])]
    assert max(increments) - min(increments) <= 1
