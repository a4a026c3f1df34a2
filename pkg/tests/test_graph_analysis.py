from fractions import Fraction
import networkx as nx
import pytest
from networkx.utils import create_py_random_state
from networkx_algo_window_mdp import demodata
from networkx_algo_window_mdp.graph_analysis import (
    mec_decomposition, restrict_model, attractor, almost_sure_reach_region,
    almost_sure_reach_strategy, optimal_reach_probabilities, collapse_mecs,
    end_component_vertices, ClosureError)
from networkx_algo_window_mdp.model import validate_mdp, PreconditionError
from networkx_algo_window_mdp.utils import random_mdp


def test_mecs_of_two_phase():
    dec = mec_decomposition(demodata.two_phase_mdp())
    assert dec.to_dict() == {0: ['v0', 'v1', 'v2'],
                             1: ['v4', 'v5', 'v6', 'v7', 'v8']}
    assert dec.transient == ['v3']
    assert dec.mec_of('v7') == 1
    assert dec.mec_of('v3') is None


def test_mecs_are_closed_and_disjoint():
    """
    Every MEC of a random model is a closed, strongly connected sub-MDP.
    """
    rng = create_py_random_state(2903)
    for _ in range(20):
        model = random_mdp(rng.randint(2, 10), seed=rng)
        dec = mec_decomposition(model)
        seen = set()
        for mec in dec.mecs:
            assert not (mec & seen)
            seen |= mec
            sub = restrict_model(model, mec)
            assert validate_mdp(sub).is_valid
            assert nx.is_strongly_connected(sub.graph)


def test_restrict_model_reports_first_open_vertex():
    model = demodata.two_phase_mdp()
    with pytest.raises(ClosureError) as exc:
        restrict_model(model, {'v4', 'v5'})
    assert exc.value.vertex == 'v5'
    with pytest.raises(ClosureError) as exc:
        restrict_model(model, {'v7', 'v8', 'v6'})
    assert exc.value.vertex == 'v6'
    sub = restrict_model(model, {'v4', 'v5', 'v6', 'v7', 'v8'})
    assert sub.num_edges == 6


def test_attractor_of_the_adversary():
    model = demodata.two_phase_mdp()
    attr, choice = attractor(model, {'v2'}, owner='random')
    assert attr == {'v0', 'v1', 'v2', 'v3'}
    assert choice == {'v1': 'v2', 'v3': 'v2'}
    attr, choice = attractor(model, {'v4'}, within={'v2', 'v3', 'v4'})
    assert attr == {'v4'}


def test_almost_sure_reach_strategy_ranks():
    model = demodata.three_mec_mdp()
    region, choice, rank = almost_sure_reach_strategy(model, {'v6'})
    assert region == {'v6', 'v8'}
    assert 'v3' not in region
    region = almost_sure_reach_region(model, {'v5'})
    assert region == set(model.vertices)
    with pytest.raises(nx.NetworkXPointlessConcept):
        almost_sure_reach_region(model, set())


def test_optimal_reach_probabilities():
    model = demodata.three_mec_mdp()
    table = optimal_reach_probabilities(model, {'v6'})
    assert table['v4'] == Fraction(2, 5)
    assert table['v3'] == Fraction(2, 5)
    assert table['v0'] == Fraction(2, 5)
    assert table['v5'] == 0
    assert table.strategy['v3'] == 'v4'
    assert table.strategy['v0'] in {'v1', 'v2'}


def test_end_component_vertices():
    model = demodata.three_mec_mdp()
    assert end_component_vertices(model) == set(model.vertices) - {'v4'}


def test_collapse_three_mec():
    model = demodata.three_mec_mdp()
    collapsed = collapse_mecs(model, {0: 1, 1: -1, 2: 9})
    quotient = collapsed.model
    assert validate_mdp(quotient, require_integral=False).is_valid
    assert collapsed.mec_vertex == {0: 'mec0', 1: 'mec1', 2: 'mec2'}
    assert collapsed.loop_payoff['mec2'] == 9
    assert collapsed.representative['v8'] == 'mec2'
    assert collapsed.representative['v4'] == 'v4'
    assert collapsed.exits[('mec0', 'v4')] == ('v3', 'v4')
    assert collapsed.exits[('mec2', 'mec2>mec1')] == ('v6', 'v7')
    assert collapsed.origin['mec2>mec1'] == ('hop', ('mec2', 'mec1'))
    assert quotient.prob('v4', 'mec1') == Fraction(3, 5)

    structural = collapsed.structural_model()
    assert 'mec0_loop' not in structural
    assert structural.successors('mec1') == []
    assert structural.successors('mec0') == ['v4']


def test_collapse_needs_every_loop_payoff():
    with pytest.raises(PreconditionError):
        collapse_mecs(demodata.three_mec_mdp(), {0: 1})
