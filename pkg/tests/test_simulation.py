from fractions import Fraction
import pytest
from networkx_algo_window_mdp import demodata
from networkx_algo_window_mdp.model import ObjectiveSpec, PreconditionError
from networkx_algo_window_mdp.strategy import MemorylessController, realize
from networkx_algo_window_mdp.synthesis import decide_bp, decide_bwc, synthesize
from networkx_algo_window_mdp.simulation import (
    FinitePath, simulate, empirical_window_value, longest_open_window,
    monte_carlo, HorizonTooShortError)


def _coin_strategy(model):
    choice = {'start': 'coin', 'T': 'T_loop', 'F': 'F_loop'}
    return realize(MemorylessController(choice), model, ['start'])


def test_finite_path_checks_edges():
    model = demodata.two_cycle_mdp()
    path = FinitePath.from_vertices(model, ['v1', 'v2', 'v3', 'v2', 'v1'])
    assert path.payoffs == (-1, 0, 0, 1)
    assert len(path) == 4
    assert path.mean_payoff() == 0
    with pytest.raises(PreconditionError):
        FinitePath.from_vertices(model, ['v1', 'v3'])
    with pytest.raises(ValueError):
        FinitePath(('v1', 'v2'), ())


def test_empirical_window_value():
    model = demodata.two_cycle_mdp()
    path = FinitePath.from_vertices(
        model, ['v1', 'v2', 'v3', 'v2', 'v1', 'v2', 'v1'])
    assert empirical_window_value(path, 2, burn_in=0) == Fraction(-1, 2)
    assert empirical_window_value(path, 1, burn_in=0) == -1
    assert empirical_window_value(path, 2, burn_in=1) == 0
    with pytest.raises(HorizonTooShortError):
        empirical_window_value(path, 2, burn_in=4)
    with pytest.raises(PreconditionError):
        empirical_window_value(path, 0, burn_in=0)


def test_longest_open_window_grows():
    path = demodata.growing_loop_path(60)
    assert longest_open_window(path, 0) == 121
    # below zero the lone -1 is paid off after a bounded number of steps
    assert longest_open_window(path, Fraction(-1, 100)) == 99


def test_simulate_is_reproducible():
    model = demodata.two_phase_mdp()
    choice = {'v0': 'v1', 'v2': 'v3', 'v4': 'v5', 'v7': 'v8'}
    strat = realize(MemorylessController(choice), model, ['v0'])
    path1 = simulate(model, strat, 'v0', 50, seed=11)
    path2 = simulate(model, strat, 'v0', 50, seed=11)
    assert path1 == path2
    assert path1.horizon == 50
    for u, v in zip(path1.vertices, path1.vertices[1:]):
        assert model.has_edge(u, v)


def test_monte_carlo_coin():
    model = demodata.coin_mdp()
    strat = _coin_strategy(model)
    report = monte_carlo(model, strat, 'start', n=200, horizon=40, window=1,
                         threshold=1, seed=5)
    assert set(report.values) == {0, 4}
    assert abs(float(report.probability) - 0.5) < 0.15
    assert report.mean == 4 * report.probability
    data = report.to_dict()
    assert list(data)[:3] == ['runs', 'horizon', 'window']
    assert data['runs'] == 200
    assert 'min_value' in data


def test_monte_carlo_without_window_reports_mean_payoff():
    model = demodata.self_loop_mdp(3)
    strat = realize(MemorylessController({'s': 's_loop'}), model, ['s'])
    report = monte_carlo(model, strat, 's', n=3, horizon=80)
    assert report.window is None
    assert report.min_value == 3
    assert report.diagnostics['mean_payoff'] == 3.0
    with pytest.raises(HorizonTooShortError):
        monte_carlo(model, strat, 's', n=3, horizon=10, window=8)
    with pytest.raises(PreconditionError):
        monte_carlo(model, strat, 's', n=0, horizon=10)


def test_monte_carlo_does_not_depend_on_workers():
    model = demodata.coin_mdp()
    strat = _coin_strategy(model)
    serial = monte_carlo(model, strat, 'start', n=12, horizon=20, window=1,
                         seed=3, workers=0)
    pooled = monte_carlo(model, strat, 'start', n=12, horizon=20, window=1,
                         seed=3, workers=2)
    assert serial.values == pooled.values
    assert serial.probability == pooled.probability


def test_bp_witness_estimate():
    """
    The witness stays in the safe component a quarter of the time and
    otherwise gambles on the lottery.
    """
    model = demodata.three_mec_mdp()
    objective = ObjectiveSpec.fwmp(2)
    result = decide_bp(model, 'v3', objective, '1/2', 0, '5/2')
    strat = synthesize(result, model=model)
    report = monte_carlo(model, strat, 'v3', n=400, horizon=200, window=2,
                         seed=1)
    assert set(report.values) <= {-1, 1, 9}
    assert abs(float(report.probability) - 0.55) < 0.1
    assert abs(float(report.mean) - 2.5) < 1


def test_bwc_witness_estimate():
    model = demodata.two_phase_mdp()
    objective = ObjectiveSpec.fwmp(3)
    result = decide_bwc(model, 'v2', objective, 0, 2)
    strat = synthesize(result, eps=Fraction(1, 100), model=model)
    report = monte_carlo(model, strat, 'v2', n=300, horizon=400, window=3,
                         burn_in=200, seed=2)
    assert report.runs == 300
    assert min(report.values) >= 0
    assert report.probability == 1
    assert report.mean >= 2 - Fraction(1, 100)
