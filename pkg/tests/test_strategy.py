import io
from fractions import Fraction
import pytest
from networkx_algo_window_mdp import demodata
from networkx_algo_window_mdp.model import ObjectiveSpec, lasso_value
from networkx_algo_window_mdp.strategy import (
    MealyStrategy, MemorylessController, realize, read_strategy,
    write_strategy, strategy_lassos, UndefinedMoveError)


class CountingController:
    """
    Alternates between the two successors of v7 and counts modulo 4, which
    is more memory than the behaviour needs.
    """

    def initial(self):
        return 0

    def update(self, memory, prev, vertex):
        if vertex == 'v7':
            return (memory + 1) % 4
        return memory

    def choose(self, memory, vertex):
        if vertex == 'v7':
            succ = 'v8' if memory % 2 else 'v6'
        else:
            succ = 'v5'
        return [(succ, Fraction(1))]


def test_realize_memoryless():
    model = demodata.two_phase_mdp()
    choice = {'v0': 'v1', 'v2': 'v3', 'v4': 'v5', 'v7': 'v6'}
    strat = realize(MemorylessController(choice), model, ['v0'])
    assert strat.is_memoryless
    assert strat.output(strat.initial, 'v2') == [('v3', Fraction(1))]
    assert strat.audit(model) == []


def test_minimize_merges_equivalent_counters():
    model = demodata.two_phase_mdp()
    raw = realize(CountingController(), model, ['v4'], minimize=False)
    small = raw.minimize()
    assert 2 <= small.memory_size < raw.memory_size
    for run in strategy_lassos(model, small, 'v4'):
        assert lasso_value(run, ObjectiveSpec.fwmp(3)) == 2


def test_randomised_outputs():
    model = demodata.coin_mdp()
    move = [('coin', Fraction(1))]
    strat = realize(MemorylessController({'start': move, 'T': 'T_loop',
                                          'F': 'F_loop'}), model, ['start'])
    assert strat.is_deterministic
    assert strat.decisions_at('start') == [move]


def test_json_round_trip(tmp_path):
    model = demodata.three_mec_mdp()
    dist = [('v1', Fraction(1, 3)), ('v2', Fraction(2, 3))]
    choice = {'v0': dist, 'v3': 'v1', 'v5': 'v7', 'v6': 'v8'}
    strat = realize(MemorylessController(choice), model, ['v0'], name='mix')
    assert not strat.is_deterministic
    fpath = tmp_path / 'strategy.json'
    write_strategy(strat, str(fpath))
    again = read_strategy(str(fpath))
    assert again.name == 'mix'
    assert again.initial == strat.initial
    assert again.transitions == strat.transitions
    assert again.outputs == strat.outputs
    assert '"1/3"' in strat.dumps()


def test_strategy_files_accept_paths_and_handles(tmp_path):
    model = demodata.two_cycle_mdp()
    strat = realize(MemorylessController({'v1': 'v2', 'v3': 'v2'}), model,
                    ['v1'], name='cycle')
    buf = io.StringIO()
    write_strategy(strat, buf)
    buf.seek(0)
    assert read_strategy(buf).transitions == strat.transitions
    fpath = tmp_path / 'cycle.json'
    write_strategy(strat, fpath)
    with open(fpath) as file:
        again = read_strategy(file)
    assert again.name == 'cycle'
    assert read_strategy(fpath).outputs == strat.outputs


def test_audit_finds_problems():
    model = demodata.two_cycle_mdp()
    strat = MealyStrategy(
        [0], 0,
        transitions={(0, 'v1'): 1, (0, 'v3'): 0},
        outputs={(0, 'v1'): [('v3', Fraction(1))],
                 (0, 'v3'): [('v2', Fraction(1, 2))]})
    problems = strat.audit(model)
    assert "transition (0, v1) leaves the states" in problems
    assert 'v1 -> v3 is not an edge' in problems
    assert 'output (0, v3) sums to 1/2' in problems


def test_undefined_moves():
    strat = MealyStrategy([0], 0, {}, {})
    with pytest.raises(UndefinedMoveError):
        strat.output(0, 'v1')
    with pytest.raises(UndefinedMoveError):
        strat.transition(0, 'v1')


def test_lassos_need_determinism():
    model = demodata.three_mec_mdp()
    dist = [('v1', Fraction(1, 2)), ('v2', Fraction(1, 2))]
    strat = realize(MemorylessController({'v0': dist, 'v3': 'v1'}), model,
                    ['v0'])
    with pytest.raises(ValueError):
        strategy_lassos(model, strat, 'v0')
