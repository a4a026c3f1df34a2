from fractions import Fraction
import pytest
from networkx.utils import create_py_random_state
from networkx_algo_window_mdp import demodata
from networkx_algo_window_mdp._types import sorted_vertices
from networkx_algo_window_mdp.model import (ObjectiveSpec, lasso_value,
                                            PreconditionError)
from networkx_algo_window_mdp.strategy import strategy_lassos
from networkx_algo_window_mdp.utils import random_mdp
from networkx_algo_window_mdp.oracles import (oracle_fwmp_region,
                                              brute_force_mp_values)
from networkx_algo_window_mdp.window_games import (
    GameView, fwmp_sure_region, fwmp_sure_values, fwmp_structure,
    bwmp_sure_region, mp_game_values, available_impls_mp_game_values,
    sure_strategy)


def test_two_phase_sure_values():
    game = GameView(demodata.two_phase_mdp())
    table = fwmp_sure_values(game, 3)
    assert table['v0'] == 0
    assert table['v2'] == 0
    assert table['v4'] == 2
    assert table['v7'] == 2


def test_sure_values_need_a_winning_arena():
    game = GameView(demodata.three_mec_mdp())
    with pytest.raises(PreconditionError):
        fwmp_sure_values(game, 2)


def test_structure_zones():
    game = GameView(demodata.two_phase_mdp())
    struct = fwmp_structure(game, 3, 2)
    assert struct.region == {'v4', 'v5', 'v6', 'v7', 'v8'}
    assert struct.zone_of('v7') == (0, True)
    assert struct.zone_of('v0') == (None, False)
    with pytest.raises(PreconditionError):
        fwmp_structure(game, 0, 0)


def test_window_one_checks_single_steps():
    # with window 1 every step from some point on pays at least the threshold
    game = GameView(demodata.three_mec_mdp())
    region = fwmp_sure_region(game, 1, 1)
    assert region == {'v0', 'v1', 'v2', 'v3', 'v6', 'v8'}


def test_two_cycle_bounded_window():
    game = GameView(demodata.two_cycle_mdp())
    assert bwmp_sure_region(game, 0) == {'v1', 'v2', 'v3'}
    assert bwmp_sure_region(game, Fraction(1, 100)) == set()
    # the adversary may keep a window at 0 open for as long as it likes
    for ell in range(1, 6):
        assert fwmp_sure_region(game, ell, 0) == set()
    assert fwmp_sure_region(game, 2, Fraction(-1, 2)) == {'v1', 'v2', 'v3'}


def test_mp_game_value_impls_agree():
    rng = create_py_random_state(4151)
    for _ in range(10):
        game = GameView(random_mdp(rng.randint(2, 7), seed=rng))
        results = {impl: mp_game_values(game, impl=impl)
                   for impl in available_impls_mp_game_values()}
        first, *rest = results.values()
        for other in rest:
            assert other == first
    with pytest.raises(KeyError):
        mp_game_values(game, impl='nope')


def test_fwmp_region_matches_oracle():
    """
    The layered construction agrees with the explicit window product on
    random models.
    """
    rng = create_py_random_state(90210)
    thresholds = [Fraction(0), Fraction(-1, 2), Fraction(1, 2), Fraction(1)]
    for trial in range(200):
        model = random_mdp(rng.randint(2, 6), seed=rng, max_weight=2)
        game = GameView(model)
        for ell in (1, 2, 3):
            for lam in thresholds:
                got = fwmp_sure_region(game, ell, lam)
                want = oracle_fwmp_region(game, ell, lam)
                assert got == want, (trial, ell, lam)


def test_bwmp_region_matches_brute_force():
    rng = create_py_random_state(31337)
    for _ in range(200):
        model = random_mdp(rng.randint(2, 6), seed=rng, max_weight=2)
        game = GameView(model)
        values = brute_force_mp_values(game)
        assert mp_game_values(game) == values
        for lam in (Fraction(-1), Fraction(0), Fraction(1, 3)):
            want = {v for v, x in values.items() if x >= lam}
            assert bwmp_sure_region(game, lam) == want


def test_sure_strategy_lassos_meet_the_threshold():
    model = demodata.two_phase_mdp()
    game = GameView(model)
    obj = ObjectiveSpec.fwmp(3)
    region = fwmp_sure_region(game, 3, 2)
    sub = GameView(model.subgraph(region))
    strat = sure_strategy(sub, obj, 2, starts=['v4'])
    assert strat.is_deterministic
    assert strat.audit(model) == []
    assert strat.memory_size <= 3
    lassos = strategy_lassos(sub.model, strat, 'v4')
    assert lassos
    for run in lassos:
        assert lasso_value(run, obj) >= 2


def test_sure_strategy_memory_is_bounded_by_the_window():
    """
    Sure FWMP strategies use at most ``ell`` states and close every window
    on random models.
    """
    rng = create_py_random_state(8086)
    checked = 0
    for trial in range(100):
        model = random_mdp(rng.randint(2, 7), seed=rng, max_weight=3)
        game = GameView(model)
        for ell in (2, 3):
            obj = ObjectiveSpec.fwmp(ell)
            for lam in (Fraction(0), Fraction(1, 2)):
                region = fwmp_sure_region(game, ell, lam)
                if not region:
                    continue
                sub = GameView(model.subgraph(region))
                strat = sure_strategy(sub, obj, lam)
                assert strat.memory_size <= ell, (trial, ell, lam)
                start = sorted_vertices(region)[0]
                for run in strategy_lassos(sub.model, strat, start):
                    assert lasso_value(run, obj) >= lam, (trial, ell, lam)
                checked += 1
    assert checked > 20


def test_sure_strategy_rejects_losing_vertices():
    game = GameView(demodata.two_phase_mdp())
    with pytest.raises(PreconditionError):
        sure_strategy(game, ObjectiveSpec.fwmp(3), 2)


def test_bwmp_sure_strategy_is_memoryless():
    model = demodata.two_cycle_mdp()
    strat = sure_strategy(GameView(model), ObjectiveSpec.bwmp(), 0)
    assert strat.is_memoryless
    for run in strategy_lassos(model, strat, 'v1'):
        assert lasso_value(run, ObjectiveSpec.bwmp()) >= 0
