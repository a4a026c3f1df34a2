from fractions import Fraction
import pytest
from networkx_algo_window_mdp import demodata
from networkx_algo_window_mdp.model import (
    MdpModel, ObjectiveSpec, GuaranteeQuery, LassoRun, lasso_value,
    normalize_guarantee, validate_mdp, PreconditionError, InvalidLassoError,
    UnknownVertexError)
from networkx_algo_window_mdp.wmdp_io import (
    parse_mdp, format_mdp, read_mdp, write_mdp, ModelSyntaxError)
from networkx_algo_window_mdp.model import InvalidModelError


def test_demodata_models_are_valid():
    for model in [demodata.two_phase_mdp(), demodata.two_cycle_mdp(),
                  demodata.three_mec_mdp(), demodata.retry_chain(3, '1/3'),
                  demodata.coin_mdp(), demodata.self_loop_mdp(-2)]:
        report = validate_mdp(model)
        assert report.is_valid, report.violations


def test_format_then_parse_gives_equal_model():
    model = demodata.three_mec_mdp()
    again = parse_mdp(format_mdp(model, header='three mec\nsecond line'))
    assert again == model
    assert again.prob('v4', 'v5') == Fraction(3, 5)


def test_read_write_file(tmp_path):
    fpath = tmp_path / 'chain.wmdp'
    model = demodata.retry_chain(2, '1/4')
    write_mdp(model, str(fpath))
    assert read_mdp(str(fpath)) == model


@pytest.mark.parametrize('text,lineno,col', [
    ('vertex a player\nvertex a random\n', 2, 8),
    ('vertex a player\nvertex b banana\n', 2, 10),
    ('vertex a player\nvertex b random\nedge a c weight 0\n', 3, 8),
    ('vertex a player\nvertex b random\nedge a b weight x\n', 3, 17),
    ('vertex a player\nvertex b random\nedge a b weight 0 prob 1/1\n', 3, 19),
    ('vertex a player\nvertex b random\nedge b a weight 0\n', 3, 1),
    ('vertex a player\nvertex b random\nedge b a weight 0 prob 1/0\n', 3, 24),
    ('vertex a player\nbogus\n', 2, 1),
])
def test_syntax_errors_point_at_token(text, lineno, col):
    with pytest.raises(ModelSyntaxError) as exc:
        parse_mdp(text)
    assert exc.value.lineno == lineno
    assert exc.value.col == col


def test_invalid_model_lists_every_violation():
    text = '\n'.join([
        'vertex a player',
        'vertex b player',
        'vertex c random',
        'edge a b weight 0',
        'edge c a weight 0 prob 1/3',
    ])
    with pytest.raises(InvalidModelError) as exc:
        parse_mdp(text)
    violations = exc.value.report.violations
    assert len(violations) == 3
    assert any('alternation' in v for v in violations)
    assert any('no out-edge: b' == v for v in violations)
    assert any('sum to 1/3' in v for v in violations)


def test_from_edges_rejects_unknown_vertex():
    with pytest.raises(UnknownVertexError):
        MdpModel.from_edges([('a', 'player')], [('a', 'b', 0)])


def test_objective_spec_checks_window():
    assert str(ObjectiveSpec.fwmp(3)) == 'FWMP(l=3)'
    assert str(ObjectiveSpec.coerce('bwmp')) == 'BWMP'
    with pytest.raises(PreconditionError):
        ObjectiveSpec.fwmp(0)
    with pytest.raises(PreconditionError):
        ObjectiveSpec('BWMP', 2)


def test_guarantee_query_probability_rules():
    obj = ObjectiveSpec.fwmp(2)
    query = GuaranteeQuery('BP', obj, 'v0', prob='1/2')
    assert query.prob == Fraction(1, 2)
    with pytest.raises(PreconditionError):
        GuaranteeQuery('BP', obj, 'v0')
    with pytest.raises(PreconditionError):
        GuaranteeQuery('BP', obj, 'v0', prob='3/2')
    with pytest.raises(PreconditionError):
        GuaranteeQuery('BWC', obj, 'v0', prob='1/2')
    with pytest.raises(TypeError):
        GuaranteeQuery('BWC', obj, 'v0', alpha=0.5)


def test_lasso_values_of_two_cycle():
    model = demodata.two_cycle_mdp()
    run = LassoRun(model, (), ('v1', 'v2'))
    assert lasso_value(run, ObjectiveSpec.fwmp(1)) == -1
    assert lasso_value(run, ObjectiveSpec.fwmp(2)) == 0
    assert lasso_value(run, ObjectiveSpec.bwmp()) == 0
    run = LassoRun(model, ('v1', 'v2'), ('v3', 'v2'))
    assert lasso_value(run, ObjectiveSpec.fwmp(1)) == 0
    assert run.unroll(4) == ['v1', 'v2', 'v3', 'v2', 'v3']


def test_lasso_must_follow_edges():
    model = demodata.two_cycle_mdp()
    with pytest.raises(InvalidLassoError):
        LassoRun(model, (), ('v1', 'v3'))
    with pytest.raises(InvalidLassoError):
        LassoRun(model, (), ())


def test_normalization_shifts_lasso_values():
    model = demodata.two_phase_mdp()
    obj = ObjectiveSpec.fwmp(3)
    cycle = ['v4', 'v5', 'v7', 'v8', 'v7', 'v6']
    alpha = Fraction(3, 2)
    shifted, tmap = normalize_guarantee(model, alpha)
    before = lasso_value(LassoRun(model, (), cycle), obj)
    after = lasso_value(LassoRun(shifted, (), cycle), obj)
    assert after == tmap(before)
    assert tmap.inverse(after) == before
    assert all(isinstance(w, int) for _, _, w, _ in shifted.edges())


def test_normalization_at_zero_is_identity():
    model = demodata.two_cycle_mdp()
    shifted, tmap = normalize_guarantee(model, 0)
    assert shifted is model
    assert tmap(5) == 5
