from fractions import Fraction
import pytest
from networkx_algo_window_mdp import demodata
from networkx_algo_window_mdp.graph_analysis import collapse_mecs
from networkx_algo_window_mdp.model import UnknownVertexError
from networkx_algo_window_mdp.bp_program import (
    BpCertificate, build_bp_lp, check_bp, bp_optimal_value)


@pytest.fixture
def collapsed():
    return collapse_mecs(demodata.three_mec_mdp(), {0: 1, 1: -1, 2: 9})


def _stay_certificate(collapsed, q):
    """
    Stay in the first component with probability ``q``, otherwise take the
    lottery and settle wherever it lands.
    """
    q = Fraction(q)
    t = 1 - q
    return BpCertificate.from_assignment(
        collapsed,
        flows={('mec0', 'v4'): t, ('mec2', 'mec2>mec1'): 0},
        yes={'mec0': q, 'mec2': t * Fraction(2, 5)},
        no={'mec1': t * Fraction(3, 5)})


def test_program_layout(collapsed):
    lp = build_bp_lp(collapsed, 'mec0', '1/2', 2)
    labels = [con.label for con in lp.constraints]
    assert 'flow[mec0]' in labels
    assert 'flow[mec1]' in labels
    assert 'sign_yes[mec1]' in labels
    assert 'sign_no[mec2]' in labels
    assert labels[-1] == 'prob'
    assert 'x[mec0->v4]' in lp.variables
    text = lp.dumps()
    assert text.startswith('# program bp')
    with pytest.raises(UnknownVertexError):
        build_bp_lp(collapsed, 'v0', '1/2', 2)
    with pytest.raises(KeyError):
        build_bp_lp(collapsed, 'mec0', '1/2', 2, objective='money')


def test_stay_family_certificates(collapsed):
    """
    Staying with probability ``q`` gives expectation ``3 - 2q`` and
    probability ``2/5 + 3q/5``.
    """
    for q in [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1)]:
        cert = _stay_certificate(collapsed, q)
        assert cert.expectation == 3 - 2 * q
        assert cert.probability == Fraction(2, 5) + Fraction(3, 5) * q
        assert cert.verify(collapsed, 'mec0', p=cert.probability,
                           beta=cert.expectation) == []
    for q in [Fraction(1, 6), Fraction(1, 4), Fraction(1, 3)]:
        cert = _stay_certificate(collapsed, q)
        assert cert.verify(collapsed, 'mec0', p='1/2', beta=2) == [], q
    assert _stay_certificate(collapsed, Fraction(1, 6)).probability == \
        Fraction(1, 2)
    assert _stay_certificate(collapsed, Fraction(0)).verify(
        collapsed, 'mec0', p='1/2', beta=2) == ['prob']
    cert = _stay_certificate(collapsed, Fraction(1, 4))
    assert cert.probability == Fraction(11, 20)
    assert cert.expectation == Fraction(5, 2)
    assert cert.verify(collapsed, 'mec0', p='3/5') == ['prob']
    assert cert.verify(collapsed, 'mec0', beta=3) == ['expect']


def test_certificate_queries(collapsed):
    cert = _stay_certificate(collapsed, Fraction(1, 4))
    assert cert.settle('mec1') == Fraction(9, 20)
    assert cert.outflow(collapsed, 'mec0') == Fraction(3, 4)
    visits = cert.visits(collapsed)
    assert visits['v4'] == Fraction(3, 4)
    assert visits['mec2>mec1'] == 0


def test_broken_flows_are_reported(collapsed):
    cert = BpCertificate.from_assignment(
        collapsed, flows={('mec0', 'v4'): 1}, yes={'mec0': 1, 'mec2': 1},
        no={})
    violations = cert.verify(collapsed, 'mec0')
    assert 'flow[mec0]' in violations
    assert 'flow[mec1]' in violations
    assert 'switch' in violations
    assert 'expect' not in violations


def test_check_bp_max_probability(collapsed):
    result = check_bp(collapsed, 'mec0', '1/2', 2)
    assert result.feasible
    assert result.max_probability == Fraction(7, 10)
    cert = result.certificate
    assert cert.expectation >= 2
    assert cert.verify(collapsed, 'mec0', p='1/2', beta=2) == []

    result = check_bp(collapsed, 'mec0', '4/5', 2)
    assert not result.feasible
    assert result.max_probability == Fraction(7, 10)
    assert result.certificate is None

    # the lottery caps the expectation at 3
    result = check_bp(collapsed, 'mec0', 0, 10)
    assert not result.feasible
    assert result.max_probability is None


def test_bp_optimal_value(collapsed):
    value, cert = bp_optimal_value(collapsed, 'mec0', '1/2')
    assert value == Fraction(8, 3)
    assert cert.probability == Fraction(1, 2)
    value, cert = bp_optimal_value(collapsed, 'mec0', 0)
    assert value == 3
    value, cert = bp_optimal_value(collapsed, 'mec0', 1)
    assert value == 1
    # the lottery itself only reaches the good loop with probability 2/5
    value, cert = bp_optimal_value(collapsed, 'v4', '1/2')
    assert value is None and cert is None
