import pytest
from networkx_algo_window_mdp import demodata
from networkx_algo_window_mdp.cli import main, EXIT_OK, EXIT_INVALID
from networkx_algo_window_mdp.strategy import read_strategy
from networkx_algo_window_mdp.wmdp_io import write_mdp


@pytest.fixture
def three_mec_file(tmp_path):
    fpath = tmp_path / 'three_mec.wmdp'
    write_mdp(demodata.three_mec_mdp(), str(fpath))
    return str(fpath)


@pytest.fixture
def two_phase_file(tmp_path):
    fpath = tmp_path / 'two_phase.wmdp'
    write_mdp(demodata.two_phase_mdp(), str(fpath))
    return str(fpath)


def test_mec_command(two_phase_file, capsys):
    assert main(['mec', '--model', two_phase_file]) == EXIT_OK
    out = capsys.readouterr().out
    assert "'mecs'" in out
    assert "'v7'" in out
    assert "'edges': 13" in out

    argv = ['mec', '--model', two_phase_file, '--show', '--ascii']
    assert main(argv) == EXIT_OK
    out = capsys.readouterr().out
    assert 'v3 [R]' in out
    assert '╙' not in out


def test_values_command(two_phase_file, capsys):
    argv = ['values', '--model', two_phase_file, '--window', '3']
    assert main(argv) == EXIT_OK
    out = capsys.readouterr().out
    assert "'kind': 'sure'" in out
    assert "'v4': '2/1'" in out

    argv = ['values', '--model', two_phase_file, '--kind', 'almost-sure',
            '--window', '3']
    assert main(argv) == EXIT_OK
    out = capsys.readouterr().out
    assert "'value': '2/1'" in out
    assert "'value': '0/1'" in out


def test_solve_bp_writes_witness_and_program(three_mec_file, tmp_path,
                                             capsys):
    strat_fpath = str(tmp_path / 'bp.json')
    lp_fpath = tmp_path / 'bp.lp'
    argv = ['solve', '--model', three_mec_file, '--mode', 'bp',
            '--window', '2', '--prob', '1/2', '--beta', '2', '--from', 'v3',
            '--strategy', strat_fpath, '--dump-lp', str(lp_fpath)]
    assert main(argv) == EXIT_OK
    out = capsys.readouterr().out
    assert "'decision': 'yes'" in out
    assert "'value': '8/3'" in out
    assert lp_fpath.read_text().startswith('# program bp')
    strat = read_strategy(strat_fpath)
    assert strat.audit(demodata.three_mec_mdp()) == []

    argv = ['simulate', '--model', three_mec_file, '--strategy', strat_fpath,
            '--from', 'v3', '--runs', '20', '--horizon', '60', '--window',
            '2', '--seed', '4']
    assert main(argv) == EXIT_OK
    out = capsys.readouterr().out
    assert "'runs': 20" in out
    assert "'probability'" in out


def test_solve_no_answer_skips_the_witness(two_phase_file, tmp_path, capsys):
    strat_fpath = tmp_path / 'bwc.json'
    argv = ['solve', '--model', two_phase_file, '--mode', 'bwc',
            '--window', '3', '--beta', '21/10', '--from', 'v2',
            '--strategy', str(strat_fpath)]
    assert main(argv) == EXIT_OK
    out = capsys.readouterr().out
    assert "'decision': 'no'" in out
    assert not strat_fpath.exists()


def test_invalid_input_exit_code(tmp_path, two_phase_file, capsys):
    missing = str(tmp_path / 'missing.wmdp')
    assert main(['mec', '--model', missing]) == EXIT_INVALID

    broken = tmp_path / 'broken.wmdp'
    broken.write_text('vertex a player\nedge a b weight 1\n')
    assert main(['mec', '--model', str(broken)]) == EXIT_INVALID

    # only BP takes a probability
    argv = ['solve', '--model', two_phase_file, '--mode', 'bwc',
            '--window', '3', '--prob', '1/2', '--from', 'v2']
    assert main(argv) == EXIT_INVALID
    # FWMP needs a window length
    argv = ['solve', '--model', two_phase_file, '--mode', 'bas',
            '--from', 'v2']
    assert main(argv) == EXIT_INVALID
    argv = ['solve', '--model', two_phase_file, '--mode', 'bas',
            '--window', '3', '--from', 'nowhere']
    assert main(argv) == EXIT_INVALID
    err = capsys.readouterr().err
    assert err.count('error:') == 5
