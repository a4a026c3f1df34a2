"""
Command line front end.

Subcommands:

* ``mec``: MEC decomposition of a model,
* ``values``: sure values or almost-sure MEC values of a window objective,
* ``solve``: decide a BWC, BP or BAS query and optionally write a witness,
* ``simulate``: Monte Carlo estimates for a strategy document.

Results are printed as structured text with rationals as ``n/d``. The exit
code is 0 whenever the question could be evaluated and 3 on invalid input.

Example
-------
>>> import tempfile, os
>>> from networkx_algo_window_mdp import demodata
>>> from networkx_algo_window_mdp.wmdp_io import write_mdp
>>> dpath = tempfile.mkdtemp()
>>> fpath = os.path.join(dpath, 'two_phase.wmdp')
>>> write_mdp(demodata.two_phase_mdp(), fpath)
>>> exitcode = main(['mec', '--model', fpath])
>>> exitcode
0
>>> main(['mec', '--model', os.path.join(dpath, 'missing.wmdp')])
3
"""
import argparse
import dataclasses
import logging
import sys
from fractions import Fraction
import ubelt as ub
from ._types import format_rational, sorted_vertices
from .model import WindowMdpError, ObjectiveSpec, GuaranteeQuery, describe
from .wmdp_io import read_mdp
from .graph_analysis import mec_decomposition, restrict_model
from .window_games import (GameView, fwmp_sure_region, fwmp_sure_values,
                           mp_game_values)
from .mdp_values import mec_value_table
from .strategy import read_strategy, write_strategy
from .synthesis import solve, synthesize
from .simulation import monte_carlo
from .utils import mdp_str

logger = logging.getLogger(__name__)

__all__ = ['main', 'build_parser', 'EXIT_OK', 'EXIT_INVALID']

EXIT_OK = 0
EXIT_INVALID = 3


def _plain(obj):
    """
    Recursively convert results into builtin containers with ``n/d``
    rationals.
    """
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _plain(getattr(obj, f.name))
                for f in dataclasses.fields(obj) if f.repr}
    if isinstance(obj, dict):
        return {_key(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted_vertices(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_plain(v) for v in items]
    return obj


def _key(key):
    if isinstance(key, tuple):
        return '->'.join(str(k) for k in key)
    return key


def _emit(payload):
    print(ub.urepr(_plain(payload), nl=-1, sort=0))


def _objective(args):
    return ObjectiveSpec.coerce(args.obj, args.window)


def _cmd_mec(args):
    model = read_mdp(args.model)
    if args.show:
        print(mdp_str(model, ascii_only=args.ascii))
    dec = mec_decomposition(model)
    _emit({'model': describe(model), 'mecs': dec.to_dict(),
           'transient': dec.transient})
    return EXIT_OK


def _cmd_values(args):
    model = read_mdp(args.model)
    objective = _objective(args)
    if args.kind == 'sure':
        game = GameView(model)
        if objective.is_fwmp:
            region = fwmp_sure_region(game, objective.window, 0)
            values = dict.fromkeys(model.vertices)
            if region:
                pruned = GameView(restrict_model(model, region))
                table = fwmp_sure_values(pruned, objective.window)
                values.update(table.values)
        else:
            values = mp_game_values(game, impl=args.impl)
        _emit({'objective': str(objective), 'kind': 'sure',
               'values': values})
    elif args.kind == 'almost-sure':
        table = mec_value_table(model, objective)
        _emit({
            'objective': str(objective), 'kind': 'almost-sure',
            'mecs': {k: {'vertices': sorted_vertices(mec),
                         'value': table.values[k]}
                     for k, mec in enumerate(table.decomposition.mecs)},
        })
    else:
        raise KeyError(args.kind)
    return EXIT_OK


def _cmd_solve(args):
    model = read_mdp(args.model)
    query = GuaranteeQuery(args.mode.upper(), _objective(args), args.start,
                           args.alpha, args.beta, args.prob)
    result = solve(model, query)
    if args.dump_lp:
        program = result.context.get('program')
        if program is None:
            logger.warning('%s queries do not build the flow program',
                           query.mode)
        else:
            with open(args.dump_lp, 'w') as file:
                file.write(program.dumps() + '\n')
    payload = ub.odict([
        ('mode', query.mode),
        ('objective', str(query.objective)),
        ('decision', result.report.answer),
        ('value', result.report.optimal_value),
        ('diagnostics', result.diagnostics),
    ])
    if args.strategy and result.decision:
        strategy = synthesize(result, eps=args.epsilon, model=model)
        write_strategy(strategy, args.strategy)
        payload['strategy'] = ub.odict([
            ('path', args.strategy),
            ('memory_size', strategy.memory_size),
            ('deterministic', strategy.is_deterministic),
        ])
    _emit(payload)
    return EXIT_OK


def _cmd_simulate(args):
    model = read_mdp(args.model)
    strategy = read_strategy(args.strategy)
    problems = strategy.audit(model)
    if problems:
        raise WindowMdpError('strategy does not fit the model: {}'.format(
            problems[0]))
    report = monte_carlo(model, strategy, args.start, n=args.runs,
                         horizon=args.horizon, seed=args.seed,
                         threshold=args.threshold, window=args.window,
                         burn_in=args.burn_in, workers=args.workers,
                         verbose=args.verbose)
    _emit(report.to_dict())
    return EXIT_OK


def _add_objective(parser):
    parser.add_argument('--obj', choices=['fwmp', 'bwmp'], default='fwmp')
    parser.add_argument('--window', type=int, default=None,
                        help='window length of FWMP')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='networkx_algo_window_mdp',
        description='Window mean-payoff synthesis for MDPs')
    parser.add_argument('-v', '--verbose', action='count', default=0)
    sub = parser.add_subparsers(dest='command', required=True)

    mec = sub.add_parser('mec', help='maximal end components')
    mec.add_argument('--model', required=True)
    mec.add_argument('--show', action='store_true',
                     help='also print the model as a forest')
    mec.add_argument('--ascii', action='store_true')
    mec.set_defaults(func=_cmd_mec)

    values = sub.add_parser('values', help='sure or almost-sure values')
    values.add_argument('--model', required=True)
    values.add_argument('--kind', choices=['sure', 'almost-sure'],
                        default='sure')
    values.add_argument('--impl', default='auto',
                        help='mean-payoff game solver for BWMP sure values')
    _add_objective(values)
    values.set_defaults(func=_cmd_values)

    solve_ = sub.add_parser('solve', help='decide a guarantee query')
    solve_.add_argument('--model', required=True)
    solve_.add_argument('--mode', choices=['bwc', 'bp', 'bas'],
                        required=True)
    _add_objective(solve_)
    solve_.add_argument('--alpha', default='0')
    solve_.add_argument('--beta', default='0')
    solve_.add_argument('--prob', default=None)
    solve_.add_argument('--epsilon', default=None)
    solve_.add_argument('--from', dest='start', required=True)
    solve_.add_argument('--strategy', default=None,
                        help='write the witness strategy here')
    solve_.add_argument('--dump-lp', default=None,
                        help='write the BP flow program here')
    solve_.set_defaults(func=_cmd_solve)

    sim = sub.add_parser('simulate', help='Monte Carlo strategy estimates')
    sim.add_argument('--model', required=True)
    sim.add_argument('--strategy', required=True)
    sim.add_argument('--from', dest='start', required=True)
    sim.add_argument('--runs', type=int, default=1000)
    sim.add_argument('--horizon', type=int, default=200)
    sim.add_argument('--seed', type=int, default=0)
    sim.add_argument('--threshold', default='0')
    sim.add_argument('--window', type=int, default=None)
    sim.add_argument('--burn-in', type=int, default=None)
    sim.add_argument('--workers', type=int, default=0)
    sim.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None):
    """
    Run the command line and return the exit code.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose,
                                                       logging.DEBUG)
    logging.basicConfig(level=level)
    try:
        return args.func(args)
    except (WindowMdpError, KeyError, ValueError, OSError) as ex:
        print('error: {}'.format(ex), file=sys.stderr)
        return EXIT_INVALID
