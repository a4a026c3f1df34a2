"""
Window mean-payoff synthesis for Markov decision processes
"""
__version__ = '0.1.0'

__mkinit__ = """
mkinit -m networkx_algo_window_mdp -w
"""

__submodules__ = {
    'model': ['MdpModel', 'ObjectiveSpec', 'GuaranteeQuery', 'WindowMdpError'],
    'wmdp_io': ['read_mdp', 'write_mdp', 'parse_mdp', 'format_mdp'],
    'strategy': ['MealyStrategy', 'read_strategy', 'write_strategy'],
    'graph_analysis': ['mec_decomposition', 'collapse_mecs'],
    'window_games': [],
    'mdp_values': [],
    'simplex': [],
    'bp_program': [],
    'synthesis': ['solve', 'synthesize', 'decide_bwc', 'decide_bp',
                  'decide_bas'],
    'simulation': ['simulate', 'monte_carlo'],
    'oracles': [],
    'demodata': [],
    'utils': [],
}

from networkx_algo_window_mdp import bp_program
from networkx_algo_window_mdp import demodata
from networkx_algo_window_mdp import graph_analysis
from networkx_algo_window_mdp import mdp_values
from networkx_algo_window_mdp import model
from networkx_algo_window_mdp import oracles
from networkx_algo_window_mdp import simplex
from networkx_algo_window_mdp import simulation
from networkx_algo_window_mdp import strategy
from networkx_algo_window_mdp import synthesis
from networkx_algo_window_mdp import utils
from networkx_algo_window_mdp import window_games
from networkx_algo_window_mdp import wmdp_io

from networkx_algo_window_mdp.graph_analysis import (collapse_mecs,
                                                     mec_decomposition,)
from networkx_algo_window_mdp.model import (GuaranteeQuery, MdpModel,
                                            ObjectiveSpec, WindowMdpError,)
from networkx_algo_window_mdp.simulation import (monte_carlo, simulate,)
from networkx_algo_window_mdp.strategy import (MealyStrategy, read_strategy,
                                               write_strategy,)
from networkx_algo_window_mdp.synthesis import (decide_bas, decide_bp,
                                                decide_bwc, solve, synthesize,)
from networkx_algo_window_mdp.wmdp_io import (format_mdp, parse_mdp, read_mdp,
                                              write_mdp,)

__all__ = ['GuaranteeQuery', 'MdpModel', 'MealyStrategy', 'ObjectiveSpec',
           'WindowMdpError', 'bp_program', 'collapse_mecs', 'decide_bas',
           'decide_bp', 'decide_bwc', 'demodata', 'format_mdp',
           'graph_analysis', 'mdp_values', 'mec_decomposition', 'model',
           'monte_carlo', 'oracles', 'parse_mdp', 'read_mdp',
           'read_strategy', 'simplex', 'simulate', 'simulation', 'solve',
           'strategy', 'synthesis', 'utils', 'window_games', 'wmdp_io',
           'write_mdp', 'write_strategy', 'synthesize']
