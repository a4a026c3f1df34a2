"""
Exact linear programming over :class:`fractions.Fraction`.

A two phase tableau simplex with Bland's rule. Every pivot is exact, so the
reported optimum satisfies the constraints with zero residual.

Example
-------
>>> from networkx_algo_window_mdp.simplex import LinearProgram, solve_lp
>>> lp = LinearProgram()
>>> lp.add_variable('x')
>>> lp.add_variable('y')
>>> lp.add_constraint({'x': 1}, '<=', 1)
>>> lp.add_constraint({'y': 1}, '<=', 2)
>>> lp.maximize({'x': 1, 'y': 1})
>>> sol = solve_lp(lp)
>>> sol.status, sol.objective, sol.values['x'], sol.values['y']
('optimal', Fraction(3, 1), Fraction(1, 1), Fraction(2, 1))
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional
from ._types import as_rational, format_rational
from .model import WindowMdpError

logger = logging.getLogger(__name__)

__all__ = ['LinearProgram', 'LpSolution', 'Constraint', 'solve_lp',
           'MalformedProgramError']

RELATIONS = {'<=': '<=', '=': '=', '==': '=', '>=': '>='}


class MalformedProgramError(WindowMdpError, ValueError):
    """
    Raised for programs that reference undeclared variables, declare a
    variable twice or use non-rational coefficients
    """
    pass


@dataclass
class Constraint:
    coeffs: Dict[str, Fraction]
    relation: str
    rhs: Fraction
    label: Optional[str] = None

    def lhs_value(self, assignment):
        return sum((c * assignment.get(name, 0)
                    for name, c in self.coeffs.items()), Fraction(0))

    def holds(self, assignment):
        lhs = self.lhs_value(assignment)
        if self.relation == '<=':
            return lhs <= self.rhs
        if self.relation == '>=':
            return lhs >= self.rhs
        return lhs == self.rhs


def _format_terms(coeffs):
    if not coeffs:
        return '0/1'
    parts = []
    for name, coef in coeffs.items():
        parts.append('{} {}'.format(format_rational(coef), name))
    return ' + '.join(parts)


class LinearProgram:
    """
    Variables are non-negative unless declared ``free``. The objective is
    optional; without it :func:`solve_lp` only searches a feasible point.
    """

    def __init__(self, name=None):
        self.name = name
        self.variables = []
        self.free = set()
        self.constraints = []
        self.objective = None
        self.sense = 'max'
        self._declared = set()

    def __repr__(self):
        return '<LinearProgram({}) vars={} constraints={}>'.format(
            self.name or '', len(self.variables), len(self.constraints))

    def add_variable(self, name, free=False):
        if name in self._declared:
            raise MalformedProgramError(
                'variable {} declared twice'.format(name))
        self._declared.add(name)
        self.variables.append(name)
        if free:
            self.free.add(name)
        return name

    def _coerce(self, coeffs):
        row = {}
        for name, coef in coeffs.items():
            if name not in self._declared:
                raise MalformedProgramError(
                    'undeclared variable {}'.format(name))
            try:
                coef = as_rational(coef)
            except (TypeError, ValueError) as ex:
                raise MalformedProgramError(
                    'coefficient of {}: {}'.format(name, ex))
            if coef != 0:
                row[name] = row.get(name, Fraction(0)) + coef
        return row

    def add_constraint(self, coeffs, relation, rhs, label=None):
        """
        Add ``sum(coeffs[x] * x) <relation> rhs``.
        """
        if relation not in RELATIONS:
            raise KeyError(relation)
        try:
            rhs = as_rational(rhs)
        except (TypeError, ValueError) as ex:
            raise MalformedProgramError('right hand side: {}'.format(ex))
        if label is None:
            label = 'c{}'.format(len(self.constraints))
        con = Constraint(self._coerce(coeffs), RELATIONS[relation], rhs, label)
        self.constraints.append(con)
        return con

    def maximize(self, coeffs):
        self.objective = self._coerce(coeffs)
        self.sense = 'max'

    def minimize(self, coeffs):
        self.objective = self._coerce(coeffs)
        self.sense = 'min'

    def objective_value(self, assignment):
        if self.objective is None:
            return None
        return sum((c * assignment.get(name, 0)
                    for name, c in self.objective.items()), Fraction(0))

    def violations(self, assignment):
        """
        Labels of the constraints and sign conditions ``assignment`` breaks.
        """
        bad = [con.label for con in self.constraints
               if not con.holds(assignment)]
        bad += ['{} >= 0'.format(name) for name in self.variables
                if name not in self.free and assignment.get(name, 0) < 0]
        return bad

    def dumps(self):
        """
        Human readable program, one constraint per line, rationals as ``n/d``.

        Example
        -------
        >>> lp = LinearProgram('demo')
        >>> lp.add_variable('x')
        >>> lp.add_constraint({'x': 2}, '<=', '3/2', label='cap')
        >>> lp.maximize({'x': 1})
        >>> print(lp.dumps())
        # program demo
        maximize 1/1 x
        cap: 2/1 x <= 3/2
        bounds: x >= 0
        """
        lines = ['# program {}'.format(self.name or '')]
        if self.objective is not None:
            word = 'maximize' if self.sense == 'max' else 'minimize'
            lines.append('{} {}'.format(word, _format_terms(self.objective)))
        for con in self.constraints:
            lines.append('{}: {} {} {}'.format(
                con.label, _format_terms(con.coeffs), con.relation,
                format_rational(con.rhs)))
        bounds = ['{} >= 0'.format(v) if v not in self.free
                  else '{} free'.format(v) for v in self.variables]
        if bounds:
            lines.append('bounds: ' + ', '.join(bounds))
        return '\n'.join(lines)


@dataclass
class LpSolution:
    """
    ``status`` is ``"optimal"``, ``"feasible"`` (no objective),
    ``"infeasible"`` or ``"unbounded"``.
    """
    status: str
    values: Dict[str, Fraction] = field(default_factory=dict)
    objective: Optional[Fraction] = None

    @property
    def is_feasible(self):
        return self.status in ('optimal', 'feasible', 'unbounded')


class _Tableau:
    """
    Dense tableau ``A x = b`` with ``b >= 0`` and a basis, pivoted with
    Bland's rule.
    """

    def __init__(self, rows, rhs, basis, num_cols):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.num_cols = num_cols

    def reduced_costs(self, cost):
        # c_j - c_B B^-1 A_j for a maximization
        red = list(cost)
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.rows[i]
                for j in range(self.num_cols):
                    if row[j]:
                        red[j] -= cb * row[j]
        return red

    def pivot(self, r, c):
        row = self.rows[r]
        piv = row[c]
        if piv != 1:
            self.rows[r] = row = [x / piv for x in row]
            self.rhs[r] /= piv
        for i in range(len(self.rows)):
            if i == r:
                continue
            f = self.rows[i][c]
            if f:
                other = self.rows[i]
                self.rows[i] = [a - f * b for a, b in zip(other, row)]
                self.rhs[i] -= f * self.rhs[r]
        self.basis[r] = c

    def optimize(self, cost, allowed):
        """
        Maximize ``cost`` over the columns in ``allowed``. Returns
        ``"optimal"`` or ``"unbounded"``.
        """
        num_pivots = 0
        while True:
            red = self.reduced_costs(cost)
            entering = next((j for j in range(self.num_cols)
                             if allowed[j] and red[j] > 0), None)
            if entering is None:
                logger.debug('simplex optimal after %d pivots', num_pivots)
                return 'optimal'
            best = None
            for i, row in enumerate(self.rows):
                if row[entering] > 0:
                    key = (self.rhs[i] / row[entering], self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return 'unbounded'
            self.pivot(best[1], entering)
            num_pivots += 1

    def point(self):
        x = [Fraction(0)] * self.num_cols
        for i, b in enumerate(self.basis):
            x[b] = self.rhs[i]
        return x


def solve_lp(lp):
    """
    Solve ``lp`` exactly.

    Returns
    -------
    LpSolution

    Example
    -------
    >>> lp = LinearProgram()
    >>> lp.add_variable('x')
    >>> lp.add_constraint({'x': 1}, '>=', 1)
    >>> lp.add_constraint({'x': 1}, '<=', 0)
    >>> solve_lp(lp).status
    'infeasible'
    >>> lp = LinearProgram()
    >>> lp.add_variable('x')
    >>> lp.add_constraint({'x': 1}, '<=', 3)
    >>> lp.maximize({'x': 1})
    >>> solve_lp(lp).values
    {'x': Fraction(3, 1)}
    """
    if not isinstance(lp, LinearProgram):
        raise MalformedProgramError('expected a LinearProgram')

    # Column layout: structural columns (free variables split in two),
    # slack / surplus columns, then artificial columns.
    columns = {}
    num_cols = 0
    for name in lp.variables:
        if name in lp.free:
            columns[name] = (num_cols, num_cols + 1)
            num_cols += 2
        else:
            columns[name] = (num_cols, None)
            num_cols += 1

    dense = []
    rhs = []
    kinds = []
    for con in lp.constraints:
        row = {}
        for name, coef in con.coeffs.items():
            pos, neg = columns[name]
            row[pos] = coef
            if neg is not None:
                row[neg] = -coef
        relation, b = con.relation, con.rhs
        if b < 0:
            row = {j: -c for j, c in row.items()}
            b = -b
            relation = {'<=': '>=', '>=': '<=', '=': '='}[relation]
        dense.append(row)
        rhs.append(b)
        kinds.append(relation)

    slack_of = {}
    for i, relation in enumerate(kinds):
        if relation != '=':
            slack_of[i] = num_cols
            num_cols += 1
    art_of = {}
    for i, relation in enumerate(kinds):
        if relation != '<=':
            art_of[i] = num_cols
            num_cols += 1
    num_art_start = num_cols - len(art_of)

    rows = []
    basis = []
    for i, sparse in enumerate(dense):
        row = [Fraction(0)] * num_cols
        for j, c in sparse.items():
            row[j] = Fraction(c)
        if i in slack_of:
            row[slack_of[i]] = Fraction(1 if kinds[i] == '<=' else -1)
        if i in art_of:
            row[art_of[i]] = Fraction(1)
            basis.append(art_of[i])
        else:
            basis.append(slack_of[i])
        rows.append(row)
    tableau = _Tableau(rows, list(rhs), basis, num_cols)
    logger.debug('solving %r with %d columns', lp, num_cols)

    allowed = [True] * num_cols
    if art_of:
        phase1 = [Fraction(0)] * num_cols
        for j in art_of.values():
            phase1[j] = Fraction(-1)
        tableau.optimize(phase1, allowed)
        infeas = sum((tableau.rhs[i] for i, b in enumerate(tableau.basis)
                      if b >= num_art_start), Fraction(0))
        if infeas > 0:
            return LpSolution('infeasible')
        # Drive the remaining (zero valued) artificials out of the basis and
        # drop rows that turn out to be redundant.
        r = 0
        while r < len(tableau.rows):
            if tableau.basis[r] >= num_art_start:
                col = next((j for j in range(num_art_start)
                            if tableau.rows[r][j] != 0), None)
                if col is None:
                    del tableau.rows[r]
                    del tableau.rhs[r]
                    del tableau.basis[r]
                    continue
                tableau.pivot(r, col)
            r += 1
        for j in range(num_art_start, num_cols):
            allowed[j] = False

    if lp.objective is None:
        status = 'feasible'
    else:
        sign = 1 if lp.sense == 'max' else -1
        cost = [Fraction(0)] * num_cols
        for name, coef in lp.objective.items():
            pos, neg = columns[name]
            cost[pos] = sign * coef
            if neg is not None:
                cost[neg] = -sign * coef
        status = tableau.optimize(cost, allowed)
    x = tableau.point()

    values = {}
    for name in lp.variables:
        pos, neg = columns[name]
        values[name] = x[pos] - (x[neg] if neg is not None else 0)
    objective = lp.objective_value(values)
    if status == 'unbounded':
        objective = None
    return LpSolution(status, values, objective)
