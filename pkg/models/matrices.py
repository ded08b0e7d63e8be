'''
Labelled matrices of expressions and the linear algebra the analyses need.

Every operation takes a mode: SYMBOLIC works over the field of rational
functions in the matrix's variables (sympy DomainMatrix, fraction-free where
possible), while an AtPoint mode evaluates the entries first and works over the
rationals (exact backend) or over mpmath big-floats with a relative pivot
threshold (bigfloat backend).
'''

import logging
from functools import reduce

import mpmath
import sympy
from sympy.polys.matrices import DomainMatrix

from models.errors import (WebRankError, ExactUnsupported, Inconsistent,
                           Singular, NonSquare)
from models.symbolic import (EXACT, BIGFLOAT, Evaluator, is_rational,
                             precision)

logger = logging.getLogger('SystemLogger.matrices')

SYMBOLIC = 'symbolic'


class AtPoint(object):
    '''
    Evaluate-then-eliminate mode. One instance is meant to be shared by every
    matrix evaluated at the same point so that subexpressions are computed once.
    '''

    def __init__(self, point, backend=EXACT, digits=50, tolerance='1e-20'):
        self.point = point
        self.backend = backend
        self.digits = digits
        self.tolerance = tolerance
        self.evaluator = Evaluator(point, backend, digits)

    def values(self, matrix):
        return [[self.evaluator(entry) for entry in row] for row in matrix.rows]

    def vector(self, entries):
        return [self.evaluator(entry) for entry in entries]


class SymbolicMatrix(object):
    def __init__(self, rows, row_labels=None, column_labels=None, columns=None):
        self.rows = tuple(tuple(sympy.sympify(entry) for entry in row) for row in rows)
        if columns is None:
            columns = len(self.rows[0]) if self.rows else 0
        if any(len(row) != columns for row in self.rows):
            raise WebRankError('ragged matrix rows')
        self.columns = columns
        self.row_labels = tuple(row_labels) if row_labels is not None else tuple(range(len(self.rows)))
        self.column_labels = tuple(column_labels) if column_labels is not None else tuple(range(columns))
        if len(self.row_labels) != len(self.rows) or len(self.column_labels) != columns:
            raise WebRankError('label count does not match the matrix shape')

    @classmethod
    def identity(cls, size):
        return cls([[1 if i == j else 0 for j in range(size)] for i in range(size)])

    @classmethod
    def vstack(cls, blocks, columns=None):
        blocks = list(blocks)
        if columns is None:
            columns = blocks[0].columns if blocks else 0
        rows, labels = [], []
        column_labels = None
        for block in blocks:
            if block.columns != columns:
                raise WebRankError('column mismatch while stacking blocks')
            rows.extend(block.rows)
            labels.extend(block.row_labels)
            column_labels = column_labels or block.column_labels
        return cls(rows, labels, column_labels, columns)

    @classmethod
    def hstack(cls, blocks, row_count=None):
        blocks = list(blocks)
        if row_count is None:
            row_count = len(blocks[0].rows) if blocks else 0
        rows = [[] for _ in range(row_count)]
        labels = []
        for block in blocks:
            if len(block.rows) != row_count:
                raise WebRankError('row mismatch while joining blocks')
            for target, row in zip(rows, block.rows):
                target.extend(row)
            labels.extend(block.column_labels)
        row_labels = blocks[0].row_labels if blocks else None
        return cls(rows, row_labels, labels, len(labels))

    @property
    def shape(self):
        return len(self.rows), self.columns

    def __getitem__(self, position):
        row, column = position
        return self.rows[row][column]

    def column(self, index):
        return [row[index] for row in self.rows]

    def apply(self, vector):
        '''Matrix times vector, as a list of expressions.'''
        if len(vector) != self.columns:
            raise WebRankError('vector length does not match the column count')
        return [sympy.Add(*[entry * value for entry, value in zip(row, vector)
                            if entry != 0 and value != 0])
                for row in self.rows]

    def is_rational(self):
        return all(is_rational(entry) for row in self.rows for entry in row)

    def is_zero(self):
        return all(sympy.cancel(entry) == 0 if is_rational(entry) else entry == 0
                   for row in self.rows for entry in row)

    def free_symbols(self):
        found = set()
        for row in self.rows:
            for entry in row:
                found |= entry.free_symbols
        return sorted(found, key=lambda symbol: symbol.name)

    def to_json(self):
        return {
            'rows': [str(label) for label in self.row_labels],
            'columns': [str(label) for label in self.column_labels],
            'entries': [[sympy.sstr(entry) for entry in row] for row in self.rows],
        }

    def __repr__(self):
        return 'SymbolicMatrix({}x{})'.format(*self.shape)


def _require_rational(rows):
    for row in rows:
        for entry in row:
            if not is_rational(entry):
                raise ExactUnsupported('symbolic linear algebra needs rational entries, got {}'.format(entry))


def _field_for(rows):
    generators = set()
    for row in rows:
        for entry in row:
            generators |= entry.free_symbols
    generators = sorted(generators, key=lambda symbol: symbol.name)
    if not generators:
        return sympy.QQ
    return sympy.QQ.frac_field(*generators)


def _domain_matrix(rows, columns, domain):
    return DomainMatrix([[domain.from_sympy(sympy.sympify(entry)) for entry in row]
                         for row in rows], (len(rows), columns), domain)


def _exact_echelon(rows, columns):
    '''Reduced row echelon form over Q or Q(x): (sympy rows, pivot columns).'''
    if not rows or not columns:
        return [list(row) for row in rows], ()
    domain = _field_for(rows)
    reduced, pivots = _domain_matrix(rows, columns, domain).rref()
    reduced = reduced.to_Matrix()
    return [list(reduced.row(index)) for index in range(reduced.rows)], tuple(pivots)


def _float_echelon(rows, columns, tolerance):
    '''
    Gauss-Jordan elimination on mpmath values with scaled partial pivoting. A
    candidate pivot is negligible when it is below tolerance times the largest
    magnitude of its original row.
    '''
    table = [list(row) for row in rows]
    scales = [max([abs(value) for value in row] or [mpmath.mpf(0)]) for row in table]
    pivots = []
    current = 0
    for column in range(columns):
        if current == len(table):
            break
        best, best_ratio = None, mpmath.mpf(0)
        for index in range(current, len(table)):
            if scales[index] == 0:
                continue
            ratio = abs(table[index][column]) / scales[index]
            if ratio > best_ratio:
                best, best_ratio = index, ratio
        if best is None or best_ratio <= tolerance:
            for index in range(current, len(table)):
                table[index][column] = mpmath.mpf(0)
            continue
        table[current], table[best] = table[best], table[current]
        scales[current], scales[best] = scales[best], scales[current]
        pivot = table[current][column]
        table[current] = [value / pivot for value in table[current]]
        for index in range(len(table)):
            if index == current:
                continue
            factor = table[index][column]
            if factor != 0:
                table[index] = [value - factor * lead
                                for value, lead in zip(table[index], table[current])]
        pivots.append(column)
        current += 1
    return table, tuple(pivots)


def echelon(matrix, mode=SYMBOLIC, augment=None):
    '''
    Row-reduce the matrix, optionally augmented with a right-hand side column.
    Returns (rows, pivots, zero, one) in the mode's arithmetic.
    '''
    rows, columns = _values(matrix, mode)
    if augment is not None:
        rows, columns = _augmented(rows, columns, _vector_values(augment, mode))
    return _echelon_rows(rows, columns, mode)


def _augmented(rows, columns, extra):
    if len(extra) != len(rows):
        raise WebRankError('right-hand side length does not match the row count')
    return [list(row) + [value] for row, value in zip(rows, extra)], columns + 1


def _echelon_rows(rows, columns, mode):
    if isinstance(mode, AtPoint) and mode.backend == BIGFLOAT:
        with precision(mode.digits):
            tolerance = mpmath.mpf(mode.tolerance)
            reduced, pivots = _float_echelon(rows, columns, tolerance)
        return reduced, pivots, mpmath.mpf(0), mpmath.mpf(1)
    if mode == SYMBOLIC:
        _require_rational(rows)
    reduced, pivots = _exact_echelon(rows, columns)
    return reduced, pivots, sympy.Integer(0), sympy.Integer(1)


def _values(matrix, mode):
    if isinstance(mode, AtPoint):
        return mode.values(matrix), matrix.columns
    if mode != SYMBOLIC:
        raise WebRankError('unknown linear algebra mode {!r}'.format(mode))
    return [list(row) for row in matrix.rows], matrix.columns


def _vector_values(vector, mode):
    if isinstance(mode, AtPoint):
        return mode.vector(vector)
    return [sympy.sympify(value) for value in vector]


def rank(matrix, mode=SYMBOLIC):
    rows, columns = matrix.shape
    if rows == 0 or columns == 0:
        return 0
    if mode == SYMBOLIC:
        _require_rational(matrix.rows)
        return _domain_matrix(matrix.rows, columns, _field_for(matrix.rows)).rank()
    return len(echelon(matrix, mode)[1])


def _clear_denominators(vector):
    vector = [sympy.cancel(entry) for entry in vector]
    denominators = [sympy.fraction(entry)[1] for entry in vector]
    common = reduce(sympy.lcm, denominators, sympy.Integer(1))
    if common == 1:
        return vector
    return [sympy.cancel(entry * common) for entry in vector]


def kernel_basis(matrix, mode=SYMBOLIC):
    '''
    Echelon basis of the right kernel: one vector per free column, carrying 1
    in that column. Symbolic vectors are cleared of denominators.
    '''
    basis = _kernel(echelon(matrix, mode), matrix.columns)
    if mode == SYMBOLIC:
        basis = [_clear_denominators(vector) for vector in basis]
    return basis


def _kernel(elimination, columns):
    reduced, pivots, zero, one = elimination
    basis = []
    for free in (column for column in range(columns) if column not in pivots):
        vector = [zero] * columns
        vector[free] = one
        for row, pivot in enumerate(pivots):
            vector[pivot] = -reduced[row][free]
        basis.append(vector)
    return basis


def solve(matrix, rhs, mode=SYMBOLIC, unique=False):
    '''
    One solution of matrix·x = rhs (free unknowns set to zero). With unique=True
    a rank-deficient matrix raises Singular.
    '''
    solution = _solution(echelon(matrix, mode, augment=rhs), matrix.columns, unique)
    if mode == SYMBOLIC:
        solution = [sympy.cancel(entry) for entry in solution]
    return solution


def _solution(elimination, columns, unique):
    reduced, pivots, zero, one = elimination
    if columns in pivots:
        raise Inconsistent('the linear system has no solution')
    if unique and len(pivots) < columns:
        raise Singular('the linear system has {} free unknowns'.format(columns - len(pivots)))
    solution = [zero] * columns
    for row, pivot in enumerate(pivots):
        solution[pivot] = reduced[row][columns]
    return solution


def kernel_at(values, columns, mode):
    '''kernel_basis for rows the AtPoint mode has already evaluated; also returns the pivots.'''
    elimination = _echelon_rows([list(row) for row in values], columns, mode)
    return _kernel(elimination, columns), elimination[1]


def solve_at(values, columns, rhs, mode, unique=False):
    '''solve for rows and right-hand side already evaluated at the mode's point.'''
    rows, width = _augmented(values, columns, list(rhs))
    return _solution(_echelon_rows(rows, width, mode), columns, unique)


def _cofactor_determinant(rows):
    if len(rows) == 1:
        return rows[0][0]
    total = sympy.Integer(0)
    for column, entry in enumerate(rows[0]):
        if entry == 0:
            continue
        minor = [row[:column] + row[column + 1:] for row in rows[1:]]
        sign = -1 if column % 2 else 1
        total += sign * entry * _cofactor_determinant(minor)
    return total


def determinant(matrix):
    rows, columns = matrix.shape
    if rows != columns:
        raise NonSquare('determinant of a {}x{} matrix'.format(rows, columns))
    if rows == 0:
        return sympy.Integer(1)
    if not matrix.is_rational():
        if rows <= 4:
            return _cofactor_determinant([list(row) for row in matrix.rows])
        return sympy.Matrix([list(row) for row in matrix.rows]).det(method='berkowitz')
    generators = matrix.free_symbols()
    polynomial = all(entry.is_polynomial(*generators) for row in matrix.rows for entry in row)
    if not generators:
        domain = sympy.QQ
    elif polynomial:
        domain = sympy.QQ.poly_ring(*generators)
    else:
        domain = sympy.QQ.frac_field(*generators)
    value = _domain_matrix(matrix.rows, columns, domain).det()
    return sympy.cancel(domain.to_sympy(value))
