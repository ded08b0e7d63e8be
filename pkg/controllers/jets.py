'''
Jet calculus of the trace-zero equations.

For a foliation with generators u = (u_1..u_q) and a weight J, the derivatives
of (f o u)·J expand as sum over K of M_L^K(u, J)·(f'_K o u). The coefficient
tables, the Koszul differentials on symbols, and the block matrices P, Q, M of
the plain and closed linear systems are built here.
'''

import logging
from functools import lru_cache
from math import comb, factorial

import sympy

from models.errors import WebRankError
from models.matrices import SymbolicMatrix, kernel_basis, SYMBOLIC
from models.symbolic import (MultiIndex, multi_indices, subsets, derive_multi,
                             is_rational)
from models.webmodel import jacobian_minor
from controllers.combinat import z

logger = logging.getLogger('SystemLogger.jets')


def _tidy(expression):
    if expression == 0:
        return sympy.Integer(0)
    if is_rational(expression):
        return sympy.cancel(expression)
    return expression


class CoeffTable(object):
    '''M_L^K for |K| <= |L| <= order; absent entries are zero.'''

    def __init__(self, n, q, order, entries):
        self.n = n
        self.q = q
        self.order = order
        self.entries = entries

    def get(self, L, K):
        return self.entries.get((MultiIndex(L), MultiIndex(K)), sympy.Integer(0))

    def __getitem__(self, key):
        return self.get(*key)

    def __len__(self):
        return len(self.entries)


def m_coeffs(foliation, weight, max_order, symbols):
    '''
    Fill the table order by order. Each L of positive order is reached from
    L - 1_lambda where lambda is its first nonzero position:
    M_L^K = d_lambda M_{L-1}^K + sum over alpha of M_{L-1}^{K-1_alpha} d_lambda u_alpha.
    '''
    if max_order < 0:
        raise WebRankError('max_order must be non-negative')
    n, q = len(symbols), foliation.q
    gradients = [[_tidy(sympy.diff(generator, symbol)) for symbol in symbols]
                 for generator in foliation.generators]
    zero_n, zero_q = MultiIndex.zero(n), MultiIndex.zero(q)
    entries = {(zero_n, zero_q): _tidy(sympy.sympify(weight))}
    for order in range(1, max_order + 1):
        for L in multi_indices(n, order):
            lam = L.first_nonzero()
            previous = L.decrement(lam)
            for degree in range(order + 1):
                for K in multi_indices(q, degree):
                    terms = []
                    if degree <= order - 1:
                        below = entries.get((previous, K))
                        if below is not None and below != 0:
                            terms.append(sympy.diff(below, symbols[lam]))
                    for alpha in range(q):
                        lower = K.decrement(alpha)
                        if lower is None:
                            continue
                        coefficient = entries.get((previous, lower))
                        if coefficient is not None and coefficient != 0 and gradients[alpha][lam] != 0:
                            terms.append(coefficient * gradients[alpha][lam])
                    value = _tidy(sympy.Add(*terms))
                    if value != 0:
                        entries[(L, K)] = value
    return CoeffTable(n, q, max_order, entries)


def _compositions(total, capacities):
    '''Tuples summing to total with entry j at most capacities[j].'''
    if not capacities:
        if total == 0:
            yield ()
        return
    for first in range(min(total, capacities[0]) + 1):
        for rest in _compositions(total - first, capacities[1:]):
            yield (first,) + rest


def contingency_tables(row_sums, column_sums):
    '''Non-negative integer tables, as lists of columns, with the given margins.'''
    if not column_sums:
        if all(value == 0 for value in row_sums):
            yield []
        return
    for column in _compositions(column_sums[0], tuple(row_sums)):
        remaining = tuple(r - used for r, used in zip(row_sums, column))
        for rest in contingency_tables(remaining, column_sums[1:]):
            yield [column] + rest


def n_coeffs_topdegree(foliation, L, K, symbols):
    '''
    N_L^K for |K| = |L|: every way of assigning the derivatives counted by L to
    the generators counted by K. A table T (rows alpha, columns lambda) with
    margins K and L weighs prod_lambda L_lambda! / prod T_alpha_lambda!.
    '''
    L, K = MultiIndex(L), MultiIndex(K)
    if L.degree != K.degree:
        raise WebRankError('top-degree coefficients need |K| = |L|')
    gradients = [[sympy.diff(generator, symbol) for symbol in symbols]
                 for generator in foliation.generators]
    total = []
    for table in contingency_tables(tuple(K), tuple(L)):
        weight = L.factorial()
        product = sympy.Integer(1)
        for lam, column in enumerate(table):
            for alpha, count in enumerate(column):
                weight //= factorial(count)
                if count:
                    product *= gradients[alpha][lam] ** count
        total.append(weight * product)
    return _tidy(sympy.Add(*total))


def m_coeffs_leibniz(foliation, weight, L, K, symbols, unit_table=None):
    '''
    M_L^K through the Leibniz rule: the sum over L1 <= L of
    binom(L, L1)·J'_{L-L1}·N_{L1}^K.
    '''
    L, K = MultiIndex(L), MultiIndex(K)
    if unit_table is None or unit_table.order < L.degree:
        unit_table = m_coeffs(foliation, 1, L.degree, symbols)
    terms = []
    for degree in range(K.degree, L.degree + 1):
        for L1 in multi_indices(len(symbols), degree):
            if not L.dominates(L1):
                continue
            n_value = unit_table.get(L1, K)
            if n_value == 0:
                continue
            multiplier = 1
            for total, part in zip(L, L1):
                multiplier *= comb(total, part)
            terms.append(multiplier * derive_multi(weight, L.minus(L1), symbols) * n_value)
    return _tidy(sympy.Add(*terms))


class CoeffCache(object):
    '''Tables keyed by (foliation, weight); a deeper request replaces a shallower table.'''

    def __init__(self):
        self.tables = {}

    def table(self, foliation, weight, order, symbols):
        key = (foliation, sympy.sympify(weight), tuple(symbols))
        cached = self.tables.get(key)
        if cached is not None and cached.order >= order:
            return cached
        table = m_coeffs(foliation, weight, order, symbols)
        self.tables[key] = table
        return table


default_cache = CoeffCache()


def koszul_labels(q, p, h):
    return [(A, K) for A in subsets(q, p) for K in multi_indices(q, h)]


def koszul_matrix(q, p, h):
    '''
    d_p from degree-h symbols of p-forms to degree h-1 symbols of (p+1)-forms in
    q variables: x^K dx_A goes to the sum over alpha not in A of
    K_alpha x^{K-1_alpha} dx_alpha ^ dx_A, with dx_alpha moved into increasing
    position.
    '''
    if not 1 <= p <= q or h < 1:
        raise WebRankError('koszul_matrix needs 1 <= p <= q and h >= 1')
    columns = koszul_labels(q, p, h)
    rows = [(A, K) for A in subsets(q, p + 1) for K in multi_indices(q, h - 1)]
    position = {label: index for index, label in enumerate(rows)}
    table = [[0] * len(columns) for _ in rows]
    for column, (A, K) in enumerate(columns):
        for alpha in range(q):
            if alpha in A or K[alpha] == 0:
                continue
            sign = -1 if sum(1 for beta in A if beta < alpha) % 2 else 1
            target = (tuple(sorted(A + (alpha,))), K.decrement(alpha))
            table[position[target]][column] += sign * K[alpha]
    return SymbolicMatrix(table, rows, columns, len(columns))


class KoszulBasis(object):
    '''
    Integer basis of closed degree-h symbols of p-forms in q variables, in
    monomial coordinates, with the free position pinned by each vector.
    '''

    def __init__(self, q, p, h, labels, vectors, pivots):
        self.q = q
        self.p = p
        self.h = h
        self.labels = labels
        self.vectors = vectors
        self.pivots = pivots

    def __len__(self):
        return len(self.vectors)

    @property
    def jet_vectors(self):
        '''Basis vectors in jet coordinates w(A,K) = K!·c(A,K).'''
        return [[value * label[1].factorial() for value, label in zip(vector, self.labels)]
                for vector in self.vectors]

    def coordinates(self, jet):
        '''Coefficients of a closed jet (sequence in label order) in this basis.'''
        result = []
        for vector, pivot in zip(self.vectors, self.pivots):
            monomial = jet[pivot] / sympy.Integer(self.labels[pivot][1].factorial())
            result.append(monomial / vector[pivot])
        return result


@lru_cache(maxsize=None)
def closed_symbol_basis(q, p, h):
    labels = koszul_labels(q, p, h)
    if h == 0 or p == q:
        vectors = [[sympy.Integer(1 if i == j else 0) for i in range(len(labels))]
                   for j in range(len(labels))]
        return KoszulBasis(q, p, h, labels, vectors, list(range(len(labels))))
    vectors = kernel_basis(koszul_matrix(q, p, h), SYMBOLIC)
    pivots = []
    for vector in vectors:
        pivots.append(next(index for index in reversed(range(len(vector)))
                           if vector[index] != 0 and all(other[index] == 0 for other in vectors
                                                         if other is not vector)))
    if len(vectors) != z(q, p, h):
        raise ArithmeticError('closed symbol basis of size {} instead of {}'.format(
            len(vectors), z(q, p, h)))
    return KoszulBasis(q, p, h, labels, vectors, pivots)


def row_labels(n, p, ell):
    return [(B, L) for B in subsets(n, p) for L in multi_indices(n, ell)]


def column_labels(d, q, p, h):
    return [(i, A, K) for A in subsets(q, p) for K in multi_indices(q, h) for i in range(d)]


def closed_column_labels(d, q, p, h):
    return [(i, j) for j in range(z(q, p, h)) for i in range(d)]


class JetMatrixSet(object):
    '''Blocks P_h^(l) for h <= l <= k and the assembled P, Q, M views.'''

    closed = False

    def __init__(self, web, p, k, blocks):
        self.web = web
        self.p = p
        self.k = k
        self.blocks = blocks

    def columns_at(self, h):
        return column_labels(self.web.d, self.web.q, self.p, h)

    def rows_at(self, ell):
        return row_labels(self.web.n, self.p, ell)

    def block(self, ell, h):
        if h <= ell:
            return self.blocks[(ell, h)]
        rows, columns = self.rows_at(ell), self.columns_at(h)
        return SymbolicMatrix([[0] * len(columns) for _ in rows], rows, columns, len(columns))

    def _check(self, k):
        k = self.k if k is None else k
        if not 0 <= k <= self.k:
            raise WebRankError('order {} outside the built range 0..{}'.format(k, self.k))
        return k

    def P(self, k=None):
        k = self._check(k)
        return self.block(k, k)

    def Q(self, k=None):
        k = self._check(k)
        rows = self.rows_at(k)
        if k == 0:
            return SymbolicMatrix([[] for _ in rows], rows, [], 0)
        return SymbolicMatrix.hstack([self.block(k, h) for h in range(k)], len(rows))

    def M(self, k=None):
        k = self._check(k)
        bands = []
        for ell in range(k + 1):
            bands.append(SymbolicMatrix.hstack([self.block(ell, h) for h in range(k + 1)],
                                               len(self.rows_at(ell))))
        return SymbolicMatrix.vstack(bands)

    def dump(self):
        return {'P[{},{}]'.format(ell, h): block.to_json()
                for (ell, h), block in sorted(self.blocks.items())}


class ClosedJetMatrixSet(JetMatrixSet):
    '''Columns re-expressed in per-foliation bases of closed symbols.'''

    closed = True

    def __init__(self, web, p, k, blocks, bases):
        super().__init__(web, p, k, blocks)
        self.bases = bases

    def columns_at(self, h):
        return closed_column_labels(self.web.d, self.web.q, self.p, h)

    def expand(self, h, vector):
        '''Closed coordinates at order h to plain jet coordinates (i,A,K).'''
        d = self.web.d
        basis = self.bases[h]
        plain = {label: sympy.Integer(0) for label in column_labels(d, self.web.q, self.p, h)}
        for (i, j), value in zip(self.columns_at(h), vector):
            if value == 0:
                continue
            for (A, K), weight in zip(basis.labels, basis.jet_vectors[j]):
                if weight != 0:
                    plain[(i, A, K)] += weight * value
        return [plain[label] for label in column_labels(d, self.web.q, self.p, h)]

    def contract(self, h, plain):
        '''Plain jet coordinates at order h (closed per foliation) to closed coordinates.'''
        labels = column_labels(self.web.d, self.web.q, self.p, h)
        lookup = dict(zip(labels, plain))
        basis = self.bases[h]
        per_foliation = {}
        for i in range(self.web.d):
            jet = [lookup[(i, A, K)] for A, K in basis.labels]
            per_foliation[i] = basis.coordinates(jet)
        return [per_foliation[i][j] for i, j in self.columns_at(h)]


def _minors(web, p):
    return {(i, A, B): jacobian_minor(web, i, A, B)
            for i in range(web.d) for A in subsets(web.q, p) for B in subsets(web.n, p)}


def _check_degree(web, p, k):
    if not 1 <= p <= web.q:
        raise WebRankError('form degree must satisfy 1 <= p <= q, got p={}'.format(p))
    if k < 0:
        raise WebRankError('jet order must be non-negative')


def build_plain(web, p, k, cache=default_cache):
    '''
    Entry at row (B,L), column (i,A,K) is M_L^K(F_i, J_{i,B}^A); rows ordered
    by B then L, columns by (A,K) then i.
    '''
    _check_degree(web, p, k)
    symbols = web.symbols
    minors = _minors(web, p)
    tables = {key: cache.table(web.foliations[key[0]], minor, k, symbols)
              for key, minor in minors.items()}
    blocks = {}
    for ell in range(k + 1):
        rows = row_labels(web.n, p, ell)
        for h in range(ell + 1):
            columns = column_labels(web.d, web.q, p, h)
            entries = [[tables[(i, A, B)].get(L, K) for (i, A, K) in columns]
                       for (B, L) in rows]
            blocks[(ell, h)] = SymbolicMatrix(entries, rows, columns, len(columns))
    logger.debug('built plain jet matrices for %s, p=%s, k=%s', web.name, p, k)
    return JetMatrixSet(web, p, k, blocks)


def build_closed(web, p, k, cache=default_cache, plain=None):
    '''
    Closed blocks: the column of foliation i and closed basis vector j is the
    combination of plain columns (i,A,K) weighted by the vector's jet
    coordinates. Every ambient row is kept.
    '''
    _check_degree(web, p, k)
    if plain is None or plain.k < k:
        plain = build_plain(web, p, k, cache)
    bases = {h: closed_symbol_basis(web.q, p, h) for h in range(k + 1)}
    blocks = {}
    for (ell, h), block in plain.blocks.items():
        if ell > k:
            continue
        index = {label: column for column, label in enumerate(block.column_labels)}
        basis = bases[h]
        jet_vectors = basis.jet_vectors
        columns = closed_column_labels(web.d, web.q, p, h)
        entries = []
        for row in block.rows:
            line = []
            for i, j in columns:
                terms = [row[index[(i, A, K)]] * weight
                         for (A, K), weight in zip(basis.labels, jet_vectors[j])
                         if weight != 0 and row[index[(i, A, K)]] != 0]
                line.append(_tidy(sympy.Add(*terms)))
            entries.append(line)
        blocks[(ell, h)] = SymbolicMatrix(entries, block.row_labels, columns, len(columns))
    logger.debug('built closed jet matrices for %s, p=%s, k=%s', web.name, p, k)
    return ClosedJetMatrixSet(web, p, k, blocks, bases)


def prolong(web, i, jet, lam):
    '''
    Chain rule d_lambda (f'_K o u_i) = sum over alpha of (f'_{K+1_alpha} o u_i)·d_lambda u_{i,alpha}.
    The jet maps (A, K) at some order h+1 to values; the result maps (A, K) at
    order h to the lambda-derivative predicted from it.
    '''
    foliation = web.foliations[i]
    symbol = web.symbols[lam]
    gradient = [sympy.diff(generator, symbol) for generator in foliation.generators]
    orders = {key[1].degree for key in jet}
    if len(orders) != 1:
        raise WebRankError('prolong needs a jet of a single order')
    h = orders.pop() - 1
    if h < 0:
        raise WebRankError('prolong needs a jet of positive order')
    p = len(next(iter(jet))[0])
    result = {}
    for A in subsets(foliation.q, p):
        for K in multi_indices(foliation.q, h):
            terms = [jet.get((A, K.increment(alpha)), 0) * gradient[alpha]
                     for alpha in range(foliation.q)]
            result[(A, K)] = sympy.Add(*terms)
    return result
