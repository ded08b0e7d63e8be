'''
Webs of foliations: a d-web of codimension q in dimension n is d foliations,
each given by q generator expressions in the n ambient variables.
'''

import json
import logging
from dataclasses import dataclass, field

import sympy

from models.errors import (WebRankError, ParseError, WebFormatError,
                           WrongCodimension, DivisionByZero, DomainError)
from models.matrices import SymbolicMatrix, AtPoint, rank, determinant, SYMBOLIC
from models.symbolic import (EXACT, BIGFLOAT, parse_expression, is_rational,
                             canonical, subsets, expression_text)

logger = logging.getLogger('SystemLogger.webmodel')


@dataclass(frozen=True)
class Foliation:
    generators: tuple

    @property
    def q(self):
        return len(self.generators)

    def jacobian(self, symbols):
        '''q x n matrix of partial derivatives.'''
        return [[sympy.diff(generator, symbol) for symbol in symbols]
                for generator in self.generators]

    def is_rational(self):
        return all(is_rational(generator) for generator in self.generators)


@dataclass(frozen=True)
class Web:
    name: str
    variables: tuple
    codimension: int
    foliations: tuple
    center: tuple = None
    source: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        n, q = len(self.variables), self.codimension
        if len(set(self.variables)) != n:
            raise WebFormatError('variable names must be distinct')
        if n < 2:
            raise WebFormatError('a web needs at least two ambient variables')
        if not 1 <= q <= n - 1:
            raise WebFormatError('codimension must lie between 1 and n-1, got {}'.format(q))
        if not self.foliations:
            raise WebFormatError('a web needs at least one foliation')
        for index, foliation in enumerate(self.foliations, 1):
            if foliation.q != q:
                raise WebFormatError('foliation {} has {} generators, expected {}'.format(
                    index, foliation.q, q))
        if self.center is not None and len(self.center) != n:
            raise WebFormatError('center must have one coordinate per variable')

    @property
    def n(self):
        return len(self.variables)

    @property
    def q(self):
        return self.codimension

    @property
    def d(self):
        return len(self.foliations)

    @property
    def symbols(self):
        return tuple(sympy.Symbol(name) for name in self.variables)

    def origin(self):
        if self.center is not None:
            return tuple(self.center)
        return tuple(sympy.Integer(0) for _ in self.variables)

    def is_rational(self):
        return all(foliation.is_rational() for foliation in self.foliations)

    def to_dict(self):
        data = {
            'name': self.name,
            'dimension': self.n,
            'codimension': self.q,
            'variables': list(self.variables),
            'foliations': [{'generators': [expression_text(g) for g in foliation.generators]}
                           for foliation in self.foliations],
        }
        if self.center is not None:
            data['center'] = [str(value) for value in self.center]
        return data

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise WebFormatError('a web file holds a JSON object')
        for key in ('dimension', 'codimension', 'variables', 'foliations'):
            if key not in data:
                raise WebFormatError('missing key {!r}'.format(key))
        if not isinstance(data['variables'], list) or not isinstance(data['foliations'], list):
            raise WebFormatError('"variables" and "foliations" must be lists')
        for key in ('dimension', 'codimension'):
            if not isinstance(data[key], int) or isinstance(data[key], bool):
                raise WebFormatError('{!r} must be an integer'.format(key))
        variables = tuple(data['variables'])
        if not all(isinstance(name, str) and name.isidentifier() and name.isascii()
                   for name in variables):
            raise WebFormatError('variables must be ASCII identifiers')
        if len(set(variables)) != len(variables):
            raise WebFormatError('variable names must be distinct')
        if data['dimension'] != len(variables):
            raise WebFormatError('dimension {} does not match {} variables'.format(
                data['dimension'], len(variables)))
        foliations = []
        for entry in data['foliations']:
            if not isinstance(entry, dict) or not isinstance(entry.get('generators'), list):
                raise WebFormatError('each foliation needs a "generators" list')
            if not all(isinstance(text, str) for text in entry['generators']):
                raise WebFormatError('generators are written as strings')
            foliations.append(Foliation(tuple(parse_expression(text, variables)
                                              for text in entry['generators'])))
        center = data.get('center')
        if center is not None:
            try:
                center = tuple(sympy.Rational(str(value)) for value in center)
            except (TypeError, ValueError, sympy.SympifyError):
                raise WebFormatError('center coordinates must be rational numbers')
        return cls(name=data.get('name', 'web'), variables=variables,
                   codimension=data['codimension'], foliations=tuple(foliations),
                   center=center, source=data)


def load_web(path):
    with open(path, 'r') as web_file:
        text = web_file.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as error:
        raise ParseError(error.msg, error.lineno, error.colno)
    web = Web.from_dict(data)
    logger.info('loaded web %s: n=%s q=%s d=%s', web.name, web.n, web.q, web.d)
    return web


@dataclass
class ValidationReport:
    failures: list = field(default_factory=list)
    points: list = field(default_factory=list)

    @property
    def valid(self):
        return not self.failures

    def to_dict(self):
        return {'valid': self.valid, 'failures': self.failures,
                'points': [{name: str(value) for name, value in point.items()}
                           for point in self.points]}


def _backend_for(web):
    return EXACT if web.is_rational() else BIGFLOAT


def validate(web, points, digits=50, tolerance='1e-20'):
    '''
    Regularity of every foliation and pairwise transversality at the points.
    Only failures that hold at every point are reported as failures of the web.
    '''
    backend = _backend_for(web)
    symbols = web.symbols
    jacobians = [foliation.jacobian(symbols) for foliation in web.foliations]
    regular_failures = {}
    pair_failures = {}
    for point in points:
        mode = AtPoint(point, backend, digits, tolerance)
        for index, jacobian in enumerate(jacobians):
            try:
                ok = rank(SymbolicMatrix(jacobian), mode) == web.q
            except (DivisionByZero, DomainError):
                ok = False
            if not ok:
                regular_failures.setdefault(index, []).append(point)
        expected = min(2 * web.q, web.n)
        for i, j in subsets(web.d, 2):
            try:
                ok = rank(SymbolicMatrix(jacobians[i] + jacobians[j]), mode) == expected
            except (DivisionByZero, DomainError):
                ok = False
            if not ok:
                pair_failures.setdefault((i, j), []).append(point)
    report = ValidationReport(points=list(points))
    for index, failed in sorted(regular_failures.items()):
        if len(failed) == len(points):
            report.failures.append({'kind': 'regularity', 'foliations': [index + 1],
                                    'point': _point_text(failed[0])})
    for (i, j), failed in sorted(pair_failures.items()):
        if len(failed) == len(points):
            report.failures.append({'kind': 'transversality', 'foliations': [i + 1, j + 1],
                                    'point': _point_text(failed[0])})
    for failure in report.failures:
        logger.warning('web %s fails %s check for foliations %s', web.name,
                       failure['kind'], failure['foliations'])
    return report


def _point_text(point):
    return {str(name): str(value) for name, value in point.items()}


def jacobian_minor(web, i, rows, columns):
    '''
    Determinant of the p x p block of the jacobian of foliation i with
    generator rows and variable columns given as increasing 0-based tuples.
    '''
    if len(rows) != len(columns):
        raise WebRankError('minor needs as many rows as columns')
    generators = web.foliations[i].generators
    symbols = web.symbols
    block = [[sympy.diff(generators[alpha], symbols[lam]) for lam in columns]
             for alpha in rows]
    return determinant(SymbolicMatrix(block))


def tangent_fields(web):
    '''
    For curve webs, the field spanning each foliation: component lambda is
    (-1)^lambda times the maximal minor omitting column lambda.
    '''
    if web.q != web.n - 1:
        raise WrongCodimension('tangent fields need q = n-1, got q={} n={}'.format(web.q, web.n))
    fields_ = []
    all_rows = tuple(range(web.q))
    for i in range(web.d):
        vector = []
        for lam in range(web.n):
            columns = tuple(column for column in range(web.n) if column != lam)
            sign = -1 if lam % 2 else 1
            vector.append(sign * jacobian_minor(web, i, all_rows, columns))
        fields_.append(vector)
    return fields_


def lie_bracket(first, second, symbols):
    return [sympy.Add(*[first[mu] * sympy.diff(second[lam], symbols[mu])
                        - second[mu] * sympy.diff(first[lam], symbols[mu])
                        for mu in range(len(symbols))])
            for lam in range(len(symbols))]


def bracket_test(web, i, j, points=None, digits=50, tolerance='1e-20'):
    '''
    True when [X_i, X_j] lies in the span of X_i and X_j. Rational webs are
    decided symbolically; otherwise by majority over the sample points.
    '''
    if web.q != web.n - 1:
        raise WrongCodimension('bracket test needs q = n-1, got q={} n={}'.format(web.q, web.n))
    if i == j:
        raise WebRankError('bracket test needs two distinct foliations')
    fields_ = tangent_fields(web)
    first, second = fields_[i], fields_[j]
    matrix = SymbolicMatrix([first, second, lie_bracket(first, second, web.symbols)])
    if web.is_rational():
        return rank(matrix, SYMBOLIC) <= 2
    votes = []
    for point in points or []:
        try:
            votes.append(rank(matrix, AtPoint(point, BIGFLOAT, digits, tolerance)) <= 2)
        except (DivisionByZero, DomainError):
            continue
    if not votes:
        raise WebRankError('no sample point allowed a numeric bracket test')
    return sum(votes) * 2 > len(votes)


def is_affine(web):
    '''Every generator is a polynomial of degree at most one.'''
    symbols = web.symbols
    for foliation in web.foliations:
        for generator in foliation.generators:
            if not is_rational(generator):
                return False
            reduced = canonical(generator)
            if not reduced.is_polynomial(*symbols):
                return False
            if sympy.Poly(reduced, *symbols).total_degree() > 1:
                return False
    return True
