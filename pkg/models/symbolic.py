'''
Expression algebra used by every computation in the package.

Expressions are sympy trees over declared variables. This module owns the small
input language of web and relation files, differentiation along multi-indices,
the two evaluation backends (exact rationals and mpmath big-floats) and the
canonical form used to compare and print rational expressions.

Grammar of the input language:

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' integer)?
    base   := integer | name | '(' expr ')' | ('sqrt' | 'ln' | 'atan') '(' expr ')'
'''

import re
import logging
import itertools
from functools import lru_cache, reduce
from math import factorial

import mpmath
import sympy
from sympy.printing.precedence import PRECEDENCE
from sympy.printing.str import StrPrinter

from models.errors import (WebRankError, ParseError, DivisionByZero,
                           DomainError, ExactUnsupported)

__all__ = ['WebRankError', 'ParseError', 'DivisionByZero', 'DomainError',
           'ExactUnsupported', 'EXACT', 'BIGFLOAT', 'parse_expression',
           'differentiate', 'derive_multi', 'evaluate', 'Evaluator',
           'canonical', 'canonical_string', 'is_rational', 'is_zero',
           'MultiIndex', 'multi_indices', 'subsets', 'precision',
           'expression_text']

logger = logging.getLogger('SystemLogger.symbolic')

EXACT = 'exact'
BIGFLOAT = 'bigfloat'

FUNCTIONS = {'sqrt': sympy.sqrt, 'ln': sympy.log, 'atan': sympy.atan}

TOKEN_PATTERN = re.compile(r'''
    (?P<space>[ \t\r]+)
  | (?P<newline>\n)
  | (?P<number>[0-9]+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
''', re.VERBOSE)


class Token(object):
    def __init__(self, kind, text, line, column):
        self.kind = kind
        self.text = text
        self.line = line
        self.column = column

    def __repr__(self):
        return 'Token({}, {!r})'.format(self.kind, self.text)


def tokenize(text):
    tokens = []
    line, line_start, position = 1, 0, 0
    while position < len(text):
        match = TOKEN_PATTERN.match(text, position)
        if match is None:
            raise ParseError('unexpected character {!r}'.format(text[position]),
                             line, position - line_start + 1)
        kind = match.lastgroup
        if kind == 'newline':
            line += 1
            line_start = match.end()
        elif kind != 'space':
            tokens.append(Token(kind, match.group(), line,
                                position - line_start + 1))
        position = match.end()
    tokens.append(Token('end', '', line, position - line_start + 1))
    return tokens


class Parser(object):
    '''
    Recursive descent parser producing sympy expressions. Every name must be
    one of the declared variables; anything else is a ParseError carrying the
    line and column of the offending token.
    '''

    def __init__(self, text, variables):
        self.tokens = tokenize(text)
        self.position = 0
        self.variables = {name: sympy.Symbol(name) for name in variables}

    @property
    def current(self):
        return self.tokens[self.position]

    def fail(self, message, token=None):
        token = token or self.current
        raise ParseError(message, token.line, token.column)

    def eat(self, kind, text=None):
        token = self.current
        if token.kind != kind or (text is not None and token.text != text):
            expected = text if text is not None else kind
            found = token.text or 'end of input'
            self.fail('expected {}, found {}'.format(expected, found))
        self.position += 1
        return token

    def parse(self):
        result = self.expr()
        if self.current.kind != 'end':
            self.fail('unexpected {!r}'.format(self.current.text))
        return result

    def expr(self):
        result = self.term()
        while self.current.kind == 'op' and self.current.text in '+-':
            operator = self.eat('op').text
            right = self.term()
            result = result + right if operator == '+' else result - right
        return result

    def term(self):
        result = self.factor()
        while self.current.kind == 'op' and self.current.text in '*/':
            operator = self.eat('op').text
            token = self.current
            right = self.factor()
            if operator == '*':
                result = result * right
            elif right == 0:
                self.fail('division by the constant zero', token)
            else:
                result = result / right
        return result

    def factor(self):
        if self.current.kind == 'op' and self.current.text == '-':
            self.eat('op', '-')
            return -self.factor()
        base = self.base()
        if self.current.kind == 'op' and self.current.text == '^':
            self.eat('op', '^')
            exponent = self.eat('number')
            return base ** sympy.Integer(int(exponent.text))
        return base

    def base(self):
        token = self.current
        if token.kind == 'number':
            self.eat('number')
            return sympy.Integer(int(token.text))
        if token.kind == 'name':
            self.eat('name')
            if token.text in FUNCTIONS:
                self.eat('op', '(')
                argument = self.expr()
                self.eat('op', ')')
                return FUNCTIONS[token.text](argument)
            if token.text not in self.variables:
                self.fail('unknown variable {!r}'.format(token.text), token)
            return self.variables[token.text]
        if token.kind == 'op' and token.text == '(':
            self.eat('op', '(')
            result = self.expr()
            self.eat('op', ')')
            return result
        self.fail('unexpected {!r}'.format(token.text or 'end of input'))


def parse_expression(text, variables):
    if not isinstance(text, str):
        raise ParseError('expression must be a string, got {!r}'.format(text))
    return Parser(text, variables).parse()


def differentiate(expression, variable):
    if isinstance(variable, str):
        variable = sympy.Symbol(variable)
    return sympy.diff(expression, variable)


def derive_multi(expression, index, symbols):
    '''Apply the partial derivatives counted by the multi-index, in any order.'''
    for symbol, count in zip(symbols, index):
        if count:
            expression = sympy.diff(expression, symbol, count)
    return expression


def precision(digits):
    return mpmath.workdps(digits)


class Evaluator(object):
    '''
    Evaluates expressions at one point with one backend, remembering every
    subexpression value so that the many matrix entries sharing subtrees at a
    point are computed once.
    '''

    def __init__(self, point, backend=EXACT, digits=50):
        if backend not in (EXACT, BIGFLOAT):
            raise WebRankError('unknown backend {!r}'.format(backend))
        self.point = {sympy.Symbol(str(symbol)): sympy.Rational(value)
                      for symbol, value in point.items()}
        self.backend = backend
        self.digits = digits
        self.cache = {}

    def __call__(self, expression):
        with precision(self.digits):
            return self.value(sympy.sympify(expression))

    def constant(self, number):
        if self.backend == EXACT:
            return number
        return mpmath.mpf(number.p) / number.q

    def value(self, node):
        try:
            return self.cache[node]
        except KeyError:
            pass
        result = self.compute(node)
        self.cache[node] = result
        return result

    def compute(self, node):
        exact = self.backend == EXACT
        if node.is_Rational:
            return self.constant(node)
        if node.is_Symbol:
            if node not in self.point:
                raise WebRankError('variable {} is not bound at the point'.format(node))
            return self.constant(self.point[node])
        if node.is_Add:
            return reduce(lambda a, b: a + b, (self.value(arg) for arg in node.args))
        if node.is_Mul:
            return reduce(lambda a, b: a * b, (self.value(arg) for arg in node.args))
        if node.is_Pow:
            return self.power(node)
        if exact:
            raise ExactUnsupported('exact backend cannot evaluate {}'.format(node))
        if isinstance(node, sympy.log):
            argument = self.value(node.args[0])
            if argument <= 0:
                raise DomainError(node.args[0], 'logarithm of a non-positive value')
            return mpmath.log(argument)
        if isinstance(node, sympy.atan):
            return mpmath.atan(self.value(node.args[0]))
        if node is sympy.pi:
            return +mpmath.pi
        if node is sympy.E:
            return +mpmath.e
        if node.is_Float:
            return mpmath.mpf(str(node))
        if node.is_number and not node.is_finite:
            raise DivisionByZero(node)
        raise DomainError(node, 'unsupported expression node')

    def power(self, node):
        base, exponent = node.args
        if exponent.is_Integer:
            value = self.value(base)
            if exponent < 0 and value == 0:
                raise DivisionByZero(base)
            return value ** int(exponent)
        if self.backend == EXACT:
            raise ExactUnsupported('exact backend cannot evaluate {}'.format(node))
        value = self.value(base)
        if value < 0:
            raise DomainError(base, 'fractional power of a negative value')
        if value == 0:
            if exponent.is_negative:
                raise DivisionByZero(base)
            return mpmath.mpf(0)
        return mpmath.power(value, self.value(exponent))


def evaluate(expression, point, backend=EXACT, digits=50):
    return Evaluator(point, backend, digits)(expression)


def is_rational(expression):
    '''True when the tree only uses rationals, variables, sums, products and integer powers.'''
    expression = sympy.sympify(expression)
    if expression.is_Rational or expression.is_Symbol:
        return True
    if expression.is_Add or expression.is_Mul:
        return all(is_rational(arg) for arg in expression.args)
    if expression.is_Pow:
        return expression.args[1].is_Integer and is_rational(expression.args[0])
    return False


def canonical(expression):
    '''Reduced quotient of expanded polynomials for rational expressions.'''
    expression = sympy.sympify(expression)
    if not is_rational(expression):
        return expression
    return sympy.cancel(expression)


def is_zero(expression):
    expression = sympy.sympify(expression)
    if not is_rational(expression):
        raise ExactUnsupported('symbolic zero test needs a rational expression')
    return sympy.cancel(expression) == 0


def _monomial_string(monomial, symbols):
    factors = []
    for symbol, power in zip(symbols, monomial):
        if power == 1:
            factors.append(str(symbol))
        elif power > 1:
            factors.append('{}^{}'.format(symbol, power))
    return '*'.join(factors)


def _polynomial_string(polynomial, symbols):
    if polynomial.is_zero:
        return '0'
    text = ''
    for monomial, coefficient in polynomial.terms(order='grlex'):
        body = _monomial_string(monomial, symbols)
        sign = '-' if coefficient < 0 else '+'
        magnitude = abs(coefficient)
        if body and magnitude == 1:
            term = body
        elif body:
            term = '{}*{}'.format(magnitude, body)
        else:
            term = str(magnitude)
        if not text:
            text = term if sign == '+' else '-' + term
        else:
            text += ' {} {}'.format(sign, term)
    return text


class InputPrinter(StrPrinter):
    '''Prints expressions back in the input language of web and relation files.'''

    def _print_Pow(self, expr, rational=False):
        base, exponent = expr.args
        if exponent.is_Integer and exponent > 1:
            return '{}^{}'.format(self.parenthesize(base, PRECEDENCE['Pow'], strict=True), exponent)
        return super()._print_Pow(expr, rational)

    def _print_log(self, expr):
        return 'ln({})'.format(self._print(expr.args[0]))


def expression_text(expression):
    return InputPrinter().doprint(sympy.sympify(expression))


def canonical_string(expression, symbols=None):
    '''
    Deterministic text for an expression. Rational expressions print as
    numerator / denominator with monomials in graded lexicographic order over
    the given symbols; other expressions print as sympy renders them.
    '''
    expression = sympy.sympify(expression)
    if not is_rational(expression):
        return sympy.sstr(expression)
    numerator, denominator = sympy.fraction(sympy.cancel(expression))
    if symbols is None:
        symbols = sorted(expression.free_symbols, key=lambda s: s.name)
    symbols = list(symbols) or [sympy.Symbol('_')]
    numerator = _polynomial_string(sympy.Poly(numerator, *symbols), symbols)
    if denominator == 1:
        return numerator
    denominator = _polynomial_string(sympy.Poly(denominator, *symbols), symbols)
    return '({}) / ({})'.format(numerator, denominator)


class MultiIndex(tuple):
    '''Derivation multi-index: r non-negative integers.'''

    def __new__(cls, entries):
        entries = tuple(int(entry) for entry in entries)
        if any(entry < 0 for entry in entries):
            raise WebRankError('multi-index entries must be non-negative')
        return super().__new__(cls, entries)

    @classmethod
    def zero(cls, size):
        return cls([0] * size)

    @classmethod
    def unit(cls, size, position):
        entries = [0] * size
        entries[position] = 1
        return cls(entries)

    @property
    def degree(self):
        return sum(self)

    def increment(self, position):
        entries = list(self)
        entries[position] += 1
        return MultiIndex(entries)

    def decrement(self, position):
        '''L − 1_j, or None when the j-th entry is already zero.'''
        if self[position] == 0:
            return None
        entries = list(self)
        entries[position] -= 1
        return MultiIndex(entries)

    def plus(self, other):
        return MultiIndex(a + b for a, b in zip(self, other))

    def minus(self, other):
        return MultiIndex(a - b for a, b in zip(self, other))

    def dominates(self, other):
        return all(a >= b for a, b in zip(self, other))

    def factorial(self):
        result = 1
        for entry in self:
            result *= factorial(entry)
        return result

    def first_nonzero(self):
        for position, entry in enumerate(self):
            if entry:
                return position
        return None

    def __repr__(self):
        return 'MultiIndex({})'.format(list(self))


@lru_cache(maxsize=None)
def multi_indices(size, degree):
    '''S(size, degree), in descending lexicographic order.'''
    found = set()
    for choice in itertools.combinations_with_replacement(range(size), degree):
        entries = [0] * size
        for position in choice:
            entries[position] += 1
        found.add(MultiIndex(entries))
    return tuple(sorted(found, reverse=True))


@lru_cache(maxsize=None)
def subsets(size, count):
    '''Increasing count-subsets of range(size), lexicographically ordered.'''
    return tuple(itertools.combinations(range(size), count))
