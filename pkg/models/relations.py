'''
Abelian relation candidates: for every foliation a p-form in the slot
variables u1..uq, stored as components indexed by increasing p-subsets.
'''

import json
import logging
from dataclasses import dataclass

import sympy

from models.errors import ParseError, RelationFormatError
from models.symbolic import parse_expression, subsets, expression_text

logger = logging.getLogger('SystemLogger.relations')


def slot_names(q):
    return tuple('u{}'.format(alpha) for alpha in range(1, q + 1))


def slot_symbols(q):
    return tuple(sympy.Symbol(name) for name in slot_names(q))


@dataclass(frozen=True)
class RelationSpec:
    '''
    forms[i] maps an increasing 0-based tuple A to the coefficient f_{i,A} of
    du_A on foliation i. Missing components are zero.
    '''
    p: int
    q: int
    forms: tuple

    def __post_init__(self):
        if not 0 <= self.p <= self.q:
            raise RelationFormatError('form degree {} is outside 0..{}'.format(self.p, self.q))
        valid = set(subsets(self.q, self.p))
        for index, components in enumerate(self.forms, 1):
            for key in components:
                if key not in valid:
                    raise RelationFormatError('foliation {}: {} is not a {}-subset of 1..{}'.format(
                        index, [alpha + 1 for alpha in key], self.p, self.q))

    @property
    def d(self):
        return len(self.forms)

    def component(self, i, subset):
        return self.forms[i].get(tuple(subset), sympy.Integer(0))

    @classmethod
    def zero(cls, p, q, d):
        return cls(p=p, q=q, forms=tuple({} for _ in range(d)))

    @classmethod
    def from_dict(cls, data, web):
        if not isinstance(data, dict) or 'p' not in data:
            raise RelationFormatError('a relation file holds an object with a "p" key')
        p, q = data['p'], web.q
        if not isinstance(p, int) or not 0 <= p <= q:
            raise RelationFormatError('p must be an integer between 0 and {}'.format(q))
        names = slot_names(q)
        forms = [dict() for _ in range(web.d)]
        entries = data.get('forms', [])
        if not isinstance(entries, list):
            raise RelationFormatError('"forms" must be a list')
        for entry in entries:
            if not isinstance(entry, dict):
                raise RelationFormatError('each form is an object with "foliation" and "components"')
            index = entry.get('foliation')
            if not isinstance(index, int) or not 1 <= index <= web.d:
                raise RelationFormatError('unknown foliation index {!r}'.format(index))
            components = entry.get('components', {})
            if not isinstance(components, dict):
                raise RelationFormatError(
                    'foliation {}: "components" must be an object'.format(index))
            for key, text in components.items():
                if not isinstance(key, str) or not isinstance(text, str):
                    raise RelationFormatError(
                        'foliation {}: components map string keys to strings'.format(index))
                subset = _parse_subset(key)
                if len(subset) != p or any(not 0 <= alpha < q for alpha in subset):
                    raise RelationFormatError('foliation {}: bad component key {!r}'.format(index, key))
                sign, ordered = _sort_with_sign(subset)
                if len(set(ordered)) != len(ordered):
                    continue
                value = sign * parse_expression(text, names)
                forms[index - 1][ordered] = forms[index - 1].get(ordered, 0) + value
        return cls(p=p, q=q, forms=tuple(forms))

    def to_dict(self):
        return {'p': self.p,
                'forms': [{'foliation': index,
                           'components': {','.join(str(alpha + 1) for alpha in key): expression_text(value)
                                          for key, value in sorted(components.items())}}
                          for index, components in enumerate(self.forms, 1)]}


def _parse_subset(key):
    if key.strip() == '':
        return ()
    try:
        return tuple(int(part) - 1 for part in key.split(','))
    except ValueError:
        raise RelationFormatError('component keys are comma separated indices, got {!r}'.format(key))


def _sort_with_sign(subset):
    '''Sort the indices of du_A, returning the sign of the permutation.'''
    items = list(subset)
    sign = 1
    for i in range(len(items)):
        for j in range(len(items) - 1 - i):
            if items[j] > items[j + 1]:
                items[j], items[j + 1] = items[j + 1], items[j]
                sign = -sign
    return sign, tuple(items)


def load_relation(path, web):
    with open(path, 'r') as relation_file:
        text = relation_file.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as error:
        raise ParseError(error.msg, error.lineno, error.colno)
    relation = RelationSpec.from_dict(data, web)
    logger.info('loaded %s-relation from %s', relation.p, path)
    return relation
