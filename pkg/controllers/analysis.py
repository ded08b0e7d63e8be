'''
Ordinarity decisions, rank profiles, bound reports and the verification of
candidate abelian relations.

Ranks are generic ranks: a value is accepted when some sample point attains
it, and every per-point value is kept in the reports so that loci where the
rank drops stay visible.
'''

import logging
from dataclasses import dataclass, field, asdict, fields

import mpmath
import sympy

from models.errors import (WebRankError, RelationFormatError, DivisionByZero,
                           DomainError, CompositionDomainError)
from models.matrices import rank
from models.symbolic import (BIGFLOAT, Evaluator, canonical_string, derive_multi,
                             is_rational, subsets, precision)
from models.relations import slot_symbols
from models.webmodel import bracket_test, jacobian_minor
from controllers.combinat import (binom, c, z, k_zero, k_one,
                                  check_parameters, bound_profile, BoundProfile)
from controllers.helpers import PointSampler, point_text
from controllers.jets import build_plain, build_closed, column_labels

logger = logging.getLogger('SystemLogger.analysis')

ORDINARY = 'ordinary'
NOT_ORDINARY = 'not_ordinary'
UNDETERMINED = 'undetermined_at_points'


@dataclass
class OrderRecord:
    k: int
    rows: int
    cols: int
    max_rank: int
    ranks: list
    m_rows: int
    m_cols: int
    m_ranks: list
    rho: list
    attained: object = None

    @property
    def rank(self):
        observed = [value for value in self.ranks if value is not None]
        return max(observed) if observed else None

    @property
    def m_rank(self):
        observed = [value for value in self.m_ranks if value is not None]
        return max(observed) if observed else None

    @property
    def generic_rho(self):
        return None if self.m_rank is None else self.m_cols - self.m_rank

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**{item.name: data[item.name] for item in fields(cls)})


@dataclass
class OrdinarityReport:
    web: str
    p: int
    closed: bool
    threshold: object
    horizon: int
    verdict: str
    orders: list
    points: list
    backend: str
    bracket_pairs: list = field(default_factory=list)
    delegated: bool = False
    rank_drop_points: list = field(default_factory=list)

    @property
    def ordinary(self):
        return self.verdict == ORDINARY

    def to_dict(self):
        data = asdict(self)
        data['orders'] = [record.to_dict() for record in self.orders]
        return data

    @classmethod
    def from_dict(cls, data):
        values = {item.name: data[item.name] for item in fields(cls)}
        values['orders'] = [OrderRecord.from_dict(record) for record in data['orders']]
        return cls(**values)


def max_possible_rank(web, p, k, closed):
    if closed:
        return min(z(web.n, p, k), web.d * z(web.q, p, k))
    return min(binom(web.n, p) * c(web.n, k), web.d * binom(web.q, p) * c(web.q, k))


def _ranks_at(web, p, matrices, k_max, config, point):
    mode = config.mode_at(web, point)
    result = []
    for k in range(k_max + 1):
        result.append((rank(matrices.P(k), mode), rank(matrices.M(k), mode)))
    return result


def rank_profile(web, p, k_max, closed, config, points=None):
    '''
    Observed ranks of P_k and M_k (closed variants when asked) for k <= k_max.
    Returns (records, points). Sampled points whose evaluation fails are
    replaced; explicitly given points are kept with a missing rank.
    '''
    if k_max < 0:
        raise WebRankError('k_max must be non-negative')
    build = build_closed if closed else build_plain
    matrices = build(web, p, k_max)
    per_point = []
    if points is None and config.explicit_points:
        points = list(config.explicit_points)
    if points is not None:
        for point in points:
            try:
                per_point.append((point, _ranks_at(web, p, matrices, k_max, config, point)))
            except (DivisionByZero, DomainError) as error:
                logger.warning('evaluation failed at %s: %s', point_text(point), error)
                per_point.append((point, None))
    else:
        sampler = PointSampler(web, config)
        while len(per_point) < config.points:
            point = sampler.regular_point()
            try:
                per_point.append((point, _ranks_at(web, p, matrices, k_max, config, point)))
            except (DivisionByZero, DomainError) as error:
                logger.debug('resampling after failure at %s: %s', point_text(point), error)
    records = []
    for k in range(k_max + 1):
        P, M = matrices.P(k), matrices.M(k)
        ranks = [None if values is None else values[k][0] for _, values in per_point]
        m_ranks = [None if values is None else values[k][1] for _, values in per_point]
        maximum = max_possible_rank(web, p, k, closed)
        observed = [value for value in ranks if value is not None]
        record = OrderRecord(k=k, rows=P.shape[0], cols=P.shape[1], max_rank=maximum,
                             ranks=ranks, m_rows=M.shape[0], m_cols=M.shape[1],
                             m_ranks=m_ranks,
                             rho=[None if value is None else M.shape[1] - value for value in m_ranks],
                             attained=(max(observed) == maximum) if observed else None)
        logger.debug('order %s: ranks %s of max %s', k, ranks, maximum)
        records.append(record)
    return records, [point for point, _ in per_point]


def _horizon(web, p, closed):
    n, d, q = web.n, web.d, web.q
    threshold = (k_one if closed else k_zero)(n, d, q, p)
    if threshold is None:
        return None, 0
    if closed:
        square = z(n, p, threshold) == d * z(q, p, threshold)
    else:
        square = binom(n, p) * c(n, threshold) == d * binom(q, p) * c(q, threshold)
    return threshold, threshold if square else threshold + 1


def _bracket_pairs(web, p, points, config):
    if web.q != web.n - 1 or p > web.n - 2:
        return []
    pairs = []
    for i, j in subsets(web.d, 2):
        if bracket_test(web, i, j, points, config.precision, config.tolerance):
            pairs.append([i + 1, j + 1])
    return pairs


def _ordinarity(web, p, closed, config, points):
    check_parameters(web.n, web.d, web.q, p)
    threshold, horizon = _horizon(web, p, closed)
    logger.info('%s %s-ordinarity of %s up to order %s',
                'strong' if closed else 'plain', p, web.name, horizon)
    records, used = rank_profile(web, p, horizon, closed, config, points)
    if any(record.attained is None for record in records):
        verdict = UNDETERMINED
    elif all(record.attained for record in records):
        verdict = ORDINARY
    else:
        verdict = NOT_ORDINARY
    pairs = _bracket_pairs(web, p, used, config)
    if pairs:
        logger.info('bracket criterion holds for foliations %s; %s cannot be %s-ordinary',
                    pairs, web.name, p)
        verdict = NOT_ORDINARY
    drops = [{'k': record.k, 'point': index}
             for record in records
             for index, value in enumerate(record.ranks)
             if value is not None and value < record.max_rank and record.attained]
    for drop in drops:
        logger.warning('rank drop at order %s at sample point %s', drop['k'], drop['point'])
    return OrdinarityReport(web=web.name, p=p, closed=closed, threshold=threshold,
                            horizon=horizon, verdict=verdict, orders=records,
                            points=[point_text(point) for point in used],
                            backend=config.backend_for(web), bracket_pairs=pairs,
                            rank_drop_points=drops)


def is_strongly_p_ordinary(web, p, config, points=None):
    return _ordinarity(web, p, True, config, points)


def is_p_ordinary(web, p, config, points=None):
    '''For p = q the plain system is the closed one; the strong check is used.'''
    if p == web.q:
        report = is_strongly_p_ordinary(web, p, config, points)
        report.delegated = True
        return report
    return _ordinarity(web, p, False, config, points)


@dataclass
class BoundReport:
    profile: BoundProfile
    plain: OrdinarityReport
    strong: OrdinarityReport
    infinite_rank: bool
    rank_bound: object
    closed_rank_bound: object

    def to_dict(self):
        return {'profile': self.profile.to_dict(), 'plain': self.plain.to_dict(),
                'strong': self.strong.to_dict(), 'infinite_rank': self.infinite_rank,
                'rank_bound': self.rank_bound, 'closed_rank_bound': self.closed_rank_bound}

    @classmethod
    def from_dict(cls, data):
        return cls(profile=BoundProfile.from_dict(data['profile']),
                   plain=OrdinarityReport.from_dict(data['plain']),
                   strong=OrdinarityReport.from_dict(data['strong']),
                   infinite_rank=data['infinite_rank'], rank_bound=data['rank_bound'],
                   closed_rank_bound=data['closed_rank_bound'])


def bound_report(web, p, config, points=None):
    profile = bound_profile(web.n, web.d, web.q, p)
    strong = is_strongly_p_ordinary(web, p, config, points)
    if p == web.q:
        plain = OrdinarityReport(**{item.name: getattr(strong, item.name) for item in fields(strong)})
        plain.delegated = True
    else:
        plain = is_p_ordinary(web, p, config, points)
    infinite = bool(plain.bracket_pairs or strong.bracket_pairs)
    return BoundReport(profile=profile, plain=plain, strong=strong, infinite_rank=infinite,
                       rank_bound=None if infinite or not plain.ordinary else profile.pi0,
                       closed_rank_bound=None if infinite or not strong.ordinary else profile.pi_prime)


def compose(relation, web):
    '''Components f_{i,A} o u_i as expressions in the ambient variables.'''
    if relation.q != web.q or relation.d != web.d:
        raise RelationFormatError('relation has {} forms in {} slots, web has {} foliations of codimension {}'.format(
            relation.d, relation.q, web.d, web.q))
    slots = slot_symbols(web.q)
    composed = []
    for foliation, components in zip(web.foliations, relation.forms):
        substitution = dict(zip(slots, foliation.generators))
        composed.append({A: value.xreplace(substitution) for A, value in components.items()})
    return composed


def exterior_derivative(components, q, p):
    '''d of the p-form sum f_A du_A in the slot variables u1..uq.'''
    slots = slot_symbols(q)
    result = {}
    for A, value in components.items():
        for alpha in range(q):
            if alpha in A:
                continue
            derivative = sympy.diff(value, slots[alpha])
            if derivative == 0:
                continue
            sign = -1 if sum(1 for beta in A if beta < alpha) % 2 else 1
            target = tuple(sorted(A + (alpha,)))
            result[target] = result.get(target, 0) + sign * derivative
    return {C: value for C, value in result.items() if value != 0}


class ZeroTester(object):
    '''
    Decides whether expressions in the ambient variables vanish identically:
    exactly for rational expressions, otherwise by evaluation at sampled
    points against the configured threshold.
    '''

    def __init__(self, web, config):
        self.web = web
        self.config = config
        self._points = None
        self.numeric = False

    def points(self):
        if self._points is None:
            if self.config.explicit_points:
                self._points = list(self.config.explicit_points)
            else:
                sampler = PointSampler(self.web, self.config)
                self._points = sampler.sample(self.config.zero_test_points)
        return self._points

    def residual(self, expression):
        '''None when the expression vanishes, otherwise a printable residual.'''
        expression = sympy.sympify(expression)
        if is_rational(expression):
            reduced = sympy.cancel(expression)
            return None if reduced == 0 else canonical_string(reduced, self.web.symbols)
        self.numeric = True
        worst = mpmath.mpf(0)
        with precision(self.config.precision):
            threshold = mpmath.mpf(self.config.zero_threshold)
            for point in self.points():
                try:
                    value = Evaluator(point, BIGFLOAT, self.config.precision)(expression)
                except (DivisionByZero, DomainError) as error:
                    raise CompositionDomainError('cannot evaluate at {}: {}'.format(point_text(point), error))
                worst = max(worst, abs(value))
            if worst <= threshold:
                return None
            return mpmath.nstr(worst, 10)


@dataclass
class RelationVerdict:
    is_abelian: bool
    is_closed: bool
    residuals: dict
    method: str

    def to_dict(self):
        return asdict(self)


def _subset_text(subset, names):
    return ''.join(names[index] for index in subset) or '1'


def verify_relation(web, relation, config, tester=None):
    '''
    Trace-zero test: for every p-subset B of the variables the sum over i and
    A of (f_{i,A} o u_i)·J_{i,B}^A vanishes. Closedness: each form is closed
    in its slot variables.
    '''
    tester = tester or ZeroTester(web, config)
    p = relation.p
    composed = compose(relation, web)
    residuals = {}
    for B in subsets(web.n, p):
        terms = []
        for i, components in enumerate(composed):
            for A, value in components.items():
                if value != 0:
                    terms.append(value * jacobian_minor(web, i, A, B))
        residual = tester.residual(sympy.Add(*terms))
        if residual is not None:
            residuals[_subset_text(B, web.variables)] = residual
    is_abelian = not residuals
    is_closed = True
    slots = slot_symbols(web.q)
    for i, (foliation, components) in enumerate(zip(web.foliations, relation.forms)):
        substitution = dict(zip(slots, foliation.generators))
        for C, value in exterior_derivative(components, web.q, p).items():
            residual = tester.residual(value.xreplace(substitution))
            if residual is not None:
                is_closed = False
                key = 'd{}[{}]'.format(i + 1, ','.join(str(alpha + 1) for alpha in C))
                residuals[key] = residual
    method = 'numeric' if tester.numeric else 'symbolic'
    if tester.numeric:
        logger.warning('relation on %s checked numerically at %s points; the zero test is heuristic',
                       web.name, len(tester.points()))
    return RelationVerdict(is_abelian=is_abelian, is_closed=is_closed,
                           residuals=residuals, method=method)


@dataclass
class CobordVerdict:
    is_cobord: bool
    eta: RelationVerdict
    omega: RelationVerdict
    residuals: dict

    def to_dict(self):
        return {'is_cobord': self.is_cobord, 'eta': self.eta.to_dict(),
                'omega': self.omega.to_dict(), 'residuals': self.residuals}


def verify_cobord(web, eta, omega, config):
    '''d(eta_i) = omega_i for every foliation, both being abelian relations.'''
    if eta.p != omega.p - 1:
        raise RelationFormatError('eta must have degree {} to bound a {}-relation, got {}'.format(
            omega.p - 1, omega.p, eta.p))
    tester = ZeroTester(web, config)
    eta_verdict = verify_relation(web, eta, config, tester)
    omega_verdict = verify_relation(web, omega, config, tester)
    slots = slot_symbols(web.q)
    residuals = {}
    for i, foliation in enumerate(web.foliations):
        substitution = dict(zip(slots, foliation.generators))
        derived = exterior_derivative(eta.forms[i], web.q, eta.p)
        for C in subsets(web.q, omega.p):
            difference = derived.get(C, 0) - omega.component(i, C)
            residual = tester.residual(sympy.sympify(difference).xreplace(substitution))
            if residual is not None:
                residuals['{}[{}]'.format(i + 1, ','.join(str(alpha + 1) for alpha in C))] = residual
    is_cobord = not residuals and eta_verdict.is_abelian and omega_verdict.is_abelian
    return CobordVerdict(is_cobord=is_cobord, eta=eta_verdict, omega=omega_verdict,
                         residuals=residuals)


def relation_jet(web, relation, point, k, config):
    '''
    Jet coordinates w(i,A,K) = (f_{i,A})'_K o u_i at the point for |K| <= k,
    ordered as the columns of M_k.
    '''
    slots = slot_symbols(web.q)
    mode = config.mode_at(web, point)
    values = []
    for h in range(k + 1):
        for i, A, K in column_labels(web.d, web.q, relation.p, h):
            component = relation.component(i, A)
            derivative = derive_multi(component, K, slots)
            substitution = dict(zip(slots, web.foliations[i].generators))
            values.append(mode.evaluator(derivative.xreplace(substitution)))
    return values
