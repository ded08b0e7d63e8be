'''
Integer combinatorics of the jet systems: dimension counts, the ordinary and
strong thresholds, rank bounds and calibration predicates.

All clamped sums are evaluated with exact fractions. Ratios are strictly
increasing in the jet order, so every sum stops at the first vanishing term.
'''

import logging
from dataclasses import dataclass, asdict, fields
from fractions import Fraction
from functools import lru_cache
from math import comb

from models.errors import InvalidParameters, NotDivisible

logger = logging.getLogger('SystemLogger.combinat')


def binom(r, s):
    if s < 0 or s > r or r < 0:
        return 0
    return comb(r, s)


def c(r, h):
    '''Dimension of homogeneous polynomials of degree h in r variables.'''
    if h < 0:
        return 0
    return binom(r - 1 + h, h)


def z_alternating(n, p, k):
    return sum((-1) ** (p - j + 1) * binom(n, j) * c(n, k + p - j) for j in range(p))


@lru_cache(maxsize=None)
def z(n, p, k):
    '''Dimension of closed degree-k homogeneous p-form symbols in n variables.'''
    value = binom(n + k, n - p) * c(p, k)
    assert value == z_alternating(n, p, k), (n, p, k)
    return value


def closed_jet_dimension(q, p, k):
    '''Dimension of the space of order-k jets of closed p-forms in q variables.'''
    return sum(z(q, p, h) for h in range(k + 1))


def z_ratio_product(n, q, p, h):
    '''z(n,p,h)/z(q,p,h) through the product identity.'''
    value = Fraction(_falling(q - p), _falling(n - p))
    for j in range(1, n - q + 1):
        value *= q + j + h
    return value


def _falling(m):
    result = 1
    for factor in range(2, m + 1):
        result *= factor
    return result


def check_parameters(n, d, q, p):
    if n < 2:
        raise InvalidParameters('dimension n must be at least 2, got {}'.format(n))
    if not 1 <= q <= n - 1:
        raise InvalidParameters('codimension q must satisfy 1 <= q <= n-1, got q={} n={}'.format(q, n))
    if d < 1:
        raise InvalidParameters('the web needs at least one foliation, got d={}'.format(d))
    if not 1 <= p <= q:
        raise InvalidParameters('form degree p must satisfy 1 <= p <= q, got p={} q={}'.format(p, q))


def plain_ratio(n, q, p, k):
    return Fraction(binom(n, p) * c(n, k), binom(q, p) * c(q, k))


def closed_ratio(n, q, p, k):
    return Fraction(z(n, p, k), z(q, p, k))


def _threshold(ratio, n, d, q, p):
    if q >= n:
        raise InvalidParameters('thresholds need q < n, got q={} n={}'.format(q, n))
    if ratio(n, q, p, 0) > d:
        return None
    k = 0
    while ratio(n, q, p, k + 1) <= d:
        k += 1
    return k


def k_zero(n, d, q, p):
    '''Last order at which the plain system is not over-determined, or None.'''
    return _threshold(plain_ratio, n, d, q, p)


def k_one(n, d, q, p):
    '''Last order at which the closed system is not over-determined, or None.'''
    return _threshold(closed_ratio, n, d, q, p)


def _clamped_sum(term):
    total = Fraction(0)
    h = 0
    while True:
        value = term(h)
        if value <= 0:
            break
        total += value
        h += 1
    if total.denominator != 1:
        raise ArithmeticError('non-integral bound {}'.format(total))
    return int(total)


def pi_henaut(n, d, q, p):
    if n % q:
        raise NotDivisible('the bound needs q to divide n, got n={} q={}'.format(n, q))
    ratio = n // q - 1
    return binom(q, p) * _clamped_sum(lambda h: c(q, h) * max(d - ratio * (p + h) - 1, 0))


def pi_zero(n, d, q, p):
    return _clamped_sum(lambda h: binom(q, p) * c(q, h) * (d - plain_ratio(n, q, p, h)))


def pi_prime(n, d, q, p):
    return _clamped_sum(lambda h: z(q, p, h) * (d - closed_ratio(n, q, p, h)))


@dataclass(frozen=True)
class Sizes:
    alpha: int
    beta: int
    alpha_tilde: int
    beta_tilde: int


def sizes(n, d, q, p, k):
    orders = range(k + 1)
    return Sizes(alpha=d * sum(binom(q, p) * c(q, h) for h in orders),
                 beta=sum(binom(n, p) * c(n, h) for h in orders),
                 alpha_tilde=d * sum(z(q, p, h) for h in orders),
                 beta_tilde=sum(z(n, p, h) for h in orders))


def is_calibrated(n, d, q, p):
    k = k_zero(n, d, q, p)
    return k is not None and plain_ratio(n, q, p, k) == d


def is_strongly_calibrated(n, d, q, p):
    k = k_one(n, d, q, p)
    return k is not None and closed_ratio(n, q, p, k) == d


def prop2_check(n, d, q, p):
    '''
    Necessary condition for a web to be both ordinary and strongly ordinary:
    the closed system is never less determined than the plain one.
    '''
    thresholds = [k for k in (k_zero(n, d, q, p), k_one(n, d, q, p)) if k is not None]
    if len(thresholds) < 2:
        return True
    for k in range(min(thresholds) + 1):
        counts = sizes(n, d, q, p, k)
        if counts.alpha_tilde - counts.beta_tilde > counts.alpha - counts.beta:
            return False
    return True


@dataclass(frozen=True)
class BoundProfile:
    n: int
    d: int
    q: int
    p: int
    k0: object
    k1: object
    pi0: int
    pi_prime: int
    pi_henaut: object
    calibrated: bool
    strongly_calibrated: bool
    prop2_ok: bool

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**{field.name: data[field.name] for field in fields(cls)})


def bound_profile(n, d, q, p):
    check_parameters(n, d, q, p)
    henaut = pi_henaut(n, d, q, p) if n % q == 0 else None
    profile = BoundProfile(n=n, d=d, q=q, p=p,
                           k0=k_zero(n, d, q, p), k1=k_one(n, d, q, p),
                           pi0=pi_zero(n, d, q, p), pi_prime=pi_prime(n, d, q, p),
                           pi_henaut=henaut,
                           calibrated=is_calibrated(n, d, q, p),
                           strongly_calibrated=is_strongly_calibrated(n, d, q, p),
                           prop2_ok=prop2_check(n, d, q, p))
    logger.debug('bounds for (n,d,q,p)=(%s,%s,%s,%s): %s', n, d, q, p, profile)
    return profile


# Closed forms for curve webs, kept for comparison with the general sums.

def pi_prime_curves_top(d):
    '''Closed 2-rank bound of a d-web of curves in dimension 3.'''
    return Fraction((d - 1) * (d - 2) * (d - 3), 6)


def pi_prime_curves_one(d):
    '''Closed 1-rank bound of a d-web of curves in dimension 3.'''
    return Fraction((d * d - 1) * (2 * d - 3), 3)


def pi_zero_curves_closed_form(d):
    '''
    Published closed form for the plain 1-rank bound of curve webs in
    dimension 3, with 4d-2 = 3*delta + rho. It agrees with pi_zero(3, d, 2, 1)
    at d = 3 only; pi_zero is the one the analyses use.
    '''
    delta, rho = divmod(4 * d - 2, 3)
    return Fraction(delta * (delta + 1) * (delta - rho), 4)


def pi_prime_curves(n, d, p):
    '''pi_prime(n, d, n-1, p) through the double binomial sum.'''
    total = Fraction(0)
    h = 0
    while True:
        excess = d - Fraction(n + h, n - p)
        if excess <= 0:
            return total
        total += binom(n - 1 + h, n - 1 - p) * binom(p - 1 + h, h) * excess
        h += 1


def pi_zero_curves(n, d, p):
    '''pi_zero(n, d, n-1, p) through the single binomial sum.'''
    total = Fraction(0)
    h = 0
    while True:
        excess = d - Fraction(n * (n - 1 + h), (n - 1) * (n - p))
        if excess <= 0:
            return binom(n - 1, p) * total
        total += binom(n - 2 + h, n - 2) * excess
        h += 1


def damiano_bound(n, d):
    return sum(binom(n - 2 + h, h) * (d - n - h) for h in range(d - n))


def codim_one_bound(n, d):
    '''Bound for webs of hypersurfaces: sum over h >= 1 of (d - c(n,h))+.'''
    total = 0
    h = 1
    while d - c(n, h) > 0:
        total += d - c(n, h)
        h += 1
    return total
