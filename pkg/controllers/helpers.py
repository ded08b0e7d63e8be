'''
Shared pieces for the controllers:
    @rational_required
    @calibrated_required
    RunConfig
    PointSampler

The decorators refuse to run an operation whose web does not meet the
precondition, raising the matching WebRankError instead.
'''

import random
import logging
from dataclasses import dataclass, replace
from functools import wraps

import sympy

from models.errors import (InvalidParameters, PointSelectionFailed,
                           TranscendentalUnsupported, NotCalibrated, WebRankError,
                           DivisionByZero, DomainError)
from models.matrices import AtPoint, SymbolicMatrix, rank
from models.symbolic import EXACT, BIGFLOAT
from controllers.combinat import is_calibrated, is_strongly_calibrated

logger = logging.getLogger('SystemLogger.helpers')

AUTO = 'auto'
BACKENDS = (AUTO, EXACT, BIGFLOAT)
FORMATS = ('text', 'json')


def rational_required(f):
    @wraps(f)
    def decorated_function(web, *args, **kwargs):
        if not web.is_rational():
            raise TranscendentalUnsupported(
                'web {} has non-rational generators; this operation is symbolic only'.format(web.name))
        return f(web, *args, **kwargs)
    return decorated_function


def calibrated_required(f):
    @wraps(f)
    def decorated_function(web, p, variant='closed', *args, **kwargs):
        check = is_strongly_calibrated if variant == 'closed' else is_calibrated
        if not check(web.n, web.d, web.q, p):
            raise NotCalibrated('web {} is not {}{}-calibrated'.format(
                web.name, 'strongly ' if variant == 'closed' else '', p))
        return f(web, p, variant, *args, **kwargs)
    return decorated_function


@dataclass(frozen=True)
class RunConfig:
    command: str = 'analyze'
    inputs: tuple = ()
    p: int = 1
    max_order: object = None
    closed: bool = False
    backend: str = AUTO
    precision: int = 50
    points: int = 3
    explicit_points: tuple = ()
    seed: int = 0
    output_format: str = 'text'
    tolerance: str = '1e-20'
    sample_bound: int = 97
    sample_radius: str = '1/4'
    max_resamples: int = 40
    zero_test_points: int = 5
    zero_threshold: str = '1e-30'

    def __post_init__(self):
        if self.precision < 20:
            raise InvalidParameters('precision must be at least 20 digits, got {}'.format(self.precision))
        if self.points < 1:
            raise InvalidParameters('at least one sample point is needed, got {}'.format(self.points))
        if self.backend not in BACKENDS:
            raise InvalidParameters('backend must be one of {}, got {!r}'.format(BACKENDS, self.backend))
        if self.output_format not in FORMATS:
            raise InvalidParameters('output format must be text or json, got {!r}'.format(self.output_format))
        if self.sample_bound < 1:
            raise InvalidParameters('sample bound must be positive')

    @classmethod
    def from_app_config(cls, config, **overrides):
        settings = dict(precision=config.get('PRECISION', 50),
                        tolerance=str(config.get('TOLERANCE', '1e-20')),
                        points=config.get('POINTS', 3),
                        seed=config.get('SEED', 0),
                        sample_bound=config.get('SAMPLE_BOUND', 97),
                        sample_radius=str(config.get('SAMPLE_RADIUS', '1/4')),
                        max_resamples=config.get('MAX_RESAMPLES', 40),
                        zero_test_points=config.get('ZERO_TEST_POINTS', 5),
                        zero_threshold=str(config.get('ZERO_THRESHOLD', '1e-30')))
        settings.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**settings)

    def but(self, **changes):
        return replace(self, **changes)

    def backend_for(self, web):
        if self.backend == AUTO:
            return EXACT if web.is_rational() else BIGFLOAT
        return self.backend

    def mode_at(self, web, point):
        return AtPoint(point, self.backend_for(web), self.precision, self.tolerance)


def parse_point(text, web):
    '''"x=1/3,y=2" to a point on the web's variables.'''
    point = {}
    for part in text.split(','):
        if '=' not in part:
            raise InvalidParameters('point coordinates look like name=value, got {!r}'.format(part))
        name, value = (piece.strip() for piece in part.split('=', 1))
        if name not in web.variables:
            raise InvalidParameters('unknown variable {!r} in point'.format(name))
        try:
            point[name] = sympy.Rational(value)
        except (TypeError, ValueError, sympy.SympifyError):
            raise InvalidParameters('coordinate {}={!r} is not a rational number'.format(name, value))
    missing = [name for name in web.variables if name not in point]
    if missing:
        raise InvalidParameters('point leaves {} unbound'.format(', '.join(missing)))
    return {name: point[name] for name in web.variables}


def point_text(point):
    return {str(name): str(value) for name, value in point.items()}


def regular_at(web, mode):
    '''Every foliation's jacobian has full rank q at the mode's point.'''
    symbols = web.symbols
    for foliation in web.foliations:
        if rank(SymbolicMatrix(foliation.jacobian(symbols)), mode) != web.q:
            return False
    return True


class PointSampler(object):
    '''
    Draws rational points center + radius·a/b with |a| <= b <= bound, from a
    generator seeded by the run configuration. Rejected points count against a
    budget of points + max_resamples draws.
    '''

    def __init__(self, web, config):
        self.web = web
        self.config = config
        self.random = random.Random(config.seed)
        self.radius = sympy.Rational(config.sample_radius)
        self.center = web.origin()
        self.budget = config.points + config.max_resamples
        self.draws = 0

    def candidate(self):
        bound = self.config.sample_bound
        point = {}
        for name, center in zip(self.web.variables, self.center):
            denominator = self.random.randint(1, bound)
            numerator = self.random.randint(-denominator, denominator)
            point[name] = center + self.radius * sympy.Rational(numerator, denominator)
        return point

    def draw(self, accept=None):
        while self.draws < self.budget:
            self.draws += 1
            point = self.candidate()
            if accept is None:
                return point
            try:
                if accept(point):
                    return point
            except (DivisionByZero, DomainError) as error:
                logger.debug('rejected sample point %s: %s', point_text(point), error)
                continue
            logger.debug('rejected degenerate sample point %s', point_text(point))
        raise PointSelectionFailed('no usable sample point after {} draws'.format(self.draws))

    def regular_point(self):
        return self.draw(lambda point: regular_at(self.web, self.config.mode_at(self.web, point)))

    def sample(self, count=None):
        return [self.regular_point() for _ in range(count or self.config.points)]


def sample_points(web, config, count=None):
    if config.explicit_points:
        return list(config.explicit_points)
    return PointSampler(web, config).sample(count)
