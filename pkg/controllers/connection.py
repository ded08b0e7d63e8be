'''
Tautological connection of a calibrated ordinary web and its curvature.

The bundle is the kernel of the jet system one order below the calibrated
threshold. A section is lifted one order through the square top system, the
chain rule predicts its derivatives from the lift, and the covariant derivative
is the actual derivative minus the prediction. Flat sections are exactly the
abelian relations; the web has maximal rank iff the curvature vanishes.

Webs with transcendental generators get the connection form at sample points
only (SampledConnection); their flatness is left undetermined.
'''

import logging
from dataclasses import dataclass, field

import mpmath
import sympy

from models.errors import (NotOrdinary, Inconsistent, Singular, TemplateMismatch,
                           TranscendentalUnsupported, WebRankError)
from models.matrices import (AtPoint, SymbolicMatrix, SYMBOLIC, rank, kernel_basis, solve,
                             kernel_at, solve_at)
from models.symbolic import BIGFLOAT, canonical, canonical_string, precision, subsets
from controllers.combinat import k_zero, k_one, pi_zero, pi_prime
from controllers.helpers import (RunConfig, rational_required, calibrated_required,
                                 sample_points, point_text)
from controllers.jets import build_plain, build_closed, column_labels, prolong

logger = logging.getLogger('SystemLogger.connection')

PLAIN = 'plain'
CLOSED = 'closed'


class TautologicalConnection(object):
    def __init__(self, web, p, variant=CLOSED, frame=None):
        self._setup(web, p, variant)
        if rank(self.top, SYMBOLIC) != self.top.columns:
            raise NotOrdinary('top jet matrix of order {} is not of full rank'.format(self.order))
        if self.system is None:
            self.frame = []
        else:
            self.frame = [list(vector) for vector in frame] if frame is not None \
                else kernel_basis(self.system, SYMBOLIC)
        if len(self.frame) != self.expected:
            raise NotOrdinary('bundle of rank {} where {} was expected'.format(
                len(self.frame), self.expected))
        self.frame_matrix = SymbolicMatrix([[vector[row] for vector in self.frame]
                                            for row in range(sum(self.widths[:-1]))],
                                           columns=len(self.frame))
        logger.info('%s connection of %s for p=%s: order %s, rank %s',
                    variant, web.name, p, self.order, len(self.frame))

    def _setup(self, web, p, variant):
        if variant not in (PLAIN, CLOSED):
            raise WebRankError('variant must be plain or closed, got {!r}'.format(variant))
        self.web = web
        self.p = p
        self.variant = variant
        n, d, q = web.n, web.d, web.q
        if variant == CLOSED:
            self.order, self.expected = k_one(n, d, q, p), pi_prime(n, d, q, p)
            self.matrices = build_closed(web, p, self.order)
        else:
            self.order, self.expected = k_zero(n, d, q, p), pi_zero(n, d, q, p)
            self.matrices = build_plain(web, p, self.order)
        self.top = self.matrices.P(self.order)
        self.coupling = self.matrices.Q(self.order)
        self.system = self.matrices.M(self.order - 1) if self.order > 0 else None
        self.widths = [len(self.matrices.columns_at(h)) for h in range(self.order + 1)]

    def segments(self, vector):
        '''Split a jet vector of the bundle into its per-order parts.'''
        parts, start = [], 0
        for width in self.widths[:-1]:
            parts.append(list(vector[start:start + width]))
            start += width
        return parts

    def lift(self, section):
        '''The top-order jet w with P·w = -Q·s.'''
        rhs = [-value for value in self.coupling.apply(section)]
        try:
            return solve(self.top, rhs, SYMBOLIC, unique=True)
        except (Inconsistent, Singular) as error:
            raise NotOrdinary('section cannot be lifted: {}'.format(error))

    def _plain(self, h, coordinates):
        if self.variant == CLOSED:
            return self.matrices.expand(h, coordinates)
        return list(coordinates)

    def _reduce(self, h, plain):
        if self.variant == CLOSED:
            return self.matrices.contract(h, plain)
        return plain

    def predictions(self, parts):
        '''
        Chain-rule prediction of the derivative of the bundle coordinates along
        each ambient variable, from the per-order parts of a section and its lift.
        '''
        web = self.web
        plain = [self._plain(h, part) for h, part in enumerate(parts)]
        result = []
        for lam in range(web.n):
            guesses = []
            for h in range(self.order):
                above = dict(zip(column_labels(web.d, web.q, self.p, h + 1), plain[h + 1]))
                predicted = {}
                for i in range(web.d):
                    jet = {(A, K): value for (j, A, K), value in above.items() if j == i}
                    for (A, K), value in prolong(web, i, jet, lam).items():
                        predicted[(i, A, K)] = value
                labels = column_labels(web.d, web.q, self.p, h)
                guesses.extend(self._reduce(h, [predicted[label] for label in labels]))
            result.append(guesses)
        return result

    def covariant_derivative(self, section):
        '''[nabla_lambda s for each ambient variable lambda].'''
        parts = self.segments(section)
        values = [value for part in parts for value in part]
        guesses = self.predictions(parts + [self.lift(section)])
        return [[canonical(sympy.diff(value, symbol) - guess) for value, guess in zip(values, predicted)]
                for symbol, predicted in zip(self.web.symbols, guesses)]

    def expand_in_frame(self, vector):
        try:
            return solve(self.frame_matrix, vector, SYMBOLIC, unique=True)
        except (Inconsistent, Singular) as error:
            raise WebRankError('covariant derivative leaves the bundle: {}'.format(error))

    def connection_form(self):
        '''eta[a][b][lambda]: nabla_lambda s_b is the sum over a of s_a·eta[a][b][lambda].'''
        size = len(self.frame)
        eta = [[[sympy.Integer(0)] * self.web.n for _ in range(size)] for _ in range(size)]
        for b, section in enumerate(self.frame):
            for lam, derivative in enumerate(self.covariant_derivative(section)):
                for a, value in enumerate(self.expand_in_frame(derivative)):
                    eta[a][b][lam] = canonical(value)
        return eta

    def curvature(self, eta):
        '''Omega = d eta + eta ^ eta, as coefficients on dx_lambda ^ dx_mu with lambda < mu.'''
        symbols = self.web.symbols
        size = len(eta)
        omega = [[{} for _ in range(size)] for _ in range(size)]
        for a in range(size):
            for b in range(size):
                for lam, mu in subsets(self.web.n, 2):
                    value = sympy.diff(eta[a][b][mu], symbols[lam]) - sympy.diff(eta[a][b][lam], symbols[mu])
                    for e in range(size):
                        value += eta[a][e][lam] * eta[e][b][mu] - eta[a][e][mu] * eta[e][b][lam]
                    omega[a][b][(lam, mu)] = canonical(value)
        return omega


def _times(rows, vector):
    return [sum((entry * value for entry, value in zip(row, vector)), mpmath.mpf(0)) for row in rows]


class SampledConnection(TautologicalConnection):
    '''
    The connection of a web whose generators are not rational, evaluated point
    by point in big-float arithmetic. At a point the frame is the echelon kernel
    basis of the evaluated system; its free coordinates are held constant
    nearby, so its derivative solves M·ds = -(dM)·s with those coordinates zero.
    '''

    def __init__(self, web, p, variant=CLOSED, config=None):
        self.config = config or RunConfig()
        self._setup(web, p, variant)
        if self.system is None:
            raise NotOrdinary('{} has no bundle below order {}'.format(web.name, self.order))
        section = [sympy.Dummy('s') for _ in range(self.system.columns)]
        lifted = [sympy.Dummy('w') for _ in range(self.top.columns)]
        unknowns = section + lifted
        # predictions are linear in the section and its lift
        self.prediction = [SymbolicMatrix([[sympy.diff(guess, unknown) for unknown in unknowns]
                                           for guess in guesses], columns=len(unknowns))
                           for guesses in self.predictions(self.segments(section) + [lifted])]
        self.variation = [SymbolicMatrix([[sympy.diff(entry, symbol) for entry in row]
                                          for row in self.system.rows], columns=self.system.columns)
                          for symbol in web.symbols]
        logger.info('sampled %s connection of %s for p=%s: order %s', variant, web.name, p, self.order)

    def at(self, point):
        '''(frame, eta) at one point; eta[a][b][lambda] are mpmath numbers.'''
        mode = AtPoint(point, BIGFLOAT, self.config.precision, self.config.tolerance)
        columns = self.system.columns
        top = mode.values(self.top)
        if len(kernel_at(top, self.top.columns, mode)[1]) != self.top.columns:
            raise NotOrdinary('top jet matrix of order {} is singular at {}'.format(
                self.order, point_text(point)))
        system = mode.values(self.system)
        frame, _ = kernel_at(system, columns, mode)
        if len(frame) != self.expected:
            raise NotOrdinary('bundle of rank {} where {} was expected at {}'.format(
                len(frame), self.expected, point_text(point)))
        coupling = mode.values(self.coupling)
        prediction = [mode.values(matrix) for matrix in self.prediction]
        variation = [mode.values(matrix) for matrix in self.variation]
        frame_rows = [[vector[row] for vector in frame] for row in range(columns)]
        size = len(frame)
        eta = [[[None] * self.web.n for _ in range(size)] for _ in range(size)]
        with precision(self.config.precision):
            for b, section in enumerate(frame):
                try:
                    lifted = solve_at(top, self.top.columns, [-value for value in _times(coupling, section)],
                                      mode, unique=True)
                    for lam in range(self.web.n):
                        moved = solve_at(system, columns,
                                         [-value for value in _times(variation[lam], section)], mode)
                        guesses = _times(prediction[lam], section + lifted)
                        derivative = [value - guess for value, guess in zip(moved, guesses)]
                        for a, value in enumerate(solve_at(frame_rows, size, derivative, mode, unique=True)):
                            eta[a][b][lam] = value
                except (Inconsistent, Singular) as error:
                    raise NotOrdinary('connection is undefined at {}: {}'.format(point_text(point), error))
        return frame, eta


@dataclass
class ConnectionData:
    web: str
    p: int
    variant: str
    variables: tuple
    frame: list
    eta: list
    omega: list
    flat: object
    samples: list = field(default_factory=list)

    @property
    def rank(self):
        if self.samples:
            return len(self.samples[0]['frame'])
        return len(self.frame)

    def to_dict(self):
        if self.samples:
            return self._sampled_dict()
        symbols = [sympy.Symbol(name) for name in self.variables]

        def text(value):
            return canonical_string(value, symbols)
        return {
            'web': self.web, 'p': self.p, 'variant': self.variant, 'rank': self.rank,
            'flat': self.flat,
            'frame': [[text(value) for value in vector] for vector in self.frame],
            'eta': _eta_dict(self.eta, self.variables, text),
            'omega': {'{},{}'.format(a + 1, b + 1): {'{}^{}'.format(self.variables[lam], self.variables[mu]): text(value)
                                                      for (lam, mu), value in sorted(entry.items())}
                      for a, row in enumerate(self.omega) for b, entry in enumerate(row)},
        }

    def _sampled_dict(self):
        def text(value):
            return mpmath.nstr(value, 20)
        return {
            'web': self.web, 'p': self.p, 'variant': self.variant, 'rank': self.rank,
            'flat': self.flat,
            'samples': [{'point': point_text(sample['point']),
                         'frame': [[text(value) for value in vector] for vector in sample['frame']],
                         'eta': _eta_dict(sample['eta'], self.variables, text)}
                        for sample in self.samples],
        }


def _eta_dict(eta, variables, text):
    return {'{},{}'.format(a + 1, b + 1): {name: text(value) for name, value in zip(variables, entry)}
            for a, row in enumerate(eta) for b, entry in enumerate(row)}


@calibrated_required
def build_connection(web, p, variant=CLOSED, frame=None, config=None):
    '''
    Connection form and curvature. A web with transcendental generators is
    only sampled: its report carries eta at the configured points and flat is
    None.
    '''
    if not web.is_rational():
        if frame is not None:
            raise TranscendentalUnsupported('a chosen frame needs rational generators')
        return _sampled_connection(web, p, variant, config or RunConfig())
    connection = TautologicalConnection(web, p, variant, frame)
    eta = connection.connection_form()
    omega = connection.curvature(eta)
    flat = all(value == 0 for row in omega for entry in row for value in entry.values())
    logger.info('curvature of %s is %s', web.name, 'zero' if flat else 'non-zero')
    return ConnectionData(web=web.name, p=p, variant=variant, variables=web.variables,
                          frame=connection.frame, eta=eta, omega=omega, flat=flat)


def _sampled_connection(web, p, variant, config):
    connection = SampledConnection(web, p, variant, config)
    samples = []
    for point in sample_points(web, config):
        frame, eta = connection.at(point)
        samples.append({'point': point, 'frame': frame, 'eta': eta})
    logger.warning('curvature of %s is undetermined: transcendental generators are only sampled', web.name)
    return ConnectionData(web=web.name, p=p, variant=variant, variables=web.variables,
                          frame=[], eta=None, omega=None, flat=None, samples=samples)


def flatness_verdict(data):
    return {'max_rank': data.flat, 'pi': data.rank}


def _check_template(web):
    x, y, z = web.symbols if web.n == 3 else (None, None, None)
    expected = [(x, y), (y, z), (z, x)]
    if web.n != 3 or web.q != 2 or web.d != 4 or \
            [tuple(f.generators) for f in web.foliations[:3]] != expected:
        raise TemplateMismatch('{} is not a 4-web of curves with coordinate foliations '
                               '(x,y), (y,z), (z,x) and a free fourth foliation'.format(web.name))
    return x, y, z


def template_closed_forms(web):
    '''H and K from the derivatives (a,b,c) of phi and (p,q,r) of psi.'''
    x, y, z = _check_template(web)
    phi, psi = web.foliations[3].generators
    a, b, c = (sympy.diff(phi, v) for v in (x, y, z))
    p, q, r = (sympy.diff(psi, v) for v in (x, y, z))
    A = b * r - q * c
    B = c * p - r * a
    C = a * q - p * b
    product = A * B * C
    if canonical(product) == 0:
        raise TemplateMismatch('ABC vanishes identically; the web is not 2-ordinary')
    H = canonical((p * A * sympy.diff(C, z) - r * sympy.diff(A, x) * C) / product)
    K = canonical((c * sympy.diff(A, x) * C - a * A * sympy.diff(C, z)) / product)
    return H, K


@rational_required
def connection_form_components(web):
    '''Write the rank-one connection form of the template as H dphi + K dpsi.'''
    x, y, z = _check_template(web)
    data = build_connection(web, 2, CLOSED)
    if data.rank != 1:
        raise TemplateMismatch('expected a rank one bundle, got {}'.format(data.rank))
    phi, psi = web.foliations[3].generators
    basis = SymbolicMatrix([[sympy.diff(phi, v), sympy.diff(psi, v)] for v in (x, y, z)])
    try:
        H, K = solve(basis, data.eta[0][0], SYMBOLIC)
    except Inconsistent:
        raise TemplateMismatch('connection form is not a combination of dphi and dpsi')
    H, K = canonical(H), canonical(K)
    closed_H, closed_K = template_closed_forms(web)
    if canonical(H - closed_H) != 0 or canonical(K - closed_K) != 0:
        logger.warning('solver components of %s differ from the closed forms', web.name)
    return H, K
