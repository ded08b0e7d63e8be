import mpmath
import pytest
import sympy

from models.errors import NotCalibrated, NotOrdinary, TranscendentalUnsupported, TemplateMismatch
from models.symbolic import BIGFLOAT, evaluate
from models.webmodel import Web
from controllers.connection import (PLAIN, CLOSED, TautologicalConnection, SampledConnection,
                                    build_connection, flatness_verdict,
                                    template_closed_forms, connection_form_components)
from controllers.helpers import sample_points

x, y, z = sympy.symbols('x y z')

TRANSCENDENTAL = ('x + y + z^2/2', 'x + z + ln(1 + x*y)')
TOLERANCE = mpmath.mpf('1e-25')


def template_curvature(lam):
    p = 1 + x + lam * z
    r = 1 + lam * x + z
    return lam * (lam - 1) * (z - x) * ((lam + 1) * (x + z) + 2) / (p ** 2 * r ** 2)


def template(first, second, name='template'):
    return Web.from_dict({'name': name, 'dimension': 3, 'codimension': 2,
                          'variables': ['x', 'y', 'z'],
                          'foliations': [{'generators': ['x', 'y']}, {'generators': ['y', 'z']},
                                         {'generators': ['z', 'x']},
                                         {'generators': [first, second]}]})


@pytest.mark.parametrize('name, lam', [
    ('template_lambda_0', 0), ('template_lambda_1', 1), ('template_lambda_half', sympy.Rational(1, 2)),
    ('template_lambda_2', 2), ('template_lambda_minus_1', -1)])
def test_template_curvature(web_named, name, lam):
    data = build_connection(web_named(name), 2, CLOSED)
    assert data.rank == 1
    omega = data.omega[0][0]
    assert sympy.cancel(omega[(0, 2)] - template_curvature(lam)) == 0
    assert omega[(0, 1)] == 0 and omega[(1, 2)] == 0
    assert data.flat == (lam in (0, 1))
    assert flatness_verdict(data) == {'max_rank': data.flat, 'pi': 1}


def test_template_frame_is_normalised(web_named):
    data = build_connection(web_named('parallel_lines'), 2, CLOSED)
    assert data.frame == [[-1, -2, 3, 1]]
    assert data.flat


@pytest.mark.parametrize('name, lam', [('template_lambda_2', 2), ('template_lambda_half', sympy.Rational(1, 2))])
def test_template_components(web_named, name, lam):
    web = web_named(name)
    p = 1 + x + lam * z
    r = 1 + lam * x + z
    H, K = connection_form_components(web)
    assert H == 0
    assert sympy.cancel(K - lam / (p * r)) == 0
    closed_H, closed_K = template_closed_forms(web)
    assert closed_H == 0
    assert sympy.cancel(closed_K - K) == 0


@pytest.mark.slow
@pytest.mark.parametrize('first, second', [
    ('x + y + z^2/2', 'x + z + x*y'),
    ('x + y - x*z', 'x + 2*z + y^2/2'),
    ('2*x + y + y*z', 'x - z + x^2'),
    ('x + y + x*z', 'x + z + y*z'),
    ('x + y + y^2', 'x + z - z^2/2'),
])
def test_solver_matches_closed_forms_on_other_templates(first, second):
    web = template(first, second)
    H, K = connection_form_components(web)
    closed_H, closed_K = template_closed_forms(web)
    assert sympy.cancel(H - closed_H) == 0
    assert sympy.cancel(K - closed_K) == 0


def test_template_shape_is_checked(web_named):
    with pytest.raises(TemplateMismatch):
        template_closed_forms(web_named('planar_linear'))
    with pytest.raises(TemplateMismatch):
        template_closed_forms(template('x + y', 'x + y + z'))


def test_linear_planar_web_is_flat_with_maximal_rank(web_named):
    data = build_connection(web_named('planar_linear'), 1, CLOSED)
    assert data.rank == 3
    assert data.flat


@pytest.mark.parametrize('name, p, section', [
    ('template_lambda_0', 2, [1 + x, -(1 + z), 1 + z, 1]),
    ('planar_linear', 1, [1, 1, -1, 0, 0, 0, 0, 0]),
])
def test_abelian_relations_are_flat_sections(web_named, name, p, section):
    connection = TautologicalConnection(web_named(name), p, CLOSED)
    for derivative in connection.covariant_derivative(section):
        assert all(sympy.cancel(value) == 0 for value in derivative)


def test_covariant_derivatives_stay_in_the_bundle(web_named):
    connection = TautologicalConnection(web_named('planar_parabola'), 1, CLOSED)
    for section in connection.frame:
        for derivative in connection.covariant_derivative(section):
            assert all(sympy.cancel(value) == 0 for value in connection.system.apply(derivative))


def test_curvature_transforms_under_a_change_of_frame(web_named):
    web = web_named('planar_parabola')
    connection = TautologicalConnection(web, 1, CLOSED)
    frame = connection.frame
    change = sympy.Matrix([[1, 2, 0], [0, 1, 0], [1, 0, 1]])
    moved = [[sum(frame[a][row] * change[a, b] for a in range(3)) for row in range(len(frame[0]))]
             for b in range(3)]
    first = build_connection(web, 1, CLOSED)
    second = build_connection(web, 1, CLOSED, frame=moved)
    inverse = change.inv()
    for key in first.omega[0][0]:
        before = sympy.Matrix(3, 3, lambda a, b: first.omega[a][b][key])
        after = sympy.Matrix(3, 3, lambda a, b: second.omega[a][b][key])
        assert (inverse * before * change - after).applyfunc(sympy.cancel) == sympy.zeros(3, 3)


def test_affine_webs_have_no_plain_one_ordinary_connection():
    web = Web.from_dict({'name': 'affine', 'dimension': 4, 'codimension': 2,
                         'variables': ['x', 'y', 'z', 't'],
                         'foliations': [{'generators': ['x', 'y']}, {'generators': ['z', 't']},
                                        {'generators': ['x + z', 'y + t']},
                                        {'generators': ['x + 2*t', 'y - z + t']}]})
    with pytest.raises(NotOrdinary):
        build_connection(web, 1, PLAIN)


def test_preconditions(web_named):
    with pytest.raises(NotCalibrated):
        build_connection(web_named('goldberg_w2'), 2, CLOSED)
    with pytest.raises(TranscendentalUnsupported):
        connection_form_components(template(*TRANSCENDENTAL))
    with pytest.raises(TranscendentalUnsupported):
        build_connection(template(*TRANSCENDENTAL), 2, CLOSED, frame=[[0, 0, 0, 1]])
    with pytest.raises(NotCalibrated):
        build_connection(web_named('goldberg_w3'), 1, CLOSED)
    with pytest.raises(NotOrdinary):
        build_connection(template('x + y', 'x + y + z'), 2, CLOSED)


def test_frame_size_is_checked(web_named):
    with pytest.raises(NotOrdinary):
        TautologicalConnection(web_named('template_lambda_2'), 2, CLOSED, frame=[])


def test_connection_report_is_printable(web_named):
    report = build_connection(web_named('template_lambda_2'), 2, CLOSED).to_dict()
    assert report['rank'] == 1
    assert set(report['omega']['1,1']) == {'x^y', 'x^z', 'y^z'}
    assert report['eta']['1,1']['y'] == '0'


@pytest.mark.parametrize('name', ['template_lambda_2', 'template_lambda_half'])
def test_sampled_connection_agrees_with_the_symbolic_one(web_named, config, name):
    web = web_named(name)
    data = build_connection(web, 2, CLOSED)
    connection = SampledConnection(web, 2, CLOSED, config)
    for point in sample_points(web, config):
        frame, eta = connection.at(point)
        assert len(frame) == 1
        for lam in range(web.n):
            expected = evaluate(data.eta[0][0][lam], point, BIGFLOAT, config.precision)
            assert abs(eta[0][0][lam] - expected) < TOLERANCE


def test_transcendental_template_is_sampled(config):
    web = template(*TRANSCENDENTAL)
    data = build_connection(web, 2, CLOSED, config=config)
    assert data.flat is None and data.omega is None
    assert data.rank == 1
    assert flatness_verdict(data) == {'max_rank': None, 'pi': 1}
    assert len(data.samples) == config.points
    H, K = template_closed_forms(web)
    assert H != 0 and K != 0
    phi, psi = web.foliations[3].generators
    for sample in data.samples:
        for lam, symbol in enumerate(web.symbols):
            expected = H * sympy.diff(phi, symbol) + K * sympy.diff(psi, symbol)
            value = evaluate(expected, sample['point'], BIGFLOAT, config.precision)
            assert abs(sample['eta'][0][0][lam] - value) < TOLERANCE
    report = data.to_dict()
    assert report['flat'] is None
    assert [set(sample['eta']['1,1']) for sample in report['samples']] == [{'x', 'y', 'z'}] * config.points


def test_sampled_connection_needs_an_ordinary_point(config):
    connection = SampledConnection(template('x + y', 'x + y + z'), 2, CLOSED, config)
    with pytest.raises(NotOrdinary):
        connection.at({'x': sympy.Rational(1, 5), 'y': sympy.Rational(1, 7), 'z': sympy.Rational(-1, 3)})
