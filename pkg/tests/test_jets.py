import pytest
import sympy

from models.errors import WebRankError
from models.matrices import SymbolicMatrix, rank, kernel_basis
from models.symbolic import MultiIndex, multi_indices, derive_multi
from models.webmodel import Foliation, Web
from controllers.analysis import is_strongly_p_ordinary, rank_profile
from controllers.combinat import binom, c, z, k_one, pi_prime
from controllers.jets import (m_coeffs, n_coeffs_topdegree, m_coeffs_leibniz,
                              contingency_tables, CoeffCache, koszul_matrix,
                              koszul_labels, closed_symbol_basis, row_labels,
                              column_labels, closed_column_labels, build_plain,
                              build_closed, prolong)

x, y, z_ = sympy.symbols('x y z')
SYMBOLS = (x, y, z_)
u1, u2 = sympy.symbols('u1 u2')
SLOTS = (u1, u2)


def generic_function(max_degree, coefficient=lambda K: 1 + sum(K) + K[0]):
    return sympy.Add(*[coefficient(K) * u1 ** K[0] * u2 ** K[1]
                       for degree in range(max_degree + 1)
                       for K in multi_indices(2, degree)])


def assert_chain_rule(foliation, weight, table, L, f):
    substitution = dict(zip(SLOTS, foliation.generators))
    composed = f.subs(substitution) * weight
    direct = derive_multi(composed, L, SYMBOLS)
    expanded = sympy.Add(*[table.get(L, K) * derive_multi(f, K, SLOTS).subs(substitution)
                           for degree in range(sum(L) + 1)
                           for K in multi_indices(2, degree)])
    assert sympy.cancel(direct - expanded) == 0, (foliation, weight, L)


def test_lowest_coefficients():
    foliation = Foliation((x * y + z_, x - z_ ** 2))
    weight = 1 + x * z_
    table = m_coeffs(foliation, weight, 1, SYMBOLS)
    assert table.get((0, 0, 0), (0, 0)) == weight
    assert sympy.expand(table.get((1, 0, 0), (0, 0))) == z_
    assert sympy.expand(table.get((0, 0, 1), (0, 1)) - weight * (-2 * z_)) == 0
    assert table.get((0, 1, 0), (0, 1)) == 0


def test_coefficients_follow_the_chain_rule():
    foliation = Foliation((x * y + z_, x - z_ ** 2))
    weight = 1 + x * z_
    table = m_coeffs(foliation, weight, 3, SYMBOLS)
    f = generic_function(4)
    for degree in range(4):
        for L in multi_indices(3, degree):
            assert_chain_rule(foliation, weight, table, L, f)


def test_coefficients_of_a_rational_foliation():
    foliation = Foliation((x / (1 + y), y * z_))
    weight = 1 / (1 + x)
    table = m_coeffs(foliation, weight, 2, SYMBOLS)
    f = generic_function(3)
    for degree in range(3):
        for L in multi_indices(3, degree):
            assert_chain_rule(foliation, weight, table, L, f)


@pytest.mark.slow
def test_chain_rule_on_random_instances(rng):
    monomials = [sympy.Integer(1), x, y, z_, x * y, y * z_, x * z_, x ** 2, z_ ** 2, y ** 3]
    f = generic_function(4, lambda K: rng.randint(-3, 3) or 1)
    checked = 0
    while checked < 200:
        generators = tuple(sympy.Add(*[rng.randint(-2, 2) * m for m in rng.sample(monomials, 3)])
                           for _ in range(2))
        weight = sympy.Add(*[rng.randint(-2, 2) * m for m in rng.sample(monomials, 2)]) + 1
        foliation = Foliation(generators)
        table = m_coeffs(foliation, weight, 3, SYMBOLS)
        L = rng.choice([L for degree in range(4) for L in multi_indices(3, degree)])
        assert_chain_rule(foliation, weight, table, L, f)
        checked += 1


def test_top_degree_coefficients_match_the_recurrence():
    foliation = Foliation((x * y + z_, x - z_ ** 2))
    table = m_coeffs(foliation, 1, 3, SYMBOLS)
    for degree in range(4):
        for L in multi_indices(3, degree):
            for K in multi_indices(2, degree):
                assert sympy.expand(n_coeffs_topdegree(foliation, L, K, SYMBOLS) - table.get(L, K)) == 0


def test_top_degree_needs_equal_orders():
    with pytest.raises(WebRankError):
        n_coeffs_topdegree(Foliation((x, y)), (1, 0, 0), (0, 0), SYMBOLS)


def test_leibniz_rule_matches_the_recurrence():
    foliation = Foliation((x * y + z_, x - z_ ** 2))
    weight = x ** 2 + y * z_ + 3
    table = m_coeffs(foliation, weight, 3, SYMBOLS)
    unit = m_coeffs(foliation, 1, 3, SYMBOLS)
    for degree in range(4):
        for L in multi_indices(3, degree):
            for K_degree in range(degree + 1):
                for K in multi_indices(2, K_degree):
                    leibniz = m_coeffs_leibniz(foliation, weight, L, K, SYMBOLS, unit)
                    assert sympy.expand(leibniz - table.get(L, K)) == 0


def test_contingency_tables():
    assert len(list(contingency_tables((1, 1), (1, 1)))) == 2
    assert len(list(contingency_tables((2, 1), (1, 2)))) == 2
    assert list(contingency_tables((0, 0), (0,))) == [[(0, 0)]]
    assert list(contingency_tables((1,), (2,))) == []


def test_cache_reuses_deeper_tables():
    cache = CoeffCache()
    foliation = Foliation((x, y * z_))
    deep = cache.table(foliation, 1, 3, SYMBOLS)
    assert cache.table(foliation, 1, 2, SYMBOLS) is deep
    assert cache.table(foliation, x, 1, SYMBOLS) is not deep


@pytest.mark.parametrize('q', [1, 2, 3, pytest.param(4, marks=pytest.mark.slow)])
def test_koszul_complex_is_exact(q):
    for p in range(1, q + 1):
        for h in range(1, 5):
            differential = koszul_matrix(q, p, h)
            closed = differential.columns - rank(differential)
            assert closed == z(q, p, h)
            assert len(kernel_basis(differential)) == closed
            if p < q and h >= 2:
                following = koszul_matrix(q, p + 1, h - 1)
                for column in range(differential.columns):
                    assert all(value == 0 for value in following.apply(differential.column(column)))
            if p == 1:
                # closed 1-forms of degree h are the differentials of degree h+1 polynomials
                assert closed == c(q, h + 1)
            else:
                assert rank(koszul_matrix(q, p - 1, h + 1)) == closed


def test_koszul_sign_convention():
    matrix = koszul_matrix(2, 1, 1)
    labels = koszul_labels(2, 1, 1)
    # x2 dx1 goes to dx2 ^ dx1 = -dx1 ^ dx2
    column = labels.index(((0,), MultiIndex((0, 1))))
    assert matrix.column(column) == [-1]
    column = labels.index(((1,), MultiIndex((1, 0))))
    assert matrix.column(column) == [1]


def test_closed_symbol_basis_dimensions():
    for q in range(1, 4):
        for p in range(1, q + 1):
            for h in range(4):
                basis = closed_symbol_basis(q, p, h)
                assert len(basis) == z(q, p, h)
                if 1 <= h and p < q:
                    matrix = koszul_matrix(q, p, h)
                    for vector in basis.vectors:
                        assert all(value == 0 for value in matrix.apply(vector))


def test_closed_basis_coordinates_recover_combinations():
    basis = closed_symbol_basis(3, 1, 2)
    jet_vectors = basis.jet_vectors
    weights = list(range(1, len(basis) + 1))
    combined = [sum(weight * vector[index] for weight, vector in zip(weights, jet_vectors))
                for index in range(len(basis.labels))]
    assert basis.coordinates(combined) == weights


def test_labels():
    assert row_labels(3, 1, 1)[:2] == [((0,), (1, 0, 0)), ((0,), (0, 1, 0))]
    assert column_labels(2, 2, 1, 1)[:3] == [(0, (0,), (1, 0)), (1, (0,), (1, 0)), (0, (0,), (0, 1))]
    assert closed_column_labels(2, 2, 1, 1) == [(0, 0), (1, 0), (0, 1), (1, 1), (0, 2), (1, 2)]


def test_plain_matrices_of_the_template(web_named):
    web = web_named('template_lambda_2')
    matrices = build_plain(web, 2, 1)
    assert matrices.P(0).shape == (3, 4)
    assert matrices.P(1).shape == (binom(3, 2) * c(3, 1), 4 * c(2, 1))
    assert matrices.M(1).shape == (12, 12)
    assert matrices.Q(0).shape == (3, 0)
    assert matrices.Q(1).shape == (9, 4)
    assert matrices.P(0).column(0) == [1, 0, 0]
    assert matrices.block(0, 1).is_zero()
    with pytest.raises(WebRankError):
        matrices.P(2)


def test_plain_matrices_dump(web_named):
    dump = build_plain(web_named('parallel_lines'), 2, 1).dump()
    assert sorted(dump) == ['P[0,0]', 'P[1,0]', 'P[1,1]']
    top = dump['P[0,0]']
    assert len(top['rows']) == 3 and len(top['columns']) == 4
    # columns are the 2x2 jacobian minors of the four foliations
    assert top['entries'] == [['1', '0', '0', '1'], ['0', '0', '-1', '3'], ['0', '1', '0', '2']]
    assert (len(dump['P[1,1]']['rows']), len(dump['P[1,1]']['columns'])) == (9, 8)
    assert all(entry == '0' for row in dump['P[1,0]']['entries'] for entry in row)


def test_closed_matrices_agree_with_plain_ones_in_top_degree(web_named):
    web = web_named('template_lambda_2')
    plain = build_plain(web, 2, 1)
    closed = build_closed(web, 2, 1, plain=plain)
    for key, block in plain.blocks.items():
        assert closed.blocks[key].rows == block.rows


def test_closed_matrices_have_closed_columns(web_named):
    web = web_named('parallel_lines')
    closed = build_closed(web, 1, 2)
    assert closed.P(2).shape == (binom(3, 1) * c(3, 2), 4 * z(2, 1, 2))
    assert closed.M(2).shape[1] == 4 * sum(z(2, 1, h) for h in range(3))
    assert rank(closed.P(0)) == 3


def test_expand_then_contract_is_the_identity(web_named):
    web = web_named('parallel_lines')
    closed = build_closed(web, 1, 2)
    for h in range(3):
        width = len(closed.columns_at(h))
        vector = [sympy.Integer(3 * index - 5) for index in range(width)]
        plain = closed.expand(h, vector)
        assert len(plain) == len(column_labels(web.d, web.q, 1, h))
        assert closed.contract(h, plain) == vector


def test_prolong_is_the_chain_rule(web_named):
    web = web_named('template_lambda_2')
    foliation = web.foliations[3]
    substitution = dict(zip(SLOTS, foliation.generators))
    f = u1 ** 3 * u2 + 2 * u2 ** 2 - u1
    for h in range(2):
        jet = {((0,), K): derive_multi(f, K, SLOTS).subs(substitution)
               for K in multi_indices(2, h + 1)}
        for lam, symbol in enumerate(SYMBOLS):
            predicted = prolong(web, 3, jet, lam)
            for K in multi_indices(2, h):
                actual = sympy.diff(derive_multi(f, K, SLOTS).subs(substitution), symbol)
                assert sympy.expand(predicted[((0,), K)] - actual) == 0
            assert set(predicted) == {((1,), K) for K in multi_indices(2, h)} | \
                {((0,), K) for K in multi_indices(2, h)}


def test_prolong_needs_a_single_positive_order(web_named):
    web = web_named('template_lambda_2')
    with pytest.raises(WebRankError):
        prolong(web, 0, {((0,), MultiIndex((0, 0))): 1}, 0)
    with pytest.raises(WebRankError):
        prolong(web, 0, {((0,), MultiIndex((1, 0))): 1, ((0,), MultiIndex((0, 0))): 1}, 0)


def random_affine_web(rng):
    while True:
        n = rng.randint(2, 4)
        q = rng.randint(1, min(2, n - 1))
        names = ['x', 'y', 'z', 't'][:n]

        def generator():
            return ' + '.join('{}*{}'.format(rng.randint(-3, 3), name) for name in names)
        web = Web.from_dict({'name': 'affine', 'dimension': n, 'codimension': q, 'variables': names,
                             'foliations': [{'generators': [generator() for _ in range(q)]}
                                            for _ in range(rng.randint(2, 6))]})
        if all(rank(SymbolicMatrix(foliation.jacobian(web.symbols))) == q for foliation in web.foliations):
            return web


@pytest.mark.slow
def test_affine_webs_have_no_coupling(rng, config):
    ordinary = 0
    for _ in range(20):
        web = random_affine_web(rng)
        p = rng.randint(1, web.q)
        for matrices in (build_plain(web, p, 2), build_closed(web, p, 2)):
            for k in (1, 2):
                assert matrices.Q(k).is_zero()
        threshold = k_one(web.n, web.d, web.q, p)
        if threshold is None or not is_strongly_p_ordinary(web, p, config).ordinary:
            continue
        ordinary += 1
        records, _ = rank_profile(web, p, threshold + 2, True, config)
        expected = pi_prime(web.n, web.d, web.q, p)
        assert [record.generic_rho for record in records[threshold:]] == [expected] * 3
    assert ordinary > 0
