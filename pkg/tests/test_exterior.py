from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import forms, scalars
from pkahler.exterior import (
    Form, complement, conjugate, contract, is_simple, merge_sign, multi_indices, pair_top, phi,
    phibar, real_basis, sigma, volume_form, wedge,
)
from pkahler.scalar import I, GaussianRational, format_fraction, parse_fraction


# scalars -----------------------------------------------------------------------------


@given(scalars, scalars, scalars)
def test_field_laws(a, b, c):
    assert a + b == b + a and a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    if b != 0:
        assert (a / b) * b == a


@given(scalars)
def test_scalar_lowest_terms(a):
    for q in (a.re, a.im):
        assert q.denominator > 0
        assert parse_fraction(format_fraction(q)) == q
    assert GaussianRational.from_json(a.to_json()) == a


def test_sigma_values():
    assert sigma(1) == GaussianRational(0, Fraction(1, 2))
    assert sigma(2) == GaussianRational(Fraction(1, 4))
    assert sigma(3) == GaussianRational(0, Fraction(1, 8))
    assert sigma(4) == GaussianRational(Fraction(1, 16))
    for p in range(1, 7):
        assert sigma(p).is_real() == (p % 2 == 0)


def test_volume_form():
    v = volume_form(3)
    assert list(v.terms.values()) == [sigma(3)]
    assert v.is_real()
    assert pair_top(v, Form.scalar(3)) == 1


# index helpers ----------------------------------------------------------------------


def test_merge_sign_and_complement():
    assert merge_sign((1, 3), (2,)) == (-1, (1, 2, 3))
    assert merge_sign((2,), (1, 3)) == (-1, (1, 2, 3))
    assert merge_sign((1, 2), (2,))[0] == 0
    assert complement(4, (1, 3)) == (2, 4)
    assert len(multi_indices(5, 2)) == 10
    assert multi_indices(3, 2) == ((1, 2), (1, 3), (2, 3))


def test_basis_sorts_with_sign():
    assert Form.basis(3, (2, 1), ()) == Form.basis(3, (1, 2), (), -1)
    assert Form.basis(3, (1, 1), ()).is_zero()


# wedge and conjugation --------------------------------------------------------------


@given(forms(), forms(), forms())
def test_wedge_associative(a, b, c):
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


@given(forms(), forms())
def test_wedge_distributes(a, b):
    c = phi(3, 1) + phibar(3, 2)
    assert wedge(a + b, c) == wedge(a, c) + wedge(b, c)


@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3), st.integers(0, 3), st.data())
def test_graded_commutativity(p, q, r, s, data):
    a = data.draw(forms(p=p, q=q))
    b = data.draw(forms(p=r, q=s))
    sign = -1 if ((p + q) * (r + s)) % 2 else 1
    assert wedge(a, b) == wedge(b, a) * sign


@given(forms(), forms())
def test_conjugation(a, b):
    assert conjugate(conjugate(a)) == a
    assert conjugate(wedge(a, b)) == wedge(conjugate(a), conjugate(b))
    assert (a + conjugate(a)).is_real()


@given(forms())
def test_json_round_trip(a):
    assert Form.from_json(a.to_json()) == a
    assert Form.loads(a.dumps()) == a


def test_dphi_dphibar_anticommute():
    assert wedge(phi(2, 1), phibar(2, 1)) == -wedge(phibar(2, 1), phi(2, 1))
    assert wedge(phi(2, 1), phi(2, 1)).is_zero()


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_sigma_simple_generator_is_real(n):
    for p in range(1, n + 1):
        for J in multi_indices(n, p):
            g = Form.basis(n, J, J, sigma(p))
            assert g.is_real()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_kaehler_power_normalization(n):
    om = Form(n, {((j,), (j,)): sigma(1) for j in range(1, n + 1)})
    top = om.power(n)
    assert pair_top(top, Form.scalar(n)) == np.prod(range(1, n + 1))
    # omega^p has coefficient p! sigma_p on each diagonal pair
    for p in range(1, n):
        w = om.power(p)
        for J in multi_indices(n, p):
            assert w[(J, J)] == sigma(p) * int(np.prod(range(1, p + 1)))


def test_pair_top_sign_convention():
    n = 2
    a = Form.basis(n, (1,), (1,), sigma(1))
    b = Form.basis(n, (2,), (2,), sigma(1))
    assert pair_top(a, b) == 1
    with pytest.raises(ValueError):
        pair_top(a, volume_form(2))


def test_contract():
    a = Form.basis(3, (1, 2, 3), ())
    assert contract((2,), a) == Form.basis(3, (1, 3), (), -1)
    assert contract((1, 2), a) == phi(3, 3)


@pytest.mark.parametrize("n,p,dim", [(2, 1, 4), (3, 1, 9), (3, 2, 9), (4, 2, 36)])
def test_real_basis_dimension(n, p, dim):
    B = real_basis(n, p)
    assert B.dim == dim
    assert all(e.is_real() for e in B.elements)


# simplicity --------------------------------------------------------------------------


def _fraction_rank(M):
    """Plain Gaussian elimination, kept separate from the package's linear algebra."""
    M = [[Fraction(x) for x in row] for row in M]
    rank, col, rows, cols = 0, 0, len(M), len(M[0])
    while rank < rows and col < cols:
        piv = next((r for r in range(rank, rows) if M[r][col] != 0), None)
        if piv is None:
            col += 1
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for r in range(rows):
            if r != rank and M[r][col] != 0:
                f = M[r][col] / M[rank][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[rank])]
        rank += 1
        col += 1
    return rank


def brute_force_simple(eta: Form) -> bool:
    """A (2,0)-form is a wedge of two 1-forms iff its skew matrix has rank <= 2."""
    n = eta.n
    re = [[Fraction(0)] * n for _ in range(n)]
    im = [[Fraction(0)] * n for _ in range(n)]
    for (Iidx, _), c in eta.items():
        a, b = Iidx[0] - 1, Iidx[1] - 1
        re[a][b], re[b][a] = c.re, -c.re
        im[a][b], im[b][a] = c.im, -c.im
    # complex rank via the real 2n x 2n realification (rank doubles)
    big = [r1 + [-x for x in r2] for r1, r2 in zip(re, im)] + [r2 + r1 for r1, r2 in zip(re, im)]
    return _fraction_rank(big) // 2 <= 2


def random_two_forms(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for t in range(count):
        if t % 2 == 0:
            u = sum((phi(4, i) * GaussianRational(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
                     for i in range(1, 5)), Form.zero(4))
            v = sum((phi(4, i) * GaussianRational(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
                     for i in range(1, 5)), Form.zero(4))
            out.append(wedge(u, v))
        else:
            terms = {}
            for pair in combinations(range(1, 5), 2):
                if rng.random() < 0.6:
                    terms[(pair, ())] = GaussianRational(int(rng.integers(-2, 3)), int(rng.integers(-2, 3)))
            out.append(Form(4, terms))
    return out


def test_simplicity_matches_brute_force():
    forms_ = random_two_forms(200, 3)
    verdicts = [bool(is_simple(e)) for e in forms_]
    assert verdicts == [brute_force_simple(e) for e in forms_]
    assert 0 < sum(verdicts) < len(verdicts)


def test_simple_factors_reproduce_form():
    for e in random_two_forms(40, 5):
        res = is_simple(e)
        if res and not e.is_zero():
            assert wedge(*res.factors) == e


def test_nonsimple_witness():
    g = wedge(phi(4, 1), phi(4, 2)) + wedge(phi(4, 3), phi(4, 4))
    res = is_simple(g)
    assert not res
    J, rel = res.violated
    assert rel == wedge(contract(J, g), g) and not rel.is_zero()


def test_simple_three_forms():
    e = wedge(phi(4, 1) + phi(4, 2), phi(4, 3) * I, phi(4, 4) - phi(4, 1))
    assert is_simple(e)
    assert is_simple(Form.basis(4, (1, 2, 3), ()) + Form.basis(4, (2, 3, 4), ()))
    assert not is_simple(Form.basis(5, (1, 2, 3), ()) + Form.basis(5, (1, 4, 5), ()))
    with pytest.raises(ValueError):
        is_simple(Form.basis(4, (1,), (2,)))
