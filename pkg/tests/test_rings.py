from fractions import Fraction

import pytest

from germkit import rings


def test_ring_kinds():
    assert rings.RING_Q.is_field()
    assert not rings.RING_Z.is_field()
    assert rings.ring_zmod(5).is_field()
    assert not rings.ring_zmod(6).is_field()


def test_indecomposable():
    assert rings.RING_Q.is_indecomposable()
    assert rings.RING_Z.is_indecomposable()
    assert rings.ring_zmod(5).is_indecomposable()
    assert rings.ring_zmod(4).is_indecomposable()  # prime power: only 0,1 idempotent
    assert not rings.ring_zmod(6).is_indecomposable()  # 3*3 = 3
    assert not rings.ring_zmod(10).is_indecomposable()


def test_arithmetic_normalization():
    R5 = rings.ring_zmod(5)
    assert R5.add(3, 4) == 2
    assert R5.inv(2) == 3
    assert rings.RING_Q.inv(Fraction(2, 3)) == Fraction(3, 2)
    assert rings.RING_Z.inv(-1) == -1
    with pytest.raises(rings.RingError):
        rings.RING_Z.inv(2)
    with pytest.raises(rings.RingError):
        R5.inv(0)


def test_parse_ring_spec():
    assert rings.parse_ring_spec("Q") == rings.RING_Q
    assert rings.parse_ring_spec("Z") == rings.RING_Z
    assert rings.parse_ring_spec("Zp:7") == rings.ring_zmod(7)
    with pytest.raises(rings.RingError):
        rings.parse_ring_spec("R")


def test_rref_known_matrix():
    R = rings.RING_Q
    rows = [[1, 2, 3], [2, 4, 6], [1, 0, 1]]
    red, piv = rings.rref(R, [[R.normalize(v) for v in r] for r in rows])
    assert piv == [0, 1]
    assert len(red) == 2
    # residue of a vector in the span is zero
    res = rings.reduce_vector(R, [R.normalize(v) for v in [3, 4, 7]], red, piv)
    assert all(v == 0 for v in res)
    res = rings.reduce_vector(R, [R.normalize(v) for v in [0, 0, 1]], red, piv)
    assert any(v != 0 for v in res)


def test_solve_in_span_field():
    R = rings.RING_Q
    gens = [[1, 1, 0], [0, 1, 1]]
    gens = [[R.normalize(v) for v in g] for g in gens]
    coeffs = rings.solve_in_span(R, gens, [R.normalize(v) for v in [1, 2, 1]])
    assert coeffs == [1, 1]
    assert rings.solve_in_span(R, gens, [R.normalize(v) for v in [1, 0, 1]]) is None


def test_solve_in_span_integers():
    Z = rings.RING_Z
    assert rings.solve_in_span(Z, [[2, 0], [0, 3]], [4, 3]) == [2, 1]
    assert rings.solve_in_span(Z, [[2, 0], [0, 3]], [1, 0]) is None
    assert rings.solve_in_span(Z, [[2, 4]], [1, 2]) is None
    # gcd combination: 3*(2,4) - 1*(5,10) = (1,2)
    coeffs = rings.solve_in_span(Z, [[2, 4], [5, 10]], [1, 2])
    assert coeffs is not None
    got = [coeffs[0] * 2 + coeffs[1] * 5, coeffs[0] * 4 + coeffs[1] * 10]
    assert got == [1, 2]


def test_solve_coefficients_reconstruct():
    R = rings.ring_zmod(5)
    gens = [[1, 2, 0], [0, 1, 4]]
    target = [2, 0, 4]  # 2*(1,2,0) + 1*(0,1,4) mod 5
    coeffs = rings.solve_in_span(R, gens, target)
    assert coeffs is not None
    got = [R.zero] * 3
    for c, g in zip(coeffs, gens):
        got = [R.add(a, R.mul(c, b)) for a, b in zip(got, g)]
    assert got == [R.normalize(v) for v in target]
