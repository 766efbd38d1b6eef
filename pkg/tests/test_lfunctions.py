"""L-polynomials: coefficients, completed form, symmetry, values, invariants."""

from fractions import Fraction

import pytest

from hyperell.characters import char_sum_monic
from hyperell.ensemble import enumerate_H_n
from hyperell.gf import GF, CacheVersionError, GFError
from hyperell.lfunctions import (LData, build_ldata, class_number_odd,
                                 class_number_regulator_even, completed_l,
                                 divisor_fn, h_fn, l_coefficients, l_value_one,
                                 load_lcache, save_lcache, short_euler_l,
                                 verify_functional_equation, verify_rh_zeros)


def test_l_coefficients_examples():
    r = GF(5)
    assert l_coefficients(r, (0, 1)) == [1]
    for d_ in [(2, 0, 1), (1, 1, 1), (3, 4, 1)]:
        if r.is_squarefree(d_):
            assert l_coefficients(r, d_) == [1, -1]
    # deg-3 modulus: direct summation oracle per coefficient
    D = (0, 2, 0, 1)
    coeffs = l_coefficients(r, D)
    assert coeffs == [char_sum_monic(r, D, m) for m in range(3)]
    assert coeffs == [1, -4, 5]
    with pytest.raises(GFError):
        l_coefficients(r, (1, 2, 1))   # (t+1)^2 not squarefree


def test_completed_l_structure():
    r = GF(5)
    ld = completed_l(r, (0, 2, 0, 1))
    assert (ld.lam, ld.genus) == (0, 1)
    for D in enumerate_H_n(r, 5):
        ld = completed_l(r, D)
        assert (ld.lam, ld.genus) == (0, 2)
        break
    ld = completed_l(r, (2, 0, 1))
    assert (ld.lam, ld.genus) == (1, 0)
    assert ld.star_coeffs == (1,)
    assert ld.coeffs[1] == char_sum_monic(r, (2, 0, 1), 1)


def test_build_ldata_rejects_inconsistent_coeffs():
    r = GF(5)
    # deg D even forces sum of coefficients to vanish
    with pytest.raises(AssertionError):
        build_ldata(r, (2, 0, 1), (1, -2))


@pytest.mark.parametrize("q,n", [(5, 3), (3, 5), (3, 4), (5, 4)])
def test_functional_equation_exhaustive(q, n):
    r = GF(q)
    for D in enumerate_H_n(r, n):
        assert verify_functional_equation(completed_l(r, D))


def test_rh_zeros():
    r = GF(5)
    ld = completed_l(r, (2, 0, 1))
    assert verify_rh_zeros(ld)        # genus 0, vacuous
    checked = 0
    for D in enumerate_H_n(r, 5):
        assert verify_rh_zeros(completed_l(r, D), tol=1e-8)
        checked += 1
        if checked >= 120:
            break
    # negative control: corrupted coefficients push roots off the circle
    good = completed_l(r, (0, 2, 0, 1))
    bad = LData(q=good.q, D=good.D, coeffs=good.coeffs, lam=good.lam,
                genus=good.genus, star_coeffs=(1, -4, 17),
                value_at_one=good.value_at_one)
    assert not verify_rh_zeros(bad)


def test_l_value_one():
    r = GF(5)
    assert l_value_one(completed_l(r, (0, 1))) == 1
    assert l_value_one(completed_l(r, (2, 0, 1))) == Fraction(4, 5)
    for D in list(enumerate_H_n(r, 3))[:20]:
        ld = completed_l(r, D)
        brute = sum(Fraction(c, 5 ** m) for m, c in enumerate(ld.coeffs))
        assert ld.value_at_one == brute > 0


def test_short_euler_examples():
    r = GF(5)
    D = (2, 0, 1)
    assert short_euler_l(r, D, 0) == 1
    assert short_euler_l(r, D, 1) == Fraction(3125, 3456)
    # growing truncation approaches the exact value
    exact = l_value_one(completed_l(r, D))
    errs = [abs(short_euler_l(r, D, y) / exact - 1) for y in (2, 4, 6)]
    assert errs[0] > errs[1] > errs[2]


def test_short_euler_trend_on_samples():
    r = GF(5)
    sample = list(enumerate_H_n(r, 4))[::97]
    for D in sample:
        exact = l_value_one(completed_l(r, D))
        errs = [abs(short_euler_l(r, D, y) / exact - 1) for y in (2, 5)]
        assert errs[1] <= errs[0]


def test_class_number_odd():
    r = GF(5)
    assert class_number_odd(completed_l(r, (0, 1))) == 1
    assert class_number_odd(completed_l(r, (0, 2, 0, 1))) == 2
    for D in enumerate_H_n(r, 3):
        assert class_number_odd(completed_l(r, D)) >= 1
    for D in enumerate_H_n(GF(3), 5):
        assert class_number_odd(completed_l(GF(3), D)) >= 1
    with pytest.raises(GFError):
        class_number_odd(completed_l(r, (2, 0, 1)))


def test_class_number_regulator_even():
    r = GF(5)
    assert class_number_regulator_even(completed_l(r, (2, 0, 1))) == 1
    for D in enumerate_H_n(r, 4):
        assert class_number_regulator_even(completed_l(r, D)) >= 1
    for D in enumerate_H_n(GF(3), 4):
        assert class_number_regulator_even(completed_l(GF(3), D)) >= 1
    with pytest.raises(GFError):
        class_number_regulator_even(completed_l(r, (0, 1)))


def test_divisor_fn():
    r = GF(5)
    cube = r.mul(r.mul(r.t, r.t), r.t)
    assert divisor_fn(1, r.factor(cube)) == 1
    assert divisor_fn(1, r.factor((3, 1, 2))) == 1
    assert divisor_fn(2, r.factor(cube)) == 4
    assert abs(divisor_fn(0.5, r.factor(r.t)) - 0.5) < 1e-12
    assert divisor_fn(0, r.factor(r.t)) == 0
    assert divisor_fn(0, r.factor((1,))) == 1
    assert divisor_fn(3, r.factor((0, 0, 1))) == 6   # d_3(P^2) = C(4,2)


def test_h_fn():
    r = GF(5)
    assert h_fn(r, r.factor((1,))) == 1
    assert h_fn(r, r.factor(r.t)) == Fraction(5, 6)
    assert h_fn(r, r.factor((0, 0, 1))) == h_fn(r, r.factor(r.t))
    assert h_fn(r, r.factor((0, 1, 1))) == Fraction(5, 6) ** 2


def test_lcache_roundtrip(tmp_path):
    r = GF(5)
    lds = [completed_l(r, D) for D in enumerate_H_n(r, 3)]
    path = tmp_path / "lcache_q5_n3.csv"
    save_lcache(path, r, 3, lds)
    assert path.read_text().splitlines()[0] == "#hyperell-l1 lcache v1"
    loaded = load_lcache(path, r, 3)
    assert loaded == sorted(lds, key=lambda ld: r.canonical_key(ld.D))
    # version mismatch raises
    lines = path.read_text().splitlines()
    lines[0] = "#hyperell-l1 lcache v9"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CacheVersionError):
        load_lcache(path, r, 3)
