"""Ensemble scans: engine vs direct oracles, exact statistics, experiments."""

import math
from fractions import Fraction

import numpy as np
import pytest

from hyperell.characters import jacobi_symbol
from hyperell.ensemble import (ScanEngine, empirical_moment, enumerate_H_n,
                               h_size, moment_comparison,
                               nonsquare_cancellation_check,
                               square_orthogonality_check, tail_distribution,
                               truncation_experiment)
from hyperell.gf import GF, GFError
from hyperell.lfunctions import completed_l, short_euler_l
from hyperell.random_model import EULER_GAMMA_EXP, ModelParams, model_moment
from hyperell.util import round_degree, log_q, log2_q


def test_h_n_sizes_and_order():
    r = GF(5)
    assert len(list(enumerate_H_n(r, 1))) == 5
    h3 = list(enumerate_H_n(r, 3))
    assert len(h3) == 100
    assert len(list(enumerate_H_n(GF(3), 2))) == 6
    keys = [r.canonical_key(d) for d in h3]
    assert keys == sorted(keys)


@pytest.mark.parametrize("q,n", [(3, 3), (3, 5), (5, 2), (5, 4), (13, 2)])
def test_engine_matches_enumeration(q, n):
    r = GF(q)
    eng = ScanEngine(r, n)
    assert eng.moduli() == list(enumerate_H_n(r, n))
    assert eng.size == h_size(r, n)


def test_engine_chi_vs_jacobi():
    r = GF(5)
    eng = ScanEngine(r, 4)
    for p in r.primes_upto(3):
        col = eng.chi_column(p)
        for i in (0, 37, 211, eng.size - 1):
            assert col[i] == jacobi_symbol(r, p, eng.modulus(i))


def test_engine_ldata_vs_direct():
    r = GF(3)
    eng = ScanEngine(r, 4)
    rows = eng.ldata_rows()
    for i, D in enumerate(eng.moduli()):
        assert rows[i] == completed_l(r, D)


def test_engine_short_products_vs_direct():
    r = GF(5)
    eng = ScanEngine(r, 3)
    fracs = eng.short_product_fractions(2)
    for i in (0, 13, 50, 99):
        assert fracs[i] == short_euler_l(r, eng.modulus(i), 2)


def test_engine_thread_reproducibility():
    r = GF(5)
    a = ScanEngine(r, 5, threads=1).coefficient_matrix(4)
    b = ScanEngine(r, 5, threads=4).coefficient_matrix(4)
    assert np.array_equal(a, b)


def test_tail_distribution_exact():
    r = GF(5)
    rep = tail_distribution(r, 3, [0.0, 1.0 / EULER_GAMMA_EXP, 50.0])
    assert rep.phi_values[0] == 1           # L(1) > 0 always
    assert rep.phi_values[2] == 0
    # threshold L >= 1: exact fraction from the 100-curve scan
    count = sum(1 for D in enumerate_H_n(r, 3)
                if completed_l(r, D).value_at_one >= 1)
    assert rep.phi_values[1] == Fraction(count, 100)
    # nonincreasing along the grid
    grid = [0.0, 0.3, 0.6, 0.9, 1.2, 1.5]
    rep = tail_distribution(r, 3, grid)
    assert all(a >= b for a, b in zip(rep.phi_values, rep.phi_values[1:]))


def test_empirical_moment_trivial_and_types():
    r = GF(5)
    assert empirical_moment(r, 3, 0, 2) == 1
    m = empirical_moment(r, 4, 1, 1)
    assert isinstance(m, Fraction)
    m_float = empirical_moment(r, 4, 1.5, 1)
    assert isinstance(m_float, float)
    # integer-k exact path agrees with the float path
    assert abs(float(empirical_moment(r, 4, 2, 2))
               - empirical_moment(r, 4, 2.0 + 1e-12, 2)) < 1e-6


def _a_plus_minus(p_norm, k):
    x = Fraction(1, p_norm)
    down = (1 - x) ** -k
    up = (1 + x) ** -k
    return (down + up) / 2, (down - up) / 2


@pytest.mark.parametrize("n,k,y", [(2, 1, 1), (3, 1, 2), (3, 2, 2), (2, 2, 1)])
def test_moment_dual_path_exact(n, k, y):
    # engine product path vs the fully expanded character-sum path
    q = 3
    r = GF(q)
    primes = r.primes_upto(y)
    hn = list(enumerate_H_n(r, n))

    def s_value(f):
        return sum(jacobi_symbol(r, f, D) for D in hn)

    total = Fraction(0)
    for assign in range(3 ** len(primes)):
        digits = []
        a = assign
        for _ in primes:
            a, rem = divmod(a, 3)
            digits.append(rem)
        weight = Fraction(1)
        f = (1,)
        for p, role in zip(primes, digits):
            a_plus, a_minus = _a_plus_minus(r.norm(p), k)
            if role == 1:          # odd exponents at p
                weight *= a_minus
                f = r.mul(f, p)
            elif role == 2:        # even exponents >= 2 at p
                weight *= a_plus - 1
                f = r.mul(f, r.mul(p, p))
        total += weight * s_value(f)
    assert empirical_moment(r, n, k, y) == total / len(hn)


def test_moment_comparison_records():
    r = GF(5)
    recs = moment_comparison(r, 4, [1, 2], [1, 2])
    assert len(recs) == 4
    for rec in recs:
        assert 0.5 < rec["ratio"] < 1.5
        assert isinstance(rec["empirical"], Fraction)


def test_square_orthogonality():
    r = GF(5)
    t = r.t
    recs = square_orthogonality_check(r, 4, [(1,), t])
    assert recs[0]["observed"] == recs[0]["predicted"] == 1
    rec_t = recs[1]
    assert rec_t["predicted"] == Fraction(5, 6)
    # observed average is the coprime frequency, an exact fraction
    coprime = sum(1 for D in enumerate_H_n(r, 4) if D[0] != 0)
    assert rec_t["observed"] == Fraction(coprime, 500)
    assert rec_t["abs_err"] * 500 <= 10
    # prediction depends only on the radical
    recs2 = square_orthogonality_check(r, 4, [t, r.mul(t, t)])
    assert recs2[0]["predicted"] == recs2[1]["predicted"]
    assert recs2[0]["observed"] == recs2[1]["observed"]


def test_nonsquare_cancellation():
    r = GF(5)
    with pytest.raises(GFError):
        nonsquare_cancellation_check(r, 3, [r.mul(r.t, r.t)])
    recs3 = nonsquare_cancellation_check(r, 3, [r.t])
    assert abs(recs3[0]["char_sum"]) <= h_size(r, 3)
    # two scan orders agree: engine vs reversed brute force
    brute = sum(jacobi_symbol(r, r.t, D)
                for D in reversed(list(enumerate_H_n(r, 3))))
    assert recs3[0]["char_sum"] == brute
    # normalized statistic shrinks (weakly) from n=3 to n=5 for ell = t
    recs5 = nonsquare_cancellation_check(r, 5, [r.t])
    assert recs5[0]["normalized"] <= recs3[0]["normalized"] + 1e-12


def test_truncation_experiment():
    r = GF(5)
    recs = truncation_experiment(r, 5, 2.0)
    assert [rc["N"] for rc in recs] == [2, 3, 4]
    fractions = [rc["exceed_fraction"] for rc in recs]
    assert all(0 <= fr <= 1 for fr in fractions)
    # nonincreasing in N at fixed n
    assert all(a >= b for a, b in zip(fractions, fractions[1:]))
    expected_n = round_degree(log_q(5, 5) + log2_q(5, 5) + 3 * log_q(5, 2.0))
    assert recs[0]["N"] == expected_n == 2
    # brute-force the exceed count at the base length
    thr = Fraction(1) / Fraction(2.0 * log_q(5, 5))
    exceed = 0
    for D in enumerate_H_n(r, 5):
        full = completed_l(r, D).value_at_one
        short = short_euler_l(r, D, 2)
        if abs(full / short - 1) > thr:
            exceed += 1
    assert fractions[0] == Fraction(exceed, 2500)


def test_engine_guard():
    with pytest.raises(GFError):
        ScanEngine(GF(5), 13)
