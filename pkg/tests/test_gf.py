"""Exact arithmetic in F_q[t]: ring axioms, enumeration, counting, caching."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperell.gf import GF, CacheVersionError, GFError, load_ptable, save_ptable


@pytest.fixture(scope="module", params=[3, 5])
def ring(request):
    return GF(request.param)


def polys(q, max_deg=5):
    return st.lists(st.integers(0, q - 1), max_size=max_deg + 1).map(
        lambda c: GF(q).poly(c))


def test_field_order_validation():
    with pytest.raises(GFError):
        GF(4)
    with pytest.raises(GFError):
        GF(2)
    with pytest.raises(GFError):
        GF(9)
    assert GF(13).q == 13


def test_mul_examples():
    r = GF(5)
    assert r.mul((1, 1), (4, 1)) == (4, 0, 1)     # (t+1)(t+4) = t^2+4
    f = (3, 2, 1)
    assert r.mul(f, r.one) == f
    assert r.mul(f, r.zero) == r.zero


def test_divmod_examples():
    r = GF(5)
    quo, rem = r.divmod((0, 0, 1), (2, 1))        # t^2 / (t+2)
    assert (quo, rem) == ((3, 1), (4,))
    a = (1, 2, 1)
    assert r.divmod(a, a) == ((1,), ())
    assert r.divmod((1, 1), (0, 0, 1)) == ((), (1, 1))
    with pytest.raises(GFError):
        r.divmod(a, ())


def test_gcd_examples():
    r = GF(5)
    assert r.gcd((2, 4), ()) == r.monic((2, 4))
    assert r.gcd((4, 0, 1), (1, 1)) == (1, 1)     # t^2+4 = (t+1)(t+4)
    assert r.gcd((2, 0, 1), (1, 1)) == (1,)
    with pytest.raises(GFError):
        r.gcd((), ())


def test_powmod_examples():
    r = GF(5)
    m = (2, 0, 1)
    assert r.powmod((3, 1), 0, m) == (1,)
    assert r.powmod(r.t, 12, m) == (4,)           # t^2 = -2, (-2)^6 = 64 = 4
    assert r.powmod((3, 1), 1, m) == (3, 1)
    # exponent at ensemble scale stays exact
    assert r.powmod(r.t, 5 ** 6, (2, 0, 0, 1)) == r.powmod(
        r.powmod(r.t, 5 ** 3, (2, 0, 0, 1)), 5 ** 3, (2, 0, 0, 1))
    with pytest.raises(GFError):
        r.powmod(r.t, 3, ())


def test_squarefree_examples():
    r = GF(5)
    assert not r.is_squarefree((0, 0, 1))                 # t^2
    assert r.is_squarefree((1, 0, 1))                     # (t+2)(t+3)
    assert not GF(3).is_squarefree((0, 0, 0, 1))          # t^3, derivative 0
    with pytest.raises(GFError):
        r.is_squarefree(())


def test_irreducible_examples():
    r = GF(5)
    assert r.is_irreducible((0, 1))
    assert r.is_irreducible((2, 0, 1))
    assert not r.is_irreducible((1, 0, 1))
    with pytest.raises(GFError):
        r.is_irreducible((2, 2))       # non-monic


def test_enumerate_monic_order_and_count():
    r = GF(5)
    assert list(r.monics(0)) == [(1,)]
    linear = list(r.monics(1))
    assert linear == [(0, 1), (1, 1), (2, 1), (3, 1), (4, 1)]
    assert len(list(GF(3).monics(2))) == 9
    # canonical key orders by (degree, lex with constant fastest)
    keys = [r.canonical_key(f) for f in r.monics(2)]
    assert keys == sorted(keys)


def test_irreducible_tables_and_counts(ring):
    q = ring.q
    assert len(ring.irreducibles(1)) == q
    # Gauss count cross-checked against the filtered enumeration
    for d in (2, 3, 4):
        table = ring.irreducibles(d)
        assert len(table) == ring.pi_exact(d)
        brute = [f for f in ring.monics(d) if ring.is_irreducible(f)]
        assert list(table) == brute
    assert GF(5).pi_exact(2) == 10
    assert GF(3).pi_exact(4) == 18
    assert GF(3).pi_exact(3) == 8


def test_gauss_identity_exact(ring):
    # sum over d | n of d * pi_q(d) = q^n
    for n in range(1, 7):
        total = sum(d * ring.pi_exact(d) for d in range(1, n + 1) if n % d == 0)
        assert total == ring.q ** n


def test_squarefree_cardinality(ring):
    for n in range(2, 7):
        count = sum(1 for f in ring.monics(n) if ring.is_squarefree(f))
        assert count == ring.q ** n - ring.q ** (n - 1)


def test_factor_recompose(ring):
    for n in range(1, 6):
        for f in ring.monics(n):
            fac = ring.factor(f)
            assert fac.expand(ring) == f
            degs = [len(p) - 1 for p, _ in fac.factors]
            assert degs == sorted(degs)
            for p, _ in fac.factors:
                assert ring.is_irreducible(p)


def test_factor_examples():
    r = GF(5)
    assert r.factor((0, 1)).factors == (((0, 1), 1),)
    assert r.factor((1, 0, 1)).factors == (((2, 1), 1), ((3, 1), 1))
    assert r.factor((1, 2, 1)).factors == (((1, 1), 2),)
    assert r.factor((3,)) == r.factor((3,))
    assert r.factor((3,)).unit == 3 and r.factor((3,)).factors == ()
    with pytest.raises(GFError):
        r.factor(())


def test_irreducible_agrees_with_trial_division(ring):
    for n in range(2, 7):
        for f in ring.monics(n):
            has_small = any(
                not ring.divmod(f, p)[1]
                for d in range(1, n // 2 + 1)
                for p in ring.irreducibles(d))
            assert ring.is_irreducible(f) == (not has_small)


@settings(max_examples=150, deadline=None)
@given(data=st.data(), q=st.sampled_from([3, 5]))
def test_ring_axioms(data, q):
    r = GF(q)
    a = data.draw(polys(q))
    b = data.draw(polys(q))
    c = data.draw(polys(q))
    assert r.mul(r.add(a, b), c) == r.add(r.mul(a, c), r.mul(b, c))
    assert r.mul(a, b) == r.mul(b, a)
    assert r.add(a, r.neg(a)) == ()
    if b:
        quo, rem = r.divmod(a, b)
        assert r.add(r.mul(quo, b), rem) == a
        assert len(rem) < len(b)


@settings(max_examples=60, deadline=None)
@given(data=st.data(), q=st.sampled_from([3, 5]))
def test_degree_and_norm(data, q):
    r = GF(q)
    a = data.draw(polys(q))
    b = data.draw(polys(q))
    if a and b:
        assert r.deg(r.mul(a, b)) == r.deg(a) + r.deg(b)
        assert r.norm(r.mul(a, b)) == r.norm(a) * r.norm(b)
    assert r.norm(()) == 0


def test_text_roundtrip():
    r = GF(5)
    assert r.from_text("1,3,1") == (1, 3, 1)
    assert r.to_text((1, 3, 1)) == "1,3,1"
    assert r.from_text("") == ()
    assert r.from_text("6,1") == (1, 1)   # residues normalized mod q


def test_ptable_cache_roundtrip(tmp_path):
    r = GF(5)
    path = tmp_path / "ptable_q5.csv"
    save_ptable(path, r, 3)
    fresh = GF.__wrapped__(5)
    assert load_ptable(path, fresh) == 3
    for d in (1, 2, 3):
        assert fresh.irreducibles(d) == r.irreducibles(d)
    head = path.read_text().splitlines()[0]
    assert head == "#hyperell-l1 ptable v1"


def test_ptable_version_mismatch(tmp_path):
    r = GF(5)
    path = tmp_path / "ptable.csv"
    save_ptable(path, r, 2)
    text = path.read_text().splitlines()
    text[0] = "#hyperell-l1 ptable v999"
    path.write_text("\n".join(text) + "\n")
    with pytest.raises(CacheVersionError):
        load_ptable(path, GF.__wrapped__(5))
