"""Exact L-polynomials of quadratic characters over F_q[t].

For monic squarefree D the L-polynomial is sum_n c_n u^n with
c_n = sum over monic f of degree n of chi_D(f); it has degree at most
deg D - 1, carries a trivial zero at u = 1 exactly when deg D is even,
and after dividing that zero out the completed polynomial L* of degree
2g = deg D - 1 - lambda satisfies the exact coefficient symmetry
a_{2g-i} = q^(g-i) a_i and has all roots on |u| = q^(-1/2).

Values at s = 1 (u = 1/q) are exact rationals, and the class-number
identities h = q^g L(1) (odd degree) and h*R = q^(g+1) L(1)/(q-1)
(even degree) are asserted to land on positive integers; any
non-integrality is a hard internal failure, not a report entry.
"""

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from hyperell.characters import char_sum_monic, jacobi_symbol
from hyperell.gf import GFError

LCACHE_VERSION = "#hyperell-l1 lcache v1"


class RootFindingError(RuntimeError):
    """Numerical root finder failed to converge; distinct from a False check."""


@dataclass(frozen=True)
class LData:
    """Completed L-function record for one modulus D."""

    q: int
    D: tuple
    coeffs: tuple          # c_0 .. c_{deg D - 1}
    lam: int               # order of the trivial zero at u = 1
    genus: int
    star_coeffs: tuple     # a_0 .. a_{2g}
    value_at_one: Fraction


def l_coefficients(ring, D):
    """Coefficients c_0..c_{deg D - 1} by direct character sums."""
    _check_modulus(ring, D)
    return [char_sum_monic(ring, D, m) for m in range(len(D) - 1)]


def build_ldata(ring, D, coeffs):
    """Assemble an LData from precomputed coefficients.

    Divides out (1-u)^lambda exactly; a nonzero remainder means the
    coefficients are inconsistent and raises (must never fire on real input).
    """
    _check_modulus(ring, D)
    d = len(D) - 1
    coeffs = tuple(int(c) for c in coeffs)
    if len(coeffs) != d:
        raise GFError(f"expected {d} coefficients, got {len(coeffs)}")
    lam = 1 if d % 2 == 0 else 0
    if lam:
        # Synthetic division by (1 - u): a_i = c_0 + ... + c_i.
        star = []
        acc = 0
        for c in coeffs[:-1]:
            acc += c
            star.append(acc)
        if acc + coeffs[-1] != 0:
            raise AssertionError(
                f"inexact division by (1 - u) for D={ring.to_text(D)}")
        star = tuple(star)
    else:
        star = coeffs
    genus2 = d - 1 - lam
    assert genus2 % 2 == 0 and len(star) == genus2 + 1
    k = max(d - 1, 0)
    num = sum(c * ring.q ** (k - m) for m, c in enumerate(coeffs))
    value = Fraction(num, ring.q ** k) if coeffs else Fraction(1)
    return LData(q=ring.q, D=D, coeffs=coeffs, lam=lam, genus=genus2 // 2,
                 star_coeffs=star, value_at_one=value)


def completed_l(ring, D):
    """Full LData for D: coefficients, trivial-zero order, genus, L(1)."""
    return build_ldata(ring, D, l_coefficients(ring, D))


def verify_functional_equation(ld):
    """Exact coefficient symmetry a_{2g-i} = q^(g-i) a_i."""
    a = ld.star_coeffs
    g = ld.genus
    q = ld.q
    return all(a[2 * g - i] == q ** (g - i) * a[i] for i in range(g + 1))


def verify_rh_zeros(ld, tol=1e-8):
    """All roots of the completed polynomial lie within tol of |u| = q^(-1/2).

    Roots come from the companion-matrix eigenvalues behind numpy's root
    finder; non-convergence raises RootFindingError rather than returning
    False.  Vacuously true for genus 0.
    """
    if ld.genus == 0:
        return True
    try:
        roots = np.roots(list(reversed(ld.star_coeffs)))
    except np.linalg.LinAlgError as exc:
        raise RootFindingError(str(exc)) from exc
    if not np.all(np.isfinite(roots)):
        raise RootFindingError("root finder produced non-finite values")
    target = ld.q ** -0.5
    return bool(np.max(np.abs(np.abs(roots) - target)) <= tol)


def l_value_one(ld):
    """Exact rational L(1, chi_D) = sum c_n q^(-n); strictly positive."""
    return ld.value_at_one


def short_euler_l(ring, D, y):
    """Exact truncated Euler product over irreducibles of degree <= y.

    Factors with chi_D(P) = 0 contribute 1; y = 0 is the empty product.
    """
    _check_modulus(ring, D)
    if y < 0:
        raise GFError("truncation degree must be >= 0")
    out = Fraction(1)
    for d in range(1, y + 1):
        p_norm = ring.q ** d
        for p in ring.irreducibles(d):
            s = jacobi_symbol(ring, p, D)
            if s:
                out *= Fraction(p_norm, p_norm - s)
    return out


def class_number_odd(ld):
    """h = q^g L(1, chi_D) for odd deg D; asserted a positive integer."""
    d = len(ld.D) - 1
    if d % 2 == 0:
        raise GFError("odd-degree class number requires deg D odd")
    h = ld.value_at_one * ld.q ** ld.genus
    if h.denominator != 1 or h < 1:
        raise AssertionError(
            f"class number not a positive integer for D={ld.D}: {h}")
    return int(h)


def class_number_regulator_even(ld):
    """h*R = q^(g+1) L(1, chi_D)/(q-1) for even deg D; positive integer."""
    d = len(ld.D) - 1
    if d % 2 == 1:
        raise GFError("even-degree invariant requires deg D even")
    hr = ld.value_at_one * ld.q ** (ld.genus + 1) / (ld.q - 1)
    if hr.denominator != 1 or hr < 1:
        raise AssertionError(
            f"h*R not a positive integer for D={ld.D}: {hr}")
    return int(hr)


def divisor_fn(r, fac):
    """Generalized divisor function d_r on a factored polynomial.

    On prime powers d_r(P^a) = Gamma(r+a) / (Gamma(r) a!), extended
    multiplicatively; integer r >= 0 is exact, real r goes through
    log-Gamma (documented relative tolerance 1e-12).
    """
    if r < 0:
        raise GFError("divisor-function order must be >= 0")
    if isinstance(r, int) or (isinstance(r, float) and r.is_integer()):
        r = int(r)
        out = 1
        for _, a in fac.factors:
            out *= math.comb(r + a - 1, a)
        return out
    out = 1.0
    lg_r = math.lgamma(r)
    for _, a in fac.factors:
        out *= math.exp(math.lgamma(r + a) - lg_r - math.lgamma(a + 1))
    return out


def h_fn(ring, fac):
    """Product of |P|/(|P|+1) over the distinct prime divisors.

    Depends only on the radical, so h(P^k) = h(P).
    """
    out = Fraction(1)
    for p, _ in fac.factors:
        pn = ring.norm(p)
        out *= Fraction(pn, pn + 1)
    return out


def _check_modulus(ring, D):
    if not D or D[-1] != 1:
        raise GFError("modulus must be monic and nonzero")
    if len(D) == 1:
        raise GFError("modulus must have degree >= 1")
    if not ring.is_squarefree(D):
        raise GFError(f"modulus {ring.to_text(D)} is not squarefree")


# -- L-value cache -----------------------------------------------------------


def save_lcache(path, ring, n, ldatas):
    """Write LData records sorted by canonical D order as versioned CSV."""
    rows = sorted(ldatas, key=lambda ld: ring.canonical_key(ld.D))
    with open(path, "w", newline="") as fh:
        fh.write(LCACHE_VERSION + "\n")
        writer = csv.writer(fh)
        writer.writerow(["q", "n", "D", "lambda", "genus", "coeffs",
                         "L1_num", "L1_den"])
        for ld in rows:
            writer.writerow([
                ld.q, n, ring.to_text(ld.D), ld.lam, ld.genus,
                ring.to_text(ld.coeffs) if ld.coeffs else "",
                ld.value_at_one.numerator, ld.value_at_one.denominator,
            ])


def load_lcache(path, ring, n):
    """Load LData records; raises CacheVersionError on a version mismatch."""
    from hyperell.gf import CacheVersionError

    out = []
    with open(path, newline="") as fh:
        version = fh.readline().rstrip("\n")
        if version != LCACHE_VERSION:
            raise CacheVersionError(f"unsupported lcache version: {version!r}")
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["q", "n", "D", "lambda", "genus", "coeffs",
                      "L1_num", "L1_den"]:
            raise CacheVersionError(f"unexpected lcache header: {header!r}")
        for row in reader:
            if not row:
                continue
            q, row_n = int(row[0]), int(row[1])
            if q != ring.q or row_n != n:
                continue
            D = ring.from_text(row[2])
            coeffs = tuple(int(c) for c in row[5].split(",")) if row[5] else ()
            ld = build_ldata(ring, D, coeffs)
            if (ld.lam, ld.genus) != (int(row[3]), int(row[4])):
                raise GFError(f"inconsistent lcache row for D={row[2]}")
            if ld.value_at_one != Fraction(int(row[6]), int(row[7])):
                raise GFError(f"inconsistent cached L(1) for D={row[2]}")
            out.append(ld)
    return out
