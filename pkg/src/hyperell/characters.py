"""Quadratic residue symbols over F_q[t] and character sums over monics.

Two independent symbol implementations are kept permanently as mutual
oracles: legendre_symbol_euler evaluates f^((|P|-1)/2) mod P, while
jacobi_symbol runs the reciprocity loop.  For coprime monic A, B,

    (A/B)(B/A) = (-1)^((q-1)/2 * deg A * deg B),

and a scalar a in F_q* extracts as (a/D) = legendre_q(a)^deg D.  Both
signs degenerate to +1 when q = 1 mod 4; the parity checks below keep
q = 3 mod 4 correct as well.  Symbols return canonical values in
{-1, 0, +1}, never field residues.
"""

from hyperell.gf import GFError

# Irreducibility of a symbol modulus is validated once per (q, P).
_validated = set()


def legendre_symbol_euler(ring, f, P):
    """Quadratic residue symbol (f/P) by the Euler criterion.

    P must be monic irreducible.  Returns +1 for a nonzero square mod P,
    -1 for a non-square, 0 when P divides f.
    """
    key = (ring.q, P)
    if key not in _validated:
        if not P or P[-1] != 1 or not ring.is_irreducible(P):
            raise GFError(
                "modulus of the Euler criterion must be monic irreducible")
        _validated.add(key)
    r = ring.mod(f, P)
    if not r:
        return 0
    e = (ring.norm(P) - 1) // 2
    v = ring.powmod(r, e, P)
    if v == ring.one:
        return 1
    if v == (ring.q - 1,):
        return -1
    # Unreachable for irreducible P: the criterion lands in {1, -1}.
    raise AssertionError(f"Euler criterion returned a non-sign value {v!r}")


def jacobi_symbol(ring, f, D):
    """Jacobi-style symbol chi_D(f) = (f/D) by the reciprocity loop.

    D must be monic; it need not be squarefree (the symbol is defined
    multiplicatively over D's factorization).  (f/1) = +1 by convention.
    """
    if not D:
        raise GFError("zero modulus in jacobi_symbol")
    if D[-1] != 1:
        raise GFError("jacobi_symbol modulus must be monic")
    if len(D) == 1:
        return 1
    q = ring.q
    sign_active = ((q - 1) // 2) & 1  # reciprocity sign only for q = 3 mod 4
    leg = ring._unit_legendre
    sign = 1
    f = ring.mod(f, D)
    while True:
        if not f:
            return 0
        lc = f[-1]
        if lc != 1:
            f = ring.monic(f)
            # (lc/D) = legendre_q(lc)^deg D
            if leg[lc] == -1 and (len(D) - 1) & 1:
                sign = -sign
        if len(f) == 1:
            return sign
        if sign_active and (len(f) - 1) & 1 and (len(D) - 1) & 1:
            sign = -sign
        f, D = ring.mod(D, f), f


def jacobi_symbol_factored(ring, f, fac):
    """Product of Euler-criterion symbols over a factorization of D.

    This is the slow oracle that jacobi_symbol must agree with.
    """
    out = 1
    for p, e in fac.factors:
        s = legendre_symbol_euler(ring, f, p)
        if s == 0:
            return 0
        if e & 1 and s == -1:
            out = -out
    return out


def char_sum_monic(ring, D, n):
    """Exact integer sum of chi_D(f) over all monic f of degree n.

    This is the coefficient c_n of the L-polynomial of chi_D; it vanishes
    for n >= deg D.  Direct summation, kept as the oracle for the
    vectorized ensemble path.
    """
    if not D or D[-1] != 1:
        raise GFError("character modulus must be monic")
    if len(D) > 1 and not ring.is_squarefree(D):
        raise GFError("character sums expect a squarefree modulus")
    return sum(jacobi_symbol(ring, f, D) for f in ring.monics(n))
