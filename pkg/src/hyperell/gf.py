"""Exact arithmetic in F_q[t] for an odd prime q.

Polynomials are immutable tuples of coefficients in {0, ..., q-1} with
the constant term first; () is the zero polynomial (norm 0, degree -1).
All operations hang off a per-q ring object obtained from GF(q), so the
field order is fixed once and threaded through everything.

Canonical order on monic polynomials is (degree, coefficient-lex) with
the constant term as the fastest-varying digit; equivalently, degree-n
monics are ordered by the base-q integer a_0 + a_1 q + ... + a_{n-1} q^{n-1}.

The monic irreducible tables are built once per degree (Rabin's test over
the canonical enumeration), cached on the ring, and shared read-only.
"""

import csv
import functools
import threading
from dataclasses import dataclass

PTABLE_VERSION = "#hyperell-l1 ptable v1"


class GFError(ValueError):
    """Invalid input to an F_q[t] operation."""


class CacheVersionError(GFError):
    """On-disk table carries an unknown version line."""


def _is_prime(n):
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@functools.lru_cache(maxsize=None)
def GF(q):
    """Ring of polynomials over F_q, cached per field order."""
    return GFPolyRing(q)


@dataclass(frozen=True)
class FactoredPoly:
    """Canonical factorization: unit in F_q* times monic irreducible powers.

    Factors are pairwise distinct and sorted by (degree, coefficient-lex).
    """

    unit: int
    factors: tuple

    def expand(self, ring):
        """Recompose the polynomial this factorization came from."""
        f = (self.unit,)
        for p, e in self.factors:
            for _ in range(e):
                f = ring.mul(f, p)
        return f

    def radical_primes(self):
        return tuple(p for p, _ in self.factors)


class GFPolyRing:
    """Arithmetic context for F_q[t]; q must be an odd prime >= 3."""

    def __init__(self, q):
        if not isinstance(q, int) or not _is_prime(q) or q == 2:
            raise GFError(f"field order must be an odd prime, got {q!r}")
        self.q = q
        self.zero = ()
        self.one = (1,)
        self.t = (0, 1)
        # Legendre values of F_q*: residue -> +1/-1 (index 0 unused).
        sq = {(a * a) % q for a in range(1, q)}
        self._unit_legendre = tuple(0 if a == 0 else (1 if a in sq else -1)
                                    for a in range(q))
        self._inv = tuple(0 if a == 0 else pow(a, q - 2, q) for a in range(q))
        self._irr = {}          # degree -> tuple of monic irreducible tuples
        self._irr_lock = threading.Lock()
        self._spf = {}          # max_deg -> factor-link table (see factor_links)

    def __repr__(self):
        return f"GF({self.q})[t]"

    # -- construction and rendering --------------------------------------

    def poly(self, coeffs):
        """Normalize a coefficient sequence (constant term first) to a poly."""
        q = self.q
        c = [x % q for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        return tuple(c)

    def from_text(self, s):
        """Parse the 'a0,a1,...' text format, e.g. '1,3,1' = t^2+3t+1."""
        s = s.strip()
        if not s:
            return ()
        return self.poly(int(part) for part in s.split(","))

    def to_text(self, f):
        return ",".join(str(c) for c in f)

    def deg(self, f):
        """Degree; -1 for the zero polynomial."""
        return len(f) - 1

    def norm(self, f):
        """|f| = q^deg(f), with |0| = 0."""
        return 0 if not f else self.q ** (len(f) - 1)

    def canonical_key(self, f):
        """Sort key realizing the (degree, coefficient-lex) order."""
        return (len(f), tuple(reversed(f)))

    # -- ring operations --------------------------------------------------

    def add(self, a, b):
        q = self.q
        if len(a) < len(b):
            a, b = b, a
        c = list(a)
        for i, bi in enumerate(b):
            ci = c[i] + bi
            c[i] = ci - q if ci >= q else ci
        while c and c[-1] == 0:
            c.pop()
        return tuple(c)

    def neg(self, a):
        q = self.q
        return tuple(0 if x == 0 else q - x for x in a)

    def sub(self, a, b):
        q = self.q
        c = list(a) + [0] * (len(b) - len(a))
        for i, bi in enumerate(b):
            ci = c[i] - bi
            c[i] = ci + q if ci < 0 else ci
        while c and c[-1] == 0:
            c.pop()
        return tuple(c)

    def mul(self, a, b):
        q = self.q
        if not a or not b:
            return ()
        c = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    c[i + j] += ai * bj
        return tuple(x % q for x in c)

    def scalar_mul(self, k, a):
        q = self.q
        k %= q
        if k == 0:
            return ()
        return tuple((k * x) % q for x in a)

    def divmod(self, a, b):
        """Quotient and remainder with deg r < deg b; b must be nonzero."""
        if not b:
            raise GFError("division by the zero polynomial")
        q = self.q
        m, n = len(a), len(b)
        if m < n:
            return (), a
        binv = self._inv[b[-1]]
        quo = [0] * (m - n + 1)
        r = list(a)
        for i in range(m - n, -1, -1):
            if len(r) == i + n:
                qi = (r[-1] * binv) % q
                quo[i] = qi
                if qi:
                    for j in range(n):
                        r[i + j] = (r[i + j] - qi * b[j]) % q
                while r and r[-1] == 0:
                    r.pop()
        return tuple(quo), tuple(r)

    def mod(self, a, b):
        if not b:
            raise GFError("division by the zero polynomial")
        q = self.q
        m, n = len(a), len(b)
        if m < n:
            return a
        binv = self._inv[b[-1]]
        r = list(a)
        for i in range(m - n, -1, -1):
            if len(r) == i + n:
                qi = (r[-1] * binv) % q
                if qi:
                    for j in range(n):
                        r[i + j] = (r[i + j] - qi * b[j]) % q
                while r and r[-1] == 0:
                    r.pop()
        return tuple(r)

    def monic(self, f):
        """Monic normalization; zero stays zero."""
        if not f or f[-1] == 1:
            return f
        inv = self._inv[f[-1]]
        q = self.q
        return tuple((inv * x) % q for x in f)

    def gcd(self, a, b):
        """Monic gcd; both-zero input is invalid."""
        if not a and not b:
            raise GFError("gcd(0, 0) is undefined")
        while b:
            a, b = b, self.mod(a, b)
        return self.monic(a)

    def powmod(self, base, e, m):
        """base^e mod m by square-and-multiply; e is a nonnegative integer."""
        if not m:
            raise GFError("zero modulus")
        if self.deg(m) < 1:
            raise GFError("modulus must have degree >= 1")
        if e < 0:
            raise GFError("negative exponent")
        if e == 0:
            return self.one
        b = self.mod(base, m)
        out = None
        while True:
            if e & 1:
                out = b if out is None else self.mod(self.mul(out, b), m)
            e >>= 1
            if not e:
                return out
            b = self.mod(self.mul(b, b), m)

    def derivative(self, f):
        q = self.q
        return self.poly((i * f[i]) % q for i in range(1, len(f)))

    # -- predicates --------------------------------------------------------

    def is_squarefree(self, f):
        """True iff no irreducible square divides f; f must be nonzero.

        Computed as gcd(f, f') constant, with the characteristic-p rule:
        a vanishing derivative on deg >= 1 means f is a p-th power.
        """
        if not f:
            raise GFError("squarefreeness of 0 is undefined")
        if len(f) == 1:
            return True
        d = self.derivative(f)
        if not d:
            return False
        return len(self.gcd(f, d)) == 1

    def is_irreducible(self, f):
        """Rabin's test; f must be monic of degree >= 1."""
        if not f or f[-1] != 1:
            raise GFError("irreducibility test requires a monic polynomial")
        n = len(f) - 1
        if n < 1:
            raise GFError("irreducibility test requires degree >= 1")
        if n == 1:
            return True
        # Frobenius powers t^(q^d) mod f for d = 1..n.
        frob = [None] * (n + 1)
        b = self.powmod(self.t, self.q, f)
        frob[1] = b
        for d in range(2, n + 1):
            b = self.powmod(b, self.q, f)
            frob[d] = b
        if frob[n] != self.mod(self.t, f):
            return False
        for ell in _prime_divisors(n):
            g = self.sub(frob[n // ell], self.t)
            if not g:
                return False
            if len(self.gcd(f, g)) != 1:
                return False
        return True

    # -- enumeration and counting ------------------------------------------

    def monics(self, n):
        """All monic polynomials of degree n in canonical order (q^n of them)."""
        if n < 0:
            raise GFError("degree must be >= 0")
        if n == 0:
            yield (1,)
            return
        q = self.q
        for idx in range(q ** n):
            yield self.monic_from_index(n, idx)

    def monic_from_index(self, n, idx):
        q = self.q
        c = [0] * (n + 1)
        for i in range(n):
            idx, c[i] = divmod(idx, q)
        c[n] = 1
        return tuple(c)

    def monic_index(self, f):
        """Inverse of monic_from_index within fixed degree."""
        q = self.q
        idx = 0
        for i in range(len(f) - 2, -1, -1):
            idx = idx * q + f[i]
        return idx

    def pi_exact(self, n):
        """Exact count of monic irreducibles of degree n (Moebius over q^d)."""
        if n < 1:
            raise GFError("degree must be >= 1")
        total = 0
        for d in _divisors(n):
            total += _moebius(d) * self.q ** (n // d)
        assert total % n == 0
        return total // n

    def irreducibles(self, d):
        """Sorted tuple of monic irreducibles of degree d, cached."""
        if d < 1:
            raise GFError("degree must be >= 1")
        tab = self._irr.get(d)
        if tab is not None:
            return tab
        with self._irr_lock:
            tab = self._irr.get(d)
            if tab is not None:
                return tab
            if d == 1:
                tab = tuple((a, 1) for a in range(self.q))
            else:
                tab = tuple(f for f in self.monics(d) if self.is_irreducible(f))
            assert len(tab) == self.pi_exact(d)
            self._irr[d] = tab
            return tab

    def irreducible_table(self, max_deg):
        """Dict degree -> sorted irreducibles for all degrees <= max_deg."""
        if max_deg < 1:
            raise GFError("max_deg must be >= 1")
        return {d: self.irreducibles(d) for d in range(1, max_deg + 1)}

    def primes_upto(self, max_deg):
        """All irreducibles of degree <= max_deg in canonical order."""
        out = []
        for d in range(1, max_deg + 1):
            out.extend(self.irreducibles(d))
        return out

    # -- factorization -------------------------------------------------------

    def factor(self, f):
        """Canonical factorization by trial division; f must be nonzero.

        Trial division runs over irreducibles of degree <= deg(g)/2 for the
        shrinking monic cofactor g; whatever survives is irreducible.
        """
        if not f:
            raise GFError("cannot factor 0")
        unit = f[-1]
        g = self.monic(f)
        factors = []
        d = 1
        while 2 * d <= len(g) - 1:
            for p in self.irreducibles(d):
                if len(g) - 1 < 2 * d:
                    break
                e = 0
                while True:
                    quo, rem = self.divmod(g, p)
                    if rem:
                        break
                    g = quo
                    e += 1
                if e:
                    factors.append((p, e))
            d += 1
        if len(g) > 1:
            factors.append((g, 1))
        return FactoredPoly(unit=unit, factors=tuple(factors))

    def factor_links(self, max_deg):
        """Smallest-prime-factor links for all monic f with deg f <= max_deg.

        Returns (polys, index, links): polys lists every monic polynomial of
        degree 0..max_deg in canonical order, index maps poly -> position, and
        links[i] is None when polys[i] is 1 or irreducible, else a pair
        (j, k) with polys[i] = polys[j] * polys[k] and polys[j] its smallest
        irreducible factor.  Cached per max_deg; built once, then read-only.
        """
        cached = self._spf.get(max_deg)
        if cached is not None:
            return cached
        # build the trial-division tables before taking the (non-reentrant) lock
        for d in range(1, max_deg // 2 + 1):
            self.irreducibles(d)
        with self._irr_lock:
            cached = self._spf.get(max_deg)
            if cached is not None:
                return cached
            polys = []
            for d in range(max_deg + 1):
                polys.extend(self.monics(d))
            index = {f: i for i, f in enumerate(polys)}
            links = [None] * len(polys)
            for i, f in enumerate(polys):
                d = len(f) - 1
                if d == 0:
                    continue
                spf = None
                for dd in range(1, d // 2 + 1):
                    for p in self.irreducibles(dd):
                        quo, rem = self.divmod(f, p)
                        if not rem:
                            spf = (p, quo)
                            break
                    if spf:
                        break
                if spf:
                    links[i] = (index[spf[0]], index[spf[1]])
            out = (tuple(polys), index, tuple(links))
            self._spf[max_deg] = out
            return out

    def unit_legendre(self, a):
        """Legendre symbol of a scalar in F_q (0 for a = 0)."""
        return self._unit_legendre[a % self.q]


# -- integer helpers -----------------------------------------------------


def _divisors(n):
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def _prime_divisors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _moebius(n):
    mu = 1
    for p in _prime_divisors(n):
        if n % (p * p) == 0:
            return 0
        mu = -mu
    return mu


# -- irreducible-table cache ----------------------------------------------


def save_ptable(path, ring, max_deg):
    """Write the irreducible tables for degrees <= max_deg as versioned CSV."""
    table = ring.irreducible_table(max_deg)
    with open(path, "w", newline="") as fh:
        fh.write(PTABLE_VERSION + "\n")
        writer = csv.writer(fh)
        writer.writerow(["q", "deg", "coeffs"])
        for d in sorted(table):
            for p in table[d]:
                writer.writerow([ring.q, d, ring.to_text(p)])


def load_ptable(path, ring):
    """Load a ptable CSV into the ring's caches; returns max degree loaded.

    Raises CacheVersionError when the version line does not match, and
    GFError when the stored field order disagrees with the ring.
    """
    with open(path, newline="") as fh:
        version = fh.readline().rstrip("\n")
        if version != PTABLE_VERSION:
            raise CacheVersionError(f"unsupported ptable version: {version!r}")
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["q", "deg", "coeffs"]:
            raise CacheVersionError(f"unexpected ptable header: {header!r}")
        by_deg = {}
        for row in reader:
            if not row:
                continue
            q, d, coeffs = int(row[0]), int(row[1]), row[2]
            if q != ring.q:
                raise GFError(f"ptable is for q={q}, ring has q={ring.q}")
            by_deg.setdefault(d, []).append(ring.from_text(coeffs))
    max_deg = 0
    with ring._irr_lock:
        for d, polys in sorted(by_deg.items()):
            tab = tuple(polys)
            if len(tab) != ring.pi_exact(d):
                raise GFError(f"ptable for degree {d} has wrong cardinality")
            ring._irr[d] = tab
            max_deg = max(max_deg, d)
    return max_deg
