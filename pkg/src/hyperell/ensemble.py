"""Exhaustive scans over H_n, the monic squarefree polynomials of degree n.

The ScanEngine vectorizes chi_D evaluation across the whole ensemble:
residues D mod P come from one integer matrix product per irreducible P,
the per-prime quadratic-residue tables are built by enumerating squares,
and one reciprocity sign per column turns (D mod P / P) into chi_D(P).
Values at composite arguments follow by complete multiplicativity along
smallest-prime-factor links.  Everything downstream of the int8 character
matrix is exact integer or rational arithmetic; the slow per-D routines
in hyperell.characters/lfunctions remain the oracles the engine is
tested against.

Worker parallelism only splits row chunks whose boundaries are fixed
independently of the worker count, so every scan is bit-reproducible.
"""

import math
import threading
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from hyperell.gf import GFError
from hyperell.lfunctions import build_ldata
from hyperell.util import EULER_GAMMA, log2_q, log_q, round_degree

_CHUNK_ROWS = 2048
_WARN_CELLS = 5e8

# (q, P) -> int8 table over encoded residues mod P: +1 square, -1 non-square.
_qr_tables = {}
_qr_lock = threading.Lock()


def h_size(ring, n):
    """|H_n| in closed form: q for n = 1, q^n - q^(n-1) for n >= 2."""
    if n < 1:
        raise GFError("ensemble degree must be >= 1")
    return ring.q if n == 1 else ring.q ** n - ring.q ** (n - 1)


def enumerate_H_n(ring, n):
    """All monic squarefree degree-n polynomials in canonical order."""
    if n < 1:
        raise GFError("ensemble degree must be >= 1")
    for f in ring.monics(n):
        if ring.is_squarefree(f):
            yield f


@dataclass
class EnsembleReport:
    """Statistics of one (q, n) scan; fragments filled per experiment."""

    q: int
    n: int
    ensemble_size: int
    tau_grid: list = field(default_factory=list)
    phi_values: list = field(default_factory=list)       # exact Fractions
    tail_records: list = field(default_factory=list)
    moment_records: list = field(default_factory=list)
    orthogonality_records: list = field(default_factory=list)
    truncation_records: list = field(default_factory=list)


class ScanEngine:
    """Vectorized chi_D evaluation over H_n for one ring and degree."""

    def __init__(self, ring, n, threads=1):
        if n < 1:
            raise GFError("ensemble degree must be >= 1")
        self.ring = ring
        self.q = ring.q
        self.n = n
        self.threads = max(1, int(threads))
        if ring.q ** n > 2 ** 26:
            raise GFError(
                f"q^n = {ring.q ** n} exceeds the enumeration guard (2^26)")
        self._qpow_arr = np.array([1], dtype=np.int64)
        self._dmat = self._squarefree_rows()
        self.size = self._dmat.shape[0]
        assert self.size == h_size(ring, n)
        self._prime_cols = {}   # P -> int8 column over H_n

    # -- construction ------------------------------------------------------

    def _qpow(self, k):
        """First k powers of q as int64 (grown on demand, cached)."""
        if len(self._qpow_arr) < k:
            assert self.q ** (k - 1) < 2 ** 62
            self._qpow_arr = np.array([self.q ** i for i in range(k)],
                                      dtype=np.int64)
        return self._qpow_arr[:k]

    def _digits(self, m):
        """(q^m, m) matrix of base-q digits, index ascending, digit 0 first."""
        q = self.q
        idx = np.arange(q ** m, dtype=np.int64)
        out = np.empty((q ** m, m), dtype=np.int16)
        for i in range(m):
            out[:, i] = idx % q
            idx //= q
        return out

    def _squarefree_rows(self):
        """Monic degree-n coefficient rows surviving the square sieve."""
        q, n = self.q, self.n
        nonsf = np.zeros(q ** n, dtype=bool)
        for d in range(1, n // 2 + 1):
            m = n - 2 * d
            gdig = self._digits(m)
            for p in self.ring.irreducibles(d):
                p2 = self.ring.mul(p, p)
                conv = np.zeros((q ** m, n + 1), dtype=np.int32)
                for i in range(m + 1):
                    gi = gdig[:, i] if i < m else 1
                    for j, cj in enumerate(p2):
                        if cj:
                            conv[:, i + j] += gi * cj
                conv %= q
                enc = conv[:, :n].astype(np.int64) @ self._qpow[:n]
                nonsf[enc] = True
        keep = np.nonzero(~nonsf)[0]
        dig = self._digits(n)[keep]
        rows = np.empty((keep.size, n + 1), dtype=np.int16)
        rows[:, :n] = dig
        rows[:, n] = 1
        return rows

    def modulus(self, i):
        """The i-th D of H_n in canonical order, as a coefficient tuple."""
        return tuple(int(c) for c in self._dmat[i])

    def moduli(self):
        return [self.modulus(i) for i in range(self.size)]

    # -- character columns ---------------------------------------------------

    def _reduction_matrix(self, p, max_deg):
        """Rows t^j mod p for j = 0..max_deg, as an int64 matrix."""
        d = len(p) - 1
        rows = np.zeros((max_deg + 1, d), dtype=np.int64)
        r = (1,)
        rows[0, 0] = 1
        for j in range(1, max_deg + 1):
            r = self.ring.mod((0,) + r, p)
            rows[j, :len(r)] = r
        return rows

    def _qr_table(self, p):
        key = (self.q, p)
        tab = _qr_tables.get(key)
        if tab is not None:
            return tab
        with _qr_lock:
            tab = _qr_tables.get(key)
            if tab is not None:
                return tab
            q, d = self.q, len(p) - 1
            res = self._digits(d).astype(np.int32)
            conv = np.zeros((q ** d, 2 * d - 1), dtype=np.int32)
            for i in range(d):
                for j in range(d):
                    conv[:, i + j] += res[:, i] * res[:, j]
            conv %= q
            red = (conv.astype(np.int64) @ self._reduction_matrix(p, 2 * d - 2)) % q
            enc = red @ self._qpow[:d]
            tab = np.full(q ** d, -1, dtype=np.int8)
            tab[enc] = 1
            tab[0] = 0
            _qr_tables[key] = tab
            return tab

    def chi_column(self, p):
        """chi_D(P) for all D in H_n, via one residue reduction per row.

        chi_D(P) = (P/D) = sign * (D mod P / P) with the reciprocity sign
        (-1)^((q-1)/2 * deg P * n); the residue symbol is a table lookup.
        """
        col = self._prime_cols.get(p)
        if col is not None:
            return col
        d = len(p) - 1
        rm = self._reduction_matrix(p, self.n)
        res = (self._dmat.astype(np.int64) @ rm) % self.q
        enc = res @ self._qpow[:d]
        col = self._qr_table(p)[enc]
        if ((self.q - 1) // 2) % 2 == 1 and (d * self.n) % 2 == 1:
            col = -col
        self._prime_cols[p] = col
        return col

    def chi_columns(self, primes):
        """int8 matrix of chi_D(P) with one column per requested prime."""
        out = np.empty((self.size, len(primes)), dtype=np.int8)
        for j, p in enumerate(primes):
            out[:, j] = self.chi_column(p)
        return out

    # -- coefficient matrix ---------------------------------------------------

    def coefficient_matrix(self, max_m):
        """c_m(D) for 0 <= m <= max_m and every D in H_n, exact int64.

        c_m(D) is the sum of chi_D over all monic f of degree m, computed
        by extending the prime columns multiplicatively along the ring's
        smallest-prime-factor links, then summing per-degree blocks.
        """
        polys, index, links = self.ring.factor_links(max_m)
        cells = self.size * len(polys)
        if cells > _WARN_CELLS:
            warnings.warn(
                f"coefficient scan touches ~{cells:.2e} cells; expect a wait",
                stacklevel=2)
        q = self.q
        offsets = [0]
        for m in range(max_m + 1):
            offsets.append(offsets[-1] + q ** m)
        prime_pos = [i for i, lk in enumerate(links)
                     if lk is None and len(polys[i]) > 1]
        chi_p = self.chi_columns([polys[i] for i in prime_pos])
        composite_pos = [i for i, lk in enumerate(links) if lk is not None]
        out = np.empty((self.size, max_m + 1), dtype=np.int64)

        def run_chunk(lo):
            hi = min(lo + _CHUNK_ROWS, self.size)
            ext = np.empty((hi - lo, len(polys)), dtype=np.int8)
            ext[:, 0] = 1
            for j, i in enumerate(prime_pos):
                ext[:, i] = chi_p[lo:hi, j]
            for i in composite_pos:
                a, b = links[i]
                np.multiply(ext[:, a], ext[:, b], out=ext[:, i])
            for m in range(max_m + 1):
                out[lo:hi, m] = ext[:, offsets[m]:offsets[m + 1]].sum(
                    axis=1, dtype=np.int64)

        chunks = list(range(0, self.size, _CHUNK_ROWS))
        if self.threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                list(pool.map(run_chunk, chunks))
        else:
            for lo in chunks:
                run_chunk(lo)
        return out

    def ldata_rows(self):
        """LData for every D in H_n (engine coefficients, exact assembly)."""
        cmat = self.coefficient_matrix(self.n - 1)
        return [build_ldata(self.ring, self.modulus(i), cmat[i])
                for i in range(self.size)]

    # -- short Euler products --------------------------------------------------

    def short_product_parts(self, y):
        """(num, dens): L(1, chi_D; y) = num / dens[i] with num = prod |P|.

        dens is an int64 numpy array when the worst-case product fits,
        otherwise a list of Python integers.
        """
        primes = self.ring.primes_upto(y) if y >= 1 else []
        num = 1
        bound = 1
        for p in primes:
            num *= self.ring.norm(p)
            bound *= self.ring.norm(p) + 1
        if not primes:
            return 1, np.ones(self.size, dtype=np.int64)
        cols = self.chi_columns(primes)
        norms = np.array([self.ring.norm(p) for p in primes], dtype=np.int64)
        if bound < 2 ** 62:
            dens = np.prod(norms[None, :] - cols.astype(np.int64), axis=1)
            return num, dens
        dens = []
        cols_list = cols.tolist()
        norms_list = [self.ring.norm(p) for p in primes]
        for row in cols_list:
            acc = 1
            for nv, s in zip(norms_list, row):
                acc *= nv - s
            dens.append(acc)
        return num, dens

    def short_product_fractions(self, y):
        num, dens = self.short_product_parts(y)
        return [Fraction(num, int(d)) for d in dens]


# -- experiment operations -----------------------------------------------------


def tail_distribution(ring, n, tau_grid, threads=1, ldatas=None, model_y=None):
    """Exact tail fractions phi_n(tau) plus the numeric model-tail column.

    phi_n(tau) is the fraction of D in H_n with L(1, chi_D) >= e^gamma tau,
    an exact rational from the exhaustive scan.  The comparison column is
    the Chernoff bound for the random Euler-product model truncated at
    model_y (default: the usual 3 log_q n short-product length).
    """
    from hyperell.random_model import ModelParams, chernoff_tail

    engine = ScanEngine(ring, n, threads=threads)
    if ldatas is None:
        ldatas = engine.ldata_rows()
    if model_y is None:
        model_y = round_degree(3 * log_q(ring.q, n)) if n >= 2 else 1
    values = [ld.value_at_one for ld in ldatas]
    report = EnsembleReport(q=ring.q, n=n, ensemble_size=engine.size)
    params = ModelParams(q=ring.q, y=model_y, seed=0, mc_samples=1)
    for tau in tau_grid:
        thr = Fraction(math.exp(EULER_GAMMA) * tau)
        count = sum(1 for v in values if v >= thr)
        phi = Fraction(count, engine.size)
        if tau > 0:
            est = chernoff_tail(params, tau)
            model = math.exp(est.chernoff_exponent)
            flagged = est.at_boundary
        else:
            model, flagged = 1.0, True
        report.tau_grid.append(float(tau))
        report.phi_values.append(phi)
        report.tail_records.append({
            "tau": float(tau),
            "phi": phi,
            "model_tail_bound": model,
            "model_at_boundary": flagged,
        })
    return report


def empirical_moment(ring, n, k, y, threads=1, engine=None):
    """Ensemble average of L(1, chi_D; y)^k; exact Fraction for integer k.

    Integer moments group the scan by distinct denominators and assemble
    one exact rational; real k falls back to float accumulation.
    """
    if y < 1:
        raise GFError("truncation degree must be >= 1")
    if k < 0:
        raise GFError("moment order must be >= 0")
    if engine is None:
        engine = ScanEngine(ring, n, threads=threads)
    if k == 0:
        return Fraction(1)
    num, dens = engine.short_product_parts(y)
    is_int = isinstance(k, int) or (isinstance(k, float) and k.is_integer())
    if is_int:
        k = int(k)
        if isinstance(dens, np.ndarray):
            uniq, counts = np.unique(dens, return_counts=True)
            pairs = zip(uniq.tolist(), counts.tolist())
        else:
            tally = {}
            for d in dens:
                tally[d] = tally.get(d, 0) + 1
            pairs = tally.items()
        # Common denominator: every den divides prod (|P|-1)|P|(|P|+1).
        big = 1
        for p in (ring.primes_upto(y) if y >= 1 else []):
            pn = ring.norm(p)
            big *= (pn - 1) * pn * (pn + 1)
        big_k = big ** k
        num_k = num ** k
        total = 0
        for den, cnt in pairs:
            total += cnt * num_k * (big_k // int(den) ** k)
        return Fraction(total, big_k * engine.size)
    vals = (float(num) / np.asarray(dens, dtype=np.float64)) ** float(k)
    return float(np.mean(vals))


def moment_comparison(ring, n, k_list, y_list, threads=1):
    """Empirical vs model moments; records carry the ratio, never a bound."""
    from hyperell.random_model import ModelParams, model_moment

    engine = ScanEngine(ring, n, threads=threads)
    records = []
    for k in k_list:
        for y in y_list:
            emp = empirical_moment(ring, n, k, y, engine=engine)
            model = model_moment(ModelParams(q=ring.q, y=y, seed=0,
                                             mc_samples=1), k)
            ratio = float(emp) / float(model)
            records.append({
                "k": k, "y": y,
                "empirical": emp if isinstance(emp, Fraction) else float(emp),
                "model": model if isinstance(model, Fraction) else float(model),
                "ratio": ratio,
            })
    return records


def square_orthogonality_check(ring, n, f_list, threads=1):
    """Average of chi_D(f^2) against the product over primes dividing f.

    chi_D(f^2) is 1 exactly when gcd(D, f) = 1, so the observed average is
    a coprimality frequency; the prediction depends only on f's radical.
    """
    engine = ScanEngine(ring, n, threads=threads)
    records = []
    for f in f_list:
        if not f or f[-1] != 1:
            raise GFError("orthogonality check expects monic f")
        if len(f) == 1:
            obs = Fraction(1)
            pred = Fraction(1)
        else:
            fac = ring.factor(f)
            primes = fac.radical_primes()
            cols = engine.chi_columns(primes)
            coprime = np.all(cols != 0, axis=1)
            obs = Fraction(int(np.count_nonzero(coprime)), engine.size)
            pred = Fraction(1)
            for p in primes:
                pn = ring.norm(p)
                pred *= Fraction(pn, pn + 1)
        records.append({
            "f": ring.to_text(f),
            "observed": obs,
            "predicted": pred,
            "abs_err": abs(obs - pred),
        })
    return records


def nonsquare_cancellation_check(ring, n, ell_list, threads=1):
    """Exact |sum over D of chi_D(ell)| for non-square ell, with decay stat.

    The normalized statistic |S| / q^(0.6 n) is recorded so shrinkage can
    be read off across n for a fixed ell.
    """
    engine = ScanEngine(ring, n, threads=threads)
    records = []
    for ell in ell_list:
        if not ell or ell[-1] != 1:
            raise GFError("cancellation check expects monic ell")
        fac = ring.factor(ell)
        if not fac.factors or all(e % 2 == 0 for _, e in fac.factors):
            raise GFError(f"{ring.to_text(ell)} is a perfect square")
        col = np.ones(engine.size, dtype=np.int8)
        for p, e in fac.factors:
            pc = engine.chi_column(p)
            if e % 2 == 1:
                col = col * pc
            else:
                col = col * (pc != 0).astype(np.int8)
        s = int(col.sum(dtype=np.int64))
        records.append({
            "ell": ring.to_text(ell),
            "char_sum": s,
            "abs_sum": abs(s),
            "normalized": abs(s) / ring.q ** (0.6 * n),
        })
    return records


def truncation_experiment(ring, n, f_param, extra_lengths=(0, 1, 2),
                          threads=1, ldatas=None):
    """Fraction of D whose short product misses L(1, chi_D) by the threshold.

    The truncation length is N = round(log n + log_2 n + 3 log f) in base-q
    logs, clamped to an integer >= 1; the exceed threshold is
    1/(f_param * log_q n).  Records cover N, N+1, ... so the monotone drop
    of the exceed fraction is visible, each against the q^(0.7 n) budget.
    """
    if n < 2:
        raise GFError("truncation experiment needs n >= 2")
    if f_param <= 1:
        raise GFError("f_param must exceed 1")
    q = ring.q
    engine = ScanEngine(ring, n, threads=threads)
    if ldatas is None:
        ldatas = engine.ldata_rows()
    values = [ld.value_at_one for ld in ldatas]
    base_n = round_degree(log_q(q, n) + log2_q(q, n) + 3 * log_q(q, f_param))
    threshold = Fraction(1, 1) / Fraction(f_param * log_q(q, n))
    budget = q ** (0.7 * n) / engine.size
    records = []
    for dn in extra_lengths:
        trunc = base_n + dn
        shorts = engine.short_product_fractions(trunc)
        exceed = 0
        for full, short in zip(values, shorts):
            if abs(full / short - 1) > threshold:
                exceed += 1
        records.append({
            "f_param": float(f_param),
            "N": trunc,
            "threshold": threshold,
            "exceed_fraction": Fraction(exceed, engine.size),
            "budget": budget,
        })
    return records
