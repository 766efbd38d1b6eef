"""Long-resonator construction and its exact local-factor algebra.

The resonator weight for a modulus D is

    R_D = prod over deg P < N of (1 - r_P chi_D(P))^(-1),
    r_P = 1 - |P|/q^N  (0 once deg P >= N),

with N = round(log n + log_2 n + log c) in base-q logs.  The resonated
average S_1/S_2, with S_1 = sum L(1, chi_D; M) R_D^2 and S_2 = sum R_D^2,
is computed exactly over H_n and sandwiched between the extreme short
products.  The closed local-factor identities behind the optimization of
c are exposed as exact rational checks, together with the finite Euler
products E(N), E1(N), E2(N) and the theoretical ratio lower bound.
"""

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

from hyperell.ensemble import ScanEngine
from hyperell.gf import GFError
from hyperell.random_model import EULER_GAMMA_EXP, c_star, zeta_a2
from hyperell.util import log2_q, log_q, round_degree

C3 = math.pi / 4.0 - math.log(2.0) / 2.0


@dataclass(frozen=True)
class LocalFactors:
    """Exact local data at one prime norm: B = (1-|P|^-2)^-1, R = (1-r^2)^-1."""

    p_norm: int
    r: Fraction
    B: Fraction
    R: Fraction
    h: Fraction

    @classmethod
    def at(cls, p_norm, r):
        r = Fraction(r)
        if not 0 <= r < 1:
            raise GFError("resonator coefficient must lie in [0, 1)")
        p = Fraction(p_norm)
        return cls(p_norm=p_norm, r=r,
                   B=1 / (1 - 1 / p ** 2),
                   R=1 / (1 - r ** 2),
                   h=p / (p + 1))


@dataclass
class ResonatorRun:
    """One exact resonance run over H_n."""

    q: int
    n: int
    c: float
    N: int
    M: int
    s1: Fraction
    s2: Fraction
    ratio: Fraction
    argmax_D: tuple
    max_L_short: Fraction
    min_L_short: Fraction
    mean_L_short: Fraction
    ratio_ge_mean: bool
    sandwich_ok: bool
    s1_nsmooth: Fraction
    nsmooth_le_msmooth: bool
    c_cap: float
    c_warning: bool
    theory_bound: float | None   # None when n < q
    log_rd_bound: int


def truncation_degree(q, n, c):
    """Resonator cutoff N = round(log n + log_2 n + log c), base-q logs, >= 1."""
    if n < 2:
        raise GFError("resonator cutoff needs n >= 2")
    if c <= 0:
        raise GFError("resonator constant c must be positive")
    return round_degree(log_q(q, n) + log2_q(q, n) + log_q(q, c))


def resonator_coeff(ring, fac, N):
    """Completely multiplicative coefficient r_f from a factored polynomial.

    Zero as soon as any prime factor has degree >= N.
    """
    if N < 1:
        raise GFError("cutoff N must be >= 1")
    q = ring.q
    out = Fraction(1)
    for p, e in fac.factors:
        d = len(p) - 1
        if d >= N:
            return Fraction(0)
        out *= Fraction(q ** N - q ** d, q ** N) ** e
    return out


def resonator_value(ring, D, N):
    """Exact R_D = prod over deg P < N of (1 - r_P chi_D(P))^(-1) > 0."""
    from hyperell.characters import jacobi_symbol

    if N < 1:
        raise GFError("cutoff N must be >= 1")
    q = ring.q
    qn = q ** N
    out = Fraction(1)
    for d in range(1, N):
        qd = q ** d
        for p in ring.irreducibles(d):
            s = jacobi_symbol(ring, p, D)
            if s == 1:
                out *= Fraction(qn, qd)
            elif s == -1:
                out *= Fraction(qn, 2 * qn - qd)
    return out


def log_rd_bound(ring, N):
    """Exact integer bound on log_q R_D: N Pi_q(N) - sum of m pi_q(m), m <= N."""
    if N < 1:
        raise GFError("cutoff N must be >= 1")
    counts = [ring.pi_exact(m) for m in range(1, N + 1)]
    return N * sum(counts) - sum(m * c for m, c in zip(range(1, N + 1), counts))


def theory_ratio_bound(q, n, c):
    """Asymptotic lower bound for S_1/S_2 without its error term.

    e^gamma (log n + log_2 n + 1/2 - c3 q/(q-1) + log c), logs base q,
    c3 = pi/4 - ln2/2.  Reported for qualitative comparison only.
    """
    if n < q:
        raise GFError("theory bound needs n >= q")
    bracket = (log_q(q, n) + log2_q(q, n) + 0.5 - C3 * q / (q - 1.0)
               + log_q(q, c))
    return EULER_GAMMA_EXP * bracket


def run_resonance(ring, n, c=None, M=None, threads=1):
    """Exact S_1, S_2 and their ratio over H_n, with the argmax witness.

    Defaults: c = 0.9 * c_star(q) (strictly inside the admissible cap) and
    M = round(3 log_q n).  A c at or above the cap only adds a warning
    record.  When N <= M the N-smooth S_1 is computed as well and compared
    against the M-smooth value (positivity of the truncation step).
    """
    q = ring.q
    cap = c_star(q)
    if c is None:
        c = 0.9 * cap
    c_warning = c >= cap
    if c_warning:
        warnings.warn(f"resonator constant c={c:.6g} is not below the "
                      f"admissible cap {cap:.6g}", stacklevel=2)
    if M is None:
        M = round_degree(3 * log_q(q, n))
    N = truncation_degree(q, n, c)
    engine = ScanEngine(ring, n, threads=threads)
    l_m = engine.short_product_fractions(M)

    res_primes = ring.primes_upto(N - 1) if N > 1 else []
    if res_primes:
        cols = engine.chi_columns(res_primes).tolist()
        qn = q ** N
        plus = [q ** (len(p) - 1) for p in res_primes]
        minus = [2 * qn - q ** (len(p) - 1) for p in res_primes]
        rsq = []
        for row in cols:
            num, den = 1, 1
            for j, s in enumerate(row):
                if s == 1:
                    num *= qn
                    den *= plus[j]
                elif s == -1:
                    num *= qn
                    den *= minus[j]
            r = Fraction(num, den)
            rsq.append(r * r)
    else:
        rsq = [Fraction(1)] * engine.size

    s1 = sum((lv * w for lv, w in zip(l_m, rsq)), Fraction(0))
    s2 = sum(rsq, Fraction(0))
    ratio = s1 / s2

    best = 0
    for i in range(1, engine.size):
        if l_m[i] > l_m[best]:
            best = i
    max_l = l_m[best]
    min_l = min(l_m)
    mean_l = sum(l_m, Fraction(0)) / engine.size

    if N <= M:
        l_n = engine.short_product_fractions(N)
        s1_n = sum((lv * w for lv, w in zip(l_n, rsq)), Fraction(0))
    else:
        s1_n = s1
    # The printed lower bound assumes n >= q; outside that range report None.
    theory = theory_ratio_bound(q, n, c) if n >= q else None
    return ResonatorRun(
        q=q, n=n, c=float(c), N=N, M=M, s1=s1, s2=s2, ratio=ratio,
        argmax_D=engine.modulus(best), max_L_short=max_l, min_L_short=min_l,
        mean_L_short=mean_l, ratio_ge_mean=ratio >= mean_l,
        sandwich_ok=min_l <= ratio <= max_l,
        s1_nsmooth=s1_n, nsmooth_le_msmooth=s1_n <= s1,
        c_cap=cap, c_warning=c_warning, theory_bound=theory,
        log_rd_bound=log_rd_bound(ring, N),
    )


def resonator_series_partial(ring, D, N, T=None):
    """Partial sums of R_D = sum over f of r_f chi_D(f), with a certificate.

    Returns (partial, tail): partial is the exact sum over N-smooth monic f
    with deg f <= T (default 3N), assembled per prime by truncated geometric
    series; tail is the exact remaining mass sum over deg f > T of r_f,
    i.e. prod (1 - r_P)^(-1) minus the enumerated mass, which dominates the
    truncation error since |chi_D| <= 1.
    """
    from hyperell.characters import jacobi_symbol

    if N < 1:
        raise GFError("cutoff N must be >= 1")
    if T is None:
        T = 3 * N
    q = ring.q
    qn = q ** N

    def truncated_product(weights):
        # weights: list of (per-prime ratio, prime degree); returns the
        # degree-T truncation coefficients of prod 1/(1 - w u^d).
        coeffs = [Fraction(0)] * (T + 1)
        coeffs[0] = Fraction(1)
        for w, d in weights:
            if w == 0:
                continue
            out = [Fraction(0)] * (T + 1)
            for m in range(T + 1):
                if coeffs[m] == 0:
                    continue
                power = Fraction(1)
                deg = m
                while deg <= T:
                    out[deg] += coeffs[m] * power
                    power *= w
                    deg += d
            coeffs = out
        return coeffs

    signed, mass_total = [], Fraction(1)
    abs_weights = []
    for d in range(1, N):
        r_p = Fraction(qn - q ** d, qn)
        for p in ring.irreducibles(d):
            s = jacobi_symbol(ring, p, D)
            signed.append((r_p * s, d))
            abs_weights.append((r_p, d))
            mass_total *= 1 / (1 - r_p)
    partial = sum(truncated_product(signed))
    mass_enumerated = sum(truncated_product(abs_weights))
    return partial, mass_total - mass_enumerated


# -- appendix local-factor identities -----------------------------------------


def local_factor_S_identity(lf):
    """Both sides of the nine-term local identity for the resonated product.

    Returns (lhs, rhs) as exact rationals; they must be equal.
    """
    p = Fraction(lf.p_norm)
    r, B, R, h = lf.r, lf.B, lf.R, lf.h
    lhs = (1
           + 2 * r / p * B * R * h
           + 2 * r ** 3 / p * B * R ** 2 * h
           + r ** 2 * R ** 2 * h
           + r ** 2 / p ** 2 * B * R ** 2 * h
           + B * h / p ** 2
           + 2 * r ** 2 / p ** 2 * B * R * h
           + r ** 4 / p ** 2 * B * R ** 2 * h
           + 2 * r ** 2 * R * h
           + r ** 4 * R ** 2 * h)
    rhs = B * R ** 2 * h * (1 + r ** 2 + 2 * r / p
                            + (1 - r ** 2) ** 2 * (1 - 1 / p ** 2) / p)
    return lhs, rhs


def local_factor_R_identity(lf, tail_bound=Fraction(1, 10 ** 18)):
    """Closed form vs odd-weight series for the resonator mean square.

    Returns (lhs, rhs, tail): lhs is the closed form
    (1-r^2)^(-2) (1 + (|P|-2)/(|P|+1) r^2 + r^4/(|P|+1)), rhs the series
    1 + h(P) sum over a >= 1 of (2a+1) r^(2a) truncated once the certified
    geometric majorant of its tail drops below tail_bound.  The identity
    holds within that certificate: |lhs - rhs| <= tail.
    """
    if lf.r >= 1:
        raise GFError("series diverges for r >= 1")
    p = Fraction(lf.p_norm)
    r, h = lf.r, lf.h
    lhs = (1 - r ** 2) ** -2 * (1 + (p - 2) / (p + 1) * r ** 2
                                + r ** 4 / (p + 1))
    x = r ** 2
    rhs = Fraction(1)
    term_a = 0
    power = Fraction(1)
    while True:
        term_a += 1
        power *= x
        rhs += h * (2 * term_a + 1) * power
        # tail after a terms: sum_{b>a} (2b+1) x^b <= (2a+3) x^(a+1)/(1-x)^2
        tail = h * (2 * term_a + 3) * power * x / (1 - x) ** 2
        if tail < tail_bound or x == 0:
            break
        if term_a > 100000:
            raise GFError("series truncation did not certify; r too close to 1")
    return lhs, rhs, tail


@dataclass(frozen=True)
class EulerProducts:
    """Finite products E(N), E1(N), E2(N) over deg P < N, with log diagnostics."""

    q: int
    N: int
    ln_E: float
    ln_E1: float
    ln_E2: float
    E: float
    E1: float
    E2: float
    ratio_lnE_to_scale: float   # ln E(N) / (q^N / N)
    reference_slope: float      # (2 + pi/2 - 3 ln2) zeta_A(2) / ln q


def euler_E_products(ring, N):
    """E(N) = prod (1-r^2)^(-2)(1+r^2) and companions, grouped by degree.

    Exact degree counts pi_q(d) provide the multiplicities; values that
    overflow a double are reported as inf while the logs stay finite.
    """
    if N < 1:
        raise GFError("cutoff N must be >= 1")
    q = ring.q
    ln_e = ln_e1 = ln_e2 = 0.0
    for d in range(1, N):
        count = ring.pi_exact(d)
        p = float(q ** d)
        r = 1.0 - q ** float(d - N)
        r2 = r * r
        ln_e += count * (-2.0 * math.log1p(-r2) + math.log1p(r2))
        ln_e1 += count * math.log(
            1.0 - (1.0 - r) ** 2 / ((p + 1.0) * (1.0 + r2))
            + (1.0 - 1.0 / p) * (1.0 - r2) ** 2 / (p * (1.0 + r2)))
        ln_e2 += count * math.log(
            1.0 - 3.0 * r2 / ((p + 1.0) * (1.0 + r2))
            + r2 * r2 / ((p + 1.0) * (1.0 + r2)))

    def safe_exp(x):
        try:
            return math.exp(x)
        except OverflowError:
            return float("inf")

    scale = q ** N / N
    ref = ((2.0 + math.pi / 2.0 - 3.0 * math.log(2.0))
           * float(zeta_a2(q)) / math.log(q))
    return EulerProducts(q=q, N=N, ln_E=ln_e, ln_E1=ln_e1, ln_E2=ln_e2,
                         E=safe_exp(ln_e), E1=safe_exp(ln_e1),
                         E2=safe_exp(ln_e2),
                         ratio_lnE_to_scale=ln_e / scale,
                         reference_slope=ref)
