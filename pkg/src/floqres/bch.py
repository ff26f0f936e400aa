"""Exact-arithmetic BCH expansion of the Floquet Hamiltonian.

For U = e^{-i tau A} e^{-i tau B} the series H_F = sum_m (-i tau)^m H_m is
generated order by order with exact Gaussian-rational coefficients on the
infinite chain, each H_m a translation-invariant sum of Pauli-string
densities.  Includes per-order norms (series divergence diagnostics),
prethermalization plateau amplitudes via exact projection formulas, and a
dense matrix-logarithm oracle on a small ring.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .models import ModelSpec
from .pauli import I, PHASE, PROD, X, Y, Z

I_CODE = I


class GaussianRational:
    """Exact a + i b with rational a, b."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __add__(self, o):
        return GaussianRational(self.re + o.re, self.im + o.im)

    def __sub__(self, o):
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, o):
        if isinstance(o, GaussianRational):
            return GaussianRational(self.re * o.re - self.im * o.im,
                                    self.re * o.im + self.im * o.re)
        return GaussianRational(self.re * o, self.im * o)

    __rmul__ = __mul__

    def times_i_power(self, k):
        k %= 4
        if k == 0:
            return self
        if k == 1:
            return GaussianRational(-self.im, self.re)
        if k == 2:
            return -self
        return GaussianRational(self.im, -self.re)

    def is_zero(self):
        return self.re == 0 and self.im == 0

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def conj(self):
        return GaussianRational(self.re, -self.im)

    def __complex__(self):
        return float(self.re) + 1j * float(self.im)

    def __eq__(self, o):
        return self.re == o.re and self.im == o.im

    def __repr__(self):
        return f"({self.re}+{self.im}i)"


def _trim(word):
    """Canonical density key: strip leading/trailing identity sites."""
    lo, hi = 0, len(word)
    while lo < hi and word[lo] == I_CODE:
        lo += 1
    while hi > lo and word[hi - 1] == I_CODE:
        hi -= 1
    return tuple(word[lo:hi])


class TranslationInvariantOperator:
    """O = sum_key c_key sum_j (key placed at j) on the infinite chain.

    Keys are trimmed Pauli-code tuples (first and last site != identity);
    coefficients are exact Gaussian rationals.
    """

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for k, c in terms.items():
                self._acc(k, c)

    def _acc(self, key, coeff):
        if isinstance(coeff, (int, Fraction)):
            coeff = GaussianRational(coeff)
        cur = self.terms.get(key)
        new = coeff if cur is None else cur + coeff
        if new.is_zero():
            self.terms.pop(key, None)
        else:
            self.terms[key] = new

    def __add__(self, other):
        out = TranslationInvariantOperator()
        out.terms = dict(self.terms)
        for k, c in other.terms.items():
            out._acc(k, c)
        return out

    def __sub__(self, other):
        return self + other.scale(Fraction(-1))

    def scale(self, s):
        out = TranslationInvariantOperator()
        for k, c in self.terms.items():
            sc = c * s if not isinstance(s, GaussianRational) else s * c
            if not sc.is_zero():
                out.terms[k] = sc
        return out

    def support(self):
        return max((len(k) for k in self.terms), default=0)

    def nterms(self):
        return len(self.terms)

    def norm2(self) -> Fraction:
        """Per-site Hilbert-Schmidt norm squared, sum_key |c_key|^2."""
        return sum((c.abs2() for c in self.terms.values()), Fraction(0))

    def trace_product(self, other) -> GaussianRational:
        """Per-site tr(self * other) (no conjugation): sum over shared keys."""
        out = GaussianRational()
        small, big = (self.terms, other.terms)
        if len(big) < len(small):
            small, big = big, small
        for k, c in small.items():
            o = big.get(k)
            if o is not None:
                out = out + c * o
        return out

    def herm_defect(self) -> Fraction:
        """Sum |c - conj(c) * i^phase(dagger)|; dagger of a Pauli string is
        itself, so Hermiticity == all coefficients real."""
        return sum((abs(c.im) for c in self.terms.values()), Fraction(0))


def commutator(a: TranslationInvariantOperator,
               b: TranslationInvariantOperator) -> TranslationInvariantOperator:
    """[A, B] of two translation-invariant operators (density of the
    commutator of the extensive sums)."""
    out = TranslationInvariantOperator()
    for ka, ca in a.terms.items():
        la = len(ka)
        for kb, cb in b.terms.items():
            lb = len(kb)
            for off in range(-(lb - 1), la):
                lo = min(0, off)
                hi = max(la, off + lb)
                word = []
                ph_ab = 0
                ph_ba = 0
                for i in range(lo, hi):
                    pa = ka[i] if 0 <= i < la else I_CODE
                    pb = kb[i - off] if 0 <= i - off < lb else I_CODE
                    word.append(int(PROD[pa, pb]))
                    ph_ab += int(PHASE[pa, pb])
                    ph_ba += int(PHASE[pb, pa])
                if (ph_ab - ph_ba) % 4 == 0:
                    continue
                key = _trim(word)
                if not key:
                    continue
                cc = ca * cb
                out._acc(key, cc.times_i_power(ph_ab) - cc.times_i_power(ph_ba))
    return out


def _bernoulli(n_max):
    """Exact Bernoulli numbers B_0..B_n (B_1 = -1/2 convention)."""
    b = [Fraction(1)]
    for m in range(1, n_max + 1):
        s = Fraction(0)
        for j in range(m):
            s += comb(m + 1, j) * b[j]
        b.append(-s / (m + 1))
    return b


@dataclass
class BCHSeries:
    """Orders of H_F = sum_m (-i tau)^m H_m for U = e^{-i tau A} e^{-i tau B}."""

    a: TranslationInvariantOperator
    b: TranslationInvariantOperator
    orders: list            # orders[m] = H_m

    def order_norms(self):
        """Per-order Frobenius norm |H_m| (floats)."""
        return [float(h.norm2()) ** 0.5 for h in self.orders]

    def herm_defects(self):
        """(-i)^m H_m must be Hermitian: even orders have real coefficients,
        odd orders purely imaginary ones."""
        out = []
        for m, h in enumerate(self.orders):
            if m % 2 == 0:
                out.append(h.herm_defect())
            else:
                out.append(sum((abs(c.re) for c in h.terms.values()),
                               Fraction(0)))
        return out


def bch_orders(a, b, m_max) -> BCHSeries:
    """H_0..H_{m_max} from the Bernoulli-number recursion.

    With Z(t) = log(e^{tX} e^{tY}) = sum t^n Z_n one has
      (n+1) Z_{n+1} = [X - Y, Z_n]/2
                      + sum_p B_{2p}/(2p)! sum_{k_1+..+k_{2p}=n}
                          ad_{Z_{k_1}} ... ad_{Z_{k_{2p}}} (X + Y),
    and for X = -i tau A, Y = -i tau B the same recursion holds for the
    rational parts V_n (Z_n = (-i tau)^n V_n), giving H_m = V_{m+1}.
    """
    n_max = m_max + 1
    bern = _bernoulli(n_max)
    fact = [1]
    for i in range(1, n_max + 1):
        fact.append(fact[-1] * i)
    apb = a + b
    amb = a - b
    v = [None, apb]                    # v[n] = V_n
    memo = {}                          # (q, tot) -> nested ad sum

    def nested(q, tot):
        # sum over compositions k_1+..+k_q = tot of ad_{V_k1}..ad_{V_kq}(A+B);
        # uses only v[k], k <= tot - q + 1, all final by the time it's called
        if q == 0:
            return apb if tot == 0 else None
        key = (q, tot)
        if key in memo:
            return memo[key]
        acc = None
        for k in range(1, tot - q + 2):
            inner = nested(q - 1, tot - k)
            if inner is None:
                continue
            term = commutator(v[k], inner)
            acc = term if acc is None else acc + term
        memo[key] = acc
        return acc

    for n in range(1, n_max):
        nxt = commutator(amb, v[n]).scale(Fraction(1, 2))
        for p in range(1, n // 2 + 1):
            block = nested(2 * p, n)
            if block is not None:
                nxt = nxt + block.scale(bern[2 * p] / fact[2 * p])
        v.append(nxt.scale(Fraction(1, n + 1)))
    return BCHSeries(a, b, [v[m + 1] for m in range(m_max + 1)])


def generators(spec: ModelSpec):
    """(A, B) with U = e^{-i tau A} e^{-i tau B}: A the diagonal (zz + z)
    generator, B the transverse kick."""
    if spec.model != "kicked_ising_1d":
        raise ValueError("BCH generators implemented for the kicked Ising chain")
    J = Fraction(spec.J).limit_denominator(10 ** 12)
    hx = Fraction(spec.hx).limit_denominator(10 ** 12)
    hz = Fraction(spec.hz).limit_denominator(10 ** 12)
    a = TranslationInvariantOperator({(Z, Z): J / 2, (Z,): J * hz})
    b = TranslationInvariantOperator({(X,): J * hx})
    return a, b


def transversal_ising_generators():
    """U_pi = (-1)^L e^{-i (pi/4) sum zz} e^{-i (pi/2) sum y}; the rational
    parts (1/4) zz and (1/2) y (a global factor pi^{m+1} per order drops out
    of term counts and only rescales norms)."""
    a = TranslationInvariantOperator({(Z, Z): Fraction(1, 4)})
    b = TranslationInvariantOperator({(Y,): Fraction(1, 2)})
    return a, b


# ---------------------------------------------------------------------------
# tau power series (exact rational coefficients)

def _series_mul(p, q, order):
    out = [Fraction(0)] * (order + 1)
    for i, a in enumerate(p):
        if i > order:
            break
        for j, b in enumerate(q):
            if i + j > order:
                break
            out[i + j] += a * b
    return out

def _series_div(num, den, order):
    if den[0] == 0:
        raise ZeroDivisionError("series division needs nonzero constant term")
    out = []
    for n in range(order + 1):
        acc = num[n] if n < len(num) else Fraction(0)
        for j in range(1, n + 1):
            if j < len(den):
                acc -= den[j] * out[n - j]
        out.append(acc / den[0])
    return out


def _real_fraction(g: GaussianRational) -> Fraction:
    if g.im != 0:
        raise ValueError(f"expected real exact value, got {g}")
    return g.re


def floquet_trace_series(x: TranslationInvariantOperator, series: BCHSeries,
                         order):
    """tau-series of per-site tr(X H_F): coefficient of tau^m is
    (-i)^m tr(X H_m), exactly real."""
    out = []
    for m in range(order + 1):
        if m >= len(series.orders):
            raise ValueError("insufficient computed BCH orders")
        g = x.trace_product(series.orders[m]).times_i_power(-m)
        out.append(_real_fraction(g))
    return out


def floquet_norm_series(series: BCHSeries, order):
    """tau-series of per-site tr(H_F^2)."""
    out = [Fraction(0)] * (order + 1)
    nm = len(series.orders)
    for m1 in range(min(order + 1, nm)):
        for m2 in range(min(order + 1 - m1, nm)):
            g = series.orders[m1].trace_product(series.orders[m2])
            out[m1 + m2] += _real_fraction(g.times_i_power(-(m1 + m2)))
    if order >= 2 * (nm - 1) + 2:
        raise ValueError("insufficient computed BCH orders")
    return out


def plateau_amplitude(x: TranslationInvariantOperator, series: BCHSeries,
                      tau_order):
    """Exact tau-polynomial of <C_X> = (tr X H_F)^2 / tr H_F^2.

    Returns rational coefficients [c_0, c_1, ..., c_tau_order].
    """
    num = floquet_trace_series(x, series, tau_order)
    den = floquet_norm_series(series, tau_order)
    return _series_div(_series_mul(num, num, tau_order), den, tau_order)


def plateau_value(coeffs, tau):
    return float(sum(float(c) * tau ** m for m, c in enumerate(coeffs)))


# ---------------------------------------------------------------------------
# dense matrix-log oracle (small ring)

def embed_ring(op: TranslationInvariantOperator, L, coeff=1.0):
    """Dense 2^L matrix of the extensive operator on a periodic ring."""
    from .pauli import SIGMA

    dim = 2 ** L
    out = np.zeros((dim, dim), dtype=complex)
    for key, c in op.terms.items():
        if len(key) > L:
            raise ValueError("density support exceeds ring size")
        for j in range(L):
            mats = [np.eye(2)] * L
            for o, code in enumerate(key):
                mats[(j + o) % L] = SIGMA[code]
            full = mats[0]
            for m in mats[1:]:
                full = np.kron(full, m)
            out += (coeff * complex(c)) * full
    return out


def hf_truncated_dense(series: BCHSeries, tau, L, m_max):
    """sum_{m<=m_max} (-i tau)^m H_m embedded on the L-ring."""
    out = np.zeros((2 ** L, 2 ** L), dtype=complex)
    for m in range(m_max + 1):
        out += embed_ring(series.orders[m], L, coeff=(-1j * tau) ** m)
    return out


def matrix_log_hf(spec: ModelSpec, L):
    """i log(U)/tau on the L-ring (principal branch)."""
    import scipy.linalg as sla

    from .models import Chain, build_model, program_unitary

    u = program_unitary(build_model(spec, Chain(L, periodic=True)))
    return 1j * sla.logm(u) / spec.tau
