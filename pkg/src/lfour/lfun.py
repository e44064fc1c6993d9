"""Dirichlet L-functions, the completed functional equation, the four-fold
approximate functional equation, and the conditional log-modulus bound used
as a numeric diagnostic.

L-values are computed from the Hurwitz zeta function by Euler-Maclaurin
continuation: L(s, chi) = m^{-s} sum_a chi(a) zeta(s, a/m).  The AFE is the
object under test here, so it deliberately does not feed back into the
L-value path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chargroup import (DirichletCharacter, Quadruple, convolution_sieve,
                        epsilon_factor, primes_upto, product_character)
from .errors import TruncationError, UsageError
from .special import WeightV, log_gamma

# Bernoulli numbers B_2 .. B_30
_BERNOULLI = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6),
    Fraction(-3617, 510), Fraction(43867, 798), Fraction(-174611, 330),
    Fraction(854513, 138), Fraction(-236364091, 2730), Fraction(8553103, 6),
    Fraction(-23749461029, 870), Fraction(8615841276005, 14322),
]


def hurwitz_zeta(s, a):
    """zeta(s, a) for 0 < a <= 1 (scalar or array a), |s| <= ~60, s != 1.

    Euler-Maclaurin with an s-dependent shift; relative accuracy ~1e-12
    on the supported region.
    """
    s = complex(s)
    if s == 1:
        raise UsageError("hurwitz_zeta pole at s = 1")
    a = np.asarray(a, dtype=np.float64)
    scalar = a.ndim == 0
    a = np.atleast_1d(a)
    if np.any((a <= 0) | (a > 1)):
        raise UsageError("hurwitz_zeta needs 0 < a <= 1")
    N = 40 + int(1.5 * abs(s))
    M = 14
    k = np.arange(N)[:, None]
    base = (k + a[None, :])
    acc = np.sum(base ** (-s), axis=0)
    na = N + a
    acc = acc + na ** (1.0 - s) / (s - 1.0) + 0.5 * na ** (-s)
    poch = s
    na_pow = na ** (-s - 1.0)
    inv_na2 = na ** (-2.0)
    for j, b in enumerate(_BERNOULLI[:M], start=1):
        acc = acc + float(b) / math.factorial(2 * j) * poch * na_pow
        poch = poch * (s + 2 * j - 1) * (s + 2 * j)
        na_pow = na_pow * inv_na2
    return complex(acc[0]) if scalar else acc


def lvalue(chi: DirichletCharacter, s) -> complex:
    """L(s, chi) = m^{-s} sum_{a=1..m} chi(a) zeta(s, a/m)."""
    s = complex(s)
    m = chi.modulus
    if chi.is_principal() and s == 1:
        raise UsageError("L(1, principal) is a pole")
    if m == 1:
        return hurwitz_zeta(s, 1.0)
    a = np.arange(1, m + 1, dtype=np.float64)
    vals = chi.values()[np.arange(1, m + 1) % m]
    z = hurwitz_zeta(s, a / m)
    return complex(m ** (-s) * np.dot(vals, z))


def lvalue_euler(chi: DirichletCharacter, s, prime_cutoff: int = 10 ** 4):
    """L(s, chi) as a truncated Euler product with a rigorous tail bound.

    Only sensible for Re(s) > 1; returns (value, tail_bound).
    """
    s = complex(s)
    if s.real <= 1:
        raise UsageError("Euler-product evaluation needs Re(s) > 1")
    val = 1.0 + 0.0j
    for p in primes_upto(prime_cutoff).tolist():
        val /= (1.0 - chi(p) * p ** (-s))
    # |log prod_{p>P} (1-chi(p)p^{-s})^{-1}| <= sum_{n>P} n^{-Re s} <= P^{1-Re s}/(Re s - 1)
    tail = prime_cutoff ** (1.0 - s.real) / (s.real - 1.0)
    return val, abs(val) * (math.expm1(tail) if tail < 1 else math.inf)


def completed_lambda(chi: DirichletCharacter, s) -> complex:
    """Lambda(1/2+s, chi) = (m/pi)^{s/2} Gamma((1/2+s)/2) L(1/2+s, chi),
    for even primitive chi mod m > 1."""
    if chi.modulus <= 1 or not chi.is_primitive() or not chi.is_even():
        raise UsageError("completed_lambda needs an even primitive chi, m > 1")
    s = complex(s)
    m = chi.modulus
    return (m / math.pi) ** (s / 2) \
        * np.exp(log_gamma((0.5 + s) / 2)) * lvalue(chi, 0.5 + s)


def fe_residual(chi: DirichletCharacter, s) -> float:
    """|Lambda(1/2+s,chi) - epsilon(chi) Lambda(1/2-s, conj chi)|."""
    return abs(completed_lambda(chi, s)
               - epsilon_factor(chi) * completed_lambda(chi.conjugate(), -s))


# --------------------------------------------------------------------------
# the four-fold product and its approximate functional equation

def root_number(Q: Quadruple) -> complex:
    """epsilon = chi1 chi2 conj(chi3 chi4)(q) * prod of normalized Gauss sums."""
    c1, c2, c3, c4 = Q.chars
    val = c1(Q.q) * c2(Q.q) * np.conj(c3(Q.q) * c4(Q.q))
    val *= epsilon_factor(c1) * epsilon_factor(c2)
    val *= epsilon_factor(c3.conjugate()) * epsilon_factor(c4.conjugate())
    return complex(val)


def lproduct_direct(Q: Quadruple, chi: DirichletCharacter) -> complex:
    """L(1/2+it,chi chi1) L(1/2+it,chi chi2) L(1/2-it,conj(chi chi3))
    L(1/2-it,conj(chi chi4)), each factor via Hurwitz continuation."""
    t = Q.t
    s_plus, s_minus = 0.5 + 1j * t, 0.5 - 1j * t

    def times(chi_j):
        return product_character(chi, chi_j) if chi_j.modulus > 1 else chi

    val = lvalue(times(Q.chars[0]), s_plus)
    val *= lvalue(times(Q.chars[1]), s_plus)
    val *= lvalue(times(Q.chars[2]).conjugate(), s_minus)
    val *= lvalue(times(Q.chars[3]).conjugate(), s_minus)
    return complex(val)


class AfeEvaluator:
    """Truncated two-sided AFE sums for one quadruple, for every chi mod q.

    The double sum over mn <= K is regrouped by residue classes
    (m mod q, n mod q) into a q x q matrix T, so each character costs one
    q-vector sandwich.  Since V is real and the dual sum's coefficients
    are the conjugates of the first sum's, the dual matrix is conj(T).
    """

    def __init__(self, Q: Quadruple, envelope_tol: float = 1e-12,
                 budget: int = 20_000_000):
        self.Q = Q
        self.weight = WeightV(t=Q.t)
        qhat2 = Q.qhat ** 2
        x0 = self.weight.envelope_cutoff(envelope_tol)
        K = int(math.ceil(qhat2 * x0))
        self.capped = K > budget
        self.K = min(K, budget)
        if self.K < 4:
            self.K = 4
        self.x0 = self.K / qhat2
        self._build()

    def _build(self):
        Q, K = self.Q, self.K
        q = Q.q
        qhat2 = Q.qhat ** 2
        c1, c2, c3, c4 = Q.chars
        u = convolution_sieve(c1, c2, K)            # (chi1*chi2)(m)
        w = convolution_sieve(c3.conjugate(), c4.conjugate(), K)
        n_arr = np.arange(K + 1, dtype=np.float64)
        n_arr[0] = 1.0
        ln = np.log(n_arr)
        t = Q.t
        u *= np.exp((-0.5 - 1j * t) * ln)           # m^{-1/2-it}
        w *= np.exp((-0.5 + 1j * t) * ln)           # n^{-1/2+it}
        spline = self.weight.interpolator(0.5 / qhat2, self.x0 * 1.05)
        lq2 = math.log(qhat2)
        mod = (np.arange(K + 1) % q).astype(np.int32)
        T = np.zeros((q, q), dtype=np.complex128)
        R = math.isqrt(K)

        def accumulate(row_class, weights, col_classes):
            re = np.bincount(col_classes, weights=weights.real, minlength=q)
            im = np.bincount(col_classes, weights=weights.imag, minlength=q)
            T[row_class] += re + 1j * im

        for m in range(1, R + 1):
            top = K // m
            sl = slice(1, top + 1)
            vx = spline(np.exp(ln[sl] + (math.log(m) - lq2)))
            accumulate(m % q, u[m] * w[sl] * vx, mod[sl])
        for n in range(1, R + 1):
            top = K // n
            if top <= R:
                continue
            sl = slice(R + 1, top + 1)
            vx = spline(np.exp(ln[sl] + (math.log(n) - lq2)))
            re = np.bincount(mod[sl], weights=(u[sl] * vx).real, minlength=q)
            im = np.bincount(mod[sl], weights=(u[sl] * vx).imag, minlength=q)
            T[:, n % q] += (re + 1j * im) * w[n]
        self.T = T

    # -- per-character values -------------------------------------------------

    def first_sum(self, chi: DirichletCharacter) -> complex:
        """The chi-twisted first AFE sum over mn <= K."""
        v = chi.values()
        return complex(v @ self.T @ np.conj(v))

    def dual_prefactor(self, chi: DirichletCharacter) -> complex:
        Q = self.Q
        d12 = Q.D[0] * Q.D[1]
        d34 = Q.D[2] * Q.D[3]
        pref = (d12 / d34) ** (-1j * Q.t) * root_number(Q)
        return complex(pref * chi(d12 * pow(d34, -1, Q.q) % Q.q))

    def product_value(self, chi: DirichletCharacter) -> complex:
        """AFE evaluation of the four-fold central product at chi."""
        if chi.modulus != self.Q.q or chi.is_principal() or not chi.is_even():
            raise UsageError("product_value needs an even primitive chi mod q")
        s_plus = self.first_sum(chi)
        return complex(s_plus + self.dual_prefactor(chi) * np.conj(s_plus))

    def tail_estimate(self) -> float:
        """Crude rigorous bound on the truncation error of one AFE sum:
        sum_{P > K} d_4(P)/sqrt(P) * envelope(P/qhat^2), by dyadic slabs
        with d_4 partial sums bounded by Y (1+ln Y)^3."""
        qhat2 = self.Q.qhat ** 2
        total = 0.0
        A = float(self.K)
        for _ in range(200):
            mass = (2 * A * (1 + math.log(2 * A)) ** 3
                    - A * (1 + math.log(A)) ** 3) / math.sqrt(A)
            step = self.weight.envelope(A / qhat2) * mass
            total += step
            if step < 1e-18 * max(total, 1.0):
                break
            A *= 2.0
        return 2.0 * total  # both sides of the AFE

    def check_tail(self, tol: float, chi_label: str = "") -> None:
        est = self.tail_estimate()
        if est > tol:
            raise TruncationError(
                f"AFE truncation budget exceeded for {chi_label or self.Q.label()}: "
                f"tail estimate {est:.2e} > {tol:.2e}",
                bound=est)


def afe_product_value(Q: Quadruple, chi: DirichletCharacter,
                      envelope_tol: float = 1e-12,
                      budget: int = 20_000_000) -> complex:
    """One-shot AFE product value (builds a throwaway evaluator)."""
    return AfeEvaluator(Q, envelope_tol=envelope_tol,
                        budget=budget).product_value(chi)


# --------------------------------------------------------------------------
# log-modulus diagnostic (a conditional explicit-formula bound)

def von_mangoldt_sieve(limit: int) -> np.ndarray:
    """Lambda(n) for n = 0..limit."""
    out = np.zeros(limit + 1)
    for p in primes_upto(limit).tolist():
        pk = p
        while pk <= limit:
            out[pk] = math.log(p)
            pk *= p
    return out


def grh_log_bound_gap(chi: DirichletCharacter, t: float, x: float) -> float:
    """RHS - log|L(1/2+it,chi)| for the prime-sum upper bound on the
    log-modulus; expected >= -0.1 (the unquantified O(1/log^2 x) slack).

    RHS = Re sum_{n<=x} Lambda(n) chi(n) n^{-1/2-it-lam/log x}
              * log(x/n)/(log n log x)
          + (1+lam)/2 * log(m(1+|t|))/log x,
    with lam the root of e^{-lam} = lam + lam^2/2.
    """
    from .mollifier import solve_lambda
    if not chi.is_primitive() or chi.modulus <= 1:
        raise UsageError("the diagnostic needs a primitive chi, m > 1")
    if x < 2:
        raise UsageError("needs x >= 2")
    lam = solve_lambda()
    m = chi.modulus
    lx = math.log(x)
    lim = int(x)
    vm = von_mangoldt_sieve(lim)
    n = np.arange(2, lim + 1)
    lam_n = vm[2:]
    sel = lam_n > 0
    n = n[sel]
    lam_n = lam_n[sel]
    vals = chi.values()[n % m]
    terms = lam_n * vals * n ** (-0.5 - 1j * t - lam / lx) \
        * (lx - np.log(n)) / (np.log(n) * lx)
    rhs = float(np.sum(terms).real) \
        + 0.5 * (1 + lam) * math.log(m * (1 + abs(t))) / lx
    lval = lvalue(chi, 0.5 + 1j * t)
    if abs(lval) == 0.0:
        raise UsageError("L(1/2+it, chi) vanished numerically")
    return rhs - math.log(abs(lval))
