"""The Euler-product mollifier: a product of short Dirichlet polynomials
over prime blocks I_0 = (1, q^{b0}], I_j = (q^{b_{j-1}}, q^{b_j}], with
block coefficients mu(n) nu(n) a(n;K) and a per-block cap on Omega(n).

Two parameter modes:
  * paper defaults  b_j = e^j / (log log q)^5 with b_K a small constant
    fixed by the k-dependent admissibility condition.  These are degenerate
    for any q a computer can hold (K >= 0 needs log log q ~ 13), so here q
    enters only through log10(q) and the parameters are reported/validated
    symbolically.
  * scaled defaults: b_0 anchored so q^{b_0} ~ 11 and the ladder ratio e
    kept, which exercises the same code paths at desk-scale q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .chargroup import DirichletCharacter, factorize, primes_upto
from .errors import UsageError


@lru_cache(maxsize=1)
def solve_lambda() -> float:
    """The unique root in (0,1) of e^{-lam} = lam + lam^2/2 (bisection)."""
    f = lambda u: math.exp(-u) - u - 0.5 * u * u
    lo, hi = 0.0, 1.0
    assert f(lo) > 0 > f(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def condition_c_bound(k: int) -> float:
    """Upper bound for the constant b_K = c in the parameter ladder."""
    return min(4.0 * (math.exp(0.25) - 1.0) ** 4 / (math.e * (k + 2) ** 4),
               0.25 * (math.log(2.0) / 60.0) ** (4.0 / 3.0))


@dataclass
class MollifierParams:
    """Ladder (K, beta, s, ell, lambda) plus bookkeeping flags."""

    mode: str                  # "paper" or "scaled"
    k: int
    log_q: float               # natural log of q
    K: int
    beta: tuple
    s: tuple
    ell: tuple
    lam: float
    q: int | None = None
    ell_floored: bool = False

    @classmethod
    def paper_defaults(cls, log10_q: float, k: int):
        """Symbolic paper-default ladder at a (possibly astronomical) q."""
        log_q = log10_q * math.log(10.0)
        ll = math.log(log_q)
        c = 0.99 * condition_c_bound(k)
        K = math.floor(math.log(c * ll ** 5))
        if K < 0:
            raise UsageError(
                f"paper defaults are degenerate here: K = {K} < 0 "
                f"(need log log q >~ {(condition_c_bound(k)) ** (-0.2):.1f})")
        beta = [math.e ** j / ll ** 5 for j in range(K + 1)]
        beta[K] = c
        return cls._finish("paper", k, log_q, K, beta, q=None)

    @classmethod
    def scaled_defaults(cls, q: int, k: int, anchor: float = 11.0,
                        top: float = 1e4):
        """b_0 with q^{b_0} ~ anchor, ladder ratio e, q^{b_K} <= top."""
        log_q = math.log(q)
        b0 = math.log(anchor) / log_q
        K = 0
        while b0 * math.e ** (K + 1) * log_q <= math.log(top):
            K += 1
        beta = [b0 * math.e ** j for j in range(K + 1)]
        return cls._finish("scaled", k, log_q, K, beta, q=q)

    @classmethod
    def _finish(cls, mode, k, log_q, K, beta, q):
        s = [2 * math.floor(1.0 / (8.0 * b)) for b in beta]
        ell = [2 * math.floor(sj ** 0.75 / 2.0) for sj in s]
        floored = False
        if mode == "scaled":
            floored = any(l < 2 for l in ell)
            ell = [max(l, 2) for l in ell]
        return cls(mode=mode, k=k, log_q=log_q, K=K, beta=tuple(beta),
                   s=tuple(s), ell=tuple(ell), lam=solve_lambda(), q=q,
                   ell_floored=floored)

    # -- admissibility gates --------------------------------------------------

    def gate_satisfied(self) -> bool:
        """(k+2) sum ell_r b_r < 1, and the per-j variants with the 2 s_{j+1}
        b_{j+1} term; the hypotheses under which the moment machinery runs."""
        k = self.k
        total = sum(l * b for l, b in zip(self.ell, self.beta))
        if (k + 2) * total >= 1.0:
            return False
        for j in range(self.K):
            head = sum(self.ell[r] * self.beta[r] for r in range(j + 1))
            tail = sum(self.ell[r] * self.beta[r]
                       for r in range(j + 1, self.K + 1))
            if (k + 2) * head + k * tail \
                    + 2 * self.s[j + 1] * self.beta[j + 1] >= 1.0:
                return False
        return True

    def require_gate(self):
        if self.mode == "paper" and not self.gate_satisfied():
            raise UsageError("parameter gate violated for paper defaults")

    # -- prime blocks (need a concrete q) --------------------------------------

    def block_edges(self):
        return [math.exp(b * self.log_q) for b in self.beta]

    def block_primes(self, j: int) -> np.ndarray:
        if self.q is None:
            raise UsageError("symbolic parameters have no concrete primes")
        edges = self.block_edges()
        hi = math.floor(edges[j])
        lo = 1 if j == 0 else math.floor(edges[j - 1])
        ps = primes_upto(hi)
        return ps[ps > lo]

    def summary(self) -> dict:
        return {
            "mode": self.mode, "k": self.k, "K": self.K, "q": self.q,
            "log10_q": self.log_q / math.log(10.0),
            "beta": list(self.beta), "s": list(self.s), "ell": list(self.ell),
            "lambda": self.lam, "ell_floored": self.ell_floored,
            "gate_satisfied": self.gate_satisfied(),
        }


# --------------------------------------------------------------------------
# the coefficient ingredients

def smoothing_a(p: int, u: int, params: MollifierParams) -> float:
    """a(p;u) = (1 - log p/(b_u log q)) p^{-lam/(b_u log q)} on p <= q^{b_u}."""
    bu = params.beta[u] * params.log_q
    lp = math.log(p)
    if lp > bu * (1 + 1e-12):
        raise UsageError(f"prime {p} outside the block cap q^b_{u}")
    return (1.0 - lp / bu) * math.exp(-params.lam * lp / bu)


def smoothing_a_n(n: int, u: int, params: MollifierParams) -> float:
    """Completely multiplicative extension of a(.;u)."""
    out = 1.0
    for p, e in factorize(n):
        out *= smoothing_a(p, u, params) ** e
    return out


def smoothing_b(p: int, j: int, params: MollifierParams) -> float:
    """b(p;j) = (1 - 2 log p/(b_j log q)) p^{-2 lam/(b_j log q)},
    on p <= q^{b_j/2}."""
    bj = params.beta[j] * params.log_q
    lp = math.log(p)
    if 2 * lp > bj * (1 + 1e-12):
        raise UsageError(f"prime {p} outside the half-block cap")
    return (1.0 - 2.0 * lp / bj) * math.exp(-2.0 * params.lam * lp / bj)


def nu(n: int) -> float:
    """Multiplicative, nu(p^a) = 1/a!."""
    out = 1.0
    for _, e in factorize(n):
        out /= math.factorial(e)
    return out


def _mu_nu_squarefree(n):
    """(mu nu)(n) for squarefree n, else 0; returns (-1)^omega(n)."""
    fac = factorize(n)
    if any(e > 1 for _, e in fac):
        return 0.0
    return (-1.0) ** len(fac)


def alpha_k(n: int, k: int, ell: int) -> float:
    """alpha_k(n;ell) = sum over n = n_1...n_k, Omega(n_i) <= ell, of
    prod mu(n_i) nu(n_i).  Recursive over the first factor."""
    if k == 0:
        return 1.0 if n == 1 else 0.0
    if n == 1:
        return 1.0  # all remaining factors are 1

    @lru_cache(maxsize=None)
    def rec(m, kk):
        if kk == 1:
            fac = factorize(m)
            if any(e > 1 for _, e in fac) or len(fac) > ell:
                return 0.0
            return (-1.0) ** len(fac)
        total = 0.0
        for d in _squarefree_divisors_capped(m, ell):
            total += _mu_nu_squarefree(d) * rec(m // d, kk - 1)
        return total

    return rec(n, k)


def _squarefree_divisors_capped(m, ell):
    ps = [p for p, _ in factorize(m)]
    out = [1]
    for p in ps:
        out += [d * p for d in out]
    return [d for d in out if len(factorize(d)) <= ell] if ell < len(ps) \
        else out


# --------------------------------------------------------------------------
# the mollifier as a Dirichlet polynomial

@dataclass
class DirichletPolynomial:
    """Sparse coefficient map: coeffs[i] at integer ns[i]; ns sorted."""

    ns: np.ndarray
    coeffs: np.ndarray
    cutoff: int
    block_factors: list = field(default_factory=list)  # per-block audit data

    def __len__(self):
        return len(self.ns)

    def coefficient(self, n: int) -> float:
        i = np.searchsorted(self.ns, n)
        if i < len(self.ns) and self.ns[i] == n:
            return float(self.coeffs[i])
        return 0.0


def block_polynomial(params: MollifierParams, j: int,
                     max_terms: int = 2_000_000) -> DirichletPolynomial:
    """M_j's coefficients: mu(n) nu(n) a(n;K) on squarefree products of at
    most ell_j primes from block j."""
    primes = [int(p) for p in params.block_primes(j)]
    a_vals = {p: smoothing_a(p, params.K, params) for p in primes}
    ell = params.ell[j]
    ns = [1]
    cs = [1.0]
    frontier = [(1, 1.0, -1)]  # (n, coeff, last prime index)
    for _ in range(ell):
        new = []
        for n, c, last in frontier:
            for i in range(last + 1, len(primes)):
                p = primes[i]
                new.append((n * p, -c * a_vals[p], i))
                if len(ns) + len(new) > max_terms:
                    raise UsageError(
                        "mollifier block too large; rescale the parameters")
        frontier = new
        ns.extend(x[0] for x in new)
        cs.extend(x[1] for x in new)
    order = np.argsort(np.array(ns, dtype=np.int64))
    return DirichletPolynomial(
        ns=np.array(ns, dtype=np.int64)[order],
        coeffs=np.array(cs)[order],
        cutoff=int(np.max(np.array(ns))) if ns else 1,
        block_factors=[("block", j, len(ns))])


def build_mollifier(params: MollifierParams,
                    max_terms: int = 2_000_000) -> DirichletPolynomial:
    """Coefficients of M = prod_j M_j (blocks are disjoint prime intervals,
    so block products multiply without collisions)."""
    params.require_gate()
    poly = None
    audits = []
    for j in range(params.K + 1):
        bj = block_polynomial(params, j, max_terms=max_terms)
        audits.extend(bj.block_factors)
        if poly is None:
            poly = bj
            continue
        if len(poly) * len(bj) > max_terms:
            raise UsageError("mollifier support too large; rescale")
        ns = np.multiply.outer(poly.ns, bj.ns).ravel()
        cs = np.multiply.outer(poly.coeffs, bj.coeffs).ravel()
        order = np.argsort(ns)
        poly = DirichletPolynomial(ns=ns[order], coeffs=cs[order],
                                   cutoff=int(ns.max()))
    poly.block_factors = audits
    return poly


def evaluate_m(poly: DirichletPolynomial, chi: DirichletCharacter,
               t: float = 0.0) -> complex:
    """M(1/2+it, chi) = sum_n c(n) chi(n) n^{-1/2-it}."""
    m = chi.modulus
    vals = chi.values()[poly.ns % m] if m > 1 else 1.0
    return complex(np.sum(poly.coeffs * vals
                          * poly.ns ** (-0.5 - 1j * t)))


# --------------------------------------------------------------------------
# chi-dependent auxiliary factors

def prime_sum_p(chi: DirichletCharacter, params: MollifierParams, j: int,
                u: int, t: float = 0.0) -> complex:
    """P_{I_j}(chi;u) = sum_{p in I_j} chi(p) a(p;u) p^{-1/2-it}."""
    ps = params.block_primes(j)
    if len(ps) == 0:
        return 0.0 + 0.0j
    a = np.array([smoothing_a(int(p), u, params) for p in ps])
    vals = chi.values()[ps % chi.modulus] if chi.modulus > 1 else 1.0
    return complex(np.sum(vals * a * ps.astype(float) ** (-0.5 - 1j * t)))


def trunc_exp(ell: int, x: float) -> float:
    """E_ell(x) = sum_{s <= ell} x^s / s!."""
    acc, term = 1.0, 1.0
    for s in range(1, ell + 1):
        term *= x / s
        acc += term
    return acc


def factor_d(chi: DirichletCharacter, params: MollifierParams, j: int,
             k: int, t: float = 0.0) -> float:
    """D_{j,k}(chi) = prod_{r<=j} (1+e^{-ell_r/2}) E_{ell_r}(k Re P_{I_r}(chi;j))."""
    out = 1.0
    for r in range(j + 1):
        pr = prime_sum_p(chi, params, r, j, t).real
        out *= (1.0 + math.exp(-params.ell[r] / 2.0)) \
            * trunc_exp(params.ell[r], k * pr)
    return out


def factor_s(chi: DirichletCharacter, params: MollifierParams, j: int,
             k: int, t: float = 0.0) -> float:
    """S_{j,k}(chi) = exp(k Re sum_{p <= q^{b_j/2}} chi(p^2) b(p;j) p^{-1-2it})."""
    hi = math.floor(math.exp(0.5 * params.beta[j] * params.log_q))
    ps = primes_upto(hi)
    if len(ps) == 0:
        return 1.0
    b = np.array([smoothing_b(int(p), j, params) for p in ps])
    m = chi.modulus
    vals = chi.values()[(ps * ps) % m] if m > 1 else np.ones(len(ps))
    total = np.sum(vals * b * ps.astype(float) ** (-1.0 - 2j * t))
    return float(math.exp(k * total.real))
