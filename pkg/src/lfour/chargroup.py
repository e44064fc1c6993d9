"""Exact arithmetic of Dirichlet characters and exponential sums.

A character mod m is stored as an exponent vector over a fixed generating
set of (Z/mZ)^*, so character values are roots of unity carried both as
complex doubles and as exact rational angles (numerator/denominator of the
argument divided by 2*pi).  The exact angles are the precision escape
hatch: anything built out of character values can be re-evaluated at high
precision without re-deriving the arithmetic.

Kloosterman-type sums are computed by direct summation over units, which
is entirely adequate for moduli up to ~10^6.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import UsageError

TWO_PI = 2.0 * math.pi


# --------------------------------------------------------------------------
# small number-theory helpers

def factorize(m):
    """Return the prime factorization of m as a list of (p, e) pairs."""
    if m <= 0:
        raise UsageError("factorize needs a positive integer")
    out = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if m > 1:
        out.append((m, 1))
    return out


def euler_phi(m):
    phi = 1
    for p, e in factorize(m):
        phi *= (p - 1) * p ** (e - 1)
    return phi


def is_squarefree(m):
    return all(e == 1 for _, e in factorize(m))


def is_prime(n):
    """Deterministic Miller-Rabin, valid for n < 3.3e24."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_upto(n):
    """All primes <= n, as a numpy int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p:: p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def _primitive_root_mod_p(p):
    if p == 2:
        return 1
    fac = [q for q, _ in factorize(p - 1)]
    g = 2
    while True:
        if all(pow(g, (p - 1) // q, p) != 1 for q in fac):
            return g
        g += 1


def _primitive_root_mod_pe(p, e):
    g = _primitive_root_mod_p(p)
    if e == 1:
        return g
    # g is a primitive root mod p^e unless g^(p-1) == 1 mod p^2
    if pow(g, p - 1, p * p) == 1:
        g += p
    return g


def unit_e(angle: Fraction) -> complex:
    """exp(2*pi*i*angle) for an exact rational angle."""
    return cmath.exp(2j * math.pi * float(angle % 1))


# --------------------------------------------------------------------------
# unit group

class UnitGroup:
    """(Z/mZ)^* presented as a product of cyclic groups with fixed generators.

    Each component keeps a discrete-log table, so exponent vectors of
    arbitrary units are a table lookup.
    """

    def __init__(self, modulus: int):
        if modulus < 1:
            raise UsageError("modulus must be positive")
        self.modulus = modulus
        self.orders: list[int] = []
        self.generators: list[int] = []
        # per-component (prime_power, generator mod prime_power, dlog table)
        self._components = []
        if modulus > 1:
            for p, e in factorize(modulus):
                pe = p ** e
                if p == 2:
                    if e == 1:
                        continue
                    if e == 2:
                        self._add_component(pe, 3, 2)
                    else:
                        self._add_component(pe, pe - 1, 2)          # <-1>
                        self._add_component(pe, 3, 2 ** (e - 2))    # <3>
                else:
                    g = _primitive_root_mod_pe(p, e)
                    self._add_component(pe, g, (p - 1) * p ** (e - 1))
        self.phi = euler_phi(modulus)
        assert math.prod(self.orders) == self.phi

    def _add_component(self, pe, gen, order):
        # dlog table for <gen> inside (Z/pe)^*; for 2^e (e>=3) the two
        # components are handled jointly in dlog()
        m = self.modulus
        table = {}
        x = 1
        for k in range(order):
            table.setdefault(x, k)
            x = x * gen % pe
        # CRT-lift the generator to a unit mod m congruent to 1 elsewhere
        rest = m // pe
        if rest == 1:
            lifted = gen % m
        else:
            inv = pow(pe, -1, rest)
            lifted = (gen * rest * pow(rest, -1, pe) + 1 * pe * inv) % m
        self._components.append((pe, gen, order, table))
        self.orders.append(order)
        self.generators.append(lifted)

    def is_unit(self, n: int) -> bool:
        return math.gcd(n, self.modulus) == 1

    def dlog(self, n: int):
        """Exponent vector of the unit n with respect to the generators."""
        n %= self.modulus
        if not self.is_unit(n):
            raise UsageError(f"{n} is not a unit mod {self.modulus}")
        out = []
        i = 0
        comps = self._components
        while i < len(comps):
            pe, gen, order, table = comps[i]
            r = n % pe
            if i + 1 < len(comps) and comps[i + 1][0] == pe:
                # 2^e with e>=3: r = (-1)^a 3^b
                _, gen2, order2, table2 = comps[i + 1]
                if r in table2:
                    out.extend([0, table2[r]])
                else:
                    r2 = (-r) % pe
                    out.extend([1, table2[r2]])
                i += 2
            else:
                out.append(table[r])
                i += 1
        return tuple(out)

    def units(self):
        return [a for a in range(self.modulus) if self.is_unit(a)] \
            if self.modulus > 1 else [0]

    def __repr__(self):
        return f"UnitGroup({self.modulus}, orders={self.orders})"


@lru_cache(maxsize=None)
def unit_group(m: int) -> UnitGroup:
    return UnitGroup(m)


# --------------------------------------------------------------------------
# characters

class DirichletCharacter:
    """A Dirichlet character mod m as an exponent vector over unit_group(m)."""

    __slots__ = ("group", "exponents", "_values", "_conductor", "_parity")

    def __init__(self, group: UnitGroup, exponents):
        self.group = group
        self.exponents = tuple(
            k % o for k, o in zip(exponents, group.orders))
        if len(self.exponents) != len(group.orders):
            raise UsageError("exponent vector length mismatch")
        self._values = None
        self._conductor = None
        self._parity = None

    # -- basic structure ---------------------------------------------------

    @property
    def modulus(self) -> int:
        return self.group.modulus

    @property
    def label(self) -> str:
        exps = ".".join(str(k) for k in self.exponents)
        return f"chi{self.modulus}[{exps}]" if self.exponents \
            else f"chi{self.modulus}[]"

    def angle(self, n: int):
        """Exact angle r with chi(n) = e(r), or None when chi(n) = 0."""
        m = self.modulus
        if m == 1:
            return Fraction(0)
        if math.gcd(n, m) != 1:
            return None
        d = self.group.dlog(n)
        r = Fraction(0)
        for k, e, o in zip(self.exponents, d, self.group.orders):
            r += Fraction(k * e, o)
        return r % 1

    def __call__(self, n: int) -> complex:
        m = self.modulus
        if m == 1:
            return 1.0 + 0.0j
        return complex(self.values()[n % m])

    def values(self) -> np.ndarray:
        """chi(0..m-1) as a complex array (cached)."""
        if self._values is None:
            m = self.modulus
            vals = np.zeros(m if m > 1 else 1, dtype=np.complex128)
            if m == 1:
                vals[0] = 1.0
            else:
                for a in range(m):
                    if math.gcd(a, m) == 1:
                        vals[a] = unit_e(self.angle(a))
            self._values = vals
        return self._values

    # -- derived attributes --------------------------------------------------

    def is_even(self) -> bool:
        if self._parity is None:
            if self.modulus <= 2:
                self._parity = True
            else:
                self._parity = self.angle(self.modulus - 1) == 0
        return self._parity

    def order(self) -> int:
        o = 1
        for k, m in zip(self.exponents, self.group.orders):
            if k:
                o = math.lcm(o, m // math.gcd(k, m))
        return o

    def conductor(self) -> int:
        """Smallest d | m from which chi is induced, found by direct testing."""
        if self._conductor is None:
            m = self.modulus
            divs = sorted(_divisors(m))
            for d in divs:
                if self._is_induced_from(d):
                    self._conductor = d
                    break
        return self._conductor

    def _is_induced_from(self, d: int) -> bool:
        m = self.modulus
        for a in range(1 + d, m, d):
            if math.gcd(a, m) == 1 and self.angle(a) != 0:
                return False
        return True

    def is_primitive(self) -> bool:
        return self.conductor() == self.modulus

    def is_principal(self) -> bool:
        return all(k == 0 for k in self.exponents)

    # -- algebra -------------------------------------------------------------

    def conjugate(self) -> "DirichletCharacter":
        return DirichletCharacter(self.group, tuple(-k for k in self.exponents))

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if other.modulus == self.modulus:
            return DirichletCharacter(
                self.group,
                tuple(a + b for a, b in zip(self.exponents, other.exponents)))
        return product_character(self, other)

    def __eq__(self, other):
        return (isinstance(other, DirichletCharacter)
                and self.modulus == other.modulus
                and self.exponents == other.exponents)

    def __hash__(self):
        return hash((self.modulus, self.exponents))

    def __repr__(self):
        return self.label


def _divisors(m):
    out = [1]
    for p, e in factorize(m):
        out = [d * p ** k for d in out for k in range(e + 1)]
    return out


def character_table(m: int):
    """All phi(m) characters mod m (principal first)."""
    if not 1 <= m <= 10 ** 6:
        raise UsageError("modulus out of the supported range [1, 10^6]")
    g = unit_group(m)
    chars = []
    idx = [0] * len(g.orders)
    while True:
        chars.append(DirichletCharacter(g, tuple(idx)))
        for i in range(len(idx) - 1, -1, -1):
            idx[i] += 1
            if idx[i] < g.orders[i]:
                break
            idx[i] = 0
        else:
            break
    return chars


def trivial_character() -> DirichletCharacter:
    return character_table(1)[0]


def principal_character(m: int) -> DirichletCharacter:
    return DirichletCharacter(unit_group(m), (0,) * len(unit_group(m).orders))


def product_character(chi_a: DirichletCharacter,
                      chi_b: DirichletCharacter) -> DirichletCharacter:
    """The character mod lcm given pointwise by chi_a * chi_b (coprime moduli)."""
    ma, mb = chi_a.modulus, chi_b.modulus
    if math.gcd(ma, mb) != 1:
        raise UsageError("product_character needs coprime moduli")
    m = ma * mb
    g = unit_group(m)
    exps = []
    for gen, o in zip(g.generators, g.orders):
        r = (chi_a.angle(gen % ma if ma > 1 else 1) or Fraction(0)) + \
            (chi_b.angle(gen % mb if mb > 1 else 1) or Fraction(0))
        k = r * o
        assert k.denominator == 1, "character value not an o-th root of unity"
        exps.append(int(k) % o)
    return DirichletCharacter(g, tuple(exps))


def crt_factor(chi: DirichletCharacter, m1: int, m2: int):
    """Split chi mod m1*m2 into (chi' mod m1, chi'' mod m2), coprime m1, m2."""
    if m1 * m2 != chi.modulus or math.gcd(m1, m2) != 1:
        raise UsageError("crt_factor needs modulus = m1*m2 with (m1,m2)=1")

    def restrict(mk, other):
        gk = unit_group(mk)
        exps = []
        for gen, o in zip(gk.generators, gk.orders):
            # lift gen to a unit mod m that is 1 mod the other factor
            if other == 1:
                lifted = gen % chi.modulus
            else:
                lifted = (gen * other * pow(other, -1, mk)
                          + mk * pow(mk, -1, other)) % chi.modulus
            r = chi.angle(lifted)
            k = r * o
            assert k.denominator == 1
            exps.append(int(k) % o)
        return DirichletCharacter(gk, tuple(exps))

    return restrict(m1, m2), restrict(m2, m1)


def even_primitive_characters(m: int):
    return [c for c in character_table(m) if c.is_even() and c.is_primitive()]


def enumerate_even_primitive(q: int):
    """Even primitive characters mod a prime q > 3; exactly phi(q)/2 - 1."""
    if not is_prime(q) or q <= 3:
        raise UsageError("enumerate_even_primitive needs a prime q > 3")
    chars = even_primitive_characters(q)
    assert len(chars) == (q - 1) // 2 - 1
    return chars


# --------------------------------------------------------------------------
# Gauss sums

def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = sum_a chi(a) e(a/m), by the m-term definition."""
    m = chi.modulus
    if m == 1:
        return 1.0 + 0.0j
    vals = chi.values()
    e = np.exp(2j * np.pi * np.arange(m) / m)
    return complex(np.dot(vals, e))


def epsilon_factor(chi: DirichletCharacter) -> complex:
    """epsilon(chi) = tau(chi)/sqrt(m); unit modulus for primitive chi."""
    return gauss_sum(chi) / math.sqrt(chi.modulus)


def gauss_sum_mp(chi: DirichletCharacter, dps: int = 50):
    """tau(chi) at dps decimal digits, from the exact character angles."""
    import mpmath as mp
    m = chi.modulus
    if m == 1:
        return mp.mpc(1)
    with mp.workdps(dps):
        total = mp.mpc(0)
        for a in range(1, m):
            r = chi.angle(a)
            if r is None:
                continue
            total += mp.e ** (2j * mp.pi * (mp.mpf(r.numerator) / r.denominator
                                            + mp.mpf(a) / m))
        return total


def epsilon_factor_mp(chi: DirichletCharacter, dps: int = 50):
    import mpmath as mp
    with mp.workdps(dps):
        return gauss_sum_mp(chi, dps) / mp.sqrt(chi.modulus)


# --------------------------------------------------------------------------
# convolution coefficients

def convolve(chi_a: DirichletCharacter, chi_b: DirichletCharacter,
             n: int) -> complex:
    """(chi_a * chi_b)(n) = sum over n = u v of chi_a(u) chi_b(v)."""
    if n < 1:
        raise UsageError("convolve needs n >= 1")
    total = 0.0 + 0.0j
    for u in _divisors(n):
        total += chi_a(u) * chi_b(n // u)
    return total


def convolve_prime_power(chi_a, chi_b, p: int, k: int) -> complex:
    """(chi_a * chi_b)(p^k) without factoring: sum of chi_a(p^i) chi_b(p^(k-i))."""
    a, b = chi_a(p), chi_b(p)
    total = 0.0 + 0.0j
    for i in range(k + 1):
        total += a ** i * b ** (k - i)
    return total


def convolution_sieve(chi_a, chi_b, limit: int) -> np.ndarray:
    """Array c[0..limit] with c[n] = (chi_a * chi_b)(n); c[0] = 0.

    Multiplicative sieve: for each prime power p^a <= limit, multiply the
    exact-valuation class {n : p^a || n} by (chi_a*chi_b)(p^a).
    """
    out = np.ones(limit + 1, dtype=np.complex128)
    out[0] = 0.0
    for p in primes_upto(limit):
        p = int(p)
        vals = {}
        a = 1
        pa = p
        while pa <= limit:
            vals[a] = convolve_prime_power(chi_a, chi_b, p, a)
            a += 1
            pa *= p
        amax = a - 1
        for a in range(1, amax + 1):
            pa = p ** a
            k = np.arange(1, limit // pa + 1)
            if a < amax:
                k = k[k % p != 0]
            else:
                pass  # p^(amax+1) > limit, the class is all multiples of p^amax
            out[k * pa] *= vals[a]
    return out


# --------------------------------------------------------------------------
# Kloosterman-type sums

def _inverse_table(c: int) -> np.ndarray:
    """inv[a] = a^{-1} mod c for units a, 0 elsewhere."""
    inv = np.zeros(c, dtype=np.int64)
    if c == 1:
        return inv
    inv[1] = 1
    if is_prime(c):
        for a in range(2, c):
            inv[a] = (-(c // a) * inv[c % a]) % c
    else:
        for a in range(2, c):
            if math.gcd(a, c) == 1:
                inv[a] = pow(a, -1, c)
    return inv


def kloosterman(m: int, n: int, c: int) -> complex:
    """S(m,n;c) = sum over units a mod c of e((m a + n a^{-1})/c)."""
    if c < 1:
        raise UsageError("kloosterman needs c >= 1")
    if c == 1:
        return 1.0 + 0.0j
    inv = _inverse_table(c)
    a = np.arange(1, c)
    a = a[inv[a] > 0]
    phase = (m % c) * a + (n % c) * inv[a]
    return complex(np.exp(2j * np.pi * (phase % c) / c).sum())


def hybrid_kloosterman(chi: DirichletCharacter, m: int, n: int,
                       c: int) -> complex:
    """S_chi(m,n;c), the chi-weighted Kloosterman sum; needs mod(chi) | c."""
    if c < 1 or c % chi.modulus != 0:
        raise UsageError("hybrid sum needs the character modulus to divide c")
    if c == 1:
        return 1.0 + 0.0j
    inv = _inverse_table(c)
    a = np.arange(1, c)
    a = a[inv[a] > 0]
    phase = np.exp(2j * np.pi * (((m % c) * a + (n % c) * inv[a]) % c) / c)
    weights = chi.values()[a % chi.modulus] if chi.modulus > 1 else 1.0
    return complex((weights * phase).sum())


def ramanujan_sum(q: int, n: int) -> complex:
    """c_q(n) = S(0,n;q)."""
    return kloosterman(0, n, q)


def mult_k_residual(phi1: DirichletCharacter, phi2: DirichletCharacter,
                    a: int, b: int) -> float:
    """Residual of the CRT factorization of the twisted Kloosterman sum:

        S_{phi1 phi2}(a,b;cd)
            = phi1(d) phi2(c) S_{phi1}(a, b dbar^2; c) S_{phi2}(a, b cbar^2; d).

    The unimodular factor phi1(d) phi2(c) comes out of the substitution
    u -> d u in the u-sum (and likewise v -> c v); it is 1 for principal
    weights but cannot be dropped in general.
    """
    c, d = phi1.modulus, phi2.modulus
    if math.gcd(c, d) != 1:
        raise UsageError("mult_k_residual needs coprime moduli")
    lhs = hybrid_kloosterman(product_character(phi1, phi2), a, b, c * d)
    if c == 1:
        s1 = 1.0 + 0.0j
    else:
        s1 = hybrid_kloosterman(phi1, a, b * pow(d * d % c, -1, c) % c, c)
    if d == 1:
        s2 = 1.0 + 0.0j
    else:
        s2 = hybrid_kloosterman(phi2, a, b * pow(c * c % d, -1, d) % d, d)
    return abs(lhs - phi1(d) * phi2(c) * s1 * s2)


# --------------------------------------------------------------------------
# experiment configuration

@dataclass(frozen=True)
class Quadruple:
    """Configuration (q; D_1..D_4; chi_1..chi_4; t; l_1, l_2) for the
    twisted fourth moment over even primitive characters mod q."""

    q: int
    D: tuple
    chars: tuple
    t: float = 0.0
    ell: tuple = (1, 1)

    def __post_init__(self):
        q, D, chars, ell = self.q, self.D, self.chars, self.ell
        if len(D) != 4 or len(chars) != 4 or len(ell) != 2:
            raise UsageError("need four moduli, four characters, two twists")
        if not is_prime(q):
            raise UsageError(f"q = {q} must be prime")
        prod_d = math.prod(D)
        if prod_d % q == 0 or math.gcd(q, prod_d) != 1:
            raise UsageError("q must not divide D_1 D_2 D_3 D_4")
        for i, d in enumerate(D):
            if not is_squarefree(d):
                raise UsageError(f"D_{i+1} = {d} is not square-free")
            for j in range(i + 1, 4):
                if math.gcd(d, D[j]) != 1:
                    raise UsageError("the D_j must be pairwise coprime")
        for i, (d, chi) in enumerate(zip(D, chars)):
            if chi.modulus != d:
                raise UsageError(f"chi_{i+1} has modulus {chi.modulus} != {d}")
            if not chi.is_primitive() or not chi.is_even():
                raise UsageError(f"chi_{i+1} must be even and primitive")
        if math.gcd(ell[0] * ell[1], q) != 1:
            raise UsageError("the twists must be coprime to q")
        if ell[0] < 1 or ell[1] < 1:
            raise UsageError("twists must be positive")

    @property
    def qhat(self) -> float:
        return self.q * math.prod(self.D) ** 0.25 / math.pi

    @property
    def ell_reduced(self) -> tuple:
        g = math.gcd(self.ell[0], self.ell[1])
        return (self.ell[0] // g, self.ell[1] // g)

    def label(self) -> str:
        d = ",".join(str(x) for x in self.D)
        c = ",".join(ch.label for ch in self.chars)
        return f"q={self.q};D=({d});t={self.t};l={self.ell};chars=({c})"
