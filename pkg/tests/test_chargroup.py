import math
from fractions import Fraction

import numpy as np
import pytest

from lfour.chargroup import (
    DirichletCharacter, Quadruple, character_table, convolve, crt_factor,
    enumerate_even_primitive, epsilon_factor, euler_phi,
    even_primitive_characters, gauss_sum, hybrid_kloosterman, is_prime,
    kloosterman, mult_k_residual, primes_upto, principal_character,
    product_character, ramanujan_sum, trivial_character, unit_group,
    convolution_sieve, convolve_prime_power,
)
from lfour.errors import UsageError

RNG = np.random.default_rng(20240901)


def quadratic_char(m):
    """The real nonprincipal character mod a prime m."""
    for c in character_table(m):
        if c.order() == 2:
            return c
    raise AssertionError


class TestUnitGroup:
    def test_structure_small(self):
        for m in range(1, 200):
            g = unit_group(m)
            assert math.prod(g.orders) == euler_phi(m)

    def test_dlog_roundtrip(self):
        # generators generate: every unit has a unique exponent vector
        for m in [7, 8, 9, 15, 16, 24, 45, 105, 360]:
            g = unit_group(m)
            seen = set()
            for a in range(1, m):
                if math.gcd(a, m) == 1:
                    seen.add(g.dlog(a))
            assert len(seen) == euler_phi(m)

    def test_generators_exhaustive_small(self):
        # brute-force: products of generator powers hit every unit
        for m in range(2, 150):
            g = unit_group(m)
            reached = {1 % m}
            frontier = [1 % m]
            for gen, o in zip(g.generators, g.orders):
                reached = {x * pow(gen, k, m) % m
                           for x in reached for k in range(o)}
            assert len(reached) == euler_phi(m)


class TestCharacterTable:
    def test_m1(self):
        chars = character_table(1)
        assert len(chars) == 1
        c = chars[0]
        assert c.is_even() and c.is_primitive() and c.conductor() == 1
        assert c(17) == 1

    def test_m5(self):
        chars = character_table(5)
        assert len(chars) == 4
        evens = [c for c in chars if c.is_even()]
        assert len(evens) == 2  # principal + quadratic
        even_prim = [c for c in evens if c.is_primitive()]
        assert len(even_prim) == 1
        assert even_prim[0].order() == 2

    def test_m7(self):
        chars = character_table(7)
        assert len(chars) == 6
        ep = even_primitive_characters(7)
        assert len(ep) == 2
        assert all(c.order() == 3 for c in ep)

    def test_counts_match_phi(self):
        for m in range(1, 120):
            assert len(character_table(m)) == euler_phi(m)
            assert len({c.exponents for c in character_table(m)}) == euler_phi(m)

    def test_zero_modulus_rejected(self):
        with pytest.raises(UsageError):
            character_table(0)


class TestEvalChar:
    def test_principal_mod5_at_unit(self):
        assert principal_character(5)(7) == 1

    def test_quadratic_mod5(self):
        chi = quadratic_char(5)
        # quadratic residues mod 5 are {1, 4}
        assert chi(2) == pytest.approx(-1)
        assert chi(4) == pytest.approx(1)

    def test_vanishes_off_units(self):
        for c in character_table(5):
            assert c(10) == 0

    def test_complete_multiplicativity(self):
        for m in [5, 7, 12, 45]:
            for chi in character_table(m):
                a = RNG.integers(1, 10 ** 6, size=1000)
                b = RNG.integers(1, 10 ** 6, size=1000)
                for x, y in zip(a.tolist(), b.tolist()):
                    assert chi(x * y) == pytest.approx(chi(x) * chi(y), abs=1e-12)

    def test_values_are_roots_of_unity(self):
        for chi in character_table(13):
            o = chi.order()
            for n in range(1, 13):
                assert abs(chi(n) ** o - 1) < 1e-10


class TestGaussSum:
    def test_trivial(self):
        assert gauss_sum(trivial_character()) == pytest.approx(1)

    def test_quadratic_mod5(self):
        tau = gauss_sum(quadratic_char(5))
        assert tau == pytest.approx(math.sqrt(5), abs=1e-12)

    def test_principal_mod6_is_mu6(self):
        tau = gauss_sum(principal_character(6))
        assert tau == pytest.approx(1.0, abs=1e-12)  # mu(6) = 1 = c_6(1)

    def test_modulus_sqrt_m_primitive(self):
        for m in range(3, 60):
            for chi in character_table(m):
                if chi.is_primitive():
                    assert abs(abs(gauss_sum(chi)) - math.sqrt(m)) < 1e-10

    def test_epsilon_unit_modulus(self):
        for chi in even_primitive_characters(13):
            assert abs(abs(epsilon_factor(chi)) - 1) < 1e-12


class TestCrtFactor:
    def test_mod15_recombination(self):
        for chi in character_table(15):
            c1, c2 = crt_factor(chi, 3, 5)
            for n in range(1, 16):
                assert chi(n) == pytest.approx(c1(n) * c2(n), abs=1e-12)

    def test_trivial_second_factor(self):
        chi = quadratic_char(5)
        c1, c2 = crt_factor(chi, 5, 1)
        assert c1 == chi and c2.modulus == 1

    def test_principal_mod6(self):
        c1, c2 = crt_factor(principal_character(6), 2, 3)
        assert c1.is_principal() and c2.is_principal()

    def test_random_splits_exact(self):
        # exactness via the rational angles, not floats
        pool = [(m1, m2) for m1 in range(2, 30) for m2 in range(2, 30)
                if math.gcd(m1, m2) == 1]
        idx = RNG.choice(len(pool), size=50, replace=True)
        for k in idx.tolist():
            m1, m2 = pool[k]
            table = character_table(m1 * m2)
            chi = table[RNG.integers(0, len(table))]
            c1, c2 = crt_factor(chi, m1, m2)
            for n in range(1, m1 * m2 + 1):
                a = chi.angle(n)
                if a is None:
                    assert c1.angle(n) is None or c2.angle(n) is None
                else:
                    assert (c1.angle(n) + c2.angle(n)) % 1 == a

    def test_non_coprime_split_rejected(self):
        with pytest.raises(UsageError):
            crt_factor(principal_character(12), 4, 3 * 0 + 4)


class TestConvolve:
    def test_n1(self):
        t = trivial_character()
        assert convolve(t, t, 1) == pytest.approx(1)

    def test_divisor_count(self):
        t = trivial_character()
        assert convolve(t, t, 12) == pytest.approx(6)

    def test_quadratic_example(self):
        chi = quadratic_char(5)
        # 1 + chi(2) + chi(4) = 1 - 1 + 1
        assert convolve(trivial_character(), chi, 4) == pytest.approx(1)

    def test_multiplicative(self):
        a, b = quadratic_char(5), character_table(7)[2]
        for (m, n) in [(4, 9), (3, 8), (25, 11)]:
            assert convolve(a, b, m * n) == pytest.approx(
                convolve(a, b, m) * convolve(a, b, n), abs=1e-12)

    def test_sieve_matches_pointwise(self):
        a, b = quadratic_char(5), character_table(7)[1]
        arr = convolution_sieve(a, b, 500)
        for n in range(1, 501):
            assert arr[n] == pytest.approx(convolve(a, b, n), abs=1e-11)

    def test_prime_power_helper(self):
        a, b = quadratic_char(5), character_table(7)[1]
        for p in [2, 3, 5, 7, 11]:
            for k in range(5):
                assert convolve_prime_power(a, b, p, k) == pytest.approx(
                    convolve(a, b, p ** k), abs=1e-12)


class TestKloosterman:
    def test_s115(self):
        val = kloosterman(1, 1, 5)
        assert val == pytest.approx(2 + 2 * math.cos(4 * math.pi / 5), abs=1e-12)
        assert abs(val.imag) < 1e-12

    def test_ramanujan_full(self):
        assert ramanujan_sum(7, 7) == pytest.approx(6)

    def test_principal_weight_reduces(self):
        chi0 = principal_character(12)
        for (m, n) in [(1, 1), (2, 5), (0, 3)]:
            assert hybrid_kloosterman(chi0, m, n, 12) == pytest.approx(
                kloosterman(m, n, 12), abs=1e-12)

    def test_real_valued(self):
        for (m, n, c) in [(1, 2, 7), (3, 4, 12), (5, 5, 9)]:
            assert abs(kloosterman(m, n, c).imag) < 1e-12

    def test_weil_bound(self):
        for _ in range(60):
            c = int(RNG.integers(2, 2000))
            m = int(RNG.integers(0, 10 ** 6))
            n = int(RNG.integers(1, 10 ** 6))
            d = len([1 for k in range(1, c + 1) if c % k == 0])
            bound = d * math.sqrt(math.gcd(m, math.gcd(n, c)) * c)
            assert abs(kloosterman(m, n, c)) <= bound + 1e-9

    def test_modulus_must_divide(self):
        with pytest.raises(UsageError):
            hybrid_kloosterman(quadratic_char(5), 1, 1, 12)


class TestMultK:
    def test_principal_3_5(self):
        assert mult_k_residual(principal_character(3),
                               principal_character(5), 1, 1) < 1e-9

    def test_d_equal_one(self):
        chi = quadratic_char(5)
        assert mult_k_residual(chi, trivial_character(), 2, 3) == pytest.approx(0, abs=1e-13)

    def test_quad5_cubic7(self):
        phi2 = [c for c in character_table(7) if c.order() == 3][0]
        assert mult_k_residual(quadratic_char(5), phi2, 2, 3) < 1e-9

    def test_random_configs(self):
        moduli = [3, 4, 5, 7, 8, 9, 11, 13]
        count = 0
        while count < 50:
            c, d = RNG.choice(moduli, size=2)
            if math.gcd(int(c), int(d)) != 1:
                continue
            tc, td = character_table(int(c)), character_table(int(d))
            phi1 = tc[RNG.integers(0, len(tc))]
            phi2 = td[RNG.integers(0, len(td))]
            a, b = int(RNG.integers(1, 100)), int(RNG.integers(1, 100))
            assert mult_k_residual(phi1, phi2, a, b) < 1e-9
            count += 1

    def test_non_coprime_rejected(self):
        with pytest.raises(UsageError):
            mult_k_residual(quadratic_char(5), principal_character(10), 1, 1)


class TestOrthogonality:
    """Sum over even primitive chi of chi(m)conj(chi)(n), exactly.

    For prime q the even characters chi_k (k even mod q-1) give
    sum_k chi_k(m) conj(chi_k(n)) = q' * [q' | d] with q' = (q-1)/2 and
    d = ind(m) - ind(n); the identity below is checked in exact integer
    index arithmetic plus a float enumeration as sanity.
    """

    def test_exact_identity_all_primes_to_101(self):
        for q in [5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59,
                  61, 67, 71, 73, 79, 83, 89, 97, 101]:
            g = unit_group(q)
            qp = (q - 1) // 2
            ind = {}
            gen = g.generators[0]
            x = 1
            for k in range(q - 1):
                ind[x] = k
                x = x * gen % q
            for m in range(1, q):
                for n in range(1, q):
                    d = (ind[m] - ind[n]) % (q - 1)
                    # multiset {k*d mod q-1 : k even nonzero}; its sum of
                    # roots of unity is qp*[qp | d] - 1 by subgroup sweep
                    residues = [(k * d) % (q - 1) for k in range(0, q - 1, 2)]
                    target = qp if d % qp == 0 else 0
                    if target == 0:
                        # the residues sweep a nontrivial subgroup uniformly
                        sub = sorted(set(residues))
                        counts = {r: residues.count(r) for r in sub}
                        assert len(set(counts.values())) == 1
                        assert len(sub) > 1
                        step = sub[1] - sub[0]
                        assert sub == list(range(0, q - 1, step))
                    rhs = (qp if (m % q == n % q or (m + n) % q == 0) else 0) - 1
                    assert target - 1 == rhs

    def test_float_enumeration_matches(self):
        for q in [5, 13, 31]:
            chars = enumerate_even_primitive(q)
            for m in range(1, q):
                for n in range(1, q):
                    s = sum(c(m) * np.conj(c(n)) for c in chars)
                    rhs = (euler_phi(q) / 2 if (m == n or (m + n) % q == 0)
                           else 0) - 1
                    assert abs(s - rhs) < 1e-9

    def test_phi_plus_counts(self):
        for q in primes_upto(101).tolist():
            if q <= 3:
                continue
            count = len([c for c in character_table(q)
                         if c.is_even() and c.is_primitive()])
            assert count == euler_phi(q) // 2 - 1


class TestQuadruple:
    def _chars(self):
        chi2 = quadratic_char(5)
        chi3 = [c for c in character_table(7) if c.order() == 3][0]
        t = trivial_character()
        return t, chi2, chi3

    def test_valid(self):
        t, chi2, chi3 = self._chars()
        Q = Quadruple(q=11, D=(1, 5, 7, 1), chars=(t, chi2, chi3, t), t=0.5)
        assert Q.qhat == pytest.approx(11 * 35 ** 0.25 / math.pi)
        assert Q.ell_reduced == (1, 1)

    def test_rejects_bad(self):
        t, chi2, chi3 = self._chars()
        with pytest.raises(UsageError):
            Quadruple(q=10, D=(1, 5, 7, 1), chars=(t, chi2, chi3, t))
        with pytest.raises(UsageError):
            Quadruple(q=5, D=(1, 5, 7, 1), chars=(t, chi2, chi3, t))
        with pytest.raises(UsageError):  # odd character
            odd = character_table(5)[1]
            Quadruple(q=11, D=(1, 5, 7, 1), chars=(t, odd, chi3, t))
        with pytest.raises(UsageError):  # twists not coprime to q
            Quadruple(q=11, D=(1, 5, 7, 1), chars=(t, chi2, chi3, t),
                      ell=(11, 1))

    def test_even_primitive_enumeration(self):
        assert len(enumerate_even_primitive(7)) == 2
        assert len(enumerate_even_primitive(5)) == 1
        assert len(enumerate_even_primitive(13)) == 5
        with pytest.raises(UsageError):
            enumerate_even_primitive(3)


class TestProductCharacter:
    def test_pointwise(self):
        a = quadratic_char(5)
        b = [c for c in character_table(7) if c.order() == 3][0]
        ab = product_character(a, b)
        assert ab.modulus == 35
        for n in range(1, 36):
            assert ab(n) == pytest.approx(a(n) * b(n), abs=1e-12)

    def test_primitive_product(self):
        a = quadratic_char(5)
        b = [c for c in character_table(7) if c.order() == 3][0]
        assert product_character(a, b).is_primitive()


def test_is_prime():
    assert [p for p in range(60) if is_prime(p)] == \
        [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
