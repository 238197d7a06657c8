"""
Exact number-theory primitives
Kronecker symbols, Moebius, divisor sums, Bernoulli numbers and polynomials,
quadratic characters and generalized Bernoulli numbers
"""

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, isqrt
from typing import List

from sympy import divisors, factorint

# Kronecker (a/2) by a mod 8
_KRONECKER_TWO = (0, 1, 0, -1, 0, -1, 0, 1)


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n), fully extended to even, negative and zero n"""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    if a % 2 == 0 and n % 2 == 0:
        return 0

    result = 1
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v % 2 == 1:
        result = _KRONECKER_TWO[a & 7]

    if n < 0:
        n = -n
        if a < 0:
            result = -result

    # Jacobi symbol for odd positive n
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def moebius(n: int) -> int:
    """Moebius function by squarefree factor count"""
    if n < 1:
        raise ValueError(f"moebius needs n >= 1, got {n}")
    exponents = factorint(n).values()
    if any(e > 1 for e in exponents):
        return 0
    return -1 if len(exponents) % 2 else 1


def sigma(k: int, n: int, modulus: int = None) -> int:
    """Divisor power sum sum_{d|n} d^k, optionally reduced mod modulus"""
    if n < 1:
        raise ValueError(f"sigma needs n >= 1, got {n}")
    if modulus is None:
        return sum(d ** k for d in divisors(n))
    return sum(pow(d, k, modulus) for d in divisors(n)) % modulus


def val2(n: int) -> int:
    """2-adic valuation of a nonzero integer"""
    return (n & -n).bit_length() - 1


# Bernoulli table, B_1 = -1/2; grows on demand
_bernoulli_table: List[Fraction] = [Fraction(1)]
_bernoulli_lock = threading.Lock()


def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n with B_1 = -1/2"""
    if n < 0:
        raise ValueError(f"bernoulli needs n >= 0, got {n}")
    if n < len(_bernoulli_table):
        return _bernoulli_table[n]

    with _bernoulli_lock:
        # sum_{j=0}^{i} C(i+1, j) B_j = 0
        for i in range(len(_bernoulli_table), n + 1):
            total = sum(comb(i + 1, j) * _bernoulli_table[j] for j in range(i))
            _bernoulli_table.append(-total / (i + 1))
    return _bernoulli_table[n]


def bernoulli_poly(lam: int, x: Fraction) -> Fraction:
    """Bernoulli polynomial B_lam(x) = sum_i C(lam, i) B_i x^(lam - i)"""
    if lam < 1:
        raise ValueError(f"bernoulli_poly needs lam >= 1, got {lam}")
    x = Fraction(x)
    return sum(comb(lam, i) * bernoulli(i) * x ** (lam - i) for i in range(lam + 1))


@dataclass(frozen=True)
class QuadCharacter:
    """Primitive quadratic character attached to (-1)^lambda * m"""
    lambda_parity: int
    m: int
    conductor: int
    fundamental_discriminant: int

    def __call__(self, a: int) -> int:
        return kronecker(self.fundamental_discriminant, a)

    @property
    def is_trivial(self) -> bool:
        return self.conductor == 1

    def sqrt_conductor_ratio(self) -> Fraction:
        """Exact rational square root of f_m / m"""
        ratio = Fraction(self.conductor, self.m)
        num = _exact_isqrt(ratio.numerator)
        den = _exact_isqrt(ratio.denominator)
        return Fraction(num, den)


def _exact_isqrt(n: int) -> int:
    root = isqrt(n)
    if root * root != n:
        raise ArithmeticError(f"{n} is not a perfect square")
    return root


def squarefree_core(n: int) -> int:
    """Signed squarefree part of a nonzero integer"""
    if n == 0:
        raise ValueError("squarefree core of 0 is undefined")
    core = 1
    for p, e in factorint(abs(n)).items():
        if e % 2:
            core *= p
    return core if n > 0 else -core


def quad_char(lambda_parity: int, m: int) -> QuadCharacter:
    """Primitive character omega_m(a) = ((-1)^lambda m / a)"""
    if m < 1:
        raise ValueError(f"quad_char needs m >= 1, got {m}")
    d0 = squarefree_core(-m if lambda_parity % 2 else m)
    d = d0 if d0 % 4 == 1 else 4 * d0
    return QuadCharacter(lambda_parity % 2, m, abs(d), d)


@lru_cache(maxsize=None)
def _character_values(d: int) -> tuple:
    return tuple(kronecker(d, a) for a in range(1, abs(d) + 1))


@lru_cache(maxsize=None)
def _character_power_sum(d: int, j: int) -> int:
    # sum_{a=1}^{f} chi_d(a) a^j
    return sum(chi * a ** j for a, chi in enumerate(_character_values(d), start=1) if chi)


@lru_cache(maxsize=None)
def _gen_bernoulli(lam: int, d: int) -> Fraction:
    f = abs(d)
    if f == 1:
        return bernoulli_poly(lam, Fraction(1))
    # f^(lam-1) sum_a chi(a) B_lam(a/f), expanded into integer power sums
    total = Fraction(0)
    for i in range(lam + 1):
        b = bernoulli(i)
        if b:
            total += comb(lam, i) * b * Fraction(f) ** (i - 1) * _character_power_sum(d, lam - i)
    return total


def gen_bernoulli(lam: int, omega: QuadCharacter) -> Fraction:
    """Generalized Bernoulli number B_{lam, omega}"""
    if lam < 1:
        raise ValueError(f"gen_bernoulli needs lam >= 1, got {lam}")
    return _gen_bernoulli(lam, omega.fundamental_discriminant)
