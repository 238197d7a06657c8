"""
Hecke operators and Sturm bounds
T(l^2) on half-integral weight q-expansions with trivial character,
T(m) on integral weight level 2 expansions, and mod m eigenform tests
"""

from dataclasses import dataclass
from typing import Callable, List, Optional

from sympy import factorint, isprime

from .arith import kronecker
from .qseries import RingKind, TruncatedSeries, op_U, op_V


class HeckePreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class HeckeContext:
    """Weight k/2 (k odd), level divisible by 4, trivial character"""
    k: int
    level: int = 16

    def __post_init__(self):
        if self.k < 3 or self.k % 2 == 0:
            raise HeckePreconditionError(f"k must be odd and >= 3, got {self.k}")
        if self.level < 4 or self.level % 4:
            raise HeckePreconditionError(f"level must be a multiple of 4, got {self.level}")

    @property
    def lam(self) -> int:
        return (self.k - 1) // 2


@dataclass(frozen=True)
class SturmQuery:
    """Weight k_numerator/2 at the given level; integral weight w uses k_numerator = 2w"""
    k_numerator: int
    level: int

    def __post_init__(self):
        if self.level < 1:
            raise ValueError(f"level must be >= 1, got {self.level}")
        if self.k_numerator < 1:
            raise ValueError(f"weight numerator must be >= 1, got {self.k_numerator}")


def index_gamma0(N: int) -> int:
    """[SL2(Z) : Gamma_0(N)] = N prod_{p | N} (1 + 1/p)"""
    if N < 1:
        raise ValueError(f"level must be >= 1, got {N}")
    index = 1
    for p, e in factorint(N).items():
        index *= p ** (e - 1) * (p + 1)
    return index


def sturm_bound(query: SturmQuery) -> int:
    return query.k_numerator * index_gamma0(query.level) // 24


def _check_odd_prime(ell: int):
    if ell == 2:
        raise HeckePreconditionError("T(l^2) is only used for odd l; l = 2 divides the level")
    if not isprime(ell):
        raise HeckePreconditionError(f"l must be an odd prime, got {ell}")


def hecke_coefficients(ctx: HeckeContext, ell: int, getter: Callable[[int], object],
                       bound: int, modulus: Optional[int] = None) -> List:
    """
    Coefficients 0..bound of g|T(l^2) from random access to g:
    a(l^2 n) + l^(lam-1) ((-1)^lam n / l) a(n) + l^(2lam-1) a(n / l^2)
    """
    _check_odd_prime(ell)
    lam = ctx.lam
    sign = -1 if lam % 2 else 1
    square = ell * ell
    if modulus is None:
        middle, last = ell ** (lam - 1), ell ** (2 * lam - 1)
    else:
        middle, last = pow(ell, lam - 1, modulus), pow(ell, 2 * lam - 1, modulus)

    values = []
    for n in range(bound + 1):
        value = getter(square * n)
        chi = kronecker(sign * n, ell)
        if chi:
            value += chi * middle * getter(n)
        if n % square == 0:
            value += last * getter(n // square)
        if modulus is not None:
            value %= modulus
        values.append(value)
    return values


def hecke_half_integral(ctx: HeckeContext, ell: int, a: TruncatedSeries) -> TruncatedSeries:
    """T(l^2) applied to a q-expansion; output known for n <= (T-1)/l^2"""
    _check_odd_prime(ell)
    square = ell * ell
    if a.trunc < square:
        raise HeckePreconditionError(f"trunc {a.trunc} is below l^2 = {square}")
    bound = (a.trunc - 1) // square
    return TruncatedSeries(a.ring, hecke_coefficients(ctx, ell, a.__getitem__, bound, a.ring.modulus))


def hecke_integral_Tm(m: int, k: int, a: TruncatedSeries) -> TruncatedSeries:
    """T(m) = U(m) + m^(k-1) V(m) on a level 2 expansion, m an odd prime"""
    if m == 2 or not isprime(m):
        raise HeckePreconditionError(f"T(m) needs an odd prime m, got {m}")
    if k % 2:
        raise HeckePreconditionError(f"integral weight must be even, got {k}")
    out_trunc = -(-a.trunc // m)
    return op_U(m, a) + op_V(m, a, out_trunc) * (m ** (k - 1))


def is_eigenform_mod(a: TruncatedSeries, ctx: HeckeContext, ell: int, bound: int,
                     start: int = 0) -> Optional[int]:
    """
    Residue lam with (a|T(l^2))(n) = lam a(n) mod m for start <= n <= bound,
    or None when no single residue works (or a vanishes on that range).
    T(l^2) scales the constant term by 1 + l^(k-2) whatever the cusp part does;
    start = 1 skips it.
    """
    if a.ring.kind != RingKind.MODULAR:
        raise HeckePreconditionError(f"eigenform test needs a mod m series, got {a.ring}")
    _check_odd_prime(ell)
    if not 0 <= start <= bound:
        raise HeckePreconditionError(f"start must lie in [0, {bound}], got {start}")
    needed = ell * ell * bound + 1
    if a.trunc < needed:
        raise HeckePreconditionError(f"trunc {a.trunc} < l^2 * bound + 1 = {needed}")

    m = a.ring.modulus
    images = hecke_coefficients(ctx, ell, a.__getitem__, bound, m)[start:]
    values = [a[n] for n in range(start, bound + 1)]
    lead = next((i for i, v in enumerate(values) if v), None)
    if lead is None:
        return None
    eigenvalue = images[lead] * a.ring.inverse(values[lead]) % m
    if all((image - eigenvalue * value) % m == 0 for image, value in zip(images, values)):
        return eigenvalue
    return None
