"""
Eisenstein series coefficients
Half-integral weight series E_{k,N}, E'_{k,N} on levels 4 and 8 with their
V/U images spanning the level 16 Eisenstein space, and the level 2 forms
D2, E4, Delta2 in integral weight
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple

from sympy import Matrix, Rational, divisors, factorint

from .arith import bernoulli, gen_bernoulli, kronecker, moebius, quad_char, sigma, val2
from .cache_setup import memoized
from .qseries import (DELTA2_ETA, QQ, ZZ, TruncatedSeries, eta_series_cached, op_V,
                      series_mul, series_pow)


class EisensteinSpecError(ValueError):
    pass


class RankDeficiencyError(RuntimeError):
    pass


class PostOp(str, Enum):
    V2 = "V(2)"
    V4 = "V(4)"
    U2 = "U(2)"

    @property
    def is_dilation(self) -> bool:
        return self.value[0] == "V"

    @property
    def factor(self) -> int:
        return int(self.value[2])


# Post-operator chains allowed per (N, primed)
ALLOWED_POST_OPS = {
    (4, False): {(), (PostOp.V4,), (PostOp.U2, PostOp.V2)},
    (4, True): {(), (PostOp.V4,)},
    (8, False): {()},
    (8, True): {(), (PostOp.V2,)},
}


@dataclass(frozen=True)
class EisSpec:
    """One generator of the level 16 Eisenstein space: E_{k,N} or E'_{k,N} then post_ops"""
    k: int
    N: int
    primed: bool = False
    post_ops: Tuple[PostOp, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'post_ops', tuple(PostOp(op) for op in self.post_ops))
        _check_weight(self.k)
        if self.N not in (4, 8):
            raise EisensteinSpecError(f"level must be 4 or 8, got {self.N}")
        if self.primed and self.k == 3:
            raise EisensteinSpecError("E' is only defined for k > 3")
        if self.post_ops not in ALLOWED_POST_OPS[(self.N, self.primed)]:
            raise EisensteinSpecError(f"post operators {self.label} are not a level 16 generator")

    @property
    def lam(self) -> int:
        return (self.k - 1) // 2

    @property
    def label(self) -> str:
        prime = "'" if self.primed else ""
        return f"E{prime}_{{{self.k},{self.N}}}" +''.join(f"|{op.value}" for op in self.post_ops)


def _check_weight(k: int):
    if k < 3 or k % 2 == 0:
        raise EisensteinSpecError(f"k must be odd and >= 3, got {k}")


def c_pm(k: int, v: int, sign: int) -> Fraction:
    """c_k^+(v) for sign > 0, c_k^-(v) otherwise; v even"""
    if v < 0 or v % 2:
        raise EisensteinSpecError(f"c_pm needs an even v >= 0, got {v}")
    t = Fraction(2) ** ((2 - k) * v // 2)
    head = (1 - t) / (1 - Fraction(2) ** (2 - k))
    return head + t if sign > 0 else head - t


def big_C(k: int, n: int) -> Fraction:
    lam = (k - 1) // 2
    v = val2(n)
    n_odd = (-1) ** lam * n // 2 ** v
    if v % 2:
        return c_pm(k, v - 1, -1)
    if n_odd % 4 == 3:
        return c_pm(k, v, -1)
    extra = Fraction(2) ** (((2 - k) * v + (3 - k)) // 2) * kronecker(n_odd, 2)
    return c_pm(k, v, 1) + extra


def gamma_kN(k: int, N: int, n: int) -> Fraction:
    lam = (k - 1) // 2
    if N == 4:
        return big_C(k, n) if k > 3 else big_C(3, n) - 2
    if N != 8:
        raise EisensteinSpecError(f"level must be 4 or 8, got {N}")
    if ((-1) ** lam * n) % 4 in (2, 3):
        return Fraction(0)
    return big_C(k, n) - 1 if k > 3 else big_C(3, n) - 2


def _odd_square_root_part(n: int) -> int:
    # largest odd c with c^2 | n
    c = 1
    for p, e in factorint(n).items():
        if p != 2:
            c *= p ** (e // 2)
    return c


def beta(lam: int, omega, n: int) -> Fraction:
    """sum mu(a) omega(a) a^-lam b^(1-2lam) over odd a, b with (ab)^2 | n"""
    total = Fraction(0)
    for c in divisors(_odd_square_root_part(n)):
        for a in divisors(c):
            mu = moebius(a)
            if mu == 0:
                continue
            chi = omega(a)
            if chi:
                b = c // a
                total += Fraction(mu * chi, a ** lam * b ** (2 * lam - 1))
    return total


@lru_cache(maxsize=None)
def alpha(lam: int, m: int) -> Fraction:
    omega = quad_char(lam, m)
    f = omega.conductor
    two_factor = (1 - Fraction(omega(2), 2 ** lam)) / (1 - Fraction(1, 2 ** (2 * lam)))
    return (omega.sqrt_conductor_ratio() * gen_bernoulli(lam, omega)
            / (f ** lam * bernoulli(2 * lam)) * two_factor)


@lru_cache(maxsize=None)
def eis_coeff(k: int, N: int, primed: bool, n: int) -> Fraction:
    """a_{k,N}(n), or a'_{k,N}(n) when primed"""
    _check_weight(k)
    if N not in (4, 8):
        raise EisensteinSpecError(f"level must be 4 or 8, got {N}")
    if primed and k == 3:
        raise EisensteinSpecError("E' is only defined for k > 3")
    if n < 1:
        raise EisensteinSpecError(f"coefficient index must be >= 1, got {n}")
    lam = (k - 1) // 2
    if primed:
        # character of nN, argument n
        return alpha(lam, n * N) * beta(lam, quad_char(lam, n * N), n) * n ** lam
    gamma = gamma_kN(k, N, n)
    if gamma == 0:
        return Fraction(0)
    return alpha(lam, n) * beta(lam, quad_char(lam, n), n) * gamma * n ** lam


def eis_coefficient_getter(spec: EisSpec) -> Callable[[int], Fraction]:
    """Random access n -> coefficient of the generator, post operators included"""
    def coefficient(n: int) -> Fraction:
        for op in reversed(spec.post_ops):
            if op.is_dilation:
                if n % op.factor:
                    return Fraction(0)
                n //= op.factor
            else:
                n *= op.factor
        if n == 0:
            return Fraction(0 if spec.primed else 1)
        return eis_coeff(spec.k, spec.N, spec.primed, n)
    return coefficient


@memoized('eisenstein')
def eis_series(spec: EisSpec, trunc: int) -> TruncatedSeries:
    getter = eis_coefficient_getter(spec)
    return TruncatedSeries(QQ, [getter(n) for n in range(trunc)])


def eis_generators(k: int) -> List[EisSpec]:
    """Generators of the level 16 Eisenstein space of weight k/2"""
    _check_weight(k)
    if k == 3:
        return [EisSpec(3, 4), EisSpec(3, 4, post_ops=(PostOp.V4,)), EisSpec(3, 8),
                EisSpec(3, 4, post_ops=(PostOp.U2, PostOp.V2))]
    return [EisSpec(k, 4), EisSpec(k, 4, post_ops=(PostOp.V4,)),
            EisSpec(k, 4, primed=True), EisSpec(k, 4, primed=True, post_ops=(PostOp.V4,)),
            EisSpec(k, 8), EisSpec(k, 8, primed=True, post_ops=(PostOp.V2,))]


class EisensteinBasis(NamedTuple):
    specs: List[EisSpec]
    series: List[TruncatedSeries]
    witness: List[int]


def coefficient_rank(rows: Sequence[TruncatedSeries]) -> Tuple[int, List[int]]:
    """Exact rank of a coefficient matrix and its pivot columns"""
    matrix = Matrix([[Rational(c.numerator, c.denominator) for c in map(Fraction, row.tolist())]
                     for row in rows])
    _, pivots = matrix.rref()
    return len(pivots), list(pivots)


def eis_basis_16(k: int, trunc: int = 8) -> EisensteinBasis:
    specs = eis_generators(k)
    series = [eis_series(spec, trunc) for spec in specs]
    rank, pivots = coefficient_rank(series)
    if rank < len(series):
        raise RankDeficiencyError(
            f"level 16 generators for k={k} have rank {rank} < {len(series)} on {trunc} terms")
    return EisensteinBasis(specs, series, pivots)


def denominator_scale(k: int, N: int, primed: bool, sharp: bool = False) -> Fraction:
    """D with D * (coefficients of E_{k,N} or E'_{k,N}) integral"""
    _check_weight(k)
    lam = (k - 1) // 2
    if sharp:
        if primed:
            if N == 8:
                s = Fraction(1, 2 ** lam)
            elif lam == 2:
                s = Fraction(1, 2)
            elif lam % 2 == 0:
                s = Fraction(1, 2 ** (lam + 1))
            else:
                s = Fraction(1, 2 ** (lam - 1))
        else:
            s = Fraction(1, 2 ** (lam - 2)) if lam % 2 == 0 else Fraction(1, 2 ** (lam - 1))
    else:
        s = Fraction(2 ** (val2(lam) + 1)) if lam % 2 == 0 else Fraction(1)

    core = (2 ** (2 * lam) - 1) * bernoulli(2 * lam) * s
    if primed:
        return core * N ** lam / (lam * 2 ** lam)
    return 2 ** (lam - 1) * core / lam


# ---------------- level 2, integral weight ----------------

def integral_eisenstein(k: int, trunc: int) -> TruncatedSeries:
    """E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n"""
    if k < 2 or k % 2:
        raise EisensteinSpecError(f"integral weight must be even and >= 2, got {k}")
    c = -2 * k / bernoulli(k)
    ring = ZZ if c.denominator == 1 else QQ
    return TruncatedSeries(ring, [1] + [c * sigma(k - 1, n) for n in range(1, trunc)])


@memoized('level2')
def level2_D2(trunc: int) -> TruncatedSeries:
    e2 = integral_eisenstein(2, trunc)
    return op_V(2, e2, trunc) * 2 - e2


@memoized('level2')
def level2_E4(trunc: int) -> TruncatedSeries:
    return integral_eisenstein(4, trunc)


def level2_Delta2(trunc: int) -> TruncatedSeries:
    return eta_series_cached(DELTA2_ETA, trunc, ZZ)


@memoized('level2')
def _level2_power(name: str, e: int, trunc: int) -> TruncatedSeries:
    base = level2_D2(trunc) if name == 'D2' else level2_E4(trunc)
    return series_pow(base, e)


def level2_monomials(weight: int) -> List[Tuple[int, int]]:
    """Exponents (a, b) with 2a + 4b = weight"""
    return [((weight - 4 * b) // 2, b) for b in range(weight // 4 + 1)] if weight % 2 == 0 else []


def monomial_basis_form(terms: Sequence[Tuple[int, int, int]], trunc: int) -> TruncatedSeries:
    """sum coeff * D2^a * E4^b over (a, b, coeff); all terms of one weight"""
    weights = {2 * a + 4 * b for a, b, _ in terms}
    if len(weights) > 1:
        raise EisensteinSpecError(f"mixed weights {sorted(weights)} in {list(terms)}")
    total = TruncatedSeries(ZZ, [0] * trunc)
    for a, b, coeff in terms:
        if a < 0 or b < 0:
            raise EisensteinSpecError(f"negative exponent in monomial ({a}, {b})")
        term = series_mul(_level2_power('D2', a, trunc), _level2_power('E4', b, trunc))
        total = total + term * coeff
    return total


def monomial_weight(terms: Sequence[Tuple[int, int, int]]) -> int:
    weights = {2 * a + 4 * b for a, b, _ in terms}
    if len(weights) != 1:
        raise EisensteinSpecError(f"expected one weight, found {sorted(weights)}")
    return weights.pop()


# Forms of weight k + 8 vanishing at infinity but not at the cusp 0
G0_FORMS: Dict[int, Tuple[Tuple[int, int, int], ...]] = {
    0: ((4, 0, 1), (0, 2, -1)),
    2: ((5, 0, 1), (1, 2, -1)),
    4: ((6, 0, 1), (0, 3, -1)),
    6: ((7, 0, 1), (1, 3, -1)),
}


def g0_form(k: int, trunc: int) -> TruncatedSeries:
    if k not in G0_FORMS:
        raise EisensteinSpecError(f"g0 forms exist for k in {sorted(G0_FORMS)}, got {k}")
    return monomial_basis_form(G0_FORMS[k], trunc)
