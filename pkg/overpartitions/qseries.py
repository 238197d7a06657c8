"""
Truncated q-series arithmetic
Exact-rational, exact-integer and mod-m coefficient rings; U/V operators;
eta-quotient expansion, metadata and cusp orders; the overpartition engine
"""

import sys
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd, lcm
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import divisors, totient

from .arith import squarefree_core
from .cache_setup import memoized

# Residues below this bound live in int64 arrays; products of two residues
# summed over a block stay far below 2^63
SMALL_MODULUS_LIMIT = 1 << 20

# Block sizes of the triangular solver, largest first
BLOCK_LEVELS = (16384, 1024, 64)

# Multiplications switch to numpy convolution above this many nonzeros,
# as long as the quadratic convolution beats one shifted add per nonzero
SPARSE_CUTOFF = 48


class RingMismatchError(ValueError):
    pass


class NonUnitError(ValueError):
    pass


class EtaQuotientError(ValueError):
    pass


class ResourceCapError(RuntimeError):
    pass


class RingKind(str, Enum):
    RATIONAL = "QQ"
    INTEGER = "ZZ"
    MODULAR = "Z/m"


@dataclass(frozen=True)
class Ring:
    kind: RingKind
    modulus: Optional[int] = None

    def __post_init__(self):
        if (self.kind == RingKind.MODULAR) != (self.modulus is not None):
            raise ValueError("a modulus is required exactly for the modular ring")
        if self.modulus is not None and self.modulus < 2:
            raise ValueError(f"modulus must be >= 2, got {self.modulus}")

    @property
    def is_exact(self) -> bool:
        return self.kind != RingKind.MODULAR

    @property
    def dtype(self):
        if self.kind == RingKind.MODULAR and self.modulus < SMALL_MODULUS_LIMIT:
            return np.int64
        return object

    def element(self, value):
        """Coerce a scalar into the ring"""
        if self.kind == RingKind.RATIONAL:
            return Fraction(value)
        if self.kind == RingKind.INTEGER:
            value = Fraction(value)
            if value.denominator != 1:
                raise RingMismatchError(f"{value} is not an integer")
            return int(value)
        value = Fraction(value)
        if value.denominator % self.modulus == 0:
            raise RingMismatchError(f"{value} has no residue mod {self.modulus}")
        return value.numerator * pow(value.denominator, -1, self.modulus) % self.modulus

    def is_unit(self, value) -> bool:
        if self.kind == RingKind.RATIONAL:
            return value != 0
        if self.kind == RingKind.INTEGER:
            return value in (1, -1)
        return gcd(int(value), self.modulus) == 1

    def inverse(self, value):
        if not self.is_unit(value):
            raise NonUnitError(f"{value} is not a unit in {self}")
        if self.kind == RingKind.RATIONAL:
            return 1 / Fraction(value)
        if self.kind == RingKind.INTEGER:
            return int(value)
        return pow(int(value), -1, self.modulus)

    def signed(self, value):
        """Smallest-magnitude representative (used to keep solver terms small)"""
        if self.kind != RingKind.MODULAR:
            return value
        value = int(value) % self.modulus
        return value - self.modulus if value > self.modulus // 2 else value

    def __str__(self):
        return f"Z/{self.modulus}" if self.kind == RingKind.MODULAR else self.kind.value


QQ = Ring(RingKind.RATIONAL)
ZZ = Ring(RingKind.INTEGER)


def Zmod(m: int) -> Ring:
    return Ring(RingKind.MODULAR, m)


def _normalize(values, ring: Ring) -> np.ndarray:
    if ring.kind == RingKind.MODULAR:
        if ring.dtype is object:
            arr = np.array([int(v) % ring.modulus for v in values], dtype=object)
        else:
            arr = np.asarray(values)
            if arr.dtype == object:
                arr = np.array([int(v) % ring.modulus for v in arr], dtype=np.int64)
            else:
                arr = np.mod(arr.astype(np.int64), ring.modulus)
        return arr
    return np.array([ring.element(v) for v in values], dtype=object).reshape(-1)


class TruncatedSeries:
    """q-expansion known for exponents 0..trunc-1; immutable"""

    __slots__ = ('ring', 'coeffs')

    def __init__(self, ring: Ring, coeffs, normalized: bool = False):
        arr = coeffs if normalized else _normalize(coeffs, ring)
        if len(arr) < 1:
            raise ValueError("a truncated series needs trunc >= 1")
        arr.flags.writeable = False
        self.ring = ring
        self.coeffs = arr

    @classmethod
    def _wrap(cls, ring: Ring, arr: np.ndarray) -> 'TruncatedSeries':
        if ring.kind == RingKind.MODULAR:
            arr = arr % ring.modulus
        return cls(ring, arr, normalized=True)

    @classmethod
    def one(cls, ring: Ring, trunc: int) -> 'TruncatedSeries':
        arr = np.zeros(trunc, dtype=ring.dtype)
        arr[0] = ring.element(1)
        return cls(ring, arr, normalized=True)

    @classmethod
    def from_terms(cls, terms: Dict[int, object], trunc: int, ring: Ring) -> 'TruncatedSeries':
        values = [0] * trunc
        for exponent, value in terms.items():
            if 0 <= exponent < trunc:
                values[exponent] = value
        return cls(ring, values)

    @property
    def trunc(self) -> int:
        return len(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, n: int):
        value = self.coeffs[n]
        return int(value) if self.ring.dtype is not object else value

    def tolist(self) -> list:
        if self.ring.dtype is object:
            return list(self.coeffs)
        return [int(v) for v in self.coeffs]

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.coeffs)

    def valuation(self) -> Optional[int]:
        nz = self.support()
        return int(nz[0]) if len(nz) else None

    def truncate(self, trunc: int) -> 'TruncatedSeries':
        if trunc >= self.trunc:
            return self
        return TruncatedSeries(self.ring, self.coeffs[:trunc].copy(), normalized=True)

    def shift(self, s: int) -> 'TruncatedSeries':
        """Multiply by q^s keeping the truncation"""
        arr = np.zeros(self.trunc, dtype=self.ring.dtype)
        if s < self.trunc:
            arr[s:] = self.coeffs[:self.trunc - s]
        return TruncatedSeries(self.ring, arr, normalized=True)

    def scale(self, c) -> 'TruncatedSeries':
        c = self.ring.element(c)
        return TruncatedSeries._wrap(self.ring, self.coeffs * c)

    def __add__(self, other):
        return series_add(self, other)

    def __sub__(self, other):
        return series_add(self, series_neg(other))

    def __neg__(self):
        return series_neg(self)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        return series_pow(self, e)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.ring == other.ring and self.trunc == other.trunc
                and bool(np.all(self.coeffs == other.coeffs)))

    def __hash__(self):
        return hash((self.ring, tuple(self.tolist())))

    def __repr__(self):
        shown = self.tolist()[:8]
        terms = ' + '.join(f"{c}q^{n}" for n, c in enumerate(shown) if c)
        return f"<TruncatedSeries over {self.ring}: {terms or '0'} + O(q^{self.trunc})>"


def _check_rings(a: TruncatedSeries, b: TruncatedSeries):
    if a.ring != b.ring:
        raise RingMismatchError(f"ring mismatch: {a.ring} vs {b.ring}")


def series_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    _check_rings(a, b)
    trunc = min(a.trunc, b.trunc)
    return TruncatedSeries._wrap(a.ring, a.coeffs[:trunc] + b.coeffs[:trunc])


def series_neg(a: TruncatedSeries) -> TruncatedSeries:
    return TruncatedSeries._wrap(a.ring, -a.coeffs)


def _multiply_arrays(a: np.ndarray, b: np.ndarray, trunc: int, ring: Ring) -> np.ndarray:
    a = a[:trunc]
    b = b[:trunc]
    nz_a = np.flatnonzero(a)
    nz_b = np.flatnonzero(b)
    if len(nz_a) > len(nz_b):
        a, b, nz_a, nz_b = b, a, nz_b, nz_a

    modulus = ring.modulus
    if (len(nz_a) > SPARSE_CUTOFF and trunc * trunc < len(nz_a) * (2 * trunc + 4096)
            and ring.dtype is not object
            and modulus * modulus * trunc < (1 << 62)):
        return np.convolve(a, b)[:trunc] % modulus

    # shift-and-add over the sparser operand: O(trunc * support)
    out = np.zeros(trunc, dtype=ring.dtype)
    for count, i in enumerate(nz_a, start=1):
        out[i:] += a[i] * b[:trunc - i]
        if modulus is not None and ring.dtype is not object and count % 4096 == 0:
            out %= modulus
    return out


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated to min(T_a, T_b)"""
    _check_rings(a, b)
    trunc = min(a.trunc, b.trunc)
    return TruncatedSeries._wrap(a.ring, _multiply_arrays(a.coeffs, b.coeffs, trunc, a.ring))


def series_pow(a: TruncatedSeries, e: int) -> TruncatedSeries:
    if e < 0:
        return series_pow(series_inv(a), -e)
    result = TruncatedSeries.one(a.ring, a.trunc)
    base = a
    while e:
        if e & 1:
            result = series_mul(result, base)
        e >>= 1
        if e:
            base = series_mul(base, base)
    return result


def _solve_scalar(x, acc, near, lo, hi, modulus):
    reach = near[-1][0] if near else 0
    base = max(0, lo - reach)
    window = x[base:lo].tolist()
    targets = acc[lo:hi].tolist()
    for n in range(lo, hi):
        s = targets[n - lo]
        for k, c in near:
            if k > n:
                break
            s -= c * window[n - k - base]
        if modulus is not None:
            s %= modulus
        window.append(s)
    x[lo:hi] = window[lo - base:]


def triangular_solve(rhs: np.ndarray, terms: Sequence[Tuple[int, object]],
                     modulus: Optional[int] = None) -> np.ndarray:
    """
    Solve x[n] = rhs[n] - sum_k c_k x[n - k] over the (offset, value) terms,
    i.e. divide rhs by 1 + sum_k c_k q^k. Offsets are bucketed by block level
    so far offsets run as vectorized slices and only offsets below the
    smallest block are handled one coefficient at a time.
    """
    total = len(rhs)
    x = np.zeros_like(rhs)
    if total == 0:
        return x
    acc = rhs.copy()
    terms = sorted((int(k), c) for k, c in terms if 0 < k < total and c != 0)

    levels = [size for size in BLOCK_LEVELS if size < total]
    bands = []
    for i, size in enumerate(levels):
        upper = levels[i - 1] if i else None
        bands.append([(k, c) for k, c in terms if k >= size and (upper is None or k < upper)])
    near = [(k, c) for k, c in terms if not levels or k < levels[-1]]

    def solve_range(lo, hi, level):
        if level == len(levels):
            _solve_scalar(x, acc, near, lo, hi, modulus)
            return
        size = levels[level]
        band = bands[level]
        for start in range(lo, hi, size):
            stop = min(start + size, hi)
            for k, c in band:
                if k >= stop:
                    break
                first = max(start, k)
                if c == 1:
                    acc[first:stop] -= x[first - k:stop - k]
                elif c == -1:
                    acc[first:stop] += x[first - k:stop - k]
                else:
                    acc[first:stop] -= c * x[first - k:stop - k]
            if modulus is not None:
                acc[start:stop] %= modulus
            solve_range(start, stop, level + 1)

    solve_range(0, total, 0)
    return x


def series_div(num: TruncatedSeries, den: TruncatedSeries) -> TruncatedSeries:
    """Quotient q with den * q = num + O(q^T); den must have a unit constant term"""
    _check_rings(num, den)
    ring = num.ring
    trunc = min(num.trunc, den.trunc)
    lead = den[0]
    if not ring.is_unit(lead):
        raise NonUnitError(f"constant term {lead} is not a unit in {ring}")
    inv = ring.inverse(lead)

    rhs = num.coeffs[:trunc] * inv
    if ring.kind == RingKind.MODULAR:
        rhs = rhs % ring.modulus
    rhs = rhs.astype(ring.dtype) if ring.dtype is not object else np.array(rhs, dtype=object)
    terms = []
    for k in np.flatnonzero(den.coeffs[:trunc]):
        if k:
            c = den.coeffs[k] * inv
            terms.append((int(k), ring.signed(c % ring.modulus if ring.modulus else c)))
    return TruncatedSeries._wrap(ring, triangular_solve(rhs, terms, ring.modulus))


def series_inv(a: TruncatedSeries) -> TruncatedSeries:
    """Multiplicative inverse by the triangular recurrence"""
    return series_div(TruncatedSeries.one(a.ring, a.trunc), a)


def op_U(m: int, a: TruncatedSeries) -> TruncatedSeries:
    """g|U(m) = sum a(mn) q^n"""
    if m < 1:
        raise ValueError(f"U(m) needs m >= 1, got {m}")
    return TruncatedSeries(a.ring, a.coeffs[::m].copy(), normalized=True)


def op_V(m: int, a: TruncatedSeries, trunc: Optional[int] = None) -> TruncatedSeries:
    """g|V(m) = sum a(n) q^(mn)"""
    if m < 1:
        raise ValueError(f"V(m) needs m >= 1, got {m}")
    out_trunc = m * (a.trunc - 1) + 1
    if trunc is not None:
        out_trunc = min(out_trunc, trunc)
    arr = np.zeros(out_trunc, dtype=a.ring.dtype)
    count = (out_trunc - 1) // m + 1
    arr[::m] = a.coeffs[:count]
    return TruncatedSeries(a.ring, arr, normalized=True)


def reduce_mod(a: TruncatedSeries, m: int) -> TruncatedSeries:
    """Image of an exact series in Z/m"""
    if not a.ring.is_exact:
        if a.ring.modulus % m:
            raise RingMismatchError(f"cannot reduce {a.ring} to Z/{m}")
        return TruncatedSeries(Zmod(m), a.tolist())
    return TruncatedSeries(Zmod(m), [Zmod(m).element(c) for c in a.coeffs])


# ---------------- eta quotients ----------------

def pentagonal_terms(limit: int) -> List[Tuple[int, int]]:
    """(exponent, sign) of prod (1 - q^n) below limit, generalized pentagonal numbers"""
    terms = [(0, 1)]
    j = 1
    while True:
        first = j * (3 * j - 1) // 2
        if first >= limit:
            break
        sign = -1 if j % 2 else 1
        terms.append((first, sign))
        second = j * (3 * j + 1) // 2
        if second < limit:
            terms.append((second, sign))
        j += 1
    return sorted(terms)


def euler_product_series(delta: int, trunc: int, ring: Ring = ZZ) -> TruncatedSeries:
    """prod_{n>=1} (1 - q^(delta n)) via the pentagonal number theorem"""
    if delta < 1:
        raise ValueError(f"delta must be >= 1, got {delta}")
    arr = np.zeros(trunc, dtype=ring.dtype)
    for exponent, sign in pentagonal_terms((trunc - 1) // delta + 1):
        arr[delta * exponent] = ring.element(sign)
    return TruncatedSeries(ring, arr, normalized=True)


@dataclass(frozen=True)
class EtaQuotient:
    """Finite multiset {(delta, r_delta)} defining prod eta(delta z)^r_delta"""
    pairs: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        deltas = [d for d, _ in self.pairs]
        if any(d < 1 for d in deltas):
            raise EtaQuotientError(f"every delta must be positive: {self.pairs}")
        if len(set(deltas)) != len(deltas):
            raise EtaQuotientError(f"repeated delta in {self.pairs}")
        canonical = tuple(sorted((int(d), int(r)) for d, r in self.pairs if r))
        object.__setattr__(self, 'pairs', canonical)

    @classmethod
    def parse(cls, spec: str) -> 'EtaQuotient':
        """Parse the shell-friendly grammar "delta:r,delta:r,..." """
        pairs = []
        try:
            for chunk in spec.split(','):
                delta, r = chunk.strip().split(':')
                pairs.append((int(delta), int(r)))
        except ValueError:
            raise EtaQuotientError(f"malformed eta-quotient spec {spec!r}; expected 'delta:r,...'")
        if not pairs:
            raise EtaQuotientError("empty eta-quotient spec")
        return cls(tuple(pairs))

    @property
    def s_X(self) -> int:
        return sum(d * r for d, r in self.pairs)

    @property
    def weight_times_2(self) -> int:
        return sum(r for _, r in self.pairs)

    def __mul__(self, other: 'EtaQuotient') -> 'EtaQuotient':
        merged: Dict[int, int] = dict(self.pairs)
        for d, r in other.pairs:
            merged[d] = merged.get(d, 0) + r
        return EtaQuotient(tuple((d, r) for d, r in merged.items() if r))

    def __pow__(self, e: int) -> 'EtaQuotient':
        return EtaQuotient(tuple((d, r * e) for d, r in self.pairs if r * e))

    def inverse(self) -> 'EtaQuotient':
        return self ** -1

    def __str__(self):
        return ','.join(f"{d}:{r}" for d, r in self.pairs)


# f = eta(2z)/eta(z)^2, F = 1/f, Delta_2 = eta(z)^8 eta(2z)^8
OVERPARTITION_ETA = EtaQuotient(((1, -2), (2, 1)))
THETA_ETA = OVERPARTITION_ETA.inverse()
DELTA2_ETA = EtaQuotient(((1, 8), (2, 8)))


@dataclass(frozen=True)
class EtaMetadata:
    weight_times_2: int
    level: int
    character_m: int

    @property
    def weight(self) -> Fraction:
        return Fraction(self.weight_times_2, 2)

    @property
    def character_is_trivial(self) -> bool:
        return squarefree_core(self.character_m) == 1


def eta_product_series(X: EtaQuotient, trunc: int, ring: Ring = ZZ) -> TruncatedSeries:
    """prod_X prod_n (1 - q^(delta n))^r_delta, without the q^(s_X/24) prefactor"""
    arr = np.zeros(trunc, dtype=ring.dtype)
    arr[0] = ring.element(1)
    modulus = ring.modulus
    for delta, r in X.pairs:
        terms = [(delta * e, s) for e, s in pentagonal_terms((trunc - 1) // delta + 1) if e]
        if r > 0:
            factor = euler_product_series(delta, trunc, ring).coeffs
            for _ in range(r):
                arr = _multiply_arrays(arr, factor, trunc, ring)
                if modulus is not None:
                    arr %= modulus
        else:
            for _ in range(-r):
                arr = triangular_solve(arr, terms, modulus)
    return TruncatedSeries._wrap(ring, arr)


def eta_quotient_series(X: EtaQuotient, trunc: int, ring: Ring = ZZ) -> TruncatedSeries:
    """Full expansion q^(s_X/24) prod_X prod_n (1 - q^(delta n))^r_delta"""
    s = X.s_X
    if s % 24:
        raise EtaQuotientError(f"s_X = {s} is not divisible by 24 for {X}")
    if s < 0:
        raise EtaQuotientError(f"s_X = {s} < 0: {X} has a pole at infinity")
    shift = s // 24
    if shift >= trunc:
        return TruncatedSeries(ring, np.zeros(trunc, dtype=ring.dtype), normalized=True)
    body = eta_product_series(X, trunc - shift, ring)
    arr = np.zeros(trunc, dtype=ring.dtype)
    arr[shift:] = body.coeffs
    return TruncatedSeries(ring, arr, normalized=True)


@memoized('eta')
def eta_series_cached(X: EtaQuotient, trunc: int, ring: Ring) -> TruncatedSeries:
    return eta_quotient_series(X, trunc, ring)


def eta_quotient_metadata(X: EtaQuotient) -> EtaMetadata:
    """Weight, level and character of eta^X as a weakly holomorphic form"""
    k = X.weight_times_2
    base = 1
    for delta, _ in X.pairs:
        base = lcm(base, delta)
    if k % 2:
        base = lcm(base, 4)
    s = sum(Fraction(r, delta) for delta, r in X.pairs)
    level = base * (Fraction(base) * s / 24).denominator

    m_prime = Fraction(1)
    for delta, r in X.pairs:
        m_prime *= Fraction(delta) ** r
    character = m_prime.numerator * m_prime.denominator
    if k % 2:
        character *= 2
    return EtaMetadata(k, level, character)


def ligozat_order(X: EtaQuotient, c: int, N: int) -> Fraction:
    """Order of vanishing of eta^X at a cusp a/c of Gamma_0(N)"""
    total = sum(Fraction(gcd(c, delta) ** 2 * r, delta) for delta, r in X.pairs)
    return Fraction(N, 24 * gcd(c * c, N)) * total


def cusp_orders(X: EtaQuotient, N: int) -> List[Tuple[int, int, Fraction]]:
    """(c, number of cusps with denominator c, order) for every c | N"""
    return [(c, int(totient(gcd(c, N // c))), ligozat_order(X, c, N)) for c in divisors(N)]


# ---------------- overpartitions ----------------

def estimate_memory_bytes(nmax: int, m: Optional[int]) -> int:
    """Rough peak memory of one overpartition build"""
    if m is not None and m < SMALL_MODULUS_LIMIT:
        return 4 * 8 * nmax
    # exact values: log2 pbar(n) ~ pi sqrt(n) / ln 2
    digits_bytes = int(4.6 * nmax ** 1.5 / 1.5 / 8)
    return 3 * (64 * nmax + digits_bytes)


def _overpartition_array(nmax: int, ring: Ring) -> np.ndarray:
    # g P = P(q^2), then f P = g, both against the sparse pentagonal series
    terms = [(e, ring.signed(ring.element(s))) for e, s in pentagonal_terms(nmax) if e]
    rhs = np.zeros(nmax, dtype=ring.dtype)
    for e, s in pentagonal_terms((nmax - 1) // 2 + 1):
        rhs[2 * e] = ring.element(s)
    distinct = triangular_solve(rhs, terms, ring.modulus)
    return triangular_solve(distinct, terms, ring.modulus)


@memoized('overpartition')
def _overpartition_cached(nmax: int, m: Optional[int], cache_dir: Optional[str]) -> TruncatedSeries:
    from . import residue_cache

    ring = ZZ if m is None else Zmod(m)
    if cache_dir is not None and m is not None:
        stored = residue_cache.load_residues(cache_dir, m, nmax)
        if stored is not None:
            print(f"🔄 Residue cache HIT for m={m}, n<{nmax}", file=sys.stderr)
            return TruncatedSeries(ring, stored.astype(np.int64), normalized=True)

    print(f"🧮 Computing overpartitions mod {m if m else 'exact'} to n<{nmax}", file=sys.stderr)
    series = TruncatedSeries._wrap(ring, _overpartition_array(nmax, ring))

    if cache_dir is not None and m is not None and m < 256:
        residue_cache.save_residues(cache_dir, m, series.coeffs)
    return series


def overpartition_series(nmax: int, m: Optional[int] = None, cache_dir: Optional[str] = None,
                         memory_cap_mb: Optional[int] = None) -> TruncatedSeries:
    """Coefficients pbar(0..nmax-1), exact or mod m"""
    if nmax < 1:
        raise ValueError(f"nmax must be >= 1, got {nmax}")
    if memory_cap_mb is not None:
        needed = estimate_memory_bytes(nmax, m)
        if needed > memory_cap_mb * 1024 * 1024:
            raise ResourceCapError(
                f"overpartitions to {nmax} need ~{needed // 2**20} MB, cap is {memory_cap_mb} MB")
    return _overpartition_cached(nmax, m, None if cache_dir is None else str(cache_dir))
