"""
Overpartition congruence pipeline
Per-prime constants, the forms g_m = F^{a_m} h_m and h'_m, Sturm-bound
certification of f|U(m) = g_m mod m, eigenvalue classification, family
search over l and direct spot checks of pbar(m l^e n) = 0 mod m
"""

import json
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from math import gcd
from pathlib import Path
from typing import Dict, List, Literal, NamedTuple, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, model_validator
from sympy import isprime, primerange

from .arith import kronecker
from .config import DEFAULT_INDEX_CAP, DEFAULT_WORKERS
from .eisenstein import (EisSpec, PostOp, eis_series, integral_eisenstein, level2_D2,
                         monomial_basis_form, monomial_weight)
from .hecke import HeckeContext, SturmQuery, hecke_integral_Tm, is_eigenform_mod, sturm_bound
from .qseries import (DELTA2_ETA, OVERPARTITION_ETA, THETA_ETA, ZZ, ResourceCapError,
                      TruncatedSeries, Zmod, eta_product_series, eta_quotient_series,
                      eta_series_cached, op_U, overpartition_series, reduce_mod, series_div,
                      series_pow)
from .residue_cache import cache_content_hash

HmTerms = Tuple[Tuple[int, int, int], ...]

# h_m as (a, b, coeff) terms of coeff * D2^a * E4^b
H_M_TABLE: Dict[int, HmTerms] = {
    3: ((0, 0, 1),),
    5: ((0, 0, 1),),
    7: ((1, 0, 1),),
    11: ((1, 0, 1),),
    13: ((0, 1, 1),),
    17: ((2, 0, 13), (0, 1, 5)),
    19: ((3, 0, 11), (1, 1, 9)),
}

# Eisenstein combination congruent to g_11 mod 11
G11_COMBINATION: Tuple[Tuple[int, EisSpec], ...] = (
    (9, EisSpec(9, 4)),
    (4, EisSpec(9, 4, post_ops=(PostOp.V4,))),
    (7, EisSpec(9, 4, primed=True)),
    (4, EisSpec(9, 4, primed=True, post_ops=(PostOp.V4,))),
    (7, EisSpec(9, 8, primed=True, post_ops=(PostOp.V2,))),
)

# Largest m whose families follow from the Eisenstein eigenvalue alone
EISENSTEIN_ONLY_MAX = 11

# Bytes per overpartition residue held during a build
BYTES_PER_RESIDUE = 32


class UnsupportedPrimeError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class CongruenceError(RuntimeError):
    pass


def weight_numerator(m: int) -> int:
    """k_m: g_m has weight k_m / 2"""
    return m + 2 if m == 3 else m - 2


def f_power(m: int) -> int:
    """a_m in (0, 8) with a_m = -m mod 8"""
    return -m % 8


def hm_prime_weight(m: int) -> int:
    """r_m, the weight of h'_m"""
    return (m * (16 - f_power(m)) - 17) // 2


class PrimeParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int
    k_m: int
    a_m: int
    r_m: int
    h_m: Optional[HmTerms] = None

    @model_validator(mode='after')
    def check_constants(self):
        m = self.m
        if m < 3 or not isprime(m):
            raise ValueError(f"m must be an odd prime, got {m}")
        if self.k_m != weight_numerator(m):
            raise ValueError(f"k_m for m={m} is {weight_numerator(m)}, got {self.k_m}")
        if self.a_m != f_power(m):
            raise ValueError(f"a_m for m={m} is {f_power(m)}, got {self.a_m}")
        if self.r_m != hm_prime_weight(m):
            raise ValueError(f"r_m for m={m} is {hm_prime_weight(m)}, got {self.r_m}")
        if self.h_m is not None:
            h_weight = monomial_weight(self.h_m)
            if self.a_m + 2 * h_weight != self.k_m:
                raise ValueError(f"h_m of weight {h_weight} does not give g_{m} weight {self.k_m}/2")
        return self

    @property
    def sturm_bound(self) -> int:
        return sturm_bound(SturmQuery(self.k_m, 16))


class FamilyClass(NamedTuple):
    exponent: int
    epsilon: int
    eigenvalue: int


class CongruenceFamily(BaseModel):
    """pbar(m l^exponent n) = 0 mod m for admissible n"""
    m: int
    ell: int
    exponent: Literal[2, 3]
    epsilon: Literal[-1, 0, 1]
    eigenvalue: Optional[int] = None
    status: Literal['proved', 'verified', 'candidate', 'failed'] = 'candidate'
    verified_bound: Optional[int] = None
    spot_checks: List[Tuple[int, int]] = []

    @model_validator(mode='after')
    def check_epsilon(self):
        if (self.exponent == 3) != (self.epsilon == 0):
            raise ValueError(f"exponent {self.exponent} is incompatible with epsilon {self.epsilon}")
        return self

    @property
    def sort_key(self):
        return (self.m, self.ell, self.exponent, self.epsilon)


class VerificationReport(BaseModel):
    subject: str
    status: Literal['pass', 'fail']
    checked_range: Tuple[int, int]
    modulus: int
    witness: Optional[int] = None

    @model_validator(mode='after')
    def check_witness(self):
        if self.status == 'fail' and self.witness is None:
            raise ValueError("a failed report needs a witness index")
        return self

    @property
    def passed(self) -> bool:
        return self.status == 'pass'


class Certificate(BaseModel):
    m: int
    ell: int
    exponent: int
    epsilon: int
    eigenvalue: Optional[int]
    status: str
    sturm_bound: int
    checked_indices: List[int]
    cache_sha256: Optional[str] = None
    created_at: str


def load_hm_config(path) -> Dict[int, HmTerms]:
    """Extra h_m forms from a JSON object {"m": [[a, b, coeff], ...]}"""
    with open(path, 'r') as file:
        raw = json.load(file)
    return {int(m): tuple(tuple(int(x) for x in term) for term in terms) for m, terms in raw.items()}


def prime_params(m: int, hm_config: Optional[Path] = None, enable_m23: bool = False) -> PrimeParams:
    if m < 3 or not isprime(m):
        raise UnsupportedPrimeError(f"m must be an odd prime, got {m}")
    h_m = H_M_TABLE.get(m)
    if h_m is None and hm_config is not None:
        h_m = load_hm_config(hm_config).get(m)
    if h_m is None and not (m == 23 and enable_m23):
        raise UnsupportedPrimeError(
            f"no h_m known for m={m}; supply one with OPC_HM_CONFIG")
    return PrimeParams(m=m, k_m=weight_numerator(m), a_m=f_power(m),
                       r_m=hm_prime_weight(m), h_m=h_m)


def base_params(m: int) -> PrimeParams:
    """Constants of any odd prime m, with h_m only where it is tabulated"""
    return PrimeParams(m=m, k_m=weight_numerator(m), a_m=f_power(m),
                       r_m=hm_prime_weight(m), h_m=H_M_TABLE.get(m))


def _require_hm(params: PrimeParams):
    if params.h_m is None:
        raise UnsupportedPrimeError(f"m={params.m} has no h_m; g_m cannot be built")


def build_gm(m: int, trunc: int, params: Optional[PrimeParams] = None) -> TruncatedSeries:
    """g_m = F^{a_m} h_m mod m"""
    params = params or prime_params(m)
    _require_hm(params)
    theta = eta_series_cached(THETA_ETA, trunc, Zmod(m))
    h = reduce_mod(monomial_basis_form(params.h_m, trunc), m)
    return series_pow(theta, params.a_m) * h


def f_U(m: int, trunc: int, cache_dir=None, memory_cap_mb: Optional[int] = None) -> TruncatedSeries:
    """f|U(m) mod m to trunc, i.e. pbar(m n) for n < trunc"""
    pbar = overpartition_series(m * (trunc - 1) + 1, m, cache_dir, memory_cap_mb)
    return op_U(m, pbar)


def _compare(subject: str, lhs: TruncatedSeries, rhs: TruncatedSeries, lo: int, hi: int,
             modulus: int) -> VerificationReport:
    witness = next((n for n in range(lo, hi + 1) if lhs[n] != rhs[n]), None)
    status = 'pass' if witness is None else 'fail'
    return VerificationReport(subject=subject, status=status, checked_range=(lo, hi),
                              modulus=modulus, witness=witness)


def verify_gm_congruence(m: int, params: Optional[PrimeParams] = None, cache_dir=None,
                         memory_cap_mb: Optional[int] = None) -> VerificationReport:
    """f|U(m) = g_m mod m up to the Sturm bound of weight k_m/2 on Gamma_0(16)"""
    params = params or prime_params(m)
    _require_hm(params)
    bound = params.sturm_bound
    lhs = f_U(m, bound + 1, cache_dir, memory_cap_mb)
    rhs = build_gm(m, bound + 1, params)
    return _compare(f"f|U({m}) = g_{m}", lhs, rhs, 0, bound, m)


def g11_eisenstein_combination(trunc: int) -> TruncatedSeries:
    total = None
    for coeff, spec in G11_COMBINATION:
        term = eis_series(spec, trunc) * coeff
        total = term if total is None else total + term
    return reduce_mod(total, 11)


def verify_g11() -> VerificationReport:
    """g_11 against its five-term Eisenstein combination mod 11"""
    bound = prime_params(11).sturm_bound
    lhs = build_gm(11, bound + 1)
    rhs = g11_eisenstein_combination(bound + 1)
    return _compare("g_11 = Eisenstein combination", lhs, rhs, 0, bound, 11)


def beta_eta_quotient(params: PrimeParams):
    """f^(1 + m a_m) Delta2^m, a cusp form of weight r_m + 8 on Gamma_0(2)"""
    return (OVERPARTITION_ETA ** (1 + params.m * params.a_m)) * (DELTA2_ETA ** params.m)


def compute_hm_prime(m: int, trunc: int, params: Optional[PrimeParams] = None,
                     check: bool = True) -> TruncatedSeries:
    """h'_m = (beta|T(m)) / Delta2 as an exact integer series"""
    params = params or base_params(m)
    weight = params.r_m + 8
    beta = eta_quotient_series(beta_eta_quotient(params), m * (trunc + 1), ZZ)
    image = hecke_integral_Tm(m, weight, beta)
    if image[0] != 0:
        raise CongruenceError(f"beta|T({m}) has constant term {image[0]}; expected a cusp form")

    # Delta2 = q * (unit power series)
    shifted = TruncatedSeries(ZZ, image.coeffs[1:trunc + 1].copy(), normalized=True)
    h_prime = series_div(shifted, eta_product_series(DELTA2_ETA, trunc, ZZ))

    if check:
        theta = eta_series_cached(THETA_ETA, trunc, Zmod(m))
        rhs = series_pow(theta, params.a_m) * reduce_mod(h_prime, m)
        report = _compare(f"f|U({m}) = F^a h'_{m}", f_U(m, trunc), rhs, 0, trunc - 1, m)
        if not report.passed:
            raise CongruenceError(f"f|U({m}) and F^{params.a_m} h'_{m} differ mod {m} at n={report.witness}")
    return h_prime


def verify_hm_prime_reduction(m: int, trunc: int) -> VerificationReport:
    """h'_m = h_m E_{m-1}^e mod m with e = (15 - a_m)/2 (h'_3 = D2^4 mod 3)"""
    params = prime_params(m)
    _require_hm(params)
    h_prime = reduce_mod(compute_hm_prime(m, trunc, params, check=False), m)
    if m == 3:
        expected = reduce_mod(series_pow(level2_D2(trunc), 4), 3)
    else:
        e = (15 - params.a_m) // 2
        e_m = reduce_mod(integral_eisenstein(m - 1, trunc), m)
        expected = reduce_mod(monomial_basis_form(params.h_m, trunc), m) * series_pow(e_m, e)
    return _compare(f"h'_{m} = h_{m} E^e", h_prime, expected, 0, trunc - 1, m)


def eisenstein_eigenvalue(m: int, ell: int) -> int:
    """1 + l^(k_m - 2) mod m, the T(l^2) eigenvalue on the Eisenstein space"""
    return (1 + pow(ell, weight_numerator(m) - 2, m)) % m


def classify_eigenvalue(m: int, ell: int, eigenvalue: Optional[int] = None) -> Optional[FamilyClass]:
    """
    Family class of an eigenvalue: exponent 3 when it vanishes mod m, exponent 2
    with sign eps when it is eps * l^((k_m-3)/2), otherwise None
    """
    if ell == m or ell % 2 == 0:
        raise PreconditionError(f"l must be an odd prime different from m={m}, got {ell}")
    k = weight_numerator(m)
    value = eisenstein_eigenvalue(m, ell) if eigenvalue is None else eigenvalue % m
    if value == 0:
        return FamilyClass(3, 0, value)
    twist = pow(ell, (k - 3) // 2, m)
    if value == twist:
        return FamilyClass(2, 1, value)
    if value == (-twist) % m:
        return FamilyClass(2, -1, value)
    return None


def is_admissible(family: CongruenceFamily, n: int) -> bool:
    if n < 1 or gcd(n, family.ell) != 1:
        return False
    if family.exponent == 3:
        return True
    k = weight_numerator(family.m)
    return kronecker((-1) ** ((k - 1) // 2) * n, family.ell) == family.epsilon


def admissible_n(family: CongruenceFamily, count: int) -> List[int]:
    """Smallest admissible n in increasing order"""
    found = []
    n = 1
    while len(found) < count:
        if is_admissible(family, n):
            found.append(n)
        n += 1
    return found


def family_index(family: CongruenceFamily, n: int) -> int:
    return family.m * family.ell ** family.exponent * n


def _spot_residues(family: CongruenceFamily, n_list: Sequence[int], pbar: TruncatedSeries):
    return [(n, pbar[family_index(family, n)]) for n in n_list]


def verify_family_spotcheck(family: CongruenceFamily, n_list: Sequence[int], cache_dir=None,
                            index_cap: int = DEFAULT_INDEX_CAP,
                            memory_cap_mb: Optional[int] = None) -> VerificationReport:
    """Direct check pbar(m l^e n) = 0 mod m for each n"""
    if not n_list:
        raise PreconditionError("no n to check")
    for n in n_list:
        if gcd(n, family.ell) != 1:
            raise PreconditionError(f"n={n} is not prime to l={family.ell}")
        if not is_admissible(family, n):
            raise PreconditionError(f"n={n} is not in the Kronecker class eps={family.epsilon}")
    top = family_index(family, max(n_list))
    if top > index_cap:
        raise ResourceCapError(f"index {top} exceeds the cap {index_cap}")

    pbar = overpartition_series(top + 1, family.m, cache_dir, memory_cap_mb)
    residues = _spot_residues(family, n_list, pbar)
    witness = next((family_index(family, n) for n, r in residues if r), None)
    return VerificationReport(
        subject=f"pbar({family.m}*{family.ell}^{family.exponent}*n) = 0",
        status='pass' if witness is None else 'fail',
        checked_range=(min(n_list), max(n_list)), modulus=family.m, witness=witness)


def _feasible_length(index_cap: int, memory_cap_mb: Optional[int]) -> int:
    cap = index_cap
    if memory_cap_mb is not None:
        cap = min(cap, memory_cap_mb * 1024 * 1024 // BYTES_PER_RESIDUE)
    return cap


def _with_spot_checks(family: CongruenceFamily, pbar: Optional[TruncatedSeries],
                      spot_count: int) -> CongruenceFamily:
    if pbar is None:
        return family
    n_list = admissible_n(family, spot_count)
    if family_index(family, n_list[-1]) >= pbar.trunc:
        return family
    residues = _spot_residues(family, n_list, pbar)
    status = family.status if all(r == 0 for _, r in residues) else 'failed'
    if status == 'failed':
        print(f"❌ Spot check failed for m={family.m}, l={family.ell}", file=sys.stderr)
    return family.model_copy(update={'spot_checks': residues, 'status': status})


def search_families(m: int, lmax: int = 5000, verify: bool = False,
                    index_cap: int = DEFAULT_INDEX_CAP, memory_cap_mb: Optional[int] = None,
                    cache_dir=None, workers: int = DEFAULT_WORKERS, spot_count: int = 5,
                    params: Optional[PrimeParams] = None) -> List[CongruenceFamily]:
    """
    Congruence families for primes l <= lmax, sorted by (m, l).
    For m <= 11 every class is proved by the Eisenstein eigenvalue; above that
    verify measures the T(l^2) eigenvalue on the coefficients n >= 1 of f|U(m)
    for every l within the caps and leaves the rest as Eisenstein candidates.
    """
    params = params or prime_params(m)
    bound = params.sturm_bound
    ells = [ell for ell in primerange(3, lmax + 1) if ell != m]
    print(f"🔎 Searching m={m} over {len(ells)} primes l <= {lmax}", file=sys.stderr)

    def eisenstein_family(ell: int, status: str) -> Optional[CongruenceFamily]:
        cls = classify_eigenvalue(m, ell)
        if cls is None:
            return None
        return CongruenceFamily(m=m, ell=ell, exponent=cls.exponent, epsilon=cls.epsilon,
                                eigenvalue=cls.eigenvalue, status=status, verified_bound=bound)

    limit = _feasible_length(index_cap, memory_cap_mb)
    pbar = None

    if m <= EISENSTEIN_ONLY_MAX:
        families = [fam for fam in (eisenstein_family(ell, 'proved') for ell in ells) if fam]
        if verify and families:
            needed = [family_index(fam, admissible_n(fam, spot_count)[-1]) + 1 for fam in families]
            reachable = [n for n in needed if n <= limit]
            if reachable:
                pbar = overpartition_series(max(reachable), m, cache_dir, memory_cap_mb)
    else:
        feasible = [ell for ell in ells if m * ell * ell * bound + 1 <= limit] if verify else []
        measured: Dict[int, Optional[CongruenceFamily]] = {}
        if feasible:
            pbar = overpartition_series(m * max(feasible) ** 2 * bound + 1, m, cache_dir, memory_cap_mb)
            f_u = op_U(m, pbar)
            ctx = HeckeContext(params.k_m, 16)

            def measure(ell: int) -> Optional[CongruenceFamily]:
                eigenvalue = is_eigenform_mod(f_u, ctx, ell, bound, start=1)
                if eigenvalue is None:
                    return None
                cls = classify_eigenvalue(m, ell, eigenvalue)
                if cls is None:
                    return None
                return CongruenceFamily(m=m, ell=ell, exponent=cls.exponent, epsilon=cls.epsilon,
                                        eigenvalue=eigenvalue, status='verified', verified_bound=bound)

            with ThreadPoolExecutor(max_workers=workers) as executor:
                measured = dict(zip(feasible, executor.map(measure, feasible)))
        families = []
        for ell in ells:
            fam = measured[ell] if ell in measured else eisenstein_family(ell, 'candidate')
            if fam:
                families.append(fam)

    if pbar is not None:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            families = list(executor.map(lambda fam: _with_spot_checks(fam, pbar, spot_count), families))

    families.sort(key=lambda fam: fam.sort_key)
    print(f"✅ Found {len(families)} families for m={m}", file=sys.stderr)
    return families


def certificate(family: CongruenceFamily, cache_dir=None) -> Certificate:
    """Structured record of one family and the coefficient indices behind it"""
    checked = [family_index(family, n) for n, _ in family.spot_checks]
    digest = cache_content_hash(cache_dir, family.m, max(checked) + 1) if checked else None
    bound = family.verified_bound if family.verified_bound is not None else \
        sturm_bound(SturmQuery(weight_numerator(family.m), 16))
    return Certificate(m=family.m, ell=family.ell, exponent=family.exponent,
                       epsilon=family.epsilon, eigenvalue=family.eigenvalue,
                       status=family.status, sturm_bound=bound, checked_indices=checked,
                       cache_sha256=digest, created_at=datetime.now(timezone.utc).isoformat())
