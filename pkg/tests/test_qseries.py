import random
from fractions import Fraction

import numpy as np
import pytest

from overpartitions.qseries import (DELTA2_ETA, OVERPARTITION_ETA, QQ, THETA_ETA, ZZ, EtaQuotient,
                                    EtaQuotientError, NonUnitError, ResourceCapError,
                                    RingMismatchError, TruncatedSeries, Zmod, cusp_orders,
                                    eta_product_series, eta_quotient_metadata, eta_quotient_series,
                                    euler_product_series, op_U, op_V, overpartition_series,
                                    pentagonal_terms, reduce_mod, series_div, series_inv,
                                    series_pow, triangular_solve)
from tests.conftest import enumerate_overpartitions, overpartition_oracle

FIRST_OVERPARTITIONS = [1, 2, 4, 8, 14, 24, 40, 64, 100, 154, 232, 344, 504, 728, 1040]


class TestOverpartitionOracle:
    def test_enumerator_agrees_with_counter(self):
        for n in range(13):
            overpartitions = list(enumerate_overpartitions(n))
            assert len(overpartitions) == len(set(overpartitions))
            assert all(sum(part for part, _ in op) == n for op in overpartitions)
            assert len(overpartitions) == overpartition_oracle(n)

    def test_exact_values_match_oracle(self):
        series = overpartition_series(61)
        assert series.tolist() == [overpartition_oracle(n) for n in range(61)]

    def test_known_start(self):
        assert overpartition_series(15).tolist() == FIRST_OVERPARTITIONS

    @pytest.mark.parametrize('m', [3, 5, 7, 11, 13, 17, 19, 1009])
    def test_residues_match_exact_values(self, m):
        exact = overpartition_series(400).tolist()
        residues = overpartition_series(400, m)
        assert residues.ring == Zmod(m)
        assert residues.tolist() == [v % m for v in exact]

    @pytest.mark.parametrize('m', [3, 5, 13])
    def test_reduction_commutes_to_ten_thousand(self, m):
        exact = overpartition_series(10 ** 4)
        residues = overpartition_series(10 ** 4, m)
        assert residues.ring == Zmod(m)
        assert residues.tolist() == reduce_mod(exact, m).tolist()

    def test_large_modulus_uses_exact_storage(self):
        m = (1 << 61) - 1
        exact = overpartition_series(200).tolist()
        assert overpartition_series(200, m).tolist() == [v % m for v in exact]

    def test_blocked_solver_spans_every_level(self):
        # 70000 crosses every block level of the solver
        trunc = 70000
        residues = overpartition_series(trunc, 7)
        # 1/f = 1 + 2 sum (-1)^k q^(k^2)
        theta = [0] * trunc
        theta[0] = 1
        k = 1
        while k * k < trunc:
            theta[k * k] = 2 * (-1) ** k
            k += 1
        product = TruncatedSeries(Zmod(7), theta) * residues
        assert product == TruncatedSeries.one(Zmod(7), trunc)

    def test_memory_cap(self):
        with pytest.raises(ResourceCapError):
            overpartition_series(10 ** 8, 7, memory_cap_mb=1)

    def test_rejects_empty_request(self):
        with pytest.raises(ValueError):
            overpartition_series(0)


class TestSeriesArithmetic:
    def test_mul_and_pow(self):
        a = TruncatedSeries(ZZ, [1, 1, 0, 0, 0])
        assert series_pow(a, 4).tolist() == [1, 4, 6, 4, 1]
        assert (a * a).tolist() == [1, 2, 1, 0, 0]

    def test_truncation_is_the_minimum(self):
        a = TruncatedSeries(ZZ, [1, 2, 3])
        b = TruncatedSeries(ZZ, [1, 1, 1, 1, 1])
        assert (a + b).trunc == 3
        assert (a * b).trunc == 3

    def test_ring_mismatch(self):
        with pytest.raises(RingMismatchError):
            TruncatedSeries(ZZ, [1, 2]) + TruncatedSeries(Zmod(5), [1, 2])

    def test_integer_ring_rejects_fractions(self):
        with pytest.raises(RingMismatchError):
            TruncatedSeries(ZZ, [Fraction(1, 2)])

    def test_division_inverts_multiplication(self):
        rng = random.Random(11)
        for ring in (ZZ, Zmod(7), Zmod(1009)):
            den = TruncatedSeries(ring, [1] + [rng.randrange(-5, 6) for _ in range(79)])
            num = TruncatedSeries(ring, [rng.randrange(-50, 51) for _ in range(80)])
            assert series_div(num, den) * den == num

    def test_rational_inverse(self):
        a = TruncatedSeries(QQ, [2, 1])
        inv = series_inv(TruncatedSeries(QQ, [2, 1, 0, 0]))
        assert inv.tolist() == [Fraction(1, 2), Fraction(-1, 4), Fraction(1, 8), Fraction(-1, 16)]
        assert (inv * a).tolist() == [1, 0]

    def test_non_unit_constant(self):
        with pytest.raises(NonUnitError):
            series_inv(TruncatedSeries(ZZ, [2, 1]))
        with pytest.raises(NonUnitError):
            series_inv(TruncatedSeries(Zmod(7), [7, 1]))

    def test_triangular_solve_geometric(self):
        # 1 / (1 - q) = 1 + q + q^2 + ...
        x = triangular_solve(np.array([1] + [0] * 99, dtype=object), [(1, -1)])
        assert list(x) == [1] * 100

    def test_reduce_mod(self):
        a = TruncatedSeries(QQ, [Fraction(1, 2), 3, Fraction(-1, 3)])
        assert reduce_mod(a, 5).tolist() == [3, 3, 3]
        with pytest.raises(RingMismatchError):
            reduce_mod(TruncatedSeries(QQ, [Fraction(1, 5)]), 5)

    def test_series_is_immutable(self):
        a = TruncatedSeries(ZZ, [1, 2, 3])
        with pytest.raises(ValueError):
            a.coeffs[0] = 5


class TestOperators:
    def test_u_and_v(self):
        a = TruncatedSeries(ZZ, list(range(10)))
        assert op_U(3, a).tolist() == [0, 3, 6, 9]
        assert op_V(2, TruncatedSeries(ZZ, [1, 2, 3])).tolist() == [1, 0, 2, 0, 3]
        assert op_V(3, a, 7).tolist() == [0, 0, 0, 1, 0, 0, 2]

    def test_v_then_u_is_identity(self):
        a = TruncatedSeries(ZZ, [5, -1, 7, 2])
        assert op_U(4, op_V(4, a)) == a

    def test_u_of_v_product_on_random_series(self):
        # ((f|V(m)) g)|U(m) = f (g|U(m))
        rng = random.Random(12345)
        for _ in range(100):
            trunc = rng.randrange(5, 60)
            m = rng.randrange(1, 6)
            f = TruncatedSeries(ZZ, [rng.randrange(-9, 10) for _ in range(trunc)])
            g = TruncatedSeries(ZZ, [rng.randrange(-9, 10) for _ in range(trunc)])
            lhs = op_U(m, op_V(m, f, trunc) * g)
            rhs = f * op_U(m, g)
            assert lhs.tolist() == rhs.tolist()

    def test_frobenius_on_random_eta_quotients(self):
        # f|V(m) = f^m mod m for integral series
        rng = random.Random(2024)
        for _ in range(100):
            deltas = rng.sample([1, 2, 3, 4, 6, 8], rng.randrange(1, 4))
            pairs = tuple((d, rng.choice([-3, -2, -1, 1, 2, 3])) for d in deltas)
            m = rng.choice([3, 5, 7])
            base = eta_product_series(EtaQuotient(pairs), 60, Zmod(m))
            assert op_V(m, base, 60) == series_pow(base, m)

    @pytest.mark.parametrize('quotient', [OVERPARTITION_ETA, THETA_ETA, DELTA2_ETA],
                             ids=['f', 'F', 'delta2'])
    @pytest.mark.parametrize('m', [3, 5, 7])
    def test_frobenius_on_overpartition_quotients(self, quotient, m):
        base = eta_quotient_series(quotient, 300, Zmod(m))
        assert op_V(m, base, 300) == series_pow(base, m)


class TestEtaQuotients:
    def test_pentagonal_terms(self):
        assert pentagonal_terms(16) == [(0, 1), (1, -1), (2, -1), (5, 1), (7, 1), (12, -1), (15, -1)]

    def test_euler_product_matches_direct_product(self):
        direct = TruncatedSeries.one(ZZ, 40)
        for n in range(1, 40):
            factor = [0] * 40
            factor[0] = 1
            factor[n] = -1
            direct = direct * TruncatedSeries(ZZ, factor)
        assert euler_product_series(1, 40) == direct
        assert euler_product_series(3, 40) == op_V(3, direct, 40)

    def test_parse(self):
        assert EtaQuotient.parse("1:-2,2:1") == OVERPARTITION_ETA
        assert EtaQuotient.parse(" 2:1 , 1:-2 ") == OVERPARTITION_ETA
        assert str(DELTA2_ETA) == "1:8,2:8"

    @pytest.mark.parametrize('spec', ["", "1", "1:a", "1:2:3", "0:1", "1:1,1:2"])
    def test_malformed_spec(self, spec):
        with pytest.raises(EtaQuotientError):
            EtaQuotient.parse(spec)

    def test_overpartition_generating_function(self):
        assert eta_quotient_series(OVERPARTITION_ETA, 15).tolist() == FIRST_OVERPARTITIONS

    def test_theta_is_the_inverse(self):
        theta = eta_quotient_series(THETA_ETA, 30)
        f = eta_quotient_series(OVERPARTITION_ETA, 30)
        assert (theta * f) == TruncatedSeries.one(ZZ, 30)
        # F = 1 + 2 sum (-1)^n q^(n^2)
        expected = [0] * 30
        expected[0] = 1
        for n in range(1, 6):
            expected[n * n] = 2 * (-1) ** n
        assert theta.tolist() == expected

    def test_delta2_leading_term(self):
        assert eta_quotient_series(DELTA2_ETA, 2).tolist() == [0, 1]
        assert eta_quotient_series(DELTA2_ETA, 4).tolist() == [0, 1, -8, 12]

    def test_rejects_fractional_and_negative_orders(self):
        with pytest.raises(EtaQuotientError):
            eta_quotient_series(EtaQuotient.parse("1:1"), 10)
        with pytest.raises(EtaQuotientError):
            eta_quotient_series(EtaQuotient.parse("1:-24"), 10)

    def test_metadata_of_overpartition_quotient(self):
        meta = eta_quotient_metadata(OVERPARTITION_ETA)
        assert meta.weight == Fraction(-1, 2)
        assert meta.level == 16
        assert meta.character_is_trivial

    def test_metadata_of_delta2(self):
        meta = eta_quotient_metadata(DELTA2_ETA)
        assert meta.weight == 8
        assert meta.level == 2
        assert meta.character_is_trivial

    def test_theta_cusp_orders_at_level_16(self):
        orders = {c: (count, order) for c, count, order in cusp_orders(THETA_ETA, 16)}
        assert sorted(orders) == [1, 2, 4, 8, 16]
        assert sum(count for count, _ in orders.values()) == 6
        assert orders[1][1] == 1
        assert all(order == 0 for c, (_, order) in orders.items() if c != 1)

    def test_overpartition_quotient_has_a_pole_at_zero(self):
        orders = {c: order for c, _, order in cusp_orders(OVERPARTITION_ETA, 16)}
        assert orders[1] == -1

    def test_arithmetic_on_quotients(self):
        assert (OVERPARTITION_ETA * THETA_ETA).pairs == ()
        assert (OVERPARTITION_ETA ** 3).s_X == 0
        assert DELTA2_ETA.weight_times_2 == 16
