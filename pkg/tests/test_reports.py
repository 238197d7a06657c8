import json

import pytest

from overpartitions.congruence import CongruenceFamily, VerificationReport, classify_eigenvalue
from overpartitions.reports import FAMILY_FIELDS, emit_report, parse_families
from tests.conftest import read_table


def sample_families():
    return [
        CongruenceFamily(m=5, ell=19, exponent=3, epsilon=0, eigenvalue=0, status='proved',
                         verified_bound=3, spot_checks=[(1, 0), (2, 0)]),
        CongruenceFamily(m=5, ell=3, exponent=2, epsilon=-1, eigenvalue=4, status='proved',
                         verified_bound=3),
        CongruenceFamily(m=13, ell=1811, exponent=3, epsilon=0, status='candidate'),
    ]


class TestFamilyReports:
    @pytest.mark.parametrize('fmt', ['csv', 'json'])
    def test_round_trip(self, fmt):
        families = sample_families()
        parsed = parse_families(emit_report(families, fmt), fmt)
        assert parsed == sorted(families, key=lambda fam: fam.sort_key)

    def test_sorted_by_m_then_l(self):
        text = emit_report(sample_families(), 'csv')
        rows = text.splitlines()[1:]
        assert [row.split(',')[:2] for row in rows] == [['5', '3'], ['5', '19'], ['13', '1811']]

    def test_empty_csv_is_the_header(self):
        assert emit_report([], 'csv') == ','.join(FAMILY_FIELDS) + '\n'

    def test_csv_rows_of_exponent_three_families(self):
        ells = [r['ell'] for r in read_table('table1.csv') if r['m'] == 19]
        families = []
        for ell in reversed(ells):
            cls = classify_eigenvalue(19, ell)
            families.append(CongruenceFamily(m=19, ell=ell, exponent=cls.exponent,
                                             epsilon=cls.epsilon, eigenvalue=cls.eigenvalue))
        rows = emit_report(families, 'csv').splitlines()[1:]
        assert [row.split(',')[:4] for row in rows] == [['19', str(ell), '3', '0'] for ell in sorted(ells)]
        assert rows[0].startswith('19,151,3,0,')

    def test_json_of_twisted_family(self):
        # 2207 has T(l^2) eigenvalue eps * l^((k-3)/2) with eps = -1 mod 19
        eigenvalue = -pow(2207, 7, 19) % 19
        cls = classify_eigenvalue(19, 2207, eigenvalue)
        family = CongruenceFamily(m=19, ell=2207, exponent=cls.exponent, epsilon=cls.epsilon,
                                  eigenvalue=eigenvalue, status='verified', verified_bound=17)
        record = json.loads(emit_report([family], 'json'))[0]
        assert record['epsilon'] == -1
        assert record['exponent'] == 2
        assert record['eigenvalue'] == 17

    def test_text_table(self):
        text = emit_report(sample_families(), 'text')
        assert text.splitlines()[-1] == '3 families'
        assert 'candidate' in text

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            emit_report(sample_families(), 'xml')
        with pytest.raises(ValueError):
            parse_families('', 'text')


class TestVerificationReports:
    def test_pass_line(self):
        report = VerificationReport(subject='f|U(7) = g_7', status='pass', checked_range=(0, 5),
                                    modulus=7)
        assert emit_report(report, 'text') == '✅ PASS f|U(7) = g_7 (mod 7) for 0 <= n <= 5\n'

    def test_fail_line(self):
        report = VerificationReport(subject='f|U(7) = g_7', status='fail', checked_range=(0, 5),
                                    modulus=7, witness=2)
        assert emit_report(report, 'text') == '❌ FAIL f|U(7) = g_7 (mod 7) at n = 2\n'

    def test_csv_and_json(self):
        reports = [
            VerificationReport(subject='a', status='pass', checked_range=(0, 9), modulus=11),
            VerificationReport(subject='b', status='fail', checked_range=(1, 4), modulus=5, witness=3),
        ]
        assert emit_report(reports, 'csv').splitlines() == [
            'subject,status,lo,hi,modulus,witness',
            'a,pass,0,9,11,',
            'b,fail,1,4,5,3',
        ]
        records = json.loads(emit_report(reports, 'json'))
        assert records[1]['witness'] == 3
        assert records[0]['checked_range'] == [0, 9]
