"""
Report serialization for the command-line tools
Deterministic csv/json/text output of verification reports and family lists
"""

import csv
import io
import json
from typing import List, Sequence, Union

from .congruence import CongruenceFamily, VerificationReport

FORMATS = ('json', 'csv', 'text')

FAMILY_FIELDS = ['m', 'ell', 'exponent', 'epsilon', 'eigenvalue', 'status',
                 'verified_bound', 'spot_checks']
REPORT_FIELDS = ['subject', 'status', 'lo', 'hi', 'modulus', 'witness']

Reportable = Union[VerificationReport, Sequence[VerificationReport], Sequence[CongruenceFamily]]


def _encode_spot_checks(pairs) -> str:
    return ';'.join(f"{n}:{r}" for n, r in pairs)


def _decode_spot_checks(text: str):
    if not text:
        return []
    return [tuple(int(x) for x in pair.split(':')) for pair in text.split(';')]


def _optional_int(text: str):
    return int(text) if text not in ('', None) else None


def _sorted_families(families: Sequence[CongruenceFamily]) -> List[CongruenceFamily]:
    return sorted(families, key=lambda fam: fam.sort_key)


def emit_families(families: Sequence[CongruenceFamily], fmt: str) -> str:
    families = _sorted_families(families)
    if fmt == 'json':
        return json.dumps([fam.model_dump(mode='json') for fam in families], indent=2) + '\n'
    if fmt == 'csv':
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(FAMILY_FIELDS)
        for fam in families:
            writer.writerow([fam.m, fam.ell, fam.exponent, fam.epsilon,
                             '' if fam.eigenvalue is None else fam.eigenvalue, fam.status,
                             '' if fam.verified_bound is None else fam.verified_bound,
                             _encode_spot_checks(fam.spot_checks)])
        return buffer.getvalue()
    lines = [f"{'m':>3} {'l':>6} {'e':>2} {'eps':>4} {'lambda':>7}  status"]
    for fam in families:
        eigen = '-' if fam.eigenvalue is None else fam.eigenvalue
        lines.append(f"{fam.m:>3} {fam.ell:>6} {fam.exponent:>2} {fam.epsilon:>4} {eigen:>7}  {fam.status}")
    lines.append(f"{len(families)} families")
    return '\n'.join(lines) + '\n'


def emit_reports(reports: Sequence[VerificationReport], fmt: str) -> str:
    if fmt == 'json':
        return json.dumps([r.model_dump(mode='json') for r in reports], indent=2) + '\n'
    if fmt == 'csv':
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(REPORT_FIELDS)
        for r in reports:
            writer.writerow([r.subject, r.status, r.checked_range[0], r.checked_range[1], r.modulus,
                             '' if r.witness is None else r.witness])
        return buffer.getvalue()
    lines = []
    for r in reports:
        lo, hi = r.checked_range
        if r.passed:
            lines.append(f"✅ PASS {r.subject} (mod {r.modulus}) for {lo} <= n <= {hi}")
        else:
            lines.append(f"❌ FAIL {r.subject} (mod {r.modulus}) at n = {r.witness}")
    return '\n'.join(lines) + '\n'


def emit_report(obj: Reportable, fmt: str) -> str:
    """Serialize a report, a list of reports or a family list"""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    if isinstance(obj, VerificationReport):
        return emit_reports([obj], fmt)
    items = list(obj)
    if items and isinstance(items[0], VerificationReport):
        return emit_reports(items, fmt)
    return emit_families(items, fmt)


def parse_families(text: str, fmt: str) -> List[CongruenceFamily]:
    """Inverse of emit_families for json and csv"""
    if fmt == 'json':
        return [CongruenceFamily.model_validate(item) for item in json.loads(text)]
    if fmt != 'csv':
        raise ValueError(f"cannot parse families from {fmt!r}")
    families = []
    for row in csv.DictReader(io.StringIO(text)):
        families.append(CongruenceFamily(
            m=int(row['m']), ell=int(row['ell']), exponent=int(row['exponent']),
            epsilon=int(row['epsilon']), eigenvalue=_optional_int(row['eigenvalue']),
            status=row['status'], verified_bound=_optional_int(row['verified_bound']),
            spot_checks=_decode_spot_checks(row['spot_checks'])))
    return families
