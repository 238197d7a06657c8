"""
Command-line front end
Subcommands for expansions, verifications and family searches;
exit code 0 when everything passes, 1 on a failed check or runtime error,
2 on a usage error
"""

import argparse
import json
import sys
from fractions import Fraction
from typing import List, Optional

from pydantic import ValidationError

from .certificates import CertificateStore
from .config import CliConfig, load_config
from .congruence import (CongruenceFamily, PreconditionError, UnsupportedPrimeError,
                         admissible_n, certificate, compute_hm_prime, prime_params,
                         search_families, verify_family_spotcheck, verify_g11,
                         verify_gm_congruence)
from .eisenstein import EisensteinSpecError, EisSpec, eis_series
from .hecke import HeckePreconditionError, SturmQuery, sturm_bound
from .qseries import (ZZ, EtaQuotient, EtaQuotientError, cusp_orders, eta_quotient_metadata,
                      eta_quotient_series, overpartition_series)
from .reports import FORMATS, emit_report

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

USAGE_ERRORS = (EtaQuotientError, UnsupportedPrimeError, PreconditionError, EisensteinSpecError,
                HeckePreconditionError, ValidationError)


def _emit(text: str):
    sys.stdout.write(text)
    sys.stdout.flush()


def _plain(value):
    # integral Fractions print as ints, the rest as "p/q"
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    return int(value)


def _emit_values(name: str, values: List, fmt: str, extra: Optional[dict] = None):
    values = [_plain(v) for v in values]
    if fmt == 'json':
        payload = dict(extra or {})
        payload['coefficients'] = values
        _emit(json.dumps(payload, indent=2) + '\n')
    elif fmt == 'csv':
        _emit('n,value\n' + ''.join(f"{n},{v}\n" for n, v in enumerate(values)))
    else:
        for key, value in (extra or {}).items():
            _emit(f"{key}: {value}\n")
        _emit(''.join(f"{name}({n}) = {v}\n" for n, v in enumerate(values)))


def cmd_overpartition(args, config: CliConfig) -> int:
    cache_dir = config.cache_dir if args.mod else None
    series = overpartition_series(args.n, args.mod, cache_dir, config.memory_cap_mb)
    extra = {'modulus': args.mod} if args.mod else {}
    _emit_values('pbar', series.tolist(), config.output_format, extra)
    return EXIT_PASS


def cmd_eta(args, config: CliConfig) -> int:
    quotient = EtaQuotient.parse(args.spec)
    meta = eta_quotient_metadata(quotient)
    level = args.level or meta.level
    orders = cusp_orders(quotient, level)
    series = eta_quotient_series(quotient, args.terms, ZZ)
    extra = {
        'spec': str(quotient),
        'weight': str(meta.weight),
        'level': meta.level,
        'character': meta.character_m,
        'cusp_orders': {str(c): str(order) for c, _, order in orders},
    }
    _emit_values('eta', series.tolist(), config.output_format, extra)
    return EXIT_PASS


def cmd_eisenstein(args, config: CliConfig) -> int:
    spec = EisSpec(args.k, args.N, args.primed)
    series = eis_series(spec, args.terms)
    _emit_values('a', series.tolist(), config.output_format, {'series': spec.label})
    return EXIT_PASS


def _report_exit(report, config: CliConfig) -> int:
    _emit(emit_report(report, config.output_format))
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_verify_gm(args, config: CliConfig) -> int:
    params = prime_params(args.m, config.hm_config, config.enable_m23)
    report = verify_gm_congruence(args.m, params, config.cache_dir, config.memory_cap_mb)
    return _report_exit(report, config)


def cmd_verify_g11(args, config: CliConfig) -> int:
    return _report_exit(verify_g11(), config)


def cmd_search(args, config: CliConfig) -> int:
    params = prime_params(args.m, config.hm_config, config.enable_m23)
    lmax = args.lmax or config.lmax
    store = CertificateStore(args.certificates) if args.certificates else None
    run_id = store.log_run_start('search', args.m, lmax) if store else None
    try:
        families = search_families(args.m, lmax, args.verify, config.index_cap,
                                   config.memory_cap_mb, config.cache_dir, config.workers,
                                   params=params)
        if store:
            store.store_certificates([certificate(fam, config.cache_dir) for fam in families])
            verified = sum(1 for fam in families if fam.status == 'verified')
            store.log_run_complete(run_id, len(families), verified)
    except Exception as e:
        if store:
            store.log_run_error(run_id, str(e))
        raise
    finally:
        if store:
            store.close()
    _emit(emit_report(families, config.output_format))
    return EXIT_FAIL if any(fam.status == 'failed' for fam in families) else EXIT_PASS


def cmd_spotcheck(args, config: CliConfig) -> int:
    family = CongruenceFamily(m=args.m, ell=args.ell, exponent=args.exp,
                              epsilon=args.eps if args.exp == 2 else 0)
    n_list = admissible_n(family, args.count)
    report = verify_family_spotcheck(family, n_list, config.cache_dir, config.index_cap,
                                     config.memory_cap_mb)
    return _report_exit(report, config)


def cmd_sturm(args, config: CliConfig) -> int:
    _emit(f"{sturm_bound(SturmQuery(args.k, args.level))}\n")
    return EXIT_PASS


def cmd_hm_prime(args, config: CliConfig) -> int:
    series = compute_hm_prime(args.m, args.terms)
    _emit_values("h'", series.tolist(), config.output_format, {'m': args.m})
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=FORMATS, help='output format (default: OPC_OUTPUT_FORMAT or text)')
    common.add_argument('--cache-dir', help='residue cache directory (default: OPC_CACHE_DIR)')
    common.add_argument('--index-cap', type=int, help='largest overpartition index to compute')
    common.add_argument('--memory-cap-mb', type=int, help='memory cap for one overpartition build')
    common.add_argument('--workers', type=int, help='worker threads for searches')

    parser = argparse.ArgumentParser(prog='overpartitions',
                                     description='Overpartition congruence toolkit')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('overpartition', parents=[common], help='overpartition numbers')
    p.add_argument('--n', type=int, required=True, help='number of terms')
    p.add_argument('--mod', type=int, help='reduce modulo this prime')
    p.set_defaults(handler=cmd_overpartition)

    p = sub.add_parser('eta', parents=[common], help='eta-quotient expansion and metadata')
    p.add_argument('--spec', required=True, help='"delta:r,delta:r,..."')
    p.add_argument('--terms', type=int, default=20)
    p.add_argument('--level', type=int, help='level for cusp orders (default: the quotient level)')
    p.set_defaults(handler=cmd_eta)

    p = sub.add_parser('eisenstein', parents=[common], help='half-integral weight Eisenstein series')
    p.add_argument('--k', type=int, required=True)
    p.add_argument('--N', type=int, choices=(4, 8), required=True)
    p.add_argument('--primed', action='store_true')
    p.add_argument('--terms', type=int, default=20)
    p.set_defaults(handler=cmd_eisenstein)

    p = sub.add_parser('verify-gm', parents=[common], help='certify f|U(m) = g_m mod m')
    p.add_argument('--m', type=int, required=True)
    p.set_defaults(handler=cmd_verify_gm)

    p = sub.add_parser('verify-g11', parents=[common], help='g_11 against its Eisenstein combination')
    p.set_defaults(handler=cmd_verify_g11)

    p = sub.add_parser('search', parents=[common], help='search congruence families')
    p.add_argument('--m', type=int, required=True)
    p.add_argument('--lmax', type=int)
    p.add_argument('--verify', action='store_true')
    p.add_argument('--certificates', help='sqlite ledger to store certificates in')
    p.set_defaults(handler=cmd_search)

    p = sub.add_parser('spotcheck', parents=[common], help='check pbar(m l^e n) = 0 mod m directly')
    p.add_argument('--m', type=int, required=True)
    p.add_argument('--ell', type=int, required=True)
    p.add_argument('--exp', type=int, choices=(2, 3), required=True)
    p.add_argument('--eps', type=int, choices=(-1, 1))
    p.add_argument('--count', type=int, default=5)
    p.set_defaults(handler=cmd_spotcheck)

    p = sub.add_parser('sturm', parents=[common], help='Sturm bound for weight k/2')
    p.add_argument('--k', type=int, required=True, help='weight numerator (weight k/2)')
    p.add_argument('--level', type=int, required=True)
    p.set_defaults(handler=cmd_sturm)

    p = sub.add_parser('hm-prime', parents=[common], help="the form h'_m")
    p.add_argument('--m', type=int, required=True)
    p.add_argument('--terms', type=int, default=10)
    p.set_defaults(handler=cmd_hm_prime)

    return parser


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PASS if e.code == 0 else EXIT_USAGE

    if args.command == 'spotcheck' and args.exp == 2 and args.eps is None:
        print("❌ --eps is required for exponent 2 families", file=sys.stderr)
        return EXIT_USAGE

    try:
        config = load_config(cache_dir=args.cache_dir, index_cap=args.index_cap,
                             output_format=args.format, memory_cap_mb=args.memory_cap_mb,
                             workers=args.workers)
    except ValidationError as e:
        print(f"❌ Invalid configuration: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        return args.handler(args, config)
    except USAGE_ERRORS as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        print(f"❌ {args.command} failed: {e}", file=sys.stderr)
        return EXIT_FAIL


def main() -> int:
    return run(sys.argv[1:])
