#!/usr/bin/env python3
"""
Generate congruence family certificates
Runs the family search for each supported prime and stores the results
in the certificate ledger and as JSON documents
"""

import argparse
import json
import sys
from pathlib import Path

from overpartitions.certificates import CertificateStore
from overpartitions.config import load_config
from overpartitions.congruence import H_M_TABLE, certificate, prime_params, search_families


def generate(m: int, config, store: CertificateStore, verify: bool, out_dir: Path) -> int:
    run_id = store.log_run_start('certificates', m, config.lmax)
    try:
        params = prime_params(m, config.hm_config, config.enable_m23)
        families = search_families(m, config.lmax, verify, config.index_cap, config.memory_cap_mb,
                                   config.cache_dir, config.workers, params=params)
        certificates = [certificate(fam, config.cache_dir) for fam in families]
        store.store_certificates(certificates)

        out_file = out_dir / f"families_m{m}.json"
        with open(out_file, 'w') as f:
            json.dump([cert.model_dump(mode='json') for cert in certificates], f, indent=2)

        verified = sum(1 for fam in families if fam.status in ('proved', 'verified'))
        store.log_run_complete(run_id, len(families), verified)
        print(f"💾 m={m}: {len(families)} families written to {out_file}", file=sys.stderr)
        return len(families)
    except Exception as e:
        store.log_run_error(run_id, str(e))
        raise


def main(argv=None):
    parser = argparse.ArgumentParser(description="Write congruence family certificates")
    parser.add_argument('moduli', nargs='*', type=int, default=sorted(H_M_TABLE))
    parser.add_argument('--verify', action='store_true', help='measure eigenvalues where feasible')
    parser.add_argument('--out-dir', default='certificates')
    args = parser.parse_args(argv)

    config = load_config()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    store = CertificateStore(config.cert_db)

    try:
        for m in args.moduli:
            generate(m, config, store, args.verify, out_dir)
        print("✅ Certificates generated successfully", file=sys.stderr)
        return 0
    except Exception as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return 1
    finally:
        store.close()


if __name__ == "__main__":
    exit(main())
