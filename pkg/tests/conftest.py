import csv
from functools import lru_cache
from pathlib import Path

import pytest

from overpartitions.arith import kronecker
from overpartitions.cache_setup import clear_cache

DATA_DIR = Path(__file__).resolve().parent.parent / 'data'


def enumerate_overpartitions(n: int, largest: int = None):
    """Every overpartition of n as a tuple of (part, overlined), parts non-increasing"""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for part in range(min(n, largest), 0, -1):
        for count in range(1, n // part + 1):
            for rest in enumerate_overpartitions(n - part * count, part - 1):
                # the first occurrence of a part may be overlined
                plain = ((part, False),) * count
                marked = ((part, True),) + ((part, False),) * (count - 1)
                yield plain + rest
                yield marked + rest


@lru_cache(maxsize=None)
def count_overpartitions(n: int, largest: int) -> int:
    """Same recursion as enumerate_overpartitions, counting instead of listing"""
    if n == 0:
        return 1
    total = 0
    for part in range(min(n, largest), 0, -1):
        for count in range(1, n // part + 1):
            total += 2 * count_overpartitions(n - part * count, part - 1)
    return total


def overpartition_oracle(n: int) -> int:
    return count_overpartitions(n, n)


def twisted_cusp_residues(m: int, k: int, ell: int, bound: int, eigenvalue: int):
    """
    Residues mod m with a(0) = 1 whose coefficients 1..bound are a T(l^2)
    eigenvector with the given eigenvalue; needs l^2 > bound
    """
    lam = (k - 1) // 2
    middle = pow(ell, lam - 1, m)
    residues = [0] * (ell * ell * bound + 1)
    residues[0] = 1
    for n in range(1, bound + 1):
        residues[n] = n % m or 1
        chi = kronecker((-1) ** lam * n, ell)
        residues[ell * ell * n] = (eigenvalue - chi * middle) * residues[n] % m
    return residues


def read_table(name: str):
    with open(DATA_DIR / name, newline='') as f:
        return [{key: int(value) for key, value in row.items()} for row in csv.DictReader(f)]


@pytest.fixture(autouse=True)
def isolated_env(tmp_path, monkeypatch):
    """Keep every cache file and ledger inside the test's tmp dir"""
    for var in ('OPC_INDEX_CAP', 'OPC_OUTPUT_FORMAT', 'OPC_LMAX', 'OPC_MEMORY_CAP_MB',
                'OPC_WORKERS', 'OPC_HM_CONFIG', 'OPC_ENABLE_M23'):
        monkeypatch.delenv(var, raising=False)
    monkeypatch.setenv('OPC_CACHE_DIR', str(tmp_path / 'opc_cache'))
    monkeypatch.setenv('OPC_CERT_DB', str(tmp_path / 'certificates.db'))
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def fresh_cache():
    clear_cache()
    yield
    clear_cache()


@pytest.fixture
def cache_dir(tmp_path):
    path = tmp_path / 'residues'
    path.mkdir()
    return path
