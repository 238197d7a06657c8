import numpy as np
import pytest

from overpartitions.qseries import overpartition_series
from overpartitions.residue_cache import (HEADER, MAGIC, CacheFormatError, cache_content_hash,
                                          cache_file_name, find_cache_file, load_residues,
                                          read_cache_file, save_residues, write_cache_file)


def test_file_layout(tmp_path):
    path = tmp_path / 'residues.opc'
    write_cache_file(path, 7, np.array([1, 2, 4, 1, 0]))
    raw = path.read_bytes()
    assert raw[:4] == MAGIC
    assert raw[4:12] == (7).to_bytes(8, 'little')
    assert raw[12:20] == (5).to_bytes(8, 'little')
    assert raw[HEADER.size:] == bytes([1, 2, 4, 1, 0])


def test_read_back_with_limit(tmp_path):
    path = tmp_path / 'residues.opc'
    write_cache_file(path, 5, np.array([1, 2, 4, 3, 4, 4]))
    m, residues = read_cache_file(path, limit=3)
    assert m == 5
    assert residues.tolist() == [1, 2, 4]


def test_rejects_wide_moduli_and_bad_residues(tmp_path):
    with pytest.raises(CacheFormatError):
        write_cache_file(tmp_path / 'x.opc', 1009, np.array([1]))
    with pytest.raises(CacheFormatError):
        write_cache_file(tmp_path / 'x.opc', 5, np.array([5]))


def test_detects_corruption(tmp_path):
    path = tmp_path / 'bad.opc'
    path.write_bytes(b'XXXX' + bytes(16))
    with pytest.raises(CacheFormatError):
        read_cache_file(path)
    path.write_bytes(HEADER.pack(MAGIC, 5, 10) + bytes(3))
    with pytest.raises(CacheFormatError):
        read_cache_file(path)
    path.write_bytes(HEADER.pack(MAGIC, 5, 2) + bytes([1, 9]))
    with pytest.raises(CacheFormatError):
        read_cache_file(path)


def test_finds_smallest_sufficient_file(cache_dir):
    save_residues(cache_dir, 7, np.zeros(50, dtype=np.int64))
    save_residues(cache_dir, 7, np.zeros(200, dtype=np.int64))
    save_residues(cache_dir, 5, np.zeros(500, dtype=np.int64))
    assert find_cache_file(cache_dir, 7, 40).name == cache_file_name(7, 50)
    assert find_cache_file(cache_dir, 7, 100).name == cache_file_name(7, 200)
    assert find_cache_file(cache_dir, 7, 201) is None
    assert load_residues(cache_dir, 7, 120).tolist() == [0] * 120


def test_skips_unreadable_files(cache_dir):
    (cache_dir / cache_file_name(7, 999)).write_bytes(b'OPC')
    save_residues(cache_dir, 7, np.zeros(10, dtype=np.int64))
    assert find_cache_file(cache_dir, 7, 10).name == cache_file_name(7, 10)


def test_missing_directory(tmp_path):
    assert find_cache_file(tmp_path / 'nowhere', 7, 1) is None
    assert cache_content_hash(None, 7, 1) is None


def test_overpartition_series_writes_and_reuses_the_cache(cache_dir, fresh_cache):
    first = overpartition_series(300, 11, cache_dir)
    path = find_cache_file(cache_dir, 11, 300)
    assert path is not None
    digest = cache_content_hash(cache_dir, 11, 300)
    assert len(digest) == 64

    fresh = overpartition_series(300, 11)
    assert first.tolist() == fresh.tolist()

    # a shorter request is served from the same file
    assert overpartition_series(120, 11, cache_dir).tolist() == first.tolist()[:120]
    assert cache_content_hash(cache_dir, 11, 120) == digest
