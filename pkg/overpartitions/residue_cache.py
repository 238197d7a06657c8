"""
On-disk overpartition residue cache
File layout: b"OPC1", little-endian u64 m, u64 Nmax, then Nmax residue bytes
"""

import hashlib
import struct
import sys
from pathlib import Path
from typing import Optional, Union

import numpy as np

MAGIC = b"OPC1"
HEADER = struct.Struct("<4sQQ")

PathLike = Union[str, Path]


class CacheFormatError(ValueError):
    pass


def cache_file_name(m: int, nmax: int) -> str:
    return f"overpartitions_m{m}_n{nmax}.opc"


def write_cache_file(path: PathLike, m: int, residues: np.ndarray):
    """Write residues mod m (m < 256) in OPC1 layout"""
    if not 2 <= m < 256:
        raise CacheFormatError(f"residue cache holds one byte per residue; m={m} does not fit")
    data = np.asarray(residues, dtype=np.int64)
    if len(data) and (data.min() < 0 or data.max() >= m):
        raise CacheFormatError(f"residues out of range for m={m}")
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, m, len(data)))
        fh.write(data.astype(np.uint8).tobytes())
    tmp.replace(path)


def read_cache_file(path: PathLike, limit: Optional[int] = None):
    """Return (m, residues) from an OPC1 file; residues truncated to limit"""
    with open(path, "rb") as fh:
        header = fh.read(HEADER.size)
        if len(header) != HEADER.size:
            raise CacheFormatError(f"{path}: truncated header")
        magic, m, nmax = HEADER.unpack(header)
        if magic != MAGIC:
            raise CacheFormatError(f"{path}: bad magic {magic!r}")
        count = nmax if limit is None else min(limit, nmax)
        body = fh.read(count)
    if len(body) != count:
        raise CacheFormatError(f"{path}: expected {count} residues, found {len(body)}")
    residues = np.frombuffer(body, dtype=np.uint8).astype(np.int64)
    if count and residues.max() >= m:
        raise CacheFormatError(f"{path}: residue out of range for m={m}")
    return m, residues


def read_header(path: PathLike):
    with open(path, "rb") as fh:
        header = fh.read(HEADER.size)
    if len(header) != HEADER.size:
        raise CacheFormatError(f"{path}: truncated header")
    magic, m, nmax = HEADER.unpack(header)
    if magic != MAGIC:
        raise CacheFormatError(f"{path}: bad magic {magic!r}")
    return m, nmax


def find_cache_file(cache_dir: PathLike, m: int, nmax: int) -> Optional[Path]:
    """Smallest cache file for m holding at least nmax residues"""
    directory = Path(cache_dir)
    if not directory.is_dir():
        return None
    best = None
    for path in directory.glob(f"overpartitions_m{m}_n*.opc"):
        try:
            stored_m, stored_n = read_header(path)
        except (OSError, CacheFormatError) as e:
            print(f"⚠️ Skipping unreadable cache file {path.name}: {e}", file=sys.stderr)
            continue
        if stored_m == m and stored_n >= nmax and (best is None or stored_n < best[1]):
            best = (path, stored_n)
    return best[0] if best else None


def load_residues(cache_dir: PathLike, m: int, nmax: int) -> Optional[np.ndarray]:
    path = find_cache_file(cache_dir, m, nmax)
    if path is None:
        return None
    _, residues = read_cache_file(path, limit=nmax)
    return residues


def save_residues(cache_dir: PathLike, m: int, residues: np.ndarray) -> Path:
    directory = Path(cache_dir)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / cache_file_name(m, len(residues))
    write_cache_file(path, m, residues)
    print(f"💾 Saved {len(residues)} residues mod {m} to {path}", file=sys.stderr)
    return path


def file_sha256(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def cache_content_hash(cache_dir: Optional[PathLike], m: int, nmax: int) -> Optional[str]:
    """Content hash of the cache file that serves (m, nmax), if any"""
    if cache_dir is None:
        return None
    path = find_cache_file(cache_dir, m, nmax)
    return file_sha256(path) if path else None
