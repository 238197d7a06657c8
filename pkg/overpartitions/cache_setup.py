"""
In-process caching for series builds
Caching strategy by kind of object:

Bounded (few large entries):
- overpartition (residue arrays, up to hundreds of MB each; capped by entries and bytes)

Keep (many small entries):
- eta (eta-quotient expansions)
- eisenstein (half-integral weight Eisenstein series)
- level2 (E_k, D_2, Delta_2 and their monomials)

No cache:
- never (always rebuilt)
"""

import sys
import threading
import time
from collections import OrderedDict
from functools import wraps

# Global cache storage: key -> (value, built_at)
cache_storage = OrderedDict()
_cache_lock = threading.RLock()
_key_locks = {}

# Max entries kept per kind (None = unbounded, 0 = no cache)
CACHE_LIMITS = {
    'overpartition': 2,
    'eta': None,
    'eisenstein': None,
    'level2': None,
    'never': 0,
}

# Max total bytes kept per kind; the newest entry always stays
CACHE_BYTE_LIMITS = {
    'overpartition': 1 << 30,
}

# Kinds whose misses are worth a status line
ANNOUNCED_KINDS = {'overpartition'}

_stats = {'hits': 0, 'misses': 0}


def get_cache_limit(kind):
    """Get the entry limit for a cache kind"""
    return CACHE_LIMITS.get(kind, None)


def _size(value):
    """Bytes held by an array or a series wrapping one"""
    return getattr(getattr(value, 'coeffs', value), 'nbytes', 0)


def _evict(kind, limit, byte_limit=None):
    keys = [k for k in cache_storage if k[0] == kind]
    while limit is not None and len(keys) > limit:
        cache_storage.pop(keys.pop(0), None)
    while byte_limit is not None and len(keys) > 1 and \
            sum(_size(cache_storage[k][0]) for k in keys) > byte_limit:
        cache_storage.pop(keys.pop(0), None)


def memoized(kind):
    """Decorator to cache a pure builder function by its arguments"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            limit = get_cache_limit(kind)
            if limit == 0:
                return func(*args, **kwargs)

            cache_key = (kind, func.__qualname__, args, tuple(sorted(kwargs.items())))

            with _cache_lock:
                if cache_key in cache_storage:
                    _stats['hits'] += 1
                    cache_storage.move_to_end(cache_key)
                    return cache_storage[cache_key][0]
                key_lock = _key_locks.setdefault(cache_key, threading.Lock())

            # one builder per key; concurrent callers wait for it
            with key_lock:
                with _cache_lock:
                    if cache_key in cache_storage:
                        _stats['hits'] += 1
                        return cache_storage[cache_key][0]
                    _stats['misses'] += 1

                if kind in ANNOUNCED_KINDS:
                    print(f"🆕 Cache MISS for {func.__name__}{args} - building", file=sys.stderr)
                result = func(*args, **kwargs)

                with _cache_lock:
                    cache_storage[cache_key] = (result, time.time())
                    _evict(kind, limit, CACHE_BYTE_LIMITS.get(kind))
                    _key_locks.pop(cache_key, None)
            return result
        return wrapper
    return decorator


def get_cache_stats():
    """Get cache statistics"""
    current_time = time.time()
    with _cache_lock:
        stats = {
            'total_entries': len(cache_storage),
            'hits': _stats['hits'],
            'misses': _stats['misses'],
            'cache_entries': []
        }
        for (kind, name, args, _), (_, built_at) in cache_storage.items():
            stats['cache_entries'].append({
                'kind': kind,
                'builder': name,
                'args': repr(args),
                'age_seconds': int(current_time - built_at),
            })
    return stats


def clear_cache():
    """Clear all cache entries"""
    with _cache_lock:
        cache_storage.clear()
        _stats['hits'] = 0
        _stats['misses'] = 0
    print("🗑️ Cache cleared", file=sys.stderr)
