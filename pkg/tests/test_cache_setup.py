import threading

import numpy as np

from overpartitions.cache_setup import (CACHE_BYTE_LIMITS, CACHE_LIMITS, clear_cache, get_cache_stats,
                                        memoized)


def test_hits_and_misses(fresh_cache):
    calls = []

    @memoized('eta')
    def build(n):
        calls.append(n)
        return n * n

    assert build(3) == 9
    assert build(3) == 9
    assert calls == [3]
    stats = get_cache_stats()
    assert (stats['hits'], stats['misses']) == (1, 1)
    assert stats['cache_entries'][0]['kind'] == 'eta'


def test_never_kind_skips_the_cache(fresh_cache):
    calls = []

    @memoized('never')
    def build(n):
        calls.append(n)
        return n

    build(1)
    build(1)
    assert calls == [1, 1]
    assert CACHE_LIMITS['never'] == 0


def test_bounded_kind_evicts_oldest(fresh_cache):
    @memoized('overpartition')
    def build(n):
        return n

    for n in range(CACHE_LIMITS['overpartition'] + 2):
        build(n)
    entries = [e for e in get_cache_stats()['cache_entries'] if e['kind'] == 'overpartition']
    assert len(entries) == CACHE_LIMITS['overpartition']
    assert entries[0]['args'] == repr((2,))


def test_bounded_kind_respects_byte_budget(fresh_cache, monkeypatch):
    monkeypatch.setitem(CACHE_BYTE_LIMITS, 'overpartition', 1500)

    @memoized('overpartition')
    def build(n):
        return np.zeros(100 * n, dtype=np.uint8)

    def kept():
        return [e['args'] for e in get_cache_stats()['cache_entries'] if e['kind'] == 'overpartition']

    build(10)
    build(8)
    assert kept() == [repr((8,))]
    # an entry over the budget on its own still stays
    build(20)
    assert kept() == [repr((20,))]
    assert len(build(20)) == 2000


def test_concurrent_callers_build_once(fresh_cache):
    calls = []
    started = threading.Event()

    @memoized('level2')
    def build(n):
        calls.append(n)
        started.wait(1)
        return n

    threads = [threading.Thread(target=build, args=(5,)) for _ in range(4)]
    for t in threads:
        t.start()
    started.set()
    for t in threads:
        t.join()
    assert calls == [5]


def test_clear(fresh_cache):
    @memoized('eisenstein')
    def build(n):
        return n

    build(1)
    clear_cache()
    assert get_cache_stats()['total_entries'] == 0
