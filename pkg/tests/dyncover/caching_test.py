"""Tests for caching.py."""

from dyncover.caching import LRUCache


def assert_lrucache_contents(cache, expected):
    # type: (LRUCache[int, int], tuple[tuple[int, int], ...]) -> None
    """Assert that the LRUCache has the correct contents, most recent first."""
    assert len(cache) == len(expected)
    assert tuple(cache.items()) == expected


def test_lrucache():
    # type: () -> None
    """Test the LRUCache eviction order."""
    try:
        LRUCache(0)
        assert False
    except ValueError:
        pass
    cache = LRUCache(3) # type: LRUCache[int, int]
    assert_lrucache_contents(cache, ())
    cache[0] = 0
    cache[1] = 1
    cache[2] = 4
    assert_lrucache_contents(cache, ((2, 4), (1, 1), (0, 0)))
    assert cache[0] == 0
    assert_lrucache_contents(cache, ((0, 0), (2, 4), (1, 1)))
    cache[3] = 9
    assert_lrucache_contents(cache, ((3, 9), (0, 0), (2, 4)))
    assert 1 not in cache
    cache[2] = 5
    assert_lrucache_contents(cache, ((2, 5), (3, 9), (0, 0)))
    try:
        cache[1] # pylint: disable = pointless-statement
        assert False
    except KeyError:
        pass
    cache.clear()
    assert_lrucache_contents(cache, ())


def test_get_or_compute():
    # type: () -> None
    """Test that get_or_compute only computes on a miss."""
    calls = []

    def compute(key):
        # type: (frozenset[int]) -> int
        calls.append(key)
        return sum(key)

    cache = LRUCache(2) # type: LRUCache[frozenset[int], int]
    key1 = frozenset([1, 2])
    key2 = frozenset([3])
    key3 = frozenset([4, 5])
    assert cache.get_or_compute(key1, (lambda: compute(key1))) == 3
    assert cache.get_or_compute(key1, (lambda: compute(key1))) == 3
    assert (cache.hits, cache.misses) == (1, 1)
    assert cache.get_or_compute(key2, (lambda: compute(key2))) == 3
    assert cache.get_or_compute(key3, (lambda: compute(key3))) == 9
    assert key1 not in cache
    assert cache.get_or_compute(key1, (lambda: compute(key1))) == 3
    assert calls == [key1, key2, key3, key1]
    assert (cache.hits, cache.misses) == (1, 4)
    cache.clear()
    assert (cache.hits, cache.misses) == (0, 0)
