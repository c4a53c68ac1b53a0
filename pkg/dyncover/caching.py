"""Utilities for caching oracle results."""

from collections.abc import Hashable
from typing import TypeVar, Generic, Callable, Iterator


KT = TypeVar('KT', bound=Hashable)
VT = TypeVar('VT')


class LRUCache(Generic[KT, VT]):
    """A least recently used cache with hit and miss counters.

    Relies on dicts keeping insertion order: the first key is the least
    recently used one.
    """

    def __init__(self, maxsize=1024):
        # type: (int) -> None
        if maxsize <= 0:
            raise ValueError(f'maxsize must be > 0, but got {maxsize}')
        self.max_size = maxsize
        self.hits = 0
        self.misses = 0
        self._entries = {} # type: dict[KT, VT]

    def __len__(self):
        # type: () -> int
        return len(self._entries)

    def __contains__(self, key):
        # type: (KT) -> bool
        return key in self._entries

    def __getitem__(self, key):
        # type: (KT) -> VT
        value = self._entries.pop(key)
        self._entries[key] = value
        return value

    def __setitem__(self, key, value):
        # type: (KT, VT) -> None
        self._entries.pop(key, None)
        self._entries[key] = value
        if len(self._entries) > self.max_size:
            del self._entries[next(iter(self._entries))]

    def items(self):
        # type: () -> Iterator[tuple[KT, VT]]
        """Get the items in the cache, most recently used first."""
        yield from reversed(self._entries.items())

    def clear(self):
        # type: () -> None
        """Clear the cache and its counters."""
        self._entries.clear()
        self.hits = 0
        self.misses = 0

    def get_or_compute(self, key, compute):
        # type: (KT, Callable[[], VT]) -> VT
        """Get a cached value, computing and storing it on a miss."""
        if key in self._entries:
            self.hits += 1
            return self[key]
        self.misses += 1
        value = compute()
        self[key] = value
        return value
