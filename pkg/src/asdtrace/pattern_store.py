"""Index sets and index-pair sets used to store sparsity patterns.

Three interchangeable :class:`IndexSet` backends are provided:

``"bitset"``
    Dense bit vector packed into a Python ``int``. Unions are a single
    bitwise OR; memory grows with the capacity.
``"sorted"``
    Sorted tuple of unique indices. Memory grows with the number of stored
    indices only.
``"vector"``
    Tuple that may hold duplicates. Unions are concatenations and
    de-duplication is deferred until the set is iterated or normalized.

Indices are 0-based: a set of capacity ``n`` holds indices in ``range(n)``.
"""
from __future__ import annotations

from contextlib import contextmanager
from typing import ClassVar, Iterable, Iterator

import numpy as np

__all__ = [
    "IndexSet",
    "BitIndexSet",
    "SortedIndexSet",
    "VectorIndexSet",
    "IndexPairSet",
    "BACKENDS",
    "default_backend",
    "get_backend",
    "singleton",
    "union",
    "pair_product",
    "pair_union",
    "union_counter",
]

# largest input dimension for which the bitset backend is picked by default
BITSET_MAX_CAPACITY = 1024


class UnionCounter:
    """Number of ``IndexSet.union`` calls made while the counter is active."""

    def __init__(self):
        self.count = 0


_active_counter: UnionCounter | None = None


@contextmanager
def union_counter():
    """Count every index-set union performed inside the ``with`` block.

    >>> with union_counter() as c:
    ...     _ = singleton(0, 3) | singleton(1, 3)
    >>> c.count
    1
    """
    global _active_counter
    previous = _active_counter
    counter = UnionCounter()
    _active_counter = counter
    try:
        yield counter
    finally:
        _active_counter = previous


def _check_index(j, n):
    if not 0 <= j < n:
        raise IndexError(f"index {j} out of range for capacity {n}")


class IndexSet:
    """Abstract sparse set of input indices with a fixed capacity."""

    __slots__ = ("capacity",)
    backend: ClassVar[str] = ""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = capacity

    # construction -------------------------------------------------------
    @classmethod
    def empty(cls, n: int) -> "IndexSet":
        raise NotImplementedError

    @classmethod
    def singleton(cls, j: int, n: int) -> "IndexSet":
        raise NotImplementedError

    @classmethod
    def from_indices(cls, indices: Iterable[int], n: int) -> "IndexSet":
        raise NotImplementedError

    # set algebra --------------------------------------------------------
    def union(self, other: "IndexSet") -> "IndexSet":
        """Set union. Both operands must share backend and capacity."""
        if _active_counter is not None:
            _active_counter.count += 1
        if type(other) is not type(self):
            raise TypeError(
                f"cannot union {self.backend!r} set with {getattr(other, 'backend', type(other).__name__)!r} set"
            )
        if other.capacity != self.capacity:
            raise ValueError(f"capacity mismatch: {self.capacity} vs {other.capacity}")
        return self._union(other)

    def __or__(self, other):
        return self.union(other)

    def _union(self, other):
        raise NotImplementedError

    def normalize(self) -> "IndexSet":
        """Return an equivalent set whose storage holds no duplicates."""
        return self

    def is_empty(self) -> bool:
        raise NotImplementedError

    def __iter__(self) -> Iterator[int]:
        raise NotImplementedError

    def __len__(self):
        return sum(1 for _ in self)

    def __contains__(self, j) -> bool:
        return j in set(self)

    def __bool__(self):
        return not self.is_empty()

    def to_array(self) -> np.ndarray:
        """Sorted unique indices as an ``int64`` array."""
        return np.fromiter(iter(self), dtype=np.int64)

    def __eq__(self, other):
        if isinstance(other, IndexSet):
            return self.capacity == other.capacity and list(self) == list(other)
        if isinstance(other, (set, frozenset)):
            return set(self) == other
        return NotImplemented

    def __hash__(self):
        return hash((self.capacity, tuple(self)))

    def __repr__(self):
        return f"{type(self).__name__}({list(self)}, n={self.capacity})"


class BitIndexSet(IndexSet):
    """Index set stored as the bits of an arbitrary-precision integer."""

    __slots__ = ("bits",)
    backend = "bitset"

    def __init__(self, bits: int, capacity: int):
        super().__init__(capacity)
        self.bits = bits

    @classmethod
    def empty(cls, n):
        return cls(0, n)

    @classmethod
    def singleton(cls, j, n):
        _check_index(j, n)
        return cls(1 << j, n)

    @classmethod
    def from_indices(cls, indices, n):
        bits = 0
        for j in indices:
            j = int(j)
            _check_index(j, n)
            bits |= 1 << j
        return cls(bits, n)

    def _union(self, other):
        if not other.bits:
            return self
        if not self.bits:
            return other
        return BitIndexSet(self.bits | other.bits, self.capacity)

    def is_empty(self):
        return self.bits == 0

    def __iter__(self):
        bits = self.bits
        while bits:
            low = bits & -bits
            yield low.bit_length() - 1
            bits ^= low

    def __len__(self):
        return self.bits.bit_count() if hasattr(int, "bit_count") else bin(self.bits).count("1")

    def __contains__(self, j):
        return 0 <= j < self.capacity and (self.bits >> j) & 1 == 1

    def __eq__(self, other):
        if isinstance(other, BitIndexSet):
            return self.capacity == other.capacity and self.bits == other.bits
        return super().__eq__(other)

    __hash__ = IndexSet.__hash__


class SortedIndexSet(IndexSet):
    """Index set stored as a sorted tuple of unique indices."""

    __slots__ = ("indices",)
    backend = "sorted"

    def __init__(self, indices: tuple, capacity: int):
        super().__init__(capacity)
        self.indices = indices

    @classmethod
    def empty(cls, n):
        return cls((), n)

    @classmethod
    def singleton(cls, j, n):
        _check_index(j, n)
        return cls((j,), n)

    @classmethod
    def from_indices(cls, indices, n):
        unique = sorted({int(j) for j in indices})
        for j in unique[:1] + unique[-1:]:
            _check_index(j, n)
        return cls(tuple(unique), n)

    def _union(self, other):
        if not other.indices or other.indices == self.indices:
            return self
        if not self.indices:
            return other
        return SortedIndexSet(tuple(sorted(set(self.indices).union(other.indices))), self.capacity)

    def is_empty(self):
        return not self.indices

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, j):
        return j in self.indices

    def to_array(self):
        return np.array(self.indices, dtype=np.int64)

    __hash__ = IndexSet.__hash__


class VectorIndexSet(IndexSet):
    """Index vector with duplicates allowed; unions concatenate."""

    __slots__ = ("indices",)
    backend = "vector"

    def __init__(self, indices: tuple, capacity: int):
        super().__init__(capacity)
        self.indices = indices

    @classmethod
    def empty(cls, n):
        return cls((), n)

    @classmethod
    def singleton(cls, j, n):
        _check_index(j, n)
        return cls((j,), n)

    @classmethod
    def from_indices(cls, indices, n):
        indices = tuple(int(j) for j in indices)
        for j in indices:
            _check_index(j, n)
        return cls(indices, n)

    def _union(self, other):
        if not other.indices:
            return self
        if not self.indices:
            return other
        return VectorIndexSet(self.indices + other.indices, self.capacity)

    def normalize(self):
        return VectorIndexSet(tuple(sorted(set(self.indices))), self.capacity)

    def is_empty(self):
        return not self.indices

    def __iter__(self):
        return iter(sorted(set(self.indices)))

    def __len__(self):
        return len(set(self.indices))

    def __contains__(self, j):
        return j in self.indices

    __hash__ = IndexSet.__hash__


BACKENDS: dict[str, type[IndexSet]] = {
    "bitset": BitIndexSet,
    "sorted": SortedIndexSet,
    "vector": VectorIndexSet,
}


def get_backend(backend: str | type[IndexSet] | None, n: int) -> type[IndexSet]:
    """Resolve a backend name (or ``None`` for the size-based default)."""
    if backend is None:
        return default_backend(n)
    if isinstance(backend, type) and issubclass(backend, IndexSet):
        return backend
    try:
        return BACKENDS[backend]
    except KeyError:
        raise ValueError(f"unknown index set backend {backend!r}; choose from {sorted(BACKENDS)}") from None


def default_backend(n: int) -> type[IndexSet]:
    """Bit vectors for small inputs, sorted index tuples beyond that."""
    return BitIndexSet if n <= BITSET_MAX_CAPACITY else SortedIndexSet


def singleton(j: int, n: int, backend: str | None = None) -> IndexSet:
    return get_backend(backend, n).singleton(j, n)


def union(a: IndexSet, b: IndexSet) -> IndexSet:
    return a.union(b)


class IndexPairSet:
    """Symmetric set of index pairs stored as a map from row to column set.

    Every pair ``(i, j)`` is stored together with ``(j, i)``. Instances are
    treated as immutable; operations return new objects.
    """

    __slots__ = ("rows", "capacity", "setcls")

    def __init__(self, rows: dict[int, IndexSet], capacity: int, setcls: type[IndexSet]):
        self.rows = rows
        self.capacity = capacity
        self.setcls = setcls

    @classmethod
    def empty(cls, n: int, backend=None) -> "IndexPairSet":
        return cls({}, n, get_backend(backend, n))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]], n: int, backend=None) -> "IndexPairSet":
        setcls = get_backend(backend, n)
        acc: dict[int, set] = {}
        for i, j in pairs:
            _check_index(i, n)
            _check_index(j, n)
            acc.setdefault(i, set()).add(j)
            acc.setdefault(j, set()).add(i)
        return cls({i: setcls.from_indices(js, n) for i, js in acc.items()}, n, setcls)

    def _check_compatible(self, other):
        if other.capacity != self.capacity:
            raise ValueError(f"capacity mismatch: {self.capacity} vs {other.capacity}")
        if other.setcls is not self.setcls:
            raise TypeError(f"backend mismatch: {self.setcls.backend} vs {other.setcls.backend}")

    def union(self, other: "IndexPairSet") -> "IndexPairSet":
        self._check_compatible(other)
        if not other.rows:
            return self
        if not self.rows:
            return other
        rows = dict(self.rows)
        for i, js in other.rows.items():
            mine = rows.get(i)
            rows[i] = js if mine is None else mine.union(js)
        return IndexPairSet(rows, self.capacity, self.setcls)

    __or__ = union

    def is_empty(self) -> bool:
        return not self.rows

    def __bool__(self):
        return bool(self.rows)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        for i in sorted(self.rows):
            for j in self.rows[i]:
                yield (i, j)

    def __len__(self):
        return sum(len(js) for js in self.rows.values())

    def __contains__(self, pair):
        i, j = pair
        row = self.rows.get(i)
        return row is not None and j in row

    def __eq__(self, other):
        if isinstance(other, IndexPairSet):
            return self.capacity == other.capacity and set(self) == set(other)
        if isinstance(other, (set, frozenset)):
            return set(self) == other
        return NotImplemented

    __hash__ = None

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.capacity, self.capacity), dtype=bool)
        for i, j in self:
            out[i, j] = True
        return out

    def __repr__(self):
        return f"IndexPairSet({sorted(self)}, n={self.capacity})"


def pair_product(a: IndexSet, b: IndexSet) -> IndexPairSet:
    """Cartesian product ``a x b`` closed under transposition."""
    if type(a) is not type(b):
        raise TypeError("pair_product operands must share a backend")
    if a.capacity != b.capacity:
        raise ValueError(f"capacity mismatch: {a.capacity} vs {b.capacity}")
    setcls, n = type(a), a.capacity
    if a.is_empty() or b.is_empty():
        return IndexPairSet({}, n, setcls)
    a = a.normalize()
    b = b.normalize()
    rows: dict[int, IndexSet] = {}
    for i in a:
        rows[i] = b
    for j in b:
        row = rows.get(j)
        rows[j] = a if row is None else row.union(a)
    return IndexPairSet(rows, n, setcls)


def pair_union(a: IndexPairSet, b: IndexPairSet) -> IndexPairSet:
    return a.union(b)
