"""Dense symmetric 2- and 3-tensors.

:class:`SymMatrix` stores the lower triangle row-major
(``(0,0), (1,0), (1,1), (2,0), ...``); :class:`SymCubic` stores entries
for ``i <= j <= k`` in lexicographic order.  Both layouts double as the
on-disk array formats (``hess_lower`` / ``cubic_lex``).  Multiplicity is
handled at evaluation time: ``full()`` materializes the complete tensor.
"""

from __future__ import annotations

import functools
import itertools

import numpy as np


@functools.lru_cache(maxsize=None)
def cubic_indices(n: int) -> tuple[tuple[int, int, int], ...]:
    """Index triples i <= j <= k in lexicographic order."""
    return tuple(itertools.combinations_with_replacement(range(n), 3))


@functools.lru_cache(maxsize=None)
def _cubic_position(n: int) -> dict[tuple[int, int, int], int]:
    return {t: i for i, t in enumerate(cubic_indices(n))}


class SymMatrix:
    """Symmetric n x n matrix, lower triangle stored row-major."""

    __slots__ = ("n", "data")

    def __init__(self, n: int, data=None):
        size = n * (n + 1) // 2
        if data is None:
            arr = np.zeros(size)
        else:
            arr = np.array(data, dtype=float).reshape(-1)
            if arr.size != size:
                raise ValueError(f"expected {size} entries for n={n}, got {arr.size}")
        arr.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("SymMatrix is immutable")

    @classmethod
    def from_full(cls, arr) -> "SymMatrix":
        arr = np.asarray(arr, dtype=float)
        n = arr.shape[0]
        sym = 0.5 * (arr + arr.T)
        return cls(n, [sym[i, j] for i in range(n) for j in range(i + 1)])

    @classmethod
    def diag(cls, values) -> "SymMatrix":
        return cls.from_full(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def identity(cls, n: int) -> "SymMatrix":
        return cls.from_full(np.eye(n))

    def full(self) -> np.ndarray:
        out = np.empty((self.n, self.n))
        k = 0
        for i in range(self.n):
            for j in range(i + 1):
                out[i, j] = out[j, i] = self.data[k]
                k += 1
        return out

    def __getitem__(self, ij):
        i, j = ij
        if j > i:
            i, j = j, i
        return float(self.data[i * (i + 1) // 2 + j])

    def __add__(self, other: "SymMatrix") -> "SymMatrix":
        return SymMatrix(self.n, self.data + other.data)

    def __sub__(self, other: "SymMatrix") -> "SymMatrix":
        return SymMatrix(self.n, self.data - other.data)

    def __neg__(self) -> "SymMatrix":
        return SymMatrix(self.n, -self.data)

    def __mul__(self, c: float) -> "SymMatrix":
        return SymMatrix(self.n, self.data * c)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.full()))

    def trace(self) -> float:
        return float(sum(self[i, i] for i in range(self.n)))

    def allclose(self, other: "SymMatrix", tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.data - other.data) <= tol))

    def __repr__(self):
        return f"SymMatrix(n={self.n}, data={self.data})"


class SymCubic:
    """Fully symmetric n x n x n tensor, entries for i <= j <= k."""

    __slots__ = ("n", "data")

    def __init__(self, n: int, data=None):
        size = len(cubic_indices(n))
        if data is None:
            arr = np.zeros(size)
        else:
            arr = np.array(data, dtype=float).reshape(-1)
            if arr.size != size:
                raise ValueError(f"expected {size} entries for n={n}, got {arr.size}")
        arr.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("SymCubic is immutable")

    @classmethod
    def from_full(cls, arr) -> "SymCubic":
        arr = np.asarray(arr, dtype=float)
        n = arr.shape[0]
        vals = []
        for i, j, k in cubic_indices(n):
            perms = set(itertools.permutations((i, j, k)))
            vals.append(sum(arr[p] for p in perms) / len(perms))
        return cls(n, vals)

    @classmethod
    def from_entries(cls, n: int, entries: dict) -> "SymCubic":
        pos = _cubic_position(n)
        data = np.zeros(len(cubic_indices(n)))
        for key, value in entries.items():
            data[pos[tuple(sorted(key))]] = value
        return cls(n, data)

    def full(self) -> np.ndarray:
        out = np.empty((self.n, self.n, self.n))
        for (i, j, k), v in zip(cubic_indices(self.n), self.data):
            for p in set(itertools.permutations((i, j, k))):
                out[p] = v
        return out

    def __getitem__(self, ijk):
        return float(self.data[_cubic_position(self.n)[tuple(sorted(ijk))]])

    def __add__(self, other: "SymCubic") -> "SymCubic":
        return SymCubic(self.n, self.data + other.data)

    def __sub__(self, other: "SymCubic") -> "SymCubic":
        return SymCubic(self.n, self.data - other.data)

    def __neg__(self) -> "SymCubic":
        return SymCubic(self.n, -self.data)

    def __mul__(self, c: float) -> "SymCubic":
        return SymCubic(self.n, self.data * c)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.full()))

    def allclose(self, other: "SymCubic", tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.data - other.data) <= tol))

    def __repr__(self):
        return f"SymCubic(n={self.n}, data={self.data})"
