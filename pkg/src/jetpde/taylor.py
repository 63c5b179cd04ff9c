"""Truncated multivariate Taylor-series arithmetic.

A :class:`TruncatedJet` holds the coefficients of a polynomial germ in
``n_vars`` variables, truncated at a fixed total degree ``order``.  A
multi-index is a plain tuple of non-negative exponents; coefficients are
stored densely in a float64 array over the graded-lexicographic table
returned by :func:`multi_indices`.  The caps ``n_vars <= 8``,
``order <= 4`` keep every table below 495 entries, so all products are
dense loops over precomputed index triples.

The coefficient of the multi-index ``alpha`` is the Taylor coefficient,
i.e. the partial derivative divided by ``alpha!``.  All operations are
pure and return new jets; instances are never mutated after construction.
"""

from __future__ import annotations

import functools
import math
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DivisionBySingular,
    OrderUnderflow,
    SingularJacobian,
)

MAX_VARS = 8
MAX_ORDER = 4

# |det J| below SINGULAR_RTOL * scale(J)**n means "not invertible".
SINGULAR_RTOL = 1e-10
# |b(0)| below DIVISION_RTOL * max(1, |b|_inf) means "not divisible".
DIVISION_RTOL = 1e-12


def _compositions(total: int, n: int):
    if n == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, n - 1):
            yield (first,) + rest


@functools.lru_cache(maxsize=None)
def multi_indices(n: int, order: int) -> tuple[tuple[int, ...], ...]:
    """Exponent tuples with total degree <= order, graded lexicographic."""
    out: list[tuple[int, ...]] = []
    for deg in range(order + 1):
        out.extend(sorted(_compositions(deg, n)))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def index_position(n: int, order: int) -> dict[tuple[int, ...], int]:
    return {alpha: i for i, alpha in enumerate(multi_indices(n, order))}


@functools.lru_cache(maxsize=None)
def n_coeffs(n: int, order: int) -> int:
    return math.comb(n + order, order)


@functools.lru_cache(maxsize=None)
def _mul_table(n: int, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index triples (ia, ib, iout) of all products that survive truncation."""
    idx = multi_indices(n, order)
    pos = index_position(n, order)
    ia, ib, iout = [], [], []
    for i, alpha in enumerate(idx):
        da = sum(alpha)
        for j, beta in enumerate(idx):
            if da + sum(beta) > order:
                continue
            ia.append(i)
            ib.append(j)
            iout.append(pos[tuple(a + b for a, b in zip(alpha, beta))])
    return (np.asarray(ia), np.asarray(ib), np.asarray(iout))


class TruncatedJet:
    """Polynomial germ truncated at a total degree.

    Parameters
    ----------
    n_vars : int
        Number of variables, between 1 and 8.
    order : int
        Truncation order, between 0 and 4.
    coeffs : array_like, optional
        Dense coefficient vector over ``multi_indices(n_vars, order)``.
        Defaults to the zero germ.
    """

    __slots__ = ("n_vars", "order", "coeffs")

    def __init__(self, n_vars: int, order: int, coeffs=None):
        if not 1 <= n_vars <= MAX_VARS:
            raise DimensionMismatch(f"n_vars={n_vars} outside [1, {MAX_VARS}]")
        if not 0 <= order <= MAX_ORDER:
            raise OrderUnderflow(f"order={order} outside [0, {MAX_ORDER}]")
        size = n_coeffs(n_vars, order)
        if coeffs is None:
            data = np.zeros(size)
        else:
            data = np.array(coeffs, dtype=float).reshape(-1)
            if data.size != size:
                raise DimensionMismatch(
                    f"expected {size} coefficients for n={n_vars}, order={order}, "
                    f"got {data.size}"
                )
        data.setflags(write=False)
        object.__setattr__(self, "n_vars", n_vars)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coeffs", data)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedJet is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value: float, n_vars: int, order: int) -> "TruncatedJet":
        c = np.zeros(n_coeffs(n_vars, order))
        c[0] = value
        return cls(n_vars, order, c)

    @classmethod
    def coordinate(cls, i: int, n_vars: int, order: int) -> "TruncatedJet":
        """The germ of the i-th coordinate function (0-based)."""
        if order < 1:
            raise OrderUnderflow("coordinate germ needs order >= 1")
        c = np.zeros(n_coeffs(n_vars, order))
        e = tuple(1 if k == i else 0 for k in range(n_vars))
        c[index_position(n_vars, order)[e]] = 1.0
        return cls(n_vars, order, c)

    @classmethod
    def from_terms(cls, terms: dict, n_vars: int, order: int) -> "TruncatedJet":
        c = np.zeros(n_coeffs(n_vars, order))
        pos = index_position(n_vars, order)
        for alpha, value in terms.items():
            alpha = tuple(alpha)
            if sum(alpha) > order:
                raise OrderUnderflow(f"term {alpha} exceeds order {order}")
            c[pos[alpha]] = value
        return cls(n_vars, order, c)

    # -- accessors ---------------------------------------------------------

    @property
    def const_term(self) -> float:
        return float(self.coeffs[0])

    def coeff(self, alpha: Iterable[int]) -> float:
        return float(self.coeffs[index_position(self.n_vars, self.order)[tuple(alpha)]])

    def linear_part(self) -> np.ndarray:
        """Gradient of the germ at its base point."""
        n = self.n_vars
        out = np.empty(n)
        pos = index_position(n, self.order)
        for i in range(n):
            e = tuple(1 if k == i else 0 for k in range(n))
            out[i] = self.coeffs[pos[e]] if self.order >= 1 else 0.0
        return out

    def truncate(self, order: int) -> "TruncatedJet":
        if order > self.order:
            raise OrderUnderflow(f"cannot raise order {self.order} -> {order}")
        if order == self.order:
            return self
        return TruncatedJet(self.n_vars, order, self.coeffs[: n_coeffs(self.n_vars, order)])

    def pad(self, order: int) -> "TruncatedJet":
        """Reinterpret at a higher order with zero top coefficients."""
        if order < self.order:
            return self.truncate(order)
        c = np.zeros(n_coeffs(self.n_vars, order))
        c[: self.coeffs.size] = self.coeffs
        return TruncatedJet(self.n_vars, order, c)

    def __call__(self, point: Sequence[float]) -> float:
        point = np.asarray(point, dtype=float)
        total = 0.0
        for alpha, c in zip(multi_indices(self.n_vars, self.order), self.coeffs):
            if c == 0.0:
                continue
            total += c * math.prod(point[i] ** a for i, a in enumerate(alpha) if a)
        return total

    def __repr__(self):
        return f"TruncatedJet(n={self.n_vars}, order={self.order}, coeffs={self.coeffs})"

    # -- arithmetic --------------------------------------------------------

    def _check_vars(self, other: "TruncatedJet"):
        if self.n_vars != other.n_vars:
            raise DimensionMismatch(
                f"jets over {self.n_vars} and {other.n_vars} variables"
            )

    def __add__(self, other):
        if np.isscalar(other):
            c = self.coeffs.copy()
            c[0] += other
            return TruncatedJet(self.n_vars, self.order, c)
        self._check_vars(other)
        order = min(self.order, other.order)
        return TruncatedJet(
            self.n_vars,
            order,
            self.truncate(order).coeffs + other.truncate(order).coeffs,
        )

    __radd__ = __add__

    def __neg__(self):
        return TruncatedJet(self.n_vars, self.order, -self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, TruncatedJet) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return TruncatedJet(self.n_vars, self.order, self.coeffs * other)
        self._check_vars(other)
        order = min(self.order, other.order)
        a = self.truncate(order).coeffs
        b = other.truncate(order).coeffs
        ia, ib, iout = _mul_table(self.n_vars, order)
        out = np.zeros(n_coeffs(self.n_vars, order))
        np.add.at(out, iout, a[ia] * b[ib])
        return TruncatedJet(self.n_vars, order, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return self * (1.0 / other)
        return divide(self, other)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative jet powers go through divide()")
        out = TruncatedJet.constant(1.0, self.n_vars, self.order)
        for _ in range(k):
            out = out * self
        return out

    def allclose(self, other: "TruncatedJet", tol: float = 1e-12) -> bool:
        order = min(self.order, other.order)
        return bool(
            np.all(
                np.abs(self.truncate(order).coeffs - other.truncate(order).coeffs)
                <= tol
            )
        )


# -- module-level operations ------------------------------------------------


def add(a: TruncatedJet, b: TruncatedJet) -> TruncatedJet:
    """Coefficientwise sum, truncated to the lower of the two orders."""
    return a + b


def mul(a: TruncatedJet, b: TruncatedJet) -> TruncatedJet:
    """Cauchy product, indices above the common order discarded."""
    return a * b


def differentiate(a: TruncatedJet, i: int) -> TruncatedJet:
    """Formal partial derivative with respect to variable ``i`` (0-based)."""
    if a.order < 1:
        raise OrderUnderflow("cannot differentiate an order-0 jet")
    n, order = a.n_vars, a.order
    out = np.zeros(n_coeffs(n, order - 1))
    pos = index_position(n, order - 1)
    for alpha, c in zip(multi_indices(n, order), a.coeffs):
        if alpha[i] == 0 or c == 0.0:
            continue
        beta = tuple(e - 1 if k == i else e for k, e in enumerate(alpha))
        out[pos[beta]] += c * alpha[i]
    return TruncatedJet(n, order - 1, out)


def divide(a: TruncatedJet, b: TruncatedJet, tol: float = DIVISION_RTOL) -> TruncatedJet:
    """``a * b**-1`` with the reciprocal expanded as a geometric series."""
    a._check_vars(b)
    order = min(a.order, b.order)
    b = b.truncate(order)
    b0 = b.const_term
    scale = max(1.0, float(np.max(np.abs(b.coeffs))))
    if abs(b0) < tol * scale:
        raise DivisionBySingular(f"|b(0)|={abs(b0):.3e} below {tol * scale:.3e}")
    r = (b - b0) * (1.0 / b0)  # zero constant term
    inv = TruncatedJet.constant(1.0, b.n_vars, order)
    term = TruncatedJet.constant(1.0, b.n_vars, order)
    for _ in range(order):
        term = term * (-r)
        inv = inv + term
    return a.truncate(order) * inv * (1.0 / b0)


def _binom_shift(outer: TruncatedJet, center: np.ndarray) -> np.ndarray:
    """Coefficients of ``outer`` re-expanded around ``center`` (exact algebra)."""
    m, order = outer.n_vars, outer.order
    idx = multi_indices(m, order)
    pos = index_position(m, order)
    out = np.zeros_like(outer.coeffs)
    for alpha, c in zip(idx, outer.coeffs):
        if c == 0.0:
            continue
        for beta in multi_indices(m, sum(alpha)):
            if any(b > a for a, b in zip(alpha, beta)):
                continue
            w = c
            for ai, bi, ci in zip(alpha, beta, center):
                if ai > bi:
                    w *= math.comb(ai, bi) * ci ** (ai - bi)
            out[pos[beta]] += w
    return out


def compose(
    outer: TruncatedJet,
    inners: Sequence[TruncatedJet] | TruncatedJet,
    order: int | None = None,
) -> TruncatedJet:
    """Taylor coefficients of ``outer(inner_1, ..., inner_m)``.

    ``outer`` is re-expanded around the inner germs' constant terms before
    substitution, so callers may hold jets at arbitrary base points.
    """
    if isinstance(inners, TruncatedJet):
        inners = [inners]
    m = outer.n_vars
    if len(inners) != m:
        raise DimensionMismatch(f"outer has {m} variables, got {len(inners)} inner germs")
    n = inners[0].n_vars
    for g in inners:
        if g.n_vars != n:
            raise DimensionMismatch("inner germs over differing variable counts")
    native = min(outer.order, min(g.order for g in inners))
    if order is None:
        order = native
    elif order > native:
        raise OrderUnderflow(f"requested order {order} exceeds available {native}")

    center = np.array([g.const_term for g in inners])
    shifted = _binom_shift(outer, center)

    deltas = [g.truncate(order) - g.const_term for g in inners]
    powers = []
    for d in deltas:
        col = [TruncatedJet.constant(1.0, n, order)]
        for _ in range(order):
            col.append(col[-1] * d)
        powers.append(col)

    out = TruncatedJet.constant(0.0, n, order)
    for beta, c in zip(multi_indices(m, outer.order), shifted):
        if c == 0.0 or sum(beta) > order:
            continue
        term = TruncatedJet.constant(c, n, order)
        for i, bi in enumerate(beta):
            if bi:
                term = term * powers[i][bi]
        out = out + term
    return out


def compose_map(
    outers: Sequence[TruncatedJet], inners: Sequence[TruncatedJet]
) -> list[TruncatedJet]:
    return [compose(f, inners) for f in outers]


def jacobian(fs: Sequence[TruncatedJet]) -> np.ndarray:
    return np.array([f.linear_part() for f in fs])


def invert_map(fs: Sequence[TruncatedJet]) -> list[TruncatedJet]:
    """Compositional inverse of a map germ fixing the origin.

    ``fs`` must be ``n`` jets over ``n`` variables with zero constant term
    and invertible linear part; the result ``g`` satisfies
    ``compose(f, g) = id`` and ``compose(g, f) = id`` to the working order.
    """
    n = len(fs)
    order = min(f.order for f in fs)
    for f in fs:
        if f.n_vars != n:
            raise DimensionMismatch("invert_map needs as many germs as variables")
        if f.const_term != 0.0:
            raise ValueError("invert_map requires zero constant terms")
    J = jacobian(fs)
    det = float(np.linalg.det(J))
    scale = float(np.linalg.norm(J) / math.sqrt(n))
    if det == 0.0 or abs(det) < SINGULAR_RTOL * scale**n:
        raise SingularJacobian(f"|det J|={abs(det):.3e}, scale={scale:.3e}")
    Jinv = np.linalg.inv(J)

    coords = [TruncatedJet.coordinate(i, n, order) for i in range(n)]
    linear_rows = []
    for i in range(n):
        row = TruncatedJet.constant(0.0, n, order)
        for j in range(n):
            if J[i, j] != 0.0:
                row = row + coords[j] * J[i, j]
        linear_rows.append(row)
    high = [fs[i].truncate(order) - linear_rows[i] for i in range(n)]

    g = [sum((coords[j] * Jinv[i, j] for j in range(n)), TruncatedJet.constant(0.0, n, order)) for i in range(n)]
    for _ in range(order - 1):
        corr = compose_map(high, g)
        g = [
            sum(
                ((coords[j] - corr[j]) * Jinv[i, j] for j in range(n)),
                TruncatedJet.constant(0.0, n, order),
            )
            for i in range(n)
        ]
    return g
