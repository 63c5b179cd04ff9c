"""Exact multivariate polynomials over rationals.

Small helper for emitting invariant PDEs with exact integer coefficients:
dense enough for five to seven jet coordinates, sparse dict storage,
Fraction coefficients, and single-divisor division in graded-lex order
(used to strip the minimal power of rho from cleared denominators).
"""

from __future__ import annotations

from fractions import Fraction


class Poly:
    """Polynomial as {exponent tuple: Fraction}, zero terms dropped."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict | None = None):
        self.nvars = nvars
        self.terms = {}
        if terms:
            for exps, c in terms.items():
                c = Fraction(c)
                if c:
                    self.terms[tuple(exps)] = c

    @classmethod
    def const(cls, nvars: int, value) -> "Poly":
        return cls(nvars, {(0,) * nvars: Fraction(value)})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        exps = tuple(1 if k == i else 0 for k in range(nvars))
        return cls(nvars, {exps: Fraction(1)})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, Fraction(0)) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Poly(self.nvars, out)

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return Poly(self.nvars, {e: c * other for e, c in self.terms.items()})
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, Fraction(0)) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        out = Poly.const(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    def leading(self) -> tuple[tuple[int, ...], Fraction]:
        e = max(self.terms, key=lambda t: (sum(t), t))
        return e, self.terms[e]

    def divide_exact(self, divisor: "Poly") -> "Poly | None":
        """Quotient if ``divisor`` divides exactly, else None."""
        le, lc = divisor.leading()
        rem = Poly(self.nvars, dict(self.terms))
        quot: dict = {}
        while rem:
            e, c = rem.leading()
            q = tuple(a - b for a, b in zip(e, le))
            if any(x < 0 for x in q):
                return None
            coef = c / lc
            quot[q] = quot.get(q, Fraction(0)) + coef
            rem = rem - divisor * Poly(self.nvars, {q: coef})
        return Poly(self.nvars, quot)

    def evaluate(self, values) -> float:
        total = 0.0
        for e, c in self.terms.items():
            term = float(c)
            for v, a in zip(values, e):
                if a:
                    term *= v**a
            total += term
        return total

    def __repr__(self):
        return f"Poly({self.nvars}, {self.terms})"
