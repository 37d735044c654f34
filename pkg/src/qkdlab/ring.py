"""Exact arithmetic over rational combinations of d-th roots of unity.

An element is a length-d vector of rational coefficients, index t holding
the coefficient of zeta**t where zeta = exp(2*pi*i/d).  Products are
reduced with zeta**d == 1.  For prime d the vanishing sum
1 + zeta + ... + zeta**(d-1) == 0 gives a canonical form (last coefficient
zero) and therefore decidable exact equality; for composite d the vector
is kept as-is and zero tests fall back to a floating-point oracle.
"""

from __future__ import annotations

import cmath
import math
import warnings
from fractions import Fraction
from functools import lru_cache

Rational = Fraction

Coeff = int | Fraction

FLOAT_ZERO_TOL = 1e-12


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, math.isqrt(n) + 1))


def _as_coeff(value: object) -> Coeff:
    kind = type(value)
    if kind is int:
        return value
    if kind is Fraction:
        return value.numerator if value.denominator == 1 else value
    if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
        raise TypeError(f"coefficient must be int or Fraction, got {type(value).__name__}")
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    return value


def _norm_coeff(value: Coeff) -> Coeff:
    # computed sums/products of valid coefficients only need the
    # denominator-one collapse, not the full type check
    return (
        value.numerator
        if type(value) is Fraction and value.denominator == 1
        else value
    )


@lru_cache(maxsize=None)
def _unit_roots(dim: int) -> tuple[complex, ...]:
    return tuple(cmath.exp(2j * cmath.pi * t / dim) for t in range(dim))


class CycloElem:
    """One element of the order-d cyclotomic ring with rational coefficients.

    Instances are immutable; every arithmetic operation returns a new,
    canonically reduced element.
    """

    __slots__ = ("dim", "coeffs")

    def __init__(self, dim: int, coeffs) -> None:
        if dim < 2:
            raise ValueError(f"dimension must be at least 2, got {dim}")
        coeffs = tuple(_as_coeff(c) for c in coeffs)
        if len(coeffs) != dim:
            raise ValueError(f"expected {dim} coefficients, got {len(coeffs)}")
        self.dim = dim
        self.coeffs = coeffs

    @classmethod
    def _raw(cls, dim: int, coeffs: tuple) -> CycloElem:
        # internal fast path: callers guarantee coeffs is a valid tuple
        elem = object.__new__(cls)
        elem.dim = dim
        elem.coeffs = coeffs
        return elem

    @classmethod
    def zero(cls, dim: int) -> CycloElem:
        return cls(dim, (0,) * dim)

    @classmethod
    def one(cls, dim: int) -> CycloElem:
        return cls(dim, (1,) + (0,) * (dim - 1))

    @classmethod
    def from_rational(cls, dim: int, value: Coeff) -> CycloElem:
        return cls(dim, (value,) + (0,) * (dim - 1))

    @property
    def is_canonical(self) -> bool:
        return is_prime(self.dim) and not self.coeffs[-1]

    def canonical_reduce(self) -> CycloElem:
        """Rewrite with a zero top coefficient when the dimension is prime.

        Composite dimensions are returned unchanged (self.is_canonical stays
        False); exact zero/equality tests are then undecidable here and go
        through the floating-point oracle instead.
        """
        if not is_prime(self.dim):
            return self
        last = self.coeffs[-1]
        if not last:
            return self
        return CycloElem._raw(self.dim, tuple(_norm_coeff(c - last) for c in self.coeffs))

    def _coerce(self, other: object) -> CycloElem | None:
        if isinstance(other, CycloElem):
            if other.dim != self.dim:
                raise ValueError(f"dimension mismatch: {self.dim} != {other.dim}")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return CycloElem.from_rational(self.dim, other)
        return None

    def __add__(self, other: object) -> CycloElem:
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        coeffs = tuple(
            a if not b else b if not a else _norm_coeff(a + b)
            for a, b in zip(self.coeffs, rhs.coeffs)
        )
        return CycloElem._raw(self.dim, coeffs).canonical_reduce()

    __radd__ = __add__

    def __neg__(self) -> CycloElem:
        return CycloElem._raw(self.dim, tuple(-c for c in self.coeffs))

    def __sub__(self, other: object) -> CycloElem:
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other: object) -> CycloElem:
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return rhs + (-self)

    def __mul__(self, other: object) -> CycloElem:
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        dim = self.dim
        acc = [0] * dim
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(rhs.coeffs):
                if not b:
                    continue
                t = i + j
                if t >= dim:
                    t -= dim
                acc[t] += a * b
        return CycloElem._raw(dim, tuple(map(_norm_coeff, acc))).canonical_reduce()

    __rmul__ = __mul__

    def mul_zeta(self, exponent: int) -> CycloElem:
        """Multiply by zeta**exponent (a cyclic rotation of the coefficients)."""
        dim = self.dim
        e = exponent % dim
        if e == 0:
            return self.canonical_reduce()
        coeffs = self.coeffs[dim - e:] + self.coeffs[:dim - e]
        return CycloElem._raw(dim, coeffs).canonical_reduce()

    def conj(self) -> CycloElem:
        """Complex conjugate: sends zeta**t to zeta**(d-t)."""
        dim = self.dim
        out = [0] * dim
        for t, c in enumerate(self.coeffs):
            out[-t] = c
        return CycloElem._raw(dim, tuple(out)).canonical_reduce()

    def is_zero(self) -> bool:
        """Exact zero test for prime dimension, float oracle otherwise."""
        if is_prime(self.dim):
            return not any(self.canonical_reduce().coeffs)
        if not any(self.coeffs):
            return True
        warnings.warn(
            "zero test at composite dimension uses a floating-point oracle",
            stacklevel=2,
        )
        return abs(self.to_complex()) < FLOAT_ZERO_TOL

    def to_complex(self) -> complex:
        roots = _unit_roots(self.dim)
        return sum((c * roots[t] for t, c in enumerate(self.coeffs) if c), 0j)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, CycloElem) and other.dim != self.dim:
            return False
        if not isinstance(other, (CycloElem, int, Fraction)):
            return NotImplemented
        rhs = self._coerce(other)
        if is_prime(self.dim):
            return self.canonical_reduce().coeffs == rhs.canonical_reduce().coeffs
        return self.coeffs == rhs.coeffs

    __hash__ = None

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __repr__(self) -> str:
        return f"CycloElem({self.dim}, {self.coeffs})"

    def __str__(self) -> str:
        parts = []
        for t, c in enumerate(self.coeffs):
            if not c:
                continue
            unit = "" if t == 0 else ("z" if t == 1 else f"z^{t}")
            if not unit:
                parts.append(str(c))
            elif c == 1:
                parts.append(unit)
            elif c == -1:
                parts.append(f"-{unit}")
            else:
                parts.append(f"{c}*{unit}")
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out


def zeta_pow(dim: int, exponent: int) -> CycloElem:
    """The root of unity zeta**exponent in canonical form; exponents wrap mod d."""
    if dim < 2:
        raise ValueError(f"dimension must be at least 2, got {dim}")
    e = exponent % dim
    coeffs = [0] * dim
    coeffs[e] = 1
    return CycloElem(dim, coeffs).canonical_reduce()


def rational_value(elem: CycloElem) -> Fraction:
    """Extract the value of an element known to be rational.

    Exact for prime dimension.  For composite dimension the value is
    recovered through the floating-point oracle and a best-rational
    snap, with a warning; raises ValueError when the element is not
    rational to within the oracle tolerance.
    """
    reduced = elem.canonical_reduce()
    if is_prime(elem.dim):
        if any(reduced.coeffs[1:]):
            raise ValueError(f"element is not rational: {elem!r}")
        return Fraction(reduced.coeffs[0])
    z = elem.to_complex()
    if abs(z.imag) > FLOAT_ZERO_TOL:
        raise ValueError(f"element is not rational: {elem!r}")
    candidate = Fraction(z.real).limit_denominator(10**9)
    if abs(float(candidate) - z.real) > FLOAT_ZERO_TOL:
        raise ValueError(f"element is not rational: {elem!r}")
    warnings.warn(
        "rational extraction at composite dimension uses a floating-point oracle",
        stacklevel=2,
    )
    return candidate
