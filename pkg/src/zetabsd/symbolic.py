"""Products of a rational and integer powers of named transcendental factors.

Square roots of positive integers are written as symbols `sqrt(n)` and kept
with exponent 0 or 1, the even part moving into the rational coefficient,
so equal quantities always have equal normal forms.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .numeric import as_fraction, to_real

_SQRT = re.compile(r"^sqrt\((\d+)\)$")
_LOG = re.compile(r"^log\((\d+)\)$")


def _normalize(coeff: Fraction, powers: dict[str, int]) -> tuple[Fraction, tuple[tuple[str, int], ...]]:
    out = {}
    for name, e in powers.items():
        if not e:
            continue
        m = _SQRT.match(name)
        if m:
            n = int(m.group(1))
            if n == 1:
                continue
            half, e = divmod(e, 2)
            coeff *= Fraction(n) ** half
            if not e:
                continue
        out[name] = e
    return coeff, tuple(sorted(out.items()))


@dataclass(frozen=True)
class Monomial:
    coeff: Fraction = Fraction(1)
    powers: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        c, p = _normalize(as_fraction(self.coeff), dict(self.powers))
        object.__setattr__(self, "coeff", c)
        object.__setattr__(self, "powers", p)

    @classmethod
    def symbol(cls, name: str, exponent: int = 1) -> Monomial:
        return cls(Fraction(1), ((name, exponent),))

    @classmethod
    def sqrt(cls, n: int) -> Monomial:
        if n <= 0:
            raise ValueError("sqrt of a non-positive integer")
        return cls.symbol(f"sqrt({n})")

    def __mul__(self, other) -> Monomial:
        if not isinstance(other, Monomial):
            return Monomial(self.coeff * as_fraction(other), self.powers)
        p = dict(self.powers)
        for k, e in other.powers:
            p[k] = p.get(k, 0) + e
        return Monomial(self.coeff * other.coeff, tuple(p.items()))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Monomial:
        if n < 0:
            return (self.inverse()) ** (-n)
        return Monomial(self.coeff ** n, tuple((k, e * n) for k, e in self.powers))

    def inverse(self) -> Monomial:
        if self.coeff == 0:
            raise ZeroDivisionError("inverse of zero")
        return Monomial(1 / self.coeff, tuple((k, -e) for k, e in self.powers))

    def __truediv__(self, other) -> Monomial:
        if not isinstance(other, Monomial):
            other = Monomial(as_fraction(other))
        return self * other.inverse()

    def __rtruediv__(self, other) -> Monomial:
        return Monomial(as_fraction(other)) / self

    def __neg__(self) -> Monomial:
        return Monomial(-self.coeff, self.powers)

    @property
    def is_rational(self) -> bool:
        return not self.powers

    @property
    def symbols(self) -> set[str]:
        return {k for k, _ in self.powers}

    def evaluate(self, values: dict | None = None):
        """Numeric value; pi, sqrt(n) and log(n) are known, other symbols come from `values`."""
        values = values or {}
        out = to_real(self.coeff)
        for name, e in self.powers:
            m = _SQRT.match(name)
            l = _LOG.match(name)
            if m:
                v = mpmath.sqrt(int(m.group(1)))
            elif l:
                v = mpmath.log(int(l.group(1)))
            elif name == "pi" and name not in values:
                v = mpmath.pi
            else:
                try:
                    v = values[name]
                except KeyError:
                    raise KeyError(f"no value for symbol {name!r}") from None
            out *= to_real(v) ** e
        return out

    def __str__(self) -> str:
        parts = [] if self.coeff == 1 and self.powers else [str(self.coeff)]
        for k, e in self.powers:
            parts.append(k if e == 1 else f"{k}^{e}")
        return "*".join(parts) if parts else "1"


ONE = Monomial()
PI = Monomial.symbol("pi")


def log_of(q: int) -> Monomial:
    return Monomial.symbol(f"log({q})")
