"""Special-fiber combinatorics: component lattices, component groups, P2 and Q2*(1)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import NamedTuple, Sequence

import mpmath
import yaml

from .lattice import PairedLattice, delta_pairing
from .numeric import INFINITE, as_fraction, cokernel_order, exact_det, precise, smith_normal_form


class MalformedFiber(ValueError):
    pass


class Component(NamedTuple):
    d: int  # multiplicity in the fiber
    r: int  # geometric components in the Frobenius orbit
    e: int = 1  # geometric multiplicity


@dataclass(frozen=True)
class FiberData:
    """One non-smooth fiber.  `tamagawa` None means: take the component group order."""

    q: int
    components: tuple[Component, ...]
    intersection: tuple[tuple[int, ...], ...]
    index_local: Fraction = Fraction(1)
    period_local: Fraction = Fraction(1)
    tamagawa: Fraction | None = None
    genus: int = 1
    kind: str = ""
    place: str = ""

    def __post_init__(self):
        comps = tuple(Component(*c) if not isinstance(c, Component) else c for c in self.components)
        m = tuple(tuple(int(x) for x in row) for row in self.intersection)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "intersection", m)
        object.__setattr__(self, "index_local", as_fraction(self.index_local))
        object.__setattr__(self, "period_local", as_fraction(self.period_local))
        if self.tamagawa is not None:
            object.__setattr__(self, "tamagawa", as_fraction(self.tamagawa))
        problems = fiber_problems(self)
        if problems:
            raise MalformedFiber(f"{self.label}: " + "; ".join(problems))

    @property
    def label(self) -> str:
        return f"{self.kind or 'fiber'} at q={self.q}" + (f" ({self.place})" if self.place else "")

    @property
    def size(self) -> int:
        return len(self.components)

    @property
    def r_product(self) -> int:
        return math.prod(c.r for c in self.components)

    @property
    def c_v(self) -> Fraction:
        return self.tamagawa if self.tamagawa is not None else Fraction(component_group(self).phi_order)


def _is_prime_power(q: int) -> bool:
    if q < 2:
        return False
    p = next(p for p in range(2, q + 1) if q % p == 0)
    while q % p == 0:
        q //= p
    return q == 1


def fiber_problems(f: FiberData) -> list[str]:
    out = []
    n = f.size
    m = f.intersection
    if n == 0:
        return ["no components"]
    if len(m) != n or any(len(row) != n for row in m):
        return [f"intersection matrix must be {n}x{n}"]
    if not _is_prime_power(f.q):
        out.append(f"q={f.q} is not a prime power")
    if f.genus < 0:
        out.append("negative genus")
    for c in f.components:
        if min(c.d, c.r, c.e) < 1:
            out.append("component data must be positive")
            break
    if any(m[i][j] != m[j][i] for i in range(n) for j in range(i)):
        out.append("intersection matrix is not symmetric")
    for j in range(n):
        if sum(c.d * m[i][j] for i, c in enumerate(f.components)):
            out.append(f"fiber relation fails against component {j}")
            break
    for i, ci in enumerate(f.components):
        if any(m[i][j] % ci.r for j in range(n)):
            out.append(f"row {i} not divisible by its orbit size r={ci.r}")
            break
    if not out and not _negative_definite_quotient(f):
        out.append("pairing on the component lattice is not negative definite")
    for name in ("index_local", "period_local"):
        if getattr(f, name) < 1:
            out.append(f"{name} must be >= 1")
    if f.tamagawa is not None and f.tamagawa < 1:
        out.append("tamagawa must be >= 1")
    return out


def _minor(f: FiberData, drop: int) -> list[list[int]]:
    keep = [i for i in range(f.size) if i != drop]
    return [[f.intersection[i][j] for j in keep] for i in keep]


def _negative_definite_quotient(f: FiberData) -> bool:
    m = [[-x for x in row] for row in _minor(f, 0)]
    return all(exact_det([row[:k] for row in m[:k]]) > 0 for k in range(1, len(m) + 1))


class ComponentGroupReport(NamedTuple):
    kernel_mod_image_order: int
    correction: Fraction
    phi_order: Fraction
    c_constant: int
    d: int
    d_prime: int


def alpha_matrix(f: FiberData) -> list[list[int]]:
    """alpha(e_i) = (1/r_i) sum_j (Gamma_i . Gamma_j) e_j, as columns."""
    n = f.size
    return [[f.intersection[i][j] // f.components[i].r for i in range(n)] for j in range(n)]


def component_group(f: FiberData) -> ComponentGroupReport:
    """Order of Phi_v(k) from the sequence Ker(beta)/Im(alpha) -> Phi -> cdZ/d'Z."""
    kernel = cokernel_order(alpha_matrix(f), f.size - 1)
    if kernel == INFINITE:
        raise MalformedFiber(f"{f.label}: alpha has rank below #components - 1")
    d = math.gcd(*(c.d for c in f.components))
    d_prime = math.gcd(*(c.r * c.d for c in f.components))
    c = 1 if (f.genus - 1) % d_prime == 0 else 2
    if d_prime % (c * d):
        raise MalformedFiber(f"{f.label}: c*d = {c * d} does not divide d' = {d_prime}")
    correction = Fraction(d_prime, c * d)
    return ComponentGroupReport(int(kernel), correction, kernel * correction, c, d, d_prime)


def component_lattice(f: FiberData) -> PairedLattice:
    """R_v = Z^I / Z(sum d_i Gamma_i) with the intersection pairing.

    The images of all components but one (i0, of least multiplicity) span a
    sublattice of R_v/tors of index d_i0/d; the torsion has order d.
    """
    diag = smith_normal_form([[c.d] for c in f.components])[0]
    torsion = diag[0]  # gcd of the multiplicities
    i0 = min(range(f.size), key=lambda i: f.components[i].d)
    index = Fraction(f.components[i0].d, torsion)
    gram = tuple(tuple(row) for row in _minor(f, i0))
    return PairedLattice(f.size - 1, gram, index, torsion)


def delta_Rv(f: FiberData) -> Fraction:
    return delta_pairing(component_lattice(f))


@precise
def delta_ar_Rv(f: FiberData):
    return mpmath.mpf(delta_Rv(f).numerator) / delta_Rv(f).denominator * mpmath.log(f.q) ** (f.size - 1)


class FlsCheck(NamedTuple):
    ok: bool
    lhs: Fraction
    rhs: Fraction
    message: str


def fls_check(f: FiberData) -> FlsCheck:
    lhs = delta_Rv(f) * f.index_local * f.period_local
    rhs = f.c_v * f.r_product
    msg = "" if lhs == rhs else (
        f"{f.label}: Delta(R_v)*delta_v*delta'_v = {lhs} but c_v*prod(r_i) = {rhs} "
        f"(c_v = {f.c_v}); the component-lattice identity fails")
    return FlsCheck(lhs == rhs, lhs, rhs, msg)


def fls_consistency(f: FiberData) -> bool:
    return fls_check(f).ok


@precise
def p2_factor(f: FiberData, t):
    """prod_i (1 - (q t)^r_i)."""
    return mpmath.fprod(1 - (f.q * t) ** c.r for c in f.components)


@precise
def q2_special_value(fibers: Sequence[FiberData]):
    """Q2*(1) = prod_v 1 / ((log q_v)^(#G_v - 1) * prod r_i)."""
    out = mpmath.mpf(1)
    for f in fibers:
        out /= mpmath.log(f.q) ** (f.size - 1) * f.r_product
    return out


@precise
def q2_from_pairings(fibers: Sequence[FiberData]):
    """The same value as P_fin * prod_v 1/(Delta_ar(R_v) delta_v delta'_v)."""
    out = mpmath.mpf(1)
    for f in fibers:
        den = delta_ar_Rv(f) * f.index_local * f.period_local
        out *= mpmath.mpf(f.c_v.numerator) / f.c_v.denominator / den
    return out


# -- catalog ---------------------------------------------------------------

@dataclass(frozen=True)
class FiberType:
    name: str
    genus: int
    components: tuple[Component, ...]
    intersection: tuple[tuple[int, ...], ...]
    index: Fraction = Fraction(1)
    period: Fraction = Fraction(1)
    note: str = field(default="", compare=False)

    def at(self, q: int, tamagawa=None, index=None, period=None, place="") -> FiberData:
        return FiberData(q, self.components, self.intersection,
                         self.index if index is None else index,
                         self.period if period is None else period,
                         tamagawa, self.genus, self.name, place)


def fiber_type_from_dict(d: dict) -> FiberType:
    comps = tuple(Component(int(c["d"]), int(c.get("r", 1)), int(c.get("e", 1))) for c in d["components"])
    return FiberType(str(d["name"]), int(d.get("genus", 1)), comps,
                     tuple(tuple(int(x) for x in row) for row in d["intersection"]),
                     as_fraction(d.get("index", 1)), as_fraction(d.get("period", 1)), str(d.get("note", "")))


_CATALOG: dict[str, FiberType] | None = None


def fiber_catalog() -> dict[str, FiberType]:
    global _CATALOG
    if _CATALOG is None:
        text = resources.files("zetabsd").joinpath("data/fibers.yaml").read_text(encoding="utf-8")
        _CATALOG = {}
        for e in yaml.safe_load(text)["fibers"]:
            t = fiber_type_from_dict(e)
            _CATALOG[t.name] = t
    return _CATALOG


def lookup_fiber(name: str) -> FiberType:
    try:
        return fiber_catalog()[name]
    except KeyError:
        raise MalformedFiber(f"unknown fiber type {name!r}") from None
