"""Number-field invariants and their embedding data."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import mpmath
import yaml

from .numeric import as_fraction, as_mpmatrix, det_complex, precise, to_real


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class NumberFieldInvariants:
    """d_F, signature, h, R, w, plus optional embedding data.

    `polynomial` (monic, highest degree first) defines a generator theta and
    `integral_basis` lists each basis element as rational coefficients of
    1, theta, theta^2, ...  `units` are fundamental units in integral-basis
    coordinates.  Without embedding data `regulator` must be given.
    """

    name: str
    d_F: int
    r1: int
    r2: int
    h: Fraction
    w: Fraction
    regulator: str | None = None
    polynomial: tuple[int, ...] = ()
    integral_basis: tuple[tuple[Fraction, ...], ...] = ()
    units: tuple[tuple[int, ...], ...] = ()
    aliases: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.d_F == 0:
            raise FieldError(f"{self.name}: discriminant must be nonzero")
        if self.r1 < 0 or self.r2 < 0 or self.r1 + self.r2 == 0:
            raise FieldError(f"{self.name}: bad signature ({self.r1}, {self.r2})")
        if (self.d_F < 0) != (self.r2 % 2 == 1):
            raise FieldError(f"{self.name}: sign of d_F must be (-1)^r2")
        if self.h < 1 or self.w < 2 or self.w % 2:
            raise FieldError(f"{self.name}: need h >= 1 and even w >= 2")
        if self.has_embeddings:
            if len(self.polynomial) - 1 != self.degree or self.polynomial[0] != 1:
                raise FieldError(f"{self.name}: polynomial degree must be r1 + 2 r2 and monic")
            if len(self.integral_basis) != self.degree:
                raise FieldError(f"{self.name}: integral basis must have {self.degree} elements")
            if len(self.units) != self.unit_rank:
                raise FieldError(f"{self.name}: expected {self.unit_rank} fundamental units")
        elif self.regulator is None and self.unit_rank > 0:
            raise FieldError(f"{self.name}: regulator or embedding data required")

    @property
    def degree(self) -> int:
        return self.r1 + 2 * self.r2

    @property
    def unit_rank(self) -> int:
        return self.r1 + self.r2 - 1

    @property
    def places(self) -> int:
        return self.r1 + self.r2

    @property
    def has_embeddings(self) -> bool:
        return bool(self.polynomial)

    @property
    def R(self):
        """Regulator at the current working precision."""
        if self.unit_rank == 0:
            return mpmath.mpf(1)
        if self.has_embeddings:
            return regulator_from_units(self)
        return to_real(self.regulator)

    @property
    def sqrt_abs_disc(self):
        return mpmath.sqrt(abs(self.d_F))

    @precise
    def generator_images(self) -> list:
        """Images of theta, ordered real first then (sigma, conj sigma) pairs."""
        roots = mpmath.polyroots(list(self.polynomial), maxsteps=200, extraprec=200)
        eps = mpmath.mpf(10) ** (-mpmath.mp.dps // 2)
        real = sorted((mpmath.re(z) for z in roots if abs(mpmath.im(z)) < eps))
        upper = sorted((z for z in roots if mpmath.im(z) >= eps), key=lambda z: mpmath.re(z))
        if len(real) != self.r1 or len(upper) != self.r2:
            raise FieldError(f"{self.name}: polynomial signature disagrees with (r1, r2)")
        out = [mpmath.mpf(x) for x in real]
        for z in upper:
            out += [mpmath.mpc(z), mpmath.conj(z)]
        return out

    @precise
    def embed(self, coords) -> list:
        """sigma(x) for every sigma, x given in integral-basis coordinates."""
        thetas = self.generator_images()
        vals = []
        for t in thetas:
            powers = [t ** m for m in range(self.degree)]
            total = 0
            for c, b in zip(coords, self.integral_basis):
                c = as_fraction(c)
                if c:
                    total += to_real(c) * sum(to_real(bm) * p for bm, p in zip(b, powers))
            vals.append(total)
        return vals

    @precise
    def embedding_matrix(self) -> mpmath.matrix:
        """psi: rows indexed by embeddings, columns by the integral basis."""
        if not self.has_embeddings:
            raise FieldError(f"{self.name}: no embedding data")
        n = self.degree
        cols = [self.embed([int(i == k) for i in range(n)]) for k in range(n)]
        return as_mpmatrix([[cols[k][s] for k in range(n)] for s in range(n)])

    def place_slices(self) -> list[tuple[str, list[int]]]:
        """Rows of the embedding matrix belonging to each infinite place."""
        out = [("real", [i]) for i in range(self.r1)]
        for j in range(self.r2):
            out.append(("complex", [self.r1 + 2 * j, self.r1 + 2 * j + 1]))
        return out

    @precise
    def unit_log_matrix(self) -> mpmath.matrix:
        """(r1+r2) x unit_rank matrix of n_v log|sigma_v(u)|."""
        m = mpmath.matrix(self.places, self.unit_rank)
        for j, u in enumerate(self.units):
            images = self.embed(u)
            for v, (kind, rows) in enumerate(self.place_slices()):
                nv = 1 if kind == "real" else 2
                m[v, j] = nv * mpmath.log(abs(images[rows[0]]))
        return m

    def multiplication_matrix(self, coords) -> list[list[Fraction]]:
        """Matrix of x -> a*x on the integral basis, exact (for principal ideals)."""
        n = self.degree
        psi = self.embedding_matrix()
        a = self.embed(coords)
        cols = []
        for k in range(n):
            ek = [psi[s, k] for s in range(n)]
            img = mpmath.lu_solve(psi, mpmath.matrix([a[s] * ek[s] for s in range(n)]))
            cols.append([_round_rational(img[i]) for i in range(n)])
        return [[cols[k][i] for k in range(n)] for i in range(n)]


def _round_rational(z) -> Fraction:
    x = mpmath.re(z)
    if abs(mpmath.im(z)) > mpmath.mpf(10) ** (-mpmath.mp.dps // 2):
        raise FieldError("non-real coordinate in multiplication matrix")
    out = Fraction(int(mpmath.nint(x)))
    if abs(x - to_real(out)) > mpmath.mpf(10) ** (-mpmath.mp.dps // 2):
        raise FieldError("multiplier is not integral on the integral basis")
    return out


@precise
def regulator_from_units(f: NumberFieldInvariants):
    logs = f.unit_log_matrix()
    minor = mpmath.matrix(f.unit_rank, f.unit_rank)
    for i in range(f.unit_rank):
        for j in range(f.unit_rank):
            minor[i, j] = logs[i, j]
    return abs(mpmath.re(det_complex(minor)))


@precise
def check_embedding_data(f: NumberFieldInvariants) -> list[str]:
    """Consistency of the embedding data with the stated invariants."""
    problems = []
    if not f.has_embeddings:
        return problems
    d = det_complex(f.embedding_matrix()) ** 2
    if abs(d - f.d_F) > mpmath.mpf(10) ** (-20) * max(1, abs(f.d_F)):
        problems.append(f"{f.name}: det(psi)^2 = {mpmath.nstr(d, 15)} but d_F = {f.d_F}")
    for u in f.units:
        norm = mpmath.fprod(f.embed(u))
        if abs(abs(norm) - 1) > mpmath.mpf(10) ** (-20):
            problems.append(f"{f.name}: unit {list(u)} has norm {mpmath.nstr(norm, 15)}")
    if f.regulator is not None and f.unit_rank:
        if abs(regulator_from_units(f) / to_real(f.regulator) - 1) > mpmath.mpf(10) ** (-20):
            problems.append(f"{f.name}: stated regulator disagrees with the units")
    return problems


def field_from_dict(d: dict) -> NumberFieldInvariants:
    try:
        sig = d["signature"]
        return NumberFieldInvariants(
            name=str(d["name"]),
            d_F=int(d["discriminant"]),
            r1=int(sig[0]),
            r2=int(sig[1]),
            h=as_fraction(d.get("class_number", 1)),
            w=as_fraction(d.get("roots_of_unity", 2)),
            regulator=None if d.get("regulator") is None else str(d["regulator"]),
            polynomial=tuple(int(c) for c in d.get("polynomial", ())),
            integral_basis=tuple(tuple(as_fraction(c) for c in b) for b in d.get("integral_basis", ())),
            units=tuple(tuple(int(c) for c in u) for u in d.get("fundamental_units", ())),
            aliases=tuple(str(a) for a in d.get("aliases", ())),
        )
    except KeyError as e:
        raise FieldError(f"field entry {d.get('name', '?')!r} lacks {e.args[0]!r}") from None


def field_to_dict(f: NumberFieldInvariants) -> dict:
    out = {
        "name": f.name,
        "discriminant": f.d_F,
        "signature": [f.r1, f.r2],
        "class_number": _frac_str(f.h),
        "roots_of_unity": _frac_str(f.w),
    }
    if f.aliases:
        out["aliases"] = list(f.aliases)
    if f.regulator is not None:
        out["regulator"] = f.regulator
    if f.has_embeddings:
        out["polynomial"] = list(f.polynomial)
        out["integral_basis"] = [[_frac_str(c) for c in b] for b in f.integral_basis]
        out["fundamental_units"] = [list(u) for u in f.units]
    return out


def _frac_str(x: Fraction):
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


_CATALOG: dict[str, NumberFieldInvariants] | None = None


def field_catalog() -> dict[str, NumberFieldInvariants]:
    global _CATALOG
    if _CATALOG is None:
        text = resources.files("zetabsd").joinpath("data/fields.yaml").read_text(encoding="utf-8")
        entries = yaml.safe_load(text)["fields"]
        _CATALOG = {}
        for e in entries:
            f = field_from_dict(e)
            _CATALOG[f.name] = f
    return _CATALOG


def lookup_field(name: str) -> NumberFieldInvariants:
    cat = field_catalog()
    if name in cat:
        return cat[name]
    for f in cat.values():
        if name in f.aliases:
            return f
    raise FieldError(f"unknown field {name!r}; known: {', '.join(cat)}")
