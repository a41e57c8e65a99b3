"""Archimedean periods of abelian varieties and their determinant interpretation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import NamedTuple, Sequence

import mpmath

from .lattice import (IntegralStructure, StructuredComplex, block_diag, chi_structured,
                      det_structured, dual_structure)
from .numeric import as_fraction, as_mpmatrix, det_complex, exact_det, precise, to_complex, to_real


class DegeneratePeriods(ValueError):
    pass


class IncompleteRecord(ValueError):
    pass


@dataclass(frozen=True)
class PlacePeriodData:
    """Integrals of the differentials eta_j over Betti cycles at one infinite place.

    Real place: g x g against a basis of H_1^+.  Complex place: 2g x g
    against a basis of H_1 of A_sigma.
    """

    kind: str
    integrals: tuple[tuple, ...]
    pi0_order: int = 1

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.integrals)
        object.__setattr__(self, "integrals", rows)
        if self.kind not in ("real", "complex"):
            raise DegeneratePeriods(f"place kind must be real or complex, got {self.kind!r}")
        g = len(rows[0]) if rows else 0
        want = g if self.kind == "real" else 2 * g
        if len(rows) != want or any(len(r) != g for r in rows):
            raise DegeneratePeriods(f"{self.kind} place needs a {want}x{g} integral matrix")
        if self.pi0_order < 1 or self.pi0_order & (self.pi0_order - 1):
            raise DegeneratePeriods("pi0_order must be a power of two")
        if self.kind == "complex" and self.pi0_order != 1:
            raise DegeneratePeriods("pi0_order must be 1 at a complex place")

    @property
    def genus(self) -> int:
        return len(self.integrals[0]) if self.integrals else 0

    def matrix(self) -> mpmath.matrix:
        g = self.genus
        m = mpmath.matrix(len(self.integrals), g)
        for i, row in enumerate(self.integrals):
            for j, x in enumerate(row):
                m[i, j] = period_entry(x)
        return m

    def full_matrix(self) -> mpmath.matrix:
        """M_v: the integrals, and at a complex place their conjugates alongside."""
        m = self.matrix()
        if self.kind == "real":
            return m
        g = self.genus
        out = mpmath.matrix(2 * g, 2 * g)
        for i in range(2 * g):
            for j in range(g):
                out[i, j] = m[i, j]
                out[i, g + j] = mpmath.conj(m[i, j])
        return out


@dataclass(frozen=True)
class EtaData:
    """The chosen F-basis eta; Lambda^g omega_N = a_eta * (eta_1 ^ ... ^ eta_g).

    `generator` optionally gives a_eta = (generator) in integral-basis
    coordinates; it is needed only for the O_F-lattice realization.
    """

    ideal_norm: Fraction = Fraction(1)
    label: str = ""
    generator: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "ideal_norm", as_fraction(self.ideal_norm))
        if self.ideal_norm <= 0:
            raise IncompleteRecord("ideal_norm must be positive")


@dataclass(frozen=True)
class AbelianVarietyData:
    genus: int
    places: tuple[PlacePeriodData, ...] = ()
    eta: EtaData = field(default_factory=EtaData)
    tamagawa_product: Fraction = Fraction(1)
    torsion: Fraction = Fraction(1)
    torsion_dual: Fraction = Fraction(1)
    theta_nt: str = "1"
    sha_order: Fraction = Fraction(1)
    lstar: str | None = "1"
    rank: int = 0
    ainvs: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "places", tuple(self.places))
        for name in ("tamagawa_product", "torsion", "torsion_dual", "sha_order"):
            v = as_fraction(getattr(self, name))
            if v < 1:
                raise IncompleteRecord(f"{name} must be >= 1, got {v}")
            object.__setattr__(self, name, v)
        if self.genus < 0 or self.rank < 0:
            raise IncompleteRecord("genus and rank must be non-negative")
        if self.genus > 0:
            for p in self.places:
                if p.genus != self.genus:
                    raise DegeneratePeriods(f"place data of genus {p.genus} for a genus {self.genus} variety")
        if self.rank == 0 and to_real(self.theta_nt) != 1:
            raise IncompleteRecord("rank 0 requires theta_nt = 1 (empty determinant)")
        if self.genus == 0 and (self.rank or self.torsion != 1 or self.sha_order != 1):
            raise IncompleteRecord("a trivial Jacobian has rank 0 and trivial torsion and Sha")

    @property
    def Theta(self):
        return to_real(self.theta_nt)

    @property
    def L(self):
        if self.lstar is None:
            raise IncompleteRecord("L*(J,1) missing")
        return to_real(self.lstar)

    @property
    def pi0_product(self) -> int:
        out = 1
        for p in self.places:
            out *= p.pi0_order
        return out


def period_entry(x):
    """A period-matrix entry: a real (decimal string or number) or a pair [re, im]."""
    if isinstance(x, (tuple, list)):
        if len(x) != 2:
            raise DegeneratePeriods(f"complex entry must be [re, im], got {x!r}")
        return mpmath.mpc(to_real(x[0]), to_real(x[1]))
    return to_complex(x)


def _check_places(a: AbelianVarietyData, field) -> None:
    if a.genus == 0:
        return
    if field is not None:
        kinds = [k for k, _ in field.place_slices()]
        if [p.kind for p in a.places] != kinds:
            raise IncompleteRecord(f"period data must list places as {kinds}")


@precise
def place_period(p: PlacePeriodData):
    if p.genus == 0:
        return mpmath.mpf(1)
    d = abs(det_complex(p.full_matrix()))
    if d < mpmath.mpf(10) ** (-(mpmath.mp.dps // 2)):
        raise DegeneratePeriods("period matrix is singular")
    return p.pi0_order * d


@precise
def archimedean_period(a: AbelianVarietyData, field=None):
    """P_inf(eta): product of the place periods (including pi0 orders)."""
    _check_places(a, field)
    if a.genus == 0:
        return mpmath.mpf(1)
    if not a.places:
        raise IncompleteRecord("no archimedean period data")
    return mpmath.fprod(place_period(p) for p in a.places)


@precise
def global_volume(a: AbelianVarietyData, field):
    """P_A = P_fin * P_inf(eta) * N(a_eta) / |d_F|^(g/2)."""
    return (to_real(a.tamagawa_product) * archimedean_period(a, field) * to_real(a.eta.ideal_norm)
            / mpmath.sqrt(abs(field.d_F)) ** a.genus)


class PeriodDeterminant(NamedTuple):
    modulus: object
    i_power: int  # phase sqrt(-1)^i_power, exponent mod 4
    pi0_factor: int  # the 2-group order left out of `modulus`


@precise
def det_gamma_from_period(a: AbelianVarietyData, field) -> PeriodDeterminant:
    """|det gamma*| on the i-structure: (prod |det M_v|) * N(a_eta) / |d_F|^(g/2).

    The pi0 orders are not part of the determinant; they are reported in
    `pi0_factor` instead.
    """
    if a.genus == 0:
        return PeriodDeterminant(mpmath.mpf(1), 0, 1)
    p = archimedean_period(a, field) / a.pi0_product
    modulus = p * to_real(a.eta.ideal_norm) / mpmath.sqrt(abs(field.d_F)) ** a.genus
    return PeriodDeterminant(modulus, (a.genus * field.r2) % 4, a.pi0_product)


# -- lattice-structure realization of the period isomorphism ------------------

def _period_matrix(a: AbelianVarietyData) -> mpmath.matrix:
    """Block-diagonal matrix of gamma*: omega (x) C -> H^1_B, coordinates (sigma, j)."""
    return block_diag([p.full_matrix() for p in a.places])


def _inverse_ideal_basis(field, generator) -> list[list[Fraction]]:
    mult = field.multiplication_matrix(generator)
    n = len(mult)
    # invert the exact multiplication matrix by Gauss-Jordan over Q
    aug = [list(mult[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for c in range(n):
        p = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [x / piv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c]:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    return [row[n:] for row in aug]


@precise
def gamma_complex(a: AbelianVarietyData, field, structure: str = "j") -> StructuredComplex:
    """gamma: (H^1_B)^dual -> Lie as a two-term complex in degrees 0, 1.

    The source carries the dual Betti lattice; the target carries either
    the O_F-structure j (standard coordinates, weight N(a_eta)) or the
    abelian-group structure i (the psi-image of Lie, weight 1).
    """
    _check_places(a, field)
    g, n = a.genus, field.degree
    p = _period_matrix(a).T
    source = IntegralStructure.standard(n * g)
    if structure == "j":
        target = IntegralStructure.standard(n * g, a.eta.ideal_norm)
    elif structure == "i":
        psi = field.embedding_matrix()
        blocks = [psi] * g
        if a.eta.ideal_norm != 1:
            if a.eta.generator is None:
                raise IncompleteRecord("the i-structure needs a generator for a_eta")
            inv = _inverse_ideal_basis(field, a.eta.generator)
            if abs(exact_det(inv)) * a.eta.ideal_norm != 1:
                raise IncompleteRecord("eta generator does not have norm ideal_norm")
            blocks[-1] = psi * as_mpmatrix(inv)
        # coordinates of psi-image are (sigma, j); blocks above are (j, sigma)
        raw = block_diag(blocks)
        perm = mpmath.matrix(n * g, n * g)
        for j in range(g):
            for s in range(n):
                perm[s * g + j, j * n + s] = 1
        target = IntegralStructure(perm * raw, 1)
    else:
        raise ValueError("structure must be 'i' or 'j'")
    return StructuredComplex((source, target), (p,))


@precise
def j_structure_determinant(a: AbelianVarietyData, field):
    """det_{O_F}(gamma) computed through the lattice calculus."""
    if a.genus == 0:
        return mpmath.mpc(1)
    return chi_structured(gamma_complex(a, field, "j"))


@precise
def i_structure_determinant(a: AbelianVarietyData, field):
    if a.genus == 0:
        return mpmath.mpc(1)
    return chi_structured(gamma_complex(a, field, "i"))


@precise
def dual_period_check(a: AbelianVarietyData, tol="1e-9", betti_bases=None, omega_bases=None,
                      polarizations=None) -> bool:
    """det of gamma* against the given lattices equals det of its dual against the dual lattices.

    Bases default to the standard ones.  A polarization, if supplied per
    place, must be unimodular (principal); the dual Betti lattice is then
    transported by it, which cannot change the determinant.
    """
    if a.genus == 0:
        return True
    tol = to_real(tol)
    for v, place in enumerate(a.places):
        m = place.full_matrix()
        n = m.rows
        hb = IntegralStructure(betti_bases[v] if betti_bases else mpmath.eye(n))
        om = IntegralStructure(omega_bases[v] if omega_bases else mpmath.eye(n))
        forward = det_structured(StructuredComplex((om, hb), (m,)))
        hb_dual = dual_structure(hb)
        if polarizations:
            e = as_mpmatrix(polarizations[v])
            if abs(abs(det_complex(e)) - 1) > tol:
                raise DegeneratePeriods("polarization is not principal")
            hb_dual = IntegralStructure(hb_dual.basis * e, hb_dual.weight)
        backward = det_structured(StructuredComplex((hb_dual, dual_structure(om)), (m.T,)))
        if abs(abs(forward) / abs(backward) - 1) > tol:
            return False
    return True


@precise
def block_identity_value(p: PlacePeriodData):
    """|det(conj(Omega) - Omega)| * |det K|^2 where the integrals are (K; Omega K)."""
    if p.kind != "complex":
        raise ValueError("block identity applies at complex places")
    g = p.genus
    m = p.matrix()
    k = mpmath.matrix(g, g)
    bottom = mpmath.matrix(g, g)
    for i in range(g):
        for j in range(g):
            k[i, j] = m[i, j]
            bottom[i, j] = m[g + i, j]
    omega = bottom * mpmath.inverse(k)
    diff = mpmath.matrix(g, g)
    for i in range(g):
        for j in range(g):
            diff[i, j] = mpmath.conj(omega[i, j]) - omega[i, j]
    return abs(det_complex(diff)) * abs(det_complex(k)) ** 2


@precise
def rescale_eta(a: AbelianVarietyData, field, j: int, k) -> AbelianVarietyData:
    """Replace eta_j by k * eta_j, k in F given in integral-basis coordinates."""
    images = field.embed(k)
    nk = field_norm(field, k)
    if nk == 0:
        raise ValueError("k must be nonzero")
    rows = [s for _, s in field.place_slices()]
    places = []
    for place, slots in zip(a.places, rows):
        sk = images[slots[0]]
        new = [list(r) for r in place.integrals]
        for r in new:
            r[j] = period_entry(r[j]) * sk
        if place.kind == "real":
            new = [[mpmath.re(x) for x in r] for r in new]
        places.append(replace(place, integrals=tuple(tuple(r) for r in new)))
    eta = EtaData(a.eta.ideal_norm / abs(nk), a.eta.label + f" rescaled at {j}", None)
    return replace(a, places=tuple(places), eta=eta)


def field_norm(field, coords) -> Fraction:
    """N_{F/Q}(x) exactly, x in integral-basis coordinates (rational allowed)."""
    coords = [as_fraction(c) for c in coords]
    den = 1
    for c in coords:
        den = math.lcm(den, c.denominator)
    scaled = [int(c * den) for c in coords]
    return exact_det(field.multiplication_matrix(scaled)) / Fraction(den) ** field.degree


# -- elliptic curves over Q: the AGM oracle ---------------------------------

def b_invariants(ainvs: Sequence[int]) -> tuple[int, int, int, int, int]:
    a1, a2, a3, a4, a6 = ainvs
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    disc = -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    return b2, b4, b6, b8, disc


@precise
def elliptic_real_period(ainvs: Sequence[int]) -> tuple[object, int]:
    """(least positive real period of dx/(2y + a1 x + a3), number of real components)."""
    b2, b4, b6, _, disc = b_invariants(ainvs)
    if disc == 0:
        raise DegeneratePeriods("singular curve")
    roots = mpmath.polyroots([4, b2, 2 * b4, b6], maxsteps=200, extraprec=200)
    if disc > 0:
        e1, e2, e3 = sorted((mpmath.re(r) for r in roots), reverse=True)
        return mpmath.pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e1 - e2)), 2
    eps = mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))
    e1 = next(mpmath.re(r) for r in roots if abs(mpmath.im(r)) < eps)
    e2 = next(r for r in roots if mpmath.im(r) > eps)
    m = mpmath.re(e2)
    big_r = abs(e1 - e2)
    return mpmath.pi / mpmath.agm(mpmath.sqrt(big_r), mpmath.sqrt((big_r + e1 - m) / 2)), 1
