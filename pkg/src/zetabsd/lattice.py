"""Integral structures (M, m), determinants of exact complexes, pairing discriminants.

Determinant convention: for an exact complex C^a -> ... -> C^b with lattice
bases L_i, choose b_i in C^i mapping onto a basis of im(f_i); then
basis_i = (f_{i-1} b_{i-1}, b_i) and

    det = prod_i [basis_i / L_i] ** (+1 if i odd else -1)

so a single map f from degree 0 to degree 1 has det = det(L_1^-1 f L_0).
chi = det / T with T = prod t_i ** (+1 if i even else -1).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .numeric import as_fraction, as_mpmatrix, det_complex, exact_det, is_exact, precise, to_real


class MalformedComplex(ValueError):
    pass


class DegenerateModule(ValueError):
    pass


class DegeneratePairing(ValueError):
    pass


def _mat(rows_or_matrix, rows: int | None = None, cols: int | None = None) -> mpmath.matrix:
    if isinstance(rows_or_matrix, mpmath.matrix):
        return rows_or_matrix.copy()
    if not rows_or_matrix and rows is not None:
        return mpmath.matrix(rows, cols or 0)
    return as_mpmatrix(rows_or_matrix)


def _tol():
    return mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))


def _zero_matrix(rows: int, cols: int) -> mpmath.matrix:
    return mpmath.matrix(rows, cols)


def _det(m: mpmath.matrix):
    if m.rows == 0:
        return mpmath.mpc(1)
    return det_complex(m)


def _hcat(blocks: Sequence[mpmath.matrix], rows: int) -> mpmath.matrix:
    cols = sum(b.cols for b in blocks)
    out = mpmath.matrix(rows, cols)
    c0 = 0
    for b in blocks:
        for i in range(rows):
            for j in range(b.cols):
                out[i, c0 + j] = b[i, j]
        c0 += b.cols
    return out


def block_diag(blocks: Sequence[mpmath.matrix]) -> mpmath.matrix:
    n = sum(b.rows for b in blocks)
    m = sum(b.cols for b in blocks)
    out = mpmath.matrix(n, m)
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                out[r0 + i, c0 + j] = b[i, j]
        r0 += b.rows
        c0 += b.cols
    return out


@dataclass(frozen=True)
class IntegralStructure:
    """A full-rank lattice (columns of `basis`) with a positive rational weight."""

    basis: mpmath.matrix
    weight: Fraction = Fraction(1)

    def __post_init__(self):
        b = _mat(self.basis)
        if b.rows != b.cols:
            raise DegenerateModule(f"lattice basis must be square, got {b.rows}x{b.cols}")
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "weight", as_fraction(self.weight))
        if self.weight <= 0:
            raise DegenerateModule("weight must be positive")
        if b.rows and _det(b) == 0:
            raise DegenerateModule("lattice basis is not linearly independent")

    @property
    def dim(self) -> int:
        return self.basis.rows

    @classmethod
    def standard(cls, n: int, weight=1) -> IntegralStructure:
        return cls(mpmath.eye(n) if n else mpmath.matrix(0, 0), weight)

    @classmethod
    def zero(cls, weight=1) -> IntegralStructure:
        """A zero-dimensional term carrying only a torsion order."""
        return cls(mpmath.matrix(0, 0), weight)


@dataclass(frozen=True)
class StructuredComplex:
    """terms[i] sits in degree degree_offset + i; maps[i]: terms[i] -> terms[i+1]."""

    terms: tuple[IntegralStructure, ...]
    maps: tuple[mpmath.matrix, ...]
    degree_offset: int = 0

    def __post_init__(self):
        terms = tuple(self.terms)
        if len(self.maps) != max(len(terms) - 1, 0):
            raise MalformedComplex(f"{len(terms)} terms need {len(terms) - 1} maps")
        maps = []
        for i, f in enumerate(self.maps):
            rows, cols = terms[i + 1].dim, terms[i].dim
            f = _mat(f, rows, cols)
            if (f.rows, f.cols) != (rows, cols):
                raise MalformedComplex(f"map {i} has shape {f.rows}x{f.cols}, expected {rows}x{cols}")
            maps.append(f)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "maps", tuple(maps))


def _pivoted_columns(f: mpmath.matrix) -> list[int]:
    """Column indices whose images span the column space (Gram-Schmidt with pivoting)."""
    if f.rows == 0 or f.cols == 0:
        return []
    cols = [[f[i, j] for i in range(f.rows)] for j in range(f.cols)]
    scale = max(mpmath.sqrt(sum(abs(x) ** 2 for x in c)) for c in cols)
    if scale == 0:
        return []
    chosen = []
    work = [list(c) for c in cols]
    remaining = set(range(f.cols))
    while remaining:
        norms = {j: mpmath.sqrt(sum(abs(x) ** 2 for x in work[j])) for j in remaining}
        j = max(remaining, key=lambda k: norms[k])
        if norms[j] <= _tol() * scale:
            break
        chosen.append(j)
        remaining.discard(j)
        q = [x / norms[j] for x in work[j]]
        for k in remaining:
            proj = sum(mpmath.conj(a) * b for a, b in zip(q, work[k]))
            work[k] = [b - proj * a for a, b in zip(q, work[k])]
    return sorted(chosen)


def _matnorm(m: mpmath.matrix):
    if m.rows == 0 or m.cols == 0:
        return mpmath.mpf(0)
    return mpmath.sqrt(sum(abs(m[i, j]) ** 2 for i in range(m.rows) for j in range(m.cols)))


@precise
def check_exact(c: StructuredComplex) -> None:
    """Raise MalformedComplex unless rank(f_{i-1}) + rank(f_i) = dim C^i and f_i f_{i-1} = 0."""
    ranks = [len(_pivoted_columns(f)) for f in c.maps]
    for i, t in enumerate(c.terms):
        before = ranks[i - 1] if i > 0 else 0
        after = ranks[i] if i < len(ranks) else 0
        if before + after != t.dim:
            raise MalformedComplex(
                f"not exact at degree {c.degree_offset + i}: "
                f"rank in {before} + rank out {after} != dim {t.dim}")
    for i in range(1, len(c.maps)):
        g, f = c.maps[i], c.maps[i - 1]
        if g.cols and f.cols and g.rows:
            comp = g * f
            if _matnorm(comp) > _tol() * max(1, _matnorm(g) * _matnorm(f)):
                raise MalformedComplex(f"maps {i - 1} and {i} do not compose to zero")


@precise
def det_structured(c: StructuredComplex):
    """det(C, L) as a complex number, meaningful up to sign."""
    check_exact(c)
    n = len(c.terms)
    lifts: list[mpmath.matrix] = []
    for i in range(n):
        dim = c.terms[i].dim
        if i < len(c.maps):
            chosen = _pivoted_columns(c.maps[i])
            b = mpmath.matrix(dim, len(chosen))
            for col, j in enumerate(chosen):
                b[j, col] = 1
        else:
            b = mpmath.matrix(dim, 0)
        lifts.append(b)
    result = mpmath.mpc(1)
    for i, t in enumerate(c.terms):
        if t.dim == 0:
            continue
        blocks = []
        if i > 0 and lifts[i - 1].cols:
            blocks.append(c.maps[i - 1] * lifts[i - 1])
        if lifts[i].cols:
            blocks.append(lifts[i])
        basis = _hcat(blocks, t.dim)
        value = _det(basis) / _det(t.basis)
        degree = c.degree_offset + i
        result = result * value if degree % 2 else result / value
    return result


def weight_product(c: StructuredComplex) -> Fraction:
    """T = prod t_i^((-1)^i): even-degree weights in the numerator."""
    t = Fraction(1)
    for i, term in enumerate(c.terms):
        if (c.degree_offset + i) % 2 == 0:
            t *= term.weight
        else:
            t /= term.weight
    return t


@precise
def chi_structured(c: StructuredComplex):
    return det_structured(c) / to_real(weight_product(c))


@precise
def identity_euler_characteristic(a: IntegralStructure, b: IntegralStructure):
    """chi of the identity map from (V, a) in degree 0 to (V, b) in degree 1."""
    if a.dim != b.dim:
        raise MalformedComplex("structures live in spaces of different dimension")
    cx = StructuredComplex((a, b), (mpmath.eye(a.dim) if a.dim else mpmath.matrix(0, 0),))
    return chi_structured(cx)


@precise
def euler_equivalent(a: IntegralStructure, b: IntegralStructure, tol="1e-9") -> bool:
    x = identity_euler_characteristic(a, b)
    tol = to_real(tol)
    return bool(abs(x - 1) <= tol or abs(x + 1) <= tol)


@precise
def dual_structure(a: IntegralStructure) -> IntegralStructure:
    """(Hom(M, Z), 1/m) in the linear dual, coordinates dual to the ambient ones."""
    if a.dim == 0:
        return IntegralStructure.zero(1 / a.weight)
    return IntegralStructure(mpmath.inverse(a.basis).T, 1 / a.weight)


def _rational_matrix(m) -> list[list[Fraction]]:
    return [[as_fraction(x) for x in row] for row in m]


@precise
def of_module_structures(d: int, field, embedding_images=None, ideals=None, torsion=1):
    """(i_M, j_M) for M = a_1 x_1 + ... + a_d x_d, a projective O_F-module of rank d.

    `embedding_images` is psi (rows: embeddings, columns: integral basis),
    defaulting to the field's own; `ideals` lists Z-bases of the a_i as
    rational matrices in integral-basis coordinates (columns), default O_F.
    Coordinates on M (x) C are ordered (summand, embedding).
    """
    psi = field.embedding_matrix() if embedding_images is None else _mat(embedding_images)
    n = psi.rows
    if psi.cols != n or n != field.degree:
        raise DegenerateModule(f"embedding images must be {field.degree}x{field.degree}")
    if n and abs(_det(psi)) < _tol():
        raise DegenerateModule("embedding images are rank-deficient")
    if ideals is None:
        ideals = [[[int(i == j) for j in range(n)] for i in range(n)]] * d
    if len(ideals) != d:
        raise DegenerateModule(f"expected {d} ideals, got {len(ideals)}")
    blocks = []
    b = Fraction(1)
    for a in ideals:
        a = _rational_matrix(a)
        norm = exact_det(a)
        if norm == 0:
            raise DegenerateModule("ideal basis is rank-deficient")
        b /= abs(norm)
        blocks.append(psi * as_mpmatrix(a))
    i_m = IntegralStructure(block_diag(blocks) if blocks else mpmath.matrix(0, 0), torsion)
    j_m = IntegralStructure.standard(n * d, b * as_fraction(torsion))
    return i_m, j_m


@dataclass(frozen=True)
class PairedLattice:
    """A finitely generated group N with a pairing known on a maximal independent set.

    index_to_span is (N/tors : N_0); torsion_order is [N_tor].
    """

    rank: int
    gram: tuple[tuple, ...]
    index_to_span: Fraction = Fraction(1)
    torsion_order: Fraction = Fraction(1)

    def __post_init__(self):
        g = tuple(tuple(row) for row in self.gram)
        if len(g) != self.rank or any(len(row) != self.rank for row in g):
            raise DegeneratePairing(f"gram must be {self.rank}x{self.rank}")
        for i in range(self.rank):
            for j in range(i):
                if is_exact(g[i][j]) and is_exact(g[j][i]):
                    if g[i][j] != g[j][i]:
                        raise DegeneratePairing("gram is not symmetric")
                elif abs(to_real(g[i][j]) - to_real(g[j][i])) > _tol() * (1 + abs(to_real(g[i][j]))):
                    raise DegeneratePairing("gram is not symmetric")
        object.__setattr__(self, "gram", g)
        object.__setattr__(self, "index_to_span", as_fraction(self.index_to_span))
        object.__setattr__(self, "torsion_order", as_fraction(self.torsion_order))


@precise
def delta_pairing(p: PairedLattice, include_torsion: bool = True):
    """|det(gram)| / ((N/tors : N_0) * [N_tor])^2, exact when the gram is rational."""
    scale = p.index_to_span * (p.torsion_order if include_torsion else 1)
    if all(is_exact(x) for row in p.gram for x in row):
        d = exact_det([list(r) for r in p.gram]) if p.rank else Fraction(1)
        if d == 0:
            raise DegeneratePairing("pairing is degenerate")
        return abs(d) / scale ** 2
    d = _det(as_mpmatrix(p.gram)) if p.rank else mpmath.mpf(1)
    if abs(d) < _tol():
        raise DegeneratePairing("pairing is degenerate")
    return abs(d) / to_real(scale) ** 2


def orthogonal_sum(a: PairedLattice, b: PairedLattice) -> PairedLattice:
    n = a.rank + b.rank
    gram = [[0] * n for _ in range(n)]
    for i in range(a.rank):
        for j in range(a.rank):
            gram[i][j] = a.gram[i][j]
    for i in range(b.rank):
        for j in range(b.rank):
            gram[a.rank + i][a.rank + j] = b.gram[i][j]
    return PairedLattice(n, tuple(tuple(r) for r in gram),
                         a.index_to_span * b.index_to_span, a.torsion_order * b.torsion_order)
