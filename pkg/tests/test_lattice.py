import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetabsd.fields import lookup_field
from zetabsd.lattice import (DegenerateModule, DegeneratePairing, IntegralStructure, MalformedComplex,
                             PairedLattice, StructuredComplex, check_exact, chi_structured, delta_pairing,
                             det_structured, dual_structure, euler_equivalent, identity_euler_characteristic,
                             of_module_structures, orthogonal_sum, weight_product)
from zetabsd.numeric import working_precision

std = IntegralStructure.standard


def m(rows):
    return mpmath.matrix(rows)


def random_unimodular(rng, n):
    u = mpmath.eye(n)
    for _ in range(3 * n):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i != j:
            e = mpmath.eye(n)
            e[i, j] = rng.randint(-3, 3)
            u = u * e
    return u


def test_two_term_complex():
    with working_precision(30):
        c = StructuredComplex((std(1, 3), std(1, 5)), (m([[7]]),))
        assert det_structured(c) == 7
        assert weight_product(c) == Fraction(3, 5)
        assert abs(chi_structured(c) - mpmath.mpf(35) / 3) < mpmath.mpf(10) ** -25


def test_degree_offset_flips_orientation():
    with working_precision(30):
        c = StructuredComplex((std(1), std(1)), (m([[7]]),), degree_offset=1)
        assert abs(det_structured(c) - mpmath.mpf(1) / 7) < mpmath.mpf(10) ** -25


def test_three_term_complex_with_zero_term():
    # 0 -> Z^2 -> Z^2 -> 0 padded by a zero-dimensional term carrying a weight
    with working_precision(30):
        f = m([[2, 1], [0, 3]])
        c = StructuredComplex((std(2), std(2), IntegralStructure.zero(4)), (f, mpmath.matrix(0, 2)))
        assert abs(det_structured(c) - 6) < mpmath.mpf(10) ** -25
        assert weight_product(c) == 4
        assert abs(chi_structured(c) - mpmath.mpf(6) / 4) < mpmath.mpf(10) ** -25


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 4))
def test_determinant_independent_of_lattice_basis(seed, n):
    rng = random.Random(seed)
    with working_precision(40):
        f = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                f[i, j] = rng.uniform(-2, 2)
        f += 3 * mpmath.eye(n)
        base = det_structured(StructuredComplex((std(n), std(n)), (f,)))
        moved = StructuredComplex((IntegralStructure(random_unimodular(rng, n)),
                                   IntegralStructure(random_unimodular(rng, n))), (f,))
        assert abs(abs(det_structured(moved)) / abs(base) - 1) < mpmath.mpf(10) ** -30
        # scaling the target lattice by 2 changes det by 2^-n
        halved = StructuredComplex((std(n), IntegralStructure(2 * mpmath.eye(n))), (f,))
        assert abs(abs(det_structured(halved)) * 2 ** n / abs(base) - 1) < mpmath.mpf(10) ** -30


def test_exactness_is_enforced():
    with pytest.raises(MalformedComplex):
        det_structured(StructuredComplex((std(2), std(2)), (m([[1, 0], [0, 0]]),)))
    with pytest.raises(MalformedComplex):
        check_exact(StructuredComplex((std(1), std(1), std(1)), (m([[1]]), m([[1]]))))
    with pytest.raises(MalformedComplex):
        StructuredComplex((std(2), std(1)), (m([[1, 0], [0, 1]]),))
    with pytest.raises(MalformedComplex):
        StructuredComplex((std(1), std(1)), ())


def test_integral_structure_validation():
    with pytest.raises(DegenerateModule):
        IntegralStructure(m([[1, 2], [2, 4]]))
    with pytest.raises(DegenerateModule):
        IntegralStructure(mpmath.eye(2), 0)
    with pytest.raises(DegenerateModule):
        IntegralStructure(mpmath.matrix(2, 3))


def test_euler_equivalence_and_duals():
    with working_precision(30):
        a = IntegralStructure(m([[1, 1], [0, 1]]))
        assert euler_equivalent(std(2), a)
        assert not euler_equivalent(std(2), IntegralStructure(m([[2, 0], [0, 1]])))
        assert euler_equivalent(std(2), IntegralStructure(m([[2, 0], [0, 1]]), 2))
        assert not euler_equivalent(std(2, 2), IntegralStructure(m([[2, 0], [0, 1]]), 1))
        b = IntegralStructure(m([[2, 1], [1, 3]]), Fraction(3, 2))
        bb = dual_structure(dual_structure(b))
        assert bb.weight == b.weight and mpmath.mnorm(bb.basis - b.basis, 1) < mpmath.mpf(10) ** -25
        assert dual_structure(b).weight == Fraction(2, 3)


@pytest.mark.parametrize("name", ["Q", "Q(i)", "Q(sqrt5)", "Q(sqrt-23)", "Q(sqrt2)", "Q(sqrt-3)"])
def test_ring_of_integers_structures_differ_by_root_discriminant(name):
    f = lookup_field(name)
    with working_precision(40):
        i_m, j_m = of_module_structures(1, f)
        x = identity_euler_characteristic(i_m, j_m)
        assert abs(abs(x) - f.sqrt_abs_disc) < mpmath.mpf(10) ** -30
        i2, j2 = of_module_structures(2, f)
        assert abs(abs(identity_euler_characteristic(i2, j2)) - f.sqrt_abs_disc ** 2) < mpmath.mpf(10) ** -30


def test_ideal_weight_compensates_index():
    # a = (2, theta) in Q(sqrt-23), theta^2 = theta - 6, has norm 2
    f = lookup_field("Q(sqrt-23)")
    with working_precision(40):
        i_o, j_o = of_module_structures(1, f)
        i_a, j_a = of_module_structures(1, f, ideals=[[[2, 0], [0, 1]]])
        assert j_a.weight == Fraction(1, 2)
        ratio = abs(identity_euler_characteristic(i_a, j_a)) / abs(identity_euler_characteristic(i_o, j_o))
        assert abs(ratio - 1) < mpmath.mpf(10) ** -30


def test_delta_pairing():
    a2 = PairedLattice(2, ((2, -1), (-1, 2)))
    assert delta_pairing(a2) == 3
    assert delta_pairing(PairedLattice(2, ((2, -1), (-1, 2)), index_to_span=2)) == Fraction(3, 4)
    assert delta_pairing(PairedLattice(2, ((2, -1), (-1, 2)), torsion_order=3)) == Fraction(1, 3)
    assert delta_pairing(PairedLattice(2, ((2, -1), (-1, 2)), torsion_order=3), include_torsion=False) == 3
    assert delta_pairing(orthogonal_sum(a2, PairedLattice(1, ((5,),)))) == 15
    assert delta_pairing(PairedLattice(0, ())) == 1
    with working_precision(30):
        real = delta_pairing(PairedLattice(1, ((mpmath.mpf("0.5"),),)))
        assert real == mpmath.mpf("0.5")
    with pytest.raises(DegeneratePairing):
        delta_pairing(PairedLattice(2, ((1, 1), (1, 1))))
    with pytest.raises(DegeneratePairing):
        PairedLattice(2, ((1, 2), (3, 1)))
