from fractions import Fraction

import mpmath
import pytest

import oracles
from zetabsd.fields import (FieldError, check_embedding_data, field_catalog, field_from_dict, field_to_dict,
                            lookup_field)
from zetabsd.lattice import check_exact, chi_structured
from zetabsd.numeric import equal_up_to_two_power, working_precision
from zetabsd.special_values import (b01_complex, chi_b01, chi_S, conj_s_one_complex, conj_s_zero_complex,
                                    surface_c1_complex, zeta_star_S)

DISCS = {"Q": 1, "Q(i)": -4, "Q(sqrt5)": 5, "Q(sqrt-23)": -23, "Q(sqrt2)": 8, "Q(sqrt-3)": -3, "Q(sqrt3)": 12}
TIGHT = mpmath.mpf(10) ** -40


def rel(a, b):
    return abs(a / b - 1)


@pytest.fixture(autouse=True)
def fifty_digits():
    with working_precision(50):
        yield


def test_catalog_covers_the_oracle_fields():
    assert set(DISCS) <= set(field_catalog())
    for name, d in DISCS.items():
        f = lookup_field(name)
        assert f.d_F == d
        assert not check_embedding_data(f)


@pytest.mark.parametrize("name", [n for n, d in DISCS.items() if d < 0])
def test_class_numbers_by_reduced_forms(name):
    f = lookup_field(name)
    assert f.h == oracles.class_number_by_forms(f.d_F)


@pytest.mark.parametrize("name", [n for n, d in DISCS.items() if d > 1])
def test_regulators_by_pell(name):
    f = lookup_field(name)
    assert rel(f.R, oracles.regulator_by_pell(f.d_F)) < TIGHT


def test_aliases_resolve():
    assert lookup_field("gaussian") is lookup_field("Q(i)")
    assert lookup_field("QQ").name == "Q"
    with pytest.raises(FieldError):
        lookup_field("Q(sqrt7)")


def test_field_round_trip():
    for f in field_catalog().values():
        assert field_from_dict(field_to_dict(f)) == f


def test_bad_field_data_is_rejected():
    d = field_to_dict(lookup_field("Q(sqrt5)"))
    with pytest.raises((FieldError, ValueError)):
        field_from_dict({**d, "signature": [1, 1]})
    broken = field_from_dict({**d, "discriminant": 13, "name": "wrong"})
    assert check_embedding_data(broken)


@pytest.mark.parametrize("name", list(DISCS))
def test_zeta_at_one_is_the_dedekind_residue(name):
    f = lookup_field(name)
    assert rel(zeta_star_S(f, 1), oracles.residue_at_one(f.d_F)) < TIGHT


@pytest.mark.parametrize("name", list(DISCS))
def test_zeta_at_zero_is_the_leading_coefficient(name):
    f = lookup_field(name)
    assert rel(zeta_star_S(f, 0), oracles.leading_at_zero(f.d_F)) < TIGHT


@pytest.mark.parametrize("name", list(DISCS))
def test_lattice_calculus_reproduces_class_number_formulas(name):
    f = lookup_field(name)
    tp = equal_up_to_two_power(chi_S(f, 1), zeta_star_S(f, 1), "1e-40")
    assert tp is not None and tp.k == -f.r1 and not tp.sign_flip
    assert rel(chi_S(f, 0), -zeta_star_S(f, 0)) < TIGHT
    assert rel(chi_b01(f), f.sqrt_abs_disc / (2 * mpmath.pi) ** f.r2) < TIGHT


@pytest.mark.parametrize("name", list(DISCS))
def test_number_field_complexes_are_exact(name):
    f = lookup_field(name)
    for c in (conj_s_one_complex(f), conj_s_zero_complex(f), b01_complex(f)):
        check_exact(c)


def test_gaussian_residue_is_pi_over_four():
    assert rel(zeta_star_S(lookup_field("Q(i)"), 1), mpmath.pi / 4) < TIGHT


@pytest.mark.parametrize("name", ["Q", "Q(sqrt5)", "Q(i)"])
def test_surface_complex_determinant(name):
    f = lookup_field(name)
    gram = ((Fraction(-2), Fraction(1)), (Fraction(1), Fraction(-3)))
    c = surface_c1_complex(f, gram, 3)
    det_g = 5
    want = f.R ** 2 / (9 * det_g)
    assert rel(abs(chi_structured(c)), want) < TIGHT
