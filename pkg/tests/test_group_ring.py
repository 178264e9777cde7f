"""Tests for src.group_ring and src.cyclotomic: ring arithmetic, units, morphisms."""

from fractions import Fraction

import pytest

from src.cyclotomic import CyclotomicNumber, canonical_value, field_det, square_roots
from src.errors import GroupError
from src.group_ring import (
    GroupRingElement,
    apply_morphism,
    augmentation_morphism,
    certify_unit,
    character,
    conjugate_morphism,
    gr_mul,
    induced_inclusion,
    involution,
    standard_morphisms,
)
from src.groups import (
    cyclic_group,
    infinite_cyclic_group,
    power_hom,
    semidirect_group,
    trivial_group,
)


def _t(G, e=1, c=1):
    return GroupRingElement.monomial(G, (e,), c)


class TestArithmetic:
    def test_golden_unit_product(self):
        G = cyclic_group(5)
        u = _t(G) + _t(G, 4) - 1
        u_inv = _t(G, 2) + _t(G, 3) - 1
        assert u * u_inv == 1
        assert u_inv * u == GroupRingElement.one(G)

    def test_zero_terms_vanish(self):
        G = cyclic_group(5)
        x = _t(G) - _t(G)
        assert x == 0
        assert not x
        assert str(x) == "0"

    def test_str(self):
        G = cyclic_group(5)
        assert str(_t(G) + _t(G, 4) - 1) == "-1 + t + t^4"
        assert str(_t(G, 2, 3) - 2) == "-2 + 3*t^2"

    def test_powers(self):
        G = cyclic_group(5)
        assert _t(G) ** 5 == 1
        assert _t(G) ** -1 == _t(G, 4)

    def test_negative_power_of_nontrivial_unit_raises(self):
        G = cyclic_group(5)
        with pytest.raises(ValueError):
            (_t(G) + 1) ** -1

    def test_mixing_groups_raises(self):
        with pytest.raises(GroupError):
            _t(cyclic_group(5)) + _t(cyclic_group(3))

    def test_gr_mul_checks_groups(self):
        G = cyclic_group(5)
        assert gr_mul(_t(G), _t(G, 4)) == 1
        with pytest.raises(GroupError):
            gr_mul(_t(G), _t(cyclic_group(3)))

    def test_induced_inclusion(self):
        G = cyclic_group(5)
        sd = semidirect_group(G, 2)
        u = _t(G) + _t(G, 4) - 1
        included = GroupRingElement(sd, [((1, 0), 1), ((4, 0), 1), ((0, 0), -1)])
        assert induced_inclusion(u, sd) == included
        assert involution(u) == u

    def test_augmentation(self):
        G = cyclic_group(5)
        assert (_t(G, 2, 3) - 2).augmentation() == 1
        assert GroupRingElement.norm_element(G).augmentation() == 5

    def test_map_group(self):
        G = cyclic_group(5)
        u = _t(G) + _t(G, 4) - 1
        assert u.map_group(power_hom(G, 2)) == _t(G, 2) + _t(G, 3) - 1


class TestInvolution:
    def test_bar_inverts_group_elements(self):
        G = cyclic_group(5)
        assert _t(G).bar() == _t(G, 4)

    def test_bar_uses_orientation_character(self):
        G = cyclic_group(2, w=-1)
        assert _t(G).bar() == -_t(G)

    def test_golden_unit_is_self_conjugate(self):
        G = cyclic_group(5)
        u = _t(G) + _t(G, 4) - 1
        assert u.bar() == u

    def test_bar_is_an_anti_involution(self):
        G = semidirect_group(cyclic_group(5), 2)
        a = GroupRingElement(G, [((1, 0), 2), ((0, 1), 1)])
        b = GroupRingElement(G, [((2, 1), 1), ((0, 0), -3)])
        assert a.bar().bar() == a
        assert (a * b).bar() == b.bar() * a.bar()


class TestCertifyUnit:
    def test_trivial_unit(self):
        G = cyclic_group(5)
        assert certify_unit(-_t(G, 2)) == -_t(G, 3)

    def test_golden_unit(self):
        G = cyclic_group(5)
        u = _t(G) + _t(G, 4) - 1
        assert certify_unit(u) == _t(G, 2) + _t(G, 3) - 1

    def test_non_units(self):
        G = cyclic_group(5)
        assert certify_unit(_t(G) - 1) is None
        assert certify_unit(GroupRingElement.constant(G, 2)) is None
        assert certify_unit(GroupRingElement.zero(G)) is None

    def test_order_limit(self):
        G = cyclic_group(5)
        u = _t(G) + _t(G, 4) - 1
        assert certify_unit(u, max_order=4) is None

    def test_infinite_group_only_trivial_units(self):
        G = infinite_cyclic_group()
        assert certify_unit(_t(G, 3)) == _t(G, -3)
        assert certify_unit(_t(G) + 1) is None

    def test_semidirect_single_z_degree(self):
        G = cyclic_group(5)
        sd = semidirect_group(G, 1)
        u = GroupRingElement(sd, [((1, 2), 1), ((4, 2), 1), ((0, 2), -1)])
        inv = certify_unit(u)
        assert inv is not None
        assert u * inv == 1


class TestMorphisms:
    def test_standard_labels(self):
        labels = [m.label for m in standard_morphisms(cyclic_group(5))]
        assert labels == ["aug", "chi1", "chi2", "chi3", "chi4"]
        assert [m.label for m in standard_morphisms(infinite_cyclic_group())] == ["aug", "laurent"]
        assert [m.label for m in standard_morphisms(trivial_group())] == ["aug"]

    def test_semidirect_keeps_invariant_characters(self):
        twisted = semidirect_group(cyclic_group(5), 2)
        assert [m.label for m in standard_morphisms(twisted)] == ["aug", "laurent"]
        untwisted = semidirect_group(cyclic_group(5), 1)
        assert len(standard_morphisms(untwisted)) == 6

    def test_augmentation_value(self):
        G = cyclic_group(5)
        u = _t(G) + _t(G, 4) - 1
        assert apply_morphism(u, augmentation_morphism(G)) == Fraction(1)

    def test_character_is_multiplicative(self):
        G = cyclic_group(5)
        chi = character(G, 1)
        u = _t(G) + _t(G, 4) - 1
        u_inv = _t(G, 2) + _t(G, 3) - 1
        assert chi(u) * chi(u_inv) == 1

    def test_conjugate_morphism_matches_bar(self):
        G = cyclic_group(5)
        chi = character(G, 2)
        a = _t(G, 1, 2) + 3
        assert chi(a.bar()) == conjugate_morphism(chi)(a)

    def test_morphism_rejects_other_group(self):
        with pytest.raises(GroupError):
            apply_morphism(_t(cyclic_group(3)), character(cyclic_group(5), 1))


class TestCyclotomic:
    def test_zeta_has_order_n(self):
        z = CyclotomicNumber.zeta_power(5, 1)
        assert z ** 5 == 1
        assert not z ** 2 == 1

    def test_coefficients_reduce_modulo_phi(self):
        # 1 + z + z^2 + z^3 + z^4 = 0 in Q(zeta_5)
        x = CyclotomicNumber.from_coeffs(5, [1, 1, 1, 1, 1])
        assert x == 0
        assert len(CyclotomicNumber.zeta_power(5, 4).coeffs()) == 4

    def test_inverse(self):
        x = CyclotomicNumber.from_coeffs(5, [-1, 1])
        assert x * x.inverse() == 1

    def test_canonical_value_detects_roots_of_unity(self):
        _, trivial = canonical_value("cyclotomic", -CyclotomicNumber.zeta_power(5, 3), 5)
        assert trivial
        _, trivial = canonical_value("cyclotomic", CyclotomicNumber.from_coeffs(5, [-1, 1]), 5)
        assert not trivial

    def test_canonical_value_integers(self):
        assert canonical_value("integers", Fraction(-1)) == (Fraction(1), True)
        assert canonical_value("integers", Fraction(5)) == (Fraction(5), False)

    def test_field_det(self):
        rows = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(1)]]
        assert field_det(rows, Fraction(1)) == 1
        assert field_det([], Fraction(1)) == 1

    def test_square_roots(self):
        r = CyclotomicNumber.from_coeffs(5, [0, 1, 0, 0])
        roots = square_roots(r * r)
        assert r in roots
        assert -r in roots
