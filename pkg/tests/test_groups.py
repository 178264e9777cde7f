"""Tests for src.groups: normal forms, group laws and homomorphisms."""

import pytest

from src.errors import GroupError
from src.groups import (
    CYCLIC,
    FREE_ABELIAN,
    SEMIDIRECT,
    GroupHom,
    cyclic_group,
    free_abelian_group,
    identity_hom,
    inclusion_hom,
    infinite_cyclic_group,
    power_hom,
    product_group,
    reversal_hom,
    semidirect_group,
    trivial_group,
)


class TestGroupSpec:
    def test_labels(self):
        assert trivial_group().label == "1"
        assert cyclic_group(5).label == "C5"
        assert infinite_cyclic_group().label == "Z"
        assert free_abelian_group(2).label == "Z^2"
        assert semidirect_group(cyclic_group(5), 2).label == "C5 x|_2 Z"

    def test_cyclic_normal_form(self):
        G = cyclic_group(5)
        assert G.normalize((7,)) == (2,)
        assert G.mul((3,), (4,)) == (2,)
        assert G.inverse((1,)) == (4,)
        assert G.power((1,), -2) == (3,)

    def test_elements_of_finite_groups(self):
        assert cyclic_group(3).elements() == [(0,), (1,), (2,)]
        assert trivial_group().elements() == [()]

    def test_infinite_group_has_no_element_list(self):
        with pytest.raises(GroupError):
            infinite_cyclic_group().elements()

    def test_default_generator_names(self):
        assert cyclic_group(4).names == ("t",)
        assert free_abelian_group(2).names == ("x1", "x2")
        assert semidirect_group(cyclic_group(5), 2).names == ("t", "z")

    def test_names_do_not_affect_equality(self):
        assert cyclic_group(5, name="g") == cyclic_group(5)

    def test_odd_cyclic_group_rejects_nontrivial_w(self):
        with pytest.raises(GroupError):
            cyclic_group(5, w=-1)

    def test_w_of_counts_odd_exponents(self):
        G = cyclic_group(4, w=-1)
        assert G.w_of((1,)) == -1
        assert G.w_of((2,)) == 1

    def test_format_element(self):
        G = free_abelian_group(2, names=("x", "y"))
        assert G.format_element((1, -2)) == "x*y^-2"
        assert G.format_element((0, 0)) == "1"


class TestSemidirect:
    def test_conjugation_law(self):
        G = semidirect_group(cyclic_group(5), 2)
        t, z = (1, 0), (0, 1)
        # z t z^-1 = t^2
        assert G.mul(G.mul(z, t), G.inverse(z)) == (2, 0)

    def test_inverse(self):
        G = semidirect_group(cyclic_group(5), 2)
        a = (1, 1)
        assert G.mul(a, G.inverse(a)) == G.identity()
        assert G.mul(G.inverse(a), a) == G.identity()

    def test_alpha_must_be_invertible(self):
        with pytest.raises(GroupError):
            semidirect_group(cyclic_group(4), 2)

    def test_free_abelian_base_needs_unit_determinant(self):
        with pytest.raises(GroupError):
            semidirect_group(free_abelian_group(2), ((2, 0), (0, 1)))

    def test_kind(self):
        G = semidirect_group(free_abelian_group(1), ((1,),))
        assert G.kind == SEMIDIRECT
        assert not G.is_abelian


class TestGroupHom:
    def test_relation_violation_raises(self):
        with pytest.raises(GroupError):
            GroupHom(cyclic_group(4), cyclic_group(5), ((1,),))

    def test_power_hom(self):
        phi = power_hom(cyclic_group(5), 2)
        assert phi((3,)) == (1,)
        assert not phi.is_identity
        assert identity_hom(cyclic_group(5)).is_identity

    def test_compose(self):
        G = cyclic_group(5)
        phi = power_hom(G, 2)
        assert phi.compose(phi).images == ((4,),)
        assert phi.compose(phi).compose(phi.compose(phi)).is_identity

    def test_inclusion_into_semidirect(self):
        G = cyclic_group(5)
        sd = semidirect_group(G, 2)
        j = inclusion_hom(G, sd)
        assert j((3,)) == (3, 0)

    def test_reversal(self):
        sd = semidirect_group(cyclic_group(5), 2)
        target, sigma = reversal_hom(sd)
        assert target.alpha == (3,)
        assert sigma((0, 1)) == (0, -1)
        assert sigma((1, 0)) == (1, 0)


class TestProductGroup:
    def test_coprime_cyclic(self):
        P, i1, i2 = product_group(cyclic_group(2), cyclic_group(3))
        assert P.kind == CYCLIC and P.order == 6
        assert i1.images == ((3,),)
        assert i2.images == ((2,),)

    def test_non_coprime_cyclic_raises(self):
        with pytest.raises(GroupError, match="is not cyclic"):
            product_group(cyclic_group(2), cyclic_group(4))

    def test_trivial_factor_passes_through(self):
        G = cyclic_group(5)
        P, i1, i2 = product_group(G, trivial_group())
        assert P == G
        assert i1.is_identity

    def test_free_abelian(self):
        P, _, i2 = product_group(infinite_cyclic_group(), infinite_cyclic_group())
        assert P.kind == FREE_ABELIAN and P.rank == 2
        assert i2((1,)) == (0, 1)

    def test_cyclic_times_z(self):
        P, i1, i2 = product_group(cyclic_group(3), infinite_cyclic_group())
        assert P.kind == SEMIDIRECT
        assert P.alpha == (1,)
        assert i1((1,)) == (1, 0)
        assert i2((1,)) == (0, 1)
