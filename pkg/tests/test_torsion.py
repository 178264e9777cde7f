"""Tests for src.torsion: torsion of acyclic complexes and chain equivalences."""

from unittest.mock import patch

import pytest

from src.chains import (
    ChainHomotopy,
    ChainMap,
    compose,
    concentrated,
    cone,
    direct_sum_maps,
    identity_map,
    make_complex,
)
from src.constants import COMPLETE, NONTRIVIAL, STUCK, TRIVIAL
from src.cyclotomic import CyclotomicNumber
from src.errors import CertificateError, ChainError
from src.group_ring import GroupRingElement, augmentation_morphism, character
from src.groups import cyclic_group, identity_hom, product_group, trivial_group
from src.linalg import GRMatrix
from src.torsion import (
    ContractionWitness,
    certify_equivalence,
    check_composition_formula,
    check_homotopy_invariance,
    check_product_formula,
    check_sum_formula,
    check_trivial,
    check_witness_independence,
    equivalence_contraction,
    field_torsion,
    torsion_from_contraction,
    torsion_of_acyclic,
    whitehead_torsion,
)
from src.whitehead import check_equal, classify

G = cyclic_group(5)


def _t(e=1, c=1):
    return GroupRingElement.monomial(G, (e,), c)


def _m(*rows):
    return GRMatrix.from_rows(G, [list(r) for r in rows])


def _golden():
    return _t(1) + _t(4) - 1


def _point():
    return concentrated(G, 0, 1, "C")


def _scaling(x):
    C = _point()
    return ChainMap(C, C, {0: _m([x])}, "f")


class TestTorsionOfAcyclic:
    def test_cone_of_identity(self):
        result = torsion_of_acyclic(cone(identity_map(_point())))
        assert result.status == COMPLETE
        assert result.pairs == 1
        assert classify(result.torsion).state == TRIVIAL

    def test_contraction_is_returned(self):
        result = torsion_of_acyclic(cone(_scaling(_golden())))
        assert result.contraction is not None
        assert result.contraction(0)[0, 0] == _t(2) + _t(3) - 1

    def test_stuck_on_non_unit(self):
        C = make_complex(G, {0: 1, 1: 1}, {1: _m([_t() - 1])})
        result = torsion_of_acyclic(C)
        assert result.status == STUCK
        assert not result.complete
        assert result.residual.total_rank() == 2
        assert not result.torsion.integral

    def test_stuck_class_is_field_valued(self):
        C = make_complex(G, {0: 1, 1: 1}, {1: _m([_t() - 1])})
        x = torsion_of_acyclic(C).torsion
        assert x.evaluate(augmentation_morphism(G)) is None
        assert x.evaluate(character(G, 1)) == CyclotomicNumber.from_coeffs(5, [-1, 1])

    def test_reverse_order_gives_same_class(self):
        f = _scaling(_golden())
        assert check_witness_independence(cone(f)).passed


class TestFieldTorsion:
    def test_value(self):
        C = make_complex(G, {0: 1, 1: 1}, {1: _m([_t() - 1])})
        assert field_torsion(C, character(G, 2)) == CyclotomicNumber.from_coeffs(5, [-1, 0, 1])

    def test_not_acyclic(self):
        C = make_complex(G, {0: 1, 1: 1}, {1: _m([_t() - 1])})
        assert field_torsion(C, augmentation_morphism(G)) is None


class TestContractionWitness:
    def test_identity_cone(self):
        K = cone(identity_map(_point()))
        witness = ContractionWitness(K, {0: _m([1])})
        x = torsion_from_contraction(witness)
        assert x.integral
        assert classify(x).state == TRIVIAL

    def test_bad_contraction_rejected(self):
        K = cone(identity_map(_point()))
        with pytest.raises(ChainError):
            ContractionWitness(K, {})


class TestWhiteheadTorsion:
    def test_golden_unit(self):
        result = whitehead_torsion(_scaling(_golden()))
        assert result.complete
        assert classify(result.torsion).state == NONTRIVIAL

    def test_trivial_unit(self):
        result = whitehead_torsion(_scaling(-_t(2)))
        assert classify(result.torsion).state == TRIVIAL

    def test_not_an_equivalence_is_stuck(self):
        result = whitehead_torsion(_scaling(_t() - 1))
        assert result.status == STUCK

    def test_homotopy_witness_must_match(self):
        f = _scaling(_golden())
        h = ChainHomotopy(f, f)
        with pytest.raises(CertificateError):
            whitehead_torsion(f, homotopies=(h, h))

    def test_negating_the_map(self):
        f = _scaling(_golden())
        assert check_equal(whitehead_torsion(f).torsion, whitehead_torsion(-f).torsion,
                           "sign").passed

    def test_strict_inverse_accepted(self):
        f, g = _scaling(_golden()), _scaling(_t(2) + _t(3) - 1)
        result = whitehead_torsion(f, inverse=g)
        assert result.complete
        assert check_equal(result.torsion, whitehead_torsion(f).torsion, "with inverse").passed

    def test_wrong_inverse_rejected(self):
        f = _scaling(_golden())
        with pytest.raises(CertificateError, match="strict"):
            whitehead_torsion(f, inverse=_scaling(_t()))

    def test_homotopies_must_start_at_the_composites(self):
        f, g = _scaling(_golden()), _scaling(_t(2) + _t(3) - 1)
        h = ChainHomotopy(f, f)
        with pytest.raises(CertificateError, match="composite"):
            whitehead_torsion(f, inverse=g, homotopies=(h, h))

    def test_inverse_contracts_a_stuck_cone(self):
        f, g = _scaling(_golden()), _scaling(_t(2) + _t(3) - 1)
        stuck = torsion_of_acyclic(make_complex(G, {0: 1, 1: 1}, {1: _m([_t() - 1])}))
        with patch("src.torsion.torsion_of_acyclic", return_value=stuck):
            result = whitehead_torsion(f, inverse=g)
        assert result.complete
        assert result.contraction is not None
        assert classify(result.torsion).state == NONTRIVIAL
        assert check_equal(result.torsion, whitehead_torsion(f).torsion, "contracted").passed


class TestEquivalenceContraction:
    def test_strict_inverse_gives_a_contraction(self):
        f, g = _scaling(_golden()), _scaling(_t(2) + _t(3) - 1)
        C = f.source
        left = ChainHomotopy(compose(g, f), identity_map(C))
        right = ChainHomotopy(compose(f, g), identity_map(C))
        witness = equivalence_contraction(f, left, right, g)
        assert witness is not None
        x = torsion_from_contraction(witness)
        assert check_equal(x, whitehead_torsion(f).torsion, "contraction").passed


class TestCertifyEquivalence:
    def test_complete_result_passes_through(self):
        assert certify_equivalence(_scaling(_golden())).complete

    def test_scaling_by_two_rejected(self):
        with pytest.raises(CertificateError, match="not a unit"):
            certify_equivalence(_scaling(GroupRingElement.one(G) * 2))

    def test_t_minus_one_rejected(self):
        with pytest.raises(CertificateError, match="not acyclic"):
            certify_equivalence(_scaling(_t() - 1))


class TestFormulas:
    def test_composition(self):
        f = _scaling(_golden())
        g = _scaling(_t(2) + _t(3) - 1)
        assert check_composition_formula(f, f).passed
        assert check_composition_formula(f, g).passed

    def test_sum_over_a_shared_summand(self):
        shared = _scaling(_golden())
        f1 = direct_sum_maps(shared, _scaling(_t(1)))
        f2 = direct_sum_maps(shared, _scaling(_golden()))
        assert check_sum_formula(f1, f2, {0: 1}, {0: 1}).passed

    def test_homotopy_invariance(self):
        f = _scaling(_golden())
        assert check_homotopy_invariance(ChainHomotopy(f, f)).passed

    def test_product_with_a_point(self):
        f1 = _scaling(_golden())
        point = concentrated(trivial_group(), 0, 1)
        f2 = identity_map(point)
        P, i1, i2 = product_group(G, trivial_group())
        assert check_product_formula(f1, f2, P, i1, i2).passed

    def test_check_trivial(self):
        K = cone(identity_map(make_complex(G, {0: 1, 1: 2})))
        assert check_trivial(K).passed
        assert not check_trivial(cone(_scaling(_golden()))).passed

    def test_identity_hom_is_identity_on_classes(self):
        f = _scaling(_golden())
        assert identity_hom(G).is_identity
        assert whitehead_torsion(f).torsion.group == G
