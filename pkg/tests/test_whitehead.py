"""Tests for src.whitehead: torsion classes, classification and verdicts."""

from unittest.mock import patch

import pytest

from src.constants import (
    FAIL,
    LEVEL_CHARACTERS,
    LEVEL_CLASS,
    LEVEL_INVARIANTS,
    NONTRIVIAL,
    PASS,
    TRIVIAL,
    UNKNOWN,
)
from src.cyclotomic import target_one
from src.errors import CertificateError, EngineFailure, GroupError
from src.group_ring import GroupRingElement
from src.groups import cyclic_group, infinite_cyclic_group, power_hom
from src.linalg import GRMatrix
from src.whitehead import (
    TorsionClass,
    Verdict,
    WhTensorClass,
    check_equal,
    check_vanishing,
    classify,
    combine_verdicts,
    field_class,
    tate_class,
    torsion_from_units,
    trivial_class,
    wh_add,
    wh_induced,
    wh_involution,
    wh_multiple,
    wh_neg,
    wh_sub,
)

G = cyclic_group(5)


def _t(e=1, c=1):
    return GroupRingElement.monomial(G, (e,), c)


def _golden_class():
    return torsion_from_units([_t(1) + _t(4) - 1])


def _one_everywhere(m):
    return target_one(m.target, m.order)


class TestTorsionFromUnits:
    def test_unit_list_builds_a_diagonal(self):
        x = _golden_class()
        assert x.integral
        assert x.representative.shape == (1, 1)
        assert x.inverse[0, 0] == _t(2) + _t(3) - 1

    def test_non_unit_rejected(self):
        with pytest.raises(CertificateError):
            torsion_from_units([_t() - 1])

    def test_empty_list_rejected(self):
        with pytest.raises(CertificateError):
            torsion_from_units([])

    def test_wrong_supplied_inverse_rejected(self):
        A = GRMatrix.from_rows(G, [[1, _t()], [0, 1]])
        with pytest.raises(CertificateError):
            torsion_from_units(A, GRMatrix.identity(G, 2))

    def test_matrix_certified_by_elimination(self):
        A = GRMatrix.from_rows(G, [[1, _t()], [0, 1]])
        x = torsion_from_units(A)
        assert (x.representative @ x.inverse).is_identity()

    def test_needs_representative_or_evaluator(self):
        with pytest.raises(CertificateError):
            TorsionClass(G)


class TestClassify:
    def test_golden_unit_is_nontrivial(self):
        c = classify(_golden_class())
        assert c.state == NONTRIVIAL
        assert c.certificate.startswith("chi1(det)")
        assert c.decisive

    def test_zero_class(self):
        c = classify(trivial_class(G))
        assert c.state == TRIVIAL

    def test_trivial_unit_class(self):
        assert classify(torsion_from_units([_t(3)])).state == TRIVIAL
        assert classify(torsion_from_units([-GroupRingElement.one(G)])).state == TRIVIAL

    def test_sum_with_negative_is_trivial(self):
        x = _golden_class()
        assert classify(wh_add(x, wh_neg(x))).state == TRIVIAL
        assert classify(wh_sub(x, x)).state == TRIVIAL

    def test_multiples_stay_nontrivial(self):
        x = _golden_class()
        assert classify(wh_multiple(x, 3)).state == NONTRIVIAL
        assert classify(wh_multiple(x, -2)).state == NONTRIVIAL
        assert classify(wh_multiple(x, 0)).state == TRIVIAL

    def test_field_class_with_trivial_values_is_undecided(self):
        c = classify(field_class(G, _one_everywhere))
        assert c.state == UNKNOWN
        assert not c.decisive

    def test_contradictory_certificates(self):
        with patch("src.whitehead.canonical_value", return_value=(0, False)):
            with pytest.raises(EngineFailure):
                classify(trivial_class(G))


class TestGroupOperations:
    def test_involution_of_golden_unit(self):
        x = _golden_class()
        assert check_equal(x, wh_involution(x), "self-dual").passed

    def test_induced_along_automorphism(self):
        x = _golden_class()
        moved = wh_induced(x, power_hom(G, 2))
        assert moved.representative[0, 0] == _t(2) + _t(3) - 1
        assert check_equal(moved, wh_neg(x), "moved is -x").passed

    def test_mixed_groups_raise(self):
        with pytest.raises(GroupError):
            wh_add(_golden_class(), trivial_class(cyclic_group(3)))

    def test_field_and_integral_mix(self):
        x = _golden_class()
        y = wh_add(x, field_class(G, _one_everywhere))
        assert not y.integral
        assert classify(y).state == NONTRIVIAL


class TestVerdicts:
    def test_vanishing_pass_at_class_level(self):
        v = check_vanishing(trivial_class(G), "zero")
        assert v.status == PASS
        assert v.level == LEVEL_CLASS

    def test_vanishing_fail_at_invariant_level(self):
        v = check_vanishing(_golden_class(), "golden")
        assert v.status == FAIL
        assert v.level == LEVEL_INVARIANTS

    def test_characters_decide_over_cyclic_groups(self):
        v = check_vanishing(field_class(G, _one_everywhere), "field")
        assert v.status == PASS
        assert v.level == LEVEL_CHARACTERS

    def test_infinite_groups_stay_unknown(self):
        Z = infinite_cyclic_group()
        v = check_vanishing(field_class(Z, _one_everywhere), "field")
        assert v.status == UNKNOWN

    def test_undefined_invariants_stay_unknown(self):
        v = check_vanishing(field_class(G, lambda m: None), "undefined")
        assert v.status == UNKNOWN

    def test_combine(self):
        ok = Verdict("a", PASS, LEVEL_CLASS)
        weak = Verdict("b", PASS, LEVEL_CHARACTERS)
        bad = Verdict("c", FAIL, LEVEL_INVARIANTS, "cert")
        open_ = Verdict("d", UNKNOWN, LEVEL_INVARIANTS)
        assert combine_verdicts("x", [ok]).level == LEVEL_CLASS
        assert combine_verdicts("x", [ok, weak]).level == LEVEL_CHARACTERS
        assert combine_verdicts("x", [ok, bad, open_]).status == FAIL
        assert combine_verdicts("x", [ok, open_]).status == UNKNOWN


class TestTateClass:
    def test_golden_unit_is_not_a_norm(self):
        assert tate_class(_golden_class(), 0).state == NONTRIVIAL

    def test_witness_accepted(self):
        u = _t(1) + _t(4) - 1
        y = _golden_class()
        verdict = tate_class(torsion_from_units([u * u]), 0, witness=y)
        assert verdict.state == TRIVIAL
        assert verdict.witness is y

    def test_zero_class(self):
        assert tate_class(trivial_class(G), 1).state == TRIVIAL

    def test_not_anti_self_dual(self):
        with pytest.raises(CertificateError):
            tate_class(_golden_class(), 1)

    def test_square_of_golden_unit_is_a_norm(self):
        u = _golden_class().representative[0, 0]
        verdict = tate_class(torsion_from_units([u * u]), 0)
        assert verdict.state == TRIVIAL
        assert verdict.certificate.startswith("chi1 = 1 *")

    def test_square_over_c7(self):
        C7 = cyclic_group(7)
        t = GroupRingElement.monomial(C7, (1,))
        u = t + GroupRingElement.monomial(C7, (6,)) - 1
        assert tate_class(torsion_from_units([u * u]), 2).state == TRIVIAL

    def test_search_skipped_above_the_prime_limit(self):
        C7 = cyclic_group(7)
        u = GroupRingElement.monomial(C7, (1,)) + GroupRingElement.monomial(C7, (6,)) - 1
        verdict = tate_class(torsion_from_units([u * u]), 0, max_prime=5)
        assert verdict.state == UNKNOWN
        assert "skipped" in verdict.certificate


class TestWhTensorClass:
    def test_orbit_closes(self):
        items, closed = WhTensorClass(_golden_class(), power_hom(G, 2)).orbit()
        assert closed
        assert len(items) == 4

    def test_compare_finds_translate(self):
        alpha = power_hom(G, 2)
        x = WhTensorClass(_golden_class(), alpha)
        y = WhTensorClass(wh_neg(_golden_class()), alpha)
        assert x.compare(y).passed

    def test_compare_against_zero_fails(self):
        alpha = power_hom(G, 2)
        x = WhTensorClass(_golden_class(), alpha)
        assert x.compare(WhTensorClass(trivial_class(G), alpha)).status == FAIL
