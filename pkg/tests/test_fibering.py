"""Tests for src.fibering: theta, the structure ledger, circle models and h-cobordisms."""

import pytest

from src.chains import concentrated
from src.constants import COMPLETE, FAIL, NONTRIVIAL, PASS, TRIVIAL
from src.errors import CertificateError, GroupError
from src.fibering import (
    FiberTransportDatum,
    HCobordismAlgebraic,
    SpiderLedger,
    bundle_datum,
    bundle_model,
    check_composite_formula,
    check_hcobordism_equivalences,
    check_reversal,
    farrell_bridge,
    fiber_coset,
    glue_hcobordism,
    s1_invariants,
    simple_structure_change,
    theta,
    transfer_product,
    twist_from_units,
)
from src.group_ring import GroupRingElement
from src.groups import cyclic_group, identity_hom, power_hom
from src.linalg import GRMatrix
from src.suite import fiber_complex
from src.whitehead import classify, torsion_from_units, trivial_class

G = cyclic_group(5)


def _t(e=1, c=1):
    return GroupRingElement.monomial(G, (e,), c)


def _golden():
    return _t(1) + _t(4) - 1


def _golden_class():
    return torsion_from_units([_golden()])


def _bundle(unit, alpha_power=1):
    C = concentrated(G, 0, 1, "F")
    return bundle_model(twist_from_units(C, power_hom(G, alpha_power), {0: [unit]}))


class TestTheta:
    def test_bundle_transport_is_simple(self):
        datum = bundle_datum(["s"], [5], [GRMatrix.diag(G, [_t()])])
        result = theta(datum)
        assert result.is_simple is True
        assert len(result.relations) == 1

    def test_bundle_needs_monomial_matrices(self):
        with pytest.raises(CertificateError):
            bundle_datum(["s"], [None], [GRMatrix.diag(G, [_golden()])])
        with pytest.raises(CertificateError):
            bundle_datum(["s"], [None], [GRMatrix.from_rows(G, [[1, 1], [0, 1]])])

    def test_infinite_order_generator_with_golden_transport(self):
        datum = FiberTransportDatum(("s",), (None,), (_golden_class(),), name="golden")
        result = theta(datum)
        assert result.is_simple is False
        assert result.verdicts[0].status == FAIL

    def test_relation_violation_is_an_input_error(self):
        datum = FiberTransportDatum(("s",), (5,), (_golden_class(),))
        with pytest.raises(CertificateError, match="does not respect"):
            theta(datum)

    def test_lengths_must_agree(self):
        with pytest.raises(CertificateError):
            FiberTransportDatum(("s", "r"), (None,), (_golden_class(),))

    def test_classes_share_a_group(self):
        with pytest.raises(GroupError):
            FiberTransportDatum(("s", "r"), (None, None),
                                (_golden_class(), trivial_class(cyclic_group(3))))


class TestSpiderLedger:
    def test_cancelling_cells(self):
        x = _golden_class()
        ledger = SpiderLedger(1, ((0, x), (1, x)))
        assert ledger.euler_characteristic == 0
        assert classify(simple_structure_change(ledger)).state == TRIVIAL

    def test_single_cell(self):
        ledger = SpiderLedger(0, ((0, _golden_class()),))
        assert classify(simple_structure_change(ledger)).state == NONTRIVIAL

    def test_cell_dimension_bounded_by_base(self):
        with pytest.raises(CertificateError):
            SpiderLedger(1, ((2, _golden_class()),))

    def test_empty_ledger_needs_group(self):
        with pytest.raises(CertificateError):
            SpiderLedger(1, ())
        ledger = SpiderLedger(1, (), G)
        assert classify(simple_structure_change(ledger)).state == TRIVIAL


class TestCircleModels:
    def test_golden_monodromy_obstructs(self):
        result = s1_invariants(_bundle(_golden()))
        assert result.theta_verdict.status == FAIL
        assert result.tau_fib is None
        assert result.status == COMPLETE

    def test_trivial_monodromy_fibers(self):
        result = s1_invariants(_bundle(_t()))
        assert result.theta_verdict.status == PASS
        assert result.tau_fib is not None
        assert not result.stuck

    def test_reversal(self):
        assert check_reversal(_bundle(_golden())).passed

    def test_composite_with_a_point(self):
        result = check_composite_formula(_bundle(_golden()), fiber_complex(1))
        assert result.chi_fiber == 1
        assert result.verdict.passed

    def test_fiber_complexes(self):
        assert fiber_complex(0).euler_characteristic() == 0
        assert fiber_complex(2).ranks == (1, 0, 1)

    def test_monodromy_scaling_by_two_is_rejected(self):
        C = concentrated(G, 0, 1, "F")
        with pytest.raises(CertificateError, match="not an equivalence"):
            twist_from_units(C, identity_hom(G), {0: [GroupRingElement.one(G) * 2]})

    def test_monodromy_t_minus_one_is_rejected(self):
        C = concentrated(G, 0, 1, "F")
        with pytest.raises(CertificateError, match="not an equivalence"):
            twist_from_units(C, power_hom(G, 2), {0: [_t() - 1]})


class TestTransfer:
    def test_product_transfer(self):
        x = _golden_class()
        assert classify(transfer_product(x, 2, identity_hom(G))).state == NONTRIVIAL
        assert classify(transfer_product(x, 0, identity_hom(G))).state == TRIVIAL

    def test_fiber_coset(self):
        x = _golden_class()
        assert fiber_coset(x, 0, [x]).genuine
        coset = fiber_coset(x, 2, [x])
        assert not coset.genuine
        assert len(coset.generators) == 1
        assert fiber_coset(x, 2).genuine


class TestHCobordism:
    def test_odd_dimension_theta_vanishes(self):
        h = HCobordismAlgebraic(_golden_class(), identity_hom(G), 5)
        glued = glue_hcobordism(h)
        assert all(v.passed for v in glued.verdicts.values())
        assert glued.tau_fib is not None
        assert farrell_bridge(h, glued).verdict.passed
        assert check_hcobordism_equivalences(h).passed

    def test_even_dimension_theta_survives(self):
        h = HCobordismAlgebraic(_golden_class(), identity_hom(G), 6)
        glued = glue_hcobordism(h)
        assert glued.verdicts["theta"].status == FAIL
        assert glued.verdicts["equivalence"].status == PASS
        assert glued.tau_fib is None
        with pytest.raises(CertificateError):
            farrell_bridge(h, glued)

    def test_zero_torsion(self):
        h = HCobordismAlgebraic(trivial_class(G), power_hom(G, 2), 4)
        glued = glue_hcobordism(h)
        assert glued.verdicts["theta"].passed
        assert classify(glued.tau_prime).state == TRIVIAL

    def test_dimension_bound(self):
        with pytest.raises(CertificateError):
            HCobordismAlgebraic(_golden_class(), identity_hom(G), 1)

    def test_phi_must_be_an_endomorphism(self):
        with pytest.raises(GroupError):
            HCobordismAlgebraic(_golden_class(), identity_hom(cyclic_group(3)), 5)
