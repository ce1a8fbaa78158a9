import json
import math

import pytest

from torispec import verify
from torispec.geometry import TorusParams


@pytest.fixture(scope="module")
def report_21():
    return verify.full_report(TorusParams(2, 1))


class TestReports:
    def test_all_claims_present(self, report_21):
        assert report_21.claims() == verify.MAIN_CLAIMS + verify.NONMAX_CLAIMS

    def test_passes(self, report_21):
        failed = [c for c in report_21.checks if c.status != verify.PASS]
        assert report_21.overall and not failed, f"{failed}"

    def test_n_two_detail(self, report_21):
        check = next(c for c in report_21.checks if c.claim == "n_two_formula")
        assert check.detail == "N(2)=9, expected 9"

    def test_deterministic(self, report_21):
        again = verify.full_report(TorusParams(2, 1))
        dump = lambda r: json.dumps(r.to_dict(), sort_keys=True)  # noqa: E731
        assert dump(again) == dump(report_21)

    def test_flat_torus_skips_nonmax(self):
        rep = verify.verify_nonmaximality(TorusParams(1, 1))
        status = {c.claim: c.status for c in rep.checks}
        assert status["nonmax_margin"] == verify.SKIPPED
        assert rep.overall and rep.claims() == verify.NONMAX_CLAIMS

    def test_failed_check_flips_overall(self):
        rep = verify.VerificationReport(None)
        rep.add("a", True, 1.0, 0.0)
        rep.skip("b", "not applicable")
        assert rep.overall
        rep.fail("c", "solver: diverged")
        assert not rep.overall


class TestReducedInequality:
    def test_minimum_at_origin(self):
        val, x = verify.reduced_minimum()
        assert abs(val - (4 - math.pi)) < 1e-12 and x < 1e-6

    def test_gap_values(self):
        assert verify.reduced_gap(0.0) == pytest.approx(4 - math.pi, abs=1e-15)
        assert verify.reduced_gap(1.0) == pytest.approx(8 - math.pi * math.sqrt(3), abs=1e-14)

    def test_chain(self):
        rep = verify.verify_inequality_chain(40)
        assert rep.overall, [c.claim for c in rep.checks if c.status != verify.PASS]
        claims = set(rep.claims())
        assert {f"reduced_inequality_odd_m{m}" for m in range(7, 41)} <= claims
        assert {f"exceptional_{m}_{n}" for m, n in verify.EXCEPTIONAL_ODD + verify.EXCEPTIONAL_EVEN} <= claims

    def test_tightness(self):
        tight = (4 - math.pi) - 6 / 7
        assert 0 < tight < 0.002
        # the same bound at m = 6 and m = 3 must fail
        assert 4 - math.pi < 6 / 6 and 4 - math.pi < 6 / 3

    @pytest.mark.parametrize("m,n", verify.EXCEPTIONAL_ODD + verify.EXCEPTIONAL_EVEN)
    def test_parent_bound(self, m, n):
        p = TorusParams(m, n)
        assert verify.parent_bound(p) <= verify.parent_rhs(p)

    def test_m_max_bounds(self):
        with pytest.raises(ValueError):
            verify.verify_inequality_chain(41)
        with pytest.raises(ValueError):
            verify.verify_inequality_chain(6)
