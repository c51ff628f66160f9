"""
Acceptance suite: every criterion at its stated tolerance.

Each test prints one ``[PASS]``/``[FAIL]`` line to the terminal (also when
output is captured) and then asserts the outcome. Criterion 8 is the long
notched-bar FEM campaign and carries the ``slow`` marker.
"""

import pytest

from pffatigue import verify


@pytest.fixture
def report(capsys):
    def emit(check):
        with capsys.disabled():
            print("\n" + check.line())
        return check
    return emit


class TestAcceptance:
    def test_01_critical_strength(self, report):
        assert report(verify.check_critical_strength()).passed

    def test_02_table1_regeneration(self, report):
        assert report(verify.check_table1()).passed

    def test_03_appendix_a_equivalence(self, report):
        assert report(verify.check_appendix_a()).passed

    def test_04_appendix_b_roundtrip(self, report):
        assert report(verify.check_appendix_b()).passed

    def test_05_endurance(self, report):
        assert report(verify.check_endurance()).passed

    def test_06_load_ratio_trends(self, report):
        assert report(verify.check_load_ratio()).passed

    def test_07_single_element_oracle(self, report):
        assert report(verify.check_fem_oracle()).passed

    @pytest.mark.slow
    def test_08_notched_trends(self, report):
        assert report(verify.check_notched()).passed

    def test_09_tangents(self, report):
        assert report(verify.check_tangents()).passed

    def test_10_split_consistency(self, report):
        assert report(verify.check_splits()).passed
