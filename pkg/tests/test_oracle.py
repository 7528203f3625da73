"""Tests for the reduced-subword oracle and the comparison harness."""

from fractions import Fraction

import pytest

from gkmrest.canonical import table_single_form
from gkmrest.errors import SubwordCapExceeded
from gkmrest.exact import Poly, Weight, parse_poly
from gkmrest.oracle import (
    billey_restriction,
    billey_table_entries,
    compare_tables,
    cross_validate,
    engine_entries,
)
from gkmrest.orbits import (
    Orbit,
    OrbitSpec,
    RootSystem,
    SignedPerm,
    inversion_prefix_roots,
    lexmin_reduced_word,
    reduced_words,
)


@pytest.fixture(scope="module")
def a2():
    return Orbit(OrbitSpec("A", 2))


@pytest.fixture(scope="module")
def b2():
    return Orbit(OrbitSpec("B", 2))


class TestBilley:
    def test_identity_source(self, a2):
        rs = a2.rs
        for v in a2.elements:
            assert billey_restriction(rs, SignedPerm.identity(3), v) == Poly.const(3, 1)

    def test_a2_single_subword(self):
        rs = RootSystem("A", 2)
        s1, s2 = SignedPerm((2, 1, 3)), SignedPerm((1, 3, 2))
        assert billey_restriction(rs, s1, s1 * s2) == parse_poly("x1 - x2", 3)

    def test_diagonal_is_downward_product(self, a2, b2):
        for orbit in (a2, b2):
            for w in orbit.elements:
                got = billey_restriction(orbit.rs, w, w)
                assert got == orbit.od.lambda_minus(orbit.vid_of[w.word])

    def test_reduced_word_invariance(self, a2, b2):
        for orbit in (a2, b2):
            rs = orbit.rs
            for v in orbit.elements:
                words = reduced_words(rs, v)
                for w in orbit.elements:
                    vals = {billey_restriction(rs, w, v, word) for word in words}
                    assert len(vals) == 1

    def test_zero_iff_not_below(self, b2):
        for w in b2.elements:
            for v in b2.elements:
                val = billey_restriction(b2.rs, w, v)
                assert (not val.is_zero()) == b2.bruhat_leq(w, v)

    def test_prefix_roots_positive(self, a2, b2):
        # each subword factor is a positive root: positivity is manifest
        for orbit in (a2, b2):
            for v in orbit.elements:
                word = lexmin_reduced_word(orbit.rs, v)
                for root in inversion_prefix_roots(orbit.rs, word):
                    assert orbit.rs.is_positive(root)

    def test_nonnegative_in_simple_root_coordinates(self, b2):
        # expand values in the simple-root basis (a genuine basis for
        # types B/C/D) and check coefficient signs
        rs = b2.rs
        mat = [list(a.coords) for a in rs.simple_roots]
        # invert the 2x2 matrix exactly
        (a, b), (c, d) = mat
        det = Fraction(a * d - b * c)
        inv = [[d / det, -b / det], [-c / det, a / det]]
        # row i of the inverse expresses x_i in the alpha basis
        images = [Weight(inv[i]) for i in range(2)]
        for w in b2.elements:
            for v in b2.elements:
                val = billey_restriction(rs, w, v)
                expanded = val.substitute(images, 2)
                assert all(Fraction(cf).denominator == 1 and cf > 0
                           for cf in expanded.terms.values())

    def test_oracle_equality_small(self, a2):
        gz = table_single_form(a2.od)
        for entry, val in billey_table_entries(a2).items():
            assert val == gz.entries[entry]

    def test_oracle_equality_rank3_even_orthogonal(self):
        orbit = Orbit(OrbitSpec("D", 3))
        gz = table_single_form(orbit.od)
        for entry, val in billey_table_entries(orbit).items():
            assert val == gz.entries[entry]

    def test_cap(self):
        rs = RootSystem("A", 3)
        with pytest.raises(SubwordCapExceeded):
            billey_restriction(rs, SignedPerm.identity(4), SignedPerm((4, 3, 2, 1)),
                               word=tuple([0, 1, 0] * 5))


class TestCrossValidate:
    def test_a2_all_engines(self, a2):
        rep = cross_validate(a2)
        assert rep.ok
        assert rep.pairs_checked == 36
        assert set(rep.engines) >= {"gz", "typed", "brute", "ordered", "tower", "billey"}

    def test_negative_control(self, a2):
        good = engine_entries(a2, "gz")
        bad = dict(good)
        key = next(k for k, v in good.items() if not v.is_zero())
        bad[key] = bad[key] + Poly.const(3, 1)
        rep = compare_tables({"gz": good, "perturbed": bad}, a2.od.graph.ids)
        assert not rep.ok
        assert rep.mismatches[0]["p"] == key[0] and rep.mismatches[0]["q"] == key[1]

    def test_report_json_shape(self, a2):
        rep = cross_validate(a2, engines=["gz", "brute"])
        data = rep.to_json()
        assert set(data) == {"engines", "pairs_checked", "mismatches"}
