"""Tests for the restriction engines on small reference graphs."""

import pytest

from gkmrest.canonical import (
    adjacent_restriction,
    brute_row,
    brute_solve_canonical,
    certify_table,
    restriction_ordered,
    restriction_single_form,
    restriction_vertex_classes,
    structure_constants,
    table_single_form,
    verify_tech,
    RestrictionTable,
)
from gkmrest.errors import GraphFormatError, NoSolution
from gkmrest.exact import Poly, Weight, parse_poly
from gkmrest.gkm import GkmGraph, OrientedGraphData

from conftest import projective_space_graph


def moment_classes(od):
    """The moment map as a single ordered class list."""
    return [dict(od.graph.moment)]


def moment_per_vertex(od):
    w = dict(od.graph.moment)
    return {v: w for v in od.graph.ids}


@pytest.fixture
def square_od():
    # product of two spheres: 4 fixed points, valence 2
    verts = [("a", Weight((0, 0))), ("b", Weight((1, 0))),
             ("c", Weight((0, 1))), ("d", Weight((1, 1)))]
    edges = [("a", "b", Weight((1, 0))), ("c", "d", Weight((1, 0))),
             ("a", "c", Weight((0, 1))), ("b", "d", Weight((0, 1)))]
    return OrientedGraphData(GkmGraph(2, verts, edges), Weight((1, 2)))


class TestAdjacent:
    def test_cp1_unit(self, cp1_oriented):
        assert adjacent_restriction(cp1_oriented, "p1", "p2") == Poly.const(2, 1)

    def test_non_edge_zero(self):
        # cube graph (product of three spheres): 100 and 011 differ in all
        # three bits, so they are not adjacent, yet their indices differ by 1
        verts, edges = [], []
        for bits in range(8):
            v = format(bits, "03b")
            verts.append((v, Weight([int(b) for b in v])))
        for bits in range(8):
            v = format(bits, "03b")
            for i in range(3):
                u = format(bits ^ (1 << (2 - i)), "03b")
                if v[i] == "0":
                    w = [0, 0, 0]
                    w[i] = 1
                    edges.append((v, u, Weight(w)))
        od = OrientedGraphData(GkmGraph(3, verts, edges), Weight((1, 2, 4)))
        assert od.lam["100"] == 1 and od.lam["011"] == 2
        assert adjacent_restriction(od, "100", "011").is_zero()

    def test_cp2_edge(self, cp2_oriented):
        got = adjacent_restriction(cp2_oriented, "p2", "p3")
        assert got == parse_poly("x1 - x3", 3)


class TestSingleForm:
    def test_diagonal(self, cp2_oriented):
        od = cp2_oriented
        for p in od.graph.ids:
            assert restriction_single_form(od, p, p) == od.lambda_minus(p)

    def test_lower_index_zero(self, cp2_oriented):
        assert restriction_single_form(cp2_oriented, "p3", "p1").is_zero()
        assert restriction_single_form(cp2_oriented, "p2", "p1").is_zero()

    def test_cp2_table(self, cp2_oriented):
        od = cp2_oriented
        tab = table_single_form(od)
        one = Poly.const(3, 1)
        assert tab.get("p1", "p1") == one
        assert tab.get("p1", "p2") == one
        assert tab.get("p1", "p3") == one
        assert tab.get("p2", "p3") == parse_poly("x1 - x3", 3)

    def test_requires_index_increasing(self):
        verts = [("u", Weight((0, 0))), ("v", Weight((1, 0))),
                 ("w", Weight((3, 0)))]
        edges = [("u", "v", Weight((1, 0))), ("v", "w", Weight((1, 0)))]
        od = OrientedGraphData(GkmGraph(2, verts, edges), Weight((1, 1)))
        with pytest.raises(GraphFormatError):
            restriction_single_form(od, "u", "w")


class TestBrute:
    def test_cp1_matches_adjacent(self, cp1_oriented):
        od = cp1_oriented
        tab = brute_solve_canonical(od)
        assert tab.get("p1", "p2") == adjacent_restriction(od, "p1", "p2")
        assert tab.get("p1", "p1") == Poly.const(2, 1)

    def test_diagonal_is_downward_product(self, cp2_oriented, square_od):
        for od in (cp2_oriented, square_od):
            tab = brute_solve_canonical(od)
            for p in od.graph.ids:
                assert tab.get(p, p) == od.lambda_minus(p)

    def test_agrees_with_single_form(self, cp2_oriented, square_od):
        for od in (cp2_oriented, square_od):
            brute = brute_solve_canonical(od)
            dp = table_single_form(od)
            assert brute.entries == dp.entries

    def test_cp3_agreement(self):
        g = projective_space_graph(3)
        od = OrientedGraphData(g, Weight((8, 4, 2, 1)))
        assert brute_solve_canonical(od).entries == table_single_form(od).entries

    def test_detects_corrupt_input(self):
        # v and w share index 1 with an ascending edge between them, so the
        # forced vanishing at w contradicts the congruence along (v, w)
        verts = [("u", Weight((0, 0))), ("v", Weight((1, 0))),
                 ("w", Weight((1, 3)))]
        edges = [("u", "v", Weight((1, 0))), ("v", "w", Weight((0, 1)))]
        od = OrientedGraphData(GkmGraph(2, verts, edges), Weight((1, 1)))
        assert od.lam["v"] == od.lam["w"] == 1
        with pytest.raises(NoSolution):
            brute_row(od, "v")


class TestVertexClassSum:
    def test_two_path_sum_matches_brute_on_cp2(self, cp2_oriented):
        od = cp2_oriented
        brute = brute_solve_canonical(od)
        for p in od.graph.ids:
            for q in od.graph.ids:
                got, _ = restriction_vertex_classes(od, p, q, moment_per_vertex(od))
                assert got == brute.get(p, q)

    def test_ledger_lists_paths(self, cp2_oriented):
        od = cp2_oriented
        _, ledger = restriction_vertex_classes(od, "p1", "p3", moment_per_vertex(od))
        assert [t.path for t in ledger] == [("p1", "p2", "p3")]


class TestWeightClassAssignment:
    def test_both_modes(self, cp2_oriented):
        from gkmrest.canonical import WeightClassAssignment
        od = cp2_oriented
        w = dict(od.graph.moment)
        ordered = WeightClassAssignment(ordered=[w])
        per_vertex = WeightClassAssignment(per_vertex={v: w for v in od.graph.ids})
        for p in od.graph.ids:
            for q in od.graph.ids:
                expect = restriction_single_form(od, p, q)
                assert restriction_ordered(od, p, q, ordered)[0] == expect
                assert restriction_vertex_classes(od, p, q, per_vertex)[0] == expect
        assert verify_tech(od, ordered, table_single_form(od))

    def test_wrong_mode_rejected(self, cp2_oriented):
        from gkmrest.canonical import WeightClassAssignment
        od = cp2_oriented
        empty = WeightClassAssignment()
        with pytest.raises(GraphFormatError):
            restriction_ordered(od, "p1", "p2", empty)
        with pytest.raises(GraphFormatError):
            restriction_vertex_classes(od, "p1", "p2", empty)


class TestOrdered:
    def test_single_moment_class_degenerates_to_single_form(self, cp2_oriented, square_od):
        for od in (cp2_oriented, square_od):
            classes = moment_classes(od)
            for p in od.graph.ids:
                for q in od.graph.ids:
                    got, ledger = restriction_ordered(od, p, q, classes)
                    assert got == restriction_single_form(od, p, q)
        # with one class every path is monotone, so the ledger is all of
        # Sigma(p, q)

    def test_tech_holds_for_moment(self, cp2_oriented):
        od = cp2_oriented
        tab = table_single_form(od)
        assert verify_tech(od, moment_classes(od), tab)

    def test_tech_fails_for_reversed_moment(self, cp2_oriented):
        od = cp2_oriented
        tab = table_single_form(od)
        reversed_moment = {v: -od.graph.moment[v] for v in od.graph.ids}
        assert not verify_tech(od, [reversed_moment], tab)


class TestCertify:
    def test_pass_on_computed_tables(self, cp2_oriented, square_od):
        for od in (cp2_oriented, square_od):
            cert = certify_table(od, table_single_form(od))
            assert cert.ok, str(cert)

    def test_detects_injected_fault(self, cp2_oriented):
        od = cp2_oriented
        tab = table_single_form(od)
        bad = dict(tab.entries)
        bad[("p2", "p3")] = bad[("p2", "p3")] + Poly.const(3, 1)
        cert = certify_table(od, RestrictionTable(od, bad))
        assert not cert.ok

    def test_minimum_row_is_all_ones(self, cp2_oriented):
        od = cp2_oriented
        tab = table_single_form(od)
        for q in od.graph.ids:
            assert tab.get("p1", q) == Poly.const(3, 1)


class TestStructureConstants:
    def test_minimum_gives_delta(self, cp2_oriented):
        od = cp2_oriented
        tab = table_single_form(od)
        c = structure_constants(od, tab, "p1", "p2")
        assert c["p2"] == Poly.const(3, 1)
        assert c["p1"].is_zero() and c["p3"].is_zero()

    def test_cp2_square_of_middle(self, cp2_oriented):
        od = cp2_oriented
        tab = table_single_form(od)
        c = structure_constants(od, tab, "p2", "p2")
        # forced by evaluating alpha_{p2}^2 = sum_r c^r alpha_r at the
        # fixed points in increasing phi order
        assert c["p1"].is_zero()
        assert c["p2"] == parse_poly("x1 - x2", 3)
        assert c["p3"] == Poly.const(3, 1)

    def test_expansion_identity(self, square_od):
        od = square_od
        tab = table_single_form(od)
        ids = od.graph.ids
        for p in ids:
            for q in ids:
                c = structure_constants(od, tab, p, q)
                for v in ids:
                    lhs = tab.get(p, v) * tab.get(q, v)
                    rhs = Poly.zero(2)
                    for r in ids:
                        rhs = rhs + c[r] * tab.get(r, v)
                    assert lhs == rhs

    def test_degree_bound(self, cp2_oriented):
        od = cp2_oriented
        tab = table_single_form(od)
        c = structure_constants(od, tab, "p2", "p3")
        for r, poly in c.items():
            if not poly.is_zero():
                d = od.lam["p2"] + od.lam["p3"] - od.lam[r]
                assert d >= 0 and poly.degree() == d


class TestTwistedEdgeScalar:
    @pytest.mark.parametrize("k", [2, 3, 5])
    def test_engines_agree_with_nonunit_theta(self, k):
        """A 4-cycle whose top edges carry edge scalar k: the dynamic
        program multiplies the scalar in, the congruence solver never sees
        it, and both must land on the same table."""
        verts = [("s", Weight((0, 0))), ("p", Weight((k, 1))),
                 ("r", Weight((1, k + 1))), ("q", Weight((k, k + 1)))]
        edges = [("s", "p", Weight((k, 1))), ("p", "q", Weight((0, 1))),
                 ("s", "r", Weight((1, k + 1))), ("r", "q", Weight((1, 0)))]
        od = OrientedGraphData(GkmGraph(2, verts, edges), Weight((1, 1)))
        assert od.theta("p", "q") == k
        gz = table_single_form(od)
        assert gz.entries == brute_solve_canonical(od).entries
        classes = [dict(od.graph.moment)]
        for a in od.graph.ids:
            for b in od.graph.ids:
                assert restriction_ordered(od, a, b, classes)[0] == gz.get(a, b)
        assert gz.get("p", "q") == parse_poly(f"{k}*x1", 2)
        assert certify_table(od, gz).ok


class TestProductGraphs:
    @pytest.mark.parametrize("dims", [(1, 1), (1, 2), (2, 2), (1, 1, 1)])
    def test_engine_agreement_on_products(self, dims):
        from conftest import product_of_projective_spaces
        from gkmrest.gkm import choose_generic_xi, validate_gkm
        g = product_of_projective_spaces(*dims)
        assert validate_gkm(g).ok
        od = OrientedGraphData(g, choose_generic_xi(g))
        gz = table_single_form(od)
        br = brute_solve_canonical(od)
        assert gz.entries == br.entries
        cert = certify_table(od, gz)
        assert cert.ok, str(cert)

    def test_product_index_is_sum(self):
        from conftest import product_of_projective_spaces
        from gkmrest.gkm import choose_generic_xi
        g = product_of_projective_spaces(2, 1)
        od = OrientedGraphData(g, choose_generic_xi(g))
        tops = sorted(od.lam.values())
        assert tops[-1] == 3 and tops[0] == 0


class TestVanishing:
    def test_zero_without_ascending_path(self, cp2_oriented, square_od):
        from gkmrest.gkm import enumerate_paths
        for od in (cp2_oriented, square_od):
            tab = table_single_form(od)
            for p in od.graph.ids:
                for q in od.graph.ids:
                    if p != q and not enumerate_paths(od, p, q, ascending_only=True):
                        assert tab.get(p, q).is_zero()


class TestTableSerialization:
    def test_json_keys(self, cp2_oriented):
        tab = table_single_form(cp2_oriented)
        data = tab.to_json()
        assert "p1|p3" in data
        assert data["p2|p3"] == parse_poly("x1 - x3", 3).to_json()

    def test_csv_has_flags(self, cp2_oriented):
        csv = table_single_form(cp2_oriented).to_csv()
        assert csv.splitlines()[0].startswith("p,q,lam_p")
        assert "true" in csv
