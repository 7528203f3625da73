"""Exact computation of canonical-class restrictions on labelled moment
graphs and on generic orbit graphs of the classical families, with
independent cross-checking engines."""

from .exact import (
    LinFrac,
    Poly,
    Rational,
    Weight,
    linfrac_sum_to_poly,
    pair,
    poly_div_exact,
    rho_project,
)
from .gkm import (
    CanonicalGraph,
    GkmGraph,
    OrientedGraphData,
    build_canonical_graph,
    choose_generic_xi,
    enumerate_paths,
    is_index_increasing,
    magnitude,
    validate_gkm,
)
from .canonical import (
    RestrictionTable,
    adjacent_restriction,
    brute_solve_canonical,
    certify_table,
    restriction_ordered,
    restriction_single_form,
    restriction_vertex_classes,
    structure_constants,
    table_single_form,
    verify_tech,
)
from .fibration import (
    FibrationSpec,
    TowerSpec,
    explicit_P,
    fiber_decomposition,
    skipped_vertices,
    tower_restriction,
)
from .orbits import (
    Orbit,
    OrbitSpec,
    RootSystem,
    SignedPerm,
    build_orbit_gkm,
    canonical_graph_orbit,
    classify_paths_B,
    classify_paths_D,
    formula_An,
    formula_Bn,
    formula_Cn,
    formula_Dn,
    lift_path,
    pairing_check,
    reduced_words,
    typed_table,
    weyl_length,
)
from .oracle import billey_restriction, cross_validate

__version__ = "0.1.0"
