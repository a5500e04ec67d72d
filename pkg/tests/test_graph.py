import random

import pytest

from germkit import catalog, germs, graph as gr, invsemi, paction, rings


Q = rings.RING_Q
LOOP = catalog.graphs("loop")
EDGE = catalog.graphs("edge")
FAN = catalog.graphs("fan")
LOOP_EXIT = catalog.graphs("loop-exit")
CYCLE2 = catalog.graphs("cycle2-exit")


def _p(g, spec):
    """Path from a vertex name or a dotted edge-name string."""
    if spec in g.vertices:
        return gr.Path(g.vertices.index(spec), ())
    edges = tuple(g.edge_names.index(e) for e in spec.split("."))
    return gr.make_path(g, g.esrc[edges[0]], edges)


# --- semigroup product -------------------------------------------------------------

def test_graph_semigroup_product_cases():
    v, w, e = _p(EDGE, "v"), _p(EDGE, "w"), _p(EDGE, "e")
    # (mu,nu)(nu,eta) = (mu,eta)
    assert gr.graph_semigroup_mul(EDGE, (e, w), (w, e)) == (e, e)
    # gamma absorbed on the other side
    assert gr.graph_semigroup_mul(EDGE, (w, e), (e, w)) == (w, w)
    # incomparable: distinct edges
    e1, e2 = _p(FAN, "e1"), _p(FAN, "e2")
    w1, w2 = _p(FAN, "w1"), _p(FAN, "w2")
    assert gr.graph_semigroup_mul(FAN, (w1, e1), (e2, w2)) == gr.ZERO
    # (mu,nu)* (mu,nu) = (nu,nu)
    assert gr.graph_semigroup_mul(EDGE, (w, e), (e, w)) == (w, w)


def test_graph_semigroup_table_edge():
    S, payload = gr.graph_semigroup(EDGE)
    assert len(S) == 6
    assert S.zero == 0
    flag, _ = invsemi.is_e_unitary(S)
    assert not flag


def test_graph_semigroup_is_meet_semilattice():
    # every pair of elements has a greatest common lower bound (possibly 0)
    for g in (EDGE, FAN):
        S, _ = gr.graph_semigroup(g)
        for s in range(len(S)):
            for t in range(len(S)):
                clb = invsemi.common_lower_bounds(S, s, t)
                maxima = [
                    u for u in clb
                    if not any(v != u and invsemi.natural_leq(S, u, v) for v in clb)
                ]
                assert len(maxima) == 1
                meet = invsemi.compatible_meet(S, s, t)
                if meet is not None:
                    assert meet == maxima[0]
                else:
                    assert maxima[0] == S.zero


# --- cylinders ----------------------------------------------------------------------

def test_cylinder_empty():
    v = _p(LOOP, "v")
    assert not gr.cylinder_empty(LOOP, gr.Cylinder(v))
    assert gr.cylinder_empty(LOOP, gr.Cylinder(v, frozenset({0})))
    w = _p(EDGE, "w")
    assert not gr.cylinder_empty(EDGE, gr.Cylinder(w))  # sink singleton


def test_cylinder_atoms_single_loop():
    atoms = gr.cylinder_atoms(LOOP, gr.Cylinder(_p(LOOP, "v")), 2)
    assert [gr.fmt_path(LOOP, a.mu) for a in atoms] == ["e.e"]


def test_cylinder_atoms_edge_graph():
    atoms = gr.cylinder_atoms(EDGE, gr.Cylinder(_p(EDGE, "v")), 1)
    assert [gr.fmt_path(EDGE, a.mu) for a in atoms] == ["e"]
    atoms = gr.cylinder_atoms(EDGE, gr.Cylinder(_p(EDGE, "w")), 1)
    assert [gr.fmt_path(EDGE, a.mu) for a in atoms] == ["w"]


def test_cylinder_atoms_depth_too_small():
    with pytest.raises(gr.DepthTooSmall):
        gr.cylinder_atoms(LOOP, gr.Cylinder(_p(LOOP, "e.e")), 1)


def test_cylinder_atoms_of_empty_cylinder():
    # all outgoing edges forbidden at a regular vertex: no atoms
    c = gr.Cylinder(_p(LOOP, "v"), frozenset({0}))
    assert gr.cylinder_empty(LOOP, c)
    assert gr.cylinder_atoms(LOOP, c, 2) == []


def test_atoms_partition_boundary_pointwise():
    # oracle: on acyclic graphs the depth-D atoms biject with their point sets
    for g in (EDGE, FAN):
        boundary = gr.boundary_enumerate(g)
        depth = 1 + max(len(p.edges) for p in boundary)
        atoms = gr.boundary_atoms(g, depth)
        covered = []
        for a in atoms:
            pts = [p for p in boundary if gr.path_is_prefix(a.mu, p)]
            assert len(pts) == 1  # sink-rooted atoms are singletons
            covered.extend(pts)
        assert sorted(covered) == sorted(boundary)


def test_bisection_atoms_match_pointwise_germ_triples():
    # oracle: the atoms of Z(mu,nu,F) biject with the triples (mu x, k, nu x)
    # enumerated from the finite boundary space
    for g in (EDGE, FAN):
        boundary = gr.boundary_enumerate(g)
        depth = 1 + max(len(p.edges) for p in boundary)
        paths = gr.all_finite_paths(g)
        for mu in paths:
            for nu in paths:
                if gr.path_end(g, mu) != gr.path_end(g, nu):
                    continue
                for forbidden in [frozenset()] + [
                    frozenset({e}) for e in g.out_edges(gr.path_end(g, mu))
                ]:
                    cb = gr.CylinderBisection(mu, nu, forbidden)
                    atoms = gr.bisection_atoms(g, cb, depth)
                    pointwise = {
                        (gr.path_cat(g, mu, x), gr.path_cat(g, nu, x))
                        for x in boundary
                        if gr.path_is_prefix(gr.Path(gr.path_end(g, mu), ()), x)
                        and not (x.edges and x.edges[0] in forbidden)
                    }
                    assert {(a.mu, a.nu) for a in atoms} == pointwise


# --- condition (L), boundary, actions ------------------------------------------------

def test_condition_l():
    flag, witness = gr.is_condition_L(LOOP)
    assert not flag and gr.fmt_path(LOOP, witness) == "e"
    assert gr.is_condition_L(LOOP_EXIT)[0]
    assert gr.is_condition_L(EDGE)[0]
    assert gr.is_condition_L(CYCLE2)[0]


def test_boundary_enumerate():
    assert [gr.fmt_path(EDGE, p) for p in gr.boundary_enumerate(EDGE)] == ["w", "e"]
    assert gr.boundary_enumerate(LOOP) is None
    single = gr.make_graph(["v"], [])
    assert [gr.fmt_path(single, p) for p in gr.boundary_enumerate(single)] == ["v"]


def test_canonical_action_moves_points():
    act, payload, boundary = gr.canonical_graph_action(EDGE)
    e, w = _p(EDGE, "e"), _p(EDGE, "w")
    s = payload.index((e, w))
    wpos = boundary.index(w)
    epos = boundary.index(e)
    assert act.maps[s] == {wpos: epos}
    # idempotents act as identities
    for i, el in enumerate(payload):
        if el != gr.ZERO and el[0] == el[1]:
            assert all(x == y for x, y in act.maps[i].items())


def test_canonical_action_principality_matches_condition_l():
    for name in ("edge", "fan"):
        g = catalog.graphs(name)
        act, _, _ = gr.canonical_graph_action(g)
        assert paction.dynamics_report(act).top_principal == gr.is_condition_L(g)[0]


def test_canonical_action_cyclic_is_symbolic():
    act = gr.canonical_graph_action(LOOP_EXIT)
    assert isinstance(act, gr.CylinderAction)
    v, e, f = _p(LOOP_EXIT, "v"), _p(LOOP_EXIT, "e"), _p(LOOP_EXIT, "f")
    ee = _p(LOOP_EXIT, "e.e")
    el = (ee, e)  # theta: Z(e) -> Z(ee), e x -> ee x
    # cylinder inside the domain maps by prefix replacement
    img = act.apply(el, gr.Cylinder(_p(LOOP_EXIT, "e.f")))
    assert img.mu == _p(LOOP_EXIT, "e.e.f")
    # idempotents act as the identity on their cylinder
    assert act.apply((e, e), gr.Cylinder(ee)).mu == ee
    # disjoint cylinder is not moved
    assert act.apply(el, gr.Cylinder(f)) is None
    # cylinder strictly containing the domain restricts to it first
    assert act.apply(el, gr.Cylinder(v)).mu == ee
    assert act.apply(el, gr.Cylinder(v, frozenset({1}))).mu == ee  # f forbidden, e fine
    assert act.apply(el, gr.Cylinder(v, frozenset({0}))) is None  # e forbidden kills Z(e)


def test_boundary_groupoid_edge_is_pair_groupoid():
    gpd, germg, iso, rep = gr.boundary_groupoid(EDGE)
    assert len(gpd.arrows) == 4
    assert rep["isomorphic"]
    pair = catalog.pair_groupoid(2)
    assert germs.groupoid_iso_search(gpd, pair) is not None


def test_boundary_groupoid_isolated_sink():
    single = gr.make_graph(["v"], [])
    gpd, _, _, rep = gr.boundary_groupoid(single)
    assert len(gpd.arrows) == 1 and len(gpd.units) == 1


def test_boundary_groupoid_fan():
    gpd, _, _, rep = gr.boundary_groupoid(FAN)
    assert rep["isomorphic"]
    assert len(gpd.arrows) == 8  # two orbits of two points


def test_shift_on_cylinder():
    c = gr.Cylinder(_p(LOOP, "e.e"))
    assert gr.shift_on_cylinder(LOOP, c).mu == _p(LOOP, "e")
    c = gr.Cylinder(_p(EDGE, "e"))
    assert gr.shift_on_cylinder(EDGE, c).mu == _p(EDGE, "w")
    with pytest.raises(gr.LengthZero):
        gr.shift_on_cylinder(EDGE, gr.Cylinder(_p(EDGE, "w")))


def test_shift_matches_pointwise_shift():
    # oracle: the points of the shifted cylinder are the shifts of the points
    for g in (EDGE, FAN):
        boundary = gr.boundary_enumerate(g)
        for p in boundary:
            if not p.edges:
                continue
            c = gr.Cylinder(p)
            shifted = gr.shift_on_cylinder(g, c)
            pts = {q for q in boundary if gr.path_is_prefix(shifted.mu, q)}
            assert pts == {gr.path_suffix(g, q, 1) for q in boundary if gr.path_is_prefix(p, q)}


# --- Leavitt arithmetic ---------------------------------------------------------------

def test_laurent_relations_single_loop():
    e = gr.lv_edge(LOOP, Q, "e")
    es = gr.lv_edge_star(LOOP, Q, "e")
    v = gr.lv_vertex(LOOP, Q, "v")
    lhs = gr.leavitt_multiply(e, es)
    rhs = gr.leavitt_multiply(es, e)
    assert gr.leavitt_equal(lhs, v)
    assert gr.leavitt_equal(rhs, v)
    assert lhs.depth <= 4 and rhs.depth <= 4


def test_leavitt_relations_edge_graph():
    v, w = gr.lv_vertex(EDGE, Q, "v"), gr.lv_vertex(EDGE, Q, "w")
    e, es = gr.lv_edge(EDGE, Q, "e"), gr.lv_edge_star(EDGE, Q, "e")
    assert gr.leavitt_equal(gr.leavitt_multiply(v, e), e)
    assert gr.leavitt_equal(gr.leavitt_multiply(e, w), e)
    assert gr.leavitt_equal(gr.leavitt_multiply(w, es), es)
    assert gr.leavitt_equal(gr.leavitt_multiply(es, v), es)
    assert gr.leavitt_equal(gr.leavitt_multiply(es, e), w)
    assert gr.leavitt_equal(v, gr.leavitt_multiply(e, es))


def test_leavitt_relation_iii_two_edge_vertex():
    e1s = gr.lv_edge_star(FAN, Q, "e1")
    e2 = gr.lv_edge(FAN, Q, "e2")
    e1 = gr.lv_edge(FAN, Q, "e1")
    w1 = gr.lv_vertex(FAN, Q, "w1")
    assert gr.leavitt_multiply(e1s, e2).is_zero()
    assert gr.leavitt_equal(gr.leavitt_multiply(e1s, e1), w1)


def test_leavitt_relation_iv_regular_vertex():
    u = gr.lv_vertex(FAN, Q, "u")
    total = gr.lv_zero(FAN, Q)
    for e in ("e1", "e2"):
        total = total + gr.leavitt_multiply(gr.lv_edge(FAN, Q, e), gr.lv_edge_star(FAN, Q, e))
    assert gr.leavitt_equal(u, total)


def test_leavitt_dimension_matches_groupoid():
    # atom count at saturating depth equals the arrow count of the boundary
    # groupoid; for the one-edge graph this is 4
    boundary = gr.boundary_enumerate(EDGE)
    atoms = set()
    for x in boundary:
        for y in boundary:
            if gr.path_end(EDGE, x) == gr.path_end(EDGE, y):
                atoms.add(gr.CylinderBisection(x, y))
    assert len(atoms) == 4
    gpd, _, _, _ = gr.boundary_groupoid(EDGE)
    assert len(atoms) == len(gpd.arrows)


def test_leavitt_associativity_random_atoms():
    rng = random.Random(5)
    gens = [
        gr.lv_edge(LOOP_EXIT, Q, "e"),
        gr.lv_edge(LOOP_EXIT, Q, "f"),
        gr.lv_edge_star(LOOP_EXIT, Q, "e"),
        gr.lv_edge_star(LOOP_EXIT, Q, "f"),
        gr.lv_vertex(LOOP_EXIT, Q, "v"),
        gr.lv_vertex(LOOP_EXIT, Q, "w"),
    ]
    for _ in range(40):
        x, y, z = (rng.choice(gens) for _ in range(3))
        lhs = gr.leavitt_multiply(gr.leavitt_multiply(x, y), z)
        rhs = gr.leavitt_multiply(x, gr.leavitt_multiply(y, z))
        assert gr.leavitt_equal(lhs, rhs)


def test_leavitt_diagonal_closed_and_commutative():
    rng = random.Random(6)
    diag_paths = ["v", "e", "e.e", "f", "e.f"]
    atoms = [gr.leavitt_diagonal_atom(LOOP_EXIT, Q, _p(LOOP_EXIT, s)) for s in diag_paths]
    for _ in range(25):
        a, b = rng.choice(atoms), rng.choice(atoms)
        ab = gr.leavitt_multiply(a, b)
        ba = gr.leavitt_multiply(b, a)
        assert gr.leavitt_equal(ab, ba)
        for cb in ab.atoms:
            assert cb.mu == cb.nu  # stays diagonal


def test_leavitt_expr_parser():
    el = gr.parse_leavitt_expr(LOOP, Q, "(+ (* e e*) (* -1 v))")
    assert el.is_zero()
    el2 = gr.parse_leavitt_expr(EDGE, Q, "(* 2 e)")
    assert gr.leavitt_equal(el2, gr.lv_edge(EDGE, Q, "e").scale(2))
    with pytest.raises(gr.GraphError):
        gr.parse_leavitt_expr(EDGE, Q, "(* unknown v)")


# --- transducers ------------------------------------------------------------------------

def _renaming_transducer(g_in, g_out, edge_map, sink_map):
    rules = []
    for e_in, e_out in edge_map.items():
        ei = g_in.edge_names.index(e_in)
        eo = g_out.edge_names.index(e_out)
        rules.append(
            gr.TransducerRule(
                "q",
                gr.Path(g_in.esrc[ei], (ei,)),
                gr.Path(g_out.esrc[eo], (eo,)),
                "q",
            )
        )
    for v_in, v_out in sink_map.items():
        rules.append(
            gr.TransducerRule(
                "q",
                gr.Path(g_in.vertices.index(v_in), ()),
                gr.Path(g_out.vertices.index(v_out), ()),
                "q",
            )
        )
    return gr.PrefixTransducer(g_in, g_out, "q", tuple(rules))


def test_identity_transducer_fixes_cylinders():
    T = gr.identity_transducer(EDGE)
    image = gr.transducer_apply(T, gr.Cylinder(_p(EDGE, "v")), 1)
    assert [gr.fmt_path(EDGE, c.mu) for c in image] == ["e"]
    ok, _ = gr.transducer_invertible_upto(T, T, 3)
    assert ok


def test_renaming_transducer_invertible():
    renamed = gr.make_graph(["a", "b"], [("x", "a", "b")])
    T = _renaming_transducer(EDGE, renamed, {"e": "x"}, {"w": "b"})
    Tinv = _renaming_transducer(renamed, EDGE, {"x": "e"}, {"b": "w"})
    for depth in (1, 2, 3):
        ok, _ = gr.transducer_invertible_upto(T, Tinv, depth)
        assert ok


def test_information_dropping_transducer_fails():
    T = _renaming_transducer(FAN, EDGE, {"e1": "e", "e2": "e"}, {"w1": "w", "w2": "w"})
    Tinv = _renaming_transducer(EDGE, FAN, {"e": "e1"}, {"w": "w1"})
    ok, witness = gr.transducer_invertible_upto(T, Tinv, 1)
    assert not ok
    assert witness is not None


def test_rules_not_exhaustive_detected():
    rules = (gr.TransducerRule("q", _p(EDGE, "e"), _p(EDGE, "e"), "q"),)
    T = gr.PrefixTransducer(EDGE, EDGE, "q", rules)  # missing the sink rule at w
    with pytest.raises(gr.RulesNotExhaustive):
        gr.validate_transducer(T)


def test_non_boundary_emission_detected():
    rules = (
        gr.TransducerRule("q", _p(EDGE, "e"), _p(EDGE, "e"), "q"),
        gr.TransducerRule("q", _p(EDGE, "w"), _p(EDGE, "v"), "q"),  # v is not a sink
    )
    T = gr.PrefixTransducer(EDGE, EDGE, "q", rules)
    ri = gr.validate_transducer(T)
    with pytest.raises(gr.NonBoundaryEmission):
        gr.run_transducer(T, ri, _p(EDGE, "w"), complete=True)


# --- graph orbit equivalence ---------------------------------------------------------------

def _identity_coe_data(g, depth):
    T = gr.identity_transducer(g)
    atoms = gr.boundary_atoms(g, depth, min_len=1)
    k = {gr.fmt_path(g, a.mu): 0 for a in atoms}
    l = {gr.fmt_path(g, a.mu): 1 for a in atoms}
    return T, T, k, l, dict(k), dict(l), depth


def test_verify_graph_coe_identity_acyclic():
    T, Tinv, k, l, kp, lp, depth = _identity_coe_data(EDGE, 2)
    rep = gr.verify_graph_coe(EDGE, EDGE, T, Tinv, k, l, kp, lp, depth)
    assert not rep["undetermined"]


def test_verify_graph_coe_identity_cyclic():
    T, Tinv, k, l, kp, lp, depth = _identity_coe_data(LOOP, 3)
    rep = gr.verify_graph_coe(LOOP, LOOP, T, Tinv, k, l, kp, lp, depth)
    assert rep["atoms_checked"] > 0
    assert not rep["undetermined"]


def test_verify_graph_coe_perturbed_cocycle_fails():
    T, Tinv, k, l, kp, lp, depth = _identity_coe_data(EDGE, 2)
    l[next(iter(l))] = 0
    with pytest.raises((gr.AtomFails, gr.DepthInsufficient)):
        gr.verify_graph_coe(EDGE, EDGE, T, Tinv, k, l, kp, lp, depth)


def test_verify_graph_coe_renamed_cyclic_graphs():
    # loop-with-exit against a renamed copy: the cylinder-level check is
    # exact on every atom because the runs align one edge at a time
    other = gr.make_graph(["a", "b"], [("x", "a", "a"), ("y", "a", "b")])
    T = _renaming_transducer(LOOP_EXIT, other, {"e": "x", "f": "y"}, {"w": "b"})
    Tinv = _renaming_transducer(other, LOOP_EXIT, {"x": "e", "y": "f"}, {"b": "w"})
    depth = 3
    k = {gr.fmt_path(LOOP_EXIT, a.mu): 0 for a in gr.boundary_atoms(LOOP_EXIT, depth, min_len=1)}
    l = {key: 1 for key in k}
    kp = {gr.fmt_path(other, a.mu): 0 for a in gr.boundary_atoms(other, depth, min_len=1)}
    lp = {key: 1 for key in kp}
    rep = gr.verify_graph_coe(LOOP_EXIT, other, T, Tinv, k, l, kp, lp, depth)
    assert not rep["undetermined"]
    assert rep["atoms_checked"] == len(k) + len(kp)


def test_verify_graph_coe_wrong_transducer_fails_on_atom():
    # swapping the two loop edges of a 2-loop graph against the identity
    # cocycles trips the atom check rather than the invertibility gate
    two_loop = gr.make_graph(["v"], [("e", "v", "v"), ("f", "v", "v")])
    ident = gr.identity_transducer(two_loop)
    swap = _renaming_transducer(two_loop, two_loop, {"e": "f", "f": "e"}, {})
    depth = 2
    k = {gr.fmt_path(two_loop, a.mu): 0 for a in gr.boundary_atoms(two_loop, depth, min_len=1)}
    l = {key: 1 for key in k}
    # identity transducer with identity cocycles passes
    rep = gr.verify_graph_coe(two_loop, two_loop, ident, ident, k, l, dict(k), dict(l), depth)
    assert rep["atoms_checked"] > 0
    # the edge swap is still a homeomorphism commuting with the shift, so it
    # passes too; corrupting one cocycle value must fail
    rep = gr.verify_graph_coe(two_loop, two_loop, swap, swap, k, l, dict(k), dict(l), depth)
    assert not rep["undetermined"]
    bad_l = dict(l)
    bad_l[next(iter(bad_l))] = 2
    with pytest.raises((gr.AtomFails, gr.DepthInsufficient)):
        gr.verify_graph_coe(two_loop, two_loop, ident, ident, k, bad_l, dict(k), dict(l), depth)


def test_graph_coe_search_identical_graphs():
    data = gr.graph_coe_search(EDGE, EDGE)
    assert data is not None
    assert data["phi"] == {"w": "w", "e": "e"}


def test_graph_coe_search_distinguishes_sizes():
    single = gr.make_graph(["v"], [])
    assert gr.graph_coe_search(EDGE, single) is None


def test_graph_coe_search_agrees_with_groupoid_iso():
    cases = [(EDGE, FAN), (EDGE, EDGE), (FAN, FAN)]
    for A, B in cases:
        found = gr.graph_coe_search(A, B) is not None
        ga, _, _, _ = gr.boundary_groupoid(A)
        gb, _, _, _ = gr.boundary_groupoid(B)
        assert found == (germs.groupoid_iso_search(ga, gb) is not None)


def test_graph_coe_search_renamed_graph():
    renamed = gr.make_graph(["a", "b"], [("x", "a", "b")])
    data = gr.graph_coe_search(EDGE, renamed)
    assert data is not None
    assert data["phi"] == {"w": "b", "e": "x"}


def test_graph_coe_search_cyclic_raises():
    with pytest.raises(gr.NotAcyclic):
        gr.graph_coe_search(LOOP, LOOP)


def test_graph_analyze_reports():
    rep = gr.graph_analyze(LOOP)
    assert not rep["condition_L"] and not rep["top_principal"]
    assert rep["witness_loop"] == "e" and rep["witness_isolated_cylinder"]
    rep = gr.graph_analyze(LOOP_EXIT)
    assert rep["condition_L"] and rep["top_principal"]
    rep = gr.graph_analyze(EDGE)
    assert rep["acyclic"] and rep["boundary_size"] == 2
    rep = gr.graph_analyze(CYCLE2)
    assert not rep["acyclic"] and rep["condition_L"] and rep["top_principal"]
