import pytest

from germkit import catalog, germs, invsemi, paction, rings


Z2 = catalog.semigroup("z2")


def test_munn_actions_validate_global():
    for name in catalog.SEMIGROUP_NAMES:
        m = invsemi.munn_representation(catalog.semigroup(name))
        assert m.is_global


def test_partial_swap_validates_non_global():
    theta = catalog.action("z2-swap")
    assert not theta.is_global
    assert theta.theta(1, 0) == 1


def test_composition_not_restriction_detected():
    # theta_g o theta_g has domain {x,y} but theta_1 only acts on {x}
    with pytest.raises((paction.CompositionNotRestriction, paction.Degenerate)) as exc:
        paction.validate_partial_action(
            Z2, ("x", "y"), ((0,), (0, 1)), ({0: 0}, {0: 1, 1: 0})
        )
    assert isinstance(exc.value, paction.CompositionNotRestriction)


def test_not_bijective_detected():
    with pytest.raises(paction.NotBijective):
        paction.validate_partial_action(
            Z2, ("x", "y"), ((0, 1), (0, 1)), ({0: 0, 1: 1}, {0: 0, 1: 0})
        )


def test_inverse_mismatch_detected():
    C2 = catalog.semigroup("chain2")
    # swap on X_e with theta_e != theta_e^{-1} restricted: inverse of theta_e
    # must be itself since e* = e
    with pytest.raises(paction.ActionError):
        paction.validate_partial_action(
            C2, ("x", "y"), ((0, 1), (0, 1)), ({0: 0, 1: 1}, {0: 1, 1: 0})
        )


def test_degenerate_detected():
    with pytest.raises(paction.Degenerate) as exc:
        paction.validate_partial_action(
            Z2, ("x", "y"), ((0,), (0,)), ({0: 0}, {0: 0})
        )
    assert exc.value.witness == 1


def test_dynamics_self_action_of_e_unitary_free():
    rep = paction.dynamics_report(catalog.action("self-sz2"))
    assert rep.free and rep.effective and rep.top_principal


def test_dynamics_trivial_point_action_not_free():
    rep = paction.dynamics_report(catalog.action("z2-trivial-pt"))
    assert not rep.free
    assert rep.lambda_points == ()
    assert rep.consistent


def test_dynamics_munn_chain2_free():
    rep = paction.dynamics_report(catalog.action("munn-chain2"))
    assert rep.free


def test_dynamics_munn_i2_not_free():
    # the swap fixes the full identity non-trivially
    rep = paction.dynamics_report(catalog.action("munn-i2"))
    assert not rep.free
    assert rep.consistent


def test_dynamics_formulations_agree_everywhere():
    for name in catalog.ACTION_NAMES:
        rep = paction.dynamics_report(catalog.action(name))
        assert rep.consistent, name
        assert rep.lambda_points == rep.lambda_by_pairs


# --- dual actions and recovery ---------------------------------------------------

def test_dual_dimensions_match_domains():
    theta = catalog.action("z2-swap")
    alg = paction.dual_action(theta, rings.RING_Q)
    for s in range(len(theta.semigroup)):
        assert len(alg.ideal_gens[s]) == len(theta.domains[s])


def test_dual_trivial_singleton():
    theta = paction.one_point_trivial_action(catalog.semigroup("chain2"))
    alg = paction.dual_action(theta, rings.RING_Q)
    assert alg.ideal_gens[0] == ((rings.RING_Q.one,),)
    assert alg.alpha_images[0] == ((rings.RING_Q.one,),)


def test_dual_swap_is_permutation():
    theta = catalog.action("z2-swap")
    alg = paction.dual_action(theta, rings.RING_Q)
    # alpha_g sends 1_x to 1_{theta_g(x)}
    dom = sorted(theta.domains[1])
    for k, y in enumerate(dom):
        img = alg.alpha_images[1][k]
        assert [i for i, v in enumerate(img) if v != 0] == [theta.theta(1, y)]


@pytest.mark.parametrize("ringspec", ["Q", "Zp:5", "Z"])
def test_recover_round_trip_all_catalog(ringspec):
    ring = rings.parse_ring_spec(ringspec)
    for name in catalog.ACTION_NAMES:
        theta = catalog.action(name)
        rec = paction.recover_action_from_dual(paction.dual_action(theta, ring))
        assert rec == theta, name


def test_dual_of_recovered_action_is_identity():
    # the reverse round trip: dualizing the recovered action reproduces the
    # algebraic data exactly (indicator generators and images)
    for name in ("z2-swap", "munn-i2", "edge-boundary"):
        theta = catalog.action(name)
        alg = paction.dual_action(theta, rings.RING_Q)
        again = paction.dual_action(paction.recover_action_from_dual(alg), rings.RING_Q)
        assert again.ideal_gens == alg.ideal_gens
        assert again.alpha_images == alg.alpha_images


def test_lattice_bijection_on_four_points():
    ring = rings.RING_Q
    for mask in range(16):
        subset = [i for i in range(4) if mask >> i & 1]
        ideal = paction.indicator_ideal(ring, 4, subset)
        assert list(paction.ideal_support(ring, ideal)) == subset
        again = paction.indicator_ideal(ring, 4, paction.ideal_support(ring, ideal))
        assert paction.spans_equal(ring, ideal, again)


def test_recover_rejects_decomposable_ring():
    alg = paction.dual_action(catalog.action("z2-swap"), rings.ring_zmod(6))
    with pytest.raises(rings.DecomposableRing):
        paction.recover_action_from_dual(alg)


def test_recover_rejects_non_ideal_span():
    theta = paction.one_point_trivial_action(Z2)
    alg = paction.dual_action(theta, rings.RING_Q)
    # replace D_1 by the diagonal line in R^2 worth of data: fake a 2-point
    # carrier whose ideal generators are not coordinate-decomposable
    bad = paction.AlgebraicPartialAction(
        Z2,
        rings.RING_Q,
        ("x", "y"),
        (((1, 1),), ((1, 1),)),
        (((1, 1),), ((1, 1),)),
    )
    with pytest.raises(paction.NotAnIdeal):
        paction.recover_action_from_dual(bad)
    del alg


def test_recover_rejects_missing_local_units_over_z():
    bad = paction.AlgebraicPartialAction(
        Z2,
        rings.RING_Z,
        ("x",),
        (((2,),), ((2,),)),
        (((2,),), ((2,),)),
    )
    with pytest.raises(paction.NoLocalUnits):
        paction.recover_action_from_dual(bad)


# --- induced actions --------------------------------------------------------------

def test_induced_group_action_requires_e_unitary():
    with pytest.raises(paction.NotEUnitary):
        paction.induced_group_action(catalog.action("munn-i2"))


def test_induced_group_action_semilattice_collapses():
    theta = catalog.action("munn-chain2")
    induced, gi = paction.induced_group_action(theta)
    assert len(gi.group) == 1
    assert set(induced.domains[0]) == set(range(len(theta.carrier)))
    assert induced.maps[0] == {x: x for x in range(len(theta.carrier))}


def test_induced_group_action_germ_groupoids_agree():
    theta = catalog.action("self-sz2")
    induced, _ = paction.induced_group_action(theta)
    g1 = germs.groupoid_of_germs(theta).groupoid
    g2 = germs.groupoid_of_germs(induced).groupoid
    iso = germs.groupoid_iso_search(g1, g2)
    assert iso is not None and germs.verify_groupoid_iso(iso)


def test_induced_group_action_explicit_germ_map():
    # the map germ(s, x) -> germ([s], x) is itself a groupoid isomorphism
    for name in ("self-sz2", "munn-chain3", "munn-sz2"):
        theta = catalog.action(name)
        induced, gi = paction.induced_group_action(theta)
        ga = germs.groupoid_of_germs(theta)
        gb = germs.groupoid_of_germs(induced)
        amap = [None] * len(ga.groupoid.arrows)
        for (s, x), cls in ga.pair_class.items():
            img = gb.germ(gi.class_of[s], x)
            assert amap[cls] in (None, img)  # well-defined on germ classes
            amap[cls] = img
        iso = germs.GroupoidIso(ga.groupoid, gb.groupoid, tuple(amap))
        assert germs.verify_groupoid_iso(iso)


def test_induced_group_action_lambda_agrees():
    for name in ("self-sz2", "munn-chain2", "munn-sz2", "self-z2"):
        theta = catalog.action(name)
        induced, _ = paction.induced_group_action(theta)
        assert (
            paction.dynamics_report(theta).lambda_points
            == paction.dynamics_report(induced).lambda_points
        )


def test_induced_exel_action_is_global_extension():
    theta = catalog.action("z2-swap")
    ind, ex = paction.induced_exel_action(theta)
    assert ind.is_global
    # theta-bar restricted to the group symbols is theta
    for g in range(len(Z2)):
        assert ind.maps[ex.of_group[g]] == theta.maps[g]


def test_induced_exel_eps_acts_as_identity_on_domain():
    theta = catalog.action("z2-swap")
    ind, ex = paction.induced_exel_action(theta)
    S = ind.semigroup
    eps = S.mul(ex.of_group[1], ex.of_group[Z2.inv(1)])
    assert ind.maps[eps] == {x: x for x in theta.domains[1]}


def test_induced_exel_global_input_full_domains():
    theta = catalog.action("self-z2")
    ind, ex = paction.induced_exel_action(theta)
    for i in range(len(ind.semigroup)):
        assert set(ind.domains[i]) == set(range(len(theta.carrier)))


def _truncated_lattice_with_z2(n):
    """Finite truncation of the lattice-with-involution semigroup: elements
    0..n-1 meet by minimum, inf is a unit for {inf, z} with zz = inf, and both
    inf and z act as identities on the lattice part."""
    names = [str(k) for k in range(n)] + ["inf", "z"]
    inf, z = n, n + 1

    def mul(a, b):
        if a < n and b < n:
            return min(a, b)
        if a < n:
            return a
        if b < n:
            return b
        return z if (a, b) in ((inf, z), (z, inf)) else inf

    tbl = [[mul(a, b) for b in range(n + 2)] for a in range(n + 2)]
    return invsemi.validate_inverse_semigroup(names, tbl)


def test_truncated_lattice_munn_dynamics():
    # the finite shadow of the compactified-lattice example: z fixes inf
    # non-trivially, every lattice point is only trivially fixed
    S = _truncated_lattice_with_z2(4)
    assert not invsemi.is_e_unitary(S)[0]
    m = invsemi.munn_representation(S)
    rep = paction.dynamics_report(m)
    inf_pos = list(S.idempotents).index(S.index("inf"))
    assert inf_pos not in rep.lambda_points
    assert set(rep.lambda_points) == set(range(len(S.idempotents))) - {inf_pos}
    assert not rep.free


def test_truncated_lattice_munn_matches_restricted_product():
    from germkit import germs

    S = _truncated_lattice_with_z2(3)
    g = germs.groupoid_of_germs(invsemi.munn_representation(S)).groupoid
    rp = invsemi.restricted_product_groupoid(S)
    iso = germs.groupoid_iso_search(g, rp)
    assert iso is not None and germs.verify_groupoid_iso(iso)


def test_factoring_through_group_detects_e_unitarity():
    for name in catalog.SEMIGROUP_NAMES:
        S = catalog.semigroup(name)
        sa = invsemi.canonical_self_action(S)
        assert paction.action_factors_through_group(sa)[0] == invsemi.is_e_unitary(S)[0]
