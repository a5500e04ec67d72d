"""Continuous orbit equivalence of partial actions on finite carriers.

An orbit equivalence is a carrier bijection phi together with total cocycle
tables a : S*X -> T and b : T*Y -> S intertwining the two actions.  On
discrete carriers continuity is vacuous; the germ-level identities stand in
for the limit arguments and are asserted when both actions are topologically
principal.
"""

from dataclasses import dataclass

from . import germs, paction


class CoeError(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class IdentityFails(CoeError):
    pass


class GermIdentityFails(CoeError):
    pass


class NoCoveringElement(CoeError):
    pass


class NotTopPrincipal(CoeError):
    pass


class NotWellDefined(CoeError):
    pass


@dataclass
class OrbitEquivalence:
    phi: dict  # carrier(X) point -> carrier(Y) point, bijective
    a: dict    # (s, x) for x in dom theta_s  ->  t in T
    b: dict    # (t, y) for y in dom gamma_t  ->  s in S


def identity_orbit_equivalence(theta):
    n = len(theta.carrier)
    phi = {x: x for x in range(n)}
    a = {(s, x): s for s, x in theta.pairs()}
    return OrbitEquivalence(phi, a, dict(a))


def verify_orbit_equivalence(theta, gamma, oe, check_germ_identities=None):
    """Check the two defining identities pointwise, and the germ identities
    (well-definedness, cocycle, inversion) when both actions are
    topologically principal.  Raises with a witness on the first failure."""
    X = range(len(theta.carrier))
    Y = range(len(gamma.carrier))
    phi = oe.phi
    if sorted(phi) != list(X) or sorted(phi.values()) != list(Y):
        raise CoeError("phi is not a carrier bijection")
    phi_inv = {y: x for x, y in phi.items()}

    for s, x in theta.pairs():
        t = oe.a.get((s, x))
        if t is None:
            raise CoeError(f"a is undefined at ({theta.semigroup.name(s)}, {theta.carrier[x]})")
        if phi[x] not in gamma.maps[t]:
            raise IdentityFails(
                f"a({theta.semigroup.name(s)}, {theta.carrier[x]}) does not act at phi(x)",
                ("a", s, x),
            )
        if gamma.theta(t, phi[x]) != phi[theta.theta(s, x)]:
            raise IdentityFails(
                f"phi(theta_s(x)) != gamma_a(s,x)(phi(x)) at ({theta.semigroup.name(s)}, {theta.carrier[x]})",
                ("a", s, x),
            )
    for t, y in gamma.pairs():
        s = oe.b.get((t, y))
        if s is None:
            raise CoeError(f"b is undefined at ({gamma.semigroup.name(t)}, {gamma.carrier[y]})")
        if phi_inv[y] not in theta.maps[s]:
            raise IdentityFails(
                f"b({gamma.semigroup.name(t)}, {gamma.carrier[y]}) does not act at phi^-1(y)",
                ("b", t, y),
            )
        if theta.theta(s, phi_inv[y]) != phi_inv[gamma.theta(t, y)]:
            raise IdentityFails(
                f"phi^-1(gamma_t(y)) != theta_b(t,y)(phi^-1(y)) at ({gamma.semigroup.name(t)}, {gamma.carrier[y]})",
                ("b", t, y),
            )

    principal = (
        paction.dynamics_report(theta).top_principal
        and paction.dynamics_report(gamma).top_principal
    )
    if check_germ_identities is None:
        check_germ_identities = principal
    germ_checked = False
    if check_germ_identities:
        gx = germs.groupoid_of_germs(theta)
        gy = germs.groupoid_of_germs(gamma)
        S = theta.semigroup
        T = gamma.semigroup
        for x in X:
            acting = theta.acting_elements(x)
            fx = phi[x]
            for s1 in acting:
                for s2 in acting:
                    if gx.germ(s1, x) == gx.germ(s2, x):
                        if gy.germ(oe.a[(s1, x)], fx) != gy.germ(oe.a[(s2, x)], fx):
                            raise GermIdentityFails(
                                "equal germs map to different germs",
                                ("a", s1, s2, x),
                            )
        for x in X:
            for s2 in theta.acting_elements(x):
                mid = theta.theta(s2, x)
                for s1 in theta.acting_elements(mid):
                    s12 = S.mul(s1, s2)
                    lhs = gy.germ(oe.a[(s12, x)], phi[x])
                    t12 = T.mul(oe.a[(s1, mid)], oe.a[(s2, x)])
                    rhs = gy.germ(t12, phi[x])
                    if lhs != rhs:
                        raise GermIdentityFails(
                            "cocycle identity fails",
                            ("b", s1, s2, x),
                        )
        for s, x in theta.pairs():
            back = oe.b[(oe.a[(s, x)], phi[x])]
            if gx.germ(back, x) != gx.germ(s, x):
                raise GermIdentityFails(
                    "b(a(s,x), phi(x)) has a different germ than s",
                    ("c", s, x),
                )
        germ_checked = True
    return {
        "identities": "ok",
        "top_principal": principal,
        "germ_identities_checked": germ_checked,
    }


def coe_from_groupoid_iso(iso, germ_x, germ_y):
    """Extract (phi, a, b) from an isomorphism of groupoids of germs.

    phi is the restriction to units; a(s,x) is the semigroup element of the
    representative of the image germ, which covers it by construction.
    """
    theta = germ_x.action
    gamma = germ_y.action
    if iso.source is not germ_x.groupoid or iso.target is not germ_y.groupoid:
        raise CoeError("isomorphism does not connect the given germ groupoids")
    phi = {}
    for x in range(len(theta.carrier)):
        u = iso.arrow_map[germ_x.unit_of_point[x]]
        if u not in germ_y.point_of_unit:
            raise NoCoveringElement("image of a unit is not a unit", x)
        phi[x] = germ_y.point_of_unit[u]
    a = {}
    for s, x in theta.pairs():
        image = iso.arrow_map[germ_x.germ(s, x)]
        t, y = germ_y.reps[image]
        if y != phi[x]:
            raise NoCoveringElement(
                f"image germ of ({theta.semigroup.name(s)}, {theta.carrier[x]}) is not based at phi(x)",
                (s, x),
            )
        a[(s, x)] = t
    inv = iso.inverted()
    phi_inv = {y: x for x, y in phi.items()}
    b = {}
    for t, y in gamma.pairs():
        image = inv.arrow_map[germ_y.germ(t, y)]
        s, x = germ_x.reps[image]
        if x != phi_inv[y]:
            raise NoCoveringElement("inverse image germ is not based at phi^-1(y)", (t, y))
        b[(t, y)] = s
    oe = OrbitEquivalence(phi, a, b)
    verify_orbit_equivalence(theta, gamma, oe)
    return oe


def iso_from_coe(theta, gamma, oe):
    """Phi[s,x] = [a(s,x), phi(x)], well-defined for topologically principal
    actions; returns the verified groupoid isomorphism."""
    if not paction.dynamics_report(theta).top_principal or not paction.dynamics_report(gamma).top_principal:
        raise NotTopPrincipal("both actions must be topologically principal")
    gx = germs.groupoid_of_germs(theta)
    gy = germs.groupoid_of_germs(gamma)
    amap = [None] * len(gx.groupoid.arrows)
    for (s, x), arrow in gx.pair_class.items():
        image = gy.germ(oe.a[(s, x)], oe.phi[x])
        if amap[arrow] is None:
            amap[arrow] = image
        elif amap[arrow] != image:
            raise NotWellDefined(
                "two representatives of one germ map to different germs",
                (arrow, (s, x)),
            )
    if sorted(amap) != list(range(len(gy.groupoid.arrows))):
        raise CoeError("induced germ map is not a bijection")
    iso = germs.GroupoidIso(gx.groupoid, gy.groupoid, tuple(amap))
    if not germs.verify_groupoid_iso(iso):
        raise CoeError("induced germ map is not an isomorphism")
    return iso, gx, gy
