"""Command line interface: JSON in, JSON report out.

Exit codes: 0 on pass, 1 on mathematical failure (with a witness in the
report), 2 on input or usage errors.  Reports are emitted as JSON on stdout
with sorted keys, so identical inputs and seeds give byte-identical output;
a one-line human summary goes to stderr.
"""

import argparse
import json
import sys

from . import acceptance, algebra, catalog, germs, graph, invsemi, orbit, paction, rings


class ParseError(ValueError):
    def __init__(self, msg, line=None, col=None):
        super().__init__(msg)
        self.line = line
        self.col = col


SCHEMAS = {
    "semigroup": {"elements", "table"},
    "action": {"semigroup", "carrier", "domains", "maps"},
    "graph": {"vertices", "edges"},
    "coe": {"phi", "a", "b"},
    "graph-coe": {
        "depth", "initial", "rules", "initial_inverse", "rules_inverse",
        "k", "l", "kprime", "lprime",
    },
    "leavitt-expr": {"graph", "expr"},
    "groupoid": {"arrows", "units", "source", "range", "inverse", "compose"},
}


def parse_input(text, lenient=False):
    """Strict JSON parse into a (schema, payload) pair."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"invalid JSON: {err.msg}", err.lineno, err.colno)
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    schema = doc.get("schema")
    if schema not in SCHEMAS:
        raise ParseError(f"unknown schema tag {schema!r}")
    if doc.get("version") != 1:
        raise ParseError(f"unsupported schema version {doc.get('version')!r}")
    extra = set(doc) - SCHEMAS[schema] - {"schema", "version"}
    if extra:
        if lenient:
            print(f"warning: ignoring unknown fields {sorted(extra)}", file=sys.stderr)
        else:
            raise ParseError(f"unknown fields {sorted(extra)} (use --lenient to ignore)")
    missing = SCHEMAS[schema] - set(doc)
    if missing:
        raise ParseError(f"missing fields {sorted(missing)}")
    return schema, doc


def build_semigroup(doc):
    elements = doc["elements"]
    table = doc["table"]
    if not isinstance(table, list) or any(
        not isinstance(row, list) or len(row) != len(elements) for row in table
    ):
        bad = next(
            (i for i, row in enumerate(table) if not isinstance(row, list) or len(row) != len(elements)),
            None,
        )
        raise ParseError(f"table row {bad} is not a list of length {len(elements)}")
    return invsemi.validate_inverse_semigroup(elements, table)


def build_action(doc):
    sg = doc["semigroup"]
    if isinstance(sg, str):
        S = _catalog_semigroup(sg)
    else:
        S = build_semigroup(sg)
    carrier = tuple(doc["carrier"])
    pidx = {p: i for i, p in enumerate(carrier)}
    domains = []
    maps = []
    for name in S.elements:
        dom = doc["domains"].get(name)
        mp = doc["maps"].get(name)
        if dom is None or mp is None:
            raise ParseError(f"domains/maps missing for element {name!r}")
        try:
            domains.append(tuple(pidx[p] for p in dom))
            maps.append({pidx[x]: pidx[y] for x, y in mp.items()})
        except KeyError as err:
            raise ParseError(f"unknown carrier point {err.args[0]!r}")
    return paction.validate_partial_action(S, carrier, tuple(domains), tuple(maps))


def build_graph(doc):
    edges = [(e["name"], e["src"], e["dst"]) for e in doc["edges"]]
    return graph.make_graph(doc["vertices"], edges)


def build_action_coe(doc, theta, gamma):
    px = {p: i for i, p in enumerate(theta.carrier)}
    py = {p: i for i, p in enumerate(gamma.carrier)}
    sx = {n: i for i, n in enumerate(theta.semigroup.elements)}
    sy = {n: i for i, n in enumerate(gamma.semigroup.elements)}
    try:
        phi = {px[x]: py[y] for x, y in doc["phi"].items()}
        a = {
            (sx[s], px[x]): sy[t]
            for s, row in doc["a"].items()
            for x, t in row.items()
        }
        b = {
            (sy[t], py[y]): sx[s]
            for t, row in doc["b"].items()
            for y, s in row.items()
        }
    except KeyError as err:
        raise ParseError(f"unknown name {err.args[0]!r} in orbit equivalence data")
    return orbit.OrbitEquivalence(phi, a, b)


def _parse_tpath(g, spec):
    """A path is a vertex name (length 0) or a list of edge names."""
    if isinstance(spec, str):
        return graph.Path(g.vertices.index(spec), ())
    edges = tuple(g.edge_names.index(e) for e in spec)
    return graph.make_path(g, g.esrc[edges[0]], edges)


def build_graph_coe(doc, E, F):
    def rules_of(items, g_in, g_out):
        out = []
        for r in items:
            out.append(
                graph.TransducerRule(
                    r["state"],
                    _parse_tpath(g_in, r["consume"]),
                    _parse_tpath(g_out, r["emit"]),
                    r["next"],
                )
            )
        return tuple(out)

    T = graph.PrefixTransducer(E, F, doc["initial"], rules_of(doc["rules"], E, F))
    Tinv = graph.PrefixTransducer(
        F, E, doc["initial_inverse"], rules_of(doc["rules_inverse"], F, E)
    )
    return T, Tinv, doc["k"], doc["l"], doc["kprime"], doc["lprime"], doc["depth"]


def _catalog_semigroup(arg):
    try:
        return catalog.semigroup(arg)
    except KeyError as err:
        raise ParseError(str(err))


def _load(arg, expect, lenient=False):
    """Resolve 'catalog:<name>' or a file path into a built object."""
    if arg.startswith("catalog:"):
        name = arg[8:]
        try:
            if expect == "semigroup":
                return catalog.semigroup(name)
            if expect == "action":
                return catalog.action(name)
            if expect == "graph":
                return catalog.graphs(name)
        except KeyError as err:
            raise ParseError(str(err))
        raise ParseError(f"catalog does not serve {expect!r} inputs")
    try:
        with open(arg) as fh:
            text = fh.read()
    except OSError as err:
        raise ParseError(f"cannot read {arg!r}: {err}")
    schema, doc = parse_input(text, lenient)
    if schema != expect:
        raise ParseError(f"expected a {expect!r} document, got {schema!r}")
    if expect == "semigroup":
        return build_semigroup(doc)
    if expect == "action":
        return build_action(doc)
    if expect == "graph":
        return build_graph(doc)
    return doc


def _load_doc(arg, expect, lenient=False):
    try:
        with open(arg) as fh:
            text = fh.read()
    except OSError as err:
        raise ParseError(f"cannot read {arg!r}: {err}")
    schema, doc = parse_input(text, lenient)
    if schema != expect:
        raise ParseError(f"expected a {expect!r} document, got {schema!r}")
    return doc


def groupoid_json(G):
    return {
        "schema": "groupoid",
        "version": 1,
        "arrows": list(G.arrows),
        "units": list(G.units),
        "source": list(G.source),
        "range": list(G.target),
        "inverse": list(G.inverse),
        "compose": sorted([a, b, c] for (a, b), c in G.compose.items()),
    }


def emit(report, summary, code):
    print(json.dumps(report, sort_keys=True, default=str))
    print(summary, file=sys.stderr)
    return code


# --- subcommands -----------------------------------------------------------------

def cmd_validate(args):
    kind = args.kind
    if kind == "auto":
        if args.input.startswith("catalog:"):
            name = args.input[8:].lower()
            for k, reg in (
                ("semigroup", catalog.SEMIGROUP_NAMES),
                ("action", catalog.ACTION_NAMES),
                ("graph", catalog.GRAPH_NAMES),
            ):
                if name in reg:
                    kind = k
                    break
            else:
                raise ParseError(f"unknown catalog name {name!r}")
        else:
            with open(args.input) as fh:
                kind, _ = parse_input(fh.read(), args.lenient)
    try:
        obj = _load(args.input, kind, args.lenient)
    except (invsemi.SemigroupError, paction.ActionError, graph.GraphError) as err:
        return emit(
            {"command": "validate", "ok": False, "error": str(err), "witness": getattr(err, "witness", None)},
            f"INVALID: {err}",
            1,
        )
    detail = {"command": "validate", "ok": True, "kind": kind}
    if kind == "semigroup":
        detail.update(
            size=len(obj),
            idempotents=[obj.elements[e] for e in obj.idempotents],
            zero=None if obj.zero is None else obj.elements[obj.zero],
        )
    elif kind == "action":
        detail.update(semigroup_size=len(obj.semigroup), carrier=list(obj.carrier), is_global=obj.is_global)
    else:
        detail.update(vertices=len(obj.vertices), edges=len(obj.edge_names))
    return emit(detail, "valid", 0)


def cmd_analyze(args):
    S = _load(args.input, "semigroup", args.lenient)
    eu, wit = invsemi.is_e_unitary(S)
    gi = invsemi.max_group_image(S)
    _, family = invsemi.is_weak_semilattice(S)
    report = {
        "command": "analyze",
        "ok": True,
        "size": len(S),
        "idempotents": [S.elements[e] for e in S.idempotents],
        "zero": None if S.zero is None else S.elements[S.zero],
        "e_unitary": eu,
        "e_unitary_witness": None if wit is None else [S.elements[wit[0]], S.elements[wit[1]]],
        "max_group_image_size": len(gi.group),
        "weak_semilattice": True,
        "max_cover_family_size": max(len(v) for v in family.values()) if family else 0,
    }
    return emit(report, f"|S|={len(S)} E-unitary={eu} |G(S)|={len(gi.group)}", 0)


def cmd_germs(args):
    theta = _load(args.input, "action", args.lenient)
    gg = germs.groupoid_of_germs(theta)
    report = groupoid_json(gg.groupoid)
    report["command"] = "germs"
    return emit(report, f"{len(gg.groupoid.arrows)} arrows, {len(gg.groupoid.units)} units", 0)


def cmd_maxgroup(args):
    S = _load(args.input, "semigroup", args.lenient)
    gi = invsemi.max_group_image(S)
    report = {
        "command": "maxgroup",
        "ok": True,
        "group_elements": list(gi.group.elements),
        "table": [list(r) for r in gi.group.table],
        "class_of": {S.elements[i]: gi.class_of[i] for i in range(len(S))},
    }
    return emit(report, f"|G(S)| = {len(gi.group)}", 0)


def cmd_exel(args):
    G = _load(args.input, "semigroup", args.lenient)
    try:
        ex = invsemi.exel_semigroup(G, max_elements=args.max_elements)
    except invsemi.SemigroupError as err:
        return emit({"command": "exel", "ok": False, "error": str(err)}, f"FAIL: {err}", 1)
    report = {
        "command": "exel",
        "ok": True,
        "size": len(ex.semigroup),
        "elements": list(ex.semigroup.elements),
        "table": [list(r) for r in ex.semigroup.table],
        "of_group": {G.elements[g]: ex.of_group[g] for g in range(len(G))},
    }
    return emit(report, f"|S(G)| = {len(ex.semigroup)}", 0)


def cmd_verify_steinberg(args):
    theta = _load(args.input, "action", args.lenient)
    ring = rings.parse_ring_spec(args.ring)
    import random

    rng = random.Random(args.seed)
    try:
        rep = algebra.verify_steinberg_crossed(theta, ring, rng=rng)
    except (algebra.SteinbergError, algebra.CrossedProductError, rings.RingError) as err:
        return emit(
            {"command": "verify steinberg-crossed", "ok": False, "error": str(err)},
            f"FAIL: {err}",
            1,
        )
    report = {"command": "verify steinberg-crossed", "ok": True, **rep}
    dims = rep["dims"]
    return emit(report, f"pass: dims L={dims['L']} N={dims['N']} quotient={dims['quotient']}", 0)


def cmd_coe_verify(args):
    theta = _load(args.action_a, "action", args.lenient)
    gamma = _load(args.action_b, "action", args.lenient)
    doc = _load_doc(args.coe, "coe", args.lenient)
    oe = build_action_coe(doc, theta, gamma)
    try:
        rep = orbit.verify_orbit_equivalence(theta, gamma, oe)
    except orbit.CoeError as err:
        return emit(
            {"command": "coe verify", "ok": False, "error": str(err), "witness": getattr(err, "witness", None)},
            f"FAIL: {err}",
            1,
        )
    return emit({"command": "coe verify", "ok": True, **rep}, "orbit equivalence verified", 0)


def cmd_coe_extract(args):
    theta = _load(args.action_a, "action", args.lenient)
    gamma = _load(args.action_b, "action", args.lenient)
    ga = germs.groupoid_of_germs(theta)
    gb = germs.groupoid_of_germs(gamma)
    try:
        iso = germs.groupoid_iso_search(ga.groupoid, gb.groupoid, timeout_nodes=args.timeout_nodes)
    except germs.Timeout as err:
        return emit({"command": "coe extract", "ok": False, "error": str(err)}, f"FAIL: {err}", 1)
    if iso is None:
        return emit(
            {"command": "coe extract", "ok": False, "error": "groupoids of germs are not isomorphic"},
            "no isomorphism",
            1,
        )
    oe = orbit.coe_from_groupoid_iso(iso, ga, gb)
    report = {
        "command": "coe extract",
        "ok": True,
        "schema": "coe",
        "version": 1,
        "phi": {theta.carrier[x]: gamma.carrier[y] for x, y in oe.phi.items()},
        "a": _cocycle_json(oe.a, theta, gamma),
        "b": _cocycle_json(oe.b, gamma, theta),
    }
    return emit(report, "orbit equivalence extracted", 0)


def _cocycle_json(table, src, dst):
    out = {}
    for (s, x), t in table.items():
        out.setdefault(src.semigroup.elements[s], {})[src.carrier[x]] = dst.semigroup.elements[t]
    return out


def cmd_graph_analyze(args):
    g = _load(args.input, "graph", args.lenient)
    rep = graph.graph_analyze(g)
    rep["command"] = "graph analyze"
    rep["ok"] = True
    return emit(
        rep,
        f"conditionL={rep['condition_L']} topPrincipal={rep['top_principal']}",
        0,
    )


def cmd_graph_leavitt(args):
    doc = _load_doc(args.input, "leavitt-expr", args.lenient)
    gdoc = doc["graph"]
    g = catalog.graphs(gdoc[8:]) if isinstance(gdoc, str) and gdoc.startswith("catalog:") else build_graph(gdoc)
    ring = rings.parse_ring_spec(args.ring)
    el = graph.parse_leavitt_expr(g, ring, doc["expr"])
    depth = args.depth if args.depth is not None else el.depth
    el = el.at_depth(max(depth, el.depth))
    atoms = {
        f"Z({graph.fmt_path(g, cb.mu)},{graph.fmt_path(g, cb.nu)})": ring.fmt(c)
        for cb, c in el.atoms.items()
    }
    report = {"command": "graph leavitt", "ok": True, "depth": el.depth, "atoms": atoms}
    if args.equals is not None:
        other = graph.parse_leavitt_expr(g, ring, args.equals)
        equal = graph.leavitt_equal(el, other)
        report["equals"] = equal
        if not equal:
            return emit(report, "elements differ", 1)
    return emit(report, f"{len(atoms)} atoms at depth {el.depth}", 0)


def cmd_graph_coe_verify(args):
    E = _load(args.graph_e, "graph", args.lenient)
    F = _load(args.graph_f, "graph", args.lenient)
    doc = _load_doc(args.coe, "graph-coe", args.lenient)
    T, Tinv, k, l, kp, lp, depth = build_graph_coe(doc, E, F)
    if args.depth is not None:
        depth = args.depth
    try:
        rep = graph.verify_graph_coe(E, F, T, Tinv, k, l, kp, lp, depth)
    except graph.GraphError as err:
        return emit(
            {"command": "graph coe-verify", "ok": False, "error": str(err), "witness": str(getattr(err, "witness", None))},
            f"FAIL: {err}",
            1,
        )
    rep = {"command": "graph coe-verify", "ok": True,
           "atoms_checked": rep["atoms_checked"],
           "exact": sorted(map(list, rep["exact"])),
           "undetermined": sorted(map(list, rep["undetermined"]))}
    return emit(rep, f"verified on {rep['atoms_checked']} atoms", 0)


def cmd_graph_coe_search(args):
    E = _load(args.graph_e, "graph", args.lenient)
    F = _load(args.graph_f, "graph", args.lenient)
    try:
        data = graph.graph_coe_search(E, F)
    except graph.GraphError as err:
        return emit({"command": "graph coe-search", "ok": False, "error": str(err)}, f"FAIL: {err}", 1)
    if data is None:
        return emit(
            {"command": "graph coe-search", "ok": True, "found": False},
            "no orbit equivalence",
            0,
        )
    T = data["transducer"]
    Tinv = data["transducer_inverse"]

    def rules_json(T):
        out = []
        for r in T.rules:
            out.append({
                "state": r.state,
                "consume": _tpath_json(T.graph_in, r.consume),
                "emit": _tpath_json(T.graph_out, r.emit),
                "next": r.next_state,
            })
        return out

    report = {
        "command": "graph coe-search",
        "ok": True,
        "found": True,
        "schema": "graph-coe",
        "version": 1,
        "depth": data["depth"],
        "initial": T.initial,
        "rules": rules_json(T),
        "initial_inverse": Tinv.initial,
        "rules_inverse": rules_json(Tinv),
        "k": data["k"],
        "l": data["l"],
        "kprime": data["kprime"],
        "lprime": data["lprime"],
        "phi": data["phi"],
    }
    return emit(report, "orbit equivalence found", 0)


def _tpath_json(g, p):
    if not p.edges:
        return g.vertices[p.start]
    return [g.edge_names[e] for e in p.edges]


def cmd_catalog_run(args):
    reports = acceptance.run_all(seed=args.seed)
    ok = all(r["ok"] for r in reports)
    # wall-clock fields are dropped so reports are byte-identical across runs
    reports = [{k: v for k, v in r.items() if k != "elapsed_s"} for r in reports]
    report = {"command": "catalog run", "ok": ok, "criteria": reports, "seed": args.seed}
    lines = ", ".join(f"{r['criterion']}:{'pass' if r['ok'] else 'FAIL'}" for r in reports)
    return emit(report, lines, 0 if ok else 1)


def cmd_catalog_list(args):
    report = {
        "command": "catalog list",
        "ok": True,
        "semigroups": list(catalog.SEMIGROUP_NAMES),
        "actions": list(catalog.ACTION_NAMES),
        "graphs": list(catalog.GRAPH_NAMES),
        "groupoids": list(catalog.GROUPOID_NAMES),
    }
    return emit(report, "catalog listed", 0)


def make_parser():
    ap = argparse.ArgumentParser(prog="germkit")
    ap.add_argument("--lenient", action="store_true", help="warn on unknown fields instead of rejecting")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("validate")
    p.add_argument("input")
    p.add_argument("--kind", choices=["auto", "semigroup", "action", "graph"], default="auto")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("analyze")
    p.add_argument("input")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("germs")
    p.add_argument("input")
    p.set_defaults(fn=cmd_germs)

    p = sub.add_parser("maxgroup")
    p.add_argument("input")
    p.set_defaults(fn=cmd_maxgroup)

    p = sub.add_parser("exel")
    p.add_argument("input")
    p.add_argument("--max-elements", type=int, default=4096)
    p.set_defaults(fn=cmd_exel)

    p = sub.add_parser("verify")
    vs = p.add_subparsers(dest="what", required=True)
    q = vs.add_parser("steinberg-crossed")
    q.add_argument("input")
    q.add_argument("--ring", default="Q")
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(fn=cmd_verify_steinberg)

    p = sub.add_parser("coe")
    cs = p.add_subparsers(dest="what", required=True)
    q = cs.add_parser("verify")
    q.add_argument("action_a")
    q.add_argument("action_b")
    q.add_argument("coe")
    q.set_defaults(fn=cmd_coe_verify)
    q = cs.add_parser("extract")
    q.add_argument("action_a")
    q.add_argument("action_b")
    q.add_argument("--timeout-nodes", type=int, default=500000)
    q.set_defaults(fn=cmd_coe_extract)

    p = sub.add_parser("graph")
    gs = p.add_subparsers(dest="what", required=True)
    q = gs.add_parser("analyze")
    q.add_argument("input")
    q.set_defaults(fn=cmd_graph_analyze)
    q = gs.add_parser("leavitt")
    q.add_argument("input")
    q.add_argument("--equals")
    q.add_argument("--ring", default="Q")
    q.add_argument("--depth", type=int)
    q.set_defaults(fn=cmd_graph_leavitt)
    q = gs.add_parser("coe-verify")
    q.add_argument("graph_e")
    q.add_argument("graph_f")
    q.add_argument("coe")
    q.add_argument("--depth", type=int)
    q.set_defaults(fn=cmd_graph_coe_verify)
    q = gs.add_parser("coe-search")
    q.add_argument("graph_e")
    q.add_argument("graph_f")
    q.set_defaults(fn=cmd_graph_coe_search)

    p = sub.add_parser("catalog")
    ks = p.add_subparsers(dest="what", required=True)
    q = ks.add_parser("run")
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(fn=cmd_catalog_run)
    q = ks.add_parser("list")
    q.set_defaults(fn=cmd_catalog_list)

    return ap


def main(argv=None):
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as err:
        return 2 if err.code not in (0, None) else 0
    try:
        return args.fn(args)
    except ParseError as err:
        where = f" (line {err.line}, col {err.col})" if err.line else ""
        print(json.dumps({"ok": False, "error": f"{err}{where}", "kind": "input"}, sort_keys=True))
        print(f"input error: {err}{where}", file=sys.stderr)
        return 2
    except (
        invsemi.SemigroupError,
        paction.ActionError,
        paction.AlgebraError,
        germs.GroupoidError,
        graph.GraphError,
        orbit.CoeError,
        algebra.SteinbergError,
        algebra.CrossedProductError,
        rings.RingError,
    ) as err:
        print(
            json.dumps(
                {"ok": False, "error": str(err), "witness": str(getattr(err, "witness", None)), "kind": "mathematical"},
                sort_keys=True,
            )
        )
        print(f"mathematical failure: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
