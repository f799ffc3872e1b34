"""``polyrank`` command-line interface.

Every command writes one deterministic document to standard output (JSON
unless ``--format csv`` is offered and chosen) and diagnostics to standard
error.  Exit status: 0 on success, 1 on invalid input, 2 when a vertex or
search budget is exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from typing import Any, Callable, Sequence

from . import __version__
from .complexes import (ORIENTABLE_PRESETS, PRESETS, Presentation, PresentationError,
                        classify_by_link_matchings, classify_orientable, euler_characteristic,
                        is_rank74, link_of, parse_presentation, preset,
                        presentations_isomorphic)
from .cover import (DevelopmentError, OutOfBall, budget_from_env, check_ball, develop_ball,
                    format_word, is_geodesic_word, is_trivial, parse_letters, rings)
from .flats import (free_semigroup_probe, meso_lower_bound_check, mesoscopic_profile,
                    radius_grid, same_cyclic, strips_on_word)
from .homology import (PI1_PRESENTATIONS, WordError, abelianization, h1_of_complex)
from .linkgraph import (BudgetExceeded, LinkGraph, are_isomorphic, automorphism_group_order,
                        girth, heawood, is_ample, l74, parse_graph, random_walk_spectrum)

log = logging.getLogger("polyrank")

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2


class InputError(ValueError):
    """Raised for malformed command-line input."""


# ----------------------------------------------------------------------
# helpers


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _config(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "verbose")}


def emit_json(args: argparse.Namespace, result: Any) -> str:
    cfg = _config(args)
    doc = {"tool": "polyrank", "version": __version__, "config": cfg,
           "config_hash": config_hash(cfg), "command": args.command, "result": result}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def emit_csv(args: argparse.Namespace, header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(f"# polyrank {__version__} config_hash={config_hash(_config(args))}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def load_presentation(args) -> tuple[str, Presentation]:
    if getattr(args, "presentation", None):
        try:
            with open(args.presentation, encoding="utf-8") as fh:
                return args.presentation, parse_presentation(fh.read())
        except OSError as exc:
            raise InputError(f"cannot read {args.presentation}: {exc.strerror}") from None
    return args.preset, preset(args.preset)


def _word(text: str) -> list[int]:
    try:
        return parse_letters(text)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _int_range(text: str) -> list[int]:
    """``8..14`` (inclusive), ``8,10,12`` or ``8``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"cannot read integer range {text!r}") from None


def _fmt_float(x: float) -> str:
    return f"{x:.10f}"


def _graph(args) -> tuple[str, LinkGraph]:
    if args.graph == "l74":
        return "l74", l74()
    if args.graph == "heawood":
        return "heawood", heawood()
    if args.graph == "link":
        name, p = load_presentation(args)
        return f"link({name})", link_of(p)
    try:
        with open(args.graph, encoding="utf-8") as fh:
            return args.graph, parse_graph(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {args.graph}: {exc.strerror}") from None


def _match_presets(faces) -> list[str]:
    q = Presentation(faces)
    return [name for name in ORIENTABLE_PRESETS
            if presentations_isomorphic(preset(name), q)]


# ----------------------------------------------------------------------
# commands


def cmd_classify(args) -> str:
    if args.mode == "matchings":
        classes = classify_by_link_matchings()
    else:
        classes = classify_orientable(args.mode, budget=args.search_budget)
    rows = []
    for c in classes:
        p = c.presentation
        rows.append({"faces": [list(f) for f in c.faces], "type": c.type_tag,
                     "h1": str(h1_of_complex(p)), "euler_characteristic": euler_characteristic(p),
                     "published": _match_presets(c.faces)})
    hist: dict[str, int] = {}
    for r in rows:
        hist[r["type"]] = hist.get(r["type"], 0) + 1
    return emit_json(args, {"count": len(rows), "type_histogram": hist, "classes": rows})


def cmd_link(args) -> str:
    name, p = load_presentation(args)
    g = link_of(p)
    gi = girth(g)
    return emit_json(args, {
        "presentation": name, "faces": [list(f) for f in p.faces],
        "edges": [list(e) for e in g.edges],
        "labels": [f"{i}{m}" for i, m in g.labels] if g.labels else None,
        "simple": g.is_simple, "girth": None if gi == float("inf") else int(gi),
        "ample": is_ample(g), "rank74": is_rank74(p),
        "isomorphic_to_l74": g.is_simple and are_isomorphic(g, l74()),
        "type": p.type_tag, "orientable": p.orientable,
    })


def cmd_spectrum(args) -> str:
    name, g = _graph(args)
    sp = random_walk_spectrum(g)
    aut = automorphism_group_order(g) if args.automorphisms else None
    if args.format == "csv":
        return emit_csv(args, ["eigenvalue", "multiplicity"],
                        [(_fmt_float(v), m) for v, m in sp.eigenvalues])
    res = {"graph": name, "eigenvalues": [[v, m] for v, m in sp.eigenvalues],
           "lambda1": sp.lambda1}
    if aut is not None:
        res["automorphisms"] = {"order": aut.order, "tripod_transitive": aut.tripod_transitive,
                                "vertex_stabilizer": aut.tripod_stabilizer_order,
                                "pointwise_tripod_stabilizer": aut.pointwise_stabilizer_order}
    return emit_json(args, res)


def cmd_homology(args) -> str:
    names = list(PRESETS) if args.all else None
    if names is None:
        name, p = load_presentation(args)
        items = [(name, p)]
    else:
        items = [(n, preset(n)) for n in names]
    return emit_json(args, [{"presentation": n, "h1": str(h1_of_complex(p)),
                             "h1_data": h1_of_complex(p).to_dict(),
                             "euler_characteristic": euler_characteristic(p)} for n, p in items])


def cmd_abelianize(args) -> str:
    if args.relator:
        gens = args.generators
        rels = args.relator
        label = "custom"
    else:
        if args.preset not in PI1_PRESENTATIONS:
            raise InputError(f"no fundamental group presentation stored for {args.preset!r}")
        gens, rels = PI1_PRESENTATIONS[args.preset]
        label = args.preset
    try:
        gens_arg: Any = int(gens) if str(gens).isdigit() else [g for g in str(gens).split(",") if g]
        grp = abelianization(gens_arg, rels)
    except WordError as exc:
        raise InputError(str(exc)) from None
    return emit_json(args, {"presentation": label, "relators": list(rels),
                            "abelianization": str(grp), "data": grp.to_dict()})


def cmd_ball(args) -> str:
    name, p = load_presentation(args)
    b = develop_ball(p, args.radius, budget=budget_from_env())
    if args.check:
        check_ball(b)
    res = {"presentation": name, **b.stats()}
    if args.format == "csv":
        return emit_csv(args, ["distance", "vertices"], list(enumerate(res["sphere_sizes"])))
    return emit_json(args, res)


def cmd_trace(args) -> str:
    name, p = load_presentation(args)
    word = _word(args.word)
    radius = args.radius or max(1, len(word))
    b = develop_ball(p, radius, lazy=args.lazy, budget=budget_from_env())
    end = b.trace(word)
    return emit_json(args, {
        "presentation": name, "word": word, "radius": radius,
        "end_distance": b.distance(end), "trivial": is_trivial(b, word),
        "locally_geodesic": bool(word) and is_geodesic_word(p, word),
    })


def cmd_rings(args) -> str:
    names = list(PRESETS) if args.all else None
    items = [(n, preset(n)) for n in names] if names else [load_presentation(args)]
    return emit_json(args, [{"presentation": n, "count": len(r),
                             "rings": [format_word(w) for w in r],
                             "lengths": [len(w) for w in r]}
                            for n, p in items for r in [rings(p)]])


def cmd_strips(args) -> str:
    name, p = load_presentation(args)
    word = _word(args.boundary)
    opp = _word(args.opposite) if args.opposite else None
    sides = ("left", "right") if args.side == "both" else (args.side,)
    out = []
    for sd in sides:
        for s in strips_on_word(p, word, args.height, args.period, sd):
            if opp is not None and not same_cyclic(s.opposite, opp):
                continue
            out.append({"side": sd, "period": s.period, "opposite": format_word(s.opposite),
                        "apex_letters": [list(l) for l in s.layers]})
    if args.format == "csv":
        return emit_csv(args, ["side", "period", "opposite"],
                        [(s["side"], s["period"], s["opposite"]) for s in out])
    return emit_json(args, {"presentation": name, "boundary": word, "height": args.height,
                            "count": len(out), "strips": out})


def cmd_profile(args) -> str:
    name, p = load_presentation(args)
    b = develop_ball(p, args.center_radius, lazy=True, budget=budget_from_env())
    if args.max_r + args.margin > args.center_radius - 1:
        raise OutOfBall("max radius plus margin must be at most the ball radius minus one")
    radii = radius_grid(args.max_r, args.step_denominator)
    prof = mesoscopic_profile(b, b.base, radii, args.margin)
    rows = [(_fmt_float(r), c, t) for r, c, t in prof.rows()]
    if args.format == "json":
        return emit_json(args, {"presentation": name, "margin": args.margin,
                                "rows": [{"r": r, "count": c, "flat_disks": t}
                                         for r, c, t in prof.rows()]})
    return emit_csv(args, ["r", "count", "flat_disks"], rows)


def cmd_meso(args) -> str:
    out = []
    for k in _int_range(args.k):
        r = meso_lower_bound_check(k, margin=args.margin, budget=budget_from_env())
        log.info("k=%d constructed=%d non_extendable=%d", k, r.constructed, r.non_extendable)
        out.append(r.to_dict())
    return emit_json(args, out)


def cmd_probe(args) -> str:
    name, p = load_presentation(args)
    words = [_word(w) for w in args.word]
    if not words:
        raise InputError("give at least one --word")
    radius = args.length * max(len(w) for w in words)
    b = develop_ball(p, radius + 1, lazy=True, budget=budget_from_env())
    free, products, endpoints = free_semigroup_probe(b, words, args.length)
    return emit_json(args, {"presentation": name, "words": words, "length": args.length,
                            "free": free, "products": products, "endpoints": endpoints})


def cmd_report(args) -> str:
    classes = classify_orientable("full", budget=args.search_budget)
    table = [{"faces": [list(f) for f in c.faces], "type": c.type_tag,
              "h1": str(h1_of_complex(c.presentation)),
              "euler_characteristic": euler_characteristic(c.presentation),
              "published": _match_presets(c.faces)} for c in classes]
    published = [{"name": n, "type": preset(n).type_tag, "h1": str(h1_of_complex(preset(n))),
                  "euler_characteristic": euler_characteristic(preset(n)),
                  "rings": [format_word(w) for w in rings(preset(n))]} for n in PRESETS]
    sp = random_walk_spectrum(l74())
    meso = [meso_lower_bound_check(k, margin=args.margin, budget=budget_from_env()).to_dict()
            for k in _int_range(args.k)]
    return emit_json(args, {
        "classes": table, "published": published,
        "spectrum": {"eigenvalues": [[v, m] for v, m in sp.eigenvalues], "lambda1": sp.lambda1},
        "meso_check": meso,
    })


# ----------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    """Argument errors are invalid input, so they exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_source(p: argparse.ArgumentParser, default: str | None = "V0_1"):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--preset", default=default, choices=sorted(PRESETS),
                   help="built-in published presentation (default %(default)s)")
    g.add_argument("--presentation", metavar="FILE", help="JSON file with a 'faces' list")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="polyrank", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name: str, func: Callable, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        return p

    p = cmd("classify", cmd_classify, "classify orientable complexes with ample link")
    p.add_argument("--mode", choices=("full", "six-cases", "matchings"), default="full")
    p.add_argument("--search-budget", type=int, default=50_000_000)

    p = cmd("link", cmd_link, "link graph of a presentation")
    _add_source(p)

    p = cmd("spectrum", cmd_spectrum, "random-walk spectrum of a graph")
    p.add_argument("--graph", default="l74", help="l74, heawood, link (of --preset) or a file")
    p.add_argument("--automorphisms", action="store_true")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_source(p)

    p = cmd("homology", cmd_homology, "first homology of a complex")
    _add_source(p)
    p.add_argument("--all", action="store_true", help="every built-in presentation")

    p = cmd("abelianize", cmd_abelianize, "abelianization of a group presentation")
    p.add_argument("--preset", default="V0_1", choices=sorted(PI1_PRESENTATIONS))
    p.add_argument("--generators", default="2",
                   help="number of generators or comma-separated names")
    p.add_argument("--relator", action="append", default=[],
                   help="relator or relation 'lhs = rhs' (repeatable)")

    p = cmd("ball", cmd_ball, "develop a ball in the universal cover")
    _add_source(p)
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--check", action="store_true", help="verify links and triangle counts")
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = cmd("trace", cmd_trace, "trace a word from the base vertex")
    _add_source(p)
    p.add_argument("--word", required=True)
    p.add_argument("--radius", type=int, default=0)
    p.add_argument("--lazy", action="store_true")

    p = cmd("rings", cmd_rings, "closed analytic geodesics")
    _add_source(p, default="Vbar")
    p.add_argument("--all", action="store_true")

    p = cmd("strips", cmd_strips, "flat strips on a periodic geodesic")
    _add_source(p)
    p.add_argument("--boundary", required=True)
    p.add_argument("--height", type=int, default=1)
    p.add_argument("--period", type=int, default=None, help="period bound")
    p.add_argument("--opposite", default=None, help="keep strips whose far side has this form")
    p.add_argument("--side", choices=("left", "right", "both"), default="left")
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = cmd("profile", cmd_profile, "finite-scale mesoscopic profile at the base vertex")
    _add_source(p)
    p.add_argument("--center-radius", type=int, default=8, help="radius of the developed ball")
    p.add_argument("--max-r", type=float, default=2.0)
    p.add_argument("--margin", type=int, default=2)
    p.add_argument("--step-denominator", type=int, default=6)
    p.add_argument("--format", choices=("json", "csv"), default="csv")

    p = cmd("meso-check", cmd_meso, "explicit mesoscopic lower-bound construction")
    p.add_argument("--k", default="8", help="k, list 8,10 or range 8..14")
    p.add_argument("--margin", type=int, default=2)

    p = cmd("probe", cmd_probe, "free semigroup probe")
    _add_source(p, default="V0_2")
    p.add_argument("--word", action="append", default=[])
    p.add_argument("--length", type=int, default=3)

    p = cmd("report", cmd_report, "classification, homology, spectrum, rings and meso tables")
    p.add_argument("--k", default="8")
    p.add_argument("--margin", type=int, default=2)
    p.add_argument("--search-budget", type=int, default=50_000_000)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        out = args.func(args)
    except BudgetExceeded as exc:
        print(f"polyrank: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, PresentationError, WordError, OutOfBall, DevelopmentError,
            ValueError) as exc:
        print(f"polyrank: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
