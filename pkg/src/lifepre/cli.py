"""Command line entry point.

Exit codes: 0 success (or SAT as queried), 1 negative verdict, 2 usage or
input error, 3 solver backend failure.  Progress goes to stderr; patterns
and circuits go to the files named by ``--out``.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import sat
from .circuit import emit_circuit, parse_circuit
from .compiler import (GadgetLibrary, MockLibrary, compile_circuit, formula_to_pattern, jeandel_rao_instance,
                       load_gadget_library, parse_dnf, parse_wang, schematic_library, wang_blueprint)
from .gadget import load_library, verify_gadget
from .grid import Pattern, Rect, emit_rle, parse_rle
from .lifestep import EncodingKind, check_encoding, step
from .preimage import PreimageQuery, find_preimage, is_orphan, parse_mode
from .search import GeneticProblem, genetic_charger, hill_climb, load_problem


def progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def read_pattern(path) -> Pattern:
    return parse_rle(Path(path).read_bytes())


def write_pattern(p: Pattern, path) -> None:
    Path(path).write_bytes(emit_rle(p))
    progress(f"wrote {p.width}x{p.height} pattern to {path}")


# --- verification driver ---------------------------------------------------------------

@dataclass
class VerifyRow:
    gadget: str
    check: str
    status: str
    detail: str = ""


def _verify_one(args):
    g, encoding, limit, backend, expect = args
    rep = verify_gadget(g, encoding, limit, backend, expect=expect)
    return [VerifyRow(g.name, c.name, c.status, c.detail) for c in rep.checks]


def verify_all(lib_dir, encoding=EncodingKind.DIVIDE_CONQUER, limit: int = 4096,
               backend: str | None = None, jobs: int = 1) -> list[VerifyRow]:
    """Check every gadget file in ``lib_dir``: charging rules, relation with its
    zero-boundary realizability, forced zeros, and for blocks tagged ``kind``
    (tile or wire) their dimensions and wire offsets."""
    gadgets = load_library(lib_dir)
    geom = GadgetLibrary()
    work = [(g, EncodingKind.parse(encoding), limit, backend, geom.expected_geometry(g) or None)
            for g in gadgets]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(jobs) as ex:
            parts = list(ex.map(_verify_one, work))
    else:
        parts = []
        for w in work:
            progress(f"verifying {w[0].name}")
            parts.append(_verify_one(w))
    return [r for rows in parts for r in rows]


def format_report(rows) -> str:
    if not rows:
        return "no gadgets\n"
    wg = max(len(r.gadget) for r in rows)
    wc = max(len(r.check) for r in rows)
    return "".join(f"{r.gadget:<{wg}}  {r.check:<{wc}}  {r.status:<12}  {r.detail}".rstrip() + "\n"
                   for r in rows)


# --- subcommands ------------------------------------------------------------------------

def _library(args):
    if getattr(args, "mock", False):
        return MockLibrary()
    if getattr(args, "schematic", False):
        progress("warning: schematic library, the output has no preimage meaning")
        return schematic_library()
    if args.lib is None:
        raise ValueError("need --lib, --mock or --schematic")
    lib = load_gadget_library(args.lib)
    if not lib.verified:
        progress("warning: library contains schematic blocks")
    return lib


def cmd_step(args) -> int:
    p = read_pattern(args.input)
    bb = p.bbox
    win = Rect(*args.window) if args.window else Rect(bb.x0 + 1, bb.y0 + 1, bb.width - 2, bb.height - 2)
    write_pattern(step(p, win), args.out)
    return 0


def cmd_preimage(args) -> int:
    p = read_pattern(args.input)
    pre = find_preimage(PreimageQuery(p, parse_mode(args.mode), encoding=args.encoding), args.solver)
    if pre is None:
        print("no preimage")
        return 1
    print("preimage found")
    if args.out:
        write_pattern(pre, args.out)
    return 0


def cmd_orphan(args) -> int:
    p = read_pattern(args.input)
    orphan = is_orphan(p, args.encoding, args.solver)
    print("orphan" if orphan else "not an orphan")
    return 0 if orphan else 1


def cmd_verify(args) -> int:
    rows = verify_all(args.lib, args.encoding, args.limit, args.solver, args.jobs)
    sys.stdout.write(format_report(rows))
    return 1 if any(r.status == "fail" for r in rows) else 0


def cmd_search_hill(args) -> int:
    prob = load_problem(args.problem)
    if args.solver:
        prob.backend = args.solver
    start = read_pattern(args.start) if args.start else None

    def log(ev):
        if args.verbose or ev["event"] not in ("accept", "crevice"):
            progress(f"[{ev.get('round', 0)}] {ev['event']} {ev.get('before', '')} -> {ev.get('after', '')}")
    res = hill_climb(prob, args.budget, args.seed, start, args.checkpoint, args.jobs, log)
    progress(f"{'success' if res.success else 'gave up'}: score {res.score} after "
             f"{res.evaluations} evaluations in {res.rounds} rounds")
    if args.out:
        write_pattern(res.pattern, args.out)
    return 0 if res.success else 1


def cmd_search_genetic(args) -> int:
    if args.width % 2:
        raise ValueError("--width must be even (it is 2n)")
    prob = GeneticProblem(args.width // 2, args.height, population=args.population, limit=args.limit,
                          backend=args.solver)
    seeds = [read_pattern(s) for s in args.seed_pattern]
    res = genetic_charger(prob, args.budget, args.seed, seeds,
                          log=lambda ev: progress(f"generation {ev['generation']}: best {ev['best']}"),
                          time_limit=args.time_limit)
    if res.pattern is None:
        progress(f"no charger found, best score {res.score}")
        return 1
    progress(f"charger found in generation {res.generation}")
    if args.out:
        write_pattern(res.pattern, args.out)
    return 0


def cmd_compile(args) -> int:
    c = parse_circuit(Path(args.circuit).read_text())
    lib = _library(args)
    p = compile_circuit(lib, c, None if isinstance(lib, MockLibrary) else args.scale, args.periodic)
    write_pattern(p, args.out)
    return 0


def cmd_blueprint(args) -> int:
    c = wang_blueprint(parse_wang(Path(args.wang).read_text()))
    Path(args.out).write_text(emit_circuit(c))
    progress(f"wrote {c.shape[0]}x{c.shape[1]} blueprint to {args.out}")
    return 0


def cmd_np_instance(args) -> int:
    f = parse_dnf(Path(args.dnf).read_text())
    if args.lib is None and not args.schematic:
        args.mock = True
        progress("no --lib given: using the 3x3 mock library")
    lib = _library(args)
    p = formula_to_pattern(f, lib, None if isinstance(lib, MockLibrary) else args.scale)
    write_pattern(p, args.out)
    return 0


def cmd_jeandel_rao(args) -> int:
    lib = _library(args)
    t = time.time()
    p = jeandel_rao_instance(lib, parse_wang(Path(args.wang).read_text()) if args.wang else None)
    progress(f"assembled {p.height}x{p.width} in {time.time() - t:.1f}s")
    write_pattern(p, args.out)
    return 0


def cmd_encodings_check(args) -> int:
    ok = True
    for k in EncodingKind:
        t = time.time()
        pos, neg, bad = check_encoding(k, args.solver)
        ok &= not bad
        print(f"{k.value:6s} sat {pos}/512 unsat {neg}/512 ({time.time() - t:.2f}s)")
        for n, out in bad[:5]:
            print(f"  wrong: neighbourhood {''.join(map(str, n))} output {out}")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--solver", default=None,
                        help="SAT backend: pysat:<name>, external:<path> or dpll (default $LIFEPRE_SOLVER or pysat:glucose4)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--encoding", default="dc", choices=[k.value for k in EncodingKind],
                        help="CNF encoding of the rule")

    ap = argparse.ArgumentParser(prog="lifepre", description="Game of Life preimage tools")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(func=fn)
        return p

    def lib_flags(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--lib", help="gadget library directory")
        g.add_argument("--mock", action="store_true", help="3x3 mock glyphs (desk scale)")
        g.add_argument("--schematic", action="store_true", help="wire-only blocks with the right geometry")

    p = add("step", cmd_step, "apply one Life step")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, nargs=4, metavar=("X", "Y", "W", "H"))

    p = add("preimage", cmd_preimage, "find a preimage of an RLE pattern")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mode", default="free", help="free, zero:<t> or torus:<px>x<py>")
    p.add_argument("--out")

    p = add("orphan", cmd_orphan, "decide whether a pattern is an orphan (exit 0 if it is)")
    p.add_argument("--in", dest="input", required=True)

    p = add("verify", cmd_verify, "verify every gadget in a library directory")
    p.add_argument("--lib", required=True)
    p.add_argument("--limit", type=int, default=4096)

    p = add("search-hill", cmd_search_hill, "backtracking hill climb on a JSON problem file")
    p.add_argument("--problem", required=True)
    p.add_argument("--budget", type=int, required=True, help="score evaluations")
    p.add_argument("--checkpoint")
    p.add_argument("--start", help="initial partial pattern (RLE)")
    p.add_argument("--out")
    p.add_argument("--verbose", action="store_true")

    p = add("search-genetic", cmd_search_genetic, "genetic charger search")
    p.add_argument("--width", type=int, required=True, help="2n")
    p.add_argument("--height", type=int, required=True, help="m")
    p.add_argument("--budget", type=int, required=True, help="generations")
    p.add_argument("--population", type=int, default=100)
    p.add_argument("--limit", type=int, default=256)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--seed-pattern", action="append", default=[], help="RLE candidate for the first generation")
    p.add_argument("--out")

    p = add("compile", cmd_compile, "substitute gadgets for the tiles of a circuit")
    p.add_argument("--circuit", required=True)
    lib_flags(p)
    p.add_argument("--scale", type=int, default=450, choices=[450, 270])
    p.add_argument("--periodic", action="store_true")
    p.add_argument("--out", required=True)

    p = add("blueprint", cmd_blueprint, "circuit simulating a Wang tile set (E N W S per line)")
    p.add_argument("--wang", required=True)
    p.add_argument("--out", required=True)

    p = add("np-instance", cmd_np_instance, "pattern that has a preimage iff a DNF formula is satisfiable")
    p.add_argument("--dnf", required=True)
    lib_flags(p)
    p.add_argument("--scale", type=int, default=450, choices=[450, 270])
    p.add_argument("--out", required=True)

    p = add("jeandel-rao", cmd_jeandel_rao, "periodic pattern simulating the Jeandel-Rao tiles")
    lib_flags(p)
    p.add_argument("--wang", help="other tile set instead of the bundled one")
    p.add_argument("--out", required=True)

    add("encodings-check", cmd_encodings_check, "exhaustive check of the three rule encodings")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except sat.BackendError as e:
        progress(f"solver failure: {e}")
        return 3
    except (ValueError, KeyError, OSError) as e:
        progress(f"error: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
