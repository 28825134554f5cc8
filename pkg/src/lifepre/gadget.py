"""Wire signals, gadget specs and their SAT-backed verification.

Orientation
-----------
Patterns use screen coordinates (y down).  A vertical wire signal is a 4x2
window: phase 0 has its bar of four live cells in the top row, phase 1 in
the bottom row, phase 2 is blank.  Horizontal signals are the same windows
rotated a quarter turn counterclockwise (phase 0 = bar in the left column).

On a charged wire the bars repeat every 3 cells, so a window moved one cell
*up* (or *left* for horizontal wires) reads the next phase, ``i + 1 mod 3``.

Ports and bits
--------------
A port is a wire crossing one side of the gadget's bounding box.  Its
signal window straddles the edge: one row/column outside the pattern and
one inside (moved inward by ``shift``).  With the neutral phase pair
``(0, 1)`` a vertical wire carries bit 0 when the bar is on its north side
and bit 1 when it is on its south side; a horizontal wire carries bit 0 for
a bar on the west side and bit 1 on the east side.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import sat
from .grid import Cell, Pattern, Rect, TriPattern, emit_rle, parse_rle
from .lifestep import EncodingKind
from .preimage import Free, PreimageCnf, _add_copy


SIDES = "ENWS"
_CCW = {"E": "N", "N": "W", "W": "S", "S": "E"}


class Orientation(enum.Enum):
    HORIZONTAL = "H"
    VERTICAL = "V"


@dataclass(frozen=True)
class WireSignal:
    phase: int
    orientation: Orientation = Orientation.VERTICAL

    def __post_init__(self):
        object.__setattr__(self, "phase", self.phase % 3)


def wire_signal_cells(phase: int, orientation: Orientation, anchor: Cell = (0, 0)) -> dict[Cell, int]:
    x0, y0 = anchor
    phase %= 3
    out = {}
    if orientation is Orientation.VERTICAL:
        for dy in range(2):
            for dx in range(4):
                out[(x0 + dx, y0 + dy)] = int(phase == dy)
    else:
        for dx in range(2):
            for dy in range(4):
                out[(x0 + dx, y0 + dy)] = int(phase == dx)
    return out


def wire_signal_pattern(s: WireSignal, anchor: Cell = (0, 0)) -> Pattern:
    return Pattern.from_cells(wire_signal_cells(s.phase, s.orientation, anchor))


# --- ports and specs ------------------------------------------------------------


class Affinity(enum.Enum):
    NEAR = "N"
    FAR = "F"


_NEAR_BIT = {"W": 1, "N": 1, "E": 0, "S": 0}


def affinity_of(side: str, bit: int) -> Affinity:
    return Affinity.NEAR if bit == _NEAR_BIT[side] else Affinity.FAR


def bit_of(side: str, aff: Affinity) -> int:
    return _NEAR_BIT[side] if aff is Affinity.NEAR else 1 - _NEAR_BIT[side]


@dataclass(frozen=True)
class WirePort:
    side: str
    offset: int
    phases: tuple[int, int] = (0, 1)
    shift: int = 0

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"bad side {self.side!r}")
        p0, p1 = self.phases
        if p0 == p1 or {p0, p1} - {0, 1}:
            raise ValueError("operating phases must be two distinct non-blank phases (0 and 1)")
        object.__setattr__(self, "phases", (p0, p1))

    @property
    def orientation(self) -> Orientation:
        return Orientation.VERTICAL if self.side in "NS" else Orientation.HORIZONTAL

    def window_anchor(self, w: int, h: int) -> Cell:
        o, s = self.offset, self.shift
        if self.side == "N":
            return (o - 1, -1 + s)
        if self.side == "S":
            return (o - 1, h - 1 - s)
        if self.side == "W":
            return (-1 + s, o - 1)
        return (w - 1 - s, o - 1)

    def window(self, w: int, h: int) -> list[Cell]:
        return sorted(wire_signal_cells(0, self.orientation, self.window_anchor(w, h)))

    def signal_cells(self, bit: int, w: int, h: int) -> dict[Cell, int]:
        return wire_signal_cells(self.phases[bit], self.orientation, self.window_anchor(w, h))

    def wire_cells(self, w: int, h: int, length: int) -> list[Cell]:
        """Image cells of the wire continued ``length`` cells outside the pattern."""
        o = self.offset
        if self.side == "N":
            return [(o + i, -1 - k) for k in range(length) for i in (0, 1)]
        if self.side == "S":
            return [(o + i, h + k) for k in range(length) for i in (0, 1)]
        if self.side == "W":
            return [(-1 - k, o + i) for k in range(length) for i in (0, 1)]
        return [(w + k, o + i) for k in range(length) for i in (0, 1)]

    def rotated(self, w: int, h: int) -> "WirePort":
        """The port after rotating a ``w`` x ``h`` gadget a quarter turn counterclockwise."""
        side = _CCW[self.side]
        o = self.offset if self.side in "EW" else w - 2 - self.offset
        return WirePort(side, o, self.phases, self.shift)


@dataclass(frozen=True)
class ChargeRule:
    premise: frozenset
    conclusion: frozenset

    def __str__(self):
        return f"{_word(self.premise)} |- {_word(self.conclusion)}".strip()


def _word(sides) -> str:
    return "".join(s for s in SIDES if s in sides)


def parse_charge_rules(text: str) -> list[ChargeRule]:
    """``'N, S |- ENS'`` means ``N |- ENS`` and ``S |- ENS``; ``'|- N'`` has no premise."""
    text = text.replace("⊢", "|-")
    if "|-" not in text:
        raise ValueError(f"missing '|-' in {text!r}")
    lhs, rhs = text.split("|-", 1)
    concl = frozenset(rhs.strip())
    if concl - set(SIDES):
        raise ValueError(f"bad sides in {rhs!r}")
    prems = [p.strip() for p in lhs.split(",")] if lhs.strip() else [""]
    out = []
    for p in prems:
        if set(p) - set(SIDES):
            raise ValueError(f"bad sides in {p!r}")
        out.append(ChargeRule(frozenset(p), concl))
    return out


@dataclass(frozen=True)
class GadgetSpec:
    ports: tuple[WirePort, ...]
    charge_rules: tuple[ChargeRule, ...] = ()
    relation: frozenset = frozenset()     # bit-strings over the ports in ENWS order
    context: str = "frame:4"
    forced_zero_cells: tuple[Cell, ...] = ()

    def __post_init__(self):
        sides = [p.side for p in self.ports]
        if len(set(sides)) != len(sides):
            raise ValueError("at most one wire per side")
        object.__setattr__(self, "ports", tuple(sorted(self.ports, key=lambda p: SIDES.index(p.side))))
        for r in self.charge_rules:
            if not (r.premise | r.conclusion) <= set(sides):
                raise ValueError(f"rule {r} mentions a side without a wire")
        n = len(self.ports)
        rel = frozenset(self.relation)
        if any(len(t) != n or set(t) - {"0", "1"} for t in rel):
            raise ValueError("relation tuples must be bit-strings over the ports")
        object.__setattr__(self, "relation", rel)

    @property
    def sides(self) -> str:
        return "".join(p.side for p in self.ports)

    def port(self, side: str) -> WirePort:
        for p in self.ports:
            if p.side == side:
                return p
        raise KeyError(side)

    def affinity_relation(self) -> frozenset:
        return frozenset("".join(affinity_of(p.side, int(b)).value for p, b in zip(self.ports, t))
                         for t in self.relation)


def relation_from_affinity(ports: Sequence[WirePort], aff: Iterable[str]) -> frozenset:
    ports = sorted(ports, key=lambda p: SIDES.index(p.side))
    return frozenset("".join(str(bit_of(p.side, Affinity(a))) for p, a in zip(ports, t)) for t in aff)


def rotate_relation(sides: str, relation: Iterable[str]) -> tuple[str, frozenset]:
    """Quarter-turn counterclockwise: sides permute E->N->W->S->E, bits on old E and W flip."""
    new_sides = [_CCW[s] for s in sides]
    order = sorted(range(len(sides)), key=lambda i: SIDES.index(new_sides[i]))
    out = set()
    for t in relation:
        bits = [str(1 - int(b)) if s in "EW" else b for s, b in zip(sides, t)]
        out.add("".join(bits[i] for i in order))
    return "".join(new_sides[i] for i in order), frozenset(out)


def rotate_spec(spec: GadgetSpec, w: int, h: int) -> GadgetSpec:
    """Spec of the gadget rotated a quarter turn counterclockwise (``w`` x ``h`` before)."""
    _, rel = rotate_relation(spec.sides, spec.relation)
    rules = tuple(ChargeRule(frozenset(_CCW[s] for s in r.premise),
                             frozenset(_CCW[s] for s in r.conclusion)) for r in spec.charge_rules)
    zeros = tuple((y, w - 1 - x) for x, y in spec.forced_zero_cells)
    return GadgetSpec(tuple(p.rotated(w, h) for p in spec.ports), rules, rel, spec.context, zeros)


@dataclass(frozen=True)
class Gadget:
    name: str
    pattern: Pattern
    spec: GadgetSpec
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        p = self.pattern
        if not p.is_rectangular():
            raise ValueError("gadget pattern must be rectangular")
        if (p.x0, p.y0) != (0, 0):
            object.__setattr__(self, "pattern", p.translate(-p.x0, -p.y0))

    @property
    def width(self) -> int:
        return self.pattern.width

    @property
    def height(self) -> int:
        return self.pattern.height


def rotate_gadget(g: Gadget) -> Gadget:
    return Gadget(g.name + "'", g.pattern.rotate_ccw(), rotate_spec(g.spec, g.width, g.height), g.meta)


def straight_wire_gadget(length: int = 6, thickness: int = 6, orientation=Orientation.HORIZONTAL) -> Gadget:
    """A bare wire crossing the gadget, centred across ``thickness`` rows.

    The E window sits ``length`` columns right of the W window, so an E phase
    ``p`` reads as W phase ``p + length mod 3``.
    """
    off = (thickness - 2) // 2
    rows = ["1" * length if y in (off, off + 1) else "0" * length for y in range(thickness)]
    p = Pattern.from_rows(rows)
    rel = {f"{e}{(e + length) % 3}" for e in (0, 1) if (e + length) % 3 < 2}
    # off a multiple of 3, one phase at either end leaves the other end blank
    rules = parse_charge_rules("W |- E") + parse_charge_rules("E |- W") if len(rel) == 2 else []
    spec = GadgetSpec((WirePort("W", off), WirePort("E", off)), tuple(rules), frozenset(rel))
    g = Gadget(f"wire{length}", p, spec)
    return g if orientation is Orientation.HORIZONTAL else rotate_gadget(g)


# --- verification -----------------------------------------------------------------


def _context(g: Gadget) -> tuple[Pattern, str]:
    kind, _, arg = g.spec.context.partition(":")
    if kind == "bare":
        return g.pattern, kind
    if kind == "frame":
        t = int(arg or 4)
        w, h = g.width, g.height
        img = Pattern.zeros(Rect(-t, -t, w + 2 * t, h + 2 * t)).paste(g.pattern)
        wires = {c: 1 for p in g.spec.ports for c in p.wire_cells(w, h, t)}
        return img.with_cells(wires), kind
    raise ValueError(f"unknown verification context {g.spec.context!r}")


class _Problem:
    """Preimage CNF of a gadget in some context with per-port bit selectors."""

    def __init__(self, g: Gadget, encoding, bare: bool = False):
        self.g = g
        img = g.pattern if bare else _context(g)[0]
        self.cnf = sat.CnfInstance()
        self.pre: PreimageCnf = _add_copy(self.cnf, img, Free(), TriPattern(), encoding)
        self.bit: dict[str, int] = {}
        self.charged: dict[str, int] = {}
        w, h = g.width, g.height
        for p in g.spec.ports:
            b = self.cnf.new_var()
            c = self.cnf.new_var()
            self.bit[p.side], self.charged[p.side] = b, c
            for bit, sel in ((0, -b), (1, b)):
                lits = self.pre.lits(p.signal_cells(bit, w, h))
                # charged & bit -> window equals that signal
                for l in lits:
                    self.cnf.add([-c, -sel, l])
                # window equals that signal -> charged & bit
                self.cnf.add([-l for l in lits] + [c])
                self.cnf.add([-l for l in lits] + [sel])

    def ring_zero_units(self) -> list[int]:
        w, h = self.g.width, self.g.height
        ports = set()
        for p in self.g.spec.ports:
            ports.update(p.window(w, h))
        inner = Rect(1, 1, w - 2, h - 2) if w > 2 and h > 2 else None
        out = []
        for c in Rect(-1, -1, w + 2, h + 2).cells():
            if c in ports or (inner is not None and c in inner):
                continue
            out.append(-self.pre.var(c))
        return out


@dataclass
class CheckResult:
    name: str
    status: str                 # "pass" | "fail" | "inconclusive"
    detail: str = ""
    witness: Pattern | None = None

    @property
    def ok(self) -> bool:
        return self.status == "pass"


def verify_charging(g: Gadget, rule: ChargeRule, encoding=EncodingKind.DIVIDE_CONQUER,
                    backend: str | None = None) -> CheckResult:
    prob = _Problem(g, encoding)
    with sat.open_session(prob.cnf, backend) as s:
        for side in _word(rule.conclusion):
            assume = [prob.charged[x] for x in _word(rule.premise)] + [-prob.charged[side]]
            res = s.solve(assume)
            if res:
                return CheckResult(str(rule), "fail", f"{side} uncharged in some preimage",
                                   prob.pre.decode(res.model))
    return CheckResult(str(rule), "pass")


@dataclass
class RelationReport:
    observed: frozenset
    realizable_with_zero_boundary: frozenset
    expected: frozenset
    status: str

    @property
    def ok(self) -> bool:
        return self.status == "pass"


def observed_relation(g: Gadget, encoding=EncodingKind.DIVIDE_CONQUER, limit: int = 4096,
                      backend: str | None = None) -> tuple[frozenset, bool]:
    prob = _Problem(g, encoding)
    sides = g.spec.sides
    proj = [prob.bit[s] for s in sides]
    models = sat.enumerate_models(prob.cnf, proj, limit + 1,
                                  assumptions=[prob.charged[s] for s in sides], backend=backend)
    complete = len(models) <= limit
    return frozenset("".join("1" if b else "0" for b in m) for m in models[:limit]), complete


def zero_boundary_realizable(g: Gadget, tuples: Iterable[str], encoding=EncodingKind.DIVIDE_CONQUER,
                             backend: str | None = None) -> frozenset:
    prob = _Problem(g, encoding, bare=True)
    sides = g.spec.sides
    zeros = prob.ring_zero_units()
    out = set()
    with sat.open_session(prob.cnf, backend) as s:
        for t in tuples:
            assume = zeros + [prob.charged[x] for x in sides]
            assume += [prob.bit[x] if b == "1" else -prob.bit[x] for x, b in zip(sides, t)]
            if s.solve(assume):
                out.add(t)
    return frozenset(out)


def verify_relation(g: Gadget, encoding=EncodingKind.DIVIDE_CONQUER, limit: int = 4096,
                    backend: str | None = None) -> RelationReport:
    observed, complete = observed_relation(g, encoding, limit, backend)
    expected = g.spec.relation
    if not complete:
        return RelationReport(observed, frozenset(), expected, "inconclusive")
    every = {format(i, f"0{len(g.spec.ports)}b") for i in range(1 << len(g.spec.ports))}
    zb = zero_boundary_realizable(g, every, encoding, backend)
    ok = observed == expected == zb
    return RelationReport(observed, zb, expected, "pass" if ok else "fail")


def verify_forced_zeros(g: Gadget, encoding=EncodingKind.DIVIDE_CONQUER,
                        backend: str | None = None) -> CheckResult:
    if not g.spec.forced_zero_cells:
        return CheckResult("forced zeros", "pass")
    prob = _Problem(g, encoding)
    charged = [prob.charged[s] for s in g.spec.sides]
    with sat.open_session(prob.cnf, backend) as s:
        for c in g.spec.forced_zero_cells:
            res = s.solve(charged + [prob.pre.var(tuple(c))])
            if res:
                return CheckResult("forced zeros", "fail", f"cell {tuple(c)} can be live",
                                   prob.pre.decode(res.model))
    return CheckResult("forced zeros", "pass")


@dataclass
class GadgetReport:
    name: str
    checks: list[CheckResult]

    @property
    def status(self) -> str:
        sts = {c.status for c in self.checks}
        if "fail" in sts:
            return "fail"
        if "inconclusive" in sts:
            return "inconclusive"
        return "pass"


def verify_gadget(g: Gadget, encoding=EncodingKind.DIVIDE_CONQUER, limit: int = 4096,
                  backend: str | None = None, expect: dict | None = None,
                  fail_fast: bool = False) -> GadgetReport:
    """All checks for one gadget; ``expect`` may pin ``width``/``height``/port offsets."""
    steps = [lambda r=r: verify_charging(g, r, encoding, backend) for r in g.spec.charge_rules]
    steps.append(lambda: _relation_check(g, encoding, limit, backend))
    steps.append(lambda: verify_forced_zeros(g, encoding, backend))
    if expect:
        steps.insert(0, lambda: check_geometry(g, **expect))
    checks = []
    for f in steps:
        checks.append(f())
        if fail_fast and checks[-1].status == "fail":
            break
    return GadgetReport(g.name, checks)


def _relation_check(g, encoding, limit, backend) -> CheckResult:
    rel = verify_relation(g, encoding, limit, backend)
    detail = (f"observed={sorted(rel.observed)} zero-boundary={sorted(rel.realizable_with_zero_boundary)}"
              f" claimed={sorted(rel.expected)}")
    return CheckResult("relation", rel.status, detail)


def check_geometry(g: Gadget, width: int | None = None, height: int | None = None,
                   offsets: dict | None = None) -> CheckResult:
    problems = []
    if width is not None and g.width != width:
        problems.append(f"width {g.width} != {width}")
    if height is not None and g.height != height:
        problems.append(f"height {g.height} != {height}")
    for side, off in (offsets or {}).items():
        try:
            if g.spec.port(side).offset != off:
                problems.append(f"{side} offset {g.spec.port(side).offset} != {off}")
        except KeyError:
            problems.append(f"no port on {side}")
    for p in g.spec.ports:
        for c in p.wire_cells(g.width, g.height, 1):
            inside = (min(max(c[0], 0), g.width - 1), min(max(c[1], 0), g.height - 1))
            if g.pattern.get(inside) != 1:
                problems.append(f"port {p.side} has no wire at the boundary")
                break
    return CheckResult("geometry", "fail" if problems else "pass", "; ".join(problems))


# --- library files ----------------------------------------------------------------


_KNOWN = {"name", "rle", "ports", "charge_rules", "relation", "forced_zero_cells", "context"}


def gadget_to_json(g: Gadget) -> dict:
    d = dict(g.meta)
    d.update({
        "name": g.name,
        "rle": emit_rle(g.pattern).decode("ascii"),
        "ports": [{"side": p.side, "offset": p.offset, "phases": list(p.phases), "shift": p.shift}
                  for p in g.spec.ports],
        "charge_rules": [str(r) for r in g.spec.charge_rules],
        "relation": sorted(g.spec.relation),
        "context": g.spec.context,
    })
    if g.spec.forced_zero_cells:
        d["forced_zero_cells"] = [list(c) for c in g.spec.forced_zero_cells]
    return d


def gadget_from_json(d: dict) -> Gadget:
    ports = tuple(WirePort(p["side"], int(p["offset"]), tuple(p.get("phases", (0, 1))),
                           int(p.get("shift", 0))) for p in d.get("ports", []))
    rules = []
    for r in d.get("charge_rules", []):
        rules += parse_charge_rules(r)
    spec = GadgetSpec(ports, tuple(rules), frozenset(d.get("relation", [])),
                      d.get("context", "frame:4"),
                      tuple(tuple(c) for c in d.get("forced_zero_cells", [])))
    meta = {k: v for k, v in d.items() if k not in _KNOWN}
    return Gadget(d["name"], parse_rle(d["rle"]), spec, meta)


def load_gadget(path) -> Gadget:
    with open(path) as f:
        return gadget_from_json(json.load(f))


def save_gadget(g: Gadget, path) -> None:
    with open(path, "w") as f:
        json.dump(gadget_to_json(g), f, indent=1)
        f.write("\n")


def load_library(directory) -> list[Gadget]:
    from pathlib import Path
    return [load_gadget(p) for p in sorted(Path(directory).glob("*.json"))]


_RULE_RE = re.compile(r"^[ENWS, ]*\|-\s*[ENWS]*$")
