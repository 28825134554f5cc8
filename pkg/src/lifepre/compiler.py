"""Lowering circuits and Wang tile sets to Game of Life patterns.

Pieces:

* circuit layouts: the Wang-tile blueprint and the DNF-formula circuit,
  both drawn on a :class:`Canvas` that infers tiles from wire stubs;
* gadget libraries: the real one (90x90 tile blocks and 180x90 charged-wire
  blocks loaded from gadget files), a schematic stand-in with the right
  geometry but no verified behaviour, and a mock library of 3x3 glyphs
  whose preimage question is decided symbolically;
* macrotile assembly and circuit compilation at scales 450 and 270.

Circuit coordinates are ``(row, col)``; pattern coordinates are ``(x, y)``
with the block for tile ``(r, c)`` at ``x = c * scale``, ``y = r * scale``.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import sat
from .circuit import GateTile, CircuitGrid, is_well_formed, tiles_with_stubs
from .gadget import Gadget, Orientation, load_gadget
from .grid import Pattern, Rect
from .preimage import BoundaryMode, Free, Torus, ZeroPadded

_OPP = {"E": "W", "W": "E", "N": "S", "S": "N"}
_SPECIAL = {GateTile.NOT, GateTile.TRUE, GateTile.OR}


class LayoutError(ValueError):
    pass


class Canvas:
    """Draw wires as stub sets; plain tiles are inferred, gates are placed explicitly.

    A stub set ``ENS`` without an explicit gate becomes a Split.
    """

    def __init__(self, rows: int, cols: int):
        self.rows, self.cols = rows, cols
        self.stubs: dict[tuple[int, int], set] = defaultdict(set)
        self.gates: dict[tuple[int, int], GateTile] = {}

    def _check(self, rc):
        r, c = rc
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise LayoutError(f"cell {rc} outside the {self.rows}x{self.cols} canvas")

    def stub(self, rc, side: str) -> None:
        self._check(rc)
        if side in self.stubs[rc]:
            raise LayoutError(f"stub {side} of {rc} drawn twice")
        self.stubs[rc].add(side)

    def link(self, a, b) -> None:
        dr, dc = b[0] - a[0], b[1] - a[1]
        side = {(0, 1): "E", (0, -1): "W", (1, 0): "S", (-1, 0): "N"}.get((dr, dc))
        if side is None:
            raise LayoutError(f"{a} and {b} are not adjacent")
        self.stub(a, side)
        self.stub(b, _OPP[side])

    def path(self, *corners) -> None:
        """A wire through the given corner cells, straight between consecutive corners."""
        for a, b in zip(corners, corners[1:]):
            if a[0] != b[0] and a[1] != b[1]:
                raise LayoutError(f"segment {a}->{b} is not straight")
            dr = (b[0] > a[0]) - (b[0] < a[0])
            dc = (b[1] > a[1]) - (b[1] < a[1])
            p = a
            while p != b:
                q = (p[0] + dr, p[1] + dc)
                self.link(p, q)
                p = q

    def place(self, rc, tile: GateTile) -> None:
        self._check(rc)
        if rc in self.gates:
            raise LayoutError(f"gate at {rc} placed twice")
        self.gates[rc] = tile

    def grid(self) -> CircuitGrid:
        rows = []
        for r in range(self.rows):
            row = []
            for c in range(self.cols):
                s = frozenset(self.stubs.get((r, c), ()))
                if (r, c) in self.gates:
                    t = self.gates[(r, c)]
                    if t.stubs != s:
                        raise LayoutError(f"{t.name} at {(r, c)} has stubs {sorted(s)}")
                else:
                    cands = [t for t in tiles_with_stubs(s) if t not in _SPECIAL]
                    if len(cands) != 1:
                        raise LayoutError(f"no plain tile with stubs {sorted(s)} at {(r, c)}")
                    t = cands[0]
                row.append(t)
            rows.append(tuple(row))
        return CircuitGrid(tuple(rows))


# --- clause blocks ------------------------------------------------------------------

def _slot_rows(nslots: int) -> list[int]:
    """Leaf rows: pairs at 3q and 3q + 2."""
    return [3 * (p // 2) + 2 * (p % 2) for p in range(nslots)]


def _or_tree(cv: Canvas, top: int, leaves: Sequence[int], col: int) -> tuple[int, int]:
    """OR the signals entering ``(top + r, col)`` from the west; returns (row, column) of the result.

    The result enters that cell from the west.
    """
    nodes = [top + r for r in leaves]
    while len(nodes) > 1:
        nxt = []
        for a, b in zip(nodes[0::2], nodes[1::2]):
            m = (a + b) // 2
            cv.path((a, col), (m, col))
            cv.path((b, col), (m, col))
            cv.place((m, col), GateTile.OR)
            cv.link((m, col), (m, col + 1))
            nxt.append(m)
        nodes = nxt
        col += 1
    return nodes[0], col


def _clause_core(cv: Canvas, top: int, nslots: int, qcol: int, negate: Sequence[bool]) -> int:
    """Leaves enter ``(row, qcol)`` from the west; returns the row of the clause output.

    Each leaf passes a WireH or a NOT at ``qcol``; the tree is followed by a
    NOT whose output leaves east into column ``qcol + levels + 2``.
    """
    rows = _slot_rows(nslots)
    for r, neg in zip(rows, negate):
        if neg:
            cv.place((top + r, qcol), GateTile.NOT)
        cv.link((top + r, qcol), (top + r, qcol + 1))
    root, col = _or_tree(cv, top, rows, qcol + 1)
    cv.place((root, col), GateTile.NOT)
    cv.link((root, col), (root, col + 1))
    return root


def _chain_block(cv: Canvas, top: int, height: int, root: int, c1: int, first: bool, last: bool,
                 end_row: int | None = None) -> None:
    """Disjunction chain down column ``c1`` (with ``c1 + 1`` as the detour).

    A block draws its own rows and links up into the row above ``top``.
    """
    c2 = c1 + 1
    if first:
        cv.path((root, c1), (top + height - 1, c1))
        return
    orow = root - 2
    if orow < top:
        raise LayoutError("clause block too short for the chain")
    cv.path((top - 1, c1), (orow, c1))
    cv.place((orow, c1), GateTile.OR)
    cv.path((root, c1), (orow, c1))
    cv.link((orow, c1), (orow, c2))
    if last:
        cv.path((orow, c2), (end_row, c2), (end_row, c1))
        cv.place((end_row, c1), GateTile.TRUE)
    else:
        turn = top + height - 2
        cv.path((orow, c2), (turn, c2), (turn, c1), (top + height - 1, c1))


# --- Wang tiles -----------------------------------------------------------------------

@dataclass(frozen=True)
class WangTile:
    e: int
    n: int
    w: int
    s: int

    def colors(self) -> tuple[int, int, int, int]:
        return (self.e, self.n, self.w, self.s)


@dataclass(frozen=True)
class WangTileSet:
    tiles: tuple[WangTile, ...]

    def __len__(self):
        return len(self.tiles)

    def side_colors(self) -> dict[str, set]:
        return {s: {t.colors()[i] for t in self.tiles} for i, s in enumerate("ENWS")}


def parse_wang(text: str) -> WangTileSet:
    """One tile per line: four colour integers in E N W S order; ``#`` starts a comment."""
    tiles = []
    for i, line in enumerate(text.splitlines()):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"line {i + 1}: expected 4 colours, got {len(parts)}")
        tiles.append(WangTile(*map(int, parts)))
    if not tiles:
        raise ValueError("empty tile set")
    return WangTileSet(tuple(tiles))


def emit_wang(ts: WangTileSet) -> str:
    return "".join(f"{t.e} {t.n} {t.w} {t.s}\n" for t in ts.tiles)


def jeandel_rao_tiles() -> WangTileSet:
    return parse_wang(resources.files("lifepre").joinpath("data/jeandel_rao.txt").read_text())


def encode_tile(t: WangTile) -> tuple[int, ...]:
    """Bits x1..x8: west = (x2, x1), north = (x3, x4), east = (x5, x6), south = (x8, x7); pairs are (high, low)."""
    for name, c in zip("ENWS", t.colors()):
        if not 0 <= c < 4:
            raise ValueError(f"colour {c} on side {name} does not fit in two bits")
    x = [0] * 9
    x[2], x[1] = t.w >> 1, t.w & 1
    x[3], x[4] = t.n >> 1, t.n & 1
    x[5], x[6] = t.e >> 1, t.e & 1
    x[8], x[7] = t.s >> 1, t.s & 1
    return tuple(x[1:])


def decode_tile(bits: Sequence[int]) -> WangTile:
    x = (None,) + tuple(bits)
    return WangTile(e=2 * x[5] + x[6], n=2 * x[3] + x[4], w=2 * x[2] + x[1], s=2 * x[8] + x[7])


BLUEPRINT_COLS = 23
# bus column -> variable index (x1..x8)
_BUS_VAR = {1: 1, 2: 2, 3: 4, 4: 3, 5: 5, 6: 6, 7: 7, 8: 8}


def blueprint_rows(k: int) -> int:
    return 17 + 12 * (k - 2) + 15


def wang_blueprint(ts: WangTileSet) -> CircuitGrid:
    """A circuit whose boundary wires carry x1..x8 and that is satisfiable exactly for the tiles' words.

    Boundary wires (row, col): x2 and x1 enter from the west at rows 3 and 4,
    x5 and x6 leave east at rows 3 and 4, x4 and x3 enter from the north at
    columns 3 and 4, x7 and x8 leave south at columns 3 and 4.  The circuit
    is well formed as a torus; tiling it lets neighbouring copies share
    boundary wires, which is exactly the Wang matching rule.

    A one-tile set is padded by repeating the tile.
    """
    words = [encode_tile(t) for t in ts.tiles]
    if len(words) == 1:
        words = words * 2
    k = len(words)
    rows = blueprint_rows(k)
    cv = Canvas(rows, BLUEPRINT_COLS)
    starts = [5 + 12 * b for b in range(k)]
    footer = starts[-1] + 12
    taps = _slot_rows(8)

    # header: route boundary wires to the bus
    cv.stub((3, 0), "W")
    cv.stub((4, 0), "W")
    cv.stub((3, 22), "E")
    cv.stub((4, 22), "E")
    cv.stub((0, 3), "N")
    cv.stub((0, 4), "N")
    cv.path((3, 0), (3, 2))
    cv.path((4, 0), (4, 1))
    cv.path((3, 22), (3, 5))
    cv.path((4, 22), (4, 6))
    bus_start = {1: 4, 2: 3, 3: 0, 4: 0, 5: 3, 6: 4, 7: starts[0] + taps[6], 8: starts[0] + taps[7]}
    bus_end = {i: starts[-1] + taps[i - 1] for i in range(1, 7)}
    bus_end[7] = footer + 1
    bus_end[8] = footer
    for i in range(1, 9):
        cv.path((bus_start[i], i), (bus_end[i], i))

    for b, (top, word) in enumerate(zip(starts, words)):
        for i in range(1, 9):
            r = top + taps[i - 1]
            cv.path((r, i), (r, 9))
        negate = [bool(word[_BUS_VAR[i] - 1]) for i in range(1, 9)]
        root = _clause_core(cv, top, 8, 9, negate)
        _chain_block(cv, top, 12, root, 14, first=b == 0, last=b == k - 1, end_row=footer)

    # footer: bring x8 and x7 to columns 4 and 3
    cv.path((footer, 8), (footer, 4), (footer + 2, 4))
    cv.path((footer + 1, 7), (footer + 1, 3), (footer + 2, 3))
    cv.stub((footer + 2, 4), "S")
    cv.stub((footer + 2, 3), "S")
    return cv.grid()


BLUEPRINT_PORTS = {
    # variable -> (row or None, col or None, side); None means "last row"
    1: (4, 0, "W"), 2: (3, 0, "W"), 5: (3, BLUEPRINT_COLS - 1, "E"), 6: (4, BLUEPRINT_COLS - 1, "E"),
    4: (0, 3, "N"), 3: (0, 4, "N"), 7: (None, 3, "S"), 8: (None, 4, "S"),
}


def blueprint_port_edges(c: CircuitGrid) -> dict[int, tuple]:
    """Edge keys of x1..x8 under open boundaries (see :func:`circuit.edge_of`)."""
    from .circuit import edge_of
    h, _ = c.shape
    out = {}
    for v, (r, col, side) in BLUEPRINT_PORTS.items():
        out[v] = edge_of(c, h - 1 if r is None else r, col, side, open_boundary=True)
    return out


# --- formulas ---------------------------------------------------------------------

Dnf = list[list[int]]


def parse_dnf(text: str) -> Dnf:
    """One clause (a conjunction) per line, literals as signed integers; ``#`` comments."""
    out = []
    for i, line in enumerate(text.splitlines()):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        lits = [int(t) for t in line.split()]
        if any(l == 0 for l in lits) or not lits:
            raise ValueError(f"line {i + 1}: literals must be nonzero")
        out.append(lits)
    if not out:
        raise ValueError("empty formula")
    return out


def dnf_satisfiable(f: Dnf) -> bool:
    return any(not any(-l in set(cl) for l in cl) for cl in f)


def formula_circuit(f: Dnf) -> CircuitGrid:
    """A closed circuit satisfiable iff the DNF ``f`` is.

    Each variable is a free wire loop (bus going down, return going up);
    each clause is a block that taps its literals' buses, inverts them, ORs
    them and inverts again; the clause outputs feed a disjunction chain
    that ends in a TRUE tile.
    """
    if not f:
        raise ValueError("empty formula")
    n = max(abs(l) for cl in f for l in cl)
    width = max(len(cl) for cl in f)
    levels = max(2, math.ceil(math.log2(width)))
    nslots = 1 << levels
    height = 3 * (nslots // 2)
    src, q = 2 * n, 2 * n + 1
    c1 = q + levels + 2
    cols = c1 + 2
    footer = 1 + height * len(f)
    cv = Canvas(footer + 1, cols)
    for j in range(1, n + 1):
        bus, ret = 2 * (j - 1), 2 * (j - 1) + 1
        cv.path((footer, ret), (0, ret), (0, bus), (footer, bus), (footer, ret))
    # constant 0 seeds the chain
    cv.place((0, c1 - 2), GateTile.TRUE)
    cv.place((0, c1 - 1), GateTile.NOT)
    cv.path((0, c1 - 2), (0, c1 - 1), (0, c1))
    rows = _slot_rows(nslots)
    for b, cl in enumerate(f):
        top = 1 + height * b
        negate = []
        for p in range(nslots):
            r = top + rows[p]
            if p < len(cl):
                lit = cl[p]
                cv.path((r, 2 * (abs(lit) - 1)), (r, q))
                negate.append(lit > 0)
            else:
                cv.place((r, src), GateTile.TRUE)
                cv.link((r, src), (r, q))
                negate.append(True)
        root = _clause_core(cv, top, nslots, q, negate)
        _chain_block(cv, top, height, root, c1, first=False, last=b == len(f) - 1, end_row=footer)
    return cv.grid()


# --- gadget libraries ---------------------------------------------------------------

class PhaseAlignment(enum.Enum):
    NEUTRAL = "neutral"
    EAST_SHIFTED = "east"
    WEST_SHIFTED = "west"
    NORTH_SHIFTED = "north"
    SOUTH_SHIFTED = "south"


def axis_alignments(o: Orientation) -> tuple[PhaseAlignment, ...]:
    if o is Orientation.HORIZONTAL:
        return (PhaseAlignment.NEUTRAL, PhaseAlignment.EAST_SHIFTED, PhaseAlignment.WEST_SHIFTED)
    return (PhaseAlignment.NEUTRAL, PhaseAlignment.NORTH_SHIFTED, PhaseAlignment.SOUTH_SHIFTED)


class MissingGadgetError(KeyError):
    pass


WireKey = tuple[Orientation, PhaseAlignment, PhaseAlignment]


@dataclass
class GadgetLibrary:
    """90x90 tile blocks and charged-wire blocks (180x90 horizontal, 90x180 vertical).

    Wire keys are ``(orientation, a, b)`` with ``a`` the alignment at the
    west/north end and ``b`` at the east/south end.
    """
    tiles: dict[GateTile, Gadget] = field(default_factory=dict)
    wires: dict[WireKey, Gadget] = field(default_factory=dict)
    verified: bool = True
    block: int = 90
    offset: int = 29

    def tile_block(self, t: GateTile) -> Gadget:
        if t is GateTile.BLANK and t not in self.tiles:
            z = Pattern.zeros(Rect(0, 0, self.block, self.block))
            from .gadget import GadgetSpec
            return Gadget("blank", z, GadgetSpec(()))
        try:
            return self.tiles[t]
        except KeyError:
            raise MissingGadgetError(f"no block for tile {t.name}") from None

    def tile_alignment(self, t: GateTile, side: str) -> PhaseAlignment:
        al = self.tile_block(t).meta.get("alignments", {})
        return PhaseAlignment(al.get(side, "neutral"))

    def wire_block(self, key: WireKey) -> Gadget:
        try:
            return self.wires[key]
        except KeyError:
            o, a, b = key
            raise MissingGadgetError(f"no {o.name.lower()} wire block {a.value}->{b.value}") from None

    def all_gadgets(self) -> list[Gadget]:
        return list(self.tiles.values()) + list(self.wires.values())

    def expected_geometry(self, g: Gadget) -> dict:
        """Dimensions and port offsets a block must have."""
        kind = g.meta.get("kind")
        offs = {p.side: self.offset for p in g.spec.ports}
        if kind == "tile":
            return {"width": self.block, "height": self.block, "offsets": offs}
        if kind == "wire":
            if g.meta.get("orientation", "H") == "H":
                return {"width": 2 * self.block, "height": self.block, "offsets": offs}
            return {"width": self.block, "height": 2 * self.block, "offsets": offs}
        return {}


def load_gadget_library(directory) -> GadgetLibrary:
    """Gadget files with ``kind`` = ``tile`` (plus ``tile`` = circuit character) or ``wire``."""
    lib = GadgetLibrary()
    for p in sorted(Path(directory).glob("*.json")):
        g = load_gadget(p)
        kind = g.meta.get("kind")
        if kind == "tile":
            lib.tiles[GateTile(g.meta["tile"])] = g
        elif kind == "wire":
            o = Orientation(g.meta.get("orientation", "H"))
            a, b = (PhaseAlignment(x) for x in g.meta.get("alignments", ["neutral", "neutral"]))
            lib.wires[(o, a, b)] = g
    lib.verified = not any(g.meta.get("schematic") for g in lib.all_gadgets())
    return lib


def schematic_library(block: int = 90, offset: int = 29) -> GadgetLibrary:
    """Blocks with the right geometry that only draw wires; NOT verified gadgets.

    Good for layout and dimension checks, meaningless for preimage questions.
    """
    from .gadget import GadgetSpec, WirePort
    lib = GadgetLibrary(verified=False, block=block, offset=offset)
    o0, o1 = offset, offset + 2
    for t in GateTile:
        a = np.zeros((block, block), np.uint8)
        for s in t.stubs:
            if s == "E":
                a[o0:o1, o0:] = 1
            elif s == "W":
                a[o0:o1, :o1] = 1
            elif s == "N":
                a[:o1, o0:o1] = 1
            else:
                a[o0:, o0:o1] = 1
        spec = GadgetSpec(tuple(WirePort(s, offset) for s in t.stubs))
        lib.tiles[t] = Gadget(f"schematic-{t.name.lower()}", Pattern(0, 0, a), spec,
                              {"kind": "tile", "tile": t.char, "schematic": True})
    for o in Orientation:
        for al in axis_alignments(o):
            for bl in axis_alignments(o):
                a = np.zeros((block, 2 * block), np.uint8)
                a[o0:o1, :] = 1
                sides = ("W", "E")
                if o is Orientation.VERTICAL:
                    a = a.T.copy()
                    sides = ("N", "S")
                spec = GadgetSpec(tuple(WirePort(s, offset) for s in sides))
                lib.wires[(o, al, bl)] = Gadget(
                    f"schematic-wire-{o.value}-{al.value}-{bl.value}", Pattern(0, 0, a), spec,
                    {"kind": "wire", "orientation": o.value, "alignments": [al.value, bl.value],
                     "schematic": True})
    return lib


# --- assembly -------------------------------------------------------------------------

def assemble_macrotile(lib: GadgetLibrary, tile: GateTile, alignments: Mapping[str, PhaseAlignment] | None = None,
                       scale: int = 450) -> Pattern:
    """One tile's macrotile.

    At 450 the tile block sits in the middle with a wire block on each stub
    side, reaching the macrotile edge with the given boundary alignments
    (neutral by default).  At 270 the block sits top-left and only the east
    and south wire blocks are drawn; ``alignments['E']``/``['S']`` are then
    the alignments demanded by the east/south neighbours.
    """
    alignments = dict(alignments or {})
    B = lib.block
    out = np.zeros((scale, scale), np.uint8)
    if tile is GateTile.BLANK:
        return Pattern(0, 0, out)
    core = lib.tile_block(tile).pattern.bits
    H, V = Orientation.HORIZONTAL, Orientation.VERTICAL

    def al(side):
        return alignments.get(side, PhaseAlignment.NEUTRAL)

    mine = {s: lib.tile_alignment(tile, s) for s in "ENWS"}
    if scale == 450:
        out[2 * B:3 * B, 2 * B:3 * B] = core
        for s in tile.stubs:
            if s == "E":
                out[2 * B:3 * B, 3 * B:] = lib.wire_block((H, mine["E"], al("E"))).pattern.bits
            elif s == "W":
                out[2 * B:3 * B, :2 * B] = lib.wire_block((H, al("W"), mine["W"])).pattern.bits
            elif s == "N":
                out[:2 * B, 2 * B:3 * B] = lib.wire_block((V, al("N"), mine["N"])).pattern.bits
            else:
                out[3 * B:, 2 * B:3 * B] = lib.wire_block((V, mine["S"], al("S"))).pattern.bits
    elif scale == 270:
        out[:B, :B] = core
        if "E" in tile.stubs:
            out[:B, B:] = lib.wire_block((H, mine["E"], al("E"))).pattern.bits
        if "S" in tile.stubs:
            out[B:, :B] = lib.wire_block((V, mine["S"], al("S"))).pattern.bits
    else:
        raise ValueError("scale must be 450 or 270")
    return Pattern(0, 0, out)


def compile_circuit(lib, c: CircuitGrid, scale: int | None = None, periodic: bool = False) -> Pattern:
    """Substitute every tile by its macrotile (mock library: by its glyph)."""
    ok, why = is_well_formed(c, periodic)
    if not ok:
        raise ValueError(f"circuit is not well formed: {why}")
    if isinstance(lib, MockLibrary):
        return lib.compile(c)
    if scale not in (450, 270):
        raise ValueError("scale must be 450 or 270")
    if scale == 270 and lib.block * 3 != 270:
        raise ValueError("scale 270 needs 90x90 blocks")
    h, w = c.shape
    out = np.zeros((h * scale, w * scale), np.uint8)
    cache: dict = {}
    for r, col in c.positions():
        t = c[r, col]
        if t is GateTile.BLANK:
            continue
        if scale == 270:
            # context-sensitive: match what the neighbours expect on their W and N sides
            east = c[r, (col + 1) % w]
            south = c[(r + 1) % h, col]
            als = {"E": lib.tile_alignment(east, "W") if "E" in t.stubs else None,
                   "S": lib.tile_alignment(south, "N") if "S" in t.stubs else None}
            als = {k: v for k, v in als.items() if v is not None}
        else:
            als = {}
        key = (t, tuple(sorted((k, v.value) for k, v in als.items())))
        if key not in cache:
            cache[key] = assemble_macrotile(lib, t, als, scale).bits
        out[r * scale:(r + 1) * scale, col * scale:(col + 1) * scale] = cache[key]
    return Pattern(0, 0, out)


def jeandel_rao_instance(lib: GadgetLibrary, tiles: WangTileSet | None = None) -> Pattern:
    """Fundamental domain of the periodic configuration simulating the Jeandel-Rao tiles at scale 270."""
    ts = tiles or jeandel_rao_tiles()
    return compile_circuit(lib, wang_blueprint(ts), 270, periodic=True)


def formula_to_pattern(f: Dnf, lib, scale: int | None = None) -> Pattern:
    return compile_circuit(lib, formula_circuit(f), scale)


# --- mock library -------------------------------------------------------------------

_ARM = {"N": (1, 0), "S": (1, 2), "W": (0, 1), "E": (2, 1)}


class MockLibrary:
    """3x3 glyphs: centre live for any non-blank tile, one live arm cell per stub,
    and a live top-left corner marking NOT and OR.

    :meth:`has_preimage` reads glyphs back cell by cell and decides the
    'preimage' question as a SAT problem on the arm cells: touching arms
    carry equal signals, an arm facing a dead cell is a contradiction, and
    each glyph imposes its tile's semantics.
    """

    scale = 3

    def glyph(self, t: GateTile) -> np.ndarray:
        g = np.zeros((3, 3), np.uint8)
        if t is GateTile.BLANK:
            return g
        g[1, 1] = 1
        for s in t.stubs:
            x, y = _ARM[s]
            g[y, x] = 1
        if t in (GateTile.NOT, GateTile.OR):
            g[0, 0] = 1
        return g

    def compile(self, c: CircuitGrid) -> Pattern:
        h, w = c.shape
        out = np.zeros((3 * h, 3 * w), np.uint8)
        for r, col in c.positions():
            out[3 * r:3 * r + 3, 3 * col:3 * col + 3] = self.glyph(c[r, col])
        return Pattern(0, 0, out)

    @staticmethod
    def _decode(g: np.ndarray) -> GateTile | None:
        if not g.any():
            return GateTile.BLANK
        if not g[1, 1] or g[0, 2] or g[2, 0] or g[2, 2]:
            return None
        stubs = frozenset(s for s, (x, y) in _ARM.items() if g[y, x])
        marked = bool(g[0, 0])
        for t in tiles_with_stubs(stubs):
            if marked == (t in (GateTile.NOT, GateTile.OR)):
                return t
        return None

    def has_preimage(self, p: Pattern, mode: BoundaryMode = ZeroPadded(4), backend: str | None = None) -> bool:
        from .circuit import _tile_clauses
        if not p.is_rectangular() or p.width % 3 or p.height % 3:
            return False
        a = p.bits
        H, W = a.shape
        wrap = isinstance(mode, Torus)
        cnf = sat.CnfInstance()

        def arm_var(cell):
            return cnf.var(("arm", cell))

        for gy in range(0, H, 3):
            for gx in range(0, W, 3):
                t = self._decode(a[gy:gy + 3, gx:gx + 3])
                if t is None:
                    return False
                v = {}
                for s in t.stubs:
                    x, y = _ARM[s]
                    cell = (gx + x, gy + y)
                    v[s] = arm_var(cell)
                    dx, dy = {"E": (1, 0), "W": (-1, 0), "N": (0, -1), "S": (0, 1)}[s]
                    nx_, ny_ = cell[0] + dx, cell[1] + dy
                    if wrap:
                        nx_, ny_ = nx_ % W, ny_ % H
                    elif not (0 <= nx_ < W and 0 <= ny_ < H):
                        if isinstance(mode, Free):
                            continue
                        return False      # facing the dead padding
                    if not a[ny_, nx_]:
                        return False
                    other = arm_var((nx_, ny_))
                    cnf.extend([[-v[s], other], [v[s], -other]])
                cnf.extend(_tile_clauses(t, v))
        return bool(sat.solve(cnf, backend=backend))
