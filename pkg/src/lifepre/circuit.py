"""Gate-tile circuits: well-formedness, signal semantics and a SAT reduction.

A circuit is a rectangular array of tiles indexed ``(row, col)``.  Each
shared edge that carries a wire gets one boolean signal.  Edge keys are
``("h", r, c)`` for the edge east of tile ``(r, c)`` and ``("v", r, c)`` for
the edge south of it.

Finite circuits must be closed: no stub may touch the outer boundary.  With
``periodic=True`` the array is read as a torus instead.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Mapping

from . import sat

Edge = tuple[str, int, int]


class GateTile(enum.Enum):
    BLANK = "."
    WIRE_H = "-"
    WIRE_V = "|"
    TURN_EN = "L"
    TURN_NW = "J"
    TURN_WS = "7"
    TURN_ES = "r"
    NOT = "N"
    TRUE = "T"
    SPLIT = "S"
    CROSS = "X"
    OR = "O"

    @property
    def stubs(self) -> frozenset:
        return _STUBS[self]

    @property
    def char(self) -> str:
        return self.value


_STUBS = {
    GateTile.BLANK: frozenset(),
    GateTile.WIRE_H: frozenset("EW"),
    GateTile.WIRE_V: frozenset("NS"),
    GateTile.TURN_EN: frozenset("EN"),
    GateTile.TURN_NW: frozenset("NW"),
    GateTile.TURN_WS: frozenset("WS"),
    GateTile.TURN_ES: frozenset("ES"),
    GateTile.NOT: frozenset("EW"),
    GateTile.TRUE: frozenset("E"),
    GateTile.SPLIT: frozenset("ENS"),
    GateTile.CROSS: frozenset("ENWS"),
    GateTile.OR: frozenset("ENS"),
}

# quarter turn counterclockwise; only defined on the rotation-closed tiles
ROTATE_CCW = {
    GateTile.BLANK: GateTile.BLANK,
    GateTile.WIRE_H: GateTile.WIRE_V,
    GateTile.WIRE_V: GateTile.WIRE_H,
    GateTile.TURN_EN: GateTile.TURN_NW,
    GateTile.TURN_NW: GateTile.TURN_WS,
    GateTile.TURN_WS: GateTile.TURN_ES,
    GateTile.TURN_ES: GateTile.TURN_EN,
    GateTile.CROSS: GateTile.CROSS,
}

_BY_STUBS = {}
for _t in GateTile:
    _BY_STUBS.setdefault(_t.stubs, []).append(_t)


def tiles_with_stubs(stubs: Iterable[str]) -> list[GateTile]:
    return list(_BY_STUBS.get(frozenset(stubs), []))


@dataclass(frozen=True)
class CircuitGrid:
    tiles: tuple[tuple[GateTile, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(GateTile(t) if not isinstance(t, GateTile) else t for t in r) for r in self.tiles)
        if not rows or not rows[0] or len({len(r) for r in rows}) != 1:
            raise ValueError("circuit must be a non-empty rectangle")
        object.__setattr__(self, "tiles", rows)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.tiles), len(self.tiles[0])

    def __getitem__(self, rc) -> GateTile:
        return self.tiles[rc[0]][rc[1]]

    def positions(self):
        h, w = self.shape
        return itertools.product(range(h), range(w))

    def replace(self, changes: Mapping[tuple[int, int], GateTile]) -> "CircuitGrid":
        rows = [list(r) for r in self.tiles]
        for (r, c), t in changes.items():
            rows[r][c] = t
        return CircuitGrid(tuple(tuple(r) for r in rows))

    @classmethod
    def blank(cls, rows: int, cols: int) -> "CircuitGrid":
        return cls(tuple((GateTile.BLANK,) * cols for _ in range(rows)))


def parse_circuit(text: str) -> CircuitGrid:
    lines = [l for l in text.splitlines() if l.strip() != ""]
    rows = []
    for i, line in enumerate(lines):
        row = []
        for j, ch in enumerate(line.rstrip("\n")):
            try:
                row.append(GateTile(ch))
            except ValueError:
                raise ValueError(f"line {i + 1}, column {j + 1}: unknown tile {ch!r}") from None
        rows.append(tuple(row))
    if len({len(r) for r in rows}) > 1:
        raise ValueError("rows have different lengths")
    return CircuitGrid(tuple(rows))


def emit_circuit(c: CircuitGrid) -> str:
    return "".join("".join(t.char for t in row) + "\n" for row in c.tiles)


def edge_of(c: CircuitGrid, r: int, col: int, side: str, periodic: bool = False,
            open_boundary: bool = False) -> Edge | None:
    """Key of the edge on ``side`` of tile ``(r, col)``; None if it is the outer boundary.

    With ``open_boundary`` a boundary edge keeps its out-of-range key instead.
    """
    h, w = c.shape
    if side == "E":
        key = ("h", r, col)
    elif side == "W":
        key = ("h", r, col - 1)
    elif side == "S":
        key = ("v", r, col)
    else:
        key = ("v", r - 1, col)
    kind, rr, cc = key
    if periodic:
        return (kind, rr % h, cc % w)
    if open_boundary:
        return key
    if kind == "h" and not 0 <= cc < w - 1:
        return None
    if kind == "v" and not 0 <= rr < h - 1:
        return None
    return key


_OPP = {"E": "W", "W": "E", "N": "S", "S": "N"}
_STEP = {"E": (0, 1), "W": (0, -1), "N": (-1, 0), "S": (1, 0)}


def is_well_formed(c: CircuitGrid, periodic: bool = False,
                   open_boundary: bool = False) -> tuple[bool, str | None]:
    h, w = c.shape
    for r, col in c.positions():
        t = c[r, col]
        for side in "ENWS":
            dr, dc = _STEP[side]
            rr, cc = r + dr, col + dc
            if periodic:
                rr, cc = rr % h, cc % w
            elif not (0 <= rr < h and 0 <= cc < w):
                if side in t.stubs and not open_boundary:
                    return False, f"tile ({r}, {col}) {t.name} has a {side} stub on the boundary"
                continue
            if (side in t.stubs) != (_OPP[side] in c[rr, cc].stubs):
                return False, f"edge {side} of ({r}, {col}) does not match ({rr}, {cc})"
    return True, None


def wire_edges(c: CircuitGrid, periodic: bool = False, open_boundary: bool = False) -> list[Edge]:
    out = set()
    for r, col in c.positions():
        for side in c[r, col].stubs:
            e = edge_of(c, r, col, side, periodic, open_boundary)
            if e is not None:
                out.add(e)
    return sorted(out)


def tile_holds(t: GateTile, sig: Mapping[str, int]) -> bool:
    """Semantics of one tile given the signals on its stubs."""
    if t is GateTile.BLANK:
        return True
    if t is GateTile.NOT:
        return sig["E"] != sig["W"]
    if t is GateTile.TRUE:
        return sig["E"] == 1
    if t is GateTile.CROSS:
        return sig["N"] == sig["S"] and sig["E"] == sig["W"]
    if t is GateTile.OR:
        return sig["E"] == (sig["N"] | sig["S"])
    return len({sig[s] for s in t.stubs}) == 1


def check_assignment(c: CircuitGrid, a: Mapping[Edge, int], periodic: bool = False) -> bool:
    for r, col in c.positions():
        t = c[r, col]
        sig = {s: a[edge_of(c, r, col, s, periodic)] for s in t.stubs}
        if not tile_holds(t, sig):
            return False
    return True


def _tile_clauses(t: GateTile, v: Mapping[str, int]) -> list[list[int]]:
    if t is GateTile.BLANK:
        return []
    if t is GateTile.NOT:
        return [[v["E"], v["W"]], [-v["E"], -v["W"]]]
    if t is GateTile.TRUE:
        return [[v["E"]]]
    if t is GateTile.CROSS:
        return [[-v["N"], v["S"]], [v["N"], -v["S"]], [-v["E"], v["W"]], [v["E"], -v["W"]]]
    if t is GateTile.OR:
        e, n, s = v["E"], v["N"], v["S"]
        return [[-e, n, s], [e, -n], [e, -s]]
    stubs = sorted(t.stubs)
    out = []
    for a, b in zip(stubs, stubs[1:]):
        out += [[-v[a], v[b]], [v[a], -v[b]]]
    return out


def to_cnf(c: CircuitGrid, periodic: bool = False,
           open_boundary: bool = False) -> tuple[sat.CnfInstance, dict[Edge, int]]:
    """With ``open_boundary`` stubs on the outer boundary carry free signals."""
    ok, why = is_well_formed(c, periodic, open_boundary)
    if not ok:
        raise ValueError(f"circuit is not well formed: {why}")
    cnf = sat.CnfInstance()
    edges = {e: cnf.var(("edge", e)) for e in wire_edges(c, periodic, open_boundary)}
    for r, col in c.positions():
        t = c[r, col]
        v = {s: edges[edge_of(c, r, col, s, periodic, open_boundary)] for s in t.stubs}
        cnf.extend(_tile_clauses(t, v))
    return cnf, edges


def satisfy(c: CircuitGrid, periodic: bool = False, backend: str | None = None) -> dict[Edge, int] | None:
    """A satisfying signal assignment, or None if the circuit is unsatisfiable."""
    cnf, edges = to_cnf(c, periodic)
    res = sat.solve(cnf, backend=backend)
    if not res:
        return None
    return {e: int(res.value(v)) for e, v in edges.items()}


def count_satisfying(c: CircuitGrid, limit: int | None = None, periodic: bool = False,
                     backend: str | None = None) -> int:
    cnf, edges = to_cnf(c, periodic)
    return sat.count_models(cnf, list(edges.values()), limit, backend=backend)


def brute_force_satisfy(c: CircuitGrid, periodic: bool = False) -> list[dict[Edge, int]]:
    """Every satisfying assignment by exhaustive search (small circuits only)."""
    edges = wire_edges(c, periodic)
    if len(edges) > 22:
        raise ValueError("too many edges for brute force")
    out = []
    for bits in itertools.product((0, 1), repeat=len(edges)):
        a = dict(zip(edges, bits))
        if check_assignment(c, a, periodic):
            out.append(a)
    return out


def rotate_circuit(c: CircuitGrid) -> CircuitGrid:
    """Rotate the grid a quarter turn counterclockwise, substituting rotated tiles."""
    h, w = c.shape
    rows = []
    for nr in range(w):
        row = []
        for nc in range(h):
            t = c[nc, w - 1 - nr]
            if t not in ROTATE_CCW:
                raise ValueError(f"{t.name} has no rotated counterpart")
            row.append(ROTATE_CCW[t])
        rows.append(tuple(row))
    return CircuitGrid(tuple(rows))


def random_circuit(rows: int, cols: int, rng: random.Random,
                   tiles: Iterable[GateTile] = tuple(GateTile), blank_weight: float = 1.0,
                   max_steps: int = 100_000) -> CircuitGrid:
    """A random well-formed (closed) circuit, sampled by randomized backtracking."""
    tiles = list(tiles)
    grid: list[list[GateTile | None]] = [[None] * cols for _ in range(rows)]
    cells = [(r, c) for r in range(rows) for c in range(cols)]
    steps = 0

    def options(r, c):
        need_w = c > 0 and "E" in grid[r][c - 1].stubs
        need_n = r > 0 and "S" in grid[r - 1][c].stubs
        out = []
        for t in tiles:
            s = t.stubs
            if ("W" in s) != need_w or ("N" in s) != need_n:
                continue
            if c == cols - 1 and "E" in s or r == rows - 1 and "S" in s:
                continue
            out.append(t)
        weights = [blank_weight if t is GateTile.BLANK else 1.0 for t in out]
        order = []
        while out:
            i = rng.choices(range(len(out)), weights)[0]
            order.append(out.pop(i))
            weights.pop(i)
        return order

    def rec(i):
        nonlocal steps
        steps += 1
        if steps > max_steps:
            raise RuntimeError("sampler exceeded its step budget")
        if i == len(cells):
            return True
        r, c = cells[i]
        for t in options(r, c):
            grid[r][c] = t
            if rec(i + 1):
                return True
        grid[r][c] = None
        return False

    if not rec(0):
        raise ValueError("no well-formed circuit with these tiles")
    return CircuitGrid(tuple(tuple(r) for r in grid))


def loop_circuit(rows: int, cols: int, cycle: list[tuple[int, int]],
                 nots: Iterable[tuple[int, int]] = ()) -> CircuitGrid:
    """Lay a closed wire along ``cycle`` (adjacent cells, returning to the start)."""
    nots = set(nots)
    changes = {}
    n = len(cycle)
    for i, (r, c) in enumerate(cycle):
        stubs = set()
        for nb in (cycle[i - 1], cycle[(i + 1) % n]):
            dr, dc = nb[0] - r, nb[1] - c
            stubs.add({(0, 1): "E", (0, -1): "W", (-1, 0): "N", (1, 0): "S"}[(dr, dc)])
        if (r, c) in nots:
            if stubs != {"E", "W"}:
                raise ValueError("inverters only sit on horizontal straights")
            changes[(r, c)] = GateTile.NOT
        else:
            (t,) = [t for t in tiles_with_stubs(stubs) if t is not GateTile.NOT]
            changes[(r, c)] = t
    return CircuitGrid.blank(rows, cols).replace(changes)


def simple_cycles(rows: int, cols: int, max_len: int) -> list[list[tuple[int, int]]]:
    """Simple cycles of the grid graph on ``rows`` x ``cols`` cells, each listed once."""
    out = []
    cells = [(r, c) for r in range(rows) for c in range(cols)]

    def nbrs(p):
        r, c = p
        for dr, dc in ((0, 1), (1, 0), (0, -1), (-1, 0)):
            if 0 <= r + dr < rows and 0 <= c + dc < cols:
                yield (r + dr, c + dc)

    for start in cells:
        # the start is the smallest cell of the cycle; fix orientation by second < last
        path = [start]
        on = {start}

        def rec():
            p = path[-1]
            for q in nbrs(p):
                if q == start and len(path) >= 4 and path[1] < path[-1]:
                    out.append(list(path))
                elif q not in on and q > start and len(path) < max_len:
                    path.append(q)
                    on.add(q)
                    rec()
                    on.discard(q)
                    path.pop()

        rec()
    return out
