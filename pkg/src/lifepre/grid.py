"""Cells, finite patterns and Golly-compatible serialization.

Coordinate convention (used everywhere in the package): ``x`` grows to the
right, ``y`` grows *downward*, so row ``y = 0`` is the first row of an RLE
file.  Mathematical (y-up) statements are converted once, in
``lifepre.gadget``, where wire phases are defined.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

Cell = tuple[int, int]


class RLEError(ValueError):
    """Malformed RLE input; carries the 1-based line and column."""

    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Rect:
    x0: int
    y0: int
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def x1(self) -> int:
        return self.x0 + self.width

    @property
    def y1(self) -> int:
        return self.y0 + self.height

    def cells(self) -> Iterator[Cell]:
        for y in range(self.y0, self.y1):
            for x in range(self.x0, self.x1):
                yield (x, y)

    def __contains__(self, c) -> bool:
        x, y = c
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    def grow(self, r: int) -> "Rect":
        return Rect(self.x0 - r, self.y0 - r, self.width + 2 * r, self.height + 2 * r)

    def shift(self, dx: int, dy: int) -> "Rect":
        return Rect(self.x0 + dx, self.y0 + dy, self.width, self.height)

    def contains_rect(self, other: "Rect") -> bool:
        return (self.x0 <= other.x0 and self.y0 <= other.y0
                and other.x1 <= self.x1 and other.y1 <= self.y1)

    def __len__(self) -> int:
        return self.width * self.height


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Pattern:
    """A finite partial map from cells to {0, 1}.

    Stored as a bounding box ``(x0, y0)`` plus a uint8 array ``bits`` of
    shape ``(h, w)`` and an optional boolean ``mask`` (``None`` means the
    whole box is the domain).  Instances are immutable.
    """

    __slots__ = ("x0", "y0", "bits", "mask", "_hash")

    def __init__(self, x0: int, y0: int, bits: np.ndarray, mask: np.ndarray | None = None):
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.ndim != 2:
            raise ValueError("bits must be 2-dimensional")
        if mask is not None:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != bits.shape:
                raise ValueError("mask shape mismatch")
            if mask.all():
                mask = None
            else:
                bits = np.where(mask, bits, 0).astype(np.uint8)
                mask = _frozen(mask.copy())
        if bits.size and bits.max(initial=0) > 1:
            raise ValueError("bits must be 0/1")
        self.x0 = int(x0)
        self.y0 = int(y0)
        self.bits = _frozen(bits.copy()) if bits.flags.writeable else bits
        self.mask = mask
        self._hash = None

    # construction helpers

    @classmethod
    def empty(cls) -> "Pattern":
        return cls(0, 0, np.zeros((0, 0), np.uint8))

    @classmethod
    def zeros(cls, rect: Rect) -> "Pattern":
        return cls(rect.x0, rect.y0, np.zeros((rect.height, rect.width), np.uint8))

    @classmethod
    def from_rows(cls, rows: Iterable[str | Iterable[int]], x0: int = 0, y0: int = 0) -> "Pattern":
        """Rows of '0'/'1' (or '.'/'O', or int sequences); '?' marks a hole."""
        grid, holes = [], []
        for row in rows:
            if isinstance(row, str):
                grid.append([1 if ch in "1Oo*" else 0 for ch in row])
                holes.append([ch == "?" for ch in row])
            else:
                r = list(row)
                grid.append([int(v) for v in r])
                holes.append([False] * len(r))
        if not grid:
            return cls.empty()
        w = max(len(r) for r in grid)
        if any(len(r) != w for r in grid):
            raise ValueError("ragged rows")
        mask = ~np.array(holes, dtype=bool)
        return cls(x0, y0, np.array(grid, np.uint8), mask)

    @classmethod
    def from_cells(cls, cells: Mapping[Cell, int]) -> "Pattern":
        if not cells:
            return cls.empty()
        xs = [c[0] for c in cells]
        ys = [c[1] for c in cells]
        x0, y0 = min(xs), min(ys)
        w, h = max(xs) - x0 + 1, max(ys) - y0 + 1
        bits = np.zeros((h, w), np.uint8)
        mask = np.zeros((h, w), bool)
        for (x, y), b in cells.items():
            bits[y - y0, x - x0] = 1 if b else 0
            mask[y - y0, x - x0] = True
        return cls(x0, y0, bits, mask)

    # basic queries

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def bbox(self) -> Rect | None:
        if self.bits.size == 0:
            return None
        return Rect(self.x0, self.y0, self.width, self.height)

    def is_rectangular(self) -> bool:
        return self.mask is None and self.bits.size > 0

    def domain_mask(self) -> np.ndarray:
        return np.ones(self.bits.shape, bool) if self.mask is None else self.mask

    def __len__(self) -> int:
        return int(self.bits.size if self.mask is None else self.mask.sum())

    def __contains__(self, c) -> bool:
        return self.get(c) is not None

    def get(self, c: Cell) -> int | None:
        """Bit at ``c``, or ``None`` when ``c`` is outside the domain (unconstrained)."""
        x, y = c[0] - self.x0, c[1] - self.y0
        if 0 <= y < self.height and 0 <= x < self.width:
            if self.mask is not None and not self.mask[y, x]:
                return None
            return int(self.bits[y, x])
        return None

    def __getitem__(self, c: Cell) -> int:
        v = self.get(c)
        if v is None:
            raise KeyError(c)
        return v

    def domain(self) -> list[Cell]:
        ys, xs = np.nonzero(self.domain_mask())
        return [(int(x) + self.x0, int(y) + self.y0) for y, x in zip(ys, xs)]

    def items(self) -> Iterator[tuple[Cell, int]]:
        m = self.domain_mask()
        ys, xs = np.nonzero(m)
        for y, x in zip(ys, xs):
            yield (int(x) + self.x0, int(y) + self.y0), int(self.bits[y, x])

    def support(self) -> set[Cell]:
        ys, xs = np.nonzero(self.bits)
        return {(int(x) + self.x0, int(y) + self.y0) for y, x in zip(ys, xs)}

    def to_dict(self) -> dict[Cell, int]:
        return dict(self.items())

    def rows(self) -> list[str]:
        m = self.domain_mask()
        return ["".join("?" if not m[y, x] else str(int(self.bits[y, x]))
                        for x in range(self.width)) for y in range(self.height)]

    # transformations (all return new patterns)

    def shift(self, v: Cell) -> "Pattern":
        """sigma^v: the cell ``w`` of ``self`` lands at ``w - v``."""
        return Pattern(self.x0 - v[0], self.y0 - v[1], self.bits, self.mask)

    def translate(self, dx: int, dy: int) -> "Pattern":
        return Pattern(self.x0 + dx, self.y0 + dy, self.bits, self.mask)

    def restrict(self, rect: Rect) -> "Pattern":
        """Restriction to ``rect``; cells of ``rect`` outside the domain become holes."""
        bits = np.zeros((rect.height, rect.width), np.uint8)
        mask = np.zeros((rect.height, rect.width), bool)
        bb = self.bbox
        if bb is not None:
            ix0, iy0 = max(rect.x0, bb.x0), max(rect.y0, bb.y0)
            ix1, iy1 = min(rect.x1, bb.x1), min(rect.y1, bb.y1)
            if ix0 < ix1 and iy0 < iy1:
                src = (slice(iy0 - self.y0, iy1 - self.y0), slice(ix0 - self.x0, ix1 - self.x0))
                dst = (slice(iy0 - rect.y0, iy1 - rect.y0), slice(ix0 - rect.x0, ix1 - rect.x0))
                bits[dst] = self.bits[src]
                mask[dst] = self.domain_mask()[src]
        return Pattern(rect.x0, rect.y0, bits, mask)

    def with_cells(self, cells: Mapping[Cell, int]) -> "Pattern":
        """Copy with ``cells`` added or overwritten; the bounding box grows as needed."""
        if not cells:
            return self
        xs = [c[0] for c in cells]
        ys = [c[1] for c in cells]
        bb = self.bbox
        if bb is None:
            return Pattern.from_cells(cells)
        x0, y0 = min(min(xs), bb.x0), min(min(ys), bb.y0)
        x1, y1 = max(max(xs) + 1, bb.x1), max(max(ys) + 1, bb.y1)
        out = self.restrict(Rect(x0, y0, x1 - x0, y1 - y0))
        bits = out.bits.copy()
        mask = out.domain_mask().copy()
        for (x, y), b in cells.items():
            bits[y - y0, x - x0] = 1 if b else 0
            mask[y - y0, x - x0] = True
        return Pattern(x0, y0, bits, mask)

    def paste(self, other: "Pattern") -> "Pattern":
        """Overlay ``other`` on top of ``self`` (other wins on overlaps)."""
        if other.bbox is None:
            return self
        if self.bbox is None:
            return other
        a, b = self.bbox, other.bbox
        x0, y0 = min(a.x0, b.x0), min(a.y0, b.y0)
        x1, y1 = max(a.x1, b.x1), max(a.y1, b.y1)
        out = self.restrict(Rect(x0, y0, x1 - x0, y1 - y0))
        bits = out.bits.copy()
        mask = out.domain_mask().copy()
        sl = (slice(b.y0 - y0, b.y1 - y0), slice(b.x0 - x0, b.x1 - x0))
        om = other.domain_mask()
        bits[sl] = np.where(om, other.bits, bits[sl])
        mask[sl] |= om
        return Pattern(x0, y0, bits, mask)

    def rotate_ccw(self) -> "Pattern":
        """Rotate the picture 90 degrees counterclockwise about the bounding box."""
        m = None if self.mask is None else np.rot90(self.mask)
        return Pattern(self.x0, self.y0, np.rot90(self.bits), m)

    def flip(self, cells: Iterable[Cell]) -> "Pattern":
        return self.with_cells({c: 1 - self[c] for c in cells})

    # value semantics

    def _key(self):
        m = self.domain_mask()
        return (self.x0, self.y0, self.bits.shape, self.bits.tobytes(), m.tobytes())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Pattern):
            return NotImplemented
        if self.bits.shape == other.bits.shape and (self.x0, self.y0) == (other.x0, other.y0):
            return self._key() == other._key()
        return self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.items()))
        return self._hash

    def __repr__(self) -> str:
        if self.bits.size <= 64:
            return f"Pattern({self.x0}, {self.y0}, {self.rows()!r})"
        return f"Pattern({self.x0}, {self.y0}, {self.width}x{self.height}, {len(self)} cells)"


class TriPattern:
    """Cells constrained to 0 or 1; every other cell is unconstrained (⊥)."""

    __slots__ = ("_cells",)

    def __init__(self, cells: Mapping[Cell, int] | None = None):
        self._cells = {tuple(c): (1 if b else 0) for c, b in (cells or {}).items()}

    @classmethod
    def from_pattern(cls, p: Pattern) -> "TriPattern":
        return cls(p.to_dict())

    @classmethod
    def from_rows(cls, rows: Iterable[str], x0: int = 0, y0: int = 0) -> "TriPattern":
        """'0'/'.' dead, '1'/'O' alive, '?' or '_' unconstrained."""
        cells = {}
        for y, row in enumerate(rows):
            for x, ch in enumerate(row):
                if ch in "?_":
                    continue
                cells[(x0 + x, y0 + y)] = 1 if ch in "1Oo*" else 0
        return cls(cells)

    def get(self, c: Cell) -> int | None:
        return self._cells.get(c)

    def items(self):
        return self._cells.items()

    def cells(self) -> set[Cell]:
        return set(self._cells)

    def __len__(self) -> int:
        return len(self._cells)

    def __contains__(self, c) -> bool:
        return c in self._cells

    def merge(self, other: "TriPattern") -> "TriPattern":
        """Union of constraints; raises if they disagree on a cell."""
        out = dict(self._cells)
        for c, b in other.items():
            if out.get(c, b) != b:
                raise ValueError(f"conflicting constraints at {c}")
            out[c] = b
        return TriPattern(out)

    def shift(self, v: Cell) -> "TriPattern":
        return TriPattern({(x - v[0], y - v[1]): b for (x, y), b in self._cells.items()})

    def compatible(self, p: Pattern) -> bool:
        return all(p.get(c) in (None, b) for c, b in self._cells.items())

    def __eq__(self, other) -> bool:
        return isinstance(other, TriPattern) and self._cells == other._cells

    def __hash__(self) -> int:
        return hash(frozenset(self._cells.items()))

    def __repr__(self) -> str:
        return f"TriPattern({len(self._cells)} cells)"


def shift(p: Pattern, v: Cell) -> Pattern:
    return p.shift(v)


# --- RLE -------------------------------------------------------------------

_HEADER = re.compile(r"^\s*x\s*=\s*(\d+)\s*,\s*y\s*=\s*(\d+)\s*(?:,\s*rule\s*=\s*([^\s,]+)\s*)?$",
                     re.IGNORECASE)


def parse_rle(text: bytes | str) -> Pattern:
    """Parse an RLE file into a rectangular pattern anchored at (0, 0)."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    lines = text.splitlines()
    i = 0
    while i < len(lines) and (lines[i].startswith("#") or not lines[i].strip()):
        i += 1
    if i == len(lines):
        raise RLEError("missing header", i + 1, 1)
    m = _HEADER.match(lines[i])
    if not m:
        raise RLEError(f"malformed header {lines[i]!r}", i + 1, 1)
    w, h = int(m.group(1)), int(m.group(2))
    rule = m.group(3)
    if rule is not None and rule.upper() not in ("B3/S23", "23/3"):
        raise RLEError(f"unsupported rule {rule}", i + 1, m.start(3) + 1)
    if w < 1 or h < 1:
        raise RLEError("empty bounds", i + 1, 1)
    bits = np.zeros((h, w), np.uint8)
    x = y = 0
    count = ""
    done = False
    for ln in range(i + 1, len(lines)):
        line = lines[ln]
        for col, ch in enumerate(line):
            pos = (ln + 1, col + 1)
            if ch.isdigit():
                count += ch
                continue
            if ch.isspace():
                if count:
                    raise RLEError("whitespace inside run count", *pos)
                continue
            n = int(count) if count else 1
            if count and n == 0:
                raise RLEError("run count 0", *pos)
            count = ""
            if ch == "!":
                done = True
                break
            if ch == "$":
                y += n
                x = 0
                if y > h:
                    raise RLEError("body exceeds declared height", *pos)
            elif ch in "bo":
                if y >= h or x + n > w:
                    raise RLEError("body exceeds declared bounds", *pos)
                if ch == "o":
                    bits[y, x:x + n] = 1
                x += n
            else:
                raise RLEError(f"unexpected character {ch!r}", *pos)
        if done:
            break
    if not done:
        raise RLEError("missing '!'", len(lines), 1)
    return Pattern(0, 0, bits)


def _row_runs(row: np.ndarray) -> list[tuple[int, int]]:
    """(value, length) runs of a 0/1 row, trailing dead run dropped."""
    n = row.size
    if n == 0:
        return []
    change = np.flatnonzero(np.diff(row.astype(np.int8))) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [n]))
    runs = [(int(row[s]), int(e - s)) for s, e in zip(starts, ends)]
    if runs and runs[-1][0] == 0:
        runs.pop()
    return runs


def emit_rle(p: Pattern, bounds: Rect | None = None) -> bytes:
    """Canonical RLE for ``p`` inside ``bounds`` (holes are written dead)."""
    if bounds is None:
        bounds = p.bbox or Rect(0, 0, 1, 1)
    bb = p.bbox
    if bb is not None and not bounds.contains_rect(bb):
        inside = p.restrict(bounds)
        if len(inside) != len(p):
            raise ValueError("bounds too small for pattern")
    grid = p.restrict(bounds).bits
    tokens: list[str] = []
    last = 0
    for y in range(grid.shape[0]):
        runs = _row_runs(grid[y])
        if not runs:
            continue
        gap = y - last
        if gap:
            tokens.append(f"{gap}$" if gap > 1 else "$")
        last = y
        for v, n in runs:
            tokens.append(f"{n if n > 1 else ''}{'o' if v else 'b'}")
    if not tokens:
        tokens.append("b")
    tokens.append("!")
    out = [f"x = {bounds.width}, y = {bounds.height}, rule = B3/S23"]
    line = ""
    for t in tokens:
        if len(line) + len(t) > 70:
            out.append(line)
            line = ""
        line += t
    out.append(line)
    return ("\n".join(out) + "\n").encode("ascii")


def parse_cells(text: bytes | str) -> Pattern:
    """Plaintext ``.cells`` reader ('!' comments, '.' dead, 'O' alive)."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    rows = [ln.rstrip("\r") for ln in text.splitlines() if not ln.startswith("!")]
    while rows and not rows[-1].strip():
        rows.pop()
    if not rows:
        return Pattern.empty()
    w = max(len(r) for r in rows)
    bits = np.zeros((len(rows), w), np.uint8)
    for y, r in enumerate(rows):
        for x, ch in enumerate(r):
            if ch in "O*":
                bits[y, x] = 1
            elif ch != ".":
                raise ValueError(f"unexpected character {ch!r} at row {y + 1}")
    return Pattern(0, 0, bits)
