"""Preimage existence, enumeration, orphans and diamonds as SAT problems."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import sat
from .grid import Cell, Pattern, Rect, TriPattern
from .lifestep import OFFSETS, EncodingKind, encode_cell_const


@dataclass(frozen=True)
class Free:
    """Preimage on the image domain grown by the rule radius; nothing else assumed."""


@dataclass(frozen=True)
class ZeroPadded:
    """The image is surrounded by ``thickness`` rings of dead cells before solving."""
    thickness: int = 4

    def __post_init__(self):
        if self.thickness < 0:
            raise ValueError("thickness must be >= 0")


@dataclass(frozen=True)
class Torus:
    """Image and preimage are ``px`` x ``py`` periodic; the image is one fundamental domain."""
    px: int
    py: int

    def __post_init__(self):
        if self.px < 1 or self.py < 1:
            raise ValueError("periods must be >= 1")


BoundaryMode = Free | ZeroPadded | Torus


def parse_mode(s: str) -> BoundaryMode:
    """``free``, ``zero:<t>`` or ``torus:<px>x<py>``."""
    if s == "free":
        return Free()
    if s.startswith("zero"):
        _, _, t = s.partition(":")
        return ZeroPadded(int(t) if t else 4)
    if s.startswith("torus:"):
        px, _, py = s[6:].partition("x")
        return Torus(int(px), int(py))
    raise ValueError(f"unknown boundary mode {s!r}")


@dataclass
class PreimageQuery:
    image: Pattern
    mode: BoundaryMode = field(default_factory=Free)
    constraints: TriPattern = field(default_factory=TriPattern)
    encoding: EncodingKind | str = EncodingKind.DIVIDE_CONQUER


def neighbourhood(c: Cell) -> list[Cell]:
    return [(c[0] + dx, c[1] + dy) for dx, dy in OFFSETS]


def preimage_window(image: Pattern) -> set[Cell]:
    """D(P) + [-1, 1]^2."""
    out = set()
    for c in image.domain():
        out.update(neighbourhood(c))
    return out


class PreimageCnf:
    """A CNF whose annotated variables are the preimage cells ``('x', cell)``."""

    def __init__(self, cnf: sat.CnfInstance, cells: Sequence[Cell], tag=None,
                 wrap: tuple[int, int, int, int] | None = None):
        self.cnf = cnf
        self.cells = list(cells)
        self.tag = tag
        self._wrap = wrap

    def var(self, c: Cell) -> int:
        if self._wrap is not None:
            x0, y0, px, py = self._wrap
            c = (x0 + (c[0] - x0) % px, y0 + (c[1] - y0) % py)
        return self.cnf.annotations[("x", c) if self.tag is None else ("x", c, self.tag)]

    def decode(self, model: Mapping[int, bool]) -> Pattern:
        return Pattern.from_cells({c: int(model[self.var(c)]) for c in self.cells})

    def lits(self, cells: Mapping[Cell, int]) -> list[int]:
        return [self.var(c) if b else -self.var(c) for c, b in cells.items()]


def _add_copy(cnf: sat.CnfInstance, image: Pattern, mode: BoundaryMode,
              constraints: TriPattern, encoding, tag=None) -> PreimageCnf:
    """Add one copy of the preimage problem to ``cnf``; ``tag`` namespaces the variables."""
    encoding = EncodingKind.parse(encoding)
    fresh = cnf.pool()

    def key(c):
        return ("x", c) if tag is None else ("x", c, tag)

    if isinstance(mode, Torus):
        bb = image.bbox
        if bb is None or not image.is_rectangular() or (bb.width, bb.height) != (mode.px, mode.py):
            raise ValueError("torus image must be exactly one px x py fundamental domain")
        cells = list(bb.cells())
        for c in cells:
            cnf.var(key(c))
        out = PreimageCnf(cnf, cells, tag, (bb.x0, bb.y0, mode.px, mode.py))
        for c, b in image.items():
            cnf.extend(encode_cell_const(encoding, _distinct(cnf, [out.var(n) for n in neighbourhood(c)]),
                                         b, fresh))
        for c, b in constraints.items():
            cnf.add(out.lits({c: b}))
        return out

    if isinstance(mode, ZeroPadded) and mode.thickness > 0:
        bb = image.bbox
        if bb is None:
            raise ValueError("cannot pad an empty image")
        padded = Pattern.zeros(bb.grow(mode.thickness)).paste(image)
        image = padded
    window = sorted(preimage_window(image), key=lambda c: (c[1], c[0]))
    wset = set(window)
    for c in window:
        cnf.var(key(c))
    for c, b in image.items():
        cnf.extend(encode_cell_const(encoding, [cnf.annotations[key(n)] for n in neighbourhood(c)],
                                     b, fresh))
    for c, b in constraints.items():
        if c not in wset:
            raise ValueError(f"constraint cell {c} lies outside the preimage window")
        v = cnf.annotations[key(c)]
        cnf.add([v if b else -v])
    return PreimageCnf(cnf, window, tag)


def _distinct(cnf: sat.CnfInstance, vs: list[int]) -> list[int]:
    """Periods below 3 wrap a neighbourhood onto itself; alias repeats with equal fresh variables."""
    seen = set()
    out = []
    for v in vs:
        if v in seen:
            w = cnf.new_var()
            cnf.extend([[-w, v], [w, -v]])
            v = w
        seen.add(v)
        out.append(v)
    return out


def build_instance(q: PreimageQuery) -> PreimageCnf:
    cnf = sat.CnfInstance()
    return _add_copy(cnf, q.image, q.mode, q.constraints, q.encoding)


def build(q: PreimageQuery) -> sat.CnfInstance:
    return build_instance(q).cnf


def has_preimage(q: PreimageQuery, backend: str | None = None) -> bool:
    return bool(sat.solve(build(q), backend=backend))


def find_preimage(q: PreimageQuery, backend: str | None = None) -> Pattern | None:
    inst = build_instance(q)
    res = sat.solve(inst.cnf, backend=backend)
    return inst.decode(res.model) if res else None


def restrictions(q: PreimageQuery, cells: Iterable[Cell], limit: int | None = None,
                 backend: str | None = None) -> list[dict[Cell, int]]:
    """Distinct restrictions of preimages to ``cells`` (at most ``limit``)."""
    inst = build_instance(q)
    cells = list(cells.cells() if isinstance(cells, Rect) else cells)
    proj = [inst.var(c) for c in cells]
    models = sat.enumerate_models(inst.cnf, proj, limit, backend=backend)
    return [{c: int(b) for c, b in zip(cells, m)} for m in models]


def count_restrictions(q: PreimageQuery, window, limit: int | None = None,
                       backend: str | None = None) -> int:
    return len(restrictions(q, window, limit, backend))


def is_orphan(p: Pattern, encoding=EncodingKind.DIVIDE_CONQUER, backend: str | None = None) -> bool:
    return not has_preimage(PreimageQuery(p, Free(), TriPattern(), encoding), backend)


def border_ring(cells: Iterable[Cell], depth: int) -> set[Cell]:
    """Cells of ``cells`` within Chebyshev distance ``depth`` of a cell outside the set."""
    cells = set(cells)
    ring = set()
    for (x, y) in cells:
        if any((x + dx, y + dy) not in cells
               for dx in range(-depth, depth + 1) for dy in range(-depth, depth + 1)):
            ring.add((x, y))
    return ring


@dataclass
class Diamond:
    forced_side: Pattern    # preimage whose window restriction is forced
    stray_side: Pattern     # preimage whose window restriction is not forced


def find_diamond(p: Pattern, q_i: TriPattern, forced: Iterable[Mapping[Cell, int]],
                 window: Iterable[Cell], border_depth: int = 2,
                 encoding=EncodingKind.DIVIDE_CONQUER, backend: str | None = None) -> Diamond | None:
    """Two q_i-compatible preimages agreeing near the border, one forced and one not.

    Window cells outside the preimage window of ``p`` are unconstrained by
    ``p`` and count as border: both preimages agree there.
    """
    window = sorted(window.cells() if isinstance(window, Rect) else window)
    forced = [dict(f) for f in forced]
    pw = preimage_window(p) if p.bbox is not None else set()
    outside = [c for c in window if c not in pw]
    cnf = sat.CnfInstance()
    a = _add_copy(cnf, p, Free(), TriPattern({c: v for c, v in q_i.items() if c in pw}), encoding, tag="a")
    b = _add_copy(cnf, p, Free(), TriPattern({c: v for c, v in q_i.items() if c in pw}), encoding, tag="b")
    for c in outside:
        for t in ("a", "b"):
            v = cnf.var(("x", c, t))
            if q_i.get(c) is not None:
                cnf.add([v if q_i.get(c) else -v])
    for c in border_ring(pw, border_depth) | set(outside):
        va, vb = a.var(c), b.var(c)
        cnf.extend([[-va, vb], [va, -vb]])
    if not forced:
        return None
    sel = [cnf.new_var() for _ in forced]
    cnf.add(sel)
    for s, f in zip(sel, forced):
        for c in window:
            lit = a.var(c) if f[c] else -a.var(c)
            cnf.add([-s, lit])
        cnf.add([(-b.var(c) if f[c] else b.var(c)) for c in window])
    res = sat.solve(cnf, backend=backend)
    if not res:
        return None
    return Diamond(a.decode(res.model), b.decode(res.model))


# --- brute force (test oracle) -------------------------------------------------

def brute_force_preimages(image: Pattern) -> np.ndarray:
    """All preimages of a small rectangular image as an ``(n, h+2, w+2)`` array."""
    bb = image.bbox
    h, w = bb.height + 2, bb.width + 2
    k = h * w
    if k > 24:
        raise ValueError("too large for brute force")
    idx = np.arange(1 << k, dtype=np.uint32)
    bits = ((idx[:, None] >> np.arange(k, dtype=np.uint32)) & 1).astype(np.uint8).reshape(-1, h, w)
    s = sum(bits[:, 1 + dy:h - 1 + dy, 1 + dx:w - 1 + dx] for dx, dy in OFFSETS)
    c = bits[:, 1:-1, 1:-1]
    img = (s == 3) | ((c == 1) & (s == 4))
    ok = (img == image.bits.astype(bool)).all(axis=(1, 2))
    return bits[ok]


def brute_force_has_preimage(image: Pattern) -> bool:
    a = image.bits
    h, w = a.shape
    k = (h + 2) * (w + 2)
    if k > 24:
        raise ValueError("too large")
    return brute_force_preimages(image).shape[0] > 0


__all__ = [
    "Free", "ZeroPadded", "Torus", "BoundaryMode", "PreimageQuery", "PreimageCnf",
    "build", "build_instance", "has_preimage", "find_preimage", "restrictions",
    "count_restrictions", "is_orphan", "find_diamond", "Diamond", "border_ring",
    "preimage_window", "parse_mode", "brute_force_preimages", "brute_force_has_preimage",
]
