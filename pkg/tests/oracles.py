"""Brute-force oracles shared by the unit and acceptance tests."""

import itertools

import numpy as np

from lifepre.grid import Pattern
from lifepre.lifestep import OFFSETS
from lifepre.preimage import border_ring, brute_force_preimages, preimage_window


def all_images(w, h):
    for bits in itertools.product((0, 1), repeat=w * h):
        yield Pattern(0, 0, np.array(bits, np.uint8).reshape(h, w))


def images_with_preimage_3x3(chunk_bits=20):
    """Set of 9-bit codes of 3x3 images that have a preimage, by running all 2**25 windows."""
    seen = np.zeros(512, bool)
    weights = (1 << np.arange(9)).reshape(3, 3)
    lo = np.arange(1 << chunk_bits, dtype=np.uint32)
    lo_bits = ((lo[:, None] >> np.arange(chunk_bits, dtype=np.uint32)) & 1).astype(np.uint8)
    for hi in range(1 << (25 - chunk_bits)):
        hi_bits = np.array([(hi >> i) & 1 for i in range(25 - chunk_bits)], np.uint8)
        bits = np.concatenate([lo_bits, np.broadcast_to(hi_bits, (lo.size, hi_bits.size))], axis=1)
        a = bits.reshape(-1, 5, 5)
        s = sum(a[:, 1 + dy:4 + dy, 1 + dx:4 + dx] for dx, dy in OFFSETS)
        c = a[:, 1:4, 1:4]
        img = ((s == 3) | ((c == 1) & (s == 4))).astype(np.int64)
        codes = (img * weights).sum(axis=(1, 2))
        seen[np.unique(codes)] = True
    return seen


def image_code(p):
    return int((p.bits.astype(np.int64) * (1 << np.arange(9)).reshape(3, 3)).sum())


def brute_force_diamond(p, q_i, forced, window, border_depth):
    """Decide the diamond question by listing every preimage."""
    pre = brute_force_preimages(p)
    x0, y0 = p.x0 - 1, p.y0 - 1
    pw = preimage_window(p)
    keep = np.ones(len(pre), bool)
    for (x, y), b in q_i.items():
        if (x, y) in pw:
            keep &= pre[:, y - y0, x - x0] == b
    pre = pre[keep]
    ring = sorted(border_ring(pw, border_depth))
    window = sorted(window)
    forced = {tuple(f[c] for c in window) for f in forced}
    groups = {}
    for q in pre:
        key = tuple(int(q[y - y0, x - x0]) for x, y in ring)
        r = tuple(int(q[y - y0, x - x0]) for x, y in window)
        g = groups.setdefault(key, [False, False])
        g[0 if r in forced else 1] = True
    return any(a and b for a, b in groups.values())


def restrictions_3x3(p, cells, chunk_bits=20):
    """Restrictions to ``cells`` of every preimage of a 3x3 image at the origin, by listing all 2**25 windows."""
    want = p.bits.astype(bool)
    lo = np.arange(1 << chunk_bits, dtype=np.uint32)
    lo_bits = ((lo[:, None] >> np.arange(chunk_bits, dtype=np.uint32)) & 1).astype(np.uint8)
    idx = [(y + 1) * 5 + (x + 1) for x, y in cells]
    out = set()
    for hi in range(1 << (25 - chunk_bits)):
        hi_bits = np.array([(hi >> i) & 1 for i in range(25 - chunk_bits)], np.uint8)
        bits = np.concatenate([lo_bits, np.broadcast_to(hi_bits, (lo.size, hi_bits.size))], axis=1)
        a = bits.reshape(-1, 5, 5)
        s = sum(a[:, 1 + dy:4 + dy, 1 + dx:4 + dx] for dx, dy in OFFSETS)
        img = (s == 3) | ((a[:, 1:4, 1:4] == 1) & (s == 4))
        ok = (img == want).all(axis=(1, 2))
        out |= set(map(tuple, np.unique(bits[ok][:, idx], axis=0).tolist()))
    return out


# tile semantics written out independently of the circuit module
_SAME = set("-|LJ7rS")


def _tile_ok(ch, sig):
    if ch == ".":
        return True
    if ch in _SAME:
        return len(set(sig.values())) == 1
    if ch == "N":
        return sig["E"] != sig["W"]
    if ch == "T":
        return sig["E"] == 1
    if ch == "X":
        return sig["N"] == sig["S"] and sig["E"] == sig["W"]
    if ch == "O":
        return sig["E"] == (sig["N"] or sig["S"])
    raise ValueError(ch)


_STUBS = {".": "", "-": "EW", "|": "NS", "L": "EN", "J": "NW", "7": "WS", "r": "ES",
          "N": "EW", "T": "E", "S": "ENS", "X": "ENWS", "O": "ENS"}


def circuit_solutions(rows):
    """All edge assignments of a closed circuit given as text rows, by exhaustive search.

    Tiles are checked as soon as all their edges are set, which prunes but
    never skips an assignment.
    """
    def edge(r, c, s):
        return {"E": ("h", r, c), "W": ("h", r, c - 1), "S": ("v", r, c), "N": ("v", r - 1, c)}[s]
    tiles = [(r, c, ch) for r, row in enumerate(rows) for c, ch in enumerate(row)]
    edges = sorted({edge(r, c, s) for r, c, ch in tiles for s in _STUBS[ch]})
    pos = {e: i for i, e in enumerate(edges)}
    due = [[] for _ in edges]
    free_tiles = []
    for r, c, ch in tiles:
        es = {s: edge(r, c, s) for s in _STUBS[ch]}
        if es:
            due[max(pos[e] for e in es.values())].append((ch, es))
        else:
            free_tiles.append(ch)
    out = []
    a = {}

    def rec(i):
        if i == len(edges):
            out.append(dict(a))
            return
        for b in (0, 1):
            a[edges[i]] = b
            if all(_tile_ok(ch, {s: a[e] for s, e in es.items()}) for ch, es in due[i]):
                rec(i + 1)
        del a[edges[i]]
    if all(_tile_ok(ch, {}) for ch in free_tiles):
        rec(0)
    return out
