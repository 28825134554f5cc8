"""The Game of Life rule and three CNF encodings of its local rule.

Neighbourhood assignments are 9-tuples in row-major order over
``(dx, dy) in [-1, 1]^2`` with ``dy`` outer: index 4 is the centre.
"""

from __future__ import annotations

import enum
import itertools
from typing import Callable, Sequence

import numpy as np

from . import sat
from .grid import Pattern, Rect

OFFSETS = [(dx, dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1)]
CENTER = 4


class EncodingKind(enum.Enum):
    DIVIDE_CONQUER = "dc"
    SORTING_NETWORK = "sort"
    MERGE = "merge"

    @classmethod
    def parse(cls, s: "str | EncodingKind") -> "EncodingKind":
        if isinstance(s, cls):
            return s
        for k in cls:
            if s in (k.value, k.name, k.name.lower()):
                return k
        raise ValueError(f"unknown encoding {s!r}")


def step_cell(n: Sequence[int]) -> int:
    """Next state of the centre of a 3x3 neighbourhood (sum includes the centre)."""
    if len(n) != 9:
        raise ValueError("need exactly 9 bits")
    s = sum(n)
    if n[CENTER]:
        return 1 if s in (3, 4) else 0
    return 1 if s == 3 else 0


def step_array(a: np.ndarray, wrap: bool = False) -> np.ndarray:
    """One step of a 0/1 array.

    Without ``wrap`` the result is the ``(h-2, w-2)`` interior; with ``wrap``
    the array is a torus and the result has the same shape.
    """
    a = a.astype(np.uint8)
    if wrap:
        s = sum(np.roll(np.roll(a, -dy, 0), -dx, 1) for dx, dy in OFFSETS)
        c = a
    else:
        h, w = a.shape
        s = sum(a[1 + dy:h - 1 + dy, 1 + dx:w - 1 + dx] for dx, dy in OFFSETS)
        c = a[1:-1, 1:-1]
    return ((s == 3) | ((c == 1) & (s == 4))).astype(np.uint8)


def step(p: Pattern, window: Rect) -> Pattern:
    """Image of ``p`` on ``window``; ``window`` grown by one must lie in the domain."""
    src = p.restrict(window.grow(1))
    if src.mask is not None:
        raise ValueError("pattern does not cover the window's neighbourhood (pad it explicitly)")
    return Pattern(window.x0, window.y0, step_array(src.bits))


# --- encodings ---------------------------------------------------------------

Fresh = Callable[[], int]


def _split(vs):
    h = len(vs) // 2
    return vs[:h], vs[h:]


def _atleast_cubes(vs, k):
    """Cubes (literal lists) whose disjunction says count(vs) >= k, built by halving."""
    if k <= 0:
        return [[]]
    if k > len(vs):
        return []
    if len(vs) == 1:
        return [[vs[0]]]
    left, right = _split(vs)
    out = []
    for i in range(0, k + 1):
        for a in _atleast_cubes(left, i):
            for b in _atleast_cubes(right, k - i):
                out.append(a + b)
    return _dedupe(out)


def _atmost_cubes(vs, k):
    if k >= len(vs):
        return [[]]
    if k < 0:
        return []
    if len(vs) == 1:
        return [[-vs[0]]]
    left, right = _split(vs)
    out = []
    for i in range(0, k + 1):
        for a in _atmost_cubes(left, i):
            for b in _atmost_cubes(right, k - i):
                out.append(a + b)
    return _dedupe(out)


def _exact_cubes(vs, k):
    if k < 0 or k > len(vs):
        return []
    if len(vs) == 1:
        return [[vs[0]]] if k == 1 else [[-vs[0]]]
    if not vs:
        return [[]] if k == 0 else []
    left, right = _split(vs)
    out = []
    for i in range(0, k + 1):
        for a in _exact_cubes(left, i):
            for b in _exact_cubes(right, k - i):
                out.append(a + b)
    return out


def _dedupe(cubes):
    seen = set()
    out = []
    for c in cubes:
        key = frozenset(c)
        if key not in seen:
            seen.add(key)
            out.append(sorted(set(c), key=abs))
    # drop cubes implied by (i.e. supersets of) shorter ones
    sets = [frozenset(c) for c in out]
    return [c for c, s in zip(out, sets) if not any(t < s for t in sets)]


def _encode_dc_template(center, nbrs, out):
    cls = []
    for cube in _atleast_cubes(nbrs, 4):          # k >= 4 -> dead
        cls.append([-l for l in cube] + [-out])
    for cube in _atmost_cubes(nbrs, 1):           # k <= 1 -> dead
        cls.append([-l for l in cube] + [-out])
    for cube in _atmost_cubes(nbrs, 2):           # k <= 2 and dead centre -> dead
        cls.append([-l for l in cube] + [center, -out])
    for cube in _exact_cubes(nbrs, 3):            # k == 3 -> alive
        cls.append([-l for l in cube] + [out])
    for cube in _exact_cubes(nbrs, 2):            # k == 2 and live centre -> alive
        cls.append([-l for l in cube] + [-center, out])
    return cls


# clauses over placeholders 1..8 (neighbours), 9 (centre), 10 (output)
_DC_TEMPLATE = _encode_dc_template(9, list(range(1, 9)), 10)


def _encode_dc(center, nbrs, out):
    names = [0, *nbrs, center, out]
    return [[names[l] if l > 0 else -names[-l] for l in c] for c in _DC_TEMPLATE]


def _comparator(a, b, fresh, cls):
    """hi = a | b, lo = a & b (full equivalences)."""
    hi, lo = fresh(), fresh()
    cls += [[-a, hi], [-b, hi], [a, b, -hi],
            [-a, -b, lo], [a, -lo], [b, -lo]]
    return hi, lo


def _oddeven_merge(seq, fresh, cls):
    """Batcher merge of a sequence whose two halves are sorted descending."""
    n = len(seq)
    if n <= 1:
        return list(seq)
    if n == 2:
        return list(_comparator(seq[0], seq[1], fresh, cls))
    evens = _oddeven_merge(seq[0::2], fresh, cls)
    odds = _oddeven_merge(seq[1::2], fresh, cls)
    out = [evens[0]]
    for i in range(1, n // 2):
        hi, lo = _comparator(odds[i - 1], evens[i], fresh, cls)
        out += [hi, lo]
    out.append(odds[-1])
    return out


def _oddeven_sort(seq, fresh, cls):
    if len(seq) <= 1:
        return list(seq)
    a, b = _split(seq)
    return _oddeven_merge(_oddeven_sort(a, fresh, cls) + _oddeven_sort(b, fresh, cls), fresh, cls)


def _totalizer(seq, fresh, cls):
    """Unary count of ``seq``: out[i] <-> count >= i + 1."""
    if len(seq) == 1:
        return [seq[0]]
    left, right = _split(seq)
    a = _totalizer(left, fresh, cls)
    b = _totalizer(right, fresh, cls)
    c = [fresh() for _ in range(len(a) + len(b))]
    p, q = len(a), len(b)
    for i in range(p + 1):
        for j in range(q + 1):
            # a_i & b_j -> c_{i+j}   (index 0 is the constant true)
            if i + j >= 1:
                cl = [c[i + j - 1]]
                if i:
                    cl.append(-a[i - 1])
                if j:
                    cl.append(-b[j - 1])
                cls.append(cl)
            # !a_{i+1} & !b_{j+1} -> !c_{i+j+1}
            if i + j < p + q:
                cl = [-c[i + j]]
                if i < p:
                    cl.append(a[i])
                if j < q:
                    cl.append(b[j])
                cls.append(cl)
    return c


def _rule_from_unary(center, s, out):
    """Clauses for out <-> (count==3) | (centre & count==2), given unary s[i] <-> count>=i+1."""
    s2, s3, s4 = s[1], s[2], s[3]
    return [[-out, s2], [-out, -s4], [-out, s3, center],
            [-s3, s4, out], [-center, -s2, s3, out]]


def encode_cell(kind: EncodingKind | str, in_vars: Sequence[int], out_var: int,
                fresh: Fresh) -> list[list[int]]:
    """Clauses forcing ``out_var`` to equal the rule applied to ``in_vars``."""
    kind = EncodingKind.parse(kind)
    if len(in_vars) != 9 or len(set(in_vars) | {out_var}) != 10:
        raise ValueError("need 9 distinct input variables and a distinct output")
    center = in_vars[CENTER]
    nbrs = [v for i, v in enumerate(in_vars) if i != CENTER]
    if kind is EncodingKind.DIVIDE_CONQUER:
        return _encode_dc(center, nbrs, out_var)
    cls: list[list[int]] = []
    if kind is EncodingKind.SORTING_NETWORK:
        s = _oddeven_sort(nbrs, fresh, cls)
    else:
        s = _totalizer(nbrs, fresh, cls)
    return cls + _rule_from_unary(center, s, out_var)


def encode_cell_const(kind, in_vars, value: int, fresh: Fresh) -> list[list[int]]:
    """Same as :func:`encode_cell` with the output fixed to a constant."""
    out = fresh()
    return encode_cell(kind, in_vars, out, fresh) + [[out if value else -out]]


def all_neighbourhoods():
    return itertools.product((0, 1), repeat=9)


def check_encoding(kind: EncodingKind | str, backend: str | None = None) -> tuple[int, int, list]:
    """Exhaustive check of one encoding against :func:`step_cell`.

    For each of the 512 neighbourhoods the correct output must be SAT and the
    wrong one UNSAT.  Returns (SAT checks passed, UNSAT checks passed, failures).
    """
    ins = list(range(1, 10))
    cnf = sat.CnfInstance(10)
    cnf.extend(encode_cell(kind, ins, 10, cnf.pool()))
    pos = neg = 0
    bad = []
    with sat.open_session(cnf, backend) as s:
        for n in all_neighbourhoods():
            want = step_cell(n)
            assume = [v if b else -v for v, b in zip(ins, n)]
            if s.solve(assume + [10 if want else -10]):
                pos += 1
            else:
                bad.append((n, want))
            if not s.solve(assume + [-10 if want else 10]):
                neg += 1
            else:
                bad.append((n, 1 - want))
    return pos, neg, bad
