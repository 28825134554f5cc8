"""Gadget discovery: a backtracking hill climber and a genetic charger search.

Both searches work on images.  The hill climber grows a partial pattern
``P`` cell by cell so that the preimages of ``P`` compatible with each
context ``q_i``, restricted to the domain ``D``, become exactly the forced
set ``F_i``.  The genetic search looks for a charger: a rectangle whose top
edge carries a wire stub that every preimage charges.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import sat
from .gadget import Orientation, wire_signal_cells
from .grid import Cell, Pattern, Rect, TriPattern
from .lifestep import EncodingKind
from .preimage import Free, _add_copy, find_diamond, preimage_window

INF = math.inf
_NBRS = [(dx, dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dx, dy) != (0, 0)]


# --- problem --------------------------------------------------------------------------

@dataclass
class HillProblem:
    """Domains ``D_j``, contexts ``q_i`` with forced sets ``F_i``, hard constraint ``p`` and tuning.

    Forced patterns are dicts over the whole domain ``D``.  ``bounds`` limits
    where the climber may specify cells (default: ``D``'s bounding box grown
    by 3).  ``overflow`` says what an enumeration past ``limit`` means:
    ``"invalid"`` (infinite score) or ``"truncate"`` (score of the
    enumerated part, flagged).
    """
    domains: list[frozenset]
    contexts: list[TriPattern]
    forced: list[list[dict]]
    constraint: TriPattern = field(default_factory=TriPattern)
    bounds: Rect | None = None
    max_width: int = 3
    rect_tries: int = 30
    rect_size: int = 3
    merge_threshold: int = 4
    limit: int = 4096
    overflow: str = "invalid"
    period: Cell | None = None
    border_depth: int = 2
    crevice: int = 5
    encoding: EncodingKind | str = EncodingKind.DIVIDE_CONQUER
    backend: str | None = None

    def __post_init__(self):
        self.domains = [frozenset(d) for d in self.domains]
        if not self.domains or any(not d for d in self.domains):
            raise ValueError("domains must be nonempty")
        if len(self.forced) != len(self.contexts):
            raise ValueError("one forced set per context")
        D = self.cells
        for F in self.forced:
            if not F:
                raise ValueError("forced sets must be nonempty")
            for Q in F:
                if set(Q) != set(D):
                    raise ValueError("forced patterns must cover the whole domain")
        if self.overflow not in ("invalid", "truncate"):
            raise ValueError("overflow is 'invalid' or 'truncate'")

    @property
    def cells(self) -> list[Cell]:
        return sorted(set().union(*self.domains))

    def region(self) -> Rect:
        if self.bounds is not None:
            return self.bounds
        xs = [c[0] for c in self.cells]
        ys = [c[1] for c in self.cells]
        return Rect(min(xs), min(ys), max(xs) - min(xs) + 1, max(ys) - min(ys) + 1).grow(3)


def merge_domains(prob: HillProblem, j1: int, j2: int) -> HillProblem:
    if j1 == j2:
        return prob
    doms = [d for j, d in enumerate(prob.domains) if j not in (j1, j2)]
    doms.append(prob.domains[j1] | prob.domains[j2])
    return replace(prob, domains=doms)


def problem_to_json(prob: HillProblem) -> dict:
    def tri(t):
        return [[x, y, b] for (x, y), b in sorted(t.items())]
    D = prob.cells
    return {
        "domains": [sorted(map(list, d)) for d in prob.domains],
        "contexts": [tri(q) for q in prob.contexts],
        "forced": [["".join(str(Q[c]) for c in D) for Q in F] for F in prob.forced],
        "constraint": tri(prob.constraint),
        "bounds": None if prob.bounds is None else [prob.bounds.x0, prob.bounds.y0,
                                                    prob.bounds.width, prob.bounds.height],
        "params": {k: getattr(prob, k) for k in ("max_width", "rect_tries", "rect_size", "merge_threshold",
                                                  "limit", "overflow", "border_depth", "crevice")},
    }


def problem_from_json(d: Mapping) -> HillProblem:
    """Forced patterns are bit strings over the sorted domain cells."""
    def tri(rows):
        return TriPattern({(x, y): b for x, y, b in rows})
    domains = [frozenset(tuple(c) for c in dom) for dom in d["domains"]]
    D = sorted(set().union(*domains))
    forced = []
    for F in d["forced"]:
        if any(len(s) != len(D) for s in F):
            raise ValueError("forced bit strings must have one bit per domain cell")
        forced.append([{c: int(ch) for c, ch in zip(D, s)} for s in F])
    b = d.get("bounds")
    return HillProblem(domains, [tri(q) for q in d.get("contexts", [[]])], forced,
                       tri(d.get("constraint", [])), None if b is None else Rect(*b), **d.get("params", {}))


def load_problem(path) -> HillProblem:
    return problem_from_json(json.loads(Path(path).read_text()))


# --- scoring --------------------------------------------------------------------------

@dataclass
class Evaluation:
    score: float
    reason: str | None = None                  # why the pattern is invalid
    qsizes: dict = field(default_factory=dict)  # (i, j) -> |Q_(i,j)|
    truncated: bool = False

    @property
    def valid(self) -> bool:
        return self.score < INF


def _instance(p: Pattern, q: TriPattern, prob: HillProblem):
    cnf = sat.CnfInstance()
    pw = preimage_window(p) if p.bbox is not None else set()
    _add_copy(cnf, p, Free(), TriPattern({c: b for c, b in q.items() if c in pw}), prob.encoding)
    for c in prob.cells:
        if c not in pw:
            v = cnf.var(("x", c))
            if q.get(c) is not None:
                cnf.add([v if q.get(c) else -v])
    return cnf, (lambda c: cnf.annotations[("x", c)])


def _contradicts(p: Pattern, constraint: TriPattern) -> bool:
    for c, b in constraint.items():
        v = p.get(c)
        if v is not None and v != b:
            return True
    return False


def evaluate(p: Pattern, prob: HillProblem) -> Evaluation:
    """Score and validity of ``p``: the published double sum, or infinity if invalid."""
    if _contradicts(p, prob.constraint):
        return Evaluation(INF, "contradicts the hard constraint")
    D = prob.cells
    total = 0.0
    qsizes = {}
    truncated = False
    for i, (q, F) in enumerate(zip(prob.contexts, prob.forced)):
        cnf, var = _instance(p, q, prob)
        with sat.open_session(cnf, prob.backend) as s:
            for Q in F:
                if not s.solve([var(c) if Q[c] else -var(c) for c in D]):
                    return Evaluation(INF, f"forced pattern of context {i} has no preimage")
        if find_diamond(p, q, F, D, prob.border_depth, prob.encoding, prob.backend) is not None:
            return Evaluation(INF, f"diamond in context {i}")
        for j, Dj in enumerate(prob.domains):
            Dj = sorted(Dj)
            proj = [var(c) for c in Dj]
            seen = sat.enumerate_models(cnf, proj, prob.limit + 1, backend=prob.backend)
            if len(seen) > prob.limit:
                if prob.overflow == "invalid":
                    return Evaluation(INF, f"more than {prob.limit} restrictions")
                truncated = True
                seen = seen[:prob.limit]
            total += domain_term(Dj, [{c: int(b) for c, b in zip(Dj, m)} for m in seen], F)
            fr = {tuple(Q[c] for c in Dj) for Q in F}
            qsizes[(i, j)] = sum(tuple(int(b) for b in m) not in fr for m in seen)
    return Evaluation(total, None, qsizes, truncated)


def domain_term(Dj: Sequence[Cell], restrictions: Iterable[Mapping[Cell, int]], F: Sequence[Mapping]) -> float:
    """``(1/|D_j|) log(1 + sum_R M(R)/|D_j|)`` over the stray restrictions ``R``."""
    n = len(Dj)
    fr = {tuple(Q[c] for c in Dj) for Q in F}
    acc = 0.0
    for R in restrictions:
        key = tuple(R[c] for c in Dj)
        if key in fr:
            continue
        agree = max(sum(R[c] == Q[c] for c in Dj) for Q in F)
        acc += (1 + agree) / n
    return math.log1p(acc) / n


def score(p: Pattern, prob: HillProblem) -> float:
    return evaluate(p, prob).score


def is_valid(p: Pattern, prob: HillProblem) -> tuple[bool, str | None]:
    e = evaluate(p, prob)
    return e.valid, e.reason


# --- hill climbing --------------------------------------------------------------------

@dataclass
class SearchNode:
    pattern: Pattern
    score: float
    frontier: list = field(default_factory=list)   # untried (score, extension), best first
    parent: "SearchNode | None" = None


@dataclass
class HillResult:
    success: bool
    pattern: Pattern
    score: float
    problem: HillProblem
    trace: list
    evaluations: int
    rounds: int = 0


def outer_border(p: Pattern, region: Rect) -> list[Cell]:
    dom = set(p.domain())
    out = set()
    for (x, y) in dom:
        for dx, dy in _NBRS:
            c = (x + dx, y + dy)
            if c not in dom and c in region:
                out.add(c)
    return sorted(out, key=lambda c: (c[1], c[0]))


def _specified_neighbours(p: Pattern, c: Cell) -> int:
    return sum(p.get((c[0] + dx, c[1] + dy)) is not None for dx, dy in _NBRS)


def _with_period(ext: Mapping[Cell, int], prob: HillProblem, region: Rect) -> dict:
    if prob.period is None:
        return dict(ext)
    dx, dy = prob.period
    out = {}
    for (x, y), b in ext.items():
        for k in range(-max(region.width, region.height), max(region.width, region.height) + 1):
            c = (x + k * dx, y + k * dy)
            if c in region:
                out[c] = b
    return out


def _connected_sets(cells: Sequence[Cell], k: int) -> list[tuple[Cell, ...]]:
    """Orthogonally connected ``k``-subsets of ``cells``."""
    cs = set(cells)
    found = set()

    def grow(cur):
        if len(cur) == k:
            found.add(tuple(sorted(cur)))
            return
        for (x, y) in cur:
            for d in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                n = (x + d[0], y + d[1])
                if n in cs and n not in cur:
                    grow(cur | {n})
    for c in cells:
        grow(frozenset([c]))
    return sorted(found)


class _Scorer:
    def __init__(self, prob: HillProblem, jobs: int = 1):
        self.prob = prob
        self.count = 0
        self.jobs = jobs

    def __call__(self, p: Pattern) -> Evaluation:
        self.count += 1
        return evaluate(p, self.prob)

    def many(self, pats: Sequence[Pattern]) -> list[Evaluation]:
        self.count += len(pats)
        if self.jobs > 1 and len(pats) > 1:
            with ProcessPoolExecutor(self.jobs) as ex:
                return list(ex.map(evaluate, pats, itertools.repeat(self.prob)))
        return [evaluate(p, self.prob) for p in pats]


def _journal(path: Path | None, event: dict) -> None:
    if path is not None:
        with path.open("a") as f:
            f.write(json.dumps(event) + "\n")


def _cells_json(ext: Mapping[Cell, int]) -> list:
    return [[x, y, b] for (x, y), b in sorted(ext.items())]


def load_journal(path) -> tuple[list[dict], Pattern]:
    """Replay a checkpoint journal; returns its events and the last accepted pattern."""
    path = Path(path)
    if path.is_dir():
        path = path / "journal.jsonl"
    events = [json.loads(line) for line in path.read_text().splitlines() if line.strip()]
    p = Pattern.empty()
    for e in events:
        if e["event"] in ("start", "backtrack"):
            p = Pattern.from_cells({(x, y): b for x, y, b in e["pattern"]})
        elif e["event"] in ("accept", "crevice", "complete"):
            p = p.with_cells({(x, y): b for x, y, b in e["cells"]})
    return events, p


def hill_climb(prob: HillProblem, budget: int, seed: int = 0, start: Pattern | None = None,
               checkpoint=None, jobs: int = 1, log=None) -> HillResult:
    """Backtracking hill climb; ``budget`` caps the number of score evaluations.

    Every accepted step is journaled (``checkpoint/journal.jsonl``) with the
    scores before and after, so the search can be replayed and its
    acceptance rule audited.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    rng = random.Random(seed)
    jpath = None
    if checkpoint is not None:
        Path(checkpoint).mkdir(parents=True, exist_ok=True)
        jpath = Path(checkpoint) / "journal.jsonl"
        jpath.write_text("")
    trace: list[dict] = []

    rounds = 0

    def emit(ev):
        ev["round"] = rounds
        trace.append(ev)
        _journal(jpath, ev)
        if log is not None:
            log(ev)

    scorer = _Scorer(prob, jobs)
    p0 = start if start is not None else Pattern.empty()
    ev0 = scorer(p0)
    cur = SearchNode(p0, ev0.score)
    cur_ev = ev0
    emit({"event": "start", "seed": seed, "pattern": _cells_json(p0.to_dict()), "score": ev0.score})
    best = cur
    region = prob.region()

    def accept(node, ext, ev, kind):
        nonlocal cur, cur_ev, best
        child = SearchNode(node.pattern.with_cells(ext), ev.score, parent=node)
        emit({"event": kind, "cells": _cells_json(ext), "before": node.score, "after": ev.score})
        cur, cur_ev = child, ev
        if ev.score < best.score or (ev.score == best.score and len(child.pattern) > len(best.pattern)):
            best = child

    while scorer.count < budget:
        rounds += 1
        if not cur_ev.valid:
            break
        if cur.score == 0:
            if len(prob.domains) > 1:
                while len(scorer.prob.domains) > 1:
                    scorer.prob = merge_domains(scorer.prob, 0, 1)
                prob = scorer.prob
                before = cur.score
                cur_ev = scorer(cur.pattern)
                cur.score = cur_ev.score
                emit({"event": "merge", "domains": len(prob.domains), "before": before, "after": cur.score})
                best = cur
                continue
            done = _complete(cur.pattern, scorer, region)
            if done is None:
                emit({"event": "complete-failed"})
                break
            ext = {c: b for c, b in done.items() if cur.pattern.get(c) is None}
            final = cur.pattern.with_cells(ext)
            emit({"event": "complete", "cells": _cells_json(ext), "before": 0.0, "after": 0.0})
            return HillResult(True, final, 0.0, prob, trace, scorer.count, rounds)

        # merge domains whose stray sets have become small
        if len(prob.domains) > 1 and cur_ev.qsizes:
            small = [j for j in range(len(prob.domains))
                     if max(cur_ev.qsizes.get((i, j), 0) for i in range(len(prob.contexts))) <= prob.merge_threshold]
            if len(small) >= 2:
                scorer.prob = prob = merge_domains(prob, small[0], small[1])
                before = cur.score
                cur_ev = scorer(cur.pattern)
                cur.score = cur_ev.score
                emit({"event": "merge", "domains": len(prob.domains), "before": before, "after": cur.score})
                if cur.score == INF:
                    break
                continue

        border = outer_border(cur.pattern, region) if cur.pattern.bbox is not None else \
            sorted((c for c in prob.cells if c in region), key=lambda c: (c[1], c[0]))
        if not border:
            nxt = _backtrack(cur, scorer)
            if nxt is None:
                break
            node, ext, ev = nxt
            accept(node, ext, ev, "backtrack-accept")
            continue

        # crevices first
        crev = [c for c in border if _specified_neighbours(cur.pattern, c) >= prob.crevice]
        if crev:
            exts = [_with_period({c: b}, prob, region) for c in crev for b in (0, 1)]
            evs = scorer.many([cur.pattern.with_cells(e) for e in exts])
            k = min(range(len(exts)), key=lambda t: evs[t].score)
            if evs[k].score <= cur.score:
                accept(cur, exts[k], evs[k], "crevice")
                continue

        exts = [_with_period({c: b}, prob, region) for c in border for b in (0, 1)]
        evs = scorer.many([cur.pattern.with_cells(e) for e in exts])
        ranked = sorted(((ev.score, t) for t, ev in enumerate(evs) if ev.valid), key=lambda x: x[0])
        cur.frontier = [(sc, exts[t], evs[t]) for sc, t in ranked]
        if cur.frontier and cur.frontier[0][0] < cur.score:
            sc, ext, ev = cur.frontier.pop(0)
            accept(cur, ext, ev, "accept")
            continue

        found = None
        for k in range(2, prob.max_width + 1):
            if scorer.count >= budget:
                break
            sets = _connected_sets(border, k)
            cands = [_with_period(dict(zip(cells, bits)), prob, region)
                     for cells in sets for bits in itertools.product((0, 1), repeat=k)]
            evs = scorer.many([cur.pattern.with_cells(e) for e in cands])
            if evs:
                t = min(range(len(cands)), key=lambda t: evs[t].score)
                if evs[t].score < cur.score:
                    found = (cands[t], evs[t])
                    break
        if found is None:
            for _ in range(prob.rect_tries):
                if scorer.count >= budget:
                    break
                ext = _random_rect(cur.pattern, border, prob, region, rng)
                if not ext:
                    continue
                ev = scorer(cur.pattern.with_cells(ext))
                if ev.score < cur.score:
                    found = (ext, ev)
                    break
        if found is not None:
            accept(cur, found[0], found[1], "accept")
            continue

        nxt = _backtrack(cur, scorer)
        if nxt is None:
            emit({"event": "exhausted"})
            break
        node, ext, ev = nxt
        emit({"event": "backtrack", "pattern": _cells_json(node.pattern.to_dict()), "score": node.score})
        accept(node, ext, ev, "backtrack-accept")

    return HillResult(False, best.pattern, best.score, prob, trace, scorer.count, rounds)


def _backtrack(node: SearchNode, scorer: _Scorer):
    """Next untried extension, depth first: the stuck node's own list, then its ancestors'."""
    n = node
    while n is not None:
        while n.frontier:
            sc, ext, _ = n.frontier.pop(0)
            ev = scorer(n.pattern.with_cells(ext))      # the problem may have been merged since
            if ev.valid:
                return n, ext, ev
        n = n.parent
    return None


def _random_rect(p: Pattern, border: Sequence[Cell], prob: HillProblem, region: Rect, rng) -> dict:
    x, y = rng.choice(list(border))
    w, h = rng.randint(1, prob.rect_size), rng.randint(1, prob.rect_size)
    x0, y0 = x - rng.randrange(w), y - rng.randrange(h)
    ext = {}
    for c in Rect(x0, y0, w, h).cells():
        if c in region and p.get(c) is None:
            ext[c] = rng.randint(0, 1)
    return _with_period(ext, prob, region)


def _complete(p: Pattern, scorer: _Scorer, region: Rect) -> dict | None:
    """Fill the bounding box one cell at a time, preferring 0 while the pattern stays valid."""
    bb = p.bbox
    if bb is None:
        return {}
    cur = p
    for c in sorted(bb.cells(), key=lambda c: (c[1], c[0])):
        if cur.get(c) is not None:
            continue
        for b in (0, 1):
            nxt = cur.with_cells({c: b})
            if scorer(nxt).valid:
                cur = nxt
                break
        else:
            return None
    return cur.to_dict()


# --- genetic charger search -----------------------------------------------------------

@dataclass
class GeneticProblem:
    """Charger search on the rectangle ``[0, 2n-1] x [0, m]``.

    Rows 0-1 hold only a wire at columns ``n-1, n`` and the rest of the
    thickness-2 border is dead.  The window ``[n-2, n+1] x [0, 1]`` must be
    forced into exactly two wire signals, each realizable with a dead
    preimage border elsewhere.
    """
    half_width: int
    height: int
    population: int = 100
    offspring: int = 60
    mutation_rects: int = 3
    rect_size: int = 3
    stickiness: float = 0.8
    similarity: float = 0.97
    similar_count: int = 2
    density: float = 0.4
    score_rows: int = 3
    limit: int = 256
    encoding: EncodingKind | str = EncodingKind.DIVIDE_CONQUER
    backend: str | None = None

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population cap must be at least 2")
        if self.half_width < 3 or self.height < 5:
            raise ValueError("need half-width >= 3 and height >= 5")

    @property
    def width(self) -> int:
        return 2 * self.half_width

    @property
    def rows(self) -> int:
        return self.height + 1

    def window(self, rows: int = 2) -> list[Cell]:
        n = self.half_width
        return [(x, y) for y in range(rows) for x in range(n - 2, n + 2)]

    def free_rect(self) -> Rect:
        return Rect(2, 2, self.width - 4, self.rows - 4)

    def template(self) -> np.ndarray:
        a = np.zeros((self.rows, self.width), np.uint8)
        a[0:2, self.half_width - 1:self.half_width + 1] = 1
        return a

    def preimage_border(self) -> set[Cell]:
        """Thickness-2 ring of the preimage window, minus the signal window."""
        W, H = self.width, self.rows
        pw = set(Rect(-1, -1, W + 2, H + 2).cells())
        inner = set(Rect(1, 1, W - 2, H - 2).cells())
        return pw - inner - set(self.window())


@dataclass
class GeneticResult:
    pattern: Pattern | None
    score: float
    generation: int
    history: list


def _charger_cnf(bits: np.ndarray, prob: GeneticProblem):
    cnf = sat.CnfInstance()
    inst = _add_copy(cnf, Pattern(0, 0, bits), Free(), TriPattern(), prob.encoding)
    return cnf, inst


def realizable_phases(bits: np.ndarray, prob: GeneticProblem) -> list[int]:
    """Wire phases that fit the window with an otherwise dead preimage border."""
    cnf, inst = _charger_cnf(bits, prob)
    ring = [-inst.var(c) for c in sorted(prob.preimage_border())]
    out = []
    with sat.open_session(cnf, prob.backend) as s:
        for ph in range(3):
            sig = wire_signal_cells(ph, Orientation.VERTICAL, (prob.half_width - 2, 0))
            if s.solve(ring + inst.lits(sig)):
                out.append(ph)
    return out


def charger_score(bits: np.ndarray, prob: GeneticProblem) -> float:
    """``s - 2`` with ``s`` the number of window restrictions (rows ``0..score_rows-1``); inf if discarded."""
    if len(realizable_phases(bits, prob)) < 2:
        return INF
    cnf, inst = _charger_cnf(bits, prob)
    proj = [inst.var(c) for c in prob.window(prob.score_rows)]
    s = len(sat.enumerate_models(cnf, proj, prob.limit, backend=prob.backend))
    return float(s - 2)


def _mutate(a: np.ndarray, prob: GeneticProblem, rng: random.Random) -> np.ndarray:
    a = a.copy()
    fr = prob.free_rect()
    for _ in range(rng.randint(1, prob.mutation_rects)):
        w, h = rng.randint(1, min(prob.rect_size, fr.width)), rng.randint(1, min(prob.rect_size, fr.height))
        x0 = fr.x0 + rng.randrange(fr.width - w + 1)
        y0 = fr.y0 + rng.randrange(fr.height - h + 1)
        a[y0:y0 + h, x0:x0 + w] = np.array([[rng.random() < 0.5 for _ in range(w)] for _ in range(h)], np.uint8)
    return a


def crossover(a: np.ndarray, b: np.ndarray, stickiness: float, rng: random.Random) -> np.ndarray:
    """Row-wise crossover; row ``i+1`` comes from the same parent as row ``i`` with probability ``stickiness``."""
    out = np.empty_like(a)
    src = rng.randint(0, 1)
    for i in range(a.shape[0]):
        if i and rng.random() >= stickiness:
            src ^= 1
        out[i] = (a, b)[src][i]
    return out


def _random_candidate(prob: GeneticProblem, rng: random.Random) -> np.ndarray:
    a = prob.template()
    fr = prob.free_rect()
    for (x, y) in fr.cells():
        a[y, x] = rng.random() < prob.density
    return a


def genetic_charger(prob: GeneticProblem, budget: int, seed: int = 0, seeds: Sequence[Pattern] = (),
                    log=None, time_limit: float | None = None) -> GeneticResult:
    """Evolve chargers for at most ``budget`` generations; returns the first with score 0."""
    rng = random.Random(seed)
    t0 = time.time()
    tmpl = prob.template()
    fr = prob.free_rect()
    fixed = np.ones_like(tmpl, bool)
    fixed[fr.y0:fr.y1, fr.x0:fr.x1] = False

    def legal(a):
        return a.shape == tmpl.shape and (a[fixed] == tmpl[fixed]).all()

    pop: list[tuple[float, np.ndarray]] = []
    for p in seeds:
        a = np.asarray(p.bits, np.uint8)
        if not legal(a):
            raise ValueError("seed does not match the charger template")
        pop.append((charger_score(a, prob), a))
    while len(pop) < prob.population:
        a = _random_candidate(prob, rng)
        pop.append((charger_score(a, prob), a))
    pop = _select(pop, prob)

    def best():
        return pop[0][0] if pop else INF
    history = [best()]
    if log:
        log({"generation": 0, "best": best()})
    if best() == 0:
        return GeneticResult(Pattern(0, 0, pop[0][1]), 0.0, 0, history)
    for gen in range(1, budget + 1):
        if time_limit is not None and time.time() - t0 > time_limit:
            break
        kids = []
        for _ in range(prob.offspring):
            if not pop:
                kids.append(_random_candidate(prob, rng))
            elif rng.random() < 0.5 or len(pop) < 2:
                kids.append(_mutate(rng.choice(pop)[1], prob, rng))
            else:
                (_, a), (_, b) = rng.sample(pop, 2)
                kids.append(_mutate(crossover(a, b, prob.stickiness, rng), prob, rng)
                            if rng.random() < 0.3 else crossover(a, b, prob.stickiness, rng))
        pop = _select(pop + [(charger_score(k, prob), k) for k in kids], prob)
        history.append(best())
        if log:
            log({"generation": gen, "best": best()})
        if best() == 0:
            return GeneticResult(Pattern(0, 0, pop[0][1]), 0.0, gen, history)
    return GeneticResult(None, best(), len(history) - 1, history)


def _select(cands, prob: GeneticProblem):
    cands = [c for c in cands if c[0] < INF]
    cands.sort(key=lambda c: c[0])
    kept: list = []
    seen = set()
    for sc, a in cands:
        key = a.tobytes()
        if key in seen:
            continue
        close = sum((a == b).mean() >= prob.similarity for _, b in kept)
        if close >= prob.similar_count:
            continue
        seen.add(key)
        kept.append((sc, a))
        if len(kept) == prob.population:
            break
    return kept
