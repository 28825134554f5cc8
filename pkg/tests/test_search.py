import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lifepre.grid import Pattern, Rect, TriPattern
from lifepre.preimage import PreimageQuery, brute_force_preimages, restrictions
from lifepre.search import (INF, GeneticProblem, HillProblem, charger_score, crossover, domain_term, evaluate,
                            genetic_charger, hill_climb, is_valid, load_journal, merge_domains,
                            problem_from_json, problem_to_json, realizable_phases, score)

from oracles import restrictions_3x3

WINDOW = [(1, 1), (2, 1), (1, 2), (2, 2)]
TARGET = ["000", "001", "010"]


def brute_restrictions(img, cells):
    """Restrictions of all preimages of a small rectangular image, by listing them."""
    pre = brute_force_preimages(img)
    x0, y0 = img.x0 - 1, img.y0 - 1
    return {tuple(int(q[y - y0, x - x0]) for x, y in cells) for q in pre}


def micro_problem(**kw):
    F = restrictions(PreimageQuery(Pattern.from_rows(TARGET)), WINDOW)
    return HillProblem([frozenset(WINDOW)], [TriPattern()], [F], bounds=Rect(0, 0, 3, 3), **kw)


def audit(trace):
    """Accepted steps never raise the score; only a backtrack may."""
    cur = None
    for ev in trace:
        kind = ev["event"]
        if kind == "start":
            cur = ev["score"]
        elif kind == "backtrack":
            cur = ev["score"]
        elif kind in ("accept", "crevice"):
            assert ev["before"] == cur
            assert ev["after"] <= ev["before"]
            if kind == "accept":
                assert ev["after"] < ev["before"]
            cur = ev["after"]
        elif kind in ("backtrack-accept", "merge", "complete"):
            cur = ev["after"]


def test_score_hand_value():
    # 1x1 dead image, D = two preimage cells, F = {00, 01, 10}: the stray 11 agrees with 01 in one
    # cell, so M = 2 and s = (1/2) log(1 + 2/2)
    D = [(0, 0), (1, 0)]
    F = [dict(zip(D, b)) for b in [(0, 0), (0, 1), (1, 0)]]
    prob = HillProblem([frozenset(D)], [TriPattern()], [F])
    p = Pattern.from_rows(["0"])
    assert brute_restrictions(p, D) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    assert abs(score(p, prob) - 0.5 * math.log(2)) < 1e-12
    assert abs(score(Pattern.empty(), prob) - 0.5 * math.log(2)) < 1e-12


@given(st.integers(1, 5), st.data())
def test_domain_term_bounds(n, data):
    D = [(i, 0) for i in range(n)]
    pats = list(itertools.product((0, 1), repeat=n))
    F = [dict(zip(D, b)) for b in data.draw(st.lists(st.sampled_from(pats), min_size=1, unique=True))]
    R = [dict(zip(D, b)) for b in data.draw(st.lists(st.sampled_from(pats), unique=True))]
    t = domain_term(D, R, F)
    stray = sum(tuple(r.values()) not in {tuple(q.values()) for q in F} for r in R)
    assert t >= 0
    assert (t == 0) == (stray == 0)
    # M <= 1 + |D_j|
    assert t <= math.log1p(stray * (1 + n) / n) / n + 1e-12


def test_validity_reasons():
    D = [(0, 0)]
    prob = HillProblem([frozenset(D)], [TriPattern()], [[{(0, 0): 0}, {(0, 0): 1}]],
                       constraint=TriPattern({(5, 5): 1}))
    assert is_valid(Pattern.empty(), prob) == (True, None)
    assert score(Pattern.empty(), prob) == 0
    ok, why = is_valid(Pattern.from_rows(["0"], 5, 5), prob)
    assert not ok and "constraint" in why
    # a lone live image cell cannot have every neighbour dead
    nbrs = [(x, y) for y in (-1, 0, 1) for x in (-1, 0, 1)]
    prob = HillProblem([frozenset(nbrs)], [TriPattern()], [[dict.fromkeys(nbrs, 0)]])
    ok, why = is_valid(Pattern.from_rows(["1"]), prob)
    assert not ok and "no preimage" in why
    # the centre of a 5x5 dead image is free behind a dead border
    prob = HillProblem([frozenset([(2, 2)])], [TriPattern()], [[{(2, 2): 0}]])
    ok, why = is_valid(Pattern.zeros(Rect(0, 0, 5, 5)), prob)
    assert not ok and "diamond" in why


def test_forced_cells_outside_the_window():
    # D beyond the preimage window is free: both values appear
    prob = HillProblem([frozenset([(9, 9)])], [TriPattern()], [[{(9, 9): 0}, {(9, 9): 1}]])
    assert score(Pattern.from_rows(["1"]), prob) == 0
    prob = HillProblem([frozenset([(9, 9)])], [TriPattern({(9, 9): 0})], [[{(9, 9): 0}]])
    assert score(Pattern.from_rows(["1"]), prob) == 0


def test_merge_domains():
    prob = micro_problem()
    assert merge_domains(prob, 0, 0) is prob
    split = HillProblem([frozenset(WINDOW[:2]), frozenset(WINDOW[2:])], prob.contexts, prob.forced)
    merged = merge_domains(split, 0, 1)
    assert merged.domains == [frozenset(WINDOW)]
    again = HillProblem([frozenset(WINDOW), frozenset(WINDOW)], prob.contexts, prob.forced)
    assert merge_domains(again, 0, 1).domains == [frozenset(WINDOW)]
    # restriction counts of the union never exceed the product of the parts
    p = Pattern.from_rows(["01", "10"])
    q = PreimageQuery(p)
    a = len(restrictions(q, WINDOW[:2]))
    b = len(restrictions(q, WINDOW[2:]))
    assert len(restrictions(q, WINDOW)) <= a * b
    assert evaluate(p, merged).score >= 0


def test_problem_json_round_trip(tmp_path):
    prob = micro_problem(max_width=2, limit=100)
    prob.contexts = [TriPattern({(0, 0): 1, (3, 1): 0})]
    prob.constraint = TriPattern({(2, 2): 0})
    d = problem_to_json(prob)
    back = problem_from_json(d)
    assert problem_to_json(back) == d
    assert back.forced == prob.forced and back.max_width == 2
    with pytest.raises(ValueError):
        problem_from_json({**d, "forced": [["01"]]})
    with pytest.raises(ValueError):
        HillProblem([frozenset()], [TriPattern()], [[{}]])


def test_trivial_problem_solved_in_round_zero():
    D = [(0, 0)]
    prob = HillProblem([frozenset(D)], [TriPattern()], [[{(0, 0): 0}, {(0, 0): 1}]])
    res = hill_climb(prob, 10)
    assert res.success and res.score == 0 and res.evaluations == 1
    with pytest.raises(ValueError):
        hill_climb(prob, 0)


def test_micro_target_is_a_solution():
    # exhaustive check that the problem is solvable before asking the climber to solve it
    target = Pattern.from_rows(TARGET)
    prob = micro_problem()
    assert restrictions_3x3(target, WINDOW) == {tuple(Q[c] for c in WINDOW) for Q in prob.forced[0]}
    assert evaluate(target, prob).score == 0


@pytest.mark.parametrize("seed", [0, 1])
def test_micro_climb(seed, tmp_path):
    prob = micro_problem()
    res = hill_climb(prob, 400, seed=seed, checkpoint=tmp_path)
    assert res.success and res.score == 0
    p = res.pattern
    assert is_valid(p, prob)[0]
    # the forced set is met exactly
    got = {tuple(r[c] for c in WINDOW) for r in restrictions(PreimageQuery(p), WINDOW)}
    assert got == {tuple(Q[c] for c in WINDOW) for Q in prob.forced[0]}
    audit(res.trace)
    assert any(e["event"] == "accept" for e in res.trace)
    events, replayed = load_journal(tmp_path)
    assert len(events) == len(res.trace)
    assert replayed == p


def test_climb_is_deterministic():
    a = hill_climb(micro_problem(), 60, seed=3)
    b = hill_climb(micro_problem(), 60, seed=3)
    assert a.trace == b.trace and a.pattern == b.pattern


def test_unsuccessful_climb_is_marked():
    D = [(0, 0), (1, 0)]
    prob = HillProblem([frozenset(D)], [TriPattern()], [[{(0, 0): 1, (1, 0): 1}]], bounds=Rect(0, 0, 2, 2),
                       max_width=1, rect_tries=2, limit=16)
    res = hill_climb(prob, 60, seed=0)
    assert not res.success and res.score > 0
    audit(res.trace)


# --- genetic ------------------------------------------------------------------------------

@given(st.integers(0, 2 ** 32 - 1), st.floats(0, 1))
def test_crossover_of_identical_parents(seed, stick):
    a = np.random.default_rng(seed).integers(0, 2, (7, 8), dtype=np.uint8)
    assert (crossover(a, a, stick, random.Random(seed)) == a).all()


def test_crossover_takes_whole_rows():
    a = np.zeros((20, 6), np.uint8)
    b = np.ones((20, 6), np.uint8)
    c = crossover(a, b, 0.8, random.Random(1))
    assert all(len(set(row)) == 1 for row in c.tolist())


def test_genetic_problem_geometry():
    gp = GeneticProblem(6, 10)
    assert gp.width == 12 and gp.rows == 11
    t = gp.template()
    assert t[0:2, 5:7].all() and t.sum() == 4
    assert gp.window() == [(x, y) for y in (0, 1) for x in range(4, 8)]
    ring = gp.preimage_border()
    assert not ring & set(gp.window())
    assert (-1, -1) in ring and (0, 0) in ring and (1, 1) not in ring
    with pytest.raises(ValueError):
        GeneticProblem(6, 10, population=1)


def test_blank_charger_candidate():
    gp = GeneticProblem(4, 6)
    a = gp.template()
    # W2 (the blank phase) would need a third live neighbour above the wire
    ph = realizable_phases(a, gp)
    assert set(ph) <= {0, 1}
    if len(ph) < 2:
        assert charger_score(a, gp) == INF


def test_seeded_population_returns_immediately(monkeypatch):
    gp = GeneticProblem(4, 6, population=4)
    seed = gp.template()
    import lifepre.search as search
    monkeypatch.setattr(search, "charger_score", lambda a, prob: 0.0 if (a == seed).all() else 5.0)
    res = genetic_charger(gp, 10, seeds=[Pattern(0, 0, seed)])
    assert res.generation == 0 and res.score == 0 and (res.pattern.bits == seed).all()
    with pytest.raises(ValueError):
        genetic_charger(gp, 10, seeds=[Pattern(0, 0, np.ones_like(seed))])


def test_genetic_keeps_population_bounded():
    gp = GeneticProblem(3, 5, population=3, offspring=2, limit=16)
    seen = []
    res = genetic_charger(gp, 2, seed=1, log=seen.append)
    assert res.pattern is None or res.score == 0
    assert [e["generation"] for e in seen] == list(range(len(seen)))
    assert all(h >= 0 for h in res.history)
    assert len(res.history) == len(seen)
