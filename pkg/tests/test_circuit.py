import random

import networkx as nx
import pytest

from lifepre.circuit import (ROTATE_CCW, CircuitGrid, GateTile, brute_force_satisfy, count_satisfying,
                             emit_circuit, is_well_formed, loop_circuit, parse_circuit, random_circuit,
                             rotate_circuit, satisfy, simple_cycles, wire_edges)

G = GateTile


def test_stub_table():
    want = {".": "", "-": "EW", "|": "NS", "L": "EN", "J": "NW", "7": "WS", "r": "ES",
            "N": "EW", "T": "E", "S": "ENS", "X": "ENWS", "O": "ENS"}
    assert {t.char: "".join(sorted(t.stubs)) for t in G} == {k: "".join(sorted(v)) for k, v in want.items()}


def test_text_round_trip():
    text = "r-7\n|.|\nL-J\n"
    c = parse_circuit(text)
    assert emit_circuit(c) == text
    with pytest.raises(ValueError, match="line 2, column 2"):
        parse_circuit("..\n.?\n")
    with pytest.raises(ValueError):
        parse_circuit("..\n.\n")


def test_well_formed_examples():
    assert is_well_formed(CircuitGrid.blank(3, 3))[0]
    ok, why = is_well_formed(parse_circuit("-"))
    assert not ok and "boundary" in why
    assert not is_well_formed(parse_circuit("r7\n|."))[0]
    # the Or output runs into the east boundary
    c = parse_circuit("TN7\n.rO\n.LJ\n")
    assert not is_well_formed(c)[0]
    c = parse_circuit("r--7\n|..|\nL--J\n")
    assert is_well_formed(c)[0]
    assert is_well_formed(parse_circuit("-"), periodic=True)[0]


def test_satisfy_examples():
    assert satisfy(CircuitGrid.blank(2, 2)) == {}
    assert count_satisfying(CircuitGrid.blank(2, 2)) == 1
    plain = parse_circuit("r--7\n|..|\nL--J\n")
    assert count_satisfying(plain) == 2
    odd = parse_circuit("rN-7\n|..|\nL--J\n")
    assert satisfy(odd) is None
    even = parse_circuit("rNN7\n|..|\nL--J\n")
    assert count_satisfying(even) == 2


def test_true_into_a_loop():
    plain = parse_circuit(
        "r7.\n"
        "|L7\n"
        "L-J\n")
    assert is_well_formed(plain)[0] and count_satisfying(plain) == 2
    # True enters the loop through the splitter's north stub
    c = parse_circuit(
        "T7r7\n"
        ".SJ|\n"
        ".L-J\n")
    assert is_well_formed(c)[0]
    assert count_satisfying(c) == 1
    assert all(v == 1 for v in satisfy(c).values())
    c2 = parse_circuit(
        "TN7r7\n"
        "..SJ|\n"
        "..L-J\n")
    assert count_satisfying(c2) == 1
    assert all(v == 0 for k, v in satisfy(c2).items() if k != ("h", 0, 0))


def test_ill_formed_input_is_an_error():
    with pytest.raises(ValueError):
        satisfy(parse_circuit("-"))


def test_simple_cycles_match_networkx():
    for rows, cols in [(2, 2), (3, 3), (3, 4), (4, 4)]:
        g = nx.grid_2d_graph(rows, cols)
        want = sorted(len(c) for c in nx.simple_cycles(g, length_bound=12))
        got = sorted(len(c) for c in simple_cycles(rows, cols, 12))
        assert got == want


def test_loops_with_inverters():
    rng = random.Random(4)
    for cyc in rng.sample(simple_cycles(4, 4, 12), 40):
        c0 = loop_circuit(4, 4, cyc)
        straights = [p for p in cyc if c0[p] is G.WIRE_H]
        k = rng.randint(0, len(straights))
        c = loop_circuit(4, 4, cyc, rng.sample(straights, k))
        assert is_well_formed(c)[0]
        assert count_satisfying(c) == (2 if k % 2 == 0 else 0)


def test_random_circuits_agree_with_brute_force():
    rng = random.Random(9)
    n = 0
    while n < 60:
        c = random_circuit(3, 3, rng)
        if len(wire_edges(c)) > 12:
            continue
        n += 1
        got = count_satisfying(c)
        assert got == len(brute_force_satisfy(c))
        a = satisfy(c)
        assert (a is None) == (got == 0)


def test_rotation_invariance():
    rng = random.Random(2)
    closed = [t for t in ROTATE_CCW]
    for _ in range(40):
        c = random_circuit(3, 4, rng, tiles=closed)
        r = rotate_circuit(c)
        assert r.shape == (4, 3)
        assert is_well_formed(r)[0]
        assert count_satisfying(r) == count_satisfying(c)
        assert rotate_circuit(rotate_circuit(rotate_circuit(r))) == c


def test_translation_invariance():
    rng = random.Random(3)
    for _ in range(20):
        c = random_circuit(3, 3, rng)
        big = CircuitGrid.blank(5, 6).replace({(r + 1, col + 2): c[r, col] for r, col in c.positions()})
        assert count_satisfying(big) == count_satisfying(c)


def test_torus_wire():
    assert count_satisfying(parse_circuit("-"), periodic=True) == 2
    assert count_satisfying(parse_circuit("N"), periodic=True) == 0
    assert count_satisfying(parse_circuit("NN"), periodic=True) == 2
