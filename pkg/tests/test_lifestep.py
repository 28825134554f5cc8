import numpy as np
import pytest
from hypothesis import given, strategies as st

from lifepre import sat
from lifepre.grid import Pattern, Rect, shift
from lifepre.lifestep import (CENTER, EncodingKind, all_neighbourhoods, encode_cell, step,
                              step_array, step_cell)

KINDS = list(EncodingKind)


def conventional(n):
    # B3/S23 counting neighbours only
    s = sum(n) - n[CENTER]
    return int(s == 3 or (n[CENTER] and s == 2))


def test_step_cell_examples():
    assert step_cell([0] * 9) == 0
    assert step_cell([1, 1, 1, 0, 0, 0, 0, 0, 0]) == 1
    assert step_cell([1, 0, 0, 0, 1, 0, 0, 0, 0]) == 0
    with pytest.raises(ValueError):
        step_cell([0] * 8)


def test_step_cell_is_b3s23():
    assert all(step_cell(n) == conventional(n) for n in all_neighbourhoods())


def _symmetries(n):
    a = np.array(n).reshape(3, 3)
    for k in range(4):
        r = np.rot90(a, k)
        yield r.ravel()
        yield r.T.ravel()


def test_step_cell_symmetric():
    for n in all_neighbourhoods():
        assert {step_cell(list(m)) for m in _symmetries(n)} == {step_cell(n)}


def test_step_examples():
    blinker = Pattern.from_rows(["00000", "00100", "00100", "00100", "00000"])
    assert step(blinker, Rect(1, 1, 3, 3)).rows() == ["000", "111", "000"]
    block = Pattern.from_rows(["0000", "0110", "0110", "0000"])
    assert step(block, Rect(1, 1, 2, 2)).rows() == ["11", "11"]
    assert step(Pattern.zeros(Rect(0, 0, 5, 5)), Rect(1, 1, 3, 3)).support() == set()
    with pytest.raises(ValueError):
        step(block, Rect(0, 0, 2, 2))


def test_step_array_torus():
    glider = np.zeros((6, 6), np.uint8)
    glider[0, 1] = glider[1, 2] = glider[2, 0] = glider[2, 1] = glider[2, 2] = 1
    a = glider
    for _ in range(24):
        a = step_array(a, wrap=True)
    assert (a == glider).all()


@given(st.integers(0, 2**32 - 1), st.tuples(st.integers(-5, 5), st.integers(-5, 5)))
def test_step_commutes_with_shift(seed, v):
    rng = np.random.default_rng(seed)
    p = Pattern(0, 0, rng.integers(0, 2, (7, 8), dtype=np.uint8))
    w = Rect(1, 1, 6, 5)
    assert step(shift(p, v), w.shift(-v[0], -v[1])) == shift(step(p, w), v)


@pytest.mark.parametrize("kind", KINDS)
def test_encoding_exhaustive(kind):
    ins = list(range(1, 10))
    cnf = sat.CnfInstance(10)
    cnf.extend(encode_cell(kind, ins, 10, cnf.pool()))
    with sat.open_session(cnf) as s:
        for n in all_neighbourhoods():
            want = step_cell(n)
            assume = [v if b else -v for v, b in zip(ins, n)]
            assert s.solve(assume + [10 if want else -10])
            assert not s.solve(assume + [-10 if want else 10])


def test_divide_conquer_is_aux_free():
    calls = []

    def fresh():
        calls.append(1)
        return 100 + len(calls)

    cls = encode_cell(EncodingKind.DIVIDE_CONQUER, list(range(1, 10)), 10, fresh)
    assert not calls
    assert max(abs(l) for c in cls for l in c) == 10


def test_encodings_equisatisfiable():
    # projected onto inputs+output, every encoding has exactly the 512 rule rows as models
    for kind in KINDS:
        cnf = sat.CnfInstance(10)
        cnf.extend(encode_cell(kind, list(range(1, 10)), 10, cnf.pool()))
        models = sat.enumerate_models(cnf, list(range(1, 11)))
        rows = {m[:9] for m in models}
        assert len(models) == 512 and len(rows) == 512
        assert all(int(m[9]) == step_cell([int(b) for b in m[:9]]) for m in models)


def test_encoding_rejects_repeated_vars():
    with pytest.raises(ValueError):
        encode_cell("dc", [1] * 9, 2, lambda: 3)


def test_parse_kind():
    assert EncodingKind.parse("sort") is EncodingKind.SORTING_NETWORK
    assert EncodingKind.parse("MERGE") is EncodingKind.MERGE
    with pytest.raises(ValueError):
        EncodingKind.parse("bdd")
