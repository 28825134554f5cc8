import itertools
import random
import stat

import pytest

from lifepre import sat
from lifepre.grid import Pattern
from lifepre.preimage import PreimageQuery, build_instance

BACKENDS = ["pysat:glucose4", "dpll"]


def brute(cnf):
    for bits in itertools.product((False, True), repeat=cnf.num_vars):
        m = {i + 1: b for i, b in enumerate(bits)}
        if sat.check_model(cnf.clauses, m):
            return True
    return False


def random_3cnf(rng, n=12, m=None):
    m = m or rng.randint(30, 70)
    cnf = sat.CnfInstance(n)
    for _ in range(m):
        vs = rng.sample(range(1, n + 1), 3)
        cnf.add([v if rng.random() < 0.5 else -v for v in vs])
    return cnf


@pytest.mark.parametrize("backend", BACKENDS)
def test_trivial(backend):
    c = sat.CnfInstance(1, [[1]])
    r = sat.solve(c, backend=backend)
    assert r and r.value(1)
    assert not sat.solve(sat.CnfInstance(1, [[1], [-1]]), backend=backend)


@pytest.mark.parametrize("backend", BACKENDS)
def test_random_3cnf_against_brute_force(backend):
    rng = random.Random(7)
    for _ in range(25):
        cnf = random_3cnf(rng)
        r = sat.solve(cnf, backend=backend)
        assert bool(r) == brute(cnf)
        if r:
            assert sat.check_model(cnf.clauses, r.model)


def test_monotone():
    rng = random.Random(3)
    for _ in range(20):
        cnf = random_3cnf(rng, m=40)
        more = cnf.copy()
        more.extend(random_3cnf(rng, m=15).clauses)
        if not sat.solve(cnf):
            assert not sat.solve(more)


def test_enumerate_free_vars():
    c = sat.CnfInstance(2)
    assert sorted(sat.enumerate_models(c, [1])) == [(False,), (True,)]
    assert len(sat.enumerate_models(c, [1, 2], limit=1)) == 1
    assert sat.enumerate_models(c, []) == [()]
    assert sat.enumerate_models(sat.CnfInstance(1, [[1], [-1]]), [1]) == []


@pytest.mark.parametrize("backend", BACKENDS)
def test_enumerate_preimages_of_dead_cell(backend):
    inst = build_instance(PreimageQuery(Pattern.from_rows(["0"])))
    proj = [inst.var(c) for c in inst.cells]
    models = sat.enumerate_models(inst.cnf, proj, backend=backend)
    assert len(set(models)) == len(models)
    # 512 windows minus births (dead centre, 3 neighbours) and survivals
    # (live centre, 2 or 3 neighbours)
    dead = sum(1 for n in itertools.product((0, 1), repeat=9)
               if not (sum(n) == 3 or (n[4] and sum(n) == 4)))
    assert len(models) == dead == 512 - 56 - 84


def test_dimacs_round_trip():
    cnf = sat.CnfInstance(3, [[1, -2], [2, 3], [-1]])
    text = cnf.to_dimacs()
    assert text.splitlines()[0] == "p cnf 3 3"
    back = sat.CnfInstance.from_dimacs("c hi\n" + text)
    assert back.clauses == cnf.clauses and back.num_vars == 3
    with pytest.raises(ValueError):
        sat.CnfInstance.from_dimacs("1 2 0\n")
    with pytest.raises(ValueError):
        cnf.add([4])


def test_parse_solver_output():
    r = sat.parse_solver_output("c x\ns SATISFIABLE\nv 1 -2\nv 3 0\n", 3)
    assert r.model == {1: True, 2: False, 3: True}
    assert not sat.parse_solver_output("s UNSATISFIABLE\n", 3)
    with pytest.raises(sat.BackendError):
        sat.parse_solver_output("garbage", 3)


def test_missing_backend_is_not_unsat():
    with pytest.raises(sat.BackendError):
        sat.solve(sat.CnfInstance(1, [[1]]), backend="external:/nonexistent/solver")


def test_external_backend(tmp_path):
    # a fake solver that delegates to the in-process one
    script = tmp_path / "fake_solver"
    script.write_text(
        "#!/usr/bin/env python3\n"
        "import sys\n"
        "from lifepre import sat\n"
        "c = sat.CnfInstance.from_dimacs(open(sys.argv[1]).read())\n"
        "r = sat.solve(c, backend='dpll')\n"
        "if r:\n"
        "    print('s SATISFIABLE')\n"
        "    print('v ' + ' '.join(str(v if r.model[v] else -v) for v in range(1, c.num_vars + 1)) + ' 0')\n"
        "else:\n"
        "    print('s UNSATISFIABLE')\n")
    script.chmod(script.stat().st_mode | stat.S_IEXEC)
    be = f"external:{script}"
    assert sat.solve(sat.CnfInstance(2, [[1, 2], [-1]]), backend=be).value(2)
    assert not sat.solve(sat.CnfInstance(1, [[1], [-1]]), backend=be)
    assert len(sat.enumerate_models(sat.CnfInstance(2), [1, 2], backend=be)) == 4


def test_lying_backend_detected(tmp_path):
    script = tmp_path / "liar"
    script.write_text("#!/bin/sh\necho 's SATISFIABLE'\necho 'v 1 0'\n")
    script.chmod(script.stat().st_mode | stat.S_IEXEC)
    with pytest.raises(sat.BackendError):
        sat.solve(sat.CnfInstance(1, [[-1]]), backend=f"external:{script}")


def test_env_override(monkeypatch):
    monkeypatch.setenv("LIFEPRE_SOLVER", "dpll")
    assert sat.default_backend() == "dpll"
