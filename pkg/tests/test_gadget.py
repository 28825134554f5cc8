import json

import pytest
from hypothesis import given, strategies as st

from lifepre import sat
from lifepre.gadget import (SIDES, Affinity, ChargeRule, Gadget, GadgetSpec, Orientation, WirePort,
                            WireSignal, affinity_of, bit_of, gadget_from_json, gadget_to_json,
                            load_library, observed_relation, parse_charge_rules, relation_from_affinity,
                            rotate_gadget, rotate_relation, rotate_spec, save_gadget,
                            straight_wire_gadget, verify_charging, verify_gadget, verify_relation,
                            wire_signal_cells, wire_signal_pattern)
from lifepre.grid import Pattern, TriPattern
from lifepre.preimage import PreimageQuery, build_instance

V, H = Orientation.VERTICAL, Orientation.HORIZONTAL


def test_wire_signals():
    assert wire_signal_pattern(WireSignal(0, V)).rows() == ["1111", "0000"]
    assert wire_signal_pattern(WireSignal(1, V)).rows() == ["0000", "1111"]
    assert wire_signal_pattern(WireSignal(2, V)).support() == set()
    assert WireSignal(5).phase == 2
    for i in range(3):
        assert wire_signal_pattern(WireSignal(i, V)).rotate_ccw() == wire_signal_pattern(WireSignal(i, H))


def test_affinity():
    assert affinity_of("W", 1) is Affinity.NEAR
    assert affinity_of("E", 0) is Affinity.NEAR
    assert affinity_of("N", 1) is Affinity.NEAR
    assert affinity_of("S", 0) is Affinity.NEAR
    for s in SIDES:
        for b in (0, 1):
            assert bit_of(s, affinity_of(s, b)) == b


def test_rotate_relation_examples():
    assert rotate_relation("ENWS", ["0011"]) == ("ENWS", frozenset({"1100"}))
    rel = frozenset({"0011", "0110", "1001", "1100"})
    sides, r = "ENWS", rel
    for _ in range(4):
        sides, r = rotate_relation(sides, r)
    assert r == rel
    # subwords: ENS -> NWE, reordered to ENW
    assert rotate_relation("ENS", ["100"]) == ("ENW", frozenset({"000"}))


@given(st.sets(st.text("01", min_size=4, max_size=4)))
def test_rotation_permutes_affinities(rel):
    ports = [WirePort(s, 2) for s in SIDES]
    spec = GadgetSpec(tuple(ports), relation=frozenset(rel))
    rot = rotate_spec(spec, 6, 6)
    perm = {"E": "N", "N": "W", "W": "S", "S": "E"}
    before = {dict(zip(SIDES, t)).__repr__() for t in spec.affinity_relation()}
    after = set()
    for t in rot.affinity_relation():
        d = dict(zip(SIDES, t))
        after.add({s: d[perm[s]] for s in SIDES}.__repr__())
    assert before == after


def test_spec_validation():
    with pytest.raises(ValueError):
        WirePort("N", 2, (0, 2))
    with pytest.raises(ValueError):
        WirePort("Q", 2)
    with pytest.raises(ValueError):
        GadgetSpec((WirePort("N", 2),), tuple(parse_charge_rules("N |- E")))
    with pytest.raises(ValueError):
        GadgetSpec((WirePort("N", 2),), relation=frozenset({"01"}))
    assert [str(r) for r in parse_charge_rules("N, S |- ENS")] == ["N |- ENS", "S |- ENS"]
    assert str(parse_charge_rules("⊢ N")[0]) == "|- N"
    with pytest.raises(ValueError):
        parse_charge_rules("N -> S")


def test_relation_from_affinity():
    ports = [WirePort("W", 2), WirePort("E", 2)]
    # E first in ENWS order: E near = 0, W far = 0
    assert relation_from_affinity(ports, ["NF"]) == frozenset({"00"})


@pytest.mark.parametrize("length", [6, 7, 8])
def test_straight_wire_verifies(length):
    rep = verify_gadget(straight_wire_gadget(length))
    assert rep.status == "pass", [(c.name, c.detail) for c in rep.checks]


def test_bare_wire_is_not_a_charger():
    g = straight_wire_gadget(6)
    res = verify_charging(g, parse_charge_rules("|- E")[0])
    assert res.status == "fail" and res.witness is not None


def test_vacuous_rule():
    g = straight_wire_gadget(6)
    assert verify_charging(g, ChargeRule(frozenset(), frozenset())).ok


def test_relation_rotates_with_the_pattern():
    g = straight_wire_gadget(7)
    obs, _ = observed_relation(g)
    r = g
    sides = g.spec.sides
    for _ in range(3):
        r = rotate_gadget(r)
        sides, obs = rotate_relation(sides, obs)
        assert r.spec.sides == sides
        assert observed_relation(r)[0] == obs
        assert verify_gadget(r).status == "pass"


def test_inconclusive_when_over_limit():
    rep = verify_relation(straight_wire_gadget(6), limit=1)
    assert rep.status == "inconclusive"


def test_forced_zero_cells():
    g = straight_wire_gadget(6)
    ok = Gadget("z", g.pattern, GadgetSpec(g.spec.ports, g.spec.charge_rules, g.spec.relation,
                                           forced_zero_cells=((1, 2), (4, 3))))
    # bars sit at columns -1, 2, 5 or 0, 3, 6, never at 1 or 4
    assert verify_gadget(ok).status == "pass"
    bad = Gadget("z", g.pattern, GadgetSpec(g.spec.ports, g.spec.charge_rules, g.spec.relation,
                                            forced_zero_cells=((2, 2),)))
    assert verify_gadget(bad).status == "fail"


def test_geometry_check():
    g = straight_wire_gadget(6)
    assert verify_gadget(g, expect={"width": 6, "height": 6, "offsets": {"W": 2, "E": 2}}).status == "pass"
    assert verify_gadget(g, expect={"width": 90}, fail_fast=True).checks[0].status == "fail"
    assert verify_gadget(g, expect={"offsets": {"N": 2}}).status == "fail"


def test_json_round_trip(tmp_path):
    g = straight_wire_gadget(7)
    g = Gadget(g.name, g.pattern, g.spec, {"kind": "wire", "note": "x"})
    d = gadget_to_json(g)
    back = gadget_from_json(json.loads(json.dumps(d)))
    assert back == g and back.meta == g.meta
    assert gadget_to_json(back) == d
    save_gadget(g, tmp_path / "w.json")
    assert load_library(tmp_path) == [g]


def _propagation_instance(length=30):
    img = Pattern.from_cells({(x, y): 1 for x in (1, 2) for y in range(length)})
    return img


def test_phase_advances_upward_along_a_wire():
    # W0 at the bottom end; window d rows further up carries phase d mod 3
    img = _propagation_instance(12)
    inst = build_instance(PreimageQuery(img, constraints=TriPattern(wire_signal_cells(0, V, (0, 11)))))
    with sat.open_session(inst.cnf) as s:
        for d in range(12):
            lits = inst.lits(wire_signal_cells(d % 3, V, (0, 11 - d)))
            sel = inst.cnf.new_var()
            s.add_clause([-sel] + [-l for l in lits])
            assert not s.solve([sel])
