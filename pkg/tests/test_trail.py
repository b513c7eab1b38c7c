import pytest

from allsat.formula import Clause
from allsat.trail import UNASSIGNED, Trail


def test_assign_levels_and_views():
    t = Trail(6)
    t.new_level()
    t.assign(-5, is_decision=True)
    assert t.var_level[5] == 1
    assert t.values[5] == 0
    c5 = Clause([5, -6], cid=4)
    t.assign(-6, reason=c5)
    assert t.reasons[6] is c5
    assert t.var_level[6] == 1
    t.check_consistent()


def test_level0_fact():
    t = Trail(3)
    unit = Clause([1])
    t.assign(1, reason=unit)
    assert t.var_level[1] == 0
    assert t.entries[0].reason is unit


def test_double_assign_rejected():
    t = Trail(2)
    t.assign(1)
    with pytest.raises(RuntimeError):
        t.assign(-1)


def build_three_levels():
    t = Trail(6)
    t.assign(1)                       # level 0
    t.new_level()
    t.assign(2, is_decision=True)
    t.assign(3, reason=Clause([-2, 3]))
    t.new_level()
    t.assign(4, is_decision=True)
    t.new_level()
    t.assign(-5, is_decision=True)
    t.assign(6, reason=Clause([5, 6]))
    return t


def test_cancel_to_removes_upper_levels():
    t = build_three_levels()
    t.cancel_to(1)
    assert [e.lit for e in t.entries] == [1, 2, 3]
    assert t.level == 1
    assert t.values[4] == UNASSIGNED and t.values[5] == UNASSIGNED
    t.check_consistent()


def test_cancel_to_current_level_is_noop():
    t = build_three_levels()
    before = [e.lit for e in t.entries]
    t.cancel_to(t.level)
    assert [e.lit for e in t.entries] == before


def test_cancel_to_root_keeps_level0():
    t = build_three_levels()
    t.cancel_to(0)
    assert [e.lit for e in t.entries] == [1]
    assert t.level == 0
    t.check_consistent()


def test_sublevels_open_at_flips():
    t = Trail(4)
    t.new_level()
    t.assign(1, is_decision=True)
    assert t.entries[0].sublevel == 0
    t.new_level()
    t.assign(2, is_decision=True)
    t.cancel_to(1)
    t.begin_sublevel()
    t.assign(-2)                      # flipped decision
    assert t.entries[-1].sublevel == 1
    assert t.entries[-1].level == 1
    t.assign(3, reason=Clause([2, 3]))
    assert t.entries[-1].sublevel == 1  # implied entries inherit


def test_implied_entries_have_unit_antecedent_at_their_position():
    t = build_three_levels()
    for idx, e in enumerate(t.entries):
        if e.reason is None:
            continue
        # under the prefix before the entry, the antecedent must be unit
        # with this literal as the unit literal
        prefix = {x.lit for x in t.entries[:idx]}
        unassigned = [l for l in e.reason.lits
                      if l not in prefix and -l not in prefix]
        falsified = [l for l in e.reason.lits if -l in prefix]
        assert unassigned == [e.lit]
        assert len(falsified) == len(e.reason.lits) - 1


def test_decision_of():
    t = build_three_levels()
    assert t.decision_of(1).lit == 2
    assert t.decision_of(3).lit == -5
    with pytest.raises(RuntimeError):
        Trail(2).decision_of(0)
