import random

from allsat import Kernel, entails, from_clause_lists
from allsat.kernel import FALSIFIED, UNIT, clause_status
from allsat.trail import UNASSIGNED

from conftest import random_instances


def drive(kernel, decisions):
    """Propagate, then alternate decision/propagation; stop at a conflict."""
    conflict = kernel.propagate()
    for lit in decisions:
        if conflict is not None:
            break
        if kernel.trail.is_assigned(abs(lit)):
            continue
        kernel.make_decision(lit)
        conflict = kernel.propagate()
    return conflict


def test_propagation_trace_worked_example(ex31):
    k = Kernel(ex31)
    assert k.propagate() is None
    k.make_decision(-5)
    assert k.propagate() is None
    trail = [(e.lit, e.level, e.reason.cid if e.reason else None)
             for e in k.trail.entries]
    assert trail == [(-5, 1, None), (-6, 1, 4)]       # -x6 via C5
    k.make_decision(3)
    assert k.propagate() is None
    trail = [(e.lit, e.level, e.reason.cid if e.reason else None)
             for e in k.trail.entries]
    # x1 via C1 then x4 via C3, in this order
    assert trail == [(-5, 1, None), (-6, 1, 4), (3, 2, None),
                     (1, 2, 0), (4, 2, 2)]
    k.make_decision(2)
    assert k.propagate() is None
    assert k.trail.all_assigned()


def test_conflict_worked_example(ex31):
    k = Kernel(ex31)
    conflict = drive(k, [-4, -6, -2])
    assert conflict is not None
    learned = k.analyze(conflict, scope="level")
    assert sorted(learned.lits, key=abs) == [-3, 4]   # x4 or not-x3
    assert learned.assert_level == 1


def test_conflict_on_empty_formula():
    f = from_clause_lists(3, [])
    k = Kernel(f)
    assert k.propagate() is None
    assert len(k.trail) == 0


def test_decision_is_uip_when_alone(ex41):
    # blocking clause forces an immediate conflict whose only current-level
    # vertex chain collapses onto the decision
    k = Kernel(ex41)
    drive(k, [-1])
    assert k.trail.all_assigned()


def naive_propagate(f, decisions):
    """Independent oracle: repeated full scans until fixpoint/conflict.

    Returns (assignment dict, conflicted) over the same decision sequence,
    deciding only when the previous propagation reached fixpoint.
    """
    values = {}
    clauses = [list(c.lits) for c in f.clauses if len(c) > 0]

    def scan():
        changed = True
        while changed:
            changed = False
            for lits in clauses:
                unassigned = [l for l in lits
                              if values.get(abs(l)) is None]
                satisfied = any(values.get(abs(l)) == (1 if l > 0 else 0)
                                for l in lits)
                if satisfied:
                    continue
                if not unassigned:
                    return True
                if len(unassigned) == 1:
                    l = unassigned[0]
                    values[abs(l)] = 1 if l > 0 else 0
                    changed = True
        return False

    if scan():
        return values, True
    for lit in decisions:
        if values.get(abs(lit)) is not None:
            continue
        values[abs(lit)] = 1 if lit > 0 else 0
        if scan():
            return values, True
    return values, False


def test_watched_literals_match_naive_scan():
    rng = random.Random(5)
    for f in random_instances(seed=11, count=40, n_range=(3, 15)):
        decisions = [v if rng.random() < 0.5 else -v
                     for v in rng.sample(range(1, f.num_vars + 1),
                                         f.num_vars)]
        k = Kernel(f)
        conflict = k.propagate()
        for lit in decisions:
            if conflict is not None:
                break
            if k.trail.is_assigned(abs(lit)):
                continue
            k.make_decision(lit)
            conflict = k.propagate()
        got = {v: k.trail.values[v] for v in range(1, f.num_vars + 1)
               if k.trail.values[v] != UNASSIGNED}
        want, want_conflict = naive_propagate(f, decisions)
        assert (conflict is not None) == want_conflict
        if not want_conflict:
            assert got == want


def test_propagation_fixpoint_no_unit_or_false_clause():
    for f in random_instances(seed=21, count=20):
        k = Kernel(f)
        if k.root_conflict:
            continue
        conflict = drive(k, [-v for v in range(1, f.num_vars + 1)])
        if conflict is not None:
            continue
        for clause in k.store.all_clauses():
            status, _ = clause_status(k, clause)
            assert status not in (UNIT, FALSIFIED)


def collect_conflicts(f, rng, scope):
    """Generate conflicts via random decisions; return analysis results."""
    k = Kernel(f)
    out = []
    conflict = k.propagate()
    guard = 0
    while conflict is None and not k.trail.all_assigned() and guard < 100:
        guard += 1
        v = next(v for v in range(1, f.num_vars + 1)
                 if not k.trail.is_assigned(v))
        k.make_decision(v if rng.random() < 0.5 else -v)
        conflict = k.propagate()
    if conflict is None or k.trail.level == 0:
        return out
    lmax = max(k.trail.var_level[abs(l)] for l in conflict.lits)
    if lmax == 0:
        return out
    k.cancel_to(lmax)
    out.append((k, k.analyze(conflict, scope=scope)))
    return out


def test_learned_clauses_entailed_and_falsified():
    rng = random.Random(3)
    for f in random_instances(seed=31, count=40, n_range=(4, 10)):
        for k, learned in collect_conflicts(f, rng, "level"):
            # falsified by the pre-conflict trail
            assert all(k.trail.value_of(l) == 0 for l in learned.lits)
            # entailed by problem clauses (nothing else was learned yet)
            assert entails(f, learned.lits)
            # exactly one literal of the conflict level
            dl = learned.conflict_level
            at_dl = [l for l in learned.lits
                     if k.trail.var_level[abs(l)] == dl]
            assert at_dl == [learned.lits[0]]


def test_decide_exhausted_returns_none(ex41):
    k = Kernel(ex41)
    drive(k, [-1])
    assert k.trail.all_assigned()
    assert k.decide() is None


def test_decide_fixed_order():
    f = from_clause_lists(6, [[1, 2, 3]])
    k = Kernel(f, fixed_order=True)
    k.propagate()
    k.make_decision(k.decide())
    assert k.trail.entries[0].lit == -1
    k.propagate()
    assert k.decide() == -2


def test_decide_saved_phase():
    f = from_clause_lists(5, [[1, 2]])
    k = Kernel(f)
    k.use_saved_phase = True
    k.saved_phase[5] = 0
    k.saved_phase[3] = 1
    k.activity[5] = 2.0
    k.activity[3] = 1.0
    assert k.decide() == -5
    k.make_decision(-5)
    assert k.decide() == 3


def test_stats_counters(ex31):
    k = Kernel(ex31)
    drive(k, [-5, 3, 2])
    assert k.stats.decisions == 3
    assert k.stats.propagations == 3   # -6, 1, 4
    assert k.stats.max_trail == 6
