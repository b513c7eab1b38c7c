"""Enumeration without blocking clauses.

Solutions are left behind by chronological backtracking (BT) that inserts
the flipped decision with NULL antecedent, so the search can never re-enter
an exhausted branch.  Conflict resolution is configurable:

* ``bt``    - learn, then chronological backtracking;
* ``bj``    - backjumping clipped at the limit level (the first level where
              the assignment diverges from the last solution);
* ``cbj``   - conflict-directed backjumping by resolving successive conflict
              clauses;
* ``bjcbj`` - ``bj`` while below the divergence point, ``cbj`` at it.

Either first-UIP scheme (``sublevel`` or ``dlevel``) supplies the learned
clauses.  Learned clauses here are only recorded - no assignment is enqueued
by analysis itself; implications surface through regular propagation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .formula import Clause, CnfFormula
from .kernel import (FALSIFIED, UNIT, Budget, Kernel, SearchHalted,
                     clause_status)

UIP_SCHEMES = ("sublevel", "dlevel")
STRATEGIES = ("bt", "bj", "cbj", "bjcbj")


@dataclass
class NonBlockingConfig:
    uip_scheme: str = "dlevel"
    strategy: str = "bj"

    def __post_init__(self):
        if self.uip_scheme not in UIP_SCHEMES:
            raise ValueError(f"unknown uip scheme {self.uip_scheme!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


def resolve_clauses(c1: Clause, c2: Clause, pivot_var: int) -> Clause:
    """Binary resolution of two clauses on ``pivot_var``."""
    lits: list[int] = []
    seen = set()
    for source in (c1.lits, c2.lits):
        for l in source:
            if abs(l) == pivot_var or l in seen:
                continue
            seen.add(l)
            lits.append(l)
    return Clause(lits)


class NonBlockingSolver:
    """Total-assignment enumerator (Algorithm: propagate / resolve / report /
    backtrack loop with a limit level)."""

    def __init__(self, formula: CnfFormula,
                 cfg: NonBlockingConfig | None = None, sink=None,
                 budget: Budget | None = None,
                 decide_order: list[int] | None = None,
                 fixed_order: bool = False):
        self.formula = formula
        self.cfg = cfg or NonBlockingConfig()
        self.sink = sink
        self.kernel = Kernel(formula, budget=budget, fixed_order=fixed_order,
                             decide_order=decide_order)
        self.lim = 0
        self.count = 0
        self.complete = False

    @property
    def stats(self):
        return self.kernel.stats

    # hook point: formula-BDD caching enrolls/prunes right before any
    # assignments are canceled (receives the landing level)
    def _before_cancel(self, level: int) -> None:
        pass

    def _cancel(self, level: int) -> None:
        self._before_cancel(level)
        self.kernel.cancel_to(level)

    def run(self) -> int:
        k = self.kernel
        if self.formula.has_empty_clause() or k.root_conflict:
            self.complete = True
            return 0
        pending: Clause | None = None
        try:
            while True:
                if pending is None:
                    pending = k.propagate()
                if pending is not None:
                    conflict, pending = pending, None
                    if k.trail.level <= 0:
                        break
                    conflict = self._normalize(conflict)
                    pending = self._resolve(conflict)
                elif k.trail.all_assigned():
                    self._report()
                    if k.trail.level <= 0:
                        break
                    self.backtrack_bt()
                    self.lim = k.trail.level
                else:
                    k.make_decision(k.decide())
        except SearchHalted:
            pass
        self.complete = True
        return self.count

    def _report(self) -> None:
        self.count += 1
        self.kernel.stats.solutions += 1
        if self.sink is not None:
            entries = self.kernel.trail.entries
            self.sink(tuple(sorted((e.lit for e in entries), key=abs)))

    def _normalize(self, conflict: Clause) -> Clause:
        """Make sure the conflict touches the current level.

        A clause can be falsified strictly below the current level (e.g. a
        learned clause re-attached after a clipped backjump).  The levels in
        between are then provably solution-free, so canceling them loses
        nothing; a clause false at level 0 ends the search.
        """
        k = self.kernel
        lmax = max(k.trail.var_level[abs(l)] for l in conflict.lits)
        if lmax == 0:
            raise SearchHalted
        if lmax < k.trail.level:
            self._cancel(lmax)
            self.lim = min(self.lim, lmax)
        return conflict

    # ------------------------------------------------------------------
    # backtracking primitives

    def backtrack_bt(self) -> None:
        """Cancel the top level and insert the flipped decision one level
        down with NULL antecedent, opening a new sublevel there."""
        k = self.kernel
        t = k.trail
        dec = t.decision_of(t.level).lit
        self._cancel(t.level - 1)
        t.begin_sublevel()
        k.enqueue(-dec, reason=None, is_decision=False)

    def _backtrack_flip_at(self, level: int) -> None:
        """Cancel everything above ``level``, then flip its decision into
        ``level - 1`` (two-argument backtracking used by CBJ)."""
        k = self.kernel
        t = k.trail
        dec = t.decision_of(level).lit
        self._cancel(level - 1)
        t.begin_sublevel()
        k.enqueue(-dec, reason=None, is_decision=False)

    # ------------------------------------------------------------------
    # conflict resolution strategies

    def _resolve(self, conflict: Clause) -> Clause | None:
        strategy = self.cfg.strategy
        if strategy == "bt":
            return self.resolve_bt(conflict)
        if strategy == "bj":
            return self.resolve_bj(conflict)
        if strategy == "cbj":
            return self.resolve_cbj(conflict)
        return self.resolve_bjcbj(conflict)

    def _attach_learned(self, clause: Clause) -> Clause | None:
        """Attach a recorded clause under the post-backtrack trail; enqueue
        its implication if unit, surface it as a conflict if falsified."""
        k = self.kernel
        status = k.attach_clause(clause)
        if status == FALSIFIED:
            return clause
        if status == UNIT:
            k.enqueue(clause.lits[0], reason=clause)
        return None

    def resolve_bt(self, conflict: Clause) -> Clause | None:
        k = self.kernel
        learned = k.analyze(conflict, scope=self.cfg.uip_scheme)
        k.add_learned(learned.clause)
        self.backtrack_bt()
        self.lim = k.trail.level
        return self._attach_learned(learned.clause)

    def resolve_bj(self, conflict: Clause) -> Clause | None:
        """Backjump to the asserting level but never below the limit level;
        at the limit, fall back to BT so the flip guards found solutions."""
        k = self.kernel
        learned = k.analyze(conflict, scope=self.cfg.uip_scheme)
        k.add_learned(learned.clause)
        if self.lim < k.trail.level:
            bl = max(learned.assert_level, self.lim)
            self._cancel(bl)
        else:
            self.backtrack_bt()
            self.lim = k.trail.level
        return self._attach_learned(learned.clause)

    def resolve_cbj(self, conflict: Clause | None) -> Clause | None:
        """Resolution-driven backjumping: pair each conflict clause with the
        clause of the follow-up conflict of its unit implication, resolve,
        and jump below the highest level of the resolvent."""
        k = self.kernel
        stack: list[Clause] = []
        pending = conflict
        while True:
            if pending is not None:
                if k.trail.level <= 0:
                    raise SearchHalted
                pending = self._normalize(pending)
                learned = k.analyze(pending, scope=self.cfg.uip_scheme)
                pending = None
                k.add_learned(learned.clause)
                stack.append(learned.clause)
                self.backtrack_bt()
                k.attach_clause(learned.clause)
            elif stack:
                cl1 = stack.pop()
                status, unit = clause_status(k, cl1)
                if status == UNIT:
                    k.enqueue(unit, reason=cl1)
                    follow_up = k.propagate()
                    if follow_up is not None:
                        if k.trail.level <= 0:
                            raise SearchHalted
                        targeted = k.analyze(follow_up,
                                             scope=self.cfg.uip_scheme,
                                             stop_lit=unit)
                        cl3 = resolve_clauses(cl1, targeted.clause, abs(unit))
                        k.add_learned(cl3)
                        stack.append(cl3)
                        if not cl3.lits:
                            raise SearchHalted
                        bl = max(k.trail.var_level[abs(l)] for l in cl3.lits)
                        if bl <= 0:
                            raise SearchHalted
                        self._backtrack_flip_at(bl)
                        k.attach_clause(cl3)
                elif status == FALSIFIED:
                    pending = cl1
                    continue
            else:
                break
            follow_up = k.propagate()
            if follow_up is not None:
                pending = follow_up
        self.lim = k.trail.level
        return None

    def resolve_bjcbj(self, conflict: Clause) -> Clause | None:
        if self.lim < self.kernel.trail.level:
            return self.resolve_bj(conflict)
        return self.resolve_cbj(conflict)


def enumerate_nonblocking(formula: CnfFormula,
                          cfg: NonBlockingConfig | None = None, sink=None,
                          budget: Budget | None = None) -> int:
    """Emit every total satisfying assignment exactly once."""
    solver = NonBlockingSolver(formula, cfg, sink=sink, budget=budget)
    return solver.run()
