"""CDCL kernel: two-watched-literal propagation, decision heuristics, and
the first-UIP conflict analysis family shared by every enumeration engine.

Three analysis scopes are supported:

* ``level``    - classic first UIP over the current decision level, used by
                 SAT-style search (blocking engine); the asserting literal is
                 enqueued by the caller after backjumping.
* ``sublevel`` - first UIP within the current sublevel; assignments from
                 earlier sublevels of the same level are treated like
                 lower-level literals.
* ``dlevel``   - first UIP over the whole level where flipped decisions
                 (NULL antecedent) are not expanded but negated into the
                 clause.

Restarts and clause deletion are deliberately absent: enumeration relies on
learned and blocking clauses staying put.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .formula import BLOCKING, LEARNED, Clause, CnfFormula
from .trail import UNASSIGNED, Trail

ACTIVITY_DECAY = 0.95
ACTIVITY_RESCALE = 1e100


class SearchHalted(Exception):
    """Raised inside resolve loops when enumeration is provably finished."""


class LimitExceeded(Exception):
    """A run hit its wall-clock or memory budget."""

    def __init__(self, kind: str):
        super().__init__(f"{kind} limit exceeded")
        self.kind = kind


@dataclass
class Budget:
    """Wall-clock and (accounting-based) memory limits for one run."""

    time_limit: float | None = None
    mem_limit: int | None = None
    started: float = field(default_factory=time.monotonic)
    mem_used: int = 0
    peak_mem: int = 0

    def charge(self, nbytes: int) -> None:
        self.mem_used += nbytes
        if self.mem_used > self.peak_mem:
            self.peak_mem = self.mem_used
        if self.mem_limit is not None and self.mem_used > self.mem_limit:
            raise LimitExceeded("memory")

    def release(self, nbytes: int) -> None:
        self.mem_used -= nbytes

    def check_time(self) -> None:
        if self.time_limit is not None:
            if time.monotonic() - self.started >= self.time_limit:
                raise LimitExceeded("time")

    def elapsed(self) -> float:
        return time.monotonic() - self.started


@dataclass
class SolverStats:
    decisions: int = 0
    propagations: int = 0
    conflicts: int = 0
    learned_clauses: int = 0
    blocking_clauses: int = 0
    max_trail: int = 0
    cache_hits: int = 0
    cache_misses: int = 0
    solutions: int = 0
    restarts: int = 0


# attach_clause statuses
OPEN = "open"
SATISFIED = "satisfied"
UNIT = "unit"
FALSIFIED = "falsified"

# per-clause memory estimate: lits + object overhead
_CLAUSE_BASE_BYTES = 64
_LIT_BYTES = 8


def _enc(lit: int) -> int:
    v = lit if lit > 0 else -lit
    return (v << 1) | (lit < 0)


class ClauseStore:
    """Problem, learned, and blocking clauses plus their watch lists.

    Blocking clauses are never deleted; learned clauses are kept as well
    since the enumeration engines rely on them to encode exhausted regions.
    """

    def __init__(self, formula: CnfFormula):
        self.formula = formula
        self.problem: list[Clause] = [c for c in formula.clauses if len(c) > 0]
        self.learned: list[Clause] = []
        self.blocking: list[Clause] = []
        n = formula.num_vars
        self.watches: list[list[Clause]] = [[] for _ in range(2 * (n + 1))]
        self.pending_units: list[Clause] = []

    def watchers_of(self, lit: int) -> list[Clause]:
        return self.watches[_enc(lit)]

    def all_clauses(self) -> list[Clause]:
        return self.problem + self.learned + self.blocking


class Kernel:
    """One solver instance: a trail, a clause store, and heuristic state."""

    def __init__(self, formula: CnfFormula, budget: Budget | None = None,
                 fixed_order: bool = False,
                 decide_order: list[int] | None = None):
        self.formula = formula
        self.n = formula.num_vars
        self.store = ClauseStore(formula)
        self.trail = Trail(self.n)
        self.budget = budget or Budget()
        self.stats = SolverStats()
        self.fixed_order = fixed_order
        # test hook: literals decided (in order) before the heuristic kicks in
        self.decide_order = list(decide_order) if decide_order else []
        self._decide_cursor = 0
        self.activity = [0.0] * (self.n + 1)
        self.var_inc = 1.0
        self.saved_phase: list[int] = [UNASSIGNED] * (self.n + 1)
        self.use_saved_phase = False
        self.qhead = 0
        self.root_conflict = False
        for c in self.store.problem:
            if self.attach_clause(c) == FALSIFIED:
                self.root_conflict = True

    # ------------------------------------------------------------------
    # clause attachment and the trail

    def attach_clause(self, clause: Clause) -> str:
        """Register a clause under the current trail and report its status.

        Watches go to non-false literals when possible; otherwise to the most
        recently falsified ones so the watch invariant survives backtracking.
        The caller is responsible for acting on UNIT/FALSIFIED.
        """
        self.budget.charge(_CLAUSE_BASE_BYTES + _LIT_BYTES * len(clause))
        lits = clause.lits
        if len(lits) == 0:
            return FALSIFIED
        if len(lits) == 1:
            self.store.pending_units.append(clause)
            v = self.trail.value_of(lits[0])
            if v == 1:
                return SATISFIED
            if v == 0:
                return FALSIFIED
            return UNIT
        value_of = self.trail.value_of
        free = [i for i, l in enumerate(lits) if value_of(l) != 0]
        pos = self.trail.positions
        if len(free) >= 2:
            i0, i1 = free[0], free[1]
            status = OPEN
            if any(value_of(lits[i]) == 1 for i in free):
                status = SATISFIED
        elif len(free) == 1:
            i0 = free[0]
            false_idx = [i for i in range(len(lits)) if i != i0]
            i1 = max(false_idx, key=lambda i: pos[abs(lits[i])])
            status = SATISFIED if value_of(lits[i0]) == 1 else UNIT
        else:
            by_pos = sorted(range(len(lits)),
                            key=lambda i: pos[abs(lits[i])], reverse=True)
            i0, i1 = by_pos[0], by_pos[1]
            status = FALSIFIED
        lits[0], lits[i0] = lits[i0], lits[0]
        if i1 == 0:
            i1 = i0   # original head moved there in the swap above
        lits[1], lits[i1] = lits[i1], lits[1]
        self.store.watchers_of(lits[0]).append(clause)
        self.store.watchers_of(lits[1]).append(clause)
        return status

    def add_learned(self, clause: Clause) -> None:
        clause.origin = LEARNED
        clause.cid = len(self.store.learned)
        self.store.learned.append(clause)
        self.stats.learned_clauses += 1

    def add_blocking(self, clause: Clause) -> None:
        clause.origin = BLOCKING
        clause.cid = len(self.store.blocking)
        self.store.blocking.append(clause)
        self.stats.blocking_clauses += 1

    def enqueue(self, lit: int, reason: Clause | None = None,
                is_decision: bool = False) -> None:
        self.trail.assign(lit, reason=reason, is_decision=is_decision)
        if len(self.trail) > self.stats.max_trail:
            self.stats.max_trail = len(self.trail)

    def cancel_to(self, level: int) -> None:
        self.trail.cancel_to(level)
        self.qhead = min(self.qhead, len(self.trail.entries))

    # ------------------------------------------------------------------
    # unit propagation

    def propagate(self) -> Clause | None:
        """Run unit propagation to fixpoint; return the falsified clause on
        conflict (halting immediately), else None."""
        self.budget.check_time()
        trail = self.trail
        values = trail.values
        watches = self.store.watches
        # single-literal clauses have no watches; re-assert them here
        for c in self.store.pending_units:
            lit = c.lits[0]
            v = values[abs(lit)]
            if v == UNASSIGNED:
                self.enqueue(lit, reason=c)
                self.stats.propagations += 1
            elif (v == 1) != (lit > 0):
                self.qhead = len(trail.entries)
                self.stats.conflicts += 1
                return c
        entries = trail.entries
        while self.qhead < len(entries):
            lit = entries[self.qhead].lit
            self.qhead += 1
            false_lit = -lit
            v = false_lit if false_lit > 0 else -false_lit
            enc = (v << 1) | (false_lit < 0)
            watchers = watches[enc]
            kept: list[Clause] = []
            conflict: Clause | None = None
            idx = 0
            for idx, clause in enumerate(watchers):
                lits = clause.lits
                if lits[0] == false_lit:
                    lits[0], lits[1] = lits[1], lits[0]
                other = lits[0]
                ov = values[other if other > 0 else -other]
                if ov != UNASSIGNED and (ov == 1) == (other > 0):
                    kept.append(clause)
                    continue
                moved = False
                for k in range(2, len(lits)):
                    cand = lits[k]
                    cv = values[cand if cand > 0 else -cand]
                    if cv == UNASSIGNED or (cv == 1) == (cand > 0):
                        lits[1], lits[k] = lits[k], lits[1]
                        cv2 = cand if cand > 0 else -cand
                        watches[(cv2 << 1) | (cand < 0)].append(clause)
                        moved = True
                        break
                if moved:
                    continue
                kept.append(clause)
                if ov != UNASSIGNED:
                    conflict = clause
                    idx += 1
                    break
                self.enqueue(other, reason=clause)
                self.stats.propagations += 1
            if conflict is not None:
                kept.extend(watchers[idx:])
                watches[enc] = kept
                self.qhead = len(entries)
                self.stats.conflicts += 1
                return conflict
            watches[enc] = kept
        return None

    # ------------------------------------------------------------------
    # decision heuristics

    def bump_activity(self, var: int) -> None:
        act = self.activity[var] + self.var_inc
        self.activity[var] = act
        if act > ACTIVITY_RESCALE:
            inv = 1.0 / ACTIVITY_RESCALE
            for i in range(1, self.n + 1):
                self.activity[i] *= inv
            self.var_inc *= inv

    def decay_activity(self) -> None:
        self.var_inc /= ACTIVITY_DECAY

    def pick_branch_var(self) -> int | None:
        """Next unassigned variable: fixed index order, or highest activity
        with lowest-index tie-break."""
        values = self.trail.values
        if self.fixed_order:
            for v in range(1, self.n + 1):
                if values[v] == UNASSIGNED:
                    return v
            return None
        best = None
        best_act = -1.0
        activity = self.activity
        for v in range(1, self.n + 1):
            if values[v] == UNASSIGNED and activity[v] > best_act:
                best = v
                best_act = activity[v]
        return best

    def decide(self) -> int | None:
        """Pick the next decision literal, or None when all assigned.

        Consumes the injected decision order first, then falls back to the
        heuristic; the default phase is false unless a saved phase exists.
        """
        while self._decide_cursor < len(self.decide_order):
            lit = self.decide_order[self._decide_cursor]
            if not self.trail.is_assigned(abs(lit)):
                return lit
            self._decide_cursor += 1
        var = self.pick_branch_var()
        if var is None:
            return None
        if self.use_saved_phase and self.saved_phase[var] != UNASSIGNED:
            return var if self.saved_phase[var] == 1 else -var
        return -var

    def make_decision(self, lit: int) -> None:
        if self._decide_cursor < len(self.decide_order) and \
                self.decide_order[self._decide_cursor] == lit:
            self._decide_cursor += 1
        self.trail.new_level()
        self.enqueue(lit, reason=None, is_decision=True)
        self.stats.decisions += 1

    # ------------------------------------------------------------------
    # conflict analysis

    def analyze(self, conflict: Clause, scope: str = "level",
                stop_lit: int | None = None) -> LearnedClause:
        """Derive a first-UIP clause from ``conflict``.

        ``scope`` selects the analysis family (see module docstring).  With
        ``stop_lit`` the traversal never expands that literal, so it ends up
        as the clause's UIP (used by conflict-directed backjumping).

        The clause's first literal is the negated UIP.  Literals assigned at
        level 0 are dropped (they are permanent facts).
        """
        trail = self.trail
        dl = trail.level
        var_level = trail.var_level
        var_sub = trail.var_sublevel
        reasons = trail.reasons
        entries = trail.entries

        lits_at_dl = [l for l in conflict.lits if var_level[abs(l)] == dl]
        if not lits_at_dl:
            raise RuntimeError("conflict clause has no current-level literal")
        if scope == "sublevel":
            cur_sub = max(var_sub[abs(l)] for l in lits_at_dl)
        else:
            cur_sub = trail.cur_sublevel[dl]

        if scope == "sublevel":
            def in_scope(v: int) -> bool:
                return var_level[v] == dl and var_sub[v] == cur_sub
        else:
            def in_scope(v: int) -> bool:
                return var_level[v] == dl

        seen: set[int] = set()
        out: list[int] = []
        pending = 0
        stop_var = abs(stop_lit) if stop_lit is not None else 0

        tainted = trail.tainted

        def absorb(clause_lits, skip_var: int) -> None:
            nonlocal pending
            for q in clause_lits:
                v = abs(q)
                if v == skip_var or v in seen:
                    continue
                if var_level[v] == 0 and not tainted[v]:
                    continue   # formula-entailed fact: safe to drop
                seen.add(v)
                self.bump_activity(v)
                if in_scope(v):
                    pending += 1
                else:
                    out.append(q)

        absorb(conflict.lits, 0)
        idx = len(entries) - 1
        uip = 0
        stop_idx = -1
        while True:
            if stop_idx >= 0 and pending == 1:
                e = entries[stop_idx]   # only the pivot remains
            else:
                while True:
                    if idx < 0:
                        raise RuntimeError("conflict analysis ran off the trail")
                    e = entries[idx]
                    v = abs(e.lit)
                    if v in seen and in_scope(v):
                        if v == stop_var and pending > 1:
                            stop_idx = idx   # defer: pivot must end as UIP
                            idx -= 1
                            continue
                        break
                    idx -= 1
            v = abs(e.lit)
            pending -= 1
            if pending == 0 and (stop_var == 0 or v == stop_var):
                uip = e.lit
                break
            # in targeted mode an intermediate sole survivor is expanded,
            # not adopted: the traversal must run on until the pivot
            idx -= 1
            if e.reason is None:
                out.append(-e.lit)   # flip: not expandable, keep in clause
            else:
                absorb(e.reason.lits, v)
        if stop_lit is not None and uip != stop_lit:
            raise RuntimeError("targeted analysis did not end at the pivot")

        lits = [-uip] + out
        assert_level = 0
        if out:
            assert_level = max(var_level[abs(l)] for l in out)
        self.decay_activity()
        return LearnedClause(Clause(lits), uip, assert_level, dl, cur_sub)


@dataclass(eq=False)
class LearnedClause:
    """A conflict clause plus the analysis metadata the resolvers need."""

    clause: Clause
    uip: int                 # the assignment the traversal stopped at
    assert_level: int        # highest level among non-UIP literals (0 if unit)
    conflict_level: int
    conflict_sublevel: int

    @property
    def lits(self) -> list[int]:
        return self.clause.lits


def clause_status(kernel: Kernel, clause: Clause) -> tuple[str, int | None]:
    """Evaluate a clause under the current trail.

    Returns (status, unit_literal).  UNIT means exactly one literal is
    unassigned and the rest are false.
    """
    unit_lit = None
    free = 0
    for l in clause.lits:
        v = kernel.trail.value_of(l)
        if v == 1:
            return SATISFIED, None
        if v == UNASSIGNED:
            free += 1
            unit_lit = l
            if free > 1:
                return OPEN, None
    if free == 1:
        return UNIT, unit_lit
    return FALSIFIED, None
