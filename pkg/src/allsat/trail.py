"""Assignment trail with decision levels, sublevels, and antecedents.

The trail doubles as the implication graph: an entry's antecedent clause
names the assignments that forced it, and entries with no antecedent (NULL)
are decisions or flipped decisions inserted by chronological backtracking.
A new sublevel opens at every flip, so conflict analysis can treat earlier
sublevels of the current level like lower levels.
"""

from __future__ import annotations

from dataclasses import dataclass

from .formula import Clause

UNASSIGNED = -1


@dataclass(eq=False)
class TrailEntry:
    lit: int
    level: int
    sublevel: int
    reason: Clause | None
    is_decision: bool

    @property
    def has_null_antecedent(self) -> bool:
        return self.reason is None


@dataclass(eq=False)
class ConflictRecord:
    """A clause whose literals are all false under the current trail."""

    clause: Clause


class Trail:
    """Ordered assignment sequence plus a per-variable view of it."""

    def __init__(self, num_vars: int):
        self.num_vars = num_vars
        self.entries: list[TrailEntry] = []
        n1 = num_vars + 1
        self.values = [UNASSIGNED] * n1   # var -> 0/1/UNASSIGNED
        self.var_level = [0] * n1
        self.var_sublevel = [0] * n1
        self.reasons: list[Clause | None] = [None] * n1
        self.positions = [0] * n1         # var -> index into entries
        # a variable is tainted when its value depends on a flipped decision;
        # tainted level-0 facts are search choices, not consequences of the
        # formula, so conflict analysis must not silently drop them
        self.tainted = [False] * n1
        self.level = 0
        self.level_start = [0]            # level -> first entry index
        self.cur_sublevel = [0]           # level -> active sublevel

    def __len__(self) -> int:
        return len(self.entries)

    def value_of(self, lit: int) -> int:
        """Truth value of a literal: 1 true, 0 false, UNASSIGNED otherwise."""
        v = self.values[abs(lit)]
        if v == UNASSIGNED:
            return UNASSIGNED
        return v if lit > 0 else 1 - v

    def is_assigned(self, var: int) -> bool:
        return self.values[var] != UNASSIGNED

    def all_assigned(self) -> bool:
        return len(self.entries) == self.num_vars

    def new_level(self) -> int:
        self.level += 1
        self.level_start.append(len(self.entries))
        self.cur_sublevel.append(0)
        return self.level

    def begin_sublevel(self) -> int:
        """Open a new sublevel at the current level (called at each flip)."""
        self.cur_sublevel[self.level] += 1
        return self.cur_sublevel[self.level]

    def assign(self, lit: int, reason: Clause | None = None,
               is_decision: bool = False) -> TrailEntry:
        """Append an assignment at the current level and sublevel."""
        var = abs(lit)
        if self.values[var] != UNASSIGNED:
            raise RuntimeError(f"variable {var} already assigned")
        entry = TrailEntry(lit, self.level, self.cur_sublevel[self.level],
                           reason, is_decision)
        self.positions[var] = len(self.entries)
        self.entries.append(entry)
        self.values[var] = 1 if lit > 0 else 0
        self.var_level[var] = self.level
        self.var_sublevel[var] = entry.sublevel
        self.reasons[var] = reason
        if is_decision:
            self.tainted[var] = False
        elif reason is None:
            self.tainted[var] = True   # flipped decision
        else:
            self.tainted[var] = any(self.tainted[abs(q)]
                                    for q in reason.lits if abs(q) != var)
        return entry

    def decision_of(self, level: int) -> TrailEntry:
        """The decision entry that opened ``level`` (level >= 1)."""
        if not 1 <= level <= self.level:
            raise RuntimeError(f"no decision at level {level}")
        e = self.entries[self.level_start[level]]
        if not e.is_decision:
            raise RuntimeError(f"level {level} does not start with a decision")
        return e

    def decisions(self) -> list[TrailEntry]:
        return [e for e in self.entries if e.is_decision]

    def cancel_to(self, level: int) -> None:
        """Remove every entry above ``level`` and make it current."""
        if level >= self.level:
            return
        keep = self.level_start[level + 1]
        for e in self.entries[keep:]:
            var = abs(e.lit)
            self.values[var] = UNASSIGNED
            self.reasons[var] = None
            self.tainted[var] = False
        del self.entries[keep:]
        del self.level_start[level + 1:]
        del self.cur_sublevel[level + 1:]
        self.level = level

    def check_consistent(self) -> None:
        """Internal consistency: the per-variable view mirrors the entries."""
        seen = set()
        last_level = 0
        for idx, e in enumerate(self.entries):
            var = abs(e.lit)
            assert var not in seen, f"variable {var} appears twice"
            seen.add(var)
            assert self.values[var] == (1 if e.lit > 0 else 0)
            assert self.var_level[var] == e.level
            assert self.positions[var] == idx
            assert e.level >= last_level, "levels must be non-decreasing"
            last_level = e.level
        for var in range(1, self.num_vars + 1):
            if var not in seen:
                assert self.values[var] == UNASSIGNED
