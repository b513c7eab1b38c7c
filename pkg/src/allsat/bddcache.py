"""Formula-BDD caching: enumeration that builds an OBDD of all solutions and
memoizes solved subinstances by an encoded key.

Keys pair a cut index with a canonical code of the prefix assignment:

* cutset mode    - the sorted ids of boundary clauses the prefix satisfies;
* separator mode - the sorted boundary variables assigned true.

Equal keys imply logically equivalent subinstances, so a key lookup that
hits lets the search graft the cached OBDD node onto the current prefix and
backtrack immediately instead of re-exploring.  Keys are computed from the
prefix variables only; assignments propagation made beyond the prefix are
consequences of it and cannot break key soundness.

Two engines host the cache.  On the non-blocking engine (fixed variable
order), pending keys enroll into the solved cache the moment backtracking
abandons their spine - the node then fills in as exhaustively as the search
itself does.  On the blocking engine, restarts abandon spines without
exhausting them, so early enrollment is unsound; there the cache instead
canonicalizes nodes at creation time, merging equivalent prefixes so every
individually enumerated solution streams into shared subgraphs.  Node
sharing is switched off when refreshing is active, because a dump must not
contain paths for solutions the search has yet to report.

When the node arena reaches the refresh threshold the diagram is dumped to
disk and all caching state restarts empty; the underlying search state is
untouched, so dumped path sets partition the solution set.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from .formula import Clause, CnfFormula, CutStructure, compute_cuts
from .kernel import Budget, SearchHalted
from .nonblocking import NonBlockingConfig, NonBlockingSolver
from .obdd import BOT, TOP, ObddStore, count_models, dump, extend_obdd
from .blocking import BlockingConfig, BlockingSolver
from .trail import UNASSIGNED

CACHE_MODES = ("cutset", "separator")

# reserved key meaning "every variable assigned": always maps to the true sink
TOP_KEY: tuple = (math.inf, 1)

_NODE_BYTES = 24
_KEY_BYTES = 48


@dataclass
class RefreshPolicy:
    """OBDD size threshold and where dumped parts go.

    ``threshold`` of None disables refreshing.  A finite threshold must
    exceed the variable count so a single path always fits.
    """

    threshold: int | None = None
    dump_dir: str | Path = "."
    stem: str = "allsat"

    def validate(self, num_vars: int) -> None:
        if self.threshold is not None and self.threshold <= num_vars:
            raise ValueError(
                f"refresh threshold {self.threshold} must exceed the "
                f"variable count {num_vars}")

    def resolve_dir(self) -> Path:
        override = os.environ.get("ALLSAT_DUMP_DIR")
        return Path(override) if override else Path(self.dump_dir)


def make_formula(formula: CnfFormula, cuts: CutStructure, values: list[int],
                 cut_index, mode: str) -> tuple:
    """Canonical cache key for the subinstance induced by the prefix
    ``values[1..cut_index]`` (``values`` indexed by variable).

    ``cut_index`` of ``math.inf`` (or anything beyond the last variable)
    yields the reserved all-assigned key.
    """
    if cut_index == math.inf:
        return TOP_KEY
    if mode == "cutset":
        code = []
        clauses = formula.clauses
        for cid in cuts.cutsets[cut_index]:
            for l in clauses[cid].lits:
                v = abs(l)
                if v <= cut_index and values[v] == (1 if l > 0 else 0):
                    code.append(cid)
                    break
        return (cut_index, tuple(code))
    if mode == "separator":
        code = tuple(v for v in cuts.separators[cut_index] if values[v] == 1)
        return (cut_index, code)
    raise ValueError(f"unknown cache mode {mode!r}")


@dataclass
class BddResult:
    store: ObddStore
    dumps: list[tuple[str, int]] = field(default_factory=list)
    total: int = 0
    complete: bool = False

    @property
    def dump_files(self) -> list[str]:
        return [f for f, _ in self.dumps]


class BddSolver(NonBlockingSolver):
    """Non-blocking engine with the encode / extend / enroll stages wired
    into every backtrack."""

    def __init__(self, formula: CnfFormula, cuts: CutStructure | None = None,
                 cfg: NonBlockingConfig | None = None,
                 cache_mode: str = "cutset",
                 policy: RefreshPolicy | None = None,
                 budget: Budget | None = None):
        super().__init__(formula, cfg, sink=None, budget=budget,
                         fixed_order=True)
        if cache_mode not in CACHE_MODES:
            raise ValueError(f"unknown cache mode {cache_mode!r}")
        self.cuts = cuts if cuts is not None else compute_cuts(formula)
        self.cache_mode = cache_mode
        self.policy = policy or RefreshPolicy()
        self.policy.validate(formula.num_vars)
        self.store = ObddStore(formula.num_vars)
        self.solved: dict[tuple, int] = {TOP_KEY: TOP}
        self.pending_keys: dict[int, tuple] = {}   # cut index -> code
        self.path: list[tuple[int, int]] = []
        self.dumps: list[tuple[str, int]] = []

    # ------------------------------------------------------------------

    def _values(self) -> list[int]:
        return self.kernel.trail.values

    def _key_at(self, cut_index) -> tuple:
        return make_formula(self.formula, self.cuts, self._values(),
                            cut_index, self.cache_mode)

    def _first_unassigned(self) -> int | None:
        values = self.kernel.trail.values
        for v in range(1, self.formula.num_vars + 1):
            if values[v] == UNASSIGNED:
                return v
        return None

    def _before_cancel(self, level: int) -> None:
        """Enroll stage: solved-subinstance keys migrate from the pending
        set to the cache just before their spine is canceled."""
        self._enroll(level)
        self._prune(level)

    def _enroll(self, bl: int) -> None:
        t = self.kernel.trail
        store = self.store
        for nid, direction in self.path:
            j = store.var[nid]
            if t.values[j] != direction:
                break
            if bl < t.var_level[j]:
                code = self.pending_keys.get(j - 1)
                if code is not None:
                    self.solved[(j - 1, code)] = nid
                    self.kernel.budget.charge(_KEY_BYTES)

    def _prune(self, bl: int) -> None:
        t = self.kernel.trail
        keep = {}
        for cut, code in self.pending_keys.items():
            j = cut + 1
            if t.values[j] != UNASSIGNED and t.var_level[j] <= bl:
                keep[cut] = code
        self.pending_keys = keep

    def _maybe_refresh(self) -> None:
        theta = self.policy.threshold
        if theta is None or self.store.size < theta - self.formula.num_vars:
            return
        part = len(self.dumps)
        directory = self.policy.resolve_dir()
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{self.policy.stem}.part{part}.obdd"
        count = count_models(self.store)
        try:
            with open(path, "w") as fh:
                dump(self.store, out=fh)
        except OSError as exc:
            raise RuntimeError(f"dump failed for {path}: {exc}") from exc
        self.dumps.append((str(path), count))
        self.store.reset()
        self.solved = {TOP_KEY: TOP}
        self.pending_keys.clear()
        self.path = []

    # ------------------------------------------------------------------

    def run_bdd(self) -> BddResult:
        k = self.kernel
        result = BddResult(self.store)
        if self.formula.has_empty_clause() or k.root_conflict:
            result.total = 0
            result.complete = True
            self.complete = True
            return result
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
                else:
                    i = self._first_unassigned()
                    cut_index = math.inf if i is None else i - 1
                    key = self._key_at(cut_index)
                    node = self.solved.get(key)
                    if node is not None:
                        if key is TOP_KEY or key == TOP_KEY:
                            k.stats.solutions += 1
                        else:
                            k.stats.cache_hits += 1
                        upto = self.formula.num_vars if i is None else i - 1
                        values = self.kernel.trail.values
                        before = self.store.size
                        self.path = extend_obdd(
                            self.store, node, [values[d] for d in range(1, upto + 1)])
                        k.budget.charge(_NODE_BYTES * (self.store.size - before))
                        if k.trail.level <= 0:
                            break
                        self.backtrack_bt()
                        self.lim = k.trail.level
                        self._maybe_refresh()
                    else:
                        k.stats.cache_misses += 1
                        self.pending_keys[cut_index] = key[1]
                        k.make_decision(-i)
        except SearchHalted:
            pass
        result.total = count_models(self.store) + sum(c for _, c in self.dumps)
        result.dumps = self.dumps
        result.complete = True
        self.complete = True
        k.stats.solutions = result.total
        return result


def enumerate_bdd(formula: CnfFormula, cuts: CutStructure | None = None,
                  cfg: NonBlockingConfig | None = None,
                  cache_mode: str = "cutset",
                  policy: RefreshPolicy | None = None,
                  budget: Budget | None = None) -> tuple[ObddStore, list[str], int]:
    """Compile all solutions into an OBDD (plus refresh dumps); the total
    count is the sum over dumped parts and the final diagram."""
    solver = BddSolver(formula, cuts, cfg, cache_mode, policy, budget)
    result = solver.run_bdd()
    return result.store, result.dump_files, result.total


class BddBlockingSolver(BlockingSolver):
    """Blocking engine that materializes every reported solution as an OBDD
    path, with creation-time node merging keyed by the formula cache."""

    def __init__(self, formula: CnfFormula, cuts: CutStructure | None = None,
                 cache_mode: str = "cutset",
                 policy: RefreshPolicy | None = None,
                 budget: Budget | None = None,
                 blocking_cfg: BlockingConfig | None = None):
        cfg = blocking_cfg or BlockingConfig()
        if cfg.simplify:
            raise ValueError("simplification emits partial cubes; the OBDD "
                             "path builder needs total assignments")
        super().__init__(formula, cfg, sink=None, budget=budget)
        if cache_mode not in CACHE_MODES:
            raise ValueError(f"unknown cache mode {cache_mode!r}")
        self.cuts = cuts if cuts is not None else compute_cuts(formula)
        self.cache_mode = cache_mode
        self.policy = policy or RefreshPolicy()
        self.policy.validate(formula.num_vars)
        # sharing across equivalent prefixes is only sound when no dump can
        # freeze a node before the search finishes filling it
        self.sharing = self.policy.threshold is None
        self.store = ObddStore(formula.num_vars)
        self.solved: dict[tuple, int] = {TOP_KEY: TOP}
        self.dumps: list[tuple[str, int]] = []
        self.sink = self._absorb

    def _absorb(self, cube: tuple[int, ...]) -> None:
        values = self.kernel.trail.values
        n = self.formula.num_vars
        self._add_path([values[d] for d in range(1, n + 1)])

    def _add_path(self, values: list[int]) -> None:
        store = self.store
        n = self.formula.num_vars
        before = store.size
        if store.root == BOT:
            store.root = store.new_node(1)
        u = store.root
        full = [0] + values   # 1-indexed view for make_formula
        for d in range(1, n + 1):
            v = values[d - 1]
            nxt = store.arc(u, v)
            if nxt == BOT:
                if d == n:
                    nxt = TOP
                elif self.sharing:
                    key = make_formula(self.formula, self.cuts, full, d,
                                       self.cache_mode)
                    nxt = self.solved.get(key)
                    if nxt is None:
                        nxt = store.new_node(d + 1)
                        self.solved[key] = nxt
                        self.kernel.budget.charge(_KEY_BYTES)
                    else:
                        self.kernel.stats.cache_hits += 1
                else:
                    nxt = store.new_node(d + 1)
                store.set_arc(u, v, nxt)
            u = nxt
        self.kernel.budget.charge(_NODE_BYTES * (store.size - before))

    def _block_and_restart(self, clause: Clause) -> Clause | None:
        pending = super()._block_and_restart(clause)
        self._maybe_refresh()
        return pending

    def _maybe_refresh(self) -> None:
        theta = self.policy.threshold
        if theta is None or self.store.size < theta - self.formula.num_vars:
            return
        part = len(self.dumps)
        directory = self.policy.resolve_dir()
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{self.policy.stem}.part{part}.obdd"
        count = count_models(self.store)
        try:
            with open(path, "w") as fh:
                dump(self.store, out=fh)
        except OSError as exc:
            raise RuntimeError(f"dump failed for {path}: {exc}") from exc
        self.dumps.append((str(path), count))
        self.store.reset()
        self.solved = {TOP_KEY: TOP}

    def run_bdd(self) -> BddResult:
        self.run()
        result = BddResult(self.store)
        result.total = count_models(self.store) + sum(c for _, c in self.dumps)
        result.dumps = self.dumps
        result.complete = self.complete
        return result


def enumerate_bdd_blocking(formula: CnfFormula,
                           cuts: CutStructure | None = None,
                           cache_mode: str = "cutset",
                           policy: RefreshPolicy | None = None,
                           budget: Budget | None = None
                           ) -> tuple[ObddStore, list[str], int]:
    """Blocking-engine counterpart of :func:`enumerate_bdd` (same count
    contract)."""
    solver = BddBlockingSolver(formula, cuts, cache_mode, policy,
                               budget=budget)
    result = solver.run_bdd()
    return result.store, result.dump_files, result.total
