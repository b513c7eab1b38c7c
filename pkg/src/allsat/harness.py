"""Benchmark harness: single runs under limits, suite runs with CSV and
cactus-plot output, and differential verification against the oracle.

Solution counts are plain Python integers end to end; diagrams routinely
reach counts that overflow 64 bits.
"""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from .bddcache import (CACHE_MODES, BddBlockingSolver, BddSolver,
                       RefreshPolicy)
from .blocking import BlockingConfig, BlockingSolver
from .formula import (CnfFormula, DimacsError, apply_order, parse_dimacs,
                      read_order_file, render_dimacs)
from .kernel import Budget, LimitExceeded
from .nonblocking import (STRATEGIES, UIP_SCHEMES, NonBlockingConfig,
                          NonBlockingSolver)
from .obdd import count_models, dump
from .oracle import (OracleGuardError, check_cube_cover, enumerate_all,
                     lits_to_mask)

EXIT_OK = 0
EXIT_LIMIT = 10
EXIT_INPUT = 20

MODES = ("blocking", "nonblocking", "bdd", "bdd-blocking", "oracle")
OUTPUTS = ("count", "cubes", "obdd", "quiet")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    mode: str = "nonblocking"
    uip: str | None = None
    backtrack: str | None = None
    simplify: bool = False
    continue_search: bool = False
    cache: str | None = None
    refresh_threshold: int | None = None
    order_file: str | None = None
    time_limit: float | None = None
    mem_limit: int | None = None
    output: str = "quiet"

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.output not in OUTPUTS:
            raise ConfigError(f"unknown output {self.output!r}")
        if self.uip is not None and self.uip not in UIP_SCHEMES:
            raise ConfigError(f"unknown uip scheme {self.uip!r}")
        if self.backtrack is not None and self.backtrack not in STRATEGIES:
            raise ConfigError(f"unknown backtrack strategy {self.backtrack!r}")
        if self.cache is not None and self.cache not in CACHE_MODES:
            raise ConfigError(f"unknown cache mode {self.cache!r}")
        if self.mode not in ("nonblocking", "bdd"):
            if self.uip is not None or self.backtrack is not None:
                raise ConfigError(
                    f"--uip/--backtrack only apply to nonblocking and bdd "
                    f"modes, not {self.mode}")
        if self.mode != "blocking" and (self.simplify or self.continue_search):
            raise ConfigError(
                "--simplify/--continue only apply to blocking mode")
        if self.mode not in ("bdd", "bdd-blocking"):
            if self.cache is not None or self.refresh_threshold is not None:
                raise ConfigError(
                    "--cache/--refresh-threshold only apply to bdd modes")
        if self.mode == "bdd" and self.output == "cubes":
            raise ConfigError("bdd modes build a diagram; use --output obdd")
        if self.mode == "bdd-blocking" and self.output == "cubes":
            raise ConfigError("bdd modes build a diagram; use --output obdd")

    def label(self) -> str:
        parts = [self.mode]
        if self.mode in ("nonblocking", "bdd"):
            parts.append(self.uip or "dlevel")
            parts.append(self.backtrack or "bj")
        if self.mode == "blocking":
            if self.simplify:
                parts.append("simplify")
            if self.continue_search:
                parts.append("continue")
        if self.mode in ("bdd", "bdd-blocking"):
            parts.append(self.cache or "cutset")
            if self.refresh_threshold is not None:
                parts.append(f"theta{self.refresh_threshold}")
        return "+".join(parts)

    def nonblocking_config(self) -> NonBlockingConfig:
        return NonBlockingConfig(self.uip or "dlevel", self.backtrack or "bj")


@dataclass
class RunStats:
    instance: str = ""
    config: str = ""
    solved: bool = False
    solutions: int = 0
    wall_time: float = 0.0
    peak_mem: int = 0
    decisions: int = 0
    conflicts: int = 0
    propagations: int = 0
    learned_clauses: int = 0
    blocking_clauses: int = 0
    cache_hits: int = 0
    cache_misses: int = 0
    obdd_nodes: int = 0
    dumps: int = 0
    exit_code: int = EXIT_OK
    error: str = ""

    CSV_COLUMNS = ("instance", "config", "solved", "solutions", "wall_time",
                   "peak_mem", "decisions", "conflicts", "propagations",
                   "learned_clauses", "blocking_clauses", "cache_hits",
                   "cache_misses", "obdd_nodes", "dumps", "exit_code",
                   "error")

    def csv_row(self) -> list:
        return [getattr(self, c) for c in self.CSV_COLUMNS]


def load_instance(path: str | Path, cfg: RunConfig) -> CnfFormula:
    with open(path) as fh:
        formula = parse_dimacs(fh.read())
    if cfg.order_file:
        with open(cfg.order_file) as fh:
            perm = read_order_file(fh.read(), formula.num_vars)
        formula = apply_order(formula, perm)
    return formula


def run_instance(path: str | Path, cfg: RunConfig, sink=None,
                 formula: CnfFormula | None = None,
                 out=None) -> RunStats:
    """Run one solver configuration on one instance under its limits.

    ``sink`` (if given) receives each emitted cube in original variable
    names.  ``out`` is the stream for --output rendering (defaults to
    nothing; the CLI passes stdout).
    """
    stats = RunStats(instance=str(path), config=cfg.label())
    try:
        cfg.validate()
    except ConfigError as exc:
        stats.exit_code = EXIT_INPUT
        stats.error = str(exc)
        return stats
    try:
        f = formula if formula is not None else load_instance(path, cfg)
    except (OSError, DimacsError) as exc:
        stats.exit_code = EXIT_INPUT
        stats.error = str(exc)
        return stats

    budget = Budget(time_limit=cfg.time_limit, mem_limit=cfg.mem_limit)
    start = time.monotonic()

    def wrapped_sink(cube):
        if sink is not None:
            sink(tuple(f.to_external(l) for l in cube))

    emit = wrapped_sink if sink is not None else None
    cubes_out: list[tuple[int, ...]] = []
    if cfg.output == "cubes":
        def emit(cube, _inner=wrapped_sink):  # noqa: ANN001
            _inner(cube)
            cubes_out.append(tuple(f.to_external(l) for l in cube))

    solver = None
    store = None
    dumps: list[tuple[str, int]] = []
    try:
        budget.check_time()
        if cfg.mode == "oracle":
            stats.solutions = enumerate_all(f).count
            stats.solved = True
        elif cfg.mode == "blocking":
            solver = BlockingSolver(
                f, BlockingConfig(cfg.simplify, cfg.continue_search),
                sink=emit, budget=budget)
            solver.run()
            # simplified cubes cover many assignments each; solution counts
            # are always reported in total assignments
            stats.solutions = solver.covered
            stats.solved = True
        elif cfg.mode == "nonblocking":
            solver = NonBlockingSolver(f, cfg.nonblocking_config(),
                                       sink=emit, budget=budget)
            stats.solutions = solver.run()
            stats.solved = True
        else:
            policy = RefreshPolicy(threshold=cfg.refresh_threshold,
                                   dump_dir=Path(path).parent,
                                   stem=Path(path).stem)
            if cfg.mode == "bdd":
                solver = BddSolver(f, None, cfg.nonblocking_config(),
                                   cfg.cache or "cutset", policy, budget)
            else:
                solver = BddBlockingSolver(f, None, cfg.cache or "cutset",
                                           policy, budget=budget)
            result = solver.run_bdd()
            store = result.store
            dumps = result.dumps
            stats.solutions = result.total
            stats.solved = True
    except LimitExceeded as exc:
        stats.exit_code = EXIT_LIMIT
        stats.error = str(exc)
        if solver is not None and hasattr(solver, "store"):
            store = solver.store
            dumps = solver.dumps
            stats.solutions = (count_models(store)
                               + sum(c for _, c in dumps))
        elif solver is not None:
            stats.solutions = getattr(solver, "covered", solver.count)
    except OracleGuardError as exc:
        stats.exit_code = EXIT_INPUT
        stats.error = str(exc)
        return stats

    stats.wall_time = time.monotonic() - start
    stats.peak_mem = budget.peak_mem
    if solver is not None:
        ks = solver.stats
        stats.decisions = ks.decisions
        stats.conflicts = ks.conflicts
        stats.propagations = ks.propagations
        stats.learned_clauses = ks.learned_clauses
        stats.blocking_clauses = ks.blocking_clauses
        stats.cache_hits = ks.cache_hits
        stats.cache_misses = ks.cache_misses
    if store is not None:
        stats.obdd_nodes = store.size
        stats.dumps = len(dumps)
        if dumps:
            _write_manifest(path, dumps, count_models(store))

    if out is not None and stats.exit_code != EXIT_INPUT:
        if cfg.output == "count":
            out.write(f"{stats.solutions}\n")
        elif cfg.output == "cubes":
            for cube in cubes_out:
                out.write(" ".join(str(l) for l in cube) + " 0\n")
        elif cfg.output == "obdd" and store is not None:
            out.write(dump(store))
    return stats


def _write_manifest(path: str | Path, dumps: list[tuple[str, int]],
                    final_count: int) -> None:
    directory = os.environ.get("ALLSAT_DUMP_DIR") or Path(path).parent
    manifest = Path(directory) / f"{Path(path).stem}.obdd.manifest"
    with open(manifest, "w") as fh:
        for part, count in dumps:
            fh.write(f"{part} {count}\n")
        fh.write(f"final {final_count}\n")


# ----------------------------------------------------------------------
# suite runner

HISTOGRAM_BUCKETS = [(0, 10)] + [(10 ** k, 10 ** (k + 1)) for k in range(1, 14)] \
    + [(10 ** 14, None)]


def _bucket_of(count: int) -> int:
    if count <= 10:
        return 0
    for idx, (lo, hi) in enumerate(HISTOGRAM_BUCKETS[1:], start=1):
        if hi is None or count <= hi:
            return idx
    return len(HISTOGRAM_BUCKETS) - 1


def run_suite(directory: str | Path, configs: list[RunConfig],
              out_dir: str | Path, jobs: int = 1,
              oracle_check: bool = True) -> list[RunStats]:
    """Run every config on every ``*.cnf`` file in ``directory``.

    Writes ``results.csv`` (one row per run), ``cactus.csv`` (per config,
    solved runs ranked by time), and ``histogram.csv`` (instances bucketed
    by powers of ten of the solution count, unsolved runs included by the
    count they reached).  When ``oracle_check`` is on, complete runs on
    oracle-sized instances are compared against the exhaustive count.
    """
    directory = Path(directory)
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    instances = sorted(directory.glob("*.cnf"))
    tasks = [(inst, cfg) for inst in instances for cfg in configs]
    results: list[RunStats] = []
    oracle_counts: dict[str, int | None] = {}

    if jobs > 1 and tasks:
        import concurrent.futures as cf
        with cf.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]

    mismatches = []
    if oracle_check:
        for inst in instances:
            try:
                with open(inst) as fh:
                    f = parse_dimacs(fh.read())
                oracle_counts[str(inst)] = (enumerate_all(f).count
                                            if f.num_vars <= 25 else None)
            except (DimacsError, OracleGuardError):
                oracle_counts[str(inst)] = None
        for r in results:
            want = oracle_counts.get(r.instance)
            if r.solved and want is not None and r.solutions != want:
                mismatches.append(r)
                r.error = f"count {r.solutions} != oracle {want}"

    with open(out_path / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        header = list(RunStats.CSV_COLUMNS)
        if oracle_check:
            header.append("oracle")
        w.writerow(header)
        for r in results:
            row = r.csv_row()
            if oracle_check:
                want = oracle_counts.get(r.instance)
                row.append("" if want is None else want)
            w.writerow(row)

    with open(out_path / "cactus.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["config", "rank", "wall_time"])
        for cfg in configs:
            label = cfg.label()
            times = sorted(r.wall_time for r in results
                           if r.config == label and r.solved)
            for rank, t in enumerate(times, start=1):
                w.writerow([label, rank, f"{t:.6f}"])

    with open(out_path / "histogram.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["config", "bucket_low", "bucket_high", "instances"])
        for cfg in configs:
            label = cfg.label()
            counts = [0] * len(HISTOGRAM_BUCKETS)
            for r in results:
                if r.config == label and r.exit_code != EXIT_INPUT:
                    counts[_bucket_of(r.solutions)] += 1
            for (lo, hi), c in zip(HISTOGRAM_BUCKETS, counts):
                w.writerow([label, lo, hi if hi is not None else "inf", c])

    if mismatches:
        raise RuntimeError(
            f"{len(mismatches)} runs disagree with the oracle; see results.csv")
    return results


def _run_task(task) -> RunStats:
    inst, cfg = task
    return run_instance(inst, cfg)


# ----------------------------------------------------------------------
# differential verification

@dataclass
class VerifyReport:
    instance: str
    count_a: int
    count_b: int
    oracle_count: int | None
    ok: bool
    problems: list[str] = field(default_factory=list)
    counterexample: str | None = None


def _collect_run(path, cfg: RunConfig, formula: CnfFormula):
    cubes: list[tuple[int, ...]] = []
    stats = run_instance(path, cfg, sink=cubes.append, formula=formula)
    return stats, cubes


def verify(path: str | Path, cfg_a: RunConfig, cfg_b: RunConfig,
           save_dir: str | Path | None = None) -> VerifyReport:
    """Run two configurations plus the oracle and cross-check counts,
    duplicate solutions, and cube overlaps.  On mismatch a minimized
    counterexample is saved next to the instance (or in ``save_dir``)."""
    with open(path) as fh:
        formula = parse_dimacs(fh.read())
    report = _verify_formula(formula, cfg_a, cfg_b, str(path))
    if not report.ok:
        counter = _minimize(formula, cfg_a, cfg_b)
        directory = Path(save_dir) if save_dir else Path(path).parent
        directory.mkdir(parents=True, exist_ok=True)
        stem = Path(path).stem
        cnf_path = directory / f"{stem}.counterexample.cnf"
        with open(cnf_path, "w") as fh:
            fh.write(render_dimacs(counter))
        meta_path = directory / f"{stem}.counterexample.json"
        with open(meta_path, "w") as fh:
            json.dump({"instance": str(path),
                       "config_a": cfg_a.label(),
                       "config_b": cfg_b.label(),
                       "problems": report.problems}, fh, indent=2)
        report.counterexample = str(cnf_path)
    return report


def _verify_formula(formula: CnfFormula, cfg_a: RunConfig, cfg_b: RunConfig,
                    name: str) -> VerifyReport:
    problems: list[str] = []
    stats_a, cubes_a = _collect_run(name, cfg_a, formula)
    stats_b, cubes_b = _collect_run(name, cfg_b, formula)
    for s in (stats_a, stats_b):
        if s.exit_code == EXIT_INPUT:
            problems.append(f"{s.config}: {s.error}")
    oracle_count = None
    if formula.num_vars <= 25:
        oracle_count = enumerate_all(formula).count
    if stats_a.solved and stats_b.solved and stats_a.solutions != stats_b.solutions:
        problems.append(f"count mismatch: {stats_a.config}={stats_a.solutions} "
                        f"{stats_b.config}={stats_b.solutions}")
    for stats, cubes, cfg in ((stats_a, cubes_a, cfg_a),
                              (stats_b, cubes_b, cfg_b)):
        if not stats.solved:
            continue
        if oracle_count is not None and stats.solutions != oracle_count:
            problems.append(f"{stats.config}: count {stats.solutions} != "
                            f"oracle {oracle_count}")
        if cfg.mode == "nonblocking":
            masks = [lits_to_mask(c) for c in cubes]
            if len(masks) != len(set(masks)):
                problems.append(f"{stats.config}: duplicate solutions")
        if cfg.mode == "blocking" and formula.num_vars <= 25:
            ok, msg = check_cube_cover(cubes, formula)
            if not ok:
                problems.append(f"{stats.config}: {msg}")
    return VerifyReport(name, stats_a.solutions, stats_b.solutions,
                        oracle_count, not problems, problems)


def _minimize(formula: CnfFormula, cfg_a: RunConfig,
              cfg_b: RunConfig) -> CnfFormula:
    """Greedy one-pass clause removal keeping the discrepancy alive."""
    if formula.num_vars > 15:
        return formula
    from .formula import from_clause_lists
    current = [list(c.lits) for c in formula.clauses]
    for i in range(len(current) - 1, -1, -1):
        trial = current[:i] + current[i + 1:]
        candidate = from_clause_lists(formula.num_vars, trial)
        rep = _verify_formula(candidate, cfg_a, cfg_b, "minimize")
        if not rep.ok:
            current = trial
    return from_clause_lists(formula.num_vars, current)
