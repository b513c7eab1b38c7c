import math

import pytest

from allsat import (BddSolver, NonBlockingConfig, RefreshPolicy, compute_cuts,
                    enumerate_all, enumerate_bdd, enumerate_bdd_blocking,
                    entails, from_clause_lists, load, make_formula,
                    subinstance_models)
from allsat.bddcache import TOP_KEY, BddBlockingSolver
from allsat.obdd import iter_paths
from allsat.oracle import satisfies

from conftest import random_instances


def test_make_formula_worked_prefix(ex31):
    cuts = compute_cuts(ex31)
    values = [None, 1, 0, 1, None, None, None]   # x1=1, x2=0, x3=1
    cut_key = make_formula(ex31, cuts, values, 3, "cutset")
    assert cut_key == (3, (1,))                  # C2 satisfied, C3 not
    sep_key = make_formula(ex31, cuts, values, 3, "separator")
    assert sep_key == (3, (1, 3))                # separator vars assigned 1


def test_make_formula_all_assigned(ex31):
    cuts = compute_cuts(ex31)
    key = make_formula(ex31, cuts, [None] * 7, math.inf, "cutset")
    assert key == TOP_KEY


def test_make_formula_reads_prefix_only(ex31):
    """Assignments beyond the prefix must not leak into the key."""
    cuts = compute_cuts(ex31)
    a = [None, 1, 0, 1, 0, 0, 0]
    b = [None, 1, 0, 1, 1, 1, 1]
    for mode in ("cutset", "separator"):
        assert (make_formula(ex31, cuts, a, 3, mode)
                == make_formula(ex31, cuts, b, 3, mode))


def test_counts_match_oracle_both_modes(ex31, ex41):
    for f in (ex31, ex41):
        want = enumerate_all(f).count
        for mode in ("cutset", "separator"):
            _, _, total = enumerate_bdd(f, cache_mode=mode)
            assert total == want
            _, _, total = enumerate_bdd_blocking(f, cache_mode=mode)
            assert total == want


def test_every_path_satisfies_formula(ex31):
    store, _, total = enumerate_bdd(ex31)
    n = ex31.num_vars
    paths = list(iter_paths(store))
    assert len(paths) == total == 22
    for path in paths:
        assert len(path) == n
        mask = 0
        for var, value in path:
            if value:
                mask |= 1 << (var - 1)
        assert satisfies(ex31, mask)


def test_unsat_instance_gives_false_root():
    f = from_clause_lists(2, [[1], [-1]])
    store, dumps, total = enumerate_bdd(f)
    assert total == 0 and store.root == 0 and not dumps
    store, dumps, total = enumerate_bdd_blocking(f)
    assert total == 0 and store.root == 0


def test_free_variables_double_the_count():
    f = from_clause_lists(6, [[1, 2]])     # vars 3..6 unconstrained
    _, _, total = enumerate_bdd(f)
    assert total == 3 * 2 ** 4


def test_wide_suffix_absorbed_fast():
    chain = [[k, -(k + 1)] for k in range(1, 12)]
    f = from_clause_lists(50, chain)
    want12 = enumerate_all(from_clause_lists(12, chain)).count
    _, _, total = enumerate_bdd(f)
    assert total == want12 * 2 ** 38


def test_all_four_cache_configs_match_oracle():
    for f in random_instances(seed=61, count=25, n_range=(3, 12)):
        want = enumerate_all(f).count
        for mode in ("cutset", "separator"):
            _, _, t1 = enumerate_bdd(f, cache_mode=mode)
            _, _, t2 = enumerate_bdd_blocking(f, cache_mode=mode)
            assert t1 == want, f"bdd/{mode}"
            assert t2 == want, f"bdd-blocking/{mode}"


def test_underlying_resolvers_all_work(ex31):
    for scheme in ("sublevel", "dlevel"):
        for strat in ("bt", "bj", "cbj", "bjcbj"):
            _, _, total = enumerate_bdd(
                ex31, cfg=NonBlockingConfig(scheme, strat))
            assert total == 22, (scheme, strat)


def test_cache_hits_are_sound():
    """Whenever a lookup hits, the subinstances behind the key must have
    identical solution sets over the remaining variables."""
    for f in random_instances(seed=62, count=15, n_range=(4, 10)):
        observed: dict[tuple, list] = {}

        class Probing(BddSolver):
            def _key_at(self, cut_index):
                key = super()._key_at(cut_index)
                if cut_index != math.inf:
                    prefix = {v: self.kernel.trail.values[v]
                              for v in range(1, cut_index + 1)}
                    observed.setdefault(key, []).append(prefix)
                return key

        solver = Probing(f)
        solver.run_bdd()
        for key, prefixes in observed.items():
            if len(prefixes) < 2:
                continue
            base = subinstance_models(f, prefixes[0]).masks
            for other in prefixes[1:]:
                assert subinstance_models(f, other).masks == base, (key, f)


def test_separator_agreement_implies_cutset_agreement():
    """Equal separator keys refine equal cutset keys on identical prefixes."""
    for f in random_instances(seed=63, count=20, n_range=(4, 10)):
        cuts = compute_cuts(f)
        n = f.num_vars
        for i in (1, n // 2, n - 1):
            if i < 1:
                continue
            groups: dict[tuple, list] = {}
            for bits in range(1 << i):
                values = [None] * (n + 1)
                for v in range(1, i + 1):
                    values[v] = (bits >> (v - 1)) & 1
                sep = make_formula(f, cuts, values, i, "separator")
                cut = make_formula(f, cuts, values, i, "cutset")
                groups.setdefault(sep, []).append(cut)
            for sep, cut_keys in groups.items():
                assert len(set(cut_keys)) == 1


def test_learned_clauses_entailed_in_bdd_mode():
    for f in random_instances(seed=64, count=15, n_range=(4, 10)):
        solver = BddSolver(f)
        solver.run_bdd()
        for c in solver.kernel.store.learned:
            assert entails(f, c.lits)


def test_refresh_partition(tmp_path):
    checked = 0
    for f in random_instances(seed=65, count=60, n_range=(7, 11)):
        want = enumerate_all(f).count
        if not 100 <= want <= 1000:
            continue
        checked += 1
        n = f.num_vars
        policy = RefreshPolicy(threshold=n + 1, dump_dir=tmp_path,
                               stem=f"r{checked}")
        store, dumps, total = enumerate_bdd(f, policy=policy)
        assert total == want
        assert dumps        # theta = n+1 forces dumping
        seen = set()
        for part in dumps:
            with open(part) as fh:
                part_store = load(fh.read())
            for path in iter_paths(part_store):
                assert path not in seen
                seen.add(path)
        for path in iter_paths(store):
            assert path not in seen
            seen.add(path)
        assert len(seen) == want
        if checked >= 4:
            break
    assert checked > 0


def test_refresh_blocking_engine(tmp_path):
    for f in random_instances(seed=66, count=30, n_range=(7, 10)):
        want = enumerate_all(f).count
        if want < 50:
            continue
        policy = RefreshPolicy(threshold=f.num_vars + 1, dump_dir=tmp_path,
                               stem="blk")
        _, dumps, total = enumerate_bdd_blocking(f, policy=policy)
        assert total == want
        break


def test_refresh_threshold_validated(ex31):
    with pytest.raises(ValueError):
        enumerate_bdd(ex31, policy=RefreshPolicy(threshold=6))


def test_huge_threshold_no_dumps(ex31):
    policy = RefreshPolicy(threshold=10 ** 9)
    _, dumps, total = enumerate_bdd(ex31, policy=policy)
    assert total == 22 and not dumps


def test_dump_dir_env_override(tmp_path, monkeypatch, ex31):
    monkeypatch.setenv("ALLSAT_DUMP_DIR", str(tmp_path / "override"))
    policy = RefreshPolicy(threshold=ex31.num_vars + 1,
                           dump_dir=tmp_path / "ignored", stem="env")
    _, dumps, total = enumerate_bdd(ex31, policy=policy)
    assert total == 22
    assert all(str(tmp_path / "override") in d for d in dumps)


def test_blocking_engine_rejects_simplify(ex31):
    from allsat.blocking import BlockingConfig
    with pytest.raises(ValueError):
        BddBlockingSolver(ex31, blocking_cfg=BlockingConfig(simplify=True))


def test_enroll_and_prune_mechanics():
    """White-box walk over an unconstrained 2-variable search.

    First backtrack (to level 1) enrolls only the cut whose variable sits
    above the landing level; the cut at the kept level stays pending.  The
    second backtrack enrolls it, and the final branch is absorbed by a cache
    hit instead of a third descent.
    """
    f = from_clause_lists(2, [])
    solver = BddSolver(f)
    k = solver.kernel
    trace = []

    orig = solver._before_cancel

    def spy(level):
        orig(level)
        trace.append((level, dict(solver.solved), dict(solver.pending_keys)))

    solver._before_cancel = spy
    result = solver.run_bdd()
    assert result.total == 4

    # first backtrack: bl=1 < level(x2)=2 enrolls (1, ()); (0, ()) survives
    bl, solved, pending = trace[0]
    assert bl == 1
    assert (1, ()) in solved and (0, ()) not in solved
    assert pending == {0: ()}
    # second backtrack: bl=0 enrolls (0, ()); nothing left pending
    bl, solved, pending = trace[1]
    assert bl == 0
    assert (0, ()) in solved
    assert pending == {}
    # the x1=1 branch was served by the cache, not re-explored
    assert k.stats.cache_hits == 1
    assert k.stats.decisions == 2            # only the first descent decides


def test_enroll_noop_when_nothing_canceled_below():
    """If the landing level keeps every path variable, the solved cache is
    unchanged (no key can have been completed)."""
    f = from_clause_lists(2, [])
    solver = BddSolver(f)
    before = dict(solver.solved)
    solver.kernel.make_decision(-1)
    solver.kernel.make_decision(-2)
    solver.path = []
    solver._enroll(2)
    assert solver.solved == before
