"""Append-only OBDD node arena with path extension, model counting, and a
line-based dump format.

Nodes are dense integer ids: 0 is the false sink, 1 the true sink, branch
nodes start at 2.  Diagrams built by the enumerators never skip variable
indices along a path, so counting root-to-true paths counts models directly.
Arcs start at the false sink and are only ever upgraded: a branch the search
has exhausted without extending provably holds no solutions.
"""

from __future__ import annotations

import io


class ObddCorruption(Exception):
    """An OBDD arc would be overwritten with a different target."""


BOT = 0
TOP = 1


class ObddLoadError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ObddStore:
    """Arena of branch nodes for one diagram."""

    def __init__(self, num_vars: int):
        self.num_vars = num_vars
        # parallel arrays indexed by id; entries 0/1 are terminal padding
        self.var = [0, 0]
        self.lo = [0, 0]
        self.hi = [0, 0]
        self.root = BOT

    @property
    def size(self) -> int:
        """Live branch-node count."""
        return len(self.var) - 2

    def new_node(self, var: int) -> int:
        nid = len(self.var)
        self.var.append(var)
        self.lo.append(BOT)
        self.hi.append(BOT)
        return nid

    def arc(self, nid: int, direction: int) -> int:
        return self.hi[nid] if direction else self.lo[nid]

    def set_arc(self, nid: int, direction: int, target: int) -> None:
        if direction:
            self.hi[nid] = target
        else:
            self.lo[nid] = target

    def reset(self) -> None:
        del self.var[2:]
        del self.lo[2:]
        del self.hi[2:]
        self.root = BOT

    def check_ordered(self) -> None:
        for nid in range(2, len(self.var)):
            for child in (self.lo[nid], self.hi[nid]):
                if child >= 2:
                    assert self.var[child] > self.var[nid], \
                        f"node {nid} violates variable ordering"


def extend_obdd(store: ObddStore, g: int,
                values: list[int]) -> list[tuple[int, int]]:
    """Add the path described by ``values`` (value of variable d at index
    d-1) from the root to the already-solved node ``g``.

    Missing interior nodes are created with both arcs at the false sink; the
    final arc is upgraded from the false sink to ``g``.  Returns the path as
    (node id, direction taken) pairs, root first.
    """
    k = len(values)
    path: list[tuple[int, int]] = []
    if k == 0:
        if store.root not in (BOT, g):
            raise ObddCorruption("root already points elsewhere")
        store.root = g
        return path
    if store.root == BOT:
        store.root = store.new_node(1)
    u = store.root
    if u < 2 or store.var[u] != 1:
        raise ObddCorruption("root is not a branch node over the first variable")
    for d in range(1, k + 1):
        v = values[d - 1]
        path.append((u, v))
        cur = store.arc(u, v)
        if d == k:
            if cur == BOT:
                store.set_arc(u, v, g)
            elif cur != g:
                raise ObddCorruption(
                    f"arc of node {u} already set to {cur}, expected {g}")
            break
        if cur == BOT:
            nxt = store.new_node(d + 1)
            store.set_arc(u, v, nxt)
            u = nxt
        else:
            if cur < 2 or store.var[cur] != d + 1:
                raise ObddCorruption(
                    f"interior arc of node {u} skips an index")
            u = cur
    return path


def count_models(store: ObddStore, root: int | None = None) -> int:
    """Number of root-to-true-sink paths (memoized, iterative)."""
    if root is None:
        root = store.root
    if root == BOT:
        return 0
    if root == TOP:
        return 1
    memo: dict[int, int] = {BOT: 0, TOP: 1}
    stack = [root]
    lo, hi = store.lo, store.hi
    while stack:
        nid = stack[-1]
        if nid in memo:
            stack.pop()
            continue
        l, h = lo[nid], hi[nid]
        missing = [c for c in (l, h) if c not in memo]
        if missing:
            stack.extend(missing)
            continue
        memo[nid] = memo[l] + memo[h]
        stack.pop()
    return memo[root]


def iter_paths(store: ObddStore, root: int | None = None):
    """Yield each root-to-true path as a tuple of (var, value) pairs.  Only
    for small diagrams (testing)."""
    if root is None:
        root = store.root
    if root == BOT:
        return
    if root == TOP:
        yield ()
        return
    stack = [(root, ())]
    while stack:
        nid, prefix = stack.pop()
        for direction in (0, 1):
            child = store.arc(nid, direction)
            step = prefix + ((store.var[nid], direction),)
            if child == TOP:
                yield step
            elif child >= 2:
                stack.append((child, step))


def dump(store: ObddStore, root: int | None = None,
         out: io.TextIOBase | None = None) -> str:
    """Serialize: header ``obdd <branch nodes> <vars>``, one ``<id> <var>
    <lo> <hi>`` line per branch node in id order, footer ``root <id>``."""
    if root is None:
        root = store.root
    lines = [f"obdd {store.size} {store.num_vars}"]
    for nid in range(2, len(store.var)):
        lines.append(f"{nid} {store.var[nid]} {store.lo[nid]} {store.hi[nid]}")
    lines.append(f"root {root}")
    text = "\n".join(lines) + "\n"
    if out is not None:
        out.write(text)
    return text


def load(source: str | io.TextIOBase) -> ObddStore:
    """Parse a dump back into a store (ids preserved)."""
    text = source if isinstance(source, str) else source.read()
    lines = text.splitlines()
    if not lines:
        raise ObddLoadError("empty input", 1)
    head = lines[0].split()
    if len(head) != 3 or head[0] != "obdd":
        raise ObddLoadError("malformed header", 1)
    try:
        count, num_vars = int(head[1]), int(head[2])
    except ValueError:
        raise ObddLoadError("malformed header", 1) from None
    store = ObddStore(num_vars)
    expected = 2
    root_seen = False
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "root":
            if len(parts) != 2:
                raise ObddLoadError("malformed root line", line_no)
            try:
                store.root = int(parts[1])
            except ValueError:
                raise ObddLoadError("malformed root line", line_no) from None
            root_seen = True
            continue
        if len(parts) != 4:
            raise ObddLoadError("expected '<id> <var> <lo> <hi>'", line_no)
        try:
            nid, var, lo, hi = (int(p) for p in parts)
        except ValueError:
            raise ObddLoadError("non-integer field", line_no) from None
        if nid != expected:
            raise ObddLoadError(
                f"node ids must be dense from 2, got {nid}", line_no)
        store.new_node(var)
        store.lo[nid] = lo
        store.hi[nid] = hi
        expected += 1
    if store.size != count:
        raise ObddLoadError(
            f"header promised {count} nodes, found {store.size}", 1)
    if not root_seen:
        raise ObddLoadError("missing root line", len(lines))
    if store.root >= len(store.var):
        raise ObddLoadError("root id out of range", len(lines))
    return store
