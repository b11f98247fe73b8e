"""Minimal edit sequences for small trees by bounded search.

The edit model is the one scripts are replayed under: relabel a node;
delete a node (children promote into its place; the root only when it
has a single child); insert a node adopting a contiguous run of some
node's children, or a new root adopting the whole tree; move a node
(detach alone, children promote, land anywhere with adoption) or move
a whole subtree (detach intact, land at a position).  Every edit costs
one.  Iterative deepening with a label-multiset / size lower bound
finds a provably minimal sequence when one exists within the cap; the
caller falls back to the heuristic script otherwise.  Intended for
trees of at most a few nodes; the state space grows too fast beyond
that.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .collapse import Edit
from .tree import Tree, canon, from_canon

Canon = tuple


def _size(c: Canon) -> int:
    return 1 + sum(_size(k) for k in c[1])


def _labels(c: Canon, out: Counter) -> Counter:
    out[c[0]] += 1
    for k in c[1]:
        _labels(k, out)
    return out


def _get(c: Canon, path: tuple[int, ...]) -> Canon:
    for i in path:
        c = c[1][i]
    return c


def _replace(c: Canon, path: tuple[int, ...], new: Canon) -> Canon:
    if not path:
        return new
    i = path[0]
    kids = c[1]
    return (c[0], kids[:i] + (_replace(kids[i], path[1:], new),) + kids[i + 1 :])


def _paths(c: Canon, here: tuple[int, ...] = ()) -> list[tuple[int, ...]]:
    out = [here]
    for i, k in enumerate(c[1]):
        out.extend(_paths(k, here + (i,)))
    return out


def _apply_op(c: Canon, op: tuple) -> Canon:
    kind = op[0]
    if kind == "update":
        _, path, label = op
        node = _get(c, path)
        return _replace(c, path, (label, node[1]))
    if kind == "delete":
        _, path = op
        if not path:
            (only,) = _get(c, path)[1]
            return only
        pp, i = path[:-1], path[-1]
        parent = _get(c, pp)
        kids = parent[1]
        merged = kids[:i] + kids[i][1] + kids[i + 1 :]
        return _replace(c, pp, (parent[0], merged))
    if kind == "insert":
        _, ppath, i, j, label = op
        if ppath is None:
            return (label, (c,))
        parent = _get(c, ppath)
        kids = parent[1]
        wrapped = (label, kids[i:j])
        return _replace(c, ppath, (parent[0], kids[:i] + (wrapped,) + kids[j:]))
    if kind == "move-node":
        _, path, dest = op
        node = _get(c, path)
        c2 = _apply_op(c, ("delete", path))
        if dest is None:
            return (node[0], (c2,))
        ppath, i, j = dest
        return _apply_op(c2, ("insert", ppath, i, j, node[0]))
    if kind == "move-subtree":
        _, path, ppath, pos = op
        node = _get(c, path)
        pp, i = path[:-1], path[-1]
        parent = _get(c, pp)
        c2 = _replace(c, pp, (parent[0], parent[1][:i] + parent[1][i + 1 :]))
        dest = _get(c2, ppath)
        return _replace(
            c2, ppath, (dest[0], dest[1][:pos] + (node,) + dest[1][pos:])
        )
    raise ValueError(kind)


def _successors(c: Canon, labels: list[str]):
    paths = _paths(c)
    for path in paths:
        node = _get(c, path)
        for lab in labels:
            if lab != node[0]:
                yield ("update", path, lab)
    for path in paths:
        if path or len(_get(c, path)[1]) == 1:
            yield ("delete", path)
    for ppath in paths:
        kids = _get(c, ppath)[1]
        for i in range(len(kids) + 1):
            for j in range(i, len(kids) + 1):
                for lab in labels:
                    yield ("insert", ppath, i, j, lab)
    for lab in labels:
        yield ("insert", None, 0, 0, lab)
    for path in paths:
        if not path:
            continue
        node = _get(c, path)
        c2 = _apply_op(c, ("delete", path))
        for ppath in _paths(c2):
            kids = _get(c2, ppath)[1]
            for i in range(len(kids) + 1):
                for j in range(i, len(kids) + 1):
                    yield ("move-node", path, (ppath, i, j))
        yield ("move-node", path, None)
        if node[1]:
            # detaching first means the subtree's own interior never
            # shows up as a landing site
            pp, i = path[:-1], path[-1]
            parent = _get(c, pp)
            c3 = _replace(c, pp, (parent[0], parent[1][:i] + parent[1][i + 1 :]))
            for ppath in _paths(c3):
                kids = _get(c3, ppath)[1]
                for pos in range(len(kids) + 1):
                    yield ("move-subtree", path, ppath, pos)


def _h(c: Canon, tgt_size: int, tgt_counter: Counter) -> int:
    own = _labels(c, Counter())
    extra = sum((own - tgt_counter).values())
    missing = sum((tgt_counter - own).values())
    diff = extra + missing
    return max(abs(_size(c) - tgt_size), (diff + 1) // 2)


@dataclass
class OpsScript:
    ops: list[tuple]
    edits: list[Edit]
    _target: Canon

    @property
    def cost(self) -> int:
        return len(self.ops)

    def to_json(self) -> list[dict]:
        return [e.to_json() for e in self.edits]

    def apply(self, src: Tree) -> Tree:
        c = canon(src)
        for op in self.ops:
            c = _apply_op(c, op)
        if c != self._target:
            raise AssertionError("edit sequence did not reproduce the target")
        return from_canon(c)


def _edit_of(op: tuple, before: Canon) -> Edit:
    kind = op[0]
    if kind == "update":
        return Edit("update", op[2])
    if kind == "delete":
        return Edit("delete", _get(before, op[1])[0])
    if kind == "insert":
        return Edit("insert", op[4])
    return Edit("move", _get(before, op[1])[0])


# 5x the worst expansion count observed for pairs within the edit cap
# at the size limit; far pairs hit this and fall back to the heuristic
MAX_EXPANSIONS = 150_000


class _Exhausted(Exception):
    pass


def exact_script(
    src: Tree, tgt: Tree, cap: int, max_expansions: int = MAX_EXPANSIONS
) -> OpsScript | None:
    """Cheapest edit sequence within cap edits, or None.

    None also comes back when the search expands more than
    max_expansions states; the counter is over states, so the cutoff is
    deterministic.  Near pairs resolve in a tiny fraction of the
    default budget; only far pairs (where the answer would be None
    anyway) ever approach it.
    """
    c0 = canon(src)
    ct = canon(tgt)
    if c0 == ct:
        return OpsScript([], [], ct)
    labels = sorted(_labels(ct, Counter()).keys())
    tgt_size = _size(ct)
    tgt_counter = _labels(ct, Counter())
    spent = 0

    def dfs(c: Canon, budget: int, seen: dict) -> list[tuple] | None:
        nonlocal spent
        if seen.get(c, -1) >= budget:
            return None
        spent += 1
        if spent > max_expansions:
            raise _Exhausted
        seen[c] = budget
        for op in _successors(c, labels):
            c2 = _apply_op(c, op)
            if c2 == ct:
                return [op]
            if budget > 1 and _h(c2, tgt_size, tgt_counter) <= budget - 1:
                rest = dfs(c2, budget - 1, seen)
                if rest is not None:
                    return [op] + rest
        return None

    lo = max(_h(c0, tgt_size, tgt_counter), 1)
    try:
        for bound in range(lo, cap + 1):
            ops = dfs(c0, bound, {})
            if ops is not None:
                edits = []
                c = c0
                for op in ops:
                    edits.append(_edit_of(op, c))
                    c = _apply_op(c, op)
                return OpsScript(ops, edits, ct)
    except _Exhausted:
        return None
    return None
