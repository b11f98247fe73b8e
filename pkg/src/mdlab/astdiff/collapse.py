"""Edit scripts with move detection.

The ZSS trace yields relabels plus unmatched nodes on each side.  A
node deleted from one place and an identical node inserted elsewhere
is better described as one move, so two passes fuse such pairs: first
whole deleted subtrees against isomorphic inserted subtrees, then
leftover single nodes by label (the single-node case keeps its mapped
children in place, which is exactly how a statement migrates into a
different construct).  Each fused pair turns two edits into one.

Application order is fixed: relabels, then plain deletes in ascending
source postorder (a delete promotes the node's children into its
place), then inserts and moves in descending target postorder, so
parents always settle before their contents.  An insert or the landing
half of a move adopts the already-present children whose final
position lies inside the landed node's target interval.  Replay is
verified at build time; if a fused script fails to reproduce the
target the builder retries with fewer fusions and ultimately falls
back to the raw ZSS script.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .tree import Flat, Tree, canon, copy_tree
from .zss import RawScript, treedist_tables, zss_trace


class ReplayError(Exception):
    pass


@dataclass(frozen=True)
class Edit:
    kind: str  # update | delete | insert | move
    label: str
    src_id: int | None = None
    tgt_id: int | None = None

    def to_json(self) -> dict:
        out: dict = {"op": self.kind, "label": self.label}
        if self.src_id is not None:
            out["from"] = self.src_id
        if self.tgt_id is not None:
            out["to"] = self.tgt_id
        return out


class ZssScript:
    """Replayable script tied to the source/target pair it was built for.

    Node references are postorder indices; apply() accepts any tree
    equal to the original source and rebuilds the target from it.
    """

    def __init__(
        self,
        ftgt: Flat,
        src_labels: list[str],
        mapping: list[tuple[int, int]],
        updates: list[tuple[int, str]],
        deletes: list[int],
        inserts: list[int],
        moves: list[tuple[str, int, int]],  # (flavor, src id, tgt id)
    ):
        self._ftgt = ftgt
        self._mapping = mapping
        self._updates = updates
        self._deletes = sorted(deletes)
        self._inserts = inserts
        self._moves = moves
        self._tgt_kids: list[list[int]] = [[] for _ in range(ftgt.n + 1)]
        for i in range(1, ftgt.n + 1):
            p = int(ftgt.parent[i])
            if p:
                self._tgt_kids[p].append(i)
        for kids in self._tgt_kids:
            kids.sort(key=lambda k: int(ftgt.child_pos[k]))
        labels = ftgt.labels()
        self.edits: list[Edit] = []
        for s, new in sorted(self._updates):
            self.edits.append(Edit("update", new, src_id=s))
        for s in self._deletes:
            self.edits.append(Edit("delete", src_labels[s], src_id=s))
        settles = sorted(
            [("insert", None, t) for t in inserts]
            + [(f"move-{fl}", s, t) for fl, s, t in moves],
            key=lambda r: -r[2],
        )
        self._settles = settles
        for kind, s, t in settles:
            if kind == "insert":
                self.edits.append(Edit("insert", labels[t], tgt_id=t))
            else:
                self.edits.append(Edit("move", labels[t], src_id=s, tgt_id=t))

    @property
    def cost(self) -> int:
        return len(self.edits)

    def to_json(self) -> list[dict]:
        return [e.to_json() for e in self.edits]

    # ---- replay ----

    def apply(self, src_root: Tree) -> Tree:
        live = copy_tree(src_root)
        f = Flat(live)
        nodes = f.nodes
        fin: dict[int, int] = {}  # id(node) -> target postorder id
        by_fin: dict[int, Tree] = {}
        par: dict[int, Tree | None] = {}

        def set_parents(t: Tree, p: Tree | None) -> None:
            par[id(t)] = p
            for c in t.children:
                set_parents(c, t)

        set_parents(live, None)
        root = live

        def settle_node(n: Tree, t: int) -> None:
            fin[id(n)] = t
            by_fin[t] = n

        for s, t in self._mapping:
            settle_node(nodes[s], t)
        for _fl, s, t in self._moves:
            settle_node(nodes[s], t)

        ft = self._ftgt
        tlabels = ft.labels()

        # relabels
        for s, lab in self._updates:
            nodes[s].label = lab

        def detach_promote(x: Tree) -> None:
            nonlocal root
            p = par[id(x)]
            if p is None:
                if len(x.children) != 1:
                    raise ReplayError("root delete with fan-out")
                root = x.children[0]
                par[id(root)] = None
            else:
                i = p.children.index(x)
                p.children[i : i + 1] = x.children
                for c in x.children:
                    par[id(c)] = p
            x.children = []
            par[id(x)] = None

        def detach_subtree(x: Tree) -> None:
            p = par[id(x)]
            if p is None:
                raise ReplayError("cannot detach the root as a subtree")
            p.children.remove(x)
            par[id(x)] = None

        for s in self._deletes:
            detach_promote(nodes[s])

        def fin_of(c: Tree) -> int:
            got = fin.get(id(c))
            if got is None:
                raise ReplayError("live node with no settled position")
            return got

        def place(x: Tree, t: int, adopt: bool) -> None:
            nonlocal root
            lo = int(ft.lld[t])
            if t == ft.n:
                if not adopt:
                    raise ReplayError("subtree landing at the root")
                old = root
                x.children = [old]
                par[id(old)] = x
                par[id(x)] = None
                root = x
                return
            p_t = int(ft.parent[t])
            P = by_fin.get(p_t)
            if P is None:
                raise ReplayError("destination parent not present")
            hits = [i for i, c in enumerate(P.children) if lo <= fin_of(c) < t]
            if hits and hits != list(range(hits[0], hits[0] + len(hits))):
                raise ReplayError("adoption span not contiguous")
            if adopt and hits:
                i0 = hits[0]
                span = P.children[i0 : i0 + len(hits)]
                x.children = span
                for c in span:
                    par[id(c)] = x
                P.children[i0 : i0 + len(hits)] = [x]
            else:
                if hits:
                    raise ReplayError("children in the way of a subtree landing")
                pos = sum(1 for c in P.children if fin_of(c) < lo)
                P.children.insert(pos, x)
            par[id(x)] = P

        def settle_descendants(x: Tree, t: int) -> None:
            kids = self._tgt_kids[t]
            if len(kids) != len(x.children) or x.label != tlabels[t]:
                raise ReplayError("moved subtree does not match its landing")
            settle_node(x, t)
            for c, ct in zip(x.children, kids):
                settle_descendants(c, ct)

        for kind, s, t in self._settles:
            if kind == "insert":
                node = Tree(tlabels[t])
                settle_node(node, t)
                place(node, t, adopt=True)
            elif kind == "move-node":
                node = nodes[s]  # type: ignore[index]
                detach_promote(node)
                place(node, t, adopt=True)
            else:  # move-subtree
                node = nodes[s]  # type: ignore[index]
                detach_subtree(node)
                settle_descendants(node, t)
                place(node, t, adopt=False)

        if canon(root) != canon(self._ftgt.nodes[self._ftgt.n]):
            raise ReplayError("replay did not reproduce the target")
        return root


def _full_roots(ids: list[int], full_set: set[int], f: Flat) -> list[int]:
    full = {i for i in ids if all(k in full_set for k in f.subtree_ids(i))}
    return [i for i in full if int(f.parent[i]) not in full]


def _pair_moves(
    raw: RawScript, fs: Flat, ft: Flat, mode: str
) -> tuple[list[tuple[str, int, int]], list[int], list[int]]:
    delset = set(raw.deletes)
    insset = set(raw.inserts)
    moves: list[tuple[str, int, int]] = []
    if mode != "none":
        src_roots = _full_roots(raw.deletes, delset, fs)
        tgt_roots = _full_roots(raw.inserts, insset, ft)
        by_canon: dict[tuple, deque[int]] = {}
        for t in sorted(tgt_roots):
            by_canon.setdefault(canon(ft.nodes[t]), deque()).append(t)
        order = sorted(src_roots, key=lambda d: (-len(fs.subtree_ids(d)), d))
        for d in order:
            q = by_canon.get(canon(fs.nodes[d]))
            if q:
                t = q.popleft()
                moves.append(("subtree", d, t))
                delset.difference_update(fs.subtree_ids(d))
                insset.difference_update(ft.subtree_ids(t))
    if mode == "full":
        slab = fs.labels()
        tlab = ft.labels()
        by_label: dict[str, deque[int]] = {}
        for t in sorted(insset):
            by_label.setdefault(tlab[t], deque()).append(t)
        for d in sorted(delset):
            q = by_label.get(slab[d])
            if q:
                t = q.popleft()
                moves.append(("node", d, t))
                delset.discard(d)
                insset.discard(t)
    return moves, sorted(delset), sorted(insset)


def build_zss_script(src: Tree, tgt: Tree) -> ZssScript:
    fs = Flat(src)
    ft = Flat(tgt)
    td = treedist_tables(fs, ft)
    raw = zss_trace(fs, ft, td)
    slab = fs.labels()
    tlab = ft.labels()
    updates = [(s, tlab[t]) for s, t in raw.mapping if slab[s] != tlab[t]]
    last_error: ReplayError | None = None
    for mode in ("full", "subtree", "none"):
        moves, dels, inss = _pair_moves(raw, fs, ft, mode)
        script = ZssScript(ft, slab, raw.mapping, updates, dels, inss, moves)
        try:
            script.apply(src)
            return script
        except ReplayError as err:
            last_error = err
    raise AssertionError(f"raw edit script failed to replay: {last_error}")
