"""Distance between an original class and its decompiled counterpart.

The reported number is edits divided by the original tree's node
count, computed after canonical renaming so tool-invented names cost
nothing.  Relabeling a literal and relabeling an identifier both count
as one update; no edit kind is weighted.

Scripts come from the ZSS trace plus move fusion.  When both trees are
tiny (at most EXACT_LIMIT nodes) a bounded exhaustive search runs as
well, capped at EXACT_CAP edits, and the cheaper script wins; this
pins minimality on the sizes where minimality is checkable, while big
trees stay on the deterministic heuristic path.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..lang.nodes import ClassAst
from .collapse import ZssScript, build_zss_script
from .exact import OpsScript, exact_script
from .normalize import normalize_names
from .tree import Tree, ast_to_tree, size

EXACT_LIMIT = 8
EXACT_CAP = 4

Script = ZssScript | OpsScript


def edit_distance_trees(src: Tree, tgt: Tree) -> Script:
    script: Script = build_zss_script(src, tgt)
    if size(src) <= EXACT_LIMIT and size(tgt) <= EXACT_LIMIT and script.cost > 1:
        better = exact_script(src, tgt, min(script.cost - 1, EXACT_CAP))
        if better is not None and better.cost < script.cost:
            return better
    return script


def edit_distance(a: ClassAst, b: ClassAst) -> Script:
    """Edit script between two already-normalized class ASTs."""
    return edit_distance_trees(ast_to_tree(a), ast_to_tree(b))


@dataclass(frozen=True)
class Distortion:
    edits: int
    original_nodes: int
    normalized: float

    def to_json(self) -> dict:
        return {
            "edits": self.edits,
            "original_nodes": self.original_nodes,
            "normalized": self.normalized,
        }


def node_count(ast: ClassAst) -> int:
    return size(ast_to_tree(ast))


def distortion(original: ClassAst, decompiled: ClassAst) -> Distortion:
    """Normalized distance; zero exactly for rename-equivalent sources."""
    src = ast_to_tree(normalize_names(original))
    tgt = ast_to_tree(normalize_names(decompiled))
    script = edit_distance_trees(src, tgt)
    n = size(src)
    return Distortion(edits=script.cost, original_nodes=n, normalized=script.cost / n)
