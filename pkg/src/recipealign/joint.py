"""Dish-level joint alignment.

Pairwise alignments of one dish are fused into an undirected instruction
graph: a decoded label with posterior above the threshold contributes a
directed edge, and each unordered node pair keeps the mean of its one or two
directed values.  A maximum spanning forest then keeps the strongest
consistent backbone, and the joint sets are the maximal simple paths in that
forest visiting at most one instruction per recipe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import Modality, Recipe
from .hmm_ibm1 import PairwiseAlignment
from .pairing import MixedDish

NodeId = tuple[str, int]
Edge = tuple[NodeId, NodeId, float]


class PathExplosion(RuntimeError):
    """Joint-set enumeration visited more paths than the configured cap."""


@dataclass(frozen=True)
class DishGraph:
    dish_id: str
    nodes: tuple[NodeId, ...]
    edges: tuple[Edge, ...]  # undirected, endpoints in sorted order


@dataclass(frozen=True)
class JointForest:
    dish_id: str
    nodes: tuple[NodeId, ...]
    tree_edges: tuple[Edge, ...]


def build_dish_graph(
    alignments: Sequence[PairwiseAlignment],
    threshold: float = 0.5,
    recipes: Sequence[Recipe] | None = None,
) -> DishGraph:
    """Fuse one dish's directed alignments into an undirected weighted graph.

    Only labels with posterior strictly above the threshold produce edges.
    The node set covers every source instruction of every alignment plus any
    referenced target instruction; passing the dish's recipes completes it
    with instructions that no alignment touched.
    """
    dish_ids = {a.dish_id for a in alignments if a.dish_id is not None}
    if recipes:
        dish_ids |= {r.dish_id for r in recipes}
    if len(dish_ids) > 1:
        raise MixedDish(f"alignments span dishes {sorted(dish_ids)}")
    dish_id = next(iter(dish_ids)) if dish_ids else ""

    nodes: set[NodeId] = set()
    directed: dict[tuple[NodeId, NodeId], float] = {}
    for alignment in alignments:
        for m, (label, posterior) in enumerate(
            zip(alignment.labels, alignment.posteriors)
        ):
            source_node = (alignment.source_id, m)
            nodes.add(source_node)
            target_node = (alignment.target_id, int(label))
            nodes.add(target_node)
            if posterior > threshold:
                directed[(source_node, target_node)] = float(posterior)
    if recipes:
        for recipe in recipes:
            for ins in recipe.content_instructions():
                nodes.add((recipe.recipe_id, ins.index))

    undirected: dict[tuple[NodeId, NodeId], list[float]] = {}
    for (a, b), weight in directed.items():
        key = (a, b) if a <= b else (b, a)
        undirected.setdefault(key, []).append(weight)
    edges = tuple(
        (a, b, sum(values) / len(values))
        for (a, b), values in sorted(undirected.items())
    )
    return DishGraph(dish_id=dish_id, nodes=tuple(sorted(nodes)), edges=edges)


class _UnionFind:
    def __init__(self, items: Iterable[NodeId]):
        self.parent = {item: item for item in items}
        self.rank = {item: 0 for item in self.parent}

    def find(self, item: NodeId) -> NodeId:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a: NodeId, b: NodeId) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def max_spanning_forest(graph: DishGraph) -> JointForest:
    """Kruskal over descending weights; ties break on sorted endpoint ids."""
    uf = _UnionFind(graph.nodes)
    kept: list[Edge] = []
    for a, b, weight in sorted(graph.edges, key=lambda e: (-e[2], e[0], e[1])):
        if uf.union(a, b):
            kept.append((a, b, weight))
    return JointForest(
        dish_id=graph.dish_id, nodes=graph.nodes, tree_edges=tuple(kept)
    )


def extract_joint_sets(
    forest: JointForest, min_size: int = 2, path_cap: int = 1_000_000
) -> list[tuple[NodeId, ...]]:
    """Maximal recipe-unique simple paths of the forest, as sorted node tuples.

    A path qualifies when no tree neighbor of either endpoint could extend it
    without repeating a recipe; shorter prefixes of a qualifying path are
    therefore never reported.  Paths are enumerated from both endpoints and
    emitted once; the enumeration aborts with PathExplosion after visiting
    more than ``path_cap`` candidate paths.
    """
    adjacency: dict[NodeId, list[NodeId]] = {node: [] for node in forest.nodes}
    for a, b, _ in forest.tree_edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    for neighbors in adjacency.values():
        neighbors.sort()

    visited_paths = 0
    results: set[tuple[NodeId, ...]] = set()

    def extendable(endpoint: NodeId, inward: NodeId, recipes: set[str]) -> bool:
        return any(
            n != inward and n[0] not in recipes for n in adjacency[endpoint]
        )

    for start in forest.nodes:
        # path state: current endpoint, node list, recipe set
        stack = [(start, [start], {start[0]})]
        while stack:
            node, path, recipes = stack.pop()
            for neighbor in adjacency[node]:
                if len(path) > 1 and neighbor == path[-2]:
                    continue
                if neighbor[0] in recipes:
                    continue
                visited_paths += 1
                if visited_paths > path_cap:
                    raise PathExplosion(
                        f"more than {path_cap} candidate paths in dish "
                        f"{forest.dish_id!r}"
                    )
                new_path = path + [neighbor]
                new_recipes = recipes | {neighbor[0]}
                stack.append((neighbor, new_path, new_recipes))
                if len(new_path) >= min_size and start < neighbor:
                    if not extendable(
                        neighbor, new_path[-2], new_recipes
                    ) and not extendable(start, new_path[1], new_recipes):
                        results.add(tuple(sorted(new_path)))
    return sorted(results)


# ---------------------------------------------------------------------------
# output formats
# ---------------------------------------------------------------------------


def _node_payload(node: NodeId, recipes_by_id: Mapping[str, Recipe]) -> dict:
    recipe_id, index = node
    payload: dict = {"recipe_id": recipe_id, "index": index}
    recipe = recipes_by_id.get(recipe_id)
    if recipe is None or index >= len(recipe.instructions):
        return payload
    ins = recipe.instructions[index]
    if recipe.modality is Modality.VIDEO and ins.start_sec is not None:
        payload["url"] = recipe.source_url or ""
        payload["start_sec"] = ins.start_sec
        payload["end_sec"] = ins.end_sec
    else:
        payload["text"] = ins.text
    return payload


def forest_to_record(
    forest: JointForest,
    recipes_by_id: Mapping[str, Recipe],
    joint_sets: Sequence[tuple[NodeId, ...]],
) -> dict:
    return {
        "dish_id": forest.dish_id,
        "nodes": [_node_payload(n, recipes_by_id) for n in forest.nodes],
        "tree_edges": [
            {"a": list(a), "b": list(b), "weight": w}
            for a, b, w in sorted(forest.tree_edges)
        ],
        "joint_sets": [[list(n) for n in group] for group in joint_sets],
    }


def forest_from_record(record: dict) -> JointForest:
    return JointForest(
        dish_id=record["dish_id"],
        nodes=tuple(
            sorted((n["recipe_id"], int(n["index"])) for n in record["nodes"])
        ),
        tree_edges=tuple(
            ((e["a"][0], int(e["a"][1])), (e["b"][0], int(e["b"][1])), float(e["weight"]))
            for e in record["tree_edges"]
        ),
    )


def export_dot(forest: JointForest) -> str:
    """GraphViz text for one dish forest; undirected, weights as edge labels."""
    lines = [f'graph "{forest.dish_id}" {{']
    for recipe_id, index in forest.nodes:
        name = f"{recipe_id}#{index}"
        lines.append(f'  "{name}" [label="{recipe_id}[{index}]"];')
    for a, b, weight in sorted(forest.tree_edges):
        lines.append(
            f'  "{a[0]}#{a[1]}" -- "{b[0]}#{b[1]}" [label="{weight:.4f}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
