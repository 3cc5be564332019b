"""Dish graphs, maximum spanning forests, and joint-set extraction."""

import numpy as np
import pytest

from recipealign.corpus import ChatLabel, Instruction, Modality, Recipe
from recipealign.hmm_ibm1 import PairwiseAlignment
from recipealign.joint import (
    DishGraph,
    PathExplosion,
    build_dish_graph,
    export_dot,
    extract_joint_sets,
    forest_from_record,
    forest_to_record,
    max_spanning_forest,
)
from recipealign.pairing import MixedDish

from oracles import best_forest_weight


def align(source_id, target_id, labels, posteriors, dish_id="dish"):
    return PairwiseAlignment(
        source_id=source_id,
        target_id=target_id,
        labels=tuple(labels),
        posteriors=tuple(posteriors),
        dish_id=dish_id,
    )


def graph(nodes, edges, dish_id="dish"):
    canonical = tuple(
        (a, b, w) if a <= b else (b, a, w) for a, b, w in edges
    )
    return DishGraph(dish_id=dish_id, nodes=tuple(sorted(nodes)), edges=tuple(sorted(canonical)))


# ---------------------------------------------------------------------------
# graph construction
# ---------------------------------------------------------------------------


def test_graph_edges_need_posterior_strictly_above_threshold():
    a = align("A", "B", [0, 1], [0.5, 0.51])
    g = build_dish_graph([a], threshold=0.5)
    assert g.edges == ((("A", 1), ("B", 1), 0.51),)
    # the below-threshold source/target instructions still appear as nodes
    assert ("A", 0) in g.nodes and ("B", 0) in g.nodes


def test_graph_averages_the_two_directions():
    forward = align("A", "B", [0], [0.9])
    backward = align("B", "A", [0], [0.7])
    g = build_dish_graph([forward, backward])
    assert g.edges == ((("A", 0), ("B", 0), pytest.approx(0.8)),)


def test_graph_single_direction_keeps_raw_weight():
    g = build_dish_graph([align("A", "B", [2], [0.75])])
    assert g.edges == ((("A", 0), ("B", 2), 0.75),)


def test_graph_completes_nodes_from_recipes():
    recipes = [
        Recipe(
            recipe_id="A", dish_id="dish", modality=Modality.TEXT, title="t",
            ingredients=(),
            instructions=(
                Instruction(0, "mix"),
                Instruction(1, "subscribe", chat_label=ChatLabel.CHAT),
                Instruction(2, "bake"),
            ),
        )
    ]
    g = build_dish_graph([align("A", "B", [0], [0.9])], recipes=recipes)
    assert ("A", 2) in g.nodes  # untouched content instruction
    assert ("A", 1) not in g.nodes  # chat never enters the graph


def test_graph_rejects_mixed_dishes():
    a = align("A", "B", [0], [0.9], dish_id="lasagna")
    b = align("C", "D", [0], [0.9], dish_id="tacos")
    with pytest.raises(MixedDish):
        build_dish_graph([a, b])


# ---------------------------------------------------------------------------
# maximum spanning forest
# ---------------------------------------------------------------------------


def test_forest_drops_weakest_triangle_edge():
    n = [("A", 0), ("B", 0), ("C", 0)]
    g = graph(n, [(n[0], n[1], 0.9), (n[1], n[2], 0.8), (n[0], n[2], 0.7)])
    forest = max_spanning_forest(g)
    weights = sorted(w for _, _, w in forest.tree_edges)
    assert weights == [0.8, 0.9]


def test_forest_keeps_components_separate():
    n = [("A", 0), ("B", 0), ("C", 0), ("D", 0)]
    g = graph(n, [(n[0], n[1], 0.9), (n[2], n[3], 0.6)])
    forest = max_spanning_forest(g)
    assert len(forest.tree_edges) == 2


def test_forest_matches_exhaustive_optimum():
    rng = np.random.default_rng(23)
    for _ in range(60):
        n_nodes = int(rng.integers(2, 9))
        nodes = [("r%d" % i, 0) for i in range(n_nodes)]
        candidates = [
            (i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes)
        ]
        take = rng.random(len(candidates)) < 0.5
        edges = []
        int_edges = []
        for (i, j), keep in zip(candidates, take):
            if not keep:
                continue
            # dyadic weights so float sums compare exactly
            w = float(rng.integers(1, 1025)) / 1024.0
            edges.append((nodes[i], nodes[j], w))
            int_edges.append((i, j, w))
        if len(int_edges) > 12:
            continue
        forest = max_spanning_forest(graph(nodes, edges))
        got = sum(w for _, _, w in forest.tree_edges)
        assert got == pytest.approx(best_forest_weight(n_nodes, int_edges), abs=1e-12)


def test_forest_tie_break_is_deterministic():
    n = [("A", 0), ("B", 0), ("C", 0)]
    g = graph(n, [(n[0], n[1], 0.8), (n[1], n[2], 0.8), (n[0], n[2], 0.8)])
    forest = max_spanning_forest(g)
    # equal weights: the two lexicographically earliest edges win
    assert forest.tree_edges == (
        (("A", 0), ("B", 0), 0.8),
        (("A", 0), ("C", 0), 0.8),
    )


# ---------------------------------------------------------------------------
# joint sets
# ---------------------------------------------------------------------------


def forest_of(nodes, edges, dish_id="dish"):
    return max_spanning_forest(graph(nodes, edges, dish_id))


def test_joint_sets_split_paths_at_repeated_recipes():
    a1, b1, a2 = ("A", 1), ("B", 1), ("A", 2)
    forest = forest_of([a1, b1, a2], [(a1, b1, 0.9), (b1, a2, 0.8)])
    assert extract_joint_sets(forest) == [
        (("A", 1), ("B", 1)),
        (("A", 2), ("B", 1)),
    ]


def test_joint_sets_report_only_maximal_paths():
    a, b, c = ("A", 0), ("B", 0), ("C", 0)
    forest = forest_of([a, b, c], [(a, b, 0.9), (b, c, 0.8)])
    assert extract_joint_sets(forest) == [(a, b, c)]


def test_joint_sets_of_a_star():
    a, b, c, d = ("A", 0), ("B", 0), ("C", 0), ("D", 0)
    forest = forest_of([a, b, c, d], [(c, a, 0.9), (c, b, 0.8), (c, d, 0.7)])
    assert extract_joint_sets(forest) == [
        (a, b, c),
        (a, c, d),
        (b, c, d),
    ]


def test_joint_sets_min_size():
    a, b, c = ("A", 0), ("B", 0), ("C", 0)
    forest = forest_of([a, b, c], [(a, b, 0.9)])
    assert extract_joint_sets(forest, min_size=2) == [(a, b)]
    assert extract_joint_sets(forest, min_size=3) == []


def test_isolated_nodes_produce_no_sets():
    forest = forest_of([("A", 0), ("B", 3)], [])
    assert extract_joint_sets(forest) == []


def test_path_cap_aborts_enumeration():
    a, b, c, d = ("A", 0), ("B", 0), ("C", 0), ("D", 0)
    forest = forest_of([a, b, c, d], [(a, b, 0.9), (b, c, 0.8), (c, d, 0.7)])
    with pytest.raises(PathExplosion):
        extract_joint_sets(forest, path_cap=3)
    # a generous cap is fine
    assert extract_joint_sets(forest, path_cap=1000) == [(a, b, c, d)]


# ---------------------------------------------------------------------------
# records and export
# ---------------------------------------------------------------------------


def sample_recipes():
    text = Recipe(
        recipe_id="A", dish_id="dish", modality=Modality.TEXT, title="t",
        ingredients=(),
        instructions=(Instruction(0, "boil water"), Instruction(1, "add pasta")),
    )
    video = Recipe(
        recipe_id="V", dish_id="dish", modality=Modality.VIDEO, title="v",
        ingredients=(),
        instructions=(
            Instruction(0, "boil the water", start_sec=1.0, end_sec=9.5),
        ),
        source_url="https://example.com/v",
    )
    return {"A": text, "V": video}


def test_forest_record_payloads():
    a0, v0 = ("A", 0), ("V", 0)
    forest = forest_of([a0, ("A", 1), v0], [(a0, v0, 0.9)])
    sets = extract_joint_sets(forest)
    record = forest_to_record(forest, sample_recipes(), sets)
    assert record["dish_id"] == "dish"
    by_id = {(n["recipe_id"], n["index"]): n for n in record["nodes"]}
    assert by_id[("A", 0)]["text"] == "boil water"
    assert by_id[("V", 0)]["url"] == "https://example.com/v"
    assert by_id[("V", 0)]["start_sec"] == 1.0
    assert by_id[("V", 0)]["end_sec"] == 9.5
    assert record["joint_sets"] == [[["A", 0], ["V", 0]]]
    assert record["tree_edges"] == [{"a": ["A", 0], "b": ["V", 0], "weight": 0.9}]


def test_forest_record_roundtrip():
    a0, v0 = ("A", 0), ("V", 0)
    forest = forest_of([a0, ("A", 1), v0], [(a0, v0, 0.9)])
    record = forest_to_record(forest, sample_recipes(), [])
    assert forest_from_record(record) == forest


def test_export_dot_layout():
    a0, b0 = ("A", 0), ("B", 0)
    forest = forest_of([a0, b0], [(a0, b0, 0.875)])
    dot = export_dot(forest)
    lines = dot.splitlines()
    assert lines[0] == 'graph "dish" {'
    assert '  "A#0" [label="A[0]"];' in lines
    assert '  "A#0" -- "B#0" [label="0.8750"];' in lines
    assert lines[-1] == "}"
    assert dot.endswith("}\n")
