"""Align every recipe of one dish jointly instead of pair by pair.

Pairwise decoding gives one alignment per ordered recipe pair.  The joint
step pools those into a single undirected graph over (recipe, instruction)
nodes, keeps the maximum-weight spanning forest, and reads off groups of
instructions that describe the same underlying step of the dish.

Run from the repository root:

    PYTHONPATH=src python3 demos/02_joint_dish_alignment.py
"""

import numpy as np

from recipealign import (
    TrainSchedule,
    apply_vocabulary,
    build_dish_graph,
    build_vocabulary,
    decode,
    default_config,
    em_train,
    export_dot,
    extract_joint_sets,
    max_spanning_forest,
    synth_dish,
    tokenize_instructions,
)

# --- corpus and model, as in demo 01 -----------------------------------------

master = np.random.default_rng(51)
dish_seeds = master.integers(0, 2**63 - 1, size=(10, 2))
dishes = []
for d in range(10):
    config = default_config(
        f"dish{d:03d}",
        n_recipes=6,
        n_steps=8,
        seed=int(dish_seeds[d, 0]),
        swap_rate=0.3,
        reorder_window=2,
        split_rate=0.1,
        n_other=2,
    )
    dishes.append(synth_dish(config, seed=int(dish_seeds[d, 1])))

all_recipes = [r for recipes, _ in dishes for r in recipes]
seqs = {r.recipe_id: tokenize_instructions(r) for r in all_recipes}
vocab = build_vocabulary([s for rows in seqs.values() for s in rows], min_count=1)
applied = {rid: [apply_vocabulary(s, vocab) for s in rows] for rid, rows in seqs.items()}

training = []
for recipes, _ in dishes:
    ids = [r.recipe_id for r in recipes]
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            training.append((applied[ids[i]], applied[ids[j]]))
            training.append((applied[ids[j]], applied[ids[i]]))

print(f"training one model on {len(training)} directed pairs ...")
model = em_train(training, TrainSchedule(stages=((1, 6), (2, 4))))

# --- decode all ordered pairs of the first dish -------------------------------

recipes, truth = dishes[0]
ids = [r.recipe_id for r in recipes]
alignments = []
for i, src in enumerate(ids):
    for tgt in ids[i + 1 :]:
        for a, b in ((src, tgt), (tgt, src)):
            alignments.append(
                decode(applied[a], applied[b], model,
                       source_id=a, target_id=b, dish_id="dish000")
            )

# --- pool into a graph, keep the heaviest forest ------------------------------

graph = build_dish_graph(alignments, threshold=0.5, recipes=recipes)
forest = max_spanning_forest(graph)
print(f"dish000: {len(graph.nodes)} instruction nodes, "
      f"{len(graph.edges)} edges above threshold, "
      f"{len(forest.tree_edges)} kept in the forest")

heaviest = sorted(forest.tree_edges, key=lambda e: -e[2])[:3]
print("heaviest forest edges:")
for (rid_a, idx_a), (rid_b, idx_b), weight in heaviest:
    print(f"  {rid_a}[{idx_a}] -- {rid_b}[{idx_b}]  posterior {weight:.3f}")

# --- joint sets: one group per latent step ------------------------------------

joint_sets = extract_joint_sets(forest, min_size=2)
by_id = {r.recipe_id: r for r in recipes}
print(f"\n{len(joint_sets)} joint sets; three examples:")
for nodes in joint_sets[:3]:
    print("  ---")
    for rid, idx in nodes:
        print(f"  {rid}[{idx}]  {by_id[rid].content_instructions()[idx].text}")

# the generator records which latent step each instruction came from, so we
# can ask how many sets stay inside a single step
latents = {
    (rid, idx): set(row)
    for rid, rows in truth.items()
    for idx, row in enumerate(rows)
}
shared = sum(
    1 for nodes in joint_sets if set.intersection(*[latents[n] for n in nodes])
)
print(f"\n{shared} of {len(joint_sets)} sets trace back to one shared step")

# --- GraphViz export ----------------------------------------------------------

dot = export_dot(forest)
print(f"\nDOT export: {len(dot.splitlines())} lines, starts with:")
for line in dot.splitlines()[:4]:
    print(f"  {line}")
