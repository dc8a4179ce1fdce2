"""A five-node game where the arbitrary equilibrium misses the best ones.

Player 2 moves first; player 1 is indifferent between her two options in
one branch. That indifference creates a whole family of equilibria, and
which one you get from plain backward induction is a coin flip of
tie-breaking. The set-valued solver sees all of them at once.
"""

from fractions import Fraction

from nashtree import (
    CRITERIA,
    any_nash,
    best_nash,
    compute_ups_all,
    evaluate,
    extract_strategy,
    is_equilibrium,
    parse_game_tree,
    serialize_strategy,
    serialize_ups,
)
from nashtree.gametree import PayoffVector

TREE = parse_game_tree(
    """
gtree v1
root 1
node 1 player 2 children 2 3
node 2 player 1 children 4 5
leaf 4 payoff 2 3
leaf 5 payoff 2 100
leaf 3 payoff 1000 4
"""
)

print("== backward induction (leftmost tie-break) ==")
baseline = any_nash(TREE)
print("value:", baseline.value)

print("\n== every equilibrium payoff at once ==")
sets = compute_ups_all(TREE)
print(serialize_ups(sets.by_node[TREE.root]))

print("== the best equilibrium under each criterion ==")
for criterion in CRITERIA:
    result = best_nash(TREE, criterion)
    print(f"{criterion:>6}: value {result.value}")

print("\n== extracting an equilibrium with a chosen in-between value ==")
target = PayoffVector(Fraction(2), Fraction(52))
strategy = extract_strategy(TREE, sets, TREE.root, target)
print(serialize_strategy(strategy))
print("value:", evaluate(TREE, strategy)[TREE.root])
print("is an equilibrium:", is_equilibrium(TREE, strategy).ok)
