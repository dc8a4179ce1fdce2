"""Equilibrium solvers for two-player game trees.

`any_nash` is plain backward induction: it returns one subgame perfect
equilibrium, chosen arbitrarily (leftmost child on ties). `best_nash`
instead computes, bottom-up, the exact set of equilibrium payoff vectors
of every subtree, picks the best point at the root under a chosen
optimality criterion, and extracts a (possibly stochastic) strategy
attaining it exactly. A deterministic-only variant restricts the sets to
payoffs of pure equilibria.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .gametree import (
    GameTree,
    Leaf,
    PayoffVector,
    Strategy,
    binarize,
)
from .ups import (
    METER,
    PayoffGrid,
    Ups,
    _BETWEEN,
    _locate,
    _ON,
    build_grid,
    contains,
    cross_section,
    flag_corner,
    is_empty,
    iter_flags,
    merge,
    merge_deterministic,
    min_point,
    min_value_for_player,
    singleton_ups,
)

ONE = Fraction(1)

CRITERIA = ("social", "fair", "max", "best1", "best2")


class TargetNotInUpsError(ValueError):
    """Asked to extract a payoff that no equilibrium of the subtree attains."""


class AlgebraInconsistencyError(RuntimeError):
    """The extraction walk hit a state the set algebra says cannot happen."""


def criterion_value(criterion: str, v: PayoffVector) -> Fraction:
    """The quantity a criterion maximizes, evaluated at one payoff vector."""
    if criterion == "social":
        return v.p1 + v.p2
    if criterion == "fair":
        return min(v.p1, v.p2)
    if criterion == "max":
        return max(v.p1, v.p2)
    if criterion == "best1":
        return v.p1
    if criterion == "best2":
        return v.p2
    raise ValueError(f"unknown criterion {criterion!r}")


@dataclass(frozen=True)
class SolveStats:
    nodes: int
    merges: int = 0
    flag_ops: int = 0
    ups_ms: float = 0.0
    extract_ms: float = 0.0
    total_ms: float = 0.0


@dataclass(frozen=True)
class SolveResult:
    value: PayoffVector
    strategy: Strategy
    root_ups: Ups | None
    stats: SolveStats


@dataclass(frozen=True)
class SetMap:
    """Per-node equilibrium payoff sets of a binary tree, on a shared grid."""

    grid: PayoffGrid
    by_node: dict[int, Ups]
    merges: int
    flag_ops: int


def any_nash(tree: GameTree) -> SolveResult:
    """Backward induction with leftmost tie-breaking; returns a pure equilibrium."""
    t0 = time.perf_counter()
    values: dict[int, PayoffVector] = {}
    choices: dict[int, tuple[tuple[int, Fraction], ...]] = {}
    for nid in tree.post_order():
        node = tree.nodes[nid]
        if isinstance(node, Leaf):
            values[nid] = node.payoff
            continue
        best = None
        best_val = None
        for child in node.children:
            v = values[child].component(node.controller)
            if best is None or v > best_val:
                best, best_val = child, v
        choices[nid] = ((best, ONE),)
        values[nid] = values[best]
    total_ms = (time.perf_counter() - t0) * 1000.0
    return SolveResult(
        value=values[tree.root],
        strategy=Strategy(choices),
        root_ups=None,
        stats=SolveStats(nodes=len(tree.nodes), total_ms=total_ms),
    )


def _compute_sets(tree: GameTree, combine: Callable[[Ups, Ups, int], Ups]) -> SetMap:
    if not tree.is_binary():
        raise ValueError("equilibrium sets require a binary tree; binarize() first")
    grid = build_grid(tree)
    merges0, ops0 = METER.merges, METER.flag_ops
    by_node: dict[int, Ups] = {}
    for nid in tree.post_order():
        node = tree.nodes[nid]
        if isinstance(node, Leaf):
            by_node[nid] = singleton_ups(grid, node.payoff)
        else:
            left, right = node.children
            by_node[nid] = combine(by_node[left], by_node[right], node.controller)
    return SetMap(
        grid=grid,
        by_node=by_node,
        merges=METER.merges - merges0,
        flag_ops=METER.flag_ops - ops0,
    )


def compute_ups_all(tree: GameTree) -> SetMap:
    """Equilibrium payoff set of every subtree (one merge per internal node)."""
    return _compute_sets(tree, merge)


def compute_det_ups_all(tree: GameTree) -> SetMap:
    """Pure-equilibrium payoff sets: the merge never mixes, so every set is a
    finite collection of grid points."""
    return _compute_sets(tree, merge_deterministic)


def select_optimal(root_ups: Ups, criterion: str) -> PayoffVector:
    """Best point of a set under a criterion.

    All supported criteria are coordinate-wise nondecreasing, so the
    optimum over every flagged element is attained at its upper-right
    corner; the scan checks each flagged corner. Ties are broken toward
    the larger player-1 payoff, then the larger player-2 payoff.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    if is_empty(root_ups):
        raise ValueError("cannot select from an empty set")
    grid = root_ups.grid
    best: PayoffVector | None = None
    best_key = None
    for kind, i, j in iter_flags(root_ups):
        corner = flag_corner(grid, kind, i, j)
        key = (criterion_value(criterion, corner), corner.p1, corner.p2)
        if best is None or key > best_key:
            best, best_key = corner, key
    return best


def _nearest_geq(pts: int, segs: int, axis, w):
    kind, idx = _locate(axis, w)
    if kind == _ON:
        if pts >> idx & 1:
            return w
        start = idx + 1
    elif kind == _BETWEEN:
        if segs >> idx & 1:
            return w
        start = idx + 1
    else:
        if w > axis[-1]:
            return None
        start = 0
    rest = pts >> start
    if rest:
        return axis[start + (rest & -rest).bit_length() - 1]
    return None


def _nearest_leq(pts: int, segs: int, axis, w):
    kind, idx = _locate(axis, w)
    if kind == _ON:
        if pts >> idx & 1:
            return w
        end = idx - 1
    elif kind == _BETWEEN:
        if segs >> idx & 1:
            return w
        end = idx
    else:
        if w < axis[0]:
            return None
        end = len(axis) - 1
    mask = pts & ((1 << (end + 1)) - 1) if end >= 0 else 0
    if mask:
        return axis[mask.bit_length() - 1]
    return None


def _point_on_axis(x: int, v: Fraction, other: Fraction) -> PayoffVector:
    return PayoffVector(v, other) if x == 1 else PayoffVector(other, v)


def extract_strategy(
    tree: GameTree, set_map: SetMap, node: int, target: PayoffVector
) -> Strategy:
    """A strategy for the subtree at `node` whose value there is exactly
    `target` and which is locally optimal everywhere in the subtree.

    Walk top-down. At each internal node, prefer committing to the left
    child, then to the right, and mix only when the target is attainable
    solely as a combination of controller-indifferent payoffs. The
    unchosen subtree is sent to its own worst payoff for the controller
    (the punishment that makes the chosen branch locally optimal); mixing
    recurses into both children with the two endpoint payoffs.
    """
    if not contains(set_map.by_node[node], target):
        raise TargetNotInUpsError(f"target {target} is not attainable at node {node}")
    grid = set_map.grid
    choices: dict[int, tuple[tuple[int, Fraction], ...]] = {}
    stack: list[tuple[int, PayoffVector]] = [(node, target)]
    while stack:
        nid, want = stack.pop()
        tnode = tree.nodes[nid]
        if isinstance(tnode, Leaf):
            if tnode.payoff != want:
                raise AlgebraInconsistencyError(
                    f"leaf {nid} pays {tnode.payoff}, extraction wanted {want}"
                )
            continue
        x = tnode.controller
        left, right = tnode.children
        ul, ur = set_map.by_node[left], set_map.by_node[right]
        want_x = want.component(x)
        if contains(ul, want) and want_x >= min_value_for_player(ur, x):
            choices[nid] = ((left, ONE),)
            stack.append((left, want))
            stack.append((right, min_point(ur, x)))
            continue
        if contains(ur, want) and want_x >= min_value_for_player(ul, x):
            choices[nid] = ((right, ONE),)
            stack.append((right, want))
            stack.append((left, min_point(ul, x)))
            continue
        # Mixed case: both children must offer the controller exactly
        # want_x, with the other player's payoffs bracketing the target.
        w = want.component(3 - x)
        axis = grid.u2 if x == 1 else grid.u1
        lp, ls = cross_section(ul, x, want_x)
        rp, rs = cross_section(ur, x, want_x)
        ys = _nearest_geq(lp, ls, axis, w)
        yt = _nearest_leq(rp, rs, axis, w)
        if ys is None or yt is None:
            ys = _nearest_leq(lp, ls, axis, w)
            yt = _nearest_geq(rp, rs, axis, w)
        if ys is None or yt is None:
            if nid == node:
                raise TargetNotInUpsError(
                    f"target {target} is not attainable at node {node}"
                )
            raise AlgebraInconsistencyError(
                f"no extraction case applies at node {nid} for {want}"
            )
        if ys == yt:
            raise AlgebraInconsistencyError(
                f"degenerate mixing pair at node {nid} for {want}"
            )
        lam = (w - yt) / (ys - yt)
        choices[nid] = ((left, lam), (right, 1 - lam))
        stack.append((left, _point_on_axis(x, want_x, ys)))
        stack.append((right, _point_on_axis(x, want_x, yt)))
    return Strategy(choices)


def _fold_strategy(original: GameTree, solved: GameTree, strategy: Strategy) -> Strategy:
    """Map a strategy on the binarized tree back onto the original nodes.

    Chain nodes introduced for an m-ary node compose into a single
    distribution over the original children (probability of child k is the
    probability of reaching chain step k and branching left there); forced
    single-child nodes get their only move with probability one.
    """
    nodes = original.nodes
    choices: dict[int, tuple[tuple[int, Fraction], ...]] = {}
    for nid in original.internal_ids():
        kids = nodes[nid].children
        if len(kids) == 1:
            choices[nid] = ((kids[0], ONE),)
            continue
        entries = []
        reach = ONE
        head = nid
        for orig_child in kids[:-1]:
            probs = dict(strategy.choices[head])
            solved_left, solved_right = solved.nodes[head].children
            entries.append((orig_child, reach * probs.get(solved_left, Fraction(0))))
            reach *= probs.get(solved_right, Fraction(0))
            head = solved_right
        entries.append((kids[-1], reach))
        choices[nid] = tuple(entries)
    return Strategy(choices)


def _solve(tree: GameTree, criterion: str, deterministic: bool) -> SolveResult:
    t0 = time.perf_counter()
    work = tree if tree.is_binary() else binarize(tree)
    set_map = compute_det_ups_all(work) if deterministic else compute_ups_all(work)
    t1 = time.perf_counter()
    root_ups = set_map.by_node[work.root]
    value = select_optimal(root_ups, criterion)
    strategy = extract_strategy(work, set_map, work.root, value)
    if work is not tree:
        strategy = _fold_strategy(tree, work, strategy)
    t2 = time.perf_counter()
    return SolveResult(
        value=value,
        strategy=strategy,
        root_ups=root_ups,
        stats=SolveStats(
            nodes=len(work.nodes),
            merges=set_map.merges,
            flag_ops=set_map.flag_ops,
            ups_ms=(t1 - t0) * 1000.0,
            extract_ms=(t2 - t1) * 1000.0,
            total_ms=(t2 - t0) * 1000.0,
        ),
    )


def best_nash(tree: GameTree, criterion: str) -> SolveResult:
    """Optimal equilibrium under `criterion`; binarizes internally if needed."""
    return _solve(tree, criterion, deterministic=False)


def best_deterministic_nash(tree: GameTree, criterion: str) -> SolveResult:
    """Optimal pure equilibrium under `criterion`."""
    return _solve(tree, criterion, deterministic=True)
