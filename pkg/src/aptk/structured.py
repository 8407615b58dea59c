"""FPT decision on instances that come with a deletion set S such that
G minus S is a forest of cliques.

Both solvers eliminate leaf cliques one at a time, folding the deleted
vertices' best contribution either into the running total (when the clique
is a whole component) or into the table of the clique's cut vertex. The
homomorphism solver guesses the map on S and distributes each clique over
the target's vertices, closing each distribution with a maximum-weight
perfect matching; the acyclic solver guesses the linear order of S and
places each clique's vertices into insertion slots of that order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from itertools import permutations, product

from .graph import Graph, blocks, induced, is_connected, is_forest_of_cliques
from .props import (
    Decision,
    PropertySpec,
    hom_lambda,
    is_vertex_transitive,
    make_witness,
    pt_bound,
)

_EXACT_MATCHING_LIMIT = 12
_NEG = -(10**9)


def max_weight_perfect_matching(w) -> tuple[int, list[tuple[int, int]]]:
    """Maximum-weight perfect matching of a square non-negative matrix.

    Small instances run a bitmask DP; larger ones go through scipy's
    assignment solver. Returns the value and the (row, col) pairs.
    """
    r = len(w)
    for row in w:
        if len(row) != r:
            raise ValueError("weight matrix must be square")
    if r == 0:
        return 0, []
    if r <= _EXACT_MATCHING_LIMIT:
        full = (1 << r) - 1
        f = [_NEG] * (1 << r)
        f[0] = 0
        for mask in range(full):
            if f[mask] == _NEG:
                continue
            row = w[mask.bit_count()]
            rest = full & ~mask
            while rest:
                cbit = rest & -rest
                rest &= rest - 1
                val = f[mask] + row[cbit.bit_length() - 1]
                if val > f[mask | cbit]:
                    f[mask | cbit] = val
        cols = []
        mask = full
        for i in range(r - 1, -1, -1):
            rest = mask
            while rest:
                cbit = rest & -rest
                rest &= rest - 1
                c = cbit.bit_length() - 1
                if f[mask ^ cbit] != _NEG and f[mask ^ cbit] + w[i][c] == f[mask]:
                    cols.append(c)
                    mask ^= cbit
                    break
        cols.reverse()
        return f[full], list(enumerate(cols))
    import numpy as np
    from scipy.optimize import linear_sum_assignment

    arr = np.asarray(w, dtype=np.int64)
    rows, cols = linear_sum_assignment(arr, maximize=True)
    return int(arr[rows, cols].sum()), list(zip((int(x) for x in rows), (int(x) for x in cols)))


def spencer_threshold(k: int) -> int:
    """Smallest tournament size whose guaranteed acyclic surplus absorbs k.

    The least b with (3/20)*b^(3/2) >= b/4 + k + 1/4, evaluated exactly as
    9*b^3 >= 25*(b + 4k + 1)^2; once k >= (25/3)^2 taking b = k also
    suffices, so the smaller of the two is returned.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    b = 1
    while 9 * b**3 < 25 * (b + 4 * k + 1) ** 2:
        b += 1
    if 9 * k >= 625:
        b = min(b, k)
    return b


# ---------------------------------------------------------------------------
# Shared leaf-clique elimination schedule
# ---------------------------------------------------------------------------

def clique_schedule(g: Graph, s, prefer_last: bool = False) -> list[tuple[list[int], int | None]]:
    """Order in which the leaf cliques of G minus S get consumed.

    Yields (members, cut_vertex) in original ids; cut_vertex is None when
    the clique is an entire component at that point, and stays behind
    otherwise. Any valid order yields the same solver value; prefer_last
    flips the tie-break so tests can compare two orders.
    """
    remaining = sorted(set(range(g.n)) - set(s))
    schedule: list[tuple[list[int], int | None]] = []
    while remaining:
        sub = induced(g, remaining)
        origin = sub.origin
        decomp = blocks(sub)
        counts = [0] * len(decomp.blocks)
        for bi, _ in decomp.block_forest:
            counts[bi] += 1
        leaves = [i for i, c in enumerate(counts) if c <= 1]
        keyed = sorted(leaves, key=lambda i: tuple(sorted(origin[v] for v in decomp.blocks[i])))
        pick = keyed[-1] if prefer_last else keyed[0]
        members = sorted(origin[v] for v in decomp.blocks[pick])
        cuts = [origin[c] for bi, c in decomp.block_forest if bi == pick]
        if cuts:
            schedule.append((members, cuts[0]))
            remaining = [v for v in remaining if v == cuts[0] or v not in members]
        else:
            schedule.append((members, None))
            remaining = [v for v in remaining if v not in members]
    return schedule


def _check_structured_input(g: Graph, s) -> None:
    if not is_connected(g):
        raise ValueError("structured solving needs a connected graph")
    bad = [v for v in s if not 0 <= v < g.n]
    if bad:
        raise ValueError(f"deletion set contains out-of-range vertices {bad}")
    rest = set(range(g.n)) - set(s)
    if rest and not is_forest_of_cliques(induced(g, rest)):
        raise ValueError("G minus S is not a forest of cliques")


# ---------------------------------------------------------------------------
# Homomorphism solver
# ---------------------------------------------------------------------------

def _compositions(total: int, parts: int):
    """All tuples of non-negative ints of length `parts` summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _hom_run_phi(g: Graph, g0: Graph, s, phi, schedule, collect: bool):
    """Best edge count over maps extending phi; with collect=True also the
    per-clique argmax records needed to rebuild a full certificate."""
    n0 = g0.n
    adj0 = g0.neighbor_masks
    edge_pairs = [(a, b) for a, b, _ in g0.edges]
    img_of_s = dict(zip(s, phi))
    r_phi = 0
    for u, v, _ in g.edges:
        iu, iv = img_of_s.get(u), img_of_s.get(v)
        if iu is not None and iv is not None and adj0[iu] >> iv & 1:
            r_phi += 1
    tab = {v: [0] * n0 for v in range(g.n) if v not in img_of_s}
    for v in tab:
        for u in g.adj[v]:
            iu = img_of_s.get(u)
            if iu is not None:
                row = tab[v]
                for v0 in range(n0):
                    if adj0[iu] >> v0 & 1:
                        row[v0] += 1
    records = [] if collect else None

    def clique_best(members, pinned_image):
        """Best distribution + matching for one clique's members.

        pinned_image is the image of the clique's cut vertex (edges from the
        members into it count), or None for the component case.
        """
        size = len(members)
        best_val, best_map = -1, None
        for dist in _compositions(size, n0):
            inner = 0
            for a, b in edge_pairs:
                inner += dist[a] * dist[b]
            if pinned_image is not None:
                for u0 in range(n0):
                    if adj0[pinned_image] >> u0 & 1:
                        inner += dist[u0]
            slots = [u0 for u0 in range(n0) for _ in range(dist[u0])]
            w = [[tab[v][u0] for u0 in slots] for v in members]
            mval, matching = max_weight_perfect_matching(w)
            if inner + mval > best_val:
                best_val = inner + mval
                best_map = {members[i]: slots[c] for i, c in matching}
        return best_val, best_map

    for members, cut in schedule:
        if cut is None:
            t, amap = clique_best(members, None)
            r_phi += t
            if collect:
                records.append(("component", amap))
        else:
            body = [v for v in members if v != cut]
            per_image = [clique_best(body, v0) for v0 in range(n0)]
            row = tab[cut]
            for v0 in range(n0):
                row[v0] += per_image[v0][0]
            if collect:
                records.append(("cut", cut, [amap for _, amap in per_image]))
    return r_phi, records


def _hom_phi_chunk(args):
    g, g0, s, schedule, phis = args
    best_val, best_phi = -1, None
    for phi in phis:
        val, _ = _hom_run_phi(g, g0, s, phi, schedule, collect=False)
        if val > best_val:
            best_val, best_phi = val, phi
    return best_val, best_phi


def solve_hom_structured(
    g: Graph,
    s,
    g0: Graph,
    k: int,
    jobs: int = 1,
    want_witness: bool = True,
) -> Decision:
    """Decide whether g has a spanning subgraph with at least pt + k edges
    and a homomorphism into g0, given G minus S is a forest of cliques."""
    if g.oriented or g.labeled or g0.oriented or g0.labeled:
        raise ValueError("structured homomorphism solving covers plain graphs only")
    if not is_vertex_transitive(g0):
        raise ValueError("homomorphism target must be vertex-transitive")
    s = tuple(sorted(set(s)))
    _check_structured_input(g, s)
    lam = hom_lambda(g0)
    threshold = pt_bound(g, lam) + Fraction(k)
    schedule = clique_schedule(g, s)
    all_phis = list(product(range(g0.n), repeat=len(s)))
    if jobs > 1 and len(all_phis) >= 4 * jobs:
        chunk = math.ceil(len(all_phis) / jobs)
        parts = [all_phis[i: i + chunk] for i in range(0, len(all_phis), chunk)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_hom_phi_chunk, [(g, g0, s, schedule, p) for p in parts]))
        best_val = max(v for v, _ in results)
        best_phi = next(p for v, p in results if v == best_val)
    else:
        best_val, best_phi = _hom_phi_chunk((g, g0, s, schedule, all_phis))
    yes = best_val >= threshold
    witness = None
    if yes and want_witness:
        _, records = _hom_run_phi(g, g0, s, best_phi, schedule, collect=True)
        assignment = dict(zip(s, best_phi))
        for rec in reversed(records):
            if rec[0] == "component":
                assignment.update(rec[1])
            else:
                _, cut, maps_by_image = rec
                assignment.update(maps_by_image[assignment[cut]])
        cert = tuple(assignment[v] for v in range(g.n))
        witness = make_witness(g, PropertySpec.homomorphism(g0), cert)
    return Decision(
        yes=yes, witness=witness, value=best_val, threshold=threshold,
        s=s, solver="structured-hom",
    )


# ---------------------------------------------------------------------------
# Acyclic solver
# ---------------------------------------------------------------------------

def _slot_dp(pi, tab, nslots, pinned=None, pin_slot=0):
    """Best monotone slot assignment along pi; returns (value, slots).

    Each vertex contributes tab[v][slot]; the pinned vertex contributes
    nothing and must sit exactly in pin_slot.
    """
    def value(v, j):
        if pinned is not None and v == pinned:
            return 0 if j == pin_slot else _NEG
        return tab[v][j]

    rows = [[value(pi[0], j) for j in range(nslots)]]
    for idx in range(1, len(pi)):
        run = _NEG
        row = []
        prev = rows[-1]
        for j in range(nslots):
            if prev[j] > run:
                run = prev[j]
            row.append(run + value(pi[idx], j) if run != _NEG else _NEG)
        rows.append(row)
    last = rows[-1]
    best = max(last)
    # walk back, preferring the smallest slot achieving the optimum
    slots = [0] * len(pi)
    j = last.index(best)
    slots[-1] = j
    for idx in range(len(pi) - 2, -1, -1):
        limit = slots[idx + 1]
        target = rows[idx + 1][limit] - value(pi[idx + 1], limit)
        j = next(jj for jj in range(limit + 1) if rows[idx][jj] == target)
        slots[idx] = j
    return best, slots


def _clique_pass(members, arcset, tab, nslots, pinned, collect):
    """Maximize arcs inside the clique plus table payoffs over all
    (permutation, monotone slot) placements.

    Component case (pinned None): returns (value, pi, slots).
    Cut case: returns a list over the pinned vertex's slot j of
    (value_j, pi_j, slots_j).
    """
    size = len(members)
    if pinned is None:
        best = (-1, None)
        for pi in permutations(members):
            inside = 0
            for i in range(size):
                a = pi[i]
                for j2 in range(i + 1, size):
                    if (a, pi[j2]) in arcset:
                        inside += 1
            val, _ = _slot_dp(pi, tab, nslots)
            if inside + val > best[0]:
                best = (inside + val, pi)
        val, pi = best
        if not collect:
            return val, None, None
        _, slots = _slot_dp(pi, tab, nslots)
        return val, pi, slots
    best_by_slot = [(-1, None)] * nslots
    for pi in permutations(members):
        inside = 0
        for i in range(size):
            a = pi[i]
            for j2 in range(i + 1, size):
                if (a, pi[j2]) in arcset:
                    inside += 1
        for jstar in range(nslots):
            val, _ = _slot_dp(pi, tab, nslots, pinned, jstar)
            if inside + val > best_by_slot[jstar][0]:
                best_by_slot[jstar] = (inside + val, pi)
    out = []
    for jstar in range(nslots):
        val, pi = best_by_slot[jstar]
        if not collect:
            out.append((val, None, None))
            continue
        _, slots = _slot_dp(pi, tab, nslots, pinned, jstar)
        out.append((val, pi, slots))
    return out


def _acyclic_run_order(g: Graph, s_order, schedule, collect: bool):
    """Best arcs-along-order total over all extensions of one S order."""
    nslots = len(s_order) + 1
    pos = {v: i for i, v in enumerate(s_order)}
    arcset = frozenset(g.arcs)
    r_ord = sum(1 for t, h in arcset if t in pos and h in pos and pos[t] < pos[h])
    tab = {v: [0] * nslots for v in range(g.n) if v not in pos}
    for t, h in arcset:
        if t in pos and h in tab:
            row = tab[h]  # arc from S into v: along iff v sits after pos[t]
            for j in range(pos[t] + 1, nslots):
                row[j] += 1
        elif h in pos and t in tab:
            row = tab[t]  # arc from v into S: along iff v sits at or before pos[h]
            for j in range(pos[h] + 1):
                row[j] += 1
    records = [] if collect else None
    for members, cut in schedule:
        if cut is None:
            val, pi, slots = _clique_pass(members, arcset, tab, nslots, None, collect)
            r_ord += val
            if collect:
                records.append(("component", pi, slots))
        else:
            per_slot = _clique_pass(members, arcset, tab, nslots, cut, collect)
            row = tab[cut]
            for j in range(nslots):
                row[j] += per_slot[j][0]
            if collect:
                records.append(("cut", cut, per_slot))
    return r_ord, records


def _acyclic_order_chunk(args):
    g, schedule, orders = args
    best_val, best_order = -1, None
    for s_order in orders:
        val, _ = _acyclic_run_order(g, s_order, schedule, collect=False)
        if val > best_val:
            best_val, best_order = val, s_order
    return best_val, best_order


def _rebuild_order(g: Graph, s_order, records) -> tuple[int, ...]:
    """Assemble a full linear order from per-clique (pi, slots) records."""
    nslots = len(s_order) + 1
    slot_of: dict[int, int] = {}
    chains: list[tuple[tuple[int, ...], list[int]]] = []
    for rec in reversed(records):
        if rec[0] == "component":
            _, pi, slots = rec
            for v, j in zip(pi, slots):
                slot_of[v] = j
            chains.append((pi, slots))
        else:
            _, cut, per_slot = rec
            _, pi, slots = per_slot[slot_of[cut]]
            for v, j in zip(pi, slots):
                if v != cut:
                    slot_of[v] = j
            chains.append((pi, slots))
    groups: dict[int, list[int]] = {j: [] for j in range(nslots)}
    for v, j in sorted(slot_of.items()):
        groups[j].append(v)
    order: list[int] = []
    for j in range(nslots):
        group = groups[j]
        # within a slot, respect every chain's internal order (chains only
        # share cut vertices, so the union of constraints is acyclic)
        succ: dict[int, set[int]] = {v: set() for v in group}
        indeg: dict[int, int] = {v: 0 for v in group}
        for pi, slots in chains:
            here = [v for v, jj in zip(pi, slots) if jj == j and v in indeg]
            for a_i in range(len(here)):
                for b_i in range(a_i + 1, len(here)):
                    a, b = here[a_i], here[b_i]
                    if b not in succ[a]:
                        succ[a].add(b)
                        indeg[b] += 1
        ready = sorted(v for v in group if indeg[v] == 0)
        while ready:
            v = ready.pop(0)
            order.append(v)
            for w in sorted(succ[v]):
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
            ready.sort()
        if j < len(s_order):
            order.append(s_order[j])
    return tuple(order)


def solve_acyclic_structured(
    g: Graph,
    s,
    k: int,
    jobs: int = 1,
    use_spencer: bool = True,
    want_witness: bool = True,
) -> Decision:
    """Decide whether the oriented graph g has an acyclic spanning subgraph
    with at least pt + k arcs, given G minus S is a forest of cliques
    (whose cliques are then tournaments)."""
    if not g.oriented or g.labeled:
        raise ValueError("acyclic solving needs an unlabeled oriented graph")
    s = tuple(sorted(set(s)))
    _check_structured_input(g, s)
    threshold = pt_bound(g, Fraction(1, 2)) + Fraction(k)
    rest = sorted(set(range(g.n)) - set(s))
    if use_spencer and rest:
        biggest = max(len(b) for b in blocks(induced(g, rest)).blocks)
        if biggest >= spencer_threshold(int(k)):
            return Decision(
                yes=True, value=None, threshold=threshold, s=s,
                solver="structured-acyclic-spencer",
            )
    schedule = clique_schedule(g, s)
    all_orders = list(permutations(s))
    if jobs > 1 and len(all_orders) >= 4 * jobs:
        chunk = math.ceil(len(all_orders) / jobs)
        parts = [all_orders[i: i + chunk] for i in range(0, len(all_orders), chunk)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_acyclic_order_chunk, [(g, schedule, p) for p in parts]))
        best_val = max(v for v, _ in results)
        best_order = next(o for v, o in results if v == best_val)
    else:
        best_val, best_order = _acyclic_order_chunk((g, schedule, all_orders))
    yes = best_val >= threshold
    witness = None
    if yes and want_witness:
        _, records = _acyclic_run_order(g, best_order, schedule, collect=True)
        full_order = _rebuild_order(g, best_order, records)
        witness = make_witness(g, PropertySpec.acyclic(), full_order)
    return Decision(
        yes=yes, witness=witness, value=best_val, threshold=threshold,
        s=s, solver="structured-acyclic",
    )
