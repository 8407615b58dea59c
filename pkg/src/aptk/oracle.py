"""Brute-force ground truth, small-graph corpora, and the strong-extendibility
falsification checker.

Everything here is deliberately independent of the solving pipeline: the
oracles enumerate, the pipeline reasons. Budgets are hard errors, never
silent approximations.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .graph import (
    Digraph,
    EdgeAttrs,
    Graph,
    blocks,
    boundary,
    induced,
    mask_connected,
)
from .props import PropertySpec, pt_bound

_CHUNK = 1 << 15


class OracleBudgetError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Exact maxima
# ---------------------------------------------------------------------------

def _edge_compat_matrix(g0: Graph, attrs: EdgeAttrs, reverse: bool) -> np.ndarray:
    """M[a, b] == True iff mapping the edge's endpoints to (a, b) realizes it."""
    n0 = g0.n
    mat = np.zeros((n0, n0), dtype=bool)
    for a, b, attrs0 in g0.edges:
        if attrs0.label != attrs.label:
            continue
        if attrs0.head is None:
            mat[a, b] = mat[b, a] = True
        else:
            tail0 = a if attrs0.head == b else b
            mat[tail0, attrs0.head] = True
    if reverse:
        mat = mat.T
    return mat


def exact_max_hom(g: Graph, g0: Graph, budget: int = 10**8) -> tuple[int, tuple[int, ...]]:
    """Maximum, over all maps V(g) -> V(g0), of the number of g-edges mapped
    onto g0-edges of matching label/orientation. Full enumeration."""
    n, n0 = g.n, g0.n
    total = n0**n
    if total > budget:
        raise OracleBudgetError(f"{total} maps exceed the budget of {budget}")
    mats = []
    for u, v, attrs in g.edges:
        if attrs.head is None:
            mats.append((u, v, _edge_compat_matrix(g0, attrs, reverse=False)))
        else:
            # stored pair is (u, v) with u < v; matrix indexed by (img u, img v)
            mats.append((u, v, _edge_compat_matrix(g0, attrs, reverse=attrs.head == u)))
    strides = np.array([n0 ** (n - 1 - j) for j in range(n)], dtype=np.int64)
    best_val = -1
    best_map: tuple[int, ...] = ()
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (idx[:, None] // strides[None, :]) % n0
        counts = np.zeros(len(idx), dtype=np.int32)
        for u, v, mat in mats:
            counts += mat[digits[:, u], digits[:, v]]
        i = int(np.argmax(counts))
        if int(counts[i]) > best_val:
            best_val = int(counts[i])
            best_map = tuple(int(x) for x in digits[i])
    return best_val, best_map


def exact_max_cut(g: Graph, cap: int = 26) -> tuple[int, frozenset[int]]:
    """Max cut by enumerating 2^(n-1) bipartitions (vertex n-1 pinned)."""
    n = g.n
    if n > cap:
        raise OracleBudgetError(f"max-cut enumeration capped at {cap} vertices")
    masks = g.neighbor_masks
    full = (1 << n) - 1
    best, best_side = 0, 0
    for side in range(1 << (n - 1)):
        cut = 0
        rest = side
        while rest:
            v = rest & -rest
            rest &= rest - 1
            cut += (masks[v.bit_length() - 1] & full & ~side).bit_count()
        if cut > best:
            best, best_side = cut, side
    return best, frozenset(i for i in range(n) if best_side >> i & 1)


def _arc_list(d: Graph | Digraph) -> tuple[int, list[tuple[int, int]]]:
    if isinstance(d, Digraph):
        return d.n, list(d.arcs)
    if not d.oriented:
        raise ValueError("need an oriented graph or a digraph")
    return d.n, list(d.arcs)


def exact_max_acyclic(d: Graph | Digraph, cap: int = 24) -> tuple[int, tuple[int, ...]]:
    """Maximum arcs along any linear order, by subset dynamic programming:
    f(T) = max over v in T of f(T - v) + |arcs from T - v into v|."""
    n, arcs = _arc_list(d)
    if n > cap:
        raise OracleBudgetError(f"subset DP capped at {cap} vertices")
    pred = [0] * n  # pred[v]: bitmask of u with an arc u -> v
    for t, h in arcs:
        pred[h] |= 1 << t
    size = 1 << n
    f = [0] * size
    choice = [0] * size
    for mask in range(1, size):
        best = -1
        best_v = 0
        rest = mask
        while rest:
            vbit = rest & -rest
            rest &= rest - 1
            v = vbit.bit_length() - 1
            val = f[mask ^ vbit] + (pred[v] & (mask ^ vbit)).bit_count()
            if val > best:
                best, best_v = val, v
        f[mask] = best
        choice[mask] = best_v
    order = []
    mask = size - 1
    while mask:
        v = choice[mask]
        order.append(v)
        mask ^= 1 << v
    order.reverse()
    return f[size - 1], tuple(order)


def exact_apt_decide(g: Graph, k, spec: PropertySpec) -> bool:
    """val(g) >= pt + k, compared exactly as rationals."""
    if spec.variant == "acyclic":
        val, _ = exact_max_acyclic(g)
    else:
        val, _ = exact_max_hom(g, spec.target)
    return val >= pt_bound(g, spec.lam) + Fraction(k)


# ---------------------------------------------------------------------------
# Corpora
# ---------------------------------------------------------------------------

def enumerate_connected_graphs(n: int, cap: int = 7):
    """All connected simple graphs on n labeled vertices, in ascending
    order of their edge bitmask (each bitmask is its own canonical form)."""
    if n > cap:
        raise OracleBudgetError(f"exhaustive enumeration capped at {cap} vertices")
    pairs = list(combinations(range(n), 2))
    for emask in range(1 << len(pairs)):
        masks = [0] * n
        for i, (u, v) in enumerate(pairs):
            if emask >> i & 1:
                masks[u] |= 1 << v
                masks[v] |= 1 << u
        if not mask_connected(masks, (1 << n) - 1):
            continue
        yield Graph(n, [p for i, p in enumerate(pairs) if emask >> i & 1], _validate=False)


def random_connected_graph(n: int, rng: random.Random, p: float = 0.5) -> Graph:
    """Random spanning tree plus density-p extra edges; always connected."""
    edges = set()
    order = list(range(n))
    rng.shuffle(order)
    for i in range(1, n):
        a = order[rng.randrange(i)]
        b = order[i]
        edges.add((min(a, b), max(a, b)))
    for u, v in combinations(range(n), 2):
        if rng.random() < p:
            edges.add((u, v))
    return Graph(n, sorted(edges))


def orient_randomly(g: Graph, rng: random.Random) -> Graph:
    edges = [(u, v, EdgeAttrs(head=v if rng.random() < 0.5 else u)) for u, v, _ in g.edges]
    return Graph(g.n, edges, oriented=True)


def random_connected_oriented_graph(n: int, rng: random.Random, p: float = 0.5) -> Graph:
    return orient_randomly(random_connected_graph(n, rng, p), rng)


def random_tournament(n: int, rng: random.Random) -> Graph:
    edges = [
        (u, v, EdgeAttrs(head=v if rng.random() < 0.5 else u))
        for u, v in combinations(range(n), 2)
    ]
    return Graph(n, edges, oriented=True)


def random_digraph(
    n: int,
    rng: random.Random,
    parts: int = 1,
    p: float = 0.5,
    opposite_p: float = 0.3,
) -> Digraph:
    """Random digraph with the given number of weakly connected parts;
    opposite arc pairs appear with probability opposite_p per kept pair."""
    parts = min(parts, n)
    labels = [i % parts for i in range(n)]
    rng.shuffle(labels)
    groups: dict[int, list[int]] = {}
    for v, c in enumerate(labels):
        groups.setdefault(c, []).append(v)
    arcs = []
    for group in groups.values():
        for i in range(1, len(group)):
            a, b = group[rng.randrange(i)], group[i]
            arcs.append((a, b) if rng.random() < 0.5 else (b, a))
        for u, v in combinations(group, 2):
            if (u, v) in arcs or (v, u) in arcs:
                continue
            if rng.random() < p:
                arcs.append((u, v) if rng.random() < 0.5 else (v, u))
    out = set(arcs)
    for t, h in list(out):
        if rng.random() < opposite_p:
            out.add((h, t))
    return Digraph(n, sorted(out))


# ---------------------------------------------------------------------------
# Strong-extendibility falsification
# ---------------------------------------------------------------------------

WeightFunction = dict  # edge (u, v) -> positive Fraction


@dataclass
class Counterexample:
    check: str  # "inclusiveness" | "block-additivity" | "extension"
    graph: Graph
    s: tuple[int, ...] | None = None
    weights: WeightFunction | None = None
    detail: str = ""


@dataclass
class ExtendibilityReport:
    lam: Fraction
    graphs_tested: int
    cuts_tested: int
    counterexample: Counterexample | None

    @property
    def ok(self) -> bool:
        return self.counterexample is None


def _enumerate_class(n: int, kind: str):
    """All labeled graphs of the class on n vertices (disconnected included)."""
    pairs = list(combinations(range(n), 2))
    if kind == "plain":
        for emask in range(1 << len(pairs)):
            yield Graph(
                n,
                [p for i, p in enumerate(pairs) if emask >> i & 1],
                _validate=False,
            )
    elif kind == "oriented":
        for code in range(3 ** len(pairs)):
            edges = []
            c = code
            for u, v in pairs:
                state = c % 3
                c //= 3
                if state == 1:
                    edges.append((u, v, EdgeAttrs(head=v)))
                elif state == 2:
                    edges.append((u, v, EdgeAttrs(head=u)))
            yield Graph(n, edges, oriented=True, _validate=False)
    else:
        raise ValueError(f"unknown graph class {kind!r}")


def _drop_edges(g: Graph, drop: set[tuple[int, int]]) -> Graph:
    kept = [e for e in g.edges if (e[0], e[1]) not in drop]
    return Graph(g.n, kept, oriented=g.oriented, labeled=g.labeled, _validate=False)


def _random_weights(edges, rng: random.Random, max_int: int = 100) -> WeightFunction:
    return {
        (u, v): Fraction(rng.randint(1, max_int), rng.randint(1, max_int))
        for u, v, _ in edges
    }


def _glued_graph(parts: list[Graph], rng: random.Random, kind: str) -> Graph:
    """Glue the parts at random shared vertices: a sampled block-structured graph."""
    base = parts[0]
    n = base.n
    edges = list(base.edges)
    for part in parts[1:]:
        shared_old = rng.randrange(part.n)
        shared_new = rng.randrange(n)
        remap = {}
        nxt = n
        for v in range(part.n):
            if v == shared_old:
                remap[v] = shared_new
            else:
                remap[v] = nxt
                nxt += 1
        for u, v, attrs in part.edges:
            a, b = remap[u], remap[v]
            head = None if attrs.head is None else remap[attrs.head]
            if a > b:
                a, b = b, a
            edges.append((a, b, EdgeAttrs(head=head, label=attrs.label)))
        n = nxt
    return Graph(n, edges, oriented=(kind == "oriented"), _validate=False)


def check_strong_extendibility(
    membership,
    lam: Fraction,
    n_max: int,
    random_weight_trials: int = 20,
    seed: int = 0,
    kind: str = "plain",
    block_samples: int = 60,
    monotone: bool = True,
) -> ExtendibilityReport:
    """Falsification search over all graphs of the class up to n_max.

    Checks inclusiveness on the one- and two-vertex graphs, block additivity
    on sampled glued graphs, and the cut-extension requirement: for every G
    and every S with G[S] and G minus S in the property, and for unit weights
    plus the requested number of random positive rational weightings, some
    F inside the cut with c(F) >= lam*c(cut) keeps G minus (cut minus F) in
    the property. This is a falsifier, never a certifier: a clean report is
    evidence, not proof.
    """
    if n_max > 6:
        raise OracleBudgetError("extendibility scan capped at 6 vertices")
    lam = Fraction(lam)
    rng = random.Random(seed)
    graphs_tested = 0
    cuts_tested = 0

    def member(g: Graph) -> bool:
        return bool(membership(g))

    # inclusiveness: K1 and every K2 variant of the class
    tiny = [Graph(1, oriented=(kind == "oriented"))]
    if kind == "plain":
        tiny.append(Graph(2, [(0, 1)]))
    else:
        tiny.append(Graph(2, [(0, 1, EdgeAttrs(head=1))], oriented=True))
        tiny.append(Graph(2, [(0, 1, EdgeAttrs(head=0))], oriented=True))
    for g in tiny:
        graphs_tested += 1
        if not member(g):
            return ExtendibilityReport(
                lam, graphs_tested, cuts_tested,
                Counterexample("inclusiveness", g, detail="one- or two-vertex graph rejected"),
            )

    # block additivity, both directions, on sampled glued graphs
    small = []
    for n in range(2, min(4, n_max) + 1):
        small.extend(_enumerate_class(n, kind))
    for _ in range(block_samples):
        parts = [small[rng.randrange(len(small))] for _ in range(rng.randint(2, 3))]
        g = _glued_graph(parts, rng, kind)
        graphs_tested += 1
        whole = member(g)
        per_block = all(member(induced(g, b)) for b in blocks(g).blocks)
        if whole != per_block:
            return ExtendibilityReport(
                lam, graphs_tested, cuts_tested,
                Counterexample("block-additivity", g, detail=f"whole={whole} blocks={per_block}"),
            )

    # strong cut extension
    for n in range(2, n_max + 1):
        for g in _enumerate_class(n, kind):
            graphs_tested += 1
            g_member = member(g)
            for smask in range(1, (1 << n) - 1):
                s = tuple(i for i in range(n) if smask >> i & 1)
                delta = [(u, v) for u, v, _ in boundary(g, s)]
                cuts_tested += 1
                if g_member:
                    continue  # F = delta keeps everything and meets any weighting
                co = tuple(sorted(set(range(n)) - set(s)))
                if not member(induced(g, s)) or not member(induced(g, co)):
                    continue
                nd = len(delta)
                full = (1 << nd) - 1
                valid = [False] * (1 << nd)
                order = sorted(range(1 << nd), key=lambda m: -m.bit_count())
                for fmask in order:
                    if fmask == full:
                        valid[fmask] = g_member
                        continue
                    if monotone and any(
                        valid[fmask | (1 << i)] for i in range(nd) if not fmask >> i & 1
                    ):
                        valid[fmask] = True  # inherit: removing edges keeps membership
                        continue
                    drop = {delta[i] for i in range(nd) if not fmask >> i & 1}
                    valid[fmask] = member(_drop_edges(g, drop))
                family = [m for m in range(1 << nd) if valid[m]]
                weightings = [{e: Fraction(1) for e in delta}]
                weightings += [
                    {
                        e: Fraction(rng.randint(1, 100), rng.randint(1, 100))
                        for e in delta
                    }
                    for _ in range(random_weight_trials)
                ]
                for c in weightings:
                    total = sum(c.values(), Fraction(0))
                    need = lam * total
                    ok = any(
                        sum((c[delta[i]] for i in range(nd) if fmask >> i & 1), Fraction(0)) >= need
                        for fmask in family
                    )
                    if not ok:
                        full_c = {(u, v): c.get((u, v), Fraction(1)) for u, v, _ in g.edges}
                        return ExtendibilityReport(
                            lam, graphs_tested, cuts_tested,
                            Counterexample("extension", g, s=s, weights=full_c),
                        )
    return ExtendibilityReport(lam, graphs_tested, cuts_tested, None)


def reverify_counterexample(membership, lam: Fraction, cx: Counterexample) -> bool:
    """Exhaustively confirm an extension counterexample: no F meets the bound."""
    if cx.check != "extension":
        return True
    g, s, c = cx.graph, set(cx.s), cx.weights
    delta = [(u, v) for u, v, _ in boundary(g, s)]
    total = sum(c[e] for e in delta)
    for fmask in range(1 << len(delta)):
        kept = [delta[i] for i in range(len(delta)) if fmask >> i & 1]
        if sum((c[e] for e in kept), Fraction(0)) < Fraction(lam) * total:
            continue
        drop = set(delta) - set(kept)
        if membership(_drop_edges(g, drop)):
            return False
    return True


# membership predicates for the standard properties ------------------------

def bipartite_membership(g: Graph) -> bool:
    color = [-1] * g.n
    for start in range(g.n):
        if color[start] != -1:
            continue
        color[start] = 0
        stack = [start]
        while stack:
            v = stack.pop()
            for w in g.adj[v]:
                if color[w] == -1:
                    color[w] = 1 - color[v]
                    stack.append(w)
                elif color[w] == color[v]:
                    return False
    return True


def colorable_membership(q: int):
    def check(g: Graph) -> bool:
        color = [-1] * g.n
        order = sorted(range(g.n), key=lambda v: -len(g.adj[v]))

        def go(i: int) -> bool:
            if i == g.n:
                return True
            v = order[i]
            used = {color[w] for w in g.adj[v] if color[w] != -1}
            for c in range(q):
                if c not in used:
                    color[v] = c
                    if go(i + 1):
                        return True
                    color[v] = -1
            return False

        return go(0)

    return check


def acyclic_membership(g: Graph) -> bool:
    n, arcs = _arc_list(g)
    indeg = [0] * n
    out: dict[int, list[int]] = {v: [] for v in range(n)}
    for t, h in arcs:
        out[t].append(h)
        indeg[h] += 1
    ready = [v for v in range(n) if indeg[v] == 0]
    done = 0
    while ready:
        v = ready.pop()
        done += 1
        for w in out[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    return done == n
