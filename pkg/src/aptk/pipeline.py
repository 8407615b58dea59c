"""End-to-end decision procedures.

apt_decide runs the reduction engine and, unless the parameter was already
consumed, hands the original instance plus the deletion set to the matching
structured solver. mas_above_half is the separate max-acyclic-subdigraph
route for digraphs that may carry opposite arc pairs and be disconnected:
strip pairs, identify components, answer by the guarantee or solve the
<= 4k-vertex kernel exactly.
"""

from __future__ import annotations

import time
from fractions import Fraction

from .graph import Digraph, Graph, is_connected
from .props import Decision, PropertySpec, pt_bound
from .reduction import StructuredHandoff, Yes, decide_or_decompose
from .structured import solve_acyclic_structured, solve_hom_structured


def apt_decide(
    g: Graph,
    k: int,
    spec: PropertySpec,
    jobs: int = 1,
    use_spencer: bool = True,
    want_witness: bool = True,
) -> Decision:
    """Decide whether g has a spanning subgraph in the property with at
    least lam*m + (1-lam)/2*(n-1) + k edges."""
    if not is_connected(g):
        raise ValueError("input graph must be connected")
    if int(k) != k or k < 1:
        raise ValueError("k must be an integer >= 1")
    if not spec.matches_graph(g):
        raise ValueError(
            f"property {spec.name or spec.variant!r} applies to "
            f"{'oriented' if spec.oriented else 'plain'}"
            f"{' labeled' if spec.labeled else ''} graphs"
        )
    k = int(k)
    t0 = time.perf_counter()
    outcome = decide_or_decompose(g, k, spec)
    t_reduce = time.perf_counter() - t0
    if isinstance(outcome, Yes):
        return Decision(
            yes=True, witness=None, k_star=outcome.k_star, s=(),
            trace=outcome.trace, solver="reduction-early-yes",
            timings={"reduce": t_reduce},
        )
    assert isinstance(outcome, StructuredHandoff)
    t1 = time.perf_counter()
    if spec.variant == "acyclic":
        dec = solve_acyclic_structured(
            g, outcome.s, k, jobs=jobs, use_spencer=use_spencer,
            want_witness=want_witness,
        )
    else:
        dec = solve_hom_structured(
            g, outcome.s, spec.target, k, jobs=jobs, want_witness=want_witness,
        )
    dec.k_star = outcome.k_star
    dec.trace = outcome.trace
    dec.timings = {"reduce": t_reduce, "solve": time.perf_counter() - t1}
    return dec


def _identify(d: Digraph, a: int, b: int) -> Digraph:
    """Merge vertex b into vertex a (no arcs between them exist)."""
    if a > b:
        a, b = b, a

    def remap(v: int) -> int:
        if v == b:
            return a
        return v - 1 if v > b else v

    return Digraph(d.n - 1, sorted({(remap(t), remap(h)) for t, h in d.arcs}))


def _weak_components(d: Digraph) -> list[tuple[int, ...]]:
    adj: list[set[int]] = [set() for _ in range(d.n)]
    for t, h in d.arcs:
        adj[t].add(h)
        adj[h].add(t)
    seen = [False] * d.n
    comps = []
    for start in range(d.n):
        if seen[start]:
            continue
        seen[start] = True
        comp = [start]
        stack = [start]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    stack.append(w)
        comps.append(tuple(sorted(comp)))
    return comps


def mas_above_half(d: Digraph, k: int) -> Decision:
    """Does d have an acyclic subdigraph with at least m/2 + k arcs?

    Opposite arc pairs are removed first (each contributes exactly one arc
    to every maximal solution, which keeps the question invariant), then
    components are identified pairwise until the digraph is connected; the
    guarantee answers YES when k <= (n-1)/4, and otherwise the instance has
    at most 4k vertices and is solved by the exact subset DP.
    """
    if int(k) != k or k < 1:
        raise ValueError("k must be an integer >= 1")
    k = int(k)
    t0 = time.perf_counter()
    arcset = set(d.arcs)
    pairs = {(t, h) for t, h in arcset if (h, t) in arcset and t < h}
    kept = [a for a in d.arcs if (a[0], a[1]) not in pairs and (a[1], a[0]) not in pairs]
    cur = Digraph(d.n, kept)
    identifications = 0
    while True:
        comps = _weak_components(cur)
        if len(comps) == 1:
            break
        cur = _identify(cur, comps[0][0], comps[1][0])
        identifications += 1
    threshold = Fraction(cur.m, 2) + k
    timings = {"prepare": time.perf_counter() - t0}
    if Fraction(k) <= Fraction(cur.n - 1, 4):
        return Decision(
            yes=True, threshold=threshold, solver="mas-guarantee",
            timings=timings,
            trace=(),
        )
    assert cur.n <= 4 * k, "kernel bound violated"
    from .oracle import exact_max_acyclic

    t1 = time.perf_counter()
    value, _ = exact_max_acyclic(cur)
    timings["kernel-dp"] = time.perf_counter() - t1
    dec = Decision(
        yes=Fraction(value) >= threshold, value=value, threshold=threshold,
        solver="mas-kernel-dp", timings=timings,
    )
    dec.timings["kernel_n"] = cur.n
    return dec
