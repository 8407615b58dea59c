"""Target properties, the guaranteed-edge-count bound, and membership tests.

Every quantity that enters a threshold comparison is an exact
``fractions.Fraction``; no floating point appears anywhere on a decision
path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .graph import Graph, components, is_connected

Rational = Fraction


def pt_bound(g: Graph, lam: Fraction) -> Fraction:
    """Guaranteed edge count lam*m + (1-lam)/2*(n-1) for connected g."""
    if not is_connected(g):
        raise ValueError("bound is defined for connected graphs only")
    lam = Fraction(lam)
    return lam * g.m + (1 - lam) / 2 * (g.n - 1)


def hom_lambda(g0: Graph) -> Fraction:
    """d/n0 for a homomorphism target: d is the minimum, over vertices and
    over the (label, direction) classes present in g0, of the number of
    incident edges in that class."""
    if g0.m == 0:
        raise ValueError("homomorphism target needs at least one edge")
    labels = sorted({attrs.label for _, _, attrs in g0.edges}) if g0.labeled else [None]
    dirs = ("out", "in") if g0.oriented else (None,)
    counts = {(v, lab, d): 0 for v in range(g0.n) for lab in labels for d in dirs}
    for u, v, attrs in g0.edges:
        lab = attrs.label
        if g0.oriented:
            head = attrs.head
            tail = u if head == v else v
            counts[(tail, lab, "out")] += 1
            counts[(head, lab, "in")] += 1
        else:
            counts[(u, lab, None)] += 1
            counts[(v, lab, None)] += 1
    d = min(counts.values())
    return Fraction(d, g0.n)


def _edge_class(g: Graph, u: int, v: int) -> tuple | None:
    """Class of the (u, v) slot: None when not an edge, else (label, dir)
    where dir is +1 for u->v, -1 for v->u, 0 for undirected."""
    for a, b, attrs in g.edges:
        if (a, b) == (min(u, v), max(u, v)):
            if attrs.head is None:
                d = 0
            else:
                d = 1 if attrs.head == v else -1
            return (attrs.label, d)
    return None


def is_vertex_transitive(g0: Graph) -> bool:
    """Backtracking automorphism search; validation-scale graphs only."""
    if g0.n > 10:
        raise ValueError("vertex-transitivity check capped at 10 vertices")
    n = g0.n
    cls = [[None] * n for _ in range(n)]
    for u in range(n):
        for v in range(n):
            if u != v:
                cls[u][v] = _edge_class(g0, u, v)
    degs = [len(g0.adj[v]) for v in range(n)]

    def extend(phi: list[int], used: set[int]) -> bool:
        u = len(phi)
        if u == n:
            return True
        for t in range(n):
            if t in used or degs[t] != degs[u]:
                continue
            if all(cls[u][w] == cls[t][phi[w]] and cls[w][u] == cls[phi[w]][t] for w in range(u)):
                phi.append(t)
                used.add(t)
                if extend(phi, used):
                    return True
                phi.pop()
                used.remove(t)
        return False

    for target in range(1, n):
        if degs[target] != degs[0]:
            return False
        if not extend([target], {target}):
            return False
    return True


@dataclass(frozen=True)
class PropertySpec:
    """The spanning-subgraph property being solved, with its exact lambda.

    variant is "hom" (target graph g0) or "acyclic". The orientation and
    labeling flags say which kind of input graph the property applies to.
    """

    variant: str
    lam: Fraction
    oriented: bool
    labeled: bool
    target: Graph | None = None
    name: str = ""

    def __post_init__(self):
        if self.variant not in ("hom", "acyclic"):
            raise ValueError(f"unknown property variant {self.variant!r}")
        if not (0 < self.lam < 1):
            raise ValueError(f"lambda must lie strictly between 0 and 1, got {self.lam}")
        if self.variant == "acyclic" and self.lam != Fraction(1, 2):
            raise ValueError("acyclic property has lambda = 1/2")

    @staticmethod
    def cut() -> "PropertySpec":
        from .graph import complete_graph

        return PropertySpec.homomorphism(complete_graph(2), name="cut")

    @staticmethod
    def coloring(q: int) -> "PropertySpec":
        from .graph import complete_graph

        if q < 2:
            raise ValueError("coloring needs q >= 2")
        return PropertySpec.homomorphism(complete_graph(q), name=f"color:{q}")

    @staticmethod
    def homomorphism(g0: Graph, name: str = "hom") -> "PropertySpec":
        lam = hom_lambda(g0)
        if not is_vertex_transitive(g0):
            raise ValueError("homomorphism target must be vertex-transitive")
        return PropertySpec(
            variant="hom", lam=lam, oriented=g0.oriented, labeled=g0.labeled,
            target=g0, name=name,
        )

    @staticmethod
    def acyclic() -> "PropertySpec":
        return PropertySpec(
            variant="acyclic", lam=Fraction(1, 2), oriented=True, labeled=False,
            name="acyclic",
        )

    def matches_graph(self, g: Graph) -> bool:
        return g.oriented == self.oriented and g.labeled == self.labeled


def parse_property(text: str, read_file=None) -> PropertySpec:
    """CLI property syntax: cut | color:q | hom:<g0-file> | acyclic."""
    if text == "cut":
        return PropertySpec.cut()
    if text == "acyclic":
        return PropertySpec.acyclic()
    if text.startswith("color:"):
        return PropertySpec.coloring(int(text.split(":", 1)[1]))
    if text.startswith("hom:"):
        from .graph import parse_graph

        path = text.split(":", 1)[1]
        data = read_file(path) if read_file else open(path).read()
        return PropertySpec.homomorphism(parse_graph(data), name=text)
    raise ValueError(f"unknown property {text!r}")


@dataclass(frozen=True)
class Witness:
    """Edge subset plus the certificate realizing it: a vertex-to-target
    map for homomorphism properties, a linear order for acyclicity."""

    edges: frozenset[tuple[int, int]]
    kind: str  # "map" | "order"
    certificate: tuple[int, ...]


def realized_edges(g: Graph, spec: PropertySpec, certificate: tuple[int, ...]) -> frozenset[tuple[int, int]]:
    """Edges of g that the certificate realizes."""
    out = []
    if spec.variant == "acyclic":
        pos = {v: i for i, v in enumerate(certificate)}
        for u, v, attrs in g.edges:
            tail, head = (u, v) if attrs.head == v else (v, u)
            if pos[tail] < pos[head]:
                out.append((u, v))
    else:
        g0 = spec.target
        for u, v, attrs in g.edges:
            cu, cv = certificate[u], certificate[v]
            if attrs.head is None:
                want = (attrs.label, 0)
                ok = _edge_class(g0, cu, cv) == want
            else:
                d = 1 if attrs.head == v else -1
                ok = _edge_class(g0, cu, cv) == (attrs.label, d)
            if ok:
                out.append((u, v))
    return frozenset(out)


def make_witness(g: Graph, spec: PropertySpec, certificate: tuple[int, ...]) -> Witness:
    kind = "order" if spec.variant == "acyclic" else "map"
    return Witness(realized_edges(g, spec, certificate), kind, tuple(certificate))


def _is_forest(g: Graph) -> bool:
    return g.m == g.n - len(components(g))


def _forest_hom_certificate(g: Graph, g0: Graph) -> tuple[int, ...] | None:
    """Greedy homomorphism for forests; relies on every class having at
    least one edge at every g0 vertex (vertex-transitive, lambda > 0)."""
    img = [-1] * g.n
    cls_of_pair: dict[tuple[int, int], tuple] = {}
    for u, v, attrs in g.edges:
        d = 0 if attrs.head is None else (1 if attrs.head == v else -1)
        cls_of_pair[(u, v)] = (attrs.label, d)
        cls_of_pair[(v, u)] = (attrs.label, -d)
    # neighbors of each g0 vertex by class
    succ: dict[tuple[int, tuple], list[int]] = {}
    for a in range(g0.n):
        for b in g0.adj[a]:
            c = _edge_class(g0, a, b)
            succ.setdefault((a, c), []).append(b)
    for comp in components(g):
        root = comp[0]
        img[root] = 0
        stack = [root]
        while stack:
            v = stack.pop()
            for w in g.adj[v]:
                if img[w] != -1:
                    continue
                c = cls_of_pair[(v, w)]
                choices = succ.get((img[v], c))
                if not choices:
                    return None
                img[w] = choices[0]
                stack.append(w)
    return tuple(img)


def _topological_order(g: Graph) -> tuple[int, ...] | None:
    indeg = [0] * g.n
    out: dict[int, list[int]] = {v: [] for v in range(g.n)}
    for tail, head in g.arcs:
        out[tail].append(head)
        indeg[head] += 1
    ready = sorted(v for v in range(g.n) if indeg[v] == 0)
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for w in out[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
        ready.sort()
    return tuple(order) if len(order) == g.n else None


def is_member(g: Graph, spec: PropertySpec, max_backtrack_n: int = 16):
    """Does g itself belong to the property? Returns (bool, certificate).

    Homomorphism membership is a backtracking search and is capped; the
    acyclic variant is a topological sort and has no cap. Forests are
    accepted for every property without search.
    """
    if spec.variant == "acyclic":
        if not g.oriented:
            raise ValueError("acyclic membership needs an oriented graph")
        order = _topological_order(g)
        return (order is not None), order
    g0 = spec.target
    if _is_forest(g):
        cert = _forest_hom_certificate(g, g0)
        if cert is not None:
            return True, cert
    if g.n > max_backtrack_n:
        raise ValueError(f"homomorphism membership capped at {max_backtrack_n} vertices")
    cls0 = [[_edge_class(g0, a, b) if a != b else None for b in range(g0.n)] for a in range(g0.n)]
    cls_g: dict[tuple[int, int], tuple] = {}
    for u, v, attrs in g.edges:
        d = 0 if attrs.head is None else (1 if attrs.head == v else -1)
        cls_g[(u, v)] = (attrs.label, d)
        cls_g[(v, u)] = (attrs.label, -d)

    img = [-1] * g.n

    def extend(v: int) -> bool:
        if v == g.n:
            return True
        for t in range(g0.n):
            ok = True
            for w in g.adj[v]:
                if img[w] != -1 and cls0[t][img[w]] != cls_g[(v, w)]:
                    ok = False
                    break
            if ok:
                img[v] = t
                if extend(v + 1):
                    return True
                img[v] = -1
        return False

    if extend(0):
        return True, tuple(img)
    return False, None


@dataclass
class Decision:
    """Outcome of a decision procedure plus diagnostics."""

    yes: bool
    witness: Witness | None = None
    value: int | None = None
    threshold: Fraction | None = None
    k_star: Fraction | None = None
    s: tuple[int, ...] = ()
    trace: tuple = ()
    solver: str = ""
    timings: dict = field(default_factory=dict)

    @property
    def answer(self) -> str:
        return "YES" if self.yes else "NO"

    def rule_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for app in self.trace:
            counts[app.rule] = counts.get(app.rule, 0) + 1
        return counts
