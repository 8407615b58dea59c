"""Graph representation, extended-DIMACS parsing, and structural queries.

Vertices are dense integers 0..n-1. Edges are stored once per unordered
pair; an edge may carry an orientation (its head vertex) and/or a small
integer label, depending on the declared graph kind. Connectivity, block,
and clique predicates always look at the underlying simple graph and
ignore orientations and labels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


class GraphParseError(ValueError):
    """Raised on malformed graph input; message names the offending line."""


@dataclass(frozen=True)
class EdgeAttrs:
    """Optional per-edge data: ``head`` is the arc head for oriented edges."""

    head: int | None = None
    label: int | None = None


PLAIN_ATTRS = EdgeAttrs()

Edge = tuple[int, int, EdgeAttrs]


class Graph:
    """Immutable simple graph, optionally oriented and/or labeled.

    No self-loops; at most one edge (or one arc) per unordered vertex pair.
    Every edge carries an orientation iff the graph is oriented, and a
    label iff the graph is labeled.
    """

    __slots__ = ("n", "edges", "oriented", "labeled", "adj", "origin", "_masks", "_arcset")

    def __init__(
        self,
        n: int,
        edges: Iterable[tuple] = (),
        *,
        oriented: bool = False,
        labeled: bool = False,
        origin: tuple[int, ...] | None = None,
        _validate: bool = True,
    ):
        if n < 1:
            raise ValueError("graph needs at least one vertex")
        norm: list[Edge] = []
        for e in edges:
            if len(e) == 2:
                u, v = e
                attrs = PLAIN_ATTRS
            else:
                u, v, attrs = e
            if u > v:
                u, v = v, u
            norm.append((u, v, attrs))
        norm.sort(key=lambda e: (e[0], e[1]))
        self.n = n
        self.edges = tuple(norm)
        self.oriented = oriented
        self.labeled = labeled
        self.origin = origin
        self._masks = None
        self._arcset = None
        adj: list[set[int]] = [set() for _ in range(n)]
        if _validate:
            seen: set[tuple[int, int]] = set()
            for u, v, attrs in self.edges:
                if not (0 <= u < n and 0 <= v < n):
                    raise ValueError(f"vertex id out of range: ({u}, {v})")
                if u == v:
                    raise ValueError(f"self-loop at vertex {u}")
                if (u, v) in seen:
                    raise ValueError(f"duplicate edge ({u}, {v})")
                seen.add((u, v))
                if oriented and attrs.head not in (u, v):
                    raise ValueError(f"oriented graph needs a head on edge ({u}, {v})")
                if not oriented and attrs.head is not None:
                    raise ValueError(f"unexpected orientation on edge ({u}, {v})")
                if labeled and attrs.label is None:
                    raise ValueError(f"labeled graph needs a label on edge ({u}, {v})")
                if not labeled and attrs.label is not None:
                    raise ValueError(f"unexpected label on edge ({u}, {v})")
        for u, v, _ in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        self.adj = tuple(frozenset(s) for s in adj)

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    @property
    def neighbor_masks(self) -> tuple[int, ...]:
        """Per-vertex adjacency as bitmasks; computed once on demand."""
        if self._masks is None:
            masks = [0] * self.n
            for u, v, _ in self.edges:
                masks[u] |= 1 << v
                masks[v] |= 1 << u
            self._masks = tuple(masks)
        return self._masks

    @property
    def arcs(self) -> tuple[tuple[int, int], ...]:
        """(tail, head) pairs; only meaningful for oriented graphs."""
        if self._arcset is None:
            out = []
            for u, v, attrs in self.edges:
                if attrs.head is None:
                    continue
                head = attrs.head
                tail = u if head == v else v
                out.append((tail, head))
            self._arcset = tuple(out)
        return self._arcset

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and self.edges == other.edges
            and self.oriented == other.oriented
            and self.labeled == other.labeled
        )

    def __hash__(self) -> int:
        return hash((self.n, self.edges, self.oriented, self.labeled))

    def __repr__(self) -> str:
        kind = "oriented " if self.oriented else ""
        kind += "labeled " if self.labeled else ""
        return f"Graph({kind}n={self.n}, m={self.m})"


class Digraph:
    """Directed graph that, unlike oriented Graphs, may contain opposite
    arc pairs and be disconnected. Used only on the max-acyclic-subdigraph
    route."""

    __slots__ = ("n", "arcs")

    def __init__(self, n: int, arcs: Iterable[tuple[int, int]]):
        if n < 1:
            raise ValueError("digraph needs at least one vertex")
        self.n = n
        seen = set()
        out = []
        for t, h in arcs:
            if not (0 <= t < n and 0 <= h < n):
                raise ValueError(f"vertex id out of range: ({t}, {h})")
            if t == h:
                raise ValueError(f"self-loop at vertex {t}")
            if (t, h) in seen:
                raise ValueError(f"duplicate arc ({t}, {h})")
            seen.add((t, h))
            out.append((t, h))
        self.arcs = tuple(sorted(out))

    @property
    def m(self) -> int:
        return len(self.arcs)

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, m={self.m})"


# ---------------------------------------------------------------------------
# Parsing and writing (extended DIMACS)
# ---------------------------------------------------------------------------

def _parse_lines(text: str | bytes):
    if isinstance(text, bytes):
        text = text.decode("ascii")
    header = None
    entries = []  # (lineno, kind, u, v, label)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        tok = line.split()
        if tok[0] == "p":
            if header is not None:
                raise GraphParseError(f"line {lineno}: second header")
            if len(tok) < 4 or tok[1] != "apt":
                raise GraphParseError(f"line {lineno}: header must be 'p apt <n> <m> [directed] [labeled]'")
            try:
                n, m = int(tok[2]), int(tok[3])
            except ValueError:
                raise GraphParseError(f"line {lineno}: non-integer counts in header") from None
            flags = tok[4:]
            directed = "directed" in flags
            labeled = "labeled" in flags
            for f in flags:
                if f not in ("directed", "labeled"):
                    raise GraphParseError(f"line {lineno}: unknown header flag {f!r}")
            header = (n, m, directed, labeled)
        elif tok[0] in ("e", "a"):
            if header is None:
                raise GraphParseError(f"line {lineno}: edge before header")
            if len(tok) not in (3, 4):
                raise GraphParseError(f"line {lineno}: expected '{tok[0]} u v [label]'")
            try:
                u, v = int(tok[1]), int(tok[2])
                label = int(tok[3]) if len(tok) == 4 else None
            except ValueError:
                raise GraphParseError(f"line {lineno}: non-integer field") from None
            entries.append((lineno, tok[0], u, v, label))
        else:
            raise GraphParseError(f"line {lineno}: unknown line type {tok[0]!r}")
    if header is None:
        raise GraphParseError("line 1: missing header")
    return header, entries


def parse_graph(text: str | bytes, kind: str | None = None) -> Graph:
    """Parse extended-DIMACS text into a Graph.

    ``kind`` is one of plain/oriented/labeled (or None to accept whatever
    the header declares). File ids are 1-based and compacted to 0..n-1.
    """
    (n, m, directed, labeled), entries = _parse_lines(text)
    if kind is not None:
        want_directed = kind == "oriented"
        want_labeled = kind == "labeled"
        if kind not in ("plain", "oriented", "labeled"):
            raise GraphParseError(f"unknown kind {kind!r}")
        if directed != want_directed or (labeled != want_labeled):
            raise GraphParseError(f"line 1: header kind does not match requested {kind!r}")
    edges = []
    seen_pairs = set()
    for lineno, typ, u, v, label in entries:
        if typ == "a" and not directed:
            raise GraphParseError(f"line {lineno}: arc line in undirected graph")
        if typ == "e" and directed:
            raise GraphParseError(f"line {lineno}: undirected edge in directed graph")
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphParseError(f"line {lineno}: vertex id out of range")
        if u == v:
            raise GraphParseError(f"line {lineno}: self-loop")
        if labeled and label is None:
            raise GraphParseError(f"line {lineno}: missing label")
        if not labeled and label is not None:
            raise GraphParseError(f"line {lineno}: unexpected label")
        u0, v0 = u - 1, v - 1
        pair = (min(u0, v0), max(u0, v0))
        if pair in seen_pairs:
            raise GraphParseError(f"line {lineno}: duplicate edge")
        seen_pairs.add(pair)
        head = v0 if typ == "a" else None
        edges.append((pair[0], pair[1], EdgeAttrs(head=head, label=label)))
    if len(edges) != m:
        raise GraphParseError(f"line 1: header announces {m} edges, found {len(edges)}")
    return Graph(n, edges, oriented=directed, labeled=labeled)


def parse_digraph(text: str | bytes) -> Digraph:
    """Parse a directed graph that may contain opposite arc pairs."""
    (n, m, directed, labeled), entries = _parse_lines(text)
    if not directed or labeled:
        raise GraphParseError("line 1: digraph input must be 'directed' and unlabeled")
    arcs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, typ, u, v, label in entries:
        if typ != "a":
            raise GraphParseError(f"line {lineno}: digraph input takes only arc lines")
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphParseError(f"line {lineno}: vertex id out of range")
        if u == v:
            raise GraphParseError(f"line {lineno}: self-loop")
        if label is not None:
            raise GraphParseError(f"line {lineno}: unexpected label")
        if (u - 1, v - 1) in seen:
            raise GraphParseError(f"line {lineno}: duplicate arc")
        seen.add((u - 1, v - 1))
        arcs.append((u - 1, v - 1))
    if len(arcs) != m:
        raise GraphParseError(f"line 1: header announces {m} arcs, found {len(arcs)}")
    return Digraph(n, arcs)


def write_graph(g: Graph) -> str:
    """Serialize a Graph back to the extended-DIMACS format, bit-exactly
    reproducible: sorted edge lines, 1-based ids."""
    flags = ""
    if g.oriented:
        flags += " directed"
    if g.labeled:
        flags += " labeled"
    lines = [f"p apt {g.n} {g.m}{flags}"]
    for u, v, attrs in g.edges:
        if g.oriented:
            tail, head = (u, v) if attrs.head == v else (v, u)
            line = f"a {tail + 1} {head + 1}"
        else:
            line = f"e {u + 1} {v + 1}"
        if g.labeled:
            line += f" {attrs.label}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def write_digraph(d: Digraph) -> str:
    lines = [f"p apt {d.n} {d.m} directed"]
    lines += [f"a {t + 1} {h + 1}" for t, h in d.arcs]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Small constructors (used by tests and demos)
# ---------------------------------------------------------------------------

def complete_graph(n: int) -> Graph:
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def oriented_cycle(n: int) -> Graph:
    edges = [(i, (i + 1) % n, EdgeAttrs(head=(i + 1) % n)) for i in range(n)]
    return Graph(n, edges, oriented=True)


def transitive_tournament(n: int) -> Graph:
    edges = [(i, j, EdgeAttrs(head=j)) for i in range(n) for j in range(i + 1, n)]
    return Graph(n, edges, oriented=True)


# ---------------------------------------------------------------------------
# Vertex-set operations
# ---------------------------------------------------------------------------

def _check_vertices(g: Graph, xs: Iterable[int]) -> set[int]:
    s = set(xs)
    for v in s:
        if not (0 <= v < g.n):
            raise ValueError(f"vertex id out of range: {v}")
    return s


def induced(g: Graph, keep: Iterable[int]) -> Graph:
    """Induced subgraph on ``keep``; surviving edges keep their attrs.

    Vertices are renumbered densely; the returned graph's ``origin`` maps
    each new id to its old id.
    """
    keep_set = _check_vertices(g, keep)
    old_ids = sorted(keep_set)
    if not old_ids:
        raise ValueError("induced subgraph needs at least one vertex")
    new_of = {old: new for new, old in enumerate(old_ids)}
    edges = []
    for u, v, attrs in g.edges:
        if u in keep_set and v in keep_set:
            head = None if attrs.head is None else new_of[attrs.head]
            edges.append((new_of[u], new_of[v], EdgeAttrs(head=head, label=attrs.label)))
    return Graph(
        len(old_ids), edges, oriented=g.oriented, labeled=g.labeled,
        origin=tuple(old_ids), _validate=False,
    )


def delete_vertices(g: Graph, xs: Iterable[int]) -> Graph:
    xs_set = _check_vertices(g, xs)
    return induced(g, set(range(g.n)) - xs_set)


def boundary(g: Graph, s: Iterable[int]) -> tuple[Edge, ...]:
    """Edges with exactly one endpoint in ``s``."""
    s_set = _check_vertices(g, s)
    return tuple(e for e in g.edges if (e[0] in s_set) != (e[1] in s_set))


def components(g: Graph) -> list[tuple[int, ...]]:
    """Connected components of the underlying simple graph, each sorted,
    ordered by smallest member."""
    seen = [False] * g.n
    out = []
    for start in range(g.n):
        if seen[start]:
            continue
        comp = [start]
        seen[start] = True
        stack = [start]
        while stack:
            v = stack.pop()
            for w in g.adj[v]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    stack.append(w)
        out.append(tuple(sorted(comp)))
    return out


def is_connected(g: Graph) -> bool:
    return len(components(g)) == 1


# ---------------------------------------------------------------------------
# Blocks (maximal 2-connected subgraphs, bridges, isolated vertices)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockDecomposition:
    blocks: tuple[frozenset[int], ...]
    cut_vertices: frozenset[int]
    block_forest: tuple[tuple[int, int], ...]  # (block index, cut vertex) incidences

    def blocks_at(self, v: int) -> list[int]:
        return [bi for bi, c in self.block_forest if c == v]

    def leaf_blocks(self) -> list[int]:
        """Indices of blocks containing at most one cut vertex."""
        counts = [0] * len(self.blocks)
        for bi, _ in self.block_forest:
            counts[bi] += 1
        return [i for i, c in enumerate(counts) if c <= 1]


def blocks(g: Graph) -> BlockDecomposition:
    """Block decomposition via iterative lowpoint DFS (safe on deep paths)."""
    n = g.n
    adj = [sorted(g.adj[v]) for v in range(n)]
    disc = [-1] * n
    low = [0] * n
    parent = [-1] * n
    raw_blocks: list[frozenset[int]] = []
    cut: set[int] = set()
    clock = 0
    edge_stack: list[tuple[int, int]] = []
    for root in range(n):
        if disc[root] != -1:
            continue
        if not adj[root]:
            raw_blocks.append(frozenset((root,)))
            disc[root] = clock
            clock += 1
            continue
        root_children = 0
        disc[root] = low[root] = clock
        clock += 1
        stack: list[tuple[int, Iterator[int]]] = [(root, iter(adj[root]))]
        while stack:
            v, it = stack[-1]
            advanced = False
            for w in it:
                if disc[w] == -1:
                    parent[w] = v
                    disc[w] = low[w] = clock
                    clock += 1
                    edge_stack.append((v, w))
                    if v == root:
                        root_children += 1
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
                elif w != parent[v] and disc[w] < disc[v]:
                    edge_stack.append((v, w))
                    if disc[w] < low[v]:
                        low[v] = disc[w]
            if advanced:
                continue
            stack.pop()
            if stack:
                u = stack[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
                if low[v] >= disc[u]:
                    comp: set[int] = set()
                    while True:
                        a, b = edge_stack.pop()
                        comp.add(a)
                        comp.add(b)
                        if (a, b) == (u, v):
                            break
                    raw_blocks.append(frozenset(comp))
                    if u != root or root_children > 1:
                        cut.add(u)
        assert not edge_stack, "edge stack must drain per component"
    ordered = sorted(raw_blocks, key=lambda b: tuple(sorted(b)))
    forest = []
    for i, b in enumerate(ordered):
        for c in sorted(b):
            if c in cut:
                forest.append((i, c))
    return BlockDecomposition(tuple(ordered), frozenset(cut), tuple(forest))


def _is_clique_set(g: Graph, vs: frozenset[int] | set[int]) -> bool:
    masks = g.neighbor_masks
    m = 0
    for v in vs:
        m |= 1 << v
    for v in vs:
        if masks[v] & m != m & ~(1 << v):
            return False
    return True


def is_forest_of_cliques(g: Graph) -> bool:
    """True iff every block's vertex set is a clique (attrs ignored)."""
    return all(_is_clique_set(g, b) for b in blocks(g).blocks)


def leaf_cliques(g: Graph) -> list[tuple[frozenset[int], int | None]]:
    """Leaf blocks of a forest of cliques, with their cut vertex when the
    block does not form a whole component on its own."""
    decomp = blocks(g)
    for b in decomp.blocks:
        if not _is_clique_set(g, b):
            raise ValueError("graph is not a forest of cliques")
    out = []
    for i in decomp.leaf_blocks():
        b = decomp.blocks[i]
        cuts_here = [c for bi, c in decomp.block_forest if bi == i]
        out.append((b, cuts_here[0] if cuts_here else None))
    return out


# ---------------------------------------------------------------------------
# Bitmask helpers shared by the reduction engine and solvers
# ---------------------------------------------------------------------------

def mask_of(vs: Iterable[int]) -> int:
    m = 0
    for v in vs:
        m |= 1 << v
    return m


def bits_of(mask: int) -> list[int]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return out


def mask_components(masks: tuple[int, ...] | list[int], region: int) -> list[int]:
    """Connected components (as bitmasks) of the subgraph induced on the
    ``region`` bitmask, ordered by lowest vertex."""
    out = []
    todo = region
    while todo:
        seed = todo & -todo
        comp = seed
        frontier = seed
        while frontier:
            v = frontier & -frontier
            frontier &= frontier - 1
            nxt = masks[v.bit_length() - 1] & region & ~comp
            comp |= nxt
            frontier |= nxt
        out.append(comp)
        todo &= ~comp
    return out


def mask_connected(masks, region: int) -> bool:
    if region == 0:
        return True
    seed = region & -region
    comp = seed
    frontier = seed
    while frontier:
        v = frontier & -frontier
        frontier &= frontier - 1
        nxt = masks[v.bit_length() - 1] & region & ~comp
        comp |= nxt
        frontier |= nxt
    return comp == region


def mask_is_clique(masks, m: int) -> bool:
    rest = m
    while rest:
        v = rest & -rest
        rest &= rest - 1
        i = v.bit_length() - 1
        if masks[i] & m != m & ~v:
            return False
    return True
