"""Exhaustive application of the four reduction rules to (G, S, k).

The engine never renumbers vertices: the evolving graph is tracked as an
alive-vertex bitmask over the original graph, so every trace entry and the
final deletion set are reported in original ids. All four rules look only
at the underlying simple graph; orientations and labels ride along.

Rule summary (lambda' = (1-lambda)/2):
  1: X a component of (G-S)-v with X+v a clique       -> delete X, k unchanged
  2: components of (G-S)-v have >=1 clique, <=1 other -> delete the d clique
     components, move v into S, k -= d*lambda'
  3: induced two-edge path a-b-c, remainder connected -> move a,b,c into S,
     k -= lambda'
  4: nonadjacent x,y; C with C+x, C+y cliques; the two leftover
     neighborhoods equal {z}, z a cut vertex           -> delete C, move x,y
     into S, k -= lambda'
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .graph import (
    Graph,
    bits_of,
    is_connected,
    mask_components,
    mask_connected,
    mask_is_clique,
    mask_of,
)
from .props import PropertySpec


class EngineConsistencyError(RuntimeError):
    """The engine reached a state the completeness lemmas rule out: a bug."""


class StaleApplicationError(ValueError):
    """An application was replayed against a state it was not found on."""


@dataclass(frozen=True)
class RuleApplication:
    rule: int
    params: tuple  # per rule: (v, X) | (v, cliques) | (a, b, c) | (x, y, C, z)
    k_before: Fraction
    k_after: Fraction

    @property
    def k_delta(self) -> Fraction:
        return self.k_before - self.k_after

    def trace_line(self) -> str:
        if self.rule == 1:
            v, xs = self.params
            p = f"v={v} X={','.join(map(str, sorted(xs)))}"
        elif self.rule == 2:
            v, cliques = self.params
            p = f"v={v} del=" + "|".join(",".join(map(str, sorted(c))) for c in cliques)
        elif self.rule == 3:
            p = "abc=" + ",".join(map(str, self.params))
        else:
            x, y, c, z = self.params
            p = f"xy={x},{y} C={','.join(map(str, sorted(c)))} z={z}"
        return f"rule={self.rule} params={p} k_before={self.k_before} k_after={self.k_after}"


class ReductionState:
    """Single-owner mutable tuple (G~, S~, k~) plus the application trace."""

    def __init__(self, g: Graph, k, lam):
        lam = Fraction(lam)
        if not (0 < lam < 1):
            raise ValueError("lambda must lie strictly between 0 and 1")
        self.graph = g
        self.lam = lam
        self.lam_prime = (1 - lam) / 2
        self.alive = (1 << g.n) - 1          # vertices not yet deleted
        self.s_mask = 0                       # S~, always a subset of alive
        self.k = Fraction(k)
        self.trace: list[RuleApplication] = []

    @property
    def remainder(self) -> int:
        """Bitmask of V(G~) minus S~."""
        return self.alive & ~self.s_mask

    @property
    def s_set(self) -> tuple[int, ...]:
        return tuple(bits_of(self.s_mask))

    @property
    def g_current(self) -> Graph:
        from .graph import induced

        return induced(self.graph, bits_of(self.alive))

    def remainder_graph(self) -> Graph:
        from .graph import induced

        return induced(self.graph, bits_of(self.remainder))


# ---------------------------------------------------------------------------
# Rule matchers. The public find_rule<i> enforce the 1 -> 2 -> 3 -> 4
# precedence (each returns absent whenever an earlier rule applies); the
# _raw variants match a single rule's own conditions.
# ---------------------------------------------------------------------------

def _raw_rule1(state: ReductionState):
    masks = state.graph.neighbor_masks
    r = state.remainder
    for v in bits_of(r):
        vbit = 1 << v
        for comp in mask_components(masks, r & ~vbit):
            if mask_is_clique(masks, comp | vbit):
                return v, frozenset(bits_of(comp))
    return None


def _raw_rule2(state: ReductionState):
    masks = state.graph.neighbor_masks
    r = state.remainder
    for v in bits_of(r):
        vbit = 1 << v
        comps = mask_components(masks, r & ~vbit)
        cliques = [c for c in comps if mask_is_clique(masks, c)]
        if cliques and len(comps) - len(cliques) <= 1:
            return v, tuple(frozenset(bits_of(c)) for c in cliques)
    return None


def _raw_rule3(state: ReductionState):
    masks = state.graph.neighbor_masks
    r = state.remainder
    verts = bits_of(r)
    for a in verts:
        for b in verts:
            if b == a or not masks[a] >> b & 1:
                continue
            for c in verts:
                if c in (a, b) or not masks[b] >> c & 1 or masks[a] >> c & 1:
                    continue
                rest = r & ~mask_of((a, b, c))
                if mask_connected(masks, rest):
                    return a, b, c
    return None


def _raw_rule4(state: ReductionState):
    """Assumes rules 1-3 are absent; returns the restricted form (x, y, C, z)
    in which x and y have the single common leftover neighbor z, a cut vertex."""
    masks = state.graph.neighbor_masks
    r = state.remainder
    verts = bits_of(r)
    raw_applicable = False
    for i, x in enumerate(verts):
        for y in verts[i + 1:]:
            if masks[x] >> y & 1:
                continue
            rest = r & ~mask_of((x, y))
            comps = mask_components(masks, rest)
            good = [
                c for c in comps
                if mask_is_clique(masks, c | 1 << x) and mask_is_clique(masks, c | 1 << y)
            ]
            if not good or len(comps) - len(good) > 1:
                continue
            raw_applicable = True
            if len(good) != 1 or good[0].bit_count() < 2:
                raise EngineConsistencyError(
                    "rule 4 with rules 1-3 absent must delete exactly one "
                    f"component of size >= 2, found {len(good)}"
                )
            c_mask = good[0]
            nx = masks[x] & r & ~c_mask
            ny = masks[y] & r & ~c_mask
            if nx != ny or nx.bit_count() != 1:
                continue
            z = nx.bit_length() - 1
            if mask_connected(masks, r & ~nx):
                continue  # z must be a cut vertex of G~ minus S~
            return x, y, frozenset(bits_of(c_mask)), z
    if raw_applicable:
        raise EngineConsistencyError(
            "rule 4 is applicable but no application has the restricted form"
        )
    return None


def find_rule1(state: ReductionState):
    return _raw_rule1(state)


def find_rule2(state: ReductionState):
    if _raw_rule1(state) is not None:
        return None
    return _raw_rule2(state)


def find_rule3(state: ReductionState):
    if _raw_rule1(state) is not None or _raw_rule2(state) is not None:
        return None
    return _raw_rule3(state)


def find_rule4(state: ReductionState):
    for earlier in (_raw_rule1, _raw_rule2, _raw_rule3):
        if earlier(state) is not None:
            return None
    return _raw_rule4(state)


_FINDERS = {1: _raw_rule1, 2: _raw_rule2, 3: _raw_rule3, 4: _raw_rule4}


def _validate_application(state: ReductionState, rule: int, params: tuple) -> None:
    masks = state.graph.neighbor_masks
    r = state.remainder
    ok = False
    if rule == 1:
        v, xs = params
        x_mask = mask_of(xs)
        ok = (
            r >> v & 1
            and x_mask & r == x_mask
            and x_mask in mask_components(masks, r & ~(1 << v))
            and mask_is_clique(masks, x_mask | 1 << v)
        )
    elif rule == 2:
        v, cliques = params
        comps = mask_components(masks, r & ~(1 << v))
        clique_masks = [mask_of(c) for c in cliques]
        ok = (
            r >> v & 1
            and all(c in comps and mask_is_clique(masks, c) for c in clique_masks)
            and len(clique_masks) == sum(1 for c in comps if mask_is_clique(masks, c))
            and len(comps) - len(clique_masks) <= 1
            and len(clique_masks) >= 1
            and _raw_rule1(state) is None
        )
    elif rule == 3:
        a, b, c = params
        ok = (
            all(r >> v & 1 for v in (a, b, c))
            and masks[a] >> b & 1
            and masks[b] >> c & 1
            and not masks[a] >> c & 1
            and mask_connected(masks, r & ~mask_of((a, b, c)))
        )
    elif rule == 4:
        x, y, cset, z = params
        c_mask = mask_of(cset)
        comps = mask_components(masks, r & ~mask_of((x, y)))
        ok = (
            r >> x & 1
            and r >> y & 1
            and not masks[x] >> y & 1
            and c_mask in comps
            and mask_is_clique(masks, c_mask | 1 << x)
            and mask_is_clique(masks, c_mask | 1 << y)
            and masks[x] & r & ~c_mask == 1 << z
            and masks[y] & r & ~c_mask == 1 << z
            and not mask_connected(masks, r & ~(1 << z))
            and _raw_rule3(state) is None
        )
    if not ok:
        raise StaleApplicationError(f"rule {rule} application is not valid on this state")


def apply(state: ReductionState, rule: int, params: tuple) -> ReductionState:
    """Apply one rule application in place; re-validates it first."""
    _validate_application(state, rule, params)
    k_before = state.k
    if rule == 1:
        v, xs = params
        state.alive &= ~mask_of(xs)
    elif rule == 2:
        v, cliques = params
        for c in cliques:
            state.alive &= ~mask_of(c)
        state.s_mask |= 1 << v
        state.k -= len(cliques) * state.lam_prime
    elif rule == 3:
        state.s_mask |= mask_of(params)
        state.k -= state.lam_prime
    else:
        x, y, cset, z = params
        state.alive &= ~mask_of(cset)
        state.s_mask |= mask_of((x, y))
        state.k -= state.lam_prime
    state.trace.append(RuleApplication(rule, params, k_before, state.k))
    return state


# ---------------------------------------------------------------------------
# The reduction loop
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EarlyYes:
    k_star: Fraction
    s: tuple[int, ...]
    trace: tuple[RuleApplication, ...]


@dataclass(frozen=True)
class Decomposition:
    s: tuple[int, ...]
    k_star: Fraction
    trace: tuple[RuleApplication, ...]


def reduce(g: Graph, k, lam) -> EarlyYes | Decomposition:
    """Apply rules 1-4 exhaustively, stopping early once k~ drops to 0.

    Returns EarlyYes when the parameter was consumed, else the deletion
    set S (original ids) with G minus S a forest of cliques and
    |S| <= 3(k - k_star)/lambda'.
    """
    if not is_connected(g):
        raise ValueError("reduction needs a connected graph")
    if Fraction(k) < 1:
        raise ValueError("k must be at least 1")
    state = ReductionState(g, k, lam)
    while state.remainder.bit_count() >= 2 and state.k > 0:
        found = None
        for rule in (1, 2, 3, 4):
            hit = _FINDERS[rule](state)
            if hit is not None:
                found = (rule, hit)
                break
        if found is None:
            raise EngineConsistencyError(
                "no rule applies although at least two vertices remain outside S"
            )
        apply(state, *found)
    if state.k <= 0:
        return EarlyYes(state.k, state.s_set, tuple(state.trace))
    return Decomposition(state.s_set, state.k, tuple(state.trace))


@dataclass(frozen=True)
class StructuredHandoff:
    s: tuple[int, ...]
    k: int
    k_star: Fraction
    trace: tuple[RuleApplication, ...]


@dataclass(frozen=True)
class Yes:
    k_star: Fraction
    trace: tuple[RuleApplication, ...]


def decide_or_decompose(g: Graph, k: int, spec: PropertySpec) -> Yes | StructuredHandoff:
    """Either settle the instance as YES via the reduction alone, or hand
    the original instance plus the deletion set to a structured solver."""
    outcome = reduce(g, k, spec.lam)
    if isinstance(outcome, EarlyYes):
        return Yes(outcome.k_star, outcome.trace)
    return StructuredHandoff(outcome.s, int(k), outcome.k_star, outcome.trace)
