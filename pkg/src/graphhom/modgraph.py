"""Stable modular graphs and their canonical forms.

A modular graph is a connected multigraph (loops and parallel edges allowed)
given by half-edge data: every half-edge is adjacent to one vertex, and an
involution pairs half-edges into edges; fixed points are legs, labeled 1..n.
Vertices carry a genus label and must satisfy 2*genus(v) + valence(v) >= 3.
The total genus is the first Betti number plus the sum of vertex genera.

Orientation ("twist") data comes in two flavors, both modulo even changes:
an ordering of the edge set, or an ordering of the vertex set together with
a direction on every edge.  Canonical forms carry the sign relating the
input presentation to the canonical one.
"""

from __future__ import annotations

import itertools
from enum import Enum
from functools import lru_cache
from typing import NamedTuple


class TwistKind(Enum):
    """Sign-carrying datum attached to a graph, modulo even changes."""

    EDGE_ORDER = "edge-order"
    VERTEX_EDGE_DIR = "vertex-edge-dir"


def perm_parity(seq) -> int:
    """Sign of the permutation taking sorted(seq) to seq.  Entries distinct."""
    seq = list(seq)
    order = {v: i for i, v in enumerate(sorted(seq))}
    seen = [False] * len(seq)
    sign = 1
    for i in range(len(seq)):
        if seen[i]:
            continue
        j, clen = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[seq[j]]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign


class ModularGraph(NamedTuple):
    genus: tuple    # genus per vertex
    adj: tuple      # adj[h] = vertex of half-edge h
    inv: tuple      # involution on half-edges; inv[h] == h for legs
    legs: tuple     # legs[i] = half-edge carrying leg label i+1

    @property
    def num_vertices(self):
        return len(self.genus)

    @property
    def num_legs(self):
        return len(self.legs)

    def edge_pairs(self):
        """Edges as (h1, h2) with h1 < h2, sorted by h1.  Position = edge index."""
        return tuple((h, self.inv[h]) for h in range(len(self.adj))
                     if self.inv[h] > h)

    @property
    def num_edges(self):
        return sum(1 for h in range(len(self.adj)) if self.inv[h] > h)

    def vertex_flags(self, v):
        """Half-edges at v in increasing id order; this order fixes decoration slots."""
        return tuple(h for h in range(len(self.adj)) if self.adj[h] == v)

    def valence(self, v):
        return sum(1 for h in range(len(self.adj)) if self.adj[h] == v)

    def loops_at(self, v):
        return sum(1 for h1, h2 in self.edge_pairs()
                   if self.adj[h1] == v and self.adj[h2] == v)

    def beta1(self):
        return self.num_edges - self.num_vertices + 1

    def total_genus(self):
        return self.beta1() + sum(self.genus)

    def is_stable(self):
        return all(2 * self.genus[v] + self.valence(v) >= 3
                   for v in range(self.num_vertices))

    def is_connected(self):
        if self.num_vertices == 0:
            return False
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for h in range(len(self.adj)):
                if self.adj[h] != v or self.inv[h] == h:
                    continue
                w = self.adj[self.inv[h]]
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.num_vertices

    def validate(self):
        if self.num_vertices == 0:
            raise ValueError("graph has no vertices")
        H = len(self.adj)
        if len(self.inv) != H:
            raise ValueError("involution size mismatch")
        for h in range(H):
            if self.inv[self.inv[h]] != h:
                raise ValueError("not an involution")
            if not 0 <= self.adj[h] < self.num_vertices:
                raise ValueError("adjacency out of range")
        fixed = {h for h in range(H) if self.inv[h] == h}
        if set(self.legs) != fixed or len(self.legs) != len(fixed):
            raise ValueError("leg labels are not a bijection onto involution fixed points")
        if any(g < 0 for g in self.genus):
            raise ValueError("negative genus label")
        if not self.is_connected():
            raise ValueError("graph not connected")
        if not self.is_stable():
            raise ValueError("unstable vertex")
        return self


def make_graph(genus, edges, leg_vertices):
    """Build a ModularGraph from vertex genera, a list of vertex pairs
    (one per edge, loops as (v, v)) and the vertex of each leg label.

    Half-edges are numbered edge ends first (edge k gets 2k, 2k+1), then legs.
    """
    E = len(edges)
    n = len(leg_vertices)
    adj = []
    inv = []
    for k, (u, v) in enumerate(edges):
        adj.extend([u, v])
        inv.extend([2 * k + 1, 2 * k])
    for i, v in enumerate(leg_vertices):
        adj.append(v)
        inv.append(2 * E + i)
    legs = tuple(range(2 * E, 2 * E + n))
    return ModularGraph(tuple(genus), tuple(adj), tuple(inv), legs)


# ---------------------------------------------------------------------------
# canonical forms

class CanonicalForm(NamedTuple):
    encoding: bytes
    graph: ModularGraph   # canonical representative
    relabel: tuple        # input half-edge -> canonical half-edge
    leg_perm: tuple       # leg_perm[k] = input label at canonical label k+1


def _edge_mult(graph):
    """Multiset of edges as {(u,v) sorted: multiplicity}."""
    mult = {}
    for h1, h2 in graph.edge_pairs():
        key = tuple(sorted((graph.adj[h1], graph.adj[h2])))
        mult[key] = mult.get(key, 0) + 1
    return mult


def _initial_colors(graph, leg_agnostic):
    mult = _edge_mult(graph)
    cols = []
    for v in range(graph.num_vertices):
        labels = tuple(sorted(i + 1 for i, h in enumerate(graph.legs)
                              if graph.adj[h] == v))
        legdata = len(labels) if leg_agnostic else labels
        cols.append((graph.genus[v], graph.valence(v),
                     mult.get((v, v), 0), legdata))
    return cols


def _refine(graph, colors):
    mult = _edge_mult(graph)
    nbrs = {}
    for (u, v), m in mult.items():
        if u != v:
            nbrs.setdefault(u, []).append((v, m))
            nbrs.setdefault(v, []).append((u, m))
    ranks = _rank(colors)
    while True:
        keys = []
        for v in range(graph.num_vertices):
            sig = tuple(sorted((ranks[w], m) for w, m in nbrs.get(v, [])))
            keys.append((ranks[v], sig))
        new = _rank(keys)
        if new == ranks:
            return ranks
        ranks = new


def _rank(keys):
    order = {k: i for i, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def _orderings(graph, leg_agnostic):
    """All vertex orderings produced by individualization-refinement.

    The canonical ordering is the one whose encoding is minimal; equal
    minimal encodings differ by vertex-level automorphisms.
    """
    base = _refine(graph, _initial_colors(graph, leg_agnostic))
    out = []

    def descend(ranks):
        classes = {}
        for v, r in enumerate(ranks):
            classes.setdefault(r, []).append(v)
        target = None
        for r in sorted(classes):
            if len(classes[r]) > 1:
                target = classes[r]
                break
        if target is None:
            out.append(tuple(sorted(range(len(ranks)), key=lambda v: ranks[v])))
            return
        for v in target:
            forced = [(r, 1) for r in ranks]
            forced[v] = (ranks[v], 0)   # individualize: sorts before its class
            descend(_refine(graph, _rank(forced)))

    descend(base)
    return out


def _order_key(graph, order, leg_agnostic):
    """Comparable structure table for a vertex ordering."""
    pos = {v: i for i, v in enumerate(order)}
    genus_seq = tuple(graph.genus[v] for v in order)
    pairs = sorted(tuple(sorted((pos[graph.adj[h1]], pos[graph.adj[h2]])))
                   for h1, h2 in graph.edge_pairs())
    if leg_agnostic:
        legdata = tuple(sorted(pos[graph.adj[h]] for h in graph.legs))
    else:
        legdata = tuple(pos[graph.adj[h]] for h in graph.legs)
    return (genus_seq, tuple(pairs), legdata)


def _build_canonical(graph, order, leg_agnostic):
    pos = {v: i for i, v in enumerate(order)}
    E = graph.num_edges
    n = graph.num_legs
    # sort edge instances by (canonical endpoints, input edge index)
    insts = []
    for idx, (h1, h2) in enumerate(graph.edge_pairs()):
        a, b = sorted((pos[graph.adj[h1]], pos[graph.adj[h2]]))
        insts.append((a, b, idx, h1, h2))
    insts.sort()
    relabel = [None] * len(graph.adj)
    new_edges = []
    for k, (a, b, idx, h1, h2) in enumerate(insts):
        new_edges.append((a, b))
        if a == b:
            relabel[h1], relabel[h2] = 2 * k, 2 * k + 1
        else:
            if pos[graph.adj[h1]] == a:
                relabel[h1], relabel[h2] = 2 * k, 2 * k + 1
            else:
                relabel[h1], relabel[h2] = 2 * k + 1, 2 * k
    if leg_agnostic:
        slots = []  # (canonical vertex, input label) in canonical slot order
        for i in range(len(order)):
            at_v = sorted(lab + 1 for lab, h in enumerate(graph.legs)
                          if pos[graph.adj[h]] == i)
            slots.extend((i, lab) for lab in at_v)
        leg_perm = tuple(lab for _, lab in slots)
        leg_vx = [v for v, _ in slots]
        for k, (_, lab) in enumerate(slots):
            relabel[graph.legs[lab - 1]] = 2 * E + k
    else:
        leg_perm = tuple(range(1, n + 1))
        leg_vx = [pos[graph.adj[h]] for h in graph.legs]
        for i, h in enumerate(graph.legs):
            relabel[h] = 2 * E + i
    canon = make_graph([graph.genus[v] for v in order], new_edges, leg_vx)
    enc = ("MG1:g=%s;e=%s;l=%s" % (
        ",".join(str(graph.genus[v]) for v in order),
        ";".join("%d-%d" % e for e in new_edges),
        ",".join(str(v) for v in leg_vx))).encode()
    return CanonicalForm(enc, canon, tuple(relabel), leg_perm)


@lru_cache(maxsize=1 << 18)
def canonical_form(graph: ModularGraph, leg_agnostic: bool = False) -> CanonicalForm:
    """Canonical form with relabeling.  Two graphs are isomorphic (fixing leg
    labels, or forgetting them when leg_agnostic) iff their encodings agree.
    """
    orders = _orderings(graph, leg_agnostic)
    best = min(orders, key=lambda o: _order_key(graph, o, leg_agnostic))
    # deterministic pick among equal-key orderings
    best_key = _order_key(graph, best, leg_agnostic)
    winners = sorted(o for o in orders if _order_key(graph, o, leg_agnostic) == best_key)
    return _build_canonical(graph, winners[0], leg_agnostic)


@lru_cache(maxsize=1 << 16)
def _vertex_autos(graph: ModularGraph, leg_agnostic: bool):
    """Vertex permutations (tuples: v -> sigma(v)) preserving the structure."""
    orders = _orderings(graph, leg_agnostic)
    key0 = min(_order_key(graph, o, leg_agnostic) for o in orders)
    winners = [o for o in orders if _order_key(graph, o, leg_agnostic) == key0]
    ref = winners[0]
    autos = []
    for w in winners:
        sigma = [None] * graph.num_vertices
        for i in range(graph.num_vertices):
            sigma[ref[i]] = w[i]
        autos.append(tuple(sigma))
    return sorted(set(autos))


class Automorphism(NamedTuple):
    halfedges: tuple   # h -> image half-edge
    vertices: tuple    # v -> image vertex
    leg_perm: tuple    # leg_perm[i] = image label of label i+1 (identity unless extended)


@lru_cache(maxsize=1 << 14)
def automorphism_elements(graph: ModularGraph, leg_agnostic: bool = False,
                          max_order: int = 1 << 20):
    """All automorphisms as half-edge permutations.

    Legs are fixed pointwise; with leg_agnostic they may move, but legs at a
    vertex are aligned in label order (arbitrary within-vertex leg shuffles
    are handled analytically by callers, not enumerated here).
    """
    pairs = graph.edge_pairs()
    families = {}
    for idx, (h1, h2) in enumerate(pairs):
        key = tuple(sorted((graph.adj[h1], graph.adj[h2])))
        families.setdefault(key, []).append(idx)
    out = []
    for sigma in _vertex_autos(graph, leg_agnostic):
        choice_sets = []
        fam_keys = sorted(families)
        ok = True
        for key in fam_keys:
            u, v = key
            img = tuple(sorted((sigma[u], sigma[v])))
            if img not in families or len(families[img]) != len(families[key]):
                ok = False
                break
            src = families[key]
            dst = families[img]
            opts = []
            if u == v:  # loop family: bijections and per-loop flips
                for assign in itertools.permutations(dst):
                    for flips in itertools.product((False, True), repeat=len(src)):
                        opts.append((assign, flips))
            else:
                for assign in itertools.permutations(dst):
                    opts.append((assign, (False,) * len(src)))
            choice_sets.append((src, opts))
        if not ok:
            continue
        total = 1
        for _, opts in choice_sets:
            total *= len(opts)
        if total + len(out) > max_order:
            raise ValueError("automorphism group too large to enumerate")
        for combo in itertools.product(*(opts for _, opts in choice_sets)):
            hperm = [None] * len(graph.adj)
            for (src, _), (assign, flips) in zip(choice_sets, combo):
                for e_src, e_dst, flip in zip(src, assign, flips):
                    a1, a2 = pairs[e_src]
                    b1, b2 = pairs[e_dst]
                    if graph.adj[a1] == graph.adj[a2]:  # loop
                        if flip:
                            b1, b2 = b2, b1
                        hperm[a1], hperm[a2] = b1, b2
                    else:
                        if sigma[graph.adj[a1]] == graph.adj[b1]:
                            hperm[a1], hperm[a2] = b1, b2
                        else:
                            hperm[a1], hperm[a2] = b2, b1
            if leg_agnostic:
                leg_perm = [None] * graph.num_legs
                for v in range(graph.num_vertices):
                    src_labs = sorted(i + 1 for i, h in enumerate(graph.legs)
                                      if graph.adj[h] == v)
                    dst_labs = sorted(i + 1 for i, h in enumerate(graph.legs)
                                      if graph.adj[h] == sigma[v])
                    for a, b in zip(src_labs, dst_labs):
                        leg_perm[a - 1] = b
                        hperm[graph.legs[a - 1]] = graph.legs[b - 1]
                leg_perm = tuple(leg_perm)
            else:
                for h in graph.legs:
                    hperm[h] = h
                leg_perm = tuple(range(1, graph.num_legs + 1))
            out.append(Automorphism(tuple(hperm), sigma, leg_perm))
    return out


class AutomorphismGroup(NamedTuple):
    generators: tuple
    order: int


def automorphisms(canonical: CanonicalForm) -> AutomorphismGroup:
    """Full group of leg-fixing, genus-preserving automorphisms."""
    elems = automorphism_elements(canonical.graph, False)
    return AutomorphismGroup(tuple(elems), len(elems))


def aut_twist_sign(graph: ModularGraph, aut: Automorphism, kind: TwistKind) -> int:
    """Sign by which an automorphism acts on the reference twist datum."""
    pairs = graph.edge_pairs()
    if kind is TwistKind.EDGE_ORDER:
        index = {p: i for i, p in enumerate(pairs)}
        seq = []
        for h1, h2 in pairs:
            img = tuple(sorted((aut.halfedges[h1], aut.halfedges[h2])))
            seq.append(index[img])
        return perm_parity(seq)
    sign = perm_parity(aut.vertices)
    for h1, h2 in pairs:  # reference direction: min half-edge is the tail
        if aut.halfedges[h1] > aut.halfedges[h2]:
            sign = -sign
    return sign


def is_zero_generator(canonical: CanonicalForm, kind: TwistKind) -> bool:
    """True iff some leg-fixing automorphism reverses the twist datum."""
    g = canonical.graph
    return any(aut_twist_sign(g, a, kind) < 0
               for a in automorphism_elements(g, False))


def relabel_sign(graph: ModularGraph, relabel, kind: TwistKind,
                 target: ModularGraph) -> int:
    """Sign relating the reference twist of `graph` to the reference twist of
    `target` along the half-edge relabeling map."""
    pairs = graph.edge_pairs()
    tpairs = {p: i for i, p in enumerate(target.edge_pairs())}
    if kind is TwistKind.EDGE_ORDER:
        seq = [tpairs[tuple(sorted((relabel[h1], relabel[h2])))]
               for h1, h2 in pairs]
        return perm_parity(seq)
    vmap = [None] * graph.num_vertices
    for h in range(len(graph.adj)):
        vmap[graph.adj[h]] = target.adj[relabel[h]]
    if graph.num_vertices == 1:
        vmap = [0]
    sign = perm_parity(vmap)
    for h1, h2 in pairs:
        if relabel[h1] > relabel[h2]:
            sign = -sign
    return sign


# ---------------------------------------------------------------------------
# contraction and expansion

class Contraction(NamedTuple):
    graph: ModularGraph
    halfedge_map: tuple   # old half-edge -> new half-edge (None for the contracted pair)
    merged_vertex: int    # vertex of the contraction in the new graph
    vertex_sign: int      # parity of moving (tail, head) to the front of the vertex order


def contract(graph: ModularGraph, edge_idx: int) -> Contraction:
    """Contract one edge.  A loop raises the genus of its vertex; otherwise the
    endpoints merge (genera added) with the merged vertex placed first.
    """
    pairs = graph.edge_pairs()
    h1, h2 = pairs[edge_idx]
    u, v = graph.adj[h1], graph.adj[h2]
    drop = {h1, h2}
    old_halves = [h for h in range(len(graph.adj)) if h not in drop]
    hmap = [None] * len(graph.adj)
    for new, old in enumerate(old_halves):
        hmap[old] = new
    if u == v:
        genus = list(graph.genus)
        genus[u] += 1
        vmap = list(range(graph.num_vertices))
        vsign = 1
        merged = u
    else:
        rest = [w for w in range(graph.num_vertices) if w not in (u, v)]
        vmap = [None] * graph.num_vertices
        vmap[u] = vmap[v] = 0
        for i, w in enumerate(rest):
            vmap[w] = i + 1
        genus = [graph.genus[u] + graph.genus[v]] + [graph.genus[w] for w in rest]
        vsign = perm_parity([u, v] + rest)
        merged = 0
    adj = tuple(vmap[graph.adj[old]] for old in old_halves)
    inv = tuple(hmap[graph.inv[old]] for old in old_halves)
    legs = tuple(hmap[h] for h in graph.legs)
    newg = ModularGraph(tuple(genus), adj, inv, legs)
    return Contraction(newg, tuple(hmap), merged, vsign)


def contract_edge(graph: ModularGraph, edge_idx: int):
    """Spec-facing contraction: returns (graph, sign) with the Koszul sign of
    moving the contracted edge to the front of the edge order."""
    c = contract(graph, edge_idx)
    return c.graph, (-1) ** edge_idx


def expansions(graph: ModularGraph):
    """All one-edge expansions (graphs contracting back onto this one).

    Splits a vertex into two joined by a new edge, distributing genus and
    flags, or hatches a loop at a positive-genus vertex.
    """
    out = []
    for v in range(graph.num_vertices):
        flags = graph.vertex_flags(v)
        gv = graph.genus[v]
        if gv >= 1:  # hatch a loop
            out.append(_expand_loop(graph, v))
        for g1 in range(gv + 1):
            g2 = gv - g1
            for r in range(len(flags) + 1):
                for S in itertools.combinations(flags, r):
                    if 2 * g1 + len(S) + 1 < 3:
                        continue
                    if 2 * g2 + (len(flags) - len(S)) + 1 < 3:
                        continue
                    out.append(_expand_split(graph, v, g1, g2, set(S)))
    return out


def _expand_loop(graph, v):
    H = len(graph.adj)
    genus = list(graph.genus)
    genus[v] -= 1
    adj = list(graph.adj) + [v, v]
    inv = list(graph.inv) + [H + 1, H]
    return ModularGraph(tuple(genus), tuple(adj), tuple(inv), graph.legs)


def _expand_split(graph, v, g1, g2, S):
    H = len(graph.adj)
    W = graph.num_vertices
    genus = list(graph.genus)
    genus[v] = g1
    genus.append(g2)
    adj = list(graph.adj)
    for h in graph.vertex_flags(v):
        adj[h] = v if h in S else W
    adj.extend([v, W])
    inv = list(graph.inv) + [H + 1, H]
    return ModularGraph(tuple(genus), tuple(adj), tuple(inv), graph.legs)


# ---------------------------------------------------------------------------
# enumeration

def stable_type(g, n):
    return g >= 0 and n >= 0 and 2 * g + n >= 3


def enumerate_by_edges(g, n, max_edges):
    """Canonical forms of all stable type-(g,n) modular graphs, keyed by edge
    count.  Built by repeated one-edge expansion from the genus-g corolla."""
    if not stable_type(g, n):
        raise ValueError("unstable type (%d,%d)" % (g, n))
    corolla = make_graph([g], [], [0] * n)
    levels = {0: {canonical_form(corolla).encoding: canonical_form(corolla)}}
    e = 0
    while e < max_edges and levels[e]:
        nxt = {}
        for cf in levels[e].values():
            for exp in expansions(cf.graph):
                c2 = canonical_form(exp)
                nxt.setdefault(c2.encoding, c2)
        levels[e + 1] = nxt
        e += 1
    for e in range(max_edges + 1):
        levels.setdefault(e, {})
    return {e: [levels[e][k] for k in sorted(levels[e])] for e in levels}


def enumerate_graphs(g, n, allow_tadpoles=True, allow_positive_genus=True,
                     max_edges=None):
    """One canonical representative per isomorphism class, sorted by encoding."""
    if max_edges is None:
        max_edges = 3 * g + n - 3 if 3 * g + n - 3 >= 0 else 0
    levels = enumerate_by_edges(g, n, max_edges)
    out = []
    for e in sorted(levels):
        for cf in levels[e]:
            gr = cf.graph
            if not allow_tadpoles and any(gr.adj[h1] == gr.adj[h2]
                                          for h1, h2 in gr.edge_pairs()):
                continue
            if not allow_positive_genus and any(x > 0 for x in gr.genus):
                continue
            out.append(cf)
    return sorted(out, key=lambda c: c.encoding)
