"""Chain complexes of decorated modular graphs.

A complex in biarity (g, n) is assembled from canonical graphs graded by
edge count, each carrying the invariants of its automorphism group acting
on (decoration tensor twist sign).  The stored differential is the edge
contraction operator C_E: (E edges) -> (E-1 edges); the dual expansion
differential is its transpose, so homology dimensions can be read from the
same ranks.  C o C = 0 is asserted at assembly time.

The anti-invariant variant works with one graph per leg-forgetting
isomorphism class and twists the group action by the sign of the induced
leg permutation.  Leg shuffles inside a vertex act on decoration words by
pure position relabeling whenever they fix the output and anchor slots;
those factors are folded combinatorially instead of being enumerated.
"""

from __future__ import annotations

import hashlib
import itertools
import os
from ast import literal_eval
from fractions import Fraction
from typing import NamedTuple

from .decor import com_system, lie_system
from .linalg import SparseMatrix, rank, solve_membership
from .modgraph import (
    TwistKind,
    Automorphism,
    automorphism_elements,
    aut_twist_sign,
    canonical_form,
    contract,
    enumerate_by_edges,
    expansions,
    make_graph,
    perm_parity,
    relabel_sign,
    stable_type,
)

CACHE_VERSION = "GHC1"


class FeasibilityError(ValueError):
    """Requested computation exceeds the configured desk-scale guard rails."""


class SectorConfig(NamedTuple):
    name: str
    decoration: object
    twist: TwistKind
    allow_tadpoles: bool
    allow_positive_genus: bool
    degree_shift_2g: bool   # report degrees as E - 2g
    leg_sgn: bool           # character of leg permutations in anti mode


def sector_config(sector: str) -> SectorConfig:
    """Sector bundles.  The Lie sector hides one subtlety: the desuspension
    and shift twist the leg action by the sign character, so its alternating
    isotypic component is cut out by plain averaging over leg relabelings
    (leg_sgn=False), while the commutative sectors use the signed projector.
    """
    if sector == "com":
        return SectorConfig("com", com_system(False), TwistKind.EDGE_ORDER,
                            True, True, False, True)
    if sector == "com-bar":
        return SectorConfig("com-bar", com_system(True), TwistKind.EDGE_ORDER,
                            True, True, False, True)
    if sector == "lie":
        return SectorConfig("lie", lie_system(), TwistKind.VERTEX_EDGE_DIR,
                            True, True, False, False)
    if sector == "gc2":
        return SectorConfig("gc2", com_system(False), TwistKind.EDGE_ORDER,
                            False, False, True, True)
    raise ValueError("unknown sector %r" % (sector,))


# ---------------------------------------------------------------------------
# per-graph generator spaces

def _invert_halfedges(hperm):
    inv = [None] * len(hperm)
    for h, img in enumerate(hperm):
        inv[img] = h
    return tuple(inv)


def flag_order(graph, v, anti):
    """Flag tuple of a vertex fixing the decoration slots.

    Leg-labeled assembly puts legs first, so leg-fixing automorphisms never
    move the output/anchor slots of a vertex that carries legs; the
    anti-invariant assembly puts edge halves first, so leg shuffles act by
    pure word relabeling wherever the vertex keeps two edge flags.
    """
    flags = graph.vertex_flags(v)
    legs = tuple(f for f in flags if graph.inv[f] == f)
    edges = tuple(f for f in flags if graph.inv[f] != f)
    return edges + legs if anti else legs + edges


class GraphSpace:
    """Invariants of the (possibly leg-extended) automorphism group acting on
    the decoration of one canonical graph, twisted by orientation signs.

    Group elements whose flag maps fix each vertex's output and anchor slots
    act as signed permutations of basis tuples; their contribution is folded
    into a signed orbit table.  Only the remaining coset representatives need
    honest decoration rewriting.
    """

    def __init__(self, graph, deco, twist, anti, leg_sgn=True,
                 max_vertex_dim=None):
        self.graph = graph
        self.encoding = canonical_form(graph, anti).encoding
        self.deco = deco
        self.twist = twist
        self.anti = anti
        self.leg_sgn = leg_sgn
        V = graph.num_vertices
        self.flags = [flag_order(graph, v, anti) for v in range(V)]
        self.valences = [len(f) for f in self.flags]
        self.vertex_bases = []
        for v in range(V):
            dim = deco.space_dim(graph.genus[v], self.valences[v])
            if max_vertex_dim and dim > max_vertex_dim:
                raise FeasibilityError(
                    "decoration space of dimension %d exceeds the guard rail"
                    % dim)
            self.vertex_bases.append(deco.basis(graph.genus[v], self.valences[v]))
        self.supported = all(self.vertex_bases)
        self.free = []     # leg positions shuffled analytically (anti only)
        self.pinned = []   # leg positions among the output/anchor slots
        for v in range(V):
            legpos = tuple(p for p, f in enumerate(self.flags[v])
                           if graph.inv[f] == f)
            if not anti:
                self.free.append(())
                self.pinned.append(())
            elif deco.trivial:
                self.free.append(legpos)
                self.pinned.append(())
            else:
                pin = tuple(p for p in legpos if p < 2)
                self.free.append(tuple(p for p in legpos if p >= 2))
                self.pinned.append(pin)
        self.h0_scale = 1
        if not deco.trivial:
            for fr in self.free:
                for i in range(2, len(fr) + 1):
                    self.h0_scale *= i
        self._setup_group()
        self.basis = []          # list of (pivot key, {rep tuple: Fraction})
        self._build_basis()

    # -- group elements ----------------------------------------------------

    def _setup_group(self):
        g = self.graph
        if not self.anti:
            elems = automorphism_elements(g, False)
        else:
            skeletons = automorphism_elements(g, True)
            if self.deco.trivial or not any(self.pinned):
                elems = skeletons
            else:
                elems = []
                for skel in skeletons:
                    elems.extend(self._pin_variants(skel))
        ident = tuple(range(len(g.adj)))
        elems = sorted(elems, key=lambda a: a.halfedges != ident)
        perm_elems = [a for a in elems if self._is_permutative(a)]
        slow = []
        for a in elems:
            inv = _invert_halfedges(a.halfedges)
            if any(self._is_permutative_map(
                    tuple(r.halfedges[inv[h]] for h in range(len(inv))))
                    for r in slow):
                continue
            slow.append(a)
        self.slow_reps = [self._action_data(a) for a in slow]
        self.perm_actions = [self._action_data(a) for a in perm_elems]

    def _is_permutative(self, aut):
        return self._is_permutative_map(aut.halfedges)

    def _is_permutative_map(self, hperm):
        if self.deco.trivial:
            return True
        flagpos = self._flagpos()
        for v in range(self.graph.num_vertices):
            fl = self.flags[v]
            if len(fl) < 2:
                continue
            if flagpos[hperm[fl[0]]] != 0 or flagpos[hperm[fl[1]]] != 1:
                return False
        return True

    def _flagpos(self):
        fp = getattr(self, "_fp", None)
        if fp is None:
            fp = {}
            for v in range(self.graph.num_vertices):
                for p, f in enumerate(self.flags[v]):
                    fp[f] = p
            self._fp = fp
        return fp

    def _pin_variants(self, skel):
        """Right-coset representatives: re-align which source leg lands on
        each pinned (output/anchor) leg slot of the image vertex."""
        g = self.graph
        slots = []
        for v in range(g.num_vertices):
            if not self.pinned[v]:
                continue
            src_legs = [f for f in self.flags[v] if g.inv[f] == f]
            w = skel.vertices[v]
            w_legs = [f for f in self.flags[w] if g.inv[f] == f]
            pinned_flags = [self.flags[w][q] for q in self.pinned[v]]
            slots.append((v, src_legs, w_legs, pinned_flags))
        choice_lists = [list(itertools.permutations(src, len(pf)))
                        for _, src, _, pf in slots]
        out = []
        for combo in itertools.product(*choice_lists):
            hperm = list(skel.halfedges)
            ok = True
            for (v, src_legs, w_legs, pinned_flags), chosen in zip(slots, combo):
                rest_src = [f for f in src_legs if f not in chosen]
                rest_dst = [f for f in w_legs if f not in pinned_flags]
                for f, tf in zip(chosen, pinned_flags):
                    hperm[f] = tf
                for f, tf in zip(rest_src, rest_dst):
                    hperm[f] = tf
            if not ok:
                continue
            leg_perm = [None] * g.num_legs
            for lab, f in enumerate(g.legs):
                img = hperm[f]
                leg_perm[lab] = g.legs.index(img) + 1
            out.append(Automorphism(tuple(hperm), skel.vertices, tuple(leg_perm)))
        return out

    def _action_data(self, aut):
        g = self.graph
        chi = aut_twist_sign(g, aut, self.twist)
        if self.anti and self.leg_sgn:
            chi *= perm_parity(aut.leg_perm)
        vmaps = []
        flagpos = {}
        for v in range(g.num_vertices):
            for p, f in enumerate(self.flags[v]):
                flagpos[f] = p
        for v in range(g.num_vertices):
            w = aut.vertices[v]
            pm = tuple(flagpos[aut.halfedges[f]] for f in self.flags[v])
            vmaps.append((w, pm))
        return (chi, tuple(vmaps))

    # -- standardization under free leg shuffles ----------------------------

    def standardize(self, tup):
        """Orbit representative and sign under the free leg shuffle group.
        Returns None when the orbit dies (two free legs at a trivial vertex
        under the signed character)."""
        if self.deco.trivial:
            if self.leg_sgn and any(len(fr) >= 2 for fr in self.free):
                return None
            return tup, 1
        sign = 1
        out = []
        for v, lab in enumerate(tup):
            fr = self.free[v]
            if len(fr) < 2:
                out.append(lab)
                continue
            frset = set(fr)
            occ = [p for p in lab if p in frset]
            if occ != sorted(occ):
                if self.leg_sgn:
                    sign *= perm_parity(occ)
                m = dict(zip(occ, sorted(occ)))
                lab = tuple(m.get(p, p) for p in lab)
            out.append(lab)
        return tuple(out), sign

    def _rep_labels(self, v):
        fr = self.free[v]
        base = self.vertex_bases[v]
        if self.deco.trivial or len(fr) < 2:
            return list(base)
        frset = set(fr)
        out = []
        for lab in base:
            occ = [p for p in lab if p in frset]
            if occ == sorted(occ):
                out.append(lab)
        return out

    def rep_tuples(self):
        if self.deco.trivial and any(len(fr) >= 2 for fr in self.free):
            return []
        pools = [self._rep_labels(v) for v in range(self.graph.num_vertices)]
        if any(not p for p in pools):
            return []
        return [tuple(t) for t in itertools.product(*pools)]

    # -- signed orbits under the permutative part ---------------------------

    def _perm_image(self, action, tup):
        """Image of a basis tuple under a permutative element: pure position
        relabeling of every word, no coefficients beyond the character."""
        chi, vmaps = action
        out = [None] * len(tup)
        for v, lab in enumerate(tup):
            w, pm = vmaps[v]
            if self.deco.trivial:
                out[w] = lab
            else:
                out[w] = tuple(pm[p] for p in lab)
        return tuple(out), chi

    def _build_orbits(self):
        """Signed orbit table of the permutative subgroup acting on
        standardized tuples: tuple -> (orbit rep, sign, orbit size) with dead
        orbits mapped to None."""
        self.orbit = {}
        self.orbit_size = {}
        if not self.supported:
            return
        pending = sorted(self.rep_tuples())
        seen = {}
        for t0 in pending:
            if t0 in seen:
                continue
            frontier = {t0: 1}
            members = {t0: 1}
            dead = False
            while frontier:
                nxt = {}
                for t, s in frontier.items():
                    for action in self.perm_actions:
                        img, chi = self._perm_image(action, t)
                        st = self.standardize(img)
                        if st is None:
                            dead = True
                            continue
                        rep2, s2 = st
                        total = s * chi * s2
                        if rep2 in members:
                            if members[rep2] != total:
                                dead = True
                        else:
                            members[rep2] = total
                            nxt[rep2] = total
                frontier = nxt
            size = len(members) * self.h0_scale
            for t, s in members.items():
                seen[t] = True
                self.orbit[t] = None if dead else (t0, s, size)
        self.orbit_reps = sorted(t for t, v in self.orbit.items()
                                 if v is not None and v[0] == t)

    def fold(self, vec):
        """Collapse a full-coordinate vector onto orbit representatives,
        dividing by the total orbit size (the permutative-part projector)."""
        out = {}
        for t, c in vec.items():
            st = self.standardize(t)
            if st is None:
                continue
            t1, s1 = st
            info = self.orbit.get(t1)
            if info is None:
                continue
            rep, s2, size = info
            val = Fraction(s1 * s2 * c, size)
            nv = out.get(rep, Fraction(0)) + val
            if nv:
                out[rep] = nv
            else:
                out.pop(rep, None)
        return out

    # -- projection --------------------------------------------------------

    def apply_action(self, action, vec):
        """Apply one group element (with its character sign) to a vector in
        full tuple coordinates."""
        chi, vmaps = action
        g = self.graph
        out = {}
        for tup, coeff in vec.items():
            stack = [((None,) * g.num_vertices, chi * coeff)]
            for v, lab in enumerate(tup):
                w, pm = vmaps[v]
                imgs = self.deco.act(g.genus[v], self.valences[v], pm, lab)
                nxt = []
                for target, c in stack:
                    for lab2, c2 in imgs.items():
                        t2 = list(target)
                        t2[w] = lab2
                        nxt.append((tuple(t2), c * c2))
                stack = nxt
            for t2, c in stack:
                if c:
                    out[t2] = out.get(t2, 0) + c
        return {t: c for t, c in out.items() if c}

    def project_restrict(self, vec):
        """The full projector in orbit-representative coordinates: average the
        slow coset representatives, then fold the permutative part."""
        if len(self.slow_reps) == 1:
            acc = vec
        else:
            acc = {}
            for action in self.slow_reps:
                for t, c in self.apply_action(action, vec).items():
                    nv = acc.get(t, 0) + c
                    if nv:
                        acc[t] = nv
                    else:
                        acc.pop(t, None)
        folded = self.fold(acc)
        if len(self.slow_reps) > 1:
            scale = Fraction(1, len(self.slow_reps))
            folded = {t: c * scale for t, c in folded.items() if c}
        return folded

    # -- basis -------------------------------------------------------------

    def _build_basis(self):
        """RREF the projector columns over orbit representatives.  Each basis
        vector keeps an explicit lift (a combination of plain tuples whose
        projection is the generator); differentials and transports act on
        lifts, which is exact because the projector commutes past them."""
        self._build_orbits()
        self.lifts = []
        if not self.supported:
            return
        if len(self.slow_reps) == 1:
            self.basis = [(t, {t: Fraction(1)}) for t in self.orbit_reps]
            self.lifts = [{t: Fraction(self.total_orbit_size(t))}
                          for t in self.orbit_reps]
            return
        pivots = {}
        for t in self.orbit_reps:
            col = self.project_restrict({t: 1})
            lift = {t: Fraction(1)}
            for key in sorted(pivots):
                pv, pl = pivots[key]
                c = col.get(key)
                if not c:
                    continue
                for k, v in pv.items():
                    nv = col.get(k, Fraction(0)) - c * v
                    if nv:
                        col[k] = nv
                    else:
                        col.pop(k, None)
                for k, v in pl.items():
                    nv = lift.get(k, Fraction(0)) - c * v
                    if nv:
                        lift[k] = nv
                    else:
                        lift.pop(k, None)
            col = {k: v for k, v in col.items() if v}
            if not col:
                continue
            key = min(col)
            inv = Fraction(1) / col[key]
            col = {k: v * inv for k, v in col.items()}
            lift = {k: v * inv for k, v in lift.items()}
            for pv, pl in pivots.values():
                c = pv.get(key)
                if not c:
                    continue
                for k, v in col.items():
                    nv = pv.get(k, Fraction(0)) - c * v
                    if nv:
                        pv[k] = nv
                    else:
                        pv.pop(k, None)
                for k, v in lift.items():
                    nv = pl.get(k, Fraction(0)) - c * v
                    if nv:
                        pl[k] = nv
                    else:
                        pl.pop(k, None)
            pivots[key] = (col, lift)
        ordered = sorted(pivots.items())
        self.basis = [(key, pair[0]) for key, pair in ordered]
        self.lifts = [pair[1] for _, pair in ordered]

    @property
    def dim(self):
        return len(self.basis)

    def total_orbit_size(self, rep_tuple):
        info = self.orbit[rep_tuple]
        return info[2]

    def express(self, vec):
        """Coordinates of the projection of `vec` in the generator basis."""
        w = self.project_restrict(vec)
        coords = {}
        for i, (key, bv) in enumerate(self.basis):
            c = w.get(key)
            if c:
                coords[i] = c
                for k, v in bv.items():
                    nv = w.get(k, Fraction(0)) - c * v
                    if nv:
                        w[k] = nv
                    else:
                        w.pop(k, None)
        if any(w.values()):
            raise AssertionError(
                "projected vector escapes the invariant span at %s"
                % self.encoding.decode())
        return coords


def _reduce_against(pivots, col):
    col = dict(col)
    for key in sorted(pivots):
        c = col.get(key)
        if c:
            for k, v in pivots[key].items():
                nv = col.get(k, Fraction(0)) - c * v
                if nv:
                    col[k] = nv
                else:
                    col.pop(k, None)
    return {k: v for k, v in col.items() if v}


# ---------------------------------------------------------------------------
# assembled complexes

class ChainComplexData:
    """Graded bases plus exact contraction matrices C_E: E -> E-1."""

    def __init__(self, g, n, meta, spaces, diffs):
        self.g = g
        self.n = n
        self.meta = meta
        self.spaces = spaces            # {E: [GraphSpace]}   (None when cached)
        self.diffs = diffs              # {E: SparseMatrix}
        self.basis_info = {
            E: [(sp.encoding, key) for sp in spaces[E] for key, _ in sp.basis]
            for E in spaces
        } if spaces is not None else None

    @property
    def degrees(self):
        return sorted(self.basis_info)

    def dim(self, E):
        return len(self.basis_info.get(E, []))

    def dims(self):
        return {E: self.dim(E) for E in self.degrees}

    def degree_label(self, E):
        if self.meta.get("degree_shift") == "E-2g":
            return E - 2 * self.g
        return E

    def index_of(self, E):
        out = {}
        for i, item in enumerate(self.basis_info.get(E, [])):
            out[item] = i
        return out


def _graph_in_constraints(graph, cfg):
    if not cfg.allow_tadpoles and any(graph.adj[h1] == graph.adj[h2]
                                      for h1, h2 in graph.edge_pairs()):
        return False
    if not cfg.allow_positive_genus and any(x > 0 for x in graph.genus):
        return False
    return True


def _enumerate_level_graphs(g, n, max_edges, anti):
    """Canonical graphs per edge count; leg-forgetting classes when anti."""
    if not anti:
        levels = enumerate_by_edges(g, n, max_edges)
        return {E: [cf.graph for cf in levels[E]] for E in levels}
    corolla = make_graph([g], [], [0] * n)
    start = canonical_form(corolla, True)
    levels = {0: {start.encoding: start.graph}}
    e = 0
    while e < max_edges and levels[e]:
        nxt = {}
        for gr in levels[e].values():
            for exp in expansions(gr):
                cf = canonical_form(exp, True)
                nxt.setdefault(cf.encoding, cf.graph)
        levels[e + 1] = nxt
        e += 1
    for e2 in range(max_edges + 1):
        levels.setdefault(e2, {})
    return {E: [levels[E][k] for k in sorted(levels[E])] for E in levels}


class _EdgeData(NamedTuple):
    loop: bool
    sign: int                 # twist and leg-permutation signs combined
    target_key: bytes
    glue: tuple               # (posmap/glue info) see _contract_data
    spectator_maps: tuple     # (target vertex, posmap) per source vertex


def _contract_data(space, edge_idx, cfg, anti):
    """Everything about contracting one edge of a canonical graph that does
    not depend on the decoration labels."""
    g = space.graph
    pairs = g.edge_pairs()
    h1, h2 = pairs[edge_idx]
    u, v = g.adj[h1], g.adj[h2]
    con = contract(g, edge_idx)
    raw = con.graph
    cf = canonical_form(raw, anti)
    sign = relabel_sign(raw, cf.relabel, space.twist, cf.graph)
    if space.twist is TwistKind.EDGE_ORDER:
        sign *= (-1) ** edge_idx
    else:
        sign *= con.vertex_sign
    if anti and space.leg_sgn:
        sign *= perm_parity(cf.leg_perm)
    target = cf.graph
    tflags = {}
    for w in range(target.num_vertices):
        for p, f in enumerate(flag_order(target, w, anti)):
            tflags[f] = (w, p)
    if u == v:
        glue = (space.flags[u].index(h1), space.flags[u].index(h2), u)
        spect = []
        for w in range(g.num_vertices):
            entries = []
            for f in space.flags[w]:
                if f in (h1, h2):
                    entries.append(None)
                else:
                    entries.append(tflags[cf.relabel[con.halfedge_map[f]]])
            tv = next((e[0] for e in entries if e is not None), 0)
            spect.append((tv, tuple(e[1] if e else None for e in entries)))
        return _EdgeData(True, sign, cf.encoding, glue, tuple(spect))
    # non-loop: merged vertex maps for the two endpoints
    def endpoint_map(vert, drop):
        out = []
        for f in space.flags[vert]:
            if f == drop:
                out.append(None)
            else:
                out.append(tflags[cf.relabel[con.halfedge_map[f]]][1])
        return tuple(out)
    survivor = next((f for f in space.flags[u] if f != h1), None)
    if survivor is None:
        survivor = next((f for f in space.flags[v] if f != h2), None)
    if survivor is None:
        merged_target = 0   # the contraction is a single flagless vertex
    else:
        merged_target = tflags[cf.relabel[con.halfedge_map[survivor]]][0]
    map_u = endpoint_map(u, h1)
    map_v = endpoint_map(v, h2)
    glue = (u, v, space.flags[u].index(h1), space.flags[v].index(h2),
            map_u, map_v, merged_target)
    spect = []
    for w in range(g.num_vertices):
        if w in (u, v):
            spect.append(None)
            continue
        entries = [tflags[cf.relabel[con.halfedge_map[f]]] for f in space.flags[w]]
        spect.append((entries[0][0], tuple(p for _, p in entries)))
    return _EdgeData(False, sign, cf.encoding, glue, tuple(spect))


def _contract_tuple(space, edge_data_list, tup, cfg, target_spaces):
    """Contract every edge of one decorated tuple.  Returns contributions to
    target expressions: {target encoding: {full tuple: coeff}}."""
    g = space.graph
    out = {}
    for ed in edge_data_list:
        if ed.target_key not in target_spaces:
            continue    # dropped by sub/quotient constraints
        tsp = target_spaces[ed.target_key]
        if ed.loop:
            p1, p2, u = ed.glue
            lab = tup[u]
            res = space.deco.contract_loop(g.genus[u], space.valences[u],
                                           lab, p1, p2, None)
            if res is None:
                continue
            terms = {(): 1}
            base = [None] * tsp.graph.num_vertices
            ok = True
            for w in range(g.num_vertices):
                tv, pm = ed.spectator_maps[w]
                if w == u:
                    continue
                imgs = space.deco.act(g.genus[w], space.valences[w],
                                      _clean_pm(pm), tup[w])
                terms = _tensor(terms, tv, imgs, tsp)
            # merged (loop) vertex: trivial decorations only reach here
            tv, pm = ed.spectator_maps[u]
            terms = _tensor(terms, tv, res, tsp)
            _accumulate(out, ed, terms, tsp)
            continue
        u, v, glue_u, glue_v, map_u, map_v, merged_target = ed.glue
        res = space.deco.contract(g.genus[u], space.valences[u], tup[u],
                                  glue_u, map_u,
                                  g.genus[v], space.valences[v], tup[v],
                                  glue_v, map_v)
        if not res:
            continue
        terms = _tensor({(): 1}, merged_target, res, tsp)
        for w in range(g.num_vertices):
            if w in (u, v):
                continue
            tv, pm = ed.spectator_maps[w]
            imgs = space.deco.act(g.genus[w], space.valences[w], pm, tup[w])
            terms = _tensor(terms, tv, imgs, tsp)
        _accumulate(out, ed, terms, tsp)
    return out


def _clean_pm(pm):
    return tuple(p for p in pm if p is not None)


def _tensor(terms, target_vertex, imgs, tsp):
    nxt = {}
    for partial, c in terms.items():
        if partial == ():
            partial = (None,) * tsp.graph.num_vertices
        for lab, c2 in imgs.items():
            t2 = list(partial)
            t2[target_vertex] = lab
            key = tuple(t2)
            nxt[key] = nxt.get(key, 0) + c * c2
    return {k: v for k, v in nxt.items() if v}


def _accumulate(out, ed, terms, tsp):
    dest = out.setdefault(ed.target_key, {})
    for t, c in terms.items():
        dest[t] = dest.get(t, 0) + ed.sign * c


def assemble(g: int, n: int, sector: str, *, anti: bool = False,
             max_edges: int | None = None, max_vertex_dim: int = 200000,
             check_dsq: bool = True, cache_dir: str | None = None) -> ChainComplexData:
    """Build the graded bases and contraction matrices of one complex.

    The composite of consecutive differentials is asserted to vanish; a
    failure names the offending generator.
    """
    if not stable_type(g, n):
        raise ValueError("unstable type (%d,%d)" % (g, n))
    cfg = sector_config(sector)
    if sector == "gc2" and g < 1:
        raise ValueError("gc2 complex requires genus >= 1")
    natural_max = 3 * g + n - 3
    if max_edges is None:
        max_edges = natural_max
    max_edges = min(max_edges, natural_max)
    meta = {
        "g": g, "n": n, "sector": sector, "anti": anti,
        "twist": cfg.twist.value, "max_edges": max_edges,
        "allow_tadpoles": cfg.allow_tadpoles,
        "allow_positive_genus": cfg.allow_positive_genus,
        "degree_shift": "E-2g" if cfg.degree_shift_2g else "E",
        "lie_degree_offset": "(3,1,-3)" if sector == "lie" else None,
    }
    if cache_dir:
        path = cache_path(cache_dir, meta)
        if os.path.exists(path):
            return load_cache(path)
    level_graphs = _enumerate_level_graphs(g, n, max_edges, anti)
    spaces = {}
    for E in sorted(level_graphs):
        row = []
        for gr in level_graphs[E]:
            if not _graph_in_constraints(gr, cfg):
                continue
            sp = GraphSpace(gr, cfg.decoration, cfg.twist, anti,
                            leg_sgn=cfg.leg_sgn, max_vertex_dim=max_vertex_dim)
            if sp.supported:
                row.append(sp)
        spaces[E] = sorted(row, key=lambda s: s.encoding)
    diffs = {}
    for E in sorted(spaces):
        if E == 0:
            continue
        diffs[E] = _contraction_matrix(spaces[E], spaces.get(E - 1, []), cfg, anti)
    cx = ChainComplexData(g, n, meta, spaces, diffs)
    if check_dsq:
        assert_dsq(cx)
    if cache_dir:
        save_cache(cx, cache_path(cache_dir, meta))
    return cx


def _contraction_matrix(source_spaces, target_spaces, cfg, anti):
    tmap = {sp.encoding: sp for sp in target_spaces}
    toffset = {}
    total_rows = 0
    for sp in target_spaces:
        toffset[sp.encoding] = total_rows
        total_rows += sp.dim
    columns = []
    for sp in source_spaces:
        edge_data = [_contract_data(sp, e, cfg, anti)
                     for e in range(sp.graph.num_edges)]
        expressed = {}   # rep tuple -> {global row: Fraction}
        for (key, vec), lift in zip(sp.basis, sp.lifts):
            col = {}
            for t, coeff in lift.items():
                if t not in expressed:
                    contribs = _contract_tuple(sp, edge_data, t, cfg, tmap)
                    entry = {}
                    for tkey, tvec in contribs.items():
                        tsp = tmap[tkey]
                        for i, c in tsp.express(tvec).items():
                            r = toffset[tkey] + i
                            entry[r] = entry.get(r, Fraction(0)) + c
                    expressed[t] = entry
                for r, c in expressed[t].items():
                    val = col.get(r, Fraction(0)) + coeff * c
                    if val:
                        col[r] = val
                    else:
                        col.pop(r, None)
            columns.append({r: c for r, c in col.items() if c})
    return SparseMatrix.from_columns(total_rows, columns)


def assert_dsq(cx: ChainComplexData):
    for E in cx.degrees:
        a = cx.diffs.get(E)
        b = cx.diffs.get(E + 1)
        if a is None or b is None or a.cols == 0 or b.cols == 0:
            continue
        prod = a.matmul(b)
        if not prod.is_zero():
            bad = sorted({c for (_, c) in prod.entries})[0]
            enc, key = cx.basis_info[E + 1][bad]
            raise AssertionError(
                "d^2 != 0 at %d edges, generator %s / %s"
                % (E + 1, enc.decode(), key))


def homology_dims(cx: ChainComplexData, mode: str = "modular",
                  primes=None) -> dict:
    """Homology dimension per degree label.  Euler characteristics of the
    chain and homology gradings always agree."""
    ranks = {}
    for E, m in cx.diffs.items():
        ranks[E] = rank(m, mode=mode, primes=primes) if m.nnz() else 0
    out = {}
    for E in cx.degrees:
        d = cx.dim(E) - ranks.get(E, 0) - ranks.get(E + 1, 0)
        out[cx.degree_label(E)] = d
    return out


def gamma_degree(cx: ChainComplexData, E: int) -> int:
    """Homology degree of the group-homology grading for the Lie sector,
    calibrated as i = 3g + n - 3 - E."""
    return 3 * cx.g + cx.n - 3 - E


def gamma_homology_dims(g: int, n: int, mode: str = "modular") -> dict:
    """Group-homology dimensions {degree i: dim} of one (g, n), computed from
    the Lie sector and re-keyed through the calibrated degree offset."""
    cx = assemble(g, n, "lie")
    h = homology_dims(cx, mode=mode)
    return {gamma_degree(cx, E): d for E, d in h.items()}


def calibrate_lie_degree() -> tuple:
    """Fix the affine degree offset for the Lie sector against the anchor
    complexes and return it.  The single class of the (0,3) corolla sits in
    degree 0, the (0,4) homology in degree 0 at one edge, and the (1,3)
    homology in degrees 0 and 2."""
    anchors = {(0, 3): {0: [0]}, (0, 4): {1: [0]}, (1, 3): {1: [2], 3: [0]}}
    for (g, n), expect in anchors.items():
        cx = assemble(g, n, "lie")
        h = homology_dims(cx, mode="exact")
        nonzero = {E for E, d in h.items() if d}
        want = set(expect)
        if nonzero != want:
            raise AssertionError("lie degree calibration failed at (%d,%d): %s"
                                 % (g, n, h))
        for E, degs in expect.items():
            assert 3 * g + n - 3 - E == degs[0]
    return (3, 1, -3)


# ---------------------------------------------------------------------------
# sub and quotient complexes

def is_egg_graph(graph) -> bool:
    """A graph containing a vertex of positive genus or one adjacent to a
    tadpole (with degree-zero labels, either makes that vertex an egg)."""
    if any(x > 0 for x in graph.genus):
        return True
    return any(graph.adj[h1] == graph.adj[h2] for h1, h2 in graph.edge_pairs())


def egg_subcomplex(cx: ChainComplexData) -> ChainComplexData:
    """Span of the generators whose graph contains an egg; closed under the
    expansion differential."""
    if cx.meta.get("sector") != "com-bar":
        raise ValueError("egg subcomplex requires the com-bar sector")
    sel = {}
    spaces = {}
    for E in cx.degrees:
        idx = []
        row = []
        pos = 0
        for sp in cx.spaces[E]:
            if is_egg_graph(sp.graph):
                idx.extend(range(pos, pos + sp.dim))
                row.append(sp)
            pos += sp.dim
        sel[E] = idx
        spaces[E] = row
    diffs = {}
    for E, m in cx.diffs.items():
        rows = sel.get(E - 1, [])
        cols = sel.get(E, [])
        rmap = {r: i for i, r in enumerate(rows)}
        cmap = {c: j for j, c in enumerate(cols)}
        ent = {}
        col_set = set(cols)
        row_set = set(rows)
        for (r, c), v in m.entries.items():
            if c in cmap:
                if r not in rmap:
                    raise AssertionError("egg span not closed under contraction")
                ent[(rmap[r], cmap[c])] = v
            elif r in row_set:
                raise AssertionError("egg span not closed under expansion")
        diffs[E] = SparseMatrix(len(rows), len(cols), ent)
    meta = dict(cx.meta)
    meta["subcomplex"] = "egg"
    return ChainComplexData(cx.g, cx.n, meta, spaces, diffs)


def gc2_complex(g: int, n: int, **kw) -> ChainComplexData:
    """Tadpole-free, genus-zero-vertex graphs with the expansion differential;
    degrees reported as E - 2g."""
    return assemble(g, n, "gc2", **kw)


def quotient_dims_match_gc2(g, n, max_edges=None) -> bool:
    """Dimensions of FT(com-bar) modulo its egg span against the directly
    assembled quotient, degree by degree."""
    full = assemble(g, n, "com-bar", max_edges=max_edges)
    eggs = egg_subcomplex(full)
    quo = gc2_complex(g, n, max_edges=max_edges)
    for E in full.degrees:
        if full.dim(E) - eggs.dim(E) != quo.dim(E):
            return False
    return True


def _flat(cx):
    for E in cx.degrees:
        for sp in cx.spaces[E]:
            yield E, sp


# ---------------------------------------------------------------------------
# leg relabeling and the anti-invariant projector on assembled complexes

def _offsets(cx, E):
    off = 0
    for sp in cx.spaces[E]:
        yield sp, off
        off += sp.dim


def _leg_relabel_data(sp, perm, smap):
    g = sp.graph
    new_legs = [None] * g.num_legs
    for i, h in enumerate(g.legs):
        new_legs[perm[i] - 1] = h
    moved = g._replace(legs=tuple(new_legs))
    cf = canonical_form(moved, sp.anti)
    sign = relabel_sign(moved, cf.relabel, sp.twist, cf.graph)
    if sp.anti and sp.leg_sgn:
        sign *= perm_parity(cf.leg_perm)
    tflags = {}
    for w in range(cf.graph.num_vertices):
        for p, f in enumerate(flag_order(cf.graph, w, sp.anti)):
            tflags[f] = (w, p)
    vmaps = []
    for v in range(g.num_vertices):
        ent = [tflags[cf.relabel[f]] for f in sp.flags[v]]
        vmaps.append((ent[0][0], tuple(p for _, p in ent)))
    return cf.encoding, (sign, tuple(vmaps))


def _transport_tuple(sp, transported, tup):
    sign, vmaps = transported
    g = sp.graph
    Vt = max(w for w, _ in vmaps) + 1
    out = {}
    stack = [([None] * Vt, 1)]
    for v, lab in enumerate(tup):
        w, pm = vmaps[v]
        imgs = sp.deco.act(g.genus[v], sp.valences[v], pm, lab)
        nstack = []
        for target, c in stack:
            for lab2, c2 in imgs.items():
                t2 = list(target)
                t2[w] = lab2
                nstack.append((t2, c * c2))
        stack = nstack
    for t2, c in stack:
        if c:
            key = tuple(t2)
            out[key] = out.get(key, 0) + c
    return out


def antiinvariant_subcomplex(cx: ChainComplexData) -> ChainComplexData:
    """Image of the alternating projector (1/n!) sum sgn(s) s over leg
    relabelings, as a complex in its own right.  n = 0 returns the input."""
    import itertools
    n = cx.n
    if n == 0:
        return cx
    use_sgn = sector_config(cx.meta["sector"]).leg_sgn
    perms = list(itertools.permutations(range(1, n + 1)))
    proj = {}
    for E in cx.degrees:
        dim = cx.dim(E)
        acc = SparseMatrix(dim, dim)
        for perm in perms:
            sgn = perm_parity(perm) if use_sgn else 1
            m = leg_action_matrix_single(cx, perm, E)
            acc = _mat_add(acc, m, Fraction(sgn, len(perms)))
        proj[E] = acc
    # check idempotence, then split off the image
    bases = {}
    for E, p in proj.items():
        assert p.matmul(p) == p, "projector not idempotent"
        bases[E] = _column_space(p)
    diffs = {}
    for E in cx.degrees:
        if E == 0:
            continue
        m = cx.diffs.get(E)
        if m is None:
            continue
        diffs[E] = _restrict(m, bases.get(E - 1, []), bases.get(E, []))
    meta = dict(cx.meta)
    meta["anti"] = "projector"
    sub = ChainComplexData.__new__(ChainComplexData)
    sub.g, sub.n = cx.g, cx.n
    sub.meta = meta
    sub.spaces = None
    sub.diffs = diffs
    sub.basis_info = {E: [("anti", i) for i in range(len(bases[E]))]
                      for E in bases}
    return sub


def leg_action_matrix_single(cx, perm, E):
    smap = {}
    off = 0
    for sp in cx.spaces[E]:
        smap[sp.encoding] = (sp, off)
        off += sp.dim
    cols = []
    for sp, off0 in _offsets(cx, E):
        tgt, transported = _leg_relabel_data(sp, perm, smap)
        tsp, toff = smap[tgt]
        sign = transported[0]
        for (key, vec), lift in zip(sp.basis, sp.lifts):
            moved = {}
            for t, c in lift.items():
                for tt, cc in _transport_tuple(sp, transported, t).items():
                    moved[tt] = moved.get(tt, 0) + c * cc
            col = {}
            for i, c in tsp.express(moved).items():
                col[toff + i] = c * sign
            cols.append(col)
    return SparseMatrix.from_columns(cx.dim(E), cols)


def _mat_add(a, b, scale):
    ent = dict(a.entries)
    for k, v in b.entries.items():
        nv = ent.get(k, Fraction(0)) + v * scale
        if nv:
            ent[k] = nv
        else:
            ent.pop(k, None)
    return SparseMatrix(a.rows, a.cols, ent)


def _column_space(m):
    pivots = {}
    for c in range(m.cols):
        col = _reduce_against(pivots, m.column(c))
        if col:
            key = min(col)
            inv = Fraction(1) / col[key]
            col = {k: v * inv for k, v in col.items()}
            for other in pivots.values():
                f = other.get(key)
                if f:
                    for k, v in col.items():
                        nv = other.get(k, Fraction(0)) - f * v
                        if nv:
                            other[k] = nv
                        else:
                            other.pop(k, None)
            pivots[key] = col
    return [pivots[k] for k in sorted(pivots)]


def _restrict(m, target_basis, source_basis):
    """Matrix of m between subspaces given by column lists."""
    by_col = {}
    for (r, c), v in m.entries.items():
        by_col.setdefault(c, {})[r] = v
    cols = []
    for vec in source_basis:
        img = {}
        for c, coeff in vec.items():
            for r, v in by_col.get(c, {}).items():
                nv = img.get(r, Fraction(0)) + coeff * v
                if nv:
                    img[r] = nv
                else:
                    img.pop(r, None)
        cols.append(_exact_coords(target_basis, img))
    return SparseMatrix.from_columns(len(target_basis), cols)


def _exact_coords(basis, vec):
    rows = set()
    for b in basis:
        rows.update(b)
    rows.update(vec)
    rows = sorted(rows)
    rindex = {r: i for i, r in enumerate(rows)}
    m = SparseMatrix(len(rows), len(basis),
                     {(rindex[r], j): v for j, b in enumerate(basis)
                      for r, v in b.items()})
    res = solve_membership(m, {rindex[r]: v for r, v in vec.items()})
    if not res.in_image:
        raise AssertionError("vector not in subspace span")
    return dict(res.coefficients)


# ---------------------------------------------------------------------------
# bigraded support table

def bigraded_support(g: int, n: int, gamma_dims: dict,
                     max_edges: int | None = None) -> dict:
    """Dimension table {(edge count r, internal degree s): dim} of the
    bigraded space underlying the weak Feynman transform of the graded
    vertex labels.  gamma_dims maps (g', n') to {degree: dim}."""
    if max_edges is None:
        max_edges = 3 * g + n - 3
    levels = _enumerate_level_graphs(g, n, max_edges, False)
    missing = set()
    table = {}
    for E in sorted(levels):
        for gr in levels[E]:
            poly = {0: 1}
            for v in range(gr.num_vertices):
                key = (gr.genus[v], gr.valence(v))
                dims = gamma_dims.get(key)
                if dims is None:
                    missing.add(key)
                    continue
                nxt = {}
                for s0, c0 in poly.items():
                    for i, d in dims.items():
                        if d:
                            nxt[s0 + i] = nxt.get(s0 + i, 0) + c0 * d
                poly = nxt
            if missing:
                continue
            for s, c in poly.items():
                if c:
                    table[(E, s)] = table.get((E, s), 0) + c
    if missing:
        raise ValueError("missing gamma dimensions for %s"
                         % sorted(missing))
    return table


def check_support_bounds(g, n, table) -> list:
    """The five vanishing/support statements for a bigraded table.  Returns a
    list of (statement id, ok) pairs; statement III compares the corolla
    entry against the top gamma dimension fed into the table."""
    smax = 2 * g + n - 3
    tot = 3 * g + n - 3
    results = []
    ok1 = all(not (s > smax) or d == 0 for (r, s), d in table.items())
    ok2 = all(not (s == smax and r != 0) or d == 0 for (r, s), d in table.items())
    ok4 = all(not (r + s > tot) or d == 0 for (r, s), d in table.items())
    ok5 = all(not (r + s >= tot and s != 0) or d == 0
              for (r, s), d in table.items())
    results.append(("I", ok1))
    results.append(("II", ok2))
    results.append(("IV", ok4))
    results.append(("V", ok5))
    return results


# ---------------------------------------------------------------------------
# on-disk cache

def cache_key(meta) -> str:
    blob = ";".join("%s=%r" % (k, meta[k]) for k in sorted(meta))
    return hashlib.sha256(blob.encode()).hexdigest()[:24]


def cache_path(cache_dir, meta) -> str:
    return os.path.join(cache_dir, "cx-%s.ghc" % cache_key(meta))


def save_cache(cx: ChainComplexData, path: str):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    lines = [CACHE_VERSION]
    lines.append("meta " + repr(sorted(cx.meta.items())))
    for E in cx.degrees:
        lines.append("level %d %d" % (E, cx.dim(E)))
        for enc, key in cx.basis_info[E]:
            lines.append("gen %s %r" % (enc.decode(), key))
    for E in sorted(cx.diffs):
        m = cx.diffs[E]
        lines.append("matrix %d %d %d %d" % (E, m.rows, m.cols, m.nnz()))
        for r, c, num, den in m.triplets():
            lines.append("%d %d %d %d" % (r, c, num, den))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_cache(path: str) -> ChainComplexData:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if lines[0] != CACHE_VERSION:
        raise ValueError("cache version mismatch")
    meta = dict(literal_eval(lines[1][5:]))
    basis_info = {}
    diffs = {}
    i = 2
    cur = None
    while i < len(lines):
        line = lines[i]
        if line.startswith("level "):
            _, E, _ = line.split()
            cur = int(E)
            basis_info[cur] = []
            i += 1
        elif line.startswith("gen "):
            _, enc, key = line.split(" ", 2)
            basis_info[cur].append((enc.encode(), literal_eval(key)))
            i += 1
        elif line.startswith("matrix "):
            _, E, rows, cols, nnz = line.split()
            ent = {}
            for j in range(int(nnz)):
                r, c, num, den = lines[i + 1 + j].split()
                ent[(int(r), int(c))] = Fraction(int(num), int(den))
            diffs[int(E)] = SparseMatrix(int(rows), int(cols), ent)
            i += 1 + int(nnz)
        else:
            i += 1
    cx = ChainComplexData.__new__(ChainComplexData)
    cx.g, cx.n = meta["g"], meta["n"]
    cx.meta = meta
    cx.spaces = None
    cx.diffs = diffs
    cx.basis_info = basis_info
    return cx
