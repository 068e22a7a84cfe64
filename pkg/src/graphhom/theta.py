"""The closed-form complex of theta graphs with alternating legs.

A theta graph of type (2, n) has two trivalent junction vertices joined by
three strands carrying a, b, c legs (one per intermediate vertex), plus l
legs on the junctions, a + b + c + l = n.  [a,b,c]^l denotes the class cut
out by ordering legs and edges as: junction legs first, then each strand
traversed from the junction holding the lesser junction leg, a-strand, then
b, then c.  The degree is the edge count a + b + c + 3.

Vanishing: swapping two strands is an odd move, so a = b or b = c kills the
element, as does the junction swap when l = 0 with n odd or l = 2 with n
even.  Normal forms keep 0 <= a < b < c.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from .complexes import flag_order
from .linalg import SparseMatrix, rank, solve_membership
from .modgraph import (
    TwistKind,
    automorphism_elements,
    aut_twist_sign,
    canonical_form,
    make_graph,
    perm_parity,
    relabel_sign,
)


class ThetaElement(NamedTuple):
    a: int
    b: int
    c: int
    l: int
    coeff: Fraction

    @property
    def n(self):
        return self.a + self.b + self.c + self.l

    @property
    def degree(self):
        return self.a + self.b + self.c + 3

    def key(self):
        return (self.a, self.b, self.c, self.l)

    def __str__(self):
        return "%s[%d,%d,%d]^%d" % (
            "" if self.coeff == 1 else "(%s)" % self.coeff,
            self.a, self.b, self.c, self.l)


def normalize(a, b, c, l, coeff=1) -> ThetaElement | None:
    """Sort the strands (each strand transposition is odd, since a strand
    block holds an odd count of edges and legs) and apply vanishing rules."""
    if l not in (0, 1, 2):
        raise ValueError("junction leg count must be 0, 1 or 2")
    n = a + b + c + l
    if l == 0 and n % 2 == 1:
        return None
    if l == 2 and n % 2 == 0:
        return None
    strands = [a, b, c]
    sign = perm_parity(strands)
    strands.sort()
    a, b, c = strands
    if a == b or b == c:
        return None
    coeff = Fraction(coeff) * sign
    if not coeff:
        return None
    return ThetaElement(a, b, c, l, coeff)


def theta_basis(n) -> list:
    """All nonvanishing normal forms with a+b+c+l = n, coefficient one."""
    if n < 4:
        raise ValueError("theta complex degenerates below n = 4")
    out = []
    for l in (0, 1, 2):
        total = n - l
        for a in range(total + 1):
            for b in range(a + 1, total + 1):
                c = total - a - b
                if c <= b:
                    continue
                t = normalize(a, b, c, l)
                if t is not None:
                    out.append(t)
    return sorted(out, key=lambda t: (-t.l, t.key()))


def theta_diff(t: ThetaElement) -> list:
    """Expansion differential: the three-term formula on one junction leg and
    twice that on two junction legs (stated for odd a+b+c only)."""
    if t.l == 0:
        return []
    if t.l == 1:
        terms = [((t.a + 1, t.b, t.c), 1), ((t.a, t.b + 1, t.c), -1),
                 ((t.a, t.b, t.c + 1), 1)]
        new_l = 0
        scale = 1
    else:
        if (t.a + t.b + t.c) % 2 == 0:
            raise ValueError("formula precondition: a+b+c odd when l = 2")
        terms = [((t.a + 1, t.b, t.c), 2), ((t.a, t.b + 1, t.c), -2),
                 ((t.a, t.b, t.c + 1), 2)]
        new_l = 1
        scale = 1
    out = []
    for (a, b, c), s in terms:
        nt = normalize(a, b, c, new_l, t.coeff * s * scale)
        if nt is not None:
            out.append(nt)
    return _merge(out)


def _merge(terms):
    acc = {}
    for t in terms:
        acc[t.key()] = acc.get(t.key(), Fraction(0)) + t.coeff
    return [ThetaElement(*k, coeff=v) for k, v in sorted(acc.items()) if v]


def integration_map(n) -> dict:
    """The isomorphism onto the complex one leg up, for even n:
    [a,b,c]^l goes to [a,b,c]^(l+1) divided by l+1."""
    if n % 2 == 1:
        raise ValueError("integration map is defined for even n")
    out = {}
    for t in theta_basis(n):
        img = normalize(t.a, t.b, t.c, t.l + 1, Fraction(1, t.l + 1))
        assert img is not None
        out[t.key()] = img
    return out


def _diff_matrix(n, deg):
    """Differential from degree deg to deg+1 over the theta basis."""
    basis = theta_basis(n)
    src = [t for t in basis if t.degree == deg]
    dst = [t for t in basis if t.degree == deg + 1]
    index = {t.key(): i for i, t in enumerate(dst)}
    cols = []
    for t in src:
        col = {}
        for out in theta_diff(t):
            col[index[out.key()]] = out.coeff
        cols.append(col)
    return src, dst, SparseMatrix.from_columns(len(dst), cols)


def theta_cohomology(n) -> dict:
    """Cohomology per degree with representative cycles among the top normal
    forms and the image vectors ("relations") entering that degree."""
    basis = theta_basis(n)
    degs = sorted({t.degree for t in basis})
    mats = {}
    for d in degs:
        _, _, m = _diff_matrix(n, d)
        mats[d] = m
    out = {}
    for d in degs:
        dim = sum(1 for t in basis if t.degree == d)
        rk_out = rank(mats[d], mode="exact") if d in mats else 0
        rk_in = rank(mats[d - 1], mode="exact") if d - 1 in mats else 0
        hdim = dim - rk_out - rk_in
        reps = []
        relations = []
        if d - 1 in mats and mats[d - 1].nnz():
            src = [t for t in basis if t.degree == d - 1]
            dst = [t for t in basis if t.degree == d]
            for j, t in enumerate(src):
                col = mats[d - 1].column(j)
                if col:
                    relations.append({dst[i].key(): v for i, v in col.items()})
        if hdim and d == degs[-1]:
            dst = [t for t in basis if t.degree == d]
            img = mats.get(d - 1, SparseMatrix(len(dst), 0))
            chosen = []
            for i, t in enumerate(dst):
                cand = SparseMatrix(len(dst), img.cols + len(chosen), dict(
                    list(img.entries.items())
                    + [((r, img.cols + k), v) for k, vec in enumerate(chosen)
                       for r, v in vec.items()]))
                res = solve_membership(cand, {i: 1})
                if not res.in_image:
                    chosen.append({i: Fraction(1)})
                    reps.append(t.key())
                if len(reps) == hdim:
                    break
        out[d] = (hdim, reps, relations)
    return out


# ---------------------------------------------------------------------------
# concrete graphs and the inclusion

def build_theta_graph(a, b, c, l):
    """Concrete leg-labeled modular graph of [a,b,c]^l with edges listed in
    the traversal order (so the reference edge order is the intended one) and
    legs labeled 1..n in encounter order.  Also returns the parity of the
    unshuffle moving all edges in front of all legs."""
    X, Y = 0, 1
    genus = [0, 0]
    edges = []
    leg_seq = []      # vertices, in encounter order
    tokens = []
    for _ in range(l):
        tokens.append("L")
    if l >= 1:
        leg_seq.append(X)
    if l == 2:
        leg_seq.append(Y)
    vid = 2
    for count in (a, b, c):
        prev = X
        for _ in range(count):
            genus.append(0)
            edges.append((prev, vid))
            tokens.append("E")
            leg_seq.append(vid)
            tokens.append("L")
            prev = vid
            vid += 1
        edges.append((prev, Y))
        tokens.append("E")
    sign = 1
    legs_seen = 0
    for tok in tokens:
        if tok == "L":
            legs_seen += 1
        elif legs_seen % 2 == 1:
            sign = -sign
    graph = make_graph(genus, edges, leg_seq)
    return graph, sign


def anti_class(graph, leg_sgn=True):
    """Alternating class of a concrete leg-labeled graph with its reference
    edge order: (representative encoding, coefficient), or None when the
    class dies.  Standalone version keyed by encodings, for use without an
    assembled complex."""
    cf = canonical_form(graph, True)
    sign = relabel_sign(graph, cf.relabel, TwistKind.EDGE_ORDER, cf.graph)
    if leg_sgn:
        sign *= perm_parity(cf.leg_perm)
    rep = cf.graph
    for aut in automorphism_elements(rep, True):
        chi = aut_twist_sign(rep, aut, TwistKind.EDGE_ORDER)
        if leg_sgn:
            chi *= perm_parity(aut.leg_perm)
        if chi < 0:
            return None
        # legs shuffled inside one vertex act with a sign as well
    for v in range(rep.num_vertices):
        if leg_sgn and sum(1 for h in rep.legs if rep.adj[h] == v) >= 2:
            return None
    return cf.encoding, sign


def theta_class_vector(t: ThetaElement):
    """Anti-class vector {encoding: coefficient} of one theta element."""
    graph, unshuffle = build_theta_graph(t.a, t.b, t.c, t.l)
    cls = anti_class(graph)
    if cls is None:
        return {}
    enc, sign = cls
    return {enc: t.coeff * unshuffle * sign}


def inclusion_vector(cx, t: ThetaElement):
    """Coordinates of one theta element inside an assembled anti-invariant
    genus-2 complex, keyed (edge count, global index).

    The class is scaled by the order of its automorphism group (the orbit-sum
    normalization); this is what turns the transpose-of-contraction matrices
    into the expansion-counted differential of the three-term formula, whose
    coefficients count distinct vertex expansions once each.
    """
    graph, unshuffle = build_theta_graph(t.a, t.b, t.c, t.l)
    E = graph.num_edges
    cf = canonical_form(graph, True)
    sign = relabel_sign(graph, cf.relabel, TwistKind.EDGE_ORDER, cf.graph)
    sign *= perm_parity(cf.leg_perm)
    scale = len(automorphism_elements(cf.graph, True))
    spaces = cx.spaces[E]
    offset = 0
    for sp in spaces:
        if sp.encoding == cf.encoding:
            tup = (0,) * sp.graph.num_vertices
            out = {}
            for i, cc in sp.express({tup: 1}).items():
                out[(E, offset + i)] = cc * t.coeff * unshuffle * sign * scale
            return out
        offset += sp.dim
    return {}


def theta_inclusion(n, cx=None) -> dict:
    """Map from the theta basis into the anti-invariants of the genus-2
    graph complex.  With an assembled complex the vectors carry basis
    coordinates; otherwise they are standalone encoding-keyed class vectors."""
    out = {}
    for t in theta_basis(n):
        if cx is None:
            out[t.key()] = theta_class_vector(t)
        else:
            out[t.key()] = inclusion_vector(cx, t)
    return out


def expansion_image(cx, vec):
    """Apply the expansion differential of an assembled complex to a vector
    keyed (edge count, global index)."""
    out = {}
    for (E, i), coeff in vec.items():
        m = cx.diffs.get(E + 1)
        if m is None:
            continue
        for (r, c), v in m.entries.items():
            if r == i:
                key = (E + 1, c)
                nv = out.get(key, Fraction(0)) + coeff * v
                if nv:
                    out[key] = nv
                else:
                    out.pop(key, None)
    return out


def inclusion_is_chain_map(n, cx) -> bool:
    """The master sign oracle: including then expanding equals applying the
    three-term formula and then including, for every basis element."""
    incl = theta_inclusion(n, cx)
    for t in theta_basis(n):
        lhs = expansion_image(cx, incl[t.key()])
        rhs = {}
        for out in theta_diff(t):
            for k, v in incl[out.key()].items():
                nv = rhs.get(k, Fraction(0)) + v * out.coeff
                if nv:
                    rhs[k] = nv
                else:
                    rhs.pop(k, None)
        if lhs != rhs:
            return False
    return True
