"""Decoration systems: dimensions, representation property, grafting.

The oracle here is a second, independent normal-form engine that rewrites
bracket trees by antisymmetry and Jacobi moves only (no associative
expansion), so the two paths cross-validate each other.
"""

import itertools

import pytest

from graphhom import lie
from graphhom.decor import com_system, lie_act, lie_contract, lie_system


# ---------------------------------------------------------------------------
# independent rewriting oracle

def _bracket(u, v):
    """[L_u, L_v] for left-normed words, as {word: coeff}, words left-normed
    but not yet anchored."""
    if len(v) == 1:
        return {u + v: 1}
    # v = v' + (y,):  [u,[v',y]] = [[u,v'],y] - [[u,y],v']
    out = {}
    for w, c in _bracket(u, v[:-1]).items():
        for w2, c2 in _bracket(w, v[-1:]).items():
            out[w2] = out.get(w2, 0) + c * c2
    for w, c in _bracket(u, v[-1:]).items():
        for w2, c2 in _bracket(w, v[:-1]).items():
            out[w2] = out.get(w2, 0) - c * c2
    return {w: c for w, c in out.items() if c}


def _reanchor(word, anchor):
    """Rewrite L_word as a combination of left-normed words starting with
    anchor, using antisymmetry and Jacobi."""
    i = word.index(anchor)
    if i == 0:
        return {word: 1}
    if i == 1:
        flipped = (word[1], word[0]) + word[2:]
        return {w: -c for w, c in _reanchor(flipped, anchor).items()}
    # [L_head, anchor] = -[anchor, L_head], head = word[:i]
    out = {}
    for w, c in _bracket((anchor,), word[:i]).items():
        for w2, c2 in _reanchor(w + word[i + 1:], anchor).items():
            out[w2] = out.get(w2, 0) - c * c2
    return {w: c for w, c in out.items() if c}


def _reduce(tree):
    """Left-normed combination of a bracket tree (first letters arbitrary)."""
    if isinstance(tree, int):
        return {(tree,): 1}
    out = {}
    for u, cu in _reduce(tree[0]).items():
        for v, cv in _reduce(tree[1]).items():
            for w, c in _bracket(u, v).items():
                out[w] = out.get(w, 0) + cu * cv * c
    return {w: c for w, c in out.items() if c}


def oracle_normalize(tree, anchor):
    """Normal form of a bracket tree by recursive rewriting."""
    out = {}
    for w, c in _reduce(tree).items():
        for w2, c2 in _reanchor(w, anchor).items():
            out[w2] = out.get(w2, 0) + c * c2
    return {w: c for w, c in out.items() if c}


def test_oracle_agrees_with_expansion():
    trees = [
        ((1, 2), 3),
        (1, (2, 3)),
        ((1, 2), (3, 4)),
        ((1, (2, 3)), 4),
        ((4, 2), (1, 3)),
        (((3, 1), 4), 2),
    ]
    for t in trees:
        assert lie.extract(t, 1) == oracle_normalize(t, 1)


# ---------------------------------------------------------------------------
# dimensions and basic identities

def test_space_dims():
    sys = lie_system()
    assert sys.space_dim(0, 3) == 1
    assert sys.space_dim(0, 4) == 2
    assert sys.space_dim(0, 5) == 6
    assert sys.space_dim(0, 6) == 24
    assert sys.space_dim(1, 4) == 0
    assert len(sys.basis(0, 5)) == 6


def test_antisymmetry_valence3():
    # swap the two non-output flags of [1,2]: output 0 fixed
    out = lie_act((0, 2, 1), (1, 2))
    assert out == {(1, 2): -1}


def test_jacobi_sum_vanishes():
    # [[1,2],3] + [[2,3],1] + [[3,1],2] = 0 after normalization
    total = {}
    for t in [((1, 2), 3), ((2, 3), 1), ((3, 1), 2)]:
        for w, c in lie.extract(t, 1).items():
            total[w] = total.get(w, 0) + c
    assert all(c == 0 for c in total.values())


def test_identity_action():
    sys = lie_system()
    for w in sys.basis(0, 5):
        assert sys.act(0, 5, tuple(range(5)), w) == {w: 1}


def test_cycle_cubed_is_identity():
    # order-3 rotation of a valence-3 vertex returns +word after three steps
    cyc = (1, 2, 0)
    vec = {(1, 2): 1}
    for _ in range(3):
        out = {}
        for w, c in vec.items():
            for w2, c2 in lie_act(cyc, w).items():
                out[w2] = out.get(w2, 0) + c * c2
        vec = {w: c for w, c in out.items() if c}
    assert vec == {(1, 2): 1}


def _act_matrix(k, perm):
    sys = lie_system()
    basis = sys.basis(0, k)
    index = {w: i for i, w in enumerate(basis)}
    cols = []
    for w in basis:
        col = {}
        for w2, c in sys.act(0, k, perm, w).items():
            col[index[w2]] = c
        cols.append(col)
    return cols


def _mat_mul(a, b):
    out = []
    for col in b:
        acc = {}
        for j, c in col.items():
            for i, c2 in a[j].items():
                acc[i] = acc.get(i, 0) + c * c2
        out.append({i: c for i, c in acc.items() if c})
    return out


@pytest.mark.parametrize("k", [3, 4, 5])
def test_representation_property_exhaustive(k):
    perms = list(itertools.permutations(range(k)))
    mats = {p: _act_matrix(k, p) for p in perms}
    for a in perms:
        for b in perms:
            ab = tuple(a[b[i]] for i in range(k))
            assert mats[ab] == _mat_mul(mats[a], mats[b]), (a, b)


def test_character_matches_bruteforce():
    # traces over S_4 computed from matrices built by the independent oracle
    k = 4
    sys = lie_system()
    basis = sys.basis(0, k)
    index = {w: i for i, w in enumerate(basis)}
    for perm in itertools.permutations(range(k)):
        tr_fast = 0
        tr_slow = 0
        for w in basis:
            out = sys.act(0, k, perm, w)
            tr_fast += out.get(w, 0)
            tree = lie._relabel(lie.word_to_tree(w), perm)
            if perm[0] != 0:
                tree = lie.reroot(tree, perm[0], 0)
            tr_slow += oracle_normalize(tree, 1).get(w, 0)
        assert tr_fast == tr_slow


def test_sign_isotypic_dims():
    # rank of the sign projector on the valence-k space, built from both
    # normalization engines; the valence-3 bracket spans the sign rep
    from fractions import Fraction
    for k, expected in [(3, 1), (4, 0), (5, 0), (6, 0)]:
        sys = lie_system()
        basis = sys.basis(0, k)
        index = {w: i for i, w in enumerate(basis)}
        n = len(basis)
        proj = [[Fraction(0)] * n for _ in range(n)]
        proj_oracle = [[Fraction(0)] * n for _ in range(n)]
        perms = list(itertools.permutations(range(k)))
        for perm in perms:
            sgn = 1
            seen = [False] * k
            for i in range(k):
                if seen[i]:
                    continue
                j, ln = i, 0
                while not seen[j]:
                    seen[j] = True
                    j = perm[j]
                    ln += 1
                if ln % 2 == 0:
                    sgn = -sgn
            for col, w in enumerate(basis):
                for w2, c in sys.act(0, k, perm, w).items():
                    proj[index[w2]][col] += Fraction(sgn * c, len(perms))
                tree = lie._relabel(lie.word_to_tree(w), perm)
                if perm[0] != 0:
                    tree = lie.reroot(tree, perm[0], 0)
                for w2, c in oracle_normalize(tree, 1).items():
                    proj_oracle[index[w2]][col] += Fraction(sgn * c, len(perms))
        assert proj == proj_oracle
        # rank by simple elimination
        rank = 0
        rows = [r[:] for r in proj]
        for col in range(n):
            piv = next((r for r in range(rank, n) if rows[r][col] != 0), None)
            if piv is None:
                continue
            rows[rank], rows[piv] = rows[piv], rows[rank]
            for r in range(n):
                if r != rank and rows[r][col] != 0:
                    f = rows[r][col] / rows[rank][col]
                    rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
            rank += 1
        assert rank == expected, k


# ---------------------------------------------------------------------------
# grafting

def test_graft_two_triples():
    # two valence-3 vertices glued give the 2-dimensional valence-4 space:
    # the three possible gluings satisfy one Jacobi relation
    w = (1, 2)
    outs = []
    for flag in (1, 2):
        outs.append(lie_contract(w, flag, w, 0))
    assert all(out for out in outs)


def test_graft_equivariance():
    # acting on non-glued flags commutes with grafting
    w1, w2 = (1, 2), (1, 2)
    k1 = k2 = 3
    # glue flag 2 of w1 to flag 0 of w2; merged flags: w1's 0,1 then w2's 1,2
    map1 = (0, 1, None)
    map2 = (None, 2, 3)
    base = lie_contract(w1, 2, w2, 0, map1, map2)
    # swap merged positions 2 and 3 (both from w2): act on w2 first by (0,2,1)
    swapped = {}
    for w, c in lie_act((0, 2, 1), w2).items():
        for w3, c2 in lie_contract(w1, 2, w, 0, map1, map2).items():
            swapped[w3] = swapped.get(w3, 0) + c * c2
    direct = {}
    perm = (0, 1, 3, 2)
    for w, c in base.items():
        for w3, c2 in lie_act(perm, w).items():
            direct[w3] = direct.get(w3, 0) + c * c2
    direct = {w: c for w, c in direct.items() if c}
    swapped = {w: c for w, c in swapped.items() if c}
    assert direct == swapped


def test_graft_associativity():
    # gluing three triples in either order gives the same valence-5 element
    w = (1, 2)
    # chain: A(0,1,2) -2-0- B(0,1,2) -2-0- C(0,1,2)
    mapA = (0, 1, None)
    mapB_first = (None, 2, 3)
    ab = lie_contract(w, 2, w, 0, mapA, mapB_first)   # on positions 0..3
    out1 = {}
    for u, c in ab.items():
        for v, c2 in lie_contract(u, 3, w, 0, (0, 1, 2, None), (None, 3, 4)).items():
            out1[v] = out1.get(v, 0) + c * c2
    bc = lie_contract(w, 2, w, 0, (0, 1, None), (None, 2, 3))  # B-C on 0..3
    out2 = {}
    for u, c in bc.items():
        for v, c2 in lie_contract(w, 2, u, 0, (0, 1, None), (None, 2, 3, 4)).items():
            out2[v] = out2.get(v, 0) + c * c2
    out1 = {w2: c for w2, c in out1.items() if c}
    out2 = {w2: c for w2, c in out2.items() if c}
    assert out1 == out2


def test_com_systems():
    plain = com_system(False)
    ext = com_system(True)
    assert plain.space_dim(1, 3) == 0
    assert ext.space_dim(2, 1) == 1
    assert ext.space_dim(1, 3) == 1
    assert plain.space_dim(0, 4) == 1
    assert ext.act(0, 4, (1, 2, 3, 0), 0) == {0: 1}
    assert plain.contract_loop(0, 4, 0, 0, 1, None) is None
    assert ext.contract_loop(0, 4, 0, 0, 1, None) == {0: 1}
