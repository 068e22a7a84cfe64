"""Cyclic Lie words on the flags of a vertex.

A vertex of valence k carries the space of binary trees with leaves the k
flags (one internal trivalent vertex structure with cyclic orders), modulo
antisymmetry and the Jacobi identity.  Its dimension is (k-2)!.

Working model: flags are positions 0..k-1, position 0 is the output and
position 1 the anchor.  Normal-form basis words are tuples
(1, p2, ..., p_{k-1}) standing for the left-normed bracket
[[...[[1, p2], p3]...], p_{k-1}] with output 0.  Coordinates of an arbitrary
bracket are read off its associative expansion: the coefficient of a word
starting with the anchor letter is the coefficient of that basis word.
Moving the output is done by re-rooting the underlying unrooted tree.
"""

from __future__ import annotations

import itertools
from functools import lru_cache


def word_to_tree(word):
    """Left-normed bracket tree of a basis word."""
    t = word[0]
    for p in word[1:]:
        t = (t, p)
    return t


@lru_cache(maxsize=1 << 18)
def expand(tree):
    """Associative expansion of a bracket tree: word tuple -> int coefficient."""
    if isinstance(tree, int):
        return {(tree,): 1}
    left = expand(tree[0])
    right = expand(tree[1])
    out = {}
    for u, cu in left.items():
        for v, cv in right.items():
            w = u + v
            out[w] = out.get(w, 0) + cu * cv
            w = v + u
            out[w] = out.get(w, 0) - cu * cv
    return out


def extract(tree, anchor):
    """Coordinates in the left-normed basis anchored at `anchor`."""
    return {w: c for w, c in expand(tree).items() if w[0] == anchor and c != 0}


def _relabel(tree, mapping):
    if isinstance(tree, int):
        return mapping[tree]
    return (_relabel(tree[0], mapping), _relabel(tree[1], mapping))


# ---------------------------------------------------------------------------
# unrooted trees with cyclic orders, for re-rooting and grafting

def _to_adj(tree, output, prefix, nodes, counter):
    def build(t, parent):
        if not isinstance(t, tuple):
            nodes[("leaf", t)] = [parent]
            return ("leaf", t)
        nid = (prefix, next(counter))
        entry = [parent, None, None]
        nodes[nid] = entry
        entry[1] = build(t[0], nid)
        entry[2] = build(t[1], nid)
        return nid
    root = build(tree, ("leaf", output))
    nodes[("leaf", output)] = [root]
    return nodes


def _from_adj(nodes, new_output):
    def read(nid, parent):
        if nid[0] == "leaf":
            return nid[1]
        nb = nodes[nid]
        i = nb.index(parent)
        return (read(nb[(i + 1) % 3], nid), read(nb[(i + 2) % 3], nid))
    start = nodes[("leaf", new_output)][0]
    return read(start, ("leaf", new_output))


def reroot(tree, output, new_output):
    """Re-express a planted tree (tree spanning the non-output leaves) with a
    different output leaf.  Cyclic orders at internal vertices are preserved."""
    nodes = _to_adj(tree, output, "a", {}, itertools.count())
    return _from_adj(nodes, new_output)


@lru_cache(maxsize=1 << 18)
def act(perm, word):
    """Relabel the flags of a normal-form word by the position bijection
    `perm` and re-normalize.  Returns {basis word: int coefficient}."""
    tree = _relabel(word_to_tree(word), perm)
    if perm[0] != 0:
        tree = reroot(tree, perm[0], 0)
    return extract(tree, 1)


@lru_cache(maxsize=1 << 18)
def graft(word1, glue1, map1, word2, glue2, map2):
    """Join two vertex words along one flag of each.

    map_i sends positions of word i to positions of the merged vertex, with
    None at the glued flag.  The glued leaves (including either output, when
    it is the glued flag) are spliced out and the result is re-rooted at the
    merged output 0.  Returns {basis word: int coefficient}.
    """
    mark1, mark2 = -1, -2
    m1 = tuple(mark1 if p == glue1 else map1[p] for p in range(len(map1)))
    m2 = tuple(mark2 if p == glue2 else map2[p] for p in range(len(map2)))
    t1 = _relabel(word_to_tree(word1), m1)
    t2 = _relabel(word_to_tree(word2), m2)
    counter = itertools.count()
    nodes = {}
    _to_adj(t1, m1[0], "a", nodes, counter)
    _to_adj(t2, m2[0], "b", nodes, counter)
    x = nodes[("leaf", mark1)][0]
    y = nodes[("leaf", mark2)][0]
    nodes[x][nodes[x].index(("leaf", mark1))] = y
    nodes[y][nodes[y].index(("leaf", mark2))] = x
    del nodes[("leaf", mark1)], nodes[("leaf", mark2)]
    merged = _from_adj(nodes, 0)
    return extract(merged, 1)


def basis_words(k):
    """Normal-form words of a valence-k vertex: (k-2)! tuples."""
    if k < 3:
        return ()
    return tuple((1,) + rest
                 for rest in itertools.permutations(range(2, k), k - 2))
