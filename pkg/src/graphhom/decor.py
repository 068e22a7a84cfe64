"""Vertex decoration systems.

A decoration system assigns to each (genus, valence) a based vector space
with a symmetric-group action on flag positions, and a composition rule
under edge contraction.  Two systems are used: the trivial one-dimensional
commutative label (optionally supported in positive genus) and cyclic Lie.
All coefficients are exact integers or rationals.
"""

from __future__ import annotations

from . import lie


class ComSystem:
    """One-dimensional trivial labels.  With extended=True every stable
    (genus, valence) carries the label; otherwise only genus 0 does."""

    trivial = True

    def __init__(self, extended):
        self.extended = extended
        self.name = "com-bar" if extended else "com"

    def space_dim(self, genus, valence):
        if genus == 0 or self.extended:
            return 1
        return 0

    def basis(self, genus, valence):
        return (0,) if self.space_dim(genus, valence) else ()

    def act(self, genus, valence, perm, label):
        return {0: 1}

    def contract(self, g1, k1, lab1, glue1, map1, g2, k2, lab2, glue2, map2):
        return {0: 1}

    def contract_loop(self, genus, valence, label, glue1, glue2, posmap):
        # the loop contraction lands in genus+1, supported only when extended
        if self.extended:
            return {0: 1}
        return None


class LieSystem:
    """Cyclic Lie labels: dimension (valence-2)! in genus 0, zero otherwise."""

    trivial = False
    name = "lie"

    def space_dim(self, genus, valence):
        if genus > 0 or valence < 3:
            return 0
        d = 1
        for i in range(2, valence - 1):
            d *= i
        return d

    def basis(self, genus, valence):
        if genus > 0:
            return ()
        return lie.basis_words(valence)

    def act(self, genus, valence, perm, label):
        return lie.act(tuple(perm), label)

    def contract(self, g1, k1, lab1, glue1, map1, g2, k2, lab2, glue2, map2):
        return lie.graft(lab1, glue1, tuple(map1), lab2, glue2, tuple(map2))

    def contract_loop(self, genus, valence, label, glue1, glue2, posmap):
        return None   # the result sits in genus 1, where the space vanishes


def com_system(extended: bool) -> ComSystem:
    return ComSystem(extended)


def lie_system() -> LieSystem:
    return LieSystem()


def lie_act(perm, word):
    """Action of a flag-position permutation on a normal-form word."""
    return lie.act(tuple(perm), tuple(word))


def lie_contract(word1, flag1, word2, flag2, map1=None, map2=None):
    """Graft two vertex words along one flag of each.

    Without explicit position maps the remaining flags of word1 keep their
    positions 0..k1-1 (minus the glued one, compressed) followed by those of
    word2, matching the flag order of the merged vertex of a contraction.
    """
    k1 = len(word1) + 1
    k2 = len(word2) + 1
    if map1 is None or map2 is None:
        new = 0
        map1 = [None] * k1
        for p in range(k1):
            if p != flag1:
                map1[p] = new
                new += 1
        map2 = [None] * k2
        for p in range(k2):
            if p != flag2:
                map2[p] = new
                new += 1
    return lie.graft(tuple(word1), flag1, tuple(map1),
                     tuple(word2), flag2, tuple(map2))
