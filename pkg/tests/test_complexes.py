"""Assembled complexes: anchor dimensions, d^2, eggs, quotients,
anti-invariants, bigraded support, cache round trips.

Expected homology values below were frozen from two-generator hand
computations (the (1,1) and (0,4) complexes), the hook-length dimensions of
the one-row-plus-column shapes, and Euler-characteristic cross-checks.
"""

from fractions import Fraction
from math import comb

import pytest

from graphhom.complexes import (
    antiinvariant_subcomplex,
    assemble,
    assert_dsq,
    bigraded_support,
    calibrate_lie_degree,
    cache_path,
    check_support_bounds,
    egg_subcomplex,
    gamma_degree,
    gamma_homology_dims,
    gc2_complex,
    homology_dims,
    is_egg_graph,
    load_cache,
    quotient_dims_match_gc2,
    save_cache,
)


def test_combar_1_1():
    cx = assemble(1, 1, "com-bar")
    assert cx.dims() == {0: 1, 1: 1}
    assert homology_dims(cx, mode="exact") == {0: 0, 1: 0}


def test_com_0_4():
    cx = assemble(0, 4, "com")
    assert cx.dims() == {0: 1, 1: 3}
    assert homology_dims(cx, mode="exact") == {0: 0, 1: 2}


def test_lie_0_4_single_class():
    cx = assemble(0, 4, "lie")
    h = homology_dims(cx, mode="exact")
    nonzero = {E: d for E, d in h.items() if d}
    assert nonzero == {1: 1}


def test_zero_differential_complex():
    # a complex concentrated in one degree has homology equal to its basis
    cx = assemble(0, 3, "lie")
    assert cx.dims() == {0: 1}
    assert homology_dims(cx, mode="exact") == {0: 1}


@pytest.mark.parametrize("g,n", [(1, 3), (1, 4), (1, 5)])
def test_lie_genus1_pattern(g, n):
    cx = assemble(g, n, "lie")
    h = homology_dims(cx)
    expect = {n - i: comb(n - 1, i) for i in range(0, n, 2)}
    assert {E: d for E, d in h.items() if d} == expect
    # degree calibration sends E to i = 3g + n - 3 - E
    for E in expect:
        assert gamma_degree(cx, E) == n - E


def test_calibration_constant():
    assert calibrate_lie_degree() == (3, 1, -3)


def test_euler_characteristic():
    for args in [(1, 2, "com-bar"), (1, 3, "lie"), (2, 1, "com-bar")]:
        cx = assemble(*args)
        h = homology_dims(cx, mode="exact")
        chi_c = sum((-1) ** E * d for E, d in cx.dims().items())
        chi_h = sum((-1) ** cx.degree_label(E) * h[cx.degree_label(E)]
                    for E in cx.degrees)
        assert chi_c == chi_h


# ---------------------------------------------------------------------------
# eggs and the quotient

def test_egg_1_1_whole_complex():
    cx = assemble(1, 1, "com-bar")
    eggs = egg_subcomplex(cx)
    assert eggs.dims() == cx.dims()


def test_egg_homology_vanishes():
    for (g, n) in [(1, 1), (1, 2), (1, 3), (2, 0), (2, 1)]:
        eggs = egg_subcomplex(assemble(g, n, "com-bar"))
        h = homology_dims(eggs, mode="exact")
        assert all(v == 0 for v in h.values()), (g, n, h)


def test_egg_requires_combar():
    with pytest.raises(ValueError):
        egg_subcomplex(assemble(1, 2, "com"))


@pytest.mark.parametrize("g,n", [(1, 2), (1, 3), (2, 0), (2, 2)])
def test_gc2_matches_quotient_dims(g, n):
    assert quotient_dims_match_gc2(g, n)


def test_gc2_contains_theta_shapes():
    # every theta-shaped trivalent graph of type (2, n) sits in the top level
    cx = gc2_complex(2, 2)
    top = cx.degrees[-1]
    assert cx.dim(top) == 1   # [0,1,1]-shape is the only surviving one at n=2
    assert cx.degree_label(top) == top - 4


def test_gc2_rejects_genus_zero():
    with pytest.raises(ValueError):
        gc2_complex(0, 5)


def test_parallel_edge_generators_die():
    # double edge between trivalent genus-0 vertices is killed by orientation
    cx = assemble(1, 2, "gc2")
    # the only candidate graph at two edges is the double edge; it must die
    assert cx.dim(2) == 0


def test_is_egg_graph():
    from graphhom.modgraph import make_graph
    assert is_egg_graph(make_graph([1], [], [0, 0, 0]))
    assert is_egg_graph(make_graph([0], [(0, 0)], [0]))
    assert not is_egg_graph(make_graph([0, 0], [(0, 1)], [0, 0, 1, 1]))


# ---------------------------------------------------------------------------
# anti-invariants

def test_anti_n1_isomorphic():
    cx = assemble(1, 1, "com-bar")
    sub = antiinvariant_subcomplex(cx)
    assert sub.dims() == cx.dims()
    assert homology_dims(sub, mode="exact") == homology_dims(cx, mode="exact")


def test_anti_n0_identity():
    cx = assemble(2, 0, "com-bar")
    assert antiinvariant_subcomplex(cx) is cx


@pytest.mark.parametrize("g,n,sector", [(1, 2, "com-bar"), (1, 3, "com-bar"),
                                        (0, 4, "lie"), (1, 3, "lie"),
                                        (1, 2, "gc2")])
def test_anti_direct_matches_projector(g, n, sector):
    direct = assemble(g, n, sector, anti=True)
    proj = antiinvariant_subcomplex(assemble(g, n, sector))
    assert direct.dims() == proj.dims()
    assert (homology_dims(direct, mode="exact")
            == homology_dims(proj, mode="exact"))


@pytest.mark.parametrize("n", [3, 5])
def test_lie_genus1_anti_single_top_class(n):
    # alternating part of genus-1 homology: one class at gamma degree n-1
    cx = assemble(1, n, "lie", anti=True)
    h = homology_dims(cx, mode="exact")
    nonzero = {E: d for E, d in h.items() if d}
    assert nonzero == {1: 1}
    assert gamma_degree(cx, 1) == n - 1


def test_lie_genus2_anti_vanishes_n4():
    cx = assemble(2, 4, "lie", anti=True)
    h = homology_dims(cx)
    assert all(v == 0 for v in h.values())


# ---------------------------------------------------------------------------
# bigraded support

def _gamma_table(pairs):
    out = {}
    for (g, k) in pairs:
        if g == 0:
            out[(g, k)] = {0: 1}
        else:
            out[(g, k)] = gamma_homology_dims(g, k, mode="exact")
    return out


def test_bigraded_1_3():
    needed = [(0, 3), (0, 4), (0, 5), (1, 1), (1, 2), (1, 3)]
    table = bigraded_support(1, 3, _gamma_table(needed))
    assert table.get((0, 2)) == 1
    assert all(d == 0 for (r, s), d in table.items() if s > 2)
    assert all(d == 0 for (r, s), d in table.items() if s == 2 and r != 0)
    assert all(d == 0 for (r, s), d in table.items() if r + s > 3)
    assert all(d == 0 for (r, s), d in table.items() if r + s >= 3 and s != 0)
    assert all(ok for _, ok in check_support_bounds(1, 3, table))


def test_bigraded_missing_dims():
    with pytest.raises(ValueError, match="missing gamma"):
        bigraded_support(1, 3, {(0, 3): {0: 1}})


# ---------------------------------------------------------------------------
# cache

def test_cache_round_trip(tmp_path):
    cx = assemble(1, 2, "com-bar")
    path = cache_path(str(tmp_path), cx.meta)
    save_cache(cx, path)
    loaded = load_cache(path)
    assert loaded.meta == cx.meta
    assert loaded.basis_info == cx.basis_info
    assert loaded.diffs == cx.diffs
    assert homology_dims(loaded, mode="exact") == homology_dims(cx, mode="exact")
    # byte-identical on re-save
    with open(path, "rb") as fh:
        first = fh.read()
    save_cache(loaded, path)
    with open(path, "rb") as fh:
        assert fh.read() == first


def test_cache_hit_via_assemble(tmp_path):
    a = assemble(1, 2, "com-bar", cache_dir=str(tmp_path))
    b = assemble(1, 2, "com-bar", cache_dir=str(tmp_path))
    assert a.diffs == b.diffs
    assert a.basis_info == b.basis_info


def test_dsq_asserted_everywhere():
    # spot re-check on an assembled complex (already asserted at build time)
    cx = assemble(2, 2, "com-bar")
    assert_dsq(cx)
