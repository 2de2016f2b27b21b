import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from forestfire import GraphSpec, spans
from forestfire.graph import UnionFind, torus_labels

from _oracles import bfs_labels_torus


def same_partition(a, b):
    """Two labelings describe the same clusters (0 = vacant in both)."""
    if not np.array_equal(a == 0, b == 0):
        return False
    pairs = set(zip(a[a > 0].tolist(), b[b > 0].tolist()))
    return len(pairs) == len({p[0] for p in pairs}) == len({p[1] for p in pairs})


def test_validation():
    with pytest.raises(ValueError):
        GraphSpec(((1,), ()))  # not symmetric
    with pytest.raises(ValueError):
        GraphSpec(((), ()))  # not connected
    with pytest.raises(ValueError):
        GraphSpec(((1,), (0,)), origin=2)
    with pytest.raises(ValueError):
        GraphSpec(((3,), (0,)))
    with pytest.raises(ValueError):
        GraphSpec(())


def test_path_and_torus_shapes():
    p = GraphSpec.path(4)
    assert p.adjacency == ((1,), (0, 2), (1, 3), (2,))
    assert p.far_vertex() == 3
    t = GraphSpec.torus(4, 5)
    assert t.n_vertices == 20 and all(len(a) == 4 for a in t.adjacency)
    assert t.far_vertex() == 2 * 5 + 2
    assert t.distances(0)[t.far_vertex()] == 4
    with pytest.raises(ValueError):
        GraphSpec.torus(2)


def test_cluster_of_treats_vertex_as_occupied():
    p = GraphSpec.path(5)
    occ = np.array([False, True, True, False, True])
    assert p.cluster_of(0, occ).tolist() == [0, 1, 2]
    t = GraphSpec.torus(3)
    assert t.cluster_of(4, np.zeros(9, bool)).tolist() == [4]


def test_torus_wraps_across_seams():
    mask = np.zeros((5, 5), bool)
    mask[2, 0] = mask[2, 4] = True
    lab = torus_labels(mask)
    assert lab[2, 0] == lab[2, 4] == 1
    mask[:, 1] = True
    g = GraphSpec.torus(5)
    lab = g.labels(mask.ravel())
    members = np.flatnonzero(lab == lab[1])
    assert not spans(g, members)  # one column, all rows
    full = np.ones(25, bool)
    assert spans(g, np.flatnonzero(g.labels(full) == 1))
    assert spans(GraphSpec.path(3), np.array([0]))


@given(arrays(bool, st.tuples(st.integers(3, 9), st.integers(3, 9))))
@settings(max_examples=100, deadline=None)
def test_torus_labels_match_bfs(mask):
    lab = torus_labels(mask)
    assert same_partition(lab, bfs_labels_torus(mask))
    # labels are 1..k in row-major order of first appearance
    seen = [v for v in lab.ravel().tolist() if v]
    firsts = list(dict.fromkeys(seen))
    assert firsts == list(range(1, len(firsts) + 1))


@given(st.integers(2, 12), st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11)), max_size=30),
       st.data())
@settings(max_examples=60, deadline=None)
def test_generic_labels_are_components(n, extra, data):
    edges = [(i, i + 1) for i in range(n - 1)] + [(a % n, b % n) for a, b in extra]
    g = GraphSpec.from_edges(n, edges)
    occ = np.array(data.draw(st.lists(st.booleans(), min_size=n, max_size=n)))
    lab = g.labels(occ)
    for v in range(n):
        if occ[v]:
            assert set(np.flatnonzero(lab == lab[v]).tolist()) == set(g.cluster_of(v, occ).tolist())
        else:
            assert lab[v] == 0


def test_union_find():
    uf = UnionFind(5)
    uf.union(0, 1)
    uf.union(3, 4)
    uf.union(1, 4)
    r = uf.roots()
    assert r[0] == r[1] == r[3] == r[4] != r[2]
