import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpose.errors import BadCount, IndexOutOfRange, Infeasible, IsolatedVertex, ParseError
from kpose.mesh import (ColorMap, KeypointSet, TriMesh, deformation_loss, edges_to_adjacency, face_labels,
                        farthest_point_sampling, graph_laplacian_loss, laplacian_loss, load_obj, make_color_map,
                        min_pairwise_distance, read_obj, save_obj)
from kpose.synth import icosphere

TETRA = """# tetrahedron
v 0 0 0
v 1 0 0
v 0 1 0
v 0 0 1
vn 0 0 1
f 1 3 2
f 1 2 4
f 1 4 3
f 2 3 4
"""


def test_load_tetrahedron(tmp_path):
    p = tmp_path / "t.obj"
    p.write_text(TETRA)
    V, F, ignored = read_obj(p)
    assert ignored == 1
    mesh = load_obj(p)
    assert mesh.n_vertices == 4 and len(mesh.F) == 4
    assert sorted(mesh.neighbors(0).tolist()) == [1, 2, 3]
    A = mesh.adjacency
    assert (A != A.T).nnz == 0


def test_obj_zero_index_rejected(tmp_path):
    p = tmp_path / "bad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n")
    with pytest.raises(IndexOutOfRange) as err:
        load_obj(p)
    assert err.value.line == 4


def test_obj_parse_error_has_line(tmp_path):
    p = tmp_path / "bad.obj"
    p.write_text("v 0 0 0\nv 1 zero 0\n")
    with pytest.raises(ParseError) as err:
        load_obj(p)
    assert err.value.line == 2


def test_obj_polygon_and_slash_faces(tmp_path):
    p = tmp_path / "quad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3 4/4/4\n")
    assert load_obj(p).F.tolist() == [[0, 1, 2], [0, 2, 3]]


def test_obj_round_trip_icosphere(tmp_path):
    mesh = icosphere(3)
    assert mesh.n_vertices == 642
    a, b = tmp_path / "a.obj", tmp_path / "b.obj"
    save_obj(mesh, a)
    loaded = load_obj(a)
    expected = np.vectorize(lambda x: float(f"{x:.9g}"))(mesh.V)
    assert np.array_equal(loaded.V, expected)
    assert np.array_equal(loaded.F, mesh.F)
    save_obj(loaded, b)
    assert a.read_bytes() == b.read_bytes()


def test_trimesh_validation():
    with pytest.raises(IndexOutOfRange):
        TriMesh(np.zeros((3, 3)), [[0, 1, 3]])
    with pytest.raises(ValueError):
        TriMesh(np.zeros((3, 3)), [[0, 1, 1]])


def test_fps_all_vertices():
    mesh = icosphere(0)
    kp = farthest_point_sampling(mesh, 12, seed=2)
    assert sorted(kp.indices) == list(range(12))


def test_fps_bad_counts():
    mesh = icosphere(0)
    with pytest.raises(BadCount):
        farthest_point_sampling(mesh, 1, 0)
    with pytest.raises(BadCount):
        farthest_point_sampling(mesh, 13, 0)


def _greedy_runs(points, start, n):
    """Every greedy farthest-point sequence from ``start``, all tie branches."""
    runs = [[start]]
    for _ in range(n - 1):
        nxt = []
        for run in runs:
            d = np.min([np.linalg.norm(points - points[r], axis=1) for r in run], axis=0)
            for cand in np.flatnonzero(np.isclose(d, d.max())):
                nxt.append(run + [int(cand)])
        runs = nxt
    return runs


def test_fps_square_picks_corners():
    pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0], [0.5, 0.5, 0]], dtype=float)
    for start in range(4):
        for run in _greedy_runs(pts, start, 4):
            assert sorted(run) == [0, 1, 2, 3]
    corner_seeds = 0
    for seed in range(40):
        kp = farthest_point_sampling(pts, 4, seed)
        if kp.indices[0] != 4:
            corner_seeds += 1
            assert sorted(kp.indices) == [0, 1, 2, 3]
    assert corner_seeds > 0


def test_fps_deterministic_and_monotone():
    mesh = icosphere(2)
    assert farthest_point_sampling(mesh, 20, 5) == farthest_point_sampling(mesh, 20, 5)
    prev = np.inf
    for n in range(3, 40):
        kp = farthest_point_sampling(mesh, n, 5)
        d = min_pairwise_distance(kp.positions(mesh))
        assert d <= prev + 1e-12
        prev = d


def test_keypointset_invariants():
    with pytest.raises(BadCount):
        KeypointSet([0, 1])
    with pytest.raises(ValueError):
        KeypointSet([0, 1, 1])


def naive_laplacian(V, edges):
    nbrs = {i: set() for i in range(len(V))}
    for a, b in edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    total = 0.0
    for i in range(len(V)):
        c = sum(V[j] for j in nbrs[i]) / len(nbrs[i])
        total += float(((V[i] - c) ** 2).sum())
    return total / len(V)


def test_laplacian_examples():
    mesh = icosphere(1)
    assert laplacian_loss(mesh, np.ones((mesh.n_vertices, 3))) == 0
    V = np.array([[0.0, 0, 0], [1, 0, 0], [2, 0, 0]])
    A = edges_to_adjacency([[0, 1], [1, 2]], 3)
    assert graph_laplacian_loss(V, A) == pytest.approx(2 / 3, abs=1e-15)


def test_laplacian_matches_naive(rng):
    mesh = icosphere(2)
    V = mesh.V + 0.1 * rng.normal(size=mesh.V.shape)
    assert abs(laplacian_loss(mesh, V) - naive_laplacian(V, mesh.edges)) < 1e-12


def test_laplacian_translation_and_scale(rng):
    mesh = icosphere(2)
    V = mesh.V + 0.1 * rng.normal(size=mesh.V.shape)
    base = laplacian_loss(mesh, V)
    assert abs(laplacian_loss(mesh, V + [3.0, -2.0, 1.0]) - base) < 1e-12
    assert laplacian_loss(mesh, 2.5 * V) == pytest.approx(2.5 ** 2 * base, rel=1e-12)


def test_laplacian_isolated_vertex():
    A = edges_to_adjacency([[0, 1]], 3)
    with pytest.raises(IsolatedVertex):
        graph_laplacian_loss(np.zeros((3, 3)), A)


def test_deformation_loss(rng):
    assert deformation_loss(np.zeros((10, 3))) == 0
    assert deformation_loss([[3, 4, 0]]) == 5
    dV = rng.normal(size=(50, 3))
    naive = sum(np.sqrt(sum(c * c for c in v)) for v in dV) / len(dV)
    assert abs(deformation_loss(dV) - naive) < 1e-12
    assert deformation_loss(4 * dV) == pytest.approx(4 * deformation_loss(dV), rel=1e-12)


@pytest.mark.parametrize("n", [1, 2, 32, 100])
def test_color_map_separation(n):
    cmap = make_color_map(n, 0.05, seed=3)
    assert len(cmap) == n
    for a, b in itertools.combinations(cmap.colors, 2):
        assert np.linalg.norm(a - b) > 0.1
    # background black stays distinguishable
    assert (np.linalg.norm(cmap.colors, axis=1) > 0.1).all()
    assert ((cmap.colors >= 0) & (cmap.colors <= 1)).all()


def test_color_map_deterministic_and_infeasible():
    assert np.array_equal(make_color_map(10, 0.05, 1).colors, make_color_map(10, 0.05, 1).colors)
    with pytest.raises(Infeasible):
        make_color_map(40, 0.3, 0)
    with pytest.raises(Infeasible):
        ColorMap([[1, 0, 0], [1, 0.05, 0]], 0.05)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 60), st.floats(0.01, 0.1), st.integers(0, 1000))
def test_color_map_invariant_property(n, eps, seed):
    try:
        cmap = make_color_map(n, eps, seed)
    except Infeasible:
        return
    if n > 1:
        assert min_pairwise_distance(cmap.colors) > 2 * eps


def test_face_labels():
    mesh = icosphere(3)
    assert (face_labels(mesh, [5]) == 0).all()
    top = int(np.argmax(mesh.V[:, 2]))
    bottom = int(np.argmin(mesh.V[:, 2]))
    labels = face_labels(mesh, [top, bottom])
    c = mesh.face_centroids()
    d_top = np.linalg.norm(c - mesh.V[top], axis=1)
    d_bot = np.linalg.norm(c - mesh.V[bottom], axis=1)
    assert (labels[d_top < d_bot] == 0).all() and (labels[d_bot < d_top] == 1).all()
    assert ((labels == 0) == (c[:, 2] > 0))[np.abs(c[:, 2]) > 1e-9].all()
    kp = farthest_point_sampling(mesh, 16, 0)
    labels = face_labels(mesh, kp)
    assert labels.min() >= 0 and labels.max() < 16
