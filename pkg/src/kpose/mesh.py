"""Triangle meshes, shape regularisers, keypoint sampling and label colours."""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import BadCount, IndexOutOfRange, Infeasible, IsolatedVertex, KposeError, ParseError

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TriMesh:
    V: np.ndarray
    F: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.V, dtype=float).reshape(-1, 3)
        F = np.asarray(self.F, dtype=np.int64).reshape(-1, 3)
        if F.size and (F.min() < 0 or F.max() >= len(V)):
            raise IndexOutOfRange("face index out of range")
        if F.size and ((F[:, 0] == F[:, 1]) | (F[:, 1] == F[:, 2]) | (F[:, 0] == F[:, 2])).any():
            raise KposeError("degenerate face with repeated vertex")
        V.setflags(write=False)
        F.setflags(write=False)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "F", F)

    @property
    def n_vertices(self):
        return len(self.V)

    @cached_property
    def edges(self):
        """Unique undirected edges as sorted ``(i, j)`` pairs."""
        e = np.concatenate([self.F[:, [0, 1]], self.F[:, [1, 2]], self.F[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    @cached_property
    def adjacency(self):
        """Symmetric 0/1 vertex adjacency as a CSR matrix."""
        return edges_to_adjacency(self.edges, self.n_vertices)

    def neighbors(self, i):
        A = self.adjacency
        return A.indices[A.indptr[i]:A.indptr[i + 1]]

    def face_centroids(self, V=None):
        V = self.V if V is None else V
        return V[self.F].mean(axis=1)

    def with_vertices(self, V):
        return TriMesh(V, self.F)


def edges_to_adjacency(edges, n):
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    i = np.concatenate([edges[:, 0], edges[:, 1]])
    j = np.concatenate([edges[:, 1], edges[:, 0]])
    A = sp.coo_matrix((np.ones(len(i)), (i, j)), shape=(n, n)).tocsr()
    A.data[:] = 1.0
    return A


# -- Wavefront OBJ -----------------------------------------------------------

def read_obj(path):
    """Parse ``v`` and ``f`` lines of an OBJ file.

    Returns ``(V, F, n_ignored)``.  Polygons are fan-triangulated; texture and
    normal indices (``f 1/2/3 ...``) are dropped.
    """
    verts, faces, face_lines = [], [], []
    ignored = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                try:
                    verts.append([float(x) for x in parts[1:4]])
                except ValueError as exc:
                    raise ParseError(str(exc), lineno) from None
                if len(verts[-1]) != 3:
                    raise ParseError("vertex needs 3 coordinates", lineno)
            elif parts[0] == "f":
                try:
                    idx = [int(p.split("/")[0]) for p in parts[1:]]
                except ValueError as exc:
                    raise ParseError(str(exc), lineno) from None
                if len(idx) < 3:
                    raise ParseError("face needs at least 3 vertices", lineno)
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
                    face_lines.append(lineno)
            else:
                ignored += 1

    n = len(verts)
    F = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    bad = (F < 1) | (F > n)
    if bad.any():
        row = int(np.argmax(bad.any(axis=1)))
        raise IndexOutOfRange(f"face index {F[row][bad[row]][0]} outside 1..{n}", face_lines[row])
    return np.asarray(verts, dtype=float).reshape(-1, 3), F - 1, ignored


def load_obj(path):
    V, F, ignored = read_obj(path)
    if ignored:
        log.warning("%s: ignored %d unsupported OBJ lines", path, ignored)
    return TriMesh(V, F)


def save_obj(mesh, path):
    with open(path, "w") as fh:
        for x, y, z in mesh.V:
            fh.write(f"v {x:.9g} {y:.9g} {z:.9g}\n")
        for a, b, c in mesh.F + 1:
            fh.write(f"f {a} {b} {c}\n")


# -- Keypoints ---------------------------------------------------------------

@dataclass(frozen=True)
class KeypointSet:
    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(idx) < 3:
            raise BadCount(f"need at least 3 keypoints, got {len(idx)}")
        if len(set(idx)) != len(idx):
            raise KposeError("keypoint indices must be distinct")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def positions(self, mesh):
        if max(self.indices) >= mesh.n_vertices or min(self.indices) < 0:
            raise IndexOutOfRange("keypoint index outside mesh")
        return mesh.V[list(self.indices)]


def farthest_point_order(points, n, first):
    """Greedy farthest-point ordering starting from index ``first``.

    Ties go to the lowest index.
    """
    points = np.asarray(points, dtype=float)
    chosen = [int(first)]
    d = np.linalg.norm(points - points[first], axis=1)
    for _ in range(n - 1):
        nxt = int(np.argmax(d))
        chosen.append(nxt)
        d = np.minimum(d, np.linalg.norm(points - points[nxt], axis=1))
    return np.array(chosen)


def farthest_point_sampling(mesh, n, seed=0):
    """Pick ``n`` well-spread vertices; the first one is drawn from ``seed``.

    ``mesh`` may be a :class:`TriMesh` or a bare ``(M, 3)`` point array.
    """
    points = mesh.V if isinstance(mesh, TriMesh) else np.asarray(mesh, dtype=float)
    if not 3 <= n <= len(points):
        raise BadCount(f"keypoint count {n} outside [3, {len(points)}]")
    first = np.random.default_rng(seed).integers(len(points))
    return KeypointSet(farthest_point_order(points, n, first))


# -- Regularisers ------------------------------------------------------------

def graph_laplacian_loss(V, adjacency):
    """Mean squared distance of each vertex to the centroid of its neighbours."""
    V = np.asarray(V, dtype=float)
    deg = np.asarray(adjacency.sum(axis=1)).ravel()
    if (deg == 0).any():
        raise IsolatedVertex(f"vertex {int(np.argmin(deg))} has no neighbours")
    delta = V - (adjacency @ V) / deg[:, None]
    return float(np.mean(np.sum(delta * delta, axis=1)))


def laplacian_loss(mesh, V=None):
    return graph_laplacian_loss(mesh.V if V is None else V, mesh.adjacency)


def deformation_loss(dV):
    dV = np.asarray(dV, dtype=float).reshape(-1, 3)
    if len(dV) == 0:
        return 0.0
    return float(np.mean(np.linalg.norm(dV, axis=1)))


# -- Label colours -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ColorMap:
    colors: np.ndarray
    epsilon: float

    def __post_init__(self):
        c = np.asarray(self.colors, dtype=float).reshape(-1, 3)
        object.__setattr__(self, "colors", c)
        if len(c) > 1 and min_pairwise_distance(c) <= 2 * self.epsilon:
            raise Infeasible("colours closer than 2*epsilon")

    def __len__(self):
        return len(self.colors)

    def permuted(self, perm):
        return ColorMap(self.colors[np.asarray(perm)], self.epsilon)


def min_pairwise_distance(points):
    points = np.asarray(points, dtype=float)
    i, j = np.triu_indices(len(points), k=1)
    return float(np.linalg.norm(points[i] - points[j], axis=1).min())


COLOR_LEVELS = 17


def make_color_map(n, epsilon=0.05, seed=0):
    """``n`` colours more than ``2 * epsilon`` apart, avoiding black.

    Greedy farthest-point selection over an RGB lattice; black is the render
    background, so lattice points within ``2 * epsilon`` of it are excluded.
    """
    if n < 1:
        raise BadCount("need at least one colour")
    axis = np.linspace(0.0, 1.0, COLOR_LEVELS)
    lattice = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    lattice = lattice[np.linalg.norm(lattice, axis=1) > 2 * epsilon]
    if n > len(lattice):
        raise Infeasible(f"lattice has only {len(lattice)} usable colours")
    first = np.random.default_rng(seed).integers(len(lattice))
    colors = lattice[farthest_point_order(lattice, n, first)]
    if n > 1 and min_pairwise_distance(colors) <= 2 * epsilon:
        raise Infeasible(f"cannot place {n} colours {2 * epsilon} apart")
    return ColorMap(colors, epsilon)


def face_labels(mesh, keypoints):
    """Label each face with the keypoint nearest its centroid (ties: lowest id)."""
    idx = list(keypoints.indices) if isinstance(keypoints, KeypointSet) else list(keypoints)
    kp = mesh.V[idx]
    c = mesh.face_centroids()
    d2 = ((c[:, None, :] - kp[None, :, :]) ** 2).sum(axis=-1)
    return np.argmin(d2, axis=1)
