"""Software rasteriser for the orthographic camera, plus the mask distance transform.

Masks are ``(h, w)`` bool arrays, colour images ``(h, w, 3)`` float arrays in
``[0, 1]`` with black reserved for background.  Pixel ``(i, j)`` has its
centre at ``x = (2j + 1)/w - 1``, ``y = (2i + 1)/h - 1``.

Coverage is decided at pixel centres with edge functions that are evaluated
identically (up to sign) by both triangles sharing an edge, so closed meshes
rasterise without cracks or double coverage.
"""
import numpy as np
from numba import njit
from scipy import ndimage

from .camera import camera_depth, project
from .errors import EmptyMesh, ShapeMismatch

BACKGROUND = np.zeros(3)


def to_pixel_coords(uv, w, h):
    """Normalized image coordinates to continuous pixel coordinates (centres on integers)."""
    uv = np.asarray(uv, dtype=float)
    return np.stack([(uv[..., 0] + 1.0) * w / 2.0 - 0.5, (uv[..., 1] + 1.0) * h / 2.0 - 0.5], axis=-1)


def pixel_centers(w, h):
    """Normalized ``(x, y)`` of every pixel centre, shape ``(h, w, 2)``."""
    x = (2.0 * np.arange(w) + 1.0) / w - 1.0
    y = (2.0 * np.arange(h) + 1.0) / h - 1.0
    X, Y = np.meshgrid(x, y)
    return np.stack([X, Y], axis=-1)


def pixel_of(uv, w, h):
    """Row/column of the pixel containing each point; ``-1`` when off-frame."""
    uv = np.asarray(uv, dtype=float).reshape(-1, 2)
    j = np.floor((uv[:, 0] + 1.0) * w / 2.0).astype(np.int64)
    i = np.floor((uv[:, 1] + 1.0) * h / 2.0).astype(np.int64)
    off = (j < 0) | (j >= w) | (i < 0) | (i >= h)
    i[off] = -1
    j[off] = -1
    return i, j


@njit(cache=True)
def _edge(xy, a, b, px, py):
    # canonical vertex order makes E(a->b) == -E(b->a) bit for bit
    if a < b:
        return (xy[b, 0] - xy[a, 0]) * (py - xy[a, 1]) - (xy[b, 1] - xy[a, 1]) * (px - xy[a, 0])
    return -((xy[a, 0] - xy[b, 0]) * (py - xy[b, 1]) - (xy[a, 1] - xy[b, 1]) * (px - xy[b, 0]))


@njit(cache=True)
def _owns(dx, dy):
    # top-left rule: an edge lying exactly on a pixel centre belongs to one side only
    return dy < 0.0 or (dy == 0.0 and dx > 0.0)


@njit(cache=True)
def _rasterize(xy, depth, faces, w, h, use_depth):
    face_id = np.full((h, w), -1, dtype=np.int64)
    bary = np.zeros((h, w, 3))
    zbuf = np.full((h, w), -np.inf)
    for f in range(faces.shape[0]):
        v0, v1, v2 = faces[f, 0], faces[f, 1], faces[f, 2]
        x0, y0 = xy[v0, 0], xy[v0, 1]
        x1, y1 = xy[v1, 0], xy[v1, 1]
        x2, y2 = xy[v2, 0], xy[v2, 1]
        area = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if area == 0.0 or not np.isfinite(area):
            continue
        sgn = 1.0 if area > 0.0 else -1.0
        area *= sgn
        jmin = max(int(np.ceil(min(x0, x1, x2))), 0)
        jmax = min(int(np.floor(max(x0, x1, x2))), w - 1)
        imin = max(int(np.ceil(min(y0, y1, y2))), 0)
        imax = min(int(np.floor(max(y0, y1, y2))), h - 1)
        if jmin > jmax or imin > imax:
            continue
        # edge k is opposite vertex k; direction after orientation fix
        o0 = _owns(sgn * (x2 - x1), sgn * (y2 - y1))
        o1 = _owns(sgn * (x0 - x2), sgn * (y0 - y2))
        o2 = _owns(sgn * (x1 - x0), sgn * (y1 - y0))
        for i in range(imin, imax + 1):
            py = float(i)
            for j in range(jmin, jmax + 1):
                px = float(j)
                e0 = sgn * _edge(xy, v1, v2, px, py)
                if e0 < 0.0 or (e0 == 0.0 and not o0):
                    continue
                e1 = sgn * _edge(xy, v2, v0, px, py)
                if e1 < 0.0 or (e1 == 0.0 and not o1):
                    continue
                e2 = sgn * _edge(xy, v0, v1, px, py)
                if e2 < 0.0 or (e2 == 0.0 and not o2):
                    continue
                b0, b1, b2 = e0 / area, e1 / area, e2 / area
                if use_depth:
                    z = b0 * depth[v0] + b1 * depth[v1] + b2 * depth[v2]
                    if z <= zbuf[i, j]:
                        continue
                    zbuf[i, j] = z
                elif face_id[i, j] >= 0:
                    continue
                face_id[i, j] = f
                bary[i, j, 0] = b0
                bary[i, j, 1] = b1
                bary[i, j, 2] = b2
    return face_id, bary


def rasterize(mesh, pose, w, h, use_depth=True):
    """Per-pixel visible face index (``-1`` for background) and barycentrics.

    With ``use_depth`` the face with the largest camera-frame z wins; equal
    depths keep the lower face index.
    """
    if mesh.n_vertices == 0 or len(mesh.F) == 0:
        raise EmptyMesh("mesh has no faces")
    xy = np.ascontiguousarray(to_pixel_coords(project(pose, mesh.V), w, h))
    depth = np.ascontiguousarray(camera_depth(pose, mesh.V))
    return _rasterize(xy, depth, np.ascontiguousarray(mesh.F), int(w), int(h), use_depth)


def render_silhouette(mesh, pose, w, h):
    face_id, _ = rasterize(mesh, pose, w, h, use_depth=False)
    return face_id >= 0


def render_labels(mesh, pose, labels, cmap, w, h):
    """Flat-shaded label render: each pixel takes its visible face's label colour."""
    face_id, _ = rasterize(mesh, pose, w, h)
    colors = cmap.colors if hasattr(cmap, "colors") else np.asarray(cmap, dtype=float)
    labels = np.asarray(labels)
    if labels.shape != (len(mesh.F),) or (len(labels) and (labels.min() < 0 or labels.max() >= len(colors))):
        raise ShapeMismatch(f"need one label in [0, {len(colors)}) per face")
    face_colors = colors[labels]
    img = np.zeros((h, w, 3))
    fg = face_id >= 0
    img[fg] = face_colors[face_id[fg]]
    return img


def render_vertex_colors(mesh, pose, vertex_colors, w, h):
    """Z-buffered render with barycentric interpolation of per-vertex colours."""
    face_id, bary = rasterize(mesh, pose, w, h)
    vc = np.asarray(vertex_colors, dtype=float).reshape(-1, 3)
    img = np.zeros((h, w, 3))
    fg = face_id >= 0
    corners = vc[mesh.F[face_id[fg]]]  # (n, 3 corners, 3 channels)
    img[fg] = np.einsum("nk,nkc->nc", bary[fg], corners)
    return img


def distance_transform(mask):
    """Euclidean distance in pixels from each pixel to the nearest mask pixel.

    Zero on the mask.  An empty mask yields the finite sentinel ``w * h``
    everywhere.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return np.full(mask.shape, float(mask.size))
    return ndimage.distance_transform_edt(~mask)
