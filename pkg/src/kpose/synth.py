"""Synthetic shapes, camera trajectories and complete test scenarios.

These replace the trained networks and image datasets: every scenario
carries its own ground truth.
"""
import json
import os
from dataclasses import dataclass

import numpy as np

from .camera import CameraPose
from .errors import KposeError
from .heatmap import HeatmapSpec, synthetic_predictor
from .io import load_poses, read_kph, read_pgm, save_poses, write_kph, write_pgm
from .mesh import ColorMap, KeypointSet, TriMesh, face_labels, farthest_point_sampling, load_obj, \
    make_color_map, save_obj
from .raster import render_silhouette
from .rotation import rotation_from_euler

SHAPES = ("icosphere", "ellipsoid", "bird_blob")

# (direction, amplitude, width) of radial bumps; no symmetry plane survives
BIRD_BUMPS = [
    ((0.85, -0.45, 0.25), 0.45, 0.30),   # head
    ((1.0, -0.3, 0.1), 0.25, 0.15),      # beak
    ((-1.0, 0.15, -0.2), 0.30, 0.25),    # tail
    ((0.1, -0.2, 1.0), 0.18, 0.40),      # one wing
    ((0.3, 1.0, -0.35), 0.15, 0.25),     # feet
]


def icosphere(subdivisions=0):
    """Unit icosphere with outward-facing, consistently oriented faces."""
    p = (1.0 + np.sqrt(5.0)) / 2.0
    V = [[-1, p, 0], [1, p, 0], [-1, -p, 0], [1, -p, 0],
         [0, -1, p], [0, 1, p], [0, -1, -p], [0, 1, -p],
         [p, 0, -1], [p, 0, 1], [-p, 0, -1], [-p, 0, 1]]
    F = [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
         [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
         [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
         [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]]
    V = [list(np.asarray(v, dtype=float) / np.linalg.norm(v)) for v in V]
    for _ in range(subdivisions):
        cache = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = np.add(V[a], V[b])
                V.append(list(m / np.linalg.norm(m)))
                cache[key] = len(V) - 1
            return cache[key]

        new_faces = []
        for a, b, c in F:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        F = new_faces
    return TriMesh(np.array(V), np.array(F))


def _normalize_shape(V):
    V = V - (V.max(axis=0) + V.min(axis=0)) / 2.0
    return V / np.linalg.norm(V, axis=1).max()


def make_shape(kind, subdivisions=3, axes=(1.0, 0.4, 0.4)):
    """Closed genus-0 mesh centred at the origin with max radius 1.

    ``bird_blob`` is an ellipsoid with head, beak, tail, wing and feet bumps
    so that no rotation or reflection maps its silhouettes onto each other.
    """
    if kind not in SHAPES:
        raise KposeError(f"unknown shape {kind!r}; choose from {SHAPES}")
    if not 0 <= subdivisions <= 5:
        raise KposeError("subdivisions must lie in [0, 5]")
    sphere = icosphere(subdivisions)
    d = sphere.V
    if kind == "icosphere":
        return sphere
    if kind == "ellipsoid":
        return TriMesh(_normalize_shape(d * np.asarray(axes, dtype=float)), sphere.F)

    radii = np.array([1.0, 0.5, 0.45])
    r = 1.0 / np.sqrt(((d / radii) ** 2).sum(axis=1))
    bump = np.ones(len(d))
    for c, amp, width in BIRD_BUMPS:
        c = np.asarray(c) / np.linalg.norm(c)
        bump += amp * np.exp(-((d - c) ** 2).sum(axis=1) / (2.0 * width ** 2))
    return TriMesh(_normalize_shape(d * (r * bump)[:, None]), sphere.F)


def make_trajectory(n_frames, seed=0):
    """Smooth camera path: steady azimuth sweep with gentle elevation, roll, scale and shift."""
    if n_frames < 1:
        raise KposeError("need at least one frame")
    rng = np.random.default_rng(seed)
    az0 = rng.uniform(0.0, 2 * np.pi)
    el0 = rng.uniform(np.deg2rad(-30), np.deg2rad(30))
    phase = rng.uniform(0.0, 2 * np.pi, size=3)
    k = np.arange(n_frames)
    az = az0 + np.deg2rad(2.5) * k
    el = el0 + np.deg2rad(8.0) * np.sin(2 * np.pi * k / 32 + phase[0])
    cyclo = np.deg2rad(4.0) * np.sin(2 * np.pi * k / 40 + phase[1])
    s = 0.7 + 0.04 * np.sin(2 * np.pi * k / 24 + phase[2])
    t = 0.05 * np.stack([np.sin(2 * np.pi * k / 50), np.cos(2 * np.pi * k / 50)], axis=1)
    return [CameraPose(s[i], t[i], rotation_from_euler(az[i], el[i], cyclo[i])) for i in range(n_frames)]


@dataclass
class Scenario:
    mesh: TriMesh
    keypoints: KeypointSet
    cmap: ColorMap
    labels: np.ndarray
    true_poses: list
    masks: list
    heatmaps: list


def _child_seeds(seed, n):
    return [int(c.generate_state(1)[0]) for c in np.random.SeedSequence(seed).spawn(n)]


def build_scenario(shape_kind="bird_blob", n_kp=32, n_frames=16, noise_std=0.0, outlier_rate=0.0,
                   seed=0, resolution=128, spec=HeatmapSpec(), subdivisions=3):
    seeds = _child_seeds(seed, 3 + n_frames)
    mesh = make_shape(shape_kind, subdivisions)
    kp = farthest_point_sampling(mesh, n_kp, seeds[0])
    cmap = make_color_map(n_kp, 0.05, seeds[1])
    labels = face_labels(mesh, kp)
    poses = make_trajectory(n_frames, seeds[2])
    masks = [render_silhouette(mesh, p, resolution, resolution) for p in poses]
    heatmaps = [synthetic_predictor(p, kp, mesh, noise_std, outlier_rate, seeds[3 + i], spec)
                for i, p in enumerate(poses)]
    return Scenario(mesh, kp, cmap, labels, poses, masks, heatmaps)


def save_scenario(scn, directory):
    frames = os.path.join(directory, "frames")
    os.makedirs(frames, exist_ok=True)
    save_obj(scn.mesh, os.path.join(directory, "mesh.obj"))
    with open(os.path.join(directory, "keypoints.json"), "w") as fh:
        json.dump({"indices": list(scn.keypoints.indices)}, fh)
    with open(os.path.join(directory, "cmap.json"), "w") as fh:
        json.dump({"colors": scn.cmap.colors.tolist(), "epsilon": scn.cmap.epsilon}, fh)
    save_poses(os.path.join(directory, "poses.json"), scn.true_poses)
    for k, (m, hm) in enumerate(zip(scn.masks, scn.heatmaps)):
        write_pgm(os.path.join(frames, f"{k:04d}_mask.pgm"), m)
        write_kph(os.path.join(frames, f"{k:04d}_hm.kph"), hm)


def frame_ids(directory):
    """Sorted frame numbers present in ``directory/frames``."""
    frames = os.path.join(directory, "frames")
    if not os.path.isdir(frames):
        return []
    names = os.listdir(frames)
    return sorted({int(f[:4]) for f in names if f[:4].isdigit() and f.endswith(("_hm.kph", "_mask.pgm"))})


def load_scenario(directory):
    mesh = load_obj(os.path.join(directory, "mesh.obj"))
    with open(os.path.join(directory, "keypoints.json")) as fh:
        kp = KeypointSet(json.load(fh)["indices"])
    with open(os.path.join(directory, "cmap.json")) as fh:
        d = json.load(fh)
        cmap = ColorMap(d["colors"], d["epsilon"])
    poses_path = os.path.join(directory, "poses.json")
    poses = load_poses(poses_path) if os.path.exists(poses_path) else []
    frames = os.path.join(directory, "frames")
    ids = frame_ids(directory)
    masks = [read_pgm(os.path.join(frames, f"{k:04d}_mask.pgm")) for k in ids]
    heatmaps = [read_kph(os.path.join(frames, f"{k:04d}_hm.kph")) for k in ids]
    return Scenario(mesh, kp, cmap, face_labels(mesh, kp), poses, masks, heatmaps)
