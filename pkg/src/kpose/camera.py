"""Scaled-orthographic camera and camera-multiplex construction.

Image coordinates are normalized: the frame spans ``[-1, 1]^2`` with x to
the right and y down.  A pose maps a model point ``X`` to
``s * (R @ X)[:2] + t``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMultiplex, KposeError
from .rotation import matrix_to_quat, quat_to_matrix, rotation_from_euler

DEFAULT_SIGMA = 0.05
INITIAL_SCALE = 0.7
MAX_ELEVATION = np.deg2rad(80.0)


@dataclass(frozen=True)
class CameraPose:
    s: float
    t: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        if not self.s > 0:
            raise KposeError(f"camera scale must be positive, got {self.s}")
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float).reshape(2))
        object.__setattr__(self, "R", np.asarray(self.R, dtype=float).reshape(3, 3))

    @classmethod
    def identity(cls):
        return cls(1.0, np.zeros(2), np.eye(3))

    def to_dict(self):
        return {"s": self.s, "t": self.t.tolist(), "q": matrix_to_quat(self.R).tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["s"], d["t"], quat_to_matrix(d["q"]))


def project(pose, X):
    """Project ``(N, 3)`` points to ``(N, 2)`` normalized image coordinates."""
    X = np.asarray(X, dtype=float).reshape(-1, 3)
    return pose.s * (X @ pose.R[:2].T) + pose.t


def camera_depth(pose, X):
    """Camera-frame z of each point; larger is closer to the viewer."""
    X = np.asarray(X, dtype=float).reshape(-1, 3)
    return X @ pose.R[2]


def multiplex_init(n_az, n_el, seed):
    """Jittered azimuth x elevation grid of initial cameras.

    Azimuth cells tile ``[0, 2pi)``, elevation cells tile ``[-80deg, 80deg]``;
    each camera sits at its cell centre plus a uniform jitter of up to half a
    cell.  Cyclo-rotation is zero, scale 0.7, translation zero.
    """
    if n_az < 1 or n_el < 1:
        raise KposeError("need at least one azimuth and one elevation")
    rng = np.random.default_rng(seed)
    az_step = 2 * np.pi / n_az
    el_step = 2 * MAX_ELEVATION / n_el
    poses = []
    for i in range(n_az):
        for j in range(n_el):
            az = (i + 0.5) * az_step + rng.uniform(-0.5, 0.5) * az_step
            el = -MAX_ELEVATION + (j + 0.5) * el_step + rng.uniform(-0.5, 0.5) * el_step
            poses.append(CameraPose(INITIAL_SCALE, np.zeros(2), rotation_from_euler(az, el, 0.0)))
    return poses


def multiplex_weights(losses, sigma=DEFAULT_SIGMA):
    """Softmax of ``-loss / sigma``: the probability that each camera is best."""
    losses = np.asarray(losses, dtype=float)
    if losses.size == 0:
        raise EmptyMultiplex("no cameras to weight")
    if not sigma > 0:
        raise KposeError("softmax temperature must be positive")
    z = -losses / sigma
    e = np.exp(z - z.max())
    return e / e.sum()


@dataclass
class Multiplex:
    poses: list
    losses: list = field(default_factory=list)
    sigma: float = DEFAULT_SIGMA

    def __post_init__(self):
        if self.losses and len(self.losses) != len(self.poses):
            raise KposeError("poses and losses differ in length")
        if not self.sigma > 0:
            raise KposeError("softmax temperature must be positive")

    @property
    def weights(self):
        return multiplex_weights(self.losses, self.sigma)
