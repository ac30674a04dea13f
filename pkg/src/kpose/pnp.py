"""Scaled-orthographic pose from 2D-3D correspondences, direct and robust."""
from dataclasses import dataclass

import numpy as np

from .camera import CameraPose, project
from .errors import Degenerate, KposeError, NoConsensus, PlanarAmbiguity

COLLINEAR_TOL = 1e-9
COPLANAR_TOL = 1e-6


@dataclass(frozen=True)
class Correspondences:
    X: np.ndarray
    U: np.ndarray
    scores: np.ndarray = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float).reshape(-1, 3)
        U = np.asarray(self.U, dtype=float).reshape(-1, 2)
        scores = np.ones(len(X)) if self.scores is None else np.asarray(self.scores, dtype=float).ravel()
        if not len(X) == len(U) == len(scores):
            raise KposeError("correspondence arrays differ in length")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "scores", scores)

    def __len__(self):
        return len(self.X)

    def subset(self, mask):
        return Correspondences(self.X[mask], self.U[mask], self.scores[mask])

    def to_dict(self):
        return {"X": self.X.tolist(), "U": self.U.tolist(), "scores": self.scores.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["X"], d["U"], d.get("scores"))


@dataclass(frozen=True)
class RansacParams:
    inlier_threshold: float = 0.03
    max_iterations: int = 1000
    confidence: float = 0.999
    min_sample: int = 4
    seed: int = 0

    def __post_init__(self):
        if not self.inlier_threshold > 0:
            raise KposeError("inlier threshold must be positive")
        if not 0 < self.confidence < 1:
            raise KposeError("confidence must lie in (0, 1)")
        if self.min_sample < 4:
            raise KposeError("minimal sample must have at least 4 points")


def _pose_from_rows(M, s, Xbar, Ubar):
    R = np.vstack([M, np.cross(M[0], M[1])])
    return CameraPose(s, Ubar - s * (M @ Xbar), R)


def shape_rank(X, w=None):
    """Relative singular values of the (weighted) centred point cloud."""
    X = np.asarray(X, dtype=float)
    w = np.ones(len(X)) if w is None else np.asarray(w, dtype=float)
    Xc = X - (w @ X) / w.sum()
    sv = np.linalg.svd(np.sqrt(w)[:, None] * Xc, compute_uv=False)
    if sv[0] == 0:
        return np.zeros(3)
    return np.pad(sv / sv[0], (0, 3 - len(sv)))


def solve_orthographic_pnp(c, weights=None):
    """Weighted least-squares scaled-orthographic pose.

    Fits the affine map ``U ~ A X + b`` on centred points, then projects
    ``A`` onto ``s * (two orthonormal rows)`` through its SVD.  Raises
    :class:`Degenerate` for collinear points and :class:`PlanarAmbiguity`
    (carrying both reflected poses) for coplanar ones.
    """
    w = c.scores if weights is None else np.asarray(weights, dtype=float).ravel()
    if len(c) < 3 or len(w) != len(c):
        raise Degenerate("need at least 3 weighted correspondences")
    if (w < 0).any() or not w.sum() > 0:
        raise Degenerate("weights must be non-negative with a positive sum")
    Xbar = (w @ c.X) / w.sum()
    Ubar = (w @ c.U) / w.sum()
    sw = np.sqrt(w)[:, None]
    Xc = sw * (c.X - Xbar)
    Uc = sw * (c.U - Ubar)

    P, sv, Vt = np.linalg.svd(Xc, full_matrices=False)
    if sv[0] == 0 or sv[1] / sv[0] < COLLINEAR_TOL:
        raise Degenerate("3D points are collinear")
    if sv[2] / sv[0] < COPLANAR_TOL:
        raise PlanarAmbiguity(_solve_planar(Xc, Uc, Vt[:2], Vt[2], Xbar, Ubar))

    # least squares A = Uc^T Xc (Xc^T Xc)^-1, via the SVD of Xc
    A = (Uc.T @ P) @ np.diag(1.0 / sv) @ Vt
    Ua, S, Vta = np.linalg.svd(A, full_matrices=False)
    M = Ua @ Vta
    return _pose_from_rows(M, S.mean(), Xbar, Ubar)


def _solve_planar(Xc, Uc, basis, normal, Xbar, Ubar):
    # in-plane part of s*R[:2] is observable; the out-of-plane column c is
    # fixed up to sign by orthonormality of the two rows
    p = Xc @ basis.T
    B = np.linalg.lstsq(p, Uc, rcond=None)[0].T @ basis  # (2, 3), rows in plane
    m1, m2 = B
    n11, n22, n12 = m1 @ m1, m2 @ m2, m1 @ m2
    tr = n11 + n22
    disc = max(tr * tr - 4.0 * (n11 * n22 - n12 * n12), 0.0)
    a = 0.5 * (tr + np.sqrt(disc))
    s = np.sqrt(a)
    c1 = np.sqrt(max(a - n11, 0.0))
    c2 = -n12 / c1 if c1 > 1e-12 * s else np.sqrt(max(a - n22, 0.0))
    poses = []
    for sign in (1.0, -1.0):
        M = (B + sign * np.outer([c1, c2], normal)) / s
        # re-orthonormalise against rounding
        U_, _, Vt_ = np.linalg.svd(M, full_matrices=False)
        poses.append(_pose_from_rows(U_ @ Vt_, s, Xbar, Ubar))
    return poses


def reprojection_errors(pose, c):
    return np.linalg.norm(project(pose, c.X) - c.U, axis=1)


def _iterations_needed(inlier_ratio, sample, confidence):
    if inlier_ratio >= 1.0:
        return 0
    if inlier_ratio <= 0.0:
        return np.inf
    return np.log(1.0 - confidence) / np.log(1.0 - inlier_ratio ** sample)


SAMPLE_COPLANAR_TOL = 1e-3


def ransac_pnp(c, params=RansacParams()):
    """Robust pose: minimal-sample hypotheses scored by inlier count.

    Hypotheses are ranked by (inlier count desc, summed inlier residual asc,
    iteration index asc).  The winner is re-solved on its inliers weighted
    by the correspondence scores.  Returns ``(pose, inlier_flags)``.
    """
    n = len(c)
    if n < params.min_sample:
        raise NoConsensus(f"{n} correspondences, need {params.min_sample}")
    rng = np.random.default_rng(params.seed)
    best = None  # (count, residual, iteration, inliers)
    needed = params.max_iterations
    it = 0
    while it < min(params.max_iterations, needed):
        idx = rng.choice(n, size=params.min_sample, replace=False)
        it += 1
        if shape_rank(c.X[idx])[2] < SAMPLE_COPLANAR_TOL:
            continue
        try:
            pose = solve_orthographic_pnp(c.subset(idx), np.ones(len(idx)))
        except (Degenerate, PlanarAmbiguity):
            continue
        err = reprojection_errors(pose, c)
        inl = err < params.inlier_threshold
        key = (-int(inl.sum()), float(err[inl].sum()), it)
        if best is None or key < best[0]:
            best = (key, inl)
            needed = _iterations_needed(inl.mean(), params.min_sample, params.confidence)

    if best is None or best[1].sum() < params.min_sample + 1:
        raise NoConsensus("no hypothesis reached min_sample + 1 inliers")

    inl = best[1]
    sub = c.subset(inl)
    w = sub.scores if sub.scores.sum() > 0 else np.ones(len(sub))
    try:
        pose = solve_orthographic_pnp(sub, w)
    except PlanarAmbiguity as amb:
        pose = min(amb.candidates, key=lambda p: reprojection_errors(p, sub).sum())
    return pose, reprojection_errors(pose, c) < params.inlier_threshold
