"""Camera-multiplex fitting: optimise many candidate cameras against a silhouette, keep the best."""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .camera import DEFAULT_SIGMA, CameraPose, multiplex_init, multiplex_weights
from .errors import EmptyTarget, KposeError
from .metrics import mask_loss
from .raster import distance_transform, pixel_centers, render_silhouette
from .rotation import euler_from_matrix, rotation_from_euler

# initial simplex offsets for (s, tx, ty, azimuth, elevation, cyclo); the
# angular ones drive the rotation search, the rest only the final polish
DEFAULT_STEPS = (0.01, 0.01, 0.01, np.deg2rad(25.0), np.deg2rad(25.0), np.deg2rad(20.0))
POLISH_SCALE = np.array([1.0, 1.0, 1.0, 0.12, 0.12, 0.15])
ROTATION_SHARE = 0.7


@dataclass(frozen=True)
class MultiplexConfig:
    n_az: int = 8
    n_el: int = 5
    prune_to: int = 4
    opt_budget: int = 300
    simplex_init_step: tuple = DEFAULT_STEPS
    sigma: float = DEFAULT_SIGMA
    seed: int = 0

    def __post_init__(self):
        if self.n_az < 1 or self.n_el < 1:
            raise KposeError("multiplex grid needs n_az, n_el >= 1")
        if not 1 <= self.prune_to <= self.n_az * self.n_el:
            raise KposeError("prune_to must lie in [1, n_az * n_el]")
        if self.opt_budget < 1:
            raise KposeError("optimisation budget must be at least 1")
        if len(self.simplex_init_step) != 6:
            raise KposeError("need 6 simplex steps")


def pose_to_params(pose):
    return np.array([pose.s, *pose.t, *euler_from_matrix(pose.R)])


def params_to_pose(x):
    return CameraPose(x[0], x[1:3], rotation_from_euler(*x[3:6]))


def camera_update_loss(pose, target, mesh, dt=None):
    """Silhouette-only loss of one camera against the target mask."""
    if dt is None:
        dt = distance_transform(target)
    h, w = target.shape
    return mask_loss(target, render_silhouette(mesh, pose, w, h), dt)


def _moments(mask, centers):
    return centers[mask].mean(axis=0), mask.sum()


def optimize_camera(init, target, mesh, budget=300, steps=DEFAULT_STEPS):
    """Nelder-Mead over (s, t, azimuth, elevation, cyclo) on the silhouette loss.

    Two stages.  First the three angles are searched while scale and
    translation follow from matching the area and centroid of the render to
    the target, which removes most of the valleys a 6-d simplex crawls along.
    Then all six parameters are polished from the best point.  ``budget``
    caps the number of loss evaluations (the moment renders are extra).

    Keeps the best evaluation seen, so the returned loss never exceeds the
    loss of ``init``.  Returns ``(pose, loss)``.
    """
    target = np.asarray(target, dtype=bool)
    if not target.any():
        raise EmptyTarget("target silhouette is empty")
    dt = distance_transform(target)
    h, w = target.shape
    centers = pixel_centers(w, h)
    c_target, a_target = _moments(target, centers)
    steps = np.asarray(steps, dtype=float)

    x0 = pose_to_params(init)
    best = [camera_update_loss(init, target, mesh, dt), x0]
    evals = [1]

    def objective(x):
        if x[0] <= 1e-3 or evals[0] >= budget:
            return np.inf
        evals[0] += 1
        loss = mask_loss(target, render_silhouette(mesh, params_to_pose(x), w, h), dt)
        if loss < best[0]:
            best[0], best[1] = loss, np.array(x)
        return loss

    def with_moments(angles):
        R = rotation_from_euler(*angles)
        rendered = render_silhouette(mesh, CameraPose(init.s, init.t, R), w, h)
        if not rendered.any():
            return None
        c, a = _moments(rendered, centers)
        s = init.s * np.sqrt(a_target / a)
        return np.r_[s, c_target - s * (c - init.t) / init.s, angles]

    def profiled(angles):
        x = with_moments(angles)
        return np.inf if x is None else objective(x)

    n_rot = int(ROTATION_SHARE * (budget - 1))
    if n_rot > 0 and best[0] > 0:
        a0 = x0[3:]
        minimize(profiled, a0, method="Nelder-Mead",
                 options={"maxfev": n_rot, "initial_simplex": np.vstack([a0, a0 + np.diag(steps[3:])]),
                          "xatol": 1e-4, "fatol": 1e-7})
    polish = steps * POLISH_SCALE
    for _ in range(20):
        if evals[0] >= budget or best[0] == 0:
            break
        xb = best[1]
        minimize(objective, xb, method="Nelder-Mead",
                 options={"maxfev": budget - evals[0], "initial_simplex": np.vstack([xb, xb + np.diag(polish)]),
                          "xatol": 1e-5, "fatol": 1e-8})
        polish = polish * 0.5
    pose = init if best[1] is x0 else params_to_pose(best[1])
    return pose, float(best[0])


def run_multiplex(mesh, target, cfg=MultiplexConfig()):
    """Initialise the multiplex, optimise every camera, prune to the best.

    Returns ``([(pose, loss), ...], weights)`` sorted by ascending loss, with
    softmax weights over the kept cameras.
    """
    target = np.asarray(target, dtype=bool)
    if not target.any():
        raise EmptyTarget("target silhouette is empty")
    results = []
    for k, pose in enumerate(multiplex_init(cfg.n_az, cfg.n_el, cfg.seed)):
        best_pose, loss = optimize_camera(pose, target, mesh, cfg.opt_budget, cfg.simplex_init_step)
        results.append((loss, k, best_pose))
    results.sort(key=lambda r: (r[0], r[1]))
    kept = [(pose, loss) for loss, _, pose in results[:cfg.prune_to]]
    return kept, multiplex_weights([loss for _, loss in kept], cfg.sigma)
