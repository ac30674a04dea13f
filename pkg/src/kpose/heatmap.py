"""Keypoint heatmaps: Gaussian proxy targets, visibility weights, loss, decoding.

A heatmap stack is an ``(N, h, w)`` float array, one channel per keypoint,
sampled at pixel centres in normalized image coordinates.
"""
from dataclasses import dataclass

import numpy as np

from .camera import project
from .errors import KposeError, ShapeMismatch
from .raster import pixel_centers, pixel_of, render_labels


@dataclass(frozen=True)
class HeatmapSpec:
    width: int = 64
    height: int = 64
    sigma: float = 0.05

    def __post_init__(self):
        if not self.sigma > 0:
            raise KposeError("heatmap sigma must be positive")
        if self.width < 8 or self.height < 8:
            raise KposeError("heatmap resolution must be at least 8x8")


def proxy_heatmaps(kp2d, spec=HeatmapSpec()):
    """Gaussian bump ``exp(-|p - kp|^2 / (2 sigma^2))`` per keypoint."""
    kp2d = np.asarray(kp2d, dtype=float).reshape(-1, 2)
    grid = pixel_centers(spec.width, spec.height)
    d2 = ((grid[None, :, :, :] - kp2d[:, None, None, :]) ** 2).sum(axis=-1)
    return np.exp(-d2 / (2.0 * spec.sigma ** 2))


def weight_mask(pose, keypoints, mesh, labels, cmap, w, h):
    """Visibility gate per keypoint, read back from a label render.

    A keypoint passes when the rendered colour at its projected pixel lies
    within ``cmap.epsilon`` of its own label colour.
    """
    img = render_labels(mesh, pose, labels, cmap, w, h)
    uv = project(pose, keypoints.positions(mesh))
    i, j = pixel_of(uv, w, h)
    sampled = img[i, j]
    ok = np.linalg.norm(sampled - cmap.colors, axis=1) < cmap.epsilon
    return ok & (i >= 0)


def keypoint_loss(pred, proxy, weights):
    """Sum over keypoints of ``w_i * mean((proxy_i - pred_i)^2)``."""
    pred = np.asarray(pred, dtype=float)
    proxy = np.asarray(proxy, dtype=float)
    weights = np.asarray(weights, dtype=float).ravel()
    if pred.shape != proxy.shape or pred.ndim != 3 or len(weights) != len(pred):
        raise ShapeMismatch(f"pred {pred.shape}, proxy {proxy.shape}, weights {weights.shape}")
    per_channel = ((proxy - pred) ** 2).mean(axis=(1, 2))
    return float(np.dot(weights, per_channel))


def _refine_1d(lo, mid, hi):
    """Sub-pixel offset of a peak from three samples.

    Fits a parabola to the log values, which is exact for a Gaussian.  Falls
    back to the value-weighted centroid when a sample is not positive.
    """
    if lo > 0 and mid > 0 and hi > 0:
        a, b, c = np.log(lo), np.log(mid), np.log(hi)
        denom = a - 2.0 * b + c
        if denom < 0:
            return float(np.clip(0.5 * (a - c) / denom, -0.5, 0.5))
    total = lo + mid + hi
    if total <= 0:
        return 0.0
    return float((hi - lo) / total)


def decode_keypoints(hm):
    """Peak position and score of each channel.

    The argmax pixel is refined to sub-pixel precision from its 3x3
    neighbourhood.  An all-zero channel decodes to the frame centre with
    score 0.
    """
    hm = np.asarray(hm, dtype=float)
    n, h, w = hm.shape
    flat = hm.reshape(n, -1)
    am = flat.argmax(axis=1)
    scores = flat[np.arange(n), am]
    pts = np.zeros((n, 2))
    for k in range(n):
        if scores[k] <= 0:
            continue
        i, j = divmod(int(am[k]), w)
        ch = hm[k]
        dx = dy = 0.0
        if 0 < j < w - 1:
            dx = _refine_1d(ch[i, j - 1], ch[i, j], ch[i, j + 1])
        if 0 < i < h - 1:
            dy = _refine_1d(ch[i - 1, j], ch[i, j], ch[i + 1, j])
        pts[k, 0] = (2.0 * (j + dx) + 1.0) / w - 1.0
        pts[k, 1] = (2.0 * (i + dy) + 1.0) / h - 1.0
    return pts, scores


def synthetic_keypoints(pose_true, keypoints, mesh, noise_std=0.0, outlier_rate=0.0, seed=0):
    """Corrupted keypoint projections and the indices that were made outliers.

    Each projection gets isotropic Gaussian noise; ``round(outlier_rate * N)``
    of them are then moved to uniform random frame positions.
    """
    if noise_std < 0 or not 0 <= outlier_rate < 1:
        raise KposeError("need noise_std >= 0 and 0 <= outlier_rate < 1")
    rng = np.random.default_rng(seed)
    uv = project(pose_true, keypoints.positions(mesh))
    uv = uv + rng.normal(scale=noise_std, size=uv.shape)
    n_out = int(round(outlier_rate * len(uv)))
    idx = np.array([], dtype=np.int64)
    if n_out:
        idx = np.sort(rng.choice(len(uv), size=n_out, replace=False))
        uv[idx] = rng.uniform(-1.0, 1.0, size=(n_out, 2))
    return uv, idx


def synthetic_predictor(pose_true, keypoints, mesh, noise_std=0.0, outlier_rate=0.0,
                        seed=0, spec=HeatmapSpec()):
    """Stand-in for a trained keypoint network: proxy heatmaps of corrupted projections."""
    uv, _ = synthetic_keypoints(pose_true, keypoints, mesh, noise_std, outlier_rate, seed)
    return proxy_heatmaps(uv, spec)
