"""Reconstruction losses and evaluation metrics."""
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyForeground, EmptySequence, ShapeMismatch, WeightMismatch
from .rotation import geodesic_angle


def _same_shape(*arrays):
    shapes = {np.shape(a) for a in arrays}
    if len(shapes) != 1:
        raise ShapeMismatch(f"shapes differ: {sorted(shapes)}")


def mask_loss(gt, rendered, dt):
    """Silhouette loss: mean squared mask difference plus mean ``dt(gt) * rendered``.

    The second term charges rendered pixels by their distance from the
    target silhouette.
    """
    _same_shape(gt, rendered, dt)
    gt = np.asarray(gt, dtype=float)
    rendered = np.asarray(rendered, dtype=float)
    diff = gt - rendered
    return float(np.mean(diff * diff) + np.mean(np.asarray(dt) * rendered))


def pixel_loss(image, rendered, gt_mask):
    """Mean absolute per-channel difference over foreground pixels."""
    _same_shape(image, rendered)
    gt_mask = np.asarray(gt_mask, dtype=bool)
    if gt_mask.shape != np.shape(image)[:2]:
        raise ShapeMismatch("mask does not match image size")
    if not gt_mask.any():
        raise EmptyForeground("ground-truth mask is empty")
    d = np.abs(np.asarray(image, dtype=float) - np.asarray(rendered, dtype=float))
    return float(d[gt_mask].mean())


@dataclass(frozen=True)
class LossBreakdown:
    mask: float
    pixel: float
    deform: float
    lap: float
    total: float
    per_camera: list = field(default_factory=list)


def total_loss(per_camera, weights, deform, lap):
    """Multiplex-weighted reconstruction loss plus shape regularisers.

    ``per_camera`` holds ``(mask_k, pixel_k)`` pairs and ``weights`` the
    camera probabilities ``p_k``.  ``mask`` and ``pixel`` in the result are
    the ``p``-weighted sums, so ``total = mask + pixel + deform + lap``.
    """
    per_camera = np.asarray(per_camera, dtype=float).reshape(-1, 2)
    weights = np.asarray(weights, dtype=float).ravel()
    if len(weights) != len(per_camera) or len(weights) == 0:
        raise WeightMismatch(f"{len(weights)} weights for {len(per_camera)} cameras")
    if abs(weights.sum() - 1.0) > 1e-9 or (weights < 0).any():
        raise WeightMismatch("camera weights must be a probability vector")
    mask = float(weights @ per_camera[:, 0])
    pixel = float(weights @ per_camera[:, 1])
    return LossBreakdown(mask, pixel, float(deform), float(lap),
                         mask + pixel + float(deform) + float(lap),
                         [tuple(p) for p in per_camera.tolist()])


def iou(a, b):
    """Intersection over union; two empty masks score 1."""
    _same_shape(a, b)
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    union = np.count_nonzero(a | b)
    if union == 0:
        return 1.0
    return np.count_nonzero(a & b) / union


def angular_error_deg(Rp, Rg):
    return float(np.degrees(geodesic_angle(Rp, Rg)))


@dataclass(frozen=True)
class JaccardReport:
    mean: float
    recall: float
    decay: float
    per_frame: list

    def to_dict(self):
        return {"mean": self.mean, "recall": self.recall, "decay": self.decay}


def jaccard_stats(per_frame, threshold=0.5):
    """Video segmentation summary of a per-frame IoU sequence.

    ``decay`` is the mean of the first temporal quarter minus the mean of the
    last; with fewer than 4 frames, first frame minus last frame.
    """
    x = np.asarray(per_frame, dtype=float).ravel()
    if x.size == 0:
        raise EmptySequence("no frames")
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    if x.size < 4:
        decay = x[0] - x[-1]
    else:
        quarters = np.array_split(x, 4)
        decay = quarters[0].mean() - quarters[-1].mean()
    return JaccardReport(float(x.mean()), float(np.mean(x > threshold)), float(decay), x.tolist())
