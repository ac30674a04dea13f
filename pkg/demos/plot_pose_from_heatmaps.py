"""
Camera pose from keypoint heatmaps
==================================

Render a synthetic bird-like shape along a short camera path, fake a keypoint
network with noisy heatmaps (a fifth of them pointing somewhere random), and
recover every camera with orthographic PnP inside RANSAC.
"""

import numpy as np

from kpose.heatmap import decode_keypoints
from kpose.metrics import angular_error_deg, iou, jaccard_stats
from kpose.pnp import Correspondences, RansacParams, ransac_pnp
from kpose.raster import render_silhouette
from kpose.synth import build_scenario

scn = build_scenario("bird_blob", n_kp=32, n_frames=16, noise_std=0.01, outlier_rate=0.2, seed=3)
X = scn.keypoints.positions(scn.mesh)
print(len(scn.mesh.V), "vertices,", len(scn.keypoints.indices), "keypoints,", len(scn.heatmaps), "frames")

###############################################################################
# decode the 32 heatmaps of each frame, drop weak peaks, solve

errors, ious = [], []
for hm, truth, mask in zip(scn.heatmaps, scn.true_poses, scn.masks):
    uv, score = decode_keypoints(hm)
    keep = score > 0.1
    pose, inliers = ransac_pnp(Correspondences(X[keep], uv[keep], score[keep]), RansacParams(seed=0))
    errors.append(angular_error_deg(pose.R, truth.R))
    ious.append(iou(render_silhouette(scn.mesh, pose, *mask.shape[::-1]), mask))
    print(f"{len(errors) - 1:3d}  inliers {inliers.sum():2d}/{keep.sum()}  error {errors[-1]:5.2f} deg  IoU {ious[-1]:.3f}")

print("median angular error %.2f deg" % np.median(errors))
rep = jaccard_stats(ious)
print("Jaccard mean %.3f  recall %.2f  decay %.4f" % (rep.mean, rep.recall, rep.decay))
