"""
Fitting a camera multiplex to a silhouette
==========================================

Forty cameras start on a jittered azimuth/elevation grid.  Each is refined
against the target mask alone, and the four that explain it best are kept
with softmax weights.
"""

import os
import tempfile

import numpy as np

from kpose.camera import CameraPose
from kpose.io import write_pgm
from kpose.multiplex import MultiplexConfig, run_multiplex
from kpose.raster import render_silhouette
from kpose.rotation import geodesic_angle, rotation_from_euler
from kpose.synth import make_shape

mesh = make_shape("bird_blob", 3)
truth = CameraPose(0.72, [0.04, -0.02], rotation_from_euler(np.deg2rad(130), np.deg2rad(20), 0.1))
target = render_silhouette(mesh, truth, 128, 128)

kept, weights = run_multiplex(mesh, target, MultiplexConfig(seed=1))
for (pose, loss), w in zip(kept, weights):
    err = np.degrees(geodesic_angle(pose.R, truth.R))
    print(f"loss {loss:.5f}  weight {w:.3f}  error {err:6.2f} deg")

# the silhouettes, for a look in any image viewer
out = tempfile.mkdtemp(prefix="multiplex_")
write_pgm(os.path.join(out, "target.pgm"), target)
for k, (pose, _) in enumerate(kept):
    write_pgm(os.path.join(out, f"camera_{k}.pgm"), render_silhouette(mesh, pose, 128, 128))
print("renders in", out)
