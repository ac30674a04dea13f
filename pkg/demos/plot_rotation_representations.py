"""
Rotation representations side by side
=====================================

A network can output a rotation as a quaternion, as two 3-vectors (6D) or as
a full 3x3 matrix (9D).  Each needs a map back onto proper rotations.
"""

import numpy as np

from kpose.rotation import (geodesic_angle, gram_schmidt_6d, matrix_to_quat, normalize_quat,
                            quat_loss_double_cover, quat_to_matrix, svd_orthogonalize)

rng = np.random.default_rng(0)
R_true = quat_to_matrix(rng.normal(size=4))

# corrupt the raw outputs the way an imperfect regressor would
noise = 0.1
q_raw = matrix_to_quat(R_true) + noise * rng.normal(size=4)
a6_raw = R_true[:, :2].T.ravel() + noise * rng.normal(size=6)
m9_raw = R_true + noise * rng.normal(size=(3, 3))

R_q = quat_to_matrix(normalize_quat(q_raw))
R_6 = gram_schmidt_6d(a6_raw)
R_9 = svd_orthogonalize(m9_raw)

for name, R in [("quaternion", R_q), ("6D Gram-Schmidt", R_6), ("9D SVD", R_9)]:
    print(f"{name:16s} error {np.degrees(geodesic_angle(R, R_true)):6.2f} deg   det {np.linalg.det(R):+.12f}")

# q and -q are the same rotation, so a plain L2 loss punishes the wrong sign
q = matrix_to_quat(R_true)
print("naive loss against -q:", np.linalg.norm(q - (-q)))
print("double cover loss    :", quat_loss_double_cover(q, -q))
