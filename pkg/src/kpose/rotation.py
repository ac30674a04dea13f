"""Rotation representations and the distances between them.

Quaternions are ``[w, x, y, z]`` arrays, rotation matrices are 3x3 arrays
acting on column vectors.
"""
import numpy as np

from .errors import DegenerateInput, NotARotation, RankDeficient


def normalize_quat(q):
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise DegenerateInput("cannot normalise a zero quaternion")
    return q / n


def canonical_quat(q):
    """Pick the representative of ``{q, -q}`` with ``w >= 0``.

    When ``w == 0`` the first nonzero of ``x, y, z`` is made positive.
    """
    q = normalize_quat(q)
    if q[0] < 0:
        return -q
    if q[0] == 0:
        for c in q[1:]:
            if c != 0:
                return q if c > 0 else -q
    return q


def quat_to_matrix(q):
    w, x, y, z = normalize_quat(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def matrix_to_quat(R):
    """Shepperd's method; branch on the largest diagonal term for stability."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise NotARotation(f"expected a 3x3 matrix, got {R.shape}")
    if np.abs(R.T @ R - np.eye(3)).max() > 1e-4 or np.linalg.det(R) < 0:
        raise NotARotation("matrix is not a proper rotation")

    tr = np.trace(R)
    if tr > 0:
        S = 2.0 * np.sqrt(tr + 1.0)
        q = [0.25 * S, (R[2, 1] - R[1, 2]) / S, (R[0, 2] - R[2, 0]) / S, (R[1, 0] - R[0, 1]) / S]
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        S = 2.0 * np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        q = [(R[2, 1] - R[1, 2]) / S, 0.25 * S, (R[0, 1] + R[1, 0]) / S, (R[0, 2] + R[2, 0]) / S]
    elif R[1, 1] > R[2, 2]:
        S = 2.0 * np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        q = [(R[0, 2] - R[2, 0]) / S, (R[0, 1] + R[1, 0]) / S, 0.25 * S, (R[1, 2] + R[2, 1]) / S]
    else:
        S = 2.0 * np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        q = [(R[1, 0] - R[0, 1]) / S, (R[0, 2] + R[2, 0]) / S, (R[1, 2] + R[2, 1]) / S, 0.25 * S]
    return canonical_quat(q)


def gram_schmidt_6d(a):
    """Map two 3-vectors onto SO(3) by partial Gram-Schmidt.

    The result's columns are ``normalize(a1)``, ``a2`` orthogonalised against
    it, and their cross product.
    """
    a = np.asarray(a, dtype=float).reshape(6)
    a1, a2 = a[:3], a[3:]
    n1 = np.linalg.norm(a1)
    if n1 <= 1e-9:
        raise DegenerateInput("first 6D vector has near-zero norm")
    b1 = a1 / n1
    u2 = a2 - np.dot(b1, a2) * b1
    n2 = np.linalg.norm(u2)
    if n2 <= 1e-9:
        raise DegenerateInput("6D vectors are near parallel")
    b2 = u2 / n2
    b3 = np.cross(b1, b2)
    return np.column_stack([b1, b2, b3])


def svd_orthogonalize(M):
    """Nearest special-orthogonal matrix to ``M`` in Frobenius norm."""
    M = np.asarray(M, dtype=float).reshape(3, 3)
    U, S, Vt = np.linalg.svd(M)
    if S[1] < 1e-12:
        raise RankDeficient("matrix rank < 2, nearest rotation is not unique")
    d = np.sign(np.linalg.det(U @ Vt))
    return U @ np.diag([1.0, 1.0, d]) @ Vt


def polar_rotation(M, tol=1e-15, max_iter=100):
    """Orthogonal polar factor of ``M`` by Newton iteration ``X <- (X + X^-T) / 2``.

    Independent of the SVD; used to cross-check :func:`svd_orthogonalize`
    for matrices with positive determinant.
    """
    X = np.asarray(M, dtype=float).reshape(3, 3)
    for _ in range(max_iter):
        X_next = 0.5 * (X + np.linalg.inv(X).T)
        if np.abs(X_next - X).max() < tol:
            return X_next
        X = X_next
    return X


def geodesic_angle(Ra, Rb):
    """Rotation angle of ``Ra^T Rb`` in radians, in ``[0, pi]``."""
    c = (np.trace(np.asarray(Ra).T @ np.asarray(Rb)) - 1.0) / 2.0
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def quat_angle(qa, qb):
    """Same quantity as :func:`geodesic_angle`, computed from quaternions."""
    d = abs(float(np.dot(normalize_quat(qa), normalize_quat(qb))))
    return 2.0 * float(np.arccos(min(d, 1.0)))


def quat_loss_double_cover(qp, qr):
    """``min(|qp - qr|, |qp + qr|)``: invariant to the sign of either argument."""
    qp = np.asarray(qp, dtype=float)
    qr = np.asarray(qr, dtype=float)
    return float(min(np.linalg.norm(qp - qr), np.linalg.norm(qp + qr)))


def rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_from_euler(azimuth, elevation, cyclo):
    """``Rz(cyclo) @ Rx(elevation) @ Ry(azimuth)``, angles in radians."""
    ca, sa = np.cos(azimuth), np.sin(azimuth)
    ce, se = np.cos(elevation), np.sin(elevation)
    cc, sc = np.cos(cyclo), np.sin(cyclo)
    # Rx(e) @ Ry(a), written out
    A = np.array([
        [ca, 0.0, sa],
        [se * sa, ce, -se * ca],
        [-ce * sa, se, ce * ca],
    ])
    return np.array([
        [cc * A[0, 0] - sc * A[1, 0], cc * A[0, 1] - sc * A[1, 1], cc * A[0, 2] - sc * A[1, 2]],
        [sc * A[0, 0] + cc * A[1, 0], sc * A[0, 1] + cc * A[1, 1], sc * A[0, 2] + cc * A[1, 2]],
        A[2],
    ])


def euler_from_matrix(R):
    """Inverse of :func:`rotation_from_euler` for ``|elevation| < pi/2``.

    Returns ``(azimuth, elevation, cyclo)``.
    """
    R = np.asarray(R, dtype=float)
    elevation = np.arcsin(np.clip(R[2, 1], -1.0, 1.0))
    azimuth = np.arctan2(-R[2, 0], R[2, 2])
    cyclo = np.arctan2(-R[0, 1], R[1, 1])
    return float(azimuth), float(elevation), float(cyclo)


def random_quat(rng):
    """Uniformly distributed unit quaternion."""
    return canonical_quat(rng.normal(size=4))


def random_rotation(rng):
    return quat_to_matrix(random_quat(rng))
