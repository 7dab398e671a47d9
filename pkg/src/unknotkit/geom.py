"""Small vector helpers shared by the geometric modules."""

from __future__ import annotations

import numpy as np

# Geometric tolerance used by every predicate in the package.  Inputs that
# violate a disjointness requirement at 2*EPS are rejected, never perturbed.
EPS = 1e-9


def normalize(v: np.ndarray) -> np.ndarray:
    """Unit vector(s) along `v`; raises on (near-)zero input."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n < 1e-300):
        raise ValueError("cannot normalize a zero vector")
    return v / n


def det3(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Triple product det[a, b, c], broadcast over leading axes."""
    return np.einsum("...i,...i->...", np.cross(a, b), c)


def perp_frame(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal pair (e1, e2) spanning the plane normal to `axis`."""
    axis = normalize(axis)
    helper = np.array([0.0, 1.0, 0.0])
    if abs(float(axis @ helper)) > 0.9:
        helper = np.array([1.0, 0.0, 0.0])
    e1 = normalize(np.cross(helper, axis))
    e2 = np.cross(axis, e1)
    return e1, e2


def rotation_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about `axis` by `angle` radians."""
    axis = normalize(axis)
    x, y, z = axis
    c, s = np.cos(angle), np.sin(angle)
    k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) * c + s * k + (1.0 - c) * np.outer(axis, axis)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform-ish random rotation matrix (QR of a Gaussian sample)."""
    m = rng.normal(size=(3, 3))
    q, r = np.linalg.qr(m)
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return q


def segment_segment_distance(
    p1: np.ndarray, q1: np.ndarray, p2: np.ndarray, q2: np.ndarray
) -> np.ndarray:
    """Euclidean distance between 3D segments [p1,q1] and [p2,q2], broadcastable.

    Standard clamped closest-point computation (Ericson); vectorized so the
    inputs may carry leading batch axes.
    """
    p1, q1 = np.asarray(p1, float), np.asarray(q1, float)
    p2, q2 = np.asarray(p2, float), np.asarray(q2, float)
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = np.einsum("...i,...i->...", d1, d1)
    e = np.einsum("...i,...i->...", d2, d2)
    f = np.einsum("...i,...i->...", d2, r)
    c = np.einsum("...i,...i->...", d1, r)
    b = np.einsum("...i,...i->...", d1, d2)
    denom = a * e - b * b

    tiny = 1e-300
    s = np.where(denom > tiny, (b * f - c * e) / np.where(denom > tiny, denom, 1.0), 0.0)
    s = np.clip(s, 0.0, 1.0)
    t = np.where(e > tiny, (b * s + f) / np.where(e > tiny, e, 1.0), 0.0)

    t_clamped = np.clip(t, 0.0, 1.0)
    # re-solve s where t was clamped
    s = np.where(
        t != t_clamped,
        np.clip(np.where(a > tiny, (t_clamped * b - c) / np.where(a > tiny, a, 1.0), 0.0), 0.0, 1.0),
        s,
    )
    t = t_clamped
    c1 = p1 + s[..., None] * d1
    c2 = p2 + t[..., None] * d2
    return np.linalg.norm(c1 - c2, axis=-1)
