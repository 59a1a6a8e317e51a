"""Homogeneous 2D geometry: epipolar lines, robust point transfer,
homography transport, and rotation commands.

Conventions
-----------
- Pixels are float64 arrays ``(x, y)`` in image coordinates (x right,
  y down, origin at the top-left corner).  Pixels may lie far outside
  the image bounds; nothing here clips except `clip_line_to_rect`.
- Lines are float64 arrays ``(a, b, c)`` for ``ax + by + c = 0``,
  normalized so ``a**2 + b**2 == 1``; with that normalization
  ``a*x + b*y + c`` is the signed distance of ``(x, y)`` from the line.
- Fundamental matrices satisfy ``x2^T F x1 = 0`` (``x1`` in the first
  view, ``x2`` in the second), unit Frobenius norm, rank 2.
- Homographies map the first frame onto the second:
  ``p2 ~ H @ (x1, y1, 1)``; lines move by the inverse transpose.
- All functions are pure; RANSAC draws come from an explicit
  ``numpy.random.Generator`` so concurrent callers never share state.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from camguide.errors import (
    CoincidentCenters,
    DegenerateLine,
    InsufficientMatches,
    NoConsensus,
    ParallelLines,
    PointAtInfinity,
)

# Module tolerances (see the corresponding config knobs where callers
# may override per call).
INCIDENCE_TOL = 1e-9
PARALLEL_TOL = 1e-12
RANK_TOL = 1e-9
EXHAUSTIVE_LINE_LIMIT = 6  # above this, EPT samples pairs instead


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole calibration. ``fx, fy`` focal lengths and ``cx, cy``
    principal point, all in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    skew: float = 0.0

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")

    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.fx, self.skew, self.cx],
                [0.0, self.fy, self.cy],
                [0.0, 0.0, 1.0],
            ]
        )

    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.matrix())


@dataclass(frozen=True)
class Pose:
    """World-to-camera rotation and camera center in world coordinates:
    ``x_cam = rotation @ (X - center)``."""

    rotation: np.ndarray
    center: np.ndarray


@dataclass(frozen=True)
class RotationCommand:
    """Axis-angle rotation in the camera frame; axis unit-norm whenever
    angle is nonzero, angle in [0, pi]."""

    axis: np.ndarray
    angle: float


@dataclass(frozen=True)
class TransferResult:
    point: np.ndarray
    inlier_flags: np.ndarray
    inlier_count: int


@dataclass(frozen=True)
class RansacConfig:
    threshold_px: float = 3.0
    max_iters: int = 1000
    min_inliers: int = 16
    confidence: float = 0.99


def homog(p) -> np.ndarray:
    """Lift a pixel to homogeneous coordinates."""
    p = np.asarray(p, dtype=np.float64)
    return np.array([p[0], p[1], 1.0])


def dehomog(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if abs(v[2]) <= PARALLEL_TOL:
        raise PointAtInfinity(f"third homogeneous coordinate {v[2]!r} below tolerance")
    return v[:2] / v[2]


def normalize_line(l) -> np.ndarray:
    """Scale to ``a**2 + b**2 == 1`` with a canonical sign (first
    nonzero of (a, b) positive) so equal lines compare equal."""
    l = np.asarray(l, dtype=np.float64)
    norm = np.hypot(l[0], l[1])
    if norm <= PARALLEL_TOL:
        raise DegenerateLine("line has no direction: (a, b) ~ 0")
    l = l / norm
    if l[0] < 0 or (l[0] == 0 and l[1] < 0):
        l = -l
    return l


def point_line_distance(l, p) -> float:
    """Unsigned distance; ``l`` need not be pre-normalized."""
    l = np.asarray(l, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    return abs(l[0] * p[0] + l[1] * p[1] + l[2]) / np.hypot(l[0], l[1])


def closest_point_on_line(l, p) -> np.ndarray:
    """Foot of the perpendicular from ``p`` onto the normalized line."""
    l = normalize_line(l)
    p = np.asarray(p, dtype=np.float64)
    d = l[0] * p[0] + l[1] * p[1] + l[2]
    return np.array([p[0] - l[0] * d, p[1] - l[1] * d])


# -- epipolar constructions ----------------------------------------------


def epipolar_line(f: np.ndarray, p) -> np.ndarray:
    """Epipolar line ``F @ (x, y, 1)`` of a pixel from the other view,
    normalized. Raises DegenerateLine when p maps into the null space."""
    line = np.asarray(f, dtype=np.float64) @ homog(p)
    return normalize_line(line)


def intersect_lines(l1, l2) -> np.ndarray:
    """Intersection of two lines via the cross product."""
    x = np.cross(normalize_line(l1), normalize_line(l2))
    if abs(x[2]) <= PARALLEL_TOL:
        raise ParallelLines("lines are parallel within tolerance")
    return x[:2] / x[2]


def epipolar_point_transfer(
    lines,
    threshold_px: float,
    ransac_cfg: RansacConfig | None = None,
    rng: np.random.Generator | None = None,
) -> TransferResult:
    """Consensus intersection point of a bundle of epipolar lines.

    With two lines this is their plain intersection.  With more, every
    pairwise intersection is a candidate (all pairs up to
    EXHAUSTIVE_LINE_LIMIT lines, seeded random pairs above); the
    candidate on which the most lines agree (point-line distance at most
    ``threshold_px``) wins and is refined as the least-squares
    intersection of its inlier lines.
    """
    if threshold_px <= 0:
        raise ValueError("threshold_px must be positive")
    lines = [normalize_line(l) for l in lines]
    n = len(lines)
    if n < 2:
        raise ValueError("need at least two epipolar lines")

    if n == 2:
        p = intersect_lines(lines[0], lines[1])
        return TransferResult(p, np.array([True, True]), 2)

    if n <= EXHAUSTIVE_LINE_LIMIT:
        pairs = list(combinations(range(n), 2))
    else:
        cfg = ransac_cfg or RansacConfig()
        rng = rng or np.random.default_rng(0)
        pairs = []
        for _ in range(cfg.max_iters):
            i, j = rng.choice(n, size=2, replace=False)
            pairs.append((min(i, j), max(i, j)))

    A = np.array([l[:2] for l in lines])
    c = np.array([l[2] for l in lines])

    best_flags = None
    best_count = -1
    for i, j in pairs:
        try:
            cand = intersect_lines(lines[i], lines[j])
        except ParallelLines:
            continue
        dists = np.abs(A @ cand + c)
        flags = dists <= threshold_px
        count = int(flags.sum())
        if count > best_count:
            best_count = count
            best_flags = flags
    if best_flags is None:
        raise ParallelLines("every candidate line pair is parallel")
    if best_count < 2:
        raise NoConsensus(f"best consensus has {best_count} inlier lines")

    # least-squares point: minimize sum of squared signed distances over
    # the inlier lines (rows are unit normals, so residuals are true px)
    sol, *_ = np.linalg.lstsq(A[best_flags], -c[best_flags], rcond=None)
    return TransferResult(sol, best_flags, best_count)


# -- homography transport --------------------------------------------------


def normalize_homography(h) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if abs(h[2, 2]) > PARALLEL_TOL:
        h = h / h[2, 2]
    return h


def transfer_point(h, p) -> np.ndarray:
    """Push a pixel through a homography and dehomogenize."""
    return dehomog(np.asarray(h, dtype=np.float64) @ homog(p))


def transfer_line(h, l) -> np.ndarray:
    """Push a line through a homography (inverse transpose rule)."""
    h = np.asarray(h, dtype=np.float64)
    return normalize_line(np.linalg.inv(h).T @ np.asarray(l, dtype=np.float64))


def compose_homographies(h_ij, h_jk) -> np.ndarray:
    """Chain ``i -> j`` then ``j -> k`` into ``i -> k``."""
    return normalize_homography(np.asarray(h_jk) @ np.asarray(h_ij))


def rotation_homography(k: Intrinsics, r_rel: np.ndarray) -> np.ndarray:
    """Pixel map induced by a pure rotation between same-center frames:
    ``H = K R_rel K^-1`` with ``R_rel = R_new @ R_old^T``."""
    km = k.matrix()
    return normalize_homography(km @ r_rel @ k.inverse())


# -- rotation commands -----------------------------------------------------


def rotation_to_center(k: Intrinsics, p) -> RotationCommand:
    """Camera-frame axis/angle that brings the ray of pixel ``p`` onto
    the principal ray.

    The angle is the arc between the back-projected directions of the
    image center and of ``p``; the axis is their normalized cross
    product.  A centered pixel returns angle 0 with the conventional
    axis (0, 1, 0).
    """
    kinv = k.inverse()
    d0 = kinv @ np.array([k.cx, k.cy, 1.0])
    d0 /= np.linalg.norm(d0)
    dp = kinv @ homog(p)
    dp /= np.linalg.norm(dp)

    cos_theta = float(np.clip(d0 @ dp, -1.0, 1.0))
    theta = float(np.arccos(cos_theta))
    cross = np.cross(d0, dp)
    norm = np.linalg.norm(cross)
    if theta <= 1e-12 or norm <= 1e-15:
        return RotationCommand(np.array([0.0, 1.0, 0.0]), 0.0)
    return RotationCommand(cross / norm, theta)


def rodrigues(axis, angle: float) -> np.ndarray:
    """Rotation matrix from a unit axis and an angle."""
    a = np.asarray(axis, dtype=np.float64)
    n = np.linalg.norm(a)
    if n <= 1e-15 or abs(angle) <= 1e-15:
        return np.eye(3)
    a = a / n
    kx = np.array(
        [
            [0.0, -a[2], a[1]],
            [a[2], 0.0, -a[0]],
            [-a[1], a[0], 0.0],
        ]
    )
    return np.eye(3) + np.sin(angle) * kx + (1.0 - np.cos(angle)) * (kx @ kx)


# -- fundamental matrices ---------------------------------------------------


def _canonical_f(f: np.ndarray) -> np.ndarray:
    """Unit Frobenius norm with the largest-magnitude entry positive."""
    f = f / np.linalg.norm(f)
    flat = np.abs(f).argmax()
    if f.flat[flat] < 0:
        f = -f
    return f


def fundamental_from_cameras(
    k1: Intrinsics, pose1: Pose, k2: Intrinsics, pose2: Pose
) -> np.ndarray:
    """Ground-truth F for two calibrated cameras: ``F = K2^-T [t]x R K1^-1``
    with ``R = R2 R1^T`` and ``t`` the first center seen from the second
    camera."""
    baseline = np.asarray(pose1.center) - np.asarray(pose2.center)
    if np.linalg.norm(baseline) <= 1e-9:
        raise CoincidentCenters("camera centers coincide; F undefined")
    r_rel = pose2.rotation @ pose1.rotation.T
    t = pose2.rotation @ baseline
    tx = np.array(
        [
            [0.0, -t[2], t[1]],
            [t[2], 0.0, -t[0]],
            [-t[1], t[0], 0.0],
        ]
    )
    f = np.linalg.inv(k2.matrix()).T @ tx @ r_rel @ k1.inverse()
    return _canonical_f(f)


def _hartley_transform(pts: np.ndarray) -> np.ndarray:
    """Similarity moving the centroid to the origin and the mean radius
    to sqrt(2)."""
    centroid = pts.mean(axis=0)
    d = np.linalg.norm(pts - centroid, axis=1).mean()
    s = np.sqrt(2.0) / max(d, 1e-12)
    return np.array(
        [
            [s, 0.0, -s * centroid[0]],
            [0.0, s, -s * centroid[1]],
            [0.0, 0.0, 1.0],
        ]
    )


def _eight_point(pts1: np.ndarray, pts2: np.ndarray) -> np.ndarray | None:
    """Normalized 8-point solve with rank-2 enforcement; None when the
    design matrix is too degenerate to pin down a solution."""
    t1 = _hartley_transform(pts1)
    t2 = _hartley_transform(pts2)
    n1 = (t1 @ np.column_stack([pts1, np.ones(len(pts1))]).T).T
    n2 = (t2 @ np.column_stack([pts2, np.ones(len(pts2))]).T).T

    x1, y1 = n1[:, 0], n1[:, 1]
    x2, y2 = n2[:, 0], n2[:, 1]
    a = np.column_stack(
        [x2 * x1, x2 * y1, x2, y2 * x1, y2 * y1, y2, x1, y1, np.ones(len(x1))]
    )
    _, s, vt = np.linalg.svd(a)
    if s[-2] <= 1e-12:  # nullspace dimension > 1: degenerate sample
        return None
    f = vt[-1].reshape(3, 3)

    u, sv, vt = np.linalg.svd(f)
    sv[2] = 0.0
    f = u @ np.diag(sv) @ vt
    return _canonical_f(t2.T @ f @ t1)


def symmetric_epipolar_distance(f: np.ndarray, pts1: np.ndarray, pts2: np.ndarray) -> np.ndarray:
    """RMS of the two point-to-epipolar-line distances, in pixels."""
    h1 = np.column_stack([pts1, np.ones(len(pts1))])
    h2 = np.column_stack([pts2, np.ones(len(pts2))])
    l2 = h1 @ f.T  # lines in image 2
    l1 = h2 @ f  # lines in image 1
    num = np.abs(np.sum(h2 * l2, axis=1))
    d2 = num / np.maximum(np.hypot(l2[:, 0], l2[:, 1]), 1e-12)
    d1 = num / np.maximum(np.hypot(l1[:, 0], l1[:, 1]), 1e-12)
    return np.sqrt(0.5 * (d1**2 + d2**2))


def estimate_fundamental(
    matches,
    ransac_cfg: RansacConfig | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Robust F from pixel correspondences: RANSAC over normalized
    8-point samples, refit on the consensus set.

    Returns ``(F, inlier_flags)``; flags are measured against the final
    refit at ``ransac_cfg.threshold_px`` symmetric epipolar distance.
    """
    cfg = ransac_cfg or RansacConfig()
    rng = rng or np.random.default_rng(0)
    pts1 = np.asarray([m[0] for m in matches], dtype=np.float64)
    pts2 = np.asarray([m[1] for m in matches], dtype=np.float64)
    n = len(pts1)
    if n < 8:
        raise InsufficientMatches(f"{n} matches < 8-point minimum")

    best_flags = None
    best_count = 0
    best_err = np.inf
    needed = cfg.max_iters
    it = 0
    while it < min(needed, cfg.max_iters):
        sample = rng.choice(n, size=8, replace=False)
        f = _eight_point(pts1[sample], pts2[sample])
        it += 1
        if f is None:
            continue
        d = symmetric_epipolar_distance(f, pts1, pts2)
        flags = d <= cfg.threshold_px
        count = int(flags.sum())
        err = float(d[flags].sum())
        if count > best_count or (count == best_count and err < best_err):
            best_count, best_err, best_flags = count, err, flags
            ratio = count / n
            if ratio > 0:
                denom = np.log1p(-min(ratio**8, 1.0 - 1e-12))
                needed = int(np.ceil(np.log(1.0 - cfg.confidence) / denom)) if denom < 0 else 1

    if best_flags is None or best_count < 8:
        raise NoConsensus("RANSAC found no valid 8-point consensus")

    f = _eight_point(pts1[best_flags], pts2[best_flags])
    if f is None:
        raise NoConsensus("consensus refit degenerate")
    d = symmetric_epipolar_distance(f, pts1, pts2)
    flags = d <= cfg.threshold_px
    if int(flags.sum()) < cfg.min_inliers:
        raise NoConsensus(
            f"{int(flags.sum())} inliers below support threshold {cfg.min_inliers}"
        )
    return f, flags


# -- drawing helpers ---------------------------------------------------------


def clip_line_to_rect(l, width: float, height: float):
    """Segment of a line inside ``[0, width] x [0, height]``, or None."""
    a, b, c = normalize_line(l)
    pts = []
    if abs(b) > 1e-12:
        for x in (0.0, width):
            y = -(c + a * x) / b
            if -1e-9 <= y <= height + 1e-9:
                pts.append((x, min(max(y, 0.0), height)))
    if abs(a) > 1e-12:
        for y in (0.0, height):
            x = -(c + b * y) / a
            if -1e-9 <= x <= width + 1e-9:
                pts.append((min(max(x, 0.0), width), y))
    if len(pts) < 2:
        return None
    # farthest pair among the (at most four) border hits
    best = None
    best_d = -1.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = (pts[i][0] - pts[j][0]) ** 2 + (pts[i][1] - pts[j][1]) ** 2
            if d > best_d:
                best_d = d
                best = (pts[i], pts[j])
    if best_d <= 1e-12:
        return None
    return best
