"""Planar mapping between the front camera and the top-down table frame.

All interaction happens on the table plane, so a single homography relates
wrist pixels in the front image to object pixels in the top-down image.
Calibration uses the normalized direct linear transform over point
correspondences; reference resolution picks the detection whose bounding-box
center is nearest the mapped point.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class InsufficientPoints(Exception):
    pass


class DegenerateConfiguration(Exception):
    pass


class PointAtInfinity(Exception):
    pass


class NoCandidate(Exception):
    pass


class DetectionClass(Enum):
    ROD = "rod"
    ROCKER_ARM = "rocker_arm"


@dataclass(frozen=True)
class TablePoint:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise ValueError("table point must be finite")


@dataclass(frozen=True)
class Detection:
    id: int
    object_class: DetectionClass
    bbox: tuple[float, float, float, float]  # x0, y0, x1, y1 in top-down px
    confidence: float

    def center(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.bbox
        return ((x0 + x1) / 2.0, (y0 + y1) / 2.0)


@dataclass(frozen=True)
class ObjectDetectionSnapshot:
    timestamp: float
    detections: tuple[Detection, ...]  # detector's returned order, ids unique

    def __post_init__(self) -> None:
        ids = [d.id for d in self.detections]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate detection ids in snapshot")


class Homography:
    """A scale-normalized (H[2,2] = 1), invertible 3x3 projective map."""

    def __init__(self, matrix) -> None:
        m = np.asarray(matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("homography must be 3x3")
        if abs(m[2, 2]) < 1e-12:
            raise DegenerateConfiguration("homography cannot be scale-normalized")
        m = m / m[2, 2]
        if abs(np.linalg.det(m)) < 1e-12:
            raise DegenerateConfiguration("homography is singular")
        self.matrix = m
        self.matrix.setflags(write=False)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.matrix))

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    def __repr__(self) -> str:
        return f"Homography({self.matrix.tolist()})"


def map_to_table(point: tuple[float, float], h: Homography) -> TablePoint:
    """Apply the homography with homogeneous normalization."""
    v = h.matrix @ np.array([point[0], point[1], 1.0])
    scale = max(abs(v[0]), abs(v[1]), 1.0)
    if abs(v[2]) < 1e-9 * scale:
        raise PointAtInfinity(f"{point} maps to the line at infinity")
    return TablePoint(float(v[0] / v[2]), float(v[1] / v[2]))


def _normalization(points: np.ndarray) -> np.ndarray:
    """Hartley normalization: centroid to origin, mean distance sqrt(2)."""
    centroid = points.mean(axis=0)
    dist = np.sqrt(((points - centroid) ** 2).sum(axis=1)).mean()
    if dist < 1e-12:
        raise DegenerateConfiguration("coincident calibration points")
    s = np.sqrt(2.0) / dist
    return np.array(
        [[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]]
    )


def _collinear(a, b, c, tol: float = 1e-9) -> bool:
    area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return abs(area) < tol


@dataclass(frozen=True)
class CalibrationResult:
    homography: Homography
    rms_error: float


def calibrate(
    correspondences: list[tuple[tuple[float, float], tuple[float, float]]],
) -> CalibrationResult:
    """Least-squares homography from >=4 (front px -> top-down px) pairs.

    Normalized DLT; the reprojection RMS over the input pairs is returned
    alongside the recovered matrix.
    """
    if len(correspondences) < 4:
        raise InsufficientPoints(f"need >= 4 correspondences, got {len(correspondences)}")
    src = np.array([c[0] for c in correspondences], dtype=float)
    dst = np.array([c[1] for c in correspondences], dtype=float)

    for pts in (src, dst):
        if len(np.unique(pts, axis=0)) != len(pts):
            raise DegenerateConfiguration("coincident calibration points")
    if len(src) == 4:
        for skip in range(4):
            trio = [p for i, p in enumerate(src) if i != skip]
            if _collinear(*trio):
                raise DegenerateConfiguration("three collinear source points")

    t_src = _normalization(src)
    t_dst = _normalization(dst)
    sn = (t_src @ np.column_stack([src, np.ones(len(src))]).T).T
    dn = (t_dst @ np.column_stack([dst, np.ones(len(dst))]).T).T

    rows = []
    for (x, y, _), (u, v, _) in zip(sn, dn):
        rows.append([x, y, 1, 0, 0, 0, -u * x, -u * y, -u])
        rows.append([0, 0, 0, x, y, 1, -v * x, -v * y, -v])
    a = np.array(rows)
    _, singular, vh = np.linalg.svd(a)
    if singular[-2] < 1e-10 * singular[0]:
        raise DegenerateConfiguration("rank-deficient correspondence set")
    h_norm = vh[-1].reshape(3, 3)
    h = np.linalg.inv(t_dst) @ h_norm @ t_src
    homography = Homography(h)

    projected = np.array(
        [[p.x, p.y] for p in (map_to_table(tuple(s), homography) for s in src)]
    )
    rms = float(np.sqrt(((projected - dst) ** 2).sum(axis=1).mean()))
    return CalibrationResult(homography=homography, rms_error=rms)


def nearest_object(
    point: TablePoint,
    snapshot: ObjectDetectionSnapshot,
    class_filter: DetectionClass | None = None,
    max_radius: float = 150.0,
) -> int:
    """Id of the detection whose bbox center is closest to ``point``.

    Candidates must pass ``class_filter`` and lie within ``max_radius``;
    exact distance ties break toward the lowest id.
    """
    best: tuple[float, int] | None = None
    for det in snapshot.detections:
        if class_filter is not None and det.object_class is not class_filter:
            continue
        cx, cy = det.center()
        dist = float(np.hypot(cx - point.x, cy - point.y))
        if dist > max_radius:
            continue
        key = (dist, det.id)
        if best is None or key < best:
            best = key
    if best is None:
        raise NoCandidate(
            f"no {class_filter.value if class_filter else 'object'} within "
            f"{max_radius}px of ({point.x:.1f}, {point.y:.1f})"
        )
    return best[1]


def save_calibration(
    path: str,
    homography: Homography,
    correspondences: list[tuple[tuple[float, float], tuple[float, float]]] | None = None,
) -> None:
    """Plain-text calibration file: 3x3 row-major matrix plus the point pairs."""
    lines = ["# cogest calibration v1", "# homography, row-major"]
    for row in homography.matrix:
        lines.append(" ".join(repr(float(v)) for v in row))
    lines.append("# correspondences: front_x front_y top_x top_y")
    for (fx, fy), (tx, ty) in correspondences or []:
        lines.append(f"{fx!r} {fy!r} {tx!r} {ty!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_calibration(
    path: str,
) -> tuple[Homography, list[tuple[tuple[float, float], tuple[float, float]]]]:
    rows: list[list[float]] = []
    pairs: list[tuple[tuple[float, float], tuple[float, float]]] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            values = [float(v) for v in line.split()]
            if len(rows) < 3:
                if len(values) != 3:
                    raise ValueError(f"expected 3 matrix values per line, got {line!r}")
                rows.append(values)
            else:
                if len(values) != 4:
                    raise ValueError(f"expected 4 correspondence values, got {line!r}")
                pairs.append(((values[0], values[1]), (values[2], values[3])))
    if len(rows) != 3:
        raise ValueError("calibration file missing the 3x3 matrix")
    return Homography(rows), pairs
