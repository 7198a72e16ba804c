"""Object-detection accuracy metrics and rate-distortion curve comparison.

Implements IoU, greedy score-ordered matching, all-point interpolated
average precision, class-mean AP, and the Bjontegaard delta-rate between
two rate-quality curves. Everything here is a pure function.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DisjointRangesError, InsufficientPointsError

__all__ = [
    "Box",
    "Detection",
    "GroundTruthBox",
    "RDPoint",
    "RDCurve",
    "iou",
    "filter_by_confidence",
    "match_detections",
    "average_precision",
    "mean_ap",
    "evaluate_detections",
    "bd_rate",
    "bd_rate_values",
]


@dataclass(frozen=True)
class Box:
    """Axis-aligned box: top-left corner plus positive extents, in pixels."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ArgumentError(f"box extents must be positive, got {self.w}x{self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class Detection:
    frame_id: int
    class_id: int
    box: Box
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ArgumentError(f"score must be in [0, 1], got {self.score}")


@dataclass(frozen=True)
class GroundTruthBox:
    frame_id: int
    class_id: int
    box: Box


@dataclass(frozen=True)
class RDPoint:
    """One rate-distortion sample; quality fields are optional."""

    qp: int
    bitrate_kbps: float
    map: float | None = None
    per_class_ap: Mapping[int, float] = field(default_factory=dict)
    psnr_db: float | None = None

    def __post_init__(self):
        if self.map is not None and not 0.0 <= self.map <= 1.0:
            raise ArgumentError(f"mAP must be in [0, 1], got {self.map}")


@dataclass(frozen=True)
class RDCurve:
    label: str
    points: tuple[RDPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ArgumentError("a curve needs at least one point")
        rates = [p.bitrate_kbps for p in self.points]
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ArgumentError(
                f"curve '{self.label}' points must be strictly ordered by bitrate; "
                "equal bitrates usually indicate a degenerate experiment"
            )

    def bitrates(self) -> np.ndarray:
        return np.array([p.bitrate_kbps for p in self.points], dtype=np.float64)

    def maps(self) -> np.ndarray:
        if any(p.map is None for p in self.points):
            raise ArgumentError(f"curve '{self.label}' has points without mAP values")
        return np.array([p.map for p in self.points], dtype=np.float64)

    def psnrs(self) -> np.ndarray:
        if any(p.psnr_db is None for p in self.points):
            raise ArgumentError(f"curve '{self.label}' has points without PSNR values")
        return np.array([p.psnr_db for p in self.points], dtype=np.float64)


def iou(a: Box, b: Box) -> float:
    """Intersection-over-union of two boxes, in [0, 1]; 0 when disjoint."""
    ix = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    iy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    # the true intersection never exceeds either area; the subtraction
    # above can overshoot by an ulp for (nearly) coincident edges
    inter = min(ix * iy, a.area, b.area)
    return inter / (a.area + b.area - inter)


def filter_by_confidence(dets: Sequence[Detection], threshold: float) -> list[Detection]:
    """Keep detections scoring at least the threshold (inclusive), preserving order."""
    if not 0.0 <= threshold <= 1.0:
        raise ArgumentError(f"threshold must be in [0, 1], got {threshold}")
    return [d for d in dets if d.score >= threshold]


def match_detections(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthBox],
    iou_threshold: float,
) -> tuple[list[tuple[Detection, bool]], int]:
    """Label detections as true/false positives by greedy matching.

    Detections are visited in descending score order (ties keep input
    order). Each one matches the not-yet-matched ground-truth box of its
    (frame, class) group with the highest IoU when that IoU reaches the
    threshold; every ground-truth box is matched at most once. Returns the
    score-sorted labeled list and the ground-truth count.
    """
    groups: dict[tuple[int, int], list[int]] = defaultdict(list)
    for gi, gt in enumerate(gts):
        groups[(gt.frame_id, gt.class_id)].append(gi)
    taken = [False] * len(gts)
    order = sorted(range(len(dets)), key=lambda i: -dets[i].score)
    labeled = []
    for di in order:
        det = dets[di]
        best_iou = 0.0
        best_gi = -1
        for gi in groups.get((det.frame_id, det.class_id), ()):
            if taken[gi]:
                continue
            overlap = iou(det.box, gts[gi].box)
            if overlap > best_iou:
                best_iou = overlap
                best_gi = gi
        if best_gi >= 0 and best_iou >= iou_threshold:
            taken[best_gi] = True
            labeled.append((det, True))
        else:
            labeled.append((det, False))
    return labeled, len(gts)


def average_precision(labeled: Iterable[bool | tuple], n_gt: int) -> float:
    """All-point interpolated AP over a score-sorted TP/FP sequence.

    Precision at each recall is replaced by the maximum precision at any
    recall at least as large, and the area under that envelope is
    returned. With no ground truth, the result is 0 if any detections
    exist and 1 otherwise.
    """
    if n_gt < 0:
        raise ArgumentError(f"ground-truth count must be nonnegative, got {n_gt}")
    flags = np.array(
        [bool(item[1]) if isinstance(item, tuple) else bool(item) for item in labeled]
    )
    if n_gt == 0:
        return 0.0 if flags.size else 1.0
    if flags.size == 0:
        return 0.0
    tp = np.cumsum(flags)
    fp = np.cumsum(~flags)
    recall = tp / n_gt
    precision = tp / (tp + fp)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    prev_recall = np.concatenate(([0.0], recall[:-1]))
    return float(np.sum((recall - prev_recall) * envelope))


def mean_ap(per_class_ap: Mapping[int, float]) -> float:
    """Unweighted mean of per-class average precision."""
    if not per_class_ap:
        raise ArgumentError("cannot average an empty AP map")
    return float(sum(per_class_ap.values()) / len(per_class_ap))


def evaluate_detections(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthBox],
    iou_threshold: float = 0.5,
) -> tuple[dict[int, float], float]:
    """Per-class AP and mAP over exactly the classes present in ground truth."""
    classes = sorted({gt.class_id for gt in gts})
    if not classes:
        raise ArgumentError("ground truth contains no boxes")
    per_class = {}
    for cls in classes:
        cls_dets = [d for d in dets if d.class_id == cls]
        cls_gts = [g for g in gts if g.class_id == cls]
        labeled, n_gt = match_detections(cls_dets, cls_gts, iou_threshold)
        per_class[cls] = average_precision(labeled, n_gt)
    return per_class, mean_ap(per_class)


def bd_rate_values(
    anchor_rates: Sequence[float],
    anchor_quality: Sequence[float],
    test_rates: Sequence[float],
    test_quality: Sequence[float],
) -> float:
    """Bjontegaard delta-rate of test vs anchor, in percent.

    Fits a cubic polynomial to log10(rate) as a function of quality for
    each curve, integrates both over the overlapping quality interval, and
    converts the mean log-rate difference back to a percentage. Negative
    means the test curve needs fewer bits at equal quality.
    """
    ar = np.asarray(anchor_rates, dtype=np.float64)
    aq = np.asarray(anchor_quality, dtype=np.float64)
    tr = np.asarray(test_rates, dtype=np.float64)
    tq = np.asarray(test_quality, dtype=np.float64)
    for rates, quality, name in ((ar, aq, "anchor"), (tr, tq, "test")):
        if len(rates) != len(quality):
            raise ArgumentError(f"{name} rate and quality lengths differ")
        if len(rates) < 4:
            raise InsufficientPointsError(
                f"insufficient points: {name} curve has {len(rates)}, need at least 4"
            )
        if np.any(rates <= 0):
            raise ArgumentError(f"{name} bitrates must be positive")
    lo = max(aq.min(), tq.min())
    hi = min(aq.max(), tq.max())
    if not lo < hi:
        raise DisjointRangesError(
            f"quality ranges do not overlap: anchor [{aq.min()}, {aq.max()}], "
            f"test [{tq.min()}, {tq.max()}]"
        )
    fit_a = np.polyfit(aq, np.log10(ar), 3)
    fit_t = np.polyfit(tq, np.log10(tr), 3)
    int_a = np.polyval(np.polyint(fit_a), hi) - np.polyval(np.polyint(fit_a), lo)
    int_t = np.polyval(np.polyint(fit_t), hi) - np.polyval(np.polyint(fit_t), lo)
    avg_diff = (int_t - int_a) / (hi - lo)
    return float(100.0 * (10.0**avg_diff - 1.0))


def bd_rate(anchor: RDCurve, test: RDCurve) -> float:
    """BD-rate between two curves using mAP as the quality axis."""
    return bd_rate_values(anchor.bitrates(), anchor.maps(), test.bitrates(), test.maps())
