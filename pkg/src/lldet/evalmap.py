"""Detector-agnostic bounding-box evaluation: IoU, greedy matching, AP, mAP.

Detections are pooled per class across images, walked in descending
score order (ties broken by input order), and greedily matched to the
yet-unmatched ground truth with the highest IoU at or above the
threshold.  AP comes from the interpolated precision-recall curve in one
of two flavors: the all-point area (voc50 preset, threshold 0.5) or the
101-point sampled mean (coco preset, thresholds 0.50:0.05:0.95).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ValidationError

__all__ = [
    "BoundingBox",
    "Detection",
    "GroundTruth",
    "EvalConfig",
    "EvalReport",
    "PRCurve",
    "iou",
    "match_detections",
    "precision_recall",
    "average_precision",
    "evaluate",
]

VOC_ALL_POINT = "voc-all-point"
COCO_101_POINT = "coco-101-point"


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned half-open pixel rectangle, area = width * height."""

    left: float
    top: float
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValidationError(
                f"box extents must be positive, got {self.width}x{self.height}"
            )

    @property
    def right(self) -> float:
        return self.left + self.width

    @property
    def bottom(self) -> float:
        return self.top + self.height

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class Detection:
    image_id: str
    class_id: int
    box: BoundingBox
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValidationError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class GroundTruth:
    image_id: str
    class_id: int
    box: BoundingBox


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection area over union area; 0 when disjoint."""
    iw = min(a.right, b.right) - max(a.left, b.left)
    ih = min(a.bottom, b.bottom) - max(a.top, b.top)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def match_detections(
    dets: list[Detection], gts: list[GroundTruth], thr: float
) -> list[bool]:
    """Greedy TP/FP assignment for one image and one class.

    Detections are processed in descending score (ties keep input
    order); each claims the unmatched ground truth with the highest IoU
    >= thr, first index winning IoU ties.  Returns flags aligned with
    the *input* order of ``dets``.
    """
    keys = {(d.image_id, d.class_id) for d in dets} | {
        (g.image_id, g.class_id) for g in gts
    }
    if len(keys) > 1:
        raise InvalidInputError(
            f"match_detections got mixed image/class ids: {sorted(keys)}"
        )
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    taken = [False] * len(gts)
    flags = [False] * len(dets)
    for i in order:
        best_j = -1
        best_iou = 0.0
        for j, gt in enumerate(gts):
            if taken[j]:
                continue
            overlap = iou(dets[i].box, gt.box)
            if overlap > best_iou:  # strict: first index wins ties
                best_iou = overlap
                best_j = j
        if best_j >= 0 and best_iou >= thr:
            taken[best_j] = True
            flags[i] = True
    return flags


@dataclass(frozen=True)
class PRCurve:
    """Cumulative precision/recall after each detection in score order."""

    precision: tuple[float, ...]
    recall: tuple[float, ...]
    n_gt: int

    @property
    def defined(self) -> bool:
        """False when AP is undefined: detections exist but no ground truth."""
        return not (self.n_gt == 0 and len(self.precision) > 0)


def precision_recall(flags: list[bool], n_gt: int) -> PRCurve:
    """Build the running PR curve from score-ordered TP/FP flags."""
    if n_gt < 0:
        raise InvalidInputError("n_gt must be nonnegative")
    tp = 0
    precision = []
    recall = []
    for k, flag in enumerate(flags, start=1):
        tp += bool(flag)
        precision.append(tp / k)
        recall.append(tp / n_gt if n_gt > 0 else float("nan"))
    return PRCurve(tuple(precision), tuple(recall), n_gt)


def average_precision(pr: PRCurve, method: str = VOC_ALL_POINT) -> float | None:
    """Interpolated AP of a PR curve; None when the curve is undefined."""
    if not pr.defined:
        return None
    if pr.n_gt == 0 or len(pr.precision) == 0:
        return 0.0
    prec = np.asarray(pr.precision, dtype=np.float64)
    rec = np.asarray(pr.recall, dtype=np.float64)
    if method == VOC_ALL_POINT:
        mrec = np.concatenate(([0.0], rec, [1.0]))
        mpre = np.concatenate(([0.0], prec, [0.0]))
        mpre = np.maximum.accumulate(mpre[::-1])[::-1]
        changed = np.nonzero(mrec[1:] != mrec[:-1])[0] + 1
        return float(np.sum((mrec[changed] - mrec[changed - 1]) * mpre[changed]))
    if method == COCO_101_POINT:
        envelope = np.maximum.accumulate(prec[::-1])[::-1]
        samples = np.arange(101) / 100.0  # k/100 exactly, sample grid of the protocol
        # first curve point with recall >= sample, 0 past the last one
        idx = np.searchsorted(rec, samples, side="left")
        values = np.where(idx < len(rec), envelope[np.minimum(idx, len(rec) - 1)], 0.0)
        return float(values.mean())
    raise InvalidInputError(f"unknown interpolation method {method!r}")


@dataclass(frozen=True)
class EvalConfig:
    """Threshold set, interpolation flavor and score floor for a run."""

    iou_thresholds: tuple[float, ...]
    interpolation: str
    score_floor: float = 0.0

    def __post_init__(self):
        thrs = tuple(float(t) for t in self.iou_thresholds)
        if not thrs:
            raise InvalidInputError("at least one IoU threshold is required")
        if any(not 0.0 < t <= 1.0 for t in thrs):
            raise InvalidInputError("IoU thresholds must lie in (0, 1]")
        if any(b <= a for a, b in zip(thrs, thrs[1:])):
            raise InvalidInputError("IoU thresholds must be strictly increasing")
        if self.interpolation not in (VOC_ALL_POINT, COCO_101_POINT):
            raise InvalidInputError(
                f"unknown interpolation {self.interpolation!r}"
            )
        object.__setattr__(self, "iou_thresholds", thrs)

    @classmethod
    def voc50(cls) -> "EvalConfig":
        return cls((0.5,), VOC_ALL_POINT)

    @classmethod
    def coco(cls) -> "EvalConfig":
        thrs = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))
        return cls(thrs, COCO_101_POINT)

    @classmethod
    def preset(cls, name: str) -> "EvalConfig":
        if name == "voc50":
            return cls.voc50()
        if name == "coco":
            return cls.coco()
        raise InvalidInputError(f"unknown protocol preset {name!r}")


@dataclass(frozen=True)
class ThresholdResult:
    ap: float
    tp: int
    fp: int
    missed: int
    pr: PRCurve


@dataclass(frozen=True)
class ClassResult:
    class_id: int
    n_gt: int
    by_threshold: dict[float, ThresholdResult]


@dataclass(frozen=True)
class EvalReport:
    """Per-class AP table, per-threshold mAP, and their grand mean."""

    config: EvalConfig
    classes: dict[int, ClassResult]
    undefined_ap_classes: tuple[int, ...]
    map_by_threshold: dict[float, float]

    @property
    def map(self) -> float:
        values = list(self.map_by_threshold.values())
        return float(np.mean(values))

    def to_json(self, class_names: dict[int, str] | None = None) -> str:
        names = class_names or {}
        payload = {
            "config": {
                "iou_thresholds": list(self.config.iou_thresholds),
                "interpolation": self.config.interpolation,
                "score_floor": self.config.score_floor,
            },
            "map": self.map,
            "map_by_threshold": {
                repr(t): v for t, v in sorted(self.map_by_threshold.items())
            },
            "classes": {
                str(cid): {
                    "name": names.get(cid),
                    "n_gt": res.n_gt,
                    "thresholds": {
                        repr(t): {
                            "ap": tr.ap,
                            "tp": tr.tp,
                            "fp": tr.fp,
                            "missed": tr.missed,
                            "pr": [
                                [r, p]
                                for r, p in zip(tr.pr.recall, tr.pr.precision)
                            ],
                        }
                        for t, tr in sorted(res.by_threshold.items())
                    },
                }
                for cid, res in sorted(self.classes.items())
            },
            "undefined_ap_classes": list(self.undefined_ap_classes),
            "undefined_ap_count": len(self.undefined_ap_classes),
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def pr_csv(self, class_names: dict[int, str] | None = None) -> str:
        """PR samples as ``class,threshold,recall,precision`` rows."""
        names = class_names or {}
        lines = ["class,threshold,recall,precision"]
        for cid, res in sorted(self.classes.items()):
            label = names.get(cid, str(cid))
            for t, tr in sorted(res.by_threshold.items()):
                for r, p in zip(tr.pr.recall, tr.pr.precision):
                    lines.append(f"{label},{t!r},{r!r},{p!r}")
        return "\n".join(lines) + "\n"


def evaluate(
    dets: list[Detection], gts: list[GroundTruth], cfg: EvalConfig
) -> EvalReport:
    """Run the full protocol over pooled detections and ground truths.

    Classes with ground truth get an AP at every threshold; classes
    carrying only detections have undefined AP and are excluded from the
    mAP mean (counted in the report).  mAP averages defined class APs
    per threshold, then averages the thresholds.
    """
    if not gts:
        raise InvalidInputError("evaluate requires a nonempty ground-truth set")
    dets = [d for d in dets if d.score >= cfg.score_floor]
    class_ids = sorted({g.class_id for g in gts} | {d.class_id for d in dets})

    classes: dict[int, ClassResult] = {}
    undefined: list[int] = []
    for cid in class_ids:
        cls_dets = [(i, d) for i, d in enumerate(dets) if d.class_id == cid]
        cls_gts = [g for g in gts if g.class_id == cid]
        n_gt = len(cls_gts)
        if n_gt == 0:
            if cls_dets:
                undefined.append(cid)
            continue
        gts_by_image: dict[str, list[GroundTruth]] = {}
        for g in cls_gts:
            gts_by_image.setdefault(g.image_id, []).append(g)
        dets_by_image: dict[str, list[tuple[int, Detection]]] = {}
        for i, d in cls_dets:
            dets_by_image.setdefault(d.image_id, []).append((i, d))
        # global score order with input order as the tiebreak
        pooled = sorted(cls_dets, key=lambda pair: (-pair[1].score, pair[0]))
        by_threshold: dict[float, ThresholdResult] = {}
        for thr in cfg.iou_thresholds:
            flag_of: dict[int, bool] = {}
            for image_id, pairs in dets_by_image.items():
                flags = match_detections(
                    [d for _, d in pairs], gts_by_image.get(image_id, []), thr
                )
                for (i, _), flag in zip(pairs, flags):
                    flag_of[i] = flag
            ordered_flags = [flag_of[i] for i, _ in pooled]
            pr = precision_recall(ordered_flags, n_gt)
            ap = average_precision(pr, cfg.interpolation)
            tp = sum(ordered_flags)
            by_threshold[thr] = ThresholdResult(
                ap=ap, tp=tp, fp=len(ordered_flags) - tp, missed=n_gt - tp, pr=pr
            )
        classes[cid] = ClassResult(class_id=cid, n_gt=n_gt, by_threshold=by_threshold)

    map_by_threshold = {
        thr: float(np.mean([classes[cid].by_threshold[thr].ap for cid in classes]))
        for thr in cfg.iou_thresholds
    }
    return EvalReport(
        config=cfg,
        classes=classes,
        undefined_ap_classes=tuple(undefined),
        map_by_threshold=map_by_threshold,
    )
