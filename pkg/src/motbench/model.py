"""Geometric and annotation domain types shared across the evaluation engine.

Boxes are continuous rectangles in 1-based image coordinates (top-left origin,
y grows downward).  Coordinates may be negative or exceed the frame size:
annotations routinely extend past the image borders for cropped targets.
Width and height must be strictly positive.

All types are immutable after construction and all operations are pure
functions, so everything here is safe to share across worker threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import AbstractSet, Iterable, Sequence

import numpy as np


class ObjectClass(IntEnum):
    """Annotation label classes, keyed by the integer code used in GT files."""

    OTHER = 0  # lenient-parse bucket for unknown codes
    PEDESTRIAN = 1
    PERSON_ON_VEHICLE = 2
    CAR = 3
    BICYCLE = 4
    MOTORBIKE = 5
    NON_MOTORIZED_VEHICLE = 6
    STATIC_PERSON = 7
    DISTRACTOR = 8
    OCCLUDER = 9
    OCCLUDER_ON_GROUND = 10
    OCCLUDER_FULL = 11
    REFLECTION = 12


#: Classes a tracker is neither penalized nor rewarded for following.
NEUTRAL_CLASSES = frozenset({
    ObjectClass.PERSON_ON_VEHICLE,
    ObjectClass.STATIC_PERSON,
    ObjectClass.DISTRACTOR,
    ObjectClass.REFLECTION,
})

#: Classes that hide objects behind them when deriving visibility.
DEFAULT_OCCLUDER_CLASSES = frozenset({
    ObjectClass.PEDESTRIAN,
    ObjectClass.OCCLUDER,
    ObjectClass.OCCLUDER_ON_GROUND,
    ObjectClass.OCCLUDER_FULL,
})


@dataclass(frozen=True)
class Box:
    """Axis-aligned bounding box given as top-left corner plus extent."""

    left: float
    top: float
    width: float
    height: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "left", float(self.left))
        object.__setattr__(self, "top", float(self.top))
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "height", float(self.height))
        if not self.width > 0 or not self.height > 0:
            raise ValueError(
                f"box extent must be positive, got width={self.width} height={self.height}"
            )

    @property
    def right(self) -> float:
        return self.left + self.width

    @property
    def bottom(self) -> float:
        """Lower edge in image coordinates; larger values are closer to the camera."""
        return self.top + self.height

    @property
    def area(self) -> float:
        return self.width * self.height


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two boxes, on continuous areas.

    Returns a value in [0, 1]; 1.0 only for identical boxes, 0.0 when the
    boxes do not overlap.  Symmetric in its arguments.
    """
    inter_w = min(a.right, b.right) - max(a.left, b.left)
    if inter_w <= 0:
        return 0.0
    inter_h = min(a.bottom, b.bottom) - max(a.top, b.top)
    if inter_h <= 0:
        return 0.0
    inter = inter_w * inter_h
    return inter / (a.area + b.area - inter)


def pairwise_iou(a: Sequence[Box], b: Sequence[Box]) -> np.ndarray:
    """IoU of every box pair as a ``len(a) x len(b)`` array.

    Same arithmetic as :func:`iou`, vectorized for the per-frame matching
    matrices.
    """
    if not a or not b:
        return np.zeros((len(a), len(b)))
    a_left = np.array([x.left for x in a])
    a_top = np.array([x.top for x in a])
    a_right = np.array([x.right for x in a])
    a_bottom = np.array([x.bottom for x in a])
    b_left = np.array([x.left for x in b])
    b_top = np.array([x.top for x in b])
    b_right = np.array([x.right for x in b])
    b_bottom = np.array([x.bottom for x in b])
    inter_w = np.minimum(a_right[:, None], b_right[None, :]) - np.maximum(
        a_left[:, None], b_left[None, :]
    )
    inter_h = np.minimum(a_bottom[:, None], b_bottom[None, :]) - np.maximum(
        a_top[:, None], b_top[None, :]
    )
    inter = np.clip(inter_w, 0.0, None) * np.clip(inter_h, 0.0, None)
    area_a = (a_right - a_left) * (a_bottom - a_top)
    area_b = (b_right - b_left) * (b_bottom - b_top)
    return inter / (area_a[:, None] + area_b[None, :] - inter)


@dataclass(frozen=True)
class BoxEntry:
    """One parsed file row: a box observed in one frame.

    ``confidence`` carries the detector score for detections and the 0/1
    consider-flag for ground truth and result rows.  ``object_class`` and
    ``visibility`` are only meaningful for ground truth; parsers default them
    to pedestrian / fully visible everywhere else.
    """

    frame: int
    track_id: int
    box: Box
    confidence: float = 1.0
    object_class: ObjectClass = ObjectClass.PEDESTRIAN
    visibility: float = 1.0

    def __post_init__(self) -> None:
        if self.frame < 1:
            raise ValueError(f"frame index must be >= 1, got {self.frame}")

    @property
    def is_active(self) -> bool:
        """Whether the consider-flag marks this entry for evaluation."""
        return self.confidence != 0


@dataclass(frozen=True)
class SequenceData:
    """All entries of one sequence plus its frame-count metadata.

    ``fps`` is reporting metadata only; it never influences any metric.
    """

    name: str
    num_frames: int
    gt: tuple[BoxEntry, ...] = ()
    results: tuple[BoxEntry, ...] = ()
    detections: tuple[BoxEntry, ...] = ()
    fps: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "gt", tuple(self.gt))
        object.__setattr__(self, "results", tuple(self.results))
        object.__setattr__(self, "detections", tuple(self.detections))
        if self.num_frames <= 0:
            raise ValueError(f"sequence {self.name!r}: num_frames must be > 0")
        for kind, entries in (("gt", self.gt), ("results", self.results),
                              ("detections", self.detections)):
            for e in entries:
                if not 1 <= e.frame <= self.num_frames:
                    raise ValueError(
                        f"sequence {self.name!r}: {kind} entry at frame {e.frame} "
                        f"outside [1, {self.num_frames}]"
                    )


def _union_area_within(target: Box, boxes: Iterable[Box]) -> float:
    """Area of ``target`` covered by the union of ``boxes``.

    Exact sweep over compressed x coordinates; no rasterization, so the result
    does not depend on image resolution.
    """
    clipped = []
    for b in boxes:
        left = max(b.left, target.left)
        right = min(b.right, target.right)
        top = max(b.top, target.top)
        bottom = min(b.bottom, target.bottom)
        if right > left and bottom > top:
            clipped.append((left, right, top, bottom))
    if not clipped:
        return 0.0
    xs = sorted({x for left, right, _, _ in clipped for x in (left, right)})
    area = 0.0
    for x0, x1 in zip(xs, xs[1:]):
        if x1 <= x0:
            continue
        spans = sorted(
            (top, bottom)
            for left, right, top, bottom in clipped
            if left <= x0 and right >= x1
        )
        covered = 0.0
        cur_top = cur_bottom = None
        for top, bottom in spans:
            if cur_top is None:
                cur_top, cur_bottom = top, bottom
            elif top <= cur_bottom:
                cur_bottom = max(cur_bottom, bottom)
            else:
                covered += cur_bottom - cur_top
                cur_top, cur_bottom = top, bottom
        if cur_top is not None:
            covered += cur_bottom - cur_top
        area += covered * (x1 - x0)
    return area


def derive_visibility(
    frame_gt: Sequence[BoxEntry],
    occluder_classes: AbstractSet[ObjectClass] = DEFAULT_OCCLUDER_CLASSES,
) -> dict[int, float]:
    """Visibility ratio of every annotated object in one frame.

    An object is hidden by the union of occluding boxes whose bottom edge lies
    below its own (closer to the camera).  Equal bottom edges break the tie by
    letting the larger box occlude the smaller one, never the reverse, which
    keeps the result deterministic and order-independent.

    All entries must share one frame index.  Returns ``track_id -> ratio``.
    """
    frames = {e.frame for e in frame_gt}
    if len(frames) > 1:
        raise ValueError(f"entries span multiple frames: {sorted(frames)}")
    out: dict[int, float] = {}
    for entry in frame_gt:
        occluders = []
        for other in frame_gt:
            if other is entry or other.object_class not in occluder_classes:
                continue
            if other.box.bottom > entry.box.bottom or (
                other.box.bottom == entry.box.bottom
                and other.box.area > entry.box.area
            ):
                occluders.append(other.box)
        covered = _union_area_within(entry.box, occluders)
        out[entry.track_id] = max(0.0, 1.0 - covered / entry.box.area)
    return out
