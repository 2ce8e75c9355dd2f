"""Per-frame tracker-to-target matching.

The matching protocol, applied frame by frame:

1.  Preprocessing.  Every result box is matched against *all* ground-truth
    boxes of the frame (any class, any consider-flag) with one min-cost pass.
    Result boxes whose matched ground-truth box belongs to a neutral class
    (person on vehicle, static person, distractor, reflection) at an overlap
    strictly above the threshold are excluded from scoring: the tracker is
    neither penalized nor rewarded for following them.  Only ground-truth
    boxes that are pedestrians with an active consider-flag enter the scoring
    set; inactive entries never count as false negatives or true positives.

2.  Carryover.  A pair matched in the previous frame stays matched in the
    current frame whenever its overlap is still at or above the threshold,
    even if another hypothesis is closer to the target.

3.  Fresh matching.  The remaining targets and hypotheses are matched by the
    Hungarian algorithm on cost 1 - IoU; pairs below the overlap threshold are
    infeasible.  Unmatched targets become false negatives, unmatched
    hypotheses false positives.

An identity switch is recorded when a target is matched to a hypothesis that
differs from the target's last known assignment anywhere earlier in the
sequence; the memory survives untracked gaps and never expires within a
sequence.

Equal-cost assignments are broken deterministically in favor of pairs that
come first in (target id, hypothesis id) order, so repeated runs and runs
with different parallelism produce identical output.  Cost differences below
roughly 1e-9 are treated as ties.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import NEUTRAL_CLASSES, BoxEntry, ObjectClass, SequenceData, iou, pairwise_iou

# Any matching that uses one more feasible pair beats any cost total, so the
# solver maximizes match count before minimizing cost.
_INFEASIBLE = 1.0e9


@dataclass(frozen=True)
class MatchingConfig:
    """Knobs of the matching protocol."""

    iou_threshold: float = 0.5
    neutral_classes: frozenset[ObjectClass] = NEUTRAL_CLASSES

    def __post_init__(self) -> None:
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValueError(f"iou_threshold must be in (0, 1], got {self.iou_threshold}")


@dataclass(frozen=True)
class FrameEvents:
    """Assignment outcome of a single frame."""

    frame: int
    matches: tuple[tuple[int, int, float], ...]  # (gt_id, pred_id, overlap)
    fp_ids: tuple[int, ...]
    fn_ids: tuple[int, ...]
    idsw_ids: tuple[int, ...]


@dataclass
class EventLog:
    """Assignment outcomes of a whole sequence.

    ``gt_frames`` records, per ground-truth track, the frames that carry a
    scoreable box; it defines each track's life span for coverage metrics.
    """

    name: str
    num_frames: int
    events: list[FrameEvents] = field(default_factory=list)
    gt_frames: dict[int, list[int]] = field(default_factory=dict)

    def matched_frames(self) -> dict[int, set[int]]:
        """Frames in which each ground-truth track was matched."""
        out: dict[int, set[int]] = defaultdict(set)
        for ev in self.events:
            for gt_id, _, _ in ev.matches:
                out[gt_id].add(ev.frame)
        return dict(out)

    def track_status(self, gt_id: int) -> list[bool]:
        """Tracked/untracked timeline over the track's life span, inclusive."""
        frames = self.gt_frames.get(gt_id)
        if not frames:
            return []
        matched = self.matched_frames().get(gt_id, set())
        first, last = min(frames), max(frames)
        return [t in matched for t in range(first, last + 1)]

    def assignment_history(self) -> list[dict[int, int]]:
        """Per-frame target-to-hypothesis maps, i.e. the carryover state."""
        return [{g: p for g, p, _ in ev.matches} for ev in self.events]


def _min_cost_matching(
    gt_entries: list[BoxEntry],
    res_entries: list[BoxEntry],
    threshold: float,
) -> list[tuple[BoxEntry, BoxEntry, float]]:
    """Max-cardinality, then min-cost matching over pairs with IoU >= threshold.

    Both entry lists must be sorted by track id; the tiny rank perturbation
    below prefers earlier (gt, hypothesis) pairs among equal-cost optima.
    """
    if not gt_entries or not res_entries:
        return []
    n, m = len(gt_entries), len(res_entries)
    overlaps = pairwise_iou([g.box for g in gt_entries], [r.box for r in res_entries])
    cost = np.full((n, m), _INFEASIBLE)
    feasible = overlaps >= threshold
    tiebreak = np.arange(n * m, dtype=float).reshape(n, m) * (1.0e-9 / (n * m))
    cost[feasible] = (1.0 - overlaps + tiebreak)[feasible]
    rows, cols = linear_sum_assignment(cost)
    return [
        (gt_entries[i], res_entries[j], overlaps[i, j])
        for i, j in zip(rows, cols)
        if feasible[i, j]
    ]


def preprocess_frame(
    gt_frame: list[BoxEntry],
    res_frame: list[BoxEntry],
    cfg: MatchingConfig = MatchingConfig(),
) -> tuple[list[BoxEntry], list[BoxEntry], list[BoxEntry]]:
    """Apply the neutral-class filter to one frame.

    Returns ``(kept_gt, kept_res, removed_res)``: the scoreable ground truth
    (active pedestrians), the surviving result boxes, and the result boxes
    dropped for following a neutral-class annotation.  Pedestrian matches made
    here are discarded; scoring re-derives them with carryover applied.
    """
    gt_sorted = sorted(gt_frame, key=lambda e: e.track_id)
    res_sorted = sorted(res_frame, key=lambda e: e.track_id)
    removed: list[BoxEntry] = []
    if gt_sorted and res_sorted:
        for g, r, overlap in _min_cost_matching(gt_sorted, res_sorted, cfg.iou_threshold):
            if g.object_class in cfg.neutral_classes and overlap > cfg.iou_threshold:
                removed.append(r)
    removed_ids = {r.track_id for r in removed}
    kept_res = [r for r in res_sorted if r.track_id not in removed_ids]
    kept_gt = [
        g for g in gt_sorted
        if g.object_class is ObjectClass.PEDESTRIAN and g.is_active
    ]
    return kept_gt, kept_res, removed


def match_frame(
    kept_gt: list[BoxEntry],
    kept_res: list[BoxEntry],
    prev_assignment: dict[int, int],
    last_assignment: dict[int, int],
    cfg: MatchingConfig = MatchingConfig(),
    frame: int | None = None,
) -> tuple[FrameEvents, dict[int, int]]:
    """Match one preprocessed frame; returns its events and the new assignment.

    ``prev_assignment`` holds the previous frame's matches (carryover source);
    ``last_assignment`` holds each target's last known hypothesis anywhere in
    the sequence (identity-switch reference).  Neither dict is mutated.
    """
    if frame is None:
        frame = kept_gt[0].frame if kept_gt else (kept_res[0].frame if kept_res else 0)
    gt_by_id = {g.track_id: g for g in kept_gt}
    res_by_id = {r.track_id: r for r in kept_res}

    matches: list[tuple[int, int, float]] = []
    for gt_id, pred_id in sorted(prev_assignment.items()):
        g = gt_by_id.get(gt_id)
        r = res_by_id.get(pred_id)
        if g is None or r is None:
            continue
        overlap = iou(g.box, r.box)
        if overlap >= cfg.iou_threshold:
            matches.append((gt_id, pred_id, overlap))

    taken_gt = {gt_id for gt_id, _, _ in matches}
    taken_res = {pred_id for _, pred_id, _ in matches}
    rem_gt = sorted(
        (g for g in kept_gt if g.track_id not in taken_gt), key=lambda e: e.track_id
    )
    rem_res = sorted(
        (r for r in kept_res if r.track_id not in taken_res), key=lambda e: e.track_id
    )
    for g, r, overlap in _min_cost_matching(rem_gt, rem_res, cfg.iou_threshold):
        matches.append((g.track_id, r.track_id, overlap))
    matches.sort()

    matched_gt = {gt_id for gt_id, _, _ in matches}
    matched_res = {pred_id for _, pred_id, _ in matches}
    fn_ids = tuple(sorted(g.track_id for g in kept_gt if g.track_id not in matched_gt))
    fp_ids = tuple(sorted(r.track_id for r in kept_res if r.track_id not in matched_res))
    idsw_ids = tuple(
        gt_id for gt_id, pred_id, _ in matches
        if last_assignment.get(gt_id, pred_id) != pred_id
    )
    events = FrameEvents(
        frame=frame,
        matches=tuple(matches),
        fp_ids=fp_ids,
        fn_ids=fn_ids,
        idsw_ids=idsw_ids,
    )
    return events, {gt_id: pred_id for gt_id, pred_id, _ in matches}


def preprocess_sequence(
    seq: SequenceData,
    cfg: MatchingConfig = MatchingConfig(),
) -> list[tuple[int, list[BoxEntry], list[BoxEntry]]]:
    """Preprocess every frame of a sequence.

    Returns one ``(frame, kept_gt, kept_res)`` triple per frame in order.
    Both the frame-level metrics and the identity metrics must score exactly
    this box set, so compute it once and share it.
    """
    gt_by_frame: dict[int, list[BoxEntry]] = defaultdict(list)
    res_by_frame: dict[int, list[BoxEntry]] = defaultdict(list)
    for e in seq.gt:
        gt_by_frame[e.frame].append(e)
    for e in seq.results:
        res_by_frame[e.frame].append(e)
    out = []
    for t in range(1, seq.num_frames + 1):
        kept_gt, kept_res, _ = preprocess_frame(gt_by_frame[t], res_by_frame[t], cfg)
        out.append((t, kept_gt, kept_res))
    return out


def run_sequence(
    seq: SequenceData,
    cfg: MatchingConfig = MatchingConfig(),
    preprocessed: list[tuple[int, list[BoxEntry], list[BoxEntry]]] | None = None,
) -> EventLog:
    """Evaluate a whole sequence, threading carryover and last-known state."""
    if preprocessed is None:
        preprocessed = preprocess_sequence(seq, cfg)
    log = EventLog(name=seq.name, num_frames=seq.num_frames)
    prev_assignment: dict[int, int] = {}
    last_assignment: dict[int, int] = {}
    for t, kept_gt, kept_res in preprocessed:
        for g in kept_gt:
            log.gt_frames.setdefault(g.track_id, []).append(t)
        events, assignment = match_frame(
            kept_gt, kept_res, prev_assignment, last_assignment, cfg, frame=t
        )
        log.events.append(events)
        last_assignment.update(assignment)
        prev_assignment = assignment
    return log
