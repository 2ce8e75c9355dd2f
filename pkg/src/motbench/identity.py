"""Identity metrics from a global track-level bipartite matching.

Unlike the frame-level metrics, the target-to-hypothesis mapping here is
decided once for the entire sequence: whole tracks are paired so that the
total number of frames on which paired tracks disagree is minimal.  Dummy
nodes absorb unmatched tracks at the cost of their full length, so the
optimal matching pairs tracks with the largest temporal overlap.

From the optimal matching, identity true positives (IDTP) are the co-detected
frames of matched pairs; every other ground-truth box is an identity false
negative (IDFN) and every other predicted box an identity false positive
(IDFP).  Precision, recall, and their harmonic mean follow.

The same neutral-class preprocessing used by the frame-level metrics must be
applied before building the table, so both metric families score one and the
same box set.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import BoxEntry, pairwise_iou


@dataclass(frozen=True)
class TrackMatchTable:
    """Per-pair temporal overlap counts between whole tracks.

    ``co_detections[(i, j)]`` is the number of frames on which ground-truth
    track ``i`` and predicted track ``j`` both have a box overlapping at or
    above the matching threshold.  A frame contributes at most one count per
    pair; no per-frame exclusivity is imposed at table-build time.
    """

    gt_lengths: Mapping[int, int]
    pred_lengths: Mapping[int, int]
    co_detections: Mapping[tuple[int, int], int]


@dataclass(frozen=True)
class IdentityScores:
    idtp: int
    idfp: int
    idfn: int
    idp: float | None
    idr: float | None
    idf1: float | None
    matches: tuple[tuple[int, int], ...] = ()


def _scores_from_counts(
    idtp: int, idfp: int, idfn: int, matches: tuple[tuple[int, int], ...] = ()
) -> IdentityScores:
    idp = 100.0 * idtp / (idtp + idfp) if (idtp + idfp) > 0 else None
    idr = 100.0 * idtp / (idtp + idfn) if (idtp + idfn) > 0 else None
    denom = 2 * idtp + idfp + idfn
    idf1 = 100.0 * 2 * idtp / denom if denom > 0 else None
    return IdentityScores(
        idtp=idtp, idfp=idfp, idfn=idfn, idp=idp, idr=idr, idf1=idf1, matches=matches
    )


def build_table(
    gt_entries: Iterable[BoxEntry],
    pred_entries: Iterable[BoxEntry],
    iou_threshold: float = 0.5,
) -> TrackMatchTable:
    """Count per-frame spatial co-detections for every track pair."""
    gt_by_frame: dict[int, list[BoxEntry]] = defaultdict(list)
    pred_by_frame: dict[int, list[BoxEntry]] = defaultdict(list)
    gt_lengths: Counter[int] = Counter()
    pred_lengths: Counter[int] = Counter()
    for e in gt_entries:
        gt_by_frame[e.frame].append(e)
        gt_lengths[e.track_id] += 1
    for e in pred_entries:
        pred_by_frame[e.frame].append(e)
        pred_lengths[e.track_id] += 1

    co: Counter[tuple[int, int]] = Counter()
    for frame, gts in gt_by_frame.items():
        preds = pred_by_frame.get(frame)
        if not preds:
            continue
        overlaps = pairwise_iou([g.box for g in gts], [p.box for p in preds])
        for i, j in zip(*np.nonzero(overlaps >= iou_threshold)):
            co[(gts[i].track_id, preds[j].track_id)] += 1
    return TrackMatchTable(
        gt_lengths=dict(gt_lengths),
        pred_lengths=dict(pred_lengths),
        co_detections=dict(co),
    )


def solve_identity(table: TrackMatchTable) -> IdentityScores:
    """Optimal track pairing and the identity scores it induces.

    The bipartite problem is augmented with dummy nodes so every track is
    matched: pairing real tracks i and j costs the frames where either exists
    without the other co-detecting, ``(len_i - co) + (len_j - co)``; pairing
    with a dummy costs the full track length.  Equal-cost optima are broken
    toward pairs earlier in (gt id, pred id) order.
    """
    gt_ids = sorted(table.gt_lengths)
    pred_ids = sorted(table.pred_lengths)
    n, m = len(gt_ids), len(pred_ids)
    total_gt = sum(table.gt_lengths.values())
    total_pred = sum(table.pred_lengths.values())

    idtp = 0
    matches: list[tuple[int, int]] = []
    if n and m:
        gt_len = np.array([table.gt_lengths[i] for i in gt_ids], dtype=float)
        pred_len = np.array([table.pred_lengths[j] for j in pred_ids], dtype=float)
        co = np.zeros((n, m))
        gt_index = {gt_id: i for i, gt_id in enumerate(gt_ids)}
        pred_index = {pred_id: j for j, pred_id in enumerate(pred_ids)}
        for (gt_id, pred_id), count in table.co_detections.items():
            co[gt_index[gt_id], pred_index[pred_id]] = count

        cost = np.zeros((n + m, n + m))
        cost[:n, :m] = gt_len[:, None] + pred_len[None, :] - 2.0 * co
        cost[:n, :m] += np.arange(n * m, dtype=float).reshape(n, m) * (1e-9 / (n * m))
        cost[:n, m:] = gt_len[:, None]      # gt paired with a dummy: all frames missed
        cost[n:, :m] = pred_len[None, :]    # prediction paired with a dummy: all frames false
        rows, cols = linear_sum_assignment(cost)
        for i, j in zip(rows, cols):
            if i < n and j < m and co[i, j] > 0:
                idtp += int(co[i, j])
                matches.append((gt_ids[i], pred_ids[j]))

    return _scores_from_counts(
        idtp, total_pred - idtp, total_gt - idtp, tuple(sorted(matches))
    )


def evaluate_identity(
    preprocessed: Sequence[tuple[int, list[BoxEntry], list[BoxEntry]]],
    iou_threshold: float = 0.5,
) -> IdentityScores:
    """Identity scores of one sequence from its preprocessed frames."""
    gt_entries = [g for _, kept_gt, _ in preprocessed for g in kept_gt]
    pred_entries = [r for _, _, kept_res in preprocessed for r in kept_res]
    return solve_identity(build_table(gt_entries, pred_entries, iou_threshold))


def pool_identity(scores: Iterable[IdentityScores]) -> IdentityScores:
    """Benchmark-level identity scores: sum the counts, then take ratios."""
    idtp = idfp = idfn = 0
    for s in scores:
        idtp += s.idtp
        idfp += s.idfp
        idfn += s.idfn
    return _scores_from_counts(idtp, idfp, idfn)
