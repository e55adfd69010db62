"""
评估指标 - 帧输出准确率、简化的关联准确率
"""
from collections import Counter
from dataclasses import replace
from math import comb
from typing import AbstractSet, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from ..model.world import MovableObject
from ..processing.hungarian import hungarian
from ..processing.tracker import iou

MATCH_IOU = 0.5


def frames_of(matches: Iterable[Tuple[int, Tuple[str, ...]]]) -> Set[int]:
    return {frame for frame, _ in matches}


def frame_output_accuracy(baseline: Iterable[int], plan: Iterable[int], total: int) -> float:
    """计划与基线同时输出或同时丢弃的帧数 / 总帧数"""
    if total <= 0:
        return 1.0
    baseline, plan = set(baseline), set(plan)
    outside = [f for f in baseline | plan if not 0 <= f < total]
    if outside:
        raise ValueError(f"frame {outside[0]} is outside [0, {total})")
    return (total - len(baseline ^ plan)) / total


def restrict_tracks(
    objects: Sequence[MovableObject],
    object_types: Optional[AbstractSet[str]] = None,
    frames: Optional[Iterable[int]] = None,
) -> List[MovableObject]:
    """只保留指定类型的物体和指定帧上的采样（None 表示不限制），没有剩余采样的物体丢弃"""
    keep = None if frames is None else set(frames)
    restricted = []
    for obj in objects:
        if object_types is not None and obj.object_type not in object_types:
            continue
        samples = obj.samples if keep is None else tuple(s for s in obj.samples if s.frame_index in keep)
        if samples:
            restricted.append(replace(obj, samples=samples))
    return restricted


def _match_frame(gt: Sequence[Tuple[str, tuple]], pred: Sequence[Tuple[str, tuple]]) -> Dict[str, str]:
    """单帧真值框 -> 预测轨迹ID，IoU 低于阈值的不匹配"""
    if not gt or not pred:
        return {}
    cost = np.full((len(gt), len(pred)), np.inf)
    for i, (_, a) in enumerate(gt):
        for j, (_, b) in enumerate(pred):
            overlap = iou(a, b)
            if overlap >= MATCH_IOU:
                cost[i, j] = 1.0 - overlap
    return {gt[i][0]: pred[j][0] for i, j in hungarian(cost).items()}


def assign_predictions(
    ground_truth: Sequence[MovableObject],
    predicted: Sequence[MovableObject],
) -> Dict[str, List[Optional[str]]]:
    """每个真值物体的每个采样被分配到的预测轨迹（未匹配为 None）"""
    gt_by_frame: Dict[int, List[Tuple[str, tuple]]] = {}
    pred_by_frame: Dict[int, List[Tuple[str, tuple]]] = {}
    for obj in ground_truth:
        for s in obj.samples:
            gt_by_frame.setdefault(s.frame_index, []).append((obj.oid, s.bbox))
    for obj in predicted:
        for s in obj.samples:
            pred_by_frame.setdefault(s.frame_index, []).append((obj.oid, s.bbox))

    assigned: Dict[str, List[Optional[str]]] = {obj.oid: [] for obj in ground_truth}
    for frame in sorted(gt_by_frame):
        matched = _match_frame(gt_by_frame[frame], pred_by_frame.get(frame, []))
        for oid, _ in gt_by_frame[frame]:
            assigned[oid].append(matched.get(oid))
    return assigned


def association_accuracy_simple(ground_truth: Sequence[MovableObject], predicted: Sequence[MovableObject]) -> float:
    """
    同一真值物体的检测两两配对，落在同一条预测轨迹里的配对所占比例

    未匹配到任何预测的检测参与分母，不参与分子。
    """
    same = total = 0
    for labels in assign_predictions(ground_truth, predicted).values():
        total += comb(len(labels), 2)
        counts = Counter(label for label in labels if label is not None)
        same += sum(comb(n, 2) for n in counts.values())
    if total == 0:
        return 1.0
    return same / total
