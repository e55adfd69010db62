"""
匈牙利算法（势函数版本，O(n^2 m)）

+inf 表示禁止的配对，结果中不会出现。
"""
from typing import Dict, Sequence

import numpy as np


def hungarian(cost: Sequence[Sequence[float]]) -> Dict[int, int]:
    """最小代价匹配，返回 行 -> 列"""
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2 or c.size == 0:
        return {}

    transposed = c.shape[0] > c.shape[1]
    if transposed:
        c = c.T
    n, m = c.shape

    finite = np.isfinite(c)
    if not finite.any():
        return {}
    # 禁止配对的代价足够大，先最小化禁止配对数，再最小化总代价
    big = (float(np.abs(c[finite]).sum()) + 1.0) * (n + 1)
    work = np.where(finite, c, big)

    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    p = np.zeros(m + 1, dtype=int)
    way = np.zeros(m + 1, dtype=int)

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            reduced = work[i0 - 1] - u[i0] - v[1:]
            better = free & (reduced < minv[1:])
            minv[1:][better] = reduced[better]
            way[1:][better] = j0

            candidates = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(candidates)) + 1
            delta = candidates[j1 - 1]

            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta

            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    result: Dict[int, int] = {}
    for j in range(1, m + 1):
        i = p[j]
        if i and finite[i - 1, j - 1]:
            if transposed:
                result[j - 1] = i - 1
            else:
                result[i - 1] = j - 1
    return result


def assignment_cost(cost: Sequence[Sequence[float]], assignment: Dict[int, int]) -> float:
    c = np.asarray(cost, dtype=float)
    return float(sum(c[i, j] for i, j in assignment.items()))
