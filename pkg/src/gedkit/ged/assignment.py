"""Linear sum assignment on square cost matrices.

``hungarian`` is the Kuhn-Munkres method with starred and primed zeros.
``lapjv`` is the Jonker-Volgenant method: column reduction, reduction
transfer, augmenting row reduction, then shortest augmenting paths.
Both return ``col_of_row`` (column assigned to each row).
"""

from __future__ import annotations

import numpy as np


def _square(cost) -> np.ndarray:
    c = np.array(cost, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"expected a square cost matrix, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix must be finite")
    return c


def assignment_cost(cost, col_of_row) -> float:
    cost = np.asarray(cost)
    return float(cost[np.arange(len(col_of_row)), col_of_row].sum())


def hungarian(cost) -> np.ndarray:
    c = _square(cost)
    n = c.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.intp)
    c -= c.min(axis=1, keepdims=True)
    c -= c.min(axis=0, keepdims=True)

    starred = np.zeros((n, n), dtype=bool)
    primed = np.zeros((n, n), dtype=bool)
    row_cov = np.zeros(n, dtype=bool)
    col_cov = np.zeros(n, dtype=bool)

    for i, j in zip(*np.nonzero(c == 0)):
        if not row_cov[i] and not col_cov[j]:
            starred[i, j] = True
            row_cov[i] = col_cov[j] = True
    row_cov[:] = False
    col_cov[:] = False

    while True:
        col_cov[:] = starred.any(axis=0)
        if col_cov.sum() == n:
            break
        while True:
            free = (c == 0) & ~row_cov[:, None] & ~col_cov[None, :]
            hits = np.argwhere(free)
            if len(hits) == 0:
                uncov = c[~row_cov][:, ~col_cov]
                m = uncov.min()
                c[np.ix_(~row_cov, ~col_cov)] -= m
                c[np.ix_(row_cov, col_cov)] += m
                continue
            i, j = hits[0]
            primed[i, j] = True
            star_cols = np.flatnonzero(starred[i])
            if len(star_cols):
                row_cov[i] = True
                col_cov[star_cols[0]] = False
                continue
            # augment along the alternating path of primes and stars starting at (i, j)
            path = [(i, j)]
            while True:
                star_rows = np.flatnonzero(starred[:, path[-1][1]])
                if not len(star_rows):
                    break
                r = star_rows[0]
                path.append((r, path[-1][1]))
                path.append((r, np.flatnonzero(primed[r])[0]))
            for r, q in path:
                starred[r, q] = not starred[r, q]
            primed[:] = False
            row_cov[:] = False
            col_cov[:] = False
            break
    return np.argmax(starred, axis=1).astype(np.intp)


def lapjv(cost) -> np.ndarray:
    c = _square(cost)
    n = c.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.intp)
    x = np.full(n, -1, dtype=np.intp)  # column of row
    y = np.full(n, -1, dtype=np.intp)  # row of column
    v = np.zeros(n)

    # column reduction, scanning columns from last to first
    matches = np.zeros(n, dtype=np.intp)
    for j in range(n - 1, -1, -1):
        i = int(np.argmin(c[:, j]))
        v[j] = c[i, j]
        matches[i] += 1
        if matches[i] == 1:
            x[i], y[j] = j, i
        elif v[j] < v[x[i]]:
            y[x[i]] = -1
            x[i], y[j] = j, i

    # reduction transfer from singly-matched rows
    free = []
    for i in range(n):
        if x[i] < 0:
            free.append(i)
        elif matches[i] == 1:
            j1 = x[i]
            red = c[i] - v
            red[j1] = np.inf
            v[j1] -= red.min() if n > 1 else 0.0

    for _ in range(2):
        free = _augmenting_row_reduction(c, free, x, y, v)

    for f in free:
        _augment(c, f, x, y, v)
    return x


def _augmenting_row_reduction(c, free, x, y, v) -> list:
    n = c.shape[0]
    if n == 1:
        return free
    queue = list(free)
    new_free = []
    k = 0
    # near-tied costs can make two rows trade a column for many tiny dual
    # steps; past the cap the leftovers go to the augmentation phase instead
    steps = 0
    while k < len(queue):
        steps += 1
        if steps > n * n:
            new_free.extend(queue[k:])
            break
        i = queue[k]
        k += 1
        red = c[i] - v
        j1 = int(np.argmin(red))
        u1 = red[j1]
        red[j1] = np.inf
        j2 = int(np.argmin(red))
        u2 = red[j2]
        i0 = y[j1]
        if u1 < u2:
            v[j1] -= u2 - u1
        elif i0 >= 0:
            j1, i0 = j2, y[j2]
        if x[i] >= 0:
            y[x[i]] = -1
        x[i], y[j1] = j1, i
        if i0 >= 0:
            x[i0] = -1
            if u1 < u2:
                # the displaced row gets another try immediately
                k -= 1
                queue[k] = i0
            else:
                new_free.append(i0)
    return new_free


def _augment(c, f, x, y, v) -> None:
    """Dijkstra over columns from free row ``f`` with reduced costs ``c - v``; updates duals."""
    n = c.shape[0]
    d = c[f] - v
    pred = np.full(n, f, dtype=np.intp)
    done = np.zeros(n, dtype=bool)
    while True:
        masked = np.where(done, np.inf, d)
        mu = masked.min()
        cands = np.flatnonzero(masked == mu)
        free_cols = cands[y[cands] < 0]
        if len(free_cols):
            end = int(free_cols[0])
            break
        j = int(cands[0])
        done[j] = True
        i = y[j]
        h = mu + (c[i] - v) - (c[i, j] - v[j])
        better = ~done & (h < d)
        d[better] = h[better]
        pred[better] = i
    v[done] += d[done] - mu
    j = end
    while True:
        i = pred[j]
        y[j] = i
        x[i], j = j, x[i]
        if i == f:
            break
