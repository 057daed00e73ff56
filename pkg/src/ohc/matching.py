"""Minimum-cost perfect matching on the cluster bipartite graph.

Left and right vertex sets are both the current clusters. Edge ``(i, i)``
costs ``sm`` and means "leave cluster i alone"; edge ``(i, j)`` exists only
for adjacent clusters. A perfect matching is a permutation ``sigma`` and
its cycles are the groups merged at this level.

The solver is the Hungarian (Kuhn-Munkres) method in its shortest
augmenting path form, run over the sparse edge list with Dijkstra and row
/column potentials. Among optimal permutations it returns the
lexicographically smallest one.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ForbiddenEdge

TIGHT_RTOL = 1e-12


@dataclass
class BipartiteCostView:
    """Sparse square cost structure in CSR layout (columns sorted per row).

    Absent ``(i, j)`` entries are forbidden assignments.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    _lookup: dict | None = field(default=None, repr=False)

    @classmethod
    def from_edges(cls, n, rows, cols, costs) -> "BipartiteCostView":
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        costs = np.asarray(costs, dtype=float)
        order = np.lexsort((cols, rows))
        rows, cols, costs = rows[order], cols[order], costs[order]
        if len(rows) > 1 and np.any((np.diff(rows) == 0) & (np.diff(cols) == 0)):
            raise ValueError("duplicate edges")
        indptr = np.searchsorted(rows, np.arange(n + 1))
        return cls(n, indptr, cols, costs)

    @classmethod
    def from_dense(cls, matrix) -> "BipartiteCostView":
        """Non-finite entries of ``matrix`` are treated as absent edges."""
        m = np.asarray(matrix, dtype=float)
        r, c = np.nonzero(np.isfinite(m))
        return cls.from_edges(m.shape[0], r, c, m[r, c])

    @classmethod
    def from_proximity(cls, graph) -> "BipartiteCostView":
        n = graph.n
        diag = np.arange(n)
        rows = np.concatenate([diag, graph.rows, graph.cols])
        cols = np.concatenate([diag, graph.cols, graph.rows])
        costs = np.concatenate([np.full(n, graph.sm), graph.values, graph.values])
        return cls.from_edges(n, rows, cols, costs)

    def row(self, i):
        s, e = self.indptr[i], self.indptr[i + 1]
        return self.indices[s:e], self.data[s:e]

    def cost(self, i: int, j: int) -> float | None:
        if self._lookup is None:
            self._lookup = {}
            for r in range(self.n):
                cols, vals = self.row(r)
                for c, v in zip(cols.tolist(), vals.tolist()):
                    self._lookup[(r, c)] = v
        return self._lookup.get((int(i), int(j)))


@dataclass
class MatchingResult:
    permutation: np.ndarray
    total_cost: float
    merge_groups: list

    @property
    def is_identity(self) -> bool:
        return bool(np.all(self.permutation == np.arange(len(self.permutation))))


def extract_merge_groups(sigma) -> list[list[int]]:
    """Cycles of a permutation, each sorted, ordered by smallest element."""
    sigma = np.asarray(sigma, dtype=np.intp)
    n = len(sigma)
    if not np.array_equal(np.sort(sigma), np.arange(n)):
        raise ValueError("sigma is not a permutation")
    seen = np.zeros(n, dtype=bool)
    groups = []
    for start in range(n):
        if seen[start]:
            continue
        cyc = []
        i = start
        while not seen[i]:
            seen[i] = True
            cyc.append(i)
            i = int(sigma[i])
        groups.append(sorted(cyc))
    return groups


def matching_cost(sigma, view: BipartiteCostView) -> float:
    """Sum of ``cost(i, sigma[i])``, accumulated in row order."""
    total = 0.0
    for i, j in enumerate(np.asarray(sigma).tolist()):
        cols, vals = view.row(i)
        k = int(np.searchsorted(cols, j))
        if k == len(cols) or cols[k] != j:
            raise ForbiddenEdge(f"edge ({i}, {j}) is not present")
        total += float(vals[k])
    return total


def _shortest_augmenting_paths(n, cols_of, costs_of):
    # reduced cost of row r -> column c is  w + pr[r] - pc[c] >= 0
    pr = [0.0] * n
    pc = [0.0] * n
    col_of_row = [-1] * n
    row_of_col = [-1] * n
    for r in range(n):
        if not cols_of[r]:
            raise ValueError(f"row {r} has no edges; no perfect matching exists")
        mn = min(costs_of[r])
        pr[r] = -mn
        for c, w in zip(cols_of[r], costs_of[r]):
            if w == mn and row_of_col[c] == -1:
                col_of_row[r] = c
                row_of_col[c] = r
                break

    inf = float("inf")
    for s in range(n):
        if col_of_row[s] != -1:
            continue
        dcol = {}
        pred = {}
        done = {}
        drow = {s: 0.0}
        heap = []

        def relax(r, dr):
            base = dr + pr[r]
            for c, w in zip(cols_of[r], costs_of[r]):
                if c in done:
                    continue
                nd = base + w - pc[c]
                if nd < dcol.get(c, inf):
                    dcol[c] = nd
                    pred[c] = r
                    heapq.heappush(heap, (nd, c))

        relax(s, 0.0)
        end = -1
        while heap:
            d, c = heapq.heappop(heap)
            if c in done or d > dcol[c]:
                continue
            done[c] = d
            r2 = row_of_col[c]
            if r2 == -1:
                end = c
                break
            drow[r2] = d
            relax(r2, d)
        if end == -1:
            raise ValueError("no perfect matching exists")
        big = done[end]
        for r, d in drow.items():
            pr[r] += d - big
        for c, d in done.items():
            pc[c] += d - big
        c = end
        while True:
            r = pred[c]
            prev = col_of_row[r]
            col_of_row[r] = c
            row_of_col[c] = r
            if r == s:
                break
            c = prev
    return col_of_row, row_of_col, pr, pc


def _lexicographic_min(n, tight, col_of_row, row_of_col):
    """Rotate the matching to the lexicographically smallest one in ``tight``."""
    for i in range(n):
        cur = col_of_row[i]
        for j in tight[i]:
            if j >= cur:
                break
            r = row_of_col[j]
            if r < i:
                continue
            # alternating path from r to column cur through unfixed rows
            parent = {r: None}
            queue = deque([r])
            last = -1
            while queue and last == -1:
                x = queue.popleft()
                for c in tight[x]:
                    if c == j:
                        continue
                    if c == cur:
                        last = x
                        break
                    y = row_of_col[c]
                    if y > i and y not in parent:
                        parent[y] = (x, c)
                        queue.append(y)
            if last == -1:
                continue
            moves = [(last, cur)]
            y = last
            while parent[y] is not None:
                x, c = parent[y]
                moves.append((x, c))
                y = x
            moves.append((i, j))
            for row, col in moves:
                col_of_row[row] = col
                row_of_col[col] = row
            break
    return col_of_row


def solve_min_cost_perfect_matching(view: BipartiteCostView) -> MatchingResult:
    n = view.n
    if n == 0:
        return MatchingResult(np.empty(0, dtype=np.intp), 0.0, [])
    cols_of = [view.indices[view.indptr[i]:view.indptr[i + 1]].tolist() for i in range(n)]
    costs_of = [view.data[view.indptr[i]:view.indptr[i + 1]].tolist() for i in range(n)]
    col_of_row, row_of_col, pr, pc = _shortest_augmenting_paths(n, cols_of, costs_of)

    scale = float(np.abs(view.data).max()) if len(view.data) else 1.0
    tol = TIGHT_RTOL * max(scale, 1e-300)
    tight = []
    for r in range(n):
        t = [c for c, w in zip(cols_of[r], costs_of[r]) if w + pr[r] - pc[c] <= tol or c == col_of_row[r]]
        tight.append(t)
    col_of_row = _lexicographic_min(n, tight, col_of_row, row_of_col)

    sigma = np.asarray(col_of_row, dtype=np.intp)
    return MatchingResult(sigma, matching_cost(sigma, view), extract_merge_groups(sigma))
