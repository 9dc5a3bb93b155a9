"""Deterministic maximum bipartite matching (Hopcroft-Karp)."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

_INF = float("inf")


@dataclass(frozen=True)
class BipartiteGraph:
    left_count: int
    right_count: int
    edges: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        adj = tuple(tuple(sorted(set(a))) for a in self.edges)
        if len(adj) != self.left_count:
            raise ValueError(f"expected {self.left_count} adjacency lists, got {len(adj)}")
        for u, a in enumerate(adj):
            if a and not (0 <= a[0] and a[-1] < self.right_count):
                raise ValueError(f"edge from left node {u} leaves the range [0, {self.right_count})")
        object.__setattr__(self, "edges", adj)


@dataclass(frozen=True)
class Matching:
    pairs: dict[int, int]

    def __len__(self):
        return len(self.pairs)

    def is_valid_for(self, graph: BipartiteGraph) -> bool:
        rights = list(self.pairs.values())
        return len(set(rights)) == len(rights) and all(
            0 <= u < graph.left_count and v in graph.edges[u] for u, v in self.pairs.items()
        )


def max_matching(graph: BipartiteGraph) -> Matching:
    """Maximum matching; phases scan free left nodes and their neighbours in index order."""
    n_left = graph.left_count
    adj = graph.edges
    match_l = [-1] * n_left
    match_r = [-1] * graph.right_count
    dist = [0] * n_left

    def bfs() -> bool:
        queue = deque()
        for u in range(n_left):
            if match_l[u] < 0:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = _INF
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w < 0:
                    found = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(root: int) -> bool:
        # iterative layered DFS; each frame is (left node, next adjacency position)
        stack = [[root, 0]]
        path_rights: list[int] = []
        while stack:
            frame = stack[-1]
            u, pos = frame
            a = adj[u]
            advanced = False
            while pos < len(a):
                v = a[pos]
                pos += 1
                w = match_r[v]
                if w < 0:
                    frame[1] = pos
                    path_rights.append(v)
                    # flip the augmenting path
                    for (x, _), y in zip(stack, path_rights):
                        match_l[x] = y
                        match_r[y] = x
                    return True
                if dist[w] == dist[u] + 1:
                    frame[1] = pos
                    path_rights.append(v)
                    stack.append([w, 0])
                    advanced = True
                    break
            if not advanced:
                dist[u] = _INF
                stack.pop()
                if path_rights:
                    path_rights.pop()
        return False

    while bfs():
        for u in range(n_left):
            if match_l[u] < 0:
                dfs(u)
    return Matching({u: v for u, v in enumerate(match_l) if v >= 0})
