"""Undirected network topology and observation-set algebra.

Vertices are labeled 1..N throughout; the graph Laplacian used by the
dynamics is negative semi-definite (ones on adjacent pairs, minus the
degree on the diagonal).  An observation set S is *absorbent* when every
vertex either belongs to S or neighbors it, and *dominantly absorbent*
when the Laplacian block coupling S to its complement has full column
rank, which is what lets per-time reconstruction of the unobserved
states succeed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import RANK_TOL, matrix_rank


@dataclass(frozen=True)
class Graph:
    """Connected, undirected, unweighted graph with 1-based vertex labels."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __init__(self, n: int, edges):
        if n < 1:
            raise ValueError(f"graph needs at least one vertex, got n={n}")
        canon = []
        seen = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"edge ({u}, {v}) outside vertex range 1..{n}")
            pair = (min(u, v), max(u, v))
            if pair in seen:
                raise ValueError(f"duplicate edge {pair}")
            seen.add(pair)
            canon.append(pair)
        canon.sort()
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(canon))
        if not self._connected():
            raise ValueError("graph is not connected")

    def _connected(self) -> bool:
        if self.n == 1:
            return True
        adj = self.adjacency_lists()
        seen = {1}
        stack = [1]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n

    def adjacency_lists(self) -> list[tuple[int, ...]]:
        """Sorted neighbor tuples, indexed by vertex label (entry 0 unused)."""
        nbrs: list[list[int]] = [[] for _ in range(self.n + 1)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return [tuple(sorted(x)) for x in nbrs]

    def neighbors(self, v: int) -> tuple[int, ...]:
        self._check_vertex(v)
        return self.adjacency_lists()[v]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def _check_vertex(self, v: int) -> None:
        if not (1 <= v <= self.n):
            raise ValueError(f"vertex {v} outside 1..{self.n}")


@dataclass(frozen=True)
class VertexPartition:
    """Split of the vertex set into observed and unobserved vertices."""

    n: int
    observed: tuple[int, ...]
    unobserved: tuple[int, ...] = field(default=())

    @classmethod
    def from_observed(cls, n: int, observed) -> "VertexPartition":
        obs = sorted({int(v) for v in observed})
        if not obs:
            raise ValueError("observed set must be nonempty")
        if obs[0] < 1 or obs[-1] > n:
            raise ValueError(f"observed vertices must lie in 1..{n}, got {obs}")
        rest = tuple(v for v in range(1, n + 1) if v not in set(obs))
        return cls(n=n, observed=tuple(obs), unobserved=rest)


def laplacian(g: Graph) -> np.ndarray:
    """Negative semi-definite Laplacian: L[u-1, v-1] = 1 on edges, -deg on the diagonal."""
    mat = np.zeros((g.n, g.n))
    for u, v in g.edges:
        mat[u - 1, v - 1] = 1.0
        mat[v - 1, u - 1] = 1.0
        mat[u - 1, u - 1] -= 1.0
        mat[v - 1, v - 1] -= 1.0
    return mat


def laplacian_submatrix(mat: np.ndarray, rows, cols) -> np.ndarray:
    """Block of a vertex-indexed matrix, rows and cols given as 1-based labels."""
    r = np.asarray(sorted(rows), dtype=int) - 1
    c = np.asarray(sorted(cols), dtype=int) - 1
    if r.size == 0 or c.size == 0:
        return np.zeros((r.size, c.size))
    if r.min() < 0 or r.max() >= mat.shape[0] or c.min() < 0 or c.max() >= mat.shape[1]:
        raise ValueError("vertex labels outside matrix range")
    return mat[np.ix_(r, c)]


def is_absorbent(g: Graph, observed, self_absorbing: bool = True) -> bool:
    """Does every vertex see the observation set?

    With ``self_absorbing`` (the default) a vertex belonging to the set
    counts as covered, so the condition reduces to: every unobserved
    vertex has an observed neighbor.  With ``self_absorbing=False`` the
    literal reading applies and observed vertices must themselves have a
    neighbor inside the set.
    """
    obs = set(observed)
    if not obs:
        return False
    adj = g.adjacency_lists()
    for v in range(1, g.n + 1):
        if v in obs:
            if self_absorbing or any(w in obs for w in adj[v]):
                continue
            return False
        if not any(w in obs for w in adj[v]):
            return False
    return True


def is_dominantly_absorbent(g: Graph, partition: VertexPartition, tol: float = RANK_TOL) -> bool:
    """Full column rank of the observed-to-unobserved Laplacian block.

    Implies absorbency and forces the observed set to hold at least half
    of the vertices.  Trivially true when every vertex is observed.
    """
    n_unobserved = len(partition.unobserved)
    if n_unobserved == 0:
        return True
    if len(partition.observed) < n_unobserved:
        return False
    block = laplacian_submatrix(laplacian(g), partition.observed, partition.unobserved)
    return matrix_rank(block, tol=tol) == n_unobserved


def find_joints(g: Graph) -> tuple[int, ...]:
    """Articulation vertices (cut vertices), by iterative depth-first search."""
    adj = g.adjacency_lists()
    disc = [0] * (g.n + 1)
    low = [0] * (g.n + 1)
    joints: set[int] = set()
    timer = 1
    for root in range(1, g.n + 1):
        if disc[root]:
            continue
        disc[root] = low[root] = timer
        timer += 1
        root_children = 0
        stack = [(root, 0, iter(adj[root]))]
        while stack:
            v, parent, it = stack[-1]
            descended = False
            for w in it:
                if w == parent:
                    continue
                if disc[w]:
                    low[v] = min(low[v], disc[w])
                else:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, v, iter(adj[w])))
                    descended = True
                    break
            if descended:
                continue
            stack.pop()
            if parent == 0:
                continue
            low[parent] = min(low[parent], low[v])
            if parent == root:
                root_children += 1
            elif low[v] >= disc[parent]:
                joints.add(parent)
        if root_children >= 2:
            joints.add(root)
    return tuple(sorted(joints))


def kruskal_spanning_tree(g: Graph) -> tuple[tuple[int, int], ...]:
    """Spanning tree edges chosen by Kruskal with lexicographic edge order."""
    parent = list(range(g.n + 1))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    tree = []
    for u, v in g.edges:  # already sorted lexicographically
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            tree.append((u, v))
            if len(tree) == g.n - 1:
                break
    return tuple(tree)


def find_absorbent_set(g: Graph) -> tuple[int, ...]:
    """Heuristic small absorbent set built from spanning-tree degrees.

    High-degree tree vertices are accumulated while lowering the degree
    threshold; the first threshold whose set is absorbent in the original
    graph wins.  If no threshold at or above 2 works (stars of edges,
    two-vertex graphs) a greedy cover completes the set.
    """
    if g.n == 1:
        return (1,)
    tree = kruskal_spanning_tree(g)
    tree_degree = [0] * (g.n + 1)
    for u, v in tree:
        tree_degree[u] += 1
        tree_degree[v] += 1

    selected: set[int] = set()
    for d in range(max(tree_degree), 1, -1):
        selected = {v for v in range(1, g.n + 1) if tree_degree[v] >= d}
        if selected and is_absorbent(g, selected):
            return tuple(sorted(selected))

    # Greedy completion: repeatedly add the vertex covering the most
    # still-uncovered vertices (itself included), smallest label on ties.
    adj = g.adjacency_lists()

    def covered(sel: set[int]) -> set[int]:
        got = set(sel)
        for v in sel:
            got.update(adj[v])
        return got

    while True:
        missing = set(range(1, g.n + 1)) - covered(selected)
        if not missing:
            return tuple(sorted(selected))
        best, best_gain = 0, -1
        for v in range(1, g.n + 1):
            if v in selected:
                continue
            gain = len(missing & ({v} | set(adj[v])))
            if gain > best_gain:
                best, best_gain = v, gain
        selected.add(best)
