"""Undirected communication graphs for the action-sharing information model."""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError

DISCONNECTED = None


@dataclass(frozen=True, eq=False)
class CommunicationGraph:
    adjacency: np.ndarray
    positions: np.ndarray | None = None

    def __post_init__(self) -> None:
        adj = np.array(self.adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise InvalidParameterError(f"adjacency must be square, got shape {adj.shape}")
        if not np.array_equal(adj, adj.T):
            raise InvalidParameterError("adjacency must be symmetric")
        if adj.diagonal().any():
            raise InvalidParameterError("self-loops are not allowed")
        adj.flags.writeable = False
        object.__setattr__(self, "adjacency", adj)
        neighbors = tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in adj)
        object.__setattr__(self, "_neighbors", neighbors)
        if self.positions is not None:
            pos = np.array(self.positions, dtype=float)
            pos.flags.writeable = False
            object.__setattr__(self, "positions", pos)

    @classmethod
    def from_edges(cls, n: int, edges) -> CommunicationGraph:
        adj = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            adj[i, j] = adj[j, i] = True
        return cls(adj)

    @classmethod
    def complete(cls, n: int) -> CommunicationGraph:
        return cls(~np.eye(n, dtype=bool))

    @classmethod
    def path(cls, n: int) -> CommunicationGraph:
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)])

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def neighbors(self, i: int) -> tuple[int, ...]:
        """Neighbors of ``i`` in ascending order."""
        return self._neighbors[i]

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in self._neighbors[i] if i < j]

    def to_csv(self, path: str | Path) -> None:
        """Write the edge list (with node coordinates when known) for plotting."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["source", "target", "x_source", "y_source", "x_target", "y_target"])
            for i, j in self.edges():
                coords = [""] * 4
                if self.positions is not None:
                    coords = [*self.positions[i], *self.positions[j]]
                writer.writerow([i, j, *coords])


def random_geometric(n: int, width: float, height: float, radius: float, rng: np.random.Generator) -> CommunicationGraph:
    """Place ``n`` nodes uniformly in a width x height box; link pairs closer than ``radius``."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    if min(width, height, radius) <= 0:
        raise InvalidParameterError("width, height and radius must be positive")
    positions = rng.uniform(size=(n, 2)) * np.array([width, height])
    dist = np.linalg.norm(positions[:, None, :] - positions[None, :, :], axis=-1)
    adj = dist < radius
    np.fill_diagonal(adj, False)
    return CommunicationGraph(adj, positions)


def _bfs_depths(graph: CommunicationGraph, source: int) -> list[int]:
    depth = [-1] * graph.n
    depth[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in graph.neighbors(u):
            if depth[v] < 0:
                depth[v] = depth[u] + 1
                queue.append(v)
    return depth


def is_connected(graph: CommunicationGraph) -> bool:
    return min(_bfs_depths(graph, 0)) >= 0


def diameter(graph: CommunicationGraph) -> int | None:
    """Longest shortest path; ``DISCONNECTED`` (None) if some pair is unreachable."""
    longest = 0
    for source in range(graph.n):
        depth = _bfs_depths(graph, source)
        if min(depth) < 0:
            return DISCONNECTED
        longest = max(longest, max(depth))
    return longest
