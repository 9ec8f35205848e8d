"""Directed coupling graphs, connectivity and depth.

Vertices are 0-based. ``adjacency[i, j] == 1`` means oscillator ``j`` transmits
information to oscillator ``i`` (``j`` is in the neighbor set of ``i``). Distances
follow the information flow, i.e. along edges ``j -> i`` for every such pair.
"""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import InvalidAdjacency, NonSquareMatrix, SelfLoopPresent

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DigraphTopology:
    """Immutable 0/1 adjacency with derived neighbor sets."""

    adjacency: NDArray[np.int8]

    @property
    def n_vertices(self) -> int:
        return int(self.adjacency.shape[0])

    @cached_property
    def neighbor_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(np.flatnonzero(row).tolist()) for row in self.adjacency)

    @cached_property
    def in_degrees(self) -> NDArray[np.intp]:
        return self.adjacency.sum(axis=1).astype(np.intp)

    @cached_property
    def arcs(self) -> tuple[NDArray[np.intp], NDArray[np.intp]]:
        """(receivers, senders) of every arc, in row-major order."""
        receivers, senders = np.nonzero(self.adjacency)
        return receivers.astype(np.intp), senders.astype(np.intp)

    @cached_property
    def out_neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Vertices each vertex transmits to."""
        return tuple(tuple(np.flatnonzero(col).tolist()) for col in self.adjacency.T)

    @property
    def is_all_to_all(self) -> bool:
        n = self.n_vertices
        return bool(np.array_equal(self.adjacency, all_to_all(n).adjacency))


@dataclass(frozen=True)
class ConnectivityReport:
    """Strong connectivity, all-pairs distances and depth.

    ``distances[i][j]`` is the number of hops from ``i`` to ``j`` along the
    information flow, or ``None`` when ``j`` is unreachable from ``i``.
    """

    strongly_connected: bool
    distances: tuple[tuple[int | None, ...], ...]
    depth: int | None

    def distance(self, i: int, j: int) -> int | None:
        return self.distances[i][j]


def build_topology(adjacency: ArrayLike) -> DigraphTopology:
    """Validate a 0/1 matrix and wrap it as a topology.

    Args:
        adjacency: N x N matrix with ``adjacency[i][j] = 1`` when j transmits to i

    Returns:
        DigraphTopology with a read-only copy of the matrix

    Raises:
        NonSquareMatrix: If the matrix is not two-dimensional and square
        InvalidAdjacency: If an entry is neither 0 nor 1
        SelfLoopPresent: If a diagonal entry is nonzero
    """
    matrix = np.asarray(adjacency)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise NonSquareMatrix(f"Adjacency must be a non-empty N x N matrix, got {matrix.shape}")
    if not np.isin(matrix, (0, 1)).all():
        raise InvalidAdjacency()
    diagonal = np.flatnonzero(np.diagonal(matrix))
    if diagonal.size:
        raise SelfLoopPresent(int(diagonal[0]))

    frozen = matrix.astype(np.int8)
    frozen.flags.writeable = False
    return DigraphTopology(adjacency=frozen)


def all_to_all(n: int) -> DigraphTopology:
    """Complete digraph on ``n`` vertices."""
    return build_topology(np.ones((n, n), dtype=np.int8) - np.eye(n, dtype=np.int8))


def ring(n: int) -> DigraphTopology:
    """Unidirectional ring: vertex ``i`` listens to vertex ``i + 1 (mod n)``."""
    matrix = np.zeros((n, n), dtype=np.int8)
    if n > 1:
        matrix[np.arange(n), (np.arange(n) + 1) % n] = 1
    return build_topology(matrix)


def reverse(topology: DigraphTopology) -> DigraphTopology:
    """Topology with every arc reversed."""
    return build_topology(topology.adjacency.T)


def _bfs(topology: DigraphTopology, source: int) -> list[int | None]:
    dist: list[int | None] = [None] * topology.n_vertices
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in topology.out_neighbors[u]:
            if dist[v] is None:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def analyze_connectivity(topology: DigraphTopology) -> ConnectivityReport:
    """Decide strong connectivity and compute depth by breadth-first search from every vertex."""
    distances = tuple(tuple(_bfs(topology, i)) for i in range(topology.n_vertices))
    strongly_connected = all(d is not None for row in distances for d in row)
    depth = None
    if strongly_connected:
        depth = max((d for row in distances for d in row if d is not None), default=0)
    logger.debug(
        "connectivity: n=%d strongly_connected=%s depth=%s",
        topology.n_vertices,
        strongly_connected,
        depth,
    )
    return ConnectivityReport(
        strongly_connected=strongly_connected, distances=distances, depth=depth
    )


def is_general_root(topology: DigraphTopology, members: Iterable[int]) -> bool:
    """True when no member listens to a vertex outside ``members``."""
    group = set(members)
    return all(topology.neighbor_sets[i] <= group for i in group)


def roots(topology: DigraphTopology) -> list[int]:
    """Vertices that listen to nobody."""
    return [i for i, nbrs in enumerate(topology.neighbor_sets) if not nbrs]
