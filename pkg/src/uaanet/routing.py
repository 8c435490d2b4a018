"""Range-limited neighbor graph over node coordinates and BFS min-hop paths.

Route selection is a pure function of (coordinates, range, participation):
no node-supplied metric can influence it, which is what shuts the door on
advertised-route (blackhole) manipulation.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Iterable, Mapping


class NoRouteFound(Exception):
    def __init__(self) -> None:
        super().__init__("No route found")


def build_adjacency(
    points: Mapping[str, tuple[float, float, float]], range_m: float
) -> dict[str, list[str]]:
    """Symmetric adjacency over points within range (boundary inclusive).

    Neighbor lists are ordered by ascending address so downstream BFS is
    deterministic.
    """
    addrs = sorted(points)
    table: dict[str, list[str]] = {a: [] for a in addrs}
    for i, a in enumerate(addrs):
        for b in addrs[i + 1:]:
            if math.dist(points[a], points[b]) <= range_m:
                table[a].append(b)
                table[b].append(a)
    return table


def update_graph(records: Iterable, range_m: float) -> dict[str, list[str]]:
    """Adjacency over the participating, non-faulty records' registered
    coordinates."""
    points = {
        r.address: (r.x, r.y, r.z)
        for r in records
        if r.participating and not r.faulty
    }
    return build_adjacency(points, range_m)


def path_find(
    table: Mapping[str, list[str]], source: str, dest: str
) -> list[str]:
    """Minimum-hop route from source to dest via BFS.

    Ties break by exploring neighbors in ascending-address order. Raises
    NoRouteFound when the two are disconnected (or absent).
    """
    if source == dest:
        raise ValueError("source equals destination")
    if source not in table or dest not in table:
        raise NoRouteFound()
    parent: dict[str, str] = {source: source}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        if node == dest:
            break
        for nbr in table[node]:
            if nbr not in parent:
                parent[nbr] = node
                queue.append(nbr)
    if dest not in parent:
        raise NoRouteFound()
    route = [dest]
    while route[-1] != source:
        route.append(parent[route[-1]])
    route.reverse()
    return route
