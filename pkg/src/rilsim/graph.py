"""Community graph: lineage links between communities and court placement.

Distances are hop counts ("logical" distance between communities), and
centrality is normalized degree.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .errors import RilError


class GraphError(RilError, ValueError):
    pass


@dataclass(frozen=True)
class CommunityGraph:
    communities: frozenset[str]
    edges: frozenset[frozenset[str]]
    court_placement: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "communities", frozenset(self.communities))
        object.__setattr__(self, "edges", frozenset(frozenset(e) for e in self.edges))
        object.__setattr__(self, "court_placement", dict(self.court_placement))
        problems = self.problems()
        if problems:
            raise GraphError("; ".join(problems))

    @classmethod
    def build(
        cls,
        communities: Iterable[str],
        edges: Iterable[tuple[str, str]] = (),
        court_placement: Mapping[str, str] | None = None,
    ) -> "CommunityGraph":
        return cls(frozenset(communities), frozenset(frozenset(e) for e in edges), court_placement or {})

    def problems(self) -> list[str]:
        out = []
        if not self.communities:
            out.append("graph has no communities")
        for e in self.edges:
            if len(e) != 2:
                out.append(f"self-loop or malformed edge {sorted(e)}")
            for c in e - self.communities:
                out.append(f"edge endpoint {c!r} is not a community")
        for court, comm in sorted(self.court_placement.items()):
            if comm not in self.communities:
                out.append(f"court {court!r} placed in unknown community {comm!r}")
        if not out and self.communities:
            unreached = sorted(self.communities - set(self._bfs(min(self.communities))))
            if unreached:
                out.append(f"graph is disconnected; unreachable communities: {unreached}")
        return out

    @cached_property
    def adjacency(self) -> dict[str, tuple[str, ...]]:
        adj: dict[str, set[str]] = {c: set() for c in self.communities}
        for e in self.edges:
            a, b = sorted(e)
            adj[a].add(b)
            adj[b].add(a)
        return {c: tuple(sorted(n)) for c, n in adj.items()}

    def _bfs(self, source: str) -> dict[str, int]:
        dist = {source: 0}
        queue = deque([source])
        adj = self.adjacency
        while queue:
            node = queue.popleft()
            for nxt in adj[node]:
                if nxt not in dist:
                    dist[nxt] = dist[node] + 1
                    queue.append(nxt)
        return dist

    @cached_property
    def _distances(self) -> dict[str, dict[str, int]]:
        return {}

    def distances_from(self, source: str) -> dict[str, int]:
        cache = self._distances
        if source not in cache:
            if source not in self.communities:
                raise GraphError(f"unknown community {source!r}")
            cache[source] = self._bfs(source)
        return cache[source]

    @cached_property
    def diameter(self) -> int:
        return max(max(self.distances_from(c).values()) for c in self.communities)

    def community_of(self, court_id: str) -> str:
        return self.court_placement[court_id]


def community_distance(graph: CommunityGraph, c1: str, c2: str) -> int:
    try:
        return graph.distances_from(c1)[c2]
    except KeyError:
        raise GraphError(f"unknown community {c2!r}") from None


def centrality(graph: CommunityGraph) -> dict[str, float]:
    """Normalized degree centrality, ``degree / max_degree``.

    A single isolated community is the whole network and scores 1.0.
    """
    degree = {c: len(n) for c, n in graph.adjacency.items()}
    top = max(degree.values())
    if top == 0:
        return {c: 1.0 for c in sorted(degree)}
    return {c: degree[c] / top for c in sorted(degree)}


def mainstream(scores: Mapping[str, float], threshold: float) -> frozenset[str]:
    return frozenset(c for c, s in scores.items() if s > threshold)
