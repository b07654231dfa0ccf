"""Inter-datacenter network graphs and deterministic path computation.

The graph is undirected, with per-link lengths in km and a uniform
spectrum-slot capacity. All path computation is deterministic: ties are
broken by (length, hop count, lexicographic node sequence) so that repeated
runs and k -> k+1 queries are reproducible and prefix-stable.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from pathlib import Path as _FsPath
from typing import Iterable, Mapping, Sequence

NodeId = int | str


class TopologyError(ValueError):
    """Malformed topology description (duplicate links, disconnection, ...)."""


@dataclass(frozen=True)
class Link:
    """Undirected link between two nodes. Endpoints are stored in sorted order."""

    u: NodeId
    v: NodeId
    length_km: float
    slot_capacity: int

    def __post_init__(self):
        if self.u == self.v:
            raise TopologyError(f"self-loop on node {self.u!r}")
        if self.length_km <= 0:
            raise TopologyError(f"link {self.u!r}-{self.v!r} has non-positive length")
        if self.slot_capacity < 1:
            raise TopologyError(f"link {self.u!r}-{self.v!r} has non-positive slot capacity")
        if self.v < self.u:
            u, v = self.v, self.u
            object.__setattr__(self, "u", u)
            object.__setattr__(self, "v", v)

    @property
    def key(self) -> tuple[NodeId, NodeId]:
        return (self.u, self.v)

    def other(self, node: NodeId) -> NodeId:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise KeyError(f"{node!r} is not an endpoint of {self.key}")


@dataclass(frozen=True)
class Path:
    """Simple path: ordered nodes plus the links joining them."""

    nodes: tuple[NodeId, ...]
    links: tuple[Link, ...]
    length_km: float

    @property
    def hops(self) -> int:
        return len(self.links)

    @property
    def link_keys(self) -> tuple[tuple[NodeId, NodeId], ...]:
        return tuple(l.key for l in self.links)

    @property
    def source(self) -> NodeId:
        return self.nodes[0]

    @property
    def dest(self) -> NodeId:
        return self.nodes[-1]


def _make_path(topo: "Topology", nodes: Sequence[NodeId]) -> Path:
    links = []
    for a, b in zip(nodes, nodes[1:]):
        link = topo.link_between(a, b)
        if link is None:
            raise TopologyError(f"no link {a!r}-{b!r} in topology")
        links.append(link)
    if len(set(nodes)) != len(nodes):
        raise TopologyError(f"path {nodes!r} repeats a node")
    length = sum(l.length_km for l in links)
    return Path(tuple(nodes), tuple(links), length)


class Topology:
    """Validated undirected graph with a designated set of datacenter nodes."""

    def __init__(self, nodes: Iterable[NodeId], links: Iterable[Link],
                 dc_nodes: Iterable[NodeId]):
        self.nodes: tuple[NodeId, ...] = tuple(sorted(set(nodes)))
        if not self.nodes:
            raise TopologyError("topology has no nodes")
        node_set = set(self.nodes)
        self.links: tuple[Link, ...] = tuple(links)
        seen_pairs: set[tuple[NodeId, NodeId]] = set()
        caps = set()
        self._by_pair: dict[tuple[NodeId, NodeId], Link] = {}
        adjacency: dict[NodeId, list[tuple[NodeId, Link]]] = {n: [] for n in self.nodes}
        for link in self.links:
            if link.u not in node_set or link.v not in node_set:
                raise TopologyError(f"link {link.key} references an unknown node")
            if link.key in seen_pairs:
                raise TopologyError(f"duplicate link {link.key}")
            seen_pairs.add(link.key)
            caps.add(link.slot_capacity)
            self._by_pair[link.key] = link
            adjacency[link.u].append((link.v, link))
            adjacency[link.v].append((link.u, link))
        if len(caps) > 1:
            raise TopologyError(f"links disagree on slot capacity: {sorted(caps)}")
        self.adjacency = {n: sorted(nbrs, key=lambda t: t[0]) for n, nbrs in adjacency.items()}
        self.dc_nodes: tuple[NodeId, ...] = tuple(sorted(set(dc_nodes)))
        for d in self.dc_nodes:
            if d not in node_set:
                raise TopologyError(f"dc node {d!r} is not a graph node")
        if not self._connected():
            raise TopologyError("topology is disconnected")

    def _connected(self) -> bool:
        if not self.links and len(self.nodes) > 1:
            return False
        seen = {self.nodes[0]}
        stack = [self.nodes[0]]
        while stack:
            n = stack.pop()
            for nbr, _ in self.adjacency[n]:
                if nbr not in seen:
                    seen.add(nbr)
                    stack.append(nbr)
        return len(seen) == len(self.nodes)

    @property
    def slot_capacity(self) -> int:
        return self.links[0].slot_capacity if self.links else 0

    def link_between(self, a: NodeId, b: NodeId) -> Link | None:
        return self._by_pair.get((a, b) if a < b else (b, a))

    def path_from_nodes(self, nodes: Sequence[NodeId]) -> Path:
        return _make_path(self, nodes)


def paths_share_link(p1: Path, p2: Path) -> bool:
    """True iff the two paths have at least one common link."""
    return bool(set(p1.link_keys) & set(p2.link_keys))


def _dijkstra(topo: Topology, s: NodeId, t: NodeId,
              banned_nodes: set[NodeId],
              banned_links: set[tuple[NodeId, NodeId]]) -> Path | None:
    """Shortest path under the (length, hops, node-sequence) total order.

    The priority key is the full tuple, so among equal-length paths the one
    with fewer hops wins, then the lexicographically smallest node sequence.
    """
    heap: list[tuple[float, int, tuple[NodeId, ...]]] = [(0.0, 0, (s,))]
    settled: set[NodeId] = set()
    while heap:
        dist, hops, nodes = heapq.heappop(heap)
        node = nodes[-1]
        if node == t:
            return _make_path(topo, nodes)
        if node in settled:
            continue
        settled.add(node)
        for nbr, link in topo.adjacency[node]:
            if nbr in settled or nbr in banned_nodes or link.key in banned_links:
                continue
            heapq.heappush(heap, (dist + link.length_km, hops + 1, nodes + (nbr,)))
    return None


def shortest_path(topo: Topology, s: NodeId, d: NodeId) -> Path | None:
    return _dijkstra(topo, s, d, set(), set())


def k_shortest_paths(topo: Topology, s: NodeId, d: NodeId, k: int) -> list[Path]:
    """Up to k loop-free paths, ordered by (length_km, hops, node sequence).

    Yen's algorithm over the tie-broken Dijkstra above. The result for k is a
    prefix of the result for k+1; no path exists -> empty list.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if s == d:
        raise ValueError("source and destination must differ")
    if s not in topo.adjacency or d not in topo.adjacency:
        raise KeyError("source or destination not in topology")

    first = _dijkstra(topo, s, d, set(), set())
    if first is None:
        return []
    accepted = [first]
    seen: set[tuple[NodeId, ...]] = {first.nodes}
    candidates: list[tuple[tuple[float, int, tuple[NodeId, ...]], Path]] = []

    while len(accepted) < k:
        prev = accepted[-1]
        for i in range(len(prev.nodes) - 1):
            root = prev.nodes[: i + 1]
            spur = root[-1]
            banned_links = {
                a.links[i].key for a in accepted if a.nodes[: i + 1] == root
            }
            banned_nodes = set(root[:-1])
            spur_path = _dijkstra(topo, spur, d, banned_nodes, banned_links)
            if spur_path is None:
                continue
            nodes = root[:-1] + spur_path.nodes
            if nodes in seen:
                continue
            seen.add(nodes)
            path = _make_path(topo, nodes)
            heapq.heappush(candidates, ((path.length_km, path.hops, path.nodes), path))
        if not candidates:
            break
        _, nxt = heapq.heappop(candidates)
        accepted.append(nxt)
    return accepted


class ModulationTable:
    """Distance-thresholded modulation levels (bit rate per symbol).

    Thresholds are (max_length_km, level) pairs sorted by increasing reach;
    a path gets the level of the first threshold covering its length. Levels
    must be in 1..4 and non-increasing with distance. The default maps every
    length to level 1 (BPSK).
    """

    def __init__(self, thresholds: Sequence[tuple[float, int]] = ((math.inf, 1),)):
        entries = sorted(thresholds, key=lambda t: t[0])
        if not entries or entries[-1][0] != math.inf:
            raise ValueError("modulation table must cover all lengths (last limit inf)")
        levels = [lvl for _, lvl in entries]
        if any(not 1 <= lvl <= 4 for lvl in levels):
            raise ValueError("modulation levels must be in 1..4")
        if any(a < b for a, b in zip(levels, levels[1:])):
            raise ValueError("modulation level must be non-increasing with distance")
        self.thresholds: tuple[tuple[float, int], ...] = tuple(entries)

    def level_for(self, length_km: float) -> int:
        for limit, level in self.thresholds:
            if length_km <= limit:
                return level
        raise AssertionError("unreachable: table covers all lengths")

    def min_level(self) -> int:
        return self.thresholds[-1][1]

    def max_level(self) -> int:
        return self.thresholds[0][1]


DEFAULT_MODULATION = ModulationTable()


def modulation_level(path: Path, table: ModulationTable = DEFAULT_MODULATION) -> int:
    """Modulation level of a path, by its total length."""
    return table.level_for(path.length_km)


# Bundled example topologies. The six-node graph is a ring with two chords and
# uniform 1200 km links; the 14-node network uses the classic 21-link distance
# table. Every node hosts a datacenter in both.
PRESETS: dict[str, dict] = {
    "six-node": {
        "nodes": [1, 2, 3, 4, 5, 6],
        "links": [
            [1, 2, 1200], [2, 3, 1200], [3, 4, 1200], [4, 5, 1200],
            [5, 6, 1200], [1, 6, 1200], [2, 5, 1200], [3, 6, 1200],
        ],
        "slot_capacity": 300,
        "dc_nodes": [1, 2, 3, 4, 5, 6],
    },
    "nsfnet": {
        "nodes": list(range(1, 15)),
        "links": [
            [1, 2, 1100], [1, 3, 1600], [1, 8, 2800], [2, 3, 600],
            [2, 4, 1000], [3, 6, 2000], [4, 5, 600], [4, 11, 2400],
            [5, 6, 1100], [5, 7, 800], [6, 10, 1200], [6, 13, 2000],
            [7, 8, 700], [8, 9, 700], [9, 10, 900], [9, 12, 500],
            [9, 14, 500], [11, 12, 800], [11, 14, 800], [12, 13, 300],
            [13, 14, 300],
        ],
        "slot_capacity": 300,
        "dc_nodes": list(range(1, 15)),
    },
}


def load_topology(spec: Mapping | str | _FsPath) -> Topology:
    """Build a Topology from a preset name, a JSON file path, or a mapping.

    The mapping form carries `nodes`, `links` as (u, v, length_km) triples,
    `slot_capacity`, and `dc_nodes`.
    """
    if isinstance(spec, (str, _FsPath)):
        name = str(spec)
        if name in PRESETS:
            spec = PRESETS[name]
        else:
            path = _FsPath(name)
            if not path.exists():
                raise TopologyError(f"unknown preset or missing file: {name!r}")
            spec = json.loads(path.read_text())
    if "preset" in spec:
        preset = spec["preset"]
        if preset not in PRESETS:
            raise TopologyError(f"unknown preset {preset!r}")
        spec = PRESETS[preset]
    try:
        nodes = list(spec["nodes"])
        raw_links = list(spec["links"])
        cap = int(spec["slot_capacity"])
        dc_nodes = list(spec["dc_nodes"])
    except KeyError as exc:
        raise TopologyError(f"topology spec missing key {exc.args[0]!r}") from None
    links = [Link(u, v, float(length), cap) for u, v, length in raw_links]
    return Topology(nodes, links, dc_nodes)


def preset(name: str) -> Topology:
    return load_topology(name)
