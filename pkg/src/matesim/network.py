"""Typed mating-graph snapshots and classical structural metrics.

The graph mirrors live relationships exactly: nodes are living adults
labeled with tier and gender, edges carry the relationship kind. The
metrics here (clustering, path length, small-world sigma against
degree-preserving rewired nulls, cross-tier composition) are exact
computations, chosen over learned graph models because the structural
claims they support are about the graph itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .population import Gender, Population, RelationshipKind, Tier

__all__ = [
    "GraphNode",
    "MatingGraph",
    "PathLengthResult",
    "SigmaResult",
    "CrossTierStats",
    "snapshot",
    "clustering_coefficient",
    "avg_path_length",
    "small_world_sigma",
    "cross_tier_stats",
    "write_edge_list",
]


@dataclass(frozen=True)
class GraphNode:
    id: int
    tier: Tier
    gender: Gender


@dataclass
class MatingGraph:
    """Simple undirected graph with tier/gender node labels and typed edges.

    Edges are stored as (low id, high id, kind) and kept sorted; the
    graph is simple by construction (one edge per unordered pair).
    """

    nodes: list[GraphNode]
    edges: list[tuple[int, int, RelationshipKind]]
    step: int
    _adjacency: dict[int, set[int]] | None = field(default=None, repr=False)

    def adjacency(self) -> dict[int, set[int]]:
        if self._adjacency is None:
            adj: dict[int, set[int]] = {node.id: set() for node in self.nodes}
            for a, b, _ in self.edges:
                adj[a].add(b)
                adj[b].add(a)
            self._adjacency = adj
        return self._adjacency

    @property
    def node_ids(self) -> list[int]:
        return [n.id for n in self.nodes]

    def tier_of(self) -> dict[int, Tier]:
        return {n.id: n.tier for n in self.nodes}


def snapshot(pop: Population) -> MatingGraph:
    """Exact mirror of the live relationship set over living adults."""
    nodes = [
        GraphNode(id=a.id, tier=a.tier, gender=a.gender) for a in pop.living_adults()
    ]
    edges = []
    for rel in pop.relationships():
        a, b = sorted((rel.partner_a, rel.partner_b))
        edges.append((a, b, rel.kind))
    edges.sort(key=lambda e: (e[0], e[1], e[2].value))
    return MatingGraph(nodes=nodes, edges=edges, step=pop.step)


def clustering_coefficient(g: MatingGraph) -> float:
    """Mean local clustering over all nodes; degree < 2 contributes 0."""
    if not g.nodes:
        return 0.0
    adj = g.adjacency()
    total = 0.0
    for node in g.nodes:
        neighbors = adj[node.id]
        k = len(neighbors)
        if k < 2:
            continue
        links = 0
        ns = list(neighbors)
        for i in range(k):
            for j in range(i + 1, k):
                if ns[j] in adj[ns[i]]:
                    links += 1
        total += 2.0 * links / (k * (k - 1))
    return total / len(g.nodes)


def _components(adj: dict[int, set[int]]) -> list[list[int]]:
    seen: set[int] = set()
    comps: list[list[int]] = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        frontier = [start]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        comp.append(v)
                        nxt.append(v)
            frontier = nxt
        comps.append(sorted(comp))
    return comps


@dataclass(frozen=True)
class PathLengthResult:
    value: float
    singleton: bool  # largest component is one node: length defined 0


def _csr(adj: dict[int, set[int]], comp: list[int]) -> tuple[np.ndarray, np.ndarray]:
    """Compact adjacency for one component, nodes relabelled 0..n-1."""
    index = {u: i for i, u in enumerate(comp)}
    counts = np.array([len(adj[u]) for u in comp], dtype=np.int64)
    indptr = np.zeros(len(comp) + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = np.empty(indptr[-1], dtype=np.int64)
    for u in comp:
        i = index[u]
        neigh = sorted(index[v] for v in adj[u])
        indices[indptr[i] : indptr[i + 1]] = neigh
    return indptr, indices


def avg_path_length(g: MatingGraph) -> PathLengthResult:
    """Mean shortest-path length over the largest connected component.

    Unweighted BFS semantics; averaged over ordered pairs, which equals
    the unordered-pair mean. Ties for largest component break toward
    the one containing the smallest node id. Frontier expansion is
    vectorised so large end-of-run graphs stay cheap.
    """
    if not g.nodes:
        return PathLengthResult(value=0.0, singleton=True)
    adj = g.adjacency()
    comps = _components(adj)
    comp = max(comps, key=lambda c: (len(c), -c[0]))
    n = len(comp)
    if n < 2:
        return PathLengthResult(value=0.0, singleton=True)
    indptr, indices = _csr(adj, comp)
    total = 0
    dist = np.empty(n, dtype=np.int64)
    for source in range(n):
        dist.fill(-1)
        dist[source] = 0
        frontier = np.array([source], dtype=np.int64)
        d = 0
        while frontier.size:
            d += 1
            starts = indptr[frontier]
            counts = indptr[frontier + 1] - starts
            width = int(counts.sum())
            if width == 0:
                break
            # flat gather of every frontier neighbour: offsets restart per node
            bases = np.repeat(starts, counts)
            resets = np.repeat(np.cumsum(counts) - counts, counts)
            neigh = indices[bases + np.arange(width) - resets]
            fresh = np.unique(neigh[dist[neigh] < 0])
            dist[fresh] = d
            frontier = fresh
        total += int(dist.sum())
    return PathLengthResult(value=total / (n * (n - 1)), singleton=False)


@dataclass(frozen=True)
class SigmaResult:
    sigma: float
    degenerate: bool  # clustering 0 (e.g. trees): sigma reported as 0


def _rewired_edges(
    edges: list[tuple[int, int]],
    rng: np.random.Generator,
    swaps_per_edge: int = 20,
) -> list[tuple[int, int]]:
    """Degree-preserving double-edge-swap null sample."""
    working = [tuple(e) for e in edges]
    present = set(working)
    m = len(working)
    if m < 2:
        return working
    attempts = swaps_per_edge * m
    for _ in range(attempts):
        i, j = rng.integers(0, m, size=2)
        if i == j:
            continue
        a, b = working[i]
        c, d = working[j]
        if rng.random() < 0.5:
            new1, new2 = (a, d), (c, b)
        else:
            new1, new2 = (a, c), (b, d)
        new1 = tuple(sorted(new1))
        new2 = tuple(sorted(new2))
        if new1[0] == new1[1] or new2[0] == new2[1]:
            continue
        if new1 in present or new2 in present or new1 == new2:
            continue
        present.discard(working[i])
        present.discard(working[j])
        working[i] = new1
        working[j] = new2
        present.add(new1)
        present.add(new2)
    return working


def small_world_sigma(
    g: MatingGraph,
    rng: np.random.Generator,
    n_random: int = 10,
    swaps_per_edge: int = 20,
) -> SigmaResult:
    """Small-world coefficient sigma = (C/C_rand) / (L/L_rand).

    C_rand and L_rand are means over n_random degree-preserving
    double-edge-swap rewirings (swaps_per_edge * |E| attempted swaps
    each). A graph with zero clustering is degenerate by definition and
    reports sigma 0 with the flag set.
    """
    if n_random < 10:
        raise ValueError(f"n_random must be >= 10, got {n_random}")
    c_obs = clustering_coefficient(g)
    if c_obs == 0.0 or not g.edges:
        return SigmaResult(sigma=0.0, degenerate=True)
    l_obs = avg_path_length(g).value
    plain_edges = [(a, b) for a, b, _ in g.edges]
    c_rand_sum = 0.0
    l_rand_sum = 0.0
    for _ in range(n_random):
        rewired = _rewired_edges(plain_edges, rng, swaps_per_edge)
        null = MatingGraph(
            nodes=g.nodes,
            edges=[(a, b, RelationshipKind.COMPANION) for a, b in rewired],
            step=g.step,
        )
        c_rand_sum += clustering_coefficient(null)
        l_rand_sum += avg_path_length(null).value
    c_rand = c_rand_sum / n_random
    l_rand = l_rand_sum / n_random
    if l_obs == 0.0 or c_rand == 0.0 or l_rand == 0.0:
        # Null graphs wiped out all structure to compare against; treat
        # an untestable graph as non-small-world rather than infinite.
        return SigmaResult(sigma=0.0, degenerate=True)
    return SigmaResult(sigma=(c_obs / c_rand) / (l_obs / l_rand), degenerate=False)


@dataclass
class CrossTierStats:
    """Edge counts by tier pair and kind, plus B-tier bridging share."""

    edge_counts: dict[tuple[str, str, str], int]
    b_bridging_share: float
    ac_two_paths: int

    def count(self, tier_a: str, tier_b: str, kind: str) -> int:
        lo, hi = sorted((tier_a, tier_b))
        return self.edge_counts.get((lo, hi, kind), 0)


def cross_tier_stats(g: MatingGraph) -> CrossTierStats:
    """Classify edges by tier pair and measure B-tier bridging.

    Bridging: over all length-2 paths whose endpoints are an A node and
    a C node, the share whose midpoint is a B node, computed exactly by
    midpoint enumeration. No such paths yields share 0.
    """
    tier_of = g.tier_of()
    counts: dict[tuple[str, str, str], int] = {}
    for a, b, kind in g.edges:
        lo, hi = sorted((tier_of[a].value, tier_of[b].value))
        key = (lo, hi, kind.value)
        counts[key] = counts.get(key, 0) + 1
    adj = g.adjacency()
    total_paths = 0
    b_paths = 0
    for mid in g.nodes:
        neigh = adj[mid.id]
        n_a = sum(1 for x in neigh if tier_of[x] is Tier.A)
        n_c = sum(1 for x in neigh if tier_of[x] is Tier.C)
        paths = n_a * n_c
        total_paths += paths
        if mid.tier is Tier.B:
            b_paths += paths
    share = b_paths / total_paths if total_paths else 0.0
    return CrossTierStats(
        edge_counts=counts, b_bridging_share=share, ac_two_paths=total_paths
    )


def write_edge_list(g: MatingGraph, path: str) -> None:
    """Edge-list text export: 'a,b,kind,tier_a,tier_b', one per line, sorted."""
    tier_of = g.tier_of()
    with open(path, "w", encoding="utf-8") as fh:
        for a, b, kind in g.edges:
            fh.write(f"{a},{b},{kind.value},{tier_of[a].value},{tier_of[b].value}\n")
