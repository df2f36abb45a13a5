"""Undirected simple graphs, edge-list I/O, decompositions and generators.

Vertices are dense integer ids ``0..n-1``; string labels only matter at the
I/O boundary.
"""

from __future__ import annotations

import heapq
import itertools
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence


class GraphError(ValueError):
    """Raised for malformed graph input or invalid graph operations."""


def label_sort_key(labels: Iterable[str]):
    """Natural order: numeric when every label is an integer, else lexicographic."""
    labels = list(labels)
    try:
        for lab in labels:
            int(lab)
    except ValueError:
        return lambda s: s
    return lambda s: int(s)


class Graph:
    """Immutable simple undirected graph with sorted adjacency tuples."""

    __slots__ = ("n", "labels", "adj", "_index", "_nbr_sets", "_ncomp")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = (), labels: Sequence[str] | None = None):
        if n < 0:
            raise GraphError("vertex count must be nonnegative")
        if labels is None:
            labels = [str(i) for i in range(n)]
        labels = tuple(str(x) for x in labels)
        if len(labels) != n:
            raise GraphError("label count does not match vertex count")
        if len(set(labels)) != n:
            raise GraphError("vertex labels must be unique")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range")
            if u == v:
                raise GraphError(f"self-loop at vertex {labels[u]}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        self.n = n
        self.labels = labels
        self.adj = tuple(tuple(sorted(s)) for s in nbrs)
        self._nbr_sets = tuple(frozenset(s) for s in nbrs)
        self._index = {lab: i for i, lab in enumerate(labels)}
        self._ncomp = None

    # basic queries

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def neighbor_set(self, v: int) -> frozenset[int]:
        return self._nbr_sets[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._nbr_sets[u]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def index_of(self, label: str) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise GraphError(f"unknown vertex label {label!r}") from None

    def label_of(self, v: int) -> str:
        return self.labels[v]

    def non_neighbors(self, v: int) -> list[int]:
        nb = self._nbr_sets[v]
        return [u for u in range(self.n) if u != v and u not in nb]

    # structure

    def connected_components(self) -> list[list[int]]:
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp = [s]
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y in self.adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        comp.append(y)
                        queue.append(y)
            comps.append(sorted(comp))
        return comps

    def num_components(self) -> int:
        if self._ncomp is None:
            self._ncomp = len(self.connected_components())
        return self._ncomp

    def is_connected(self) -> bool:
        return self.n <= 1 or self.num_components() == 1

    def is_forest(self) -> bool:
        return self.num_edges == self.n - self.num_components()

    def is_tree(self) -> bool:
        return self.n >= 1 and self.is_connected() and self.num_edges == self.n - 1

    def is_complete(self) -> bool:
        return all(len(a) == self.n - 1 for a in self.adj)

    # derived graphs

    def with_edges(self, add: Iterable[tuple[int, int]] = (), remove: Iterable[tuple[int, int]] = ()) -> "Graph":
        es = {(min(u, v), max(u, v)) for u, v in self.edges()}
        for u, v in remove:
            es.discard((min(u, v), max(u, v)))
        for u, v in add:
            es.add((min(u, v), max(u, v)))
        return Graph(self.n, sorted(es), self.labels)

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph whose vertex ``perm[i]`` plays the role of old vertex ``i``."""
        labels = [""] * self.n
        for i, p in enumerate(perm):
            labels[p] = self.labels[i]
        return Graph(self.n, [(perm[u], perm[v]) for u, v in self.edges()], labels)

    def edge_key(self) -> tuple[tuple[int, int], ...]:
        return tuple(self.edges())

    # equality is on labelled structure, independent of id assignment

    def _labelled(self):
        return (
            frozenset(self.labels),
            frozenset(frozenset((self.labels[u], self.labels[v])) for u, v in self.edges()),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self._labelled() == other._labelled()

    def __hash__(self) -> int:
        return hash(self._labelled())

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges})"


# edge-list I/O


def parse_graph(text: str) -> Graph:
    """Parse an edge list: one ``u v`` pair per line, ``#`` starts a comment.

    A line holding a single token declares an isolated vertex. Ids are
    assigned by first appearance; duplicate and reversed edges collapse.
    """
    labels: dict[str, int] = {}
    edges = []

    def vid(tok):
        if tok not in labels:
            labels[tok] = len(labels)
        return labels[tok]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 1:
            vid(parts[0])
            continue
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got {raw.strip()!r}")
        a, b = parts
        if a == b:
            raise GraphError(f"line {lineno}: self-loop on {a!r}")
        edges.append((vid(a), vid(b)))
    if not labels:
        raise GraphError("empty graph document")
    names = sorted(labels, key=labels.get)
    return Graph(len(names), edges, names)


def serialize_graph(G: Graph) -> str:
    key = label_sort_key(G.labels)
    lines = []
    touched = set()
    pairs = []
    for u, v in G.edges():
        a, b = sorted((G.labels[u], G.labels[v]), key=key)
        pairs.append((a, b))
        touched.update((u, v))
    for a, b in sorted(pairs, key=lambda p: (key(p[0]), key(p[1]))):
        lines.append(f"{a} {b}")
    for v in sorted((v for v in range(G.n) if v not in touched), key=lambda v: key(G.labels[v])):
        lines.append(G.labels[v])
    return "\n".join(lines) + "\n"


def read_graph(path) -> Graph:
    with open(path, encoding="utf-8") as f:
        return parse_graph(f.read())


# decompositions


@dataclass(frozen=True)
class RemovalDecomposition:
    center: int
    components: tuple[tuple[frozenset[int], frozenset[int]], ...]

    def component_of(self, u: int) -> int:
        for idx, (C, _) in enumerate(self.components):
            if u in C:
                return idx
        raise GraphError(f"vertex {u} is not in any component")


def components_after_removal(G: Graph, v: int) -> RemovalDecomposition:
    """Connected components of ``G - v`` with ``v``'s neighbours in each.

    Components are ordered by their smallest vertex id.
    """
    if not 0 <= v < G.n:
        raise GraphError(f"vertex {v} out of range")
    seen = [False] * G.n
    seen[v] = True
    nv = G.neighbor_set(v)
    comps = []
    for s in range(G.n):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in G.adj[x]:
                if not seen[y]:
                    seen[y] = True
                    comp.append(y)
                    queue.append(y)
        C = frozenset(comp)
        comps.append((C, C & nv))
    comps.sort(key=lambda cu: min(cu[0]))
    return RemovalDecomposition(v, tuple(comps))


@dataclass(frozen=True)
class BiconnectedInfo:
    blocks: tuple[frozenset[tuple[int, int]], ...]
    articulation_points: frozenset[int]
    k: int


def biconnected_components(G: Graph) -> tuple[list[frozenset[tuple[int, int]]], set[int]]:
    """Edge blocks and articulation points via iterative Hopcroft-Tarjan DFS."""
    disc = [-1] * G.n
    low = [0] * G.n
    blocks: list[frozenset[tuple[int, int]]] = []
    cuts: set[int] = set()
    t = 0
    for root in range(G.n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = t
        t += 1
        root_children = 0
        edge_stack: list[tuple[int, int]] = []
        stack = [(root, -1, iter(G.adj[root]))]
        while stack:
            u, parent, it = stack[-1]
            advanced = False
            for w in it:
                if w == parent:
                    continue
                if disc[w] == -1:
                    edge_stack.append((u, w))
                    disc[w] = low[w] = t
                    t += 1
                    stack.append((w, u, iter(G.adj[w])))
                    advanced = True
                    break
                if disc[w] < disc[u]:
                    edge_stack.append((u, w))
                    low[u] = min(low[u], disc[w])
            if advanced:
                continue
            stack.pop()
            if parent == -1:
                continue
            low[parent] = min(low[parent], low[u])
            if low[u] >= disc[parent]:
                if parent == root:
                    root_children += 1
                else:
                    cuts.add(parent)
                block = set()
                while True:
                    a, b = edge_stack.pop()
                    block.add((min(a, b), max(a, b)))
                    if (a, b) == (parent, u):
                        break
                blocks.append(frozenset(block))
        if root_children > 1:
            cuts.add(root)
    return blocks, cuts


def k_parameter(G: Graph) -> BiconnectedInfo:
    """Blocks of ``G`` and k(G): 1 for forests, else the max in-block degree."""
    blocks, cuts = biconnected_components(G)
    if G.is_forest():
        k = 1
    else:
        k = 1
        for block in blocks:
            deg: dict[int, int] = {}
            for a, b in block:
                deg[a] = deg.get(a, 0) + 1
                deg[b] = deg.get(b, 0) + 1
            k = max(k, max(deg.values()))
    blocks.sort(key=lambda b: min(b))
    return BiconnectedInfo(tuple(blocks), frozenset(cuts), k)


def check_swap_automorphism(G: Graph, sigma: Sequence[int], u: int, v: int) -> bool:
    """True iff ``sigma`` is an automorphism of ``G`` exchanging ``u`` and ``v``."""
    sigma = list(sigma)
    if len(sigma) != G.n or sorted(sigma) != list(range(G.n)):
        raise GraphError("sigma is not a permutation of the vertex set")
    if sigma[u] != v or sigma[v] != u:
        return False
    for a, b in G.edges():
        if not G.has_edge(sigma[a], sigma[b]):
            return False
    # a bijection mapping E into E preserves non-edges too (|E| is finite)
    return True


# generators


def generate(kind: str, n: int, *, p: float = 0.5, seed: int | None = None, connected: bool = False) -> Graph:
    """Deterministic test graphs: complete, path, cycle, star, random_tree, gnp.

    ``star`` with ``n`` gives a center plus ``n`` leaves (vertex 0 is the
    center). ``connected`` restricts ``gnp`` output to its largest component.
    """
    if n < 1:
        raise GraphError("size must be at least 1")
    if kind == "complete":
        return Graph(n, itertools.combinations(range(n), 2))
    if kind == "path":
        return Graph(n, [(i, i + 1) for i in range(n - 1)])
    if kind == "cycle":
        if n < 3:
            raise GraphError("a cycle needs at least 3 vertices")
        return Graph(n, [(i, (i + 1) % n) for i in range(n)])
    if kind == "star":
        return Graph(n + 1, [(0, i) for i in range(1, n + 1)])
    if kind == "random_tree":
        if seed is None:
            raise GraphError("random_tree needs a seed")
        return random_tree(n, random.Random(seed))
    if kind == "gnp":
        if seed is None:
            raise GraphError("gnp needs a seed")
        if not 0.0 <= p <= 1.0:
            raise GraphError("probability must lie in [0, 1]")
        rng = random.Random(seed)
        G = Graph(n, [e for e in itertools.combinations(range(n), 2) if rng.random() < p])
        if connected:
            G = largest_component(G)
        return G
    raise GraphError(f"unknown generator kind {kind!r}")


def random_tree(n: int, rng: random.Random) -> Graph:
    """Uniform labelled tree from a random Pruefer sequence."""
    if n <= 2:
        return Graph(n, [(0, 1)] if n == 2 else [])
    seq = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    a, b = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((a, b))
    return Graph(n, edges)


def largest_component(G: Graph) -> Graph:
    comps = G.connected_components()
    best = max(comps, key=lambda c: (len(c), -c[0]))
    return induced_subgraph(G, best)


def induced_subgraph(G: Graph, vertices: Sequence[int]) -> Graph:
    vertices = sorted(vertices)
    pos = {x: i for i, x in enumerate(vertices)}
    edges = [(pos[a], pos[b]) for a, b in G.edges() if a in pos and b in pos]
    return Graph(len(vertices), edges, [G.labels[x] for x in vertices])


def block_chain(num_blocks: int, block_size: int, seed: int) -> Graph:
    """Complete blocks glued at random cut vertices; k = block_size - 1."""
    rng = random.Random(seed)
    edges = list(itertools.combinations(range(block_size), 2))
    n = block_size
    for _ in range(num_blocks - 1):
        anchor = rng.randrange(n)
        new = [anchor] + list(range(n, n + block_size - 1))
        n += block_size - 1
        edges.extend(itertools.combinations(new, 2))
    return Graph(n, edges)
