"""Return potentials and PageRank on (modified) undirected graphs.

A walk at a vertex with no outlinks stays where it is on non-jump steps.
With that convention the stationary distribution and the potential formula
``pi_v = alpha * q.phi_v / (1 - (1 - alpha) * mean_{i in out(v)} phi_iv)``
agree exactly, including after deletions that isolate vertices.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .graph import Graph, GraphError

RESIDUAL_TOL = 1e-9


class NumericalError(ArithmeticError):
    """A linear solve produced a residual above tolerance."""


@dataclass(frozen=True)
class GameConfig:
    alpha: float
    q: np.ndarray = field(repr=False)

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        object.__setattr__(self, "q", q)
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie strictly in (0, 1), got {self.alpha}")
        if q.ndim != 1 or np.any(q < 0) or abs(q.sum() - 1.0) > 1e-12:
            raise ValueError("q must be a nonnegative vector summing to 1")

    @classmethod
    def uniform(cls, n: int, alpha: float = 0.15) -> "GameConfig":
        return cls(alpha, np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return len(self.q)

    def is_uniform(self) -> bool:
        return bool(np.allclose(self.q, 1.0 / self.n, rtol=0, atol=1e-15))


class Digraph:
    """Out-neighbour sets of a directed graph derived from an undirected one."""

    __slots__ = ("n", "out")

    def __init__(self, out: Sequence[Iterable[int]]):
        self.out = tuple(frozenset(o) for o in out)
        self.n = len(self.out)
        for u, o in enumerate(self.out):
            if u in o:
                raise GraphError(f"self-arc at {u}")

    @classmethod
    def from_graph(cls, G: Graph) -> "Digraph":
        return cls(G.adj)

    def outdeg(self, u: int) -> int:
        return len(self.out[u])


def strategy_view(G: Graph, v: int, kept: Iterable[int] | None = None,
                  outlinks: Iterable[int] = (), added: int | None = None) -> Digraph:
    """Directed view of ``G`` after ``v`` plays a strategy.

    ``kept`` neighbours keep their bidirectional edge with ``v`` (all of them
    when None); ``outlinks`` become one-way arcs from ``v``; ``added`` becomes
    a new bidirectional edge.
    """
    out = [set(a) for a in G.adj]
    if kept is not None:
        kept = set(kept)
        if not kept <= G.neighbor_set(v):
            raise GraphError("kept vertices must be neighbours")
        for w in G.neighbor_set(v) - kept:
            out[v].discard(w)
            out[w].discard(v)
    for y in outlinks:
        if y == v or G.has_edge(v, y):
            raise GraphError("outlinks must target non-neighbours other than v")
        out[v].add(y)
    if added is not None:
        if added == v or G.has_edge(v, added):
            raise GraphError("added edge must join v to a non-neighbour")
        out[v].add(added)
        out[added].add(v)
    return Digraph(out)


def _as_digraph(D) -> Digraph:
    return Digraph.from_graph(D) if isinstance(D, Graph) else D


def potential_residual(D, v: int, alpha: float, phi: np.ndarray) -> float:
    """Max violation of the potential recursion over all u != v."""
    D = _as_digraph(D)
    worst = abs(phi[v] - 1.0)
    for u in range(D.n):
        if u == v:
            continue
        o = D.out[u]
        rhs = (1 - alpha) / len(o) * sum(phi[i] for i in o) if o else 0.0
        worst = max(worst, abs(phi[u] - rhs))
    return worst


def potentials_column(D, v: int, alpha: float) -> np.ndarray:
    """phi[u] = probability a walk from u reaches v before its first jump."""
    D = _as_digraph(D)
    n = D.n
    M = np.eye(n)
    rhs = np.zeros(n)
    rhs[v] = 1.0
    for u in range(n):
        if u == v or not D.out[u]:
            continue
        w = (1 - alpha) / len(D.out[u])
        for i in D.out[u]:
            M[u, i] -= w
    phi = np.linalg.solve(M, rhs)
    phi[v] = 1.0
    res = potential_residual(D, v, alpha, phi)
    if res > RESIDUAL_TOL:
        raise NumericalError(f"potential residual {res:.3e} exceeds {RESIDUAL_TOL}")
    return phi


def rooted_tree(T: Graph, root: int) -> tuple[list[int], list[int]]:
    """BFS order and parent array of a forest component rooted at ``root``."""
    parent = [-1] * T.n
    order = [root]
    seen = {root}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in T.adj[x]:
            if y not in seen:
                seen.add(y)
                parent[y] = x
                order.append(y)
                queue.append(y)
    return order, parent


def tree_potentials(T: Graph, v: int, alpha: float) -> tuple[np.ndarray, list[int], list[int]]:
    """Tree potentials toward ``v`` plus the BFS order and parents used."""
    if not T.is_forest():
        raise GraphError("tree potentials need an acyclic graph")
    beta = 1.0 - alpha
    order, parent = rooted_tree(T, v)
    s = [0.0] * T.n
    child_sum = [0.0] * T.n
    adj = T.adj
    for u in reversed(order[1:]):
        w = beta / len(adj[u])
        s[u] = w / (1.0 - w * child_sum[u])
        child_sum[parent[u]] += s[u]
    phi = [0.0] * T.n
    phi[v] = 1.0
    for u in order[1:]:
        phi[u] = s[u] * phi[parent[u]]
    return np.array(phi), order, parent


def tree_potentials_column(T: Graph, v: int, alpha: float) -> np.ndarray:
    """Potentials toward ``v`` on a tree in O(n).

    Rooted at ``v``, every non-root potential is a fixed multiple of its
    parent's: ``phi_u = s_u * phi_parent``. Forward elimination computes
    ``s_u`` leaves-up; back-substitution pushes values down from the root.
    Vertices outside ``v``'s component get 0.
    """
    return tree_potentials(T, v, alpha)[0]


class ComponentPotentials:
    """Potentials toward ``v`` over one component ``C`` of ``G - v``.

    ``v`` may be joined to any subset ``S`` of ``attach``. The degree-scaled
    system ``(L0 + diag(1_S)) phi = beta * 1_S`` differs from ``L0`` only on
    the diagonal, so one factorisation plus a |S|x|S| Woodbury correction
    gives ``phi^S`` for every S.
    """

    def __init__(self, G: Graph, v: int, C: Iterable[int], attach: Iterable[int], alpha: float):
        self.C = sorted(C)
        self.attach = sorted(attach)
        self.beta = 1.0 - alpha
        self.pos = {w: i for i, w in enumerate(self.C)}
        if not set(self.attach) <= set(self.C):
            raise GraphError("attach vertices must lie in the component")
        m = len(self.C)
        self._single = m == 1
        if self._single:
            return
        L0 = np.zeros((m, m))
        for w in self.C:
            i = self.pos[w]
            for y in G.adj[w]:
                if y != v and y in self.pos:
                    L0[i, i] += 1.0
                    L0[i, self.pos[y]] -= self.beta
        E = np.zeros((m, len(self.attach)))
        for j, u in enumerate(self.attach):
            E[self.pos[u], j] = 1.0
        self.Z = np.linalg.solve(L0, E)

    def phi(self, S: Iterable[int]) -> np.ndarray:
        """Potentials over ``self.C`` (in sorted order) when v keeps edges to S."""
        S = sorted(S)
        if self._single:
            return np.array([self.beta if S else 0.0])
        if not S:
            return np.zeros(len(self.C))
        idx = [self.attach.index(u) for u in S]
        rows = [self.pos[u] for u in S]
        ZS = self.Z[:, idx]
        W = ZS[rows, :]
        y = np.linalg.solve(np.eye(len(S)) + W, np.ones(len(S)))
        return self.beta * (ZS @ y)


def subset_potentials(G: Graph, v: int, Ci: Iterable[int], Ui: Iterable[int], S: Iterable[int],
                      alpha: float) -> np.ndarray:
    """Potentials toward v over ``Ci`` when v keeps only its edges to ``S``.

    Solved from scratch on the edge-deleted graph. Returns a length-n vector
    that is zero outside ``Ci``.
    """
    Ci, Ui, S = set(Ci), set(Ui), set(S)
    if not S <= Ui:
        raise GraphError("S must be a subset of U_i")
    keep = (G.neighbor_set(v) - Ui) | S
    phi = potentials_column(strategy_view(G, v, kept=keep), v, alpha)
    out = np.zeros(G.n)
    idx = sorted(Ci)
    out[idx] = phi[idx]
    return out


def pagerank_from_potentials(D, v: int, cfg: GameConfig, phi: np.ndarray) -> float:
    D = _as_digraph(D)
    o = D.out[v]
    if not o:
        raise GraphError(f"dangling target {v}")
    ret = (1 - cfg.alpha) / len(o) * sum(phi[i] for i in o)
    return float(cfg.alpha * (cfg.q @ phi) / (1.0 - ret))


def stationary_pagerank(D, cfg: GameConfig, dangling: str = "stay") -> np.ndarray:
    """Stationary distribution of the alpha-random walk by a direct solve.

    ``dangling="stay"`` (default) gives vertices without outlinks a self-loop
    for non-jump steps; ``"jump"`` sends them to q instead and is kept only
    for comparison.
    """
    D = _as_digraph(D)
    n = D.n
    P = np.zeros((n, n))
    for u, o in enumerate(D.out):
        if o:
            P[u, list(o)] = 1.0 / len(o)
        elif dangling == "stay":
            P[u, u] = 1.0
        elif dangling == "jump":
            P[u] = cfg.q
        else:
            raise ValueError(f"unknown dangling rule {dangling!r}")
    M = np.eye(n) - (1 - cfg.alpha) * P.T
    pi = np.linalg.solve(M, cfg.alpha * cfg.q)
    return pi / pi.sum()


def stationary_pagerank_of(D, v: int, cfg: GameConfig) -> float:
    return float(stationary_pagerank(D, cfg)[v])
