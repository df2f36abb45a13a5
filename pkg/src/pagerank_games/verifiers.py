"""Best-response and Nash-equilibrium verifiers for the three game models.

* deletion: a player may drop any of its edges but must keep at least one.
* request_delete: deletions plus one-way outlinks to non-neighbours (forests).
* add_delete: deletions plus at most one new edge, which the other endpoint
  accepts only if its own PageRank strictly rises.
"""

from __future__ import annotations

import hashlib
import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, GraphError, components_after_removal, check_swap_automorphism, k_parameter
from .pagerank import (
    ComponentPotentials,
    GameConfig,
    stationary_pagerank,
    strategy_view,
    tree_potentials,
)
from .parametric import (
    LinearFractionalProgram,
    fractional_max,
    improvement_test,
    maximize_fixed_weight,
    subset_coefficients,
)

TOL = 1e-9
K_MAX = 12
MODELS = ("deletion", "request_delete", "add_delete")


class ScopeError(ValueError):
    """The requested model/graph combination is outside the algorithm's scope."""


def normalize_model(model: str) -> str:
    m = model.replace("-", "_").lower()
    if m not in MODELS:
        raise ScopeError(f"unknown model {model!r}; expected one of {', '.join(MODELS)}")
    return m


@dataclass(frozen=True)
class Strategy:
    vertex: int
    kept: tuple[int, ...]
    outlinks: tuple[int, ...] = ()
    added_edge: int | None = None

    def view(self, G: Graph):
        return strategy_view(G, self.vertex, self.kept, self.outlinks, self.added_edge)

    def apply(self, G: Graph) -> Graph:
        """Undirected graph after the move (outlinks cannot be represented)."""
        if self.outlinks:
            raise ScopeError("one-way outlinks do not give an undirected graph")
        v = self.vertex
        drop = [(v, w) for w in G.neighbors(v) if w not in set(self.kept)]
        add = [(v, self.added_edge)] if self.added_edge is not None else []
        return G.with_edges(add=add, remove=drop)


@dataclass
class BestResponseResult:
    vertex: int
    in_best_response: bool
    current_pi: float
    best_pi: float
    improving: Strategy | None = None

    @property
    def margin(self) -> float:
        return self.best_pi - self.current_pi


@dataclass
class NashReport:
    model: str
    alpha: float
    q: np.ndarray = field(repr=False)
    results: list[BestResponseResult]
    timing_ms: float = 0.0

    @property
    def verdict(self) -> bool:
        return all(r.in_best_response for r in self.results)

    def first_improver(self) -> BestResponseResult | None:
        return next((r for r in self.results if not r.in_best_response), None)


def _finish(v, current, best, strategy, tol) -> BestResponseResult:
    if best > current + tol:
        return BestResponseResult(v, False, current, best, strategy)
    return BestResponseResult(v, True, current, max(best, current), None)


# deletion model, trees


def _tree_branch_data(T: Graph, v: int, phi: np.ndarray, q: np.ndarray, order, parent):
    """Branch root per vertex and q-weighted potential mass per branch."""
    acc = (q * phi).tolist()
    for u in reversed(order[1:]):
        acc[parent[u]] += acc[u]
    acc = np.array(acc)
    branch = [-1] * T.n
    for u in order[1:]:
        branch[u] = u if parent[u] == v else branch[parent[u]]
    return branch, acc


def deletion_tree_program(T: Graph, v: int, cfg: GameConfig):
    nbrs = list(T.neighbors(v))
    phi, order, parent = tree_potentials(T, v, cfg.alpha)
    branch, acc = _tree_branch_data(T, v, phi, cfg.q, order, parent)
    a = cfg.alpha * acc[nbrs]
    b = 1.0 - (1.0 - cfg.alpha) * phi[nbrs]
    return LinearFractionalProgram(a, b, cfg.alpha * float(cfg.q[v]), 0.0), nbrs, phi, branch, acc


def best_response_deletion_tree(T: Graph, v: int, cfg: GameConfig, tol: float = TOL) -> BestResponseResult:
    if not T.is_forest():
        raise ScopeError("tree deletion verifier needs an acyclic graph")
    d = T.degree(v)
    if d == 0:
        return BestResponseResult(v, True, float(cfg.q[v]), float(cfg.q[v]))
    p, nbrs, *_ = deletion_tree_program(T, v, cfg)
    current = d * p.ratio(np.ones(d))
    x, best = fractional_max(p)
    kept = tuple(nbrs[i] for i in range(d) if x[i])
    return _finish(v, current, best, Strategy(v, kept), tol)


# deletion model, general graphs


def _check_k(decomp, k_max):
    worst = max((len(U) for _, U in decomp.components), default=0)
    if worst > k_max:
        raise ScopeError(f"vertex {decomp.center} has {worst} edges into one component; k_max is {k_max}")


def _deletion_general(G, v, cfg, tol, k_max, solver="woodbury"):
    decomp = components_after_removal(G, v)
    _check_k(decomp, k_max)
    coeffs = subset_coefficients(G, v, decomp, cfg, solver)
    d = G.degree(v)
    if d == 0:
        return BestResponseResult(v, True, float(cfg.q[v]), float(cfg.q[v])), coeffs, decomp
    A1, B1 = coeffs.numerator_denominator(G.neighbors(v))
    current = d * A1 / B1
    best, best_kept = current, None
    for l in range(1, d + 1):
        threshold = current / l
        improves, _ = improvement_test(coeffs, l, threshold)
        if not improves:
            continue
        found = maximize_fixed_weight(coeffs, l, threshold)
        if found is not None and l * found[1] > best:
            best, best_kept = l * found[1], found[0]
    strategy = Strategy(v, tuple(best_kept)) if best_kept is not None else None
    return _finish(v, current, best, strategy, tol), coeffs, decomp


def best_response_deletion_general(G: Graph, v: int, cfg: GameConfig, tol: float = TOL,
                                   k_max: int = K_MAX) -> BestResponseResult:
    return _deletion_general(G, v, cfg, tol, k_max)[0]


# request-delete model, forests


def _request_delete_base(T: Graph, v: int, cfg: GameConfig):
    p, nbrs, phi, branch, acc = deletion_tree_program(T, v, cfg)
    beta = 1.0 - cfg.alpha
    nb = T.neighbor_set(v)
    cands = [u for u in range(T.n) if u != v and u not in nb]
    e = {u: beta * phi[u] for u in cands}
    ranked = sorted(cands, key=lambda u: (-e[u], u))
    slot = {w: i for i, w in enumerate(nbrs)}
    return p, nbrs, ranked, e, branch, slot


def request_delete_coefficients(T: Graph, v: int, cfg: GameConfig, l2: int):
    """Fixed-outlink-count program for ``x`` and the greedy outlink set.

    Outlinks go to the ``l2`` non-neighbours of highest potential. Returns
    ``(program, outlinks)``; the PageRank of ``v`` for retained set ``x`` is
    ``(|x| + l2) * program.ratio(x)``.
    """
    if not T.is_forest():
        raise ScopeError("request-delete verifier needs an acyclic graph")
    p, nbrs, ranked, e, branch, slot = _request_delete_base(T, v, cfg)
    if not 0 <= l2 <= len(ranked):
        raise ValueError(f"outlink count {l2} outside 0..{len(ranked)}")
    yhat = ranked[:l2]
    b = p.b.copy()
    for u in yhat:
        if branch[u] != -1:
            b[slot[branch[u]]] -= e[u]
    return LinearFractionalProgram(p.a, b, p.A0, float(l2)), tuple(sorted(yhat))


def best_response_request_delete_tree(T: Graph, v: int, cfg: GameConfig, tol: float = TOL) -> BestResponseResult:
    if not T.is_forest():
        raise ScopeError("request-delete verifier needs an acyclic graph")
    d = T.degree(v)
    if d == 0:
        return BestResponseResult(v, True, float(cfg.q[v]), float(cfg.q[v]))
    p0, nbrs, ranked, e, branch, slot = _request_delete_base(T, v, cfg)
    current = d * p0.ratio(np.ones(d))
    best, strategy = -np.inf, None
    b = p0.b.copy()
    for l2 in range(len(ranked) + 1):
        if l2:
            u = ranked[l2 - 1]
            if branch[u] != -1:
                b[slot[branch[u]]] -= e[u]
        p = LinearFractionalProgram(p0.a, b.copy(), p0.A0, float(l2))
        x, val = fractional_max(p, weight_offset=l2)
        if val > best:
            kept = tuple(nbrs[i] for i in range(d) if x[i])
            best, strategy = val, Strategy(v, kept, tuple(sorted(ranked[:l2])))
    return _finish(v, current, best, strategy, tol)


# add-delete model


def local_pagerank_coefficients(Gp: Graph, Cj, u: int, v: int, cfg: GameConfig) -> tuple[float, float]:
    """``pi_u = zeta + eta * p`` where ``p = pi_v / deg(v)`` in ``Gp``.

    ``Cj`` must be separated from the rest of ``Gp`` by ``v``.
    """
    C = sorted(Cj)
    pos = {w: i for i, w in enumerate(C)}
    if u not in pos:
        raise GraphError(f"vertex {u} is not in the component")
    beta = 1.0 - cfg.alpha
    m = len(C)
    M = np.eye(m)
    attach = np.zeros(m)
    for w in C:
        i = pos[w]
        if Gp.degree(w) == 0:
            M[i, i] -= beta
        for y in Gp.adj[w]:
            if y == v:
                attach[i] = beta
            elif y in pos:
                M[i, pos[y]] -= beta / Gp.degree(y)
            else:
                raise GraphError("v does not separate the component")
    base = cfg.alpha * cfg.q[C]
    zeta_vec = np.linalg.solve(M, base)
    eta_vec = np.linalg.solve(M, attach)
    return float(zeta_vec[pos[u]]), float(eta_vec[pos[u]])


def best_response_add_delete(G: Graph, v: int, cfg: GameConfig, tol: float = TOL, k_max: int = K_MAX,
                             pi_G: np.ndarray | None = None) -> BestResponseResult:
    """Best over pure deletions and over accepted single-edge additions.

    For a non-neighbour ``u`` in component ``C_j`` of ``G - v`` and a retained
    subset ``U'`` of ``v``'s edges into ``C_j``, the potentials on ``C_j`` are
    fixed, and the rest of ``v``'s choice is a grouped fractional program over
    the other components. The acceptance test on ``u`` is a lower bound on
    ``pi_v`` at each Hamming weight, so it is checked at the unconstrained
    optimum.
    """
    pi_G = stationary_pagerank(G, cfg) if pi_G is None else pi_G
    del_res, coeffs, decomp = _deletion_general(G, v, cfg, tol, k_max)
    current = float(pi_G[v])
    best = max(current, del_res.best_pi)
    strategy = del_res.improving
    beta = 1.0 - cfg.alpha
    group_of = {g.component: i for i, g in enumerate(coeffs.groups)}
    for u in G.non_neighbors(v):
        j = decomp.component_of(u)
        C, U = decomp.components[j]
        Cs = sorted(C)
        qC = cfg.q[Cs]
        cp = ComponentPotentials(G, v, Cs, set(U) | {u}, cfg.alpha)
        gidx = group_of.get(C)
        members = sorted(U)
        for r in range(len(members) + 1):
            for Up in itertools.combinations(members, r):
                S = list(Up) + [u]
                phi = cp.phi(S)
                a0 = cfg.alpha * float(qC @ phi)
                b0 = len(S) - beta * sum(phi[cp.pos[w]] for w in S)
                A0 = cfg.alpha * float(cfg.q[v]) + a0
                sub = coeffs.without(gidx, A0, b0) if gidx is not None else coeffs.without(-1, A0, b0)
                c = len(S)
                Gp = G.with_edges(add=[(u, v)], remove=[(v, w) for w in members if w not in Up])
                zeta, eta = local_pagerank_coefficients(Gp, C, u, v, cfg)
                for l in range(sub.size + 1):
                    if l == 0:
                        ratio, other = A0 / b0, []
                    else:
                        found = maximize_fixed_weight(sub, l, current / (l + c))
                        if found is None:
                            continue
                        other, ratio = found
                    pi_v_new = (l + c) * ratio
                    if pi_v_new <= max(best, current + tol):
                        continue
                    pi_u_new = zeta + eta * pi_v_new / (l + c)
                    if pi_u_new <= pi_G[u] + tol:
                        continue
                    best = pi_v_new
                    strategy = Strategy(v, tuple(sorted(list(Up) + list(other))), (), u)
    return _finish(v, current, best, strategy, tol)


# whole-graph verification


def verify_nash(G: Graph, model: str, cfg: GameConfig, tol: float = TOL, k_max: int = K_MAX,
                short_circuit: bool = False) -> NashReport:
    model = normalize_model(model)
    if cfg.n != G.n:
        raise ValueError("q length does not match the graph")
    start = time.perf_counter()
    results = []
    if model == "request_delete":
        if not G.is_forest():
            raise ScopeError("request-delete verification is only available for trees and forests")
        check = best_response_request_delete_tree
    elif model == "deletion" and G.is_forest():
        check = best_response_deletion_tree
    else:
        info = k_parameter(G)
        if info.k > k_max:
            raise ScopeError(f"k(G) = {info.k} exceeds k_max = {k_max}")
        if model == "deletion":
            def check(G, v, cfg, tol):
                return best_response_deletion_general(G, v, cfg, tol, k_max)
        else:
            pi_G = stationary_pagerank(G, cfg)

            def check(G, v, cfg, tol):
                return best_response_add_delete(G, v, cfg, tol, k_max, pi_G)
    for v in range(G.n):
        res = check(G, v, cfg, tol)
        results.append(res)
        if short_circuit and not res.in_best_response:
            break
    elapsed = (time.perf_counter() - start) * 1000.0
    return NashReport(model, cfg.alpha, cfg.q, results, elapsed)


def alpha_insensitive_check(G: Graph, alpha_grid, q=None, model: str = "add_delete",
                            tol: float = TOL, k_max: int = K_MAX) -> dict:
    """Complete-graph test next to empirical add-delete verdicts on a grid."""
    if normalize_model(model) != "add_delete":
        raise ScopeError("alpha-insensitivity is characterised for the add-delete model")
    empirical = {}
    for alpha in alpha_grid:
        cfg = GameConfig(alpha, q) if q is not None else GameConfig.uniform(G.n, alpha)
        empirical[float(alpha)] = verify_nash(G, "add_delete", cfg, tol, k_max, short_circuit=True).verdict
    return {"structural": G.is_complete(), "empirical": empirical}


def symmetric_addition_gain(G: Graph, u: int, v: int, sigma, cfg: GameConfig) -> tuple[float, float]:
    """PageRank change of both endpoints when the swap-symmetric pair u, v is joined."""
    if G.has_edge(u, v) or u == v:
        raise GraphError("u and v must be distinct non-neighbours")
    if not check_swap_automorphism(G, sigma, u, v):
        raise GraphError("sigma is not an automorphism exchanging u and v")
    if not cfg.is_uniform():
        raise ValueError("the symmetric addition gain needs uniform q")
    before = stationary_pagerank(G, cfg)
    after = stationary_pagerank(G.with_edges(add=[(u, v)]), cfg)
    return float(after[u] - before[u]), float(after[v] - before[v])


# dynamics


@dataclass
class DynamicsStep:
    graph_hash: str
    mover: int
    delta_pi: float
    strategy: Strategy


@dataclass
class DynamicsTrace:
    steps: list[DynamicsStep]
    final: Graph
    reason: str

    @property
    def equilibrium(self) -> bool:
        return self.reason == "equilibrium"


def graph_hash(G: Graph) -> str:
    text = ";".join(f"{a},{b}" for a, b in G.edges())
    return hashlib.sha256(f"{G.n}|{text}".encode()).hexdigest()[:16]


def best_response_dynamics(G0: Graph, model: str, cfg: GameConfig, max_steps: int = 100,
                           tol: float = TOL, k_max: int = K_MAX) -> DynamicsTrace:
    """Let the lowest-id player out of best response move until nobody can.

    Stops at an equilibrium, after ``max_steps`` moves, or when a graph
    repeats.
    """
    model = normalize_model(model)
    if model == "request_delete":
        raise ScopeError("dynamics need undirected moves; request-delete creates one-way arcs")
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    G = G0
    seen = {graph_hash(G)}
    steps = []
    while True:
        report = verify_nash(G, model, cfg, tol, k_max, short_circuit=True)
        mover = report.first_improver()
        if mover is None:
            return DynamicsTrace(steps, G, "equilibrium")
        if len(steps) >= max_steps:
            return DynamicsTrace(steps, G, "max_steps")
        G = mover.improving.apply(G)
        h = graph_hash(G)
        steps.append(DynamicsStep(h, mover.vertex, mover.margin, mover.improving))
        if h in seen:
            return DynamicsTrace(steps, G, "cycle")
        seen.add(h)
