"""Exhaustive best-response search, evaluated by the direct stationary solver.

Every legal strategy is built as a modified graph and scored independently.
Nothing here shares code with the fast verifiers beyond the stationary solver.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .pagerank import GameConfig, stationary_pagerank
from .verifiers import TOL, BestResponseResult, NashReport, Strategy, normalize_model


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class EnumerationBudget:
    max_n: int = 10
    max_degree: int = 16
    max_total_strategies: int = 2 ** 20


def _subsets(items, nonempty: bool):
    items = list(items)
    for r in range(1 if nonempty else 0, len(items) + 1):
        yield from itertools.combinations(items, r)


def strategy_count(G: Graph, v: int, model: str) -> int:
    d = G.degree(v)
    others = len(G.non_neighbors(v))
    if model == "deletion":
        return 2 ** d - 1
    if model == "request_delete":
        return (2 ** d - 1) * 2 ** others
    return (2 ** d - 1) + others * 2 ** d


def enumerate_strategies(G: Graph, v: int, model: str):
    """Every legal strategy of ``v`` under ``model``, current one included."""
    model = normalize_model(model)
    nbrs = G.neighbors(v)
    if model == "deletion":
        for kept in _subsets(nbrs, True):
            yield Strategy(v, kept)
    elif model == "request_delete":
        for kept in _subsets(nbrs, True):
            for out in _subsets(G.non_neighbors(v), False):
                yield Strategy(v, kept, out)
    else:
        for kept in _subsets(nbrs, True):
            yield Strategy(v, kept)
        for u in G.non_neighbors(v):
            for kept in _subsets(nbrs, False):
                yield Strategy(v, kept, (), u)


def brute_force_best_response(G: Graph, v: int, model: str, cfg: GameConfig,
                              budget: EnumerationBudget = EnumerationBudget(), tol: float = TOL,
                              pi_G: np.ndarray | None = None) -> BestResponseResult:
    model = normalize_model(model)
    if G.n > budget.max_n or G.degree(v) > budget.max_degree:
        raise BudgetExceeded(f"graph too large for enumeration (n={G.n}, deg={G.degree(v)})")
    if strategy_count(G, v, model) > budget.max_total_strategies:
        raise BudgetExceeded("strategy count exceeds budget")
    pi_G = stationary_pagerank(G, cfg) if pi_G is None else pi_G
    current = float(pi_G[v])
    best, best_strategy = current, None
    for s in enumerate_strategies(G, v, model):
        pi = stationary_pagerank(s.view(G), cfg)
        if s.added_edge is not None and not pi[s.added_edge] > pi_G[s.added_edge] + tol:
            continue
        if pi[v] > best:
            best, best_strategy = float(pi[v]), s
    if best > current + tol:
        return BestResponseResult(v, False, current, best, best_strategy)
    return BestResponseResult(v, True, current, best, None)


def brute_force_verify(G: Graph, model: str, cfg: GameConfig, budget: EnumerationBudget = EnumerationBudget(),
                       tol: float = TOL) -> NashReport:
    model = normalize_model(model)
    start = time.perf_counter()
    pi_G = stationary_pagerank(G, cfg)
    results = [brute_force_best_response(G, v, model, cfg, budget, tol, pi_G) for v in range(G.n)]
    return NashReport(model, cfg.alpha, cfg.q, results, (time.perf_counter() - start) * 1000.0)
