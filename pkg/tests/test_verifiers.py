import itertools
import random

import numpy as np
import pytest

from pagerank_games.graph import Graph, GraphError, block_chain, components_after_removal, generate, random_tree
from pagerank_games.oracle import brute_force_best_response
from pagerank_games.pagerank import GameConfig, stationary_pagerank, strategy_view
from pagerank_games.verifiers import (
    MODELS,
    ScopeError,
    Strategy,
    alpha_insensitive_check,
    best_response_add_delete,
    best_response_deletion_general,
    best_response_deletion_tree,
    best_response_dynamics,
    best_response_request_delete_tree,
    deletion_tree_program,
    local_pagerank_coefficients,
    normalize_model,
    request_delete_coefficients,
    symmetric_addition_gain,
    verify_nash,
)

from conftest import random_connected, random_q, random_trees


def test_normalize_model():
    assert normalize_model("add-delete") == "add_delete"
    with pytest.raises(ScopeError):
        normalize_model("swap")


@pytest.mark.parametrize("model", MODELS)
def test_k2_is_equilibrium_for_every_model(model):
    assert verify_nash(generate("complete", 2), model, GameConfig.uniform(2)).verdict


def test_leaf_is_in_best_response():
    T = random_tree(12, random.Random(1))
    cfg = GameConfig.uniform(T.n)
    for v in range(T.n):
        if T.degree(v) == 1:
            assert best_response_deletion_tree(T, v, cfg).in_best_response


def test_tree_deletion_matches_oracle():
    rng = random.Random(2)
    for T in random_trees(40, 2, 10, seed=2):
        cfg = GameConfig(0.15, random_q(T.n, rng))
        pi = stationary_pagerank(T, cfg)
        for v in range(T.n):
            fast = best_response_deletion_tree(T, v, cfg)
            slow = brute_force_best_response(T, v, "deletion", cfg, pi_G=pi)
            assert fast.in_best_response == slow.in_best_response
            assert fast.best_pi == pytest.approx(slow.best_pi, abs=1e-7)
            assert fast.current_pi == pytest.approx(pi[v], abs=1e-10)


def test_general_matches_tree_on_trees():
    rng = random.Random(3)
    for T in random_trees(30, 2, 10, seed=3):
        cfg = GameConfig(0.15, random_q(T.n, rng))
        for v in range(T.n):
            a = best_response_deletion_tree(T, v, cfg)
            b = best_response_deletion_general(T, v, cfg)
            assert a.in_best_response == b.in_best_response
            assert a.best_pi == pytest.approx(b.best_pi, abs=1e-9)


def test_k4_deletion_equilibrium():
    assert verify_nash(generate("complete", 4), "deletion", GameConfig.uniform(4)).verdict


def test_general_deletion_matches_oracle():
    rng = random.Random(4)
    for _ in range(40):
        G = random_connected(rng, 2, 7, k_max=4)
        cfg = GameConfig(rng.choice([0.05, 0.15, 0.4]), random_q(G.n, rng))
        pi = stationary_pagerank(G, cfg)
        for v in range(G.n):
            fast = best_response_deletion_general(G, v, cfg)
            slow = brute_force_best_response(G, v, "deletion", cfg, pi_G=pi)
            assert fast.in_best_response == slow.in_best_response
            assert fast.best_pi == pytest.approx(slow.best_pi, abs=1e-7)


def test_k_guard():
    with pytest.raises(ScopeError, match="k_max"):
        verify_nash(generate("complete", 6), "deletion", GameConfig.uniform(6), k_max=3)


def test_request_delete_zero_outlinks_is_deletion_program():
    T = random_tree(9, random.Random(5))
    cfg = GameConfig.uniform(T.n)
    for v in range(T.n):
        if T.degree(v) == 0:
            continue
        p, yhat = request_delete_coefficients(T, v, cfg, 0)
        q = deletion_tree_program(T, v, cfg)[0]
        assert yhat == () and p.B0 == 0
        assert np.allclose(p.a, q.a) and np.allclose(p.b, q.b) and p.A0 == q.A0


def test_request_delete_prefers_nearer_vertex():
    P4 = generate("path", 4)
    _, yhat = request_delete_coefficients(P4, 0, GameConfig.uniform(4), 1)
    assert yhat == (2,)


def test_request_delete_program_matches_stationary():
    rng = random.Random(6)
    for T in random_trees(25, 3, 9, seed=6):
        cfg = GameConfig(0.15, random_q(T.n, rng))
        v = rng.randrange(T.n)
        nbrs = list(T.neighbors(v))
        if not nbrs:
            continue
        n_out = T.n - 1 - len(nbrs)
        for l2 in range(n_out + 1):
            p, yhat = request_delete_coefficients(T, v, cfg, l2)
            for bits in itertools.product((0, 1), repeat=len(nbrs)):
                if not any(bits):
                    continue
                kept = [w for w, b in zip(nbrs, bits) if b]
                pi = stationary_pagerank(strategy_view(T, v, kept=kept, outlinks=yhat), cfg)
                assert (sum(bits) + l2) * p.ratio(bits) == pytest.approx(pi[v], abs=1e-9)


def test_request_delete_matches_oracle():
    rng = random.Random(7)
    for T in random_trees(30, 2, 8, seed=7):
        cfg = GameConfig(0.15, random_q(T.n, rng))
        pi = stationary_pagerank(T, cfg)
        for v in range(T.n):
            fast = best_response_request_delete_tree(T, v, cfg)
            slow = brute_force_best_response(T, v, "request_delete", cfg, pi_G=pi)
            assert fast.in_best_response == slow.in_best_response
            assert fast.best_pi == pytest.approx(slow.best_pi, abs=1e-7)


def test_request_delete_needs_forest():
    with pytest.raises(ScopeError):
        verify_nash(generate("cycle", 4), "request_delete", GameConfig.uniform(4))


def test_local_coefficients_reproduce_stationary():
    # v = 1 separates {0} from {2, 3} in P4; check u = 3 under three alphas
    P4 = generate("path", 4)
    C = components_after_removal(P4, 1).components[1][0]
    for alpha in (0.05, 0.15, 0.6):
        cfg = GameConfig(alpha, [0.1, 0.2, 0.3, 0.4])
        zeta, eta = local_pagerank_coefficients(P4, C, 3, 1, cfg)
        pi = stationary_pagerank(P4, cfg)
        assert zeta + eta * pi[1] / P4.degree(1) == pytest.approx(pi[3], abs=1e-9)
        assert eta > 0


def test_local_coefficients_zero_source():
    P4 = generate("path", 4)
    C = components_after_removal(P4, 1).components[1][0]
    zeta, eta = local_pagerank_coefficients(P4, C, 3, 1, GameConfig(0.15, [0.5, 0.5, 0.0, 0.0]))
    assert zeta == 0.0 and eta > 0
    with pytest.raises(GraphError):
        local_pagerank_coefficients(P4, C, 0, 1, GameConfig.uniform(4))


@pytest.mark.parametrize("n", [3, 5, 6])
def test_complete_graph_add_delete_equilibrium(n):
    assert verify_nash(generate("complete", n), "add_delete", GameConfig.uniform(n)).verdict


def test_p3_small_alpha_addition():
    P3 = generate("path", 3)
    report = verify_nash(P3, "add_delete", GameConfig.uniform(3, 1e-3))
    assert not report.verdict
    for end, other in ((0, 2), (2, 0)):
        res = report.results[end]
        assert not res.in_best_response and res.improving.added_edge == other
    assert report.results[1].in_best_response


def test_add_delete_matches_oracle():
    rng = random.Random(8)
    for _ in range(30):
        G = random_connected(rng, 2, 7, k_max=3)
        cfg = GameConfig(rng.choice([0.01, 0.15]), random_q(G.n, rng))
        pi = stationary_pagerank(G, cfg)
        for v in range(G.n):
            fast = best_response_add_delete(G, v, cfg, pi_G=pi)
            slow = brute_force_best_response(G, v, "add_delete", cfg, pi_G=pi)
            assert fast.in_best_response == slow.in_best_response
            assert fast.best_pi == pytest.approx(slow.best_pi, abs=1e-7)


def _replay(G, strategy, cfg):
    return stationary_pagerank(strategy.view(G), cfg)


def test_witnesses_replay_above_current():
    rng = random.Random(9)
    checked = 0
    for _ in range(30):
        G = random_connected(rng, 3, 7, k_max=3)
        cfg = GameConfig(0.05, random_q(G.n, rng))
        for model in ("deletion", "add_delete"):
            for r in verify_nash(G, model, cfg).results:
                if r.improving is None:
                    assert r.best_pi <= r.current_pi + 1e-9
                    continue
                pi = _replay(G, r.improving, cfg)
                assert pi[r.vertex] > r.current_pi + 1e-9
                assert pi[r.vertex] >= r.best_pi - 1e-9
                checked += 1
    assert checked > 10


def test_deletion_failure_implies_add_delete_failure():
    rng = random.Random(10)
    for _ in range(30):
        G = random_connected(rng, 3, 7, k_max=3)
        cfg = GameConfig(0.15, random_q(G.n, rng))
        if not verify_nash(G, "deletion", cfg).verdict:
            assert not verify_nash(G, "add_delete", cfg).verdict


def test_alpha_insensitive_check():
    k6 = alpha_insensitive_check(generate("complete", 6), [0.01, 0.15, 0.5, 0.9])
    assert k6["structural"] and all(k6["empirical"].values())
    c5 = alpha_insensitive_check(generate("cycle", 5), [0.01, 0.9])
    assert not c5["structural"] and c5["empirical"][0.01] is False
    assert isinstance(c5["empirical"][0.9], bool)


@pytest.mark.parametrize("n", [4, 6])
def test_symmetric_gain_cycle(n):
    G = generate("cycle", n)
    u, v = 0, n // 2
    sigma = [(u + v - i) % n for i in range(n)]
    du, dv = symmetric_addition_gain(G, u, v, sigma, GameConfig.uniform(n))
    assert du > 0 and dv > 0 and du == pytest.approx(dv, abs=1e-12)


def test_symmetric_gain_disconnected_triangles():
    G = Graph(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    du, dv = symmetric_addition_gain(G, 0, 3, [3, 4, 5, 0, 1, 2], GameConfig.uniform(6))
    assert du > 0 and du == pytest.approx(dv, abs=1e-12)


def test_symmetric_gain_isolated_pair_is_zero():
    # two isolated vertices: each keeps 1/n before and after joining them
    G = Graph(4, [(1, 3)])
    du, dv = symmetric_addition_gain(G, 0, 2, [2, 3, 0, 1], GameConfig.uniform(4))
    assert du == pytest.approx(0.0, abs=1e-15) and dv == pytest.approx(0.0, abs=1e-15)


def test_symmetric_gain_errors():
    G = generate("cycle", 4)
    with pytest.raises(GraphError):
        symmetric_addition_gain(G, 0, 2, [0, 1, 2, 3], GameConfig.uniform(4))
    with pytest.raises(ValueError):
        symmetric_addition_gain(G, 0, 2, [2, 1, 0, 3], GameConfig(0.15, [0.1, 0.2, 0.3, 0.4]))


def test_symmetry_of_pagerank():
    G = generate("cycle", 6)
    pi = stationary_pagerank(G, GameConfig.uniform(6))
    assert pi[0] == pytest.approx(pi[3], abs=1e-14)


def test_dynamics_complete_start():
    trace = best_response_dynamics(generate("complete", 4), "add_delete", GameConfig.uniform(4))
    assert trace.equilibrium and not trace.steps


def test_dynamics_p3_reaches_triangle():
    cfg = GameConfig.uniform(3, 1e-3)
    trace = best_response_dynamics(generate("path", 3), "add_delete", cfg)
    assert trace.equilibrium and trace.final.is_complete()
    assert all(s.delta_pi > 1e-9 for s in trace.steps)


def test_dynamics_steps_improve_movers():
    rng = random.Random(11)
    for _ in range(5):
        G = random_connected(rng, 4, 7, k_max=3)
        cfg = GameConfig.uniform(G.n, 0.1)
        trace = best_response_dynamics(G, "add_delete", cfg, max_steps=10)
        H = G
        for s in trace.steps:
            before = stationary_pagerank(H, cfg)[s.mover]
            H = s.strategy.apply(H)
            assert stationary_pagerank(H, cfg)[s.mover] > before + 1e-9
        assert H == trace.final


def test_dynamics_rejects_request_delete():
    with pytest.raises(ScopeError):
        best_response_dynamics(generate("path", 3), "request_delete", GameConfig.uniform(3))


def test_strategy_apply_refuses_outlinks():
    with pytest.raises(ScopeError):
        Strategy(0, (1,), (2,)).apply(generate("path", 3))


def test_block_chain_runs():
    G = block_chain(4, 5, 1)
    report = verify_nash(G, "deletion", GameConfig.uniform(G.n))
    assert len(report.results) == G.n
