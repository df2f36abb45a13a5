"""Fractional 0/1 maximisation used by the best-response verifiers.

Two solvers live here. The first is a level walk through the arrangement of
lines ``c_i(delta) = a_i - b_i * delta`` for separable ratios (trees). The
second is a subset-coefficient expansion with a grouped knapsack for general
graphs, where each component of ``G - v`` contributes one group of choices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .graph import Graph, RemovalDecomposition
from .pagerank import ComponentPotentials, GameConfig

TIE_RTOL = 1e-12


def _beats(val: float, best: float) -> bool:
    if best == -np.inf:
        return val > best
    return val > best + TIE_RTOL * max(1.0, abs(best))


@dataclass(frozen=True)
class LinearFractionalProgram:
    """``(A0 + a.x) / (B0 + b.x)`` over 0/1 vectors ``x``.

    ``B0 + b.x`` must be positive for every feasible ``x``; individual
    ``b_i`` may be negative (request-delete programs produce such entries).
    """

    a: np.ndarray
    b: np.ndarray
    A0: float = 0.0
    B0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        if self.a.shape != self.b.shape or self.a.ndim != 1:
            raise ValueError("a and b must be vectors of equal length")

    @property
    def dim(self) -> int:
        return len(self.a)

    def ratio(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float((self.A0 + self.a @ x) / (self.B0 + self.b @ x))


class _Arrangement:
    """Crossing events of the lines ``a_i - b_i * delta`` for delta > 0."""

    def __init__(self, a: np.ndarray, b: np.ndarray):
        self.a, self.b = a, b
        d = len(a)
        events: dict[float, set[int]] = {}
        for i, j in itertools.combinations(range(d), 2):
            db = b[i] - b[j]
            if db == 0.0:
                continue
            delta = (a[i] - a[j]) / db
            if delta > 0.0 and np.isfinite(delta):
                events.setdefault(delta, set()).update((i, j))
        self.deltas = sorted(events)
        self.lines = [events[x] for x in self.deltas]
        self.start = sorted(range(d), key=lambda i: (-a[i], b[i], i))

    def walk(self, l: int, A0: float, B0: float) -> tuple[list[int], float]:
        a, b = self.a, self.b
        order = list(self.start)
        pos = {x: k for k, x in enumerate(order)}
        A = float(sum(a[i] for i in order[:l]))
        B = float(sum(b[i] for i in order[:l]))
        for k, delta in enumerate(self.deltas):
            involved = self.lines[k]
            lo = min(pos[i] for i in involved)
            hi = max(pos[i] for i in involved)
            if k + 1 < len(self.deltas):
                mid = 0.5 * (delta + self.deltas[k + 1])
            else:
                mid = delta + max(1.0, abs(delta))
            span = sorted(order[lo:hi + 1], key=lambda i: (-(a[i] - b[i] * mid), b[i], i))
            if lo < l <= hi:
                old_in = set(order[lo:l])
                new_in = set(span[:l - lo])
                if old_in != new_in:
                    if (A0 + A) - (B0 + B) * delta <= 0.0:
                        break
                    A += sum(a[i] for i in new_in - old_in) - sum(a[i] for i in old_in - new_in)
                    B += sum(b[i] for i in new_in - old_in) - sum(b[i] for i in old_in - new_in)
            order[lo:hi + 1] = span
            for off, i in enumerate(span):
                pos[i] = lo + off
        chosen = sorted(order[:l])
        return chosen, (A0 + A) / (B0 + B)


def _smallest_tied_support(p: LinearFractionalProgram, l: int, chosen: list[int], value: float) -> list[int]:
    """Among l-subsets optimal at ``value``, prefer the lexicographically smallest."""
    c = p.a - p.b * value
    scale = TIE_RTOL * (1.0 + float(np.max(np.abs(c))))
    thr = np.sort(c)[::-1][l - 1]
    sure = [i for i in range(p.dim) if c[i] > thr + scale]
    tied = [i for i in range(p.dim) if abs(c[i] - thr) <= scale]
    cand = sorted(sure + tied[: l - len(sure)])
    if len(cand) != l:
        return chosen
    x = np.zeros(p.dim)
    x[cand] = 1
    if p.ratio(x) >= value - TIE_RTOL * max(1.0, abs(value)):
        return cand
    return chosen


def layer_walk_max(p: LinearFractionalProgram, l: int, _arr: _Arrangement | None = None) -> tuple[np.ndarray, float]:
    """Maximise the ratio over 0/1 vectors of Hamming weight ``l``.

    Walks the l-th level of the line arrangement from delta = 0 to the right,
    stopping where the current top-l set's line ``A0 + A - (B0 + B) delta``
    goes negative before the level changes again. Returns ``(x, delta*)``.
    """
    if not 1 <= l <= p.dim:
        raise ValueError(f"weight {l} outside 1..{p.dim}")
    arr = _arr or _Arrangement(p.a, p.b)
    chosen, value = arr.walk(l, p.A0, p.B0)
    chosen = _smallest_tied_support(p, l, chosen, value)
    x = np.zeros(p.dim, dtype=np.int8)
    x[chosen] = 1
    return x, p.ratio(x)


def fractional_max(p: LinearFractionalProgram, weight_offset: int = 0) -> tuple[np.ndarray, float]:
    """Maximise ``(|x| + weight_offset) * ratio(x)`` over nonzero 0/1 ``x``.

    Ties go to the smaller Hamming weight.
    """
    if p.dim < 1:
        raise ValueError("program has no variables")
    arr = _Arrangement(p.a, p.b)
    best_x, best = None, -np.inf
    for l in range(1, p.dim + 1):
        x, ratio = layer_walk_max(p, l, arr)
        val = (l + weight_offset) * ratio
        if _beats(val, best):
            best_x, best = x, val
    return best_x, best


# general graphs: subset coefficients and grouped knapsack


def popcounts(k: int) -> np.ndarray:
    return np.array([bin(m).count("1") for m in range(1 << k)], dtype=int)


def mobius(f: np.ndarray) -> np.ndarray:
    """Inverse of the subset-sum transform over bitmask-indexed arrays."""
    g = np.array(f, dtype=float)
    k = int(len(g)).bit_length() - 1
    for j in range(k):
        view = g.reshape(-1, 2, 1 << j)
        view[:, 1, :] -= view[:, 0, :]
    return g


def zeta(f: np.ndarray) -> np.ndarray:
    """``g[S] = sum over T subset of S of f[T]``."""
    g = np.array(f, dtype=float)
    k = int(len(g)).bit_length() - 1
    for j in range(k):
        view = g.reshape(-1, 2, 1 << j)
        view[:, 1, :] += view[:, 0, :]
    return g


@dataclass(frozen=True)
class CoefficientGroup:
    """Coefficients for one component; bit j of a mask selects ``members[j]``."""

    component: frozenset
    members: tuple[int, ...]
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    za: np.ndarray = field(init=False, repr=False)
    zb: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "za", zeta(self.a))
        object.__setattr__(self, "zb", zeta(self.b))

    def mask_of(self, subset) -> int:
        subset = set(subset)
        return sum(1 << j for j, u in enumerate(self.members) if u in subset)

    def subset_of(self, mask: int) -> tuple[int, ...]:
        return tuple(u for j, u in enumerate(self.members) if mask >> j & 1)


@dataclass(frozen=True)
class SubsetCoefficients:
    """``(A0 + sum_i sum_S a_S x^S) / (B0 + sum_i sum_S b_S x^S)``."""

    groups: tuple[CoefficientGroup, ...]
    A0: float
    B0: float = 0.0

    @property
    def size(self) -> int:
        return sum(len(g.members) for g in self.groups)

    def numerator_denominator(self, kept) -> tuple[float, float]:
        kept = set(kept)
        A, B = self.A0, self.B0
        for g in self.groups:
            m = g.mask_of(kept)
            A += float(g.za[m])
            B += float(g.zb[m])
        return A, B

    def without(self, idx: int, A0: float, B0: float) -> "SubsetCoefficients":
        groups = tuple(g for i, g in enumerate(self.groups) if i != idx)
        return replace(self, groups=groups, A0=A0, B0=B0)


def component_subset_sums(G: Graph, v: int, C, U, cfg: GameConfig, solver: str = "woodbury"):
    """Per subset S of U: ``sum_{w in C} q_w phi^S_w`` and the denominator share.

    The denominator share of S is ``|S| - (1-alpha) sum_{u in S} phi^S_u``.
    Both are returned as bitmask-indexed arrays over ``members = sorted(U)``.
    """
    members = tuple(sorted(U))
    Cs = sorted(C)
    beta = 1.0 - cfg.alpha
    k = len(members)
    qsum = np.zeros(1 << k)
    dsum = np.zeros(1 << k)
    qC = cfg.q[Cs]
    if solver == "woodbury":
        cp = ComponentPotentials(G, v, Cs, members, cfg.alpha)
        pos = cp.pos
        phi_of = cp.phi
    elif solver == "scratch":
        from .pagerank import subset_potentials

        pos = {w: i for i, w in enumerate(Cs)}

        def phi_of(S):
            return subset_potentials(G, v, Cs, members, S, cfg.alpha)[Cs]
    else:
        raise ValueError(f"unknown solver {solver!r}")
    for mask in range(1, 1 << k):
        S = [u for j, u in enumerate(members) if mask >> j & 1]
        phi = phi_of(S)
        qsum[mask] = float(qC @ phi)
        dsum[mask] = len(S) - beta * sum(phi[pos[u]] for u in S)
    return members, qsum, dsum


def subset_coefficients(G: Graph, v: int, decomposition: RemovalDecomposition, cfg: GameConfig,
                        solver: str = "woodbury") -> SubsetCoefficients:
    """Inclusion-exclusion coefficients ``a_S``, ``b_S`` for every component.

    ``a_S`` is ``alpha`` times the Moebius transform of the q-weighted
    potential mass of ``C_i``. ``b_S`` is the transform of the denominator
    share, in which ``u`` contributes ``phi^T_u`` only for ``T`` containing
    ``u``, because a deleted edge contributes nothing to v's return sum.
    """
    groups = []
    for C, U in decomposition.components:
        if not U:
            continue
        members, qsum, dsum = component_subset_sums(G, v, C, U, cfg, solver)
        groups.append(CoefficientGroup(C, members, cfg.alpha * mobius(qsum), mobius(dsum)))
    return SubsetCoefficients(tuple(groups), cfg.alpha * float(cfg.q[v]))


@dataclass(frozen=True)
class GroupValueTable:
    """``values[i][t]`` = best subset-sum of c over size-t subsets of group i."""

    values: tuple[np.ndarray, ...]
    witnesses: tuple[np.ndarray, ...]


def group_value_table(coeffs: SubsetCoefficients, delta: float) -> GroupValueTable:
    values, witnesses = [], []
    for g in coeffs.groups:
        k = len(g.members)
        sums = zeta(g.a - g.b * delta)
        pc = popcounts(k)
        e = np.full(k + 1, -np.inf)
        wit = np.zeros(k + 1, dtype=int)
        for mask in range(1 << k):
            t = pc[mask]
            if sums[mask] > e[t]:
                e[t] = sums[mask]
                wit[t] = mask
        e[0] = 0.0
        values.append(e)
        witnesses.append(wit)
    return GroupValueTable(tuple(values), tuple(witnesses))


def knapsack_argmax(table: GroupValueTable, l: int) -> tuple[list[int], float]:
    """Pick one size per group, sizes summing to ``l``, maximising total value.

    Returns the chosen witness mask per group and the total.
    """
    total = sum(len(e) - 1 for e in table.values)
    if not 0 <= l <= total:
        raise ValueError(f"weight {l} infeasible (groups hold {total})")
    w = np.full(l + 1, -np.inf)
    w[0] = 0.0
    choice = []
    for e in table.values:
        nw = np.full(l + 1, -np.inf)
        pick = np.zeros(l + 1, dtype=int)
        for t in range(l + 1):
            for s in range(min(len(e) - 1, t) + 1):
                cand = w[t - s] + e[s]
                if cand > nw[t]:
                    nw[t] = cand
                    pick[t] = s
        w = nw
        choice.append(pick)
    if not np.isfinite(w[l]):
        raise ValueError(f"weight {l} infeasible")
    masks = [0] * len(table.values)
    t = l
    for i in range(len(table.values) - 1, -1, -1):
        s = int(choice[i][t])
        masks[i] = int(table.witnesses[i][s]) if s else 0
        t -= s
    return masks, float(w[l])


def h_value(coeffs: SubsetCoefficients, l: int, delta: float) -> tuple[float, list[int]]:
    masks, val = knapsack_argmax(group_value_table(coeffs, delta), l)
    return coeffs.A0 - delta * coeffs.B0 + val, masks


def masks_to_kept(coeffs: SubsetCoefficients, masks: Sequence[int]) -> list[int]:
    kept = []
    for g, m in zip(coeffs.groups, masks):
        kept.extend(g.subset_of(m))
    return sorted(kept)


def improvement_test(coeffs: SubsetCoefficients, l: int, delta_prime: float,
                     tol: float = 1e-12) -> tuple[bool, list[int] | None]:
    """Is there a weight-``l`` assignment with ratio above ``delta_prime``?

    Decided by the sign of the linearised optimum ``h(delta_prime)``.
    """
    h, masks = h_value(coeffs, l, delta_prime)
    if h > tol:
        return True, masks_to_kept(coeffs, masks)
    return False, None


def maximize_fixed_weight(coeffs: SubsetCoefficients, l: int, start: float,
                          max_iter: int = 200) -> tuple[list[int], float] | None:
    """Best weight-``l`` assignment if its ratio exceeds ``start``, else None.

    Dinkelbach iteration ``delta <- A(x)/B(x)`` on the knapsack oracle.
    """
    delta = start
    best = None
    for _ in range(max_iter):
        h, masks = h_value(coeffs, l, delta)
        if h <= 1e-14 * max(1.0, abs(coeffs.A0) + 1.0):
            break
        kept = masks_to_kept(coeffs, masks)
        A, B = coeffs.numerator_denominator(kept)
        ratio = A / B
        if ratio <= delta:
            break
        best, delta = (kept, ratio), ratio
    return best


# brute-force references, used by tests and the oracle-check command


def enumerate_fractional_max(p: LinearFractionalProgram, l: int | None = None, weight_offset: int = 0):
    """Exhaustive max of ``(|x| + offset) * ratio`` (or of the ratio at weight l)."""
    best_x, best = None, -np.inf
    for bits in itertools.product((0, 1), repeat=p.dim):
        w = sum(bits)
        if w == 0 or (l is not None and w != l):
            continue
        r = p.ratio(bits)
        val = r if l is not None else (w + weight_offset) * r
        if _beats(val, best):
            best_x, best = np.array(bits, dtype=np.int8), val
    return best_x, best
