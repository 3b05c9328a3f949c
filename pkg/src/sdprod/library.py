"""Builders for the classic program families and their brute-force oracles.

Families covered:

* Lovasz theta of a graph (affine, PSD objective).
* gamma_2^infty of a sign matrix, the SDP quantity behind the
  discrepancy bound in communication complexity (bipartite with a
  positive span witness, namely the all-ones vector).
* A two-dimensional program that is bipartite but whose objective lies
  outside the positive span of its nonnegativity matrices; its value is
  0 while its self-product has value 1, so it separates the rules.
* Two-prover one-round games: the exact value omega(G) by strategy
  enumeration, the Feige-Lovasz SDP relaxation sigma(G), and the further
  relaxation (block constraints turned into sign-pattern rows) that does
  product perfectly.

Constraint row conventions: every stored matrix is symmetric.  A row the
family lists for both index orders is merged into one row by summing
(E_ij + E_ji); a row listed once is symmetrized value-preservingly as
(E_ij + E_ji) / 2.  Both keep the constraint set unchanged on symmetric
X, and the merge convention keeps the documented span witnesses exact
(all-ones for gamma_2^infty, the entries of the payoff matrix for the
relaxed game program).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import linalg
from .model import LinearConstraint, Relation, SdpProgram

__all__ = [
    "Graph",
    "SignMatrix",
    "Game",
    "theta_program",
    "gamma2inf_program",
    "counterexample_program",
    "independence_number",
    "game_value",
    "game_product",
    "xor_game",
    "always_accept_game",
    "fl_sigma_program",
    "fl_sigma_bar_prime_program",
]


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1."""

    n: int
    edges: frozenset[tuple[int, int]]

    @staticmethod
    def from_edges(n: int, edges) -> "Graph":
        norm = set()
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            norm.add((min(i, j), max(i, j)))
        return Graph(n=n, edges=frozenset(norm))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    @staticmethod
    def cycle(n: int) -> "Graph":
        return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @staticmethod
    def complete(n: int) -> "Graph":
        return Graph.from_edges(n, itertools.combinations(range(n), 2))

    @staticmethod
    def empty(n: int) -> "Graph":
        return Graph.from_edges(n, [])


@dataclass(frozen=True)
class SignMatrix:
    """Rectangular matrix with entries exactly +-1."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2:
            raise ValueError("sign matrix must be 2-d")
        if not np.all(np.abs(m) == 1.0):
            raise ValueError("sign matrix entries must be exactly +1 or -1")
        object.__setattr__(self, "entries", m)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def _pair_sum(n: int, i: int, j: int, value: float = 1.0) -> np.ndarray:
    """value * (E_ij + E_ji), the merged symmetric row for an index pair."""
    m = np.zeros((n, n))
    m[i, j] += value
    m[j, i] += value
    return m


def _entry_mask(n: int, i: int, j: int) -> np.ndarray:
    """Symmetric mask whose Frobenius pairing with symmetric X is X_ij."""
    m = np.zeros((n, n))
    if i == j:
        m[i, i] = 1.0
    else:
        m[i, j] = 0.5
        m[j, i] = 0.5
    return m


# ---------------------------------------------------------------------------
# Lovasz theta.
# ---------------------------------------------------------------------------


def theta_program(graph: Graph) -> SdpProgram:
    """maximize 1 . X  s.t.  Tr X = 1,  X_ij = 0 on edges,  X psd.

    The optimal value is the Lovasz theta number, an upper bound on the
    independence number that multiplies under the program product.
    """
    n = graph.n
    constraints = [LinearConstraint(np.eye(n), 1.0, Relation.EQ)]
    for i, j in graph.sorted_edges():
        constraints.append(LinearConstraint(_pair_sum(n, i, j), 0.0, Relation.EQ))
    return SdpProgram(
        dim=n,
        objective=np.ones((n, n)),
        constraints=tuple(constraints),
        name=f"theta(n={n}, m={len(graph.edges)})",
    )


def independence_number(graph: Graph) -> int:
    """Exact independence number by subset enumeration (n <= ~20)."""
    if graph.n > 24:
        raise ValueError("independence_number enumerates 2^n subsets; n too large")
    neighbor = [0] * graph.n
    for i, j in graph.edges:
        neighbor[i] |= 1 << j
        neighbor[j] |= 1 << i
    best = 0
    for mask in range(1 << graph.n):
        size = mask.bit_count()
        if size <= best:
            continue
        ok = True
        rest = mask
        while rest:
            v = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            if neighbor[v] & mask:
                ok = False
                break
        if ok:
            best = size
    return best


# ---------------------------------------------------------------------------
# gamma_2^infty of a sign matrix.
# ---------------------------------------------------------------------------


def gamma2inf_program(sign: SignMatrix) -> SdpProgram:
    """The SDP behind the discrepancy bound for a sign matrix M.

    With Mh the bipartite version of M on r + c indices:

        maximize   Mh . X
        such that  Tr X = 1
                   X_ij = 0 for same-block pairs i != j
                   Mh_ij * X_ij >= 0 for cross-block pairs
                   X psd.

    Same-block rows are merged per unordered pair; the cross-block rows
    (listed by the family in both orders) are merged by summing, i.e.
    the stored mask is Mh_ij (E_ij + E_ji), which makes the all-ones
    vector an exact span witness for the objective.
    """
    r, c = sign.shape
    n = r + c
    mh = linalg.hat(sign.entries)
    constraints = [LinearConstraint(np.eye(n), 1.0, Relation.EQ)]
    for a, b in itertools.chain(
        itertools.combinations(range(r), 2),
        itertools.combinations(range(r, n), 2),
    ):
        constraints.append(LinearConstraint(_pair_sum(n, a, b), 0.0, Relation.EQ))
    nonneg = []
    for i in range(r):
        for j in range(r, n):
            nonneg.append(_pair_sum(n, i, j, value=mh[i, j]))
    return SdpProgram(
        dim=n,
        objective=mh,
        constraints=tuple(constraints),
        nonneg=tuple(nonneg),
        name=f"gamma2inf({r}x{c})",
    )


# ---------------------------------------------------------------------------
# The bipartite-but-no-span program.
# ---------------------------------------------------------------------------


def counterexample_program() -> SdpProgram:
    """Two-dimensional program with value 0 whose self-product has value 1.

    J = [[0, -1], [-1, 0]], Tr X = 1, and two one-sided nonnegativity
    rows on the off-diagonal entry (stored symmetrized).  It satisfies
    the bipartiteness condition, but -J is not a nonnegative combination
    of the nonnegativity matrices, and indeed squaring flips every
    objective sign to +1.
    """
    j = np.array([[0.0, -1.0], [-1.0, 0.0]])
    mask = np.array([[0.0, 0.5], [0.5, 0.0]])
    return SdpProgram(
        dim=2,
        objective=j,
        constraints=(LinearConstraint(np.eye(2), 1.0, Relation.EQ),),
        nonneg=(mask, mask.copy()),
        name="span-counterexample",
    )


# ---------------------------------------------------------------------------
# Two-prover one-round games.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Game:
    """A two-prover one-round game.

    The verifier samples a question pair (s, t) from the distribution p,
    sends s to the first prover and t to the second, receives answers
    (u, w), and accepts iff v[s, t, u, w] == 1.  Question and answer
    alphabets are index ranges; p has shape (|S|, |T|) and v has shape
    (|S|, |T|, |U|, |W|) with 0/1 entries.
    """

    p: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if p.ndim != 2 or v.ndim != 4:
            raise ValueError("p must be 2-d and v must be 4-d")
        if v.shape[:2] != p.shape:
            raise ValueError(f"question shapes differ: {p.shape} vs {v.shape[:2]}")
        if np.any(p < 0) or abs(float(p.sum()) - 1.0) > 1e-12:
            raise ValueError("p must be a probability distribution")
        if not np.all((v == 0.0) | (v == 1.0)):
            raise ValueError("v entries must be 0 or 1")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "v", v)

    @property
    def sizes(self) -> tuple[int, int, int, int]:
        ns, nt = self.p.shape
        nu, nw = self.v.shape[2:]
        return ns, nt, nu, nw


def xor_game() -> Game:
    """Uniform questions over {0,1}^2; accept iff u xor w == s and t."""
    p = np.full((2, 2), 0.25)
    v = np.zeros((2, 2, 2, 2))
    for s, t, u, w in itertools.product(range(2), repeat=4):
        v[s, t, u, w] = 1.0 if (u ^ w) == (s & t) else 0.0
    return Game(p=p, v=v)


def always_accept_game() -> Game:
    return Game(p=np.ones((1, 1)), v=np.ones((1, 1, 1, 1)))


def game_value(game: Game) -> float:
    """Exact optimal acceptance probability over deterministic strategies.

    The first prover's strategy is enumerated; for each, the second
    prover's best reply decomposes per question, so the cost is
    |U|^|S| * (|S| |T| |W|) rather than the full product of both
    strategy spaces.
    """
    ns, nt, nu, nw = game.sizes
    if nu**ns * nw**nt > 10**7:
        raise ValueError("strategy space too large for enumeration")
    best = 0.0
    weighted = game.p[:, :, None, None] * game.v  # (s, t, u, w)
    for assignment in itertools.product(range(nu), repeat=ns):
        # score[t, w] = sum_s p(s, t) v(s, t, a(s), w)
        score = np.zeros((nt, nw))
        for s, u in enumerate(assignment):
            score += weighted[s, :, u, :]
        best = max(best, float(np.sum(np.max(score, axis=1))))
    return best


def game_product(g1: Game, g2: Game) -> Game:
    """Play both games in parallel: question/answer pairs, both checks."""
    p = np.kron(g1.p, g2.p)
    n1 = g1.sizes
    n2 = g2.sizes
    v = np.einsum("stuw,STUW->sStTuUwW", g1.v, g2.v).reshape(
        n1[0] * n2[0], n1[1] * n2[1], n1[2] * n2[2], n1[3] * n2[3]
    )
    return Game(p=p, v=v)


def _payoff_matrix(game: Game) -> np.ndarray:
    """C[(s,u),(t,w)] = p(s,t) v(s,t,u,w) on strategy-indexed axes."""
    ns, nt, nu, nw = game.sizes
    c = game.p[:, :, None, None] * game.v
    return c.transpose(0, 2, 1, 3).reshape(ns * nu, nt * nw)


def fl_sigma_program(game: Game) -> SdpProgram:
    """The Feige-Lovasz SDP relaxation of the game value.

    Index space: first-prover dialogue pairs (s, u), then second-prover
    pairs (t, w).  With Ch the bipartite version of the payoff matrix:

        maximize   (1/2) Ch . X
        such that  the entries of X over every question-pair block
                   (including same-prover pairs) sum to 1
                   X >= 0 entrywise
                   X psd.

    Block-sum rows are emitted once per unordered question pair and the
    entrywise rows once per unordered index pair.  The relaxation is
    sound (any strategy pair yields a feasible rank-one X), but it has
    global nonnegativity and same-block equality rows, so it fits none
    of the product rules, and in fact it does not product perfectly.
    """
    ns, nt, nu, nw = game.sizes
    n = ns * nu + nt * nw
    blocks = [range(s * nu, (s + 1) * nu) for s in range(ns)]
    blocks += [range(ns * nu + t * nw, ns * nu + (t + 1) * nw) for t in range(nt)]
    constraints = []
    for a in range(len(blocks)):
        for b in range(a, len(blocks)):
            m = np.zeros((n, n))
            scale = 1.0 if a == b else 0.5
            for i in blocks[a]:
                for j in blocks[b]:
                    m[i, j] += scale
                    m[j, i] += scale
            if a == b:
                m *= 0.5  # the double loop added each cell twice
            constraints.append(LinearConstraint(m, 1.0, Relation.EQ))
    nonneg = [
        _entry_mask(n, i, j) for i in range(n) for j in range(i, n)
    ]
    return SdpProgram(
        dim=n,
        objective=0.5 * linalg.hat(_payoff_matrix(game)),
        constraints=tuple(constraints),
        nonneg=tuple(nonneg),
        name=f"fl-sigma({ns}x{nt} questions)",
    )


def fl_sigma_bar_prime_program(game: Game) -> SdpProgram:
    """The loosened game relaxation that products perfectly.

    The same-prover block sums are replaced by inequality rows bounding
    every signed combination of a block's entries by one (one row per
    ordered question pair and sign pattern), and only the cross-prover
    entries keep nonnegativity rows.  The program is bipartite with the
    affine rows block diagonal, and the objective (1/2) Ch equals
    u^T B for u listing the payoff entries, so the perfect-product rule
    applies.
    """
    ns, nt, nu, nw = game.sizes
    if nu > 2 or nw > 2:
        raise ValueError(
            "sign-pattern rows enumerate 2^(answers^2) cases; answer "
            "alphabets above 2 are not supported"
        )
    n = ns * nu + nt * nw

    def s_index(s, u):
        return s * nu + u

    def t_index(t, w):
        return ns * nu + t * nw + w

    constraints = []
    for s1 in range(ns):
        for s2 in range(ns):
            for bits in range(2 ** (nu * nu)):
                m = np.zeros((n, n))
                for k, (u, w) in enumerate(itertools.product(range(nu), repeat=2)):
                    val = -0.5 if (bits >> k) & 1 else 0.5
                    m[s_index(s1, u), s_index(s2, w)] += val
                    m[s_index(s2, w), s_index(s1, u)] += val
                constraints.append(LinearConstraint(m, 1.0, Relation.LE))
    for t1 in range(nt):
        for t2 in range(nt):
            for bits in range(2 ** (nw * nw)):
                m = np.zeros((n, n))
                for k, (u, w) in enumerate(itertools.product(range(nw), repeat=2)):
                    val = -0.5 if (bits >> k) & 1 else 0.5
                    m[t_index(t1, u), t_index(t2, w)] += val
                    m[t_index(t2, w), t_index(t1, u)] += val
                constraints.append(LinearConstraint(m, 1.0, Relation.LE))
    nonneg = []
    for s in range(ns):
        for u in range(nu):
            for t in range(nt):
                for w in range(nw):
                    nonneg.append(_entry_mask(n, s_index(s, u), t_index(t, w)))
    return SdpProgram(
        dim=n,
        objective=0.5 * linalg.hat(_payoff_matrix(game)),
        constraints=tuple(constraints),
        nonneg=tuple(nonneg),
        name=f"fl-sigma-bar-prime({ns}x{nt} questions)",
    )
