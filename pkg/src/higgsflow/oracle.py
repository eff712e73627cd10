"""Brute-force generic-fibre checks for the subset model of stability.

Invariant subspaces of the field matrix are enumerated exhaustively over a
small prime field (every reduced row echelon basis is visited), and each
subspace is bounded by the tightest coordinate projection it maps
injectively onto.  Jordan types are recomputed with sympy over the rationals.  None of
this shares code with :mod:`higgsflow.higgs_core` beyond reading the arrows.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Sequence

import sympy

from .errors import BoundsError
from .higgs_core import (
    GradedHiggsBundle,
    HiggsArrow,
    jordan_type,
    max_destabilizing_subset,
    sym_uniformizing,
    tensor_higgs,
)
from .sheaf_algebra import BundleSum, CurveContext, LineClass

FIELDS = (2, 3, 5)
MAX_ENUM_DIM = 5
MAX_JORDAN_DIM = 8


@dataclass(frozen=True)
class NilpotentMatrix:
    """Square matrix acting on column vectors; ``q=None`` means rational entries."""

    rows: tuple[tuple[int, ...], ...]
    q: int | None = None

    @property
    def n(self) -> int:
        return len(self.rows)

    @classmethod
    def from_higgs(cls, h: GradedHiggsBundle, q: int | None = None, scalar: int = 1) -> "NilpotentMatrix":
        n = h.rank
        m = [[0] * n for _ in range(n)]
        for a in h.arrows:
            m[a.target][a.source] = scalar % q if q else scalar
        return cls(tuple(map(tuple, m)), q)

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        out = (sum(r[j] * v[j] for j in range(self.n)) for r in self.rows)
        return tuple(x % self.q for x in out) if self.q else tuple(out)


def _check_bounds(n: int, q: int) -> None:
    if q not in FIELDS:
        raise BoundsError(f"field size must be one of {FIELDS}, got {q}")
    if n > MAX_ENUM_DIM:
        raise BoundsError(f"exhaustive enumeration supports dimension <= {MAX_ENUM_DIM}, got {n}")


def all_subspaces(n: int, q: int):
    """Yield every subspace of ``F_q^n`` once, as its reduced row echelon basis."""
    for k in range(n + 1):
        for pivots in combinations(range(n), k):
            free = [(i, j) for i, pc in enumerate(pivots) for j in range(pc + 1, n) if j not in pivots]
            for values in product(range(q), repeat=len(free)):
                rows = [[0] * n for _ in range(k)]
                for i, pc in enumerate(pivots):
                    rows[i][pc] = 1
                for (i, j), v in zip(free, values):
                    rows[i][j] = v
                yield pivots, tuple(map(tuple, rows))


def _in_span(v, pivots, rows, q) -> bool:
    v = list(v)
    for pc, r in zip(pivots, rows):
        c = v[pc]
        if c:
            v = [(x - c * y) % q for x, y in zip(v, r)]
    return not any(v)


def _rank_mod(rows, q) -> int:
    m = [list(r) for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][col] % q), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][col], -1, q)
        m[rank] = [(x * inv) % q for x in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col] % q:
                c = m[i][col]
                m[i] = [(x - c * y) % q for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


def enumerate_invariant_subspaces(N: NilpotentMatrix) -> list[tuple[tuple[int, ...], ...]]:
    """Every ``W`` with ``N W`` contained in ``W``, including 0 and the whole space."""
    if N.q is None:
        raise BoundsError("enumeration needs a finite field")
    _check_bounds(N.n, N.q)
    return list(_invariant_cached(N.rows, N.q))


@lru_cache(maxsize=None)
def _invariant_cached(rows, q):
    N = NilpotentMatrix(rows, q)
    out = []
    for pivots, basis in all_subspaces(N.n, q):
        if all(_in_span(N.apply(w), pivots, basis, q) for w in basis):
            out.append(basis)
    return tuple(out)


def injective_coordinate_sets(basis, q: int | None) -> list[tuple[int, ...]]:
    """Coordinate sets ``S`` with ``|S| = dim W`` onto which ``W`` projects injectively."""
    k = len(basis)
    if k == 0:
        return [()]
    n = len(basis[0])
    out = []
    for s in combinations(range(n), k):
        sub = [[r[j] for j in s] for r in basis]
        rank = _rank_mod(sub, q) if q else sympy.Matrix(sub).rank()
        if rank == k:
            out.append(s)
    return out


def degree_bound_of_subspace(basis, degrees: Sequence, q: int | None = None) -> Fraction:
    """Degree bound of any subsheaf with generic fibre ``W``.

    Each injective coordinate projection embeds the subsheaf into the sum of
    those lines, so every such set bounds the degree; the tightest one is kept.
    """
    sets = injective_coordinate_sets(basis, q)
    return min(sum((Fraction(degrees[i]) for i in s), Fraction(0)) for s in sets)


@lru_cache(maxsize=None)
def _subspace_profiles(rows, q):
    """For each proper nonzero invariant subspace: (dim, injective coordinate sets)."""
    n = len(rows)
    out = []
    for basis in _invariant_cached(rows, q):
        if 0 < len(basis) < n:
            out.append((len(basis), tuple(injective_coordinate_sets(basis, q))))
    return tuple(out)


def brute_force_max_destabilizer(h: GradedHiggsBundle, q: int = 3, scalar: int = 1) -> tuple[Fraction, int] | None:
    """Max over proper nonzero invariant subspaces of (degree bound / dim), smallest rank on ties."""
    _check_bounds(h.rank, q)
    N = NilpotentMatrix.from_higgs(h, q, scalar)
    degs = h.degrees
    best = None
    for dim, sets in _subspace_profiles(N.rows, q):
        bound = min(sum((degs[i] for i in s), Fraction(0)) for s in sets)
        key = (bound / dim, -dim)
        if best is None or key > best:
            best = key
    if best is None:
        return None
    return best[0], -best[1]


def subset_model_max(h: GradedHiggsBundle) -> tuple[Fraction, int] | None:
    found = max_destabilizing_subset(h)
    if found is None:
        return None
    return found[0], len(found[1])


def jordan_type_bruteforce(N: NilpotentMatrix) -> list[int]:
    """Block sizes from kernel dimensions of powers, computed by sympy."""
    n = N.n
    if n > MAX_JORDAN_DIM:
        raise BoundsError(f"dimension {n} > {MAX_JORDAN_DIM}")
    M = sympy.Matrix(N.rows)
    kernel_dims = [0]
    P = sympy.eye(n)
    while kernel_dims[-1] < n:
        P = P * M
        kernel_dims.append(n - P.rank())
        if len(kernel_dims) > n + 1:
            raise BoundsError("matrix is not nilpotent")
    # blocks of size >= k: kernel_dims[k] - kernel_dims[k-1]
    ge = [kernel_dims[k] - kernel_dims[k - 1] for k in range(1, len(kernel_dims))]
    sizes = []
    for k in range(1, len(ge) + 1):
        nxt = ge[k] if k < len(ge) else 0
        sizes += [k] * (ge[k - 1] - nxt)
    return sorted(sizes, reverse=True)


# random instances and suites ------------------------------------------------------------

def random_chain_sum(
    rng: random.Random, ctx: CurveContext, max_rank: int = 5, lo: int = -4, hi: int = 4
) -> GradedHiggsBundle:
    """Random chain-sum with integer degrees in ``[lo, hi]`` and non-negative vanishing degrees."""
    n = rng.randint(1, max_rank)
    kd = ctx.canonical_degree
    degrees, arrows = [], []
    i = 0
    while i < n:
        length = rng.randint(1, n - i)
        d = rng.randint(lo, hi)
        for t in range(length):
            if t:
                arrows.append(HiggsArrow(i - 1, i))
                d = rng.randint(max(lo, d - kd), hi)
            degrees.append(d)
            i += 1
    perm = list(range(n))
    rng.shuffle(perm)
    summands = [None] * n
    for old, new in enumerate(perm):
        summands[new] = LineClass.symbol(f"D{new}", degrees[old]) if degrees[old] else LineClass()
    arrows = [HiggsArrow(perm[a.source], perm[a.target]) for a in arrows]
    return GradedHiggsBundle(BundleSum(ctx, tuple(summands)), tuple(arrows))


@dataclass
class Mismatch:
    case: str
    subset_model: object
    brute_force: object
    higgs: GradedHiggsBundle | None = None


def check_random_chain_sums(n_cases: int, q: int, seed: int, max_rank: int = 5, g: int = 2) -> list[Mismatch]:
    _check_bounds(max_rank, q)
    rng = random.Random(seed)
    ctx = CurveContext(2, g)
    bad = []
    for k in range(n_cases):
        h = random_chain_sum(rng, ctx, max_rank)
        a, b = subset_model_max(h), brute_force_max_destabilizer(h, q)
        if (a and a[0]) != (b and b[0]):
            bad.append(Mismatch(f"random #{k}", a, b, h))
    return bad


def check_scalar_independence(n_cases: int, seed: int, max_rank: int = 4) -> list[Mismatch]:
    """Arrows instantiated by 2 and 3 over F_5 give the same suprema as scalar 1."""
    rng = random.Random(seed)
    ctx = CurveContext(2, 2)
    bad = []
    for k in range(n_cases):
        h = random_chain_sum(rng, ctx, max_rank)
        ref = brute_force_max_destabilizer(h, 5, 1)
        for s in (2, 3):
            got = brute_force_max_destabilizer(h, 5, s)
            if (ref and ref[0]) != (got and got[0]):
                bad.append(Mismatch(f"scalar {s} #{k}", ref, got, h))
    return bad


def check_chain_family(hs: Sequence[GradedHiggsBundle], q: int) -> list[Mismatch]:
    bad = []
    for h in hs:
        a, b = subset_model_max(h), brute_force_max_destabilizer(h, q)
        if a != b:
            bad.append(Mismatch(f"chain rank {h.rank} g={h.context.g}", a, b, h))
    return bad


def grid_cases(ctx: CurveContext, max_total_rank: int = MAX_JORDAN_DIM) -> list[GradedHiggsBundle]:
    """All tensor grids of two single chains with total rank <= bound."""
    out = []
    for a in range(1, max_total_rank + 1):
        for b in range(1, max_total_rank // a + 1):
            if a * b <= max_total_rank:
                out.append(tensor_higgs(sym_uniformizing(ctx, a - 1), sym_uniformizing(ctx, b - 1)))
    return out


def check_jordan_types(hs: Sequence[GradedHiggsBundle]) -> list[Mismatch]:
    bad = []
    for h in hs:
        a, b = jordan_type(h), jordan_type_bruteforce(NilpotentMatrix.from_higgs(h))
        if a != b:
            bad.append(Mismatch(f"grid {h.grid}", a, b, h))
    return bad


def check_jordan_block_counts(q: int, max_n: int = MAX_ENUM_DIM) -> list[Mismatch]:
    """A single Jordan block J_n(0) has exactly n + 1 invariant subspaces."""
    bad = []
    for n in range(1, max_n + 1):
        rows = tuple(tuple(1 if i == j + 1 else 0 for j in range(n)) for i in range(n))
        count = len(enumerate_invariant_subspaces(NilpotentMatrix(rows, q)))
        if count != n + 1:
            bad.append(Mismatch(f"J_{n}(0) over F_{q}", n + 1, count))
    return bad
