"""Nilpotent graded Higgs bundles whose Higgs field is a quiver of line maps.

Each arrow ``i -> j`` stands for a nonzero map ``L_i -> L_j (x) K``; such a map
exists iff its vanishing degree ``deg L_j + (2g - 2) - deg L_i`` is
non-negative.  Chain-sum objects (every summand has at most one incoming and
one outgoing arrow) get the subset model of stability: at the generic fibre
the invariant subspaces of a chain are its tails, so only theta-closed sets of
summands need to be compared.  Tensor products of chains produce "grid"
objects which are analysed through :func:`jordan_type` and the Clebsch-Gordan
splitting instead.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence

from .errors import (
    GridShapeError,
    HiggsValidationError,
    InternalInconsistency,
    ParameterError,
    UnstableInputError,
)
from .sheaf_algebra import BundleSum, CurveContext, LineClass


@dataclass(frozen=True, order=True)
class HiggsArrow:
    source: int
    target: int


@dataclass(frozen=True)
class GradedHiggsBundle:
    base: BundleSum
    arrows: tuple[HiggsArrow, ...] = ()
    grid: tuple[int, int] | None = None

    def __post_init__(self):
        arrows = tuple(
            a if isinstance(a, HiggsArrow) else HiggsArrow(*a) for a in self.arrows
        )
        object.__setattr__(self, "arrows", tuple(sorted(set(arrows))))

    # convenience constructors --------------------------------------------
    @classmethod
    def chain(cls, ctx: CurveContext, summands: Sequence[LineClass]) -> "GradedHiggsBundle":
        """Single chain ``s_0 -> s_1 -> ... -> s_{n-1}``."""
        arrows = [HiggsArrow(i, i + 1) for i in range(len(summands) - 1)]
        return cls(BundleSum(ctx, tuple(summands)), tuple(arrows))

    @classmethod
    def zero_field(cls, ctx: CurveContext, summands: Sequence[LineClass]) -> "GradedHiggsBundle":
        return cls(BundleSum(ctx, tuple(summands)))

    # basic data ------------------------------------------------------------
    @property
    def context(self) -> CurveContext:
        return self.base.context

    @property
    def summands(self) -> tuple[LineClass, ...]:
        return self.base.summands

    @property
    def rank(self) -> int:
        return self.base.rank

    @property
    def degree(self) -> Fraction:
        return self.base.degree

    @property
    def slope(self) -> Fraction:
        return self.base.slope

    @property
    def degrees(self) -> list[Fraction]:
        return self.base.degrees

    @property
    def is_grid(self) -> bool:
        return self.grid is not None

    @property
    def has_zero_field(self) -> bool:
        return not self.arrows

    def vanishing_degree(self, arrow: HiggsArrow) -> Fraction:
        d = self.degrees
        return d[arrow.target] + self.context.canonical_degree - d[arrow.source]

    def arrow_is_iso(self, arrow: HiggsArrow) -> bool:
        src, tgt = self.summands[arrow.source], self.summands[arrow.target]
        return self.vanishing_degree(arrow) == 0 and tgt * LineClass.canonical() == src

    @cached_property
    def successors(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {i: [] for i in range(self.rank)}
        for a in self.arrows:
            if 0 <= a.source < self.rank:
                out[a.source].append(a.target)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def predecessors(self) -> dict[int, tuple[int, ...]]:
        inc: dict[int, list[int]] = {i: [] for i in range(self.rank)}
        for a in self.arrows:
            if 0 <= a.target < self.rank:
                inc[a.target].append(a.source)
        return {k: tuple(v) for k, v in inc.items()}

    def is_chain_sum(self) -> bool:
        if self.is_grid:
            return False
        return all(len(v) <= 1 for v in self.successors.values()) and all(
            len(v) <= 1 for v in self.predecessors.values()
        )

    def render(self) -> str:
        parts = [f"{s.render()}[{d}]" for s, d in zip(self.summands, self.degrees)]
        arrows = ", ".join(f"{a.source}->{a.target}" for a in self.arrows)
        return f"({' + '.join(parts)}; {arrows or '0'})"


def validate_higgs(h: GradedHiggsBundle) -> list[str]:
    """Return all invariant violations; an empty list means the object is valid."""
    problems = []
    n = h.rank
    for a in h.arrows:
        if not (0 <= a.source < n and 0 <= a.target < n):
            problems.append(f"arrow {a.source}->{a.target} references a missing summand")
            continue
        if a.source == a.target:
            problems.append(f"arrow {a.source}->{a.target} is a loop")
            continue
        delta = h.vanishing_degree(a)
        if delta < 0:
            problems.append(
                f"arrow {a.source}->{a.target} has vanishing degree {delta} < 0"
            )
    if problems:
        return problems
    if _topological_order(h) is None:
        problems.append("arrow digraph has a cycle, field is not nilpotent")
    if not h.is_grid:
        for i, succ in h.successors.items():
            if len(succ) > 1:
                problems.append(f"summand {i} has {len(succ)} outgoing arrows")
        for i, pred in h.predecessors.items():
            if len(pred) > 1:
                problems.append(f"summand {i} has {len(pred)} incoming arrows")
    return problems


def ensure_valid(h: GradedHiggsBundle) -> GradedHiggsBundle:
    problems = validate_higgs(h)
    if problems:
        raise HiggsValidationError(problems)
    return h


def _topological_order(h: GradedHiggsBundle) -> list[int] | None:
    indeg = {i: len(h.predecessors[i]) for i in range(h.rank)}
    ready = [i for i in range(h.rank) if indeg[i] == 0]
    order = []
    while ready:
        i = ready.pop()
        order.append(i)
        for j in h.successors[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
    return order if len(order) == h.rank else None


def _longest_out_paths(h: GradedHiggsBundle) -> list[int]:
    order = _topological_order(h)
    if order is None:
        raise HiggsValidationError(["arrow digraph has a cycle"])
    depth = [0] * h.rank
    for i in reversed(order):
        succ = h.successors[i]
        if succ:
            depth[i] = 1 + max(depth[j] for j in succ)
    return depth


def nilpotency_exponent(h: GradedHiggsBundle) -> int:
    """Number of arrows on the longest directed path."""
    return max(_longest_out_paths(h), default=0)


@dataclass(frozen=True)
class HiggsFiltration:
    """Descending filtration by summand subsets, ``levels[0]`` = everything."""

    levels: tuple[frozenset[int], ...]

    def __post_init__(self):
        lv = self.levels
        if not lv or lv[-1]:
            raise ParameterError("filtration must end with the empty set")
        for big, small in zip(lv, lv[1:]):
            if not small < big:
                raise ParameterError("filtration must be strictly decreasing")

    @property
    def length(self) -> int:
        return len(self.levels) - 1


def kernel_filtration(h: GradedHiggsBundle) -> HiggsFiltration:
    """Iterated kernels ``0 = ker^0 < ker theta < ker theta^2 < ... < E``."""
    depth = _longest_out_paths(h)
    e = max(depth, default=0)
    ascending = [frozenset(i for i in range(h.rank) if depth[i] < k) for k in range(e + 2)]
    return HiggsFiltration(tuple(reversed(ascending)))


def graded_of_filtration(h: GradedHiggsBundle, filt: HiggsFiltration) -> list[list[int]]:
    """Summand indices of each graded piece, top piece first."""
    return [sorted(a - b) for a, b in zip(filt.levels, filt.levels[1:])]


def chains(h: GradedHiggsBundle) -> list[tuple[int, ...]]:
    """Connected components of a chain-sum, each listed from head to tail."""
    if not h.is_chain_sum():
        raise GridShapeError("chain decomposition needs a chain-sum object")
    out = []
    for start in range(h.rank):
        if h.predecessors[start]:
            continue
        c = [start]
        while h.successors[c[-1]]:
            c.append(h.successors[c[-1]][0])
        out.append(tuple(c))
    return out


def invariant_subsets(h: GradedHiggsBundle) -> list[frozenset[int]]:
    """All theta-closed summand subsets: unions of one tail per chain."""
    comps = chains(h)
    tails = [[frozenset(c[k:]) for k in range(len(c), -1, -1)] for c in comps]
    subsets = [frozenset().union(*choice) for choice in product(*tails)]
    return sorted(subsets, key=lambda s: (len(s), sorted(s)))


def subset_slope(h: GradedHiggsBundle, subset: Iterable[int]) -> Fraction:
    idx = list(subset)
    degs = h.degrees
    return sum((degs[i] for i in idx), Fraction(0)) / len(idx)


def max_destabilizing_subset(h: GradedHiggsBundle) -> tuple[Fraction, frozenset[int]] | None:
    """Largest slope over proper nonempty theta-closed subsets, with its witness.

    Ties go to the smallest rank, then to the lexicographically first index
    tuple.  Returns ``None`` for rank one.
    """
    best = None
    for s in invariant_subsets(h):
        if not s or len(s) == h.rank:
            continue
        key = (-subset_slope(h, s), len(s), tuple(sorted(s)))
        if best is None or key < best:
            best = key
    if best is None:
        return None
    return -best[0], frozenset(best[2])


class Stability(str, enum.Enum):
    STABLE = "stable"
    STRICTLY_SEMISTABLE = "strictly-semistable"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class StabilityVerdict:
    status: Stability
    slope: Fraction
    witness: frozenset[int] | None = None
    witness_slope: Fraction | None = None

    def __post_init__(self):
        if (self.witness is None) != (self.status is Stability.STABLE):
            raise ParameterError("witness present iff status is not stable")

    @property
    def semistable(self) -> bool:
        return self.status is not Stability.UNSTABLE


def _require_chain_sum(h: GradedHiggsBundle) -> None:
    if h.is_grid or not h.is_chain_sum():
        raise GridShapeError("subset stability is only defined for chain-sum objects")


def stability_verdict(h: GradedHiggsBundle) -> StabilityVerdict:
    _require_chain_sum(h)
    ensure_valid(h)
    mu = h.slope
    best = max_destabilizing_subset(h)
    if best is None or best[0] < mu:
        return StabilityVerdict(Stability.STABLE, mu)
    slope, witness = best
    status = Stability.STRICTLY_SEMISTABLE if slope == mu else Stability.UNSTABLE
    return StabilityVerdict(status, mu, witness, slope)


def restrict(h: GradedHiggsBundle, indices: Iterable[int]) -> GradedHiggsBundle:
    """Sub- or quotient object on ``indices`` with the induced arrows."""
    keep = sorted(set(indices))
    pos = {old: new for new, old in enumerate(keep)}
    arrows = tuple(
        HiggsArrow(pos[a.source], pos[a.target])
        for a in h.arrows
        if a.source in pos and a.target in pos
    )
    base = BundleSum(h.context, tuple(h.summands[i] for i in keep))
    return GradedHiggsBundle(base, arrows)


def components(h: GradedHiggsBundle) -> list[GradedHiggsBundle]:
    return [restrict(h, c) for c in chains(h)]


def polystable_check(h: GradedHiggsBundle) -> bool:
    _require_chain_sum(h)
    mu = h.slope
    for comp in components(h):
        if comp.slope != mu or stability_verdict(comp).status is not Stability.STABLE:
            return False
    return True


def direct_sum(h1: GradedHiggsBundle, h2: GradedHiggsBundle) -> GradedHiggsBundle:
    if h1.context != h2.context:
        raise ParameterError("cannot add Higgs bundles over different curves")
    off = h1.rank
    arrows = h1.arrows + tuple(HiggsArrow(a.source + off, a.target + off) for a in h2.arrows)
    if h1.is_grid or h2.is_grid:
        raise GridShapeError("direct sums are only formed from chain-sum objects")
    return GradedHiggsBundle(h1.base.concat(h2.base), arrows)


def direct_sum_all(parts: Sequence[GradedHiggsBundle]) -> GradedHiggsBundle:
    out = parts[0]
    for h in parts[1:]:
        out = direct_sum(out, h)
    return out


def s_equivalence_representative(h: GradedHiggsBundle) -> GradedHiggsBundle:
    """Polystable object of the Jordan-Hoelder graded of a semistable chain-sum."""
    pieces = _jordan_hoelder_pieces(h)
    if len(pieces) == 1:
        return h
    return direct_sum_all(pieces)


def _jordan_hoelder_pieces(h: GradedHiggsBundle) -> list[GradedHiggsBundle]:
    v = stability_verdict(h)
    if v.status is Stability.UNSTABLE:
        raise UnstableInputError("S-equivalence is only defined for semistable objects")
    if v.status is Stability.STABLE:
        return [h]
    rest = [i for i in range(h.rank) if i not in v.witness]
    return _jordan_hoelder_pieces(restrict(h, v.witness)) + _jordan_hoelder_pieces(
        restrict(h, rest)
    )


def tensor_line_higgs(h: GradedHiggsBundle, l: LineClass) -> GradedHiggsBundle:
    return GradedHiggsBundle(h.base.tensor(l), h.arrows, h.grid)


def tensor_higgs(h1: GradedHiggsBundle, h2: GradedHiggsBundle) -> GradedHiggsBundle:
    """Tensor product with field ``theta_1 (x) 1 + 1 (x) theta_2``.

    Summand ``(i, j)`` sits at index ``i * rank(h2) + j``.
    """
    if h1.context != h2.context:
        raise ParameterError("cannot tensor Higgs bundles over different curves")
    for h in (h1, h2):
        _require_chain_sum(h)
    n1, n2 = h1.rank, h2.rank
    summands = tuple(a * b for a in h1.summands for b in h2.summands)
    arrows = [HiggsArrow(a.source * n2 + j, a.target * n2 + j) for a in h1.arrows for j in range(n2)]
    arrows += [HiggsArrow(i * n2 + a.source, i * n2 + a.target) for a in h2.arrows for i in range(n1)]
    return GradedHiggsBundle(BundleSum(h1.context, summands), tuple(arrows), (n1, n2))


def field_matrix(h: GradedHiggsBundle, scalar: int = 1) -> list[list[int]]:
    """Generic-fibre matrix: ``scalar`` at (target, source) for each arrow."""
    n = h.rank
    m = [[0] * n for _ in range(n)]
    for a in h.arrows:
        m[a.target][a.source] = scalar
    return m


def _matmul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return [[sum(a[i][t] * b[t][j] for t in range(k) if a[i][t]) for j in range(m)] for i in range(n)]


def _rank_exact(rows) -> int:
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return 0
    rank, ncols = 0, len(m[0])
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col] / m[rank][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def partition_from_ranks(n: int, ranks: Sequence[int]) -> list[int]:
    """Jordan block sizes from ``ranks[k] = rank N^(k+1)``."""
    r = [n, *ranks]
    at_least = [r[k - 1] - r[k] for k in range(1, len(r))]
    sizes = []
    for k, count in enumerate(at_least, start=1):
        exactly = count - (at_least[k] if k < len(at_least) else 0)
        sizes += [k] * exactly
    return sorted(sizes, reverse=True)


def jordan_type(h: GradedHiggsBundle) -> list[int]:
    """Jordan block sizes of the generic-fibre field, from ranks of its powers."""
    ensure_valid(h)
    n = h.rank
    if not h.arrows:
        return [1] * n
    n_mat = field_matrix(h)
    power = n_mat
    ranks = []
    while True:
        r = _rank_exact(power)
        ranks.append(r)
        if r == 0:
            break
        power = _matmul(n_mat, power)
    return partition_from_ranks(n, ranks)


def sym_uniformizing(ctx: CurveContext, m: int) -> GradedHiggsBundle:
    """``Sym^m`` of the uniformizing Higgs bundle: ``K^{m/2} -> ... -> K^{-m/2}``."""
    if m < 0:
        raise ParameterError("symmetric power must be non-negative")
    return GradedHiggsBundle.chain(
        ctx, [LineClass.half_canonical(m - 2 * i) for i in range(m + 1)]
    )


def clebsch_gordan_decompose(
    ctx: CurveContext, m: int
) -> tuple[GradedHiggsBundle, GradedHiggsBundle]:
    """Split ``Sym^{m-1} (x) Sym^1`` as ``Sym^m + Sym^{m-2}``.

    The two sides are compared on summand-degree multisets and Jordan type
    before returning.
    """
    if m < 2:
        raise ParameterError("Clebsch-Gordan splitting needs m >= 2")
    big, small = sym_uniformizing(ctx, m), sym_uniformizing(ctx, m - 2)
    grid = tensor_higgs(sym_uniformizing(ctx, m - 1), sym_uniformizing(ctx, 1))
    pieces = direct_sum(big, small)
    if sorted(grid.summands, key=_line_key) != sorted(pieces.summands, key=_line_key):
        raise InternalInconsistency(f"summand mismatch in Clebsch-Gordan splitting for m={m}")
    if jordan_type(grid) != [m + 1, m - 1]:
        raise InternalInconsistency(f"Jordan type mismatch in Clebsch-Gordan splitting for m={m}")
    return big, small


def _line_key(l: LineClass):
    return (l.kc_halves, l.twist_degree, l.terms)
