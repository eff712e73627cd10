"""Builders for the explicit objects: chains, V_ell and E_ell, big-rank sums,
the p = 2 flat bundle and the tensor-product counterexample.

Each verifier returns a proof trace: an ordered list of :class:`Claim` whose
``kind`` is ``"computed"`` (an exact check done here) or ``"rule"`` (an
imported theorem, with ``source`` naming it).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InternalInconsistency, ParameterError
from .flow_engine import (
    ORDER_TWO_LINE,
    SMALL_RANK_RULE,
    UNIQUENESS_RULE,
    Assumptions,
    FlatObject,
    KnownFiltration,
    OpaqueHiggs,
    Provenance,
    StrongStatus,
    StrongVerdict,
    canonical_connection_flat,
    direct_sum_flat,
    grade,
    inverse_cartier,
    make_flat,
    pushforward_pullback_flat,
    strong_semistability_verdict,
)
from .frobenius import (
    SUN_PUSHFORWARD,
    SUN_SLOPE_BOUND,
    canonical_filtration_graded,
    cartier_descent_degree,
    frobenius_pushforward_line,
    max_descended_degree,
)
from .higgs_core import (
    GradedHiggsBundle,
    Stability,
    clebsch_gordan_decompose,
    direct_sum,
    jordan_type,
    nilpotency_exponent,
    polystable_check,
    stability_verdict,
    sym_uniformizing,
    tensor_higgs,
    tensor_line_higgs,
)
from .sheaf_algebra import CurveContext, LineClass, euler_characteristic, serre_ledger

CARTIER_DESCENT = "Cartier descent: nabla_can-invariant subbundles of F^*E are F^* of subbundles of E"
TENSOR_STABILITY_RULE = (
    "stability of (E_1,theta_1) (x) (E_2,0): image/kernel rank comparison r <= s "
    "forces proper Higgs subobjects to have smaller slope"
)


@dataclass(frozen=True)
class Claim:
    claim: str
    kind: str
    holds: bool
    values: dict = field(default_factory=dict)
    source: str = ""

    def __post_init__(self):
        if self.kind not in ("computed", "rule"):
            raise ParameterError(f"claim kind must be computed or rule, got {self.kind!r}")
        if self.kind == "rule" and not self.source:
            raise ParameterError("rule claims must cite a source")


def _computed(claim, holds, **values) -> Claim:
    return Claim(claim, "computed", bool(holds), values)


def _rule(claim, source, **values) -> Claim:
    return Claim(claim, "rule", True, values, source)


def _require_g2(ctx: CurveContext) -> None:
    if ctx.g < 2:
        raise ParameterError(f"construction needs genus >= 2, got g={ctx.g}")


# chains ---------------------------------------------------------------------------

def build_chain_F(ctx: CurveContext, m: int) -> GradedHiggsBundle:
    """``K^m -> K^{m-1} -> ... -> O`` with isomorphic arrows."""
    _require_g2(ctx)
    if m < 0:
        raise ParameterError("m must be non-negative")
    return GradedHiggsBundle.chain(ctx, [LineClass.canonical(m - i) for i in range(m + 1)])


def build_uniformizing(ctx: CurveContext) -> GradedHiggsBundle:
    _require_g2(ctx)
    return sym_uniformizing(ctx, 1)


# V_ell and E_ell ----------------------------------------------------------------------

@dataclass(frozen=True)
class VlParameters:
    context: CurveContext
    ell: int
    d_L: int

    def __post_init__(self):
        ctx = self.context
        _require_g2(ctx)
        if not 0 < self.ell <= 2 * (ctx.g - 1):
            raise ParameterError(f"ell must lie in 1..{2 * (ctx.g - 1)}, got {self.ell}")
        if (self.d_L - self.delta_top) % ctx.p:
            raise ParameterError(
                f"deg L_ell = {self.d_L} must be congruent to 2g-2-ell = {self.delta_top} mod p"
            )

    @classmethod
    def default(cls, ctx: CurveContext, ell: int) -> "VlParameters":
        """Smallest non-negative ``deg L_ell`` meeting the congruence."""
        return cls(ctx, ell, (2 * ctx.g - 2 - ell) % ctx.p)

    @property
    def delta_top(self) -> int:
        return 2 * self.context.g - 2 - self.ell

    @property
    def boundary(self) -> bool:
        return self.ell == 2 * (self.context.g - 1)

    @property
    def a_line(self) -> LineClass:
        if self.boundary and self.d_L == 0:
            return LineClass.canonical()
        return LineClass.symbol(f"A_{self.ell}", self.ell)

    @property
    def l_line(self) -> LineClass:
        if self.boundary and self.d_L == 0:
            return LineClass.trivial()
        return LineClass.symbol(f"L_{self.ell}", self.d_L)

    @property
    def vl_degree(self) -> Fraction:
        p, g = self.context.p, self.context.g
        return Fraction((p + 2) * (p - 1) * (g - 1) + (p + 1) * self.d_L + self.ell)


def vl_graded_chain(params: VlParameters) -> GradedHiggsBundle:
    """``A L K^{p-1} -> L K^{p-1} -> L K^{p-2} -> ... -> L``."""
    ctx = params.context
    top = params.a_line * params.l_line * LineClass.canonical(ctx.p - 1)
    rest = canonical_filtration_graded(ctx, params.l_line)
    return GradedHiggsBundle.chain(ctx, [top, *rest.summands])


def build_Vl(params: VlParameters) -> FlatObject:
    ctx = params.context
    p = ctx.p
    graded = vl_graded_chain(params)
    e_prime = frobenius_pushforward_line(ctx, params.l_line)
    degree = graded.degree
    if degree != params.vl_degree or degree != params.a_line.degree(ctx) + params.l_line.degree(ctx) \
            + 2 * (p - 1) * (ctx.g - 1) + p * e_prime.degree:
        raise InternalInconsistency("V_ell degree bookkeeping disagrees with its closed form")
    stable = stability_verdict(graded).status is Stability.STABLE
    filt = KnownFiltration("V_ell", graded, stable, stable, stable,
                           f"computed stability of the graded chain; {UNIQUENESS_RULE}")
    return make_flat(ctx, p + 1, degree, 1, Provenance.VL, params, (filt,), True,
                     f"V_{params.ell}(p={p},g={ctx.g})")


def reduced_expression(ctx: CurveContext, n: int, ell: int) -> int:
    """``(p - n)(n(p+1)(g-1) - (p-1)(g-1) - ell)``; non-negative iff the slope test passes."""
    p, g = ctx.p, ctx.g
    return (p - n) * (n * (p + 1) * (g - 1) - (p - 1) * (g - 1) - ell)


def sub_slope_bound(params: VlParameters, n: int) -> Fraction:
    """Closed-form bound on the slope of an invariant ``M`` whose kernel part has rank ``n``."""
    g, ell = params.context.g, params.ell
    return Fraction((n * n - n + 2 * params.context.p - 2) * (g - 1) + ell, n + 1) + params.d_L


def verify_Vl_stability(params: VlParameters) -> list[Claim]:
    ctx = params.context
    p, g, ell, d_L = ctx.p, ctx.g, params.ell, params.d_L
    mu_v = params.vl_degree / (p + 1)
    e_prime = frobenius_pushforward_line(ctx, params.l_line)
    mu_fe = e_prime.slope * p  # slope of F^*E'
    top_deg = (params.a_line * params.l_line * LineClass.canonical(p - 1)).degree(ctx)
    trace = [
        _computed("mu(F^*E') < mu(V_ell)", mu_fe < mu_v, mu_FE=mu_fe, mu_V=mu_v),
        _rule("(F^*E', nabla_can) is nabla-stable, so pi(M) = 0 gives mu(M) < mu(F^*E') < mu(V_ell)",
              f"{SUN_PUSHFORWARD}; {CARTIER_DESCENT}"),
        _computed("A L K^{p-1} is the maximal destabilizer of V_ell and is not nabla-invariant, so N != 0",
                  top_deg > mu_v, deg_top=top_deg, mu_V=mu_v),
    ]
    for n in range(1, p):
        deg_n_max = max_descended_degree(ctx, n, params.l_line)
        via_bound = (deg_n_max + 2 * (p - 1) * (g - 1) + d_L + ell) / (n + 1)
        closed = sub_slope_bound(params, n)
        red = reduced_expression(ctx, n, ell)
        identity = mu_v - closed == Fraction(red, (p + 1) * (n + 1))
        strict = red > 0
        trace.append(Claim(
            f"n={n}: mu(M) <= {closed} <= mu(V_ell)", "computed",
            via_bound == closed and identity and red >= 0 and strict == ((n, ell) != (1, 2 * (g - 1))),
            {"n": n, "deg_N_max": deg_n_max, "mu_M_bound": closed, "mu_V": mu_v,
             "reduced": red, "strict": strict},
            SUN_SLOPE_BOUND,
        ))
    if params.boundary:
        trace += _boundary_branch(params, mu_v)
    graded = vl_graded_chain(params)
    trace.append(_computed("graded chain of the V_ell filtration is stable",
                           stability_verdict(graded).status is Stability.STABLE,
                           degrees=graded.degrees))
    return trace


def _boundary_branch(params: VlParameters, mu_v: Fraction) -> list[Claim]:
    """ell = 2(g-1), n = 1: the only equality case, settled with deg N = 0."""
    ctx = params.context
    p, g = ctx.p, ctx.g
    mu_m = Fraction(p * (g - 1))
    mu_gr = Fraction((p - 1) * (g - 1))
    canon = canonical_filtration_graded(ctx, params.l_line)
    canon_stable = stability_verdict(canon).status is Stability.STABLE
    deg_n_max = max_descended_degree(ctx, 1, params.l_line)
    return [
        _computed("boundary: deg N <= deg L_ell, and deg N < 0 forces mu(M) < mu(V_ell)",
                  deg_n_max == params.d_L and mu_v == mu_m, deg_N_max=deg_n_max, mu_V=mu_v),
        _computed("boundary: deg N = 0 gives mu(M) = p(g-1) > (p-1)(g-1) = mu(Gr F^*E')",
                  mu_m > mu_gr, mu_M=mu_m, mu_Gr=mu_gr),
        _computed("boundary: canonical graded chain of F^*E' is stable, contradiction",
                  canon_stable, degrees=canon.degrees),
    ]


def trace_passes(trace: list[Claim]) -> bool:
    return all(c.holds for c in trace)


@dataclass(frozen=True)
class ElResult:
    params: VlParameters
    flat: FlatObject
    higgs: OpaqueHiggs
    trace: list
    verdict: StrongVerdict


def build_El(params: VlParameters) -> ElResult:
    trace = verify_Vl_stability(params)
    if not trace_passes(trace):
        raise InternalInconsistency(f"V_ell stability trace failed for {params}")
    ctx = params.context
    flat = build_Vl(params)
    deg = cartier_descent_degree(ctx, flat.degree)
    higgs = OpaqueHiggs(ctx, ctx.p + 1, deg, 1, f"E_{params.ell}", Stability.STABLE,
                        "C of a nabla-stable flat bundle is stable", cartier_of=flat,
                        catalog={"catalog": "E_ell", "p": ctx.p, "g": ctx.g,
                                 "ell": params.ell, "d_L": params.d_L})
    verdict = strong_semistability_verdict(higgs)
    return ElResult(params, flat, higgs, trace, verdict)


@dataclass(frozen=True)
class BigRankResult:
    base: ElResult
    extra_line: LineClass
    copies: int
    flat: FlatObject
    higgs: OpaqueHiggs
    verdict: StrongVerdict


def build_big_rank(ctx: CurveContext, target_rank: int) -> BigRankResult:
    """``E_{2(g-1)}`` plus copies of ``(M, 0)`` with ``deg M = g - 1``."""
    _require_g2(ctx)
    p = ctx.p
    if target_rank <= p:
        raise ParameterError(f"rank {target_rank} <= p = {p} is small; small rank is strongly semistable")
    base = build_El(VlParameters.default(ctx, 2 * (ctx.g - 1)))
    mu = base.higgs.slope
    if mu.denominator != 1 or mu != ctx.g - 1:
        raise InternalInconsistency(f"slope of E_2(g-1) should be g-1, got {mu}")
    m_line = LineClass.symbol("M", mu)
    k = target_rank - p - 1
    if k == 0:
        flat, higgs = base.flat, base.higgs
    else:
        m_higgs = GradedHiggsBundle.zero_field(ctx, [m_line])
        flat = direct_sum_flat([base.flat] + [canonical_connection_flat(m_higgs)] * k)
        higgs = OpaqueHiggs(ctx, target_rank, base.higgs.degree + k * mu, 1,
                            f"E_{2 * (ctx.g - 1)} + (M,0)^{k}", Stability.STRICTLY_SEMISTABLE,
                            "direct sum of stable objects of equal slope", cartier_of=flat,
                            catalog={"catalog": "big_rank", "p": p, "g": ctx.g, "rank": target_rank})
    return BigRankResult(base, m_line, k, flat, higgs, strong_semistability_verdict(higgs))


# p = 2 and the tensor counterexample -----------------------------------------------------

def build_p2_flat(ctx: CurveContext) -> FlatObject:
    """``K + O`` with connection ``[[nabla_can, theta], [0, nabla_can]]``, p = 2."""
    if ctx.p != 2:
        raise ParameterError("this construction is specific to p = 2")
    _require_g2(ctx)
    graded = tensor_line_higgs(sym_uniformizing(ctx, 1), LineClass.half_canonical(1))
    filt = KnownFiltration("p2", graded, True, True, True, UNIQUENESS_RULE)
    return make_flat(ctx, 2, graded.degree, 1, Provenance.P2_CONSTRUCTION, {"p": 2, "g": ctx.g},
                     (filt,), True, f"V_p2(g={ctx.g})")


def p2_uniformizing_twist(ctx: CurveContext) -> FlatObject | None:
    """Twist by ``(K^{-1/2}, nabla_can)`` when ``K^{1/2}`` is a Frobenius pullback (g odd)."""
    flat = build_p2_flat(ctx)
    if (ctx.g - 1) % 2:
        return None
    graded = sym_uniformizing(ctx, 1)
    filt = KnownFiltration("p2", graded, True, True, True, UNIQUENESS_RULE)
    return make_flat(ctx, 2, graded.degree, 1, Provenance.P2_CONSTRUCTION,
                     {"p": 2, "g": ctx.g, "twist": "K^(-1/2)"}, (filt,), True,
                     f"{flat.label} * (K^(-1/2), nabla_can)")


@dataclass(frozen=True)
class TensorCounterexample:
    context: CurveContext
    unknown_reason: str = ""
    e1: object = None
    e2: OpaqueHiggs | None = None
    product: OpaqueHiggs | None = None
    e_prime_grid: GradedHiggsBundle | None = None
    e_prime: GradedHiggsBundle | None = None
    pieces: tuple = ()
    verdicts: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)


def build_tensor_counterexample(ctx: CurveContext, assumptions: Assumptions = Assumptions()) -> TensorCounterexample:
    _require_g2(ctx)
    p = ctx.p
    if p % 2 == 1 and not assumptions.generic_curve:
        return TensorCounterexample(
            ctx, "p odd needs the generic-curve assumption for the two-periodic uniformizing flow")
    trace = []
    if p == 2:
        v1 = build_p2_flat(ctx)
        gr1 = grade(v1, "p2")
        e1 = OpaqueHiggs(ctx, 2, v1.degree / p, 1, "C(V_p2)", Stability.STABLE,
                         "C of the p=2 flat bundle", cartier_of=v1,
                         catalog={"catalog": "E1", "p": p, "g": ctx.g})
        twist = LineClass.half_canonical(1)
    else:
        e1 = tensor_line_higgs(sym_uniformizing(ctx, 1), ORDER_TWO_LINE)
        v1 = inverse_cartier(e1)
        gr1 = grade(v1, "hn")
        twist = LineClass.trivial()
    src = LineClass.half_canonical(1 - p)
    e2_bundle = frobenius_pushforward_line(ctx, src)
    e2 = OpaqueHiggs(ctx, p, e2_bundle.degree, 0, f"(F_*K^({1 - p}/2), 0)", Stability.STABLE,
                     SUN_PUSHFORWARD, pushforward_source=src,
                     catalog={"catalog": "E2", "p": p, "g": ctx.g})
    trace.append(_computed("deg F_*K^((1-p)/2) = 0", e2.degree == 0, degree=e2.degree))
    v2 = pushforward_pullback_flat(ctx, src)
    gr2 = grade(v2, "canonical")

    grid = tensor_higgs(gr2, gr1)
    big, small = clebsch_gordan_decompose(ctx, p)
    pieces = (tensor_line_higgs(big, twist), tensor_line_higgs(small, twist))
    e_prime = direct_sum(*pieces)
    key = lambda l: (l.kc_halves, l.twist_degree, l.terms)  # noqa: E731
    same_lines = sorted(grid.summands, key=key) == sorted(e_prime.summands, key=key)
    grid_jt = jordan_type(grid)
    trace += [
        _computed("E' grid and Sym^p + Sym^(p-2) pieces have the same summands", same_lines,
                  degrees=sorted(grid.degrees, reverse=True)),
        _computed("Jordan type of the E' grid is [p+1, p-1]", grid_jt == [p + 1, p - 1],
                  jordan_type=grid_jt),
        _computed("E' is polystable", polystable_check(e_prime)),
        _computed("exponent of E' is exactly p", nilpotency_exponent(grid) == p == nilpotency_exponent(e_prime),
                  exponent=nilpotency_exponent(e_prime)),
    ]
    if not trace_passes(trace):
        raise InternalInconsistency(f"tensor counterexample checks failed: {trace}")

    deg_prod = p * e1.degree + 2 * e2.degree
    flat = make_flat(ctx, 2 * p, p * deg_prod, 1, Provenance.TENSOR_PRODUCT, (v1, v2),
                     (KnownFiltration("tensor", e_prime, True, True, False,
                                      "computed: tensor of the gr-semistable filtration and the canonical filtration"),),
                     True, f"{v1.label} * {v2.label}")
    product = OpaqueHiggs(ctx, 2 * p, deg_prod, 1, "E1 * E2", Stability.STABLE, TENSOR_STABILITY_RULE,
                          cartier_of=flat, catalog={"catalog": "tensor_product", "p": p, "g": ctx.g})
    trace.append(_rule("(E_1,theta_1) (x) (E_2,0) is stable", TENSOR_STABILITY_RULE))
    trace.append(_rule("E_1 and E_2 have small rank", SMALL_RANK_RULE))
    verdicts = {
        "E1": strong_semistability_verdict(e1, assumptions),
        "E2": strong_semistability_verdict(e2, assumptions),
        "product": strong_semistability_verdict(product, assumptions),
    }
    return TensorCounterexample(ctx, "", e1, e2, product, grid, e_prime, pieces, verdicts, trace)


def tensor_counterexample_passes(t: TensorCounterexample) -> bool:
    if t.unknown_reason:
        return False
    v = t.verdicts
    return (
        v["E1"].status is StrongStatus.STRONGLY_SEMISTABLE
        and v["E2"].status is StrongStatus.STRONGLY_SEMISTABLE
        and v["product"].status is StrongStatus.NOT_STRONGLY_SEMISTABLE
        and v["product"].certificate_exponent == t.context.p
        and trace_passes(t.trace)
    )


# cohomology bookkeeping -----------------------------------------------------------

@dataclass(frozen=True)
class ExtensionLedger:
    g: int
    bound_A: Fraction
    h0_end_twisted: Fraction
    strict: bool
    boundary: bool


def extension_example_ledger(ctx: CurveContext) -> ExtensionLedger:
    """Dimension count for a nontrivial extension ``V`` of ``O`` by ``O``.

    ``h0(A) <= h0(K) + h0(V (x) K) = g + (2g - 1)`` against
    ``h0(End V (x) K) = h1(End V) = 4g - 2``.
    """
    if ctx.g < 1:
        raise ParameterError("needs genus >= 1")
    h0_k = serre_ledger(ctx, 1, 0, 1)
    # V is self-dual with h0 = 1, so h0(V (x) K) = h1(V)
    h0_vk = serre_ledger(ctx, 2, 0, 1)
    h0_endk = serre_ledger(ctx, 4, 0, 2)
    bound = h0_k + h0_vk
    if euler_characteristic(ctx, 1, 2 * ctx.g - 2) != ctx.g - 1:
        raise InternalInconsistency("chi(K) != g - 1")
    return ExtensionLedger(ctx.g, bound, h0_endk, h0_endk > bound, h0_endk == bound)
