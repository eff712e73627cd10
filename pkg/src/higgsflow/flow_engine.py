"""Higgs-de Rham flow over the formal model.

Flat bundles are opaque: a :class:`FlatObject` knows its rank, degree,
p-curvature exponent, where it came from, and the Griffiths-transverse
filtrations the catalog can name for it.  The inverse Cartier transform is
bookkeeping (rank kept, degree times p, exponent kept) and filtration choice
is a catalog lookup; when no rule applies the answer is :class:`Unknown`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence, Union

from .errors import ExponentRangeError, InternalInconsistency, ParameterError, UnstableInputError
from .frobenius import (
    CANONICAL_FILTRATION,
    canonical_filtration_graded,
    frobenius_pullback,
    frobenius_pushforward_line,
    pullback_line,
)
from .higgs_core import (
    GradedHiggsBundle,
    Stability,
    direct_sum_all,
    nilpotency_exponent,
    polystable_check,
    stability_verdict,
    sym_uniformizing,
    tensor_line_higgs,
)
from .sheaf_algebra import CurveContext, LineClass, is_semistable_sum

SMALL_RANK_RULE = (
    "Lan-Sheng-Yang-Zuo, Langer: semistable nilpotent Higgs bundles of rank <= p "
    "and exponent <= p-1 are strongly semistable"
)
ELLIPTIC_RULE = (
    "genus <= 1: the underlying bundle of a nabla-semistable flat bundle is semistable, "
    "so the trivial filtration is gr-semistable at every step"
)
MIN_EXPONENT_RULE = (
    "graded objects of gr-semistable filtrations are S-equivalent; a gr-polystable one "
    "has the minimal nilpotency exponent"
)
UNIQUENESS_RULE = "a gr-semistable filtration whose graded object is stable is unique"
UNIFORMIZING_RULE = (
    "p odd, generic curve: Gr_HN C^{-1}(E_unif) = E_unif (x) (L,0) with L torsion of order two"
)
INVERSE_CARTIER_RULE = (
    "Ogus-Vologodsky inverse Cartier transform on exponent <= p-1: "
    "rank kept, degree multiplied by p, exponent kept"
)
PULLBACK_COMPUTED = "computed: F^* of a sum of equal-degree lines is a sum of equal-degree lines"

# the order-two line bundle produced by the two-periodic uniformizing flow
ORDER_TWO_LINE = LineClass.symbol("L", 0, torsion=2)


class Provenance(str, enum.Enum):
    INVERSE_CARTIER_OF = "InverseCartierOf"
    CANONICAL_CONNECTION_ON = "CanonicalConnectionOn"
    PUSHFORWARD_PULLBACK = "PushforwardPullback"
    VL = "Vl"
    UNIFORMIZING = "Uniformizing"
    P2_CONSTRUCTION = "P2Construction"
    DIRECT_SUM = "DirectSum"
    TENSOR_PRODUCT = "TensorProduct"


@dataclass(frozen=True)
class Assumptions:
    generic_curve: bool = False

    def as_dict(self) -> dict:
        return {"generic_curve": self.generic_curve}


@dataclass(frozen=True, eq=False)
class OpaqueHiggs:
    """A Higgs bundle known only through invariants and its flat partner.

    ``cartier_of`` is set when the object is defined as ``C(V)``;
    ``pushforward_source`` marks ``(F_* L, 0)``.
    """

    context: CurveContext
    rank: int
    degree: Fraction
    exponent: int
    label: str
    stability: Stability = Stability.STABLE
    stability_source: str = ""
    cartier_of: "FlatObject | None" = None
    pushforward_source: LineClass | None = None
    catalog: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "degree", Fraction(self.degree))
        if self.stability is Stability.UNSTABLE:
            raise ParameterError("opaque Higgs objects are only built when semistable")

    @property
    def slope(self) -> Fraction:
        return self.degree / self.rank

    @property
    def has_zero_field(self) -> bool:
        return self.exponent == 0


HiggsTerm = Union[GradedHiggsBundle, OpaqueHiggs]


def term_exponent(t: HiggsTerm) -> int:
    if isinstance(t, OpaqueHiggs):
        return t.exponent
    return nilpotency_exponent(t)


def term_semistable(t: HiggsTerm) -> bool:
    if isinstance(t, OpaqueHiggs):
        return True
    return stability_verdict(t).semistable


def term_polystable(t: HiggsTerm) -> bool:
    if isinstance(t, OpaqueHiggs):
        return t.stability is Stability.STABLE
    return polystable_check(t)


@dataclass(frozen=True)
class KnownFiltration:
    fid: str
    graded: HiggsTerm
    gr_semistable: bool
    gr_polystable: bool
    unique: bool
    source: str
    requires_generic: bool = False


@dataclass(frozen=True, eq=False)
class FlatObject:
    context: CurveContext
    rank: int
    degree: Fraction
    p_curvature_exponent: int
    provenance: Provenance
    payload: Any = None
    known_filtrations: tuple[KnownFiltration, ...] = ()
    semistable: bool = True
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "degree", Fraction(self.degree))
        p = self.context.p
        if not 0 <= self.p_curvature_exponent <= p - 1:
            raise ExponentRangeError(
                f"p-curvature exponent {self.p_curvature_exponent} outside 0..{p - 1}"
            )
        for kf in self.known_filtrations:
            if kf.graded.rank != self.rank or kf.graded.degree != self.degree:
                raise InternalInconsistency(
                    f"filtration {kf.fid!r} graded has rank/degree "
                    f"{kf.graded.rank}/{kf.graded.degree}, flat has {self.rank}/{self.degree}"
                )

    @property
    def slope(self) -> Fraction:
        return self.degree / self.rank

    def filtration(self, fid: str) -> KnownFiltration:
        for kf in self.known_filtrations:
            if kf.fid == fid:
                return kf
        raise KeyError(f"no filtration {fid!r} registered on {self.label or self.provenance.value}")


def make_flat(
    ctx: CurveContext,
    rank: int,
    degree,
    exponent: int,
    provenance: Provenance,
    payload=None,
    filtrations: Sequence[KnownFiltration] = (),
    semistable: bool = True,
    label: str = "",
) -> FlatObject:
    """Build a flat object, adding the genus <= 1 trivial filtration when it applies."""
    filts = list(filtrations)
    if ctx.g <= 1 and semistable and not any(f.fid == "trivial" for f in filts):
        graded = OpaqueHiggs(
            ctx, rank, Fraction(degree), 0, f"Gr_triv({label or provenance.value})",
            Stability.STRICTLY_SEMISTABLE, ELLIPTIC_RULE,
        )
        filts.append(KnownFiltration("trivial", graded, True, False, False, ELLIPTIC_RULE))
    return FlatObject(ctx, rank, Fraction(degree), exponent, provenance, payload,
                      tuple(filts), semistable, label)


# inverse Cartier ------------------------------------------------------------

def match_uniformizing(h: GradedHiggsBundle) -> LineClass | None:
    """Return ``M`` when ``h`` is ``E_unif (x) (M, 0)``, else ``None``."""
    if h.rank != 2 or len(h.arrows) != 1 or h.is_grid:
        return None
    a = h.arrows[0]
    if (a.source, a.target) != (0, 1) or not h.arrow_is_iso(a):
        return None
    return h.summands[1] * LineClass.half_canonical(1)


def canonical_connection_flat(term: HiggsTerm, semistable: bool = True) -> FlatObject:
    """``(F^* E, nabla_can)`` for a zero-field term ``(E, 0)``."""
    ctx = term.context
    filts = []
    if isinstance(term, GradedHiggsBundle) and is_semistable_sum(term.base):
        filts.append(KnownFiltration("trivial", frobenius_pullback(term), True, True, False,
                                     PULLBACK_COMPUTED))
    label = getattr(term, "label", "") or "E"
    return make_flat(ctx, term.rank, ctx.p * term.degree, 0, Provenance.CANONICAL_CONNECTION_ON,
                     term, filts, semistable, f"(F^*{label}, nabla_can)")


def pushforward_pullback_flat(ctx: CurveContext, l: LineClass) -> FlatObject:
    """``(F^* F_* l, nabla_can)`` with its canonical filtration."""
    e = frobenius_pushforward_line(ctx, l)
    filts = []
    if ctx.g >= 2:
        graded = canonical_filtration_graded(ctx, l)
        stable = stability_verdict(graded).status is Stability.STABLE
        filts.append(KnownFiltration("canonical", graded, stable, stable, stable,
                                     f"{CANONICAL_FILTRATION}; {UNIQUENESS_RULE}"))
    return make_flat(ctx, ctx.p, ctx.p * e.degree, 0, Provenance.PUSHFORWARD_PULLBACK, l, filts,
                     True, f"(F^*F_*{l.render()}, nabla_can)")


def uniformizing_flat(ctx: CurveContext, twist: LineClass, semistable: bool = True) -> FlatObject:
    """``C^{-1}(E_unif (x) (M, 0)) = C^{-1}(E_unif) (x) (F^* M, nabla_can)``."""
    e_unif = sym_uniformizing(ctx, 1)
    filts = []
    if ctx.p % 2 == 1:
        graded = tensor_line_higgs(e_unif, ORDER_TWO_LINE * pullback_line(ctx, twist))
        filts.append(KnownFiltration("hn", graded, True, True, True,
                                     f"{UNIFORMIZING_RULE}; {UNIQUENESS_RULE}", requires_generic=True))
    return make_flat(ctx, 2, 2 * ctx.p * twist.degree(ctx), 1, Provenance.UNIFORMIZING, twist,
                     filts, semistable, f"C^-1(E_unif*{twist.render()})")


def inverse_cartier(h: HiggsTerm, semistable: bool = True) -> FlatObject:
    ctx = h.context
    e = term_exponent(h)
    if e > ctx.p - 1:
        raise ExponentRangeError(
            f"exponent {e} > p-1 = {ctx.p - 1}: outside the inverse Cartier equivalence"
        )
    if isinstance(h, OpaqueHiggs):
        if h.cartier_of is not None:
            return h.cartier_of
        if h.pushforward_source is not None:
            return pushforward_pullback_flat(ctx, h.pushforward_source)
    if e == 0:
        return canonical_connection_flat(h, semistable)
    if isinstance(h, GradedHiggsBundle):
        twist = match_uniformizing(h)
        if twist is not None:
            return uniformizing_flat(ctx, twist, semistable)
    return make_flat(ctx, h.rank, ctx.p * h.degree, e, Provenance.INVERSE_CARTIER_OF, h, (),
                     semistable, "C^-1(E)")


def direct_sum_flat(parts: Sequence[FlatObject], assumptions: Assumptions = Assumptions()) -> FlatObject:
    """Direct sum with the componentwise filtration when every part has an explicit choice."""
    ctx = parts[0].context
    if any(f.context != ctx for f in parts):
        raise ParameterError("direct sum of flat objects over different curves")
    rank = sum(f.rank for f in parts)
    degree = sum((f.degree for f in parts), Fraction(0))
    filts = []
    choices = [choose_gr_semistable(f, assumptions) for f in parts]
    if all(isinstance(c, FiltrationChoice) and isinstance(c.graded, GradedHiggsBundle)
           for c in choices):
        graded = direct_sum_all([c.graded for c in choices])
        ss = stability_verdict(graded).semistable
        poly = ss and polystable_check(graded)
        filts.append(KnownFiltration("componentwise", graded, ss, poly, False,
                                     "computed: direct sum of the parts' filtrations"))
    return make_flat(ctx, rank, degree, max(f.p_curvature_exponent for f in parts),
                     Provenance.DIRECT_SUM, tuple(parts), filts,
                     all(f.semistable for f in parts),
                     " + ".join(f.label or f.provenance.value for f in parts))


# filtration choice ---------------------------------------------------------------

@dataclass(frozen=True)
class Unknown:
    reason: str

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class FiltrationChoice:
    filtration_id: str
    graded: HiggsTerm
    unique: bool
    polystable: bool
    source: str


_CATALOG = {
    Provenance.CANONICAL_CONNECTION_ON: "trivial",
    Provenance.PUSHFORWARD_PULLBACK: "canonical",
    Provenance.VL: "V_ell",
    Provenance.UNIFORMIZING: "hn",
    Provenance.P2_CONSTRUCTION: "p2",
    Provenance.DIRECT_SUM: "componentwise",
    Provenance.TENSOR_PRODUCT: "tensor",
}


def grade(f: FlatObject, filtration_id: str) -> HiggsTerm:
    return f.filtration(filtration_id).graded


def choose_gr_semistable(f: FlatObject, assumptions: Assumptions = Assumptions()) -> FiltrationChoice | Unknown:
    """Catalog lookup of a gr-semistable filtration on ``f``."""
    fid = "trivial" if f.context.g <= 1 else _CATALOG.get(f.provenance)
    if fid is None:
        return Unknown(f"no catalog rule names a gr-semistable filtration on {f.provenance.value}")
    try:
        kf = f.filtration(fid)
    except KeyError:
        return Unknown(f"filtration {fid!r} is not available on {f.label or f.provenance.value}")
    if kf.requires_generic and not assumptions.generic_curve:
        return Unknown(f"filtration {fid!r} needs the generic-curve assumption")
    if not kf.gr_semistable:
        return Unknown(f"filtration {fid!r} is not gr-semistable")
    return FiltrationChoice(fid, kf.graded, kf.unique, kf.gr_polystable, kf.source)


def minimal_gr_exponent(f: FlatObject, assumptions: Assumptions = Assumptions()) -> tuple[int, KnownFiltration] | Unknown:
    """Exponent of a gr-polystable graded object: a lower bound over all gr-semistable choices."""
    found = []
    for kf in f.known_filtrations:
        if not (kf.gr_semistable and kf.gr_polystable):
            continue
        if kf.requires_generic and not assumptions.generic_curve:
            continue
        if not term_polystable(kf.graded):
            raise InternalInconsistency(f"filtration {kf.fid!r} flagged gr-polystable but is not")
        found.append((term_exponent(kf.graded), kf))
    if not found:
        return Unknown("no gr-polystable filtration is known")
    exps = {e for e, _ in found}
    if len(exps) > 1:
        raise InternalInconsistency(f"gr-polystable filtrations disagree on exponent: {sorted(exps)}")
    return found[0]


# flows ------------------------------------------------------------------------------

class FlowStatus(str, enum.Enum):
    COMPLETED = "completed"
    BLOCKED = "blocked"


@dataclass(frozen=True)
class FlowStep:
    index: int
    higgs: HiggsTerm
    flat: FlatObject
    filtration_id: str | None
    graded: HiggsTerm | None
    semistable: bool | None
    exponent_ok: bool | None
    source: str = ""


@dataclass(frozen=True)
class FlowTrace:
    context: CurveContext
    assumptions: Assumptions
    initial: HiggsTerm
    steps: tuple[FlowStep, ...]
    status: FlowStatus
    reason: str = ""
    certificate: GradedHiggsBundle | None = None
    returns_to_start: tuple[int, ...] = ()

    @property
    def blocked(self) -> bool:
        return self.status is FlowStatus.BLOCKED

    @property
    def blocked_at(self) -> int | None:
        return self.steps[-1].index if self.blocked else None


def _check_start(h: HiggsTerm) -> None:
    if not term_semistable(h):
        raise UnstableInputError("flows start from semistable Higgs bundles")
    e = term_exponent(h)
    if e > h.context.p - 1:
        raise ExponentRangeError(f"initial exponent {e} exceeds p-1 = {h.context.p - 1}")


def _same_term(a: HiggsTerm, b: HiggsTerm) -> bool:
    return isinstance(a, GradedHiggsBundle) and isinstance(b, GradedHiggsBundle) and a == b


def flow_step(term: HiggsTerm, assumptions: Assumptions = Assumptions(), index: int = 1) -> FlowStep:
    flat = inverse_cartier(term, semistable=True)
    choice = choose_gr_semistable(flat, assumptions)
    if isinstance(choice, Unknown):
        return FlowStep(index, term, flat, None, None, None, None, choice.reason)
    graded = choice.graded
    ok_exp = term_exponent(graded) <= term.context.p - 1
    return FlowStep(index, term, flat, choice.filtration_id, graded,
                    term_semistable(graded), ok_exp, choice.source)


def run_flow(h: HiggsTerm, n_steps: int, assumptions: Assumptions = Assumptions()) -> FlowTrace:
    """Run ``n_steps`` of ``Gr o C^{-1}``, stopping at the first step that cannot continue."""
    _check_start(h)
    ctx = h.context
    steps = []
    returns = []
    term = h
    status, reason, cert = FlowStatus.COMPLETED, "", None
    for i in range(1, n_steps + 1):
        step = flow_step(term, assumptions, i)
        steps.append(step)
        if step.graded is None:
            status, reason = FlowStatus.BLOCKED, step.source
            break
        if not (step.semistable and step.exponent_ok):
            status = FlowStatus.BLOCKED
            e = term_exponent(step.graded)
            reason = "graded object is not semistable" if not step.semistable else (
                f"graded object has exponent {e} > p-1 = {ctx.p - 1}")
            choice = choose_gr_semistable(step.flat, assumptions)
            if (isinstance(step.graded, GradedHiggsBundle) and choice.polystable
                    and term_polystable(step.graded) and e > ctx.p - 1):
                cert = step.graded
            break
        term = step.graded
        if _same_term(term, h):
            returns.append(i)
    return FlowTrace(ctx, assumptions, h, tuple(steps), status, reason, cert, tuple(returns))


# strong semistability ----------------------------------------------------------------

class StrongStatus(str, enum.Enum):
    STRONGLY_SEMISTABLE = "StronglySemistable"
    NOT_STRONGLY_SEMISTABLE = "NotStronglySemistable"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class StrongVerdict:
    status: StrongStatus
    reason: str
    source: str = ""
    certificate: GradedHiggsBundle | None = None

    def __post_init__(self):
        if self.status is StrongStatus.NOT_STRONGLY_SEMISTABLE:
            c = self.certificate
            if c is None:
                raise InternalInconsistency("a negative verdict needs a certificate")
            if not polystable_check(c) or nilpotency_exponent(c) <= c.context.p - 1:
                raise InternalInconsistency("certificate must be polystable of exponent > p-1")
        elif self.certificate is not None:
            raise InternalInconsistency("only negative verdicts carry certificates")

    @property
    def certificate_exponent(self) -> int | None:
        return None if self.certificate is None else nilpotency_exponent(self.certificate)


def strong_semistability_verdict(h: HiggsTerm, assumptions: Assumptions = Assumptions()) -> StrongVerdict:
    _check_start(h)
    ctx = h.context
    if ctx.g <= 1:
        return StrongVerdict(StrongStatus.STRONGLY_SEMISTABLE, f"genus {ctx.g} <= 1", ELLIPTIC_RULE)
    if h.rank <= ctx.p:
        return StrongVerdict(StrongStatus.STRONGLY_SEMISTABLE,
                             f"small rank {h.rank} <= p = {ctx.p}", SMALL_RANK_RULE)
    flat = inverse_cartier(h)
    found = minimal_gr_exponent(flat, assumptions)
    if not isinstance(found, Unknown):
        e, kf = found
        if e > ctx.p - 1 and isinstance(kf.graded, GradedHiggsBundle):
            return StrongVerdict(
                StrongStatus.NOT_STRONGLY_SEMISTABLE,
                f"filtration {kf.fid!r} on C^-1 is gr-polystable with exponent {e} > p-1 = {ctx.p - 1}",
                MIN_EXPONENT_RULE, kf.graded)
    if isinstance(h, GradedHiggsBundle) and h.has_zero_field and is_semistable_sum(h.base):
        return StrongVerdict(StrongStatus.STRONGLY_SEMISTABLE,
                             "zero field on a sum of equal-degree lines; every flow term has the same shape",
                             PULLBACK_COMPUTED)
    why = found.reason if isinstance(found, Unknown) else "no rule decides this object"
    return StrongVerdict(StrongStatus.UNKNOWN, why)
