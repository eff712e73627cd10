"""Exact model of nilpotent graded Higgs bundles on curves in characteristic p.

Formal line bundles, chain-shaped Higgs fields and their stability, Frobenius
degree bookkeeping, the Higgs-de Rham flow over a catalog of known
filtrations, and builders for the rank p + 1 and tensor-product examples of
Higgs bundles that are semistable but not strongly semistable.
"""
from .constructions import (
    VlParameters,
    build_big_rank,
    build_chain_F,
    build_El,
    build_p2_flat,
    build_tensor_counterexample,
    build_uniformizing,
    build_Vl,
    extension_example_ledger,
    reduced_expression,
    verify_Vl_stability,
)
from .errors import (
    BoundsError,
    ExponentRangeError,
    GridShapeError,
    HiggsFlowError,
    HiggsValidationError,
    InternalInconsistency,
    NotDescendedError,
    OutOfModelError,
    ParameterError,
    UnstableInputError,
)
from .flow_engine import (
    Assumptions,
    FlatObject,
    OpaqueHiggs,
    StrongStatus,
    StrongVerdict,
    Unknown,
    choose_gr_semistable,
    inverse_cartier,
    minimal_gr_exponent,
    run_flow,
    strong_semistability_verdict,
)
from .frobenius import (
    canonical_filtration_graded,
    cartier_descent_degree,
    frobenius_pullback,
    frobenius_pushforward_line,
    hn_equals_canonical,
    sun_bound,
)
from .higgs_core import (
    GradedHiggsBundle,
    HiggsArrow,
    Stability,
    clebsch_gordan_decompose,
    direct_sum,
    jordan_type,
    kernel_filtration,
    max_destabilizing_subset,
    nilpotency_exponent,
    polystable_check,
    s_equivalence_representative,
    stability_verdict,
    sym_uniformizing,
    tensor_higgs,
    validate_higgs,
)
from .sheaf_algebra import BundleSum, CurveContext, LineClass, euler_characteristic, serre_ledger

__version__ = "0.1.0"

__all__ = [
    "Assumptions",
    "BoundsError",
    "build_big_rank",
    "build_chain_F",
    "build_El",
    "build_p2_flat",
    "build_tensor_counterexample",
    "build_uniformizing",
    "build_Vl",
    "BundleSum",
    "canonical_filtration_graded",
    "cartier_descent_degree",
    "choose_gr_semistable",
    "clebsch_gordan_decompose",
    "CurveContext",
    "direct_sum",
    "euler_characteristic",
    "ExponentRangeError",
    "extension_example_ledger",
    "FlatObject",
    "frobenius_pullback",
    "frobenius_pushforward_line",
    "GradedHiggsBundle",
    "GridShapeError",
    "HiggsArrow",
    "HiggsFlowError",
    "HiggsValidationError",
    "hn_equals_canonical",
    "InternalInconsistency",
    "inverse_cartier",
    "jordan_type",
    "kernel_filtration",
    "LineClass",
    "max_destabilizing_subset",
    "minimal_gr_exponent",
    "nilpotency_exponent",
    "NotDescendedError",
    "OpaqueHiggs",
    "OutOfModelError",
    "ParameterError",
    "polystable_check",
    "reduced_expression",
    "run_flow",
    "s_equivalence_representative",
    "serre_ledger",
    "Stability",
    "stability_verdict",
    "strong_semistability_verdict",
    "StrongStatus",
    "StrongVerdict",
    "sun_bound",
    "sym_uniformizing",
    "tensor_higgs",
    "Unknown",
    "UnstableInputError",
    "validate_higgs",
    "verify_Vl_stability",
    "VlParameters",
]
