"""Exact-arithmetic library for structured subsets of the rationals:
symbolic atoms, derived-set operators, standardization certificates, the
classical threshold families, and a brute-force enumeration oracle."""

from .setfam import (
    DEFAULT_MEMBER_CAP,
    FiniteAtom,
    In,
    Monomial,
    Out,
    Parameter,
    PolyAtom,
    Rational,
    SetFamily,
    Unknown,
    UnknownResult,
    family,
    finite,
    finite_family,
    member,
    normalize,
    poly,
    rat,
)
from .derived import (
    Certificate,
    No,
    Witness,
    certify,
    closure,
    derived_set,
    is_acc,
    is_dcc,
    min_positive,
    standardized_near,
)
from .setops import (
    clip,
    dgamma,
    gamma_plus,
    hyperstandard,
    mld1,
    n_zero,
    quotient_by_n,
    scale,
    standard_set,
    sum_families,
    translate,
    union,
)
from .geomsets import (
    Generator,
    ct2,
    ct3_branch,
    dc_generator,
    diag_lct,
    gamma16,
    ht1,
    ht2,
    ht2_branch,
    kmoduli_walls,
    mld2_branch,
    mld3_terminal_branch,
)
from .oracle import (
    Cluster,
    CrossCheckReport,
    FitReport,
    Sample,
    cross_check_derived,
    detect_accumulation,
    enumerate_family,
    fit_standardized,
)

__all__ = [name for name in dir() if not name.startswith("_")]
