"""Finite universal-algebra workbench.

Computes congruence-theoretic invariants of finite algebras given by
operation tables: congruence lattices, centers and upper central series,
Mal'tsev terms, commutator-word catalogs, the congruence formulas Phi/Psi,
and exhaustive verification of definable principal subcongruences over
desk-scale SI catalogs.
"""

from .algebra import (
    FiniteAlgebra,
    dumps,
    load,
    loads,
    power,
    quotient,
    rank_tuple,
    restrict,
    save,
    subuniverse_closure,
    unrank_tuple,
)
from .catalog import CatalogEntry, enumerate_si, is_isomorphic, write_manifest
from .centrality import (
    TermConditionInstance,
    TermConditionKind,
    UpperCentralSeries,
    center,
    central_pair_test,
    is_abelian_congruence,
    is_central,
    nilpotence_class,
    upper_central_series,
)
from .congruence import (
    SIWitness,
    UnaryPolynomialWitness,
    compose,
    congruence_lattice,
    is_congruence,
    join,
    meet,
    membership_witness,
    permute_check,
    polynomial_image_pairs,
    principal_congruence,
    reachable_pairs,
    si_check,
    uniformity_check,
)
from .corpus import CORPUS_NAMES, NILPOTENT_CORPUS, corpus_path, load_corpus
from .errors import DEFAULT_BUDGET, AlgebraFormatError, BudgetError, VerificationError
from .factorization import Factorization, direct_factorization, is_prime_power
from .formulas import (
    CommutatorDecomposition,
    DescentChain,
    DescentFailure,
    DpscInstance,
    DpscReport,
    FirstOrderRendering,
    PhiFormula,
    PhiVerdict,
    PsiConfig,
    PsiSearchFailure,
    build_phi,
    decompose_commutator,
    default_psi_config,
    eval_phi,
    phi_defines_check,
    phi_relation,
    psi_search,
    render_theta,
    theta_semantic_check,
    ucs_descent,
    verify_dpsc,
)
from .free_terms import (
    AbsorbingCatalog,
    MaltsevResult,
    MaltsevWitness,
    MBoundResult,
    SubpowerCatalog,
    VarietyBounds,
    absorbing_catalog,
    binary_term_catalog,
    empirical_M,
    find_maltsev,
    generate_free,
    variety_bounds,
)
from .partition import Partition
from .terms import (
    App,
    Term,
    Var,
    eval_term,
    identity_holds,
    parse_term,
    render_term,
    substitute,
    term_key,
    term_stream,
    term_table,
    term_vars,
)

__version__ = "0.1.0"
