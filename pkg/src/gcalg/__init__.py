"""Exact computer algebra for twisted cohomology and generalized complex
linear algebra on finite invariant models, with equivariant (Cartan-style)
complexes and exact push-forward densities."""

from .scalars import Q, Scalar
from .forms import (
    Form,
    canonical_pairing,
    clifford,
    contract,
    contract_vector,
    exp_two_form,
    integrate,
    mukai,
    reversal,
    wedge,
)
from .gcmaps import (
    AnnihilatorReport,
    GCMap,
    IsotropicSubspace,
    KahlerReport,
    UGrading,
    ValidationReport,
    annihilator,
    b_transform,
    complex_structure,
    i_eigenspace,
    kahler_check,
    pure_spinor,
    symplectic_map,
    type_of,
    uk_grading,
    validate,
)
from .models import (
    BettiPair,
    DdbarReport,
    IntegrabilityError,
    Model,
    betti_numbers,
    d,
    d_twisted,
    ddbar_lemma_check,
    del_delbar_split,
    delbar_closed_subcomplex_betti,
    exp_lambda_transport,
    heisenberg3,
    heisenberg5,
    kodaira_thurston,
    lie_derivative,
    module_wedge,
    reversal_clifford_pair,
    sigma_twist,
    torus,
    twisted_cohomology,
)
from .cartan import (
    Connection,
    EqForm,
    EquivariantRanks,
    ExtensionError,
    HamiltonianReport,
    ModelMorphism,
    TorusAction,
    basic_twist,
    canonical_extension,
    cartan_map,
    d_equivariant,
    d_equivariant_twisted,
    descend_form,
    equivariant_cohomology,
    gamma_from_connection,
    generalized_d,
    hamiltonian_check,
    kirwan_map,
    moment_conjugation_residual,
    moment_operator,
    quotient_model,
    stable_equivariant_ranks,
    StableRanks,
    wedge_eq,
)
from .gcy import (
    DHResult,
    GCYError,
    GCYFamily,
    GCYStructure,
    LefschetzReport,
    dh_density,
    dh_normalization,
    gcy_check,
    lefschetz_check,
    quotient_family,
    volume_form,
)
from .modelfile import ModelFile, ModelFileError, ParseError, parse_model

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
