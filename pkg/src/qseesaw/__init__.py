"""qseesaw: cavity-QED self-organization toolkit.

Layers, bottom to top:

* :mod:`qseesaw.hilbert`     tensor-product spaces, states, sparse operators
* :mod:`qseesaw.models`      Hamiltonian and jump-operator builders
* :mod:`qseesaw.dynamics`    Schrodinger / mean-field / Lindblad / MCWF engines
* :mod:`qseesaw.observables` negativity, field, site and motional statistics
* :mod:`qseesaw.scenarios`   config files and built-in figure scenarios
* :mod:`qseesaw.runner`      scenario execution and CSV/meta output
"""

from .hilbert import (
    DensityMatrix,
    HilbertSpace,
    SparseOperator,
    StateVector,
    SpaceMismatchError,
    TruncationError,
    coherent_state,
    expectation_value,
    fock_state,
    hermitian_spectrum,
    partial_trace,
    partial_transpose,
    schmidt_coefficients,
    tensor_product_op,
)
from .models import (
    FullSpaceParams,
    SeesawParams,
    TwoSiteParams,
    WannierData,
    build_fullspace_hamiltonian,
    build_seesaw_hamiltonian,
    build_twosite_hamiltonian,
    classify_seesaw_stability,
    compute_wannier_couplings,
    eliminated_field_operator,
)
from .dynamics import (
    EnsembleResult,
    IntegrationError,
    IntegratorConfig,
    MeanFieldState,
    TrajectoryRecord,
    derive_trajectory_seed,
    integrate_lindblad,
    integrate_meanfield,
    propagate_schrodinger,
    run_mcwf_ensemble,
    run_mcwf_trajectory,
)
from .observables import (
    Observable,
    ObservableSet,
    field_statistics,
    negativity,
    site_statistics,
    spatial_statistics,
)

__version__ = "0.1.0"
