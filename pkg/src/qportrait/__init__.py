"""Portrait maps of probability vectors and qudit density matrices, their
entropic inequalities, and seeded campaigns that check them numerically."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .linalg import (
    DEFAULT_TOL,
    DensityMatrix,
    EigenDecomposition,
    Tolerances,
    UnitaryMatrix,
    eig_hermitian,
    embed_qudit,
    matrix_function,
    partial_trace,
    read_matrix_file,
    validate_density,
    write_matrix_file,
)
from .portrait import (
    CoarseGrainMap,
    MergeMap,
    ProbabilityVector,
    apply_coarse_grain,
    merge_map_matrix,
    portrait_density,
    qutrit_coarse_grain_maps,
    qutrit_standard_maps,
)
from .entropy import (
    INFINITE,
    InequalityMargin,
    classical_portrait_margin,
    quantum_information,
    quantum_relative_entropy,
    relative_entropy_margin,
    renyi,
    shannon,
    ssa_margin,
    subadditivity_margin,
    tsallis,
    von_neumann,
)
from .sampler import BatchRng, Rng, SeedSpec
from .tomography import (
    OptimizerConfig,
    UnitaryParams,
    build_unitary,
    decompose_unitary,
    min_tomographic_entropy,
    tomogram,
    tomogram_spectral,
)
from .campaign import CampaignConfig, CampaignReport, read_report, replay_trial, run_campaign, write_report
