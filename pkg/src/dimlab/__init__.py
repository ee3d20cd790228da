"""Finite-scale dimension estimates for point clouds and atomic measures."""

from .errors import CapacityError, ConfigurationError, ContractError, DimlabError, InputError
from .generators import (
    BMCarpetSpec,
    IFSSpec,
    Similitude,
    bedford_mcmullen_cloud,
    cantor_cloud,
    corner_fixture,
    inhomogeneous_cloud,
    self_similar_cloud,
    sequence_fixture,
    similitude,
    similitude_dimension,
    uniform_grid_cloud,
    uniform_measure,
)
from .kernels import BACKEND
from .measure import (
    DiscreteMeasure,
    ball_mass,
    ball_mass_extrema,
    ball_masses,
    doubling_sweep,
    load_measure,
    mix_measures,
    witness_measure,
)
from .measure_dims import (
    SpectrumCurve,
    assouad_dim_measure,
    assouad_spectrum_measure,
    density_dim,
    frostman_dim,
    lower_spectrum_measure,
    lq_spectrum,
    minkowski_dims_measure,
    spectrum_curve,
)
from .metric import (
    FixtureMeta,
    GridIndex,
    Packing,
    PointCloud,
    exact_packing_number,
    greedy_maximal_packing,
    load_cloud,
    packing_count,
    range_query,
)
from .presets import AnalysisConfig, Fixture, default_config
from .scaling import LogLogTable, MeshWarning, ScaleGrid, SlopeReport, slope_envelope
from .set_dims import (
    DimensionEstimate,
    assouad_dim_set,
    assouad_spectrum_set,
    lower_spectrum_set,
    minkowski_dims_set,
)
from .verify import Check, Roundtrip, VerifyReport, verify_suite, witness_roundtrip

__version__ = "0.1.0"
