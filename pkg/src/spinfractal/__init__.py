"""spinfractal: information-distance geometry of spin chains and rings.

Builds single-excitation Hamiltonians, bounds excitation-transfer
probabilities from spectral projectors, maps the bound to a distance-weighted
graph, and quantifies its mono-/multi-fractal structure by greedy box
covering, mass exponents, generalized Hurst exponents, singularity spectra
and a thermodynamic specific heat.
"""

__version__ = "0.1.0"

from .errors import (
    DegenerateInputError,
    NumericError,
    ResultFormatError,
    SchemaVersionError,
    ScalingRangeError,
    SpecError,
    SpinFractalError,
)
from .spin_network import Bias, Hamiltonian, NetworkSpec, build_network, engineered_coupling
from .itf_metric import (
    DistanceMatrix,
    SpectralDecomposition,
    distance_matrix,
    evolve_probability,
    identify_zero_pairs,
    itf_probability,
    spectral_decompose,
)
from .fixtures import binomial_cascade_matrix, binomial_cascade_tau, lattice_distance_matrix
from .box_cover import (
    BoxCovering,
    BoxMeasures,
    RadiusGrid,
    ball,
    box_measures,
    exact_min_cover,
    greedy_cover,
    kernel_backend,
    radius_grid,
)
from .multifractal import (
    MfaResult,
    PartitionTable,
    QGrid,
    fit_mass_exponents,
    generalized_dimensions,
    hurst_exponents,
    legendre_spectrum,
    partition_function,
    specific_heat,
)
from .pipeline import (
    AnalysisOptions,
    SweepEntry,
    SweepSpec,
    analyze_distance_matrix,
    analyze_network,
    preset_names,
    preset_sweep,
    read_result,
    reanalyze,
    run_sweep,
    write_result,
)

__all__ = [
    "AnalysisOptions",
    "Bias",
    "BoxCovering",
    "BoxMeasures",
    "DegenerateInputError",
    "DistanceMatrix",
    "Hamiltonian",
    "MfaResult",
    "NetworkSpec",
    "NumericError",
    "PartitionTable",
    "QGrid",
    "RadiusGrid",
    "ResultFormatError",
    "SchemaVersionError",
    "ScalingRangeError",
    "SpecError",
    "SpectralDecomposition",
    "SpinFractalError",
    "SweepEntry",
    "SweepSpec",
    "analyze_distance_matrix",
    "analyze_network",
    "ball",
    "binomial_cascade_matrix",
    "binomial_cascade_tau",
    "box_measures",
    "build_network",
    "distance_matrix",
    "engineered_coupling",
    "evolve_probability",
    "exact_min_cover",
    "fit_mass_exponents",
    "generalized_dimensions",
    "greedy_cover",
    "hurst_exponents",
    "identify_zero_pairs",
    "itf_probability",
    "kernel_backend",
    "lattice_distance_matrix",
    "legendre_spectrum",
    "partition_function",
    "preset_names",
    "preset_sweep",
    "radius_grid",
    "read_result",
    "reanalyze",
    "run_sweep",
    "specific_heat",
    "spectral_decompose",
    "write_result",
]
