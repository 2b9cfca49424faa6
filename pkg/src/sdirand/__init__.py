"""Semi-device-independent randomness expansion toolkit.

Certifies per-round min-entropy of a qubit prepare-and-measure device
from a dimension witness: evaluate the witness, map witness values to
guessing probabilities with a constrained optimizer (checked against an
exhaustive grid oracle), simulate finite rounds with confidence bounds,
and hash the raw outcomes down to certified bits.
"""

from ._kernels import BACKEND, available_backends, get_backend
from .witness import (
    BehaviorTable,
    CertificationResult,
    classical_bound,
    deterministic_strategy_tables,
    guessing_probability,
    min_entropy,
    quantum_bound,
    witness_value,
)
from .qubit import (
    BinaryMeasurement,
    ComplexAmplitudePair,
    Device,
    PureQubit,
    behavior_table,
    born_probability,
    projector_p0,
    projectors,
    state_from_angles,
)
from .optimize import (
    CurvePoint,
    InfeasibleError,
    OptimizationSettings,
    default_curve_grid,
    grid_oracle_max_guessing,
    maximize_guessing_at_t,
    maximize_witness,
    monotonize_curve,
    read_curve,
    sweep_curve,
    write_curve,
)
from .protocol import (
    NO_NOISE,
    CertificationError,
    EstimationError,
    EstimationReport,
    ExtractionParams,
    NoiseModel,
    RoundLog,
    RoundRecord,
    bb84_preset,
    certify,
    estimate_witness,
    extract_bits,
    pack_bits_msb_first,
    qrac_preset,
    run_rounds,
    toeplitz_seed_bits,
    with_certification,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "available_backends",
    "get_backend",
    "BehaviorTable",
    "CertificationResult",
    "classical_bound",
    "deterministic_strategy_tables",
    "guessing_probability",
    "min_entropy",
    "quantum_bound",
    "witness_value",
    "BinaryMeasurement",
    "ComplexAmplitudePair",
    "Device",
    "PureQubit",
    "behavior_table",
    "born_probability",
    "projector_p0",
    "projectors",
    "state_from_angles",
    "CurvePoint",
    "InfeasibleError",
    "OptimizationSettings",
    "default_curve_grid",
    "grid_oracle_max_guessing",
    "maximize_guessing_at_t",
    "maximize_witness",
    "monotonize_curve",
    "read_curve",
    "sweep_curve",
    "write_curve",
    "NO_NOISE",
    "CertificationError",
    "EstimationError",
    "EstimationReport",
    "ExtractionParams",
    "NoiseModel",
    "RoundLog",
    "RoundRecord",
    "bb84_preset",
    "certify",
    "estimate_witness",
    "extract_bits",
    "pack_bits_msb_first",
    "qrac_preset",
    "run_rounds",
    "toeplitz_seed_bits",
    "with_certification",
    "__version__",
]
