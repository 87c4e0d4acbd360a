"""Joint measurability of noisy finite-dimensional quantum observables.

Feasibility solver for noise points, degree brackets by bisection, named
observable constructions, the cloning-based lower bound, and region / curve
export. See the README for the CLI.
"""

__version__ = "0.1.0"

from .cloning import (CloningDevice, clone_state, cloning_coefficient,
                      cloning_joint_observable, symmetric_projector)
from .constructions import (MubPair, fourier_mub_pair, mub_jmd_analytic,
                            number_povm, phase_povm_binned, random_pair, random_povm)
from .povm import (JointPovm, NoisePoint, Povm, TrivialNoise, ValidationReport,
                   margin_first, margin_second, mix_with_trivial, uniform_trivial,
                   validate, validate_joint)
from .region import (RegionRow, RegionSample, dimension_curves, grid_scan,
                     region_boundary)
from .solver import (FeasibilityProblem, FeasibilityResult, JmdBracket,
                     SolverConfig, Verdict, certify_witness, feasibility_test,
                     jmd_bisection, mixing_witness, remix_witness)

__all__ = [
    "__version__",
    "CloningDevice", "clone_state", "cloning_coefficient",
    "cloning_joint_observable", "symmetric_projector",
    "MubPair", "fourier_mub_pair", "mub_jmd_analytic", "number_povm",
    "phase_povm_binned", "random_pair", "random_povm",
    "JointPovm", "NoisePoint", "Povm", "TrivialNoise", "ValidationReport",
    "margin_first", "margin_second", "mix_with_trivial", "uniform_trivial",
    "validate", "validate_joint",
    "RegionRow", "RegionSample", "dimension_curves", "grid_scan", "region_boundary",
    "FeasibilityProblem", "FeasibilityResult", "JmdBracket", "SolverConfig",
    "Verdict", "certify_witness", "feasibility_test", "jmd_bisection",
    "mixing_witness", "remix_witness",
]
