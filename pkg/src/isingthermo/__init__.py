"""Finite-time driving of a thermal transverse-field Ising ring and dCRAB control of its irreversibility."""
from .dcrab import DcrabParams, OptimizationTrace, assemble_pulse, draw_basis, optimize
from .dynamics import (
    ControlProtocol,
    PulseLayer,
    TimeGrid,
    convergence_check,
    linear_ramp,
    propagate,
    sudden_quench,
)
from .simplex import NelderMeadParams, nelder_mead
from .spectral import (
    SpectralDecomposition,
    eigendecompose,
    free_energy_difference,
    gibbs_state,
    partition_function_log,
)
from .spin_model import SpinChainConfig, build_hamiltonian, embed_pauli
from .thermo import (
    DrivenRing,
    IrreversibilityReport,
    WorkDistribution,
    average_work,
    characteristic_function,
    full_report,
    inner_friction,
    irreversible_entropy,
    quantum_volume_entropy,
    work_distribution,
)

__version__ = "0.1.0"
