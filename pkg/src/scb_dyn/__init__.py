"""Cooper pair box charge dynamics: qubit vs mean-field models under noise."""

from .fock import (
    ChargeParams,
    TwoModeParams,
    charge_hamiltonian,
    condensate_state,
    map_parameters,
    number_state,
    op_b,
    qubit_hamiltonian,
    sector_dimension,
    two_mode_hamiltonian,
)
from .lindblad import (
    CompletePositivityError,
    NoiseParams,
    check_complete_positivity,
    decay_constant_meanfield_analytic,
    decay_constant_numeric,
    decay_constant_qubit_analytic,
    decay_ratio,
    dissipator,
    evolve_master,
)
from .meanfield import (
    OrderParameter,
    PhaseNumberState,
    compare_gp_to_exact,
    gp_to_phase_number,
    integrate_gp,
    integrate_phase_number,
    small_oscillation_frequency,
)
from .ode import StepSizeUnderflow
from .unitary import (
    TimeGrid,
    evolve_schrodinger,
    extract_frequency,
    occupation_expectation,
    qubit_probability,
)

__version__ = "0.1.0"
