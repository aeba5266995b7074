"""Numerical Bell-test simulator for a split two-mode-squeezed BEC.

The package models the full protocol -- two-mode squeezing, a pi-phase gate,
coherent splitting into two wells, local desqueezing, analyzer rotations, and
number-resolved readout -- on a truncated four-mode Fock space, evaluates the
three correlator families (with loss and detector-inefficiency models), and
cross-validates the local-oscillator approximation against the exact six-mode
fixed-N Hamiltonian.
"""

from .bell import (
    APPROACHES,
    BellAngles,
    SweepRecord,
    SweepSpec,
    chsh_value,
    exact_chsh,
    optimal_angles,
    sweep,
    violation_threshold,
)
from .correlators import (
    CHProbabilities,
    LossModel,
    ProbabilityTable,
    UndefinedCorrelatorError,
    ch_probabilities,
    correlator_I,
    correlator_II,
    correlator_III,
    probability_table,
)
from .evolution import (
    IntegrationError,
    IntegratorConfig,
    PrepParams,
    evolve,
    prepare_bell_state,
    rotate,
)
from .fockspace import (
    FockLabel,
    SectorKey,
    StateVector,
    TruncationConfig,
    boundary_mass,
    index_of,
    label_of,
    sector_marginal,
    sector_matrix,
    vacuum,
)

__version__ = "0.1.0"
