"""Two-stage quantum measurement toolkit.

Stage I is an entangling system-meter interaction described by
conditional meter states; stage II is a readout of the meter alone. The
package computes the resolution (squared Hellinger distance), the
decoherence and the irreversible decoherence of each pair of eigenstates,
checks steering violations between readouts, and synthesizes optimal and
eraser readouts.
"""

from .analysis import (
    ConditionalOutput,
    CondProbTable,
    PairKind,
    PairMatrix,
    ReadoutStrategy,
    SteeringReport,
    basis_readout,
    bhattacharyya,
    computational_readout,
    cond_probs,
    conditional_outputs,
    decoherence,
    irreversible_decoherence,
    irreversible_decoherence_from_states,
    output_density,
    readout,
    resolution,
    steering_averages,
    steering_report,
)
from .core import DEFAULT_TOL, DensityMatrix, ToleranceConfig, hermitian_eig, inner, validate_density
from .interaction import (
    GramMatrix,
    MeasurementInteraction,
    ProductHamiltonianSpec,
    TwoPartMeterSpec,
    cnot_partial,
    from_conditional_unitaries,
    from_product_hamiltonian,
    from_states,
    from_two_part_meter,
    gram,
)
from .readout_opt import (
    FeedbackCorrection,
    NonnegFactorization,
    cp_factorize,
    eraser_readout,
    feedback_correction,
    optimal_readout,
)

__version__ = "0.1.0"
