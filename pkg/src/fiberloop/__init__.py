"""Time-bin fiber-loop interferometer simulator.

Builds the transfer maps a programmable delay-loop interferometer
implements on a pulse train, quantifies how component loss skews them
(similarity and post-selection metrics), models temporal mode mismatch
from loop-length error and source jitter (output fidelity), and provides a
brute-force Fock simulator plus a seeded sweep harness to reproduce all of
it at desk scale.
"""

__version__ = "0.1.0"

from .fock import FockBasis, enumerate_basis, loss_dilation, output_amplitude, postselection_oracle
from .loss import (
    LossMatrix,
    LossParams,
    OptimizeResult,
    loss_matrix,
    lossy_composed_map,
    lossy_single_loop_map,
    optimize_similarity,
    outer_loop_prefactor,
    postselection_probability,
    similarity,
)
from .network import (
    BeamsplitterSetting,
    SwitchingSequence,
    TransferMatrix,
    compose_loops,
    random_sequence,
    single_loop_map,
)
from .permanent import permanent, permanent_naive
from .temporal import (
    BinConfusionError,
    FidelityStats,
    MismatchParams,
    PhotonLabel,
    TemporalState,
    WavePacket,
    apply_jitter,
    evolve_pulse_train,
    expected_fidelity_mc,
    fidelity_expansion,
    fidelity_permanent,
    gaussian_overlap,
    pulse_train_state,
)

__all__ = [
    "__version__",
    "BeamsplitterSetting",
    "BinConfusionError",
    "FidelityStats",
    "FockBasis",
    "LossMatrix",
    "LossParams",
    "MismatchParams",
    "OptimizeResult",
    "PhotonLabel",
    "SwitchingSequence",
    "TemporalState",
    "TransferMatrix",
    "WavePacket",
    "apply_jitter",
    "compose_loops",
    "enumerate_basis",
    "evolve_pulse_train",
    "expected_fidelity_mc",
    "fidelity_expansion",
    "fidelity_permanent",
    "gaussian_overlap",
    "loss_dilation",
    "loss_matrix",
    "lossy_composed_map",
    "lossy_single_loop_map",
    "optimize_similarity",
    "outer_loop_prefactor",
    "output_amplitude",
    "permanent",
    "permanent_naive",
    "postselection_oracle",
    "postselection_probability",
    "pulse_train_state",
    "random_sequence",
    "similarity",
    "single_loop_map",
]
