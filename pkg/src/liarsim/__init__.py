"""Simulator for a three-party liar-detection protocol backed by
four-qubit singlet correlations.

Layering, bottom up: ``qstate`` (state-vector engine), ``oracle`` (exact
probability tables), ``channels`` (parties, classical channels, qubit
custody), ``distribute_test`` (distribute-and-test phase),
``liar_protocol`` (list exchange and adjudication), ``adversary``
(party strategies), ``runner`` and ``cli`` (Monte-Carlo trial harness).
"""

from .adversary import (
    ActionA,
    ActionB,
    StrategyA,
    StrategyB,
    parse_strategy_A,
    parse_strategy_B,
    strategy_A_act,
    strategy_B_act,
)
from .channels import (
    NO_FAULTS,
    ChannelHub,
    ClassicalEnvelope,
    FaultModel,
    PartyId,
    ProtocolViolationError,
    QubitRef,
    QubitRegistry,
    QuantumSystem,
    transfer_qubits,
)
from .distribute_test import (
    DirectionPolicy,
    DistributeOutcome,
    DistributeStatus,
    DistributionPlan,
    VerifiedPool,
    make_verified_pool,
    run_distribute_and_test,
)
from .liar_protocol import (
    EXPECTED_DOUBLE_FRACTION,
    AcceptanceResult,
    FullList,
    MessageWithList,
    PartyLists,
    ProtocolResult,
    Reject,
    RejectReason,
    Thresholds,
    Verdict,
    VerdictValue,
    b_accepts,
    c_adjudicate,
    extract_positions,
    generate_lists,
    run_liar_protocol,
)
from .oracle import (
    Assignment,
    EscapeProbabilities,
    RoundDistribution,
    escape_probabilities,
    expected_double_count,
    rejection_lower_bound,
    round_distribution,
)
from .qstate import (
    COMPUTATIONAL,
    MeasurementDirection,
    ResourceLimitError,
    SingleQubitUnitary,
    StateVector,
    apply_bilateral,
    apply_single_qubit,
    basis_state,
    fidelity,
    joint_distribution,
    make_singlet,
    measure_qubits,
    random_unitary,
    sample_outcomes,
)
from .runner import (
    TrialConfig,
    TrialResult,
    TrialStats,
    run_trials,
    trial_rng,
    wilson_interval,
)

__version__ = "0.1.0"

__all__ = [
    "ActionA",
    "ActionB",
    "StrategyA",
    "StrategyB",
    "parse_strategy_A",
    "parse_strategy_B",
    "strategy_A_act",
    "strategy_B_act",
    "NO_FAULTS",
    "ChannelHub",
    "ClassicalEnvelope",
    "FaultModel",
    "PartyId",
    "ProtocolViolationError",
    "QubitRef",
    "QubitRegistry",
    "QuantumSystem",
    "transfer_qubits",
    "DirectionPolicy",
    "DistributeOutcome",
    "DistributeStatus",
    "DistributionPlan",
    "VerifiedPool",
    "make_verified_pool",
    "run_distribute_and_test",
    "EXPECTED_DOUBLE_FRACTION",
    "AcceptanceResult",
    "FullList",
    "MessageWithList",
    "PartyLists",
    "ProtocolResult",
    "Reject",
    "RejectReason",
    "Thresholds",
    "Verdict",
    "VerdictValue",
    "b_accepts",
    "c_adjudicate",
    "extract_positions",
    "generate_lists",
    "run_liar_protocol",
    "Assignment",
    "EscapeProbabilities",
    "RoundDistribution",
    "escape_probabilities",
    "expected_double_count",
    "rejection_lower_bound",
    "round_distribution",
    "COMPUTATIONAL",
    "MeasurementDirection",
    "ResourceLimitError",
    "SingleQubitUnitary",
    "StateVector",
    "apply_bilateral",
    "apply_single_qubit",
    "basis_state",
    "fidelity",
    "joint_distribution",
    "make_singlet",
    "measure_qubits",
    "random_unitary",
    "sample_outcomes",
    "TrialConfig",
    "TrialResult",
    "TrialStats",
    "run_trials",
    "trial_rng",
    "wilson_interval",
    "__version__",
]
