"""Liar-detection protocol: list generation, message exchange, adjudication.

One round of messaging works over lists harvested from the verified
pool: every party measures its own qubits of each system along a common
direction, leaving A with a list of unordered bit-pairs and B and C with
bit lists whose doubles are perfectly anticorrelated with A's. A then
sends her message to B together with the positions where it appears
doubled; B checks that claim against his own list before forwarding it
to C; C, on receiving conflicting messages, convicts whichever party's
data fails its consistency check.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .channels import ChannelHub, ClassicalEnvelope, PartyId
from .distribute_test import DirectionPolicy, VerifiedPool, choose_direction
from .oracle import escape_probabilities
from .qstate import COMPUTATIONAL, make_singlet, sample_outcomes

# Exact expected fraction of positions carrying a given double (m, m)
# under the 50/50 assignment mixture; anchors all length thresholds.
EXPECTED_DOUBLE_FRACTION = escape_probabilities().expected_double_fraction

# Outcome bits of each four-qubit basis state, most significant first.
_BITS16 = np.array(
    [[(i >> (3 - k)) & 1 for k in range(4)] for i in range(16)], dtype=np.int8
)


def _readonly_bits(values: Iterable[int] | np.ndarray, upper: int) -> np.ndarray:
    arr = np.array(values, dtype=np.int8, copy=True)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("lists must be one-dimensional and nonempty")
    if arr.min() < 0 or arr.max() > upper:
        raise ValueError(f"entries must lie in 0..{upper}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PartyLists:
    """The three private lists of one protocol run.

    A's unordered pairs are stored as their count of 1s (0, 1, or 2);
    positions are 1-based everywhere. Construction enforces the doubles
    correlation: a (0,0) pair forces 1 at B and C, a (1,1) pair forces 0.
    """

    a_ones: np.ndarray
    b_bits: np.ndarray
    c_bits: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "a_ones", _readonly_bits(self.a_ones, 2))
        object.__setattr__(self, "b_bits", _readonly_bits(self.b_bits, 1))
        object.__setattr__(self, "c_bits", _readonly_bits(self.c_bits, 1))
        if not (len(self.a_ones) == len(self.b_bits) == len(self.c_bits)):
            raise ValueError("the three lists must have equal length")
        for m in (0, 1):
            doubles = self.a_ones == 2 * m
            if np.any(self.b_bits[doubles] != 1 - m) or np.any(
                self.c_bits[doubles] != 1 - m
            ):
                raise ValueError(
                    f"doubles of {m} must face {1 - m} in the other lists"
                )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PartyLists):
            return NotImplemented
        return (
            np.array_equal(self.a_ones, other.a_ones)
            and np.array_equal(self.b_bits, other.b_bits)
            and np.array_equal(self.c_bits, other.c_bits)
        )

    @property
    def length(self) -> int:
        return len(self.a_ones)

    def pair_at(self, position: int) -> str:
        ones = int(self.a_ones[position - 1])
        return {0: "00", 1: "01", 2: "11"}[ones]

    @classmethod
    def from_table(
        cls,
        a_pairs: Sequence[str],
        b_bits: Sequence[int] | str,
        c_bits: Sequence[int] | str,
    ) -> "PartyLists":
        """Build lists from human-readable rows like ("00", "01", ...)."""
        ones = []
        for pair in a_pairs:
            if sorted(pair) not in (["0", "0"], ["0", "1"], ["1", "1"]):
                raise ValueError(f"invalid pair {pair!r}")
            ones.append(pair.count("1"))
        to_bits = lambda seq: [int(b) for b in seq]
        return cls(
            np.array(ones, dtype=np.int8),
            np.array(to_bits(b_bits), dtype=np.int8),
            np.array(to_bits(c_bits), dtype=np.int8),
        )


def generate_lists(
    pool: VerifiedPool,
    rng: np.random.Generator,
    direction_policy: DirectionPolicy = DirectionPolicy.FIXED,
) -> PartyLists:
    """Measure every pool system along a common direction, one per system.

    The outcome statistics are direction-independent, so when all pool
    systems still hold the untouched shared source state the sampling is
    done in one vectorized pass over the exact joint distribution
    (leaving the per-system objects untouched); otherwise each system is
    measured through the state-vector engine.
    """
    if len(pool) == 0:
        raise ValueError("cannot generate lists from an empty pool")
    codes = pool.assignment_codes()
    singlet_amps = make_singlet(4).amplitudes
    batched = all(
        p.system.is_pristine and p.system.state.amplitudes is singlet_amps
        for p in pool.systems
    )
    if batched:
        indices = sample_outcomes(make_singlet(4), COMPUTATIONAL, len(pool), rng)
        bits = _BITS16[indices]
        a_ones = np.where(codes == 0, bits[:, 0] + bits[:, 1], bits[:, 0] + bits[:, 2])
        b_bits = np.where(codes == 0, bits[:, 2], bits[:, 1])
        return PartyLists(a_ones.astype(np.int8), b_bits.astype(np.int8), bits[:, 3])

    a_list, b_list, c_list = [], [], []
    for entry in pool.systems:
        direction = choose_direction(rng, direction_policy)
        a_bits = entry.system.measure_slots(list(entry.assignment.a_slots), direction, rng)
        (b_bit,) = entry.system.measure_slots([entry.assignment.b_slot], direction, rng)
        (c_bit,) = entry.system.measure_slots([4], direction, rng)
        a_list.append(sum(a_bits))
        b_list.append(b_bit)
        c_list.append(c_bit)
    return PartyLists(
        np.array(a_list, dtype=np.int8),
        np.array(b_list, dtype=np.int8),
        np.array(c_list, dtype=np.int8),
    )


def extract_positions(l_A: PartyLists | np.ndarray, m: int) -> tuple[int, ...]:
    """1-based positions where A's list shows the pair (m, m), increasing."""
    if m not in (0, 1):
        raise ValueError(f"message bit must be 0 or 1, got {m!r}")
    arr = l_A.a_ones if isinstance(l_A, PartyLists) else np.asarray(l_A)
    return tuple(int(j) for j in np.flatnonzero(arr == 2 * m) + 1)


# --------------------------------------------------------------------------
# Protocol messages


@dataclass(frozen=True)
class MessageWithList:
    """A message bit plus the positions where its sender claims doubles."""

    m: int
    positions: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.m not in (0, 1):
            raise ValueError(f"message bit must be 0 or 1, got {self.m!r}")
        previous = 0
        for position in self.positions:
            if not isinstance(position, (int, np.integer)) or position <= previous:
                raise ValueError(
                    "positions must be strictly increasing integers >= 1"
                )
            previous = int(position)


@dataclass(frozen=True)
class FullList:
    """A message bit plus a claimed complete pair list (counts of 1s)."""

    m: int
    pairs: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.m not in (0, 1):
            raise ValueError(f"message bit must be 0 or 1, got {self.m!r}")
        if any(p not in (0, 1, 2) for p in self.pairs):
            raise ValueError("pair entries must be 0, 1, or 2 ones")


class RejectReason(enum.Enum):
    INCOMPATIBLE = "INCOMPATIBLE"
    TOO_SHORT = "TOO_SHORT"


@dataclass(frozen=True)
class Reject:
    """B's step-(III) refusal, carrying the offending claim as evidence."""

    reason: RejectReason
    claimed: tuple[int, ...]


# --------------------------------------------------------------------------
# B's acceptance test


@dataclass(frozen=True)
class Thresholds:
    """Acceptance parameters shared by B's test and C's adjudication.

    A claimed-positions list is rejected as TOO_SHORT when it is shorter
    than ``min_fraction`` times the expected honest double count
    (``expected_double_fraction * L``). ``cross_check_forwarded``
    optionally also validates the forwarded positions directly against
    C's own list, a check the base protocol does not perform.
    """

    min_fraction: float = 0.5
    expected_double_fraction: float = EXPECTED_DOUBLE_FRACTION
    cross_check_forwarded: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.min_fraction <= 1.0:
            raise ValueError(f"min_fraction must lie in [0, 1], got {self.min_fraction!r}")
        if not 0.0 < self.expected_double_fraction < 1.0:
            raise ValueError("expected_double_fraction must lie in (0, 1)")

    def required_length(self, length: int) -> float:
        return self.min_fraction * self.expected_double_fraction * length


DEFAULT_THRESHOLDS = Thresholds()


@dataclass(frozen=True)
class AcceptanceResult:
    accepted: bool
    reason: RejectReason | None = None
    position: int | None = None
    required_length: float = 0.0


def _first_malformed(claimed: Sequence[int], length: int) -> int | None:
    """First entry that is not a strictly increasing in-range position."""
    previous = 0
    for position in claimed:
        if not isinstance(position, (int, np.integer)):
            return 0
        if position <= previous or position > length:
            return int(position)
        previous = int(position)
    return None


def incompatible_positions(
    claimed: Sequence[int], l_B: np.ndarray, m_AB: int
) -> np.ndarray:
    """In-range claimed positions whose bit in l_B contradicts the claim.

    A true double (m, m) at position j forces l_B[j] = 1 - m, so any
    claimed position showing m in l_B exposes the claim as false.
    """
    l_B = np.asarray(l_B)
    arr = np.asarray([int(j) for j in claimed], dtype=np.int64)
    arr = arr[(arr >= 1) & (arr <= len(l_B))]
    return arr[l_B[arr - 1] == m_AB]


def b_accepts(
    m_AB: int,
    claimed: Sequence[int],
    l_B: np.ndarray,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> AcceptanceResult:
    """B's step-(III) test of A's claimed double positions.

    Rejects INCOMPATIBLE on the first malformed or contradicted
    position, then TOO_SHORT if the claim list is implausibly short;
    hostile input is rejected, never raised.
    """
    l_B = np.asarray(l_B)
    required = thresholds.required_length(len(l_B))
    bad = _first_malformed(claimed, len(l_B))
    if bad is not None:
        return AcceptanceResult(False, RejectReason.INCOMPATIBLE, bad, required)
    contradicted = incompatible_positions(claimed, l_B, m_AB)
    if contradicted.size:
        return AcceptanceResult(
            False, RejectReason.INCOMPATIBLE, int(contradicted[0]), required
        )
    if len(claimed) < required:
        return AcceptanceResult(False, RejectReason.TOO_SHORT, None, required)
    return AcceptanceResult(True, None, None, required)


# --------------------------------------------------------------------------
# C's adjudication


class VerdictValue(enum.Enum):
    CONSISTENT = "CONSISTENT"
    A_IS_LIAR = "A_IS_LIAR"
    B_IS_LIAR = "B_IS_LIAR"
    B_REJECTED_AT_STEP_III = "B_REJECTED_AT_STEP_III"


@dataclass(frozen=True)
class Evidence:
    """Which check decided the verdict, and where it tripped."""

    check: str
    position: int | None = None
    detail: str = ""


@dataclass(frozen=True)
class Verdict:
    value: VerdictValue
    evidence: Evidence | None = None


def stage1_violations(l_AC: Sequence[int], l_C: np.ndarray) -> np.ndarray:
    """Positions where a claimed double contradicts C's own bit."""
    arr = np.asarray(l_AC, dtype=np.int64)
    l_C = np.asarray(l_C)
    mask = ((arr == 0) & (l_C != 1)) | ((arr == 2) & (l_C != 0))
    return np.flatnonzero(mask) + 1


def stage2_mismatches(
    forwarded: Sequence[int], l_AC: Sequence[int], m_BC: int
) -> np.ndarray:
    """Forwarded positions that are not (m_BC, m_BC) doubles in l_AC."""
    arr = np.asarray(l_AC, dtype=np.int64)
    fwd = np.asarray([int(j) for j in forwarded], dtype=np.int64)
    fwd = fwd[(fwd >= 1) & (fwd <= len(arr))]
    return fwd[arr[fwd - 1] != 2 * m_BC]


def c_adjudicate(
    m_AC: int,
    l_AC: Sequence[int],
    m_BC: int,
    forwarded: Sequence[int],
    l_C: np.ndarray,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> Verdict:
    """C's step-(VI) decision between conflicting messages.

    Stage 1 tests A's claimed full list against C's own bits: any wrong
    length, malformed entry, or contradicted double convicts A. Stage 2
    then tests B's forwarded positions against A's full list: a too
    short or inconsistent forwarding convicts B. If both stages pass
    despite the conflicting messages, A verifiably supplied full-length
    support for both message values, so the verdict falls on her.
    """
    if m_AC == m_BC:
        return Verdict(VerdictValue.CONSISTENT)
    l_C = np.asarray(l_C)
    length = len(l_C)

    if len(l_AC) != length:
        return Verdict(
            VerdictValue.A_IS_LIAR,
            Evidence("stage1_wrong_length", None, f"claimed length {len(l_AC)}"),
        )
    if any(entry not in (0, 1, 2) for entry in l_AC):
        return Verdict(
            VerdictValue.A_IS_LIAR, Evidence("stage1_malformed", None, "invalid pair")
        )
    violations = stage1_violations(l_AC, l_C)
    if violations.size:
        return Verdict(
            VerdictValue.A_IS_LIAR,
            Evidence(
                "stage1_inconsistent",
                int(violations[0]),
                "claimed double contradicts C's bit",
            ),
        )

    required = thresholds.required_length(length)
    bad = _first_malformed(forwarded, length)
    if bad is not None:
        return Verdict(
            VerdictValue.B_IS_LIAR, Evidence("stage2_malformed", bad, "invalid position")
        )
    if len(forwarded) < required:
        return Verdict(
            VerdictValue.B_IS_LIAR,
            Evidence(
                "stage2_too_short",
                None,
                f"forwarded {len(forwarded)} < required {required:.2f}",
            ),
        )
    mismatches = stage2_mismatches(forwarded, l_AC, m_BC)
    if mismatches.size:
        return Verdict(
            VerdictValue.B_IS_LIAR,
            Evidence(
                "stage2_inconsistent",
                int(mismatches[0]),
                "forwarded position is not a matching double in the full list",
            ),
        )
    if thresholds.cross_check_forwarded:
        fwd = np.asarray([int(j) for j in forwarded], dtype=np.int64)
        contradicted = fwd[l_C[fwd - 1] != 1 - m_BC]
        if contradicted.size:
            return Verdict(
                VerdictValue.B_IS_LIAR,
                Evidence(
                    "stage2_cross_check",
                    int(contradicted[0]),
                    "forwarded double contradicts C's bit",
                ),
            )
    return Verdict(
        VerdictValue.A_IS_LIAR,
        Evidence(
            "stage2_passed_under_conflict",
            None,
            "a full-length forwarded list consistent with A's own full list "
            "proves A supported both conflicting messages",
        ),
    )


# --------------------------------------------------------------------------
# Orchestration


@dataclass(frozen=True)
class ProtocolResult:
    verdict: Verdict
    transcript: tuple[ClassicalEnvelope, ...]
    a_action: object
    b_action: object | None
    b_acceptance: AcceptanceResult | None
    delivered_message: int | None


def run_liar_protocol(
    lists: PartyLists,
    strategy_A,
    strategy_B,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
    rng: np.random.Generator | None = None,
    hub: ChannelHub | None = None,
) -> ProtocolResult:
    """Run steps (II)-(VI) over the secure channels and return the verdict.

    The exchange is fully audited: every payload crosses the hub, and
    the returned transcript is the complete message record. A's message
    to C is sent unconditionally; when honest B rejects at step (III),
    C ignores the message content and reports the rejection.
    """
    from .adversary import strategy_A_act, strategy_B_act

    if rng is None:
        rng = np.random.default_rng()
    if hub is None:
        hub = ChannelHub()

    a_action = strategy_A_act(strategy_A, lists.a_ones, rng)
    hub.send_classical(
        PartyId.A, PartyId.B, MessageWithList(a_action.m_AB, a_action.positions_for_B)
    )

    received = hub.receive(PartyId.B, PartyId.A)
    b_acceptance = None
    b_action = None
    if strategy_B.is_honest:
        b_acceptance = b_accepts(received.m, received.positions, lists.b_bits, thresholds)
        if not b_acceptance.accepted:
            hub.send_classical(
                PartyId.B, PartyId.C, Reject(b_acceptance.reason, received.positions)
            )
        else:
            b_action = strategy_B_act(
                strategy_B, (received.m, received.positions), lists.b_bits, rng
            )
            hub.send_classical(
                PartyId.B, PartyId.C, MessageWithList(b_action.m_BC, b_action.forwarded)
            )
    else:
        b_action = strategy_B_act(
            strategy_B, (received.m, received.positions), lists.b_bits, rng
        )
        hub.send_classical(
            PartyId.B, PartyId.C, MessageWithList(b_action.m_BC, b_action.forwarded)
        )

    hub.send_classical(
        PartyId.A, PartyId.C, FullList(a_action.m_AC, a_action.l_AC)
    )

    from_b = hub.receive(PartyId.C, PartyId.B)
    from_a = hub.receive(PartyId.C, PartyId.A)
    if isinstance(from_b, Reject):
        verdict = Verdict(
            VerdictValue.B_REJECTED_AT_STEP_III,
            Evidence(f"step_iii_{from_b.reason.value.lower()}"),
        )
    else:
        verdict = c_adjudicate(
            from_a.m, from_a.pairs, from_b.m, from_b.positions, lists.c_bits, thresholds
        )
    delivered = from_b.m if verdict.value is VerdictValue.CONSISTENT else None
    return ProtocolResult(
        verdict=verdict,
        transcript=tuple(hub.transcript),
        a_action=a_action,
        b_action=b_action,
        b_acceptance=b_acceptance,
        delivered_message=delivered,
    )
