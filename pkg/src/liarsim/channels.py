"""Communication substrate for the three-party simulation.

Provides secure pairwise classical channels (in-order, unmodified,
addressee-only delivery), a qubit custody registry, per-system quantum
state holders with a measurement touch-log, and a quantum transfer
operation with an injectable fault model (loss, corrupted source).

There is no timing model: channels are synchronous queues drained at
protocol-step granularity.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .qstate import (
    COMPUTATIONAL,
    MeasurementDirection,
    StateVector,
    basis_state,
    make_singlet,
    measure_qubits,
)


class ProtocolViolationError(Exception):
    """A party attempted something the protocol's rules forbid."""


class PartyId(enum.Enum):
    A = "A"
    B = "B"
    C = "C"


@dataclass(frozen=True)
class QubitRef:
    """One qubit: slot ``slot`` (1..4) of four-qubit system ``system_id``."""

    system_id: int
    slot: int

    def __post_init__(self) -> None:
        if self.system_id < 1:
            raise ValueError(f"system_id must be >= 1, got {self.system_id}")
        if self.slot not in (1, 2, 3, 4):
            raise ValueError(f"slot must be in 1..4, got {self.slot}")


@dataclass(frozen=True)
class ClassicalEnvelope:
    """A classical payload in flight from ``sender`` to ``receiver``."""

    sender: PartyId
    receiver: PartyId
    payload: object
    sequence: int


@dataclass(frozen=True)
class DeliveryReceipt:
    sequence: int
    sender: PartyId
    receiver: PartyId


class ChannelHub:
    """Secure pairwise classical channels between the three parties.

    Messages are queued per (sender, receiver) pair and delivered
    unmodified, in send order, only to the addressed receiver. Every
    send is appended to ``transcript`` for auditing. Registered
    eavesdropper hooks are invoked once per send but receive nothing
    (no payload, no addressing) and have no way to inject traffic.
    """

    def __init__(self) -> None:
        self._queues: dict[tuple[PartyId, PartyId], deque[ClassicalEnvelope]] = {}
        self._next_sequence = 0
        self.transcript: list[ClassicalEnvelope] = []
        self._eavesdroppers: list[Callable[[], None]] = []

    def register_eavesdropper(self, hook: Callable[[], None]) -> None:
        self._eavesdroppers.append(hook)

    def send_classical(
        self, sender: PartyId, receiver: PartyId, payload: object
    ) -> DeliveryReceipt:
        """Queue ``payload`` for ``receiver``; returns a delivery receipt."""
        if sender == receiver:
            raise ProtocolViolationError(f"{sender.value} cannot message itself")
        envelope = ClassicalEnvelope(sender, receiver, payload, self._next_sequence)
        self._next_sequence += 1
        self._queues.setdefault((sender, receiver), deque()).append(envelope)
        self.transcript.append(envelope)
        for hook in self._eavesdroppers:
            hook()
        return DeliveryReceipt(envelope.sequence, sender, receiver)

    def receive(self, receiver: PartyId, sender: PartyId) -> object:
        """Dequeue the oldest pending payload from ``sender`` to ``receiver``."""
        queue = self._queues.get((sender, receiver))
        if not queue:
            raise ProtocolViolationError(
                f"no pending message from {sender.value} to {receiver.value}"
            )
        return queue.popleft().payload

    def pending_count(self, receiver: PartyId, sender: PartyId) -> int:
        return len(self._queues.get((sender, receiver), ()))


class QuantumSystem:
    """The live quantum state of one four-qubit system.

    Tracks which slots were lost in transit and logs every state touch
    (measurement or trace-out) so tests can assert that pool systems
    stay pristine through the testing phase.
    """

    def __init__(self, system_id: int, state: StateVector) -> None:
        if state.num_qubits != 4:
            raise ValueError("a protocol system has exactly four qubits")
        self.system_id = system_id
        self.state = state
        self.lost_slots: set[int] = set()
        self.touch_log: list[str] = []

    @property
    def is_pristine(self) -> bool:
        return not self.touch_log

    def measure_slots(
        self,
        slots: Iterable[int],
        direction: MeasurementDirection,
        rng: np.random.Generator,
    ) -> tuple[int, ...]:
        """Projectively measure the given slots along ``direction``."""
        slots = list(slots)
        for slot in slots:
            if slot in self.lost_slots:
                raise ProtocolViolationError(
                    f"slot {slot} of system {self.system_id} was lost in transit"
                )
        bits, self.state = measure_qubits(self.state, slots, direction, rng)
        self.touch_log.append(f"measure slots={slots}")
        return bits

    def trace_out(self, slot: int, rng: np.random.Generator) -> None:
        """Discard one qubit: measure it in a fixed basis, drop the outcome."""
        if slot in self.lost_slots:
            return
        _, self.state = measure_qubits(self.state, [slot], COMPUTATIONAL, rng)
        self.lost_slots.add(slot)
        self.touch_log.append(f"trace_out slot={slot}")


class QubitRegistry:
    """Single-owner custody ledger for every live (system_id, slot) qubit."""

    def __init__(self) -> None:
        self._owner: dict[QubitRef, PartyId] = {}
        self._lost: set[QubitRef] = set()

    def create_system(self, system_id: int, owner: PartyId = PartyId.C) -> None:
        for slot in (1, 2, 3, 4):
            ref = QubitRef(system_id, slot)
            if ref in self._owner or ref in self._lost:
                raise ProtocolViolationError(f"system {system_id} already exists")
            self._owner[ref] = owner

    def owner_of(self, ref: QubitRef) -> PartyId:
        try:
            return self._owner[ref]
        except KeyError:
            if ref in self._lost:
                raise ProtocolViolationError(f"{ref} was lost in transit") from None
            raise ProtocolViolationError(f"unknown qubit {ref}") from None

    def reassign(self, ref: QubitRef, new_owner: PartyId) -> None:
        self.owner_of(ref)
        self._owner[ref] = new_owner

    def mark_lost(self, ref: QubitRef) -> None:
        self.owner_of(ref)
        del self._owner[ref]
        self._lost.add(ref)

    def holdings(self, party: PartyId, system_id: int | None = None) -> list[QubitRef]:
        if system_id is not None:
            # a system has exactly four slots; avoid a full-ledger scan
            return [
                ref
                for ref in (QubitRef(system_id, slot) for slot in (1, 2, 3, 4))
                if self._owner.get(ref) is party
            ]
        return sorted(
            (ref for ref, owner in self._owner.items() if owner is party),
            key=lambda ref: (ref.system_id, ref.slot),
        )

    def owner_census(self) -> dict[QubitRef, PartyId]:
        """Snapshot of the full ledger (for conservation checks)."""
        return dict(self._owner)


class TransferStatus(enum.Enum):
    DELIVERED = "delivered"
    LOST = "lost"


@dataclass(frozen=True)
class TransferRecord:
    ref: QubitRef
    status: TransferStatus


@dataclass(frozen=True)
class FaultModel:
    """Injectable imperfections: transit loss and a corrupted source.

    ``source_state`` is either ``"singlet"`` (the honest four-qubit
    state) or a four-character bit string naming a product state the
    source secretly prepares instead.
    """

    qubit_loss_prob: float = 0.0
    source_state: str = "singlet"

    def __post_init__(self) -> None:
        if not 0.0 <= self.qubit_loss_prob <= 1.0:
            raise ValueError(
                f"qubit_loss_prob must lie in [0, 1], got {self.qubit_loss_prob!r}"
            )
        if self.source_state != "singlet" and (
            len(self.source_state) != 4 or any(b not in "01" for b in self.source_state)
        ):
            raise ValueError(
                "source_state must be 'singlet' or a 4-bit string, got "
                f"{self.source_state!r}"
            )

    def prepare_state(self) -> StateVector:
        if self.source_state == "singlet":
            return make_singlet(4)
        return basis_state(self.source_state)


NO_FAULTS = FaultModel()


def transfer_qubits(
    registry: QubitRegistry,
    systems: Mapping[int, QuantumSystem],
    sender: PartyId,
    receiver: PartyId,
    refs: Iterable[QubitRef],
    fault: FaultModel,
    rng: np.random.Generator,
) -> list[TransferRecord]:
    """Move qubit custody from ``sender`` to ``receiver`` over a lossy channel.

    Each qubit is independently delivered with probability
    ``1 - fault.qubit_loss_prob``; a lost qubit is traced out of its
    system immediately so the survivors' statistics stay physical.
    Sending a qubit the sender does not own is a protocol violation,
    distinct from loss.
    """
    refs = list(refs)
    for ref in refs:
        if registry.owner_of(ref) is not sender:
            raise ProtocolViolationError(
                f"{sender.value} does not own {ref} "
                f"(owner is {registry.owner_of(ref).value})"
            )
    records = []
    for ref in refs:
        if rng.random() < fault.qubit_loss_prob:
            registry.mark_lost(ref)
            systems[ref.system_id].trace_out(ref.slot, rng)
            records.append(TransferRecord(ref, TransferStatus.LOST))
        else:
            registry.reassign(ref, receiver)
            records.append(TransferRecord(ref, TransferStatus.DELIVERED))
    return records
