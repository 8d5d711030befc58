"""Dense state-vector engine for small qubit registers.

Builds the even-N singlet family, applies single-qubit unitaries, and
performs Born-rule projective measurements with collapse.

Conventions fixed here and relied on everywhere else:

* qubit 1 is the most significant bit of the amplitude index, so on four
  qubits ``|0011>`` sits at index 3;
* measurement outcomes are labelled ``0`` (spin up along the measured
  axis) and ``1`` (spin down);
* states are immutable; every operation returns a new ``StateVector``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_MAX_QUBITS = 10

# Tolerance for exact-construction checks (normalization, unitarity).
NORM_ATOL = 1e-12


class ResourceLimitError(Exception):
    """Requested register size exceeds the configured maximum."""


def _as_readonly(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state of ``num_qubits`` qubits.

    ``amplitudes`` has length ``2**num_qubits`` and unit norm within
    1e-12; the array is stored read-only so instances can be shared
    freely between systems and threads.
    """

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise ValueError(f"num_qubits must be positive, got {self.num_qubits}")
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.num_qubits,):
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes for "
                f"{self.num_qubits} qubits, got shape {amps.shape}"
            )
        total = float(np.sum(np.abs(amps) ** 2))
        if abs(total - 1.0) > NORM_ATOL:
            raise ValueError(f"state is not normalized: sum |a|^2 = {total!r}")
        if amps is not self.amplitudes or amps.flags.writeable:
            object.__setattr__(self, "amplitudes", _as_readonly(amps))

    def probabilities(self) -> np.ndarray:
        """Born probability of each computational basis outcome."""
        return np.abs(self.amplitudes) ** 2

    def bitstring(self, index: int) -> str:
        return format(index, f"0{self.num_qubits}b")


@dataclass(frozen=True)
class SingleQubitUnitary:
    """A 2x2 unitary; validated to satisfy U^dag U = I within 1e-12."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        dev = np.max(np.abs(m.conj().T @ m - np.eye(2)))
        if dev > NORM_ATOL:
            raise ValueError(f"matrix is not unitary: max |U^dag U - I| = {dev!r}")
        object.__setattr__(self, "matrix", _as_readonly(m))

    @classmethod
    def identity(cls) -> "SingleQubitUnitary":
        return cls(np.eye(2))

    @classmethod
    def bit_flip(cls) -> "SingleQubitUnitary":
        return cls(np.array([[0.0, 1.0], [1.0, 0.0]]))

    def dagger(self) -> "SingleQubitUnitary":
        return SingleQubitUnitary(self.matrix.conj().T)


@dataclass(frozen=True)
class MeasurementDirection:
    """Spin axis whose eigenbasis is measured.

    ``theta`` is the polar angle in [0, pi], ``phi`` the azimuthal angle
    in [0, 2*pi); theta = phi = 0 is the computational basis.
    """

    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta!r}")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ValueError(f"phi must lie in [0, 2*pi), got {self.phi!r}")

    @property
    def is_computational(self) -> bool:
        return self.theta == 0.0 and self.phi == 0.0

    def basis_unitary(self) -> SingleQubitUnitary:
        """Unitary whose columns are the up/down eigenvectors of the axis."""
        ct = math.cos(self.theta / 2.0)
        st = math.sin(self.theta / 2.0)
        ph = complex(math.cos(self.phi), math.sin(self.phi))
        return SingleQubitUnitary(
            np.array([[ct, -st * ph.conjugate()], [st * ph, ct]])
        )


COMPUTATIONAL = MeasurementDirection(0.0, 0.0)

_singlet_cache: dict[int, np.ndarray] = {}


def singlet_amplitude(bits: tuple[int, ...] | str) -> float:
    """Amplitude the singlet family assigns to one basis string.

    Zero for strings with unequal counts of 0 and 1; otherwise
    z!(n/2-z)!(-1)^(n/2-z) / ((n/2)! sqrt(n/2+1)) where z counts the 0s
    among the first n/2 positions.
    """
    if isinstance(bits, str):
        bits = tuple(int(b) for b in bits)
    n = len(bits)
    if n % 2 != 0:
        raise ValueError("bit string length must be even")
    half = n // 2
    if sum(bits) != half:
        return 0.0
    z = sum(1 for b in bits[:half] if b == 0)
    sign = -1.0 if (half - z) % 2 else 1.0
    return (
        sign
        * math.factorial(z)
        * math.factorial(half - z)
        / (math.factorial(half) * math.sqrt(half + 1))
    )


def make_singlet(n: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    """Build the n-qubit singlet state (n even).

    The state is supported only on balanced bit strings and is invariant
    under applying the same unitary to every qubit.
    """
    if n < 2 or n % 2 != 0:
        raise ValueError(f"singlet size must be a positive even integer, got {n}")
    if n > max_qubits:
        raise ResourceLimitError(f"singlet size {n} exceeds the maximum of {max_qubits}")
    cached = _singlet_cache.get(n)
    if cached is None:
        amps = np.zeros(2**n, dtype=np.complex128)
        for index in range(2**n):
            bits = tuple((index >> (n - k)) & 1 for k in range(1, n + 1))
            amps[index] = singlet_amplitude(bits)
        cached = _as_readonly(amps)
        _singlet_cache[n] = cached
    return StateVector(n, cached)


def basis_state(bits: str) -> StateVector:
    """Computational basis product state for a bit string like ``"0011"``."""
    if not bits or any(b not in "01" for b in bits):
        raise ValueError(f"expected a nonempty string of 0s and 1s, got {bits!r}")
    n = len(bits)
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[int(bits, 2)] = 1.0
    return StateVector(n, amps)


def _check_target(state: StateVector, qubit_index: int) -> None:
    if not 1 <= qubit_index <= state.num_qubits:
        raise ValueError(
            f"qubit index {qubit_index} out of range 1..{state.num_qubits}"
        )


def _apply_matrix_raw(amps: np.ndarray, n: int, matrix: np.ndarray, axis: int) -> np.ndarray:
    """Apply a 2x2 matrix to one tensor factor of a raw amplitude array."""
    tensor = amps.reshape([2] * n)
    tensor = np.tensordot(matrix, tensor, axes=([1], [axis]))
    tensor = np.moveaxis(tensor, 0, axis)
    return np.ascontiguousarray(tensor).reshape(-1)


def _rotate_common_raw(
    amps: np.ndarray, n: int, targets: list[int], matrix: np.ndarray
) -> np.ndarray:
    """Apply one 2x2 matrix to several tensor factors of a raw array."""
    for k in targets:
        amps = _apply_matrix_raw(amps, n, matrix, k - 1)
    return amps


def apply_single_qubit(
    state: StateVector, qubit_index: int, u: SingleQubitUnitary
) -> StateVector:
    """Apply ``u`` to one tensor factor (1-based index)."""
    _check_target(state, qubit_index)
    n = state.num_qubits
    amps = _apply_matrix_raw(state.amplitudes, n, u.matrix, qubit_index - 1)
    return StateVector(n, amps)


def apply_bilateral(state: StateVector, u: SingleQubitUnitary) -> StateVector:
    """Apply the same unitary to every qubit."""
    n = state.num_qubits
    amps = state.amplitudes
    for axis in range(n):
        amps = _apply_matrix_raw(amps, n, u.matrix, axis)
    return StateVector(n, amps)


def _sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    cum = np.cumsum(probs)
    # guard against rounding: force the last edge to cover u = 1 - eps
    cum[-1] = 1.0
    return int(np.searchsorted(cum, rng.random(), side="right"))


def measure_qubits(
    state: StateVector,
    targets: list[int] | tuple[int, ...],
    direction: MeasurementDirection,
    rng: np.random.Generator,
) -> tuple[tuple[int, ...], StateVector]:
    """Projectively measure the targeted qubits along a common axis.

    Returns the sampled outcome bits (one per target, in target order)
    and the collapsed, renormalized state. Outcomes follow the Born rule
    in the rotated basis; sampling is reproducible for a fixed rng state.
    """
    targets = list(targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate measurement targets: {targets}")
    for k in targets:
        _check_target(state, k)

    n = state.num_qubits
    amps = state.amplitudes
    basis = None if direction.is_computational else direction.basis_unitary()
    if basis is not None:
        amps = _rotate_common_raw(amps, n, targets, basis.dagger().matrix)

    # summing over non-target axes leaves the target axes in increasing order
    sorted_axes = sorted(k - 1 for k in targets)
    other_axes = tuple(a for a in range(n) if a not in sorted_axes)
    tensor = amps.reshape([2] * n)
    marginal = np.abs(tensor) ** 2
    if other_axes:
        marginal = marginal.sum(axis=other_axes)
    flat = marginal.reshape(-1)
    flat = flat / flat.sum()
    drawn = _sample_index(flat, rng)
    outcome_by_axis = {
        a: (drawn >> (len(sorted_axes) - 1 - i)) & 1
        for i, a in enumerate(sorted_axes)
    }

    # project onto the drawn outcome and renormalize
    slicer: list[object] = [slice(None)] * n
    for a, bit in outcome_by_axis.items():
        slicer[a] = bit
    projected = np.zeros_like(tensor)
    projected[tuple(slicer)] = tensor[tuple(slicer)]
    collapsed = (projected / np.linalg.norm(projected)).reshape(-1)

    if basis is not None:
        collapsed = _rotate_common_raw(collapsed, n, targets, basis.matrix)

    return tuple(outcome_by_axis[k - 1] for k in targets), StateVector(n, collapsed)


def joint_distribution(
    state: StateVector, direction: MeasurementDirection
) -> np.ndarray:
    """Exact outcome probabilities for measuring every qubit along one axis.

    Entry ``i`` is the probability of the outcome whose bits (qubit 1
    first) encode ``i``. Serves as the analytic oracle behind the
    samplers; sums to 1 within 1e-12.
    """
    if direction.is_computational:
        rotated = state
    else:
        rotated = apply_bilateral(state, direction.basis_unitary().dagger())
    probs = rotated.probabilities()
    return probs / probs.sum()


def sample_outcomes(
    state: StateVector,
    direction: MeasurementDirection,
    shots: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Sample ``shots`` independent all-qubit measurements of ``state``.

    Each shot measures a fresh copy along the common axis; returns the
    outcome indices (same encoding as ``joint_distribution``).
    """
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    probs = joint_distribution(state, direction)
    cum = np.cumsum(probs)
    cum[-1] = 1.0
    return np.searchsorted(cum, rng.random(shots), side="right").astype(np.int64)


def random_unitary(rng: np.random.Generator) -> SingleQubitUnitary:
    """Haar-random 2x2 unitary (QR of a complex Gaussian matrix)."""
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return SingleQubitUnitary(q * (d / np.abs(d)))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>| - global-phase-insensitive overlap of two pure states."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("states have different sizes")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))


def format_amplitudes(state: StateVector) -> str:
    """Debug table with one ``index bitstring re im`` row per amplitude."""
    rows = []
    for i, amp in enumerate(state.amplitudes):
        rows.append(
            f"{i:4d} {state.bitstring(i)} {amp.real:+.12f} {amp.imag:+.12f}"
        )
    return "\n".join(rows)
