"""Party strategies: honest behavior and parameterized cheating.

Adversaries here are classical-post-measurement: they measure their
qubits honestly (the distribute-and-test phase already certified the
state) and cheat only on the classical data they send. Fabricated
claims are always placed on mixed-outcome positions - under unordered
pair delivery that is the cheater's best option, since claiming a
position contradicted by the cheater's own data is strictly worse.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .liar_protocol import EXPECTED_DOUBLE_FRACTION, PartyLists, extract_positions


class AKind(enum.Enum):
    HONEST = "honest"
    SPLIT_MESSAGE = "split"
    FORGED_FULL_LIST = "forgefull"


class BKind(enum.Enum):
    HONEST = "honest"
    FLIP_AND_FORGE = "flipforge"


@dataclass(frozen=True)
class StrategyA:
    """A's behavior: honest, split messages, or forge the full list.

    ``message`` fixes the bit A wants to deliver; None draws it per run.
    SPLIT_MESSAGE sends B the opposite of what it sends C, padding B's
    position list with ``fabrication_count`` fabricated entries.
    FORGED_FULL_LIST keeps the messages honest but rewrites
    ``altered_count`` mixed positions of the full list as doubles (a
    calibration strategy for the per-entry detection rate).
    """

    kind: AKind = AKind.HONEST
    fabrication_count: int = 0
    altered_count: int = 0
    message: int | None = None

    def __post_init__(self) -> None:
        if self.fabrication_count < 0 or self.altered_count < 0:
            raise ValueError("counts must be nonnegative")
        if self.message not in (None, 0, 1):
            raise ValueError(f"message must be 0, 1 or None, got {self.message!r}")

    @property
    def is_honest(self) -> bool:
        return self.kind is AKind.HONEST

    @classmethod
    def honest(cls, message: int | None = None) -> "StrategyA":
        return cls(AKind.HONEST, message=message)

    @classmethod
    def split_message(cls, n: int, message: int | None = None) -> "StrategyA":
        return cls(AKind.SPLIT_MESSAGE, fabrication_count=n, message=message)

    @classmethod
    def forged_full_list(cls, k: int, message: int | None = None) -> "StrategyA":
        return cls(AKind.FORGED_FULL_LIST, altered_count=k, message=message)


@dataclass(frozen=True)
class StrategyB:
    """B's behavior: honest forwarding, or flip the message and forge.

    FLIP_AND_FORGE forwards ``fake_count`` positions B's own bits make
    plausible for the flipped message; None targets the expected honest
    claim length.
    """

    kind: BKind = BKind.HONEST
    fake_count: int | None = None

    def __post_init__(self) -> None:
        if self.fake_count is not None and self.fake_count < 0:
            raise ValueError("fake_count must be nonnegative")

    @property
    def is_honest(self) -> bool:
        return self.kind is BKind.HONEST

    @classmethod
    def honest(cls) -> "StrategyB":
        return cls(BKind.HONEST)

    @classmethod
    def flip_and_forge(cls, k: int | None = None) -> "StrategyB":
        return cls(BKind.FLIP_AND_FORGE, fake_count=k)


@dataclass(frozen=True)
class ActionA:
    """Everything A emits, plus audit fields naming her fabrications."""

    m_AB: int
    positions_for_B: tuple[int, ...]
    m_AC: int
    l_AC: tuple[int, ...]
    fabricated_positions: tuple[int, ...] = ()
    altered_positions: tuple[int, ...] = ()
    capped: bool = False


@dataclass(frozen=True)
class ActionB:
    m_BC: int
    forwarded: tuple[int, ...]
    fabricated_positions: tuple[int, ...] = ()
    capped: bool = False


def _coerce_a_list(l_A: PartyLists | np.ndarray) -> np.ndarray:
    return l_A.a_ones if isinstance(l_A, PartyLists) else np.asarray(l_A)


def _resolve_message(strategy: StrategyA, rng: np.random.Generator) -> int:
    if strategy.message is not None:
        return strategy.message
    return int(rng.integers(0, 2))


def _draw_sorted(
    candidates: np.ndarray, count: int, rng: np.random.Generator
) -> tuple[int, ...]:
    chosen = rng.choice(candidates, size=count, replace=False)
    return tuple(int(j) for j in np.sort(chosen))


def strategy_A_act(
    strategy: StrategyA, l_A: PartyLists | np.ndarray, rng: np.random.Generator
) -> ActionA:
    """Produce A's two outgoing transmissions from her private list.

    Reads nothing but A's own list and the strategy parameters. When a
    cheating strategy asks for more fabrications than there are mixed
    positions, the count is capped and flagged.
    """
    arr = _coerce_a_list(l_A)
    m = _resolve_message(strategy, rng)
    honest_positions = extract_positions(arr, m)

    if strategy.kind is AKind.HONEST:
        return ActionA(m, honest_positions, m, tuple(int(x) for x in arr))

    mixed = np.flatnonzero(arr == 1) + 1
    if strategy.kind is AKind.SPLIT_MESSAGE:
        m_AC = 1 - m
        n = min(strategy.fabrication_count, mixed.size)
        fabricated = _draw_sorted(mixed, n, rng)
        positions = tuple(sorted(honest_positions + fabricated))
        forged = arr.copy()
        forged[arr == 1] = 2 * m_AC
        return ActionA(
            m_AB=m,
            positions_for_B=positions,
            m_AC=m_AC,
            l_AC=tuple(int(x) for x in forged),
            fabricated_positions=fabricated,
            altered_positions=tuple(int(j) for j in mixed),
            capped=n < strategy.fabrication_count,
        )

    # FORGED_FULL_LIST: honest messages, k mixed entries rewritten as
    # doubles of the message in the list sent to C.
    k = min(strategy.altered_count, mixed.size)
    altered = _draw_sorted(mixed, k, rng)
    forged = arr.copy()
    if altered:
        forged[np.asarray(altered) - 1] = 2 * m
    return ActionA(
        m_AB=m,
        positions_for_B=honest_positions,
        m_AC=m,
        l_AC=tuple(int(x) for x in forged),
        altered_positions=altered,
        capped=k < strategy.altered_count,
    )


def strategy_B_act(
    strategy: StrategyB,
    received: tuple[int, tuple[int, ...]],
    l_B: PartyLists | np.ndarray,
    rng: np.random.Generator,
) -> ActionB:
    """Produce B's transmission to C from what he received and his list."""
    m_AB, positions = received
    bits = l_B.b_bits if isinstance(l_B, PartyLists) else np.asarray(l_B)

    if strategy.kind is BKind.HONEST:
        return ActionB(m_AB, tuple(int(j) for j in positions))

    m_BC = 1 - m_AB
    plausible = np.flatnonzero(bits == 1 - m_BC) + 1
    target = strategy.fake_count
    if target is None:
        target = round(EXPECTED_DOUBLE_FRACTION * len(bits))
    k = min(target, plausible.size)
    forwarded = _draw_sorted(plausible, k, rng)
    return ActionB(
        m_BC=m_BC,
        forwarded=forwarded,
        fabricated_positions=forwarded,
        capped=k < target,
    )


def parse_strategy_A(text: str) -> StrategyA:
    """Parse CLI strategy descriptors like "honest" or "split:n=3"."""
    name, params = _split_descriptor(text)
    if name == "honest":
        _require_params(text, params, set())
        return StrategyA.honest()
    if name == "split":
        _require_params(text, params, {"n"})
        return StrategyA.split_message(params.get("n", 0))
    if name == "forgefull":
        _require_params(text, params, {"k"})
        return StrategyA.forged_full_list(params.get("k", 0))
    raise ValueError(
        f"unknown strategy {text!r}: expected honest, split:n=N, or forgefull:k=K"
    )


def parse_strategy_B(text: str) -> StrategyB:
    """Parse CLI strategy descriptors like "honest" or "flipforge:k=40"."""
    name, params = _split_descriptor(text)
    if name == "honest":
        _require_params(text, params, set())
        return StrategyB.honest()
    if name == "flipforge":
        _require_params(text, params, {"k"})
        return StrategyB.flip_and_forge(params.get("k"))
    raise ValueError(
        f"unknown strategy {text!r}: expected honest or flipforge:k=K"
    )


def _split_descriptor(text: str) -> tuple[str, dict[str, int]]:
    name, _, rest = text.strip().partition(":")
    params: dict[str, int] = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq or not value.lstrip("-").isdigit():
                raise ValueError(f"malformed strategy parameter {item!r} in {text!r}")
            params[key.strip()] = int(value)
    return name.strip().lower(), params


def _require_params(text: str, params: dict[str, int], allowed: set[str]) -> None:
    extra = set(params) - allowed
    if extra:
        raise ValueError(f"unexpected parameter(s) {sorted(extra)} in {text!r}")
    if any(value < 0 for value in params.values()):
        raise ValueError(f"strategy counts must be nonnegative in {text!r}")
