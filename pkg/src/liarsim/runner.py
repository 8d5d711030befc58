"""Trial runner: repeated distribute-and-test plus one liar-protocol round.

Each trial distributes and verifies a batch of four-qubit systems, then
plays the three-party exchange over the surviving pool under the
configured strategies. Results are aggregated into summary statistics
and optionally written as newline-delimited JSON records that are
byte-identical for a fixed seed.

Determinism contract: trial ``i`` draws from a stream derived from
``(seed, i)`` only, so records are independent of execution order, and
the result file contains no timestamps or timing data (wall-clock
figures go to stdout only).
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .adversary import parse_strategy_A, parse_strategy_B
from .channels import NO_FAULTS, FaultModel
from .distribute_test import (
    DirectionPolicy,
    DistributeStatus,
    DistributionPlan,
    make_verified_pool,
    run_distribute_and_test,
)
from .liar_protocol import (
    Thresholds,
    VerdictValue,
    generate_lists,
    incompatible_positions,
    run_liar_protocol,
    stage1_violations,
    stage2_mismatches,
)

_WILSON_Z = 1.959963984540054  # two-sided 95%

_DETECTION_VERDICTS = frozenset(
    {
        VerdictValue.A_IS_LIAR.value,
        VerdictValue.B_IS_LIAR.value,
        VerdictValue.B_REJECTED_AT_STEP_III.value,
    }
)


def resolve_sizes(
    M: int | None = None,
    N1: int | None = None,
    N2: int | None = None,
    L: int | None = None,
) -> tuple[int, int, int, int]:
    """Fill in unspecified batch sizes around the invariant M = N1 + N2 + L.

    Defaults mirror the distribution plan: the two test subsets each take
    a quarter of the batch. Fully unspecified configs get L = 256.
    """
    if M is None and L is None:
        L = 256
    if M is not None and L is not None:
        rest = M - L
        if N1 is None and N2 is None:
            N1 = math.ceil(rest / 2)
            N2 = rest - N1
        elif N1 is None:
            N1 = rest - N2
        elif N2 is None:
            N2 = rest - N1
    elif L is not None:  # no M: test subsets default to half the pool each
        if N1 is None and N2 is None:
            N1 = N2 = math.ceil(L / 2)
        elif N1 is None:
            N1 = N2
        elif N2 is None:
            N2 = N1
        M = N1 + N2 + L
    else:  # M without L: the default plan split
        if N1 is None and N2 is None:
            plan = DistributionPlan.default(M)
            N1, N2 = plan.N1, plan.N2
        elif N1 is None:
            N1 = N2
        elif N2 is None:
            N2 = N1
        L = M - N1 - N2
    if L < 1 or N1 < 1 or N2 < 1 or M != N1 + N2 + L:
        raise ValueError(
            f"inconsistent sizes: M={M}, N1={N1}, N2={N2}, L={L} "
            "(require M = N1 + N2 + L with all parts >= 1)"
        )
    return M, N1, N2, L


@dataclass(frozen=True)
class TrialConfig:
    """Complete, validated description of one Monte-Carlo experiment."""

    seed: int = 0
    trials: int = 100
    M: int = 512
    N1: int = 128
    N2: int = 128
    L: int = 256
    strategy_a: str = "honest"
    strategy_b: str = "honest"
    qubit_loss_prob: float = 0.0
    source_state: str = "singlet"
    min_fraction: float = 0.5
    direction_policy: str = "random"

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if self.direction_policy not in ("random", "fixed"):
            raise ValueError(
                f"direction_policy must be 'random' or 'fixed', got "
                f"{self.direction_policy!r}"
            )
        # constructing the collaborators validates the remaining fields
        self.plan()
        self.fault_model()
        self.thresholds()
        parse_strategy_A(self.strategy_a)
        parse_strategy_B(self.strategy_b)

    @classmethod
    def build(
        cls,
        M: int | None = None,
        N1: int | None = None,
        N2: int | None = None,
        L: int | None = None,
        **kwargs,
    ) -> "TrialConfig":
        """Construct a config, deriving whichever sizes were omitted."""
        M, N1, N2, L = resolve_sizes(M, N1, N2, L)
        return cls(M=M, N1=N1, N2=N2, L=L, **kwargs)

    def plan(self) -> DistributionPlan:
        return DistributionPlan(M=self.M, N1=self.N1, N2=self.N2, L=self.L)

    def fault_model(self) -> FaultModel:
        return FaultModel(
            qubit_loss_prob=self.qubit_loss_prob, source_state=self.source_state
        )

    def thresholds(self) -> Thresholds:
        return Thresholds(min_fraction=self.min_fraction)

    def policy(self) -> DirectionPolicy:
        return (
            DirectionPolicy.RANDOM
            if self.direction_policy == "random"
            else DirectionPolicy.FIXED
        )


@dataclass(frozen=True)
class TrialResult:
    """Flat per-trial record, serializable as one result-file line."""

    trial: int
    distribute_status: str
    failure_step: str | None = None
    verdict: str | None = None
    evidence_check: str | None = None
    m_AB: int | None = None
    m_AC: int | None = None
    m_BC: int | None = None
    delivered: int | None = None
    claim_length: int | None = None
    forwarded_length: int | None = None
    list_length: int | None = None
    fabricated_for_b: int = 0
    fabricated_passing_b: int = 0
    altered_for_c: int = 0
    altered_passing_c: int = 0
    forged_for_stage2: int = 0
    forged_passing_stage2: int = 0


@dataclass(frozen=True)
class TrialStats:
    """Aggregate statistics over one experiment's trials.

    ``verdict_counts`` buckets every trial, including an entry for runs
    aborted during distribute-and-test, so its values sum to ``trials``.
    Detection counts a trial once any party is rejected or convicted.
    ``mean_trial_seconds`` is measured wall-clock and is never written
    to result files.
    """

    trials: int
    verdict_counts: dict[str, int]
    detection_rate: float
    wilson_low: float
    wilson_high: float
    escape_rate_b: float | None
    escape_rate_stage1: float | None
    escape_rate_stage2: float | None
    mean_claim_length: float | None
    mean_forwarded_length: float | None
    mean_list_length: float | None
    mean_trial_seconds: float = field(compare=False, default=0.0)

    def __post_init__(self) -> None:
        if sum(self.verdict_counts.values()) != self.trials:
            raise ValueError("verdict counts must sum to the trial count")
        for rate in (self.detection_rate, self.wilson_low, self.wilson_high):
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"rate {rate} outside [0, 1]")


DISTRIBUTE_FAILURE = "DISTRIBUTE_FAILURE"


def wilson_interval(successes: int, n: int, z: float = _WILSON_Z) -> tuple[float, float]:
    """Wilson score 95% confidence interval for a binomial proportion."""
    if n == 0:
        return (0.0, 1.0)
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n)) / denom
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == n else min(1.0, center + half)
    return (low, high)


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """The stream for one trial, derived only from (seed, trial_index)."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(trial_index,))
    )


def _escape_counts(lists, a_action, b_action) -> dict[str, int]:
    """Per-entry survival counts for each kind of fabricated entry."""
    counts = dict.fromkeys(
        (
            "fabricated_for_b",
            "fabricated_passing_b",
            "altered_for_c",
            "altered_passing_c",
            "forged_for_stage2",
            "forged_passing_stage2",
        ),
        0,
    )
    fabricated = a_action.fabricated_positions
    if fabricated:
        bad = incompatible_positions(fabricated, lists.b_bits, a_action.m_AB)
        counts["fabricated_for_b"] = len(fabricated)
        counts["fabricated_passing_b"] = len(fabricated) - len(bad)
    altered = a_action.altered_positions
    if altered:
        forged_entries = tuple(a_action.l_AC[j - 1] for j in altered)
        caught = sum(
            int(lists.c_bits[j - 1] != 1 - entry // 2)
            for j, entry in zip(altered, forged_entries)
        )
        counts["altered_for_c"] = len(altered)
        counts["altered_passing_c"] = len(altered) - caught
    if b_action is not None and b_action.fabricated_positions:
        forged = b_action.fabricated_positions
        bad2 = stage2_mismatches(forged, a_action.l_AC, b_action.m_BC)
        counts["forged_for_stage2"] = len(forged)
        counts["forged_passing_stage2"] = len(forged) - len(bad2)
    return counts


def run_single_trial(config: TrialConfig, trial_index: int) -> TrialResult:
    """Play one full trial on the stream derived from (seed, trial_index)."""
    rng = trial_rng(config.seed, trial_index)
    fault = config.fault_model()

    if fault == NO_FAULTS:
        # a fault-free distribute run always succeeds with the pool
        # untouched, so build the verified pool directly
        pool = make_verified_pool(config.L, rng)
    else:
        outcome = run_distribute_and_test(
            config.plan(), fault, rng, direction_policy=config.policy()
        )
        if outcome.status is DistributeStatus.FAILURE:
            return TrialResult(
                trial=trial_index,
                distribute_status=outcome.status.value,
                failure_step=outcome.failure.step,
            )
        pool = outcome.pool

    lists = generate_lists(pool, rng)
    result = run_liar_protocol(
        lists,
        parse_strategy_A(config.strategy_a),
        parse_strategy_B(config.strategy_b),
        thresholds=config.thresholds(),
        rng=rng,
    )
    a_action, b_action = result.a_action, result.b_action
    return TrialResult(
        trial=trial_index,
        distribute_status=DistributeStatus.SUCCESS.value,
        verdict=result.verdict.value.value,
        evidence_check=None if result.verdict.evidence is None else result.verdict.evidence.check,
        m_AB=a_action.m_AB,
        m_AC=a_action.m_AC,
        m_BC=None if b_action is None else b_action.m_BC,
        delivered=result.delivered_message,
        claim_length=len(a_action.positions_for_B),
        forwarded_length=None if b_action is None else len(b_action.forwarded),
        list_length=lists.length,
        **_escape_counts(lists, a_action, b_action),
    )


def _ratio(numer: int, denom: int) -> float | None:
    return None if denom == 0 else numer / denom


def _mean(values: list[int]) -> float | None:
    return None if not values else sum(values) / len(values)


def aggregate(
    results: list[TrialResult], mean_trial_seconds: float = 0.0
) -> TrialStats:
    """Reduce per-trial records to summary statistics.

    Every figure here is a pure function of the records, so the emitted
    summary can be recomputed exactly from the result file.
    """
    counts = {value.value: 0 for value in VerdictValue}
    counts[DISTRIBUTE_FAILURE] = 0
    for r in results:
        counts[DISTRIBUTE_FAILURE if r.verdict is None else r.verdict] += 1
    detected = sum(counts[v] for v in _DETECTION_VERDICTS)
    completed = len(results) - counts[DISTRIBUTE_FAILURE]
    rate = detected / completed if completed else 0.0
    low, high = wilson_interval(detected, completed)
    return TrialStats(
        trials=len(results),
        verdict_counts=counts,
        detection_rate=rate,
        wilson_low=low,
        wilson_high=high,
        escape_rate_b=_ratio(
            sum(r.fabricated_passing_b for r in results),
            sum(r.fabricated_for_b for r in results),
        ),
        escape_rate_stage1=_ratio(
            sum(r.altered_passing_c for r in results),
            sum(r.altered_for_c for r in results),
        ),
        escape_rate_stage2=_ratio(
            sum(r.forged_passing_stage2 for r in results),
            sum(r.forged_for_stage2 for r in results),
        ),
        mean_claim_length=_mean([r.claim_length for r in results if r.claim_length is not None]),
        mean_forwarded_length=_mean(
            [r.forwarded_length for r in results if r.forwarded_length is not None]
        ),
        mean_list_length=_mean([r.list_length for r in results if r.list_length is not None]),
        mean_trial_seconds=mean_trial_seconds,
    )


def _summary_record(config: TrialConfig, stats: TrialStats) -> dict:
    record = {"record": "summary", "config": dataclasses.asdict(config)}
    record.update(dataclasses.asdict(stats))
    del record["mean_trial_seconds"]  # timing never enters the result file
    return record


def format_records(config: TrialConfig, results: list[TrialResult], stats: TrialStats) -> str:
    """Render the result file: one record per line, summary last.

    Keys are sorted and trials appear in index order, so the bytes are a
    pure function of the config.
    """
    lines = []
    for r in sorted(results, key=lambda r: r.trial):
        record = {"record": "trial", **dataclasses.asdict(r)}
        lines.append(json.dumps(record, sort_keys=True, allow_nan=False))
    lines.append(json.dumps(_summary_record(config, stats), sort_keys=True, allow_nan=False))
    return "\n".join(lines) + "\n"


def run_trials(config: TrialConfig, out_path: str | None = None) -> TrialStats:
    """Run every trial, aggregate, and optionally write the result file."""
    started = time.perf_counter()
    results = [run_single_trial(config, i) for i in range(config.trials)]
    elapsed = time.perf_counter() - started
    stats = aggregate(results, mean_trial_seconds=elapsed / config.trials)
    if out_path is not None:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(format_records(config, results, stats))
    return stats


def summarize_to_text(stats: TrialStats) -> str:
    """Human-readable digest for stdout (the only place timing appears)."""
    nonzero = {k: v for k, v in stats.verdict_counts.items() if v}
    lines = [
        f"trials: {stats.trials}",
        f"verdicts: {nonzero}",
        (
            f"detection rate: {stats.detection_rate:.4f} "
            f"(95% CI {stats.wilson_low:.4f}..{stats.wilson_high:.4f})"
        ),
    ]
    for label, value in (
        ("per-entry escape vs B", stats.escape_rate_b),
        ("per-entry escape stage 1", stats.escape_rate_stage1),
        ("per-entry escape stage 2", stats.escape_rate_stage2),
    ):
        if value is not None:
            lines.append(f"{label}: {value:.4f}")
    if stats.mean_claim_length is not None:
        lines.append(f"mean claim length: {stats.mean_claim_length:.2f}")
    if stats.mean_forwarded_length is not None:
        lines.append(f"mean forwarded length: {stats.mean_forwarded_length:.2f}")
    lines.append(f"mean seconds per trial: {stats.mean_trial_seconds:.6f}")
    return "\n".join(lines)
