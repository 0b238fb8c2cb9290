"""Eavesdropper model: hypothesis inversion and statistical detection.

The observer knows the resistor pair and both noise specs but not who
holds which resistor during a mixed-state bit. She inverts the line
equations under each of the two mixed hypotheses and asks, for each one,
whether the reconstructed sources look like the sources the hypothesis
claims they are. Under the correct hypothesis the reconstruction is exact.
Under the wrong one it is a scaled mixture of both sources, and whether
that mixture is distinguishable from a legitimate source is precisely the
security question: Gaussian shape plus the square-root amplitude law make
it indistinguishable even in variance, and any deviation opens a gap that
the two tests below can see.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

from .density import PdfGrid, analytic_pdf, symmetric_grid
from .line import LineTrace, SwitchState, line_signals, resistance_for
from .noise import DistributionKind, NoiseSpec, ResistorPair, Trace, sample, stream

MIN_TEST_SAMPLES = 100

# Tabulation policy for reference densities handed to the shape test.
# Uniform gets a finer grid because its jump discontinuities dominate
# the CDF interpolation error; Cauchy needs width, not resolution.
_REFERENCE_POLICY = {
    DistributionKind.GAUSSIAN: (8.0, 1.0 / 200.0),
    DistributionKind.UNIFORM: (8.0, 1.0 / 2000.0),
    DistributionKind.CAUCHY: (800.0, 1.0 / 200.0),
}


class EveDecision(str, Enum):
    """Outcome of one attack on one mixed-state bit."""

    ALICE_LOW = "alice_low"
    ALICE_HIGH = "alice_high"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class Hypothesis:
    """A candidate assignment of switch states to the two parties."""

    alice_state: SwitchState
    bob_state: SwitchState

    def __post_init__(self) -> None:
        if self.alice_state is self.bob_state:
            raise ValueError("only mixed states are ambiguous, states must differ")


@dataclass(frozen=True)
class VarianceTestResult:
    """Two-sided z test of a sample second moment against a known variance.

    The sources are zero-mean by construction, so the variance estimator
    is the plain mean of squares and ``z`` compares it to the expected
    variance in units of the Gaussian-sampling standard error
    ``expected * sqrt(2 / n)``.
    """

    n: int
    sample_variance: float
    expected_variance: float
    z: float
    p_value: float
    reject: bool

    def to_dict(self) -> dict:
        return {
            "expected_variance": self.expected_variance,
            "n": self.n,
            "p_value": self.p_value,
            "reject": self.reject,
            "sample_variance": self.sample_variance,
            "z": self.z,
        }


@dataclass(frozen=True)
class ShapeTestResult:
    """One-sample Kolmogorov-Smirnov test against a tabulated density."""

    n: int
    statistic: float
    p_value: float
    reject: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p_value": self.p_value,
            "reject": self.reject,
            "statistic": self.statistic,
        }


@dataclass(frozen=True)
class HypothesisReport:
    """All sub-test results for one candidate assignment.

    Variance entries are ``None`` when the corresponding source is
    Cauchy, which has no variance to test.
    """

    alice_variance: VarianceTestResult | None
    bob_variance: VarianceTestResult | None
    alice_shape: ShapeTestResult
    bob_shape: ShapeTestResult
    rejected: bool

    def to_dict(self) -> dict:
        return {
            "alice_shape": self.alice_shape.to_dict(),
            "alice_variance": None if self.alice_variance is None else self.alice_variance.to_dict(),
            "bob_shape": self.bob_shape.to_dict(),
            "bob_variance": None if self.bob_variance is None else self.bob_variance.to_dict(),
            "rejected": self.rejected,
        }


@dataclass(frozen=True)
class EveVerdict:
    """Attack outcome: a decision plus the evidence behind it.

    The decision names the surviving hypothesis when exactly one of the
    two was rejected at the configured significance; it is undecided when
    both survive (the secure situation) and also when both are rejected,
    which points at a non-mixed bit or a model mismatch rather than at
    either mixed assignment.
    """

    decision: EveDecision
    significance: float
    reports: dict[str, HypothesisReport]

    def to_dict(self) -> dict:
        return {
            "decision": self.decision.value,
            "hypotheses": {k: v.to_dict() for k, v in sorted(self.reports.items())},
            "significance": self.significance,
        }


def reconstruct_alice(line: LineTrace, r_alice: float) -> Trace:
    """Invert the loop for Alice's source assuming she presents ``r_alice``."""
    if r_alice <= 0.0:
        raise ValueError("resistance must be positive")
    return Trace(line.voltage.samples - line.current.samples * r_alice)


def reconstruct_bob(line: LineTrace, r_bob: float) -> Trace:
    """Invert the loop for Bob's source assuming he presents ``r_bob``."""
    if r_bob <= 0.0:
        raise ValueError("resistance must be positive")
    return Trace(line.voltage.samples + line.current.samples * r_bob)


def security_sigma_ratio(pair: ResistorPair) -> float:
    """Amplitude ratio ``sigma_high / sigma_low`` that closes the variance leak."""
    return math.sqrt(pair.r_high / pair.r_low)


def wrong_hypothesis_variance(pair: ResistorPair, sigma_low: float, sigma_high: float) -> float:
    """Variance of the reconstruction made under the wrong resistor guess.

    For a true low/high bit inverted with the resistors swapped, the
    reconstruction mixes both sources and its variance is
    ``(4 sigma_low^2 r_high^2 + sigma_high^2 (r_high - r_low)^2) /
    (r_low + r_high)^2``. At the square-root amplitude ratio this equals
    ``sigma_high^2`` exactly, which is why the variance test alone cannot
    break a compliant system.
    """
    if sigma_low <= 0.0 or sigma_high <= 0.0:
        raise ValueError("sigmas must be positive")
    denom = (pair.r_low + pair.r_high) ** 2
    return (
        4.0 * sigma_low**2 * pair.r_high**2
        + sigma_high**2 * (pair.r_high - pair.r_low) ** 2
    ) / denom


def variance_test(samples: Trace, expected_sigma: float, significance: float) -> VarianceTestResult:
    """Test whether a zero-mean trace has the claimed standard deviation."""
    n = len(samples)
    if n < MIN_TEST_SAMPLES:
        raise ValueError(f"variance test needs at least {MIN_TEST_SAMPLES} samples")
    if expected_sigma <= 0.0:
        raise ValueError("expected_sigma must be positive")
    if not 0.0 < significance < 1.0:
        raise ValueError("significance must lie in (0, 1)")
    expected = expected_sigma**2
    observed = float(np.mean(samples.samples**2))
    z = (observed - expected) / (expected * math.sqrt(2.0 / n))
    p = 2.0 * float(special.ndtr(-abs(z)))
    return VarianceTestResult(
        n=n,
        sample_variance=observed,
        expected_variance=expected,
        z=z,
        p_value=p,
        reject=p < significance,
    )


def shape_test(samples: Trace, reference: PdfGrid, significance: float) -> ShapeTestResult:
    """One-sample KS test of a trace against a tabulated reference density.

    The reference CDF is the cumulative trapezoid of the grid; sample CDF
    values outside the grid clamp to 0 or 1. The p-value uses the
    asymptotic Kolmogorov distribution of ``sqrt(n) * D``.
    """
    n = len(samples)
    if n < MIN_TEST_SAMPLES:
        raise ValueError(f"shape test needs at least {MIN_TEST_SAMPLES} samples")
    if not 0.0 < significance < 1.0:
        raise ValueError("significance must lie in (0, 1)")
    if abs(reference.integral() - 1.0) > 1e-6:
        raise ValueError("reference density is not normalized")
    xs = np.sort(samples.samples)
    cdf = np.interp(xs, reference.x, reference.cdf())
    i = np.arange(1, n + 1, dtype=np.float64)
    d_plus = float(np.max(i / n - cdf))
    d_minus = float(np.max(cdf - (i - 1.0) / n))
    statistic = max(d_plus, d_minus)
    p = float(special.kolmogorov(math.sqrt(n) * statistic))
    return ShapeTestResult(n=n, statistic=statistic, p_value=p, reject=p < significance)


def reference_grid(spec: NoiseSpec) -> PdfGrid:
    """Tabulate the density of a noise spec for use as a shape reference."""
    widths, steps = _REFERENCE_POLICY[spec.kind]
    return analytic_pdf(
        spec.kind,
        spec.scale,
        *symmetric_grid(widths * spec.scale, steps * spec.scale),
    )


def attack(
    line: LineTrace,
    pair: ResistorPair,
    spec_low: NoiseSpec,
    spec_high: NoiseSpec,
    significance: float = 0.01,
    references: tuple[PdfGrid, PdfGrid] | None = None,
) -> EveVerdict:
    """Try both mixed-state hypotheses against one bit's line signals.

    Each hypothesis is screened with a variance test and a shape test per
    party; the per-test level is the configured significance divided by
    the number of sub-tests (Bonferroni), so a true hypothesis survives
    with probability at least ``1 - significance``. ``references`` lets a
    caller reuse pre-tabulated low and high reference densities across
    many bits.
    """
    if not 0.0 < significance < 1.0:
        raise ValueError("significance must lie in (0, 1)")
    if references is None:
        references = (reference_grid(spec_low), reference_grid(spec_high))
    by_state = {
        SwitchState.LOW: (spec_low, references[0]),
        SwitchState.HIGH: (spec_high, references[1]),
    }
    reports: dict[str, HypothesisReport] = {}
    for decision, hyp in (
        (EveDecision.ALICE_LOW, Hypothesis(SwitchState.LOW, SwitchState.HIGH)),
        (EveDecision.ALICE_HIGH, Hypothesis(SwitchState.HIGH, SwitchState.LOW)),
    ):
        est_alice = reconstruct_alice(line, resistance_for(pair, hyp.alice_state))
        est_bob = reconstruct_bob(line, resistance_for(pair, hyp.bob_state))
        parties = (
            (est_alice, *by_state[hyp.alice_state]),
            (est_bob, *by_state[hyp.bob_state]),
        )
        n_tests = sum(1 if spec.kind is DistributionKind.CAUCHY else 2 for _, spec, _ in parties)
        level = significance / n_tests
        variances: list[VarianceTestResult | None] = []
        shapes: list[ShapeTestResult] = []
        for trace, spec, ref in parties:
            if spec.kind is DistributionKind.CAUCHY:
                variances.append(None)
            else:
                variances.append(variance_test(trace, spec.scale, level))
            shapes.append(shape_test(trace, ref, level))
        rejected = any(r.reject for r in variances if r is not None) or any(
            r.reject for r in shapes
        )
        reports[decision.value] = HypothesisReport(
            alice_variance=variances[0],
            bob_variance=variances[1],
            alice_shape=shapes[0],
            bob_shape=shapes[1],
            rejected=rejected,
        )
    low_rejected = reports[EveDecision.ALICE_LOW.value].rejected
    high_rejected = reports[EveDecision.ALICE_HIGH.value].rejected
    if low_rejected and not high_rejected:
        decision = EveDecision.ALICE_HIGH
    elif high_rejected and not low_rejected:
        decision = EveDecision.ALICE_LOW
    else:
        decision = EveDecision.UNDECIDED
    return EveVerdict(decision=decision, significance=significance, reports=reports)


def decision_credit(decision: EveDecision, true_alice_state: SwitchState) -> float:
    """Score one attack decision: 1 correct, 0 wrong, 0.5 undecided."""
    if decision is EveDecision.UNDECIDED:
        return 0.5
    guessed_low = decision is EveDecision.ALICE_LOW
    truly_low = true_alice_state is SwitchState.LOW
    return 1.0 if guessed_low == truly_low else 0.0


@dataclass(frozen=True)
class AttackTrialSummary:
    """Aggregate outcome of repeated attacks on fresh mixed-state bits."""

    trials: int
    correct: int
    wrong: int
    undecided: int
    accuracy: float
    decisions: tuple[EveDecision, ...]
    truths: tuple[SwitchState, ...]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "correct": self.correct,
            "trials": self.trials,
            "undecided": self.undecided,
            "wrong": self.wrong,
        }


def attack_trials(
    pair: ResistorPair,
    spec_low: NoiseSpec,
    spec_high: NoiseSpec,
    samples_per_trial: int,
    trials: int,
    significance: float = 0.01,
    seed: int = 0,
) -> AttackTrialSummary:
    """Measure attack accuracy over independent mixed-state bits.

    Each trial draws a fresh random mixed state and fresh sources, runs
    the attack, and scores it with half credit for undecided outcomes, so
    0.5 is the blind-guessing baseline. Streams are derived per trial
    from ``seed`` exactly as the protocol derives per-bit streams.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if samples_per_trial < MIN_TEST_SAMPLES:
        raise ValueError(f"trials need at least {MIN_TEST_SAMPLES} samples each")
    references = (reference_grid(spec_low), reference_grid(spec_high))
    by_state = {SwitchState.LOW: spec_low, SwitchState.HIGH: spec_high}
    decisions: list[EveDecision] = []
    truths: list[SwitchState] = []
    credit = 0.0
    for t in range(trials):
        alice_low = bool(stream(seed, t, 0).integers(0, 2))
        a_state = SwitchState.LOW if alice_low else SwitchState.HIGH
        b_state = SwitchState.HIGH if alice_low else SwitchState.LOW
        v_a = sample(by_state[a_state], samples_per_trial, stream(seed, t, 1))
        v_b = sample(by_state[b_state], samples_per_trial, stream(seed, t, 2))
        line = line_signals(v_a, v_b, resistance_for(pair, a_state), resistance_for(pair, b_state))
        verdict = attack(line, pair, spec_low, spec_high, significance, references=references)
        decisions.append(verdict.decision)
        truths.append(a_state)
        credit += decision_credit(verdict.decision, a_state)
    n_correct = sum(
        1 for d, s in zip(decisions, truths) if d is not EveDecision.UNDECIDED and decision_credit(d, s) == 1.0
    )
    n_undecided = sum(1 for d in decisions if d is EveDecision.UNDECIDED)
    return AttackTrialSummary(
        trials=trials,
        correct=n_correct,
        wrong=trials - n_correct - n_undecided,
        undecided=n_undecided,
        accuracy=credit / trials,
        decisions=tuple(decisions),
        truths=tuple(truths),
    )
