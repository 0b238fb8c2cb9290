"""Simulator and analysis toolkit for the ideal KLJN secure key exchange.

Two parties encode key bits by switching between a low and a high resistor
while injecting band-limited noise whose amplitude follows the Johnson
square-root-of-resistance law. The package simulates the shared line,
models an eavesdropper who tests resistor hypotheses against the public
signals, and quantifies how much information leaks when the noise sources
deviate from Gaussian shape or from the required amplitude ratio.
"""

__version__ = "0.1.0"

from .noise import (
    DistributionKind,
    NoiseSpec,
    ResistorPair,
    Trace,
    johnson_sigma,
    sample,
    scaled_sigma_high,
    stream,
)
from .line import (
    LineTrace,
    SwitchState,
    line_signals,
    resistance_for,
    sigma_for,
    theoretical_line_variance,
)
from .density import (
    HypothesisWeights,
    PdfGrid,
    TruncationError,
    analytic_pdf,
    cauchy_mixture_scale,
    closure_pair,
    closure_residual,
    convolve_scaled,
    weights,
)
from .eve import (
    AttackTrialSummary,
    EveDecision,
    EveVerdict,
    Hypothesis,
    HypothesisReport,
    ShapeTestResult,
    VarianceTestResult,
    attack,
    attack_trials,
    decision_credit,
    reconstruct_alice,
    reconstruct_bob,
    reference_grid,
    security_sigma_ratio,
    shape_test,
    variance_test,
    wrong_hypothesis_variance,
)
from .protocol import (
    BitRecord,
    Level,
    SessionConfig,
    SessionOutcome,
    SweepPoint,
    classify_level,
    leak_sweep,
    run_session,
)

__all__ = [
    "AttackTrialSummary",
    "BitRecord",
    "DistributionKind",
    "EveDecision",
    "EveVerdict",
    "Hypothesis",
    "HypothesisReport",
    "HypothesisWeights",
    "Level",
    "LineTrace",
    "NoiseSpec",
    "PdfGrid",
    "ResistorPair",
    "SessionConfig",
    "SessionOutcome",
    "ShapeTestResult",
    "SweepPoint",
    "SwitchState",
    "Trace",
    "TruncationError",
    "VarianceTestResult",
    "analytic_pdf",
    "attack",
    "attack_trials",
    "cauchy_mixture_scale",
    "classify_level",
    "closure_pair",
    "closure_residual",
    "convolve_scaled",
    "decision_credit",
    "johnson_sigma",
    "leak_sweep",
    "line_signals",
    "reconstruct_alice",
    "reconstruct_bob",
    "reference_grid",
    "resistance_for",
    "run_session",
    "sample",
    "scaled_sigma_high",
    "security_sigma_ratio",
    "shape_test",
    "sigma_for",
    "stream",
    "theoretical_line_variance",
    "variance_test",
    "weights",
    "wrong_hypothesis_variance",
    "__version__",
]
