"""Numerical density machinery for the eavesdropper's reconstruction.

When an observer inverts the line equations under the wrong resistor
hypothesis, the result is not one source but a weighted sum of both unit
shapes, with weights fixed by the resistor ratio and the source scales.
Its density is therefore a convolution of two scaled copies of the family
shape. For the Gaussian family that convolution lands back on the family
(only wider), so the mixture is indistinguishable from a legitimate
source. For any other finite-variance family it does not, and the
mismatch is an exploitable fingerprint. This module computes those
convolutions and the size of the mismatch on explicit grids.

Grid conventions
----------------
A density lives on a uniform grid ``x0 + k * dx`` for ``k in [0, m)``.
Integrals use the trapezoidal rule. Builders renormalize to unit mass and
record the pre-normalization deficit; if the closed-form tail mass left
outside the grid reaches 0.1 percent the grid is rejected outright, since
silently renormalizing that much mass would distort tail comparisons.
Default resolution is 200 points per scale unit and default extent is 8
scale units each side, which keeps Gaussian and uniform tail loss far
below the rejection threshold. Cauchy tails decay only quadratically, so
Cauchy grids must be requested much wider explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special

from .noise import DistributionKind, ResistorPair

NORMALIZATION_TOL = 1e-6
TRUNCATION_BUDGET = 1e-3
POINTS_PER_SCALE = 200
HALF_WIDTH_SCALES = 8.0

_SQRT3 = math.sqrt(3.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


class TruncationError(ValueError):
    """Raised when a requested grid cannot hold enough probability mass."""


@dataclass(frozen=True)
class PdfGrid:
    """A probability density tabulated on a uniform grid.

    ``truncation_deficit`` is the mass that renormalization had to add
    back (negative when the raw tabulation overshot unit mass). The
    stored values always integrate to 1 within ``NORMALIZATION_TOL``.
    """

    x0: float
    dx: float
    values: np.ndarray
    truncation_deficit: float = 0.0

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("a density grid needs at least two points")
        if not (math.isfinite(self.x0) and math.isfinite(self.dx)) or self.dx <= 0.0:
            raise ValueError("grid spacing must be positive and finite")
        if not np.isfinite(arr).all():
            raise ValueError("density values must be finite")
        if (arr < 0.0).any():
            raise ValueError("density values must be non-negative")
        total = float(np.trapezoid(arr, dx=self.dx))
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"density must integrate to 1, got {total!r}")
        if arr is self.values:
            arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def x(self) -> np.ndarray:
        """Grid abscissae."""
        return self.x0 + self.dx * np.arange(self.values.size)

    def integral(self) -> float:
        return float(np.trapezoid(self.values, dx=self.dx))

    def second_moment(self) -> float:
        """Trapezoidal estimate of the variance about zero."""
        return float(np.trapezoid(self.values * self.x**2, dx=self.dx))

    def cdf(self) -> np.ndarray:
        """Cumulative trapezoid of the values, rescaled to end at 1."""
        steps = 0.5 * (self.values[1:] + self.values[:-1]) * self.dx
        out = np.concatenate(([0.0], np.cumsum(steps)))
        return out / out[-1]

    def to_csv(self, path: str | Path) -> None:
        xs = self.x
        with open(path, "w", newline="") as fh:
            fh.write("x,density\n")
            for xv, pv in zip(xs, self.values):
                fh.write(f"{float(xv)!r},{float(pv)!r}\n")


@dataclass(frozen=True)
class HypothesisWeights:
    """Scale factors of the two unit shapes in a wrong-hypothesis mix.

    ``beta`` may be zero, the degenerate case of an equal-resistor pair
    where the second component vanishes.
    """

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("weights must be finite")
        if self.alpha <= 0.0 or self.beta < 0.0:
            raise ValueError("alpha must be positive and beta non-negative")


def weights(pair: ResistorPair, sigma_low: float, sigma_high: float) -> HypothesisWeights:
    """Mixture weights seen by an observer assuming the wrong resistor.

    When the true state is low/high but the observer inverts for Alice
    with the high resistance, the reconstruction equals
    ``alpha * (low unit shape) + beta * (high unit shape)`` with
    ``alpha = sigma_low * 2 r_high / (r_low + r_high)`` and
    ``beta = sigma_high * (r_high - r_low) / (r_low + r_high)``.
    """
    if sigma_low <= 0.0 or sigma_high <= 0.0:
        raise ValueError("sigmas must be positive")
    denom = pair.r_low + pair.r_high
    alpha = sigma_low * 2.0 * pair.r_high / denom
    beta = sigma_high * (pair.r_high - pair.r_low) / denom
    return HypothesisWeights(alpha=alpha, beta=beta)


def family_pdf(kind: DistributionKind, scale: float, x: np.ndarray) -> np.ndarray:
    """Closed-form density of one family member, evaluated pointwise.

    The uniform density takes the midpoint value at its two jump points,
    which keeps trapezoidal integrals of grids whose endpoints straddle
    the jumps as close to exact as the grid permits.
    """
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    x = np.asarray(x, dtype=np.float64)
    if kind is DistributionKind.GAUSSIAN:
        return np.exp(-0.5 * (x / scale) ** 2) / (scale * _SQRT2PI)
    if kind is DistributionKind.UNIFORM:
        half = _SQRT3 * scale
        height = 1.0 / (2.0 * half)
        at_edge = np.isclose(np.abs(x), half, rtol=1e-12, atol=0.0)
        inside = np.abs(x) < half
        return np.select([at_edge, inside], [0.5 * height, height], default=0.0)
    if kind is DistributionKind.CAUCHY:
        return scale / (math.pi * (x * x + scale * scale))
    raise ValueError(f"unknown distribution kind: {kind!r}")


def family_cdf(kind: DistributionKind, scale: float, x: np.ndarray) -> np.ndarray:
    """Closed-form CDF of one family member, used for tail accounting."""
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    x = np.asarray(x, dtype=np.float64)
    if kind is DistributionKind.GAUSSIAN:
        return special.ndtr(x / scale)
    if kind is DistributionKind.UNIFORM:
        half = _SQRT3 * scale
        return np.clip((x + half) / (2.0 * half), 0.0, 1.0)
    if kind is DistributionKind.CAUCHY:
        return 0.5 + np.arctan(x / scale) / math.pi
    raise ValueError(f"unknown distribution kind: {kind!r}")


def symmetric_grid(half_width: float, dx: float) -> tuple[float, float, int]:
    """Grid parameters ``(x0, dx, m)`` covering ``[-half_width, half_width]``."""
    if half_width <= 0.0 or dx <= 0.0:
        raise ValueError("half_width and dx must be positive")
    k = int(round(half_width / dx))
    if k < 1:
        raise ValueError("grid must span at least one step each side")
    return (-k * dx, dx, 2 * k + 1)


def analytic_pdf(kind: DistributionKind, scale: float, x0: float, dx: float, m: int) -> PdfGrid:
    """Tabulate a family density on an explicit grid and renormalize.

    Raises
    ------
    TruncationError
        If the closed-form mass outside ``[x0, x0 + (m - 1) dx]`` is at
        least ``TRUNCATION_BUDGET``; such a grid would hide real tail
        probability behind renormalization.
    """
    if m < 2:
        raise ValueError("grid needs at least two points")
    if dx <= 0.0:
        raise ValueError("dx must be positive")
    x_end = x0 + dx * (m - 1)
    inside = float(family_cdf(kind, scale, np.array([x_end]))[0]) - float(
        family_cdf(kind, scale, np.array([x0]))[0]
    )
    missing = 1.0 - inside
    if missing >= TRUNCATION_BUDGET:
        raise TruncationError(
            f"grid [{x0}, {x_end}] misses {missing:.3e} of the {kind.value} mass; widen it"
        )
    xs = x0 + dx * np.arange(m)
    raw = family_pdf(kind, scale, xs)
    total = float(np.trapezoid(raw, dx=dx))
    if total <= 0.0:
        raise TruncationError("grid holds no probability mass")
    return PdfGrid(x0=x0, dx=dx, values=raw / total, truncation_deficit=1.0 - total)


def _component_grids(
    kind: DistributionKind,
    w: HypothesisWeights,
    dx: float | None,
    half_width: float | None,
) -> tuple[PdfGrid, PdfGrid, float, float]:
    scales = [w.alpha] if w.beta == 0.0 else [w.alpha, w.beta]
    if dx is None:
        dx = min(scales) / POINTS_PER_SCALE
    if half_width is None:
        half_width = HALF_WIDTH_SCALES * max(scales)
    if w.beta == 0.0:
        grid = analytic_pdf(kind, w.alpha, *symmetric_grid(half_width, dx))
        return grid, grid, dx, half_width
    a = analytic_pdf(kind, w.alpha, *symmetric_grid(half_width, dx))
    b = analytic_pdf(kind, w.beta, *symmetric_grid(half_width, dx))
    return a, b, dx, half_width


def _convolve_grids(a: PdfGrid, b: PdfGrid) -> PdfGrid:
    if not math.isclose(a.dx, b.dx, rel_tol=1e-12):
        raise ValueError("grids must share the same spacing")
    dx = a.dx
    # Trapezoidal end weights make the discrete sum match the
    # trapezoidal integral of the continuous convolution.
    va = a.values.copy()
    vb = b.values.copy()
    va[0] *= 0.5
    va[-1] *= 0.5
    vb[0] *= 0.5
    vb[-1] *= 0.5
    raw = np.convolve(va, vb) * dx
    raw = np.maximum(raw, 0.0)
    total = float(np.trapezoid(raw, dx=dx))
    if total <= 0.0:
        raise TruncationError("convolution holds no probability mass")
    return PdfGrid(
        x0=a.x0 + b.x0,
        dx=dx,
        values=raw / total,
        truncation_deficit=1.0 - total,
    )


def convolve_scaled(
    source: DistributionKind | tuple[PdfGrid, PdfGrid],
    w: HypothesisWeights,
    *,
    dx: float | None = None,
    half_width: float | None = None,
) -> PdfGrid:
    """Density of ``alpha * X + beta * Y`` for independent unit draws.

    ``source`` is either a distribution kind, in which case the two
    scaled component densities are tabulated internally, or a pair of
    already tabulated grids sharing one spacing. With ``beta == 0`` the
    second component is a point mass and the alpha-scaled density is
    returned directly. The result is renormalized, with the deficit
    recorded on the grid.
    """
    if isinstance(source, DistributionKind):
        a, b, _, _ = _component_grids(source, w, dx, half_width)
        if w.beta == 0.0:
            return a
        return _convolve_grids(a, b)
    a, b = source
    return _convolve_grids(a, b)


def closure_pair(
    kind: DistributionKind,
    w: HypothesisWeights,
    *,
    dx: float | None = None,
    half_width: float | None = None,
) -> tuple[PdfGrid, PdfGrid]:
    """The mixture density and the family member with matched variance.

    Returns ``(mixture, reference)`` on one common grid, where the
    reference has scale ``sqrt(alpha^2 + beta^2)``. The family is closed
    under the mixture exactly when these two coincide. Cauchy is refused
    because no variance exists to match; see
    :func:`cauchy_mixture_scale` for its scale arithmetic.
    """
    if kind is DistributionKind.CAUCHY:
        raise ValueError(
            "closure comparison matches variances, which the Cauchy family lacks; "
            "use cauchy_mixture_scale for its additive scale identity"
        )
    sigma_mix = math.hypot(w.alpha, w.beta)
    if half_width is None:
        half_width = HALF_WIDTH_SCALES * sigma_mix
    mixture = convolve_scaled(kind, w, dx=dx, half_width=half_width)
    reference = analytic_pdf(kind, sigma_mix, mixture.x0, mixture.dx, mixture.values.size)
    return mixture, reference


def closure_residual(
    kind: DistributionKind,
    w: HypothesisWeights,
    *,
    dx: float | None = None,
    half_width: float | None = None,
) -> float:
    """L1 distance between the mixture and the variance-matched family member.

    Zero (up to grid effects) means the wrong-hypothesis reconstruction is
    exactly a legitimate family member and shape analysis learns nothing.
    The Gaussian family has this closure; finite-variance alternatives do
    not, and the residual is their detectable signature.
    """
    mixture, reference = closure_pair(kind, w, dx=dx, half_width=half_width)
    return float(np.trapezoid(np.abs(mixture.values - reference.values), dx=mixture.dx))


def cauchy_mixture_scale(w: HypothesisWeights, gamma: float = 1.0) -> float:
    """Scale of a sum of independent scaled Cauchy draws.

    Cauchy scales add linearly under convolution, so the mixture is again
    Cauchy with scale ``(alpha + beta) * gamma``. The family is closed in
    shape, but matching also the observed scale imposes a different
    amplitude law than the finite-variance families, and the absent
    variance rules the Cauchy out for the level-based protocol anyway.
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    return (w.alpha + w.beta) * gamma
