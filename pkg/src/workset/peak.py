"""Streaming peak detection with a dispersion-adaptive threshold.

The detector keeps an exponential moving average ``mean`` and moving
variance ``var`` of the sample stream. For each new sample x (after the
first, which only seeds the statistics) it computes

    distance   = |x - mean|
    dispersion = var / mean          (0 when mean is ~0)
    c          = 1 - exp(-dispersion / 2)
    threshold  = c * g * var + (1 - c) * g * mean

and flags a peak iff distance > threshold. The dispersion (the
variance-to-mean ratio, the classic index of dispersion) steers the
threshold between the two natural scales: for a quiet signal it leans
on the mean, for a bursty one on the variance. ``g`` scales overall
sensitivity.

Statistics are then advanced with

    mean' = alpha * x" + (1 - alpha) * mean
    var'  = alpha * (x" - mean)**2 + (1 - alpha) * var

where x" is the raw sample normally, but while a peak is flagged the
damped value x" = phi * x + (1 - phi) * mean is used instead, so a
burst does not drag the baseline up and mask peaks that follow it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable


@dataclass
class PeakParams:
    """Detector knobs. Defaults work well for working set size series."""

    alpha: float = 0.3  # moving average decay
    phi: float = 0.2  # damping applied while a peak is active
    g: float = 1.0  # threshold sensitivity scale
    eps: float = 1e-9  # mean magnitudes below this count as zero

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 < self.phi <= 1.0:
            raise ValueError(f"phi must be in (0, 1], got {self.phi}")
        if not self.g > 0.0:
            raise ValueError(f"g must be > 0, got {self.g}")
        if not self.eps > 0.0:
            raise ValueError(f"eps must be > 0, got {self.eps}")


@dataclass(slots=True)
class PeakVerdict:
    """Outcome of feeding one sample to the detector."""

    is_peak: bool
    distance: float  # |x - mean| before the update
    threshold: float  # the adaptive threshold the distance was held against
    dispersion: float  # variance-to-mean ratio used to blend the threshold


class PeakDetector:
    """Mutable detector state; feed samples through update()."""

    def __init__(self, params: PeakParams | None = None):
        self.params = params if params is not None else PeakParams()
        self.mean = 0.0
        self.var = 0.0
        self.initialized = False
        self.peak_active = False

    def update(self, x: float) -> PeakVerdict:
        """Advance the detector by one sample and judge it."""
        if not self.initialized:
            self.mean = float(x)
            self.var = 0.0
            self.initialized = True
            self.peak_active = False
            return PeakVerdict(False, 0.0, 0.0, 0.0)
        p = self.params
        mean = self.mean
        distance = abs(x - mean)
        dispersion = self.var / mean if mean > p.eps else 0.0
        c = 1.0 - math.exp(-dispersion / 2.0)
        threshold = c * p.g * self.var + (1.0 - c) * p.g * mean
        is_peak = distance > threshold
        value = p.phi * x + (1.0 - p.phi) * mean if is_peak else float(x)
        self.mean = p.alpha * value + (1.0 - p.alpha) * mean
        self.var = p.alpha * (value - mean) ** 2 + (1.0 - p.alpha) * self.var
        self.peak_active = is_peak
        return PeakVerdict(is_peak, distance, threshold, dispersion)


def detect_series(
    values: Iterable[float], params: PeakParams | None = None
) -> list[PeakVerdict]:
    """Run a fresh detector over a whole series and collect the verdicts."""
    det = PeakDetector(params)
    return [det.update(x) for x in values]
