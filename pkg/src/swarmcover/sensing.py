"""Bearing angles, quantized touch readings and noisy event-intensity sensing."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# Default tolerance for angle equality tests; real controllers never hit
# exact values, so straight-angle and full-turn detection needs slack.
EPS_ANG = 1e-3


def wrap_angle(theta: float) -> float:
    """Wrap an angle to the half-open range [-pi, pi); +pi maps to -pi."""
    return (theta + math.pi) % TWO_PI - math.pi


def bearing(measurer_pos, heading: float, target_pos) -> float:
    """Angle of the target direction in the measurer's own frame, in [-pi, pi)."""
    dx = target_pos[0] - measurer_pos[0]
    dy = target_pos[1] - measurer_pos[1]
    if math.hypot(dx, dy) == 0.0:
        raise ValueError("bearing undefined for coincident positions")
    return wrap_angle(math.atan2(dy, dx) - heading)


def relative_bearing(theta_a: float, theta_b: float) -> float:
    """Heading-invariant angle between two bearings taken at the same agent.

    Collinear-opposite directions come out at magnitude pi, so straight-angle
    and full-turn winding tests behave geometrically.
    """
    return wrap_angle(theta_a - theta_b)


@dataclass(frozen=True)
class BearingReading:
    measurer: int
    target: int
    angle: float  # radians in [-pi, pi)

    def __post_init__(self):
        if not (-math.pi <= self.angle < math.pi):
            raise ValueError("bearing angle outside [-pi, pi)")


@dataclass(frozen=True)
class TouchConfig:
    """Contact sensor resolution: n_contacts points give sectors of pi/n_contacts."""

    n_contacts: int = 1

    def __post_init__(self):
        if self.n_contacts < 1:
            raise ValueError("touch sensor needs at least one contact point")

    @property
    def sector_error(self) -> float:
        return math.pi / self.n_contacts


def contact_direction(impact_angle: float, touch: TouchConfig) -> float:
    """Quantize an impact angle to the nearest of 2*n_contacts sector centers."""
    width = touch.sector_error  # 2*n sectors over the full circle
    a = wrap_angle(impact_angle)
    k = math.floor((a + math.pi) / width)
    k = min(k, 2 * touch.n_contacts - 1)
    return wrap_angle(-math.pi + (k + 0.5) * width)


@dataclass(frozen=True)
class EventField:
    """Radially decaying intensity around the event point."""

    center: tuple
    peak: float  # maximum intensity at the event point
    decay: float  # distance at which intensity falls to peak/e

    def __post_init__(self):
        if self.peak <= 0 or self.decay <= 0:
            raise ValueError("event peak and decay distance must be positive")


def event_intensity(p, field: EventField) -> float:
    """Intensity peak * exp(-d^2 / decay^2) at distance d from the event."""
    d2 = (p[0] - field.center[0]) ** 2 + (p[1] - field.center[1]) ** 2
    return field.peak * math.exp(-d2 / field.decay**2)


@dataclass(frozen=True)
class NoiseModel:
    """Multiplicative uniform sensing noise with zero mean.

    A reading f is perturbed by u drawn uniformly on [-f*sigma, +f*sigma],
    the unique zero-mean uniform law with variance f^2 sigma^2 / 3.
    """

    sigma: float = 0.0
    alpha: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    def rng_for(self, stream: int) -> np.random.Generator:
        """Independent per-agent stream; insertion order cannot perturb others."""
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(stream,)))


def sense_event(p, field: EventField, noise: NoiseModel, rng: np.random.Generator) -> float:
    """One noisy intensity estimate at p; exact when sigma is zero."""
    f = event_intensity(p, field)
    if noise.sigma == 0.0 or f == 0.0:
        return f
    return f + rng.uniform(-f * noise.sigma, f * noise.sigma)


def snr(noise: NoiseModel) -> float:
    """Signal power over noise variance: 3 / sigma^2, +inf for a noiseless model."""
    if noise.sigma == 0.0:
        return math.inf
    return 3.0 / noise.sigma**2


def snr_correction(noise: NoiseModel) -> float:
    """Divisor 1 + alpha/SNR applied to the old-weight term of the volume delta."""
    s = snr(noise)
    if math.isinf(s):
        return 1.0
    return 1.0 + noise.alpha / s
