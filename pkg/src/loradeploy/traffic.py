"""Inter-transmission times and the co-SF packet collision probability.

Each ED alternates a fixed air-time tau with an off period nu drawn uniformly
from [nu1, nu2] = [u tau - v(tau), u tau + v(tau)], so the mean gap is u tau.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateStreamError, InvalidSpreadError
from .model import NetworkConfig, RingTable, SpreadFunction, SpreadKind, build_rings
from .numerics import rng

log = logging.getLogger(__name__)

DUTY_CYCLE_LIMIT = 0.01
# Relative interval width below which the uniform gap is treated as deterministic.
_DEGENERATE_WIDTH = 1e-12


@dataclass(frozen=True)
class IntervalBounds:
    nu1_ms: float
    nu2_ms: float
    tau_ms: float

    @property
    def nu1_hat_ms(self) -> float:
        return max(self.nu1_ms, self.tau_ms)

    @property
    def mean_ms(self) -> float:
        return 0.5 * (self.nu1_ms + self.nu2_ms)

    @property
    def variance_ms2(self) -> float:
        return (self.nu2_ms - self.nu1_ms) ** 2 / 12.0

    @property
    def width_ms(self) -> float:
        return self.nu2_ms - self.nu1_ms

    @property
    def degenerate(self) -> bool:
        return self.width_ms <= _DEGENERATE_WIDTH * self.mean_ms


def interval_bounds(tau_ms: float, u: float, spread: SpreadFunction, sf: int | None = None) -> IntervalBounds:
    if not tau_ms > 0:
        raise ValueError(f"air-time must be positive, got {tau_ms}")
    if not u >= 99:
        raise ValueError(f"u must be >= 99, got {u}")
    v = spread(tau_ms)
    if not 0.0 <= v < u * tau_ms:
        where = f" for SF{sf}" if sf is not None else ""
        raise InvalidSpreadError(f"v(tau)={v:.6g} ms must lie in [0, u*tau={u * tau_ms:.6g})" + where, sf=sf)
    return IntervalBounds(u * tau_ms - v, u * tau_ms + v, tau_ms)


def _off_fraction(b: IntervalBounds) -> float:
    """E[nu / (nu + tau)] for uniform nu."""
    t = b.tau_ms
    if b.degenerate:
        return b.mean_ms / (b.mean_ms + t)
    return 1.0 - t / b.width_ms * math.log1p(b.width_ms / (b.nu1_ms + t))


def _survival_fraction(b: IntervalBounds) -> float:
    """(nu2 - nu1_hat - tau ln(nu2 / nu1_hat)) / (nu2 - nu1)."""
    t = b.tau_ms
    if b.degenerate:
        return max(0.0, 1.0 - t / b.mean_ms)
    lo = b.nu1_hat_ms
    span = b.nu2_ms - lo
    return (span - t * math.log1p(span / lo)) / b.width_ms


def duty_cycle(bounds: IntervalBounds) -> float:
    """E[tau / (nu + tau)]; a value above 1% is logged, not raised."""
    dc = 1.0 - _off_fraction(bounds)
    if dc > DUTY_CYCLE_LIMIT * (1 + 1e-9):
        log.warning("duty cycle %.4g exceeds %.0f%% (tau=%.4g ms)", dc, 100 * DUTY_CYCLE_LIMIT, bounds.tau_ms)
    return dc


def collision_probability(bounds: IntervalBounds) -> float:
    """Probability that a co-SF interferer overlaps a tagged packet.

    Closed form
        p = 1 - (1 - tau/(nu2-nu1) ln((nu2+tau)/(nu1+tau)))
                * (nu2 - nu1_hat - tau ln(nu2/nu1_hat)) / (nu2 - nu1)
    with nu1_hat = max(nu1, tau). A zero-width interval takes the limit
    1 - nu/(nu+tau) * (1 - tau/nu).
    """
    fits = bounds.mean_ms > bounds.tau_ms if bounds.degenerate else bounds.nu2_ms > bounds.nu1_hat_ms
    if not fits:
        raise DegenerateStreamError(
            f"air-time {bounds.tau_ms:.4g} ms does not fit in the longest gap {bounds.nu2_ms:.4g} ms"
        )
    p = 1.0 - _off_fraction(bounds) * _survival_fraction(bounds)
    return min(1.0, max(0.0, p))


def time_average_collision_probability(bounds: IntervalBounds, tau_i_ms: float | None = None) -> float:
    """Collision probability of a packet started at a uniformly random instant.

    This is the long-run time average for a renewal stream: the probe either
    lands in a burst or in a gap too short to hold the tagged packet,
        p = 1 - E[(nu - tau_i)^+] / (E[nu] + tau_k).
    """
    ti = bounds.tau_ms if tau_i_ms is None else tau_i_ms
    n1, n2 = bounds.nu1_ms, bounds.nu2_ms
    if bounds.degenerate:
        keep = max(0.0, bounds.mean_ms - ti)
    else:
        lo = max(n1, ti)
        keep = ((n2 - ti) ** 2 - (lo - ti) ** 2) / (2.0 * (n2 - n1)) if n2 > ti else 0.0
    return 1.0 - keep / (bounds.mean_ms + bounds.tau_ms)


def collision_probability_regime(tau_ms: float, u: float, spread: SpreadFunction) -> float:
    """Leading-order approximation of :func:`collision_probability` per spread family."""
    interval_bounds(tau_ms, u, spread)
    c, t = spread.c, tau_ms
    kind = spread.kind
    if kind is SpreadKind.LINEAR:
        return math.log((u + c) / (u - c)) / c if c > 0 else 2.0 / u
    if kind is SpreadKind.LOG_SCALED:
        s = c * math.log(t)
        return math.log((u + s) / (u - s)) / s if s != 0 else 2.0 / u
    if kind is SpreadKind.INVERSE_LOG_SCALED:
        lt = math.log(t)
        return lt / c * math.log((u * lt + c) / (u * lt - c)) if c > 0 else 2.0 / u
    if kind is SpreadKind.QUADRATIC:
        return 2.0 / u + 2.0 * c**2 * t**2 / (3.0 * u**3)
    return 2.0 / u + 2.0 * c**2 / (3.0 * t * u**3)


def collision_profile(cfg: NetworkConfig, rings: RingTable | None = None) -> np.ndarray:
    """Per-ring collision probability p_1..p_6 (exact closed form)."""
    rings = rings or build_rings(cfg)
    return np.array(
        [collision_probability(interval_bounds(r.airtime_ms, cfg.u, cfg.spread, r.sf)) for r in rings]
    )


@dataclass(frozen=True)
class CollisionEstimate:
    mean: float
    stderr: float
    samples: int
    method: str

    def within(self, value: float, n_sigma: float = 3.0) -> bool:
        return abs(self.mean - value) <= n_sigma * self.stderr


def simulate_collision_rate(
    tau_i_ms: float,
    interferer: IntervalBounds,
    samples: int = 1_000_000,
    seed: int = 0,
    method: str = "timeline",
    batches: int = 20,
) -> CollisionEstimate:
    """Monte-Carlo overlap probability between a tagged packet and one interferer.

    ``method="timeline"`` simulates the interferer as a long renewal process of
    bursts and gaps, drops probe instants uniformly over it, and counts probes
    whose window [t, t + tau_i) meets a burst. The standard error comes from
    ``batches`` independent timelines.

    ``method="cycle"`` draws one gap uniformly among gaps (not length-biased)
    for the on/off state and an independent gap for the survival test, which
    is the sampling model behind the closed form.
    """
    if method not in ("timeline", "cycle"):
        raise ValueError(f"unknown method {method!r}")
    batches = max(2, int(batches))
    per = max(1, samples // batches)
    means = np.empty(batches)
    for k in range(batches):
        gen = rng(seed, k)
        if method == "timeline":
            means[k] = _timeline_batch(gen, tau_i_ms, interferer, per)
        else:
            means[k] = _cycle_batch(gen, tau_i_ms, interferer, per)
    p = means.mean()
    if method == "cycle":
        se = math.sqrt(max(p * (1 - p), 0.0) / (per * batches))
    else:
        se = means.std(ddof=1) / math.sqrt(batches)
    return CollisionEstimate(float(p), float(se), per * batches, method)


def _timeline_batch(gen, tau_i, b: IntervalBounds, n: int) -> float:
    cycles = n + 1
    gaps = gen.uniform(b.nu1_ms, b.nu2_ms, cycles)
    starts = np.concatenate(([0.0], np.cumsum(gaps + b.tau_ms)))
    # Probes cover whole cycles [starts[0], starts[-1]) so the estimate is a time average.
    t_hat = gen.uniform(0.0, starts[-1], n)
    t_hat = np.minimum(t_hat, np.nextafter(starts[-1], 0.0))
    hits = kernels.timeline_collisions(starts, b.tau_ms, t_hat, tau_i)
    return hits / n


def _cycle_batch(gen, tau_i, b: IntervalBounds, n: int) -> float:
    nu_a = gen.uniform(b.nu1_ms, b.nu2_ms, n)
    off = gen.random(n) < nu_a / (nu_a + b.tau_ms)
    nu_b = gen.uniform(b.nu1_ms, b.nu2_ms, n)
    x = gen.random(n) * nu_b
    survive = x + tau_i < nu_b
    return float(np.count_nonzero(~(off & survive))) / n
