"""Network-level Monte-Carlo oracle for the link and meta-distribution metrics.

Interferers are PPP points in the tagged device's SF ring, Bernoulli-thinned
with the collision probability and subject to unit-mean Rayleigh power
fading. Only distances matter, so angles are never drawn.

Work is cut into fixed-size chunks, each with its own derived random stream.
Chunk results are merged by summation, so the output does not depend on the
number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import geometry, kernels, traffic
from .analytics import MetaDistribution
from .model import NetworkConfig, RingTable, build_rings, db_to_linear, path_gain
from .numerics import exponential, rng

CHUNK = 1000
GRID_POINTS_PER_RING = 5


def radial_grid(rings: RingTable, per_ring: int = GRID_POINTS_PER_RING) -> np.ndarray:
    """``per_ring`` interior points per ring at fractions (k + 1/2) / per_ring."""
    e = rings.edges
    frac = (np.arange(per_ring) + 0.5) / per_ring
    return np.concatenate([e[i] + frac * (e[i + 1] - e[i]) for i in range(len(rings))])


def _activation(cfg, rings, p, thinning):
    p = traffic.collision_profile(cfg, rings) if p is None else np.broadcast_to(np.asarray(p, dtype=float), (len(rings),))
    if thinning not in ("tagged", "interferer"):
        raise ValueError(f"unknown thinning mode {thinning!r}")
    return np.asarray(p, dtype=float)


def _chunks(total: int):
    return [(k, min(CHUNK, total - k * CHUNK)) for k in range(math.ceil(total / CHUNK))]


def _run(fn, tasks, workers):
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, *zip(*tasks)))
    return [fn(*t) for t in tasks]


@dataclass(frozen=True)
class LinkSimulation:
    d_km: np.ndarray
    ring: np.ndarray
    Q: np.ndarray
    W: np.ndarray
    H: np.ndarray
    Q_se: np.ndarray
    W_se: np.ndarray
    H_se: np.ndarray
    realizations: int
    seed: int

    def rows(self):
        for i in range(len(self.d_km)):
            yield (
                self.d_km[i], int(self.ring[i]), self.Q[i], self.W[i], self.H[i],
                self.Q_se[i], self.W_se[i], self.H_se[i],
            )


def _link_chunk(cfg, rings, p, d_grid, idx, thinning, fading_draws, seed, chunk_id, size):
    """Sums and sums of squares of per-realisation success frequencies."""
    gen = rng(seed, chunk_id)
    out = np.zeros((3, 2, len(d_grid)))
    snr0 = db_to_linear(cfg.power_dbm - cfg.noise_dbm)
    for n in range(1, len(rings) + 1):
        cols = np.flatnonzero(idx == n)
        if cols.size == 0:
            continue
        lo, hi = rings.edges[n - 1], rings.edges[n]
        q_lin = db_to_linear(rings.thresholds_db[n - 1])
        radii, offsets = geometry.sample_annulus(cfg, lo, hi, gen, size)
        owner = np.repeat(np.arange(size), np.diff(offsets))
        # Within one ring the tagged and interferer probabilities coincide.
        p_n = p[n - 1]
        r_eta = radii ** (-cfg.eta)
        for j in cols:
            d = d_grid[j]
            g = path_gain(d, cfg)
            acc = np.zeros((3, size))
            for _ in range(fading_draws):
                active = gen.random(radii.size) < p_n
                hk = exponential(gen, radii.size)
                interf = np.bincount(owner, weights=np.where(active, hk * r_eta, 0.0), minlength=size)
                hi_ = exponential(gen, size)
                snr_ok = snr0 * g * hi_ >= q_lin
                sir_ok = hi_ * d ** (-cfg.eta) >= cfg.w * interf
                acc[0] += snr_ok
                acc[1] += sir_ok
                acc[2] += snr_ok & sir_ok
            acc /= fading_draws
            out[:, 0, j] = acc.sum(axis=1)
            out[:, 1, j] = (acc * acc).sum(axis=1)
    return out


def simulate_link_success(
    cfg: NetworkConfig,
    rings: RingTable | None = None,
    realizations: int = 10_000,
    fading_draws: int = 1,
    seed: int = 0,
    p=None,
    d_grid=None,
    thinning: str = "tagged",
    workers: int | None = None,
) -> LinkSimulation:
    """Empirical Q(d), W(d) and the joint H(d) on a radial grid.

    The tagged device's fading gain is shared by its SNR and SIR tests, so H
    is the true joint probability rather than the product bound.
    """
    if realizations <= 0 or fading_draws <= 0:
        raise ValueError("realizations and fading_draws must be positive")
    rings = rings or build_rings(cfg)
    p = _activation(cfg, rings, p, thinning)
    d_grid = radial_grid(rings) if d_grid is None else np.asarray(d_grid, dtype=float)
    idx = np.atleast_1d(rings.index(d_grid))
    tasks = [(cfg, rings, p, d_grid, idx, thinning, fading_draws, seed, k, m) for k, m in _chunks(realizations)]
    total = sum(_run(_link_chunk, tasks, workers))
    mean = total[:, 0] / realizations
    var = np.maximum(total[:, 1] / realizations - mean * mean, 0.0) * realizations / max(realizations - 1, 1)
    se = np.sqrt(var / realizations)
    return LinkSimulation(d_grid, idx, mean[0], mean[1], mean[2], se[0], se[1], se[2], realizations, seed)


@dataclass(frozen=True)
class MetaSimulation:
    """Per-realisation tagged distance, SNR success Q(d) and conditional SIR success W_Phi."""

    d_km: np.ndarray
    q: np.ndarray
    w_phi: np.ndarray
    scope: object
    seed: int

    @property
    def realizations(self) -> int:
        return len(self.w_phi)

    def moment(self, b: float) -> tuple[float, float]:
        """(estimate, stderr) of the coverage moment E[Q W_Phi^b]."""
        x = self.q * self.w_phi**b
        return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))

    def ccdf(self, z, weighting: str = "none"):
        """Empirical fraction of links with W_Phi >= z.

        ``weighting="snr"`` weights each link by Q(d), the same weighting as
        the coverage moments; ``"product"`` thresholds Q(d) W_Phi instead.
        """
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if weighting == "none":
            s = np.sort(self.w_phi)
            return 1.0 - np.searchsorted(s, z, side="left") / len(s)
        if weighting == "product":
            s = np.sort(self.q * self.w_phi)
            return 1.0 - np.searchsorted(s, z, side="left") / len(s)
        if weighting == "snr":
            order = np.argsort(self.w_phi)
            s = self.w_phi[order]
            tail = np.concatenate((np.cumsum(self.q[order][::-1])[::-1], [0.0]))
            return tail[np.searchsorted(s, z, side="left")] / len(s)
        raise ValueError(f"unknown weighting {weighting!r}")

    def sup_distance(self, md: MetaDistribution, weighting: str = "none", points: int = 2001) -> float:
        """max_z |empirical ccdf - fitted ccdf| on a uniform grid of [0, 1]."""
        z = np.linspace(0.0, 1.0, points)
        return float(np.max(np.abs(self.ccdf(z, weighting) - md.ccdf(z))))


def _meta_chunk(cfg, rings, p, lo_hi, seed, chunk_id, size):
    gen = rng(seed, chunk_id)
    lo, hi = lo_hi
    d = geometry._draw_radii(gen, cfg, size, lo, hi)
    n_of = np.atleast_1d(rings.index(d))
    log_w = np.zeros(size)
    for n in np.unique(n_of):
        sel = np.flatnonzero(n_of == n)
        a, b = rings.edges[n - 1], rings.edges[n]
        radii, offsets = geometry.sample_annulus(cfg, a, b, gen, sel.size)
        owner = np.repeat(np.arange(sel.size), np.diff(offsets))
        active = gen.random(radii.size) < p[n - 1]
        keep = np.flatnonzero(active)
        vals = cfg.w * (d[sel][owner[keep]] / radii[keep]) ** cfg.eta
        counts = np.bincount(owner[keep], minlength=sel.size)
        offs = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        log_w[sel] = -np.asarray(kernels.segment_log1p_sum(vals, offs))
    return d, log_w


def simulate_meta(
    cfg: NetworkConfig,
    rings: RingTable | None = None,
    realizations: int = 10_000,
    seed: int = 0,
    p=None,
    scope="network",
    workers: int | None = None,
) -> MetaSimulation:
    """Empirical meta distribution of the conditional SIR success probability.

    Each realisation draws a tagged distance from the ED density (over the
    cell or one ring), a PPP of co-SF interferers and their activity; under
    Rayleigh fading W_Phi = prod_k (1 + w (d / d_k)^eta)^-1 exactly.
    """
    if realizations <= 1:
        raise ValueError("need at least two realizations")
    rings = rings or build_rings(cfg)
    p = _activation(cfg, rings, p, "tagged")
    if scope == "network":
        lo_hi = (0.0, None)
    else:
        n = int(scope)
        lo_hi = (rings.edges[n - 1], rings.edges[n])
    tasks = [(cfg, rings, p, lo_hi, seed, k, m) for k, m in _chunks(realizations)]
    parts = _run(_meta_chunk, tasks, workers)
    d = np.concatenate([x[0] for x in parts])
    w_phi = np.exp(np.concatenate([x[1] for x in parts]))
    q = np.exp(-db_to_linear(rings.thresholds_db)[np.atleast_1d(rings.index(d)) - 1]
               / (db_to_linear(cfg.power_dbm - cfg.noise_dbm) * path_gain(d, cfg)))
    return MetaSimulation(d, q, w_phi, scope, seed)
