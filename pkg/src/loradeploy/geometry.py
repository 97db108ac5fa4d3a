"""Inhomogeneous PPP deployment of end-devices around the gateway.

Intensity lambda(d) = lambda0 (1 + kappa (d^2 - R^2/2)) on the disk of radius
R. The mean count over the disk is lambda0 pi R^2 for every admissible kappa.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .errors import DomainError
from .model import NetworkConfig, RingTable, build_rings
from .numerics import rng


def intensity(d, lambda0: float, kappa: float, R: float):
    """Raw intensity formula, without range checks."""
    d = np.asarray(d, dtype=float)
    out = lambda0 * (1.0 + kappa * (d * d - 0.5 * R * R))
    return float(out) if out.ndim == 0 else out


def density(d_km, cfg: NetworkConfig):
    """ED intensity (EDs/km^2) at distance ``d_km`` from the gateway."""
    R = cfg.R
    d = np.asarray(d_km, dtype=float)
    if np.any(d < 0) or np.any(d > R * (1 + 1e-12)):
        raise DomainError(f"distance outside [0, R={R:.4g}] km")
    return intensity(d, cfg.lambda0, cfg.kappa, R)


def linear_coefficient(cfg: NetworkConfig) -> float:
    """c1 in lambda(x) x = lambda0 (c1 x + kappa x^3); exactly 0 at kappa = 2/R^2."""
    c1 = 1.0 - 0.5 * cfg.kappa * cfg.R**2
    return 0.0 if abs(c1) < 1e-9 else c1


def _count_primitive(x, cfg: NetworkConfig, R: float):
    return 2.0 * math.pi * cfg.lambda0 * (0.5 * x * x + cfg.kappa * (0.25 * x**4 - 0.25 * R * R * x * x))


def expected_count(cfg: NetworkConfig, a: float = 0.0, b: float | None = None) -> float:
    """Mean number of EDs in the annulus (a, b]; the whole disk by default."""
    R = cfg.R
    b = R if b is None else b
    if not 0.0 <= a <= b <= R * (1 + 1e-12):
        raise DomainError(f"annulus ({a}, {b}] not inside [0, {R:.4g}]")
    return _count_primitive(b, cfg, R) - _count_primitive(a, cfg, R)


def radial_cdf(r, cfg: NetworkConfig):
    R = cfg.R
    r = np.asarray(r, dtype=float)
    out = (_count_primitive(r, cfg, R) / (math.pi * cfg.lambda0 * R * R)).clip(0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def radial_quantile(prob, cfg: NetworkConfig):
    """Inverse of :func:`radial_cdf`: the root in [0, R^2] of a quadratic in r^2."""
    R = cfg.R
    U = np.asarray(prob, dtype=float)
    c1 = 1.0 - 0.5 * cfg.kappa * R * R
    den = c1 + np.sqrt(np.maximum(c1 * c1 + 2.0 * cfg.kappa * R * R * U, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(den > 0, 2.0 * R * R * U / den, 0.0)
    out = np.sqrt(np.clip(s, 0.0, R * R))
    return float(out) if out.ndim == 0 else out


def _draw_radii(gen: np.random.Generator, cfg: NetworkConfig, n: int, a: float = 0.0, b: float | None = None):
    Fa = radial_cdf(a, cfg) if a > 0 else 0.0
    Fb = radial_cdf(b, cfg) if b is not None else 1.0
    U = Fa + (Fb - Fa) * gen.random(n)
    r = radial_quantile(U, cfg)
    # r = 0 has probability zero but would put an ED on the gateway.
    bad = r <= 0.0
    while np.any(bad):
        U[bad] = Fa + (Fb - Fa) * gen.random(int(bad.sum()))
        r[bad] = radial_quantile(U[bad], cfg)
        bad = r <= 0.0
    return r


def sample_annulus(cfg: NetworkConfig, a: float, b: float, gen: np.random.Generator, realizations: int):
    """Restrictions of independent PPP realisations to the annulus (a, b].

    Returns ``(radii, offsets)``: realisation ``k`` owns
    ``radii[offsets[k]:offsets[k+1]]``.
    """
    counts = gen.poisson(expected_count(cfg, a, b), size=realizations)
    offsets = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
    return _draw_radii(gen, cfg, int(offsets[-1]), a, b), offsets


@dataclass(frozen=True)
class Deployment:
    r: np.ndarray
    theta: np.ndarray
    ring: np.ndarray
    seed: int

    def __len__(self) -> int:
        return len(self.r)

    @property
    def x(self) -> np.ndarray:
        return self.r * np.cos(self.theta)

    @property
    def y(self) -> np.ndarray:
        return self.r * np.sin(self.theta)

    def ring_counts(self, n_rings: int = 6) -> np.ndarray:
        return np.bincount(self.ring, minlength=n_rings + 1)[1:]

    def write_csv(self, fh: TextIO) -> None:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["r_km", "theta_rad", "x_km", "y_km", "ring"])
        for row in zip(self.r, self.theta, self.x, self.y, self.ring):
            wr.writerow([f"{row[0]:.6f}", f"{row[1]:.6f}", f"{row[2]:.6f}", f"{row[3]:.6f}", int(row[4])])


def sample(cfg: NetworkConfig, seed: int = 0, rings: RingTable | None = None) -> Deployment:
    """One PPP realisation: Poisson count, uniform angles, inverse-CDF radii."""
    rings = rings or build_rings(cfg)
    gen = rng(seed)
    n = gen.poisson(expected_count(cfg))
    r = _draw_radii(gen, cfg, n)
    theta = gen.uniform(0.0, 2.0 * math.pi, n)
    ring = rings.index(r) if n else np.zeros(0, dtype=int)
    return Deployment(r, theta, np.asarray(ring, dtype=int), seed)
