"""Closed-form link and coverage metrics.

Notation: Q(d) is the SNR success probability, M_b(d) the b-th moment of the
conditional SIR success probability given the PPP (M_1 = W), and the network
or per-ring coverage moments are Q M_b averaged over the ED intensity.

The SIR moment uses the primitive

    int (1 - (1 + a x^-eta)^-b) x^(m-1) dx = x^m / m * (1 - 2F1(b, -m/eta; 1 - m/eta; -a x^-eta))

with a = w d^eta, for m = 2 (uniform part of the intensity) and m = 4 (the
curvature part). At x = 0 the bracket tends to a Gamma-function constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from . import geometry, traffic
from .errors import ConvergenceError, DegenerateFitError, DomainError
from .model import NetworkConfig, RingTable, build_rings, db_to_linear, path_gain
from .numerics import DEFAULT_QUAD, QuadratureSpec, gauss_legendre, hyp2f1_array, integrate, reg_inc_beta

NETWORK = "network"


def _setup(cfg, rings, p):
    rings = rings or build_rings(cfg)
    p = traffic.collision_profile(cfg, rings) if p is None else np.broadcast_to(np.asarray(p, dtype=float), (len(rings),))
    return rings, p


def snr_success(d_km, cfg: NetworkConfig, rings: RingTable | None = None):
    """Q(d) = exp(-N q_n / (P g(d))) with q_n picked by the ring containing d."""
    rings = rings or build_rings(cfg)
    d = np.asarray(d_km, dtype=float)
    n = np.asarray(rings.index(d))
    q = db_to_linear(rings.thresholds_db)[n - 1]
    snr_mean = db_to_linear(cfg.power_dbm - cfg.noise_dbm) * path_gain(d, cfg)
    out = np.exp(-q / snr_mean)
    return float(out) if out.ndim == 0 else out


def _diverges_at_origin(b: float, m: int, eta: float) -> bool:
    # x^(m-1) (1 - (1 + a x^-eta)^-b) ~ -x^(m-1+|b| eta) near 0 for b < 0
    return b <= -m / eta


def _bracket(x: float, d: np.ndarray, b: float, m: int, cfg: NetworkConfig) -> np.ndarray:
    """P_m(x) = x^m (1 - 2F1(b, -m/eta; 1 - m/eta; -w d^eta / x^eta)), vectorised in d."""
    eta, w = cfg.eta, cfg.w
    beta = -m / eta
    if x > 0:
        z = -w * (d / x) ** eta
        return x**m * (1.0 - hyp2f1_array(b, beta, 1.0 + beta, z))
    if _diverges_at_origin(b, m, eta):
        return np.full(d.shape, math.inf)
    g = special.gamma(1.0 + beta)
    if not np.isfinite(g):
        raise DomainError(f"2F1 undefined: 1 - {m}/eta is a non-positive integer")
    const = g * special.gamma(b - beta) * special.rgamma(b)
    return -const * w ** (m / eta) * d**m


def moment_terms(d, b: float, n: int, cfg: NetworkConfig, rings: RingTable) -> tuple[np.ndarray, np.ndarray]:
    """(P_2(l_n) - P_2(l_{n-1}), P_4(l_n) - P_4(l_{n-1})) for tagged distances ``d`` in ring n.

    These do not depend on lambda0 or kappa:
    M_b(d) = exp(-(pi p lambda0 / 2) (2 c1 dP2 + kappa dP4)), c1 = 1 - kappa R^2 / 2.
    """
    d = np.atleast_1d(np.asarray(d, dtype=float))
    lo, hi = rings.edges[n - 1], rings.edges[n]
    with np.errstate(invalid="ignore"):
        dp2 = _bracket(hi, d, b, 2, cfg) - _bracket(lo, d, b, 2, cfg)
        dp4 = _bracket(hi, d, b, 4, cfg) - _bracket(lo, d, b, 4, cfg)
    return dp2, dp4


def moment_from_terms(dp2, dp4, p_n: float, lambda0: float, kappa: float, c1: float):
    """Assemble M_b from :func:`moment_terms`, avoiding 0 * inf when a coefficient vanishes."""
    expo = np.zeros(np.shape(dp2))
    if c1 != 0.0:
        expo = expo + 2.0 * c1 * dp2
    if kappa != 0.0:
        expo = expo + kappa * dp4
    with np.errstate(over="ignore", invalid="ignore"):
        return np.exp(-0.5 * math.pi * p_n * lambda0 * expo)


def _moment_in_ring(d, b, n, cfg, rings, p_n):
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if b == 0 or p_n == 0:
        return np.ones(d.shape)
    try:
        dp2, dp4 = moment_terms(d, b, n, cfg, rings)
    except (DomainError, ConvergenceError):
        # Pole of 2F1 (eta = 2, 4) or a slow series: fall back to quadrature.
        return np.array([_numeric_moment(di, b, n, cfg, rings, p_n) for di in d])
    return moment_from_terms(dp2, dp4, p_n, cfg.lambda0, cfg.kappa, geometry.linear_coefficient(cfg))


def sir_moment(d_km, b: float, cfg: NetworkConfig, rings: RingTable | None = None, p=None):
    """M_b(d): b-th moment of the conditional SIR success probability at distance d.

    ``p`` is the per-ring collision probability (defaults to the configured
    spread). M_1 is W(d); M_{-1} is infinite in the first ring when the
    interference integral diverges at the gateway.
    """
    rings, p = _setup(cfg, rings, p)
    d = np.asarray(d_km, dtype=float)
    idx = np.atleast_1d(rings.index(d))
    flat = np.atleast_1d(d)
    out = np.empty(flat.shape)
    for n in np.unique(idx):
        sel = idx == n
        out[sel] = _moment_in_ring(flat[sel], b, int(n), cfg, rings, float(p[n - 1]))
    return float(out[0]) if d.ndim == 0 else out.reshape(d.shape)


def _numeric_moment(d, b, n, cfg, rings, p_n, p_of_interferer=None, spec=None):
    if b == 0 or p_n == 0:
        return 1.0
    lo, hi = rings.edges[n - 1], rings.edges[n]
    c1 = geometry.linear_coefficient(cfg)
    kappa, eta = cfg.kappa, cfg.eta
    if lo == 0.0 and ((c1 != 0 and _diverges_at_origin(b, 2, eta)) or (kappa != 0 and _diverges_at_origin(b, 4, eta))):
        return math.inf
    a = cfg.w * d**eta

    def f(x):
        with np.errstate(over="ignore", divide="ignore"):
            frac = -math.expm1(-b * math.log1p(a / x**eta))
        weight = p_of_interferer(x) if p_of_interferer is not None else 1.0
        return weight * frac * cfg.lambda0 * (c1 * x + kappa * x**3)

    spec = spec or QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15, max_subdivisions=500)
    val = integrate(f, lo, hi, spec).value
    scale = 1.0 if p_of_interferer is not None else p_n
    return math.exp(-2.0 * math.pi * scale * val)


def sir_moment_numeric(
    d_km: float,
    b: float,
    cfg: NetworkConfig,
    rings: RingTable | None = None,
    p=None,
    thinning: str = "tagged",
    spec: QuadratureSpec | None = None,
) -> float:
    """M_b(d) by direct quadrature of the PGF exponent.

    ``thinning="tagged"`` applies the tagged ED's collision probability to all
    interferers; ``"interferer"`` thins each interferer with the probability
    of its own ring.
    """
    rings, p = _setup(cfg, rings, p)
    n = rings.index(float(d_km))
    if thinning == "tagged":
        return _numeric_moment(float(d_km), b, n, cfg, rings, float(p[n - 1]), spec=spec)
    if thinning == "interferer":
        return _numeric_moment(
            float(d_km), b, n, cfg, rings, float(p[n - 1]), p_of_interferer=lambda x: p[rings.index(x) - 1], spec=spec
        )
    raise ValueError(f"unknown thinning mode {thinning!r}")


def h_bounds(d_km, cfg: NetworkConfig, rings: RingTable | None = None, p=None):
    """(lower, upper) bounds on the joint SNR-and-SIR success probability H(d).

    lower = Q W (independence); upper = sqrt(Q) * W evaluated at threshold w/2.
    """
    rings, p = _setup(cfg, rings, p)
    q = snr_success(d_km, cfg, rings)
    lower = q * sir_moment(d_km, 1.0, cfg, rings, p)
    upper = np.sqrt(q) * sir_moment(d_km, 1.0, cfg.replace(w=0.5 * cfg.w), rings, p)
    return lower, upper


@dataclass(frozen=True)
class LinkMetrics:
    d_km: float
    n: int
    q_success: float
    w_success: float
    h_lower: float
    h_upper: float


def link_metrics(d_km: float, cfg: NetworkConfig, rings: RingTable | None = None, p=None) -> LinkMetrics:
    rings, p = _setup(cfg, rings, p)
    q = snr_success(d_km, cfg, rings)
    w1 = sir_moment(d_km, 1.0, cfg, rings, p)
    lo, hi = h_bounds(d_km, cfg, rings, p)
    return LinkMetrics(float(d_km), rings.index(float(d_km)), q, w1, float(lo), float(hi))


def radial_profile(d_grid: Sequence[float], cfg: NetworkConfig, rings: RingTable | None = None, p=None) -> dict:
    """Q, W, lower and upper H on a radial grid."""
    rings, p = _setup(cfg, rings, p)
    d = np.asarray(d_grid, dtype=float)
    q = snr_success(d, cfg, rings)
    w1 = sir_moment(d, 1.0, cfg, rings, p)
    w_half = sir_moment(d, 1.0, cfg.replace(w=0.5 * cfg.w), rings, p)
    return {"d_km": d, "ring": rings.index(d), "Q": q, "W": w1, "H_lower": q * w1, "H_upper": np.sqrt(q) * w_half}


def _ring_integral(b, n, cfg, rings, p_n, spec) -> float:
    """2 pi int_{ring n} Q(d) M_b(d) lambda(d) d dd."""
    lo, hi = rings.edges[n - 1], rings.edges[n]
    q_lin = db_to_linear(rings.thresholds_db[n - 1])
    snr0 = db_to_linear(cfg.power_dbm - cfg.noise_dbm)

    def f(d):
        q = math.exp(-q_lin / (snr0 * path_gain(d, cfg)))
        m = _moment_in_ring(d, b, n, cfg, rings, p_n)[0]
        return q * m * geometry.intensity(d, cfg.lambda0, cfg.kappa, cfg.R) * d

    if b != 0 and p_n > 0 and not np.isfinite(_moment_in_ring(0.5 * (lo + hi), b, n, cfg, rings, p_n)[0]):
        return math.inf
    return 2.0 * math.pi * integrate(f, lo, hi, spec).value


def md_moments(
    cfg: NetworkConfig,
    b: float,
    scope="network",
    rings: RingTable | None = None,
    p=None,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> float:
    """Coverage moment: Q M_b averaged over the network or over ring ``scope``."""
    rings, p = _setup(cfg, rings, p)
    if scope == NETWORK:
        total = sum(_ring_integral(b, n, cfg, rings, float(p[n - 1]), spec) for n in range(1, len(rings) + 1))
        return total / geometry.expected_count(cfg)
    n = int(scope)
    lo, hi = rings.edges[n - 1], rings.edges[n]
    return _ring_integral(b, n, cfg, rings, float(p[n - 1]), spec) / geometry.expected_count(cfg, lo, hi)


def coverage(cfg: NetworkConfig, rings: RingTable | None = None, p=None, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Network coverage probability C(kappa, lambda0) under the independence bound."""
    return md_moments(cfg, 1.0, NETWORK, rings, p, spec)


def coverage_per_sf(
    cfg: NetworkConfig, n: int, rings: RingTable | None = None, p=None, spec: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """Coverage probability averaged over SF ring ``n`` only."""
    if not 1 <= n <= 6:
        raise DomainError(f"ring index must be in [1, 6], got {n}")
    return md_moments(cfg, 1.0, n, rings, p, spec)


def beta_fit(m1: float, m2: float) -> tuple[float, float]:
    """Beta(alpha, beta) parameters matching mean ``m1`` and second moment ``m2``."""
    if not 0.0 < m1 < 1.0:
        raise DomainError(f"first moment must be in (0, 1), got {m1}")
    var = m2 - m1 * m1
    if var <= 0.0:
        raise DegenerateFitError(f"m2={m2} <= m1^2={m1 * m1}: zero variance, use a point mass at m1", "point_mass")
    if m2 >= m1:
        raise DegenerateFitError(f"m2={m2} >= m1={m1}: variance too large for a Beta law", "two_point")
    k = (m1 - m2) / var
    return m1 * k, (1.0 - m1) * k


@dataclass(frozen=True)
class MetaDistribution:
    m1: float
    m2: float
    alpha: float
    beta_p: float
    scope: object = NETWORK
    kind: str = "beta"  # or "point_mass" / "two_point" for degenerate moments

    @classmethod
    def from_moments(cls, m1: float, m2: float, scope=NETWORK) -> "MetaDistribution":
        try:
            a, b = beta_fit(m1, m2)
            return cls(m1, m2, a, b, scope)
        except DegenerateFitError as exc:
            return cls(m1, m2, math.nan, math.nan, scope, exc.kind)
        except DomainError:
            kind = "point_mass"
            return cls(m1, m2, math.nan, math.nan, scope, kind)

    @property
    def variance(self) -> float:
        """m2 - m1^2; the spread of link reliabilities across EDs."""
        return self.m2 - self.m1 * self.m1

    def ccdf(self, z):
        """Fraction of links reaching reliability ``z``: 1 - I_z(alpha, beta)."""
        z = np.asarray(z, dtype=float)
        if np.any((z < 0) | (z > 1)):
            raise DomainError("reliability z must be in [0, 1]")
        if self.kind == "beta":
            out = 1.0 - reg_inc_beta(z, self.alpha, self.beta_p)
        elif self.kind == "point_mass":
            out = np.where(z <= self.m1, 1.0, 0.0)
        else:
            # mass m1 at 1 and 1 - m1 at 0
            out = np.where(z <= 0, 1.0, self.m1)
        out = np.asarray(out, dtype=float)
        return float(out) if out.ndim == 0 else out


def meta_distribution(
    cfg: NetworkConfig, scope="network", rings: RingTable | None = None, p=None, spec: QuadratureSpec = DEFAULT_QUAD
) -> MetaDistribution:
    rings, p = _setup(cfg, rings, p)
    m1 = md_moments(cfg, 1.0, scope, rings, p, spec)
    m2 = md_moments(cfg, 2.0, scope, rings, p, spec)
    return MetaDistribution.from_moments(m1, m2, scope)


def md_coverage(cfg: NetworkConfig, z, scope="network", rings: RingTable | None = None, p=None):
    """Beta approximation of the meta-distribution coverage at reliability ``z``."""
    return meta_distribution(cfg, scope, rings, p).ccdf(z)


class RingQuadrature:
    """Fixed Gauss-Legendre rule per ring with the kappa- and lambda0-free terms cached.

    Coverage moments for any (kappa, lambda0) then cost a handful of array
    operations, which is what a dense parameter sweep needs.
    """

    def __init__(self, cfg: NetworkConfig, rings: RingTable | None = None, p=None, order: int = 48, b_values=(1.0, 2.0)):
        self.cfg = cfg
        self.rings, self.p = _setup(cfg, rings, p)
        self.R = self.rings.R
        self.b_values = tuple(float(b) for b in b_values)
        self.nodes = []
        for n in range(1, len(self.rings) + 1):
            lo, hi = self.rings.edges[n - 1], self.rings.edges[n]
            d, wts = gauss_legendre(lo, hi, order)
            q = snr_success(d, cfg, self.rings)
            terms = {b: moment_terms(d, b, n, cfg, self.rings) for b in self.b_values}
            self.nodes.append((d, wts, q, terms))

    def ring_counts(self, kappa: float, lambda0: float) -> np.ndarray:
        cfg = self.cfg.replace(kappa=kappa, lambda0=lambda0)
        e = self.rings.edges
        return np.array([geometry.expected_count(cfg, e[i], e[i + 1]) for i in range(len(self.rings))])

    def ring_moments(self, kappa: float, lambda0: float) -> dict:
        """{b: array of per-ring coverage moments}, plus key "N" for the ring counts."""
        c1 = 1.0 - 0.5 * kappa * self.R**2
        c1 = 0.0 if abs(c1) < 1e-9 else c1
        out = {b: np.empty(len(self.rings)) for b in self.b_values}
        counts = self.ring_counts(kappa, lambda0)
        for i, (d, wts, q, terms) in enumerate(self.nodes):
            lam_d = geometry.intensity(d, lambda0, kappa, self.R) * d
            for b in self.b_values:
                m = moment_from_terms(*terms[b], float(self.p[i]), lambda0, kappa, c1)
                out[b][i] = 2.0 * math.pi * np.sum(wts * q * m * lam_d) / counts[i]
        out["N"] = counts
        return out
