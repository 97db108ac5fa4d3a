"""Physical layer of the single-gateway LoRa cell.

Link budget, spreading-factor ring geometry and air-times. Distances are in
km, air-times in ms, powers in dBm; everything is converted to linear units
before it enters a formula.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

import numpy as np

from .errors import DomainError, InvalidSpreadError

SF_MIN, SF_MAX = 7, 12
N_RINGS = SF_MAX - SF_MIN + 1

#: Demodulation SNR floor per SF7..SF12 (dB). SF12 is -20 dB, the value that
#: yields an outer radius of 10.8 km for the default link budget.
SNR_THRESHOLDS_DB = (-6.0, -9.0, -12.0, -15.0, -17.5, -20.0)

#: Relative slack when checking the curvature against its admissible range.
KAPPA_TOL = 1e-9


def db_to_linear(db):
    out = 10.0 ** (np.asarray(db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


def linear_to_db(x):
    out = 10.0 * np.log10(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


class SpreadKind(str, Enum):
    LINEAR = "linear"
    SQRT = "sqrt"
    QUADRATIC = "quadratic"
    LOG_SCALED = "log"
    INVERSE_LOG_SCALED = "invlog"


@dataclass(frozen=True)
class SpreadFunction:
    """Half-width v(tau) of the uniform inter-transmission interval, in ms.

    ``c`` carries whatever units make v(tau) come out in ms for tau in ms.
    """

    kind: SpreadKind = SpreadKind.SQRT
    c: float = 598.0

    def __post_init__(self):
        object.__setattr__(self, "kind", SpreadKind(self.kind))
        if not self.c >= 0.0:
            raise ValueError(f"spread coefficient must be >= 0, got {self.c}")

    def __call__(self, tau_ms: float) -> float:
        t = tau_ms
        if self.kind is SpreadKind.LINEAR:
            return self.c * t
        if self.kind is SpreadKind.SQRT:
            return self.c * math.sqrt(t)
        if self.kind is SpreadKind.QUADRATIC:
            return self.c * t * t
        if self.kind is SpreadKind.LOG_SCALED:
            return self.c * t * math.log(t)
        return self.c * t / math.log(t)

    @classmethod
    def parse(cls, text: str) -> "SpreadFunction":
        """Parse ``kind:c``, e.g. ``sqrt:598`` or ``linear:80``."""
        kind, sep, coef = text.partition(":")
        if not sep:
            raise ValueError(f"spread must look like kind:c, got {text!r}")
        aliases = {"sub-linear": "sqrt", "super-linear": "quadratic", "lin": "linear", "quad": "quadratic"}
        kind = aliases.get(kind.strip().lower(), kind.strip().lower())
        return cls(SpreadKind(kind), float(coef))

    def __str__(self) -> str:
        short = f"{self.c:g}"
        return f"{self.kind.value}:{short if float(short) == self.c else repr(self.c)}"


def noise_power_dbm(nf_db: float, bw_hz: float) -> float:
    """Thermal noise floor -174 + NF + 10 log10(BW), in dBm."""
    if bw_hz <= 0:
        raise DomainError(f"bandwidth must be positive, got {bw_hz}")
    return -174.0 + nf_db + 10.0 * math.log10(bw_hz)


def bitrate_bps(sf: int, cr: int, bw_hz: float) -> float:
    """Raw LoRa bit-rate 4 SF / ((4 + CR) T_s) with T_s = 2**SF / BW."""
    _check_sf_cr(sf, cr)
    ts = 2.0**sf / bw_hz
    return 4.0 * sf / ((4.0 + cr) * ts)


def airtime_ms(sf: int, payload_bytes: int, cr: int = 1, bw_hz: float = 125e3) -> float:
    """Payload bits over the SF bit-rate, preamble ignored."""
    if payload_bytes <= 0:
        raise DomainError(f"payload must be positive, got {payload_bytes}")
    return 1e3 * 8.0 * payload_bytes / bitrate_bps(sf, cr, bw_hz)


def _check_sf_cr(sf, cr):
    if not SF_MIN <= sf <= SF_MAX or int(sf) != sf:
        raise DomainError(f"spreading factor must be an integer in [7, 12], got {sf}")
    if not 1 <= cr <= 4 or int(cr) != cr:
        raise DomainError(f"coding rate index must be an integer in [1, 4], got {cr}")


def _ring_radii(psi_m, power_dbm, nf_db, bw_hz, eta, thresholds_db) -> np.ndarray:
    noise = noise_power_dbm(nf_db, bw_hz)
    q = np.asarray(thresholds_db, dtype=float)
    return (psi_m * 1e-3) / (4.0 * math.pi) * 10.0 ** ((power_dbm - q - noise) / (10.0 * eta))


@dataclass(frozen=True)
class NetworkConfig:
    """Every physical and protocol constant of the cell.

    The cell radius is not a free parameter: it is the outermost SF ring
    radius implied by the link budget (``R``).
    """

    lambda0: float = 1.0  # EDs / km^2
    kappa: float = 0.0  # 1 / km^2
    eta: float = 2.7
    psi_m: float = 0.345
    power_dbm: float = 14.0
    nf_db: float = 6.0
    bw_hz: float = 125e3
    w: float = 1.259
    u: float = 99.0
    spread: SpreadFunction = field(default_factory=SpreadFunction)
    payload_bytes: int = 25
    cr: int = 1
    snr_thresholds_db: tuple = SNR_THRESHOLDS_DB

    def __post_init__(self):
        if isinstance(self.spread, str):
            object.__setattr__(self, "spread", SpreadFunction.parse(self.spread))
        object.__setattr__(self, "snr_thresholds_db", tuple(float(q) for q in self.snr_thresholds_db))
        if not self.eta >= 2.0:
            raise ValueError(f"path-loss exponent must be >= 2, got {self.eta}")
        if not self.lambda0 > 0.0:
            raise ValueError(f"lambda0 must be positive, got {self.lambda0}")
        if not self.u >= 99.0:
            raise ValueError(f"duty-cycle multiplier u must be >= 99, got {self.u}")
        if not self.w > 0.0:
            raise ValueError(f"SIR threshold must be positive, got {self.w}")
        if self.psi_m <= 0 or self.bw_hz <= 0:
            raise ValueError("wavelength and bandwidth must be positive")
        _check_sf_cr(SF_MIN, self.cr)
        if self.payload_bytes <= 0:
            raise ValueError("payload must be positive")
        q = self.snr_thresholds_db
        if len(q) != N_RINGS or any(b >= a for a, b in zip(q, q[1:])):
            raise ValueError(f"need {N_RINGS} strictly decreasing SNR thresholds, got {q}")
        kmax = self.kappa_max
        if abs(self.kappa) > kmax * (1.0 + KAPPA_TOL):
            raise ValueError(f"kappa must lie in [-{kmax:.6g}, {kmax:.6g}] (= +-2/R^2), got {self.kappa}")

    @property
    def R(self) -> float:
        """Cell radius in km (outer radius of the SF12 ring)."""
        return float(
            _ring_radii(self.psi_m, self.power_dbm, self.nf_db, self.bw_hz, self.eta, self.snr_thresholds_db[-1:])[0]
        )

    @property
    def kappa_max(self) -> float:
        return 2.0 / self.R**2

    @property
    def psi_km(self) -> float:
        return self.psi_m * 1e-3

    @property
    def noise_dbm(self) -> float:
        return noise_power_dbm(self.nf_db, self.bw_hz)

    def replace(self, **changes) -> "NetworkConfig":
        return dataclasses.replace(self, **changes)


def path_gain(d_km, cfg: NetworkConfig):
    """Distance attenuation (psi / (4 pi d))**eta, both lengths in km."""
    d = np.asarray(d_km, dtype=float)
    if np.any(d <= 0):
        raise DomainError("path gain is undefined at or below zero distance")
    g = (cfg.psi_km / (4.0 * math.pi * d)) ** cfg.eta
    return float(g) if g.ndim == 0 else g


def ring_radii(cfg: NetworkConfig) -> np.ndarray:
    """Outer radii l_1..l_6 (km) at which the mean SNR meets each SF threshold."""
    radii = _ring_radii(cfg.psi_m, cfg.power_dbm, cfg.nf_db, cfg.bw_hz, cfg.eta, cfg.snr_thresholds_db)
    if np.any(np.diff(radii) <= 0):
        raise AssertionError(f"ring radii not increasing: {radii}")
    return radii


@dataclass(frozen=True)
class SfRing:
    n: int
    sf: int
    q_n_db: float
    inner_km: float
    outer_km: float
    airtime_ms: float
    bitrate_bps: float

    @property
    def area_km2(self) -> float:
        return math.pi * (self.outer_km**2 - self.inner_km**2)


@dataclass(frozen=True)
class RingTable:
    """The six SF annuli of a cell, indexable by position 0..5."""

    rings: tuple

    def __iter__(self) -> Iterator[SfRing]:
        return iter(self.rings)

    def __len__(self) -> int:
        return len(self.rings)

    def __getitem__(self, i) -> SfRing:
        return self.rings[i]

    def ring(self, n: int) -> SfRing:
        """Ring by its 1-based index n."""
        if not 1 <= n <= len(self.rings):
            raise DomainError(f"ring index must be in [1, {len(self.rings)}], got {n}")
        return self.rings[n - 1]

    @property
    def edges(self) -> np.ndarray:
        """[l_0 = 0, l_1, ..., l_6]."""
        return np.array([0.0] + [r.outer_km for r in self.rings])

    @property
    def R(self) -> float:
        return self.rings[-1].outer_km

    @property
    def airtimes_ms(self) -> np.ndarray:
        return np.array([r.airtime_ms for r in self.rings])

    @property
    def thresholds_db(self) -> np.ndarray:
        return np.array([r.q_n_db for r in self.rings])

    def index(self, d_km):
        """1-based ring index n with l_{n-1} < d <= l_n; vectorised."""
        d = np.asarray(d_km, dtype=float)
        if np.any(d <= 0) or np.any(d > self.R * (1 + 1e-12)):
            raise DomainError(f"distance outside (0, R={self.R:.4g}] km")
        idx = np.searchsorted(self.edges[1:], d, side="left") + 1
        idx = np.minimum(idx, len(self.rings))
        return int(idx) if idx.ndim == 0 else idx


def build_rings(cfg: NetworkConfig) -> RingTable:
    radii = ring_radii(cfg)
    inner = np.concatenate(([0.0], radii[:-1]))
    rings = []
    for i in range(N_RINGS):
        sf = SF_MIN + i
        rings.append(
            SfRing(
                n=i + 1,
                sf=sf,
                q_n_db=cfg.snr_thresholds_db[i],
                inner_km=float(inner[i]),
                outer_km=float(radii[i]),
                airtime_ms=airtime_ms(sf, cfg.payload_bytes, cfg.cr, cfg.bw_hz),
                bitrate_bps=bitrate_bps(sf, cfg.cr, cfg.bw_hz),
            )
        )
    return RingTable(tuple(rings))


def check_spread(cfg: NetworkConfig, rings: RingTable | None = None) -> None:
    """Raise InvalidSpreadError unless 0 <= v(tau) < u tau for every SF."""
    rings = rings or build_rings(cfg)
    for r in rings:
        v = cfg.spread(r.airtime_ms)
        if not 0.0 <= v < cfg.u * r.airtime_ms:
            raise InvalidSpreadError(
                f"spread {cfg.spread} gives v={v:.4g} ms outside [0, u*tau={cfg.u * r.airtime_ms:.4g}) for SF{r.sf}",
                sf=r.sf,
            )


def thresholds_linear(rings: RingTable) -> np.ndarray:
    return db_to_linear(rings.thresholds_db)
