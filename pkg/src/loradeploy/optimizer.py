"""Fair deployment: choose (kappa, lambda0) to balance reliable ED density across SF rings.

O_n(kappa, lambda0, z) = C_n(z) N_n / |V_n| is the density (EDs/km^2) of ring-n
links whose conditional success probability reaches z; the objective is
sum_n ln O_n, equivalently the product of the O_n.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from . import analytics, geometry
from .analytics import MetaDistribution, RingQuadrature
from .model import NetworkConfig, RingTable, build_rings

DEFAULT_Z = 0.7
DEFAULT_LAMBDA0_RANGE = (0.075, 3.0)


def _check_z(z):
    if not 0.0 < z < 1.0:
        raise ValueError(f"reliability z must lie in (0, 1), got {z}")


def effective_density(cfg: NetworkConfig, n: int, z: float = DEFAULT_Z, rings: RingTable | None = None, p=None) -> float:
    """O_n: EDs per km^2 in ring n whose link reliability is at least z.

    Degenerate moment pairs use the point-mass convention of MetaDistribution.
    """
    _check_z(z)
    rings = rings or build_rings(cfg)
    md = analytics.meta_distribution(cfg, n, rings, p)
    lo, hi = rings.edges[n - 1], rings.edges[n]
    density = geometry.expected_count(cfg, lo, hi) / (math.pi * (hi * hi - lo * lo))
    return md.ccdf(z) * density


def effective_densities(cfg: NetworkConfig, z: float = DEFAULT_Z, rings: RingTable | None = None, p=None) -> np.ndarray:
    rings = rings or build_rings(cfg)
    return np.array([effective_density(cfg, n, z, rings, p) for n in range(1, len(rings) + 1)])


def log_objective(o_n) -> float:
    o = np.asarray(o_n, dtype=float)
    if np.any(o <= 0):
        return -math.inf
    return float(np.sum(np.log(o)))


def product_objective(o_n) -> float:
    return float(np.prod(np.asarray(o_n, dtype=float)))


def objective(cfg: NetworkConfig, z: float = DEFAULT_Z, rings: RingTable | None = None, p=None) -> float:
    """sum_n ln O_n, or -inf when some ring has no reliable links."""
    return log_objective(effective_densities(cfg, z, rings, p))


def _fast_densities(engine: RingQuadrature, kappa: float, lambda0: float, z: float) -> np.ndarray:
    mom = engine.ring_moments(kappa, lambda0)
    e = engine.rings.edges
    area = math.pi * (e[1:] ** 2 - e[:-1] ** 2)
    cz = np.array([MetaDistribution.from_moments(m1, m2, n + 1).ccdf(z) for n, (m1, m2) in enumerate(zip(mom[1.0], mom[2.0]))])
    return cz * mom["N"] / area


@dataclass(frozen=True)
class GridPoint:
    kappa: float
    lambda0: float
    objective: float
    o_n: np.ndarray

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.objective)


@dataclass
class SweepResult:
    kappas: np.ndarray
    lambda0s: np.ndarray
    surface: np.ndarray  # log objective, shape (len(kappas), len(lambda0s))
    o_n: np.ndarray  # shape (len(kappas), len(lambda0s), 6)
    z: float
    argmax: tuple = field(init=False)
    argmax_index: tuple = field(init=False)

    def __post_init__(self):
        finite = np.where(np.isfinite(self.surface), self.surface, -np.inf)
        if not np.any(np.isfinite(finite)):
            self.argmax_index = (0, 0)
            self.argmax = (math.nan, math.nan)
            return
        i, j = np.unravel_index(np.argmax(finite), finite.shape)
        self.argmax_index = (int(i), int(j))
        self.argmax = (float(self.kappas[i]), float(self.lambda0s[j]))

    @property
    def feasible(self) -> np.ndarray:
        return np.isfinite(self.surface)

    @property
    def product_surface(self) -> np.ndarray:
        return np.prod(self.o_n, axis=-1)

    @property
    def best(self) -> GridPoint:
        i, j = self.argmax_index
        return GridPoint(self.argmax[0], self.argmax[1], float(self.surface[i, j]), self.o_n[i, j])

    def points(self):
        for i, k in enumerate(self.kappas):
            for j, lam in enumerate(self.lambda0s):
                yield GridPoint(float(k), float(lam), float(self.surface[i, j]), self.o_n[i, j])

    def write_csv(self, fh: TextIO) -> None:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["kappa", "lambda0", "objective", "feasible"] + [f"O_{n}" for n in range(1, self.o_n.shape[-1] + 1)])
        for pt in self.points():
            wr.writerow([f"{pt.kappa:.8g}", f"{pt.lambda0:.8g}", f"{pt.objective:.10g}", int(pt.feasible)]
                        + [f"{v:.10g}" for v in pt.o_n])

    def summary(self) -> dict:
        best = self.best
        return {
            "z": self.z,
            "kappa_star": best.kappa,
            "lambda0_star": best.lambda0,
            "objective": best.objective,
            "O_n": [float(v) for v in best.o_n],
            "grid": [len(self.kappas), len(self.lambda0s)],
            "infeasible_points": int(np.count_nonzero(~self.feasible)),
        }

    def write_json(self, fh: TextIO) -> None:
        json.dump(self.summary(), fh, indent=2)
        fh.write("\n")


def _row(engine, kappa, lambda0s, z):
    return [_fast_densities(engine, kappa, lam, z) for lam in lambda0s]


def grid_search(
    cfg_template: NetworkConfig,
    kappa_range=None,
    lambda0_range=DEFAULT_LAMBDA0_RANGE,
    resolution=41,
    z: float = DEFAULT_Z,
    rings: RingTable | None = None,
    p=None,
    order: int = 48,
    workers: int | None = None,
) -> SweepResult:
    """Exhaustive search of sum_n ln O_n over an evenly spaced (kappa, lambda0) grid.

    ``resolution`` is an int or a (n_kappa, n_lambda0) pair; a range given as a
    single number, or a resolution of 1, collapses that axis to one point.
    """
    _check_z(z)
    kmax = cfg_template.kappa_max
    if kappa_range is None:
        kappa_range = (-kmax, kmax)
    res = (resolution, resolution) if np.isscalar(resolution) else tuple(resolution)
    kappas = _axis(kappa_range, res[0])
    lambda0s = _axis(lambda0_range, res[1])
    if np.any(np.abs(kappas) > kmax * (1 + 1e-9)):
        raise ValueError(f"kappa range must lie within [-2/R^2, 2/R^2] = [{-kmax:.6g}, {kmax:.6g}]")
    kappas = np.clip(kappas, -kmax, kmax)
    if np.any(lambda0s <= 0):
        raise ValueError("lambda0 values must be positive")
    engine = RingQuadrature(cfg_template, rings, p, order=order)
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_row, [engine] * len(kappas), kappas, [lambda0s] * len(kappas), [z] * len(kappas)))
    else:
        rows = [_row(engine, k, lambda0s, z) for k in kappas]
    o_n = np.array(rows, dtype=float)
    surface = np.array([[log_objective(o) for o in row] for row in o_n])
    return SweepResult(kappas, lambda0s, surface, o_n, z)


def _axis(rng_, count):
    if np.isscalar(rng_):
        return np.array([float(rng_)])
    lo, hi = float(rng_[0]), float(rng_[1])
    if count == 1 or lo == hi:
        return np.array([lo])
    return np.linspace(lo, hi, int(count))
