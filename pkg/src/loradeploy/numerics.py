"""Special functions, quadrature and random streams shared by the analytics.

Only the parameter domains the coverage formulas need are supported: the
hypergeometric function is evaluated for non-positive arguments only.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _sp_integrate
from scipy import special

from . import kernels
from .errors import ConvergenceError, DomainError


def _is_nonpositive_integer(v: float) -> bool:
    return v <= 0 and abs(v - round(v)) < 1e-12


def _check_hyp2f1(a, b, c):
    if _is_nonpositive_integer(c) and not (
        (_is_nonpositive_integer(a) and a > c) or (_is_nonpositive_integer(b) and b > c)
    ):
        raise DomainError(f"2F1 undefined for c={c} (non-positive integer)")


def hyp2f1(a: float, b: float, c: float, x: float) -> float:
    """Gauss hypergeometric 2F1(a, b; c; x) for x <= 0.

    Uses the Pfaff transformation 2F1(a,b;c;x) = (1-x)^-a 2F1(a,c-b;c;x/(x-1))
    followed by the power series, which converges absolutely there.
    """
    if x > 0:
        raise DomainError(f"hyp2f1 only supports x <= 0, got {x}")
    _check_hyp2f1(a, b, c)
    val = kernels.hyp2f1(float(a), float(b), float(c), float(x))
    if math.isnan(val):
        raise ConvergenceError(f"2F1({a}, {b}; {c}; {x}) series did not converge")
    return val


def hyp2f1_array(a: float, b: float, c: float, x) -> np.ndarray:
    """Vectorised :func:`hyp2f1` over the argument ``x``."""
    x = np.asarray(x, dtype=float)
    if np.any(x > 0):
        raise DomainError("hyp2f1 only supports x <= 0")
    _check_hyp2f1(a, b, c)
    out = np.asarray(kernels.hyp2f1_array(float(a), float(b), float(c), x), dtype=float)
    if np.any(np.isnan(out)):
        raise ConvergenceError(f"2F1({a}, {b}; {c}; x) series did not converge for some x")
    return out


def reg_inc_beta(x, alpha: float, beta_p: float):
    """Regularised incomplete Beta function I_x(alpha, beta_p), i.e. the Beta CDF."""
    if not (alpha > 0 and beta_p > 0):
        raise DomainError(f"Beta parameters must be positive, got ({alpha}, {beta_p})")
    xv = np.asarray(x, dtype=float)
    if np.any((xv < 0) | (xv > 1)):
        raise DomainError("reg_inc_beta needs x in [0, 1]")
    out = special.betainc(alpha, beta_p, xv)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_subdivisions > 0):
            raise ValueError("quadrature tolerances and subdivision limit must be positive")


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    evaluations: int

    def __float__(self) -> float:
        return self.value


def integrate(f: Callable[[float], float], a: float, b: float, spec: QuadratureSpec = DEFAULT_QUAD) -> QuadResult:
    """Adaptive Gauss-Kronrod (21-point) quadrature of ``f`` over [a, b].

    Raises ConvergenceError, carrying the best estimate, when the subdivision
    budget runs out before the tolerance is met.
    """
    if a == b:
        return QuadResult(0.0, 0.0, 0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _sp_integrate.IntegrationWarning)
        out = _sp_integrate.quad(
            f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions, full_output=1
        )
    val, err, info = out[:3]
    if len(out) > 3:
        # QUADPACK only returns a message when ier > 0
        msg = " ".join(str(out[3]).split())
        raise ConvergenceError(f"quadrature over [{a}, {b}] did not converge: {msg}", float(val), float(err))
    return QuadResult(float(val), float(err), int(info["neval"]))


def gauss_legendre(a: float, b: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of an ``order``-point Gauss-Legendre rule on [a, b]."""
    x, wts = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * wts


# Random streams: PCG64 seeded through SeedSequence. A task's stream is
# derived from (seed, task index) so partitioned runs reproduce bit-for-bit.


def rng(seed: int | None = 0, task: int | None = None) -> np.random.Generator:
    """Deterministic PCG64 generator for ``seed``, optionally for sub-task ``task``."""
    entropy = [int(seed or 0)] if task is None else [int(seed or 0), int(task)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def uniform(gen: np.random.Generator, size=None):
    """Uniform variates on [0, 1)."""
    return gen.random(size)


def exponential(gen: np.random.Generator, size=None):
    """Unit-mean exponential variates by inverse transform, -ln(1 - U)."""
    return -np.log1p(-gen.random(size))
