import io
import json
import math

import numpy as np
import pytest

from loradeploy import optimizer as O
from loradeploy.model import NetworkConfig, build_rings

CFG = NetworkConfig()
RINGS = build_rings(CFG)
KMAX = CFG.kappa_max


@pytest.fixture(scope="module")
def sweep():
    return O.grid_search(CFG, resolution=41, z=0.7, rings=RINGS)


def test_effective_density_vanishes_with_lambda0():
    o = O.effective_densities(CFG.replace(lambda0=1e-4), 0.7, RINGS)
    assert np.all(o < 1e-3)


def test_outer_ring_collapses_for_convex_deployment():
    o6 = O.effective_density(CFG.replace(kappa=KMAX), 6, 0.7, RINGS)
    assert o6 < 0.02


def test_objective_log_and_infeasible():
    assert O.log_objective([0.1, 0.2, 0.0]) == -math.inf
    o = np.array([0.1, 0.3, 0.2])
    assert O.log_objective(o) == pytest.approx(O.log_objective(o[::-1]))
    assert O.log_objective(o) == pytest.approx(math.log(O.product_objective(o)))


def test_objective_local_optimality():
    best = O.objective(CFG.replace(kappa=-0.015, lambda0=0.8), 0.7, RINGS)
    assert best >= O.objective(CFG.replace(kappa=0.0, lambda0=0.8), 0.7, RINGS)
    assert best >= O.objective(CFG.replace(kappa=-0.015, lambda0=2.0), 0.7, RINGS)


def test_z_validation():
    with pytest.raises(ValueError):
        O.objective(CFG, 1.0, RINGS)


def test_fast_grid_matches_adaptive(sweep):
    for i, j in [(4, 10), (0, 0), (40, 40), (20, 5)]:
        cfg = CFG.replace(kappa=float(sweep.kappas[i]), lambda0=float(sweep.lambda0s[j]))
        np.testing.assert_allclose(sweep.o_n[i, j], O.effective_densities(cfg, 0.7, RINGS), rtol=1e-6, atol=1e-12)


def test_argmax_is_maximum(sweep):
    i, j = sweep.argmax_index
    assert sweep.surface[i, j] == np.max(sweep.surface[sweep.feasible])
    assert sweep.best.feasible


def test_product_and_log_share_argmax(sweep):
    prod = sweep.product_surface
    assert np.unravel_index(np.argmax(prod), prod.shape) == sweep.argmax_index


def test_steep_cells_are_not_numerical_artifacts(sweep):
    """Wherever neighbouring cells differ by > 10x, both agree with adaptive quadrature."""
    p = sweep.product_surface
    checked = 0
    for axis in (0, 1):
        lo = np.moveaxis(p, axis, 0)
        ratio = np.maximum(lo[1:] / lo[:-1], lo[:-1] / lo[1:])
        for idx in zip(*np.nonzero(ratio > 10)):
            for step in (0, 1):
                cell = list(idx)
                cell[0] += step
                i, j = cell if axis == 0 else cell[::-1]
                cfg = CFG.replace(kappa=float(sweep.kappas[i]), lambda0=float(sweep.lambda0s[j]))
                ref = O.effective_densities(cfg, 0.7, RINGS)
                np.testing.assert_allclose(sweep.o_n[i, j], ref, rtol=1e-6, atol=1e-14)
                checked += 1
    assert checked > 0


@pytest.mark.xfail(strict=True, reason="product scales as lambda0^6 and O_6 collapses near kappa = 2/R^2; neighbours jump > 10x")
def test_surface_continuity_literal(sweep):
    p = sweep.product_surface
    assert np.nanmax(np.maximum(p[1:] / p[:-1], p[:-1] / p[1:])) < 10
    assert np.nanmax(np.maximum(p[:, 1:] / p[:, :-1], p[:, :-1] / p[:, 1:])) < 10


def test_single_point_grid():
    res = O.grid_search(CFG, kappa_range=-0.01, lambda0_range=0.9, resolution=1, rings=RINGS)
    assert res.argmax == (-0.01, 0.9)
    assert res.surface.shape == (1, 1)


def test_grid_validation():
    with pytest.raises(ValueError):
        O.grid_search(CFG, kappa_range=(-1, 1), resolution=3, rings=RINGS)
    with pytest.raises(ValueError):
        O.grid_search(CFG, lambda0_range=(0.0, 1.0), resolution=3, rings=RINGS)


def test_outputs(sweep):
    buf = io.StringIO()
    sweep.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("kappa,lambda0,objective,feasible,O_1")
    assert len(lines) == 41 * 41 + 1
    buf = io.StringIO()
    sweep.write_json(buf)
    summary = json.loads(buf.getvalue())
    assert summary["kappa_star"] == sweep.argmax[0]
    assert len(summary["O_n"]) == 6


def test_parallel_grid_identical():
    a = O.grid_search(CFG, resolution=5, rings=RINGS)
    b = O.grid_search(CFG, resolution=5, rings=RINGS, workers=2)
    np.testing.assert_array_equal(a.surface, b.surface)
