import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from loradeploy import geometry
from loradeploy.errors import DomainError
from loradeploy.model import NetworkConfig
from loradeploy.numerics import integrate, rng

R = NetworkConfig().R
KMAX = 2 / R**2
kappas = st.floats(-KMAX, KMAX)


@settings(max_examples=40, deadline=None)
@given(kappa=kappas, lam=st.floats(0.01, 5))
def test_mean_count_independent_of_kappa(kappa, lam):
    cfg = NetworkConfig(kappa=kappa, lambda0=lam)
    assert geometry.expected_count(cfg) == pytest.approx(lam * math.pi * cfg.R**2, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(kappa=kappas)
def test_density_nonnegative(kappa):
    cfg = NetworkConfig(kappa=kappa)
    d = np.linspace(0, cfg.R, 501)
    assert np.all(geometry.density(d, cfg) >= -1e-12)


def test_density_endpoints():
    cfg = NetworkConfig(kappa=-KMAX)
    assert geometry.density(cfg.R, cfg) == pytest.approx(0, abs=1e-12)
    assert geometry.density(0, cfg) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        geometry.density(cfg.R * 1.1, cfg)


def test_linear_coefficient_snaps_to_zero():
    cfg = NetworkConfig(kappa=KMAX)
    assert geometry.linear_coefficient(cfg) == 0.0


def test_annulus_count_matches_quadrature():
    cfg = NetworkConfig(kappa=0.007, lambda0=0.6)
    f = lambda x: 2 * math.pi * geometry.intensity(x, cfg.lambda0, cfg.kappa, cfg.R) * x
    assert geometry.expected_count(cfg, 3.0, 7.0) == pytest.approx(integrate(f, 3.0, 7.0).value, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(kappa=kappas, u=st.floats(0, 1))
def test_quantile_inverts_cdf(kappa, u):
    cfg = NetworkConfig(kappa=kappa)
    r = geometry.radial_quantile(u, cfg)
    assert 0 <= r <= cfg.R
    assert geometry.radial_cdf(r, cfg) == pytest.approx(u, abs=1e-10)


@pytest.mark.parametrize("kappa", [-KMAX, 0.0, KMAX])
def test_sampled_radii_ks(kappa):
    cfg = NetworkConfig(kappa=kappa)
    r = geometry._draw_radii(rng(1), cfg, 20_000)
    res = stats.kstest(r, lambda x: geometry.radial_cdf(x, cfg))
    assert res.pvalue > 1e-3


def test_sample_annulus_restricted():
    cfg = NetworkConfig()
    radii, offsets = geometry.sample_annulus(cfg, 4.0, 6.0, rng(2), 500)
    assert offsets[0] == 0 and offsets[-1] == len(radii)
    assert np.all((radii > 4.0) & (radii <= 6.0))
    assert np.mean(np.diff(offsets)) == pytest.approx(geometry.expected_count(cfg, 4.0, 6.0), rel=0.05)


def test_sample_deployment_reproducible(rings):
    cfg = NetworkConfig()
    a = geometry.sample(cfg, seed=4, rings=rings)
    b = geometry.sample(cfg, seed=4, rings=rings)
    np.testing.assert_array_equal(a.r, b.r)
    assert a.ring_counts().sum() == len(a)
    np.testing.assert_allclose(np.hypot(a.x, a.y), a.r)
    assert np.all(a.r > 0) and np.all(a.r <= cfg.R)


def test_write_csv(tmp_path):
    dep = geometry.sample(NetworkConfig(lambda0=0.05), seed=1)
    path = tmp_path / "d.csv"
    with path.open("w") as fh:
        dep.write_csv(fh)
    lines = path.read_text().splitlines()
    assert lines[0] == "r_km,theta_rad,x_km,y_km,ring"
    assert len(lines) == len(dep) + 1
