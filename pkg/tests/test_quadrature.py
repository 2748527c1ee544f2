"""Quadrature machinery vs exact sphere moments and high-precision oracles."""
from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from morsecount.quadrature import (
    MixtureComponent,
    QuadratureConvergenceError,
    QuadratureScheme,
    integrate_radial,
    integrate_two_point_s3,
    mc_integrate,
    panel_breakpoints,
    uniform_component,
)
from morsecount.sphere import sphere_area, unit


# ---- scheme plumbing ----


def test_scheme_validation():
    QuadratureScheme()  # defaults are valid
    with pytest.raises(ValueError):
        QuadratureScheme(nodes=8)
    with pytest.raises(ValueError):
        QuadratureScheme(kind="cubature")
    with pytest.raises(ValueError):
        QuadratureScheme(samples=4)
    with pytest.raises(ValueError):
        QuadratureScheme(tol=0.0)


def test_scheme_roundtrip():
    s = QuadratureScheme(kind="monte-carlo", nodes=32, samples=4096, seed=7, tol=1e-4)
    assert QuadratureScheme.from_dict(s.to_dict()) == s


def test_panel_breakpoints_shape():
    br = panel_breakpoints(0.0, math.pi, features=((0.0, 0.01), (math.pi, 0.05)))
    assert br[0] == 0.0 and br[-1] == math.pi
    assert np.all(np.diff(br) > 0)
    # non-positive scales are ignored
    assert len(panel_breakpoints(0.0, 1.0, features=((0.5, 0.0),))) == 2


# ---- exact moments on the n-sphere ----


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7])
def test_radial_volume_and_even_moments(n):
    area = sphere_area(n)
    val, err = integrate_radial(lambda u: np.ones_like(u), n, nodes=32)
    assert val == pytest.approx(area, rel=1e-12)
    # coordinate moments in d = n + 1 ambient dimensions: E[u^2] = 1/d,
    # E[u^4] = 3/(d(d+2))
    val2, _ = integrate_radial(lambda u: u * u, n, nodes=32)
    assert val2 == pytest.approx(area / (n + 1), rel=1e-12)
    val4, _ = integrate_radial(lambda u: u**4, n, nodes=32)
    assert val4 == pytest.approx(3 * area / ((n + 1) * (n + 3)), rel=1e-12)


def test_radial_sharp_peak_against_mpmath():
    # integrand concentrated at the pole on a colatitude scale s
    s = 0.02
    val, err = integrate_radial(
        lambda u: np.exp(-(1.0 - u) / s**2),
        3,
        nodes=48,
        features=((0.0, s),),
        tol=1e-9,
    )
    with mpmath.workdps(40):
        oracle = sphere_area(2) * mpmath.quad(
            lambda t: mpmath.e ** (-(1 - mpmath.cos(t)) / s**2) * mpmath.sin(t) ** 2,
            [0, 30 * s, mpmath.pi],
        )
    assert val == pytest.approx(float(oracle), rel=1e-10)
    assert err < 1e-9 * abs(val)


def test_radial_unresolved_peak_raises():
    with pytest.raises(QuadratureConvergenceError):
        integrate_radial(
            lambda u: np.exp(-(1.0 - u) / 0.05**2), 3, nodes=16, tol=1e-9
        )


# ---- two-direction reduction on the 3-sphere ----


@pytest.mark.parametrize("gamma", [-0.8, -0.3, 0.0, 0.45, 0.9])
def test_two_point_exact_moments(gamma):
    vol = sphere_area(3)
    # integral of u*v: E[uv] = gamma/(n+2) with n+1 = 4 ambient dims
    val, _ = integrate_two_point_s3(
        lambda u: u * u / 2.0, lambda v: v, gamma, nodes=32
    )
    assert val == pytest.approx(vol * gamma / 4.0, rel=1e-11, abs=1e-12)
    # integral of u^2 v^2: E[u^2 v^2] = (1 + 2 gamma^2)/(d(d+2)), d = 4
    val22, _ = integrate_two_point_s3(
        lambda u: u**3 / 3.0, lambda v: v * v, gamma, nodes=32
    )
    assert val22 == pytest.approx(vol * (1 + 2 * gamma**2) / 24.0, rel=1e-11)


def test_two_point_factor_order_is_immaterial():
    gamma = 0.37
    a, _ = integrate_two_point_s3(
        lambda u: u**3 / 3.0, lambda v: v**4, gamma, nodes=48
    )
    b, _ = integrate_two_point_s3(
        lambda u: u**5 / 5.0, lambda v: v**2, gamma, nodes=48
    )
    assert a == pytest.approx(b, rel=1e-11)


def test_two_point_peaked_factor_against_mpmath():
    # sharply dilated factor of the kind the pair integrals produce
    lam, lam2, gamma = 25.0, 3.0, 0.3
    B, C = 1.0 + lam**2, lam**2 - 1.0
    B2, C2 = 1.0 + lam2**2, lam2**2 - 1.0

    def primitive(u):
        return (2.0 / (3.0 * C)) * (B - C * u) ** (-1.5)

    def weight(v):
        return (B2 - C2 * v) ** (-0.5)

    val, err = integrate_two_point_s3(
        primitive,
        weight,
        gamma,
        nodes=64,
        features=((gamma, math.sqrt(1 - gamma**2) / lam), (1.0, 1.0 / lam2**2)),
        tol=1e-8,
    )
    with mpmath.workdps(40):
        s2 = 1 - mpmath.mpf(gamma) ** 2

        def outer(v):
            half = mpmath.sqrt(s2 * (1 - v**2))
            hi, lo = gamma * v + half, gamma * v - half
            prim = lambda u: (2 / (3 * C)) * (B - C * u) ** mpmath.mpf(-1.5)
            return (B2 - C2 * v) ** mpmath.mpf(-0.5) * (prim(hi) - prim(lo))

        oracle = 2 * mpmath.pi / mpmath.sqrt(s2) * mpmath.quad(
            outer, [-1, gamma - 0.1, gamma, gamma + 0.1, 1]
        )
    assert val == pytest.approx(float(oracle), rel=1e-9)


def test_two_point_rejects_parallel_directions():
    with pytest.raises(ValueError):
        integrate_two_point_s3(lambda u: u, lambda v: v, 1.0)


# ---- mixture Monte Carlo ----


def test_mc_uniform_constant_is_exact():
    val, err = mc_integrate(
        lambda x: np.ones(x.shape[0]),
        [uniform_component(3)],
        samples=1000,
        seed=0,
    )
    assert val == pytest.approx(sphere_area(3), rel=1e-12)
    assert err == pytest.approx(0.0, abs=1e-10)


def test_mc_mixture_against_deterministic_route():
    e = np.array([0.0, 0.0, 0.0, 1.0])
    truth, _ = integrate_radial(lambda u: np.exp(u), 3, nodes=48)

    def cap_sample(rng, m):
        x = unit(rng.standard_normal((m, 4)))
        x[x @ e < 0] *= -1.0
        return x

    def cap_density(x):
        up = (x @ e) >= 0
        return np.where(up, 2.0 / sphere_area(3), 0.0)

    cap = MixtureComponent(weight=0.5, sample=cap_sample, density=cap_density)
    val, err = mc_integrate(
        lambda x: np.exp(x @ e),
        [uniform_component(3, weight=0.5), cap],
        samples=40_000,
        seed=11,
    )
    assert abs(val - truth) < max(6 * err, 3e-3 * truth)
    assert err < 0.02 * truth


def test_mc_is_seed_deterministic():
    comp = [uniform_component(2)]
    f = lambda x: 1.0 + x[:, 0] ** 2
    a = mc_integrate(f, comp, samples=2000, seed=42)
    b = mc_integrate(f, comp, samples=2000, seed=42)
    c = mc_integrate(f, comp, samples=2000, seed=43)
    assert a == b
    assert a != c


def test_mc_requires_components():
    with pytest.raises(ValueError):
        mc_integrate(lambda x: x[:, 0], [], samples=100, seed=0)
