import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rieszeq import analytic
from rieszeq.analytic import (ball_mixture, coulomb_ball_law, iterated_coulomb_constant,
                              iterated_interior_density, ms_ball_radius, sample, solve_equilibrium,
                              sphere_energy, sphere_radius, ullman_density, ullman_radius,
                              wiener_constant)
from rieszeq.errors import DomainError, RegimeError, UnsupportedRegimeError
from rieszeq.kernels import ExternalField, RieszParams, coulomb_constant
from rieszeq.quadrature import SingularitySpec, integrate

from conftest import model


def test_solve_examples():
    m = solve_equilibrium(*model(4, 0, 3))
    assert m.variant == analytic.SPHERE and m.R == pytest.approx((1 / 6) ** (1 / 3), rel=1e-14)
    m = solve_equilibrium(*model(4, 0, 1))
    assert m.variant == analytic.MIXTURE
    assert m.beta == pytest.approx(0.5) and m.radial_exponent == pytest.approx(0.0)
    assert m.R == pytest.approx(2 / 3, rel=1e-14)
    assert solve_equilibrium(*model(3, -1, 1)).variant == analytic.POINT_MASS
    assert solve_equilibrium(*model(3, -1, 0.5)).variant == analytic.NON_EXISTENT
    assert solve_equilibrium(*model(5, 2, 2)).variant == analytic.UNKNOWN


def test_solve_other_families():
    assert solve_equilibrium(*model(3, 1, 2)).variant == analytic.BALL
    assert solve_equilibrium(*model(2, 0, 2)).variant == analytic.BALL
    assert solve_equilibrium(*model(1, 0, 2)).variant == analytic.ULLMAN
    assert solve_equilibrium(*model(7, 0, 2.5)).variant == analytic.SPHERE
    with pytest.raises(UnsupportedRegimeError):
        solve_equilibrium(*model(4, 0, 4, p=4))


@pytest.mark.parametrize("d, s, alpha", [(4, 0, 3), (4, 0, 1), (3, -1, 1.5), (3, 1, 2), (1, 0, 2)])
def test_measure_json_round_trip(d, s, alpha):
    m = solve_equilibrium(*model(d, s, alpha))
    data = m.to_dict()
    assert set(data) == {"variant", "parameters", "provenance"}
    assert analytic.EquilibriumMeasure.from_dict(data) == m


@pytest.mark.parametrize("d, s, alpha, expected", [
    (4, 0, 2, 0.5), (5, 1, 2, 0.2 ** (1 / 3)), (3, -1, 2, 1 / 3),
    (4, 0, 3, (1 / 6) ** (1 / 3)),
])
def test_sphere_radius_examples(d, s, alpha, expected):
    assert sphere_radius(*model(d, s, alpha)) == pytest.approx(expected, rel=1e-13)


def test_ball_mixture_examples():
    m = ball_mixture(*model(4, 0, 1))
    assert m.beta == pytest.approx(0.5) and m.R == pytest.approx(2 / 3)
    m = ball_mixture(*model(5, 1, 1))
    assert m.beta == pytest.approx(1 / 3) and m.R == pytest.approx(math.sqrt(0.5))
    assert ball_mixture(*model(4, 0, 2 - 1e-9)).beta == pytest.approx(0, abs=1e-8)


def _wiener_oracle(d, s):
    # Funk-Hecke form of the double integral, with 1 - t = u^8 and 1 + t = v^2 removing
    # the endpoint singularities; evaluated with mpmath
    tau = mp.gamma(mp.mpf(d) / 2) / (mp.sqrt(mp.pi) * mp.gamma(mp.mpf(d - 1) / 2))
    half = mp.mpf(d - 3) / 2

    def kernel(dist2):
        return -mp.log(dist2) / 2 if s == 0 else mp.sign(s) * dist2 ** (-mp.mpf(s) / 2)

    def near_one(u):
        w = u ** 8
        return kernel(2 * w) * (w * (2 - w)) ** half * 8 * u ** 7

    def near_minus_one(v):
        w = v * v
        return kernel(2 * (2 - w)) * (w * (2 - w)) ** half * 2 * v

    top = mp.quad(near_one, [0, mp.mpf(0.5) ** (mp.mpf(1) / 8), 1])
    bottom = mp.quad(near_minus_one, [0, 1])
    return float(tau * (top + bottom))


@pytest.mark.parametrize("d, s, expected", [(4, 0, -0.25), (5, 1, 0.8), (3, -1, -4 / 3)])
def test_wiener_examples(d, s, expected):
    assert wiener_constant(d, s) == pytest.approx(expected, abs=1e-12)
    assert _wiener_oracle(d, s) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("d, s", [(6, 0), (9, 0), (6, 2), (7, 1.5), (4, 2.5), (3, -0.5), (2, -1.5)])
def test_wiener_against_quadrature(d, s):
    assert wiener_constant(d, s) == pytest.approx(_wiener_oracle(d, s), rel=1e-9)


def test_wiener_regime():
    with pytest.raises(RegimeError):
        wiener_constant(3, 0)
    with pytest.raises(RegimeError):
        wiener_constant(4, 3)


def test_sphere_energy_examples():
    assert sphere_energy(*model(5, 1, 2), 1.0) == pytest.approx(2.8, abs=1e-12)
    assert sphere_energy(*model(4, 0, 2), 1.0) == pytest.approx(1.75, abs=1e-12)


@pytest.mark.parametrize("d, s, alpha", [(4, 0, 2), (4, 0, 3.5), (5, 1, 2), (6, 2, 3), (3, -1, 2.5)])
def test_sphere_energy_critical_and_minimal(d, s, alpha):
    params, fld = model(d, s, alpha)
    R = sphere_radius(params, fld)
    h = 1e-5 * R
    slope = (sphere_energy(params, fld, R + h) - sphere_energy(params, fld, R - h)) / (2 * h)
    assert abs(slope) < 1e-8
    e0 = sphere_energy(params, fld, R)
    assert e0 < sphere_energy(params, fld, R / 2) and e0 < sphere_energy(params, fld, 2 * R)


def test_ms_ball_radius_examples():
    assert ms_ball_radius(2, 1, 2) == pytest.approx((3 * math.pi / 8) ** (1 / 3), rel=1e-13)
    assert ms_ball_radius(3, 2, 2) == pytest.approx((8 / 3) ** 0.25, rel=1e-13)
    assert ms_ball_radius(3, 2, 2) == pytest.approx(1.2779, abs=1e-4)


@pytest.mark.parametrize("d", [3, 4, 5])
@pytest.mark.parametrize("alpha", [1.0, 2.0, 4.0])
def test_ms_ball_radius_coulomb_reduction(d, alpha):
    expected = ((d - 2) / alpha) ** (1 / (alpha + d - 2))
    assert ms_ball_radius(d, d - 2, alpha) == pytest.approx(expected, rel=1e-12)
    assert coulomb_ball_law(d, alpha).R == pytest.approx(expected, rel=1e-12)


def test_ullman_examples():
    assert ullman_radius(2) == pytest.approx(1.0, rel=1e-14)
    assert ullman_density(2, 0.0) == pytest.approx(2 / math.pi, rel=1e-12)
    assert ullman_density(2, 1.0) == 0.0 and ullman_density(2, -1.0) == 0.0


def test_ullman_semicircle():
    x = np.linspace(-0.999, 0.999, 201)
    assert np.allclose(ullman_density(2, x), 2 / math.pi * np.sqrt(1 - x * x), atol=1e-8)


@pytest.mark.parametrize("alpha", [1.0, 2.0, 4.0])
def test_ullman_mass(alpha):
    R = ullman_radius(alpha)
    sing = SingularitySpec.logarithmic([0.0]) if alpha <= 1 else None
    mass = 2 * integrate(lambda x: ullman_density(alpha, x), 0.0, R, sing, tol=1e-10)
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_coulomb_ball_examples():
    m = coulomb_ball_law(3, 2)
    assert m.R == pytest.approx(0.5 ** (1 / 3), rel=1e-14)
    mass = integrate(lambda r: 3 * r ** 2 * 2, 0.0, m.R)
    assert mass == pytest.approx(1.0, rel=1e-12)
    r = np.linspace(0.1, 0.7, 4)
    assert np.allclose(m.radial_density(r), 6 * r ** 2, rtol=1e-12)
    assert coulomb_ball_law(2, 2).R == pytest.approx(1 / math.sqrt(2), rel=1e-14)
    # alpha = 2: uniform in the ball, norm density (d/R^d) r^(d-1)
    for d in (3, 5, 6):
        law = coulomb_ball_law(d, 2)
        assert law.radial_exponent == pytest.approx(d - 1)
        r = np.linspace(0.1, 0.9, 5) * law.R
        vol = law.spatial_density(r, d)
        assert np.allclose(vol, vol[0])


def _laplacian_coefficient(d, u):
    # Delta K_u = -c K_(u+2) for radial powers
    if u == 0:
        return d - 2.0
    return abs(u) * (d - 2.0 - u) / math.copysign(1.0, u + 2.0)


def test_iterated_constant_examples():
    assert iterated_coulomb_constant(4, 2) == -2
    assert iterated_coulomb_constant(7, 2) == -6
    # the product oracle gives C_(3,2) = -2 as well (see the ledger)
    assert iterated_coulomb_constant(3, 2) == -2


@pytest.mark.parametrize("d", range(3, 11))
def test_iterated_constant_product_oracle(d):
    for n in range(1, d):
        s = d - 2 * n
        if s <= -2:
            continue
        prod = (-1) ** (n - 1)
        for k in range(n - 1):
            prod *= _laplacian_coefficient(d, s + 2 * k)
        assert iterated_coulomb_constant(d, n) == pytest.approx(prod, rel=1e-14)


def test_iterated_interior_density_examples():
    r = np.linspace(0.05, 0.6, 12)
    fld = ExternalField(1, 1)
    got = iterated_interior_density(4, 2, fld, r)
    assert np.allclose(got, 3 / (8 * math.pi ** 2) * r ** -3, rtol=1e-12)
    mix = ball_mixture(RieszParams(4, 0), fld)
    assert np.allclose(got, mix.spatial_density(r, 4), rtol=1e-10)
    assert np.allclose(iterated_interior_density(4, 2, ExternalField(1, 2), r), 0.0)
    assert iterated_interior_density(4, 2, ExternalField(1, 3), 1.0) < 0


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 1.95), st.floats(0.2, 5.0))
def test_iterated_density_matches_mixture(alpha, gamma):
    fld = ExternalField(gamma, alpha)
    mix = ball_mixture(RieszParams(4, 0), fld)
    r = np.linspace(0.05, 0.95, 7) * mix.R
    assert np.allclose(iterated_interior_density(4, 2, fld, r), mix.spatial_density(r, 4), rtol=1e-10)


def test_sample_sphere_norms():
    m = solve_equilibrium(*model(4, 0, 3))
    pts = sample(m, 4, 1000, seed=3)
    assert np.allclose(np.linalg.norm(pts, axis=1), m.R, atol=1e-12)


def test_sample_mixture_statistics():
    m = solve_equilibrium(*model(4, 0, 1))
    n = 100_000
    norms = np.linalg.norm(sample(m, 4, n, seed=11), axis=1)
    inner = norms[norms < m.R * (1 - 1e-12)]
    frac = inner.size / n
    assert abs(frac - 0.5) < 3 * math.sqrt(0.25 / n)
    # continuous part uniform in the norm on [0, R]
    sd = m.R / math.sqrt(12)
    assert abs(inner.mean() - m.R / 2) < 4 * sd / math.sqrt(inner.size)


def test_sample_reproducible_and_errors():
    m = solve_equilibrium(*model(4, 0, 1))
    assert np.array_equal(sample(m, 4, 50, 5), sample(m, 4, 50, 5))
    with pytest.raises(RegimeError):
        sample(solve_equilibrium(*model(5, 2, 2)), 5, 10, 0)
    with pytest.raises(DomainError):
        sample(m, 4, -1, 0)


def test_sample_ullman_semicircle():
    m = solve_equilibrium(*model(1, 0, 2))
    x = sample(m, 1, 200_000, seed=1)[:, 0]
    # semicircle of radius 1: E x^2 = 1/4
    assert abs(np.mean(x * x) - 0.25) < 4 * 0.125 / math.sqrt(x.size) * 2


@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 6), st.floats(1e-2, 1e2))
def test_scale_invariance_log(alpha, gamma):
    if alpha >= 2:
        base = sphere_radius(*model(4, 0, alpha))
        assert sphere_radius(*model(4, 0, alpha, gamma)) == pytest.approx(gamma ** (-1 / alpha) * base, rel=1e-12)
    else:
        b0 = ball_mixture(*model(4, 0, alpha)).R
        assert ball_mixture(*model(4, 0, alpha, gamma)).R == pytest.approx(gamma ** (-1 / alpha) * b0, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([1, 2, 3]), st.floats(0.2, 2.0), st.floats(1e-2, 1e2))
def test_scale_invariance_riesz(s, alpha, gamma):
    params = RieszParams(s + 4, s)
    law = ball_mixture(params, ExternalField(gamma, alpha)) if alpha < 2 else None
    R = law.R if law else sphere_radius(params, ExternalField(gamma, alpha))
    expected = gamma ** (-1 / (alpha + s)) * (2 * s / ((alpha + s + 2) * alpha)) ** (1 / (alpha + s))
    assert R == pytest.approx(expected, rel=1e-12)
    if alpha == 2.0 or law is None:
        return
    base = ball_mixture(params, ExternalField(1.0, alpha)).R
    assert R == pytest.approx(gamma ** (-1 / (alpha + s)) * base, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([1, 2, 3]), st.floats(2.0, 8.0), st.floats(1e-2, 1e2))
def test_sphere_radius_dilation(s, alpha, gamma):
    params = RieszParams(s + 4, s)
    base = sphere_radius(params, ExternalField(1.0, alpha))
    got = sphere_radius(params, ExternalField(gamma, alpha))
    assert got == pytest.approx(gamma ** (-1 / (alpha + s)) * base, rel=1e-12)


@pytest.mark.parametrize("d, s", [(4, 0), (5, 1), (6, 2), (3, -1)])
def test_continuity_at_two(d, s):
    left = ball_mixture(*model(d, s, 2 - 1e-7))
    right = sphere_radius(*model(d, s, 2))
    assert left.R == pytest.approx(right, abs=1e-7)
    assert left.beta == pytest.approx(0.0, abs=1e-6)


def test_radius_tends_to_one():
    radii = [sphere_radius(*model(4, 0, a)) for a in (4, 8, 16, 64)]
    assert all(r < 1 for r in radii)
    assert all(a < b for a, b in zip(radii, radii[1:]))
    assert radii[-1] > 0.9


@pytest.mark.parametrize("d, s, alpha", [(4, 0, 1), (4, 0, 0.5), (5, 1, 1.5), (3, -1, 1.5),
                                         (3, 1, 2), (3, 1, 3.5), (2, 0, 1), (5, 3, 0.7)])
def test_radial_densities_normalize(d, s, alpha):
    m = solve_equilibrium(*model(d, s, alpha))
    sing = SingularitySpec.algebraic([0.0], [m.radial_exponent]) if m.radial_exponent < 1 else None
    mass = integrate(m.radial_density, 0.0, m.R, sing, tol=1e-12)
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_ball_law_density_equals_laplacian():
    # Delta V / c_d for d = 3, alpha = 3 expressed as a norm density
    d, alpha = 3, 3.0
    law = coulomb_ball_law(d, alpha)
    r = np.linspace(0.1, 0.9, 5) * law.R
    lap = alpha * (alpha + d - 2) * r ** (alpha - 2) / coulomb_constant(d)
    assert np.allclose(law.spatial_density(r, d), lap, rtol=1e-12)
