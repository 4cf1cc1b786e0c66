"""Density-family behaviour: normalization, transforms, sampling, JSON."""

import json
import math
from importlib import resources

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.integrate import quad

from resetfpt.densities import (
    Beta,
    Binomial,
    DiscreteUniform,
    Exponential,
    Gamma,
    Geometric,
    Linear,
    PointMass,
    Poisson,
    ScaledBeta,
    Triangular,
    TruncatedExponential,
    Uniform,
    family_from_dict,
)
from resetfpt.errors import DomainError

CONTINUOUS = [
    Beta(2.0, 3.0),
    Beta(0.7, 0.9),
    ScaledBeta(2.0, 3.0, 2.5),
    Uniform(0.2, 1.7),
    TruncatedExponential(1.3, 0.8),
    Exponential(1.7),
    Gamma(2.2, 1.4),
    Triangular(),
    Linear(0.8, 0.6),
]

DISCRETE = [
    DiscreteUniform([0.0, 0.4, 1.1]),
    Binomial(5, 0.3),
    Geometric(0.4),
    Poisson(2.5),
    PointMass(0.3),
]


@pytest.mark.parametrize("fam", CONTINUOUS, ids=lambda f: repr(f))
def test_continuous_normalization(fam):
    lo, hi = fam.support
    hi = min(hi, fam.quantile(1.0 - 1e-13))
    total, _ = quad(fam.pdf, lo, hi, epsabs=1e-12, epsrel=1e-10, limit=200)
    assert abs(total - 1.0) < 1e-8


@pytest.mark.parametrize("fam", DISCRETE, ids=lambda f: repr(f))
def test_discrete_normalization(fam):
    _, ps = fam.atoms()
    assert abs(ps.sum() - 1.0) < 1e-12
    assert np.all(ps >= 0)


def test_pdf_reference_values():
    assert Uniform(0.0, 1.0).pdf(0.5) == 1.0
    assert abs(Beta(2.0, 2.0).pdf(0.5) - 1.5) < 1e-12
    # value 1/(1 - e^{-1}) cross-checked by renormalizing exp(-x) over (0,1)
    assert abs(TruncatedExponential(1.0, 1.0).pdf(0.0) - 1.5819767068693265) < 1e-12


def test_pdf_outside_support_is_zero():
    assert Beta(2.0, 2.0).pdf(-0.1) == 0.0
    assert Beta(2.0, 2.0).pdf(1.1) == 0.0
    assert Binomial(3, 0.5).pdf(1.5) == 0.0
    assert Geometric(0.5).pdf(-1.0) == 0.0


def test_discrete_pdf_returns_pmf_at_atoms():
    fam = Binomial(3, 0.5)
    assert abs(fam.pdf(1.0) - 3 / 8) < 1e-12
    du = DiscreteUniform([0.0, 0.4, 1.1])
    assert abs(du.pdf(0.4) - 1 / 3) < 1e-12


def test_laplace_reference_values():
    assert abs(Exponential(2.0).laplace(2.0) - 0.5) < 1e-15
    assert Binomial(3, 0.5).laplace(0.0) == 1.0
    # E[2^X] for a uniform X on (0,1), oracle: quadrature = 1/ln 2
    assert abs(Beta(1.0, 1.0).laplace(-math.log(2.0)) - 1.4426950408889634) < 1e-12


@pytest.mark.parametrize("fam", CONTINUOUS + DISCRETE, ids=lambda f: repr(f))
def test_laplace_is_one_at_zero(fam):
    assert fam.laplace(0.0) == 1.0


@pytest.mark.parametrize("fam", CONTINUOUS, ids=lambda f: repr(f))
def test_laplace_matches_quadrature(fam):
    lo, hi = fam.support
    strip_lo, _ = fam.laplace_strip()
    s_lo = -2.0 if math.isinf(strip_lo) else 0.6 * strip_lo
    for s in np.linspace(s_lo, 4.0, 9):
        if s == 0.0:
            continue
        if math.isinf(hi):
            # integrand decays at rate s - strip_lo; cut where the tail is ~e^-45
            hi_cut = max(fam.quantile(1.0 - 1e-14), 45.0 / (float(s) - strip_lo))
        else:
            hi_cut = hi
        direct, _ = quad(lambda x: fam.pdf(x) * math.exp(-s * x), lo, hi_cut,
                         epsabs=1e-14, epsrel=1e-11, limit=400)
        assert abs(fam.laplace(float(s)) - direct) < 1e-8 * max(abs(direct), 1.0)


@pytest.mark.parametrize("fam", DISCRETE, ids=lambda f: repr(f))
def test_laplace_matches_atom_sum(fam):
    for s in (-0.3, 0.4, 2.0):
        if isinstance(fam, Geometric):
            # enumerate far enough that the exp(-s k)-weighted tail is negligible;
            # terms assembled in log space to dodge 0 * inf
            k = np.arange(5000)
            direct = float(np.sum(np.exp(
                math.log(fam.p) + k * math.log1p(-fam.p) - s * k)))
        else:
            xs, ps = fam.atoms()
            direct = float(np.sum(ps * np.exp(-s * xs)))
        assert abs(fam.laplace(s) - direct) < 1e-8 * max(abs(direct), 1.0)


def test_laplace_convergence_strip_errors():
    with pytest.raises(DomainError):
        Exponential(1.0).laplace(-2.0)
    with pytest.raises(DomainError):
        Gamma(2.0, 1.5).laplace(-1.6)
    with pytest.raises(DomainError):
        Geometric(0.5).laplace(math.log(0.5) - 0.1)


def test_parameter_validation():
    with pytest.raises(DomainError):
        Beta(-1.0, 2.0)
    with pytest.raises(DomainError):
        Uniform(1.0, 0.5)
    with pytest.raises(DomainError):
        Binomial(0, 0.5)
    with pytest.raises(DomainError):
        Geometric(1.0)
    with pytest.raises(DomainError):
        Poisson(0.0)
    with pytest.raises(DomainError):
        Linear(3.0, -0.5)     # integrates to 1 but negative at 0
    with pytest.raises(DomainError):
        Linear(1.0, 1.0)      # does not integrate to 1


def test_mean_reference_values():
    assert abs(ScaledBeta(1.0, 1.0, 2.0).mean() - 1.0) < 1e-15
    assert abs(ScaledBeta(2.0, 3.0, 1.0).mean() - 0.4) < 1e-15
    assert abs(Poisson(3.0).mean() - 3.0) < 1e-15


@pytest.mark.parametrize("fam", CONTINUOUS, ids=lambda f: repr(f))
def test_mean_matches_quadrature(fam):
    lo, hi = fam.support
    hi_cut = min(hi, fam.quantile(1.0 - 1e-14))
    direct, _ = quad(lambda x: x * fam.pdf(x), lo, hi_cut,
                     epsabs=1e-13, epsrel=1e-11, limit=400)
    assert abs(fam.mean() - direct) < 1e-9 * max(1.0, abs(direct))


def test_point_mass_sampling(rng):
    fam = PointMass(0.3)
    assert fam.sample(rng) == 0.3
    assert np.all(fam.sample(rng, 10) == 0.3)


def test_uniform_sample_mean(rng):
    draws = Uniform(0.0, 1.0).sample(rng, 1_000_000)
    assert abs(draws.mean() - 0.5) < 0.002


def test_gamma_sample_mean(rng):
    draws = Gamma(2.0, 1.0).sample(rng, 1_000_000)
    assert abs(draws.mean() - 2.0) < 0.01


@pytest.mark.parametrize("fam", CONTINUOUS, ids=lambda f: repr(f))
def test_continuous_sampling_ks(fam, rng):
    draws = fam.sample(rng, 1_000_000)
    res = stats.kstest(draws, fam.cdf)
    assert res.statistic < 0.002


@pytest.mark.parametrize("fam", CONTINUOUS + DISCRETE, ids=lambda f: repr(f))
def test_sample_moments_match(fam, rng):
    n = 1_000_000
    draws = np.asarray(fam.sample(rng, n), dtype=float)
    m1 = fam.mean()
    if fam.is_discrete:
        xs, ps = fam.atoms()
        m2 = float(np.sum(ps * xs ** 2))
    else:
        lo, hi = fam.support
        hi_cut = min(hi, fam.quantile(1.0 - 1e-14))
        m2 = quad(lambda x: x * x * fam.pdf(x), lo, hi_cut, limit=400)[0]
    var = max(m2 - m1 ** 2, 0.0)
    se1 = math.sqrt(var / n)
    assert abs(draws.mean() - m1) <= 4.0 * se1 + 1e-12
    m4 = np.mean((draws - m1) ** 4)
    se2 = math.sqrt(max(m4 - var ** 2, 0.0) / n)
    assert abs(np.mean(draws ** 2) - m2) <= 4.0 * (se2 + 2 * abs(m1) * se1) + 1e-12


@pytest.mark.parametrize("fam", CONTINUOUS + DISCRETE, ids=lambda f: repr(f))
def test_json_round_trip(fam):
    d = fam.to_dict()
    schema = json.loads(
        resources.files("resetfpt.schemas").joinpath("density_family.schema.json")
        .read_text()
    )
    jsonschema.validate(d, schema)
    back = family_from_dict(json.loads(json.dumps(d)))
    assert back == fam


def test_family_from_dict_rejects_unknown_kind():
    with pytest.raises(DomainError):
        family_from_dict({"kind": "cauchy", "x0": 0.0})


@given(alpha=st.floats(0.2, 20.0), beta=st.floats(0.2, 20.0),
       s=st.floats(-3.0, 3.0))
@settings(max_examples=60, deadline=None)
def test_beta_transform_series_is_smooth(alpha, beta, s):
    val = Beta(alpha, beta).laplace(s)
    # bounded by the extremes of exp(-s x) on (0, 1)
    lo, hi = sorted((math.exp(-s), 1.0))
    assert lo - 1e-12 <= val <= hi + 1e-12


@given(x=st.floats(-2.0, 3.0), theta=st.floats(0.05, 10.0))
@settings(max_examples=60, deadline=None)
def test_pdf_nonnegative(x, theta):
    assert TruncatedExponential(theta, 1.0).pdf(x) >= 0.0
    assert Exponential(theta).pdf(x) >= 0.0


def test_triangular_transform_matches_piecewise_integral():
    fam = Triangular()
    for s in (-2.3, -0.5, 1e-6, 0.7, 3.1):
        direct = quad(lambda x: fam.pdf(x) * math.exp(-s * x), 0, 1, limit=200)[0]
        assert abs(fam.laplace(s) - direct) < 1e-9
