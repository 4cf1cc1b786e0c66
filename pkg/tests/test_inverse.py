"""Inverse solvers: recoveries, certificates, transform identities."""

import math

import numpy as np
import pytest

from resetfpt.densities import (
    Beta,
    Exponential,
    Gamma,
    Geometric,
    PointMass,
    Poisson,
    Uniform,
)
from resetfpt.errors import DomainError, RangeError, SingularityError
from resetfpt.forward import fpt_lt_case1, mean_fpt_case1, q_case1
from resetfpt.inverse import (
    FptLawSpec,
    InverseProblem,
    SearchSpace,
    _minimize_box,
    ifpp_linear_closed_form,
    ifpt_ghat_from_fhat,
    solve_ifpp,
    solve_ifpt,
    solve_imfet,
    solve_imfpt,
)


# ---------------------------------------------------------------------------
# linear closed form
# ---------------------------------------------------------------------------

def test_linear_closed_form_round_trip(rng):
    for _ in range(12):
        mu = rng.uniform(-1.0, 1.0)
        r = rng.uniform(0.3, 3.0)
        xr = rng.uniform(0.1, 0.9)
        lo = q_case1(PointMass(0.999), mu, r, xr, 1.0)
        hi = q_case1(PointMass(1e-3), mu, r, xr, 1.0)
        q = rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo))
        a1, a0 = ifpp_linear_closed_form(q, mu, r, xr)
        if a0 < 0 or a1 + a0 < 0:
            continue   # outside the density cone for this q
        from resetfpt.densities import Linear
        assert abs(q_case1(Linear(a1, a0), mu, r, xr, 1.0) - q) < 1e-10


def test_linear_closed_form_uniform_fixed_point():
    mu, r, xr = 0.2, 1.4, 0.3
    q_u = q_case1(Uniform(0.0, 1.0), mu, r, xr, 1.0)
    a1, a0 = ifpp_linear_closed_form(q_u, mu, r, xr)
    assert abs(a1) < 1e-9
    assert abs(a0 - 1.0) < 1e-9


def test_linear_closed_form_warns_on_negative_profile():
    # push the target towards the edge of the attainable range
    mu, r, xr = 0.0, 1.0, 0.5
    with pytest.warns(UserWarning):
        ifpp_linear_closed_form(0.95, mu, r, xr)


# ---------------------------------------------------------------------------
# exit-probability solver
# ---------------------------------------------------------------------------

def test_solve_ifpp_fixed_candidate():
    mu, r, xr = 0.0, 1.0, 0.5
    prob = InverseProblem(kind="ifpp", case="initial", target=0.5,
                          search=SearchSpace(candidates=[Uniform(0.0, 1.0)]),
                          mu=mu, r=r, b=1.0, x_r=xr)
    sol = solve_ifpp(prob)
    assert sol.status == "ok"
    assert sol.residual < 1e-10
    assert sol.diagnostics["exact"]


def test_solve_ifpp_one_parameter_recovery():
    mu, r, xr = 0.3, 1.2, 0.4
    target = q_case1(Beta(2.0, 2.0), mu, r, xr, 1.0)
    prob = InverseProblem(
        kind="ifpp", case="initial", target=target,
        search=SearchSpace(builder=lambda p: Beta(p["alpha"], p["alpha"]),
                           bounds={"alpha": (0.5, 20.0)}),
        mu=mu, r=r, b=1.0, x_r=xr,
    )
    sol = solve_ifpp(prob)
    assert abs(sol.params["alpha"] - 2.0) < 1e-6


def test_solve_ifpp_two_parameter_box():
    mu, r, xr = 0.0, 1.0, 0.35
    target = q_case1(Beta(2.0, 3.0), mu, r, xr, 1.0)
    prob = InverseProblem(
        kind="ifpp", case="initial", target=target,
        search=SearchSpace(kind="beta", bounds={"alpha": (0.5, 8.0),
                                                "beta": (0.5, 8.0)}),
        mu=mu, r=r, b=1.0, x_r=xr, seed=11,
    )
    sol = solve_ifpp(prob)
    # many beta shapes share one exit probability; the fit must reach it
    assert sol.residual < 1e-16
    assert abs(q_case1(sol.family, mu, r, xr, 1.0) - target) < 1e-8


def test_solve_ifpp_certificate():
    prob = InverseProblem(
        kind="ifpp", case="initial", target=0.3,
        search=SearchSpace(builder=lambda p: Beta(p["alpha"], p["alpha"]),
                           bounds={"alpha": (1.0, 50.0)}),
        mu=0.0, r=1.0, b=1.0, x_r=0.5,
        pi0_profile=lambda x: 1.0 - x,
    )
    sol = solve_ifpp(prob)
    assert sol.status == "no-solution-in-class"
    cert = sol.diagnostics["certificate"]
    assert cert["attainable"][0] <= 0.5 <= cert["attainable"][1]
    assert not (cert["attainable"][0] <= 0.3 <= cert["attainable"][1])


def test_problem_validation():
    with pytest.raises(DomainError):
        InverseProblem(kind="ifpp", case="initial", target=1.5,
                       search=SearchSpace(candidates=[Uniform(0.0, 1.0)]),
                       r=1.0, b=1.0, x_r=0.5)
    with pytest.raises(DomainError):
        InverseProblem(kind="imfpt", case="initial", target=-1.0,
                       search=SearchSpace(candidates=[Exponential(1.0)]),
                       r=1.0, x_r=0.5)
    with pytest.raises(DomainError):
        InverseProblem(kind="ifpp", case="initial", target=0.4,
                       search=SearchSpace(candidates=[Uniform(0.0, 1.0)]),
                       r=1.0, b=1.0)   # x_r missing
    with pytest.raises(DomainError):
        SearchSpace()
    with pytest.raises(DomainError):
        SearchSpace(kind="beta", candidates=[Uniform(0.0, 1.0)],
                    bounds={"alpha": (1, 2)})


# ---------------------------------------------------------------------------
# passage-law solver
# ---------------------------------------------------------------------------

def test_solve_ifpt_recovers_exponential():
    nu, r, xr = 1.4, 1.0, 0.9
    target = FptLawSpec(transform=lambda lam: fpt_lt_case1(lam, Exponential(nu),
                                                           0.0, r, xr))
    prob = InverseProblem(kind="ifpt", case="initial", target=target,
                          search=SearchSpace(kind="exponential",
                                             bounds={"theta": (0.05, 20.0)}),
                          mu=0.0, r=r, x_r=xr)
    sol = solve_ifpt(prob)
    assert abs(sol.params["theta"] - nu) < 1e-6 * nu
    assert sol.diagnostics["locally_unique"]
    assert sol.diagnostics["match"]


def test_solve_ifpt_rejects_invalid_target():
    bad = FptLawSpec(transform=lambda lam: 0.9 / (1.0 + lam))
    prob = InverseProblem(kind="ifpt", case="initial", target=bad,
                          search=SearchSpace(kind="exponential",
                                             bounds={"theta": (0.1, 10.0)}),
                          mu=0.0, r=1.0, x_r=1.0)
    with pytest.raises(DomainError):
        solve_ifpt(prob)


def test_fpt_law_spec_exclusive():
    with pytest.raises(DomainError):
        FptLawSpec(transform=lambda lam: 1.0, samples=np.ones(3))
    with pytest.raises(DomainError):
        FptLawSpec()
    with pytest.raises(DomainError):
        FptLawSpec(moments=(0.0,))


def test_solve_ifpt_from_samples(rng):
    # empirical transform from draws of the target law
    from resetfpt.analytic import BrownianDrift, ResetSpec
    from resetfpt.simulate import SimConfig, simulate_fpt
    nu, r, xr = 1.0, 1.0, 0.6
    cfg = SimConfig(n_paths=60_000, dt=5e-4, seed=99, t_max=80.0)
    samples, _ = simulate_fpt(BrownianDrift(0.0), Exponential(nu),
                              ResetSpec(r, xr), cfg)
    target = FptLawSpec(samples=samples.uncensored())
    prob = InverseProblem(kind="ifpt", case="initial", target=target,
                          search=SearchSpace(kind="exponential",
                                             bounds={"theta": (0.2, 8.0)}),
                          mu=0.0, r=r, x_r=xr)
    sol = solve_ifpt(prob)
    assert abs(sol.params["theta"] - nu) < 0.15


def test_solve_ifpt_moment_targets():
    nu, r, xr = 1.0, 1.0, 1.0
    from resetfpt.laplace import moments_from_lt
    fhat = lambda lam: fpt_lt_case1(lam, Exponential(nu), 0.0, r, xr)
    m = moments_from_lt(fhat, k=2).raw
    target = FptLawSpec(moments=tuple(m))
    prob = InverseProblem(kind="ifpt", case="initial", target=target,
                          search=SearchSpace(candidates=[Exponential(0.7),
                                                         Exponential(1.0),
                                                         Exponential(1.5)]),
                          mu=0.0, r=r, x_r=xr)
    sol = solve_ifpt(prob)
    assert sol.family == Exponential(1.0)


# ---------------------------------------------------------------------------
# transform identity at the origin of the passage law
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("g", [Exponential(1.3), Gamma(2.0, 1.7), PointMass(0.8),
                               Geometric(0.45), Poisson(1.9)],
                         ids=lambda f: repr(f))
def test_ghat_identity(g):
    mu, r, xr = 0.0, 1.0, 0.7
    fhat = lambda lam: fpt_lt_case1(lam, g, mu, r, xr)
    s0 = mu + math.sqrt(mu * mu + 2.0 * r)
    for theta in np.linspace(s0 + 1e-3, 20.0, 50):
        got = ifpt_ghat_from_fhat(float(theta), fhat, mu, r, xr)
        want = g.laplace(float(theta))
        assert abs(got - want) < 1e-8 * max(1.0, abs(want))


def test_ghat_guard_band():
    mu, r = 0.2, 1.0
    s0 = mu + math.sqrt(mu * mu + 2.0 * r)
    fhat = lambda lam: fpt_lt_case1(lam, Exponential(1.0), mu, r, 0.5)
    with pytest.raises(SingularityError):
        ifpt_ghat_from_fhat(s0 + 1e-8, fhat, mu, r, 0.5)
    with pytest.raises(DomainError):
        ifpt_ghat_from_fhat(0.5 * s0, fhat, mu, r, 0.5)


# ---------------------------------------------------------------------------
# mean-matching solvers
# ---------------------------------------------------------------------------

def test_solve_imfpt_scalar_recovery():
    mu, r, xr = 0.3, 1.1, 0.6
    a, theta = 2.5, 1.8
    m = mean_fpt_case1(Gamma(a, theta), mu, r, xr)
    prob = InverseProblem(kind="imfpt", case="initial", target=m,
                          search=SearchSpace(kind="gamma", fixed={"a": a},
                                             bounds={"theta": (0.05, 40.0)}),
                          mu=mu, r=r, x_r=xr)
    sol = solve_imfpt(prob)
    assert abs(sol.params["theta"] - theta) < 1e-8


def test_solve_imfpt_range_error():
    # the family's attainable means stay well above a tiny target
    prob = InverseProblem(kind="imfpt", case="initial", target=1e-9,
                          search=SearchSpace(kind="exponential",
                                             bounds={"theta": (0.1, 50.0)}),
                          mu=0.0, r=1.0, x_r=1.0)
    with pytest.raises(RangeError) as exc:
        solve_imfpt(prob)
    lo, hi = exc.value.attainable
    assert lo > 1e-9
    assert hi > lo


def test_solve_imfet_candidate():
    from resetfpt.forward import mean_fet_case2
    r, x, b = 0.9, 0.5, 1.2
    m = mean_fet_case2(Uniform(0.0, b), x, 0.0, r, b)
    prob = InverseProblem(kind="imfet", case="reset", target=m,
                          search=SearchSpace(candidates=[Uniform(0.0, b)]),
                          mu=0.0, r=r, b=b, x=x)
    sol = solve_imfet(prob)
    assert sol.residual < 1e-12


def test_kind_mismatch_rejected():
    prob = InverseProblem(kind="ifpp", case="initial", target=0.4,
                          search=SearchSpace(candidates=[Uniform(0.0, 1.0)]),
                          r=1.0, b=1.0, x_r=0.5)
    with pytest.raises(DomainError):
        solve_imfpt(prob)


# ---------------------------------------------------------------------------
# optimizer plumbing
# ---------------------------------------------------------------------------

def test_minimizer_scale_invariance():
    fn = lambda v: (v[0] - 0.3) ** 2 + 2.0 * (v[1] + 0.1) ** 2
    x1, _, _ = _minimize_box(fn, [(-1.0, 1.0), (-1.0, 1.0)], seed=5)
    x2, _, _ = _minimize_box(lambda v: 1e3 * fn(v), [(-1.0, 1.0), (-1.0, 1.0)], seed=5)
    assert np.allclose(x1, x2, atol=1e-9)
    assert np.allclose(x1, [0.3, -0.1], atol=1e-6)


def test_minimizer_deterministic_under_seed():
    fn = lambda v: (v[0] - 0.42) ** 2
    a = _minimize_box(fn, [(0.0, 1.0)], seed=7)
    b = _minimize_box(fn, [(0.0, 1.0)], seed=7)
    assert a[0] == pytest.approx(b[0], abs=0.0)
