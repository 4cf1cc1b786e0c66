"""Monte Carlo oracle: determinism, distributional quality, agreement."""

import math
import warnings

import numba
import numpy as np
import pytest
from scipy import stats

from resetfpt._kernels import normal_sample
from resetfpt.analytic import (
    BrownianDrift,
    Custom,
    Feller,
    GeometricBM,
    Interval,
    OrnsteinUhlenbeck,
    ResetSpec,
    mean_fet_bm,
    mean_fpt_bm,
    pi0_bm,
    fpt_lt_bm,
)
from resetfpt.densities import Exponential, PointMass, Uniform
from resetfpt.errors import CensoringWarning, ConfigError, DomainError
from resetfpt.forward import mean_fet_case1, q_case1
from resetfpt.simulate import (
    Estimate,
    SimConfig,
    estimate_lt,
    simulate_exit,
    simulate_fpt,
)

BM = BrownianDrift(0.0)


def test_ziggurat_distribution():
    z = normal_sample(7, 2_000_000)
    res = stats.kstest(z, "norm")
    assert res.statistic < 0.002
    assert abs(z.mean()) < 0.003
    assert abs(z.var() - 1.0) < 0.005


def test_determinism_same_seed(warm_kernels):
    cfg = SimConfig(n_paths=5000, dt=1e-3, seed=42, t_max=30.0)
    a = simulate_exit(BM, 0.5, ResetSpec(1.0, 0.5), Interval(0.0, 1.0), cfg)
    b = simulate_exit(BM, 0.5, ResetSpec(1.0, 0.5), Interval(0.0, 1.0), cfg)
    assert a[0].value == b[0].value
    assert a[1].value == b[1].value


def test_determinism_across_thread_counts(warm_kernels):
    cfg = SimConfig(n_paths=20_000, dt=5e-4, seed=42, t_max=30.0)
    args = (BM, 0.5, ResetSpec(1.0, 0.4), Interval(0.0, 1.0), cfg)
    old = numba.get_num_threads()
    try:
        numba.set_num_threads(1)
        a = simulate_exit(*args)
        numba.set_num_threads(min(2, numba.config.NUMBA_NUM_THREADS))
        b = simulate_exit(*args)
    finally:
        numba.set_num_threads(old)
    assert a[0].value == b[0].value
    assert a[1].value == b[1].value


def test_seed_changes_output(warm_kernels):
    base = dict(n_paths=5000, dt=1e-3, t_max=30.0)
    a = simulate_exit(BM, 0.5, ResetSpec(1.0, 0.5), Interval(0.0, 1.0),
                      SimConfig(seed=1, **base))
    b = simulate_exit(BM, 0.5, ResetSpec(1.0, 0.5), Interval(0.0, 1.0),
                      SimConfig(seed=2, **base))
    assert a[1].value != b[1].value


def test_start_at_barrier(warm_kernels):
    cfg = SimConfig(n_paths=100, dt=1e-3, seed=3, t_max=10.0)
    samples, est = simulate_fpt(BM, PointMass(0.0), ResetSpec(1.0, 0.5), cfg)
    assert np.all(samples.times == 0.0)
    assert est.value == 0.0


def test_config_validation():
    with pytest.raises(ConfigError):
        SimConfig(n_paths=0, dt=1e-3, seed=1)
    with pytest.raises(ConfigError):
        SimConfig(n_paths=10, dt=0.0, seed=1)
    with pytest.raises(ConfigError):
        SimConfig(n_paths=10, dt=2.0, seed=1, t_max=1.0)


def test_reset_support_validation(warm_kernels):
    cfg = SimConfig(n_paths=100, dt=1e-3, seed=1, t_max=5.0)
    with pytest.raises(ConfigError):
        simulate_exit(BM, 0.5, ResetSpec(1.0, Uniform(0.0, 2.0)),
                      Interval(0.0, 1.0), cfg)
    with pytest.raises(ConfigError):
        simulate_exit(BM, 0.5, ResetSpec(1.0, 1.5), Interval(0.0, 1.0), cfg)
    with pytest.raises(DomainError):
        simulate_exit(BM, 1.5, ResetSpec(1.0, 0.5), Interval(0.0, 1.0), cfg)


def test_exit_symmetric_scenario(warm_kernels):
    cfg = SimConfig(n_paths=40_000, dt=2e-4, seed=11, t_max=40.0)
    pi0, fet = simulate_exit(BM, 0.5, ResetSpec(1.0, 0.5), Interval(0.0, 1.0), cfg)
    assert abs(pi0.value - 0.5) <= 3.0 * pi0.std_error
    ref = mean_fet_bm(0.5, 0.0, 1.0, 0.5, 1.0)
    assert abs(fet.value - ref) <= 3.0 * fet.std_error + 2e-4


def test_fpt_mean_matches_closed_form(warm_kernels):
    mu, r, xr, x = 0.0, 2.0, 0.25, 0.25
    cfg = SimConfig(n_paths=40_000, dt=1e-4, seed=12)
    samples, est = simulate_fpt(BrownianDrift(mu), x, ResetSpec(r, xr), cfg)
    ref = mean_fpt_bm(x, mu, r, xr)
    assert abs(est.value - ref) <= 3.0 * est.std_error + 1e-4


def test_classical_drifted_mean(warm_kernels):
    # no resetting, drift -1 from 1: unit mean passage time
    cfg = SimConfig(n_paths=30_000, dt=2e-4, seed=13)
    samples, est = simulate_fpt(BrownianDrift(-1.0), 1.0, ResetSpec(0.0, 0.0), cfg)
    assert abs(est.value - 1.0) <= 3.0 * est.std_error + 5e-4


def test_random_start_family(warm_kernels):
    cfg = SimConfig(n_paths=40_000, dt=2e-4, seed=14, t_max=40.0)
    pi0, _ = simulate_exit(BM, Uniform(0.0, 1.0), ResetSpec(1.0, 0.25),
                           Interval(0.0, 1.0), cfg)
    ref = q_case1(Uniform(0.0, 1.0), 0.0, 1.0, 0.25, 1.0)
    assert abs(pi0.value - ref) <= 3.0 * pi0.std_error


def test_random_reset_family(warm_kernels):
    from resetfpt.forward import mean_fet_case2
    cfg = SimConfig(n_paths=40_000, dt=2e-4, seed=15, t_max=60.0)
    h = Uniform(0.2, 0.8)
    pi0, fet = simulate_exit(BM, 0.5, ResetSpec(1.5, h), Interval(0.0, 1.0), cfg)
    from resetfpt.forward import q_case2
    ref_q = q_case2(h, 0.5, 0.0, 1.5, 1.0)
    ref_m = mean_fet_case2(h, 0.5, 0.0, 1.5, 1.0)
    assert abs(pi0.value - ref_q) <= 3.0 * pi0.std_error
    assert abs(fet.value - ref_m) <= 3.0 * fet.std_error + 2e-4


def test_estimate_lt(warm_kernels):
    cfg = SimConfig(n_paths=50_000, dt=2e-4, seed=16)
    samples, _ = simulate_fpt(BM, 0.4, ResetSpec(1.5, 0.4), cfg)
    est0, bias0 = estimate_lt(samples, 0.0)
    assert abs(est0.value - (1.0 - samples.censored_fraction)) < 1e-15
    est, bias = estimate_lt(samples, 1.0)
    ref = fpt_lt_bm(1.0, 0.4, 0.0, 1.5, 0.4)
    assert abs(est.value - ref) <= 3.0 * est.std_error + bias + 1e-3
    est_big, _ = estimate_lt(samples, 500.0)
    assert est_big.value < 0.05
    with pytest.raises(DomainError):
        estimate_lt(samples, -1.0)


def test_censoring_warning(warm_kernels):
    # short horizon leaves a sizable censored fraction but some completions
    cfg = SimConfig(n_paths=2000, dt=1e-3, seed=17, t_max=1.5)
    with pytest.warns(CensoringWarning):
        samples, _ = simulate_fpt(BM, 0.9, ResetSpec(0.5, 0.9), cfg)
    assert samples.censored_fraction > 1e-3


def test_antithetic_runs_and_is_deterministic(warm_kernels):
    cfg = SimConfig(n_paths=10_000, dt=5e-4, seed=18, t_max=30.0, antithetic=True)
    a = simulate_exit(BM, 0.5, ResetSpec(1.0, 0.5), Interval(0.0, 1.0), cfg)
    b = simulate_exit(BM, 0.5, ResetSpec(1.0, 0.5), Interval(0.0, 1.0), cfg)
    assert a[0].value == b[0].value
    assert abs(a[0].value - 0.5) < 0.05


def test_sample_export(tmp_path, warm_kernels):
    cfg = SimConfig(n_paths=500, dt=1e-3, seed=19)
    samples, _ = simulate_fpt(BM, 0.3, ResetSpec(1.0, 0.3), cfg)
    binpath = tmp_path / "fpt.bin"
    samples.to_binary(binpath)
    back = np.fromfile(binpath, dtype="<f8")
    assert np.array_equal(back, samples.times)
    csvpath = tmp_path / "fpt.csv"
    samples.to_csv(csvpath)
    lines = csvpath.read_text().strip().splitlines()
    assert lines[0] == "time,censored"
    assert len(lines) == 501


def test_estimate_validation():
    with pytest.raises(ConfigError):
        Estimate(value=1.0, std_error=-0.1, n_effective=10)
    with pytest.raises(ConfigError):
        Estimate(value=1.0, std_error=0.1, n_effective=10, censored_fraction=1.5)


@pytest.mark.parametrize("model,start,interval", [
    (OrnsteinUhlenbeck(0.8, 1.0), 0.5, Interval(0.0, 1.0)),
    (GeometricBM(0.3, 1.0), 1.5, Interval(1.0, math.e)),
    (Feller(), 0.12, Interval(0.0, 0.25)),
])
def test_other_models_run(model, start, interval, warm_kernels):
    cfg = SimConfig(n_paths=2000, dt=2e-4, seed=20, t_max=50.0)
    pi0, fet = simulate_exit(model, start, ResetSpec(1.0, start), interval, cfg)
    assert 0.0 <= pi0.value <= 1.0
    assert fet.value > 0.0
    assert pi0.censored_fraction < 0.01


def test_custom_model_matches_named_one(warm_kernels):
    # tabulated coefficients reproduce the drifted-BM dynamics
    cfg = SimConfig(n_paths=20_000, dt=5e-4, seed=21, t_max=40.0)
    custom = Custom(lambda x: 0.4 * np.ones_like(np.asarray(x, float)),
                    lambda x: np.ones_like(np.asarray(x, float)))
    a = simulate_exit(custom, 0.5, ResetSpec(1.0, 0.5), Interval(0.0, 1.0), cfg,
                      bridge=True)
    ref = pi0_bm(0.5, 0.4, 1.0, 0.5, 1.0)
    assert abs(a[0].value - ref) <= 3.0 * a[0].std_error + 0.01


def test_ou_exit_matches_bvp(warm_kernels):
    from resetfpt.analytic import bvp_solve
    model = OrnsteinUhlenbeck(0.8, 1.0)
    r, xr = 1.2, 0.4
    sol = bvp_solve(model, Interval(0.0, 1.0), ResetSpec(r, xr),
                    rhs="exit_probability")
    cfg = SimConfig(n_paths=60_000, dt=1e-4, seed=22, t_max=60.0)
    pi0, _ = simulate_exit(model, 0.5, ResetSpec(r, xr), Interval(0.0, 1.0), cfg,
                           bridge=True)
    # Euler steps carry O(dt) weak bias for state-dependent drift
    assert abs(pi0.value - float(sol(0.5))) <= 3.0 * pi0.std_error + 0.005


def test_bias_control_reduced_scale(warm_kernels):
    # halving dt moves the exit estimate by less than the 3-sigma band
    args = (BM, 0.2, ResetSpec(1.0, 0.2), Interval(0.0, 0.4))
    a = simulate_exit(*args, SimConfig(n_paths=400_000, dt=2e-5, seed=23, t_max=40.0))
    b = simulate_exit(*args, SimConfig(n_paths=400_000, dt=1e-5, seed=24, t_max=40.0))
    band = 3.0 * math.hypot(a[0].std_error, b[0].std_error)
    assert abs(a[0].value - b[0].value) <= band


@pytest.mark.slow
def test_bias_control_full_scale(warm_kernels):
    args = (BM, 0.5, ResetSpec(1.0, 0.5), Interval(0.0, 1.0))
    a = simulate_exit(*args, SimConfig(n_paths=1_000_000, dt=1e-5, seed=23))
    b = simulate_exit(*args, SimConfig(n_paths=1_000_000, dt=5e-6, seed=24))
    band = 3.0 * math.hypot(a[0].std_error, b[0].std_error)
    assert abs(a[0].value - b[0].value) <= band


def test_agreement_randomized_tuples(warm_kernels, rng):
    # frozen allowance constant c multiplies sqrt(dt) in the tolerance
    c = 0.5
    dt = 1e-4
    for _ in range(10):
        mu = rng.uniform(-0.8, 0.8)
        r = rng.uniform(0.4, 2.5)
        b = rng.uniform(0.4, 1.0)
        xr = rng.uniform(0.2, 0.8) * b
        x = rng.uniform(0.2, 0.8) * b
        cfg = SimConfig(n_paths=100_000, dt=dt, seed=int(rng.integers(1 << 30)),
                        t_max=80.0)
        pi0, _ = simulate_exit(BrownianDrift(mu), x, ResetSpec(r, xr),
                               Interval(0.0, b), cfg)
        ref = pi0_bm(x, mu, r, xr, b)
        assert abs(pi0.value - ref) <= 3.0 * pi0.std_error + c * math.sqrt(dt)
