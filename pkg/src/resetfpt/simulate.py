"""Monte Carlo estimation of passage functionals under resetting.

Paths follow Euler-Maruyama between reset events; reset epochs come from
exact exponential clocks, so reset timing carries no step-size bias. Barrier
crossings inside a step are recovered with the Brownian-bridge correction
(default on for Brownian models, where it makes the exit law exact in
distribution). Runs are deterministic in (seed, inputs) regardless of the
worker-thread count; the RESET_FPT_THREADS environment variable caps
parallelism.
"""

import math
import os
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np

from . import _kernels
from .analytic import (
    BrownianDrift,
    Custom,
    DiffusionModel,
    Feller,
    GeometricBM,
    Interval,
    OrnsteinUhlenbeck,
    ResetSpec,
    WrightFisher,
    mean_fet_bm,
    mean_fpt_bm,
)
from .densities import DensityFamily, PointMass
from .errors import CensoringWarning, ConfigError, DomainError
from .forward import mean_fet_case1, mean_fpt_case1

__all__ = ["SimConfig", "Estimate", "FptSamples", "simulate_fpt", "simulate_exit",
           "estimate_lt"]

_CENSOR_WARN = 1e-3
_EMPTY = np.zeros(0)


@dataclass(frozen=True)
class SimConfig:
    n_paths: int
    dt: float
    seed: int = 0
    t_max: float = None       # None picks a horizon from the analytic mean
    antithetic: bool = False

    def __post_init__(self):
        if self.n_paths < 1:
            raise ConfigError("n_paths must be >= 1")
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.t_max is not None:
            if self.t_max <= 0:
                raise ConfigError("t_max must be positive")
            if self.dt >= self.t_max:
                raise ConfigError("dt must be smaller than t_max")


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    n_effective: int
    method: str = "monte-carlo"
    censored_fraction: float = 0.0

    def __post_init__(self):
        if self.std_error < 0:
            raise ConfigError("standard error cannot be negative")
        if not 0.0 <= self.censored_fraction <= 1.0:
            raise ConfigError("censored fraction must lie in [0, 1]")

    def to_dict(self):
        return {
            "value": self.value,
            "std_error": self.std_error,
            "n": self.n_effective,
            "censored_fraction": self.censored_fraction,
        }


@dataclass
class FptSamples:
    """Passage-time draws with their censoring mask."""

    times: np.ndarray
    censored: np.ndarray
    t_max: float
    seed: int

    @property
    def n_paths(self):
        return len(self.times)

    @property
    def censored_fraction(self):
        return float(np.mean(self.censored))

    def uncensored(self):
        return self.times[~self.censored]

    def mean_estimate(self):
        ok = self.uncensored()
        if len(ok) == 0:
            raise DomainError("all paths were censored; extend t_max")
        se = float(np.std(ok, ddof=1) / math.sqrt(len(ok))) if len(ok) > 1 else 0.0
        return Estimate(value=float(np.mean(ok)), std_error=se,
                        n_effective=len(ok), censored_fraction=self.censored_fraction)

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("time,censored\n")
            for t, c in zip(self.times, self.censored):
                fh.write(f"{t:.17g},{int(c)}\n")

    def to_binary(self, path):
        """Flat little-endian float64 dump of the passage times."""
        self.times.astype("<f8").tofile(path)


def _apply_thread_cap():
    cap = os.environ.get("RESET_FPT_THREADS")
    if cap:
        try:
            n = max(1, int(cap))
        except ValueError as exc:
            raise ConfigError(f"RESET_FPT_THREADS must be an integer, got {cap!r}") from exc
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _kernel_model(model, span):
    """Map a DiffusionModel onto the kernel's (kind, p0, p1, tables) encoding."""
    if isinstance(model, BrownianDrift):
        return _kernels.KIND_BM, model.drift, 1.0, _EMPTY, _EMPTY, 0.0, 1.0
    if isinstance(model, OrnsteinUhlenbeck):
        return _kernels.KIND_OU, model.nu, model.noise, _EMPTY, _EMPTY, 0.0, 1.0
    if isinstance(model, GeometricBM):
        return _kernels.KIND_GBM, model.theta, model.noise, _EMPTY, _EMPTY, 0.0, 1.0
    if isinstance(model, Feller):
        return _kernels.KIND_FELLER, 0.0, 0.0, _EMPTY, _EMPTY, 0.0, 1.0
    if isinstance(model, WrightFisher):
        return _kernels.KIND_WF, 0.0, 0.0, _EMPTY, _EMPTY, 0.0, 1.0
    if isinstance(model, Custom):
        lo, hi = span
        xs = np.linspace(lo, hi, 4097)
        mu_tab = np.asarray(model.mu(xs), dtype=float)
        sig_tab = np.asarray(model.sigma(xs), dtype=float)
        return (_kernels.KIND_TABULATED, 0.0, 0.0, mu_tab, sig_tab,
                float(lo), float(xs[1] - xs[0]))
    raise ConfigError(f"unsupported model type {type(model).__name__}")


def _start_array(start, n, rng):
    if isinstance(start, DensityFamily):
        return np.asarray(start.sample(rng, n), dtype=float)
    return np.full(n, float(start))


def _reset_arrays(reset, n, rng, lo, hi):
    """Per-path reset targets; random positions are drawn once per path."""
    if reset.rate == 0.0:
        return np.full(n, 0.5 * (lo + hi))
    if reset.is_random:
        fam = reset.position
        flo, fhi = fam.support
        if flo < lo - 1e-12 or fhi > hi + 1e-12:
            raise ConfigError(
                "random reset positions must land inside the working domain"
            )
        return np.asarray(fam.sample(rng, n), dtype=float)
    xr = reset.fixed_position()
    if not lo < xr < hi:
        raise ConfigError(f"reset position {xr} outside the working domain ({lo}, {hi})")
    return np.full(n, xr)


def _default_bridge(model):
    return isinstance(model, BrownianDrift)


def _fpt_horizon(model, start, reset, cfg):
    if cfg.t_max is not None:
        return cfg.t_max
    r = reset.rate
    if isinstance(model, BrownianDrift):
        try:
            if r > 0:
                xr = reset.fixed_position() if not reset.is_random else None
                if isinstance(start, DensityFamily):
                    m = (mean_fpt_case1(start, model.drift, r, xr) if xr is not None
                         else None)
                else:
                    m = mean_fpt_bm(float(start), model.drift, r, xr) if xr is not None else None
                if m is not None and math.isfinite(m) and m > 0:
                    return 50.0 * m
            elif model.drift < 0:
                x0 = start.mean() if isinstance(start, DensityFamily) else float(start)
                return 50.0 * x0 / abs(model.drift)
        except DomainError:
            pass
    if r > 0:
        return 50.0 / r
    raise ConfigError("no finite default horizon; set t_max explicitly")


def _fet_horizon(model, start, reset, interval, cfg):
    if cfg.t_max is not None:
        return cfg.t_max
    r = reset.rate
    if isinstance(model, BrownianDrift) and r > 0 and not reset.is_random:
        try:
            xr = reset.fixed_position()
            if isinstance(start, DensityFamily):
                m = mean_fet_case1(start, model.drift, r, xr, interval.hi - interval.lo)
            else:
                m = mean_fet_bm(float(start) - interval.lo, model.drift, r,
                                xr - interval.lo, interval.hi - interval.lo)
            if math.isfinite(m) and m > 0:
                return 50.0 * m
        except DomainError:
            pass
    if r > 0:
        return 50.0 / r
    width = interval.hi - interval.lo
    sig = float(np.min(model.sigma(np.linspace(interval.lo + 1e-9 * width,
                                               interval.hi - 1e-9 * width, 65))))
    return 100.0 * width * width / max(sig * sig, 1e-12)


def _warn_censoring(frac):
    if frac > _CENSOR_WARN:
        warnings.warn(
            f"censored fraction {frac:.2e} exceeds {_CENSOR_WARN:.0e}; "
            "estimates exclude the censored mass", CensoringWarning, stacklevel=3,
        )


def simulate_fpt(model, start, reset, cfg, barrier=0.0, bridge=None):
    """Passage times through ``barrier`` from above.

    start is a fixed position or a DensityFamily; reset.position may be a
    family, in which case each path draws its own reset target once. Returns
    (FptSamples, Estimate of the mean over uncensored paths).
    """
    if isinstance(start, DensityFamily):
        if start.support[0] < barrier - 1e-12:
            raise DomainError("start support must lie above the barrier")
    elif start < barrier:
        raise DomainError("start must lie above the barrier")
    t_max = _fpt_horizon(model, start, reset, cfg)
    if cfg.dt >= t_max:
        raise ConfigError("dt must be smaller than the simulation horizon")
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x5EED]))
    starts = _start_array(start, cfg.n_paths, rng)
    xrs = _reset_arrays(reset, cfg.n_paths, rng, barrier, math.inf)
    kind, p0, p1, mu_tab, sig_tab, tab_lo, tab_dx = _kernel_model(
        model, (barrier, float(np.max(starts)) + 10.0 * max(1.0, float(np.max(xrs)))))
    if bridge is None:
        bridge = _default_bridge(model)
    _apply_thread_cap()
    hit, times = _kernels.fpt_kernel(
        cfg.seed, starts, xrs, reset.rate, kind, p0, p1,
        mu_tab, sig_tab, tab_lo, tab_dx,
        barrier, cfg.dt, t_max, bridge, cfg.antithetic,
    )
    samples = FptSamples(times=times, censored=(hit == 0), t_max=t_max, seed=cfg.seed)
    _warn_censoring(samples.censored_fraction)
    return samples, samples.mean_estimate()


def simulate_exit(model, start, reset, interval, cfg, bridge=None):
    """Exit of (lo, hi): probability of leaving through lo and mean exit time.

    Returns (Estimate of the low-side exit probability, Estimate of the mean
    exit time), both over uncensored paths.
    """
    lo, hi = interval.lo, interval.hi
    if isinstance(start, DensityFamily):
        slo, shi = start.support
        if slo < lo - 1e-12 or shi > hi + 1e-12:
            raise DomainError("start support must lie inside the interval")
    elif not lo <= start <= hi:
        raise DomainError("start must lie inside the interval")
    t_max = _fet_horizon(model, start, reset, interval, cfg)
    if cfg.dt >= t_max:
        raise ConfigError("dt must be smaller than the simulation horizon")
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x5EED]))
    starts = _start_array(start, cfg.n_paths, rng)
    xrs = _reset_arrays(reset, cfg.n_paths, rng, lo, hi)
    kind, p0, p1, mu_tab, sig_tab, tab_lo, tab_dx = _kernel_model(model, (lo, hi))
    if bridge is None:
        bridge = _default_bridge(model)
    _apply_thread_cap()
    side, times = _kernels.exit_kernel(
        cfg.seed, starts, xrs, reset.rate, kind, p0, p1,
        mu_tab, sig_tab, tab_lo, tab_dx,
        lo, hi, cfg.dt, t_max, bridge, cfg.antithetic,
    )
    alive = side == 0
    frac = float(np.mean(alive))
    _warn_censoring(frac)
    n_ok = int(np.sum(~alive))
    if n_ok == 0:
        raise DomainError("all paths were censored; extend t_max")
    p_low = float(np.mean(side[~alive] == -1))
    se_p = math.sqrt(max(p_low * (1.0 - p_low), 0.0) / n_ok)
    pi0_est = Estimate(value=p_low, std_error=se_p, n_effective=n_ok,
                       censored_fraction=frac)
    fet = times[~alive]
    se_t = float(np.std(fet, ddof=1) / math.sqrt(n_ok)) if n_ok > 1 else 0.0
    fet_est = Estimate(value=float(np.mean(fet)), std_error=se_t, n_effective=n_ok,
                       censored_fraction=frac)
    return pi0_est, fet_est


def estimate_lt(samples, lam):
    """Sample-average transform E[exp(-lam tau)] from passage-time draws.

    Censored paths contribute zero to the estimate (its value at lam = 0 is
    therefore 1 - censored_fraction); their maximal possible contribution
    exp(-lam t_max) * censored_fraction is returned separately as an upper
    bias bound.
    """
    if lam < 0:
        raise DomainError("transform argument must be >= 0")
    if samples.n_paths == 0:
        raise DomainError("empty sample set")
    ok = samples.uncensored()
    vals = np.exp(-lam * ok)
    n = samples.n_paths
    mean = float(np.sum(vals)) / n
    # variance treats censored paths as exact zeros
    var = (float(np.sum(vals ** 2)) / n - mean ** 2) / max(n - 1, 1)
    est = Estimate(value=mean, std_error=math.sqrt(max(var, 0.0)),
                   n_effective=len(ok), censored_fraction=samples.censored_fraction)
    bias_bound = samples.censored_fraction * math.exp(-lam * samples.t_max)
    return est, bias_bound
