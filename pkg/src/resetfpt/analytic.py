"""Closed-form passage quantities for drifted Brownian motion with resetting,
their classical no-resetting limits, conjugation transforms, and a generic
solver for the nonlocal boundary-value problems that define the exit
probability and the mean exit time for arbitrary coefficients.

Conventions: the working interval is (lo, hi) with lo = 0 unless stated, the
lower barrier sits at 0, resetting follows a rate-r Poisson clock and moves
the state to x_r instantly. Exponentials are assembled in shifted form so
large r or wide intervals do not overflow.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from . import scalarmath as sm
from .densities import DensityFamily, PointMass
from .errors import DomainError, SolverError

__all__ = [
    "DiffusionModel",
    "BrownianDrift",
    "OrnsteinUhlenbeck",
    "GeometricBM",
    "Feller",
    "WrightFisher",
    "Custom",
    "ResetSpec",
    "Interval",
    "BmResetCoefficients",
    "ConjugationMap",
    "TransformedDensity",
    "bm_coefficients",
    "pi0_bm",
    "pi0_classical",
    "mean_fpt_bm",
    "fpt_lt_bm",
    "mean_fet_bm",
    "BvpSolution",
    "bvp_solve",
    "conjugate_transform",
    "pi0_conjugated",
    "feller_map",
    "wright_fisher_map",
    "identity_map",
]

_MU_ZERO_SWITCH = 1e-7


# ---------------------------------------------------------------------------
# model and parameter containers
# ---------------------------------------------------------------------------

class DiffusionModel:
    """Drift/diffusion pair; subclasses provide mu(x) and sigma(x)."""

    kind = None

    def mu(self, x):
        raise NotImplementedError

    def sigma(self, x):
        raise NotImplementedError


@dataclass(frozen=True)
class BrownianDrift(DiffusionModel):
    """dX = mu dt + dW (unit diffusion coefficient)."""

    drift: float = 0.0
    kind = "bm"

    def mu(self, x):
        return self.drift * np.ones_like(np.asarray(x, dtype=float))

    def sigma(self, x):
        return np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class OrnsteinUhlenbeck(DiffusionModel):
    """dX = -nu X dt + sigma dW."""

    nu: float
    noise: float = 1.0
    kind = "ou"

    def mu(self, x):
        return -self.nu * np.asarray(x, dtype=float)

    def sigma(self, x):
        return self.noise * np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class GeometricBM(DiffusionModel):
    """dX = theta X dt + sigma X dW."""

    theta: float
    noise: float = 1.0
    kind = "gbm"

    def mu(self, x):
        return self.theta * np.asarray(x, dtype=float)

    def sigma(self, x):
        return self.noise * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class Feller(DiffusionModel):
    """dX = 1/4 dt + sqrt(X) dW."""

    kind = "feller"

    def mu(self, x):
        return 0.25 * np.ones_like(np.asarray(x, dtype=float))

    def sigma(self, x):
        return np.sqrt(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class WrightFisher(DiffusionModel):
    """dX = (1/4 - X/2) dt + sqrt(X (1 - X)) dW."""

    kind = "wright_fisher"

    def mu(self, x):
        return 0.25 - 0.5 * np.asarray(x, dtype=float)

    def sigma(self, x):
        x = np.asarray(x, dtype=float)
        return np.sqrt(x * (1.0 - x))


class Custom(DiffusionModel):
    """Arbitrary coefficients given as callables (scalar or vectorized)."""

    kind = "custom"

    def __init__(self, mu, sigma):
        self._mu = mu
        self._sigma = sigma

    def mu(self, x):
        return self._eval(self._mu, x)

    def sigma(self, x):
        return self._eval(self._sigma, x)

    @staticmethod
    def _eval(fn, x):
        x = np.asarray(x, dtype=float)
        try:
            out = np.asarray(fn(x), dtype=float)
            if out.shape == x.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.asarray([fn(xi) for xi in np.atleast_1d(x)], dtype=float).reshape(x.shape)


@dataclass(frozen=True)
class ResetSpec:
    """Poisson resetting at rate ``rate`` towards ``position``.

    ``position`` is a fixed location or a DensityFamily for the random case.
    """

    rate: float
    position: object

    def __post_init__(self):
        if self.rate < 0:
            raise DomainError("reset rate must be >= 0")

    @property
    def is_random(self):
        return isinstance(self.position, DensityFamily)

    def fixed_position(self):
        if self.is_random:
            raise DomainError("reset position is random; a fixed value was required")
        return float(self.position)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise DomainError("interval needs hi > lo")

    @property
    def width(self):
        return self.hi - self.lo


# ---------------------------------------------------------------------------
# overflow-safe signed exponential sums
# ---------------------------------------------------------------------------

def _expsum(terms):
    """sum of sign * exp(a) over (sign, a) pairs, returned as (mantissa, shift)
    with value = mantissa * exp(shift)."""
    shift = max(a for _, a in terms)
    if not math.isfinite(shift):
        raise DomainError("non-finite exponent in closed-form assembly")
    m = 0.0
    for sign, a in terms:
        m += sign * math.exp(a - shift)
    return m, shift


def _expsum_ratio(num_terms, den_terms):
    mn, sn = _expsum(num_terms)
    md, sd = _expsum(den_terms)
    if md == 0.0:
        raise DomainError("vanishing denominator in closed-form assembly")
    scale = sn - sd
    ratio = mn / md
    if scale > 700.0:
        return math.inf if ratio > 0 else -math.inf
    return ratio * math.exp(scale)


def _exponents(mu, r):
    if r <= 0:
        raise DomainError("resetting closed forms need r > 0")
    sq = math.sqrt(mu * mu + 2.0 * r)
    return -mu - sq, -mu + sq


def _den_terms(d1, d2, x_r, b):
    w = x_r * (d1 - d2)
    return [(1.0, 0.0), (-1.0, d1 * b), (1.0, w + d2 * b), (-1.0, w)]


def _num_terms_pi0(x, d1, d2, x_r, b):
    w = x_r * (d1 - d2)
    return [(1.0, d1 * x), (-1.0, d1 * b), (1.0, w + d2 * b), (-1.0, w + d2 * x)]


# ---------------------------------------------------------------------------
# drifted BM with resetting: closed forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BmResetCoefficients:
    """Constants of the drifted-BM closed forms on (0, b) with reset point x_r.

    d1 < 0 < d2 are the characteristic exponents, (c1, c2) the exit-probability
    constants, (c1p, c2p) their driftless variants, (C1, C2) the mean-exit-time
    constants, and pi0_at_reset the exit probability evaluated at x_r.
    """

    d1: float
    d2: float
    c1: float
    c2: float
    c1p: float
    c2p: float
    C1: float
    C2: float
    pi0_at_reset: float
    mu: float = field(repr=False, default=0.0)
    r: float = field(repr=False, default=0.0)

    def __post_init__(self):
        if not self.d1 < 0.0 < self.d2:
            raise DomainError("characteristic exponents must satisfy d1 < 0 < d2")
        scale = max(1.0, abs(self.d1), abs(self.d2))
        if abs(self.d1 + self.d2 + 2.0 * self.mu) > 1e-9 * scale:
            raise DomainError("exponent identity d1 + d2 = -2 mu violated")
        if abs(self.d1 * self.d2 + 2.0 * self.r) > 1e-9 * scale * scale:
            raise DomainError("exponent identity d1 * d2 = -2 r violated")
        if not -1e-12 <= self.pi0_at_reset <= 1.0 + 1e-12:
            raise DomainError("pi0 at the reset point must lie in [0, 1]")


def bm_coefficients(mu, r, x_r, b):
    """All closed-form constants for drifted BM with resetting on (0, b)."""
    if not 0.0 < x_r < b:
        raise DomainError(f"reset position {x_r} must lie inside (0, {b})")
    d1, d2 = _exponents(mu, r)
    if abs(mu) < _MU_ZERO_SWITCH:
        # zero-drift branch: exact driftless exponents, mu treated as 0
        d1, d2 = -math.sqrt(2.0 * r), math.sqrt(2.0 * r)
        mu = 0.0
    w = x_r * (d1 - d2)
    md, sd = _expsum(_den_terms(d1, d2, x_r, b))
    c1 = math.exp(-sd) / md if sd < 700 else 0.0
    c2 = -c1 * math.exp(w) if w > -745 else -0.0
    # driftless variants depend on r, x_r, b only
    s0 = math.sqrt(2.0 * r)
    mdp, sdp = _expsum(_den_terms(-s0, s0, x_r, b))
    c1p = math.exp(-sdp) / mdp if sdp < 700 else 0.0
    c2p = -c1p * math.exp(-2.0 * x_r * s0)
    den = _den_terms(d1, d2, x_r, b)
    C1 = _expsum_ratio([(1.0, -d2 * x_r), (-1.0, -d2 * x_r + d2 * b)], den) / r
    C2 = _expsum_ratio([(1.0, -d2 * x_r + d1 * b), (-1.0, -d2 * x_r)], den) / r
    pi0_r = _expsum_ratio(_num_terms_pi0(x_r, d1, d2, x_r, b), den)
    return BmResetCoefficients(
        d1=d1, d2=d2, c1=c1, c2=c2, c1p=c1p, c2p=c2p, C1=C1, C2=C2,
        pi0_at_reset=min(max(pi0_r, 0.0), 1.0), mu=mu, r=r,
    )


def pi0_bm(x, mu, r, x_r, b):
    """Probability of exiting (0, b) through 0 for drifted BM with resetting."""
    if not 0.0 <= x <= b:
        raise DomainError(f"start {x} outside [0, {b}]")
    if not 0.0 < x_r < b:
        raise DomainError(f"reset position {x_r} must lie inside (0, {b})")
    d1, d2 = _exponents(mu, r)
    if abs(mu) < _MU_ZERO_SWITCH:
        d1, d2 = -math.sqrt(2.0 * r), math.sqrt(2.0 * r)
    val = _expsum_ratio(_num_terms_pi0(x, d1, d2, x_r, b), _den_terms(d1, d2, x_r, b))
    return min(max(val, 0.0), 1.0)


def pi0_classical(x, mu, b):
    """No-resetting exit probability through 0 for drifted BM on (0, b)."""
    if not 0.0 <= x <= b:
        raise DomainError(f"start {x} outside [0, {b}]")
    if abs(mu) < _MU_ZERO_SWITCH:
        return 1.0 - x / b
    if mu > 0:
        return (math.expm1(-2.0 * mu * x) - math.expm1(-2.0 * mu * b)) / (
            -math.expm1(-2.0 * mu * b)
        )
    # negative drift: same ratio with exponents kept negative
    return math.expm1(2.0 * mu * (b - x)) / math.expm1(2.0 * mu * b)


def _s0(mu, r):
    return mu + math.sqrt(mu * mu + 2.0 * r)


def mean_fpt_bm(x, mu, r, x_r):
    """Mean first-passage time through 0, start x, reset point x_r > 0."""
    if r <= 0:
        raise DomainError("mean_fpt_bm needs r > 0")
    if x < 0:
        raise DomainError("start must be >= 0")
    if x_r <= 0:
        raise DomainError("reset position must be > 0")
    s0 = _s0(mu, r)
    u = x * s0
    if u == 0.0:
        return 0.0
    a = x_r * s0 - math.log(r) + math.log(-math.expm1(-u))
    return math.inf if a > 709 else math.exp(a)


def fpt_lt_bm(lam, x, mu, r, x_r):
    """Laplace transform E[exp(-lam * tau)] of the passage time through 0.

    Accepts float, complex and mpmath arguments for ``lam``.
    """
    if r <= 0:
        raise DomainError("fpt_lt_bm needs r > 0")
    if isinstance(x, (int, float)) and x < 0:
        raise DomainError("start must be >= 0")
    if lam == 0:
        return 1.0
    s = mu + sm.sqrt(mu * mu + 2.0 * (lam + r))
    ex = sm.exp(-x * s)
    er = sm.exp(-x_r * s)
    c = r * er / (lam + r * er)
    return ex + c * (1.0 - ex)


def mean_fet_bm(x, mu, r, x_r, b):
    """Mean first-exit time from (0, b), start x, reset point x_r."""
    if not 0.0 <= x <= b:
        raise DomainError(f"start {x} outside [0, {b}]")
    if not 0.0 < x_r < b:
        raise DomainError(f"reset position {x_r} must lie inside (0, {b})")
    if r <= 0:
        raise DomainError("mean_fet_bm needs r > 0")
    if x == 0.0 or x == b:
        return 0.0
    d1, d2 = _exponents(mu, r)
    if abs(mu) < _MU_ZERO_SWITCH:
        d1, d2 = -math.sqrt(2.0 * r), math.sqrt(2.0 * r)
    m = -d2 * x_r
    num = [
        (1.0, m + d1 * x),
        (-1.0, m + d2 * b + d1 * x),
        (1.0, m + d2 * b),
        (-1.0, m + d2 * x),
        (1.0, m + d1 * b + d2 * x),
        (-1.0, m + d1 * b),
    ]
    val = _expsum_ratio(num, _den_terms(d1, d2, x_r, b)) / r
    return max(val, 0.0)


# ---------------------------------------------------------------------------
# nonlocal boundary-value problems for general coefficients
# ---------------------------------------------------------------------------

@dataclass
class BvpSolution:
    """Grid solution of the nonlocal problem with its diagnostics.

    ``kappa`` is the internally consistent value f(x_r); ``residual`` the
    sup-norm of the second-order finite-difference residual.
    """

    xs: np.ndarray
    values: np.ndarray
    kappa: float
    residual: float
    x_r: float
    snap_error: float
    _spline: CubicSpline = field(repr=False, default=None)

    def __post_init__(self):
        if self._spline is None:
            self._spline = CubicSpline(self.xs, self.values)

    def __call__(self, x):
        return self._spline(x)

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("x,f\n")
            for x, f in zip(self.xs, self.values):
                fh.write(f"{x:.17g},{f:.17g}\n")


def _choose_grid_n(lo, hi, x_r, target=4096):
    """Base grid size making x_r a node when it is (nearly) rational."""
    t = (x_r - lo) / (hi - lo)
    frac = Fraction(t).limit_denominator(8192)
    if abs(t - float(frac)) < 1e-12 and 0 < frac < 1:
        q = frac.denominator
        return q * max(1, round(target / q)), 0.0
    n = target
    j = round(t * n)
    return n, abs(t - j / n) * (hi - lo)


def _solve_local(xs, sig2, mu, r, rhs, f_lo, f_hi):
    """Tridiagonal solve of (sigma^2/2) f'' + mu f' - r f = rhs with Dirichlet data."""
    n = len(xs) - 1
    h = xs[1] - xs[0]
    a = sig2[1:n] / (2.0 * h * h) - mu[1:n] / (2.0 * h)   # sub-diagonal
    bdiag = -sig2[1:n] / (h * h) - r
    c = sig2[1:n] / (2.0 * h * h) + mu[1:n] / (2.0 * h)   # super-diagonal
    d = np.array(rhs[1:n], dtype=float)
    d[0] -= a[0] * f_lo
    d[-1] -= c[-1] * f_hi
    ab = np.zeros((3, n - 1))
    ab[0, 1:] = c[:-1]
    ab[1, :] = bdiag
    ab[2, :-1] = a[1:]
    try:
        inner = solve_banded((1, 1), ab, d)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"tridiagonal solve failed: {exc}") from exc
    if not np.all(np.isfinite(inner)):
        raise SolverError("tridiagonal solve produced non-finite values")
    out = np.empty(n + 1)
    out[0], out[-1] = f_lo, f_hi
    out[1:n] = inner
    return out


def _bvp_once(model, interval, r, x_r, rhs_base, boundary, n):
    xs = np.linspace(interval.lo, interval.hi, n + 1)
    ir = int(round((x_r - interval.lo) / (interval.hi - interval.lo) * n))
    ir = min(max(ir, 1), n - 1)
    sig = model.sigma(xs)
    if np.any(sig[1:-1] <= 0.0):
        raise DomainError("sigma must be positive on the interior of the interval")
    sig2 = sig * sig
    mu = model.mu(xs)
    rhs = np.full(n + 1, rhs_base)
    u = _solve_local(xs, sig2, mu, r, rhs, boundary[0], boundary[1])
    if r > 0.0:
        w = _solve_local(xs, sig2, mu, r, np.full(n + 1, -r), 0.0, 0.0)
        denom = 1.0 - w[ir]
        if abs(denom) < 1e-14:
            raise SolverError("nonlocal closure is singular: 1 - w(x_r) vanished")
        kappa = u[ir] / denom
        f = u + kappa * w
    else:
        kappa = u[ir]
        f = u
    return xs, f, kappa, ir


def _fd_residual(model, xs, f, r, kappa, rhs_base):
    h = xs[1] - xs[0]
    sig2 = model.sigma(xs) ** 2
    mu = model.mu(xs)
    fxx = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
    fx = (f[2:] - f[:-2]) / (2.0 * h)
    res = 0.5 * sig2[1:-1] * fxx + mu[1:-1] * fx + r * (kappa - f[1:-1]) - rhs_base
    return float(np.max(np.abs(res)))


def bvp_solve(model, interval, reset, rhs="exit_probability", boundary=None,
              tol=1e-8, n_max=2 ** 16):
    """Solve L f + r (f(x_r) - f) = rhs_base on the interval with Dirichlet data.

    rhs "exit_probability" solves the homogeneous problem with f = 1 at lo and
    0 at hi; "mean_exit_time" solves the -1 forcing with zero boundary data.
    The nonlocal term is closed by splitting f = u + kappa * w and matching
    kappa = f(x_r). The grid doubles until the sup-norm change is below tol.
    """
    if rhs == "exit_probability":
        rhs_base = 0.0
        bc = (1.0, 0.0)
    elif rhs == "mean_exit_time":
        rhs_base = -1.0
        bc = (0.0, 0.0)
    else:
        raise DomainError(f"unknown rhs kind {rhs!r}")
    if boundary is not None:
        bc = (float(boundary[0]), float(boundary[1]))
    r = reset.rate
    x_r = reset.fixed_position() if r > 0 else 0.5 * (interval.lo + interval.hi)
    if r > 0 and not interval.lo < x_r < interval.hi:
        raise DomainError("reset position must lie inside the interval")

    n, snap = _choose_grid_n(interval.lo, interval.hi, x_r)
    xs, f, kappa, ir = _bvp_once(model, interval, r, x_r, rhs_base, bc, n)
    while n * 2 <= n_max:
        xs2, f2, kappa2, ir2 = _bvp_once(model, interval, r, x_r, rhs_base, bc, 2 * n)
        change = float(np.max(np.abs(f2[::2] - f)))
        xs, f, kappa, ir, n = xs2, f2, kappa2, ir2, 2 * n
        if change < tol:
            break
    residual = _fd_residual(model, xs, f, r, kappa, rhs_base)
    if residual > 1e-6:
        raise SolverError(
            f"finite-difference residual {residual:.3e} above 1e-6 after refinement"
        )
    if abs(f[ir] - kappa) > 1e-10:
        raise SolverError("nonlocal consistency |f(x_r) - kappa| above 1e-10")
    return BvpSolution(xs=xs, values=f, kappa=kappa, residual=residual,
                       x_r=xs[ir], snap_error=snap)


# ---------------------------------------------------------------------------
# diffusions conjugated to Brownian motion
# ---------------------------------------------------------------------------

class ConjugationMap:
    """Increasing differentiable map v with v(lo) = 0 linking a diffusion to BM."""

    def __init__(self, v, v_inverse, v_prime, domain, name="custom"):
        self.v = v
        self.v_inverse = v_inverse
        self.v_prime = v_prime
        self.domain = (float(domain[0]), float(domain[1]))
        self.name = name
        self._validate()

    def _validate(self):
        lo, hi = self.domain
        if abs(self.v(lo)) > 1e-12:
            raise DomainError("conjugation map must vanish at the lower endpoint")
        grid = np.linspace(lo, hi, 64)
        vals = np.array([self.v(g) for g in grid])
        if np.any(np.diff(vals) <= 0):
            raise DomainError("conjugation map must be strictly increasing")
        back = np.array([self.v_inverse(v) for v in vals])
        if np.max(np.abs(back - grid)) > 1e-10 * max(1.0, hi - lo):
            raise DomainError("v_inverse is not the inverse of v to 1e-10")

    def __repr__(self):
        return f"ConjugationMap({self.name}, domain={self.domain})"


def identity_map(hi=1.0):
    return ConjugationMap(lambda x: x, lambda y: y, lambda x: 1.0, (0.0, hi),
                          name="identity")


def feller_map(hi=1.0):
    """v(x) = 2 sqrt(x), the map for dX = 1/4 dt + sqrt(X) dW."""
    return ConjugationMap(
        lambda x: 2.0 * math.sqrt(x),
        lambda y: 0.25 * y * y,
        lambda x: 1.0 / math.sqrt(x),
        (0.0, hi),
        name="feller",
    )


def wright_fisher_map():
    """v(x) = 2 arcsin(sqrt(x)) on (0, 1)."""
    return ConjugationMap(
        lambda x: 2.0 * math.asin(math.sqrt(x)),
        lambda y: math.sin(0.5 * y) ** 2,
        lambda x: 1.0 / math.sqrt(x * (1.0 - x)),
        (0.0, 1.0),
        name="wright_fisher",
    )


class TransformedDensity:
    """Density pulled back to the original scale: g(x) = g~(v(x)) v'(x)."""

    is_discrete = False

    def __init__(self, cmap, base):
        self.cmap = cmap
        self.base = base
        blo, bhi = base.support
        vlo, vhi = cmap.v(cmap.domain[0]), cmap.v(cmap.domain[1])
        if blo < vlo - 1e-12 or bhi > vhi + 1e-12:
            raise DomainError(
                "base density support lies outside the image of the conjugation map"
            )
        self.support = (cmap.v_inverse(max(blo, vlo)), cmap.v_inverse(min(bhi, vhi)))

    def pdf(self, x):
        lo, hi = self.support
        if not lo < x < hi:
            return 0.0
        return self.base.pdf(self.cmap.v(x)) * self.cmap.v_prime(x)


def conjugate_transform(cmap, base):
    """Pull a density on the transformed scale back to the original scale."""
    if isinstance(base, PointMass):
        return PointMass(cmap.v_inverse(base.x))
    if base.is_discrete:
        raise DomainError("only point masses are supported among discrete bases")
    return TransformedDensity(cmap, base)


def pi0_conjugated(x, cmap, r, x_r, b):
    """Exit probability through 0 for a conjugated diffusion with resetting.

    Delegates to the driftless BM closed form on the transformed scale.
    """
    if not 0.0 <= x <= b:
        raise DomainError(f"start {x} outside [0, {b}]")
    return pi0_bm(cmap.v(x), 0.0, r, cmap.v(x_r), cmap.v(b))
