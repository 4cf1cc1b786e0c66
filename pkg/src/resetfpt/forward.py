"""Forward functionals under a random starting point (case "initial") or a
random reset position (case "reset"): exit probability, passage-time Laplace
transform, mean passage time and mean exit time, each a mixture of the
closed-form kernels against a density family.

Closed-transform routes use the family's one-sided transform; quadrature
routes integrate the kernel against the density directly. Both are exposed
so they can be cross-checked.
"""

import math
from dataclasses import dataclass, field

from scipy.integrate import quad

from . import scalarmath as sm
from .analytic import (
    BvpSolution,
    bm_coefficients,
    bvp_solve,
    Interval,
    ResetSpec,
    mean_fet_bm,
    mean_fpt_bm,
    pi0_bm,
)
from .densities import DensityFamily
from .errors import DomainError, QuadratureError

__all__ = [
    "ForwardRequest",
    "q_case1",
    "q_case1_general",
    "q_against_profile",
    "q_case2",
    "fpt_lt_case1",
    "fpt_lt_case2",
    "mean_fpt_case1",
    "mean_fpt_case2",
    "mean_fet_case1",
    "mean_fet_case2",
]

_TAIL_MASS = 1e-12


def _quad(fn, a, b, **kw):
    out = quad(fn, a, b, epsabs=1e-13, epsrel=1e-9, limit=200, full_output=1, **kw)
    if len(out) > 3:
        raise QuadratureError(f"quadrature did not converge: {out[3]}")
    return out[0], out[1]


def _check_support(family, lo, hi, what):
    slo, shi = family.support
    tol = 1e-12 * max(1.0, abs(hi - lo))
    if family.is_discrete:
        xs, _ = family.atoms()
        if xs.min() < lo - tol or xs.max() > hi + tol:
            raise DomainError(f"{what} atoms must lie within [{lo}, {hi}]")
    else:
        if slo < lo - tol or shi > hi + tol:
            raise DomainError(f"{what} support must lie within [{lo}, {hi}]")


def _upper_cut(family):
    hi = family.support[1]
    if math.isinf(hi):
        return family.quantile(1.0 - _TAIL_MASS)
    return hi


def _mixture(family, kernel, lo=None, hi=None):
    """Integral / sum of kernel against the family.

    ``hi`` overrides the default quantile cut; callers mixing kernels that
    grow exponentially must extend it so the tilted tail stays negligible.
    """
    if family.is_discrete:
        xs, ps = family.atoms()
        return float(sum(p * kernel(x) for x, p in zip(xs, ps))), 0.0
    a = family.support[0] if lo is None else max(lo, family.support[0])
    b = _upper_cut(family) if hi is None else min(hi, family.support[1])
    val, err = _quad(lambda x: family.pdf(x) * kernel(x), a, b)
    return val, err + _TAIL_MASS


# ---------------------------------------------------------------------------
# exit probability
# ---------------------------------------------------------------------------

def q_case1(g, mu, r, x_r, b, route="auto"):
    """Exit probability through 0 when the start is g-distributed on (0, b).

    route "closed" evaluates c1 (E[exp(d1 X)] - exp(d1 b)) +
    c2 (E[exp(d2 X)] - exp(d2 b)); "quadrature" integrates g against the
    pointwise exit probability; "auto" prefers the closed route.
    """
    _check_support(g, 0.0, b, "start density")
    if route not in ("auto", "closed", "quadrature"):
        raise ValueError(f"unknown route {route!r}")
    if route in ("auto", "closed"):
        co = bm_coefficients(mu, r, x_r, b)
        e1 = g.laplace(-co.d1)
        e2 = g.laplace(-co.d2)
        val = co.c1 * (e1 - math.exp(co.d1 * b)) + co.c2 * (e2 - math.exp(co.d2 * b))
    else:
        val, _ = _mixture(g, lambda x: pi0_bm(x, mu, r, x_r, b), 0.0, b)
    return min(max(float(val), 0.0), 1.0)


def q_against_profile(g, pi0, lo, hi):
    """Mixture of an arbitrary exit-probability profile against g."""
    _check_support(g, lo, hi, "start density")
    val, err = _mixture(g, pi0, lo, hi)
    return min(max(float(val), 0.0), 1.0), err


def q_case1_general(g, model, r, x_r, interval):
    """Exit probability with g-distributed start for arbitrary coefficients.

    The pointwise profile comes from the nonlocal boundary-value solve and is
    evaluated through its piecewise-cubic interpolant.
    """
    sol = bvp_solve(model, interval, ResetSpec(r, x_r), rhs="exit_probability")
    val, err = q_against_profile(g, sol, interval.lo, interval.hi)
    return val, err, sol


def q_case2(h, x, mu, r, b):
    """Exit probability through 0 with fixed start x and h-distributed reset.

    The closed-form constants depend on the reset point, so the mixture is
    evaluated by quadrature over the reset position.
    """
    _check_support(h, 0.0, b, "reset density")
    if not 0.0 < x < b:
        raise DomainError(f"start {x} must lie inside (0, {b})")
    if h.is_discrete:
        xs, _ = h.atoms()
        if xs.min() <= 0.0 or xs.max() >= b:
            raise DomainError("reset atoms must lie strictly inside (0, b)")
    val, _ = _mixture(h, lambda u: pi0_bm(x, mu, r, u, b), 0.0, b)
    return min(max(float(val), 0.0), 1.0)


# ---------------------------------------------------------------------------
# passage-time transform
# ---------------------------------------------------------------------------

def _transform_argument(lam, mu, r):
    return mu + sm.sqrt(mu * mu + 2.0 * (lam + r))


def _c_constant(lam, mu, r, x_r):
    er = sm.exp(-x_r * _transform_argument(lam, mu, r))
    return r * er / (lam + r * er)


def fpt_lt_case1(lam, g, mu, r, x_r):
    """E[exp(-lam tau)] with g-distributed start on (0, inf), fixed reset point.

    Equals (1 - C) ghat(mu + sqrt(mu^2 + 2(lam + r))) + C where ghat is the
    family transform; exact 1 at lam = 0. Accepts complex and mpmath lam.
    """
    if g.support[0] < -1e-12:
        raise DomainError("start density must live on the positive half-line")
    if lam == 0:
        return 1.0
    s = _transform_argument(lam, mu, r)
    c = _c_constant(lam, mu, r, x_r)
    return (1.0 - c) * g.laplace(s) + c


def fpt_lt_case2(lam, h, x, mu, r):
    """E[exp(-lam tau)] with fixed start x and h-distributed reset position."""
    if h.support[0] < -1e-12:
        raise DomainError("reset density must live on the positive half-line")
    if lam == 0:
        return 1.0
    s = _transform_argument(lam, mu, r)
    ex = sm.exp(-x * s)

    def integrand(u):
        eu = sm.exp(-u * s)
        return r * eu / (lam + r * eu)

    if h.is_discrete:
        xs, ps = h.atoms()
        mix = sum(p * integrand(u) for u, p in zip(xs, ps))
    else:
        a, bcut = h.support[0], _upper_cut(h)
        if isinstance(lam, complex) or isinstance(s, complex):
            re, _ = _quad(lambda u: h.pdf(u) * integrand(u).real, a, bcut)
            im, _ = _quad(lambda u: h.pdf(u) * integrand(u).imag, a, bcut)
            mix = complex(re, im)
        else:
            mix, _ = _quad(lambda u: h.pdf(u) * integrand(u), a, bcut)
    return ex + (1.0 - ex) * mix


# ---------------------------------------------------------------------------
# mean passage / exit times
# ---------------------------------------------------------------------------

def mean_fpt_case1(g, mu, r, x_r, route="auto"):
    """Mean passage time through 0 with g-distributed start."""
    if r <= 0:
        raise DomainError("mean_fpt_case1 needs r > 0")
    if g.support[0] < -1e-12:
        raise DomainError("start density must live on the positive half-line")
    s0 = mu + math.sqrt(mu * mu + 2.0 * r)
    if route in ("auto", "closed"):
        ghat = g.laplace(s0)
        return (1.0 / r) * math.exp(x_r * s0) * (1.0 - ghat)
    val, _ = _mixture(g, lambda x: mean_fpt_bm(x, mu, r, x_r))
    return float(val)


def mean_fpt_case2(h, x, mu, r, route="auto"):
    """Mean passage time through 0 with fixed start x, h-distributed reset.

    Requires the moment generating function of h to be finite at
    mu + sqrt(mu^2 + 2 r); DomainError otherwise.
    """
    if r <= 0:
        raise DomainError("mean_fpt_case2 needs r > 0")
    s0 = mu + math.sqrt(mu * mu + 2.0 * r)
    if route in ("auto", "closed"):
        mgf = h.laplace(-s0)   # raises DomainError outside the strip
        return (1.0 / r) * (-math.expm1(-x * s0)) * mgf
    hi = None
    if math.isinf(h.support[1]):
        decay = -h.laplace_strip()[0] - s0   # tail rate of pdf(u) exp(u s0)
        if decay <= 0:
            raise DomainError("reset-position tail too heavy for a finite mean")
        hi = max(_upper_cut(h), 45.0 / decay)
        val, _ = _quad(lambda u: h.pdf(u) * mean_fpt_bm(x, mu, r, u),
                       h.support[0], hi)
        return float(val)
    val, _ = _mixture(h, lambda u: mean_fpt_bm(x, mu, r, u))
    return float(val)


def mean_fet_case1(g, mu, r, x_r, b, route="auto"):
    """Mean exit time from (0, b) with g-distributed start."""
    _check_support(g, 0.0, b, "start density")
    co = bm_coefficients(mu, r, x_r, b)
    if route in ("auto", "closed"):
        e1 = g.laplace(-co.d1)
        e2 = g.laplace(-co.d2)
        return co.C1 * (e1 - 1.0) + co.C2 * (e2 - 1.0)
    val, _ = _mixture(g, lambda y: mean_fet_bm(y, mu, r, x_r, b), 0.0, b)
    return float(val)


def mean_fet_case2(h, x, mu, r, b):
    """Mean exit time from (0, b) with fixed start x, h-distributed reset."""
    _check_support(h, 0.0, b, "reset density")
    if not 0.0 <= x <= b:
        raise DomainError(f"start {x} outside [0, {b}]")
    if h.is_discrete:
        xs, _ = h.atoms()
        if xs.min() <= 0.0 or xs.max() >= b:
            raise DomainError("reset atoms must lie strictly inside (0, b)")
    val, _ = _mixture(h, lambda u: mean_fet_bm(x, mu, r, u, b), 0.0, b)
    return float(val)


# ---------------------------------------------------------------------------
# batch request container (JSON-facing)
# ---------------------------------------------------------------------------

@dataclass
class ForwardRequest:
    """One forward evaluation: which functional, which case, fixed parameters.

    Exactly one of the start and the reset position is randomized; the other
    is a fixed number.
    """

    target: str                  # exit_prob_q | mean_fpt | mean_fet | fpt_lt
    case: str                    # initial | reset
    family: DensityFamily
    mu: float = 0.0
    r: float = 1.0
    b: float = None              # None selects the half-line targets
    x: float = None              # fixed start (case reset)
    x_r: float = None            # fixed reset point (case initial)
    lambda_grid: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.case not in ("initial", "reset"):
            raise DomainError(f"unknown case {self.case!r}")
        if self.case == "initial" and self.x_r is None:
            raise DomainError("case 'initial' needs a fixed reset point x_r")
        if self.case == "reset" and self.x is None:
            raise DomainError("case 'reset' needs a fixed start x")

    def run(self):
        """Evaluate and report value(s) plus the route taken."""
        t, c = self.target, self.case
        if t == "exit_prob_q":
            if self.b is None:
                raise DomainError("exit probability needs a bounded interval")
            if c == "initial":
                val = q_case1(self.family, self.mu, self.r, self.x_r, self.b)
                route = "closed-form"
            else:
                val = q_case2(self.family, self.x, self.mu, self.r, self.b)
                route = "quadrature"
            return {"value": val, "route": route}
        if t == "mean_fpt":
            if c == "initial":
                val = mean_fpt_case1(self.family, self.mu, self.r, self.x_r)
            else:
                val = mean_fpt_case2(self.family, self.x, self.mu, self.r)
            return {"value": float(val), "route": "closed-form"}
        if t == "mean_fet":
            if self.b is None:
                raise DomainError("mean exit time needs a bounded interval")
            if c == "initial":
                val = mean_fet_case1(self.family, self.mu, self.r, self.x_r, self.b)
                route = "closed-form"
            else:
                val = mean_fet_case2(self.family, self.x, self.mu, self.r, self.b)
                route = "quadrature"
            return {"value": float(val), "route": route}
        if t == "fpt_lt":
            grid = list(self.lambda_grid) or [0.0, 0.5, 1.0, 2.0]
            if c == "initial":
                vals = [float(sm.real(fpt_lt_case1(l, self.family, self.mu, self.r, self.x_r)))
                        for l in grid]
            else:
                vals = [float(sm.real(fpt_lt_case2(l, self.family, self.x, self.mu, self.r)))
                        for l in grid]
            return {"lambda": grid, "value": vals, "route": "closed-form"}
        raise DomainError(f"unknown forward target {t!r}")
