"""Solvers for the four inverse problems in both randomization cases.

Targets: an exit probability q, a passage-time law (given as a transform
closure, empirical draws, or leading moments), a mean passage time, or a
mean exit time. A solution is a density family whose forward functional
matches the target; when the constrained class provably cannot reach the
target the solver returns a non-existence certificate instead.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from .analytic import Interval, ResetSpec, bm_coefficients, bvp_solve
from .densities import family_from_dict
from .errors import (
    DegenerateError,
    DomainError,
    OptimError,
    RangeError,
    SingularityError,
)
from .forward import (
    fpt_lt_case1,
    fpt_lt_case2,
    mean_fet_case1,
    mean_fet_case2,
    mean_fpt_case1,
    mean_fpt_case2,
    q_against_profile,
    q_case1,
    q_case2,
)
from .laplace import MomentSummary, laplace_invert, moments_from_lt

__all__ = [
    "FptLawSpec",
    "SearchSpace",
    "InverseProblem",
    "InverseSolution",
    "solve_ifpp",
    "solve_ifpt",
    "solve_imfpt",
    "solve_imfet",
    "ifpp_linear_closed_form",
    "ifpt_ghat_from_fhat",
    "moments_from_lt",
    "laplace_invert",
    "MomentSummary",
]

_LAMBDA_GRID = np.logspace(-3, 3, 32)
_EXACT_RESIDUAL = 1e-12
_MATCH_RESIDUAL = 1e-10


# ---------------------------------------------------------------------------
# problem containers
# ---------------------------------------------------------------------------

@dataclass
class FptLawSpec:
    """Target passage-time law in one of three representations."""

    transform: object = None        # callable lam -> E[exp(-lam tau)]
    samples: np.ndarray = None      # empirical draws
    moments: tuple = None           # leading raw moments (m1, ...)

    def __post_init__(self):
        given = sum(x is not None for x in (self.transform, self.samples, self.moments))
        if given != 1:
            raise DomainError("specify exactly one representation of the target law")
        if self.moments is not None:
            m = tuple(self.moments)
            if len(m) < 1 or m[0] <= 0:
                raise DomainError("moment target needs m1 > 0")
            if len(m) >= 2 and m[1] - m[0] ** 2 <= 0:
                raise DomainError("moment target needs positive variance")
            self.moments = m

    def transform_callable(self):
        if self.transform is not None:
            fhat = self.transform
            v0 = float(np.real(complex(fhat(0.0))))
            if abs(v0 - 1.0) > 1e-6:
                raise DomainError(f"target transform has fhat(0) = {v0}, expected 1")
            return fhat
        if self.samples is not None:
            t = np.asarray(self.samples, dtype=float)
            return lambda lam: float(np.mean(np.exp(-lam * t)))
        return None


@dataclass
class SearchSpace:
    """Where to look for a solution density.

    Either a parametric family (`kind` plus fixed parameters and a box of
    free parameters, or a `builder` mapping a parameter dict to a family) or
    a finite candidate list.
    """

    kind: str = None
    bounds: dict = field(default_factory=dict)    # free name -> (lo, hi)
    fixed: dict = field(default_factory=dict)
    builder: object = None
    candidates: list = None

    def __post_init__(self):
        has_param = self.kind is not None or self.builder is not None
        if has_param == (self.candidates is not None):
            raise DomainError("search space needs a family spec or candidates, not both")
        if has_param and self.candidates is None and not self.bounds and not self.fixed \
                and self.builder is None:
            raise DomainError("parametric search space is empty")

    @property
    def free_names(self):
        return sorted(self.bounds)

    def make(self, values=()):
        params = dict(self.fixed)
        params.update(zip(self.free_names, values))
        if self.builder is not None:
            return self.builder(params)
        return family_from_dict({"kind": self.kind, **params})


@dataclass
class InverseProblem:
    kind: str                      # ifpp | ifpt | imfpt | imfet
    case: str                      # initial | reset
    search: SearchSpace
    target: object = None          # q, m, or FptLawSpec
    mu: float = 0.0
    r: float = 1.0
    b: float = None
    x: float = None                # fixed start for case 'reset'
    x_r: float = None              # fixed reset point for case 'initial'
    model: object = None           # non-BM diffusion for the general exit problem
    pi0_profile: object = None     # direct exit-probability profile override
    lambda_grid: np.ndarray = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("ifpp", "ifpt", "imfpt", "imfet"):
            raise DomainError(f"unknown inverse problem kind {self.kind!r}")
        if self.case not in ("initial", "reset"):
            raise DomainError(f"unknown case {self.case!r}")
        if self.kind == "ifpp":
            if not (isinstance(self.target, (int, float)) and 0 < self.target < 1):
                raise DomainError("exit-probability target must lie in (0, 1)")
        if self.kind in ("imfpt", "imfet"):
            if not (isinstance(self.target, (int, float)) and self.target > 0):
                raise DomainError("mean target must be positive")
        if self.kind == "ifpt" and not isinstance(self.target, FptLawSpec):
            raise DomainError("passage-law target must be an FptLawSpec")
        if self.kind in ("ifpp", "imfet") and self.b is None:
            raise DomainError("interval problems need b")
        if self.case == "initial" and self.x_r is None:
            raise DomainError("case 'initial' needs the fixed reset point x_r")
        if self.case == "reset" and self.x is None:
            raise DomainError("case 'reset' needs the fixed start x")


@dataclass
class InverseSolution:
    family: object
    params: dict
    residual: float
    objective: str
    status: str                    # ok | no-solution-in-class
    diagnostics: dict = field(default_factory=dict)

    @property
    def converged(self):
        return self.diagnostics.get("converged", True)


# ---------------------------------------------------------------------------
# optimizer plumbing
# ---------------------------------------------------------------------------

def _minimize_box(fn, bounds, seed=0, restarts=20):
    """Bounded Nelder-Mead with random restarts, then a Powell refinement."""
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    rng = np.random.default_rng(seed)
    starts = [0.5 * (lo + hi)]
    starts += [lo + (hi - lo) * rng.uniform(size=len(bounds)) for _ in range(restarts - 1)]
    best = None
    n_iter = 0
    any_success = False
    for x0 in starts:
        res = minimize(
            fn, x0, method="Nelder-Mead", bounds=bounds,
            options={"xatol": 1e-13, "fatol": 1e-16, "maxiter": 4000, "maxfev": 8000},
        )
        n_iter += res.nit
        any_success = any_success or res.success
        if best is None or res.fun < best.fun:
            best = res
    refine = minimize(fn, best.x, method="Powell", bounds=bounds,
                      options={"xtol": 1e-13, "ftol": 1e-16, "maxiter": 4000})
    n_iter += refine.nit
    if refine.fun < best.fun:
        best = refine
        any_success = any_success or refine.success
    if not any_success and best.fun > 1e-8:
        raise OptimError("optimizer failed to converge", best=(best.x, best.fun))
    return np.asarray(best.x, dtype=float), float(best.fun), n_iter


def _hessian_pd(fn, x, f0, scale=1e-4):
    """Positive-definiteness of a finite-difference Hessian at the optimum."""
    n = len(x)
    h = np.maximum(np.abs(x), 1.0) * scale
    H = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros(n); ei[i] = h[i]
            ej = np.zeros(n); ej[j] = h[j]
            if i == j:
                H[i, i] = (fn(x + ei) - 2 * f0 + fn(x - ei)) / h[i] ** 2
            else:
                H[i, j] = H[j, i] = (
                    fn(x + ei + ej) - fn(x + ei - ej) - fn(x - ei + ej) + fn(x - ei - ej)
                ) / (4 * h[i] * h[j])
    try:
        eig = np.linalg.eigvalsh(H)
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(eig > 0))


def _scan_range(fwd, space, n_interior=64):
    """Forward-map range over a one-parameter box: endpoints plus a grid."""
    (lo, hi), = (space.bounds[n] for n in space.free_names)
    grid = np.concatenate(([lo], np.linspace(lo, hi, n_interior + 2)[1:-1], [hi]))
    vals = np.array([fwd([g]) for g in grid])
    diffs = np.diff(vals)
    monotone = bool(np.all(diffs >= -1e-12) or np.all(diffs <= 1e-12))
    return float(vals.min()), float(vals.max()), monotone, grid, vals


def _solve_over_space(fwd, space, target, objective_name, seed):
    """Shared driver: minimize (target - fwd(params))^2 over the search space."""

    def psi(v):
        return (target - fwd(v)) ** 2

    if space.candidates is not None:
        scored = [(psi_val, fam) for fam in space.candidates
                  for psi_val in [(target - fwd(fam)) ** 2]]
        scored.sort(key=lambda p: p[0])
        res, fam = scored[0]
        return InverseSolution(
            family=fam, params=dict(fam._param_dict()), residual=float(res),
            objective=objective_name, status="ok",
            diagnostics={"candidates_scored": len(scored), "exact": res < _EXACT_RESIDUAL},
        )

    names = space.free_names
    if not names:
        fam = space.make()
        res = psi(())
        return InverseSolution(
            family=fam, params=dict(fam._param_dict()), residual=float(res),
            objective=objective_name, status="ok",
            diagnostics={"exact": res < _EXACT_RESIDUAL},
        )

    if len(names) == 1:
        vmin, vmax, monotone, grid, vals = _scan_range(fwd, space)
        margin = 1e-9 * max(1.0, abs(vmax - vmin))
        if target < vmin - margin or target > vmax + margin:
            fam = space.make([grid[int(np.argmin((vals - target) ** 2))]])
            return InverseSolution(
                family=fam, params=dict(fam._param_dict()),
                residual=float(np.min((vals - target) ** 2)),
                objective=objective_name, status="no-solution-in-class",
                diagnostics={
                    "certificate": {
                        "attainable": [vmin, vmax],
                        "target": float(target),
                        "monotone": monotone,
                        "grid_points": len(grid),
                    },
                    "converged": True,
                },
            )

    bounds = [space.bounds[n] for n in names]
    x, f, n_iter = _minimize_box(psi, bounds, seed=seed)
    fam = space.make(x)
    return InverseSolution(
        family=fam, params=dict(zip(names, map(float, x))), residual=float(f),
        objective=objective_name, status="ok",
        diagnostics={
            "iterations": n_iter,
            "converged": True,
            "exact": f < _EXACT_RESIDUAL,
            "locally_unique": _hessian_pd(psi, x, f),
        },
    )


# ---------------------------------------------------------------------------
# the four solvers
# ---------------------------------------------------------------------------

def _exit_forward(problem):
    """Forward map q(family) for the exit-probability problem."""
    if problem.case == "reset":
        return lambda fam: q_case2(fam, problem.x, problem.mu, problem.r, problem.b)
    if problem.pi0_profile is not None:
        prof = problem.pi0_profile
        return lambda fam: q_against_profile(fam, prof, 0.0, problem.b)[0]
    if problem.model is not None:
        sol = bvp_solve(problem.model, Interval(0.0, problem.b),
                        ResetSpec(problem.r, problem.x_r), rhs="exit_probability")
        return lambda fam: q_against_profile(fam, sol, 0.0, problem.b)[0]
    return lambda fam: q_case1(fam, problem.mu, problem.r, problem.x_r, problem.b)


def solve_ifpp(problem):
    """Find a density whose exit probability through 0 equals the target q."""
    if problem.kind != "ifpp":
        raise DomainError("solve_ifpp needs an ifpp problem")
    raw = _exit_forward(problem)
    fwd = (lambda v: raw(problem.search.make(v))) if problem.search.candidates is None else raw
    return _solve_over_space(fwd, problem.search, float(problem.target),
                             "psi_square", problem.seed)


def solve_ifpt(problem):
    """Match a full passage-time law through its Laplace transform."""
    if problem.kind != "ifpt":
        raise DomainError("solve_ifpt needs an ifpt problem")
    spec = problem.target
    grid = problem.lambda_grid if problem.lambda_grid is not None else _LAMBDA_GRID
    grid = np.asarray(grid, dtype=float)
    weights = 1.0 / (1.0 + grid)

    def model_lt(fam, lam):
        if problem.case == "initial":
            return fpt_lt_case1(lam, fam, problem.mu, problem.r, problem.x_r)
        return fpt_lt_case2(lam, fam, problem.x, problem.mu, problem.r)

    if spec.moments is not None:
        m_target = np.asarray(spec.moments, dtype=float)
        k = len(m_target)

        def objective(fam):
            mm = moments_from_lt(lambda l: model_lt(fam, l), k=k)
            mv = np.asarray(mm.raw[:k])
            return float(np.sum(((mv - m_target) / np.maximum(np.abs(m_target), 1e-12)) ** 2))

        objective_name = "moment_match"
    else:
        fhat = spec.transform_callable()
        target_vals = np.array([float(np.real(complex(fhat(l)))) for l in grid])

        def objective(fam):
            model_vals = np.array([float(np.real(complex(model_lt(fam, l)))) for l in grid])
            return float(np.sum(weights * (target_vals - model_vals) ** 2))

        objective_name = "transform_l2"

    space = problem.search
    if space.candidates is not None:
        scored = sorted(((objective(fam), fam) for fam in space.candidates), key=lambda p: p[0])
        res, fam = scored[0]
        return InverseSolution(family=fam, params=dict(fam._param_dict()),
                               residual=float(res), objective=objective_name, status="ok",
                               diagnostics={"match": res < _MATCH_RESIDUAL})
    names = space.free_names
    if not names:
        fam = space.make()
        res = objective(fam)
        return InverseSolution(family=fam, params=dict(fam._param_dict()),
                               residual=float(res), objective=objective_name, status="ok",
                               diagnostics={"match": res < _MATCH_RESIDUAL})

    def fn(v):
        return objective(space.make(v))

    bounds = [space.bounds[n] for n in names]
    x, f, n_iter = _minimize_box(fn, bounds, seed=problem.seed)
    fam = space.make(x)
    return InverseSolution(
        family=fam, params=dict(zip(names, map(float, x))), residual=float(f),
        objective=objective_name, status="ok",
        diagnostics={
            "iterations": n_iter,
            "converged": True,
            "match": f < _MATCH_RESIDUAL,
            "locally_unique": _hessian_pd(fn, x, f),
        },
    )


def _mean_forward(problem):
    if problem.kind == "imfpt":
        if problem.case == "initial":
            return lambda fam: mean_fpt_case1(fam, problem.mu, problem.r, problem.x_r)
        return lambda fam: mean_fpt_case2(fam, problem.x, problem.mu, problem.r)
    if problem.case == "initial":
        return lambda fam: mean_fet_case1(fam, problem.mu, problem.r, problem.x_r, problem.b)
    return lambda fam: mean_fet_case2(fam, problem.x, problem.mu, problem.r, problem.b)


def _solve_mean(problem, objective_name):
    raw = _mean_forward(problem)
    space = problem.search
    m = float(problem.target)

    if space.candidates is not None or not space.free_names:
        fwd = raw if space.candidates is not None else (lambda v: raw(space.make(v)))
        return _solve_over_space(fwd, space, m, objective_name, problem.seed)

    fwd = lambda v: raw(space.make(v))
    if len(space.free_names) == 1:
        vmin, vmax, monotone, grid, vals = _scan_range(fwd, space)
        if not vmin <= m <= vmax:
            raise RangeError(
                f"target mean {m} outside the attainable range [{vmin:.6g}, {vmax:.6g}] "
                "of the search family", attainable=(vmin, vmax),
            )
        # bracket the root from the scan, then polish
        resid = vals - m
        idx = np.nonzero(np.diff(np.sign(resid)) != 0)[0]
        if len(idx) == 0:
            i = int(np.argmin(np.abs(resid)))
            root = grid[i]
        else:
            i = idx[0]
            root = brentq(lambda p: fwd([p]) - m, grid[i], grid[i + 1],
                          xtol=1e-15, rtol=8.9e-16)
        fam = space.make([root])
        res = (m - fwd([root])) ** 2
        return InverseSolution(
            family=fam, params=dict(zip(space.free_names, [float(root)])),
            residual=float(res), objective=objective_name, status="ok",
            diagnostics={"converged": True, "monotone_scan": monotone,
                         "exact": res < _EXACT_RESIDUAL},
        )
    return _solve_over_space(fwd, space, m, objective_name, problem.seed)


def solve_imfpt(problem):
    """Match a prescribed mean passage time through 0."""
    if problem.kind != "imfpt":
        raise DomainError("solve_imfpt needs an imfpt problem")
    return _solve_mean(problem, "mean_residual")


def solve_imfet(problem):
    """Match a prescribed mean exit time from (0, b)."""
    if problem.kind != "imfet":
        raise DomainError("solve_imfet needs an imfet problem")
    return _solve_mean(problem, "mean_residual")


# ---------------------------------------------------------------------------
# closed forms and transform identities
# ---------------------------------------------------------------------------

def ifpp_linear_closed_form(q, mu, r, x_r):
    """Coefficients (a1, a0) of the unique linear density on (0, 1) with exit
    probability q (unit interval, fixed reset point).

    Emits a warning when the resulting linear function dips negative on
    (0, 1), in which case it is not a valid density.
    """
    co = bm_coefficients(mu, r, x_r, 1.0)
    d1, d2, c1, c2 = co.d1, co.d2, co.c1, co.c2
    e1, e2 = math.exp(d1), math.exp(d2)
    num = q - (c1 / d1) * (e1 - 1.0) - (c2 / d2) * (e2 - 1.0) + c1 * e1 + c2 * e2
    den = (c1 / (2 * d1 ** 2)) * (e1 * (d1 - 2.0) + 2.0 + d1) \
        + (c2 / (2 * d2 ** 2)) * (e2 * (d2 - 2.0) + 2.0 + d2)
    if abs(den) < 1e-14 * max(1.0, abs(num)):
        raise DegenerateError("linear-family closed form degenerates: denominator vanished")
    a1 = num / den
    a0 = 1.0 - a1 / 2.0
    if a0 < 0.0 or a1 + a0 < 0.0:
        warnings.warn(
            f"linear profile a1={a1:.6g}, a0={a0:.6g} is negative on part of (0, 1) "
            "and is not a valid density", UserWarning, stacklevel=2,
        )
    return a1, a0


def ifpt_ghat_from_fhat(theta, fhat, mu, r, x_r):
    """Recover the start-density transform at theta from a passage-law transform.

    Valid away from theta = mu +/- sqrt(mu^2 + 2 r) (a 1e-6 guard band is
    enforced) and only where the induced transform argument
    theta^2/2 - r - theta mu is nonnegative.
    """
    sq = math.sqrt(mu * mu + 2.0 * r)
    if abs(theta - (mu + sq)) <= 1e-6 or abs(theta - (mu - sq)) <= 1e-6:
        raise SingularityError(
            f"theta = {theta} is inside the guard band around mu +/- sqrt(mu^2 + 2r)"
        )
    lam = 0.5 * theta * theta - r - theta * mu
    if lam < 0:
        raise DomainError(
            f"induced transform argument {lam:.6g} is negative; "
            "theta must satisfy |theta - mu| > sqrt(mu^2 + 2 r)"
        )
    er = math.exp(-theta * x_r)
    denom = theta * theta - 2.0 * r - 2.0 * theta * mu   # equals 2 lam
    fval = float(np.real(complex(fhat(lam))))
    return (2.0 / denom) * ((lam + r * er) * fval - r * er)
