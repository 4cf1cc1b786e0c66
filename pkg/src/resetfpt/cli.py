"""Command-line front end.

Subcommands: ``forward``, ``inverse`` and ``simulate`` evaluate a scenario
file; ``verify`` replays the named regression cases; ``report`` runs a
scenario (or the regression suite) and renders figures next to the
delimited output.

Exit codes are a stable contract: 0 success, 1 verify failure, 2 domain or
validation error, 3 solver/numerical error, 4 censoring escalated by
--strict.
"""

import argparse
import json
import sys
import warnings
from importlib import resources

import jsonschema
import numpy as np

from .analytic import (
    BrownianDrift,
    Feller,
    GeometricBM,
    Interval,
    OrnsteinUhlenbeck,
    ResetSpec,
    WrightFisher,
)
from .cases import run_cases
from .densities import DensityFamily, family_from_dict
from .errors import (
    CensoringWarning,
    ConfigError,
    DegenerateError,
    DomainError,
    InversionError,
    NumericalError,
    OptimError,
    QuadratureError,
    RangeError,
    ResetFptError,
    SingularityError,
    SolverError,
)
from .forward import ForwardRequest, fpt_lt_case1, fpt_lt_case2
from .inverse import FptLawSpec, InverseProblem, SearchSpace, solve_ifpp, solve_ifpt, \
    solve_imfet, solve_imfpt
from .simulate import SimConfig, estimate_lt, simulate_exit, simulate_fpt

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_DOMAIN = 2
EXIT_SOLVER = 3
EXIT_CENSORING = 4

_DOMAIN_ERRORS = (DomainError, ConfigError, SingularityError,
                  jsonschema.ValidationError, json.JSONDecodeError,
                  FileNotFoundError, KeyError, ValueError)
_SOLVER_ERRORS = (SolverError, QuadratureError, OptimError, NumericalError,
                  InversionError, DegenerateError)


def _schema(name):
    with resources.files("resetfpt.schemas").joinpath(name).open("r") as fh:
        return json.load(fh)


def load_scenario(path):
    """Parse and validate a scenario file; returns the scenario dict."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    jsonschema.validate(doc, _schema("scenario.schema.json"))
    fam_schema = _schema("density_family.schema.json")
    for fam in _family_dicts(doc):
        jsonschema.validate(fam, fam_schema)
    return doc


def _family_dicts(doc):
    body = doc.get(doc["type"], {})
    for key in ("family", "start", "x_r"):
        val = body.get(key)
        if isinstance(val, dict):
            yield val
    target = body.get("target")
    if isinstance(target, dict) and isinstance(target.get("lt_of"), dict):
        yield target["lt_of"]
    search = body.get("search")
    if isinstance(search, dict):
        for cand in search.get("candidates", []):
            yield cand


def _model_from_dict(d):
    kind = d["kind"]
    if kind == "bm":
        return BrownianDrift(d.get("mu", 0.0))
    if kind == "ou":
        return OrnsteinUhlenbeck(d["nu"], d.get("noise", 1.0))
    if kind == "gbm":
        return GeometricBM(d["theta"], d.get("noise", 1.0))
    if kind == "feller":
        return Feller()
    if kind == "wright_fisher":
        return WrightFisher()
    raise DomainError(f"unknown model kind {kind!r}")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _write_json(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _emit(payload, out, form, csv_shape):
    if form == "csv":
        header, rows = csv_shape(payload)
        _write_csv(out, header, rows)
    else:
        _write_json(out, payload)


def _error_json(exc):
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
          file=sys.stderr)


# ---------------------------------------------------------------------------
# forward
# ---------------------------------------------------------------------------

def _forward_request(body):
    return ForwardRequest(
        target=body["target"],
        case=body["case"],
        family=family_from_dict(body["family"]),
        mu=body.get("mu", 0.0),
        r=body["r"],
        b=body.get("b"),
        x=body.get("x"),
        x_r=body.get("x_r"),
        lambda_grid=tuple(body.get("lambda_grid", ())),
    )


def cmd_forward(args):
    doc = load_scenario(args.scenario)
    if doc["type"] != "forward":
        raise DomainError(f"scenario {doc['name']!r} is not a forward scenario")
    body = doc["forward"]
    if "x_r_grid" in body:
        # one evaluation per reset position, emitted as a sweep table
        rows = []
        for xr in body["x_r_grid"]:
            sub = {k: v for k, v in body.items() if k != "x_r_grid"}
            sub["x_r"] = xr
            rows.append((xr, _forward_request(sub).run()["value"]))
        payload = {"schema_version": 1, "name": doc["name"],
                   "target": body["target"], "case": body["case"],
                   "sweep": [{"x_r": xr, "value": v} for xr, v in rows]}
        _emit(payload, args.out, args.format,
              lambda p: (["x_r", "value"],
                         [[e["x_r"], e["value"]] for e in p["sweep"]]))
        return EXIT_OK
    req = _forward_request(body)
    result = req.run()
    payload = {"schema_version": 1, "name": doc["name"], "target": req.target,
               "case": req.case, **result}

    def shape(p):
        if "lambda" in p:
            return (["lambda", "value"], list(zip(p["lambda"], p["value"])))
        return (["name", "target", "case", "value", "route"],
                [[p["name"], p["target"], p["case"], p["value"], p["route"]]])

    _emit(payload, args.out, args.format, shape)
    return EXIT_OK


# ---------------------------------------------------------------------------
# inverse
# ---------------------------------------------------------------------------

def _search_space(d):
    if "candidates" in d:
        return SearchSpace(candidates=[family_from_dict(c) for c in d["candidates"]])
    bounds = {k: tuple(v) for k, v in d.get("bounds", {}).items()}
    return SearchSpace(kind=d.get("kind"), bounds=bounds, fixed=d.get("fixed", {}))


def _inverse_problem(body, seed_override=None):
    target_d = body["target"]
    kind = body["kind"]
    if "q" in target_d:
        target = target_d["q"]
    elif "m" in target_d:
        target = target_d["m"]
    else:
        fam = family_from_dict(target_d["lt_of"])
        mu, r = body.get("mu", 0.0), body["r"]
        if body["case"] == "initial":
            x_r = body["x_r"]
            target = FptLawSpec(transform=lambda lam: fpt_lt_case1(lam, fam, mu, r, x_r))
        else:
            x = body["x"]
            target = FptLawSpec(transform=lambda lam: fpt_lt_case2(lam, fam, x, mu, r))
    seed = seed_override if seed_override is not None else body.get("seed", 0)
    return InverseProblem(
        kind=kind, case=body["case"], target=target, search=_search_space(body["search"]),
        mu=body.get("mu", 0.0), r=body["r"], b=body.get("b"),
        x=body.get("x"), x_r=body.get("x_r"), seed=seed,
    )


_SOLVERS = {"ifpp": solve_ifpp, "ifpt": solve_ifpt, "imfpt": solve_imfpt,
            "imfet": solve_imfet}


def cmd_inverse(args):
    doc = load_scenario(args.scenario)
    if doc["type"] != "inverse":
        raise DomainError(f"scenario {doc['name']!r} is not an inverse scenario")
    body = doc["inverse"]
    problem = _inverse_problem(body, args.seed)
    try:
        sol = _SOLVERS[body["kind"]](problem)
        status = sol.status
        family_dict = sol.family.to_dict() if sol.family is not None else None
        payload = {
            "schema_version": 1,
            "name": doc["name"],
            "kind": body["kind"],
            "case": body["case"],
            "status": status,
            "family": family_dict,
            "params": sol.params,
            "residual": sol.residual,
            "objective": sol.objective,
            "diagnostics": {k: v for k, v in sol.diagnostics.items()},
            "replay": _replay(problem, sol),
        }
    except RangeError as exc:
        payload = {
            "schema_version": 1,
            "name": doc["name"],
            "kind": body["kind"],
            "case": body["case"],
            "status": "no-solution-in-class",
            "family": None,
            "params": {},
            "residual": None,
            "objective": "mean_residual",
            "diagnostics": {"attainable": list(exc.attainable or ())},
            "replay": None,
        }

    def shape(p):
        return (["name", "kind", "case", "status", "residual", "params"],
                [[p["name"], p["kind"], p["case"], p["status"],
                  p["residual"] if p["residual"] is not None else "",
                  ";".join(f"{k}={_fmt(v)}" for k, v in p["params"].items())]])

    _emit(payload, args.out, args.format, shape)
    return EXIT_OK


def _replay(problem, sol):
    """Recompute the forward value from the fitted family."""
    if sol.family is None or sol.status != "ok":
        return None
    from .inverse import _exit_forward, _mean_forward
    try:
        if problem.kind == "ifpp":
            return {"q": float(_exit_forward(problem)(sol.family))}
        if problem.kind in ("imfpt", "imfet"):
            return {"m": float(_mean_forward(problem)(sol.family))}
        lam = [0.1, 1.0, 10.0]
        if problem.case == "initial":
            vals = [float(np.real(complex(fpt_lt_case1(l, sol.family, problem.mu,
                                                       problem.r, problem.x_r))))
                    for l in lam]
        else:
            vals = [float(np.real(complex(fpt_lt_case2(l, sol.family, problem.x,
                                                       problem.mu, problem.r))))
                    for l in lam]
        return {"lambda": lam, "lt": vals}
    except ResetFptError:
        return None


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _position_or_family(v):
    if isinstance(v, dict):
        return family_from_dict(v)
    return float(v)


def run_simulate_scenario(body, seed=None, paths=None, dt=None):
    """Execute a simulate scenario body; returns (payload, samples, warnings)."""
    model = _model_from_dict(body["model"])
    start = _position_or_family(body["start"])
    reset = ResetSpec(body["r"], _position_or_family(body.get("x_r", 0.0))
                      if body.get("r", 0) > 0 else 0.0)
    cfg = SimConfig(
        n_paths=paths if paths is not None else body["n_paths"],
        dt=dt if dt is not None else body["dt"],
        seed=seed if seed is not None else body["seed"],
        t_max=body.get("t_max"),
        antithetic=body.get("antithetic", False),
    )
    caught = []
    samples = None
    with warnings.catch_warnings(record=True) as wlist:
        warnings.simplefilter("always", CensoringWarning)
        if body["mode"] == "fpt":
            samples, mean_est = simulate_fpt(model, start, reset, cfg,
                                             barrier=body.get("barrier", 0.0))
            payload = {"mode": "fpt", "mean": mean_est.to_dict()}
            if body.get("lambda_grid"):
                lt = {}
                for lam in body["lambda_grid"]:
                    est, bias = estimate_lt(samples, lam)
                    lt[_fmt(float(lam))] = {**est.to_dict(), "censored_bias_bound": bias}
                payload["lt"] = lt
            if body.get("samples_out"):
                out = body["samples_out"]
                if out.endswith(".csv"):
                    samples.to_csv(out)
                else:
                    samples.to_binary(out)
                payload["samples_out"] = out
        else:
            lo, hi = body["interval"]
            pi0_est, fet_est = simulate_exit(model, start, reset, Interval(lo, hi), cfg)
            payload = {"mode": "exit", "pi0": pi0_est.to_dict(), "mean_fet": fet_est.to_dict()}
        caught = [w for w in wlist if issubclass(w.category, CensoringWarning)]
    return payload, samples, caught


def cmd_simulate(args):
    doc = load_scenario(args.scenario)
    if doc["type"] != "simulate":
        raise DomainError(f"scenario {doc['name']!r} is not a simulate scenario")
    payload, _, caught = run_simulate_scenario(
        doc["simulate"], seed=args.seed, paths=args.paths, dt=args.dt)
    payload = {"schema_version": 1, "name": doc["name"], **payload}

    def shape(p):
        rows = []
        for key in ("pi0", "mean_fet", "mean"):
            if key in p:
                e = p[key]
                rows.append([key, e["value"], e["std_error"], e["n"],
                             e["censored_fraction"]])
        return (["estimate", "value", "std_error", "n", "censored_fraction"], rows)

    _emit(payload, args.out, args.format, shape)
    if caught and args.strict:
        _error_json(ConfigError(str(caught[0].message)))
        return EXIT_CENSORING
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify and report
# ---------------------------------------------------------------------------

def _verify_rows(pattern):
    rows = run_cases(pattern)
    if not rows:
        raise DomainError(f"no regression case matches {pattern!r}")
    return rows


def cmd_verify(args):
    rows = _verify_rows(args.pattern)
    header = ["case", "check", "expected", "computed", "tol", "status"]
    table = [[r.case, r.check, r.expected, r.computed, r.tol,
              "pass" if r.passed else "FAIL"] for r in rows]
    widths = [max(len(_fmt(row[i])) for row in [header] + table) for i in range(6)]
    for row in [header] + table:
        print("  ".join(_fmt(v).ljust(w) for v, w in zip(row, widths)))
    n_fail = sum(not r.passed for r in rows)
    print(f"\n{len(rows)} checks, {len(rows) - n_fail} passed, {n_fail} failed")
    if args.out:
        if args.format == "json":
            _write_json(args.out, [r.as_dict() for r in rows])
        else:
            _write_csv(args.out, header, table)
    return EXIT_OK if n_fail == 0 else EXIT_VERIFY_FAIL


def cmd_report(args):
    from . import report
    if args.scenario:
        doc = load_scenario(args.scenario)
        paths = report.render_scenario(doc, args.out, seed=args.seed)
    else:
        rows = _verify_rows(args.pattern)
        paths = report.render_verify(rows, args.out)
        if any(not r.passed for r in rows):
            for p in paths:
                print(p)
            return EXIT_VERIFY_FAIL
    for p in paths:
        print(p)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(
        prog="resetfpt",
        description="Passage functionals and inverse problems for diffusions "
                    "with Poissonian resetting.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", default=None, help="output file (stdout when omitted)")
        p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("forward", help="evaluate a forward functional")
    common(p)
    p.set_defaults(fn=cmd_forward)

    p = sub.add_parser("inverse", help="solve an inverse problem")
    common(p)
    p.add_argument("--seed", type=int, default=None, help="optimizer restart seed")
    p.set_defaults(fn=cmd_inverse)

    p = sub.add_parser("simulate", help="Monte Carlo estimation")
    common(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--paths", type=int, default=None, help="override path count")
    p.add_argument("--dt", type=float, default=None, help="override time step")
    p.add_argument("--strict", action="store_true",
                   help="treat censoring warnings as errors (exit 4)")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("verify", help="replay the regression cases")
    p.add_argument("pattern", nargs="?", default=None,
                   help="only cases whose id contains this substring")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("report", help="run a scenario or the regression suite "
                                      "and render figures next to the tables")
    p.add_argument("--scenario", default=None)
    p.add_argument("pattern", nargs="?", default=None,
                   help="regression-case filter when no scenario is given")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_report)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _SOLVER_ERRORS as exc:
        _error_json(exc)
        return EXIT_SOLVER
    except _DOMAIN_ERRORS as exc:
        _error_json(exc)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
