"""Figure rendering for the report path.

Each renderer writes the delimited result next to one or more PNG figures in
the requested directory and returns the list of files written. Matplotlib
runs with the Agg backend so reports work headless.
"""

import json
import math
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .analytic import mean_fet_bm, mean_fpt_bm, pi0_bm

_FIG_KW = {"dpi": 150, "bbox_inches": "tight"}


def _ensure_dir(outdir):
    os.makedirs(outdir, exist_ok=True)
    return outdir


def _density_curve(ax, fam, label):
    lo, hi = fam.support
    if fam.is_discrete:
        xs, ps = fam.atoms()
        ax.stem(xs, ps, basefmt=" ", label=label)
    else:
        hi = min(hi, fam.quantile(1.0 - 1e-6)) if math.isinf(hi) else hi
        xs = np.linspace(lo + 1e-9 * max(1.0, hi - lo), hi - 1e-9 * max(1.0, hi - lo), 400)
        ax.plot(xs, [fam.pdf(x) for x in xs], label=label)
    ax.set_xlabel("position")
    ax.set_ylabel("density")


def render_verify(rows, outdir):
    """Error-versus-tolerance chart plus the CSV report."""
    _ensure_dir(outdir)
    csv_path = os.path.join(outdir, "verify_report.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("case,check,expected,computed,tol,passed\n")
        for r in rows:
            fh.write(f"{r.case},{r.check},{r.expected:.17g},{r.computed:.17g},"
                     f"{r.tol:.17g},{int(r.passed)}\n")
    labels = [f"{r.case}: {r.check}" for r in rows]
    ratios = [max(abs(r.computed - r.expected) / r.tol, 1e-18) for r in rows]
    colors = ["tab:blue" if r.passed else "tab:red" for r in rows]
    fig, ax = plt.subplots(figsize=(8, 0.22 * len(rows) + 1.5))
    ax.barh(range(len(rows)), ratios, color=colors)
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(labels, fontsize=5)
    ax.axvline(1.0, color="k", lw=0.8, ls="--")
    ax.set_xscale("log")
    ax.set_xlabel("|computed - expected| / tolerance")
    ax.invert_yaxis()
    fig_path = os.path.join(outdir, "verify_report.png")
    fig.savefig(fig_path, **_FIG_KW)
    plt.close(fig)
    return [csv_path, fig_path]


def render_scenario(doc, outdir, seed=None):
    _ensure_dir(outdir)
    kind = doc["type"]
    if kind == "forward":
        return _render_forward(doc, outdir)
    if kind == "inverse":
        return _render_inverse(doc, outdir, seed)
    return _render_simulate(doc, outdir, seed)


def _render_forward(doc, outdir):
    from .cli import _forward_request
    body = doc["forward"]
    req = _forward_request(body)
    result = req.run()
    name = doc["name"]
    json_path = os.path.join(outdir, f"{name}_forward.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump({"name": name, **result}, fh, indent=2, sort_keys=True)

    fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
    _density_curve(axes[0], req.family, req.family.kind)
    axes[0].set_title("mixing density")
    if "lambda" in result:
        axes[1].semilogx(result["lambda"], result["value"], marker="o", ms=3)
        axes[1].set_xlabel("transform argument")
        axes[1].set_ylabel("transform value")
        axes[1].set_title("passage-time transform")
    else:
        lo = 0.0
        hi = req.b if req.b is not None else 3.0 * max(1.0, req.x_r or 1.0)
        xs = np.linspace(lo, hi, 300)
        if req.target == "exit_prob_q" and req.case == "initial":
            ys = [pi0_bm(x, req.mu, req.r, req.x_r, req.b) for x in xs]
            lab = "exit probability profile"
        elif req.target == "mean_fet" and req.case == "initial":
            ys = [mean_fet_bm(x, req.mu, req.r, req.x_r, req.b) for x in xs]
            lab = "mean exit time profile"
        elif req.case == "initial":
            ys = [mean_fpt_bm(x, req.mu, req.r, req.x_r) for x in xs]
            lab = "mean passage time profile"
        else:
            xs = np.linspace(1e-3, hi, 300)
            ys = [pi0_bm(req.x, req.mu, req.r, u, req.b)
                  if req.target == "exit_prob_q"
                  else mean_fpt_bm(req.x, req.mu, req.r, u) for u in xs]
            lab = "kernel vs reset position"
        axes[1].plot(xs, ys)
        axes[1].axhline(result["value"], color="tab:red", lw=0.8, ls="--",
                        label=f"mixture = {result['value']:.6g}")
        axes[1].legend(fontsize=7)
        axes[1].set_title(lab)
        axes[1].set_xlabel("position")
    fig_path = os.path.join(outdir, f"{name}_forward.png")
    fig.savefig(fig_path, **_FIG_KW)
    plt.close(fig)
    return [json_path, fig_path]


def _render_inverse(doc, outdir, seed):
    from .cli import _SOLVERS, _inverse_problem
    body = doc["inverse"]
    problem = _inverse_problem(body, seed)
    sol = _SOLVERS[body["kind"]](problem)
    name = doc["name"]
    json_path = os.path.join(outdir, f"{name}_solution.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump({
            "name": name, "status": sol.status, "params": sol.params,
            "residual": sol.residual,
            "family": sol.family.to_dict() if sol.family else None,
        }, fh, indent=2, sort_keys=True)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    if sol.family is not None:
        _density_curve(ax, sol.family, f"fitted {sol.family.kind}")
    ax.set_title(f"status: {sol.status}, residual {sol.residual:.3e}")
    ax.legend(fontsize=7)
    fig_path = os.path.join(outdir, f"{name}_solution.png")
    fig.savefig(fig_path, **_FIG_KW)
    plt.close(fig)
    return [json_path, fig_path]


def _render_simulate(doc, outdir, seed):
    from .cli import run_simulate_scenario
    body = doc["simulate"]
    payload, samples, _ = run_simulate_scenario(body, seed=seed)
    name = doc["name"]
    json_path = os.path.join(outdir, f"{name}_estimates.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump({"name": name, **payload}, fh, indent=2, sort_keys=True)
    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    if samples is not None:
        ok = samples.uncensored()
        ax.hist(ok, bins=120, density=True, alpha=0.75)
        m = payload["mean"]["value"]
        ax.axvline(m, color="tab:red", ls="--", lw=1.0,
                   label=f"mean {m:.4g} +/- {payload['mean']['std_error']:.2g}")
        ax.set_xlabel("passage time")
        ax.set_ylabel("density")
        ax.legend(fontsize=8)
    else:
        keys = [k for k in ("pi0", "mean_fet") if k in payload]
        vals = [payload[k]["value"] for k in keys]
        errs = [3.0 * payload[k]["std_error"] for k in keys]
        ax.bar(keys, vals, yerr=errs, capsize=4)
        ax.set_ylabel("estimate (3 SE bars)")
    ax.set_title(name)
    fig_path = os.path.join(outdir, f"{name}_estimates.png")
    fig.savefig(fig_path, **_FIG_KW)
    plt.close(fig)
    return [json_path, fig_path]
