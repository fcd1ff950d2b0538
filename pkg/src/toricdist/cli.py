"""Command-line surface: load a polytope and weights, run one analysis,
emit CSV/JSON tables.

Conventions (also printed as a leading ``#`` line in every CSV):

* volumes are Euclidean volumes of the moment polytope (vol M = vol P);
* ``power`` curves plot F(t) = (N/2pi)^{d/2} D((N/2pi)^{d/2} t) against t,
  with the t-grid given as fractions of the peak constant c;
* ``exponential`` curves plot D(e^{-Nt}) against t (absolute);
* ``none`` curves plot the raw D(t) against t (absolute).

Exit codes: 0 success, 1 validation failure, 2 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import chart_geometry as cg
from . import distribution as dist
from . import norms as nm
from . import orbit_geometry as og
from . import projective as pj
from .backend import BACKEND
from .errors import NoConvergence, ToricDistError
from .polytope import parse_polytope, validate_delzant
from .quadrature import QuadratureSpec, laplace_integral

log = logging.getLogger("toricdist")

_CSV_NOTE = ("# toricdist output; volumes are Euclidean moment-polytope "
             "volumes; see --help for t-grid conventions")


def _parse_vec(text, cast=float):
    return [cast(v) for v in text.split(",") if v.strip() != ""]


def _parse_tgrid(text):
    kind, _, rest = text.partition(":")
    lo, hi, n = rest.split(",")
    lo, hi, n = float(lo), float(hi), int(n)
    if kind == "geom":
        return np.geomspace(lo, hi, n)
    if kind == "lin":
        return np.linspace(lo, hi, n)
    raise ValueError(f"unknown t-grid kind {kind!r}; use geom:lo,hi,n or lin:lo,hi,n")


def _load_weights(spec_text, P):
    if spec_text == "unit":
        return og.WeightSet.unit(P), {"mode": "unit"}
    if spec_text.startswith("binomial:"):
        p = int(spec_text.split(":", 1)[1])
        w = og.WeightSet(P.lattice_points.copy(),
                         np.array([pj.log_multinomial(p, a)
                                   for a in P.lattice_points]))
        return w, {"mode": "binomial", "p": p}
    if spec_text.startswith("file:"):
        with open(spec_text.split(":", 1)[1]) as fh:
            data = json.load(fh)
        mapping = {tuple(int(x) for x in e["point"]): float(e["value"])
                   for e in data["weights"]}
        w = og.WeightSet.from_dict(mapping)
        w.log_for_points(P.lattice_points)  # every lattice point must be covered
        return w, {"mode": "file"}
    raise ValueError("weights must be unit, binomial:p, or file:PATH")


def _emit(out_path, text):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows):
    buf = io.StringIO()
    buf.write(_CSV_NOTE + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_validate(P, w, args):
    report = validate_delzant(P, strict=False)
    payload = {
        "delzant": report.ok,
        "vertices": [
            {"vertex": list(e["vertex"]), "det": e["det"], "ok": e["ok"],
             "edge_basis": [list(v) for v in e["edge_basis"]]}
            for e in report.entries
        ],
    }
    _emit(args.out, json.dumps(payload, indent=2) + "\n")
    return 0 if report.ok else 1


def _target(P, args):
    if args.alpha is not None:
        return np.array(_parse_vec(args.alpha, int)), True
    if args.x is not None:
        return np.array(_parse_vec(args.x, float)), False
    raise ValueError("provide --alpha (lattice point) or --x (interior point)")


def cmd_peak(P, w, args):
    target, is_lattice = _target(P, args)
    if not is_lattice or np.min(P.slacks(target)) > 0:
        peak = og.peak_data(P, w, target.astype(float))
        payload = {
            "kind": "interior",
            "x": list(map(float, target)),
            "rho": peak.rho.tolist(),
            "A": peak.A.tolist(),
            "det_A": peak.det_A,
            "c": peak.c,
            "f_peak": peak.f_peak,
        }
    else:
        ctx = nm.monomial_context(P, w, target, 1)
        cp = ctx.cpeak
        payload = {
            "kind": "vertex" if ctx.r == P.dim else "face",
            "alpha": [int(v) for v in target],
            "codim": ctx.r,
            "d": ctx.d,
            "alpha_tilde": cp.alpha_tilde.tolist(),
            "rho_F": cp.rho_F.tolist(),
            "A_F": cp.A_F.tolist(),
            "det_A_F": cp.det_A_F,
            "f_k": cp.f_k.tolist(),
            "det_Hs": cp.det_Hs,
            "L0": cp.L0,
            "c": cp.c,
        }
    _emit(args.out, json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_norms(P, w, args):
    target, _ = _target(P, args)
    Ns = _parse_vec(args.N or "8,16,32", int)
    ks = _parse_vec(args.k or "1,2,3", int)
    rows = []
    for N in Ns:
        gamma = _gamma_for(P, target, N)
        ctx = nm.monomial_context(P, w, gamma, N, rel_tol=args.tol or 1e-9)
        for k in ks:
            rep = nm.l2k_norm(P, w, gamma, N, k, ctx=ctx)
            rows.append([N, k, f"{rep.exact:.12e}", f"{rep.asymptotic:.12e}",
                         f"{rep.ratio:.12f}", rep.provenance_exact,
                         rep.provenance_asymptotic])
    _emit(args.out, _csv_text(
        ["N", "k", "exact_l2k_power", "asymptotic_l2k_power", "ratio",
         "provenance_exact", "provenance_asymptotic"], rows))
    return 0


def _gamma_for(P, target, N):
    """Weight in N*P: N*alpha for lattice targets, round(N*x) for interior x."""
    if np.allclose(target, np.rint(target)) and P.contains(target):
        return (N * np.asarray(target, dtype=np.int64))
    gamma = np.rint(N * np.asarray(target, dtype=float)).astype(np.int64)
    return gamma


def cmd_pointwise(P, w, args):
    target, _ = _target(P, args)
    N = _parse_vec(args.N or "32", int)[0]
    gamma = _gamma_for(P, target, N)
    ctx = nm.monomial_context(P, w, gamma, N, rel_tol=args.tol or 1e-9)
    n_side = 41
    rows = []
    if ctx.r == 0:
        peak = ctx.peak
        axes = [np.linspace(peak.rho[d] - 2.0, peak.rho[d] + 2.0, n_side)
                for d in range(P.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.column_stack([mm.ravel() for mm in mesh])
        exact = np.exp(ctx.log_eigen_sq_orbit(pts))
        pred = nm.pointwise_asymptotic(P, w, peak, N, pts)
        coords = [f"rho_{d + 1}" for d in range(P.dim)]
    else:
        cp = ctx.cpeak
        r, mr = cp.r, len(cp.rho_F)
        t_axes = [np.linspace(0.0, 2.0 / math.sqrt(N), n_side) for _ in range(r)]
        r_axes = [np.linspace(cp.rho_F[d] - 2.0, cp.rho_F[d] + 2.0, n_side)
                  for d in range(mr)]
        mesh = np.meshgrid(*(t_axes + r_axes), indexing="ij")
        pts = np.column_stack([mm.ravel() for mm in mesh])
        exact = np.exp(ctx.log_eigen_sq_chart(pts[:, :r], pts[:, r:]))
        if ctx.r == P.dim:
            logK = cg.chart_log_K(ctx.chart, ctx.log_a, pts[:, :r], pts[:, r:])
            pred = nm.pointwise_asymptotic_vertex(cp, N, logK)
        else:
            s = cg.s_value(ctx.chart, ctx.log_a, cp.alpha_tilde,
                              pts[:, :r], pts[:, r:])
            pred = nm.pointwise_asymptotic_boundary(cp, N, np.asarray(s) - cp.s_peak)
        coords = [f"t_{j + 1}" for j in range(r)] + \
                 [f"rho_{d + 1}" for d in range(mr)]
    for i in range(len(pts)):
        ratio = exact[i] / pred[i] if pred[i] > 0 else math.nan
        rows.append([*(f"{v:.8f}" for v in pts[i]),
                     f"{exact[i]:.10e}", f"{pred[i]:.10e}", f"{ratio:.10f}"])
    _emit(args.out, _csv_text([*coords, "exact_sq", "prediction_sq", "ratio"], rows))
    return 0


def cmd_dist(P, w, args):
    target, _ = _target(P, args)
    Ns = _parse_vec(args.N or "64", int)
    rel_tol = args.tol or 1e-3
    workers = max(1, args.workers)
    rows = []
    for N in Ns:
        gamma = _gamma_for(P, target, N)
        ctx = nm.monomial_context(P, w, gamma, N)
        c = ctx.peak_constant()
        d = ctx.d
        power_grid = (c * _parse_tgrid(args.tgrid) if args.tgrid
                      else dist.default_tgrid(c, 40))
        exp_grid = np.linspace(0.05, 0.8, 10)
        none_grid = np.array([0.5, 1.0, 2.0])
        jobs = []
        for t in power_grid:
            jobs.append(("power", float(t)))
        for t in exp_grid:
            jobs.append(("exponential", float(t)))
        for t in none_grid:
            jobs.append(("none", float(t)))

        def run(job):
            kind, t = job
            if kind == "power":
                val = dist.rescaled_distribution(P, w, gamma, N, t,
                                                 rel_tol=rel_tol, ctx=ctx)
                lim = float(dist.rescaled_limit(c, d, t))
            elif kind == "exponential":
                val = dist.distribution_exact(P, w, gamma, N, math.exp(-N * t),
                                              rel_tol=rel_tol, ctx=ctx)
                lim = dist.exp_rescaled_limit(P, w, gamma / N, t,
                                              rel_tol=max(rel_tol, 1e-6))
            else:
                val = dist.distribution_exact(P, w, gamma, N, t,
                                              rel_tol=rel_tol, ctx=ctx)
                lim = float(dist.unrescaled_asymptotic(c, d, N))
            return kind, t, val, lim

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(run, jobs))
        else:
            results = [run(j) for j in jobs]
        for kind, t, val, lim in results:
            rows.append([kind, N, f"{t:.10e}", f"{val:.10e}", f"{lim:.10e}"])
    _emit(args.out, _csv_text(["scaling", "N", "t", "value", "limit_value"], rows))
    return 0


# ---------------------------------------------------------------------------
# report: per-configuration check battery
# ---------------------------------------------------------------------------

def _check(name, fn):
    try:
        ok, detail = fn()
    except NoConvergence as exc:
        raise
    except ToricDistError as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return {"name": name, "pass": bool(ok), "detail": detail}


def cmd_report(P, w, args, w_meta):
    rng = np.random.default_rng(20240817)
    m = P.dim
    checks = []

    def delzant():
        rep = validate_delzant(P, strict=False)
        return rep.ok, f"{len(rep.entries)} vertices checked"

    checks.append(_check("delzant_valid", delzant))

    def grad_hess_fd():
        pts = rng.uniform(-4, 4, size=(25, m))
        h = 1e-5
        worst = 0.0
        for rho in pts:
            mu = og.moment_map(P, w, rho)
            A = og.hessian_A(P, w, rho)
            for d in range(m):
                e = np.zeros(m)
                e[d] = h
                gp = og.character_k(P, w, rho + e)
                gm = og.character_k(P, w, rho - e)
                worst = max(worst, abs((gp - gm) / (2 * h) - mu[d]))
                mup = og.moment_map(P, w, rho + e)
                mum = og.moment_map(P, w, rho - e)
                worst = max(worst, float(np.max(np.abs((mup - mum) / (2 * h) - A[:, d]))))
        return worst <= 1e-6, f"max finite-difference deviation {worst:.2e}"

    checks.append(_check("gradient_hessian_consistency", grad_hess_fd))

    def cholesky():
        pts = rng.uniform(-6, 6, size=(200, m))
        A = og.hessian_A(P, w, pts)
        np.linalg.cholesky(A)
        return True, "200 random Hessians are positive definite"

    checks.append(_check("hessian_positive_definite", cholesky))

    def pushforward():
        spec = QuadratureSpec(center=np.zeros(m), half_widths=np.full(m, 35.0),
                              base_points_per_dim=48, refinement_limit=4,
                              rel_tol=1e-7,
                              breaks=tuple((-9.0, -3.0, 3.0, 9.0) for _ in range(m)))
        B = P.lattice_points.astype(float)
        lw = w.log_for_points(P.lattice_points)
        from .backend import kernels

        def log_det(pts):
            _, _, hess = kernels.orbit_hessian(pts, B, lw)
            return np.log(np.maximum(np.linalg.det(hess), 1e-300))

        res = laplace_integral(log_det, spec)
        vol = P.volume()
        rel = abs(math.exp(res.value) - vol) / vol
        return rel <= 1e-4, f"integral {math.exp(res.value):.8f} vs vol {vol:.8f}"

    checks.append(_check("pushforward_volume", pushforward))

    interior = [a for a in P.lattice_points if np.min(P.slacks(a)) > 0]

    if w_meta.get("mode") == "binomial" and len(P.vertices) == m + 1:
        p = w_meta["p"]

        def gamma_oracle():
            worst = 0.0
            for alpha in P.lattice_points[:: max(1, len(P.lattice_points) // 6)]:
                for N in (1, 3):
                    got = nm.log_norm_sq_exact(P, w, N * alpha, N, rel_tol=1e-10)
                    want = pj.log_norm_sq_closed(p, m, N, N * alpha)
                    worst = max(worst, abs(got - want))
            return worst <= 1e-8, f"max |dlog| {worst:.2e}"

        checks.append(_check("gamma_oracle", gamma_oracle))

        def deta():
            worst = 0.0
            for alpha in interior:
                rho = og.invert_moment_map(P, w, alpha.astype(float))
                got = float(np.linalg.det(og.hessian_A(P, w, rho)))
                worst = max(worst, abs(got - pj.detA_closed_form(p, alpha)))
            return worst <= 1e-10, f"max |det A - closed form| {worst:.2e}"

        if interior:
            checks.append(_check("detA_closed_form", deta))

    if interior:
        def chart_orbit():
            alpha = interior[0]
            N = 4
            v0 = max(map(tuple, P.vertices.tolist()))  # nontrivial chart map
            a = nm.log_norm_sq_exact(P, w, N * alpha, N, rel_tol=1e-10)
            b = nm.log_norm_sq_exact(P, w, N * alpha, N, rel_tol=1e-10,
                                     force_chart=True, v0=v0)
            return abs(a - b) <= 1e-7, f"|dlog| {abs(a - b):.2e}"

        checks.append(_check("chart_orbit_agreement", chart_orbit))

        def normalization():
            alpha = interior[0]
            val, _, _ = nm.localization_integral(P, w, 4 * alpha, 4,
                                                 lambda mu: np.ones(len(mu)))
            return abs(val - 1.0) <= 1e-8, f"integral of |phi|^2 = {val:.12f}"

        checks.append(_check("normalization", normalization))

    v0 = P.vertices[0]
    if abs(float(w.log_for_points([v0])[0])) < 1e-12:
        def vertex_law():
            N = 64
            val, _, pred = nm.sup_norm(P, w, N * v0, N)
            ratio = val / pred
            return abs(ratio - 1.0) <= 4.0 / N, f"peak/prediction = {ratio:.6f} at N={N}"

        checks.append(_check("vertex_law", vertex_law))

    payload = {
        "backend": BACKEND,
        "polytope": {"dim": m, "facets": P.n_facets,
                     "lattice_points": len(P.lattice_points)},
        "weights": w_meta,
        "checks": checks,
        "all_pass": all(c["pass"] for c in checks),
    }
    _emit(args.out, json.dumps(payload, indent=2) + "\n")
    return 0 if payload["all_pass"] else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(
        prog="toricdist",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("--polytope", required=True, help="polytope JSON file")
    ap.add_argument("--weights", default="unit",
                    help="unit | binomial:p | file:PATH (default unit)")
    ap.add_argument("--cmd", required=True,
                    choices=["validate", "peak", "norms", "pointwise", "dist",
                             "report"])
    ap.add_argument("--N", help="comma-separated dilation levels, e.g. 32,64")
    ap.add_argument("--alpha", help="lattice point, e.g. 2,3")
    ap.add_argument("--x", help="interior point, e.g. 0.5,0.5")
    ap.add_argument("--k", help="comma-separated norm powers, e.g. 1,2,3")
    ap.add_argument("--tgrid", help="t grid: geom:lo,hi,n or lin:lo,hi,n "
                                    "(fractions of c for power curves)")
    ap.add_argument("--tol", type=float, help="relative tolerance override")
    ap.add_argument("--out", help="output path (default stdout)")
    ap.add_argument("--workers", type=int, default=1,
                    help="parallel workers for grid jobs")
    return ap


def main(argv=None) -> int:
    level = os.environ.get("TORICDIST_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        P = parse_polytope(args.polytope)
        w, w_meta = _load_weights(args.weights, P)
        if args.cmd == "validate":
            return cmd_validate(P, w, args)
        if args.cmd == "peak":
            return cmd_peak(P, w, args)
        if args.cmd == "norms":
            return cmd_norms(P, w, args)
        if args.cmd == "pointwise":
            return cmd_pointwise(P, w, args)
        if args.cmd == "dist":
            return cmd_dist(P, w, args)
        if args.cmd == "report":
            return cmd_report(P, w, args, w_meta)
        raise ValueError(f"unknown command {args.cmd}")
    except NoConvergence as exc:
        log.error("numerical non-convergence: %s", exc)
        return 2
    except (ToricDistError, ValueError, OSError, KeyError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
