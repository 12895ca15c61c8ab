"""Command-line surface: generate synthetic unions, cluster generated or
ingested data, run phase-transition experiments, and report geometric
certificates.

All commands are deterministic given their flags; stochastic commands
require an explicit seed.  Diagnostics go to stderr; exit code 0 means
the command completed and wrote valid output.
"""

from __future__ import annotations

import argparse
import sys
from types import SimpleNamespace

import numpy as np

from . import __version__, clustering, experiments, geometry, io, numerics, selection, synth


def _parse_grid(text, name):
    """Parse an axis flag: either comma-separated values or start:stop:step
    (inclusive of the endpoint up to rounding)."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(tok) for tok in text.split(":"))
            if step <= 0:
                raise ValueError
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            values = [start + i * step for i in range(count)]
        else:
            values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise SystemExit(f"error: cannot parse {name} grid {text!r}") from None
    if not values:
        raise SystemExit(f"error: empty {name} grid")
    return tuple(round(v, 12) for v in values)


def _parse_spectrum(text):
    if text in ("orthoblock", "lorentzian", "exponential"):
        return text
    return tuple(float(tok) for tok in text.split(","))


def _meta_common(args, pairs):
    out = [("command", args.command), ("version", __version__)]
    out.extend(pairs)
    return out


def cmd_generate(args):
    spectrum = _parse_spectrum(args.spectrum)
    spec = synth.UnionSpec(k=args.k, q=args.q, d=args.d, model=args.model,
                           tau=args.tau, spectrum=spectrum, seed=args.seed,
                           n=args.n)
    ensemble = synth.generate_union(spec)
    prefix = args.out
    io.write_matrix(f"{prefix}_data.csv", ensemble.points)
    io.write_labels(f"{prefix}_labels.csv", ensemble.labels)
    for i, basis in enumerate(ensemble.bases):
        io.write_matrix(f"{prefix}_basis{i}.csv", basis.phi)
    mu = geometry.mutual_coherence(ensemble.cluster(0), ensemble.cluster(1))
    meta = _meta_common(args, [
        ("n", spec.n), ("k", spec.k), ("q", spec.q), ("d", spec.d),
        ("model", spec.model), ("tau", "" if spec.tau is None else spec.tau),
        ("spectrum", args.spectrum), ("seed", spec.seed),
        ("delta", spec.delta), ("rho", spec.rho),
        ("mutual_coherence", mu),
    ])
    rows = [(i, s) for i, s in enumerate(ensemble.cross.sigma)]
    io.write_result(f"{prefix}_meta.csv", meta, ["index", "sigma"], rows)
    print(f"wrote {prefix}_data.csv ({spec.n}x{2 * spec.d}), labels, bases, meta",
          file=sys.stderr)
    return 0


def cmd_cluster(args):
    points = io.read_matrix(args.data)
    norms = np.linalg.norm(points, axis=0)
    if np.any(norms < 1e-12):
        raise SystemExit("error: data contains zero columns")
    points = points / norms
    labels_true = io.read_labels(args.labels) if args.labels else None
    if labels_true is not None and labels_true.shape[0] != points.shape[1]:
        raise SystemExit(
            f"error: {labels_true.shape[0]} labels for {points.shape[1]} points")
    if args.method == "omp":
        fsets = selection.omp_feature_sets(
            points, selection.StoppingRule.sparsity(args.sparsity))
    else:
        fsets = selection.nn_feature_sets(points, args.sparsity)
    c = clustering.coefficient_matrix(fsets, points.shape[1])
    w = clustering.affinity(c)
    lap = clustering.graph_laplacian(w, normalized=(args.laplacian == "normalized"))
    part = clustering.spectral_bipartition(lap)
    meta = _meta_common(args, [
        ("data", args.data), ("labels", args.labels or ""),
        ("method", args.method), ("sparsity", args.sparsity),
        ("laplacian", args.laplacian),
    ])
    if labels_true is not None:
        meta.append(("clustering_error", clustering.clustering_error(part, labels_true)))
        meta.append(("efs_rate", selection.efs_fraction(fsets, labels_true)))
    truth = labels_true if labels_true is not None else -np.ones(points.shape[1], dtype=int)
    rows = [(i, int(part.labels[i]), int(truth[i])) for i in range(points.shape[1])]
    io.write_result(args.out, meta, ["point", "label_pred", "label_true"], rows)
    return 0


def cmd_phase(args):
    if (args.rho_grid is None) == (args.tau_grid is None):
        raise SystemExit("error: exactly one of --rho-grid / --tau-grid is required")
    deltas = _parse_grid(args.delta_grid, "delta")
    if args.rho_grid is not None:
        second_axis, second = "rho", _parse_grid(args.rho_grid, "rho")
    else:
        second_axis, second = "tau", _parse_grid(args.tau_grid, "tau")
    grid = experiments.GridSpec(
        k=args.k, delta_values=deltas, second_axis=second_axis,
        second_values=second, trials=args.trials, base_seed=args.seed,
        method=args.method, spectrum=_parse_spectrum(args.spectrum),
        n=args.n, rho_fixed=args.rho_fixed)
    result = experiments.phase_transition(grid, workers=args.workers)
    grids = result if isinstance(result, tuple) else (result,)
    meta = _meta_common(args, [
        ("k", args.k), ("delta_grid", ",".join(repr(v) for v in deltas)),
        (f"{second_axis}_grid", ",".join(repr(v) for v in second)),
        ("rho_fixed", args.rho_fixed if second_axis == "tau" else ""),
        ("trials", args.trials), ("method", args.method),
        ("spectrum", args.spectrum), ("n", args.n if args.n else ""),
        ("seed", args.seed),
    ])
    if args.method == "both":
        header = ["delta", "rho_or_tau", "p_efs_omp", "p_efs_nn", "trials", "valid"]
    else:
        header = ["delta", "rho_or_tau", "p_efs", "trials", "valid"]
    rows = []
    for r, sv in enumerate(second):
        for c, dv in enumerate(deltas):
            cells = [g.p_efs[r, c] for g in grids]
            rows.append((dv, sv, *cells, int(grids[0].trials_done[r, c]),
                         int(grids[0].valid[r, c])))
    io.write_result(args.out, meta, header, rows)
    if args.svg:
        from . import plots
        if len(second) == 1:
            curves = {g.method: g.p_efs[0] for g in grids}
            label = f"{second_axis}={second[0]}"
            plots.efs_curves(deltas, curves, args.svg,
                             title=f"P(EFS) vs overlap ratio ({label})")
        else:
            plots.phase_heatmap(grids, args.svg)
    return 0


def _estimate_basis(cluster, rank):
    res = numerics.svd(cluster)
    if rank is None:
        rank = max(1, int(np.sum(res.sigma > 1e-8 * res.sigma[0])))
    return geometry.SubspaceBasis(res.u[:, :rank])


def cmd_diagnose(args):
    points = io.read_matrix(args.data)
    norms = np.linalg.norm(points, axis=0)
    if np.any(norms < 1e-12):
        raise SystemExit("error: data contains zero columns")
    points = points / norms
    labels = io.read_labels(args.labels)
    if labels.shape[0] != points.shape[1]:
        raise SystemExit(f"error: {labels.shape[0]} labels for {points.shape[1]} points")
    ids = [int(v) for v in np.unique(labels)]
    if len(ids) < 2:
        raise SystemExit("error: diagnose needs at least two clusters")
    clusters = {i: points[:, labels == i] for i in ids}
    if args.bases:
        paths = args.bases.split(",")
        if len(paths) != len(ids):
            raise SystemExit(
                f"error: condition {args.condition} needs one basis per cluster "
                f"({len(ids)}), got {len(paths)}")
        bases = {}
        for i, path in zip(ids, paths):
            try:
                bases[i] = geometry.SubspaceBasis(io.read_matrix(path))
            except ValueError as exc:
                raise SystemExit(f"error: basis {path}: {exc}") from None
    else:
        bases = {i: _estimate_basis(clusters[i], args.rank) for i in ids}

    ens = SimpleNamespace(points=points, labels=labels)
    rows = []
    header = ["cluster", "condition", "lhs", "rhs", "holds", "mu_c", "eps_mc",
              "eps_proxy", "cos_theta", "gamma", "sigma_l1", "q", "sigma", "note"]
    for i in ids:
        note = ""
        mu_c = geometry.max_mutual_coherence(ens, i)
        eps_proxy = geometry.covering_diameter_proxy(clusters[i])
        try:
            est = geometry.covering_diameter(clusters[i], bases[i],
                                             num_dirs=args.dirs,
                                             seed=experiments.mix64(args.seed, i))
            eps_mc = min(est.diameter, 2.0)
        except ValueError as exc:
            eps_mc = float("nan")
            note = f"covering_estimate_failed:{exc}"
        cos_theta = 0.0
        gamma = 0.0
        sigma_l1 = 0.0
        q_max = 0
        rhs3 = float("inf")
        sigma_repr = ""
        for j in ids:
            if j == i:
                continue
            cross = geometry.principal_angles(bases[i], bases[j])
            cos_theta = max(cos_theta, cross.max())
            g = geometry.bounding_constant(clusters[i], clusters[j], bases[i], bases[j])
            gamma = max(gamma, g)
            if cross.l1() >= sigma_l1:
                sigma_l1 = cross.l1()
                sigma_repr = ";".join(repr(float(s)) for s in cross.sigma)
            q_max = max(q_max, cross.q)
            t = g * cross.l1()
            rhs3 = min(rhs3, float(np.sqrt(1.0 - t * t)) if t < 1.0 else 0.0)
        lhs = rhs = float("nan")
        holds = False
        try:
            if args.condition == "thm1":
                cert = geometry.efs_condition_thm1(mu_c, eps_mc, cos_theta)
                lhs, rhs, holds = cert.lhs, cert.rhs, cert.holds
                note = note or "monte_carlo_eps_lower_bound"
            elif args.condition == "cor1":
                cert = geometry.efs_condition_cor1(eps_mc, cos_theta)
                lhs, rhs, holds = cert.lhs, cert.rhs, cert.holds
                note = note or "monte_carlo_eps_lower_bound"
            elif args.condition == "thm3":
                if q_max > 0 and gamma >= np.sqrt(1.0 / q_max):
                    lhs, rhs, holds = eps_mc, rhs3, False
                    note = "precondition_violated:gamma>=sqrt(1/q)"
                else:
                    lhs, rhs, holds = eps_mc, rhs3, eps_mc < rhs3
                    note = note or "monte_carlo_eps_lower_bound"
            else:
                dictionary = np.hstack([bases[j].phi for j in ids])
                offsets = np.cumsum([0] + [bases[j].dim for j in ids])
                pos = ids.index(i)
                lam = list(range(offsets[pos], offsets[pos + 1]))
                lhs = geometry.erc(dictionary, lam)
                rhs, holds = 1.0, lhs < 1.0
        except ValueError as exc:
            holds = False
            note = f"precondition_violated:{exc}"
        rows.append((i, args.condition, lhs, rhs, int(holds), mu_c, eps_mc,
                     eps_proxy, cos_theta, gamma, sigma_l1, q_max, sigma_repr,
                     note))
    meta = _meta_common(args, [
        ("data", args.data), ("labels", args.labels), ("bases", args.bases or ""),
        ("condition", args.condition), ("dirs", args.dirs), ("seed", args.seed),
        ("rank", args.rank if args.rank else ""),
    ])
    io.write_result(args.out, meta, header, rows)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ompclust",
        description="Greedy feature selection and clustering for unions of subspaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a synthetic two-subspace union")
    gen.add_argument("--n", type=int, default=None, help="ambient dimension")
    gen.add_argument("--k", type=int, required=True, help="subspace dimension")
    gen.add_argument("--q", type=int, required=True, help="overlap (nonzero cross-spectrum entries)")
    gen.add_argument("--d", type=int, required=True, help="points per subspace")
    gen.add_argument("--model", choices=["m1", "m2"], default="m1")
    gen.add_argument("--tau", type=float, default=None, help="common energy for m2")
    gen.add_argument("--spectrum", default="orthoblock",
                     help="orthoblock|lorentzian|exponential or comma-separated values")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True, help="output file prefix")
    gen.set_defaults(func=cmd_generate)

    clu = sub.add_parser("cluster", help="feature selection + spectral bipartition")
    clu.add_argument("--data", required=True)
    clu.add_argument("--labels", default=None)
    clu.add_argument("--method", choices=["omp", "nn"], default="omp")
    clu.add_argument("--sparsity", type=int, required=True)
    clu.add_argument("--laplacian", choices=["plain", "normalized"], default="plain")
    clu.add_argument("--out", required=True)
    clu.set_defaults(func=cmd_cluster)

    pha = sub.add_parser("phase", help="Monte Carlo phase-transition grid")
    pha.add_argument("--k", type=int, required=True)
    pha.add_argument("--delta-grid", required=True,
                     help="comma list or start:stop:step of overlap ratios")
    pha.add_argument("--rho-grid", default=None,
                     help="comma list or start:stop:step of oversampling ratios")
    pha.add_argument("--tau-grid", default=None,
                     help="comma list or start:stop:step of common-energy values")
    pha.add_argument("--rho-fixed", type=float, default=0.1,
                     help="oversampling ratio used with --tau-grid")
    pha.add_argument("--trials", type=int, default=100)
    pha.add_argument("--method", choices=["omp", "nn", "both"], default="omp")
    pha.add_argument("--spectrum", default="orthoblock")
    pha.add_argument("--n", type=int, default=None)
    pha.add_argument("--seed", type=int, required=True)
    pha.add_argument("--workers", type=int, default=1)
    pha.add_argument("--svg", default=None, help="also render a heatmap figure here")
    pha.add_argument("--out", required=True)
    pha.set_defaults(func=cmd_phase)

    dia = sub.add_parser("diagnose", help="geometric certificates for labeled data")
    dia.add_argument("--data", required=True)
    dia.add_argument("--labels", required=True)
    dia.add_argument("--bases", default=None,
                     help="comma-separated basis files, one per cluster")
    dia.add_argument("--rank", type=int, default=None,
                     help="force this rank when estimating bases from data")
    dia.add_argument("--condition", choices=["thm1", "cor1", "thm3", "erc"],
                     required=True)
    dia.add_argument("--dirs", type=int, default=2000)
    dia.add_argument("--seed", type=int, required=True)
    dia.add_argument("--out", required=True)
    dia.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
