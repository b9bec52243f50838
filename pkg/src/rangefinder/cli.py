"""Command-line front end.

Subcommands: cdf, invert, bound, sample, estimate, selftest, figdata. Every
command is a pure function of its flags — identical invocations produce
byte-identical output files (floats are written with shortest round-trip
repr). Errors are reported as one-line JSON on stderr with a nonzero exit.
"""

import argparse
import csv
import json
import sys
from math import pi, sin

import numpy as np

from .bounds import bound_conjecture, bound_frobenius, bound_gap, prop_lower_bound
from .cdf import Spectrum, cdf_curve, integrand_J, invert_cdf
from .harness import (
    SpectrumRecipe,
    empirical_quantile,
    make_spectrum,
    rrf_sample_batch,
    rsvd_estimate_spectrum,
    sample_batch,
    save_batch,
)
from .hypergeom import SeriesControl
from .numerics import RngStream, haar_stiefel_batch
from .partitions import enumerate_partitions, zonal_value


def _parse_spectrum(args) -> tuple[Spectrum, SpectrumRecipe]:
    """Build a Spectrum from --spectrum / --N / --k / --p.

    --spectrum forms: 'power:alpha=2', 'exponential:base=2',
    'rank_deficient_linear:cutoff=18', 'explicit:v1,v2,...', or 'file:path'
    (one singular value per line, length N).
    """
    text = args.spectrum
    if text is None:
        raise ValueError("--spectrum is required for this command")
    kind, _, rest = text.partition(":")
    kw = {}
    if kind == "explicit":
        kw["values"] = tuple(float(v) for v in rest.split(",") if v)
    elif kind == "file":
        with open(rest) as f:
            kw["values"] = tuple(float(line) for line in f if line.strip())
        kind = "explicit"
    elif rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            if key == "cutoff":
                kw[key] = int(val)
            else:
                kw[key] = float(val)
    N = args.N if args.N is not None else len(kw.get("values", ()))
    recipe = SpectrumRecipe(kind=kind, N=N, k=args.k, p=args.p, **kw)
    return make_spectrum(recipe), recipe


def _parse_theta_grid(text: str) -> np.ndarray:
    """'start:stop:num' (radians) or plain 'num' for a uniform [0, pi/2] grid."""
    parts = text.split(":")
    if len(parts) == 1:
        return np.linspace(0.0, pi / 2, int(parts[0]))
    if len(parts) == 3:
        return np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))
    raise ValueError("--theta-grid must be 'num' or 'start:stop:num'")


def _ctrl(args) -> SeriesControl:
    return SeriesControl(max_weight=args.max_weight, tail_tol=args.tail_tol)


def _config_echo(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func" and v is not None}
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.items()}


def _out_stream(args):
    if args.out:
        return open(args.out, "w", newline="")
    from contextlib import nullcontext

    return nullcontext(sys.stdout)


def _write_sidecar(args) -> None:
    if args.out:
        with open(args.out + ".config.json", "w") as f:
            json.dump(_config_echo(args), f, indent=2, sort_keys=True)
            f.write("\n")


def _write_cdf_rows(f, estimates, fmt: str) -> None:
    if fmt == "json":
        records = [
            {"theta": e.theta, "cdf": e.value, "stderr": e.stderr, "regime": e.regime}
            for e in estimates
        ]
        json.dump(records, f, indent=2)
        f.write("\n")
        return
    writer = csv.writer(f)
    writer.writerow(["theta", "cdf", "stderr", "regime"])
    for e in estimates:
        writer.writerow([repr(e.theta), repr(e.value), repr(e.stderr), e.regime])


def cmd_cdf(args) -> int:
    spec, _ = _parse_spectrum(args)
    thetas = _parse_theta_grid(args.theta_grid)
    estimates = cdf_curve(spec, thetas, args.n_mc, RngStream(args.seed), _ctrl(args))
    with _out_stream(args) as f:
        _write_cdf_rows(f, estimates, args.format)
    _write_sidecar(args)
    return 0


def cmd_invert(args) -> int:
    spec, _ = _parse_spectrum(args)
    q = args.quantile if args.quantile is not None else 1.0 - args.delta
    theta = invert_cdf(spec, q, args.n_mc, RngStream(args.seed), ctrl=_ctrl(args))
    record = {
        "quantile": q,
        "theta": theta,
        "sin_theta": sin(theta),
        "n_mc": args.n_mc,
        "seed": args.seed,
    }
    with _out_stream(args) as f:
        json.dump(record, f, indent=2, sort_keys=True)
        f.write("\n")
    _write_sidecar(args)
    return 0


def _bound_records(spec: Spectrum, delta: float) -> list[dict]:
    reports = [
        bound_frobenius(spec, delta),
        bound_gap(spec, delta),
        bound_conjecture(spec, delta),
    ]
    return [
        {
            "method": r.method,
            "delta": r.delta,
            "constant": r.constant,
            "ratio": r.ratio,
            "sin_theta_bound": r.sin_theta_bound,
            "unproven": r.unproven,
        }
        for r in reports
    ]


def cmd_bound(args) -> int:
    spec, _ = _parse_spectrum(args)
    with _out_stream(args) as f:
        json.dump(_bound_records(spec, args.delta), f, indent=2)
        f.write("\n")
    _write_sidecar(args)
    return 0


def cmd_sample(args) -> int:
    spec, recipe = _parse_spectrum(args)
    batch = sample_batch(
        spec, args.n_samples, args.seed, recipe=recipe, workers=args.workers
    )
    if args.out:
        save_batch(batch, args.out)
    quantiles = {repr(q): empirical_quantile(batch, q) for q in args.quantiles}
    json.dump({"n_samples": args.n_samples, "quantiles": quantiles}, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _load_matrix(path: str) -> np.ndarray:
    """Dense matrix from CSV, or from the binary format: two little-endian
    uint64 dimensions followed by row-major little-endian float64 entries."""
    if path.endswith(".csv"):
        return np.loadtxt(path, delimiter=",", ndmin=2)
    with open(path, "rb") as f:
        dims = np.fromfile(f, dtype="<u8", count=2)
        if dims.size != 2:
            raise ValueError("binary matrix file is truncated")
        m, n = int(dims[0]), int(dims[1])
        data = np.fromfile(f, dtype="<f8", count=m * n)
    if data.size != m * n:
        raise ValueError("binary matrix file is truncated")
    return data.reshape(m, n)


def cmd_estimate(args) -> int:
    A = _load_matrix(args.matrix)
    est = rsvd_estimate_spectrum(
        A, args.k, args.p, q=args.power_iters, rng=RngStream(args.seed, 1)
    )
    theta = invert_cdf(
        est, 1.0 - args.delta, args.n_mc, RngStream(args.seed, 2), ctrl=_ctrl(args)
    )
    record = {
        "method": "cdf_estimated",
        "delta": args.delta,
        "theta": theta,
        "sin_theta_bound": sin(theta),
        "estimated_sigma_head": [float(s) for s in est.sigma[: args.k + args.p]],
        "unproven": True,
    }
    with _out_stream(args) as f:
        json.dump(record, f, indent=2, sort_keys=True)
        f.write("\n")
    _write_sidecar(args)
    return 0


def _selftest_properties(seed: int) -> list[tuple[str, bool, float]]:
    results = []

    # zonal normalization: weight-l sum of C_kappa equals (sum of eigenvalues)^l
    x = [0.9, 0.6, 0.3, 0.1]
    worst = 0.0
    for ell in range(9):
        total = sum(
            zonal_value(kappa, x) for kappa in enumerate_partitions(ell, ell, len(x))
        )
        worst = max(worst, abs(total - sum(x) ** ell))
    results.append(("zonal_normalization", worst <= 1e-9, worst))

    # identity-spectrum k=1 CDF equals the regularized incomplete beta function
    from scipy.special import betainc

    N = 50
    spec = Spectrum(sigma=(1.0,) * N, k=1, p=0)
    thetas = np.linspace(1e-3, pi / 2 - 1e-3, 25)
    est = cdf_curve(spec, thetas, 1, RngStream(seed))
    ref = betainc((N - 1) / 2.0, 0.5, np.sin(thetas) ** 2)
    err = float(np.max(np.abs([e.value for e in est] - ref)))
    results.append(("beta_reduction", err <= 1e-8, err))

    # scalar lower bound on the CDF integrand at S = s*I
    margin = np.inf
    ctrl = SeriesControl(max_weight=400)
    for N in (20, 100):
        for k in (1, 3, 7):
            for p in (0, 1, 2, 3, 5, 7):
                for s in (0.5, 0.9, 0.99, 0.999):
                    J = integrand_J(N, k, p, [s] * k, ctrl)
                    margin = min(margin, J - prop_lower_bound(N, k, p, s))
    results.append(("integrand_lower_bound", margin >= -1e-10, margin))

    # mean of tr(X H^T Y H) over Haar frames equals tr(X) tr(Y) / n
    gen = np.random.default_rng(seed)
    X = gen.standard_normal((3, 3))
    X = X @ X.T
    Y = gen.standard_normal((8, 8))
    Y = Y @ Y.T
    H = haar_stiefel_batch(100_000, 8, 3, gen)
    HtYH = np.einsum("bji,jk,bkl->bil", H, Y, H)
    tr = np.einsum("ij,bji->b", X, HtYH)
    se = float(tr.std(ddof=1) / np.sqrt(tr.size))
    z = float((tr.mean() - np.trace(X) * np.trace(Y) / 8.0) / se)
    results.append(("trace_mean_value", abs(z) <= 3.0, z))

    # Haar invariance: frame entries have mean zero (uncorrected QR biases
    # the diagonal away from zero)
    H = haar_stiefel_batch(100_000, 6, 2, np.random.default_rng(seed + 1))
    d = H[:, 0, 0]
    z = float(d.mean() / (d.std(ddof=1) / np.sqrt(d.size)))
    results.append(("haar_invariance", abs(z) <= 3.0, z))
    return results


def cmd_selftest(args) -> int:
    results = _selftest_properties(args.seed)
    failed = False
    for name, ok, stat in results:
        print(f"{'PASS' if ok else 'FAIL'} {name} statistic={stat!r}")
        failed = failed or not ok
    return 1 if failed else 0


def _parse_k_range(text: str) -> list[int]:
    lo, _, hi = text.partition(":")
    return list(range(int(lo), int(hi) + 1))


def cmd_figdata(args) -> int:
    if args.kind == "cdf_overlay":
        spec, recipe = _parse_spectrum(args)
        thetas = _parse_theta_grid(args.theta_grid)
        estimates = cdf_curve(spec, thetas, args.n_mc, RngStream(args.seed), _ctrl(args))
        with open(args.out + "_cdf.csv", "w", newline="") as f:
            _write_cdf_rows(f, estimates, "csv")
        batch = sample_batch(spec, args.n_samples, args.seed, stream_id=1, recipe=recipe)
        save_batch(batch, args.out + "_samples.csv")
        _write_sidecar(args)
        return 0
    if args.kind == "bound_sweep":
        rows = []
        for k in _parse_k_range(args.k_range):
            ns = dict(vars(args))
            ns["k"] = k
            spec, _ = _parse_spectrum(argparse.Namespace(**ns))
            samples = rrf_sample_batch(
                spec, args.n_samples, RngStream(args.seed, k), workers=args.workers
            )
            emp = empirical_quantile(samples, 1.0 - args.delta)
            rec = {r["method"]: r["sin_theta_bound"] for r in _bound_records(spec, args.delta)}
            row = [k, emp, rec["frobenius"], rec["gap"], rec["conjecture"]]
            if args.with_cdf:
                theta = invert_cdf(
                    spec, 1.0 - args.delta, args.n_mc, RngStream(args.seed, 10_000 + k),
                    ctrl=_ctrl(args),
                )
                row.append(sin(theta))
            rows.append(row)
        header = ["k", "empirical_quantile", "bound_frobenius", "bound_gap", "bound_conjecture"]
        if args.with_cdf:
            header.append("bound_cdf")
        with open(args.out, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
        _write_sidecar(args)
        return 0
    raise ValueError(f"unknown figdata kind {args.kind!r}")


def _add_common(sub) -> None:
    sub.add_argument("--spectrum", help="power:alpha=A | exponential:base=B | "
                     "rank_deficient_linear:cutoff=C | explicit:v1,v2,... | file:path")
    sub.add_argument("--N", type=int, help="ambient dimension (rows of the matrix)")
    sub.add_argument("--k", type=int, default=1, help="target subspace dimension")
    sub.add_argument("--p", type=int, default=0, help="oversampling")
    sub.add_argument("--delta", type=float, default=0.05, help="failure probability")
    sub.add_argument("--theta-grid", default="200", help="'num' or 'start:stop:num' in radians")
    sub.add_argument("--n-mc", type=int, default=1000, help="Monte Carlo draws for the CDF")
    sub.add_argument("--n-samples", type=int, default=10_000, help="RRF sample count")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--max-weight", type=int, default=40, help="series truncation weight")
    sub.add_argument("--tail-tol", type=float, default=1e-8, help="relative series tail tolerance")
    sub.add_argument("--workers", type=int, default=1, help="threads for sampling")
    sub.add_argument("--out", help="output path (default stdout where applicable)")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rangefinder",
        description="Exact distribution and probabilistic bounds for the largest "
        "principal angle of the Gaussian randomized range finder.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("cdf", help="CDF of the largest principal angle on a theta grid")
    _add_common(s)
    s.set_defaults(func=cmd_cdf)

    s = subs.add_parser("invert", help="angle at a given CDF quantile")
    _add_common(s)
    s.add_argument("--quantile", type=float, help="target quantile (default 1 - delta)")
    s.set_defaults(func=cmd_invert)

    s = subs.add_parser("bound", help="closed-form sin(theta_1) bounds")
    _add_common(s)
    s.set_defaults(func=cmd_bound)

    s = subs.add_parser("sample", help="draw RRF samples of sin(theta_1)")
    _add_common(s)
    s.add_argument("--quantiles", type=float, nargs="*", default=[0.5, 0.95],
                   help="empirical quantiles to print")
    s.set_defaults(func=cmd_sample)

    s = subs.add_parser("estimate", help="CDF-based bound from an estimated spectrum")
    _add_common(s)
    s.add_argument("--matrix", required=True,
                   help="dense matrix: .csv, or binary (2 uint64 dims + float64 entries, little-endian)")
    s.add_argument("--power-iters", type=int, default=0, help="power iterations for the estimate")
    s.set_defaults(func=cmd_estimate)

    s = subs.add_parser("selftest", help="run the invariant suite")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_selftest)

    s = subs.add_parser("figdata", help="emit combined CSVs for figure scripts")
    _add_common(s)
    s.add_argument("--kind", choices=("cdf_overlay", "bound_sweep"), required=True)
    s.add_argument("--k-range", default="1:12", help="'lo:hi' inclusive k sweep")
    s.add_argument("--with-cdf", action="store_true",
                   help="add an inverted-CDF bound column to bound_sweep output")
    s.set_defaults(func=cmd_figdata)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single reporting point for the CLI
        json.dump({"error": str(exc), "type": type(exc).__name__}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
