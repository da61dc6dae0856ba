"""Experiment runner: one subcommand per experiment, CSV + figure outputs.

Exit codes: 0 success, 2 precondition/usage violation, 3 acceptance-gate
failure under --check.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import arith, circle, expsum, operators, plots
from .gaussint import GaussInt, ReducedRational, TorusPoint, canonical_elements, norm
from .report import ExperimentReport, loglog_slope, max_over_median, spread

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_GATE = 3


@dataclass
class RunConfig:
    nmax: int | None
    delta: float
    seed: int
    threads: int
    out_dir: Path
    kappa: float
    check: bool
    timestamp: bool
    plot: bool


class GateFailure(Exception):
    pass


class UsageError(Exception):
    pass


def _read_config_file(path: str) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"bad config line: {line!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _resolve_config(args) -> RunConfig:
    file_vals = _read_config_file(args.config) if args.config else {}

    def pick(name, cast, default):
        cli = getattr(args, name, None)
        if cli is not None:
            return cli
        if name in file_vals:
            return cast(file_vals[name])
        return default

    nmax = pick("nmax", int, None)
    delta = pick("delta", float, 1.0 / 20.0)
    seed = pick("seed", int, 42)
    threads = pick("threads", int, 1)
    out_dir = Path(pick("out", str, "out"))
    if not 0.0 < delta <= 1.0 / 20.0:
        raise UsageError(f"delta={delta} outside (0, 1/20]")
    if args.kappa_file:
        kappa = float(Path(args.kappa_file).read_text().split()[0])
    else:
        kappa = arith.sierpinski_kappa(args.kappa_n)
    out_dir.mkdir(parents=True, exist_ok=True)
    return RunConfig(
        nmax=nmax,
        delta=delta,
        seed=seed,
        threads=threads,
        out_dir=out_dir,
        kappa=kappa,
        check=args.check,
        timestamp=args.timestamp,
        plot=not args.no_plot,
    )


def _table_for(cfg: RunConfig, needed: int) -> arith.DivisorTable:
    if cfg.nmax is not None and cfg.nmax < needed:
        raise UsageError(f"nmax={cfg.nmax} too small, command needs {needed}")
    return arith.divisor_sieve(max(needed, cfg.nmax or 0))


def _emit(cfg: RunConfig, report: ExperimentReport, stem: str) -> None:
    csv_path = cfg.out_dir / f"{stem}.csv"
    report.write_csv(csv_path, timestamp=cfg.timestamp)
    print(f"wrote {csv_path}")
    if cfg.plot:
        png_path = cfg.out_dir / f"{stem}.png"
        plots.render(report, png_path)
        print(f"wrote {png_path}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_sieve(args, cfg: RunConfig) -> None:
    nmax = cfg.nmax or 10_000
    table = arith.divisor_sieve(nmax)
    bin_path = cfg.out_dir / "divisor_table.bin"
    table.save_binary(bin_path)
    reloaded = arith.load_binary(bin_path)
    if not np.array_equal(reloaded.values, table.values):
        raise GateFailure("binary dump did not round-trip")
    print(f"wrote {bin_path} (round-trip verified)")
    if args.dump_csv:
        table.save_csv(cfg.out_dir / "divisor_table.csv")

    rows = []
    n = 1
    while n <= nmax:
        d = table.D(n)
        main = arith.summatory_main_term(n, cfg.kappa) if n > 1 else float(d)
        rows.append((n, d, main, d - main, (d - main) / n**0.75))
        n *= 2
    report = ExperimentReport(
        "sieve",
        {"nmax": nmax, "seed": cfg.seed, "kappa": cfg.kappa},
        ("n", "D", "main_term", "residual", "residual_over_n34"),
        rows,
    )
    _emit(cfg, report, "sieve")
    print(f"{'N':>10} {'D(N)':>14} {'residual':>12}")
    for n, d, main, resid, _ in rows:
        print(f"{n:>10} {d:>14} {resid:>12.1f}")
    if cfg.check:
        norm_resid = [abs(r[4]) for r in rows if r[0] >= 1024]
        if max_over_median(norm_resid) > 10.0:
            raise GateFailure("summatory residual spread exceeds 10x median")


def cmd_kappa(args, cfg: RunConfig) -> None:
    n = args.n
    rows = [(m, arith.sierpinski_kappa(m)) for m in (n // 16, n // 4, n)]
    report = ExperimentReport(
        "kappa", {"n": n, "seed": cfg.seed, "kappa": rows[-1][1]}, ("n", "kappa_hat"), rows
    )
    _emit(cfg, report, "kappa")
    drift = abs(rows[-1][1] - rows[-2][1])
    print(f"kappa_hat({n}) = {rows[-1][1]:.8f}   pi*kappa = {math.pi * rows[-1][1]:.6f}")
    print(f"stability vs N/4: {drift:.2e}")
    if cfg.check and drift > 0.01:
        raise GateFailure(f"kappa drift {drift} exceeds 0.01")


def _scan_bounds(kind: str, n: int, delta: float, alphas: np.ndarray) -> np.ndarray:
    anorm = np.array(
        [max(circle.torus_norm(TorusPoint(x % 1.0, y % 1.0)), 1e-12) for x, y in alphas]
    )
    if kind == "S":
        return np.full(len(alphas), n ** (1.0 - delta / 4.0) * math.log(n))
    if kind == "M":
        return np.minimum(1.0, (n**-0.5 + n**-0.75 * anorm**-0.75) * math.pi)
    if kind == "L":
        return np.minimum(1.0, n**-0.5 + n**-0.75 * anorm**-0.75)
    if kind == "lo":
        return np.ones(len(alphas))
    if kind == "hi":
        return np.full(len(alphas), n ** (-delta / 4.0))
    raise UsageError(f"unknown scan kind {kind!r}")


def cmd_expsum_scan(args, cfg: RunConfig) -> None:
    n = args.n
    alphas = circle.stratified_grid(args.points, cfg.seed)
    kind = args.kind
    if kind in ("S", "hi"):
        table = _table_for(cfg, n)
    if kind == "S":
        vals = expsum.weighted_expsum_grid(table, n, alphas)
    elif kind == "M":
        vals = circle.M_hat_grid(n, alphas)
    elif kind == "L":
        vals = circle.L_hat_grid(n, GaussInt(1, 0), alphas, cfg.kappa)
    elif kind == "lo":
        vals = circle.lo_hat_grid(n, cfg.delta, alphas, cfg.kappa)
    elif kind == "hi":
        vals = circle.hi_hat_grid(table, n, cfg.delta, alphas, cfg.kappa)
    else:
        raise UsageError(f"unknown scan kind {kind!r}")
    shapes = _scan_bounds(kind, n, cfg.delta, alphas)
    rows = [
        (kind, n, cfg.delta, a[0], a[1], v.real, v.imag, s, abs(v) / s)
        for a, v, s in zip(alphas, vals, shapes)
    ]
    report = ExperimentReport(
        "expsum_scan",
        {"kind": kind, "n": n, "delta": cfg.delta, "seed": cfg.seed, "kappa": cfg.kappa},
        ("kind", "n", "delta_or_s", "alpha_x", "alpha_y", "re", "im", "bound_shape", "ratio"),
        rows,
    )
    _emit(cfg, report, f"expsum_scan_{kind}")
    if cfg.check:
        ratios = [r[-1] for r in rows]
        if max_over_median(ratios) > 10.0:
            raise GateFailure("scan ratio spread exceeds 10x median")


def _parse_qlist(qnorms: str) -> list[GaussInt]:
    out = []
    for tok in qnorms.split(","):
        target = int(tok)
        q = next((z for z in canonical_elements(target) if norm(z) == target), None)
        if q is None:
            raise UsageError(f"no Gaussian integer has norm {target}")
        out.append(q)
    return out


def _first_reduced(q: GaussInt) -> ReducedRational:
    from .gaussint import enumerate_Aq, reduced_rational

    return reduced_rational(enumerate_Aq(q)[0], q)


def cmd_major_error(args, cfg: RunConfig) -> None:
    n_list = [int(t) for t in args.n.split(",")]
    table = _table_for(cfg, max(n_list))
    sector = arith.Sector(args.omega_lo, args.omega_hi)
    rows = []
    for n in n_list:
        for q in _parse_qlist(args.qnorms):
            rr = _first_reduced(q)
            err = expsum.error_EN_avg(table, n, rr, sector, args.T, cfg.kappa)
            main = expsum.rational_main_term(n, rr.q, sector, cfg.kappa)
            shape = (n**0.75 + n**0.25 * rr.nq() ** 0.75) * math.log(1.0 + rr.nq())
            rows.append(
                (n, rr.q.re, rr.q.im, rr.a.re, rr.a.im, sector.lo, sector.hi,
                 args.T, main, err, err / shape)
            )
    report = ExperimentReport(
        "major_error",
        {"T": args.T, "seed": cfg.seed, "kappa": cfg.kappa},
        ("n", "q_re", "q_im", "a_re", "a_im", "omega_lo", "omega_hi", "T",
         "main_term", "avg_abs_error", "normalized_error"),
        rows,
    )
    _emit(cfg, report, "major_error")
    if cfg.check:
        if max_over_median([r[-1] for r in rows]) > 10.0:
            raise GateFailure("normalized rational-frequency error spread exceeds 10x median")


def cmd_ramanujan(args, cfg: RunConfig) -> None:
    q_caps = [int(t) for t in args.qmaxes.split(",")]
    rows = []
    for q_cap in q_caps:
        n_lat = args.nfactor * q_cap**args.k
        rows.append((q_cap, n_lat, args.k, circle.ramanujan_moment(n_lat, q_cap, args.k)))
    report = ExperimentReport(
        "ramanujan",
        {"k": args.k, "nfactor": args.nfactor, "seed": cfg.seed, "kappa": cfg.kappa},
        ("q_cap", "n_lat", "k", "moment"),
        rows,
    )
    _emit(cfg, report, "ramanujan")
    slope = loglog_slope([r[0] for r in rows], [r[3] for r in rows])
    print(f"fitted moment growth exponent: {slope:.3f}")
    if cfg.check and slope > 0.3:
        raise GateFailure(f"moment growth exponent {slope:.3f} exceeds 0.3")


def cmd_improving(args, cfg: RunConfig) -> None:
    n_list = [args.n] + ([args.n2] if args.n2 else [])
    table = _table_for(cfg, max(n_list))
    reports = []
    for n in n_list:
        rep = operators.improving_experiment(table, n, args.p, args.trials, cfg.seed,
                                             threads=cfg.threads)
        rep.meta["kappa"] = cfg.kappa
        reports.append(rep)
        _emit(cfg, rep, f"improving_n{n}")
    if cfg.check:
        base = operators.improving_max_by_density(reports[0])
        ref = base[max(base)]
        if max(base.values()) > 3.0 * ref:
            raise GateFailure("cross-density ratio blow-up exceeds 3x")
        if len(reports) > 1:
            other = operators.improving_max_by_density(reports[1])
            lo, hi = sorted([max(base.values()), max(other.values())])
            if hi / lo > 2.0:
                raise GateFailure("cross-scale ratio drift exceeds 2x")


def cmd_sharpness(args, cfg: RunConfig) -> None:
    n_list = [int(t) for t in args.ns.split(",")]
    table = _table_for(cfg, 4 * max(n_list))
    report = operators.sharpness_experiment(table, n_list, cfg.kappa)
    report.meta.update({"seed": cfg.seed, "kappa": cfg.kappa})
    _emit(cfg, report, "sharpness")
    if cfg.check:
        vals = [r[4] for r in report.rows if math.isfinite(r[4])]
        rs = [r[3] for r in report.rows if math.isfinite(r[3])]
        if not vals or spread(vals) > 4.0:
            raise GateFailure("r(N)/log N drifts beyond factor 4")
        if min(rs) < 1.0:
            raise GateFailure("endpoint ratio fell below 1")


def cmd_weighted(args, cfg: RunConfig) -> None:
    nmax = cfg.nmax or 10_000
    table = arith.divisor_sieve(nmax)
    n_set = operators.lacunary_scales(4, nmax)
    boxes = [int(t) for t in args.boxes.split(",")]
    report = operators.weighted_maximal_experiment(
        table, args.p, args.gamma, n_set, args.trials, cfg.seed, boxes, cfg.threads
    )
    report.meta["kappa"] = cfg.kappa
    _emit(cfg, report, "weighted")
    if cfg.check:
        per_box = {}
        for box, _, ratio in report.rows:
            per_box.setdefault(box, []).append(ratio)
        maxima = [max(v) for v in per_box.values()]
        if spread(maxima) > 3.0:
            raise GateFailure("weighted maximal ratio drifts beyond 3x across boxes")


def cmd_sparse(args, cfg: RunConfig) -> None:
    nmax = cfg.nmax or 10_000
    table = arith.divisor_sieve(nmax)
    n_set = operators.lacunary_scales(4, nmax)
    rows = []
    for box in (int(t) for t in args.boxes.split(",")):
        for trial in range(args.trials):
            rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, box, trial)))
            half = box // 2
            f = operators.GridFunction(-half, -half, (rng.random((box, box)) < 0.1).astype(float))
            g = operators.GridFunction(-half, -half, (rng.random((box, box)) < 0.1).astype(float))
            fam, ratio = operators.greedy_sparse_certificate(f, g, table, n_set, args.r, args.s)
            rows.append((box, trial, len(fam.disks), int(fam.audit()), ratio))
    report = ExperimentReport(
        "sparse",
        {"r": args.r, "s": args.s, "trials": args.trials, "seed": cfg.seed, "kappa": cfg.kappa},
        ("box", "trial", "family_size", "audit_ok", "ratio"),
        rows,
    )
    _emit(cfg, report, "sparse")
    if cfg.check:
        if any(r[3] == 0 for r in rows):
            raise GateFailure("a sparse witness audit failed")
        per_box = {}
        for box, _, _, _, ratio in rows:
            per_box.setdefault(box, []).append(ratio)
        maxima = [max(v) for v in per_box.values() if max(v) > 0]
        if len(maxima) > 1 and spread(maxima) > 3.0:
            raise GateFailure("sparse ratio drifts beyond 3x across box scales")


def cmd_oscillation(args, cfg: RunConfig) -> None:
    nmax = cfg.nmax or 10_000
    table = arith.divisor_sieve(nmax)
    osc = operators.oscillation_experiment(
        table, args.R, args.trials, cfg.seed, kmax=args.kmax, box=args.box, threads=cfg.threads
    )
    osc.meta["kappa"] = cfg.kappa
    _emit(cfg, osc, "oscillation")
    sq = operators.square_function_experiment(
        table, args.rho, args.trials, args.kmax, cfg.seed, box=args.box // 2, threads=cfg.threads
    )
    sq.meta["kappa"] = cfg.kappa
    _emit(cfg, sq, "square_function")
    if cfg.check:
        for rep, label in ((osc, "oscillation"), (sq, "square function")):
            ks = rep.column("k")
            totals_mid = rep.column("partial_sum")[ks == min(8, ks.max())]
            totals_end = rep.column("partial_sum")[ks == ks.max()]
            if totals_mid.size and totals_end.size:
                if totals_end.mean() > 3.0 * totals_mid.mean():
                    raise GateFailure(f"{label} partial sums not stable (tail not summable)")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--nmax", type=int, default=None, help="divisor table size cap")
    common.add_argument("--delta", type=float, default=None, help="arc exponent, in (0, 1/20]")
    common.add_argument("--seed", type=int, default=None, help="master RNG seed")
    common.add_argument("--threads", type=int, default=None, help="worker threads for trials")
    common.add_argument("--out", dest="out", type=str, default=None, help="output directory")
    common.add_argument("--config", type=str, default=None, help="key=value config file")
    common.add_argument("--check", action="store_true", help="enforce acceptance gates")
    common.add_argument("--timestamp", action="store_true", help="stamp CSV metadata")
    common.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    common.add_argument("--kappa-n", type=int, default=1_000_000,
                        help="ball size for the Sierpinski-constant estimate")
    common.add_argument("--kappa-file", type=str, default=None,
                        help="read kappa from a file instead of computing it")

    p = argparse.ArgumentParser(prog="gaussdiv", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sieve", parents=[common], help="build and export the divisor table")
    sp.add_argument("--dump-csv", action="store_true")
    sp.set_defaults(run=cmd_sieve)

    sp = sub.add_parser("kappa", parents=[common], help="estimate the Sierpinski constant")
    sp.add_argument("--n", type=int, default=1_000_000)
    sp.set_defaults(run=cmd_kappa)

    sp = sub.add_parser("expsum-scan", parents=[common], help="multiplier scans on the torus")
    sp.add_argument("--n", type=int, default=10_000)
    sp.add_argument("--kind", choices=("S", "M", "L", "lo", "hi"), default="S")
    sp.add_argument("--points", type=int, default=200)
    sp.set_defaults(run=cmd_expsum_scan)

    sp = sub.add_parser("major-error", parents=[common],
                        help="rotation-averaged error at rational frequencies")
    sp.add_argument("--n", type=str, default="10000,100000")
    sp.add_argument("--qnorms", type=str, default="1,2,5,13,25")
    sp.add_argument("--omega-lo", type=float, default=0.0)
    sp.add_argument("--omega-hi", type=float, default=math.pi)
    sp.add_argument("--T", type=int, default=64)
    sp.set_defaults(run=cmd_major_error)

    sp = sub.add_parser("ramanujan", parents=[common], help="Ramanujan-sum moment growth")
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--qmaxes", type=str, default="4,8,16,32")
    sp.add_argument("--nfactor", type=int, default=10)
    sp.set_defaults(run=cmd_ramanujan)

    sp = sub.add_parser("improving", parents=[common], help="improving-ratio census")
    sp.add_argument("--n", type=int, default=10_000)
    sp.add_argument("--n2", type=int, default=None)
    sp.add_argument("--p", type=float, default=1.5)
    sp.add_argument("--trials", type=int, default=200)
    sp.set_defaults(run=cmd_improving)

    sp = sub.add_parser("sharpness", parents=[common], help="endpoint sharpness census")
    sp.add_argument("--ns", type=str, default="10000,40000,160000")
    sp.set_defaults(run=cmd_sharpness)

    sp = sub.add_parser("weighted", parents=[common], help="weighted maximal ratios")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--gamma", type=float, default=0.0)
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--boxes", type=str, default="64,128,256")
    sp.set_defaults(run=cmd_weighted)

    sp = sub.add_parser("sparse", parents=[common], help="sparse-form domination census")
    sp.add_argument("--r", type=float, default=1.5)
    sp.add_argument("--s", type=float, default=1.5)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--boxes", type=str, default="64,128")
    sp.set_defaults(run=cmd_sparse)

    sp = sub.add_parser("oscillation", parents=[common],
                        help="oscillation and square-function sums")
    sp.add_argument("--R", type=int, default=4)
    sp.add_argument("--rho", type=float, default=2.0)
    sp.add_argument("--kmax", type=int, default=12)
    sp.add_argument("--box", type=int, default=64)
    sp.add_argument("--trials", type=int, default=20)
    sp.set_defaults(run=cmd_oscillation)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        args.run(args, cfg)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GateFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_GATE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
