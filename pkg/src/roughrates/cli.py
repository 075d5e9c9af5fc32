"""Command line interface: ``roughrates <subcommand> [flags]``.

Every subcommand reads an optional flat ``key=value`` config file given by
``--config``; explicit flags override it.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ContractError
from .gaussian import BLOCK, CovarianceModel, grid_covariance, sample_array
from .grids import grid_rho_variation_detail
from .harness import (
    ExperimentSpec,
    parallel_map,
    RateReport,
    run_level_l2_rate,
    run_simplified_euler_rate,
    run_wong_zakai_rate,
)
from .signatures import SampledPath, path_signature
from .tensor_algebra import csv_header, to_csv_row
from .words import generating_set, lyndon_factorization, lyndon_shuffle_expansion, reduce_to_lyndon, shuffle


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in str(text).split(",") if v.strip())


def read_config(path) -> dict:
    """Parse a flat key=value file; '#' starts a comment, dashes map to underscores."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ContractError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _model(args, dim: int) -> CovarianceModel:
    if args.model == "bm":
        return CovarianceModel("bm", 0.5, dim)
    return CovarianceModel("fbm", float(args.hurst), dim)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--model", choices=["bm", "fbm"], default="bm")
    p.add_argument("--hurst", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--workers", type=int, default=1)


def _rate_flags(p: argparse.ArgumentParser):
    p.add_argument("--meshes", type=_ints, default=(8, 16, 32, 64, 128, 256))
    p.add_argument("--ref-mesh", type=int, default=2048)
    p.add_argument("--mc", type=int, default=64)
    p.add_argument("--preset", default="nonlinear")
    p.add_argument("--stat", choices=["median", "mean", "l2"], default="median")
    p.add_argument("--band", type=float, nargs=2, metavar=("LO", "HI"), help="override the acceptance band")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roughrates", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommands = sub.choices

    p = sub.add_parser("sample", help="sample driver trajectories")
    _common(p)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--mesh", type=int, default=256)
    p.add_argument("--mc", type=int, default=1)
    p.add_argument("--layout", choices=["long", "per-file"], default="long")

    p = sub.add_parser("signature", help="truncated signature of a path CSV")
    p.add_argument("--config")
    p.add_argument("--path", required=True, help="CSV with columns time, comp_1..comp_d")
    p.add_argument("--trajectory", type=int, default=0, help="row selector for long-layout files")
    p.add_argument("--level", type=int, default=2)
    p.add_argument("--s", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1, help="accepted for uniformity; the computation is serial")

    p = sub.add_parser("shuffle", help="shuffle algebra queries")
    p.add_argument("op", choices=["product", "factor", "lyndon", "generating", "expand", "reduce"])
    p.add_argument("words", nargs="+")

    p = sub.add_parser("var2d", help="grid rho-variation of a model covariance")
    _common(p)
    p.add_argument("--mesh", type=int, default=8)
    p.add_argument("--rho", type=float)
    p.add_argument("--rect", type=lambda s: tuple(float(v) for v in s.split(",")), help="s,t,u,v")

    for name, help_ in [("wz-rate", "Wong-Zakai convergence rate"), ("euler-rate", "simplified step-N Euler rate")]:
        p = sub.add_parser(name, help=help_)
        _common(p)
        _rate_flags(p)
        p.add_argument("--scheme-n", type=int, default=2)

    p = sub.add_parser("level-rate", help="L2 rate of level-n signature differences")
    _common(p)
    _rate_flags(p)
    p.add_argument("--level", type=int, default=2)
    p.set_defaults(stat="l2")

    p = sub.add_parser("identity-checks", help="Fubini, covariance, Chen and shuffle checks")
    _common(p)
    p.add_argument("--mc", type=int, default=2000)
    return parser


def _convert(action: argparse.Action, value: str):
    if action.type is None:
        return value
    if action.nargs not in (None, "?"):
        return [action.type(v) for v in value.replace(",", " ").split()]
    return action.type(value)


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    cfg = read_config(args.config)
    sub = parser.subcommands[args.command]
    actions = {a.dest: a for a in sub._actions}
    unknown = sorted(set(cfg) - set(actions))
    if unknown:
        raise ContractError(f"unknown config keys: {unknown}")
    # config values become defaults, so explicit flags still win
    sub.set_defaults(**{k: _convert(actions[k], v) for k, v in cfg.items()})
    return parser.parse_args(argv)


def _open_out(path):
    if path:
        return open(path, "w", newline="")
    return _Stdout()


class _Stdout(io.StringIO):
    def close(self):
        sys.stdout.write(self.getvalue())
        super().close()


def write_report(report: RateReport, fh):
    fh.write("k,stat_error,stderr,n_excluded\n")
    for k, e, se, n in report.rows():
        fh.write(f"{k},{e!r},{se!r},{n}\n")
    fh.write(f"#slope={report.slope!r},half_width={report.half_width!r},target={report.target!r}\n")


def _summary(report: RateReport, label: str) -> str:
    status = "PASS" if report.passed else "FAIL"
    lo, hi = report.band
    extra = "; ".join(report.notes)
    return f"{status} {label}: slope={report.slope:.4f} +/- {report.half_width:.4f}, band=[{lo:.2f}, {hi:.2f}]" + (
        f" ({extra})" if extra else ""
    )


def _sample_task(args):
    return sample_array(*args)


def sample_chunked(model, k: int, m: int, seed: int, workers: int = 1) -> np.ndarray:
    """sample_array split into fixed blocks of trajectories, one task each."""
    tasks = [(model, k, range(a, min(m, a + BLOCK)), seed) for a in range(0, m, BLOCK)]
    return np.concatenate(parallel_map(_sample_task, tasks, workers))


def cmd_sample(args) -> int:
    model = _model(args, args.dim)
    X = sample_chunked(model, args.mesh, args.mc, args.seed, args.workers)
    times = np.arange(args.mesh + 1) / args.mesh
    comps = [f"comp_{i + 1}" for i in range(args.dim)]
    if args.layout == "per-file":
        if not args.out:
            raise ContractError("--layout per-file needs --out DIRECTORY")
        os.makedirs(args.out, exist_ok=True)
        for j, x in enumerate(X):
            with open(os.path.join(args.out, f"traj_{j:05d}.csv"), "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["time"] + comps)
                w.writerows([[repr(float(t))] + [repr(float(v)) for v in row] for t, row in zip(times, x)])
        return 0
    with _open_out(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trajectory", "time"] + comps)
        for j, x in enumerate(X):
            w.writerows([[j, repr(float(t))] + [repr(float(v)) for v in row] for t, row in zip(times, x)])
    return 0


def read_path_csv(path, trajectory: int = 0) -> SampledPath:
    """Read a path CSV (time, comp_1..comp_d), optionally in long layout with
    a leading ``trajectory`` column."""
    data = np.atleast_1d(np.genfromtxt(path, delimiter=",", names=True))
    cols = list(data.dtype.names or ())
    if cols and cols[0] == "trajectory":
        data = data[data["trajectory"] == trajectory]
        cols = cols[1:]
        if len(data) == 0:
            raise ContractError(f"no rows for trajectory {trajectory}")
    if not cols or cols[0] != "time":
        raise ContractError("path CSV must have a 'time' column first")
    pts = np.column_stack([data[c] for c in cols[1:]])
    return SampledPath(data["time"], pts)


def cmd_signature(args) -> int:
    x = read_path_csv(args.path, args.trajectory)
    sig = path_signature(x, args.level, args.s, args.t)
    with _open_out(args.out) as fh:
        fh.write(",".join(csv_header(x.dim, args.level)) + "\n")
        fh.write(",".join(repr(float(v)) for v in to_csv_row(sig)) + "\n")
    return 0


def cmd_shuffle(args) -> int:
    if args.op == "product":
        if len(args.words) != 2:
            raise ContractError("product takes two words")
        print(shuffle(*args.words))
    elif args.op == "factor":
        for w in args.words:
            print(w, " ".join(f"({l})^{k}" for l, k in lyndon_factorization(w)))
    elif args.op in ("lyndon", "generating"):
        for w in args.words:
            print(w, " ".join(sorted(generating_set(w))))
    elif args.op == "expand":
        for w in args.words:
            exp = lyndon_shuffle_expansion(w)
            print(f"{exp.product} = {w} + ({exp.correction})")
    else:
        for w in args.words:
            red = reduce_to_lyndon(w)
            terms = [f"{c}*{u}" for u, c in sorted(red.lyndon.items())]
            terms += [f"{c}*({u} sh {v})" for c, u, v in red.shuffles]
            print(f"{w} = " + " + ".join(terms).replace("+ -", "- "))
    return 0


def cmd_var2d(args) -> int:
    model = _model(args, 1)
    rho = model.rho if args.rho is None else args.rho
    t = np.arange(args.mesh + 1) / args.mesh
    res = grid_rho_variation_detail(grid_covariance(model, t), rho, args.rect)
    with _open_out(args.out) as fh:
        fh.write("rho,value,exact\n")
        fh.write(f"{rho!r},{res.value!r},{int(res.exact)}\n")
    return 0


def _spec(args, scheme: str) -> ExperimentSpec:
    return ExperimentSpec(
        model=_model(args, 2),
        meshes=args.meshes,
        ref_mesh=args.ref_mesh,
        mc=args.mc,
        seed=args.seed,
        scheme=scheme,
        N=getattr(args, "scheme_n", 2),
        preset=args.preset,
        stat=args.stat,
    )


def cmd_rate(args) -> int:
    if args.command == "wz-rate":
        report = run_wong_zakai_rate(_spec(args, "wong-zakai"), args.workers, args.band)
    else:
        report = run_simplified_euler_rate(_spec(args, "simplified-euler"), args.workers, args.band)
    with _open_out(args.out) as fh:
        write_report(report, fh)
    print(_summary(report, args.command), file=sys.stderr)
    return 0 if report.passed else 1


def cmd_level_rate(args) -> int:
    model = _model(args, 2)
    reports = run_level_l2_rate(model, args.level, args.meshes, args.ref_mesh, args.mc, args.seed, args.stat,
                                args.workers, args.band)
    report = reports[args.level]
    with _open_out(args.out) as fh:
        write_report(report, fh)
    print(_summary(report, f"level-{args.level}"), file=sys.stderr)
    return 0 if report.passed else 1


def cmd_identity_checks(args) -> int:
    from .checks import run_identity_checks

    results = run_identity_checks(mc=args.mc, seed=args.seed)
    with _open_out(args.out) as fh:
        fh.write("check,passed,detail\n")
        for name, ok, detail in results:
            fh.write(f"{name},{int(ok)},{detail}\n")
    return 0 if all(ok for _, ok, _ in results) else 1


COMMANDS = {
    "sample": cmd_sample,
    "signature": cmd_signature,
    "shuffle": cmd_shuffle,
    "var2d": cmd_var2d,
    "wz-rate": cmd_rate,
    "euler-rate": cmd_rate,
    "level-rate": cmd_level_rate,
    "identity-checks": cmd_identity_checks,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
