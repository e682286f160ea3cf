"""``lpdist`` command line: sampling, CLT checks, the exact sphere law, rates and tails.

Exit codes: 0 success, 1 numerical non-convergence or I/O failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

from .clt_theory import report_from_batch, sphere_cdf, sphere_mean, sphere_variance
from .errors import ConvergenceError, DomainError, LpdistError, ResourceError, UnsupportedError
from .ldp_rate import (
    RateCurve,
    cube_rate_detail,
    rate_ball_detail,
    rate_boundary_detail,
    rate_curve,
)
from .reporting import Manifest, RunConfig, fmt_float, write_outputs
from .sampler import DomainKind
from .specfun import as_pindex
from .stats import empirical_moments, run_batch, tail_rates_shared

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
COMMANDS = ("sample", "clt-check", "sphere-exact", "rate", "tail")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures through our exit-code contract
        raise UsageError(message)


def _add_common(sp, *, trials=True, seed=True):
    sp.add_argument("--p", required=True, help="norm index: a real >= 1 or 'inf'")
    sp.add_argument("--n", type=int, required=True, help="dimension")
    sp.add_argument("--domain", default="ball", help="'ball' (interior) or 'boundary'")
    if trials:
        sp.add_argument("--trials", type=int, required=True)
    if seed:
        sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--csv", default=None, help="write CSV here (plus a .manifest.json sidecar)")
    sp.add_argument("--json", default=None, help="write a JSON report here")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lpdist", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _add_common(sub.add_parser("sample", help="draw the normalized distance statistic"))
    _add_common(sub.add_parser("clt-check", help="compare a batch with the CLT constants"))

    sp = sub.add_parser("sphere-exact", help="exact law of the distance on the Euclidean sphere")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--json", default=None)

    sp = sub.add_parser("rate", help="large-deviation rate at one z or on a grid")
    sp.add_argument("--p", required=True)
    sp.add_argument("--domain", default="boundary")
    sp.add_argument("--z", type=float, default=None)
    sp.add_argument("--z-min", type=float, default=None)
    sp.add_argument("--z-max", type=float, default=None)
    sp.add_argument("--steps", type=int, default=None)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--csv", default=None)
    sp.add_argument("--json", default=None)

    sp = sub.add_parser("tail", help="Monte Carlo tail rate -(1/n) ln P(T_n >= z)")
    _add_common(sp)
    sp.add_argument("--z", type=float, nargs="+", required=True)

    sp = sub.add_parser("replay", help="re-run the configuration recorded in a manifest")
    sp.add_argument("manifest")
    sp.add_argument("--csv", default=None)
    sp.add_argument("--json", default=None)
    return ap


def _workers(cli_value: int) -> int:
    env = os.environ.get("LPDIST_WORKERS")
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"LPDIST_WORKERS must be an integer, got {env!r}") from exc
    return cli_value


def validate(cfg: RunConfig) -> RunConfig:
    """Check every field against the preconditions of the target operation."""
    cmd = cfg.command
    if cmd not in COMMANDS:
        raise UsageError(f"unknown command {cmd!r}")
    if cfg.workers is not None and cfg.workers < 1:
        raise UsageError("--workers must be >= 1")
    if cmd == "sphere-exact":
        if cfg.n is None or cfg.n < 2:
            raise UsageError("--n must be an integer >= 2 for sphere-exact")
        if cfg.t is None or math.isnan(cfg.t):
            raise UsageError("--t must be a real number")
        return cfg
    try:
        pi = as_pindex(cfg.p)
    except DomainError as exc:
        raise UsageError(f"--p: {exc} (p must be >= 1)") from exc
    cfg.p = str(pi)
    try:
        dom = DomainKind.parse(cfg.domain)
    except DomainError as exc:
        raise UsageError(f"--domain: {exc}") from exc
    cfg.domain = dom.value
    if cmd in ("sample", "clt-check", "tail"):
        if cfg.n is None or cfg.n < 1:
            raise UsageError("--n must be >= 1")
        if cfg.trials is None or cfg.trials < 1:
            raise UsageError("--trials must be >= 1")
        if cmd == "clt-check" and cfg.trials < 100:
            raise UsageError("--trials must be >= 100 for clt-check")
    if cmd == "tail":
        if not cfg.z or any(not (z >= 0.0) for z in cfg.z):
            raise UsageError("--z values must be >= 0")
    if cmd == "rate":
        if not pi.is_infinite and pi.finite < 2.0:
            raise UsageError(f"--p: LDP requires p >= 2 (got {pi})")
        if pi.is_infinite and dom is DomainKind.BALL_BOUNDARY:
            raise UsageError("--domain: no rate function for the cube boundary; use 'ball'")
        grid = (cfg.z_min, cfg.z_max, cfg.steps)
        if cfg.z is None and None in grid:
            raise UsageError("rate needs --z or all of --z-min, --z-max, --steps")
        if cfg.z is not None and any(v is not None for v in grid):
            raise UsageError("give either --z or a grid, not both")
        if cfg.z is None:
            if not cfg.z_min < cfg.z_max:
                raise UsageError("--z-min must be < --z-max")
            if cfg.steps < 2:
                raise UsageError("--steps must be >= 2")
    return cfg


def parse_config(argv: list[str]) -> RunConfig:
    """Parse and validate ``argv`` into a :class:`RunConfig`; raises :class:`UsageError`."""
    ns = build_parser().parse_args(argv)
    if ns.command == "replay":
        cfg = load_manifest_config(ns.manifest)
        cfg.csv, cfg.json = ns.csv, ns.json
        cfg.workers = _workers(cfg.workers)
        return validate(cfg)
    d = vars(ns)
    z = d.get("z")
    cfg = RunConfig(
        command=ns.command,
        p=d.get("p"),
        n=d.get("n"),
        domain=d.get("domain"),
        trials=d.get("trials"),
        seed=d.get("seed"),
        workers=_workers(d.get("workers", 1) or 1),
        t=d.get("t"),
        z=[z] if isinstance(z, float) else z,
        z_min=d.get("z_min"),
        z_max=d.get("z_max"),
        steps=d.get("steps"),
        csv=d.get("csv"),
        json=d.get("json"),
    )
    return validate(cfg)


def load_manifest_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read manifest {path!r}: {exc}") from exc
    conf = data.get("manifest", data).get("config")
    if not isinstance(conf, dict):
        raise UsageError(f"{path!r} holds no run configuration")
    known = set(RunConfig.__dataclass_fields__)
    return RunConfig(**{k: v for k, v in conf.items() if k in known})


def _short(v: float) -> str:
    return format(v, ".6f").rstrip("0").rstrip(".")


def run_command(cfg: RunConfig, out=None) -> int:
    """Execute a validated config; returns the exit code."""
    out = out or sys.stdout
    t0 = time.perf_counter()
    manifest = Manifest(config=cfg.to_dict())
    status = EXIT_OK

    def finish(result):
        manifest.wall_clock_seconds = time.perf_counter() - t0
        write_outputs(result, manifest, cfg.csv, cfg.json)

    if cfg.command == "sphere-exact":
        n, t = cfg.n, cfg.t
        cdf, mean, var = sphere_cdf(n, t), sphere_mean(n), sphere_variance(n)
        print(f"cdf={_short(cdf)} mean={_short(mean)} var={_short(var)}", file=out)
        finish({"n": n, "t": t, "cdf": cdf, "mean": mean, "var": var})
        return EXIT_OK

    if cfg.command in ("sample", "clt-check", "tail"):
        batch = run_batch(cfg.p, cfg.n, cfg.domain, cfg.trials, cfg.seed, cfg.workers)
        if cfg.command == "sample":
            mom = empirical_moments(batch)
            print(
                f"trials={batch.trials} mean={fmt_float(mom.mean)} variance={fmt_float(mom.variance)}",
                file=out,
            )
            if not cfg.csv and not cfg.json:
                for v in batch.values[:10]:
                    print(fmt_float(float(v)), file=out)
            finish(batch)
        elif cfg.command == "clt-check":
            rep = report_from_batch(batch)
            d = rep.to_dict()
            print(f"center={fmt_float(rep.constants.center)} sigma2={fmt_float(rep.constants.sigma2)}", file=out)
            print(f"mean_z={fmt_float(rep.mean_z)} var_z={fmt_float(rep.var_z)} se_var_z={fmt_float(rep.se_var_z)}", file=out)
            print(f"ks={fmt_float(rep.ks_vs_theory)} ks_alternate={d['ks_alternate']}", file=out)
            finish(rep)
        else:
            rows = [(z, r, h, batch.trials) for z, r, h in tail_rates_shared(batch, cfg.z)]
            for z, r, h, _ in rows:
                print(f"z={fmt_float(z)} rate={fmt_float(r)} hits={h}", file=out)
            finish(rows)
        return EXIT_OK

    # rate
    pi = as_pindex(cfg.p)
    dom = DomainKind.parse(cfg.domain)
    if cfg.z is not None:
        z = cfg.z[0]
        if pi.is_infinite:
            r = cube_rate_detail(z)
            value, arg, ok = r.value, r.t, r.converged
        elif dom is DomainKind.BALL_BOUNDARY:
            r = rate_boundary_detail(pi, z)
            value, arg, ok = r.value, r.inner_argmin, r.converged
        else:
            r = rate_ball_detail(pi, z)
            value, arg, ok = r.value, r.inner_argmin, r.converged
        print(f"z={fmt_float(z)} rate={fmt_float(value)} inner_argmin={fmt_float(arg)} converged={str(ok).lower()}", file=out)
        curve = RateCurve(pi, dom, (z,), (value,), (arg,), (ok,))
    else:
        curve = rate_curve(pi, dom, cfg.z_min, cfg.z_max, cfg.steps, cfg.workers)
        if not cfg.csv and not cfg.json:
            print("z,rate,inner_argmin,converged", file=out)
            for z, r, a, c in curve.rows():
                print(f"{fmt_float(z)},{fmt_float(r)},{fmt_float(a)},{str(c).lower()}", file=out)
    if not all(curve.converged):
        print("warning: some rate evaluations did not converge (see converged column)", file=sys.stderr)
        status = EXIT_NUMERIC
    finish(curve)
    return status


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"lpdist: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run_command(cfg)
    except (UnsupportedError, DomainError) as exc:
        print(f"lpdist: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, ResourceError, LpdistError) as exc:
        print(f"lpdist: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"lpdist: I/O error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
