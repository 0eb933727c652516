"""Command-line front end.

Subcommands mirror the service routes: plan, factorize, simulate, mp, mc,
tiles, plus serve to expose them over HTTP. All data commands go through the
Client, which runs in-process unless --server points at a URL, so the CLI
stays a thin shell over the same request/response layer the service uses.

Exit codes: 0 success, 2 input or validation failure, 3 infeasible request,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys


def _params_args(sub, *, tile_required=True):
    sub.add_argument("-K", type=int, required=True, help="rows of the demand matrix")
    sub.add_argument("-L", type=int, required=True, help="columns of the demand matrix")
    sub.add_argument("-T", type=int, default=1, help="shots per server")
    sub.add_argument("-D", type=int, required=tile_required, help="computation cost Delta (rows per tile)")
    sub.add_argument("-G", type=int, required=tile_required, help="communication cost Gamma (columns per tile)")
    sub.add_argument("-N", type=str, default=None, help="server count (plan default: the constructive optimum)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tessfact",
        description="Tessellation planner, demand-matrix factorizer, protocol "
                    "simulator and spectral error predictor for distributed "
                    "linear function computation.")
    parser.add_argument("--server", default=None, metavar="URL",
                        help="send requests to a running service instead of computing in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="bounds, capacity and tessellation summary")
    _params_args(p, tile_required=False)
    p.add_argument("--sweep", action="store_true",
                   help="CSV over all (Delta, Gamma) divisor pairs of (K, L)")
    p.add_argument("--format", choices=["json", "table", "csv"], default=None)
    p.add_argument("--out", default=None, help="write output here instead of stdout")

    p = sub.add_parser("factorize", help="factor F into D (communication) and E (computing)")
    p.add_argument("F", nargs="?", default=None, metavar="F.csv",
                   help="demand matrix CSV; omitted: draw standard normal entries with --seed")
    _params_args(p)
    p.add_argument("--mode", choices=["lossless", "lossy"], default="lossless")
    p.add_argument("--allow-dropped", action="store_true",
                   help="lossy only: accept budgets that starve some tiles to rank 0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory (D.csv, E.csv, tiles.json, report.json, scheme.json)")

    p = sub.add_parser("simulate", help="run the encode/compute/decode pipeline on a scheme")
    p.add_argument("descriptor", metavar="scheme.json")
    p.add_argument("w", nargs="?", default=None, metavar="w.csv",
                   help="input vector CSV; omitted: draw standard normal entries with --seed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write the report here instead of stdout")

    p = sub.add_parser("mp", help="evaluate the limiting spectral law")
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="shape ratio Delta/Gamma")
    p.add_argument("--sigma-sq", type=float, default=1.0)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--pdf", type=float, metavar="X")
    g.add_argument("--cdf", type=float, metavar="X")
    g.add_argument("--inv", type=float, metavar="P")
    g.add_argument("--phi", type=float, metavar="T", help="incomplete first moment up to T")
    p.add_argument("--r", type=float, default=None, help="lower limit for --phi (default: lower edge)")

    p = sub.add_parser("mc", help="Monte Carlo error vs the analytic prediction")
    _params_args(p)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dist", choices=["normal", "uniform"], default="normal")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)

    p = sub.add_parser("tiles", help="draw the tessellation")
    _params_args(p)
    p.add_argument("--format", choices=["ascii", "svg"], default="ascii")
    p.add_argument("--out", default=None)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _emit(text: str, out: str | None):
    if out is None:
        print(text)
    else:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _single_n(raw: str | None) -> int | None:
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        from .core import ParameterError

        raise ParameterError(f"-N expects an integer, got {raw!r}") from None


def _n_list(raw: str | None) -> list[int] | None:
    if raw is None:
        return None
    from .core import ParameterError

    try:
        return [int(part) for part in raw.split(",") if part != ""]
    except ValueError:
        raise ParameterError(f"-N expects integers (comma-separated to sweep), got {raw!r}") from None


def _plan_table(resp) -> str:
    rows = [
        ("nUpper", str(resp.nUpper)),
        ("nLower", f"{resp.nLower} ({resp.nLowerFloat:.6g})"),
        ("tileCount", str(resp.tileCount)),
        ("capacity", f"{resp.capacity} ({resp.capacityFloat:.6g})"),
        ("capacityCase", resp.capacityCase),
        ("exactness", resp.exactness),
        ("gapRatio", f"{resp.gapRatio} ({resp.gapRatioFloat:.6g})"),
        ("families", " ".join(f"{k}={v}" for k, v in sorted(resp.familyCounts.items()))),
    ]
    t = resp.tradeoff
    if t.relation:
        rows.append(("tradeoff", f"{t.case}: {t.relation}"))
    elif t.points:
        pts = ", ".join(f"({g}, {d})" for g, d in t.points)
        rows.append(("tradeoff", f"{t.case}: {pts}"))
    else:
        rows.append(("tradeoff", t.case))
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def cmd_plan(args, client) -> int:
    from .core import ParameterError
    from .models import PlanRequest

    if not args.sweep and (args.D is None or args.G is None):
        raise ParameterError("plan needs -D and -G (or --sweep to grid over divisors)")
    if args.sweep:
        lines = ["Delta,Gamma,gamma,delta,nUpper,nLower,tileCount,capacity,capacityCase,exactness,gapRatio"]
        for delta in _divisors(args.K):
            for gamma in _divisors(args.L):
                resp = client.plan(PlanRequest(K=args.K, L=args.L, T=args.T,
                                               Delta=delta, Gamma=gamma, N=_single_n(args.N)))
                lines.append(",".join([
                    str(delta), str(gamma),
                    f"{gamma / args.L:.17g}", f"{delta / args.K:.17g}",
                    str(resp.nUpper), f"{resp.nLowerFloat:.17g}", str(resp.tileCount),
                    f"{resp.capacityFloat:.17g}", resp.capacityCase, resp.exactness,
                    f"{resp.gapRatioFloat:.17g}",
                ]))
        _emit("\n".join(lines), args.out)
        return 0
    resp = client.plan(PlanRequest(K=args.K, L=args.L, T=args.T, Delta=args.D,
                                   Gamma=args.G, N=_single_n(args.N)))
    blob = json.dumps(resp.model_dump(), indent=2)
    if args.format == "json":
        _emit(blob, args.out)
    elif args.format == "table":
        _emit(_plan_table(resp), args.out)
    else:
        _emit(blob + "\n\n" + _plan_table(resp), args.out)
    return 0


def cmd_factorize(args, client) -> int:
    import os

    import numpy as np

    from . import capacity
    from .core import SchemeParams, read_matrix_file, write_matrix_file
    from .models import FactorizeRequest, ParamsModel, SchemeDescriptor

    n = _single_n(args.N)
    if n is None:
        probe = SchemeParams(K=args.K, L=args.L, N=1, T=args.T, Delta=args.D, Gamma=args.G)
        n = capacity.n_opt_upper(probe)
    params = ParamsModel(K=args.K, L=args.L, N=n, T=args.T, Delta=args.D, Gamma=args.G)

    os.makedirs(args.out, exist_ok=True)
    if args.F is None:
        rng = np.random.default_rng(args.seed)
        F = rng.standard_normal((args.K, args.L))
        f_path = os.path.join(args.out, "F.csv")
        write_matrix_file(f_path, F)
    else:
        F = read_matrix_file(args.F)
        f_path = os.path.abspath(args.F)

    resp = client.factorize(FactorizeRequest(
        params=params, F=F.tolist(), mode=args.mode, N=n,
        allowDropped=args.allow_dropped))

    d_path = os.path.join(args.out, "D.csv")
    e_path = os.path.join(args.out, "E.csv")
    write_matrix_file(d_path, np.asarray(resp.D))
    write_matrix_file(e_path, np.asarray(resp.E))
    tiles_blob = [t.model_dump() for t in resp.tiles]
    with open(os.path.join(args.out, "tiles.json"), "w") as fh:
        json.dump(tiles_blob, fh, indent=2)
        fh.write("\n")
    fro_sq = float(np.sum(F * F))
    report = {
        "params": resp.params.model_dump(),
        "mode": resp.mode,
        "residualSq": resp.residualSq,
        "relativeResidual": (resp.residualSq / fro_sq) if fro_sq > 0 else 0.0,
        "gammaMeasured": resp.gammaMeasured,
        "deltaMeasured": resp.deltaMeasured,
        "serversUsed": resp.serversUsed,
        "withinGuarantees": resp.withinGuarantees,
        "droppedTiles": resp.droppedTiles,
    }
    with open(os.path.join(args.out, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    descriptor = SchemeDescriptor(
        params=resp.params, tiles=resp.tiles, mode=resp.mode,
        files={"D": os.path.abspath(d_path), "E": os.path.abspath(e_path), "F": f_path})
    with open(os.path.join(args.out, "scheme.json"), "w") as fh:
        fh.write(descriptor.model_dump_json(indent=2))
        fh.write("\n")
    print(json.dumps(report, indent=2))
    return 0


def cmd_simulate(args, client) -> int:
    import os

    import numpy as np

    from .core import ParameterError, read_matrix_file, read_vector_file
    from .models import SchemeDescriptor, SimulateRequest

    with open(args.descriptor) as fh:
        descriptor = SchemeDescriptor.model_validate_json(fh.read())
    for key in ("D", "E", "F"):
        path = descriptor.files.get(key)
        if path is None or not os.path.exists(path):
            raise ParameterError(f"descriptor file {key} missing: {path!r}")
    D = read_matrix_file(descriptor.files["D"])
    E = read_matrix_file(descriptor.files["E"])
    F = read_matrix_file(descriptor.files["F"])
    if args.w is None:
        rng = np.random.default_rng(args.seed)
        w = rng.standard_normal(descriptor.params.L)
    else:
        w = read_vector_file(args.w)
    resp = client.simulate(SimulateRequest(
        params=descriptor.params, D=D.tolist(), E=E.tolist(), F=F.tolist(),
        w=np.asarray(w).ravel().tolist(), tiles=descriptor.tiles))
    blob = json.dumps(resp.model_dump(), indent=2)
    if args.out is None:
        print(blob)
    else:
        with open(args.out, "w") as fh:
            fh.write(blob + "\n")
        summary = {k: resp.model_dump()[k] for k in
                   ("errorE", "gammaMeasured", "deltaMeasured")}
        print(json.dumps(summary, indent=2))
    return 0


def cmd_mp(args, client) -> int:
    from .models import MPRequest

    if args.pdf is not None:
        op, x = "pdf", args.pdf
    elif args.cdf is not None:
        op, x = "cdf", args.cdf
    elif args.inv is not None:
        op, x = "inv", args.inv
    else:
        op, x = "phi", args.phi
    resp = client.mp_eval(MPRequest(lam=args.lam, sigmaSq=args.sigma_sq, op=op,
                                    x=x, r=args.r))
    print(f"{resp.value:.12g}")
    return 0


def cmd_mc(args, client) -> int:
    from .core import ParameterError
    from .models import MCRequest, ParamsModel

    ns = _n_list(args.N)
    if not ns:
        raise ParameterError("mc needs -N (one server count, or a comma-separated sweep)")
    params = ParamsModel(K=args.K, L=args.L, N=ns[0], T=args.T, Delta=args.D, Gamma=args.G)
    resp = client.mc(MCRequest(params=params, Ns=ns, trials=args.trials,
                               seed=args.seed, dist=args.dist))
    if args.format == "json":
        _emit(json.dumps([r.model_dump() for r in resp.rows], indent=2), args.out)
    else:
        lines = ["N,eps_pred,eps_emp,stderr,trials,seed"]
        for r in resp.rows:
            lines.append(f"{r.N},{r.eps_pred:.17g},{r.eps_emp:.17g},"
                         f"{r.stderr:.17g},{r.trials},{r.seed}")
        _emit("\n".join(lines), args.out)
    return 0


def cmd_tiles(args, client) -> int:
    from .models import TilesRequest

    resp = client.tiles(TilesRequest(K=args.K, L=args.L, Delta=args.D,
                                     Gamma=args.G, T=args.T))
    _emit(resp.svg if args.format == "svg" else resp.ascii_art, args.out)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    from .core import InfeasibleError, NumericalError, ParameterError

    try:
        if args.command == "serve":
            return cmd_serve(args)
        from .client import Client

        client = Client(base_url=args.server)
        if args.command == "plan":
            return cmd_plan(args, client)
        if args.command == "factorize":
            return cmd_factorize(args, client)
        if args.command == "simulate":
            return cmd_simulate(args, client)
        if args.command == "mp":
            return cmd_mp(args, client)
        if args.command == "mc":
            return cmd_mc(args, client)
        if args.command == "tiles":
            return cmd_tiles(args, client)
        raise AssertionError(f"unhandled command {args.command}")
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
