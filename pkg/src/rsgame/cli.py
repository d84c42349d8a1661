"""``rsgame`` command line: JSON reports on stdout, diagnostics on stderr."""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .discrete import SolverFailure
from .evaluation import evaluate_pair
from .matrix_game import MatrixGame, solve_matrix_game
from .model import ModelError, load_model, load_strategy, validate
from .nash import solve_nash
from .simulator import estimate_J, simulate_trajectory, tail_diagnostic
from .zero_sum import solve_zero_sum

EXIT_FAIL = 1
EXIT_NOT_CONVERGED = 2
EXIT_SOLVER = 3
EXIT_USAGE = 64

log = logging.getLogger("rsgame")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x).__name__}")


def _clean(x):
    """Non-finite floats become strings so the output stays strict JSON."""
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def _emit(doc, out: str | None = None) -> None:
    text = json.dumps(_clean(doc), indent=2, default=_json_default, allow_nan=False) + "\n"
    if out:
        Path(out).write_text(text)
    sys.stdout.write(text)


def _read_model(source: str):
    path = Path(source)
    if path.exists():
        return load_model(path.read_text())
    name = path.stem
    if name in catalog.names():
        log.info("using built-in model %s", name)
        return catalog.load(name)
    raise UsageError(f"model file not found: {source}")


def _read_strategy(model, source: str | None, player: int):
    from .model import uniform_strategy

    if source is None or source == "uniform":
        return uniform_strategy(model, player)
    path = Path(source)
    if not path.exists():
        raise UsageError(f"strategy file not found: {source}")
    doc = json.loads(path.read_text())
    doc.setdefault("player", player)
    doc["player"] = player  # a uniform file may be reused for both players
    return load_strategy(model, json.dumps(doc), player)[1]


def _zero_sum(args, model) -> bool:
    if args.zero_sum is None:
        args.zero_sum = model.running_cost2 is None
    return args.zero_sum


def cmd_validate(args) -> int:
    path = Path(args.model)
    try:
        model = load_model(path.read_text(), check=False) if path.exists() else _read_model(args.model)
    except ModelError as exc:
        _emit({"schema_version": 1, "status": "fail",
               "checks": [{"name": exc.path or "document", "status": "fail", "detail": str(exc)}]})
        print(f"fail: {exc}", file=sys.stderr)
        return EXIT_FAIL
    report = validate(model)
    _emit(report.to_dict())
    for name, status, detail in report.checks:
        if status != "pass":
            print(f"{status}: {name}: {detail}", file=sys.stderr)
    return 0 if report.status != "fail" else EXIT_FAIL


def cmd_solve_zs(args) -> int:
    model = _read_model(args.model)
    report = solve_zero_sum(model, xtol=args.tol)
    print(f"g = {report.g:.12g}, residual = {report.residual:.3g}, "
          f"gaps = ({report.gap1:.3g}, {report.gap2:.3g}), status = {report.status}",
          file=sys.stderr)
    _emit(report.to_dict(model), args.out)
    return 0


def cmd_solve_nash(args) -> int:
    model = _read_model(args.model)
    init1 = _read_strategy(model, args.init1, 1) if args.init1 else None
    init2 = _read_strategy(model, args.init2, 2) if args.init2 else None
    report = solve_nash(model, init1, init2, damping=args.damping, max_iters=args.max_iters)
    print(f"converged = {report.converged} after {report.iterations} iterations, "
          f"gaps = ({report.gap1:.3g}, {report.gap2:.3g})", file=sys.stderr)
    _emit(report.to_dict(model), args.out)
    return 0 if report.converged else EXIT_NOT_CONVERGED


def cmd_eval(args) -> int:
    model = _read_model(args.model)
    s1 = _read_strategy(model, args.p1, 1)
    s2 = _read_strategy(model, args.p2, 2)
    g = evaluate_pair(model, s1, s2, args.player, zero_sum=_zero_sum(args, model))
    _emit({"schema_version": 1, "g": g, "player": args.player, "zero_sum": args.zero_sum,
           "method": "perron root", "model_hash": model.fingerprint()})
    return 0


def cmd_simulate(args) -> int:
    model = _read_model(args.model)
    s1 = _read_strategy(model, args.p1, 1)
    s2 = _read_strategy(model, args.p2, 2)
    start = model.state_index(args.start) if args.start else 0
    est = estimate_J(model, s1, s2, start, args.t, args.paths, args.seed, args.player,
                     _zero_sum(args, model), workers=args.threads)
    if args.trajectory_csv:
        traj = simulate_trajectory(model, s1, s2, start, args.t, args.seed)
        Path(args.trajectory_csv).write_text(traj.to_csv())
    print(f"J ~ {est.point:.6g}, 99% CI [{est.ci99[0]:.6g}, {est.ci99[1]:.6g}] (approximate)",
          file=sys.stderr)
    _emit(est.to_dict())
    return 0


def cmd_tail(args) -> int:
    model = _read_model(args.model)
    report = tail_diagnostic(model, args.alpha, args.t, args.paths, args.seed)
    print(f"r_alpha = {report.r_alpha}, violations = {report.violations}", file=sys.stderr)
    _emit(report.to_dict())
    return 0


def cmd_oracle(args) -> int:
    from . import oracle

    if args.oracle == "spectral":
        _emit({"schema_version": 1, "spectral_radius": oracle.spectral_radius(json.loads(args.matrix))})
    elif args.oracle == "grid":
        game = MatrixGame(json.loads(args.matrix))
        _emit({"schema_version": 1, "grid_points": args.points,
               "grid_minimax": oracle.grid_minimax(game, args.points),
               "grid_maximin": oracle.grid_maximin(game, args.points),
               "lp_value": solve_matrix_game(game).value})
    else:
        from .transform import build_cost_table

        model = _read_model(args.model)
        s1 = _read_strategy(model, args.p1, 1)
        s2 = _read_strategy(model, args.p2, 2)
        zero_sum = _zero_sum(args, model)
        table = build_cost_table(model, 1 if zero_sum else args.player, args.g, immediate=zero_sum)
        logs = oracle.exact_exp_cost_path(model, table, s1, s2, 0, args.n)
        rate = (logs[-1] - logs[-2]) / model.theta if args.n >= 1 else math.nan
        _emit({"schema_version": 1, "g": args.g, "n": args.n, "log_expectation": logs[-1],
               "growth_increment": rate,
               "perron_growth": oracle.perron_growth(model, table, s1, s2)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rsgame", description="Risk-sensitive semi-Markov games.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $RSGAME_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check a model file")
    v.add_argument("model")
    v.set_defaults(fn=cmd_validate)

    z = sub.add_parser("solve-zs", help="zero-sum value and saddle point")
    z.add_argument("model")
    z.add_argument("--tol", type=float, default=1e-11)
    z.add_argument("--out")
    z.set_defaults(fn=cmd_solve_zs)

    n = sub.add_parser("solve-nash", help="stationary Nash equilibrium")
    n.add_argument("model")
    n.add_argument("--damping", type=float, default=0.5)
    n.add_argument("--max-iters", type=int, default=500)
    n.add_argument("--init1")
    n.add_argument("--init2")
    n.add_argument("--out")
    n.set_defaults(fn=cmd_solve_nash)

    def strategies(sp):
        sp.add_argument("model")
        sp.add_argument("--p1", default="uniform")
        sp.add_argument("--p2", default="uniform")
        sp.add_argument("--player", type=int, choices=(1, 2), default=1)
        sp.add_argument("--zero-sum", action=argparse.BooleanOptionalAction, default=None,
                        help="charge immediate costs, player 2 paying player 1's cost "
                             "(default: on for models without running_cost2)")

    e = sub.add_parser("eval", help="value of a fixed stationary pair")
    strategies(e)
    e.set_defaults(fn=cmd_eval)

    s = sub.add_parser("simulate", help="Monte-Carlo estimate of J")
    strategies(s)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--paths", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--start")
    s.add_argument("--trajectory-csv")
    s.set_defaults(fn=cmd_simulate)

    t = sub.add_parser("tail", help="jump-count tail bound diagnostic")
    t.add_argument("model")
    t.add_argument("--alpha", type=float, default=0.5)
    t.add_argument("--t", type=float, required=True)
    t.add_argument("--paths", type=int, default=10_000)
    t.add_argument("--seed", type=int, default=0)
    t.set_defaults(fn=cmd_tail)

    o = sub.add_parser("oracle", help="brute-force reference computations")
    osub = o.add_subparsers(dest="oracle", required=True, parser_class=_Parser)
    sr = osub.add_parser("spectral", help="Perron root by power iteration")
    sr.add_argument("matrix", help="JSON nested list")
    gr = osub.add_parser("grid", help="grid minimax of a matrix game")
    gr.add_argument("matrix", help="JSON nested list")
    gr.add_argument("--points", type=int, default=1001)
    ec = osub.add_parser("exp-cost", help="finite-horizon exponential cost recursion")
    strategies(ec)
    ec.add_argument("--g", type=float, default=0.0)
    ec.add_argument("--n", type=int, default=200)
    o.set_defaults(fn=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    if args.threads is None and "RSGAME_THREADS" in os.environ:
        args.threads = int(os.environ["RSGAME_THREADS"])
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"rsgame: error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except ModelError as exc:
        print(f"rsgame: invalid model: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except SolverFailure as exc:
        print(f"rsgame: solver failure: {exc}", file=sys.stderr)
        _emit({"schema_version": 1, "error": str(exc),
               "diagnostics": {k: v for k, v in exc.diagnostics.items()
                               if isinstance(v, (int, float, str, list))}})
        return EXIT_SOLVER
    except (OverflowError, ValueError) as exc:
        print(f"rsgame: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
