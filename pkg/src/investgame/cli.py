"""Command-line front end.

Subcommands wire the library into reproducible file-based workflows:

    estimate    price CSV -> market JSON (GBM parameter estimation)
    solve       market/agents/network JSON -> solution JSON + strategy CSVs
    asymptotic  infinite-influence limit report
    simulate    Monte Carlo terminal-wealth moments CSV
    bench       solver-variant accuracy/efficiency table
    report      full scenario reproduction (strategy + wealth data files)

Every command is a pure function of its input files, flags and seed.
Options may also be supplied via ``--config file.json`` whose keys match
the long flag names (underscored); explicit flags win, and unknown keys
are rejected.  Exit codes: 0 success, 2 configuration error, 3 data
error, 4 convergence failure, 10 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import asymptotic_fixed_point, asymptotic_report
from .bench import BenchSpec, rows_to_csv, rows_to_markdown, run_benchmark, scenario_sweep
from .errors import (
    ConfigError,
    ConvergenceError,
    DataError,
    DimensionError,
    DomainError,
    InvestGameError,
    NetworkError,
)
from .market import (
    TRADING_DAYS_PER_YEAR,
    MarketParams,
    estimate_gbm,
    excess_returns,
    five_stock_market,
    load_market,
    read_price_csv,
    save_market,
)
from .montecarlo import SimConfig, simulate, write_samples_csv, write_sim_csv
from .network import homogeneous, load_network
from .solver import AgentParams, SolverConfig, solve
from .strategy import (
    StrategyCoeffs,
    rational_strategy,
    terminal_wealth_dist,
    write_strategy_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4
EXIT_INTERNAL = 10


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc


def load_agents(path) -> list[AgentParams]:
    """Agents JSON: a list (or ``{"agents": [...]}``) of
    ``{"alpha": ..., "theta": ..., "x0": ...}`` objects."""
    obj = _load_json(path)
    if isinstance(obj, dict):
        if set(obj.keys()) != {"agents"}:
            raise DataError(f"{path}: agents JSON must be a list or {{'agents': [...]}}")
        obj = obj["agents"]
    if not isinstance(obj, list) or not obj:
        raise DataError(f"{path}: agents JSON must be a nonempty list")
    agents = []
    for idx, entry in enumerate(obj):
        if not isinstance(entry, dict):
            raise DataError(f"{path}: agent {idx} is not an object")
        unknown = entry.keys() - {"alpha", "theta", "x0"}
        if unknown:
            raise DataError(f"{path}: agent {idx} has unknown keys {sorted(unknown)}")
        if "alpha" not in entry:
            raise DataError(f"{path}: agent {idx} is missing 'alpha'")
        agents.append(
            AgentParams(
                alpha=float(entry["alpha"]),
                theta=float(entry.get("theta", 0.0)),
                x0=float(entry.get("x0", 1.0)),
            )
        )
    return agents


def _apply_config_file(args, parser_opts: set):
    """Fill unset options from ``--config`` JSON; unknown keys rejected."""
    if not getattr(args, "config", None):
        return
    obj = _load_json(args.config)
    if not isinstance(obj, dict):
        raise ConfigError(f"{args.config}: config must be a JSON object")
    unknown = obj.keys() - parser_opts
    if unknown:
        raise ConfigError(f"{args.config}: unknown config keys {sorted(unknown)}")
    for key, value in obj.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _solver_config(args) -> SolverConfig:
    try:
        return SolverConfig(
            eps=float(args.eps if args.eps is not None else 1e-10),
            max_iters=int(args.max_iters if args.max_iters is not None else 200),
            eta_mode=args.eta_mode or "closed_form",
            u_mode=args.u_mode or "exact",
            delta_u=float(args.delta_u) if args.delta_u is not None else None,
            damping=float(args.damping if args.damping is not None else 0.0),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad solver option: {exc}") from exc


def _floats(text, flag):
    try:
        return tuple(float(v) for v in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"{flag} expects comma-separated numbers, got {text!r}") from exc


def _ints(text, flag):
    try:
        return tuple(int(v) for v in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"{flag} expects comma-separated integers, got {text!r}") from exc


def cmd_estimate(args) -> int:
    _apply_config_file(args, {"prices", "rate", "horizon", "days_per_year", "out"})
    if args.prices is None or args.rate is None or args.out is None:
        raise ConfigError("estimate requires --prices, --rate and --out")
    days = float(args.days_per_year if args.days_per_year is not None else TRADING_DAYS_PER_YEAR)
    horizon = float(args.horizon if args.horizon is not None else 5.0)
    panel = read_price_csv(args.prices, dt_obs=1.0 / days)
    mu, Sigma = estimate_gbm(panel)
    nu = excess_returns(mu, float(args.rate))
    market = MarketParams.from_covariance(r=float(args.rate), nu=nu, Sigma=Sigma, T=horizon)
    save_market(market, args.out, extra={"mu": mu.tolist()})
    print(f"estimated {market.m}-asset market from {panel.prices.shape[0]} price rows")
    print(f"  mu    = {np.array2string(mu, precision=6)}")
    print(f"  nu    = {np.array2string(nu, precision=6)}")
    print(f"  kappa = {market.kappa:.6g}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    _apply_config_file(
        args,
        {
            "market",
            "agents",
            "network",
            "eps",
            "max_iters",
            "eta_mode",
            "u_mode",
            "delta_u",
            "damping",
            "grid_points",
            "out_dir",
        },
    )
    if args.market is None or args.agents is None or args.network is None:
        raise ConfigError("solve requires --market, --agents and --network")
    market = load_market(args.market)
    agents = load_agents(args.agents)
    network = load_network(args.network)
    cfg = _solver_config(args)
    out_dir = Path(args.out_dir if args.out_dir is not None else ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        solution = solve(market, agents, network, cfg)
    except ConvergenceError as exc:
        if args.dump_on_fail and exc.partial is not None:
            dump = out_dir / "solution_partial.json"
            with open(dump, "w") as fh:
                json.dump(exc.partial.to_json_dict(), fh, indent=2)
                fh.write("\n")
            print(f"dumped partial iterate to {dump}", file=sys.stderr)
        raise
    with open(out_dir / "solution.json", "w") as fh:
        json.dump(solution.to_json_dict(), fh, indent=2)
        fh.write("\n")
    points = int(args.grid_points if args.grid_points is not None else 101)
    for j, coeffs in enumerate(solution.coeffs):
        write_strategy_csv(out_dir / f"strategy_agent{j}.csv", coeffs, market, points)
    print(
        f"solved {len(agents)}-agent game in {solution.iters} iterations "
        f"(final delta_eta = {solution.residual:.3g})"
    )
    for j, coeffs in enumerate(solution.coeffs):
        print(f"  agent {j}: c = {np.array2string(coeffs.c, precision=6)}")
    print(f"wrote {out_dir / 'solution.json'} and per-agent strategy CSVs")
    return EXIT_OK


def cmd_asymptotic(args) -> int:
    _apply_config_file(args, {"market", "agents", "network", "out"})
    if args.market is None or args.agents is None:
        raise ConfigError("asymptotic requires --market and --agents")
    market = load_market(args.market)
    agents = load_agents(args.agents)
    network = load_network(args.network) if args.network else None
    limit = asymptotic_fixed_point(market, agents, network=network)
    solution = None
    if network is not None and any(a.theta > 0 for a in agents):
        solution = solve(market, agents, network)
    report = asymptotic_report(market, agents, limit, solution)
    print(f"asymptotic risk aversion = {limit.alpha_tilde:.6g}")
    print(f"asymptotic strategy c = {np.array2string(limit.coeffs.c, precision=6)}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    _apply_config_file(
        args,
        {"market", "agents", "solution", "strategies", "paths", "dt", "seed", "threads", "out", "dump_samples"},
    )
    if args.market is None or args.agents is None or args.out is None:
        raise ConfigError("simulate requires --market, --agents and --out")
    market = load_market(args.market)
    agents = load_agents(args.agents)
    if (args.solution is None) == (args.strategies is None):
        raise ConfigError("simulate needs exactly one of --solution or --strategies")
    if args.solution is not None:
        obj = _load_json(args.solution)
        if "coeffs" not in obj:
            raise DataError(f"{args.solution}: no 'coeffs' key in solution JSON")
        strategies = [StrategyCoeffs(c=np.asarray(c, dtype=float)) for c in obj["coeffs"]]
    else:
        obj = _load_json(args.strategies)
        if not isinstance(obj, list):
            raise DataError(f"{args.strategies}: strategies JSON must be a list of coefficient vectors")
        strategies = [StrategyCoeffs(c=np.asarray(c, dtype=float)) for c in obj]
    cfg = SimConfig(
        paths=int(args.paths if args.paths is not None else 100_000),
        dt=float(args.dt) if args.dt is not None else None,
        seed=int(args.seed if args.seed is not None else 0),
        n_jobs=int(args.threads if args.threads is not None else 1),
    )
    result = simulate(strategies, agents, market, cfg)
    write_sim_csv(args.out, result)
    if args.dump_samples:
        write_samples_csv(args.dump_samples, result)
    print(f"simulated {cfg.paths} paths for {len(strategies)} agents")
    for j in range(len(strategies)):
        print(
            f"  agent {j}: mean = {result.mean_hat[j]:.6g} (se {result.stderr_mean[j]:.2g}), "
            f"var = {result.var_hat[j]:.6g} (se {result.stderr_var[j]:.2g})"
        )
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    _apply_config_file(
        args,
        {
            "market",
            "n_values",
            "theta_range",
            "delta_u_values",
            "repeats",
            "seed",
            "eps",
            "out",
            "markdown",
        },
    )
    market = load_market(args.market) if args.market else five_stock_market()
    if args.quick:
        n_values = (10, 50)
    else:
        n_values = _ints(args.n_values, "--n-values") if args.n_values is not None else (10, 50, 100)
    if args.large:
        n_values = tuple(sorted(set(n_values) | {500}))
    theta_range = (
        _floats(args.theta_range, "--theta-range") if args.theta_range is not None else (1e-5, 1e-4)
    )
    if len(theta_range) != 2:
        raise ConfigError("--theta-range expects two comma-separated numbers")
    delta_u_values = (
        _floats(args.delta_u_values, "--delta-u-values")
        if args.delta_u_values is not None
        else (1e-3, 1e-1)
    )
    spec = BenchSpec(
        n_values=n_values,
        theta_range=theta_range,
        delta_u_values=delta_u_values,
        seed=int(args.seed if args.seed is not None else 0),
        repeats=int(args.repeats if args.repeats is not None else 5),
        eps=float(args.eps if args.eps is not None else 1e-10),
    )
    rows = run_benchmark(spec, market)
    print(rows_to_markdown(rows), end="")
    if args.out:
        rows_to_csv(rows, args.out)
        print(f"wrote {args.out}")
    if args.markdown:
        with open(args.markdown, "w") as fh:
            fh.write(rows_to_markdown(rows))
        print(f"wrote {args.markdown}")
    return EXIT_OK


def cmd_report(args) -> int:
    _apply_config_file(
        args,
        {"market", "agents", "network", "thetas", "paths", "dt", "seed", "grid_points", "out_dir"},
    )
    if args.market is None or args.agents is None:
        raise ConfigError("report requires --market and --agents")
    market = load_market(args.market)
    agents = load_agents(args.agents)
    network = load_network(args.network) if args.network else homogeneous(len(agents))
    thetas = (
        list(_floats(args.thetas, "--thetas")) if args.thetas is not None else [0.0, 1e-5, 1e-4]
    )
    out_dir = Path(args.out_dir if args.out_dir is not None else "report")
    strat_dir = out_dir / "strategies"
    strat_dir.mkdir(parents=True, exist_ok=True)
    points = int(args.grid_points if args.grid_points is not None else 101)

    sweep = scenario_sweep(thetas, market, agents, network)
    for j, coeffs in enumerate(sweep.rational):
        write_strategy_csv(strat_dir / f"rational_agent{j}.csv", coeffs, market, points)
    for theta, solution in zip(sweep.thetas, sweep.solutions):
        for j, coeffs in enumerate(solution.coeffs):
            write_strategy_csv(strat_dir / f"theta_{theta:g}_agent{j}.csv", coeffs, market, points)
    write_strategy_csv(strat_dir / "asymptotic.csv", sweep.limit.coeffs, market, points)

    labels = (
        [("rational", sweep.rational)]
        + [(f"theta_{theta:g}", solution.coeffs) for theta, solution in zip(sweep.thetas, sweep.solutions)]
        + [("asymptotic", [sweep.limit.coeffs] * len(agents))]
    )
    import csv as _csv

    with open(out_dir / "wealth_moments.csv", "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["agent", "label", "mean", "variance"])
        for label, coeff_list in labels:
            for j, agent in enumerate(agents):
                dist = terminal_wealth_dist(coeff_list[j], agent.x0, market)
                writer.writerow([j, label, repr(dist.mean), repr(dist.variance)])

    if args.paths is not None and int(args.paths) > 0:
        cfg = SimConfig(
            paths=int(args.paths),
            dt=float(args.dt) if args.dt is not None else None,
            seed=int(args.seed if args.seed is not None else 0),
        )
        with open(out_dir / "mc_moments.csv", "w", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(["agent", "label", "mean", "var", "stderr_mean", "stderr_var"])
            for label, coeff_list in labels:
                result = simulate(coeff_list, agents, market, cfg)
                for j in range(len(agents)):
                    writer.writerow(
                        [
                            j,
                            label,
                            repr(float(result.mean_hat[j])),
                            repr(float(result.var_hat[j])),
                            repr(float(result.stderr_mean[j])),
                            repr(float(result.stderr_var[j])),
                        ]
                    )

    with open(out_dir / "summary.json", "w") as fh:
        json.dump(
            {
                "alpha_tilde": sweep.limit.alpha_tilde,
                "asymptotic_coeffs": sweep.limit.coeffs.c.tolist(),
                "thetas": sweep.thetas,
                "rational_coeffs": [c.c.tolist() for c in sweep.rational],
                "solved_coeffs": {
                    f"{theta:g}": [c.c.tolist() for c in sol.coeffs]
                    for theta, sol in zip(sweep.thetas, sweep.solutions)
                },
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    print(f"asymptotic risk aversion = {sweep.limit.alpha_tilde:.6g}")
    print(f"wrote scenario data under {out_dir}/")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="investgame",
        description="Solvers and experiments for the mutual-influence optimal-investment game.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate GBM market parameters from a price CSV")
    p.add_argument("--prices", help="price CSV: header date,asset1,...,assetM")
    p.add_argument("--rate", type=float, help="riskless interest rate per year")
    p.add_argument("--horizon", type=float, help="investment horizon T in years (default 5)")
    p.add_argument("--days-per-year", dest="days_per_year", type=float, help="observations per year (default 252)")
    p.add_argument("--out", help="output market JSON path")
    p.add_argument("--config", help="JSON file providing any of the above options")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("solve", help="solve for the equilibrium strategies")
    p.add_argument("--market", help="market JSON")
    p.add_argument("--agents", help="agents JSON")
    p.add_argument("--network", help="network JSON or CSV")
    p.add_argument("--eps", type=float, help="fixed-point tolerance on eta (default 1e-10)")
    p.add_argument("--max-iters", dest="max_iters", type=int, help="iteration cap (default 200)")
    p.add_argument("--eta-mode", dest="eta_mode", choices=["closed_form", "quadrature", "sampled", "right_rectangle"])
    p.add_argument("--u-mode", dest="u_mode", choices=["exact", "taylor"])
    p.add_argument("--delta-u", dest="delta_u", type=float, help="sampling interval for sampled eta mode")
    p.add_argument("--damping", type=float, help="relaxation factor in [0,1) (default 0)")
    p.add_argument("--grid-points", dest="grid_points", type=int, help="rows in strategy CSVs (default 101)")
    p.add_argument("--out-dir", dest="out_dir", help="output directory (default .)")
    p.add_argument("--dump-on-fail", dest="dump_on_fail", action="store_true", help="dump the partial iterate on convergence failure")
    p.add_argument("--config", help="JSON file providing any of the above options")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("asymptotic", help="infinite-influence limit and wealth comparison")
    p.add_argument("--market", help="market JSON")
    p.add_argument("--agents", help="agents JSON")
    p.add_argument("--network", help="network JSON or CSV (optional)")
    p.add_argument("--out", help="output report JSON path")
    p.add_argument("--config", help="JSON file providing any of the above options")
    p.set_defaults(func=cmd_asymptotic)

    p = sub.add_parser("simulate", help="Monte Carlo terminal-wealth simulation")
    p.add_argument("--market", help="market JSON")
    p.add_argument("--agents", help="agents JSON")
    p.add_argument("--solution", help="solution JSON from 'solve' (uses its coefficients)")
    p.add_argument("--strategies", help="JSON list of coefficient vectors")
    p.add_argument("--paths", type=int, help="number of Monte Carlo paths (default 100000)")
    p.add_argument("--dt", type=float, help="time step in years (default T/1000)")
    p.add_argument("--seed", type=int, help="RNG seed (default 0)")
    p.add_argument("--threads", type=int, help="worker threads (never changes the output)")
    p.add_argument("--out", help="output moments CSV path")
    p.add_argument("--dump-samples", dest="dump_samples", help="optional raw terminal-sample CSV path")
    p.add_argument("--config", help="JSON file providing any of the above options")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="accuracy/efficiency comparison of solver variants")
    p.add_argument("--market", help="market JSON (default: bundled 5-asset market)")
    p.add_argument("--n-values", dest="n_values", help="comma-separated population sizes (default 10,50,100)")
    p.add_argument("--theta-range", dest="theta_range", help="influence range lo,hi (default 1e-5,1e-4)")
    p.add_argument("--delta-u-values", dest="delta_u_values", help="sampling intervals (default 1e-3,1e-1)")
    p.add_argument("--repeats", type=int, help="timing repeats per cell (default 5)")
    p.add_argument("--seed", type=int, help="instance seed (default 0)")
    p.add_argument("--eps", type=float, help="solver tolerance (default 1e-10)")
    p.add_argument("--quick", action="store_true", help="small sweep (n = 10, 50)")
    p.add_argument("--large", action="store_true", help="include the n = 500 cell (slow)")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--markdown", help="output Markdown table path")
    p.add_argument("--config", help="JSON file providing any of the above options")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="scenario sweep: strategies and wealth across influence levels")
    p.add_argument("--market", help="market JSON")
    p.add_argument("--agents", help="agents JSON")
    p.add_argument("--network", help="network JSON or CSV (default: homogeneous)")
    p.add_argument("--thetas", help="comma-separated influence levels (default 0,1e-5,1e-4)")
    p.add_argument("--paths", type=int, help="Monte Carlo paths for wealth validation (default: skip)")
    p.add_argument("--dt", type=float, help="Monte Carlo step (default T/1000)")
    p.add_argument("--seed", type=int, help="RNG seed (default 0)")
    p.add_argument("--grid-points", dest="grid_points", type=int, help="rows in strategy CSVs (default 101)")
    p.add_argument("--out-dir", dest="out_dir", help="output directory (default report/)")
    p.add_argument("--config", help="JSON file providing any of the above options")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ConfigError, DomainError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, NetworkError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InvestGameError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
