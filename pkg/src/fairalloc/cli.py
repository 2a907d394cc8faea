"""Command-line front end.

Exit codes: 0 success (all requested properties hold / a counterexample was
found), 1 a requested property is false or no counterexample exists, 2 parse
or validation errors, 3 enumeration budget exceeded.
"""

import functools
import json
import sys
from fractions import Fraction
from pathlib import Path

import click

from .characterization import (
    DEFAULT_CONSTANCY_GRID,
    CounterexampleReport,
    constancy_check,
    find_ef1_counterexample,
    fit_log,
)
from .errors import EnumerationBudgetError
from .experiment import ExperimentConfig, experiment_csv, run_experiment
from .fairness import is_ef, is_ef1, is_pareto_optimal
from .model import (
    DEFAULT_ENUMERATION_BUDGET,
    Allocation,
    Profile,
    allocation_utilities,
    dumps_allocation,
    dumps_profile,
    loads_allocation,
    loads_profile,
)
from .welfarist import (
    ExtendedWelfare,
    SolveResult,
    allocation_welfare,
    solve as run_solver,
    welfare_function_from_spec,
)


class RationalParam(click.ParamType):
    """Accepts integers, decimals, and p/q rationals, kept exact."""

    name = "rational"

    def convert(self, value, param, ctx):
        if isinstance(value, Fraction):
            return value
        try:
            return Fraction(str(value))
        except (ValueError, ZeroDivisionError):
            self.fail(f"{value!r} is not an integer, decimal, or p/q rational", param, ctx)


RATIONAL = RationalParam()


def mapped_errors(fn):
    """Translate package exceptions into documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except EnumerationBudgetError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except (ValueError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _read_profile(path: Path) -> Profile:
    try:
        return loads_profile(path.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def _read_allocation(path: Path) -> Allocation:
    try:
        return loads_allocation(path.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def _fraction_text(value: Fraction):
    if value.denominator == 1:
        return str(int(value))
    return f"{value.numerator}/{value.denominator}"


def _welfare_text(welfare: ExtendedWelfare) -> str:
    if welfare.neg_inf_count:
        return (
            f"{welfare.neg_inf_count} agent(s) at -inf, "
            f"finite part {welfare.finite_part:g}"
        )
    return f"{welfare.finite_part:g}"


def _welfare_json(welfare: ExtendedWelfare) -> dict:
    return {
        "neg_inf_count": welfare.neg_inf_count,
        "finite_part": welfare.finite_part,
    }


def _solve_json(profile: Profile, result: SolveResult) -> dict:
    bundles = result.allocation.bundles(profile.n)
    utilities = allocation_utilities(profile, result.allocation)
    return {
        "assignment": list(result.allocation.assignment),
        "bundles": [sorted(bundle) for bundle in bundles],
        "utilities": [_fraction_text(u) for u in utilities],
        "welfare": _welfare_json(result.welfare),
        "maximizer_set_size": result.maximizer_set_size,
    }


def _print_solution(profile: Profile, result: SolveResult, function_label: str):
    bundles = result.allocation.bundles(profile.n)
    utilities = allocation_utilities(profile, result.allocation)
    click.echo(f"function: {function_label}")
    click.echo("allocation:")
    for agent in range(profile.n):
        goods = ", ".join(str(g) for g in sorted(bundles[agent])) or "-"
        click.echo(
            f"  agent {agent}: goods [{goods}]  utility {_fraction_text(utilities[agent])}"
        )
    click.echo(f"welfare: {_welfare_text(result.welfare)}")
    click.echo(f"maximizers: {result.maximizer_set_size}")


budget_option = click.option(
    "--budget",
    type=int,
    default=DEFAULT_ENUMERATION_BUDGET,
    show_default=True,
    help="Abort (exit 3) if a scan needs more allocations than this.",
)
format_option = click.option(
    "--format",
    "fmt",
    type=click.Choice(["text", "json"]),
    default="text",
    show_default=True,
    help="Report style.",
)
function_option = click.option(
    "--f",
    "spec",
    default="log",
    show_default=True,
    help="Welfare function: log | log:a,b | affine:a,b | power:p | exp | expr:'...'.",
)


@click.group()
def main():
    """Fair allocation of indivisible goods: welfarist solvers, EF/EF1/PO
    checks, and a welfare-function characterization lab."""


@main.command()
@click.option(
    "--profile",
    "profile_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="Profile JSON file.",
)
@function_option
@budget_option
@format_option
@mapped_errors
def solve(profile_path, spec, budget, fmt):
    """Compute a welfare-maximizing allocation for a profile."""
    profile = _read_profile(profile_path)
    f = welfare_function_from_spec(spec)
    result = run_solver(profile, f, budget=budget)
    if fmt == "json":
        payload = {"function": str(f), **_solve_json(profile, result)}
        click.echo(json.dumps(payload, indent=2))
    else:
        _print_solution(profile, result, str(f))


@main.command()
@click.option(
    "--profile",
    "profile_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
)
@click.option(
    "--allocation",
    "allocation_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
)
@click.option("--ef", "want_ef", is_flag=True, help="Check envy-freeness.")
@click.option("--ef1", "want_ef1", is_flag=True, help="Check envy-freeness up to one good.")
@click.option("--po", "want_po", is_flag=True, help="Check Pareto optimality.")
@budget_option
@format_option
@mapped_errors
def check(profile_path, allocation_path, want_ef, want_ef1, want_po, budget, fmt):
    """Check fairness and efficiency of an allocation (all three by default).

    Exits 0 when every requested property holds, 1 when any fails.
    """
    profile = _read_profile(profile_path)
    allocation = _read_allocation(allocation_path)
    if not (want_ef or want_ef1 or want_po):
        want_ef = want_ef1 = want_po = True

    all_hold = True
    payload = {}
    lines = []
    if want_ef1:
        verdict = is_ef1(profile, allocation)
        all_hold &= verdict.holds
        payload["ef1"] = {
            "holds": verdict.holds,
            "violations": [
                {
                    "envier": v.envier,
                    "envied": v.envied,
                    "own_utility": _fraction_text(v.own_utility),
                    "removal_gaps": [
                        [good, _fraction_text(remaining)]
                        for good, remaining in v.removal_gaps
                    ],
                }
                for v in verdict.violations
            ],
        }
        lines.append(f"EF1: {'holds' if verdict.holds else 'fails'}")
        for v in verdict.violations:
            lines.append(
                f"  agent {v.envier} envies agent {v.envied} "
                f"(own utility {_fraction_text(v.own_utility)}):"
            )
            for good, remaining in v.removal_gaps:
                lines.append(
                    f"    without good {good} the bundle is still worth "
                    f"{_fraction_text(remaining)}"
                )
    if want_ef:
        verdict = is_ef(profile, allocation)
        all_hold &= verdict.holds
        payload["ef"] = {
            "holds": verdict.holds,
            "violations": [
                {
                    "envier": v.envier,
                    "envied": v.envied,
                    "own_utility": _fraction_text(v.own_utility),
                    "envied_utility": _fraction_text(v.envied_utility),
                }
                for v in verdict.violations
            ],
        }
        lines.append(f"EF: {'holds' if verdict.holds else 'fails'}")
        for v in verdict.violations:
            lines.append(
                f"  agent {v.envier} values agent {v.envied}'s bundle at "
                f"{_fraction_text(v.envied_utility)}, own bundle at "
                f"{_fraction_text(v.own_utility)}"
            )
    if want_po:
        verdict = is_pareto_optimal(profile, allocation, budget=budget)
        all_hold &= verdict.optimal
        payload["po"] = {"optimal": verdict.optimal}
        if verdict.dominator is not None:
            payload["po"]["dominator"] = list(verdict.dominator.assignment)
        lines.append(f"PO: {'holds' if verdict.optimal else 'fails'}")
        if verdict.dominator is not None:
            lines.append(
                f"  dominated by assignment {list(verdict.dominator.assignment)}"
            )

    if fmt == "json":
        click.echo(json.dumps(payload, indent=2))
    else:
        for line in lines:
            click.echo(line)
    if not all_hold:
        sys.exit(1)


def _counterexample_json(report: CounterexampleReport) -> dict:
    return {
        "k": report.k,
        "agent0_value": _fraction_text(report.agent0_value),
        "agent1_value": _fraction_text(report.agent1_value),
        "discount": _fraction_text(report.discount),
        "profile": json.loads(dumps_profile(report.profile)),
        "solver": _solve_json(report.profile, report.solve),
        "ef1_holds": report.ef1.holds,
        "all_maximizers_violate": report.all_maximizers_violate,
    }


@main.command()
@function_option
@click.option("--k-max", type=int, default=5, show_default=True)
@click.option("--grid-min", type=RATIONAL, default=Fraction(1, 2), show_default="1/2")
@click.option("--grid-max", type=RATIONAL, default=Fraction(5), show_default="5")
@click.option("--grid-step", type=RATIONAL, default=Fraction(1, 2), show_default="1/2")
@click.option(
    "--epsilon",
    type=RATIONAL,
    default=None,
    help="Override the discount instead of halving from z/2.",
)
@click.option(
    "--profile-out",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Write the constructed profile JSON here.",
)
@click.option(
    "--allocation-out",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Write the solver's allocation JSON here.",
)
@click.option(
    "--report-out",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Write the full report JSON here.",
)
@budget_option
@format_option
@mapped_errors
def counterexample(
    spec, k_max, grid_min, grid_max, grid_step, epsilon,
    profile_out, allocation_out, report_out, budget, fmt,
):
    """Build a profile on which every welfare maximizer for --f fails EF1.

    Exits 0 when a verified instance is found, 1 when none exists on the
    searched grid (as for log-affine functions).
    """
    f = welfare_function_from_spec(spec)
    if grid_step <= 0 or grid_min <= 0 or grid_max < grid_min:
        raise ValueError("the grid needs 0 < min <= max and a positive step")
    grid = []
    point = grid_min
    while point <= grid_max:
        grid.append(point)
        point += grid_step
    report = find_ef1_counterexample(
        f, k_max=k_max, grid=grid, epsilon=epsilon, budget=budget
    )
    if report is None:
        click.echo(
            f"no counterexample found for {f} with k up to {k_max} "
            f"on the grid [{_fraction_text(grid_min)}, {_fraction_text(grid_max)}] "
            f"step {_fraction_text(grid_step)}"
        )
        sys.exit(1)
    if profile_out is not None:
        profile_out.write_text(dumps_profile(report.profile), encoding="utf-8")
    if allocation_out is not None:
        allocation_out.write_text(
            dumps_allocation(report.solve.allocation), encoding="utf-8"
        )
    if report_out is not None:
        report_out.write_text(
            json.dumps(_counterexample_json(report), indent=2) + "\n", encoding="utf-8"
        )
    if fmt == "json":
        click.echo(json.dumps(_counterexample_json(report), indent=2))
        return
    click.echo(f"function: {f}")
    click.echo(
        f"k={report.k}, y={_fraction_text(report.agent0_value)}, "
        f"z={_fraction_text(report.agent1_value)}, "
        f"discount={_fraction_text(report.discount)}"
    )
    click.echo(f"profile: {report.profile.n} agents, {report.profile.m} goods")
    for i, row in enumerate(report.profile.utilities):
        click.echo(f"  agent {i} values: {', '.join(_fraction_text(v) for v in row)}")
    _print_solution(report.profile, report.solve, str(f))
    click.echo("EF1: fails for every welfare-maximizing allocation")


@main.command("lemma-check")
@function_option
@click.option("--k-min", type=int, default=1, show_default=True)
@click.option("--k-max", type=int, default=5, show_default=True)
@click.option(
    "--grid",
    "grid_text",
    default=",".join(str(g) for g in DEFAULT_CONSTANCY_GRID),
    show_default=True,
    help="Comma-separated positive sample points.",
)
@click.option(
    "--tolerance",
    type=RATIONAL,
    default=Fraction(1, 10**9),
    show_default="1e-9",
)
@click.option(
    "--fit-k-max",
    type=int,
    default=50,
    show_default=True,
    help="Largest k used for the log-affine parameter fit.",
)
@format_option
@mapped_errors
def lemma_check(spec, k_min, k_max, grid_text, tolerance, fit_k_max, fmt):
    """Test whether --f behaves log-affinely.

    Samples the scaled differences f((k+1)x) - f(kx) over the grid for each
    k; they are constant in x exactly for f(x) = a*ln(x) + b.  When every k
    passes, the parameters are recovered from the constancy levels.
    """
    f = welfare_function_from_spec(spec)
    if k_min < 1 or k_max < k_min:
        raise ValueError("need 1 <= k-min <= k-max")
    tolerance = float(tolerance)
    grid = [float(Fraction(piece.strip())) for piece in grid_text.split(",") if piece.strip()]
    reports = [constancy_check(f, k, grid, tolerance) for k in range(k_min, k_max + 1)]
    outcome = fit_log(f, k_max=fit_k_max, grid=grid, tolerance=tolerance)

    if fmt == "json":
        payload = {
            "function": str(f),
            "constancy": [
                {
                    "k": r.k,
                    "spread": r.spread,
                    "constant": r.constant,
                    "level": r.level,
                }
                for r in reports
            ],
            "log_affine": outcome.is_log_affine,
        }
        if outcome.fit is not None:
            payload["fit"] = {
                "a": outcome.fit.a,
                "b": outcome.fit.b,
                "max_residual": outcome.fit.max_residual,
            }
        else:
            payload["first_failure"] = {
                "k": outcome.failed.k,
                "spread": outcome.failed.spread,
            }
        click.echo(json.dumps(payload, indent=2))
        return

    click.echo(f"function: {f}")
    for r in reports:
        if r.constant:
            click.echo(f"k={r.k}: constant (spread {r.spread:.3g}, level {r.level:.10g})")
        else:
            click.echo(f"k={r.k}: NOT constant (spread {r.spread:.6g})")
    if outcome.fit is not None:
        click.echo(
            f"log-affine fit: a={outcome.fit.a:.10g} b={outcome.fit.b:.10g} "
            f"max residual {outcome.fit.max_residual:.3g}"
        )
    else:
        click.echo(
            f"not log-affine: first failure at k={outcome.failed.k} "
            f"(spread {outcome.failed.spread:.6g})"
        )


@main.command()
@click.option("--count", type=int, default=100, show_default=True)
@click.option("--agents", type=int, default=2, show_default=True)
@click.option("--goods", type=int, default=6, show_default=True)
@click.option("--max-utility", type=int, default=9, show_default=True)
@click.option("--min-utility", type=int, default=0, show_default=True)
@click.option(
    "--require-positive-rows",
    is_flag=True,
    help="Resample any all-zero utility row.",
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--f",
    "specs",
    multiple=True,
    default=("log",),
    show_default=True,
    help="Welfare function; repeatable.",
)
@click.option(
    "--checks",
    default="ef1,ef,po",
    show_default=True,
    help="Comma-separated subset of ef1, ef, po.",
)
@click.option(
    "--output",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Write the CSV here instead of stdout.",
)
@budget_option
@mapped_errors
def experiment(
    count, agents, goods, max_utility, min_utility, require_positive_rows,
    seed, specs, checks, output, budget,
):
    """Run seeded random-profile experiments and emit one CSV row per
    (profile, function)."""
    functions = tuple(welfare_function_from_spec(spec) for spec in specs)
    wanted = tuple(piece.strip() for piece in checks.split(",") if piece.strip())
    config = ExperimentConfig(
        count=count,
        agents=agents,
        goods=goods,
        max_utility=max_utility,
        functions=functions,
        seed=seed,
        min_utility=min_utility,
        require_positive_rows=require_positive_rows,
        checks=wanted,
        budget=budget,
    )
    text = experiment_csv(run_experiment(config))
    if output is not None:
        output.write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()
