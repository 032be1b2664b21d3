"""
The four commands: growth, fit, check and gauss.

Each command takes a validated ExperimentConfig, writes its report files into
the output directory and returns a process exit code.
"""

import csv
import json
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from rep_growth.cli.args import create_cli_parser
from rep_growth.cli.config import ConfigError, ExperimentConfig, load_config
from rep_growth.core.charring import apply_root_difference, weyl_invariance_violation
from rep_growth.core.gaussian_asymptotics import (
    DegenerateModelError,
    FitError,
    UnsupportedError,
    compare_report,
    fit_exponent,
    weight_moments,
)
from rep_growth.core.logger import logger, set_verbose
from rep_growth.core.schemas import (
    CheckReport,
    FitVerdict,
    InvariantStatus,
    MomentsReport,
    SeriesSource,
)
from rep_growth.core.tensor_growth import (
    GrowthRow,
    GrowthSeries,
    NotACharacterError,
    RepSpec,
    conservation_total,
    extract_multiplicities,
    find_anti_invariance_violation,
    growth_series,
    peel_oracle,
    power_characters,
    synthetic_series,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_TRUNCATED = 2
EXIT_INVARIANT = 3
EXIT_DEGENERATE = 4

MAX_CHECK_N = 6
# anti-invariance is checked exhaustively up to this support size, sampled above
MAX_EXHAUSTIVE_SUPPORT = 20_000
SAMPLE_SIZE = 5_000

SERIES_COLUMNS = ["n", "b_exact", "b_normalized", "support_size", "seconds"]
COMPARE_COLUMNS = ["kind", "n", "weight", "exact", "approx", "ratio"]


def format_float(value: float) -> str:
    """Fixed 12-digit scientific formatting used in every CSV"""
    if math.isnan(value):
        return "nan"
    return f"{value:.12e}"


def _round_floats(value: Any) -> Any:
    if isinstance(value, float):
        return value if not math.isfinite(value) else float(f"{value:.12g}")
    if isinstance(value, dict):
        return {k: _round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(v) for v in value]
    return value


def save_json_to_file(data: Union[BaseModel, Dict[str, Any]], output_path: Path) -> None:
    """
    Save a report as JSON with sorted keys and floats rounded to 12 significant digits.

    Args:
        data: Pydantic report or plain dictionary
        output_path (Path): Destination file
    """
    if isinstance(data, BaseModel):
        data = data.model_dump(by_alias=True)
    with open(output_path, "w") as f:
        json.dump(_round_floats(data), f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"JSON saved to {output_path}")


def write_series_csv(series: GrowthSeries, output_path: Path, timing: bool = False) -> None:
    with open(output_path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SERIES_COLUMNS)
        for row in series.rows:
            writer.writerow(
                [
                    row.n,
                    "" if row.b_exact is None else row.b_exact,
                    format_float(row.b_normalized),
                    row.support_size,
                    f"{row.seconds:.6f}" if timing else "",
                ]
            )
    logger.info(f"Series saved to {output_path}")


def read_series_csv(spec: RepSpec, path: Path) -> GrowthSeries:
    """Read a series.csv written by ``write_series_csv``"""
    series = GrowthSeries(spec=spec, mode="exact")
    with open(path, newline="") as f:
        for record in csv.DictReader(f):
            b_exact = int(record["b_exact"]) if record["b_exact"] else None
            if b_exact is None:
                series.mode = "normalized"
            series.rows.append(
                GrowthRow(
                    n=int(record["n"]),
                    b_exact=b_exact,
                    b_normalized=float(record["b_normalized"]),
                    support_size=int(record["support_size"]),
                    seconds=float(record["seconds"]) if record["seconds"] else 0.0,
                )
            )
    return series


def series_source(config: ExperimentConfig) -> SeriesSource:
    spec = config.spec()
    return SeriesSource(
        group=str(spec.datum.cartan_type),
        rep=sorted((list(hw), m) for hw, m in spec.summands),
        mode=config.mode,
    )


def reusable_series(config: ExperimentConfig, output_dir: Path) -> Optional[GrowthSeries]:
    """
    Read series.csv from the output directory if series.json says it was
    computed for the same group and summands as ``config``.

    Returns:
        Optional[GrowthSeries]: The stored series, or None when it must be recomputed
    """
    series_path = output_dir / "series.csv"
    source_path = output_dir / "series.json"
    if not series_path.exists():
        return None
    if not source_path.exists():
        logger.info(f"No {source_path.name} next to {series_path}, recomputing")
        return None
    try:
        recorded = SeriesSource.model_validate_json(source_path.read_text())
    except ValidationError as e:
        logger.warning(f"Unreadable {source_path}: {str(e)}")
        return None
    expected = series_source(config)
    if (recorded.group, recorded.rep) != (expected.group, expected.rep):
        logger.warning(
            f"{series_path} was computed for {recorded.group} {recorded.rep}, "
            f"not {expected.group} {expected.rep}; recomputing"
        )
        return None
    return read_series_csv(config.spec(), series_path)


def _prepare_output(config: ExperimentConfig) -> Path:
    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    return output_dir


def cmd_growth(config: ExperimentConfig) -> int:
    """Compute b_n for n = 1..n_max and write series.csv"""
    output_dir = _prepare_output(config)
    series = growth_series(
        config.spec(),
        config.n_max,
        mode=config.mode,
        backend=config.backend,
        memory_budget_bytes=config.memory_budget_bytes,
        timing=config.timing,
    )
    write_series_csv(series, output_dir / "series.csv", config.timing)
    save_json_to_file(series_source(config), output_dir / "series.json")
    if series.truncated:
        logger.warning(f"Series truncated after n={series.rows[-1].n}")
        return EXIT_TRUNCATED
    return EXIT_OK


def default_window(n_max: int) -> tuple:
    return (max(1, n_max // 4), n_max)


def _covers(series: GrowthSeries, window: tuple) -> bool:
    values = series.normalized()
    return all(n in values for n in range(window[0], window[1] + 1))


def cmd_fit(config: ExperimentConfig) -> int:
    """
    Fit the exponent of b_n (dim V)^-n over the window and write fit.json.

    The series comes from ``synthetic`` if configured, else from series.csv in
    the output directory when it was computed for this group and
    representation and covers the window, else it is computed.
    """
    output_dir = _prepare_output(config)
    spec = config.spec()
    window = config.window or default_window(config.n_max)

    if config.synthetic is not None:
        series = synthetic_series(
            spec,
            config.n_max,
            config.synthetic.get("C", 1.0),
            config.synthetic["exponent"],
        )
    else:
        series = reusable_series(config, output_dir)
        if series is None or not _covers(series, window):
            series = growth_series(
                spec,
                config.n_max,
                mode=config.mode,
                backend=config.backend,
                memory_budget_bytes=config.memory_budget_bytes,
                timing=False,
            )
            if series.truncated and not _covers(series, window):
                logger.error(f"Series truncated at n={series.rows[-1].n}, before the window ends")
                return EXIT_TRUNCATED

    try:
        report = fit_exponent(series, window)
    except FitError as e:
        logger.error(f"Fit failed: {str(e)}")
        return EXIT_CONFIG

    tolerance = config.fit_tolerance()
    verdict = FitVerdict(
        **report.model_dump(),
        tolerance=tolerance,
        passed=abs(report.r_hat - report.target) <= tolerance,
        group=config.group,
        u=spec.datum.u,
    )
    save_json_to_file(verdict, output_dir / "fit.json")
    if not verdict.passed:
        logger.error(
            f"Exponent {report.r_hat:.6f} is not within {tolerance} of {report.target}"
        )
        return EXIT_INVARIANT
    return EXIT_OK


def _check_power(
    spec: RepSpec, n: int, power, rng: np.random.Generator
) -> List[InvariantStatus]:
    rd = spec.datum
    statuses = []

    witness = weyl_invariance_violation(power)
    statuses.append(
        InvariantStatus(
            name="weyl_invariance",
            passed=witness is None,
            n=n,
            witness=None if witness is None else list(witness),
        )
    )

    try:
        extracted = extract_multiplicities(power, n)
        peeled = peel_oracle(power, n)
    except NotACharacterError as e:
        statuses.append(
            InvariantStatus(
                name="extract_vs_peel",
                passed=False,
                n=n,
                witness=None if e.witness is None else list(e.witness),
                detail=str(e),
            )
        )
        return statuses
    mismatch = sorted(
        w for w in set(extracted.entries) | set(peeled.entries)
        if extracted.entries.get(w, 0) != peeled.entries.get(w, 0)
    )
    statuses.append(
        InvariantStatus(
            name="extract_vs_peel",
            passed=not mismatch,
            n=n,
            witness=list(mismatch[0]) if mismatch else None,
        )
    )

    total = conservation_total(rd, extracted)
    expected = spec.dim**n
    statuses.append(
        InvariantStatus(
            name="dimension_conservation",
            passed=total == expected,
            n=n,
            detail=f"sum a_lambda dim(lambda) = {total}, dim V^n = {expected}",
        )
    )

    difference = apply_root_difference(power)
    support = sorted(difference)
    if len(support) > MAX_EXHAUSTIVE_SUPPORT:
        picked = rng.choice(len(support), size=SAMPLE_SIZE, replace=False)
        support = [support[i] for i in sorted(picked)]
    witness = find_anti_invariance_violation(difference, support)
    statuses.append(
        InvariantStatus(
            name="anti_invariance",
            passed=witness is None,
            n=n,
            witness=None if witness is None else list(witness),
        )
    )
    return statuses


def cmd_check(config: ExperimentConfig) -> int:
    """Run the invariant suite for n = 1..n_max and write check.json"""
    if config.n_max > MAX_CHECK_N:
        raise ConfigError(f"check supports n_max <= {MAX_CHECK_N}, got {config.n_max}", "n_max")
    output_dir = _prepare_output(config)
    spec = config.spec()
    rng = np.random.default_rng(config.seed)
    statuses = []
    for n, power in power_characters(spec, config.n_max):
        statuses.extend(_check_power(spec, n, power, rng))
        logger.debug(f"Checked invariants at n={n}")

    passed = all(status.passed for status in statuses)
    report = CheckReport(
        group=config.group, n_max=config.n_max, passed=passed, invariants=statuses
    )
    save_json_to_file(report, output_dir / "check.json")
    for status in statuses:
        if not status.passed:
            logger.error(
                f"Invariant {status.name} failed at n={status.n}, witness {status.witness}"
            )
    return EXIT_OK if passed else EXIT_INVARIANT


def moments_report(config: ExperimentConfig, md, profile=None) -> MomentsReport:
    rd = config.datum
    return MomentsReport(
        group=config.group,
        r=md.r,
        u=rd.u,
        dim=md.dim,
        mean=[float(x) for x in md.mean],
        covariance=[[float(x) for x in row] for row in md.covariance],
        Q=md.Q.tolist(),
        step_lattice=[list(row) for row in md.step_lattice],
        covolume=md.covolume,
        spanning=md.spanning,
        null_direction=None if md.null_direction is None else list(md.null_direction),
        profile=profile or [],
    )


def write_compare_csv(rows, output_path: Path) -> None:
    with open(output_path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(COMPARE_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.kind,
                    row.n,
                    "" if row.weight is None else " ".join(str(k) for k in row.weight),
                    format_float(row.exact),
                    format_float(row.approx),
                    format_float(row.ratio),
                ]
            )
    logger.info(f"Comparison saved to {output_path}")


def cmd_gauss(config: ExperimentConfig) -> int:
    """Write moments.json and compare.csv for the n in n_list"""
    output_dir = _prepare_output(config)
    spec = config.spec()
    md = weight_moments(spec)
    if not md.spanning:
        save_json_to_file(moments_report(config, md), output_dir / "moments.json")
        raise DegenerateModelError(
            f"Weights of V do not span the character lattice; null direction {md.null_direction}",
            md.null_direction,
        )
    comparison = compare_report(spec, config.n_list, config.truncation, config.backend)
    write_compare_csv(comparison.rows, output_dir / "compare.csv")
    save_json_to_file(
        moments_report(config, md, comparison.profiles), output_dir / "moments.json"
    )
    return EXIT_OK


COMMAND_HANDLERS: Dict[str, Callable[[ExperimentConfig], int]] = {
    "growth": cmd_growth,
    "fit": cmd_fit,
    "check": cmd_check,
    "gauss": cmd_gauss,
}


def run_command(args=None) -> int:
    """
    Run one command with the provided arguments.

    Args:
        args: The parsed command-line arguments. If None, arguments will be parsed.

    Returns:
        int: Exit code (0 success, 1 config, 2 truncation, 3 invariant failure,
            4 degenerate model)
    """
    if args is None:
        args = create_cli_parser().parse_args()

    if args.verbose:
        set_verbose(True)

    handler = COMMAND_HANDLERS.get(args.command)
    if handler is None:
        logger.error(f"Unknown command: {args.command}")
        return EXIT_CONFIG

    try:
        config = load_config(
            args.config,
            group=args.group,
            rep=args.rep,
            n_max=args.nmax,
            output_dir=args.out,
        )
        return handler(config)
    except ConfigError as e:
        logger.error(f"Invalid config: {str(e)}")
        return EXIT_CONFIG
    except DegenerateModelError as e:
        logger.error(f"Degenerate model, null direction {e.null_direction}")
        return EXIT_DEGENERATE
    except NotACharacterError as e:
        logger.error(f"Not a character: {str(e)}")
        return EXIT_INVARIANT
    except UnsupportedError as e:
        logger.error(f"Unsupported: {str(e)}")
        return EXIT_CONFIG
    except OSError as e:
        logger.error(f"File error: {str(e)}")
        return EXIT_CONFIG
