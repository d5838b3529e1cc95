"""Command-line front end: ``cubfuzzy fit|fuzzify|weights|scores|simulate|report``.

Every option can also be set through an environment variable named
``CUBFUZZY_<OPTION>`` (e.g. ``CUBFUZZY_SCALE_M=5``).
"""

from __future__ import annotations

import functools
import sys
import warnings

import click
import numpy as np

from . import report as rp
from .cub import CubParams, sample
from .errors import (
    CubFuzzyError,
    DegenerateDataError,
    DegenerateNormalizationError,
    DomainError,
    EstimationError,
    IFSConsistencyError,
    NumericalError,
    RowRejected,
    ValidationError,
)
from .ifs import Variant
from .survey import RatingMatrix, load_csv, to_csv_text

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4

ENV_PREFIX = "CUBFUZZY"

NUMERICAL_ERRORS = (
    NumericalError,
    EstimationError,
    DegenerateDataError,
    DegenerateNormalizationError,
    IFSConsistencyError,
    rp.ItemFailure,
)


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ValidationError, RowRejected)):
        return EXIT_VALIDATION
    if isinstance(exc, NUMERICAL_ERRORS):
        return EXIT_NUMERICAL
    return EXIT_USAGE


def _env(name: str) -> str:
    return f"{ENV_PREFIX}_{name}"


def _parse_overrides(values) -> dict[str, float]:
    out = {}
    for spec in values:
        item, sep, raw = spec.rpartition("=")
        if not sep or not item:
            raise click.BadParameter(f"expected ITEM=VALUE, got {spec!r}", param_hint="--pi-override")
        try:
            out[item] = float(raw)
        except ValueError:
            raise click.BadParameter(f"{raw!r} is not a number", param_hint="--pi-override") from None
    return out


def common_options(f):
    opts = [
        click.option("--scale-m", "m", type=int, default=7, show_default=True, envvar=_env("SCALE_M"),
                     help="Number of rating categories."),
        click.option("--ip", type=int, default=None, envvar=_env("IP"),
                     help="Indifference category [default: (m+1)/2]."),
        click.option("--lb", type=int, default=None, envvar=_env("LB"),
                     help="Lower crisp bound [default: ip-1]."),
        click.option("--ub", type=int, default=None, envvar=_env("UB"),
                     help="Upper crisp bound [default: m]."),
        click.option("--variant", type=click.Choice(["zani", "cub"]), default="cub", show_default=True,
                     envvar=_env("VARIANT")),
        click.option("--weights", "weight_mode", type=click.Choice(["mu", "u"]), default=None,
                     envvar=_env("WEIGHTS"),
                     help="Proportions behind the item weights [default: mu for zani, u for cub]."),
        click.option("--tol", type=float, default=1e-6, show_default=True, envvar=_env("TOL")),
        click.option("--max-iter", type=int, default=500, show_default=True, envvar=_env("MAX_ITER")),
        click.option("--seed", type=int, default=0, show_default=True, envvar=_env("SEED")),
        click.option("--missing-token", default="", envvar=_env("MISSING_TOKEN"),
                     help="Cell text marking a missing rating [default: empty]."),
        click.option("--on-invalid", type=click.Choice(["error", "drop", "coerce"]), default="error",
                     show_default=True, envvar=_env("ON_INVALID"),
                     help="Out-of-range ratings: fail, drop the row, or treat as missing."),
        click.option("--missing-policy", type=click.Choice(["listwise", "strict"]), default="listwise",
                     show_default=True, envvar=_env("MISSING_POLICY")),
        click.option("--format", "fmt", type=click.Choice(["tsv", "json"]), default="tsv",
                     show_default=True, envvar=_env("FORMAT")),
        click.option("--digits", type=click.IntRange(min=0), default=4, show_default=True,
                     envvar=_env("DIGITS")),
        click.option("--strict/--lenient", default=False, show_default=True, envvar=_env("STRICT"),
                     help="Fail on empty normalizing blocks and degenerate proportions."),
        click.option("--pi-override", multiple=True, metavar="ITEM=VALUE", envvar=_env("PI_OVERRIDE"),
                     help="Use VALUE as pi for ITEM instead of fitting (repeatable)."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _config(kw) -> rp.RunConfig:
    kw = dict(kw)
    kw["pi_overrides"] = _parse_overrides(kw.pop("pi_override", ()))
    return rp.RunConfig(**kw)


def handle_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except CubFuzzyError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(exit_code_for(exc))
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_USAGE)
    return wrapper


def _load(csv_path, config: rp.RunConfig):
    matrix, report = load_csv(csv_path, config.scale, config.missing_token, config.on_invalid)
    if report.rejected_rows or report.coerced_cells:
        click.echo(report.summary(), err=True)
    return matrix, report


def _emit(tables, config: rp.RunConfig, validation=None):
    if config.fmt == "json":
        click.echo(rp.tables_to_json(tables, config, validation), nl=False)
    else:
        click.echo(rp.tables_to_tsv(tables, config.digits), nl=False)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="artifact")
def main():
    """Fit CUB models to rating items and score satisfaction with fuzzy profiles."""


@main.command()
@common_options
@click.argument("csv_path", type=click.Path(dir_okay=False))
@handle_errors
def fit(csv_path, **kw):
    """Per-item CUB parameter estimates."""
    config = _config(kw)
    matrix, report = _load(csv_path, config)
    fits = rp.fit_items(matrix, config)
    _emit([rp.parameter_table(fits)], config, report)
    failed = [f.item for f in fits if f.error]
    if failed:
        click.echo(f"error: fitting failed for {failed}", err=True)
        sys.exit(EXIT_NUMERICAL)


@main.command()
@common_options
@click.argument("csv_path", type=click.Path(dir_okay=False))
@handle_errors
def fuzzify(csv_path, **kw):
    """Membership, non-membership and hesitation profiles per item."""
    config = _config(kw)
    matrix, report = _load(csv_path, config)
    fits = rp.fit_items(matrix, config)
    zani = rp.build_profiles(fits, config, Variant.ZANI)
    cub = rp.build_profiles(fits, config, Variant.CUB_IFS)
    tables = [
        rp.membership_table(zani, cub, config),
        rp.nonmembership_table(cub, config),
        rp.uncertainty_table(cub, config),
    ]
    _emit(tables, config, report)


def _pipelines(matrix, config, compare):
    fits = rp.fit_items(matrix, config)
    if compare:
        variants = [Variant.ZANI, Variant.CUB_IFS]
    else:
        variants = [config.variant]
    results = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for v in variants:
            results.append(rp.run_pipeline(matrix, fits, config, v, config.mode_for(v)))
    for w in caught:
        click.echo(f"warning: {w.message}", err=True)
    return fits, results


@main.command()
@common_options
@click.option("--compare", is_flag=True, envvar=_env("COMPARE"), help="Emit both weighting pipelines.")
@click.argument("csv_path", type=click.Path(dir_okay=False))
@handle_errors
def weights(csv_path, compare, **kw):
    """Item weights from log-inverse fuzzy proportions."""
    config = _config(kw)
    matrix, report = _load(csv_path, config)
    fits, results = _pipelines(matrix, config, compare)
    _emit([rp.weights_table(results, fits)], config, report)


@main.command()
@common_options
@click.option("--compare", is_flag=True, envvar=_env("COMPARE"), help="Emit both weighting pipelines.")
@click.argument("csv_path", type=click.Path(dir_okay=False))
@handle_errors
def scores(csv_path, compare, **kw):
    """Weights and the final membership, non-membership and hesitation scores."""
    config = _config(kw)
    matrix, report = _load(csv_path, config)
    fits, results = _pipelines(matrix, config, compare)
    _emit([rp.weights_table(results, fits), rp.scores_table(results)], config, report)


def _parse_item_params(values) -> list[tuple[str, CubParams]]:
    out = []
    for spec in values:
        name, sep, raw = spec.rpartition("=")
        parts = raw.split(",")
        if not sep or not name or len(parts) != 2:
            raise click.BadParameter(f"expected ITEM=PI,XI, got {spec!r}", param_hint="--item")
        try:
            out.append((name, CubParams(float(parts[0]), float(parts[1]))))
        except (ValueError, DomainError) as exc:
            raise click.BadParameter(f"{spec!r}: {exc}", param_hint="--item") from None
    if not out:
        raise click.UsageError("at least one --item ITEM=PI,XI is required")
    return out


@main.command()
@common_options
@click.option("--item", "items", multiple=True, metavar="ITEM=PI,XI", required=True,
              help="Item name and CUB parameters (repeatable).")
@click.option("-n", "--n", "n", type=click.IntRange(min=1), required=True, help="Number of respondents.")
@click.option("-o", "--out", type=click.Path(dir_okay=False, writable=True), default=None,
              help="Output CSV path [default: stdout].")
@handle_errors
def simulate(items, n, out, **kw):
    """Write a synthetic rating matrix drawn from CUB models."""
    config = _config(kw)
    specs = _parse_item_params(items)
    scale = config.scale
    children = np.random.SeedSequence(config.seed).spawn(len(specs))
    columns = [sample(scale, params, n, child) for (_, params), child in zip(specs, children)]
    matrix = RatingMatrix(tuple(name for name, _ in specs), np.column_stack(columns), scale)
    text = to_csv_text(matrix, config.missing_token)
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


@main.command()
@common_options
@click.option("-o", "--outdir", type=click.Path(file_okay=False), required=True,
              help="Directory receiving the tables and per-item profile series.")
@click.argument("csv_path", type=click.Path(dir_okay=False))
@handle_errors
def report(csv_path, outdir, **kw):
    """Full bundle: six tables plus one profile series per item."""
    config = _config(kw)
    matrix, validation = _load(csv_path, config)
    tables, series = rp.build_report(matrix, config)
    for path in rp.write_bundle(outdir, tables, series, config, validation):
        click.echo(str(path))


if __name__ == "__main__":
    main()
