"""Pipeline orchestration and report tables (TSV and JSON)."""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path

import numpy as np

from . import aggregation as agg
from .cub import FitResult, FrequencyTable, RatingScale, fit_em_counts
from .errors import CubFuzzyError, DomainError, RowRejected
from .ifs import FuzzyProfile, Variant, build_profile
from .survey import RatingMatrix, ValidationReport, item_frequencies

SCHEMA_VERSION = "1.0"
SCHEMA_PATH = Path(__file__).with_name("schema") / "report.schema.json"

TABLE_NAMES = (
    "cub_parameters",
    "membership",
    "nonmembership",
    "uncertainty",
    "weights",
    "scores",
)

DEFAULT_PAIRING = {
    Variant.ZANI: agg.WeightMode.MEMBERSHIP_PROPORTIONS,
    Variant.CUB_IFS: agg.WeightMode.UNCERTAINTY_PROPORTIONS,
}


@dataclass
class RunConfig:
    m: int = 7
    ip: int | None = None
    lb: int | None = None
    ub: int | None = None
    variant: Variant = Variant.CUB_IFS
    weight_mode: agg.WeightMode | None = None
    tol: float = 1e-6
    max_iter: int = 500
    seed: int = 0
    missing_token: str = ""
    on_invalid: str = "error"
    missing_policy: str = "listwise"
    fmt: str = "tsv"
    digits: int = 4
    strict: bool = False
    pi_overrides: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.variant = Variant(self.variant)
        if self.weight_mode is not None:
            self.weight_mode = agg.WeightMode(self.weight_mode)
        if self.digits < 0:
            raise DomainError("rounding digits must be >= 0")
        if self.missing_policy not in ("listwise", "strict"):
            raise DomainError(f"unknown missing policy {self.missing_policy!r}")
        if self.fmt not in ("tsv", "json"):
            raise DomainError(f"unknown output format {self.fmt!r}")
        for item, v in self.pi_overrides.items():
            if not 0.0 <= float(v) <= 1.0:
                raise DomainError(f"pi override for {item!r} must lie in [0, 1], got {v}")
        self.scale  # validates bounds early

    @property
    def scale(self) -> RatingScale:
        return RatingScale(self.m, self.ip, self.lb, self.ub)

    @property
    def cub_scale(self) -> RatingScale:
        """The CUB-penalized profiles always take lb = ip - 1."""
        s = self.scale
        return replace(s, lb=s.ip - 1)

    def mode_for(self, variant: Variant) -> agg.WeightMode:
        if self.weight_mode is not None:
            return self.weight_mode
        return DEFAULT_PAIRING[variant]


@dataclass
class ItemFit:
    item: str
    freq: FrequencyTable | None
    fit: FitResult | None = None
    pi_hat: float | None = None
    source: str = "ml"
    error: str | None = None


@dataclass
class PipelineResult:
    variant: Variant
    mode: agg.WeightMode
    profiles: list[FuzzyProfile]
    g: np.ndarray
    weights: agg.WeightVector
    scores: agg.ScoreTriple


class ItemFailure(CubFuzzyError):
    """One or more items could not be fitted or profiled."""

    def __init__(self, message, failures):
        super().__init__(message)
        self.failures = failures


def fit_items(matrix: RatingMatrix, config: RunConfig) -> list[ItemFit]:
    """Fit every item on its own non-missing ratings; errors are kept per item."""
    unknown = set(config.pi_overrides) - set(matrix.items)
    if unknown:
        raise DomainError(f"pi override for unknown item(s): {sorted(unknown)}")
    out = []
    for item in matrix.items:
        try:
            freq = item_frequencies(matrix, item)
        except CubFuzzyError as exc:
            out.append(ItemFit(item, None, error=str(exc)))
            continue
        rec = ItemFit(item, freq)
        if item in config.pi_overrides:
            rec.pi_hat = float(config.pi_overrides[item])
            rec.source = "override"
        else:
            counts = np.bincount(matrix.ratings(item) - 1, minlength=matrix.scale.m)
            try:
                rec.fit = fit_em_counts(counts, matrix.scale, config.tol, config.max_iter)
                rec.pi_hat = rec.fit.params.pi
            except CubFuzzyError as exc:
                rec.error = f"{type(exc).__name__}: {exc}"
        out.append(rec)
    return out


def _raise_failures(fits: list[ItemFit]) -> None:
    bad = [f for f in fits if f.error is not None]
    if bad:
        listing = "; ".join(f"{f.item}: {f.error}" for f in bad)
        raise ItemFailure(f"cannot process item(s): {listing}", bad)


def build_profiles(fits: list[ItemFit], config: RunConfig, variant: Variant) -> list[FuzzyProfile]:
    _raise_failures(fits)
    variant = Variant(variant)
    scale = config.scale if variant is Variant.ZANI else config.cub_scale
    return [
        build_profile(f.freq, scale, variant, f.pi_hat, item_id=f.item, strict=config.strict)
        for f in fits
    ]


def aggregation_rows(matrix: RatingMatrix, config: RunConfig) -> np.ndarray:
    rows = matrix.complete_rows()
    if config.missing_policy == "strict" and rows.shape[0] != matrix.n:
        raise RowRejected(
            f"{matrix.n - rows.shape[0]} respondent(s) have missing ratings under the strict policy"
        )
    if rows.shape[0] == 0:
        raise DomainError("no complete respondent rows left after listwise deletion")
    return rows


def run_pipeline(
    matrix: RatingMatrix,
    fits: list[ItemFit],
    config: RunConfig,
    variant: Variant | None = None,
    mode: agg.WeightMode | None = None,
) -> PipelineResult:
    variant = Variant(variant or config.variant)
    mode = agg.WeightMode(mode) if mode is not None else config.mode_for(variant)
    profiles = build_profiles(fits, config, variant)
    rows = aggregation_rows(matrix, config)
    source = agg.Source.MU if mode is agg.WeightMode.MEMBERSHIP_PROPORTIONS else agg.Source.U
    g = agg.fuzzy_proportions(profiles, rows, source)
    weights = agg.log_inverse_weights(g, mode, strict=config.strict)
    scores = agg.final_scores(agg.iwam(profiles, weights, rows))
    return PipelineResult(variant, mode, profiles, g, weights, scores)


# ---------------------------------------------------------------- tables


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"name": self.name, "columns": self.columns, "rows": [_jsonable(r) for r in self.rows]}


def _jsonable(row):
    out = []
    for v in row:
        if isinstance(v, (np.floating, float)):
            out.append(float(v))
        elif isinstance(v, (np.integer, int)) and not isinstance(v, bool):
            out.append(int(v))
        else:
            out.append(v)
    return out


def parameter_table(fits: list[ItemFit]) -> Table:
    t = Table(
        "cub_parameters",
        ["item", "pi", "xi", "1-pi", "1-xi", "loglik", "iterations", "converged", "pi_source", "error"],
    )
    for f in fits:
        if f.fit is not None:
            p = f.fit.params
            t.rows.append([f.item, p.pi, p.xi, 1 - p.pi, 1 - p.xi, f.fit.loglik,
                           f.fit.iterations, f.fit.converged, f.source, f.error])
        else:
            pi = f.pi_hat
            t.rows.append([f.item, pi, None, None if pi is None else 1 - pi, None, None, None, None,
                           f.source, f.error])
    return t


def membership_table(zani: list[FuzzyProfile], cub: list[FuzzyProfile], config: RunConfig) -> Table:
    m = config.m
    low = min(config.scale.lb, config.cub_scale.lb)
    t = Table("membership", ["item", "function", f"R<={low}"] + [f"R={r}" for r in range(low + 1, m + 1)])
    for pz, pc in zip(zani, cub):
        for label, p in (("zani", pz), ("cub", pc)):
            t.rows.append([p.item_id, label, p.mu[low - 1]] + list(p.mu[low:]))
    return t


def nonmembership_table(cub: list[FuzzyProfile], config: RunConfig) -> Table:
    ip = config.scale.ip
    t = Table("nonmembership", ["item"] + [f"R={r}" for r in range(1, ip + 1)] + [f"R>={ip + 1}"])
    for p in cub:
        t.rows.append([p.item_id] + list(p.nu[:ip]) + [p.nu[ip]])
    return t


def uncertainty_table(cub: list[FuzzyProfile], config: RunConfig) -> Table:
    t = Table("uncertainty", ["item"] + [f"R={r}" for r in range(1, config.m + 1)])
    for p in cub:
        t.rows.append([p.item_id] + list(p.u))
    return t


def weights_table(results: list[PipelineResult], fits: list[ItemFit] | None = None) -> Table:
    items = [p.item_id for p in results[0].profiles]
    t = Table("weights", ["system"] + items)
    for res in results:
        t.rows.append([f"{res.variant.value}_{res.mode.value}"] + list(res.weights.weights))
    if fits is not None:
        t.rows.append(["1-pi"] + [1 - f.pi_hat for f in fits])
    return t


def scores_table(results: list[PipelineResult]) -> Table:
    t = Table("scores", ["system", "mu_bar", "nu_bar", "u_bar", "n"])
    for res in results:
        s = res.scores
        t.rows.append([f"{res.variant.value}_{res.mode.value}", s.mu_bar, s.nu_bar, s.u_bar, s.n])
    return t


def profile_series(zani: FuzzyProfile, cub: FuzzyProfile) -> Table:
    t = Table(f"profile_{cub.item_id}", ["category", "mu_zani", "mu_cub", "nu_cub", "u_cub"])
    for r in range(1, cub.m + 1):
        i = r - 1
        t.rows.append([r, zani.mu[i], cub.mu[i], cub.nu[i], cub.u[i]])
    return t


# ---------------------------------------------------------------- emitters


def format_number(value, digits: int) -> str:
    """Half-even rounding of the float's shortest decimal representation."""
    if value is None:
        return "NA"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not np.isfinite(v):
            return "NA" if np.isnan(v) else ("Inf" if v > 0 else "-Inf")
        q = Decimal(repr(v)).quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN)
        if q.is_zero():
            q = abs(q)
        return f"{q:f}"
    return str(value).replace("\t", " ").replace("\n", " ")


def table_to_tsv(table: Table, digits: int) -> str:
    lines = ["\t".join(table.columns)]
    for row in table.rows:
        lines.append("\t".join(format_number(v, digits) for v in row))
    return "\n".join(lines) + "\n"


def tables_to_tsv(tables: list[Table], digits: int) -> str:
    return "\n".join(f"# {t.name}\n" + table_to_tsv(t, digits) for t in tables)


def tables_to_json(tables: list[Table], config: RunConfig, validation: ValidationReport | None = None) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": config_dict(config),
        "tables": {t.name: t.as_dict() for t in tables},
    }
    if validation is not None:
        doc["validation"] = validation.as_dict()
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def config_dict(config: RunConfig) -> dict:
    s = config.scale
    return {
        "m": s.m,
        "ip": s.ip,
        "lb": s.lb,
        "ub": s.ub,
        "variant": config.variant.value,
        "weight_mode": config.weight_mode.value if config.weight_mode else None,
        "tol": config.tol,
        "max_iter": config.max_iter,
        "seed": config.seed,
        "missing_token": config.missing_token,
        "on_invalid": config.on_invalid,
        "missing_policy": config.missing_policy,
        "digits": config.digits,
        "strict": config.strict,
        "pi_overrides": {k: float(v) for k, v in sorted(config.pi_overrides.items())},
    }


def build_report(matrix: RatingMatrix, config: RunConfig) -> tuple[list[Table], list[Table]]:
    """The six report tables plus one profile series per item."""
    fits = fit_items(matrix, config)
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        zani = run_pipeline(matrix, fits, config, Variant.ZANI, config.mode_for(Variant.ZANI))
        cub = run_pipeline(matrix, fits, config, Variant.CUB_IFS, config.mode_for(Variant.CUB_IFS))
    tables = [
        parameter_table(fits),
        membership_table(zani.profiles, cub.profiles, config),
        nonmembership_table(cub.profiles, config),
        uncertainty_table(cub.profiles, config),
        weights_table([zani, cub], fits),
        scores_table([zani, cub]),
    ]
    series = [profile_series(z, c) for z, c in zip(zani.profiles, cub.profiles)]
    return tables, series


def _safe_name(item: str) -> str:
    keep = "".join(c if c.isalnum() or c in "-_." else "_" for c in item)
    return keep or "item"


def write_bundle(
    outdir: str | os.PathLike,
    tables: list[Table],
    series: list[Table],
    config: RunConfig,
    validation: ValidationReport | None = None,
) -> list[Path]:
    out = Path(outdir)
    (out / "profiles").mkdir(parents=True, exist_ok=True)
    written = []
    if config.fmt == "tsv":
        for i, t in enumerate(tables, start=1):
            p = out / f"table{i}_{t.name}.tsv"
            p.write_text(table_to_tsv(t, config.digits), encoding="utf-8")
            written.append(p)
        for s in series:
            p = out / "profiles" / f"{_safe_name(s.name[len('profile_'):])}.tsv"
            p.write_text(table_to_tsv(s, config.digits), encoding="utf-8")
            written.append(p)
    else:
        p = out / "report.json"
        p.write_text(tables_to_json(tables, config, validation), encoding="utf-8")
        written.append(p)
        for s in series:
            p = out / "profiles" / f"{_safe_name(s.name[len('profile_'):])}.json"
            doc = {"schema_version": SCHEMA_VERSION, "series": s.as_dict()}
            p.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
            written.append(p)
    return written
