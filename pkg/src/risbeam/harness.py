"""Monte Carlo experiment harness.

Reads a YAML config, sweeps one axis (noise level, antennas, elements or
impairment level), runs every requested method on matched channel draws,
and emits raw records plus an aggregated summary in CSV or JSON together
with a provenance sidecar of the fully resolved config.

Seeding: every (sweep value, trial) cell derives its seed as
``base_seed XOR blake2b(sweep_value, trial)``, and all methods in the cell
consume the identical channel realization, so method comparisons are
paired.  The whole run is a pure function of the config (timestamps
excluded unless ``record_timing`` is disabled).
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from . import baselines, metrics, optimizer
from .channel import ChannelParams, generate_realization, make_rng
from .hardware import PhaseModelParams
from .metrics import ImpairmentParams

SWEEP_AXES = ("snr_db", "antennas", "elements", "impairment_level")
METHODS = ("proposed", "pga", "random", "upper_bound")
SUMMARY_COLUMNS = ("sweep_axis", "sweep_value", "method", "mean_se",
                   "stderr_se", "trials_ok", "trials_failed",
                   "mean_outer_iters", "mean_wall_time_s")
RECORD_COLUMNS = ("sweep_axis", "sweep_value", "trial_index", "method",
                  "spectral_efficiency", "objective", "outer_iters",
                  "wall_time_s", "seed", "realization_digest", "failed",
                  "error")


class ConfigError(ValueError):
    """Configuration failed validation; the message names the field."""


@dataclass(frozen=True)
class ExperimentConfig:
    sweep_axis: str
    sweep_values: tuple[float, ...]
    trials: int = 1000
    methods: tuple[str, ...] = METHODS
    base_seed: int = 0
    output_path: str = "results/experiment"
    output_format: str = "csv"
    random_restarts: int = 1
    record_timing: bool = True
    channel: ChannelParams = field(default_factory=ChannelParams)
    impairments: ImpairmentParams = field(default_factory=ImpairmentParams)
    phase_model: PhaseModelParams = field(default_factory=PhaseModelParams)
    solver: optimizer.SolverConfig = field(default_factory=optimizer.SolverConfig)
    pga: baselines.PgaConfig = field(default_factory=baselines.PgaConfig)

    def __post_init__(self) -> None:
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(
                f"sweep_axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
        vals = tuple(float(v) for v in self.sweep_values)
        if not vals:
            raise ConfigError("sweep_values must be non-empty")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("sweep_values must be strictly increasing")
        if self.sweep_axis in ("antennas", "elements"):
            if any(v != int(v) or v < 1 for v in vals):
                raise ConfigError(
                    f"sweep_values for {self.sweep_axis} must be integers >= 1")
        if self.sweep_axis == "impairment_level" and any(v < 0 for v in vals):
            raise ConfigError("sweep_values for impairment_level must be >= 0")
        object.__setattr__(self, "sweep_values", vals)
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        methods = tuple(self.methods)
        for m in methods:
            if m not in METHODS:
                raise ConfigError(f"methods entry {m!r} not in {METHODS}")
        if len(set(methods)) != len(methods):
            raise ConfigError("methods must not repeat")
        object.__setattr__(self, "methods", methods)
        if self.output_format not in ("csv", "json"):
            raise ConfigError(
                f"output_format must be 'csv' or 'json', got {self.output_format!r}")
        if self.random_restarts < 1:
            raise ConfigError(
                f"random_restarts must be >= 1, got {self.random_restarts}")

    def to_dict(self) -> dict:
        """Fully resolved config, ready for the provenance sidecar."""
        out = dataclasses.asdict(self)
        out["sweep_values"] = list(self.sweep_values)
        out["methods"] = list(self.methods)
        return out


@dataclass(frozen=True)
class TrialRecord:
    sweep_value: float
    trial_index: int
    method: str
    spectral_efficiency: float
    objective: float
    outer_iters: int
    wall_time_s: float
    seed: int
    realization_digest: str
    failed: bool = False
    error: str = ""


@dataclass(frozen=True)
class SummaryRow:
    sweep_axis: str
    sweep_value: float
    method: str
    mean_se: float
    stderr_se: float
    trials_ok: int
    trials_failed: int
    mean_outer_iters: float
    mean_wall_time_s: float


def _build_section(cls, data: dict, section: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(
            f"unknown key(s) {sorted(unknown)} in section {section!r}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"in section {section!r}: {exc}") from exc


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    data = dict(data)
    sections = {
        "channel": ChannelParams,
        "impairments": ImpairmentParams,
        "phase_model": PhaseModelParams,
        "solver": optimizer.SolverConfig,
        "pga": baselines.PgaConfig,
    }
    kwargs = {}
    for name, cls in sections.items():
        raw = data.pop(name, None)
        if raw is not None:
            if not isinstance(raw, dict):
                raise ConfigError(f"section {name!r} must be a mapping")
            kwargs[name] = _build_section(cls, raw, name)
    top_known = {f.name for f in fields(ExperimentConfig)} - set(sections)
    unknown = set(data) - top_known
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {sorted(unknown)}")
    if "sweep_axis" not in data or "sweep_values" not in data:
        raise ConfigError("sweep_axis and sweep_values are required")
    if "sweep_values" in data and not isinstance(data["sweep_values"], (list, tuple)):
        raise ConfigError("sweep_values must be a list")
    if "methods" in data:
        if not isinstance(data["methods"], (list, tuple)):
            raise ConfigError("methods must be a list")
        data["methods"] = tuple(data["methods"])
    try:
        return ExperimentConfig(**data, **kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate a YAML experiment config."""
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if data is None:
        raise ConfigError(f"config file {path} is empty")
    return config_from_dict(data)


def cell_seed(base_seed: int, sweep_value: float, trial: int) -> int:
    """Stable per-cell seed, identical for every method in the cell."""
    tag = f"{float(sweep_value):.17g}|{int(trial)}".encode()
    h = int.from_bytes(hashlib.blake2b(tag, digest_size=8).digest(), "big")
    return (int(base_seed) ^ h) & (2 ** 63 - 1)


def _child_seed(seed: int, tag: str) -> int:
    """Independent stream for a method's own randomness within a cell."""
    raw = f"{seed}|{tag}".encode()
    return int.from_bytes(hashlib.blake2b(raw, digest_size=8).digest(),
                          "big") & (2 ** 63 - 1)


def _point_params(cfg: ExperimentConfig, value: float
                  ) -> tuple[ChannelParams, ImpairmentParams]:
    ch, imp = cfg.channel, cfg.impairments
    if cfg.sweep_axis == "snr_db":
        imp = ImpairmentParams(rho_b=imp.rho_b, rho_u=imp.rho_u,
                               sigma2=10.0 ** (-value / 10.0))
    elif cfg.sweep_axis == "antennas":
        ch = dataclasses.replace(ch, num_antennas=int(value))
    elif cfg.sweep_axis == "elements":
        ch = dataclasses.replace(ch, num_elements=int(value))
    else:  # impairment_level: squared-coefficient convention
        imp = ImpairmentParams(rho_b=value ** 2, rho_u=value ** 2,
                               sigma2=imp.sigma2)
    return ch, imp


def _run_method(method: str, cfg: ExperimentConfig, real, imp, seed: int
                ) -> tuple[float, float, int]:
    """Returns (spectral efficiency, objective, outer iterations)."""
    if method == "proposed":
        rng = make_rng(_child_seed(seed, "proposed-init"))
        rep = optimizer.solve(real, imp, cfg.phase_model, cfg.solver, rng=rng)
        return rep.final_se, rep.final_objective, rep.outer_iters
    if method == "pga":
        rep = baselines.pga_solve(real, imp, cfg.phase_model, cfg.pga)
        return rep.final_se, rep.final_objective, rep.outer_iters
    if method == "random":
        rng = make_rng(_child_seed(seed, "random-phases"))
        rep = baselines.random_solve(real, imp, cfg.phase_model, rng,
                                     restarts=cfg.random_restarts)
        return rep.final_se, rep.final_objective, rep.outer_iters
    bound = metrics.capacity_upper_bound(real.num_antennas, imp)
    return bound, real.num_antennas / imp.rho, 0


def run_experiment(cfg: ExperimentConfig) -> list[TrialRecord]:
    """Run the full sweep; failures become failed rows, never aborts.

    Output is sorted by (sweep value, method, trial), so it does not
    depend on execution order.
    """
    records = []
    for value in cfg.sweep_values:
        ch_params, imp = _point_params(cfg, value)
        for trial in range(cfg.trials):
            seed = cell_seed(cfg.base_seed, value, trial)
            real = generate_realization(ch_params, make_rng(seed))
            digest = real.digest()
            for method in cfg.methods:
                start = time.perf_counter()
                try:
                    se, obj, iters = _run_method(method, cfg, real, imp, seed)
                    elapsed = time.perf_counter() - start
                    records.append(TrialRecord(
                        sweep_value=value, trial_index=trial, method=method,
                        spectral_efficiency=se, objective=obj,
                        outer_iters=iters,
                        wall_time_s=elapsed if cfg.record_timing else 0.0,
                        seed=seed, realization_digest=digest))
                except Exception as exc:  # noqa: BLE001 - recorded, not fatal
                    elapsed = time.perf_counter() - start
                    records.append(TrialRecord(
                        sweep_value=value, trial_index=trial, method=method,
                        spectral_efficiency=0.0, objective=0.0, outer_iters=0,
                        wall_time_s=elapsed if cfg.record_timing else 0.0,
                        seed=seed, realization_digest=digest, failed=True,
                        error=str(exc).replace("\n", " ").replace(",", ";")))
    records.sort(key=lambda r: (r.sweep_value, r.method, r.trial_index))
    return records


def aggregate(records: list[TrialRecord], sweep_axis: str) -> list[SummaryRow]:
    """Per (sweep value, method) sample means and standard errors.

    Failed rows are excluded from the statistics and reported in the
    ``trials_failed`` column.
    """
    if not records:
        raise ValueError("no records to aggregate")
    groups: dict[tuple[float, str], list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault((rec.sweep_value, rec.method), []).append(rec)
    rows = []
    for (value, method) in sorted(groups):
        recs = groups[(value, method)]
        ok = [r for r in recs if not r.failed]
        if ok:
            se = np.array([r.spectral_efficiency for r in ok])
            stderr = float(np.std(se, ddof=1) / np.sqrt(se.size)) if se.size > 1 else 0.0
            rows.append(SummaryRow(
                sweep_axis=sweep_axis, sweep_value=value, method=method,
                mean_se=float(np.mean(se)), stderr_se=stderr,
                trials_ok=len(ok), trials_failed=len(recs) - len(ok),
                mean_outer_iters=float(np.mean([r.outer_iters for r in ok])),
                mean_wall_time_s=float(np.mean([r.wall_time_s for r in ok]))))
        else:
            rows.append(SummaryRow(
                sweep_axis=sweep_axis, sweep_value=value, method=method,
                mean_se=float("nan"), stderr_se=float("nan"), trials_ok=0,
                trials_failed=len(recs), mean_outer_iters=float("nan"),
                mean_wall_time_s=float("nan")))
    return rows


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_table(path: Path, columns: tuple[str, ...], rows: list[dict],
                 fmt: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_format(row[c]) for c in columns])
    else:
        payload = [{c: row[c] for c in columns} for row in rows]
        with path.open("w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=False)
            fh.write("\n")


def emit(summary: list[SummaryRow], records: list[TrialRecord],
         cfg: ExperimentConfig) -> dict[str, Path]:
    """Write records, summary and the resolved-config sidecar.

    ``output_path`` acts as a prefix: <prefix>_records.<ext>,
    <prefix>_summary.<ext> and <prefix>_config.yaml.
    """
    base = Path(cfg.output_path)
    if base.suffix in (".csv", ".json"):
        base = base.with_suffix("")
    ext = cfg.output_format
    paths = {
        "records": base.parent / f"{base.name}_records.{ext}",
        "summary": base.parent / f"{base.name}_summary.{ext}",
        "config": base.parent / f"{base.name}_config.yaml",
    }
    try:
        rec_rows = [dict(dataclasses.asdict(r), sweep_axis=cfg.sweep_axis)
                    for r in records]
        _write_table(paths["records"], RECORD_COLUMNS, rec_rows, ext)
        sum_rows = [dataclasses.asdict(r) for r in summary]
        _write_table(paths["summary"], SUMMARY_COLUMNS, sum_rows, ext)
        paths["config"].parent.mkdir(parents=True, exist_ok=True)
        paths["config"].write_text(
            yaml.safe_dump(cfg.to_dict(), sort_keys=True))
    except OSError as exc:
        raise OSError(f"cannot write results under {base}: {exc}") from exc
    return paths


def run_and_emit(cfg: ExperimentConfig) -> dict[str, Path]:
    records = run_experiment(cfg)
    summary = aggregate(records, cfg.sweep_axis) if records else []
    return emit(summary, records, cfg)
