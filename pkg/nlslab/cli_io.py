"""
Experiment orchestration: the flat configuration format, the five commands and
their persisted artifacts.
"""

import argparse
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from nlslab.classes.grid_field import Grid, VectorField
from nlslab.classes.linop import kernel_basis, project_essential
from nlslab.classes.nls_solver import Trajectory, evolve
from nlslab.classes.soliton import SolitonParams, perturbed_initial_data
from nlslab.classes.spectral_identities import REPORT_SCHEMA, IdentityReport, identity_suite
from nlslab.config import (
    CONFIG_SCHEMA,
    DEFAULT_EXPERIMENT,
    FILE_CONFIG,
    LOG_CONFIG,
    RUNTIME_CONFIG,
    TOLERANCES,
    Command,
    ExitCode,
    PerturbationKind,
    is_power_of_two,
    set_threads,
)
from nlslab.errors import ConfigError, NlsLabError, NumericalFailure
from nlslab.extract.asymptotics import SUMMARY_SCHEMA, run_decay_report
from nlslab.logging_helpers import configure_root_logger, get_logger
from nlslab.transform.distorted_ft import FrequencyGrid, dft_forward, dft_inverse, scattering_relation_defect
from nlslab.transform.modulation import ModulationSeries, track, verify_modulation_odes
from nlslab.workspace.series_store import SeriesStore, TimeSeries

logger = get_logger("cli")


def _flatten(sections: Mapping[str, object], prefix: str = "") -> Dict[str, object]:
    flat = {}
    for key, value in sections.items():
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{prefix}{key}."))
        else:
            flat[f"{prefix}{key}"] = value
    return flat


DEFAULT_VALUES: Dict[str, object] = _flatten(DEFAULT_EXPERIMENT)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: grid, time stepping, soliton, perturbation and analysis settings."""

    values: Dict[str, object] = field(default_factory=lambda: dict(DEFAULT_VALUES))

    def __post_init__(self):
        unknown = sorted(set(self.values) - set(CONFIG_SCHEMA))
        if unknown:
            raise ConfigError(unknown[0], "unknown key")
        merged = {**DEFAULT_VALUES, **self.values}
        object.__setattr__(self, "values", merged)
        self._validate()

    def __getitem__(self, key: str):
        return self.values[key]

    def _validate(self) -> None:
        checks = [
            ("grid.n", self["grid.n"] >= 16 and is_power_of_two(self["grid.n"]), "must be a power of two >= 16"),
            ("grid.L", self["grid.L"] > 0, "must be positive"),
            ("time.dt", self["time.dt"] > 0, "must be positive"),
            ("time.T", self["time.T"] > 0, "must be positive"),
            ("time.store_every", self["time.store_every"] >= 1, "must be >= 1"),
            ("soliton.omega0", self["soliton.omega0"] > 0, "must be positive"),
            ("perturbation.amplitude", self["perturbation.amplitude"] >= 0, "must be nonnegative"),
            ("perturbation.width", self["perturbation.width"] > 0, "must be positive"),
            ("frozen.xi_max", self["frozen.xi_max"] > 0, "must be positive"),
            ("frozen.n_xi", self["frozen.n_xi"] >= 3 and self["frozen.n_xi"] % 2 == 1, "must be odd and >= 3"),
            ("frozen.spectrum_stride", self["frozen.spectrum_stride"] >= 1, "must be >= 1"),
            ("tolerances.newton", self["tolerances.newton"] > 0, "must be positive"),
            ("tolerances.boundary_monitor", self["tolerances.boundary_monitor"] > 0, "must be positive"),
        ]
        for key, ok, message in checks:
            if not ok:
                raise ConfigError(key, f"{message}, got {self[key]!r}")
        if self["perturbation.kind"] not in {kind.value for kind in PerturbationKind}:
            raise ConfigError("perturbation.kind", f"unknown kind {self['perturbation.kind']!r}")
        if self["analysis.t_fit_max"] is not None and not self["analysis.t_fit_max"] > self["analysis.t_min"]:
            raise ConfigError("analysis.t_fit_max", "must exceed analysis.t_min")

    @property
    def grid(self) -> Grid:
        return Grid(self["grid.n"], self["grid.L"])

    @property
    def soliton(self) -> SolitonParams:
        return SolitonParams(self["soliton.omega0"], self["soliton.gamma0"],
                             self["soliton.p0"], self["soliton.sigma0"])

    @property
    def fgrid(self) -> FrequencyGrid:
        return FrequencyGrid(self["frozen.n_xi"], self["frozen.xi_max"])

    @property
    def fit_max(self) -> float:
        return self["time.T"] if self["analysis.t_fit_max"] is None else self["analysis.t_fit_max"]


def _convert(key: str, raw: str):
    expected = CONFIG_SCHEMA[key]
    if key == "analysis.t_fit_max" and raw.lower() == "none":
        return None
    try:
        if expected is int:
            return int(raw)
        if expected is float:
            return float(raw)
    except ValueError:
        raise ConfigError(key, f"expected {expected.__name__}, got {raw!r}") from None
    return raw


def parse_config_text(text: str, source: str = "<string>") -> ExperimentConfig:
    """Parse `section.key = value` lines; `#` starts a comment."""
    values: Dict[str, object] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{number}", f"expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_SCHEMA:
            raise ConfigError(key, "unknown key")
        if key in values:
            raise ConfigError(key, "assigned twice")
        if not raw:
            raise ConfigError(key, "missing value")
        values[key] = _convert(key, raw)
    return ExperimentConfig(values)


def parse_config(path: str) -> ExperimentConfig:
    """
    Read an experiment file. Keys left out take the DEFAULT_EXPERIMENT values.

    Args:
        path: Config file path

    Returns:
        ExperimentConfig

    Raises:
        ConfigError: naming the offending key (or the file when it cannot be read)
    """
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(str(path), "config file not found")
    config = parse_config_text(config_path.read_text(), str(path))
    logger.info(f"Loaded config {path}")
    return config


def _simulate(config: ExperimentConfig) -> Trajectory:
    psi0 = perturbed_initial_data(config.soliton, config.grid, config["perturbation.kind"],
                                  config["perturbation.amplitude"], config["perturbation.width"],
                                  config["perturbation.center"], config["perturbation.phase"])
    return evolve(psi0, config["time.T"], config["time.dt"], config["time.store_every"],
                  config["tolerances.boundary_monitor"])


def monitor_series(trajectory: Trajectory) -> TimeSeries:
    records = trajectory.monitor
    return TimeSeries("conserved", [r.t for r in records], {
        "mass": np.array([r.mass for r in records]),
        "momentum": np.array([r.momentum for r in records]),
        "energy": np.array([r.energy for r in records]),
        "boundary_mass": np.array([r.boundary_mass for r in records]),
        "flagged": np.array([float(r.flagged) for r in records]),
    })


def _track(config: ExperimentConfig, trajectory: Trajectory) -> ModulationSeries:
    series = track(trajectory, seed=config.soliton, tolerance=config["tolerances.newton"])
    if not series.states:
        raise NumericalFailure(f"modulation fit failed on the first frame: {series.failure}")
    return series


def command_simulate(config: ExperimentConfig, store: SeriesStore) -> Dict[str, bool]:
    trajectory = _simulate(config)
    store.write_series(monitor_series(trajectory))
    final = trajectory.snapshots[-1]
    store.write_columns("field_final", {"x": final.grid.x, "psi": final.values})
    return {
        "mass_drift": trajectory.mass_drift() < TOLERANCES["mass_drift"],
        "energy_drift": trajectory.energy_drift() < TOLERANCES["energy_drift"],
        "boundary_clean": trajectory.boundary_clean,
    }


def command_fit_modulation(config: ExperimentConfig, store: SeriesStore) -> Dict[str, bool]:
    trajectory = _simulate(config)
    store.write_series(monitor_series(trajectory))
    series = _track(config, trajectory)
    store.write_series(series.to_time_series())
    flags = {
        "modulation_tracking": series.failure is None,
        "newton_residual": bool(np.max(series.newton_residuals) <= config["tolerances.newton"]),
    }
    if len(series) >= 3:
        store.write_series(verify_modulation_odes(series))
    return flags


def command_verify_identities(config: ExperimentConfig, store: SeriesStore) -> Dict[str, bool]:
    reports = identity_suite(config["soliton.omega0"], seed=config["seed"])
    store.write_report("identities", [report.as_row() for report in reports], REPORT_SCHEMA)
    for report in reports:
        logger.info(str(report))
    return {report.name: report.passed for report in reports}


def dft_reports(omega: float, grid: Grid, fgrid: FrequencyGrid) -> List[IdentityReport]:
    """
    Annihilation of the generalized kernel, the conjugation relation and the
    inverse-after-forward roundtrip on a Gaussian J-invariant field.
    """
    annihilation = max(dft_forward(Y, omega, fgrid).sup_norm() for Y in kernel_basis(omega, grid))
    bump = np.exp(-((grid.x - 0.5) ** 2)) * np.exp(0.3j * grid.x)
    F = VectorField(grid, bump, np.conj(bump), j_invariant=True)
    spectrum = dft_forward(F, omega, fgrid)
    relation = scattering_relation_defect(spectrum)
    expected = project_essential(F, omega)
    synthesized = dft_inverse(spectrum, grid)
    difference = np.sqrt(np.sum(np.abs(synthesized.first - expected.first) ** 2
                                + np.abs(synthesized.second - expected.second) ** 2))
    norm = np.sqrt(np.sum(np.abs(expected.first) ** 2 + np.abs(expected.second) ** 2))
    roundtrip = float(difference / norm)
    n_xi = fgrid.n_xi
    return [
        IdentityReport("dft_annihilation", 4 * n_xi, float("nan"), annihilation,
                       annihilation < TOLERANCES["dft_annihilation"]),
        IdentityReport("scattering_relation", n_xi, float("nan"), relation,
                       relation < TOLERANCES["scattering_relation"]),
        IdentityReport("dft_roundtrip", grid.n_points, roundtrip, roundtrip * norm,
                       roundtrip < TOLERANCES["dft_roundtrip"]),
    ]


def command_verify_dft(config: ExperimentConfig, store: SeriesStore) -> Dict[str, bool]:
    reports = dft_reports(config["soliton.omega0"], config.grid, config.fgrid)
    store.write_report("dft", [report.as_row() for report in reports], REPORT_SCHEMA)
    for report in reports:
        logger.info(str(report))
    return {report.name: report.passed for report in reports}


def command_decay_report(config: ExperimentConfig, store: SeriesStore) -> Dict[str, bool]:
    trajectory = _simulate(config)
    store.write_series(monitor_series(trajectory))
    series = _track(config, trajectory)
    store.write_series(series.to_time_series())
    if len(series) < 3:
        raise NumericalFailure(f"only {len(series)} modulation frames; decay report needs three")

    t_fit_max = min(config.fit_max, trajectory.clean_until())
    epsilon = 0.0 if config["perturbation.kind"] == PerturbationKind.NONE.value else config["perturbation.amplitude"]
    report = run_decay_report(series, config.fgrid, config["frozen.spectrum_stride"],
                              config["analysis.t_min"], t_fit_max, config.grid, epsilon)
    for item in report.series:
        store.write_series(item)
    for name, columns in report.spectra_columns.items():
        store.write_columns(name, columns)
    store.write_report("summary", report.summary_rows(), SUMMARY_SCHEMA)

    flags = {fit.quantity: fit.passed for fit in report.fits}
    flags.update(report.flags)
    flags["modulation_tracking"] = series.failure is None
    return flags


COMMANDS: Dict[Command, Callable[[ExperimentConfig, SeriesStore], Dict[str, bool]]] = {
    Command.SIMULATE: command_simulate,
    Command.FIT_MODULATION: command_fit_modulation,
    Command.VERIFY_IDENTITIES: command_verify_identities,
    Command.VERIFY_DFT: command_verify_dft,
    Command.DECAY_REPORT: command_decay_report,
}


def run_command(name: str, config: ExperimentConfig, out_dir: str = FILE_CONFIG["output_dir"]) -> ExitCode:
    """
    Run one command and persist its artifacts under out_dir.

    Args:
        name: One of the Command values
        config: Validated experiment
        out_dir: Output root holding series/ and reports/

    Returns:
        ExitCode.PASS when every pass flag holds, ExitCode.CHECK_FAILURE otherwise

    Raises:
        ValueError: for an unknown command name
    """
    command = Command(name)
    store = SeriesStore(out_dir)
    logger.info(f"Running {command.value} into {out_dir}")
    flags = COMMANDS[command](config, store)
    failed = sorted(key for key, ok in flags.items() if not ok)
    if failed:
        logger.warning(f"{command.value}: {len(failed)} check(s) failed: {', '.join(failed)}")
        return ExitCode.CHECK_FAILURE
    logger.info(f"{command.value}: all {len(flags)} checks passed; wrote {len(store.written)} files")
    return ExitCode.PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nls_lab", description="Numerical laboratory for soliton asymptotics")
    parser.add_argument("command", choices=[command.value for command in Command])
    parser.add_argument("--config", default=None, help="experiment file; defaults when omitted")
    parser.add_argument("--out", default=FILE_CONFIG["output_dir"], help="output directory")
    parser.add_argument("--threads", type=int, default=RUNTIME_CONFIG["threads"], help="FFT and xi-chunk workers")
    parser.add_argument("--quiet", action="store_true", help="log warnings and errors only")
    return parser


def main(argv: Optional[Sequence[str]] = None, configure_logging: bool = True) -> int:
    args = build_parser().parse_args(argv)
    if configure_logging:
        configure_root_logger(logfile=LOG_CONFIG["logfile"],
                              loglevel="WARNING" if args.quiet else LOG_CONFIG["default_level"])
    set_threads(args.threads)

    try:
        config = parse_config(args.config) if args.config else ExperimentConfig()
        return int(run_command(args.command, config, args.out))
    except ConfigError as error:
        logger.error(f"Configuration error: {error}")
        return int(ExitCode.CONFIG_ERROR)
    except NumericalFailure as error:
        logger.error(f"Numerical failure: {error}")
        return int(ExitCode.NUMERICAL_FAILURE)
    except NlsLabError as error:
        logger.exception(f"{args.command} failed: {error}")
        return int(ExitCode.CHECK_FAILURE)
