import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from nlslab import cli_io
from nlslab.cli_io import (
    DEFAULT_VALUES,
    ExperimentConfig,
    build_parser,
    main,
    parse_config,
    parse_config_text,
    run_command,
)
from nlslab.config import Command, ExitCode
from nlslab.errors import ConfigError
from nlslab.workspace.series_store import read_series

REFERENCE = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'configs', 'reference.cfg'))

SMALL_RUN = """
grid.n = 512
grid.L = 20.0
time.dt = 0.001
time.T = 0.1
time.store_every = 50
perturbation.amplitude = 0.0
"""


class TestConfigParsing:
    def test_reference_config_matches_defaults(self):
        config = parse_config(REFERENCE)
        assert config.values == DEFAULT_VALUES
        assert config["analysis.t_fit_max"] is None
        assert config.fit_max == config["time.T"]

    def test_omitted_keys_take_defaults(self):
        config = parse_config_text("grid.n = 1024\n")
        assert config["grid.n"] == 1024
        assert config["time.dt"] == DEFAULT_VALUES["time.dt"]
        assert config.grid.n_points == 1024

    def test_comments_and_blank_lines(self):
        config = parse_config_text("# header\n\nsoliton.omega0 = 2.0   # faster\n")
        assert config.soliton.omega == 2.0

    def test_grid_size_must_be_power_of_two(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("grid.n = 1000\n")
        assert info.value.key == "grid.n"
        assert "grid.n" in str(info.value)

    @pytest.mark.parametrize("text, key", [
        ("grid.width = 3\n", "grid.width"),
        ("grid.n = 8\n", "grid.n"),
        ("time.dt = 0.01\ntime.dt = 0.02\n", "time.dt"),
        ("time.T =\n", "time.T"),
        ("time.T = soon\n", "time.T"),
        ("perturbation.kind = square\n", "perturbation.kind"),
        ("frozen.n_xi = 2048\n", "frozen.n_xi"),
        ("analysis.t_fit_max = 5.0\n", "analysis.t_fit_max"),
    ])
    def test_invalid_entries_name_the_key(self, text, key):
        with pytest.raises(ConfigError) as info:
            parse_config_text(text)
        assert info.value.key == key

    def test_line_without_assignment(self):
        with pytest.raises(ConfigError):
            parse_config_text("grid.n 512\n", "broken.cfg")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(str(tmp_path / "absent.cfg"))

    def test_unknown_key_in_constructor(self):
        with pytest.raises(ConfigError):
            ExperimentConfig({"grid.size": 4})


class TestParser:
    def test_defaults(self):
        args = build_parser().parse_args(["simulate"])
        assert args.config is None
        assert not args.quiet

    def test_rejects_unknown_command(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["plot"])


class TestCommands:
    def test_simulate_writes_series(self, tmp_path):
        config = parse_config_text(SMALL_RUN)
        code = run_command("simulate", config, str(tmp_path))
        assert code == ExitCode.PASS
        conserved = read_series(str(tmp_path / "series" / "conserved.csv"))
        assert conserved.columns == ["t", "mass", "momentum", "energy", "boundary_mass", "flagged"]
        assert conserved.height == 3
        final = read_series(str(tmp_path / "series" / "field_final.csv"))
        assert final.columns == ["x", "re_psi", "im_psi"]
        assert final.height == 512

    def test_fit_modulation_on_pure_soliton(self, tmp_path):
        config = parse_config_text(SMALL_RUN)
        assert run_command("fit-modulation", config, str(tmp_path)) == ExitCode.PASS
        modulation = read_series(str(tmp_path / "series" / "modulation.csv"))
        assert modulation.height == 3
        assert "theta1" in modulation.columns

    def test_verify_dft_report(self, tmp_path):
        config = parse_config_text("grid.n = 2048\ngrid.L = 40.0\n")
        assert run_command("verify-dft", config, str(tmp_path)) == ExitCode.PASS
        report = read_series(str(tmp_path / "reports" / "dft.csv"))
        assert report["name"].to_list() == ["dft_annihilation", "scattering_relation", "dft_roundtrip"]
        assert all(report["pass"].to_list())

    def test_unknown_command(self, tmp_path):
        with pytest.raises(ValueError):
            run_command("plot", ExperimentConfig(), str(tmp_path))


class TestMain:
    def test_bad_config_exit_code(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("grid.n = 1000\n")
        code = main(["simulate", "--config", str(path), "--out", str(tmp_path)], configure_logging=False)
        assert code == ExitCode.CONFIG_ERROR

    def test_tiny_grid_exit_code(self, tmp_path):
        path = tmp_path / "tiny.cfg"
        path.write_text("grid.n = 8\n")
        code = main(["simulate", "--config", str(path), "--out", str(tmp_path)], configure_logging=False)
        assert code == ExitCode.CONFIG_ERROR

    def test_failed_checks_exit_code(self, tmp_path, monkeypatch):
        """A decay report with a failing check exits 1 from run_command and main."""
        monkeypatch.setitem(cli_io.COMMANDS, Command.DECAY_REPORT,
                            lambda config, store: {"u_linf": True, "asymptotic_error": False})
        assert run_command("decay-report", ExperimentConfig(), str(tmp_path)) == ExitCode.CHECK_FAILURE
        code = main(["decay-report", "--out", str(tmp_path)], configure_logging=False)
        assert code == int(ExitCode.CHECK_FAILURE) == 1

    def test_missing_config_exit_code(self, tmp_path):
        code = main(["simulate", "--config", str(tmp_path / "none.cfg")], configure_logging=False)
        assert code == ExitCode.CONFIG_ERROR

    def test_successful_run(self, tmp_path):
        path = tmp_path / "small.cfg"
        path.write_text(SMALL_RUN)
        code = main(["simulate", "--config", str(path), "--out", str(tmp_path / "out"), "--threads", "1"],
                    configure_logging=False)
        assert code == ExitCode.PASS
        assert (tmp_path / "out" / "series" / "conserved.csv").is_file()
