from unittest.mock import patch, MagicMock

from rep_growth.cli.args import add_common_cli_args, create_cli_parser
from rep_growth.cli.commands import (
    EXIT_CONFIG,
    EXIT_DEGENERATE,
    EXIT_INVARIANT,
    EXIT_OK,
    format_float,
    run_command,
)
from rep_growth.cli.config import ConfigError
from rep_growth.core.gaussian_asymptotics import DegenerateModelError
from rep_growth.core.tensor_growth import NotACharacterError


def _args(tmp_path, command="growth"):
    args = MagicMock()
    args.command = command
    args.config = None
    args.group = "A1"
    args.rep = '[{"highest_weight": [1]}]'
    args.nmax = 3
    args.out = str(tmp_path)
    args.verbose = False
    return args


class TestCliBasic:
    """Basic test cases for the CLI functionality"""

    def test_add_common_cli_args(self):
        """Test adding common CLI arguments to a parser"""
        parser = MagicMock()
        add_common_cli_args(parser)

        assert parser.add_argument.call_count >= 6
        parser.add_argument.assert_any_call(
            "--nmax", help="Largest tensor power", type=int, default=None
        )

    def test_create_cli_parser(self):
        """Test creating a CLI parser"""
        parser = create_cli_parser()
        args = parser.parse_args(
            ["gauss", "--config", "experiment.json", "--out", "results", "--nmax", "12"]
        )
        assert args.command == "gauss"
        assert args.config == "experiment.json"
        assert args.out == "results"
        assert args.nmax == 12
        assert args.verbose is False

    def test_all_commands_registered(self):
        """Test that every command parses"""
        parser = create_cli_parser()
        for command in ["growth", "fit", "check", "gauss"]:
            assert parser.parse_args([command, "-v"]).verbose is True

    def test_format_float(self):
        """Test fixed 12-digit formatting"""
        assert format_float(0.5) == "5.000000000000e-01"
        assert format_float(float("nan")) == "nan"


class TestRunCommand:
    """Test cases for exit code mapping"""

    def test_success(self, tmp_path):
        """Test that a handler's code is returned"""
        handler = MagicMock(return_value=EXIT_OK)
        with patch.dict("rep_growth.cli.commands.COMMAND_HANDLERS", {"growth": handler}):
            assert run_command(_args(tmp_path)) == EXIT_OK
        config = handler.call_args[0][0]
        assert config.group == "A1"
        assert config.n_max == 3

    def test_config_error(self, tmp_path):
        """Test that config errors give exit 1"""
        args = _args(tmp_path)
        args.rep = '[{"highest_weight": [1, 0]}]'
        assert run_command(args) == EXIT_CONFIG

    def test_unknown_command(self, tmp_path):
        """Test an unknown command name"""
        assert run_command(_args(tmp_path, command="plot")) == EXIT_CONFIG

    def test_degenerate(self, tmp_path):
        """Test that degenerate models give exit 4"""
        handler = MagicMock(side_effect=DegenerateModelError("flat", (0, 1)))
        with patch.dict("rep_growth.cli.commands.COMMAND_HANDLERS", {"gauss": handler}):
            assert run_command(_args(tmp_path, "gauss")) == EXIT_DEGENERATE

    def test_not_a_character(self, tmp_path):
        """Test that extraction failures give exit 3"""
        handler = MagicMock(side_effect=NotACharacterError("negative", (1,)))
        with patch.dict("rep_growth.cli.commands.COMMAND_HANDLERS", {"growth": handler}):
            assert run_command(_args(tmp_path)) == EXIT_INVARIANT

    def test_handler_config_error(self, tmp_path):
        """Test config errors raised inside a command"""
        handler = MagicMock(side_effect=ConfigError("too large", "n_max"))
        with patch.dict("rep_growth.cli.commands.COMMAND_HANDLERS", {"check": handler}):
            assert run_command(_args(tmp_path, "check")) == EXIT_CONFIG

    @patch("rep_growth.cli.commands.set_verbose")
    def test_verbose(self, mock_set_verbose, tmp_path):
        """Test that -v switches logging to debug"""
        args = _args(tmp_path)
        args.verbose = True
        handler = MagicMock(return_value=EXIT_OK)
        with patch.dict("rep_growth.cli.commands.COMMAND_HANDLERS", {"growth": handler}):
            run_command(args)
        mock_set_verbose.assert_called_once_with(True)
